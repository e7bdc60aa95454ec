//! Ticket ingestion, label bookkeeping and stratified train/test splits.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rng::rng_from_seed;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {error}")]
    Io { path: String, error: std::io::Error },
    #[error("malformed delimited file: {0}")]
    Csv(csv::Error),
    #[error("column '{0}' not found in header")]
    MissingColumn(String),
    #[error("no usable rows ({skipped} skipped)")]
    NoUsableRows { skipped: usize },
    #[error("duplicate ticket id '{0}'")]
    DuplicateId(String),
    #[error("label '{0}' is not in the label map")]
    UnknownLabel(String),
    #[error("need at least 2 classes, found {0}")]
    TooFewClasses(usize),
    #[error("class '{label}' has {count} instance(s); stratified split needs at least 2")]
    ClassTooSmall { label: String, count: usize },
    #[error("train fraction must lie in (0, 1), got {0}")]
    BadFraction(f64),
}

impl From<csv::Error> for CorpusError {
    fn from(e: csv::Error) -> Self {
        Self::Csv(e)
    }
}

/// One ticket as read from the source file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTicket {
    pub id: String,
    pub description: String,
    pub label: Option<String>,
}

/// Bijection between category names and class indices `0..K`.
///
/// Indices follow first-seen order and never change once assigned.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct LabelMap {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl From<Vec<String>> for LabelMap {
    fn from(names: Vec<String>) -> Self {
        let mut map = LabelMap::default();
        for n in names {
            map.intern(&n);
        }
        map
    }
}

impl From<LabelMap> for Vec<String> {
    fn from(map: LabelMap) -> Self {
        map.names
    }
}

impl LabelMap {
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Self {
        let mut map = LabelMap::default();
        for n in names {
            map.intern(n.as_ref());
        }
        map
    }

    /// Returns the index for `name`, assigning the next free one if unseen.
    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.names.get(index).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Labeled tickets plus their label vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCorpus {
    tickets: Vec<RawTicket>,
    labels: Vec<usize>,
    label_map: LabelMap,
    skipped: usize,
}

/// Options for [`load_csv`].
#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub text_column: String,
    pub label_column: String,
    /// Column holding ticket ids; row numbers are used when absent.
    pub id_column: Option<String>,
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            text_column: "description".into(),
            label_column: "category".into(),
            id_column: None,
            delimiter: b',',
        }
    }
}

impl LabeledCorpus {
    /// Builds a corpus from tickets that all carry labels. Labels are indexed
    /// in first-seen order.
    pub fn from_tickets(tickets: Vec<RawTicket>) -> Result<Self, CorpusError> {
        Self::with_label_map(tickets, LabelMap::default())
    }

    /// Like [`from_tickets`](Self::from_tickets) but starts from an existing
    /// label map, extending it with any unseen labels.
    pub fn with_label_map(
        tickets: Vec<RawTicket>,
        mut label_map: LabelMap,
    ) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        let mut labels = Vec::with_capacity(tickets.len());
        for t in &tickets {
            if !seen.insert(t.id.clone()) {
                return Err(CorpusError::DuplicateId(t.id.clone()));
            }
            let name = t
                .label
                .as_deref()
                .ok_or_else(|| CorpusError::UnknownLabel(String::new()))?;
            labels.push(label_map.intern(name));
        }
        Ok(Self {
            tickets,
            labels,
            label_map,
            skipped: 0,
        })
    }

    fn subset(&self, rows: &[usize]) -> Self {
        Self {
            tickets: rows.iter().map(|&i| self.tickets[i].clone()).collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            label_map: self.label_map.clone(),
            skipped: 0,
        }
    }

    pub fn tickets(&self) -> &[RawTicket] {
        &self.tickets
    }

    /// Class index of every ticket, aligned with [`tickets`](Self::tickets).
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_map(&self) -> &LabelMap {
        &self.label_map
    }

    pub fn len(&self) -> usize {
        self.tickets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tickets.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.label_map.len()
    }

    /// Rows dropped during ingestion for an empty description or label.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    /// SHA-256 over ids, descriptions and labels, hex encoded.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.tickets {
            for part in [&t.id, &t.description, t.label.as_deref().unwrap_or("")] {
                h.update((part.len() as u64).to_le_bytes());
                h.update(part.as_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

/// Reads a delimited UTF-8 file with a header row.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<LabeledCorpus, CorpusError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        error: source,
    })?;
    read_csv(file, opts)
}

/// Same as [`load_csv`] over any reader.
pub fn read_csv<R: std::io::Read>(
    reader: R,
    opts: &CsvOptions,
) -> Result<LabeledCorpus, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CorpusError::MissingColumn(name.to_string()))
    };
    let text_col = column(&opts.text_column)?;
    let label_col = column(&opts.label_column)?;
    let id_col = opts.id_column.as_deref().map(column).transpose()?;

    let mut tickets = Vec::new();
    let mut skipped = 0;
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let description = record.get(text_col).unwrap_or("").trim();
        let label = record.get(label_col).unwrap_or("").trim();
        if description.is_empty() || label.is_empty() {
            skipped += 1;
            continue;
        }
        let id = match id_col {
            Some(c) => record.get(c).unwrap_or("").trim().to_string(),
            None => (row + 1).to_string(),
        };
        tickets.push(RawTicket {
            id,
            description: description.to_string(),
            label: Some(label.to_string()),
        });
    }
    if tickets.is_empty() {
        return Err(CorpusError::NoUsableRows { skipped });
    }
    let mut corpus = LabeledCorpus::from_tickets(tickets)?;
    corpus.skipped = skipped;
    Ok(corpus)
}

/// Instance count per class index; length K.
pub fn class_histogram(corpus: &LabeledCorpus) -> Vec<usize> {
    let mut counts = vec![0; corpus.n_classes()];
    for &l in corpus.labels() {
        counts[l] += 1;
    }
    counts
}

/// Number of rows of a class with `n` members that go to the training side.
pub fn train_count(n: usize, train_fraction: f64) -> usize {
    // small epsilon so e.g. 0.7 * 30 lands on 21, not 20
    let floor = (train_fraction * n as f64 + 1e-9).floor() as usize;
    floor.max(1).min(n.saturating_sub(1))
}

/// Seeded per-class split. Each class keeps at least one row on each side.
///
/// Both halves preserve the original corpus order and share the full label
/// map.
pub fn stratified_split(
    corpus: &LabeledCorpus,
    train_fraction: f64,
    seed: u64,
) -> Result<(LabeledCorpus, LabeledCorpus), CorpusError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(CorpusError::BadFraction(train_fraction));
    }
    let k = corpus.n_classes();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &l) in corpus.labels().iter().enumerate() {
        by_class[l].push(i);
    }
    let mut rng = rng_from_seed(seed);
    let mut in_train = vec![false; corpus.len()];
    for (c, rows) in by_class.iter_mut().enumerate() {
        if rows.len() < 2 {
            return Err(CorpusError::ClassTooSmall {
                label: corpus.label_map().name(c).unwrap_or_default().to_string(),
                count: rows.len(),
            });
        }
        rows.shuffle(&mut rng);
        for &r in &rows[..train_count(rows.len(), train_fraction)] {
            in_train[r] = true;
        }
    }
    let (train, test): (Vec<usize>, Vec<usize>) = (0..corpus.len()).partition(|&i| in_train[i]);
    Ok((corpus.subset(&train), corpus.subset(&test)))
}
