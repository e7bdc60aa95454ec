//! Text cleaning, tokenization, stopword filtering and class rebalancing.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use rand::seq::index::sample;
use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::rng::rng_from_seed;

/// Version tag of the bundled English stopword list.
pub const BUILTIN_STOPWORDS_VERSION: &str = "en-v1";
const BUILTIN_STOPWORDS: &str = include_str!("../data/stopwords_en_v1.txt");

/// Noise removals, applied in this order before the non-alphabetic strip.
pub const DEFAULT_PATTERNS: [(&str, &str); 4] = [
    ("email", r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}"),
    ("phone", r"\+?\d[\d\-\.\s\(\)]{6,}\d"),
    ("date", r"\d{1,4}[-/]\d{1,2}[-/]\d{1,4}"),
    ("time", r"\d{1,2}:\d{2}(:\d{2})?(\s?[AaPp][Mm])?"),
];

pub const DEFAULT_MIN_TOKEN_LENGTH: usize = 2;

/// A lowercase stopword set with a version tag and a content hash.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords {
    version: String,
    hash: String,
    terms: Arc<HashSet<String>>,
}

impl Stopwords {
    /// The list shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_STOPWORDS_VERSION, BUILTIN_STOPWORDS)
    }

    /// Parses one term per line; blank lines are ignored and terms lowercased.
    pub fn parse(version: &str, content: &str) -> Self {
        let mut terms: Vec<String> = content
            .lines()
            .map(|l| l.trim().to_lowercase())
            .filter(|l| !l.is_empty())
            .collect();
        terms.sort();
        terms.dedup();
        let mut h = Sha256::new();
        for t in &terms {
            h.update(t.as_bytes());
            h.update(b"\n");
        }
        Self {
            version: version.to_string(),
            hash: hex::encode(h.finalize()),
            terms: Arc::new(terms.into_iter().collect()),
        }
    }

    pub fn from_file(path: impl AsRef<std::path::Path>) -> std::io::Result<Self> {
        let path = path.as_ref();
        let content = std::fs::read_to_string(path)?;
        let version = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "custom".into());
        Ok(Self::parse(&version, &content))
    }

    pub fn contains(&self, term: &str) -> bool {
        self.terms.contains(term)
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    /// SHA-256 over the sorted, newline-terminated terms.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Serializable identity of a cleaning setup. Patterns travel with the
/// artifact; the stopword list is identified by version and hash.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningSummary {
    pub patterns: Vec<(String, String)>,
    pub min_token_length: usize,
    pub stopwords_version: String,
    pub stopwords_hash: String,
}

#[derive(Debug, Clone)]
pub struct CleaningConfig {
    patterns: Vec<(String, Regex)>,
    stopwords: Stopwords,
    min_token_length: usize,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        Self::new(Stopwords::builtin(), DEFAULT_MIN_TOKEN_LENGTH)
    }
}

impl CleaningConfig {
    pub fn new(stopwords: Stopwords, min_token_length: usize) -> Self {
        let patterns = DEFAULT_PATTERNS
            .iter()
            .map(|(n, p)| {
                (
                    n.to_string(),
                    Regex::new(p).expect("built-in pattern compiles"),
                )
            })
            .collect();
        Self {
            patterns,
            stopwords,
            min_token_length,
        }
    }

    /// Rebuilds a config from a stored summary and the stopword list the
    /// caller has on hand. The caller is responsible for comparing hashes.
    pub fn from_summary(
        summary: &CleaningSummary,
        stopwords: Stopwords,
    ) -> Result<Self, regex::Error> {
        let patterns = summary
            .patterns
            .iter()
            .map(|(n, p)| Ok((n.clone(), Regex::new(p)?)))
            .collect::<Result<_, regex::Error>>()?;
        Ok(Self {
            patterns,
            stopwords,
            min_token_length: summary.min_token_length,
        })
    }

    pub fn summary(&self) -> CleaningSummary {
        CleaningSummary {
            patterns: self
                .patterns
                .iter()
                .map(|(n, r)| (n.clone(), r.as_str().to_string()))
                .collect(),
            min_token_length: self.min_token_length,
            stopwords_version: self.stopwords.version().to_string(),
            stopwords_hash: self.stopwords.hash().to_string(),
        }
    }

    pub fn stopwords(&self) -> &Stopwords {
        &self.stopwords
    }

    pub fn min_token_length(&self) -> usize {
        self.min_token_length
    }

    /// Convenience: [`clean_text`] followed by [`tokenize_and_filter`].
    pub fn process(&self, raw: &str) -> TokenDoc {
        tokenize_and_filter(&clean_text(raw, self), self)
    }
}

/// Ordered lowercase alphabetic terms of one document.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenDoc {
    pub tokens: Vec<String>,
}

impl TokenDoc {
    pub fn new<S: Into<String>>(tokens: impl IntoIterator<Item = S>) -> Self {
        Self {
            tokens: tokens.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Removes emails, phone numbers, dates, times and every non-letter, then
/// collapses whitespace and lowercases. Output contains only `[a-z ]`.
pub fn clean_text(raw: &str, config: &CleaningConfig) -> String {
    let mut text = raw.to_string();
    for (_, re) in &config.patterns {
        if re.is_match(&text) {
            text = re.replace_all(&text, " ").into_owned();
        }
    }
    let stripped: String = text
        .chars()
        .map(|c| {
            if c.is_ascii_alphabetic() {
                c.to_ascii_lowercase()
            } else {
                ' '
            }
        })
        .collect();
    stripped.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Splits cleaned text on whitespace and drops short tokens and stopwords.
pub fn tokenize_and_filter(cleaned: &str, config: &CleaningConfig) -> TokenDoc {
    TokenDoc {
        tokens: cleaned
            .split_whitespace()
            .filter(|t| t.len() >= config.min_token_length && !config.stopwords.contains(t))
            .map(str::to_string)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResampleMode {
    #[default]
    None,
    OversampleToMax,
    UndersampleToMin,
}

impl std::str::FromStr for ResampleMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Self::None),
            "oversample-to-max" | "oversample" => Ok(Self::OversampleToMax),
            "undersample-to-min" | "undersample" => Ok(Self::UndersampleToMin),
            other => Err(format!("unknown resample mode '{other}'")),
        }
    }
}

impl std::fmt::Display for ResampleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::OversampleToMax => "oversample-to-max",
            Self::UndersampleToMin => "undersample-to-min",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ResampleStrategy {
    pub mode: ResampleMode,
    pub seed: u64,
}

/// Random over- or under-sampling of `(item, class)` pairs.
///
/// Oversampling keeps every input row in order and appends, class by class
/// in ascending index order, rows drawn with replacement from that class.
/// Undersampling keeps a uniform sample without replacement of each class
/// and preserves the input order of the survivors.
pub fn resample<T: Clone>(dataset: &[(T, usize)], strategy: &ResampleStrategy) -> Vec<(T, usize)> {
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, (_, c)) in dataset.iter().enumerate() {
        by_class.entry(*c).or_default().push(i);
    }
    let mut rng = rng_from_seed(strategy.seed);
    match strategy.mode {
        ResampleMode::None => dataset.to_vec(),
        ResampleMode::OversampleToMax => {
            let target = by_class.values().map(Vec::len).max().unwrap_or(0);
            let mut out = dataset.to_vec();
            for rows in by_class.values() {
                for _ in rows.len()..target {
                    let pick = rows[rng.random_range(0..rows.len())];
                    out.push(dataset[pick].clone());
                }
            }
            out
        }
        ResampleMode::UndersampleToMin => {
            let target = by_class.values().map(Vec::len).min().unwrap_or(0);
            let mut keep = vec![false; dataset.len()];
            for rows in by_class.values() {
                for j in sample(&mut rng, rows.len(), target) {
                    keep[rows[j]] = true;
                }
            }
            dataset
                .iter()
                .zip(keep)
                .filter(|&(_, k)| k)
                .map(|(row, _)| row.clone())
                .collect()
        }
    }
}
