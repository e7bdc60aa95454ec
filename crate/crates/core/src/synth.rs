//! Synthetic ticket corpora for benchmarks and tests.
//!
//! Words are random lowercase pseudo-words that survive cleaning unchanged.

use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{LabeledCorpus, RawTicket};
use crate::preprocess::Stopwords;
use crate::rng::rng_from_seed;

/// Shape of a noisy multi-class corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisySpec {
    pub n_classes: usize,
    pub n_docs: usize,
    /// Distinct keywords owned by each class.
    pub keywords_per_class: usize,
    /// Size of the vocabulary shared by all classes.
    pub shared_vocabulary: usize,
    /// Probability that a token is drawn from the shared vocabulary.
    pub noise: f64,
    pub min_len: usize,
    pub max_len: usize,
    /// Zipf exponent for keyword and class frequencies.
    pub zipf: f64,
}

impl Default for NoisySpec {
    fn default() -> Self {
        Self {
            n_classes: 18,
            n_docs: 2000,
            keywords_per_class: 30,
            shared_vocabulary: 300,
            noise: 0.3,
            min_len: 4,
            max_len: 12,
            zipf: 1.0,
        }
    }
}

fn label(c: usize) -> String {
    format!("category_{c:02}")
}

fn pseudo_words(rng: &mut ChaCha8Rng, n: usize, taken: &mut HashSet<String>) -> Vec<String> {
    let stop = Stopwords::builtin();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let len = rng.random_range(4..=8);
        let w: String = (0..len)
            .map(|_| rng.random_range(b'a'..=b'z') as char)
            .collect();
        if !stop.contains(&w) && taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn zipf_weights(n: usize, s: f64) -> Vec<f64> {
    (1..=n).map(|r| 1.0 / (r as f64).powf(s)).collect()
}

/// Keyword-driven classes with Zipfian keyword and class frequencies and a
/// shared noise vocabulary. Every class gets at least two documents.
pub fn noisy_corpus(spec: &NoisySpec, seed: u64) -> LabeledCorpus {
    let mut rng = rng_from_seed(seed);
    let mut taken = HashSet::new();
    let keywords: Vec<Vec<String>> = (0..spec.n_classes)
        .map(|_| pseudo_words(&mut rng, spec.keywords_per_class, &mut taken))
        .collect();
    let shared = pseudo_words(&mut rng, spec.shared_vocabulary, &mut taken);
    let keyword_dist =
        WeightedIndex::new(zipf_weights(spec.keywords_per_class, spec.zipf)).expect("weights");
    let class_dist =
        WeightedIndex::new(zipf_weights(spec.n_classes, spec.zipf * 0.5)).expect("weights");
    let shared_dist =
        WeightedIndex::new(zipf_weights(spec.shared_vocabulary, spec.zipf)).expect("weights");

    let classes: Vec<usize> = (0..spec.n_docs)
        .map(|i| {
            // first 2K docs cover every class twice
            if i < 2 * spec.n_classes {
                i % spec.n_classes
            } else {
                class_dist.sample(&mut rng)
            }
        })
        .collect();
    let tickets = classes
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let len = rng.random_range(spec.min_len..=spec.max_len);
            let words: Vec<&str> = (0..len)
                .map(|_| {
                    if rng.random_bool(spec.noise) {
                        shared[shared_dist.sample(&mut rng)].as_str()
                    } else {
                        keywords[c][keyword_dist.sample(&mut rng)].as_str()
                    }
                })
                .collect();
            RawTicket {
                id: format!("syn-{i:05}"),
                description: words.join(" "),
                label: Some(label(c)),
            }
        })
        .collect();
    LabeledCorpus::from_tickets(tickets).expect("generated ids are unique")
}

/// Disjoint class vocabularies. Every document of class c contains the
/// class anchor word plus 2 to 6 further words of that class.
pub fn separable_corpus(n_classes: usize, docs_per_class: usize, seed: u64) -> LabeledCorpus {
    let mut rng = rng_from_seed(seed);
    let mut taken = HashSet::new();
    let vocab: Vec<Vec<String>> = (0..n_classes)
        .map(|_| pseudo_words(&mut rng, 8, &mut taken))
        .collect();
    let mut tickets = Vec::with_capacity(n_classes * docs_per_class);
    for j in 0..docs_per_class {
        for (c, words) in vocab.iter().enumerate() {
            let extra = rng.random_range(2..=6);
            let mut doc = vec![words[0].as_str()];
            doc.extend((0..extra).map(|_| words[rng.random_range(1..words.len())].as_str()));
            tickets.push(RawTicket {
                id: format!("sep-{c:02}-{j:04}"),
                description: doc.join(" "),
                label: Some(label(c)),
            });
        }
    }
    LabeledCorpus::from_tickets(tickets).expect("generated ids are unique")
}
