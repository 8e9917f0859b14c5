//! TF-IDF vocabulary fitting and document vectorization.
//!
//! ```text
//! tf(t, d)     = freq(t, d) / sum_i freq(t_i, d)
//! idf(t)       = ln(N / count(t))
//! tfidf(t, d)  = tf(t, d) * idf(t)
//! ```
//!
//! `N` is the number of training documents and `count(t)` the number of them
//! containing `t`. No smoothing is applied, so a term present in every
//! training document has zero weight. At transform time the TF denominator
//! counts every token of the document, in vocabulary or not.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use thiserror::Error;

use crate::preprocess::TokenizedDocument;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TfidfError {
    #[error("EmptyCorpus: no training documents")]
    EmptyCorpus,
    #[error("EmptyDocument: document {0} has no tokens")]
    EmptyDocument(usize),
    #[error("UnfittedModel: {0}")]
    UnfittedModel(String),
}

/// Vocabulary with per-term document frequencies. Term indices follow
/// lexicographic term order.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    term_to_index: HashMap<String, usize>,
    doc_freq: Vec<u32>,
    n_docs: u32,
}

impl Vocabulary {
    /// Builds a vocabulary from `(term, doc_freq)` pairs. Terms must be
    /// strictly increasing and every frequency in `1..=n_docs`.
    pub fn from_parts(entries: Vec<(String, u32)>, n_docs: u32) -> Result<Self, TfidfError> {
        if n_docs == 0 {
            return Err(TfidfError::UnfittedModel("vocabulary has N = 0".into()));
        }
        for w in entries.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(TfidfError::UnfittedModel(format!("terms out of order at `{}`", w[1].0)));
            }
        }
        if let Some((t, df)) = entries.iter().find(|(_, df)| *df == 0 || *df > n_docs) {
            return Err(TfidfError::UnfittedModel(format!(
                "term `{t}` has document frequency {df} outside 1..={n_docs}"
            )));
        }
        let (terms, doc_freq): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
        let term_to_index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(Self {
            terms,
            term_to_index,
            doc_freq,
            n_docs,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.term_to_index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_freq(&self) -> &[u32] {
        &self.doc_freq
    }

    pub fn n_docs(&self) -> u32 {
        self.n_docs
    }
}

/// Optional vocabulary pruning. Both are off by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct VocabOptions {
    /// Drop terms appearing in fewer than this many training documents.
    pub min_df: Option<u32>,
    /// Keep only the most document-frequent terms (ties broken by term order).
    pub max_vocab: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    pub vocab: Vocabulary,
    idf: Vec<f64>,
}

/// Sparse TF-IDF (or count) vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DocumentVector {
    /// `(term index, weight)`, sorted by index, no duplicate indices.
    pub entries: Vec<(usize, f64)>,
    /// Total tokens in the document, out-of-vocabulary ones included.
    pub doc_len: usize,
}

impl DocumentVector {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|k| self.entries[k].1)
            .unwrap_or(0.0)
    }
}

pub fn fit_vocabulary(train: &[TokenizedDocument]) -> Result<TfidfModel, TfidfError> {
    fit_vocabulary_with(train, VocabOptions::default())
}

pub fn fit_vocabulary_with(train: &[TokenizedDocument], opts: VocabOptions) -> Result<TfidfModel, TfidfError> {
    if train.is_empty() {
        return Err(TfidfError::EmptyCorpus);
    }
    if let Some(d) = train.iter().find(|d| d.tokens.is_empty()) {
        return Err(TfidfError::EmptyDocument(d.id));
    }
    let mut df: BTreeMap<&str, u32> = BTreeMap::new();
    for doc in train {
        let mut distinct: Vec<&str> = doc.tokens.iter().map(String::as_str).collect();
        distinct.sort_unstable();
        distinct.dedup();
        for t in distinct {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    let mut entries: Vec<(String, u32)> = df
        .into_iter()
        .filter(|&(_, c)| opts.min_df.map_or(true, |m| c >= m))
        .map(|(t, c)| (t.to_string(), c))
        .collect();
    if let Some(max) = opts.max_vocab {
        if entries.len() > max {
            let mut ranked: Vec<usize> = (0..entries.len()).collect();
            ranked.sort_by(|&a, &b| entries[b].1.cmp(&entries[a].1).then(a.cmp(&b)));
            let mut keep = vec![false; entries.len()];
            for &i in &ranked[..max] {
                keep[i] = true;
            }
            let mut k = keep.into_iter();
            entries.retain(|_| k.next().unwrap_or(false));
        }
    }
    let vocab = Vocabulary::from_parts(entries, train.len() as u32)?;
    Ok(TfidfModel::from_vocabulary(vocab))
}

/// `freq(term, d) / |d|`.
pub fn term_frequency(tokens: &[String], term: &str) -> Result<f64, TfidfError> {
    if tokens.is_empty() {
        return Err(TfidfError::EmptyDocument(0));
    }
    let freq = tokens.iter().filter(|t| *t == term).count();
    Ok(freq as f64 / tokens.len() as f64)
}

impl TfidfModel {
    pub fn from_vocabulary(vocab: Vocabulary) -> Self {
        let n = vocab.n_docs as f64;
        let idf = vocab.doc_freq.iter().map(|&c| (n / c as f64).ln()).collect();
        Self { vocab, idf }
    }

    /// Reassembles a model with stored IDF weights, checking their shape.
    pub fn from_parts(vocab: Vocabulary, idf: Vec<f64>) -> Result<Self, TfidfError> {
        if idf.len() != vocab.len() {
            return Err(TfidfError::UnfittedModel(format!(
                "{} idf weights for {} terms",
                idf.len(),
                vocab.len()
            )));
        }
        if idf.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(TfidfError::UnfittedModel("idf weights must be finite and >= 0".into()));
        }
        Ok(Self { vocab, idf })
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn idf_of(&self, term: &str) -> Option<f64> {
        self.vocab.index_of(term).map(|i| self.idf[i])
    }

    /// In-vocabulary term counts of `tokens`, keyed by index, in index order.
    fn counts(&self, tokens: &[String]) -> Vec<(usize, u32)> {
        let mut idx: Vec<usize> = tokens.iter().filter_map(|t| self.vocab.index_of(t)).collect();
        idx.sort_unstable();
        let mut out: Vec<(usize, u32)> = Vec::new();
        for i in idx {
            match out.last_mut() {
                Some((j, c)) if *j == i => *c += 1,
                _ => out.push((i, 1)),
            }
        }
        out
    }

    /// TF-IDF vector of `doc`. Zero-weight entries (idf = 0) are omitted.
    pub fn transform(&self, doc: &TokenizedDocument) -> Result<DocumentVector, TfidfError> {
        if doc.tokens.is_empty() {
            return Err(TfidfError::EmptyDocument(doc.id));
        }
        let len = doc.tokens.len();
        let entries = self
            .counts(&doc.tokens)
            .into_iter()
            .filter_map(|(i, c)| {
                let w = (c as f64 / len as f64) * self.idf[i];
                (w != 0.0).then_some((i, w))
            })
            .collect();
        Ok(DocumentVector { entries, doc_len: len })
    }

    /// Raw in-vocabulary counts, for the integer-count classifier variant.
    pub fn count_vector(&self, doc: &TokenizedDocument) -> DocumentVector {
        DocumentVector {
            entries: self
                .counts(&doc.tokens)
                .into_iter()
                .map(|(i, c)| (i, c as f64))
                .collect(),
            doc_len: doc.tokens.len(),
        }
    }

    /// Order-preserving parallel [`transform`](Self::transform).
    pub fn transform_batch(&self, docs: &[TokenizedDocument]) -> Result<Vec<DocumentVector>, TfidfError> {
        docs.par_iter().map(|d| self.transform(d)).collect()
    }
}
