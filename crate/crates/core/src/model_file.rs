//! Versioned JSON model files.
//!
//! A model file carries everything needed to score new text without the
//! original inputs: the pipeline configuration, the cleansing rules and the
//! full stopword list, the vocabulary with document frequencies, IDF
//! weights, and the classifier's log priors and log likelihoods. Arrays are
//! in vocabulary (lexicographic) order. Floats are written in shortest
//! round-trip form, so `load(save(m))` reproduces every parameter bit for
//! bit.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;
use crate::eval::ConfusionMatrix;
use crate::mnb::NbModel;
use crate::pipeline::{PipelineConfig, TrainedModel};
use crate::preprocess::{CleanseRules, Preprocessor, StopwordSet};
use crate::tfidf::{TfidfModel, Vocabulary};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("ModelIo: {0}")]
    Io(String),
    #[error("ModelParse: {0}")]
    Parse(String),
    #[error("VersionMismatch: model format {found}, this build reads {FORMAT_VERSION}")]
    VersionMismatch { found: u32 },
    #[error("InconsistentModel: {0}")]
    Inconsistent(String),
}

impl ModelFileError {
    pub fn code(&self) -> &'static str {
        match self {
            ModelFileError::Io(_) => "ModelIo",
            ModelFileError::Parse(_) => "ModelParse",
            ModelFileError::VersionMismatch { .. } => "VersionMismatch",
            ModelFileError::Inconsistent(_) => "InconsistentModel",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleEntry {
    pub name: String,
    pub pattern: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanseEntry {
    pub lowercase_first: bool,
    pub rules: Vec<RuleEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermEntry {
    pub term: String,
    pub doc_freq: u32,
}

/// On-disk layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub config: PipelineConfig,
    pub cleanse: CleanseEntry,
    pub stopwords: Vec<String>,
    pub n_docs: u32,
    pub vocabulary: Vec<TermEntry>,
    pub idf: Vec<f64>,
    pub classes: Vec<Label>,
    pub alpha: f64,
    pub log_prior: Vec<f64>,
    pub log_likelihood: Vec<Vec<f64>>,
    pub training_digest: String,
    pub train_matrix: Option<ConfusionMatrix>,
}

impl ModelFile {
    pub fn from_model(m: &TrainedModel) -> Self {
        let vocab = &m.tfidf.vocab;
        Self {
            format_version: FORMAT_VERSION,
            config: m.config.clone(),
            cleanse: CleanseEntry {
                lowercase_first: m.preprocessor.rules.lowercase_first,
                rules: m
                    .preprocessor
                    .rules
                    .pairs()
                    .map(|(n, p)| RuleEntry {
                        name: n.into(),
                        pattern: p.into(),
                    })
                    .collect(),
            },
            stopwords: m
                .preprocessor
                .stopwords
                .sorted_words()
                .into_iter()
                .map(String::from)
                .collect(),
            n_docs: vocab.n_docs(),
            vocabulary: vocab
                .terms()
                .iter()
                .zip(vocab.doc_freq())
                .map(|(t, &df)| TermEntry {
                    term: t.clone(),
                    doc_freq: df,
                })
                .collect(),
            idf: m.tfidf.idf().to_vec(),
            classes: m.nb.classes.clone(),
            alpha: m.nb.alpha,
            log_prior: m.nb.log_prior.clone(),
            log_likelihood: m.nb.log_likelihood.clone(),
            training_digest: m.training_digest.clone(),
            train_matrix: m.train_matrix,
        }
    }

    pub fn into_model(self) -> Result<TrainedModel, ModelFileError> {
        if self.format_version != FORMAT_VERSION {
            return Err(ModelFileError::VersionMismatch {
                found: self.format_version,
            });
        }
        let bad = |e: &dyn std::fmt::Display| ModelFileError::Inconsistent(e.to_string());
        let n_terms = self.vocabulary.len();
        if self.idf.len() != n_terms {
            return Err(ModelFileError::Inconsistent(format!(
                "|idf| = {} but |vocabulary| = {n_terms}",
                self.idf.len()
            )));
        }
        let rules = CleanseRules::from_pairs(
            self.cleanse.rules.iter().map(|r| (r.name.as_str(), r.pattern.as_str())),
            self.cleanse.lowercase_first,
        )
        .map_err(|e| bad(&e))?;
        let stopwords = StopwordSet::from_words(&self.stopwords, "model");
        let preprocessor = Preprocessor::new(rules, stopwords, self.config.min_token_len);

        let vocab = Vocabulary::from_parts(
            self.vocabulary.into_iter().map(|t| (t.term, t.doc_freq)).collect(),
            self.n_docs,
        )
        .map_err(|e| bad(&e))?;
        let tfidf = TfidfModel::from_parts(vocab, self.idf).map_err(|e| bad(&e))?;
        let nb = NbModel::from_parts(self.classes, self.log_prior, self.log_likelihood, self.alpha, n_terms)
            .map_err(|e| bad(&e))?;
        Ok(TrainedModel {
            config: self.config,
            preprocessor,
            tfidf,
            nb,
            training_digest: self.training_digest,
            train_matrix: self.train_matrix,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model file serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ModelFileError> {
        // Read the version first so an old or future file reports a version
        // mismatch rather than a schema error.
        #[derive(Deserialize)]
        struct Probe {
            format_version: u32,
        }
        let probe: Probe = serde_json::from_str(text).map_err(|e| ModelFileError::Parse(e.to_string()))?;
        if probe.format_version != FORMAT_VERSION {
            return Err(ModelFileError::VersionMismatch {
                found: probe.format_version,
            });
        }
        serde_json::from_str(text).map_err(|e| ModelFileError::Parse(e.to_string()))
    }
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<(), ModelFileError> {
    atomic_write(path.as_ref(), ModelFile::from_model(model).to_json().as_bytes())
        .map_err(|e| ModelFileError::Io(e.to_string()))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel, ModelFileError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ModelFileError::Io(format!("{}: {e}", path.display())))?;
    ModelFile::from_json(&text)?.into_model()
}

/// Writes to a temporary file next to `path`, then renames it into place,
/// so a failed write never leaves a partial file at `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
