//! End-to-end training and inference: split, preprocess, TF-IDF, naive Bayes.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{stratified_split, CorpusError, Dataset, Fraction, Label, SplitConfig};
use crate::eval::{confusion, metrics, ConfusionMatrix, EvalError, MetricsReport};
use crate::mnb::{NbError, NbModel, Prediction};
use crate::model_file::ModelFileError;
use crate::preprocess::{PreprocessError, Preprocessor, TokenizedDocument};
use crate::tfidf::{fit_vocabulary_with, DocumentVector, TfidfError, TfidfModel, VocabOptions};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Tfidf(#[from] TfidfError),
    #[error(transparent)]
    Nb(#[from] NbError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    ModelFile(#[from] ModelFileError),
}

impl PipelineError {
    /// Short machine-readable name of the failure, e.g. `SingleClass`.
    pub fn code(&self) -> &'static str {
        match self {
            PipelineError::Corpus(e) => match e {
                CorpusError::MissingColumn(_) => "MissingColumn",
                CorpusError::BadLabel { .. } => "BadLabel",
                CorpusError::EmptyText(_) => "EmptyText",
                CorpusError::IoFailure(_) => "IoFailure",
                CorpusError::EmptyDataset => "EmptyDataset",
                CorpusError::DegenerateClass(_) => "DegenerateClass",
                CorpusError::EmptyPartition(_) => "EmptyPartition",
                CorpusError::InvalidFraction(_) => "InvalidFraction",
            },
            PipelineError::Preprocess(e) => match e {
                PreprocessError::InvalidPattern { .. } => "InvalidPattern",
                PreprocessError::MalformedRule { .. } => "MalformedRule",
                PreprocessError::IoFailure(_) => "IoFailure",
            },
            PipelineError::Tfidf(e) => match e {
                TfidfError::EmptyCorpus => "EmptyCorpus",
                TfidfError::EmptyDocument(_) => "EmptyDocument",
                TfidfError::UnfittedModel(_) => "UnfittedModel",
            },
            PipelineError::Nb(e) => match e {
                NbError::EmptyTrainingSet => "EmptyTrainingSet",
                NbError::SingleClass(_) => "SingleClass",
                NbError::NonPositiveAlpha(_) => "NonPositiveAlpha",
                NbError::DimensionMismatch { .. } => "DimensionMismatch",
                NbError::UnfittedModel(_) => "UnfittedModel",
            },
            PipelineError::Eval(e) => match e {
                EvalError::EmptyEvaluation => "EmptyEvaluation",
                EvalError::UndefinedPrecision => "UndefinedPrecision",
                EvalError::UndefinedRecall => "UndefinedRecall",
                EvalError::UndefinedF1 => "UndefinedF1",
            },
            PipelineError::ModelFile(e) => e.code(),
        }
    }
}

/// What the classifier consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMode {
    #[default]
    Tfidf,
    /// Raw in-vocabulary term counts.
    Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub test_fraction: Fraction,
    pub stratified: bool,
    pub alpha: f64,
    pub stopword_paths: Vec<String>,
    pub positive_class: Label,
    pub min_token_len: usize,
    pub features: FeatureMode,
    pub vocab: VocabOptions,
    pub stemmer: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: crate::DEFAULT_SEED,
            test_fraction: SplitConfig::default().test_fraction,
            stratified: true,
            alpha: crate::DEFAULT_ALPHA,
            stopword_paths: Vec::new(),
            positive_class: Label::Fake,
            min_token_len: crate::preprocess::DEFAULT_MIN_TOKEN_LEN,
            features: FeatureMode::Tfidf,
            vocab: VocabOptions::default(),
            stemmer: "identity".into(),
        }
    }
}

impl PipelineConfig {
    pub fn split_config(&self) -> SplitConfig {
        SplitConfig {
            test_fraction: self.test_fraction,
            seed: self.seed,
            stratified: self.stratified,
        }
    }
}

/// A fitted preprocessor + vectorizer + classifier.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub config: PipelineConfig,
    pub preprocessor: Preprocessor,
    pub tfidf: TfidfModel,
    pub nb: NbModel,
    pub training_digest: String,
    /// Self-classification counts on the training partition.
    pub train_matrix: Option<ConfusionMatrix>,
}

/// One scored document.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub prediction: Prediction,
    /// No token of the document is in the vocabulary, so the prediction is
    /// the prior.
    pub oov: bool,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: TrainedModel,
    pub train: Dataset,
    pub test: Dataset,
    /// Self-classification of the training partition.
    pub train_report: MetricsReport,
    /// Training documents with no tokens left after preprocessing; they are
    /// excluded from fitting but still scored in `train_report`.
    pub skipped_empty: usize,
}

/// SHA-256 over `label:len:text` records of the dataset, in order.
pub fn dataset_digest(ds: &Dataset) -> String {
    let mut h = Sha256::new();
    for d in &ds.documents {
        h.update(format!("{}:{}:", d.label, d.text.len()));
        h.update(d.text.as_bytes());
        h.update(b"\n");
    }
    let hex: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

/// Feature vector of `doc`; a document without tokens maps to the empty vector.
pub fn vectorize(tfidf: &TfidfModel, mode: FeatureMode, doc: &TokenizedDocument) -> DocumentVector {
    if doc.tokens.is_empty() {
        return DocumentVector::default();
    }
    match mode {
        FeatureMode::Tfidf => tfidf.transform(doc).expect("non-empty document"),
        FeatureMode::Counts => tfidf.count_vector(doc),
    }
}

impl TrainedModel {
    pub fn vectorize(&self, doc: &TokenizedDocument) -> DocumentVector {
        vectorize(&self.tfidf, self.config.features, doc)
    }

    fn score_tokens(&self, doc: &TokenizedDocument) -> Result<Scored, PipelineError> {
        let oov = doc.tokens.iter().all(|t| self.tfidf.vocab.index_of(t).is_none());
        let prediction = self.nb.predict(&self.vectorize(doc))?;
        Ok(Scored { prediction, oov })
    }

    pub fn predict_text(&self, text: &str) -> Result<Scored, PipelineError> {
        let doc = TokenizedDocument {
            id: 0,
            tokens: self.preprocessor.tokens(text),
            label: None,
        };
        self.score_tokens(&doc)
    }

    /// Scores every document of `ds`, preserving order.
    pub fn predict_dataset(&self, ds: &Dataset) -> Result<Vec<Scored>, PipelineError> {
        use rayon::prelude::*;
        self.preprocessor
            .process_dataset(ds)
            .par_iter()
            .map(|d| self.score_tokens(d))
            .collect()
    }

    pub fn evaluate(&self, ds: &Dataset, positive_class: Label) -> Result<MetricsReport, PipelineError> {
        let scored = self.predict_dataset(ds)?;
        let pairs = scored
            .iter()
            .zip(&ds.documents)
            .map(|(s, d)| (s.prediction.label, d.label));
        Ok(metrics(&confusion(pairs, positive_class)?)?)
    }
}

/// Fits a model on `ds` using an already configured preprocessor.
pub fn train(ds: &Dataset, cfg: &PipelineConfig, preprocessor: Preprocessor) -> Result<TrainOutcome, PipelineError> {
    if ds.is_empty() {
        return Err(CorpusError::EmptyDataset.into());
    }
    if let [only] = ds.labels_present()[..] {
        return Err(NbError::SingleClass(only).into());
    }
    let (train_ds, test_ds) = stratified_split(ds, &cfg.split_config())?;

    let tokenized = preprocessor.process_dataset(&train_ds);
    let fit_docs: Vec<TokenizedDocument> = tokenized.iter().filter(|d| !d.tokens.is_empty()).cloned().collect();
    let skipped_empty = tokenized.len() - fit_docs.len();
    let tfidf = fit_vocabulary_with(&fit_docs, cfg.vocab)?;

    let samples: Vec<(DocumentVector, Label)> = fit_docs
        .iter()
        .map(|d| (vectorize(&tfidf, cfg.features, d), d.label.expect("labeled")))
        .collect();
    let nb = NbModel::fit(&samples, tfidf.vocab.len(), cfg.alpha)?;
    let mut model = TrainedModel {
        config: cfg.clone(),
        preprocessor,
        tfidf,
        nb,
        training_digest: dataset_digest(&train_ds),
        train_matrix: None,
    };

    let train_report = model.evaluate(&train_ds, cfg.positive_class)?;
    model.train_matrix = Some(train_report.matrix);
    Ok(TrainOutcome {
        model,
        train: train_ds,
        test: test_ds,
        train_report,
        skipped_empty,
    })
}
