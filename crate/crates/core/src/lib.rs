//! News credibility classification: tweet cleansing, TF-IDF features and a
//! multinomial naive Bayes classifier, with confusion-matrix evaluation.
//!
//! The usual flow is
//!
//! 1. [`corpus::load_dataset`] a labeled CSV,
//! 2. [`preprocess::clean_dataset`] to drop retweets and duplicates,
//! 3. [`pipeline::train`] to split, vectorize and fit,
//! 4. [`model_file::save_model`] / [`model_file::load_model`] to persist,
//! 5. [`pipeline::TrainedModel::evaluate`] for a [`eval::MetricsReport`].

pub mod corpus;
pub mod eval;
pub mod mnb;
pub mod model_file;
pub mod pipeline;
pub mod preprocess;
pub mod synth;
pub mod tfidf;

pub use corpus::{Dataset, Fraction, Label, LabeledDocument, SplitConfig};
pub use eval::{ConfusionMatrix, GapReport, MetricsReport, Score};
pub use mnb::{NbModel, Prediction};
pub use model_file::{load_model, save_model, ModelFile};
pub use pipeline::{FeatureMode, PipelineConfig, PipelineError, TrainedModel};
pub use preprocess::{CleanseRules, Preprocessor, StopwordSet, TokenizedDocument};
pub use tfidf::{DocumentVector, TfidfModel, Vocabulary};

/// Default split seed.
pub const DEFAULT_SEED: u64 = 20220509;

/// Default additive (Laplace) smoothing.
pub const DEFAULT_ALPHA: f64 = 1.0;
