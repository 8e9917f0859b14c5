//! Multinomial naive Bayes over sparse document vectors.
//!
//! Fitting treats vector weights as (possibly fractional) pseudo-counts:
//!
//! ```text
//! log_prior[c]         = ln(docs_in_class[c] / total_docs)
//! S[c][j]              = sum of weight j over class-c training vectors
//! log_likelihood[c][j] = ln((S[c][j] + alpha) / (sum_j S[c][j] + alpha * |V|))
//! ```
//!
//! Scoring is `log_prior[c] + sum_j v[j] * log_likelihood[c][j]` over the
//! stored entries of `v`, with posteriors normalized by log-sum-exp.

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::Label;
use crate::tfidf::DocumentVector;

#[derive(Debug, Error, PartialEq)]
pub enum NbError {
    #[error("EmptyTrainingSet: no training vectors")]
    EmptyTrainingSet,
    #[error("SingleClass: only {0} documents present; both classes are required")]
    SingleClass(Label),
    #[error("NonPositiveAlpha: smoothing constant must be > 0, got {0}")]
    NonPositiveAlpha(f64),
    #[error("DimensionMismatch: term index {index} outside vocabulary of {vocab_size}")]
    DimensionMismatch { index: usize, vocab_size: usize },
    #[error("UnfittedModel: {0}")]
    UnfittedModel(String),
}

/// Two log-joint scores closer than this (relative to their magnitude) are
/// a tie and go to the first class in [`NbModel::classes`]. Scores that are
/// mathematically equal but reached through different roundings land here
/// instead of being decided by the last ulp.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NbModel {
    /// Always `[Fake, Real]`.
    pub classes: Vec<Label>,
    pub log_prior: Vec<f64>,
    /// `[class][term]`
    pub log_likelihood: Vec<Vec<f64>>,
    pub alpha: f64,
    pub vocab_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: Label,
    /// Per class, in `NbModel::classes` order.
    pub log_joint: [f64; 2],
    pub posterior: [f64; 2],
}

impl Prediction {
    pub fn posterior_of(&self, label: Label) -> f64 {
        self.posterior[label.index()]
    }
}

/// Compensated (Neumaier) summation.
fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Per-class summed feature weights, `[class][term]`.
///
/// Contributions to each cell are sorted before summation, so the result
/// does not depend on the order of `samples`.
pub fn class_weight_sums(samples: &[(DocumentVector, Label)], vocab_size: usize) -> Result<Vec<Vec<f64>>, NbError> {
    let mut sums = Vec::with_capacity(Label::ALL.len());
    for class in Label::ALL {
        let mut contrib: Vec<(usize, f64)> = Vec::new();
        for (v, _) in samples.iter().filter(|(_, l)| *l == class) {
            for &(j, w) in &v.entries {
                if j >= vocab_size {
                    return Err(NbError::DimensionMismatch { index: j, vocab_size });
                }
                contrib.push((j, w));
            }
        }
        contrib.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut row = vec![0.0; vocab_size];
        for chunk in contrib.chunk_by(|a, b| a.0 == b.0) {
            row[chunk[0].0] = neumaier_sum(chunk.iter().map(|&(_, w)| w));
        }
        sums.push(row);
    }
    Ok(sums)
}

impl NbModel {
    pub fn fit(samples: &[(DocumentVector, Label)], vocab_size: usize, alpha: f64) -> Result<Self, NbError> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(NbError::NonPositiveAlpha(alpha));
        }
        if samples.is_empty() {
            return Err(NbError::EmptyTrainingSet);
        }
        let counts: Vec<usize> = Label::ALL
            .iter()
            .map(|&c| samples.iter().filter(|(_, l)| *l == c).count())
            .collect();
        if let Some(k) = counts.iter().position(|&n| n == 0) {
            return Err(NbError::SingleClass(Label::ALL[k].other()));
        }
        let total = samples.len() as f64;
        let log_prior = counts.iter().map(|&n| (n as f64 / total).ln()).collect();

        let sums = class_weight_sums(samples, vocab_size)?;
        let log_likelihood = sums
            .iter()
            .map(|row| {
                let denom = (neumaier_sum(row.iter().copied()) + alpha * vocab_size as f64).ln();
                row.iter().map(|&s| (s + alpha).ln() - denom).collect()
            })
            .collect();

        Ok(Self {
            classes: Label::ALL.to_vec(),
            log_prior,
            log_likelihood,
            alpha,
            vocab_size,
        })
    }

    /// Reassembles a model from stored arrays, checking their shapes.
    pub fn from_parts(
        classes: Vec<Label>,
        log_prior: Vec<f64>,
        log_likelihood: Vec<Vec<f64>>,
        alpha: f64,
        vocab_size: usize,
    ) -> Result<Self, NbError> {
        if classes != Label::ALL {
            return Err(NbError::UnfittedModel(format!("unexpected class list {classes:?}")));
        }
        if log_prior.len() != classes.len() || log_likelihood.len() != classes.len() {
            return Err(NbError::UnfittedModel("class array lengths disagree".into()));
        }
        if log_likelihood.iter().any(|row| row.len() != vocab_size) {
            return Err(NbError::UnfittedModel(format!(
                "likelihood rows must have {vocab_size} entries"
            )));
        }
        let finite = log_prior
            .iter()
            .chain(log_likelihood.iter().flatten())
            .all(|x| x.is_finite());
        if !finite {
            return Err(NbError::UnfittedModel("non-finite parameter".into()));
        }
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(NbError::NonPositiveAlpha(alpha));
        }
        Ok(Self {
            classes,
            log_prior,
            log_likelihood,
            alpha,
            vocab_size,
        })
    }

    pub fn predict(&self, v: &DocumentVector) -> Result<Prediction, NbError> {
        let mut log_joint = [self.log_prior[0], self.log_prior[1]];
        for (c, score) in log_joint.iter_mut().enumerate() {
            let row = &self.log_likelihood[c];
            for &(j, w) in &v.entries {
                let ll = row.get(j).ok_or(NbError::DimensionMismatch {
                    index: j,
                    vocab_size: self.vocab_size,
                })?;
                *score += w * ll;
            }
        }

        let mut best = 0;
        for c in 1..log_joint.len() {
            let (a, b) = (log_joint[best], log_joint[c]);
            let tol = TIE_TOLERANCE * a.abs().max(b.abs()).max(1.0);
            if b - a > tol {
                best = c;
            }
        }

        let max = log_joint.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + log_joint.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
        let posterior = log_joint.map(|s| (s - lse).exp());

        Ok(Prediction {
            label: self.classes[best],
            log_joint,
            posterior,
        })
    }

    /// Order-preserving parallel [`predict`](Self::predict).
    pub fn predict_batch(&self, vs: &[DocumentVector]) -> Result<Vec<Prediction>, NbError> {
        vs.par_iter().map(|v| self.predict(v)).collect()
    }
}
