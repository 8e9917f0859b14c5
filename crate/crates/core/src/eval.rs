//! Confusion matrices, accuracy/precision/recall/F1 and train-vs-test gap
//! reports.
//!
//! Every metric is kept as an exact ratio of counts. Floating-point values
//! are derived from the ratio on demand and percentages are rounded half-up
//! to two decimals with integer arithmetic, so display rounding never
//! depends on binary representation error.

use std::fmt::{self, Write as _};

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::corpus::Label;

#[derive(Debug, Error, PartialEq, Eq, Clone, Copy)]
pub enum EvalError {
    #[error("EmptyEvaluation: nothing to evaluate")]
    EmptyEvaluation,
    #[error("UndefinedPrecision: no positive predictions (tp + fp = 0)")]
    UndefinedPrecision,
    #[error("UndefinedRecall: no positive documents (tp + fn = 0)")]
    UndefinedRecall,
    #[error("UndefinedF1: precision + recall = 0")]
    UndefinedF1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub positive_class: Label,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64, positive_class: Label) -> Self {
        Self {
            tp,
            tn,
            fp,
            fn_,
            positive_class,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// The same predictions counted with the other class as positive.
    pub fn swapped(&self) -> Self {
        Self::new(self.tn, self.tp, self.fn_, self.fp, self.positive_class.other())
    }
}

/// Counts `(predicted, actual)` pairs against `positive_class`.
pub fn confusion(
    pairs: impl IntoIterator<Item = (Label, Label)>,
    positive_class: Label,
) -> Result<ConfusionMatrix, EvalError> {
    let mut m = ConfusionMatrix::new(0, 0, 0, 0, positive_class);
    for (pred, actual) in pairs {
        match (pred == positive_class, actual == positive_class) {
            (true, true) => m.tp += 1,
            (false, false) => m.tn += 1,
            (true, false) => m.fp += 1,
            (false, true) => m.fn_ += 1,
        }
    }
    if m.total() == 0 {
        return Err(EvalError::EmptyEvaluation);
    }
    Ok(m)
}

/// A metric value as an exact ratio, or undefined when its denominator is 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Score {
    Ratio { num: u64, den: u64 },
    Undefined(EvalError),
}

impl Score {
    fn ratio(num: u64, den: u64, undefined: EvalError) -> Self {
        if den == 0 {
            Score::Undefined(undefined)
        } else {
            Score::Ratio { num, den }
        }
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            Score::Ratio { num, den } => Some(num as f64 / den as f64),
            Score::Undefined(_) => None,
        }
    }

    /// Percentage in hundredths, rounded half-up: `0.889830…` → `8898`.
    pub fn percent_hundredths(&self) -> Option<u64> {
        match *self {
            Score::Ratio { num, den } => {
                let (num, den) = (num as u128, den as u128);
                Some(((2 * 10_000 * num + den) / (2 * den)) as u64)
            }
            Score::Undefined(_) => None,
        }
    }

    /// `88.98%`, or `undefined`.
    pub fn display_percent(&self) -> String {
        match self.percent_hundredths() {
            Some(h) => format!("{}.{:02}%", h / 100, h % 100),
            None => "undefined".to_string(),
        }
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.value() {
            Some(v) => s.serialize_f64(v),
            None => s.serialize_str("undefined"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricsReport {
    pub accuracy: Score,
    pub precision: Score,
    pub recall: Score,
    pub f1: Score,
    pub matrix: ConfusionMatrix,
    pub n: u64,
}

impl Serialize for MetricsReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("MetricsReport", 6)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("matrix", &self.matrix)?;
        st.serialize_field("accuracy", &self.accuracy)?;
        st.serialize_field("precision", &self.precision)?;
        st.serialize_field("recall", &self.recall)?;
        st.serialize_field("f1", &self.f1)?;
        st.end()
    }
}

/// accuracy = (tp+tn)/n, precision = tp/(tp+fp), recall = tp/(tp+fn),
/// F1 = 2PR/(P+R) = 2tp/(2tp+fp+fn).
pub fn metrics(m: &ConfusionMatrix) -> Result<MetricsReport, EvalError> {
    let n = m.total();
    if n == 0 {
        return Err(EvalError::EmptyEvaluation);
    }
    let precision = Score::ratio(m.tp, m.tp + m.fp, EvalError::UndefinedPrecision);
    let recall = Score::ratio(m.tp, m.tp + m.fn_, EvalError::UndefinedRecall);
    let f1 = match (precision, recall) {
        (Score::Undefined(e), _) | (_, Score::Undefined(e)) => Score::Undefined(e),
        _ if m.tp == 0 => Score::Undefined(EvalError::UndefinedF1),
        _ => Score::Ratio {
            num: 2 * m.tp,
            den: 2 * m.tp + m.fp + m.fn_,
        },
    };
    Ok(MetricsReport {
        accuracy: Score::Ratio {
            num: m.tp + m.tn,
            den: n,
        },
        precision,
        recall,
        f1,
        matrix: *m,
        n,
    })
}

impl MetricsReport {
    /// Reasons for every undefined metric, in report order.
    pub fn undefined(&self) -> Vec<EvalError> {
        [self.precision, self.recall, self.f1]
            .into_iter()
            .filter_map(|s| match s {
                Score::Undefined(e) => Some(e),
                Score::Ratio { .. } => None,
            })
            .collect()
    }

    fn scores(&self) -> [(&'static str, Score); 4] {
        [
            ("accuracy", self.accuracy),
            ("precision", self.precision),
            ("recall", self.recall),
            ("f1", self.f1),
        ]
    }
}

/// Per-metric train − test differences in percentage points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub accuracy_pp: Option<f64>,
    pub precision_pp: Option<f64>,
    pub recall_pp: Option<f64>,
    pub f1_pp: Option<f64>,
    pub threshold_pp: f64,
    /// Train accuracy exceeds test accuracy by more than `threshold_pp`.
    pub overfitting: bool,
}

pub const DEFAULT_OVERFIT_THRESHOLD_PP: f64 = 5.0;

pub fn gap_report(train: &MetricsReport, test: &MetricsReport, threshold_pp: f64) -> GapReport {
    let delta = |a: Score, b: Score| Some(100.0 * (a.value()? - b.value()?));
    let accuracy_pp = delta(train.accuracy, test.accuracy);
    GapReport {
        accuracy_pp,
        precision_pp: delta(train.precision, test.precision),
        recall_pp: delta(train.recall, test.recall),
        f1_pp: delta(train.f1, test.f1),
        threshold_pp,
        overfitting: accuracy_pp.is_some_and(|d| d > threshold_pp),
    }
}

/// Round-half-up to two decimals for display.
pub fn display_pp(v: Option<f64>) -> String {
    match v {
        Some(v) => {
            let r = (v * 100.0).round() / 100.0;
            format!("{:+.2}", if r == 0.0 { 0.0 } else { r })
        }
        None => "undefined".into(),
    }
}

/// Externally reported percentages to check a report against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceScores {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Compares a report with reference percentages at two-decimal display
/// precision and explains each disagreement. A precision/recall pair that
/// matches with the two values exchanged is reported as a transposition.
pub fn reference_caveats(report: &MetricsReport, reference: &ReferenceScores) -> Vec<String> {
    let shown = |s: Score| s.percent_hundredths();
    let want = |v: f64| (v * 100.0).round() as u64;
    let fmt_h = |h: u64| format!("{}.{:02}", h / 100, h % 100);

    let refs = [reference.accuracy, reference.precision, reference.recall, reference.f1];
    let mut mismatched = [false; 4];
    for (k, ((_, s), r)) in report.scores().iter().zip(refs).enumerate() {
        mismatched[k] = shown(*s) != Some(want(r));
    }

    let mut out = Vec::new();
    let (p, r) = (shown(report.precision), shown(report.recall));
    let transposed =
        mismatched[1] && mismatched[2] && p == Some(want(reference.recall)) && r == Some(want(reference.precision));
    if transposed {
        out.push(format!(
            "precision/recall transposed: reference precision {} equals computed recall, reference recall {} equals computed precision (computed precision = tp/(tp+fp) = {}, recall = tp/(tp+fn) = {})",
            fmt_h(want(reference.precision)),
            fmt_h(want(reference.recall)),
            report.precision.display_percent(),
            report.recall.display_percent(),
        ));
    }
    for (k, ((name, s), r)) in report.scores().iter().zip(refs).enumerate() {
        if mismatched[k] && !(transposed && (k == 1 || k == 2)) {
            out.push(format!(
                "{name} mismatch: reference {} vs computed {}",
                fmt_h(want(r)),
                s.display_percent()
            ));
        }
    }
    out
}

/// Renders labelled reports as a confusion-matrix table followed by a
/// metrics table, all percentages at two decimals.
pub fn render_table(rows: &[(&str, &MetricsReport)]) -> String {
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(8);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>6}  {:>6}  {:>6}  {:>6}",
        "", "TP", "TN", "FP", "FN"
    );
    for (name, r) in rows {
        let m = &r.matrix;
        let _ = writeln!(
            out,
            "{name:<width$}  {:>6}  {:>6}  {:>6}  {:>6}",
            m.tp, m.tn, m.fp, m.fn_
        );
    }
    out.push('\n');
    let _ = writeln!(
        out,
        "{:<width$}  {:>9}  {:>9}  {:>9}  {:>9}",
        "", "Accuracy", "Precision", "Recall", "F1 Score"
    );
    for (name, r) in rows {
        let _ = writeln!(
            out,
            "{name:<width$}  {:>9}  {:>9}  {:>9}  {:>9}",
            r.accuracy.display_percent(),
            r.precision.display_percent(),
            r.recall.display_percent(),
            r.f1.display_percent(),
        );
    }
    if let Some((_, r)) = rows.first() {
        let _ = writeln!(out, "\npositive class: {}", r.matrix.positive_class);
    }
    for (name, r) in rows {
        for e in r.undefined() {
            let _ = writeln!(out, "{name}: {e}");
        }
    }
    out
}

pub fn render_gap(gap: &GapReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "train - test (pp): accuracy {}  precision {}  recall {}  f1 {}",
        display_pp(gap.accuracy_pp),
        display_pp(gap.precision_pp),
        display_pp(gap.recall_pp),
        display_pp(gap.f1_pp),
    );
    if gap.overfitting {
        let _ = writeln!(
            out,
            "warning: overfitting, accuracy gap exceeds {:.2} pp",
            gap.threshold_pp
        );
    }
    out
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_table(&[("", self)]))
    }
}
