//! Labeled dataset ingestion and deterministic train/test splitting.
//!
//! Datasets are read from delimited text (RFC-4180 quoting, UTF-8) with a
//! header row. Splits are driven by a [`SplitMix64`] stream seeded from
//! [`SplitConfig::seed`], so a given `(dataset, config)` pair always yields the
//! same partition on every platform.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand_core::RngCore;
use rand_core::SeedableRng;
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while loading or splitting a dataset.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("MissingColumn: header has no column named `{0}`")]
    MissingColumn(String),
    #[error("BadLabel: row {row} has label `{value}`, expected fake or real")]
    BadLabel { row: usize, value: String },
    #[error("EmptyText: row {0} has an empty article")]
    EmptyText(usize),
    #[error("IoFailure: {0}")]
    IoFailure(String),
    #[error("EmptyDataset: dataset has no documents")]
    EmptyDataset,
    #[error("DegenerateClass: class {0} would have an empty training partition")]
    DegenerateClass(Label),
    #[error("EmptyPartition: split leaves the {0} partition empty")]
    EmptyPartition(&'static str),
    #[error("InvalidFraction: `{0}` is not a fraction strictly between 0 and 1")]
    InvalidFraction(String),
}

impl From<csv::Error> for CorpusError {
    fn from(e: csv::Error) -> Self {
        CorpusError::IoFailure(e.to_string())
    }
}

impl From<std::io::Error> for CorpusError {
    fn from(e: std::io::Error) -> Self {
        CorpusError::IoFailure(e.to_string())
    }
}

/// News credibility class.
///
/// Variant order is the model's class order: `Fake` sorts first, which makes
/// it the winner of exact score ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Fake,
    Real,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Fake, Label::Real];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Fake => "fake",
            Label::Real => "real",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn other(self) -> Label {
        match self {
            Label::Fake => Label::Real,
            Label::Real => Label::Fake,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("fake") {
            Ok(Label::Fake)
        } else if s.eq_ignore_ascii_case("real") {
            Ok(Label::Real)
        } else {
            Err(s.to_string())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDocument {
    /// 0-based row index within the source file.
    pub id: usize,
    pub text: String,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub documents: Vec<LabeledDocument>,
    /// Path the documents were read from, or a synthetic description.
    pub provenance: String,
}

impl Dataset {
    pub fn new(documents: Vec<LabeledDocument>, provenance: impl Into<String>) -> Self {
        Self {
            documents,
            provenance: provenance.into(),
        }
    }

    /// Builds a dataset from `(label, text)` pairs, assigning ids in order.
    pub fn from_pairs<S: Into<String>>(
        pairs: impl IntoIterator<Item = (Label, S)>,
        provenance: impl Into<String>,
    ) -> Self {
        let documents = pairs
            .into_iter()
            .enumerate()
            .map(|(id, (label, text))| LabeledDocument {
                id,
                text: text.into(),
                label,
            })
            .collect();
        Self::new(documents, provenance)
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.documents.iter().filter(|d| d.label == label).count()
    }

    /// Labels that occur at least once, in class order.
    pub fn labels_present(&self) -> Vec<Label> {
        Label::ALL
            .into_iter()
            .filter(|&l| self.documents.iter().any(|d| d.label == l))
            .collect()
    }
}

/// Column and delimiter settings for [`load_dataset_with`].
#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub label_column: String,
    pub text_column: String,
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            label_column: "label".into(),
            text_column: "article".into(),
            delimiter: b',',
        }
    }
}

/// Loads a comma-delimited dataset with the given label and text columns.
pub fn load_dataset(path: impl AsRef<Path>, label_column: &str, text_column: &str) -> Result<Dataset, CorpusError> {
    load_dataset_with(
        path,
        &CsvOptions {
            label_column: label_column.into(),
            text_column: text_column.into(),
            ..CsvOptions::default()
        },
    )
}

pub fn load_dataset_with(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset, CorpusError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| CorpusError::IoFailure(format!("{}: {e}", path.display())))?;
    let mut ds = read_dataset(file, opts)?;
    ds.provenance = path.display().to_string();
    Ok(ds)
}

/// Reads a dataset from any reader. Row numbers in errors are 0-based data rows.
pub fn read_dataset<R: std::io::Read>(reader: R, opts: &CsvOptions) -> Result<Dataset, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(true)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CorpusError::MissingColumn(name.to_string()))
    };
    let label_idx = find(&opts.label_column)?;
    let text_idx = find(&opts.text_column)?;

    let mut documents = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let raw_label = record.get(label_idx).unwrap_or("");
        let label = raw_label
            .parse::<Label>()
            .map_err(|value| CorpusError::BadLabel { row, value })?;
        let text = record.get(text_idx).unwrap_or("");
        if text.trim().is_empty() {
            return Err(CorpusError::EmptyText(row));
        }
        documents.push(LabeledDocument {
            id: row,
            text: text.to_string(),
            label,
        });
    }
    Ok(Dataset::new(documents, String::new()))
}

/// Writes `label,article` rows (or the configured column names) to `writer`.
pub fn write_dataset<W: std::io::Write>(writer: W, ds: &Dataset, opts: &CsvOptions) -> Result<(), CorpusError> {
    let mut wtr = csv::WriterBuilder::new().delimiter(opts.delimiter).from_writer(writer);
    wtr.write_record([opts.label_column.as_str(), opts.text_column.as_str()])?;
    for doc in &ds.documents {
        wtr.write_record([doc.label.as_str(), doc.text.as_str()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// An exact fraction strictly between 0 and 1.
///
/// Kept rational so per-class floor/round counts are computed without
/// floating-point drift (`0.3 * 10` must give 3, not 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fraction {
    num: u64,
    den: u64,
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Result<Self, CorpusError> {
        if den == 0 || num == 0 || num >= den {
            return Err(CorpusError::InvalidFraction(format!("{num}/{den}")));
        }
        let g = gcd(num, den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `floor(self * n)`
    pub fn floor_mul(&self, n: usize) -> usize {
        ((self.num as u128 * n as u128) / self.den as u128) as usize
    }

    /// `round(self * n)`, halves rounded up.
    pub fn round_mul(&self, n: usize) -> usize {
        ((2 * self.num as u128 * n as u128 + self.den as u128) / (2 * self.den as u128)) as usize
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Fraction {
    type Err = CorpusError;

    /// Accepts `a/b` or a plain decimal such as `0.30`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CorpusError::InvalidFraction(s.to_string());
        let t = s.trim();
        if let Some((a, b)) = t.split_once('/') {
            let a = a.trim().parse().map_err(|_| bad())?;
            let b = b.trim().parse().map_err(|_| bad())?;
            return Fraction::new(a, b).map_err(|_| bad());
        }
        let (int, frac) = t.split_once('.').unwrap_or((t, ""));
        if frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) || (int.is_empty() && frac.is_empty()) {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        if int != 0 {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let num = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        Fraction::new(num, den).map_err(|_| bad())
    }
}

impl Serialize for Fraction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub test_fraction: Fraction,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            test_fraction: Fraction { num: 3, den: 10 },
            seed: crate::DEFAULT_SEED,
            stratified: true,
        }
    }
}

/// Draws a uniform integer in `0..bound` by rejection sampling on the
/// raw SplitMix64 output, so no value is favored when `bound` does not
/// divide 2^64.
fn uniform_below(rng: &mut SplitMix64, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % bound;
        }
    }
}

/// In-place Fisher–Yates shuffle: for `i` from `n-1` down to 1, swap
/// element `i` with a uniform pick from `0..=i`.
pub fn seeded_shuffle<T>(items: &mut [T], rng: &mut SplitMix64) {
    for i in (1..items.len()).rev() {
        let j = uniform_below(rng, i as u64 + 1) as usize;
        items.swap(i, j);
    }
}

/// Splits `ds` into `(train, test)`.
///
/// Stratified: each class contributes `floor(test_fraction * class_count)`
/// test documents. Unstratified: `round(test_fraction * |ds|)` documents go to
/// test. Both partitions keep the original relative document order.
pub fn stratified_split(ds: &Dataset, cfg: &SplitConfig) -> Result<(Dataset, Dataset), CorpusError> {
    if ds.is_empty() {
        return Err(CorpusError::EmptyDataset);
    }
    let mut rng = SplitMix64::seed_from_u64(cfg.seed);
    let mut is_test = vec![false; ds.len()];

    if cfg.stratified {
        for label in Label::ALL {
            let mut members: Vec<usize> = ds
                .documents
                .iter()
                .enumerate()
                .filter(|(_, d)| d.label == label)
                .map(|(i, _)| i)
                .collect();
            if members.is_empty() {
                continue;
            }
            let n_test = cfg.test_fraction.floor_mul(members.len());
            if n_test >= members.len() {
                return Err(CorpusError::DegenerateClass(label));
            }
            seeded_shuffle(&mut members, &mut rng);
            for &i in &members[..n_test] {
                is_test[i] = true;
            }
        }
    } else {
        let n_test = cfg.test_fraction.round_mul(ds.len());
        if n_test >= ds.len() {
            return Err(CorpusError::EmptyPartition("train"));
        }
        let mut order: Vec<usize> = (0..ds.len()).collect();
        seeded_shuffle(&mut order, &mut rng);
        for &i in &order[..n_test] {
            is_test[i] = true;
        }
    }

    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (doc, t) in ds.documents.iter().zip(is_test) {
        if t {
            test.push(doc.clone());
        } else {
            train.push(doc.clone());
        }
    }
    Ok((
        Dataset::new(train, format!("{} [train]", ds.provenance)),
        Dataset::new(test, format!("{} [test]", ds.provenance)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn opts() -> CsvOptions {
        CsvOptions::default()
    }

    fn balanced(n_per_class: usize) -> Dataset {
        let pairs = (0..2 * n_per_class).map(|i| {
            let label = if i % 2 == 0 { Label::Fake } else { Label::Real };
            (label, format!("doc {i}"))
        });
        Dataset::from_pairs(pairs, "synthetic")
    }

    #[test]
    fn loads_table_rows_in_order() {
        let csv = "label,article\n\
                   real,said difficult impose wealth tax instead suggested progressive tax system undo effects train law live\n\
                   fake,icymi pink light display month commemorates support president suggested fb page photo tokyo landmark read\n";
        let ds = read_dataset(csv.as_bytes(), &opts()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(
            ds.documents.iter().map(|d| d.label).collect::<Vec<_>>(),
            vec![Label::Real, Label::Fake]
        );
        assert_eq!(ds.documents[1].id, 1);
    }

    #[test]
    fn zero_rows_is_empty_dataset() {
        let ds = read_dataset("label,article\n".as_bytes(), &opts()).unwrap();
        assert!(ds.is_empty());
    }

    #[test]
    fn label_parsing_is_case_insensitive() {
        let ds = read_dataset("label,article\nREAL,x\nFaKe,y\n".as_bytes(), &opts()).unwrap();
        assert_eq!(ds.documents[0].label, Label::Real);
        assert_eq!(ds.documents[1].label, Label::Fake);
    }

    #[test]
    fn quoted_fields_and_extra_columns() {
        let csv = "id,article,label\n7,\"hello, \"\"world\"\"\",real\n";
        let ds = read_dataset(csv.as_bytes(), &opts()).unwrap();
        assert_eq!(ds.documents[0].text, "hello, \"world\"");
    }

    #[test]
    fn custom_delimiter() {
        let o = CsvOptions {
            delimiter: b'\t',
            ..opts()
        };
        let ds = read_dataset("label\tarticle\nfake\ta, b\n".as_bytes(), &o).unwrap();
        assert_eq!(ds.documents[0].text, "a, b");
    }

    #[test]
    fn load_errors() {
        let e = read_dataset("label,text\nreal,x\n".as_bytes(), &opts()).unwrap_err();
        assert!(matches!(e, CorpusError::MissingColumn(c) if c == "article"));
        let e = read_dataset("label,article\nreal,x\nsatire,y\n".as_bytes(), &opts()).unwrap_err();
        assert!(matches!(e, CorpusError::BadLabel { row: 1, .. }));
        let e = read_dataset("label,article\nreal,\"   \"\n".as_bytes(), &opts()).unwrap_err();
        assert!(matches!(e, CorpusError::EmptyText(0)));
        let e = load_dataset("/nonexistent/file.csv", "label", "article").unwrap_err();
        assert!(matches!(e, CorpusError::IoFailure(_)));
    }

    #[test]
    fn fraction_parsing() {
        let f: Fraction = "0.30".parse().unwrap();
        assert_eq!((f.numer(), f.denom()), (3, 10));
        let f: Fraction = "1/4".parse().unwrap();
        assert_eq!(f.floor_mul(10), 2);
        assert_eq!(f.round_mul(10), 3);
        for bad in ["0", "1", "1.5", "-0.2", "abc", "0.", "3/2", "0/5"] {
            assert!(bad.parse::<Fraction>().is_err(), "{bad}");
        }
        let f: Fraction = ".5".parse().unwrap();
        assert_eq!(f, Fraction::new(1, 2).unwrap());
    }

    #[test]
    fn balanced_790_splits_554_236() {
        let ds = balanced(395);
        let cfg = SplitConfig::default();
        let (train, test) = stratified_split(&ds, &cfg).unwrap();
        assert_eq!((train.len(), test.len()), (554, 236));
        assert_eq!(test.count(Label::Fake), 118);
        assert_eq!(test.count(Label::Real), 118);
    }

    #[test]
    fn unstratified_half_split() {
        let ds = Dataset::from_pairs((0..10).map(|i| (Label::Real, format!("d{i}"))), "x");
        let cfg = SplitConfig {
            test_fraction: "0.5".parse().unwrap(),
            seed: 1,
            stratified: false,
        };
        let (train, test) = stratified_split(&ds, &cfg).unwrap();
        assert_eq!((train.len(), test.len()), (5, 5));
        let a: BTreeSet<_> = train.documents.iter().map(|d| d.id).collect();
        let b: BTreeSet<_> = test.documents.iter().map(|d| d.id).collect();
        assert!(a.is_disjoint(&b));
        assert_eq!(a.union(&b).count(), 10);
    }

    #[test]
    fn split_is_seed_determined() {
        let ds = balanced(20);
        let ids = |seed| {
            let cfg = SplitConfig {
                seed,
                ..SplitConfig::default()
            };
            let (_, test) = stratified_split(&ds, &cfg).unwrap();
            test.documents.iter().map(|d| d.id).collect::<Vec<_>>()
        };
        assert_eq!(ids(9), ids(9));
        let differing = (0..100u64).filter(|&s| ids(2 * s) != ids(2 * s + 1)).count();
        assert_eq!(differing, 100);
    }

    #[test]
    fn split_errors() {
        let empty = Dataset::default();
        assert!(matches!(
            stratified_split(&empty, &SplitConfig::default()),
            Err(CorpusError::EmptyDataset)
        ));
        let one = Dataset::from_pairs([(Label::Real, "x")], "x");
        let cfg = SplitConfig {
            test_fraction: "0.9".parse().unwrap(),
            stratified: false,
            seed: 0,
        };
        assert!(matches!(
            stratified_split(&one, &cfg),
            Err(CorpusError::EmptyPartition(_))
        ));
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut rng = SplitMix64::seed_from_u64(42);
        let mut v: Vec<u32> = (0..100).collect();
        seeded_shuffle(&mut v, &mut rng);
        let mut sorted = v.clone();
        sorted.sort();
        assert_eq!(sorted, (0..100).collect::<Vec<_>>());
        assert_ne!(v, sorted);
    }
}
