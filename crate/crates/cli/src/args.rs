use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use credcheck_core::{FeatureMode, Fraction, Label};

#[derive(Debug, Parser)]
#[command(
    name = "credcheck",
    version,
    about = "News credibility classification with TF-IDF and multinomial naive Bayes"
)]
pub struct Cli {
    #[command(flatten)]
    pub shared: Shared,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Drop retweets, cleanse text, drop empty and duplicate rows.
    Clean {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Write the train/test partitions of a dataset.
    Split {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        test_out: PathBuf,
    },
    /// Split, fit TF-IDF and naive Bayes on the training part, write a model.
    Train {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, short)]
        model: PathBuf,
        /// Also write the training partition as CSV.
        #[arg(long)]
        train_out: Option<PathBuf>,
        /// Also write the held-out partition as CSV.
        #[arg(long)]
        test_out: Option<PathBuf>,
    },
    /// Score a labeled dataset with a model and report metrics.
    Evaluate {
        #[arg(long, short)]
        model: PathBuf,
        #[arg(long, short)]
        input: PathBuf,
        /// Reference percentages `accuracy,precision,recall,f1` to compare against.
        #[arg(long, value_parser = parse_reference)]
        reference: Option<[f64; 4]>,
    },
    /// Label unlabeled text from a CSV file or a single string.
    Predict {
        #[arg(long, short)]
        model: PathBuf,
        #[arg(long, short, conflicts_with = "text", required_unless_present = "text")]
        input: Option<PathBuf>,
        #[arg(long)]
        text: Option<String>,
        /// Output CSV path; stdout when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Features {
    Tfidf,
    Counts,
}

impl From<Features> for FeatureMode {
    fn from(f: Features) -> Self {
        match f {
            Features::Tfidf => FeatureMode::Tfidf,
            Features::Counts => FeatureMode::Counts,
        }
    }
}

#[derive(Debug, Args)]
pub struct Shared {
    #[arg(long, global = true, default_value_t = credcheck_core::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, global = true, default_value = "0.30", value_parser = parse_fraction)]
    pub test_fraction: Fraction,
    /// Split without per-class stratification.
    #[arg(long, global = true)]
    pub unstratified: bool,
    #[arg(long, global = true, default_value_t = credcheck_core::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Extra stopword files, comma separated. Relative paths are looked up
    /// in $CREDCHECK_STOPWORDS_DIR first.
    #[arg(long, global = true, value_delimiter = ',')]
    pub stopwords: Vec<String>,
    /// Do not include the bundled Tagalog and English stopword lists.
    #[arg(long, global = true)]
    pub no_bundled_stopwords: bool,
    #[arg(long, global = true, default_value = "fake", value_parser = parse_label)]
    pub positive_class: Label,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long, global = true, default_value = ",", value_parser = parse_delimiter)]
    pub delimiter: u8,
    #[arg(long, global = true, default_value = "label")]
    pub label_column: String,
    #[arg(long, global = true, default_value = "article")]
    pub text_column: String,
    #[arg(long, global = true, default_value_t = 2)]
    pub min_token_len: usize,
    #[arg(long, global = true, value_enum, default_value_t = Features::Tfidf)]
    pub features: Features,
    #[arg(long, global = true)]
    pub min_df: Option<u32>,
    #[arg(long, global = true)]
    pub max_vocab: Option<usize>,
    /// Cleansing rule override file of `name<TAB>pattern` lines.
    #[arg(long, global = true)]
    pub rules: Option<PathBuf>,
    /// Accuracy gap (percentage points) above which overfitting is flagged.
    #[arg(long, global = true, default_value_t = credcheck_core::eval::DEFAULT_OVERFIT_THRESHOLD_PP)]
    pub overfit_threshold: f64,
}

fn parse_fraction(s: &str) -> Result<Fraction, String> {
    s.parse()
        .map_err(|e: credcheck_core::corpus::CorpusError| e.to_string())
}

fn parse_label(s: &str) -> Result<Label, String> {
    s.parse().map_err(|v| format!("`{v}` is not fake or real"))
}

fn parse_delimiter(s: &str) -> Result<u8, String> {
    match s {
        "\\t" | "tab" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(format!("delimiter must be a single ASCII character, got `{s}`")),
    }
}

fn parse_reference(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().trim_end_matches('%').parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    v.try_into()
        .map_err(|_| "expected four comma-separated percentages".to_string())
}
