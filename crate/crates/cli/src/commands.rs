use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use credcheck_core::corpus::{self, CorpusError, CsvOptions, Dataset};
use credcheck_core::eval::{self, gap_report, metrics, reference_caveats, render_gap, render_table, ReferenceScores};
use credcheck_core::model_file::{atomic_write, load_model, save_model};
use credcheck_core::pipeline::{self, PipelineConfig, PipelineError};
use credcheck_core::preprocess::{clean_dataset, CleanseRules, Preprocessor, StopwordSet};
use credcheck_core::tfidf::VocabOptions;
use credcheck_core::Label;
use serde_json::json;

use crate::args::{Format, Shared};

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_MODEL: i32 = 4;

/// A failure with its exit code and machine-readable name.
#[derive(Debug)]
pub struct CliError {
    pub exit_code: i32,
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = self.message.replace('\n', " ");
        let msg = msg
            .strip_prefix(self.code)
            .and_then(|m| m.strip_prefix(": "))
            .unwrap_or(&msg);
        write!(f, "error[{}]: {}", self.code, msg)
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let code = e.code();
        let exit_code = match code {
            "EmptyDataset" | "SingleClass" | "DegenerateClass" | "EmptyPartition" | "EmptyCorpus"
            | "EmptyTrainingSet" => EXIT_DEGENERATE,
            "ModelIo" | "ModelParse" | "VersionMismatch" | "InconsistentModel" | "DimensionMismatch"
            | "UnfittedModel" => EXIT_MODEL,
            _ => EXIT_INPUT,
        };
        Self {
            exit_code,
            code,
            message: e.to_string(),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        PipelineError::from(e).into()
    }
}

fn io_error(path: &Path, e: impl fmt::Display) -> CliError {
    CliError {
        exit_code: EXIT_INPUT,
        code: "IoFailure",
        message: format!("{}: {e}", path.display()),
    }
}

type CmdResult = Result<(), CliError>;

fn csv_options(shared: &Shared) -> CsvOptions {
    CsvOptions {
        label_column: shared.label_column.clone(),
        text_column: shared.text_column.clone(),
        delimiter: shared.delimiter,
    }
}

fn load(shared: &Shared, path: &Path) -> Result<Dataset, CliError> {
    Ok(corpus::load_dataset_with(path, &csv_options(shared))?)
}

fn write_csv(shared: &Shared, path: &Path, ds: &Dataset) -> CmdResult {
    let mut buf = Vec::new();
    corpus::write_dataset(&mut buf, ds, &csv_options(shared))?;
    atomic_write(path, &buf).map_err(|e| io_error(path, e))
}

fn resolve_stopword_path(raw: &str) -> PathBuf {
    let p = PathBuf::from(raw);
    if p.is_relative() {
        if let Some(dir) = std::env::var_os("CREDCHECK_STOPWORDS_DIR") {
            let candidate = Path::new(&dir).join(&p);
            if candidate.exists() {
                return candidate;
            }
        }
    }
    p
}

fn rules(shared: &Shared) -> Result<CleanseRules, CliError> {
    match &shared.rules {
        Some(path) => CleanseRules::from_override_file(path).map_err(|e| PipelineError::from(e).into()),
        None => Ok(CleanseRules::builtin()),
    }
}

fn preprocessor(shared: &Shared) -> Result<Preprocessor, CliError> {
    let mut sw = if shared.no_bundled_stopwords {
        StopwordSet::empty()
    } else {
        StopwordSet::bundled()
    };
    for raw in &shared.stopwords {
        let set = StopwordSet::from_file(resolve_stopword_path(raw)).map_err(PipelineError::from)?;
        sw.extend(set);
    }
    Ok(Preprocessor::new(rules(shared)?, sw, shared.min_token_len))
}

fn pipeline_config(shared: &Shared) -> PipelineConfig {
    PipelineConfig {
        seed: shared.seed,
        test_fraction: shared.test_fraction,
        stratified: !shared.unstratified,
        alpha: shared.alpha,
        stopword_paths: shared.stopwords.clone(),
        positive_class: shared.positive_class,
        min_token_len: shared.min_token_len,
        features: shared.features.into(),
        vocab: VocabOptions {
            min_df: shared.min_df,
            max_vocab: shared.max_vocab,
        },
        stemmer: "identity".into(),
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json"));
}

pub fn clean(shared: &Shared, input: &Path, output: &Path) -> CmdResult {
    let ds = load(shared, input)?;
    let (out, summary) = clean_dataset(&ds, &rules(shared)?);
    write_csv(shared, output, &out)?;
    match shared.format {
        Format::Table => {
            println!("{} → {}", summary.rows_in, summary.rows_out);
            println!(
                "retweets {}  emptied {}  duplicates {}",
                summary.retweets, summary.emptied, summary.duplicates
            );
        }
        Format::Structured => print_json(&json!({
            "rows_in": summary.rows_in,
            "rows_out": summary.rows_out,
            "retweets": summary.retweets,
            "emptied": summary.emptied,
            "duplicates": summary.duplicates,
        })),
    }
    Ok(())
}

pub fn split(shared: &Shared, input: &Path, train_out: &Path, test_out: &Path) -> CmdResult {
    let ds = load(shared, input)?;
    let (train, test) = corpus::stratified_split(&ds, &pipeline_config(shared).split_config())?;
    write_csv(shared, train_out, &train)?;
    write_csv(shared, test_out, &test)?;
    match shared.format {
        Format::Table => println!("{} → train {} / test {}", ds.len(), train.len(), test.len()),
        Format::Structured => print_json(&json!({
            "rows": ds.len(), "train": train.len(), "test": test.len(),
        })),
    }
    Ok(())
}

pub fn train(
    shared: &Shared,
    input: &Path,
    model_path: &Path,
    train_out: Option<&Path>,
    test_out: Option<&Path>,
) -> CmdResult {
    let ds = load(shared, input)?;
    let cfg = pipeline_config(shared);
    let outcome = pipeline::train(&ds, &cfg, preprocessor(shared)?)?;
    save_model(&outcome.model, model_path).map_err(PipelineError::from)?;
    if let Some(p) = train_out {
        write_csv(shared, p, &outcome.train)?;
    }
    if let Some(p) = test_out {
        write_csv(shared, p, &outcome.test)?;
    }
    match shared.format {
        Format::Table => {
            println!(
                "split: {} documents → {} train / {} test (seed {}, test fraction {}, {})",
                ds.len(),
                outcome.train.len(),
                outcome.test.len(),
                cfg.seed,
                cfg.test_fraction,
                if cfg.stratified { "stratified" } else { "unstratified" }
            );
            println!(
                "vocabulary: {} terms; {} training documents empty after preprocessing",
                outcome.model.tfidf.vocab.len(),
                outcome.skipped_empty
            );
            println!();
            print!("{}", render_table(&[("Training", &outcome.train_report)]));
            println!("\nmodel written to {}", model_path.display());
        }
        Format::Structured => print_json(&json!({
            "rows": ds.len(),
            "train": outcome.train.len(),
            "test": outcome.test.len(),
            "vocabulary": outcome.model.tfidf.vocab.len(),
            "skipped_empty": outcome.skipped_empty,
            "train_report": outcome.train_report,
            "model": model_path.display().to_string(),
            "training_digest": outcome.model.training_digest,
        })),
    }
    Ok(())
}

pub fn evaluate(shared: &Shared, model_path: &Path, input: &Path, reference: Option<[f64; 4]>) -> CmdResult {
    let model = load_model(model_path).map_err(PipelineError::from)?;
    let ds = load(shared, input)?;
    let positive = shared.positive_class;
    let report = model.evaluate(&ds, positive)?;

    let train_report = model
        .train_matrix
        .map(|m| if m.positive_class == positive { m } else { m.swapped() })
        .and_then(|m| metrics(&m).ok());
    let gap = train_report.map(|t| gap_report(&t, &report, shared.overfit_threshold));
    let caveats = reference
        .map(|[accuracy, precision, recall, f1]| {
            reference_caveats(
                &report,
                &ReferenceScores {
                    accuracy,
                    precision,
                    recall,
                    f1,
                },
            )
        })
        .unwrap_or_default();

    match shared.format {
        Format::Table => {
            let mut rows: Vec<(&str, &eval::MetricsReport)> = Vec::new();
            if let Some(t) = &train_report {
                rows.push(("Training", t));
            }
            rows.push(("Evaluated", &report));
            print!("{}", render_table(&rows));
            if let Some(g) = &gap {
                println!();
                print!("{}", render_gap(g));
            }
            for c in &caveats {
                println!("caveat: {c}");
            }
        }
        Format::Structured => print_json(&json!({
            "report": report,
            "train_report": train_report,
            "gap": gap,
            "caveats": caveats,
        })),
    }
    Ok(())
}

fn read_texts(shared: &Shared, path: &Path) -> Result<Vec<String>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| io_error(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().delimiter(shared.delimiter).from_reader(file);
    let headers = rdr.headers().map_err(|e| io_error(path, e))?.clone();
    let idx = headers
        .iter()
        .position(|h| h.trim() == shared.text_column)
        .ok_or_else(|| CliError::from(CorpusError::MissingColumn(shared.text_column.clone())))?;
    rdr.records()
        .map(|r| {
            r.map(|rec| rec.get(idx).unwrap_or("").to_string())
                .map_err(|e| io_error(path, e))
        })
        .collect()
}

pub fn predict(
    shared: &Shared,
    model_path: &Path,
    input: Option<&Path>,
    text: Option<&str>,
    output: Option<&Path>,
) -> CmdResult {
    let model = load_model(model_path).map_err(PipelineError::from)?;
    let texts = match (input, text) {
        (Some(p), _) => read_texts(shared, p)?,
        (None, Some(t)) => vec![t.to_string()],
        (None, None) => unreachable!("clap requires --input or --text"),
    };
    let ds = Dataset::from_pairs(texts.into_iter().map(|t| (Label::Fake, t)), "predict");
    let scored = model.predict_dataset(&ds)?;

    let mut buf = Vec::new();
    {
        let mut wtr = csv::WriterBuilder::new()
            .delimiter(shared.delimiter)
            .from_writer(&mut buf);
        let io = |e: csv::Error| io_error(Path::new("<output>"), e);
        wtr.write_record(["label", "posterior_fake", "posterior_real", "oov"])
            .map_err(io)?;
        for s in &scored {
            let p = &s.prediction;
            wtr.write_record([
                p.label.to_string(),
                p.posterior_of(Label::Fake).to_string(),
                p.posterior_of(Label::Real).to_string(),
                s.oov.to_string(),
            ])
            .map_err(io)?;
        }
        wtr.flush().map_err(|e| io_error(Path::new("<output>"), e))?;
    }
    match output {
        Some(p) => atomic_write(p, &buf).map_err(|e| io_error(p, e)),
        None => std::io::stdout()
            .write_all(&buf)
            .map_err(|e| io_error(Path::new("<stdout>"), e)),
    }
}
