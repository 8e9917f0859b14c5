//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p credcheck-cli --test acceptance`.

#[path = "acceptance/mnb_oracle.rs"]
mod mnb_oracle;
#[path = "acceptance/tfidf_oracle.rs"]
mod tfidf_oracle;

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use credcheck_core::corpus::{self, CsvOptions, Dataset};
use credcheck_core::eval::{
    display_pp, gap_report, metrics, reference_caveats, ConfusionMatrix, MetricsReport, ReferenceScores,
    DEFAULT_OVERFIT_THRESHOLD_PP,
};
use credcheck_core::mnb::NbModel;
use credcheck_core::pipeline::{self, PipelineConfig};
use credcheck_core::preprocess::{clean_dataset, cleanse, CleanseRules, Preprocessor, TokenizedDocument};
use credcheck_core::tfidf::{fit_vocabulary, DocumentVector};
use credcheck_core::{load_model, save_model, synth, Label};
use num_rational::BigRational;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use mnb_oracle::{all_vectors, for_each_multiset, representative, Stats};

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    }};
}

fn main() {
    let criteria: [(u32, &str, Check); 10] = [
        (1, "metric arithmetic, test row", test_row_metrics),
        (2, "metric arithmetic, training row", training_row_metrics),
        (3, "split totals and determinism", split_totals),
        (4, "TF-IDF exact oracle", tfidf_oracle_agreement),
        (5, "naive Bayes exhaustive oracle", mnb_oracle_agreement),
        (6, "separable corpus through the CLI", separable_end_to_end),
        (7, "cleansing goldens", cleansing_goldens),
        (8, "persistence round trip", persistence_round_trip),
        (9, "overfitting gap report", overfitting_gap),
        (10, "scale, single-threaded", scale_single_thread),
    ];
    let mut failed = 0;
    for (n, name, check) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {n:>2}: PASS  {name}: {detail} [{secs:.2}s]"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2}: FAIL  {name}: {why} [{secs:.2}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn report(tp: u64, tn: u64, fp: u64, fn_: u64) -> MetricsReport {
    metrics(&ConfusionMatrix::new(tp, tn, fp, fn_, Label::Fake)).expect("non-empty matrix")
}

fn shown(r: &MetricsReport) -> [String; 4] {
    [r.accuracy, r.precision, r.recall, r.f1].map(|s| s.display_percent())
}

fn test_row_metrics() -> Result<String, String> {
    let got = shown(&report(113, 97, 5, 21));
    let want = ["88.98%", "95.76%", "84.33%", "89.68%"];
    ensure!(got == want, "got {got:?}, want {want:?}");
    Ok(got.join(" / "))
}

fn training_row_metrics() -> Result<String, String> {
    let r = report(276, 275, 2, 1);
    let got = shown(&r);
    let want = ["99.46%", "99.28%", "99.64%", "99.46%"];
    ensure!(got == want, "got {got:?}, want {want:?}");
    let caveats = reference_caveats(
        &r,
        &ReferenceScores {
            accuracy: 99.46,
            precision: 99.64,
            recall: 99.28,
            f1: 99.46,
        },
    );
    ensure!(
        caveats.len() == 1 && caveats[0].starts_with("precision/recall transposed"),
        "caveats: {caveats:?}"
    );
    Ok(format!("{}; caveat: {}", got.join(" / "), caveats[0]))
}

fn credcheck(args: &[&str]) -> Result<std::process::Output, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_credcheck"))
        .env_remove("CREDCHECK_STOPWORDS_DIR")
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "credcheck {} failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out)
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn write_csv(p: &Path, ds: &Dataset) {
    let f = std::fs::File::create(p).unwrap();
    corpus::write_dataset(f, ds, &CsvOptions::default()).unwrap();
}

fn data_rows(p: &Path) -> usize {
    corpus::load_dataset_with(p, &CsvOptions::default()).unwrap().len()
}

fn split_totals() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let ds = synth::separable_corpus(790, 10, 0.05, 3);
    ensure!(
        ds.count(Label::Fake) == 395 && ds.count(Label::Real) == 395,
        "corpus not balanced"
    );
    let input = dir.path().join("c.csv");
    write_csv(&input, &ds);

    let mut first: Option<(Vec<u8>, Vec<u8>)> = None;
    for run in 0..5 {
        let tr = dir.path().join(format!("train{run}.csv"));
        let te = dir.path().join(format!("test{run}.csv"));
        credcheck(&[
            "split",
            "-i",
            path(&input),
            "--train-out",
            path(&tr),
            "--test-out",
            path(&te),
        ])?;
        let bytes = (std::fs::read(&tr).unwrap(), std::fs::read(&te).unwrap());
        match &first {
            None => {
                let (n_tr, n_te) = (data_rows(&tr), data_rows(&te));
                ensure!((n_tr, n_te) == (554, 236), "split {n_tr}/{n_te}, want 554/236");
                first = Some(bytes);
            }
            Some(f) => ensure!(*f == bytes, "run {run} differs from run 0"),
        }
    }
    Ok("790 -> 554 train / 236 test, 5 identical reruns".into())
}

fn tokenized(id: usize, tokens: Vec<String>) -> TokenizedDocument {
    TokenizedDocument {
        id,
        tokens,
        label: None,
    }
}

fn tfidf_oracle_agreement() -> Result<String, String> {
    let start = Instant::now();
    let terms = ["t0", "t1", "t2", "t3", "t4"];
    let unseen = ["u0", "u1"];
    let tol = BigRational::new(1.into(), 1_000_000_000.into());
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(0x7f1d);
    let mut draw = |n: usize| (rng.next_u64() % n as u64) as usize;
    let mut ln_cache = HashMap::new();
    let mut entries = 0usize;

    for corpus_no in 0..1000 {
        let n_terms = 1 + draw(terms.len());
        let n_docs = 1 + draw(4);
        let docs: Vec<Vec<String>> = (0..n_docs)
            .map(|_| (0..1 + draw(6)).map(|_| terms[draw(n_terms)].to_string()).collect())
            .collect();
        let queries: Vec<Vec<String>> = (0..2)
            .map(|_| {
                (0..1 + draw(6))
                    .map(|_| {
                        let k = draw(terms.len() + unseen.len());
                        terms.iter().chain(&unseen).nth(k).unwrap().to_string()
                    })
                    .collect()
            })
            .collect();

        let train: Vec<TokenizedDocument> = docs.iter().cloned().enumerate().map(|(i, t)| tokenized(i, t)).collect();
        let model = fit_vocabulary(&train).map_err(|e| e.to_string())?;
        let oracle = tfidf_oracle::Oracle::fit(&docs, &mut ln_cache);
        ensure!(
            model.vocab.terms() == oracle.vocab.as_slice(),
            "corpus {corpus_no}: vocabulary {:?} vs {:?}",
            model.vocab.terms(),
            oracle.vocab
        );
        for doc in docs.iter().chain(&queries) {
            let v = model.transform(&tokenized(0, doc.clone())).map_err(|e| e.to_string())?;
            ensure!(
                v.entries.iter().all(|&(_, w)| w != 0.0),
                "corpus {corpus_no}: stored zero weight"
            );
            for (j, want) in oracle.weights(doc).iter().enumerate() {
                entries += 1;
                ensure!(
                    tfidf_oracle::within(want, v.get(j), &tol),
                    "corpus {corpus_no}, doc {doc:?}, term {}: got {}, oracle {}",
                    oracle.vocab[j],
                    v.get(j),
                    num_traits::ToPrimitive::to_f64(want).unwrap_or(f64::NAN)
                );
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("1000 corpora, {entries} entries within 1e-9"))
}

fn count_vector(w: &[u64]) -> DocumentVector {
    DocumentVector {
        entries: w
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > 0)
            .map(|(j, &x)| (j, x as f64))
            .collect(),
        doc_len: w.iter().sum::<u64>() as usize,
    }
}

#[derive(Default)]
struct MnbTally {
    corpora: u64,
    predictions: u64,
    disagreements: u64,
    first: Option<String>,
}

impl MnbTally {
    fn check(&mut self, model: &NbModel, stats: &Stats, queries: &[(Vec<u64>, DocumentVector)]) {
        self.corpora += 1;
        let oracle = stats.decider();
        for (q, qv) in queries {
            self.predictions += 1;
            let got = model.predict(qv).expect("in-range query").label;
            let want = oracle.decide(q);
            if got != want {
                self.disagreements += 1;
                self.first
                    .get_or_insert_with(|| format!("{stats:?} query {q:?}: got {got}, oracle {want}"));
            }
        }
    }
}

fn queries_for(v: usize) -> Vec<(Vec<u64>, DocumentVector)> {
    all_vectors(v, 3)
        .into_iter()
        .map(|q| {
            let dv = count_vector(&q);
            (q, dv)
        })
        .collect()
}

fn fit_counts(docs: &[(Vec<u64>, Label)], v: usize) -> NbModel {
    let samples: Vec<(DocumentVector, Label)> = docs.iter().map(|(w, l)| (count_vector(w), *l)).collect();
    NbModel::fit(&samples, v, 1.0).expect("two-class corpus")
}

fn canonical_corpus(stats: &Stats) -> Vec<(Vec<u64>, Label)> {
    Label::ALL
        .iter()
        .flat_map(|&l| {
            representative(&stats.sums[l.index()], stats.n[l.index()])
                .into_iter()
                .map(move |w| (w, l))
        })
        .collect()
}

fn mnb_oracle_agreement() -> Result<String, String> {
    let start = Instant::now();
    let mut tally = MnbTally::default();
    let mut collapsed = 0u64;

    // Every multiset of labelled documents.
    for (v, max_docs) in [(1usize, 5usize), (2, 5), (4, 2)] {
        let vectors = all_vectors(v, 3);
        let kinds: Vec<(Vec<u64>, Label)> = Label::ALL
            .iter()
            .flat_map(|&l| vectors.iter().map(move |w| (w.clone(), l)))
            .collect();
        let queries = queries_for(v);
        for k in 2..=max_docs {
            for_each_multiset(kinds.len(), k, &mut |idx| {
                let docs: Vec<(Vec<u64>, Label)> = idx.iter().map(|&i| kinds[i].clone()).collect();
                let stats = Stats::from_corpus(&docs, v);
                if stats.n.contains(&0) {
                    return;
                }
                let model = fit_counts(&docs, v);
                if v == 2 && model != fit_counts(&canonical_corpus(&stats), v) {
                    collapsed += 1;
                }
                tally.check(&model, &stats, &queries);
            });
        }
    }
    ensure!(
        collapsed == 0,
        "{collapsed} corpora fit differently from same-statistics corpora"
    );
    let literal = tally.corpora;

    // Corpora that share class sizes and per-class column sums fit to the
    // same model (checked above), so one corpus per statistics tuple covers
    // the rest.
    for (v, max_docs) in [(3usize, 5u64)] {
        let queries = queries_for(v);
        for n_fake in 1..max_docs {
            for n_real in 1..=max_docs - n_fake {
                let fake_sums = all_vectors(v, 3 * n_fake);
                let real_sums = all_vectors(v, 3 * n_real);
                for sf in &fake_sums {
                    for sr in &real_sums {
                        let stats = Stats {
                            n: [n_fake, n_real],
                            sums: [sf.clone(), sr.clone()],
                        };
                        let model = fit_counts(&canonical_corpus(&stats), v);
                        tally.check(&model, &stats, &queries);
                    }
                }
            }
        }
    }

    let elapsed = start.elapsed();
    ensure!(
        tally.disagreements == 0,
        "{} of {} predictions disagree; first: {}",
        tally.disagreements,
        tally.predictions,
        tally.first.unwrap_or_default()
    );
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!(
        "{literal} literal corpora + {} statistics tuples, {} predictions, 100% agreement",
        tally.corpora - literal,
        tally.predictions
    ))
}

fn separable_end_to_end() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let raw = dir.path().join("raw.csv");
    write_csv(&raw, &synth::separable_corpus(2000, 20, 0.05, 6));
    let clean = dir.path().join("clean.csv");
    let model = dir.path().join("model.json");
    let test = dir.path().join("test.csv");

    let start = Instant::now();
    credcheck(&["clean", "-i", path(&raw), "-o", path(&clean)])?;
    credcheck(&[
        "train",
        "-i",
        path(&clean),
        "-m",
        path(&model),
        "--test-out",
        path(&test),
    ])?;
    let out = credcheck(&[
        "evaluate",
        "-m",
        path(&model),
        "-i",
        path(&test),
        "--format",
        "structured",
    ])?;
    let elapsed = start.elapsed();

    let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let train_acc = v["train_report"]["accuracy"].as_f64().ok_or("no training accuracy")?;
    let test_acc = v["report"]["accuracy"].as_f64().ok_or("no test accuracy")?;
    ensure!(train_acc == 1.0, "training accuracy {train_acc}");
    ensure!(test_acc >= 0.99, "test accuracy {test_acc}");
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!(
        "training accuracy {:.2}%, test accuracy {:.2}% on {} held-out documents",
        train_acc * 100.0,
        test_acc * 100.0,
        v["report"]["n"]
    ))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn cleansing_goldens() -> Result<String, String> {
    let read = |n: &str| std::fs::read_to_string(fixture(n)).map_err(|e| format!("{n}: {e}"));
    let ds = corpus::load_dataset_with(fixture("tweets.csv"), &CsvOptions::default()).map_err(|e| e.to_string())?;
    ensure!(ds.len() == 30, "fixture has {} tweets", ds.len());

    let rules = CleanseRules::builtin();
    let got: String = ds.documents.iter().map(|d| cleanse(&d.text, &rules) + "\n").collect();
    let want = read("tweets.cleansed.txt")?;
    for (i, (g, w)) in got.lines().zip(want.lines()).enumerate() {
        ensure!(g == w, "tweet {}: {g:?} vs golden {w:?}", i + 1);
    }
    ensure!(got == want, "cleansed output differs from golden");

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("cleaned.csv");
    credcheck(&["clean", "-i", path(&fixture("tweets.csv")), "-o", path(&out)])?;
    ensure!(
        std::fs::read_to_string(&out).map_err(|e| e.to_string())? == read("tweets.cleaned.csv")?,
        "clean output differs from golden"
    );
    Ok("30 tweets byte-exact, clean output byte-exact".into())
}

fn fuzz_texts(n: usize, seed: u64) -> Vec<String> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let base = synth::mixed_corpus(n, 25, seed);
    let junk = [
        "https://t.co/x1",
        "#tag",
        "@someone",
        "RT",
        "ñandú",
        "ang",
        "the",
        "!!",
        "12",
        "a",
    ];
    base.documents
        .into_iter()
        .map(|d| {
            let mut words: Vec<String> = d.text.split_whitespace().map(String::from).collect();
            let cut = (rng.next_u64() % (words.len() as u64 + 1)) as usize;
            words.truncate(cut);
            for _ in 0..rng.next_u64() % 4 {
                words.push(junk[(rng.next_u64() % junk.len() as u64) as usize].to_string());
            }
            words.join(" ")
        })
        .collect()
}

fn persistence_round_trip() -> Result<String, String> {
    let ds = synth::mixed_corpus(2000, 30, 8);
    let trained = pipeline::train(&ds, &PipelineConfig::default(), Preprocessor::default())
        .map_err(|e| e.to_string())?
        .model;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let file = dir.path().join("model.json");
    save_model(&trained, &file).map_err(|e| e.to_string())?;
    let loaded = load_model(&file).map_err(|e| e.to_string())?;

    let batch = Dataset::from_pairs(fuzz_texts(1000, 88).into_iter().map(|t| (Label::Fake, t)), "fuzz");
    let a = trained.predict_dataset(&batch).map_err(|e| e.to_string())?;
    let b = loaded.predict_dataset(&batch).map_err(|e| e.to_string())?;
    ensure!(a.len() == 1000 && b.len() == 1000, "batch size changed");
    let mut max_diff = 0.0f64;
    for (i, (x, y)) in a.iter().zip(&b).enumerate() {
        ensure!(x.prediction.label == y.prediction.label, "document {i}: label differs");
        ensure!(x.oov == y.oov, "document {i}: oov flag differs");
        for c in Label::ALL {
            max_diff = max_diff.max((x.prediction.posterior_of(c) - y.prediction.posterior_of(c)).abs());
        }
    }
    ensure!(max_diff <= 1e-12, "posterior difference {max_diff:e}");
    Ok(format!(
        "1000 documents, labels identical, max posterior difference {max_diff:e}"
    ))
}

fn overfitting_gap() -> Result<String, String> {
    let gap = gap_report(
        &report(276, 275, 2, 1),
        &report(113, 97, 5, 21),
        DEFAULT_OVERFIT_THRESHOLD_PP,
    );
    let shown = display_pp(gap.accuracy_pp);
    ensure!(shown == "+10.48", "accuracy gap {shown}");
    ensure!(gap.overfitting, "overfitting flag not raised");
    Ok(format!("accuracy gap {shown} pp, overfitting flagged"))
}

fn scale_single_thread() -> Result<String, String> {
    let ds = synth::mixed_corpus(10_000, 50, 10);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let (outcome, test_report) = pool.install(|| -> Result<_, String> {
        let (cleaned, _) = clean_dataset(&ds, &CleanseRules::builtin());
        let outcome = pipeline::train(&cleaned, &PipelineConfig::default(), Preprocessor::default())
            .map_err(|e| e.to_string())?;
        save_model(&outcome.model, dir.path().join("m.json")).map_err(|e| e.to_string())?;
        let test_report = outcome
            .model
            .evaluate(&outcome.test, Label::Fake)
            .map_err(|e| e.to_string())?;
        Ok((outcome, test_report))
    })?;
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!(
        "10000 documents, {} terms, test accuracy {}",
        outcome.model.tfidf.vocab.len(),
        test_report.accuracy.display_percent()
    ))
}
