//! Shared inputs for the pipeline benchmarks.

use credcheck_core::mnb::NbModel;
use credcheck_core::tfidf::{fit_vocabulary, DocumentVector};
use credcheck_core::{synth, Dataset, Label, Preprocessor, TfidfModel, TokenizedDocument};

pub const SEED: u64 = 42;

pub struct Fixture {
    pub dataset: Dataset,
    pub tokens: Vec<TokenizedDocument>,
    pub tfidf: TfidfModel,
    pub samples: Vec<(DocumentVector, Label)>,
    pub nb: NbModel,
}

/// A mixed synthetic corpus carried through every stage once.
pub fn fixture(n_docs: usize, tokens_per_doc: usize) -> Fixture {
    let dataset = synth::mixed_corpus(n_docs, tokens_per_doc, SEED);
    let tokens: Vec<TokenizedDocument> = Preprocessor::default()
        .process_dataset(&dataset)
        .into_iter()
        .filter(|d| !d.tokens.is_empty())
        .collect();
    let tfidf = fit_vocabulary(&tokens).expect("non-empty corpus");
    let samples: Vec<(DocumentVector, Label)> = tokens
        .iter()
        .map(|d| {
            (
                tfidf.transform(d).expect("non-empty document"),
                d.label.expect("labelled"),
            )
        })
        .collect();
    let nb = NbModel::fit(&samples, tfidf.vocab.len(), 1.0).expect("two classes");
    Fixture {
        dataset,
        tokens,
        tfidf,
        samples,
        nb,
    }
}
