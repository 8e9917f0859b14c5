//! Seeded synthetic corpora for tests and benchmarks.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::corpus::{Dataset, Label};

fn below(rng: &mut SplitMix64, n: u64) -> u64 {
    // modulo bias is irrelevant at these pool sizes
    rng.next_u64() % n
}

fn unit(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn label_for(i: usize) -> Label {
    if i % 2 == 0 {
        Label::Fake
    } else {
        Label::Real
    }
}

/// Alternating fake/real documents whose class vocabularies are disjoint
/// (`fakeword*` vs `realword*`, 300 words each). Each token is replaced by a
/// shared `noise*` word with probability `noise_rate`.
pub fn separable_corpus(n_docs: usize, tokens_per_doc: usize, noise_rate: f64, seed: u64) -> Dataset {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let docs = (0..n_docs).map(|i| {
        let label = label_for(i);
        let prefix = match label {
            Label::Fake => "fakeword",
            Label::Real => "realword",
        };
        let words: Vec<String> = (0..tokens_per_doc)
            .map(|_| {
                if unit(&mut rng) < noise_rate {
                    format!("noise{}", below(&mut rng, 50))
                } else {
                    format!("{prefix}{}", below(&mut rng, 300))
                }
            })
            .collect();
        (label, words.join(" "))
    });
    Dataset::from_pairs(docs, format!("synthetic:separable:{seed}"))
}

/// Overlapping-vocabulary corpus: 60% of tokens come from a class-specific
/// pool of 2000 words, the rest from a shared pool of 1000, both skewed
/// towards low word indices. Includes some punctuation, links and hashtags
/// so cleansing has work to do.
pub fn mixed_corpus(n_docs: usize, tokens_per_doc: usize, seed: u64) -> Dataset {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let docs = (0..n_docs).map(|i| {
        let label = label_for(i);
        let mut text = String::new();
        for k in 0..tokens_per_doc {
            let skewed = |rng: &mut SplitMix64, n: f64| (unit(rng) * unit(rng) * n) as u64;
            let w = if unit(&mut rng) < 0.6 {
                format!(
                    "{}{}",
                    if label == Label::Fake { "fk" } else { "rl" },
                    skewed(&mut rng, 2000.0)
                )
            } else {
                format!("common{}", skewed(&mut rng, 1000.0))
            };
            if k > 0 {
                text.push(' ');
            }
            text.push_str(&w);
            match below(&mut rng, 40) {
                0 => text.push_str(" https://t.co/ab12"),
                1 => text.push_str(" #halalan2022"),
                2 => text.push(','),
                _ => {}
            }
        }
        (label, text)
    });
    Dataset::from_pairs(docs, format!("synthetic:mixed:{seed}"))
}
