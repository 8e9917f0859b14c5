//! Direct-formula TF-IDF in exact rational arithmetic.
//!
//! tf = count / len, idf = ln(N / df). The logarithm is the series
//! ln(x) = 2 * sum y^(2k+1) / (2k+1), y = (x - 1) / (x + 1), summed in
//! `BigRational` until the next term drops below 1e-40.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn ln_ratio(p: i64, q: i64) -> BigRational {
    let y = ratio(p - q, p + q);
    let y2 = &y * &y;
    let eps = ratio(1, 10).pow(40);
    let mut power = y.clone();
    let mut sum = BigRational::zero();
    let mut k = 0i64;
    loop {
        let term = &power / BigRational::from_integer(BigInt::from(2 * k + 1));
        if term.abs() < eps {
            break;
        }
        sum += term;
        power = &power * &y2;
        k += 1;
    }
    sum * BigRational::from_integer(BigInt::from(2))
}

pub struct Oracle {
    pub vocab: Vec<String>,
    idf: Vec<BigRational>,
}

impl Oracle {
    pub fn fit(docs: &[Vec<String>], ln_cache: &mut HashMap<(i64, i64), BigRational>) -> Self {
        let n = docs.len() as i64;
        let mut df: BTreeMap<&str, i64> = BTreeMap::new();
        for d in docs {
            let distinct: BTreeSet<&str> = d.iter().map(String::as_str).collect();
            for t in distinct {
                *df.entry(t).or_default() += 1;
            }
        }
        let vocab = df.keys().map(|t| t.to_string()).collect();
        let idf = df
            .values()
            .map(|&c| ln_cache.entry((n, c)).or_insert_with(|| ln_ratio(n, c)).clone())
            .collect();
        Self { vocab, idf }
    }

    /// Weight of every vocabulary term in `doc`, in vocabulary order.
    pub fn weights(&self, doc: &[String]) -> Vec<BigRational> {
        let len = doc.len() as i64;
        self.vocab
            .iter()
            .zip(&self.idf)
            .map(|(t, idf)| {
                let count = doc.iter().filter(|d| *d == t).count() as i64;
                if count == 0 {
                    BigRational::zero()
                } else {
                    ratio(count, len) * idf
                }
            })
            .collect()
    }
}

pub fn within(oracle: &BigRational, got: f64, tol: &BigRational) -> bool {
    match BigRational::from_float(got) {
        Some(g) => (oracle - g).abs() <= *tol,
        None => false,
    }
}
