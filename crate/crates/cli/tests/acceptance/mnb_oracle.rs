//! Log-free multinomial naive Bayes decisions with Laplace smoothing (alpha = 1).
//!
//! With class counts n_c, per-term weight sums S_ct and T_c = sum_t S_ct,
//! the unnormalized posterior of class c for query q is
//! n_c * prod_t ((S_ct + 1) / (T_c + V))^q_t. Both sides are multiplied by
//! (T_fake + V)^Q (T_real + V)^Q, Q = sum_t q_t, and compared as integers.
//! Equality resolves to fake.

use credcheck_core::Label;
use num_bigint::BigUint;

/// Sufficient statistics of a two-class training corpus.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Stats {
    pub n: [u64; 2],
    pub sums: [Vec<u64>; 2],
}

impl Stats {
    pub fn from_corpus(docs: &[(Vec<u64>, Label)], v: usize) -> Self {
        let mut n = [0; 2];
        let mut sums = [vec![0; v], vec![0; v]];
        for (w, l) in docs {
            let c = usize::from(*l == Label::Real);
            n[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(w) {
                *s += x;
            }
        }
        Self { n, sums }
    }

    pub fn decider(&self) -> Decider {
        let v = self.sums[0].len() as u64;
        let total = |c: usize| (self.sums[c].iter().sum::<u64>() + v) as u128;
        Decider {
            stats: self.clone(),
            factors: [0, 1].map(|c| self.sums[c].iter().map(|&s| s as u128 + 1).collect()),
            denom: [total(0), total(1)],
        }
    }
}

/// [`Stats`] with the integer factors of both sides precomputed.
pub struct Decider {
    stats: Stats,
    factors: [Vec<u128>; 2],
    denom: [u128; 2],
}

impl Decider {
    fn side(&self, c: usize, q: &[u64], big_q: u64) -> Option<u128> {
        let mut acc = self.stats.n[c] as u128;
        for (&f, &k) in self.factors[c].iter().zip(q) {
            for _ in 0..k {
                acc = acc.checked_mul(f)?;
            }
        }
        for _ in 0..big_q {
            acc = acc.checked_mul(self.denom[1 - c])?;
        }
        Some(acc)
    }

    fn side_big(&self, c: usize, q: &[u64], big_q: u64) -> BigUint {
        let mut acc = BigUint::from(self.stats.n[c]);
        for (&f, &k) in self.factors[c].iter().zip(q) {
            acc *= BigUint::from(f).pow(k as u32);
        }
        acc * BigUint::from(self.denom[1 - c]).pow(big_q as u32)
    }

    pub fn decide(&self, q: &[u64]) -> Label {
        let big_q = q.iter().sum();
        let fake_wins = match (self.side(0, q, big_q), self.side(1, q, big_q)) {
            (Some(f), Some(r)) => f >= r,
            _ => self.side_big(0, q, big_q) >= self.side_big(1, q, big_q),
        };
        if fake_wins {
            Label::Fake
        } else {
            Label::Real
        }
    }
}

/// Every vector in {0..=max}^v, in lexicographic order.
pub fn all_vectors(v: usize, max: u64) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..v {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..=max).map(move |x| {
                    let mut p = p.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out
}

/// Visits every multiset of size `k` drawn from `0..kinds` as a
/// non-decreasing index sequence.
pub fn for_each_multiset(kinds: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(kinds: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..kinds {
            cur.push(i);
            rec(kinds, k, i, cur, f);
            cur.pop();
        }
    }
    rec(kinds, k, 0, &mut Vec::with_capacity(k), f);
}

/// One corpus of `n` documents with weights in {0..=3} whose column sums
/// are `sums`.
pub fn representative(sums: &[u64], n: u64) -> Vec<Vec<u64>> {
    (0..n)
        .map(|i| sums.iter().map(|&s| s.saturating_sub(3 * i).min(3)).collect())
        .collect()
}
