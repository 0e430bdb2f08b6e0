//! Sumsets, product sets, and Balog–Gowers–Szemerédi extraction in a cyclic group.
//!
//! The extractor's contract is the theorem's conclusion: given `A, B` in
//! `Z/nZ` and a graph `G ⊆ A × B` with `|A|, |B|, |{a + b : (a, b) ∈ G}| <= N`
//! and `|G| >= alpha N^2`, produce `A' ⊆ A` with
//! `|A' + A'| <= (2^37 / alpha^8) N` and `|A'| >= (alpha^4 / 2^15) N`.
//!
//! Search order: take all of `A` when the doubling bound cannot bind; else
//! grow greedily by G-degree; else (for `|A| <= 20`) enumerate subsets.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::rational::{from_u64, pow2};

/// Largest `|A|` for which the exhaustive fallback runs.
pub const EXHAUSTIVE_LIMIT: usize = 20;

/// `{a + b mod n}`, sorted.
pub fn sumset(a: &[u64], b: &[u64], n: u64) -> Vec<u64> {
    let mut seen = vec![false; n as usize];
    for &x in a {
        for &y in b {
            seen[((x + y) % n) as usize] = true;
        }
    }
    seen.iter().enumerate().filter(|(_, &s)| s).map(|(i, _)| i as u64).collect()
}

/// `{a * b mod p}` for units, sorted.
pub fn productset(a: &[u64], b: &[u64], p: u64) -> Result<Vec<u64>> {
    if let Some(&z) = a.iter().chain(b).find(|&&x| x % p == 0) {
        return Err(Error::ZeroElement(z));
    }
    let mut seen = vec![false; p as usize];
    for &x in a {
        for &y in b {
            seen[(x % p * (y % p) % p) as usize] = true;
        }
    }
    Ok(seen.iter().enumerate().filter(|(_, &s)| s).map(|(i, _)| i as u64).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumProductScore {
    pub set_size: usize,
    pub sumset_size: usize,
    pub productset_size: usize,
    pub score: usize,
    /// `log_{|A|}(|A+A| + |A·A|)`; `None` when `|A| < 2`.
    pub exponent: Option<f64>,
}

pub fn sum_product_score(a: &[u64], p: u64) -> Result<SumProductScore> {
    let s = sumset(a, a, p).len();
    let m = productset(a, a, p)?.len();
    let n = a.iter().collect::<BTreeSet<_>>().len();
    let score = s + m;
    let exponent = (n >= 2).then(|| (score as f64).ln() / (n as f64).ln());
    Ok(SumProductScore { set_size: n, sumset_size: s, productset_size: m, score, exponent })
}

/// A validated input to [`bgs_extract`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BgsInstance {
    pub modulus: u64,
    pub a: Vec<u64>,
    pub b: Vec<u64>,
    pub edges: Vec<(u64, u64)>,
    #[serde(with = "crate::rational::serde_str")]
    pub n_bound: BigRational,
    #[serde(with = "crate::rational::serde_str")]
    pub alpha: BigRational,
}

impl BgsInstance {
    pub fn new(
        modulus: u64,
        a: Vec<u64>,
        b: Vec<u64>,
        edges: Vec<(u64, u64)>,
        n_bound: BigRational,
        alpha: BigRational,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidInstance(m));
        if modulus == 0 {
            return bad("modulus must be positive".into());
        }
        let a: Vec<u64> = a.into_iter().map(|x| x % modulus).collect::<BTreeSet<_>>().into_iter().collect();
        let b: Vec<u64> = b.into_iter().map(|x| x % modulus).collect::<BTreeSet<_>>().into_iter().collect();
        let edges: Vec<(u64, u64)> =
            edges.into_iter().map(|(x, y)| (x % modulus, y % modulus)).collect::<BTreeSet<_>>().into_iter().collect();
        if !alpha.is_positive() {
            return bad("alpha must be positive".into());
        }
        for &(x, y) in &edges {
            if a.binary_search(&x).is_err() || b.binary_search(&y).is_err() {
                return bad(format!("edge ({x}, {y}) not in A x B"));
            }
        }
        let sums: BTreeSet<u64> = edges.iter().map(|&(x, y)| (x + y) % modulus).collect();
        for (name, size) in [("|A|", a.len()), ("|B|", b.len()), ("|S|", sums.len())] {
            if from_u64(size as u64) > n_bound {
                return bad(format!("{name} = {size} exceeds N"));
            }
        }
        if from_u64(edges.len() as u64) < &alpha * &n_bound * &n_bound {
            return bad(format!("|G| = {} below alpha N^2", edges.len()));
        }
        Ok(Self { modulus, a, b, edges, n_bound, alpha })
    }

    /// `(2^37 / alpha^8) N`.
    pub fn doubling_bound(&self) -> BigRational {
        pow2(37) / pow_rational(&self.alpha, 8) * &self.n_bound
    }

    /// `(alpha^4 / 2^15) N`.
    pub fn size_bound(&self) -> BigRational {
        pow_rational(&self.alpha, 4) / pow2(15) * &self.n_bound
    }

    fn degrees(&self) -> Vec<(u64, usize)> {
        self.a.iter().map(|&x| (x, self.edges.iter().filter(|(ex, _)| *ex == x).count())).collect()
    }
}

pub fn pow_rational(r: &BigRational, e: i32) -> BigRational {
    num_traits::pow(r.clone(), e as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Vacuous,
    Greedy,
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub a_prime: Vec<u64>,
    /// `|A' + A'|`.
    pub doubling: usize,
    pub certified_doubling: bool,
    pub certified_size: bool,
    pub strategy: Strategy,
}

impl ExtractionResult {
    pub fn certified(&self) -> bool {
        self.certified_doubling && self.certified_size
    }
}

/// Extraction against the theorem's constants.
pub fn bgs_extract(instance: &BgsInstance) -> Result<ExtractionResult> {
    extract_with_bounds(instance, &instance.doubling_bound(), &instance.size_bound())
}

/// Finds `A' ⊆ A` with `|A' + A'| <= doubling_bound` and `|A'| >= size_bound`.
pub fn extract_with_bounds(
    instance: &BgsInstance,
    doubling_bound: &BigRational,
    size_bound: &BigRational,
) -> Result<ExtractionResult> {
    let n = instance.modulus;
    let a = &instance.a;
    if a.is_empty() {
        return Err(Error::ExtractionFailed("A is empty".into()));
    }
    let certify = |set: Vec<u64>, strategy| {
        let doubling = sumset(&set, &set, n).len();
        ExtractionResult {
            certified_doubling: from_u64(doubling as u64) <= *doubling_bound,
            certified_size: from_u64(set.len() as u64) >= *size_bound,
            a_prime: set,
            doubling,
            strategy,
        }
    };
    let len = a.len() as u64;
    let max_doubling = n.min(len * (len + 1) / 2);
    if from_u64(max_doubling) <= *doubling_bound && from_u64(len) >= *size_bound {
        return Ok(certify(a.clone(), Strategy::Vacuous));
    }

    let greedy = certify(greedy_grow(instance, doubling_bound), Strategy::Greedy);
    if greedy.certified() {
        return Ok(greedy);
    }
    if a.len() > EXHAUSTIVE_LIMIT {
        return Err(Error::ExtractionFailed(format!(
            "greedy reached |A'| = {} with |A'+A'| = {}; |A| = {} is beyond the exhaustive limit",
            greedy.a_prime.len(),
            greedy.doubling,
            a.len()
        )));
    }
    match exhaustive_search(a, n, doubling_bound, size_bound) {
        Some(set) => Ok(certify(set, Strategy::Exhaustive)),
        None => Err(Error::ExtractionFailed("no subset of A meets both bounds".into())),
    }
}

fn greedy_grow(instance: &BgsInstance, doubling_bound: &BigRational) -> Vec<u64> {
    let n = instance.modulus;
    let mut order = instance.degrees();
    // descending degree, ties by smallest element
    order.sort_by(|(x, dx), (y, dy)| dy.cmp(dx).then(x.cmp(y)));
    let mut chosen: Vec<u64> = Vec::new();
    let mut sums = vec![false; n as usize];
    let mut count = 0usize;
    for (x, _) in order {
        let mut fresh: Vec<usize> = chosen.iter().chain(std::iter::once(&x)).map(|&y| ((x + y) % n) as usize).collect();
        fresh.sort_unstable();
        fresh.dedup();
        let added = fresh.iter().filter(|&&s| !sums[s]).count();
        if from_u64((count + added) as u64) <= *doubling_bound {
            for s in fresh {
                sums[s] = true;
            }
            count += added;
            chosen.push(x);
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Lexicographically first subset of the minimal admissible size with small doubling.
///
/// Doubling is monotone under inclusion, so if any certified subset exists,
/// one of size exactly `max(1, ceil(size_bound))` does too.
fn exhaustive_search(a: &[u64], n: u64, doubling_bound: &BigRational, size_bound: &BigRational) -> Option<Vec<u64>> {
    let need = size_bound.ceil().to_integer().max(BigInt::one()).to_usize()?;
    if need > a.len() {
        return None;
    }
    let fits = |set: &[u64]| from_u64(sumset(set, set, n).len() as u64) <= *doubling_bound;
    // parallel over the first element; within a prefix, combinations come out in lex order
    par::find_map_first(a.len(), |first| {
        let rest = &a[first + 1..];
        if rest.len() + 1 < need {
            return None;
        }
        rest.iter().copied().combinations(need - 1).find_map(|tail| {
            let mut set = Vec::with_capacity(need);
            set.push(a[first]);
            set.extend(tail);
            fits(&set).then_some(set)
        })
    })
}
