//! Arithmetic in F_p: primality, primitive roots, discrete logs, subgroups.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper bound on p. Tables are O(p) and the transforms O(p^2).
pub const DEFAULT_P_CAP: u64 = 200_000;

/// Environment variable overriding [`DEFAULT_P_CAP`].
pub const P_CAP_ENV: &str = "EXPSUM_P_CAP";

/// Reads the prime cap from `EXPSUM_P_CAP`, falling back to the default.
pub fn p_cap_from_env() -> u64 {
    std::env::var(P_CAP_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_P_CAP)
}

pub fn pow_mod(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut acc = 1 % modulus;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    acc
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Primes in `lo..=hi`, ascending.
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&n| is_prime(n)).collect()
}

/// Distinct prime factors, ascending.
pub fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// All positive divisors, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// The p values e^{2 pi i j / p}.
pub fn psi_table(p: u64) -> Vec<Complex64> {
    (0..p)
        .map(|j| {
            // reduce to the symmetric range before taking sin/cos
            let j = j as f64;
            let pf = p as f64;
            let t = if 2.0 * j > pf { j - pf } else { j };
            let (s, c) = (TAU * t / pf).sin_cos();
            Complex64::new(c, s)
        })
        .collect()
}

/// An odd prime with its least primitive root and full log/power tables.
#[derive(Debug, Clone)]
pub struct FieldContext {
    p: u64,
    g: u64,
    /// `log_table[x]` is the discrete log of `x`; entry 0 is unused.
    log_table: Vec<u32>,
    /// `pow_table[t]` is `g^t`, `t` in `0..p-1`.
    pow_table: Vec<u32>,
    psi_table: Vec<Complex64>,
}

impl FieldContext {
    /// Builds the context with the default cap (or `EXPSUM_P_CAP`).
    pub fn new(p: u64) -> Result<Self> {
        Self::with_cap(p, p_cap_from_env())
    }

    pub fn with_cap(p: u64, cap: u64) -> Result<Self> {
        if p < 3 {
            return Err(if is_prime(p) { Error::ModulusTooSmall(p) } else { Error::NotPrime(p) });
        }
        if p > cap {
            return Err(Error::TooLarge { p, cap });
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let g = least_primitive_root(p);
        let n = (p - 1) as usize;
        let mut log_table = vec![0u32; p as usize];
        let mut pow_table = Vec::with_capacity(n);
        let mut x = 1u64;
        for t in 0..n {
            pow_table.push(x as u32);
            log_table[x as usize] = t as u32;
            x = x * g % p;
        }
        debug_assert_eq!(x, 1);
        Ok(Self { p, g, log_table, pow_table, psi_table: psi_table(p) })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn generator(&self) -> u64 {
        self.g
    }

    pub fn psi(&self) -> &[Complex64] {
        &self.psi_table
    }

    /// e^{2 pi i x / p} for any integer residue `x`.
    pub fn psi_at(&self, x: u64) -> Complex64 {
        self.psi_table[(x % self.p) as usize]
    }

    /// Smallest `t >= 0` with `g^t = s`.
    pub fn discrete_log(&self, s: u64) -> Result<u64> {
        let s = s % self.p;
        if s == 0 {
            return Err(Error::ZeroArgument);
        }
        Ok(self.log_table[s as usize] as u64)
    }

    /// `g^t` for any `t` (reduced mod p - 1).
    pub fn power_of_generator(&self, t: u64) -> u64 {
        self.pow_table[(t % (self.p - 1)) as usize] as u64
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a % self.p * (b % self.p) % self.p
    }

    pub fn inverse(&self, a: u64) -> Result<u64> {
        let l = self.discrete_log(a)?;
        Ok(self.power_of_generator((self.p - 1 - l) % (self.p - 1)))
    }

    /// Multiplicative order of a unit.
    pub fn order_of(&self, a: u64) -> Result<u64> {
        let l = self.discrete_log(a)?;
        let n = self.p - 1;
        Ok(n / num_integer::gcd(l, n))
    }

    /// The unique subgroup of index `m` in F_p^×.
    pub fn subgroup(&self, m: u64) -> Result<SubgroupSpec> {
        let n = self.p - 1;
        if m == 0 || !n.is_multiple_of(m) {
            return Err(Error::IndexNotDividing { m, order: n });
        }
        let mut elements: Vec<u64> = (0..n / m).map(|j| self.power_of_generator(j * m)).collect();
        elements.sort_unstable();
        Ok(SubgroupSpec { p: self.p, kind: SubgroupKind::Full { index: m }, elements })
    }

    /// The segment `{g0^t : 0 <= t < length}`; requires `length <= ord(g0)`.
    pub fn segment(&self, g0: u64, length: u64) -> Result<SubgroupSpec> {
        let g0 = g0 % self.p;
        let order = self.order_of(g0).map_err(|_| Error::ZeroElement(g0))?;
        if length == 0 {
            return Err(Error::EmptySegment);
        }
        if length > order {
            return Err(Error::SegmentTooLong { length, order });
        }
        let mut elements = Vec::with_capacity(length as usize);
        let mut x = 1u64;
        for _ in 0..length {
            elements.push(x);
            x = x * g0 % self.p;
        }
        elements.sort_unstable();
        Ok(SubgroupSpec { p: self.p, kind: SubgroupKind::Segment { generator: g0, length }, elements })
    }

    /// Every subgroup, ordered by index.
    pub fn all_subgroups(&self) -> Vec<SubgroupSpec> {
        divisors(self.p - 1).into_iter().map(|m| self.subgroup(m).expect("divisor")).collect()
    }
}

fn least_primitive_root(p: u64) -> u64 {
    let n = p - 1;
    let factors = distinct_prime_factors(n);
    (2..p).find(|&g| factors.iter().all(|&q| pow_mod(g, n / q, p) != 1)).unwrap_or(1)
    // p = 2 only; rejected earlier
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SubgroupKind {
    Full { index: u64 },
    Segment { generator: u64, length: u64 },
}

/// A multiplicative subgroup or geometric segment, with its sorted elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupSpec {
    pub p: u64,
    pub kind: SubgroupKind,
    pub elements: Vec<u64>,
}

impl SubgroupSpec {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn is_full(&self) -> bool {
        matches!(self.kind, SubgroupKind::Full { .. })
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elements.binary_search(&(x % self.p)).is_ok()
    }

    /// log_p |H|.
    pub fn alpha(&self) -> f64 {
        (self.order() as f64).ln() / (self.p as f64).ln()
    }
}
