//! Probability measures on F_p.
//!
//! Masses are exact: a shared denominator and one nonnegative integer
//! numerator per residue. The Fourier transform
//! `mu_hat(xi) = sum_x mu(x) e^{2 pi i x xi / p}` is computed in double
//! precision by direct summation and cached on first use.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::psi_table;
use crate::par;
use crate::rational::{format_rational, parse_rational, ratio_u};

#[derive(Debug, Clone)]
pub struct Measure {
    p: u64,
    numer: Vec<BigUint>,
    denom: BigUint,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl PartialEq for Measure {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.denom == other.denom && self.numer == other.numer
    }
}

impl Eq for Measure {}

impl Measure {
    /// Normalizes nonnegative integer weights into a probability measure.
    pub fn from_weights(p: u64, weights: Vec<BigUint>) -> Result<Self> {
        if weights.len() as u64 != p {
            return Err(Error::InvalidMeasure(format!("expected {p} weights, got {}", weights.len())));
        }
        let total: BigUint = weights.iter().sum();
        if total.is_zero() {
            return Err(Error::EmptySupport);
        }
        Ok(Self::reduced(p, weights, total))
    }

    fn reduced(p: u64, mut numer: Vec<BigUint>, mut denom: BigUint) -> Self {
        let mut g = denom.clone();
        for n in &numer {
            if g.is_one() {
                break;
            }
            if !n.is_zero() {
                g = g.gcd(n);
            }
        }
        if !g.is_one() {
            for n in numer.iter_mut() {
                *n /= &g;
            }
            denom /= &g;
        }
        Self { p, numer, denom, spectrum: OnceLock::new() }
    }

    /// Uniform mass on `support` (duplicates ignored).
    pub fn uniform_on(p: u64, support: &[u64]) -> Result<Self> {
        let mut weights = vec![BigUint::zero(); p as usize];
        for &x in support {
            weights[(x % p) as usize] = BigUint::one();
        }
        Self::from_weights(p, weights)
    }

    pub fn uniform(p: u64) -> Self {
        Self::reduced(p, vec![BigUint::one(); p as usize], BigUint::from(p))
    }

    pub fn point_mass(p: u64, a: u64) -> Self {
        let mut numer = vec![BigUint::zero(); p as usize];
        numer[(a % p) as usize] = BigUint::one();
        Self::reduced(p, numer, BigUint::one())
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn numerators(&self) -> &[BigUint] {
        &self.numer
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denom
    }

    pub fn mass(&self, x: u64) -> BigRational {
        ratio_u(&self.numer[(x % self.p) as usize], &self.denom)
    }

    pub fn masses(&self) -> Vec<BigRational> {
        (0..self.p).map(|x| self.mass(x)).collect()
    }

    /// Masses rounded to double precision.
    pub fn masses_f64(&self) -> Vec<f64> {
        match self.denom.to_f64().filter(|v| v.is_finite()) {
            Some(scale) => self.numer.iter().map(|n| n.to_f64().unwrap_or(f64::INFINITY) / scale).collect(),
            None => self.numer.iter().map(|n| crate::rational::to_f64(&ratio_u(n, &self.denom))).collect(),
        }
    }

    pub fn support(&self) -> Vec<u64> {
        (0..self.p).filter(|&x| !self.numer[x as usize].is_zero()).collect()
    }

    /// max_x mu(x).
    pub fn sup_norm(&self) -> BigRational {
        let m = self.numer.iter().max().cloned().unwrap_or_default();
        ratio_u(&m, &self.denom)
    }

    /// sum_x mu(x)^2, exactly.
    pub fn l2_squared(&self) -> BigRational {
        let s: BigUint = self.numer.iter().map(|n| n * n).sum();
        ratio_u(&s, &(&self.denom * &self.denom))
    }

    /// x -> mu(-x).
    pub fn reflect(&self) -> Measure {
        let p = self.p as usize;
        let numer = (0..p).map(|x| self.numer[(p - x) % p].clone()).collect();
        Measure { p: self.p, numer, denom: self.denom.clone(), spectrum: OnceLock::new() }
    }

    /// Exact additive convolution `(mu * rho)(x) = sum_y mu(y) rho(x - y)`.
    pub fn convolve(&self, rho: &Measure) -> Result<Measure> {
        if self.p != rho.p {
            return Err(Error::ModulusMismatch(self.p, rho.p));
        }
        let numer = cyclic_convolution(&self.numer, &rho.numer);
        Ok(Self::reduced(self.p, numer, &self.denom * &rho.denom))
    }

    /// nu = mu * mu^-.
    pub fn nu(&self) -> Measure {
        self.convolve(&self.reflect()).expect("same modulus")
    }

    /// The k-fold convolution power of nu = mu * mu^-, by repeated squaring.
    pub fn k_fold_nu(&self, k: u64) -> Measure {
        assert!(k >= 1, "k must be positive");
        convolution_power(&self.nu(), k)
    }

    /// phi(x) = p (mu * mu^-)(x).
    pub fn phi(&self) -> PhiFunction {
        let nu = self.nu();
        let p = BigUint::from(self.p);
        let numer = nu.numer.iter().map(|n| n * &p).collect();
        let m = Self::reduced(self.p, numer, nu.denom);
        PhiFunction { p: self.p, numer: m.numer, denom: m.denom }
    }

    /// Fourier coefficients, cached after the first call.
    pub fn fourier(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| {
            let psi = psi_table(self.p);
            dft_real(&self.masses_f64(), &psi)
        })
    }

    pub fn has_cached_spectrum(&self) -> bool {
        self.spectrum.get().is_some()
    }

    /// |mu_hat(xi)| for every xi.
    pub fn fourier_magnitudes(&self) -> Vec<f64> {
        self.fourier().iter().map(|z| z.norm()).collect()
    }

    /// Whether mu(hx) = mu(x) for every h in `group` and every x.
    pub fn is_dilation_invariant(&self, group: &[u64]) -> bool {
        let p = self.p;
        group.iter().all(|&h| (0..p).all(|x| self.numer[x as usize] == self.numer[(h * x % p) as usize]))
    }
}

/// `nu^{*k}` by binary exponentiation.
pub fn convolution_power(nu: &Measure, k: u64) -> Measure {
    assert!(k >= 1);
    let mut base = nu.clone();
    let mut acc: Option<Measure> = None;
    let mut e = k;
    loop {
        if e & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => a.convolve(&base).expect("same modulus"),
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = base.convolve(&base).expect("same modulus");
    }
    acc.expect("k >= 1")
}

fn max_bits(v: &[BigUint]) -> u64 {
    v.iter().map(|n| n.bits()).max().unwrap_or(0)
}

/// Cyclic convolution of integer sequences of equal length.
pub fn cyclic_convolution(a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
    let n = a.len();
    assert_eq!(n, b.len());
    let a_nz: Vec<(usize, &BigUint)> = a.iter().enumerate().filter(|(_, v)| !v.is_zero()).collect();
    let len_bits = 64 - (n as u64).leading_zeros() as u64;
    if max_bits(a) + max_bits(b) + len_bits <= 127 {
        let a_nz: Vec<(usize, u128)> = a_nz.iter().map(|(i, v)| (*i, v.to_u128().unwrap())).collect();
        let b_small: Vec<u128> = b.iter().map(|v| v.to_u128().unwrap()).collect();
        return par::map_range(n, |x| {
            let mut acc = 0u128;
            for &(y, av) in &a_nz {
                let bv = b_small[(x + n - y) % n];
                acc += av * bv;
            }
            BigUint::from(acc)
        });
    }
    par::map_range(n, |x| {
        let mut acc = BigUint::zero();
        for &(y, av) in &a_nz {
            let bv = &b[(x + n - y) % n];
            if !bv.is_zero() {
                acc += av * bv;
            }
        }
        acc
    })
}

/// Direct DFT of a real sequence, sequential kernel.
pub fn dft_real_sequential(values: &[f64], psi: &[Complex64]) -> Vec<Complex64> {
    let nz = nonzero_entries(values);
    (0..values.len()).map(|xi| dft_coefficient(&nz, psi, xi)).collect()
}

/// Direct DFT of a real sequence, parallel over frequencies.
#[cfg(feature = "parallel")]
pub fn dft_real_parallel(values: &[f64], psi: &[Complex64]) -> Vec<Complex64> {
    use rayon::prelude::*;
    let nz = nonzero_entries(values);
    (0..values.len()).into_par_iter().map(|xi| dft_coefficient(&nz, psi, xi)).collect()
}

/// `F(xi) = sum_x f(x) psi[x xi mod p]` with pairwise summation per coefficient.
pub fn dft_real(values: &[f64], psi: &[Complex64]) -> Vec<Complex64> {
    #[cfg(feature = "parallel")]
    {
        dft_real_parallel(values, psi)
    }
    #[cfg(not(feature = "parallel"))]
    {
        dft_real_sequential(values, psi)
    }
}

fn nonzero_entries(values: &[f64]) -> Vec<(usize, f64)> {
    values.iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect()
}

fn dft_coefficient(nz: &[(usize, f64)], psi: &[Complex64], xi: usize) -> Complex64 {
    let p = psi.len();
    par::pairwise_sum_complex_by(nz.len(), &|i| {
        let (x, v) = nz[i];
        psi[x * xi % p] * v
    })
}

/// `f(x) = (1/p) sum_xi F(xi) psi[-x xi]`.
pub fn inverse_dft(spectrum: &[Complex64], psi: &[Complex64]) -> Vec<Complex64> {
    let p = spectrum.len();
    par::map_range(p, |x| {
        let s = par::pairwise_sum_complex_by(p, &|xi| spectrum[xi] * psi[(p - x * xi % p) % p]);
        s / p as f64
    })
}

/// phi(x) = p (mu * mu^-)(x), exact, in a shared-denominator form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhiFunction {
    p: u64,
    numer: Vec<BigUint>,
    denom: BigUint,
}

impl PhiFunction {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn numerators(&self) -> &[BigUint] {
        &self.numer
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denom
    }

    pub fn value(&self, x: u64) -> BigRational {
        ratio_u(&self.numer[(x % self.p) as usize], &self.denom)
    }

    pub fn at_zero(&self) -> BigRational {
        self.value(0)
    }

    pub fn total(&self) -> BigRational {
        let s: BigUint = self.numer.iter().sum();
        ratio_u(&s, &self.denom)
    }

    pub fn max(&self) -> BigRational {
        ratio_u(self.numer.iter().max().expect("nonempty"), &self.denom)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct MeasureJson {
    p: u64,
    mass: Vec<String>,
}

impl Serialize for Measure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MeasureJson { p: self.p, mass: self.masses().iter().map(format_rational).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Measure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = MeasureJson::deserialize(d)?;
        Measure::from_rational_masses(raw.p, &raw.mass).map_err(D::Error::custom)
    }
}

impl Measure {
    /// Builds a measure from `"num/den"` strings; they must be nonnegative and sum to 1.
    pub fn from_rational_masses(p: u64, masses: &[String]) -> Result<Self> {
        if masses.len() as u64 != p {
            return Err(Error::InvalidMeasure(format!("expected {p} masses, got {}", masses.len())));
        }
        let values: Vec<BigRational> = masses.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?;
        if values.iter().any(|v| v < &BigRational::zero()) {
            return Err(Error::InvalidMeasure("negative mass".into()));
        }
        let total: BigRational = values.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidMeasure(format!("masses sum to {}", format_rational(&total))));
        }
        let lcm = values.iter().fold(num_bigint::BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let weights =
            values.iter().map(|v| (v.numer() * (&lcm / v.denom())).to_biguint().expect("nonnegative")).collect();
        Self::from_weights(p, weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldContext;
    use crate::rational::from_u64;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// Naive double-loop oracle for mu * rho.
    fn naive_convolve(mu: &Measure, rho: &Measure) -> Vec<BigRational> {
        let p = mu.p();
        (0..p).map(|x| (0..p).map(|y| mu.mass(y) * rho.mass((x + p - y) % p)).sum()).collect()
    }

    #[test]
    fn uniform_on_and_empty() {
        let m = Measure::uniform_on(7, &[1, 2, 4]).unwrap();
        assert_eq!(m.mass(2), r(1, 3));
        assert_eq!(m.mass(3), r(0, 1));
        assert_eq!(Measure::uniform_on(7, &[]).unwrap_err(), Error::EmptySupport);
    }

    #[test]
    fn point_mass_at_zero_has_flat_spectrum() {
        let m = Measure::point_mass(11, 0);
        assert!(m.fourier().iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn full_unit_group_spectrum() {
        let m = Measure::uniform_on(7, &[1, 2, 3, 4, 5, 6]).unwrap();
        let f = m.fourier();
        assert!((f[0].re - 1.0).abs() < 1e-15);
        for z in &f[1..] {
            assert!((z - Complex64::new(-1.0 / 6.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn quadratic_residues_mod_7() {
        let m = Measure::uniform_on(7, &[1, 2, 4]).unwrap();
        let f = m.fourier();
        let l2: f64 = f.iter().map(|z| z.norm_sqr()).sum();
        assert!((l2 - 7.0 / 3.0).abs() < 1e-12);
        for z in &f[1..] {
            assert!((z.norm() - 2f64.sqrt() / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reflect_examples() {
        assert_eq!(Measure::point_mass(7, 2).reflect(), Measure::point_mass(7, 5));
        assert_eq!(Measure::uniform(7).reflect(), Measure::uniform(7));
        let qr = Measure::uniform_on(7, &[1, 2, 4]).unwrap();
        assert_eq!(qr.reflect(), Measure::uniform_on(7, &[3, 5, 6]).unwrap());
    }

    #[test]
    fn convolve_examples() {
        let a = Measure::point_mass(11, 3);
        let b = Measure::point_mass(11, 10);
        assert_eq!(a.convolve(&b).unwrap(), Measure::point_mass(11, 2));

        // uniform on {0,1} in F_5: nu = 1/2 at 0, 1/4 at 1 and 4
        let m = Measure::uniform_on(5, &[0, 1]).unwrap();
        let nu = m.nu();
        assert_eq!(nu.masses(), vec![r(1, 2), r(1, 4), r(0, 1), r(0, 1), r(1, 4)]);
        assert_eq!(nu.masses(), naive_convolve(&m, &m.reflect()));

        let qr = Measure::uniform_on(7, &[1, 2, 4]).unwrap();
        assert_eq!(qr.convolve(&Measure::point_mass(7, 0)).unwrap(), qr);

        assert_eq!(Measure::uniform(5).convolve(&Measure::uniform(7)).unwrap_err(), Error::ModulusMismatch(5, 7));
    }

    #[test]
    fn convolution_matches_naive_for_big_denominators() {
        // pushes past the u128 fast path
        let m = Measure::uniform_on(13, &[1, 3, 9]).unwrap();
        let mut big = m.k_fold_nu(4);
        while big.denominator().bits() < 70 {
            big = big.convolve(&m).unwrap();
        }
        let fat = big.convolve(&big).unwrap();
        assert!(fat.denominator().bits() > 127);
        assert_eq!(fat.masses(), naive_convolve(&big, &big));
    }

    #[test]
    fn k_fold_nu_examples() {
        for k in 1..=5 {
            assert_eq!(Measure::point_mass(7, 3).k_fold_nu(k), Measure::point_mass(7, 0));
            assert_eq!(Measure::uniform(7).k_fold_nu(k), Measure::uniform(7));
        }
        let qr = Measure::uniform_on(7, &[1, 2, 4]).unwrap();
        let nu2 = qr.k_fold_nu(2);
        for x in 0..7 {
            assert_eq!(nu2.mass(x), nu2.mass(2 * x % 7));
            assert_eq!(nu2.mass(x), nu2.mass(4 * x % 7));
        }
        // repeated squaring agrees with sequential convolution
        let nu = qr.nu();
        let mut seq = nu.clone();
        for _ in 1..5 {
            seq = seq.convolve(&nu).unwrap();
        }
        assert_eq!(qr.k_fold_nu(5), seq);
    }

    #[test]
    fn phi_examples() {
        let phi = Measure::uniform(11).phi();
        assert!((0..11).all(|x| phi.value(x) == from_u64(1)));
        let phi = Measure::uniform_on(7, &[1, 2, 4]).unwrap().phi();
        assert_eq!(phi.at_zero(), r(7, 3));
        assert_eq!(phi.total(), from_u64(7));
        assert_eq!(phi.max(), phi.at_zero());
        let phi = Measure::point_mass(7, 0).phi();
        assert_eq!(phi.at_zero(), from_u64(7));
        assert!((1..7).all(|x| phi.value(x) == from_u64(0)));
    }

    #[test]
    fn uniform_spectrum_vanishes_off_zero() {
        let m = Measure::uniform(101);
        let f = m.fourier();
        assert!((f[0].re - 1.0).abs() < 1e-12);
        assert!(f[1..].iter().all(|z| z.norm() < 1e-9));
    }

    #[test]
    fn conjugate_symmetry() {
        let f = FieldContext::new(101).unwrap();
        let m = Measure::uniform_on(101, &f.subgroup(4).unwrap().elements).unwrap();
        let s = m.fourier();
        for xi in 1..101 {
            assert!((s[101 - xi] - s[xi].conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_dft_recovers_masses() {
        let m = Measure::uniform_on(31, &[0, 5, 7]).unwrap();
        let psi = psi_table(31);
        let back = inverse_dft(m.fourier(), &psi);
        for (x, v) in m.masses_f64().iter().enumerate() {
            assert!((back[x].re - v).abs() < 1e-12 && back[x].im.abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip() {
        let m = Measure::uniform_on(5, &[0, 1]).unwrap().nu();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"p":5,"mass":["1/2","1/4","0/1","0/1","1/4"]}"#);
        let back: Measure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<Measure>(r#"{"p":2,"mass":["1/2","1/3"]}"#).is_err());
        assert!(serde_json::from_str::<Measure>(r#"{"p":2,"mass":["3/2","-1/2"]}"#).is_err());
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_and_sequential_dft_agree_bitwise() {
        let m = Measure::uniform_on(211, &[1, 2, 3, 50, 99]).unwrap().k_fold_nu(2);
        let psi = psi_table(211);
        let v = m.masses_f64();
        assert_eq!(dft_real_parallel(&v, &psi), dft_real_sequential(&v, &psi));
    }
}
