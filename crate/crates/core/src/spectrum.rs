//! Large Fourier coefficients and the smearing inequalities.
//!
//! `Lambda_delta = { xi : |mu_hat(xi)| > p^{-delta} }`. The (k, delta)
//! selection walks `k_0 = 4`, `k_{i+1} = floor(k_i^2 / eta) + 1`,
//! `delta_i = 1 / k_{i+1}` and stops at the first `i` for which
//! `sum_xi nu_hat_{k_i}(xi)^2 <= p^eta |Lambda_{delta_i}|`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::checks::FloatCheck;
use crate::error::{Error, Result};
use crate::field::{FieldContext, SubgroupSpec};
use crate::measure::Measure;
use crate::par;
use crate::rational::{format_rational, from_u64, to_f64};

/// Coefficients closer than this to the `p^{-delta}` threshold are ambiguous.
pub const BOUNDARY_GUARD: f64 = 1e-9;

/// Spectral values below this are flushed to zero and counted.
pub const UNDERFLOW_CLAMP: f64 = 1e-300;

pub const DEFAULT_K_CAP: u64 = 64;

fn delta_f64(delta: &BigRational) -> f64 {
    to_f64(delta)
}

fn check_positive(name: &str, r: &BigRational) -> Result<()> {
    if r <= &BigRational::zero() {
        return Err(Error::InvalidParameter(format!("{name} must be positive, got {}", format_rational(r))));
    }
    Ok(())
}

/// `{ xi : |mu_hat(xi)| > p^{-delta} }`, ascending.
pub fn lambda_delta(mu: &Measure, delta: &BigRational) -> Result<Vec<u64>> {
    check_positive("delta", delta)?;
    lambda_from_magnitudes(mu.p(), &mu.fourier_magnitudes(), delta_f64(delta))
}

pub(crate) fn lambda_from_magnitudes(p: u64, mags: &[f64], delta: f64) -> Result<Vec<u64>> {
    let threshold = (p as f64).powf(-delta);
    let mut out = Vec::new();
    for (xi, &m) in mags.iter().enumerate() {
        if (m - threshold).abs() <= BOUNDARY_GUARD {
            return Err(Error::BoundaryAmbiguity { xi: xi as u64, magnitude: m, threshold });
        }
        if m > threshold {
            out.push(xi as u64);
        }
    }
    Ok(out)
}

/// `nu_hat_k(xi) = |mu_hat(xi)|^{2k}` with underflow clamped to zero.
pub fn nu_hat(mags: &[f64], k: u64) -> (Vec<f64>, usize) {
    powers(mags, 2 * k)
}

/// `|mu_hat|^e` entrywise, flushing values below [`UNDERFLOW_CLAMP`].
pub fn powers(mags: &[f64], e: u64) -> (Vec<f64>, usize) {
    let mut clamped = 0;
    let v = mags
        .iter()
        .map(|&m| {
            let v = m.powf(e as f64);
            if m > 0.0 && v < UNDERFLOW_CLAMP {
                clamped += 1;
                0.0
            } else {
                v
            }
        })
        .collect();
    (v, clamped)
}

/// `W(xi) = sum_x nu_hat_k(x xi)^2 nu_k(x)` for every xi.
pub fn smear_weights(nu_hat_k: &[f64], nu_k_mass: &[f64]) -> Vec<f64> {
    let p = nu_hat_k.len();
    let sq: Vec<f64> = nu_hat_k.iter().map(|v| v * v).collect();
    let support: Vec<(usize, f64)> = nu_k_mass.iter().copied().enumerate().filter(|(_, w)| *w != 0.0).collect();
    par::map_range(p, |xi| {
        par::pairwise_sum_by(support.len(), &|i| {
            let (x, w) = support[i];
            sq[x * xi % p] * w
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaBoundsReport {
    pub p: u64,
    pub subgroup_order: usize,
    #[serde(with = "crate::rational::serde_str")]
    pub delta: BigRational,
    pub lambda_size: usize,
    /// `|Lambda_delta| <= p^{1+2 delta} / |H|`.
    pub upper: FloatCheck,
    /// Whether some nonzero xi lies in `Lambda_delta`.
    pub nonzero_large: bool,
    /// `|Lambda_delta| >= |H|`, only when `nonzero_large`.
    pub lower: Option<FloatCheck>,
}

impl LambdaBoundsReport {
    pub fn pass(&self) -> bool {
        self.upper.pass && self.lower.as_ref().is_none_or(|c| c.pass)
    }
}

/// Size bounds on `Lambda_delta` for `mu = mu_H`.
pub fn check_lambda_bounds(ctx: &FieldContext, h: &SubgroupSpec, delta: &BigRational) -> Result<LambdaBoundsReport> {
    let p = ctx.p();
    let mu = Measure::uniform_on(p, &h.elements)?;
    let lambda = lambda_delta(&mu, delta)?;
    let d = delta_f64(delta);
    let n = lambda.len() as f64;
    let upper = FloatCheck::le("|Lambda| <= p^(1+2delta)/|H|", n, (p as f64).powf(1.0 + 2.0 * d) / h.order() as f64);
    let nonzero_large = lambda.iter().any(|&xi| xi != 0);
    let lower = nonzero_large.then(|| FloatCheck::le("|H| <= |Lambda|", h.order() as f64, n));
    Ok(LambdaBoundsReport {
        p,
        subgroup_order: h.order(),
        delta: delta.clone(),
        lambda_size: lambda.len(),
        upper,
        nonzero_large,
        lower,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iteration {
    pub k: u64,
    #[serde(with = "crate::rational::serde_str")]
    pub delta: BigRational,
    pub l2_spectral_mass: f64,
    pub lambda_size: usize,
}

/// Output of [`select_k_delta`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub p: u64,
    #[serde(with = "crate::rational::serde_str")]
    pub eta: BigRational,
    pub k: u64,
    #[serde(with = "crate::rational::serde_str")]
    pub delta: BigRational,
    pub lambda_set: Vec<u64>,
    /// `sum_xi |nu_hat_k(xi)|^2`, from the exact identity `p sum_x nu_k(x)^2`.
    pub l2_spectral_mass: f64,
    #[serde(with = "crate::rational::serde_str")]
    pub l2_spectral_mass_exact: BigRational,
    /// The same sum evaluated from the double-precision spectrum.
    pub l2_spectral_mass_float: f64,
    pub iterations: Vec<Iteration>,
    /// Bracket `p^{-eta}|Lambda| <= sum <= p^eta |Lambda|`, and the
    /// L2-support bound `sum <= p^{2 eta} sum_{Lambda} nu_hat_k^2`.
    pub checks: Vec<FloatCheck>,
    pub clamp_count: usize,
}

impl SpectrumReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass) && self.delta_below_eta_over_k2()
    }

    /// `delta < eta / k^2`, exactly.
    pub fn delta_below_eta_over_k2(&self) -> bool {
        self.delta < &self.eta / from_u64(self.k * self.k)
    }
}

/// Smallest admissible eta: `5 / (p^3 log p)`.
pub fn eta_floor(p: u64) -> f64 {
    5.0 / ((p as f64).powi(3) * (p as f64).ln())
}

/// `floor(k^2 / eta) + 1`, exact.
pub fn next_k(k: u64, eta: &BigRational) -> BigUint {
    let q = BigRational::from_integer(BigInt::from(k) * BigInt::from(k)) / eta;
    (q.floor().to_integer() + BigInt::from(1u32)).to_biguint().expect("positive")
}

/// `M = 2(floor(1/eta) + 1)`.
pub fn loop_cap(eta: &BigRational) -> u64 {
    let inv = (BigRational::from_integer(1.into()) / eta).floor().to_integer();
    2 * (inv.to_u64().unwrap_or(u64::MAX / 4) + 1)
}

pub fn select_k_delta(mu: &Measure, eta: &BigRational) -> Result<SpectrumReport> {
    select_k_delta_with_cap(mu, eta, DEFAULT_K_CAP)
}

pub fn select_k_delta_with_cap(mu: &Measure, eta: &BigRational, k_cap: u64) -> Result<SpectrumReport> {
    let p = mu.p();
    check_positive("eta", eta)?;
    let eta_f = to_f64(eta);
    let floor = eta_floor(p);
    if p < 3 || eta_f < floor {
        return Err(Error::EtaTooSmall { eta: eta_f, min: floor });
    }
    let pf = p as f64;
    let mags = mu.fourier_magnitudes();
    let cap = loop_cap(eta);
    let mut iterations = Vec::new();
    let mut k = 4u64;
    for _ in 0..=cap {
        if k > k_cap {
            return Err(Error::KCapExceeded { k, cap: k_cap });
        }
        let k_next = next_k(k, eta);
        let delta = BigRational::new(1.into(), BigInt::from(k_next.clone()));
        let lambda = lambda_from_magnitudes(p, &mags, delta_f64(&delta))?;
        let nu_k = mu.k_fold_nu(k);
        let exact = nu_k.l2_squared() * from_u64(p);
        let l2 = to_f64(&exact);
        iterations.push(Iteration { k, delta: delta.clone(), l2_spectral_mass: l2, lambda_size: lambda.len() });
        if l2 <= pf.powf(eta_f) * lambda.len() as f64 {
            return Ok(finish(p, eta, k, delta, lambda, exact, &mags, iterations));
        }
        k = k_next.to_u64().ok_or(Error::KCapExceeded { k: u64::MAX, cap: k_cap })?;
    }
    Err(Error::LoopCapExceeded { cap })
}

#[allow(clippy::too_many_arguments)]
fn finish(
    p: u64,
    eta: &BigRational,
    k: u64,
    delta: BigRational,
    lambda: Vec<u64>,
    exact: BigRational,
    mags: &[f64],
    iterations: Vec<Iteration>,
) -> SpectrumReport {
    let pf = p as f64;
    let eta_f = to_f64(eta);
    let l2 = to_f64(&exact);
    let (nh, clamp_count) = nu_hat(mags, k);
    let l2_float = par::pairwise_sum_by(nh.len(), &|i| nh[i] * nh[i]);
    let on_lambda = par::pairwise_sum_by(lambda.len(), &|i| {
        let v = nh[lambda[i] as usize];
        v * v
    });
    let n = lambda.len() as f64;
    let checks = vec![
        FloatCheck::le("p^-eta |Lambda| <= sum nu_hat_k^2", pf.powf(-eta_f) * n, l2),
        FloatCheck::le("sum nu_hat_k^2 <= p^eta |Lambda|", l2, pf.powf(eta_f) * n),
        FloatCheck::le("sum nu_hat_k^2 <= p^(2eta) sum_Lambda nu_hat_k^2", l2, pf.powf(2.0 * eta_f) * on_lambda),
    ];
    SpectrumReport {
        p,
        eta: eta.clone(),
        k,
        delta,
        lambda_set: lambda,
        l2_spectral_mass: l2,
        l2_spectral_mass_exact: exact,
        l2_spectral_mass_float: l2_float,
        iterations,
        checks,
        clamp_count,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmearOutReport {
    pub p: u64,
    pub subgroup_order: usize,
    pub k: u64,
    /// Smallest `rhs - lhs` over all xi.
    pub min_margin: f64,
    pub min_margin_xi: u64,
    pub checked: usize,
    pub clamp_count: usize,
}

/// `nu_hat_k(xi)^{4k} <= sum_x nu_hat_k(x xi)^2 nu_k(x)` for every xi, with mu = mu_H.
pub fn check_smear_out(ctx: &FieldContext, h: &SubgroupSpec, k: u64) -> Result<SmearOutReport> {
    if !h.is_full() {
        return Err(Error::NotFullSubgroup);
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    let p = ctx.p();
    let mu = Measure::uniform_on(p, &h.elements)?;
    let mags = mu.fourier_magnitudes();
    let (nh, c1) = nu_hat(&mags, k);
    let (lhs, c2) = powers(&mags, 8 * k * k);
    let w = smear_weights(&nh, &mu.k_fold_nu(k).masses_f64());
    let mut min_margin = f64::INFINITY;
    let mut min_xi = 0;
    for xi in 0..p as usize {
        let c = FloatCheck::le("smear-out", lhs[xi], w[xi]);
        if !c.pass {
            return Err(Error::InequalityViolated(format!(
                "smear-out at p={p} |H|={} k={k} xi={xi}: {} > {}",
                h.order(),
                lhs[xi],
                w[xi]
            )));
        }
        if c.margin < min_margin {
            min_margin = c.margin;
            min_xi = xi as u64;
        }
    }
    Ok(SmearOutReport {
        p,
        subgroup_order: h.order(),
        k,
        min_margin,
        min_margin_xi: min_xi,
        checked: p as usize,
        clamp_count: c1 + c2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatMultReport {
    pub p: u64,
    pub subgroup_order: usize,
    pub k: u64,
    #[serde(with = "crate::rational::serde_str")]
    pub delta: BigRational,
    #[serde(with = "crate::rational::serde_str")]
    pub eta: BigRational,
    /// `p^{-10 eta} sum nu_hat_k^2 <= sum_{xi,x} nu_hat_k(xi)^2 nu_hat_k(x xi)^2 nu_k(x)`.
    pub main: FloatCheck,
    /// The double sum is at most `sum nu_hat_k^2`.
    pub trivial_upper: FloatCheck,
    /// Link-by-link chain from the proof.
    pub chain: Vec<FloatCheck>,
    pub clamp_count: usize,
}

impl StatMultReport {
    pub fn pass(&self) -> bool {
        self.main.pass && self.trivial_upper.pass && self.chain.iter().all(|c| c.pass)
    }
}

/// Statistical multiplicative stability for `mu_H` at the (k, delta) chosen by [`select_k_delta`].
pub fn check_statistical_mult(ctx: &FieldContext, h: &SubgroupSpec, eta: &BigRational) -> Result<StatMultReport> {
    let p = ctx.p();
    let mu = Measure::uniform_on(p, &h.elements)?;
    let sel = select_k_delta(&mu, eta)?;
    statistical_mult_for(&mu, h.order(), &sel)
}

pub(crate) fn statistical_mult_for(mu: &Measure, order: usize, sel: &SpectrumReport) -> Result<StatMultReport> {
    let p = mu.p();
    let pf = p as f64;
    let (k, eta_f, delta_f) = (sel.k, to_f64(&sel.eta), to_f64(&sel.delta));
    let mags = mu.fourier_magnitudes();
    let (nh, c1) = nu_hat(&mags, k);
    let (high, c2) = powers(&mags, 2 * k * (4 * k + 2));
    let w = smear_weights(&nh, &mu.k_fold_nu(k).masses_f64());
    let n = p as usize;
    let total = par::pairwise_sum_by(n, &|i| nh[i] * nh[i]);
    let rhs = par::pairwise_sum_by(n, &|i| nh[i] * nh[i] * w[i]);
    let lam = &sel.lambda_set;
    let on_lambda = par::pairwise_sum_by(lam.len(), &|i| {
        let v = nh[lam[i] as usize];
        v * v
    });
    let high_lambda = par::pairwise_sum_by(lam.len(), &|i| high[lam[i] as usize]);
    let high_all = par::pairwise_sum_by(n, &|i| high[i]);
    let kk = (k * k) as f64;
    let chain = vec![
        FloatCheck::le("p^-2eta sum nu_hat^2 <= sum_Lambda nu_hat^2", pf.powf(-2.0 * eta_f) * total, on_lambda),
        FloatCheck::le(
            "sum_Lambda nu_hat^2 <= p^(8k^2 delta) sum_Lambda nu_hat^(4k+2)",
            on_lambda,
            pf.powf(8.0 * kk * delta_f) * high_lambda,
        ),
        FloatCheck::le(
            "p^(8k^2 delta) sum_Lambda nu_hat^(4k+2) <= p^(8eta) sum nu_hat^(4k+2)",
            pf.powf(8.0 * kk * delta_f) * high_lambda,
            pf.powf(8.0 * eta_f) * high_all,
        ),
        FloatCheck::le("sum nu_hat^(4k+2) <= double sum", high_all, rhs),
    ];
    let main = FloatCheck::le("p^-10eta sum nu_hat^2 <= double sum", pf.powf(-10.0 * eta_f) * total, rhs);
    let trivial_upper = FloatCheck::le("double sum <= sum nu_hat^2", rhs, total);
    let report = StatMultReport {
        p,
        subgroup_order: order,
        k,
        delta: sel.delta.clone(),
        eta: sel.eta.clone(),
        main,
        trivial_upper,
        chain,
        clamp_count: c1 + c2,
    };
    if let Some(bad) = std::iter::once(&report.main)
        .chain(std::iter::once(&report.trivial_upper))
        .chain(report.chain.iter())
        .find(|c| !c.pass)
    {
        return Err(Error::InequalityViolated(format!("{} at p={p}: {} vs {}", bad.name, bad.lhs, bad.rhs)));
    }
    Ok(report)
}

/// `sum_xi |nu_hat_k(xi)|^2` as an exact rational, `p * sum_x nu_k(x)^2`.
pub fn l2_spectral_mass_exact(mu: &Measure, k: u64) -> BigRational {
    mu.k_fold_nu(k).l2_squared() * from_u64(mu.p())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_rational;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_delta(&Measure::uniform(31), &q("0.2")).unwrap(), vec![0]);
        let qr = Measure::uniform_on(7, &[1, 2, 4]).unwrap();
        assert_eq!(lambda_delta(&qr, &q("0.3")).unwrap(), vec![0]);
        assert_eq!(lambda_delta(&qr, &q("0.5")).unwrap(), (0..7).collect::<Vec<_>>());
        assert!(lambda_delta(&qr, &q("0")).is_err());
    }

    #[test]
    fn boundary_is_ambiguous() {
        // |mu_hat| = 1 for a point mass, and p^{-delta} -> 1 as delta -> 0
        let m = Measure::point_mass(7, 1);
        let tiny = BigRational::new(1.into(), BigInt::from(10u64).pow(12));
        assert!(matches!(lambda_delta(&m, &tiny), Err(Error::BoundaryAmbiguity { .. })));
    }

    #[test]
    fn lambda_bound_examples() {
        let f = FieldContext::new(7).unwrap();
        let r = check_lambda_bounds(&f, &f.subgroup(2).unwrap(), &q("0.5")).unwrap();
        assert_eq!(r.lambda_size, 7);
        assert!((r.upper.rhs - 49.0 / 3.0).abs() < 1e-9);
        assert!(r.pass() && r.lower.is_some());

        let r = check_lambda_bounds(&f, &f.subgroup(1).unwrap(), &q("0.3")).unwrap();
        assert_eq!(r.lambda_size, 1);
        assert!(r.lower.is_none() && r.pass());

        let r = check_lambda_bounds(&f, &f.subgroup(6).unwrap(), &q("0.1")).unwrap();
        assert_eq!(r.lambda_size, 7);
        assert!(r.pass());
    }

    #[test]
    fn k_sequence_is_exact() {
        assert_eq!(next_k(4, &q("0.1")), BigUint::from(161u32));
        assert_eq!(next_k(4, &q("0.25")), BigUint::from(65u32));
        assert_eq!(next_k(4, &q("0.5")), BigUint::from(33u32));
        // 16 / (1/3) = 48 exactly, so floor is 48
        assert_eq!(next_k(4, &q("1/3")), BigUint::from(49u32));
        assert_eq!(loop_cap(&q("0.25")), 10);
        assert_eq!(loop_cap(&q("0.3")), 8);
    }

    #[test]
    fn select_uniform_and_point_mass() {
        let r = select_k_delta(&Measure::uniform(31), &q("0.1")).unwrap();
        assert_eq!((r.k, r.delta.clone()), (4, q("1/161")));
        assert_eq!(r.lambda_set, vec![0]);
        assert_eq!(r.l2_spectral_mass_exact, q("1"));
        assert!(r.pass());

        let r = select_k_delta(&Measure::point_mass(31, 0), &q("0.1")).unwrap();
        assert_eq!((r.k, r.delta.clone()), (4, q("1/161")));
        assert_eq!(r.lambda_set.len(), 31);
        assert_eq!(r.l2_spectral_mass_exact, q("31"));
        assert!(r.pass());
        assert_eq!(r.iterations.len(), 1);
    }

    #[test]
    fn select_rejects_tiny_eta() {
        let e = select_k_delta(&Measure::uniform(7), &q("1/1000000")).unwrap_err();
        assert!(matches!(e, Error::EtaTooSmall { .. }));
    }

    #[test]
    fn select_index4_subgroup_of_101() {
        let f = FieldContext::new(101).unwrap();
        let mu = Measure::uniform_on(101, &f.subgroup(4).unwrap().elements).unwrap();
        let r = select_k_delta(&mu, &q("0.25")).unwrap();
        assert!(r.pass(), "{r:?}");
        // regression: stops immediately
        assert_eq!((r.k, r.delta.clone(), r.lambda_set.clone()), (4, q("1/65"), vec![0]));
        assert!((r.l2_spectral_mass - r.l2_spectral_mass_float).abs() < 1e-9);
    }

    #[test]
    fn k_cap_is_enforced() {
        // H = {±1}: the iteration continues past k = 4 only if the first test
        // fails, so use a cap below 4 to force the error path
        let m = Measure::uniform(11);
        assert_eq!(select_k_delta_with_cap(&m, &q("0.25"), 3).unwrap_err(), Error::KCapExceeded { k: 4, cap: 3 });
    }

    #[test]
    fn smear_out_examples() {
        let f = FieldContext::new(7).unwrap();
        let r = check_smear_out(&f, &f.subgroup(2).unwrap(), 2).unwrap();
        assert_eq!(r.checked, 7);
        assert!(r.min_margin >= -1e-12);

        // H = F_p^*, k = 1: lhs = (p-1)^-8 and rhs >= nu_1(0) >= 1/(p-1)
        let f = FieldContext::new(11).unwrap();
        let h = f.subgroup(1).unwrap();
        let mu = Measure::uniform_on(11, &h.elements).unwrap();
        let (nh, _) = nu_hat(&mu.fourier_magnitudes(), 1);
        let w = smear_weights(&nh, &mu.k_fold_nu(1).masses_f64());
        for xi in 1..11 {
            assert!((nh[xi].powi(4) - 10f64.powi(-8)).abs() < 1e-20);
            assert!(w[xi] >= 0.1);
        }
        // xi = 0 is an equality
        assert!((w[0] - 1.0).abs() < 1e-12);
        assert!(check_smear_out(&f, &h, 1).is_ok());
        assert!(check_smear_out(&f, &f.segment(2, 3).unwrap(), 1).is_err());
    }

    #[test]
    fn statistical_mult_examples() {
        let f = FieldContext::new(7).unwrap();
        let r = check_statistical_mult(&f, &f.subgroup(1).unwrap(), &q("0.25")).unwrap();
        assert!(r.pass());

        // point mass at 0: nu_hat_k == 1, both sides p up to the p^{-10 eta} factor
        let mu = Measure::point_mass(7, 0);
        let sel = select_k_delta(&mu, &q("0.25")).unwrap();
        let r = statistical_mult_for(&mu, 1, &sel).unwrap();
        assert!((r.main.rhs - 7.0).abs() < 1e-9);
        assert!((r.trivial_upper.rhs - 7.0).abs() < 1e-9);

        let f = FieldContext::new(101).unwrap();
        let r = check_statistical_mult(&f, &f.subgroup(4).unwrap(), &q("0.25")).unwrap();
        assert!(r.pass());
    }

    #[test]
    fn lambda_is_monotone_in_delta() {
        let f = FieldContext::new(61).unwrap();
        for h in f.all_subgroups() {
            let mu = Measure::uniform_on(61, &h.elements).unwrap();
            let mut prev: Option<Vec<u64>> = None;
            for d in ["0.05", "0.1", "0.2", "0.3", "0.45", "0.6"] {
                let Ok(cur) = lambda_delta(&mu, &q(d)) else { continue };
                if let Some(prev) = &prev {
                    assert!(prev.iter().all(|x| cur.contains(x)));
                }
                prev = Some(cur);
            }
        }
    }
}
