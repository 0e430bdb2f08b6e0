//! Exponential sums over subgroups and segments, and the incomplete-sum smear checks.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Pow, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::checks::FloatCheck;
use crate::error::{Error, Result};
use crate::field::{FieldContext, SubgroupSpec};
use crate::measure::Measure;
use crate::par;
use crate::rational::{format_rational, to_f64};
use crate::spectrum::{select_k_delta, SpectrumReport};

/// Relative tolerance for treating two magnitudes as tied in argmax scans.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpSumResult {
    pub xi: u64,
    pub re: f64,
    pub im: f64,
    pub magnitude: f64,
    /// `magnitude / |H|`.
    pub normalized: f64,
}

impl ExpSumResult {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// `sum_{x in H} psi(x xi)`, summed in ascending x.
pub fn exp_sum(ctx: &FieldContext, h: &SubgroupSpec, xi: u64) -> ExpSumResult {
    let p = ctx.p();
    let xi = xi % p;
    let value = h.elements.iter().fold(Complex64::new(0.0, 0.0), |acc, &x| acc + ctx.psi_at(x * xi % p));
    let magnitude = value.norm();
    ExpSumResult { xi, re: value.re, im: value.im, magnitude, normalized: magnitude / h.order() as f64 }
}

/// `|S(H, xi)|` for every xi in `0..p`.
///
/// For a full subgroup the magnitude is constant on cosets of H, so only one
/// representative per coset is summed.
pub fn magnitudes(ctx: &FieldContext, h: &SubgroupSpec) -> Vec<f64> {
    let p = ctx.p() as usize;
    if let Some(index) = h.is_full().then(|| (ctx.p() - 1) / h.order() as u64) {
        let reps: Vec<f64> =
            par::map_range(index as usize, |j| exp_sum(ctx, h, ctx.power_of_generator(j as u64)).magnitude);
        let mut out = vec![h.order() as f64; p];
        for (xi, slot) in out.iter_mut().enumerate().skip(1) {
            let t = ctx.discrete_log(xi as u64).expect("nonzero");
            *slot = reps[(t % index) as usize];
        }
        out
    } else {
        par::map_range(p, |xi| exp_sum(ctx, h, xi as u64).magnitude)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalBound {
    pub p: u64,
    pub subgroup_order: usize,
    /// `max_{xi != 0} |S(H, xi)| / |H|`.
    pub max_nontrivial: f64,
    pub argmax_xi: u64,
    /// `-log_p(max_nontrivial)`.
    pub beta_emp: f64,
}

pub fn beta_emp(p: u64, max_coeff: f64) -> f64 {
    // adding 0.0 turns -0.0 into 0.0
    -max_coeff.ln() / (p as f64).ln() + 0.0
}

/// Largest nontrivial normalized coefficient; ties go to the smallest xi.
pub fn max_nontrivial_fourier(ctx: &FieldContext, h: &SubgroupSpec) -> EmpiricalBound {
    let mags = magnitudes(ctx, h);
    let n = h.order() as f64;
    let (xi, m) = argmax_nonzero(&mags);
    let max_nontrivial = (m / n).min(1.0);
    EmpiricalBound {
        p: ctx.p(),
        subgroup_order: h.order(),
        max_nontrivial,
        argmax_xi: xi,
        beta_emp: beta_emp(ctx.p(), max_nontrivial),
    }
}

fn argmax_nonzero(mags: &[f64]) -> (u64, f64) {
    let mut best = (1u64, mags[1]);
    for (xi, &m) in mags.iter().enumerate().skip(2) {
        if m > best.1 * (1.0 + TIE_TOLERANCE) {
            best = (xi as u64, m);
        }
    }
    best
}

/// `|S(H, xi)| < sqrt(p)` for every nonzero xi.
pub fn complete_sum_bound_check(ctx: &FieldContext, h: &SubgroupSpec) -> Result<FloatCheck> {
    if !h.is_full() {
        return Err(Error::NotFullSubgroup);
    }
    let mags = magnitudes(ctx, h);
    let (xi, m) = argmax_nonzero(&mags);
    let check = FloatCheck::lt("max |S(H,xi)| < sqrt p", m, (ctx.p() as f64).sqrt());
    if !check.pass {
        return Err(Error::InequalityViolated(format!(
            "complete sum at p={} |H|={} xi={xi}: {m} >= sqrt p",
            ctx.p(),
            h.order()
        )));
    }
    Ok(check)
}

fn split_delta(delta: &BigRational) -> Result<(BigUint, u32)> {
    if !delta.is_positive() {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {}", format_rational(delta))));
    }
    let a = delta.numer().to_biguint().expect("positive");
    let b = delta.denom().to_u32().ok_or_else(|| {
        Error::InvalidParameter(format!("denominator of delta too large: {}", format_rational(delta)))
    })?;
    Ok((a, b))
}

/// Number of integers `t >= 0` with `t < T p^{-delta} / 4`.
///
/// With `delta = a/b` the test `t < T p^{-delta}/4` is `(4t)^b p^a < T^b`,
/// decided in integers.
pub fn h1_length(p: u64, t_len: u64, delta: &BigRational) -> Result<u64> {
    let (a, b) = split_delta(delta)?;
    let p_a: BigUint = Pow::pow(BigUint::from(p), &a);
    let t_b: BigUint = Pow::pow(BigUint::from(t_len), b);
    let below = |t: u64| -> bool { Pow::pow(BigUint::from(4 * t), b) * &p_a < t_b };
    // the bound is at most T/4, so the count lies in [0, T/4 + 1]
    let (mut lo, mut hi) = (0u64, t_len / 4 + 1);
    if !below(0) {
        return Ok(0);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + 1)
}

/// `|H| / |H_1| <= 8 p^delta`, exactly: `T^b <= (8 |H_1|)^b p^a`.
pub fn h1_ratio_holds(p: u64, t_len: u64, h1_len: u64, delta: &BigRational) -> Result<bool> {
    if h1_len == 0 {
        return Ok(false);
    }
    let (a, b) = split_delta(delta)?;
    let lhs: BigUint = Pow::pow(BigUint::from(t_len), b);
    let rhs: BigUint = Pow::pow(BigUint::from(8 * h1_len), b) * Pow::pow(BigUint::from(p), &a);
    Ok(lhs <= rhs)
}

/// `H_1 = { g0^t : 0 <= t < T p^{-delta} / 4 }`.
pub fn build_h1(ctx: &FieldContext, g0: u64, t_len: u64, delta: &BigRational) -> Result<SubgroupSpec> {
    if t_len == 0 {
        return Err(Error::EmptySegment);
    }
    // validates T <= ord(g0)
    ctx.segment(g0, t_len)?;
    let len = h1_length(ctx.p(), t_len, delta)?;
    if len == 0 {
        return Err(Error::EmptySegment);
    }
    if !h1_ratio_holds(ctx.p(), t_len, len, delta)? {
        return Err(Error::InequalityViolated(format!(
            "|H|/|H_1| <= 8 p^delta at p={} T={t_len} |H_1|={len} delta={}",
            ctx.p(),
            format_rational(delta)
        )));
    }
    ctx.segment(g0, len)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslateReport {
    pub p: u64,
    pub generator: u64,
    pub length: u64,
    pub xi: u64,
    pub l: u64,
    /// `|mu_hat_H(g^l xi)| > |mu_hat_H(xi)| - p^{-delta}/2`, stored as `rhs < lhs`.
    pub check: FloatCheck,
}

/// The translate inequality for one `l < T p^{-delta}/4`.
pub fn check_translate_inequality(
    ctx: &FieldContext,
    g0: u64,
    t_len: u64,
    delta: &BigRational,
    xi: u64,
    l: u64,
) -> Result<TranslateReport> {
    let p = ctx.p();
    if xi.is_multiple_of(p) {
        return Err(Error::ZeroArgument);
    }
    let h = ctx.segment(g0, t_len)?;
    let admissible = h1_length(p, t_len, delta)?;
    if l >= admissible {
        return Err(Error::InvalidParameter(format!(
            "l={l} is not below T p^-delta / 4 (admissible l < {admissible})"
        )));
    }
    let shift = crate::field::pow_mod(g0, l, p);
    let n = t_len as f64;
    let moved = exp_sum(ctx, &h, ctx.mul(shift, xi % p)).magnitude / n;
    let base = exp_sum(ctx, &h, xi).magnitude / n;
    let rhs = base - (p as f64).powf(-to_f64(delta)) / 2.0;
    let check = FloatCheck::lt("|mu_hat(g^l xi)| > |mu_hat(xi)| - p^-delta/2", rhs, moved);
    if !check.pass {
        return Err(Error::InequalityViolated(format!(
            "translate inequality at p={p} g0={g0} T={t_len} xi={xi} l={l}: {moved} <= {rhs}"
        )));
    }
    Ok(TranslateReport { p, generator: g0, length: t_len, xi: xi % p, l, check })
}

/// Whether some nonzero `xi_0` has `|mu_hat_H(xi_0)| > 2 p^{-delta}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Hypothesis {
    Present { xi0: u64, magnitude: f64, threshold: f64 },
    Absent { max_magnitude: f64, argmax_xi: u64, threshold: f64 },
}

impl Hypothesis {
    pub fn present(&self) -> bool {
        matches!(self, Hypothesis::Present { .. })
    }
}

/// One inequality evaluated for every xi in `Lambda_delta`, in natural-log form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSummary {
    pub name: String,
    pub checked: usize,
    pub violations: usize,
    /// `min (ln rhs - ln lhs)`; `None` when nothing was checked.
    pub min_log_margin: Option<f64>,
    pub min_margin_xi: Option<u64>,
}

impl LinkSummary {
    fn new(name: &str) -> Self {
        Self { name: name.into(), checked: 0, violations: 0, min_log_margin: None, min_margin_xi: None }
    }

    fn record(&mut self, xi: u64, ln_lhs: f64, ln_rhs: f64) {
        self.checked += 1;
        let margin = log_margin(ln_lhs, ln_rhs);
        if margin < -FLOAT_LOG_SLACK {
            self.violations += 1;
        }
        if self.min_log_margin.is_none_or(|m| margin < m) {
            self.min_log_margin = Some(margin);
            self.min_margin_xi = Some(xi);
        }
    }

    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

/// An inequality between two logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogCheck {
    pub name: String,
    pub ln_lhs: f64,
    pub ln_rhs: f64,
    pub pass: bool,
}

impl LogCheck {
    fn new(name: &str, ln_lhs: f64, ln_rhs: f64) -> Self {
        Self { name: name.into(), ln_lhs, ln_rhs, pass: log_margin(ln_lhs, ln_rhs) >= -FLOAT_LOG_SLACK }
    }

    pub fn margin(&self) -> f64 {
        log_margin(self.ln_lhs, self.ln_rhs)
    }
}

/// Slack on log-scale comparisons, matching the relative slack of [`FloatCheck`].
const FLOAT_LOG_SLACK: f64 = crate::checks::FLOAT_SLACK;

fn log_margin(ln_lhs: f64, ln_rhs: f64) -> f64 {
    if ln_lhs == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        ln_rhs - ln_lhs
    }
}

/// `ln sum exp(v)`, with empty or all-zero input giving `-inf`.
fn log_sum_exp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + par::pairwise_sum_by(v.len(), &|i| (v[i] - m).exp()).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncompleteSmearReport {
    pub p: u64,
    pub generator: u64,
    pub length: u64,
    #[serde(with = "crate::rational::serde_str")]
    pub eta: BigRational,
    pub k: u64,
    #[serde(with = "crate::rational::serde_str")]
    pub delta: BigRational,
    pub h1_length: u64,
    /// `|H| / |H_1| <= 8 p^delta`, decided exactly.
    pub h1_ratio: bool,
    pub hypothesis: Hypothesis,
    pub lambda_size: usize,
    /// `|Lambda_delta| >= |H_1|`; only meaningful under the hypothesis.
    pub lambda_vs_h1: Option<FloatCheck>,
    /// `nu_hat_k(xi)^2 <= (2^{4k}/|H_1|) sum_{h in H_1} nu_hat_k(h xi)^2`.
    pub h1_average: LinkSummary,
    /// `... <= 2^{4k+3} p^delta sum_x nu_hat_k(x xi)^2 mu_H(x)`.
    pub h_average: LinkSummary,
    /// `(sum_x nu_hat_k(x xi)^2 mu_H(x))^{2k} <= sum_x nu_hat_k(x xi)^2 nu_k(x)`.
    pub holder: LinkSummary,
    /// `nu_hat_k(xi)^{4k} <= 2^{8k^2+6k} p^{2k delta} sum_x nu_hat_k(x xi)^2 nu_k(x)`.
    pub substitute: LinkSummary,
    /// The chain of the final inequality's proof; the last link carries `p^{9 eta}`.
    pub chain: Vec<LogCheck>,
    /// `p^{-11 eta} sum nu_hat_k^2 <= sum_{xi,x} nu_hat_k(xi)^2 nu_hat_k(x xi)^2 nu_k(x)`.
    pub main: LogCheck,
}

impl IncompleteSmearReport {
    /// Checks that follow from the hypotheses at any p.
    pub fn proven_checks_pass(&self) -> bool {
        self.h1_ratio
            && self.h1_average.pass()
            && self.h_average.pass()
            && self.lambda_vs_h1.as_ref().is_none_or(|c| c.pass)
    }
}

/// Evaluates the incomplete-sum smearing chain for the segment `{g0^t : t < T}`.
pub fn check_incomplete_smear(
    ctx: &FieldContext,
    g0: u64,
    t_len: u64,
    eta: &BigRational,
) -> Result<IncompleteSmearReport> {
    let p = ctx.p();
    let h = ctx.segment(g0, t_len)?;
    let mu = Measure::uniform_on(p, &h.elements)?;
    let sel = select_k_delta(&mu, eta)?;
    incomplete_smear_for(ctx, &h, g0, &mu, &sel)
}

fn incomplete_smear_for(
    ctx: &FieldContext,
    h: &SubgroupSpec,
    g0: u64,
    mu: &Measure,
    sel: &SpectrumReport,
) -> Result<IncompleteSmearReport> {
    let p = ctx.p();
    let pu = p as usize;
    let t_len = h.order() as u64;
    let (k, delta) = (sel.k, &sel.delta);
    let delta_f = to_f64(delta);
    let eta_f = to_f64(&sel.eta);
    let ln_p = (p as f64).ln();
    let ln2 = std::f64::consts::LN_2;
    let kf = k as f64;

    let h1 = build_h1(ctx, g0, t_len, delta)?;
    let h1_len = h1.order() as u64;

    let mags = mu.fourier_magnitudes();
    let threshold = 2.0 * (p as f64).powf(-delta_f);
    let (xi_max, m_max) = argmax_nonzero(&mags);
    let hypothesis = if m_max > threshold {
        Hypothesis::Present { xi0: xi_max, magnitude: m_max, threshold }
    } else {
        Hypothesis::Absent { max_magnitude: m_max, argmax_xi: xi_max, threshold }
    };
    let lambda = &sel.lambda_set;
    let lambda_vs_h1 =
        hypothesis.present().then(|| FloatCheck::le("|H_1| <= |Lambda|", h1_len as f64, lambda.len() as f64));

    // ln nu_hat_k(xi)^2 = 4k ln |mu_hat(xi)|
    let ln_sq: Vec<f64> = mags.iter().map(|&m| 4.0 * kf * m.ln()).collect();
    let nu_k = mu.k_fold_nu(k).masses_f64();
    let support: Vec<(usize, f64)> =
        nu_k.iter().enumerate().filter(|(_, &w)| w > 0.0).map(|(x, &w)| (x, w.ln())).collect();
    // ln W(xi) = ln sum_x nu_hat_k(x xi)^2 nu_k(x)
    let ln_w: Vec<f64> = par::map_range(pu, |xi| log_sum_exp(support.iter().map(|&(x, lw)| ln_sq[x * xi % pu] + lw)));

    let mut h1_average = LinkSummary::new("nu_hat(xi)^2 <= 2^(4k)/|H_1| sum_H1 nu_hat(h xi)^2");
    let mut h_average = LinkSummary::new("nu_hat(xi)^2 <= 2^(4k+3) p^delta sum_x nu_hat(x xi)^2 mu_H(x)");
    let mut holder = LinkSummary::new("(sum_x nu_hat(x xi)^2 mu_H(x))^(2k) <= sum_x nu_hat(x xi)^2 nu_k(x)");
    let mut substitute = LinkSummary::new("nu_hat(xi)^(4k) <= 2^(8k^2+6k) p^(2k delta) sum_x nu_hat(x xi)^2 nu_k(x)");
    let ln_t = (t_len as f64).ln();
    let ln_h1 = (h1_len as f64).ln();
    for &xi in lambda {
        let xi_u = xi as usize;
        let over = |set: &[u64]| log_sum_exp(set.iter().map(|&x| ln_sq[x as usize * xi_u % pu]));
        let ln_avg_h1 = over(&h1.elements) - ln_h1;
        let ln_avg_h = over(&h.elements) - ln_t;
        h1_average.record(xi, ln_sq[xi_u], 4.0 * kf * ln2 + ln_avg_h1);
        h_average.record(xi, ln_sq[xi_u], (4.0 * kf + 3.0) * ln2 + delta_f * ln_p + ln_avg_h);
        holder.record(xi, 2.0 * kf * ln_avg_h, ln_w[xi_u]);
        substitute.record(
            xi,
            2.0 * kf * ln_sq[xi_u],
            (8.0 * kf * kf + 6.0 * kf) * ln2 + 2.0 * kf * delta_f * ln_p + ln_w[xi_u],
        );
    }
    if !h1_average.pass() || !h_average.pass() {
        let bad = if h1_average.pass() { &h_average } else { &h1_average };
        return Err(Error::InequalityViolated(format!(
            "{} at p={p} g0={g0} T={t_len} xi={:?}",
            bad.name, bad.min_margin_xi
        )));
    }

    let all = log_sum_exp(ln_sq.iter().copied());
    let on_lambda = log_sum_exp(lambda.iter().map(|&x| ln_sq[x as usize]));
    // nu_hat^(4k+2) = |mu_hat|^(2k(4k+2))
    let high = |xi: usize| 2.0 * kf * (4.0 * kf + 2.0) * mags[xi].ln();
    let high_lambda = log_sum_exp(lambda.iter().map(|&x| high(x as usize)));
    let double_lambda = log_sum_exp(lambda.iter().map(|&x| ln_sq[x as usize] + ln_w[x as usize]));
    let double_all = log_sum_exp((0..pu).map(|x| ln_sq[x] + ln_w[x]));
    let c = (8.0 * kf * kf + 6.0 * kf) * ln2;
    let chain = vec![
        LogCheck::new("p^-2eta sum nu_hat^2 <= sum_Lambda nu_hat^2", -2.0 * eta_f * ln_p + all, on_lambda),
        LogCheck::new(
            "sum_Lambda nu_hat^2 <= p^(8k^2 delta) sum_Lambda nu_hat^(4k+2)",
            on_lambda,
            8.0 * kf * kf * delta_f * ln_p + high_lambda,
        ),
        LogCheck::new(
            "p^(8k^2 delta) sum_Lambda nu_hat^(4k+2) <= p^(8eta) sum_Lambda nu_hat^(4k+2)",
            8.0 * kf * kf * delta_f * ln_p + high_lambda,
            8.0 * eta_f * ln_p + high_lambda,
        ),
        LogCheck::new(
            "p^(8eta) sum_Lambda nu_hat^(4k+2) <= p^(8eta+2k delta) 2^(8k^2+6k) sum_Lambda double",
            8.0 * eta_f * ln_p + high_lambda,
            (8.0 * eta_f + 2.0 * kf * delta_f) * ln_p + c + double_lambda,
        ),
        LogCheck::new(
            "p^(8eta+2k delta) 2^(8k^2+6k) sum_Lambda double <= p^(9eta) double sum",
            (8.0 * eta_f + 2.0 * kf * delta_f) * ln_p + c + double_lambda,
            9.0 * eta_f * ln_p + double_all,
        ),
    ];
    let main = LogCheck::new("p^-11eta sum nu_hat^2 <= double sum", -11.0 * eta_f * ln_p + all, double_all);

    Ok(IncompleteSmearReport {
        p,
        generator: g0,
        length: t_len,
        eta: sel.eta.clone(),
        k,
        delta: delta.clone(),
        h1_length: h1_len,
        h1_ratio: true,
        hypothesis,
        lambda_size: lambda.len(),
        lambda_vs_h1,
        h1_average,
        h_average,
        holder,
        substitute,
        chain,
        main,
    })
}

/// Exact `T p^{-delta} / 4` is irrational; this is its value in double precision.
pub fn h1_bound_f64(p: u64, t_len: u64, delta: &BigRational) -> f64 {
    t_len as f64 * (p as f64).powf(-to_f64(delta)) / 4.0
}
