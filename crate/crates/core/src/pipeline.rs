//! From a multiplicatively stable measure to a set with small sum and product sets.
//!
//! Every stage is evaluated in exact rational arithmetic: `phi = p (mu * mu^-)`
//! and `mu` have rational masses, and the spectral side of the hypotheses is
//! rewritten through `sum_x phi(x) phi(xy) = p sum_xi |mu_hat(xi)|^2 |mu_hat(y xi)|^2`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bgs::{bgs_extract, pow_rational, productset, sum_product_score, sumset, BgsInstance, SumProductScore};
use crate::checks::{ExactCheck, FloatCheck, Relation, FLOAT_SLACK};
use crate::error::{Error, Result};
use crate::field::{FieldContext, SubgroupSpec};
use crate::measure::{Measure, PhiFunction};
use crate::par;
use crate::rational::{floor_dyadic, format_rational, from_u64, pow2, ratio_u, to_f64};
use crate::spectrum::select_k_delta;

pub const CERT_SCHEMA: &str = "cert/1";

/// The constant `Delta` and the thresholds derived from it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityParams {
    #[serde(with = "crate::rational::serde_str")]
    pub delta: BigRational,
}

impl StabilityParams {
    pub fn new(delta: BigRational) -> Result<Self> {
        let half = BigRational::new(1.into(), 2.into());
        if delta <= BigRational::zero() || delta > half {
            return Err(Error::InvalidParameter(format!(
                "Delta must lie in (0, 1/2], got {}",
                format_rational(&delta)
            )));
        }
        Ok(Self { delta })
    }

    /// `Delta phi(0) / 8`.
    pub fn s1_cut(&self, phi0: &BigRational) -> BigRational {
        &self.delta * phi0 / from_u64(8)
    }

    /// `Delta p / (8 phi(0))`.
    pub fn t_cut(&self, p: u64, phi0: &BigRational) -> BigRational {
        &self.delta * from_u64(p) / (from_u64(8) * phi0)
    }

    /// `2^{-7} Delta^2 phi(0)`.
    pub fn s0_cut(&self, phi0: &BigRational) -> BigRational {
        &self.delta * &self.delta * phi0 / pow2(7)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    #[serde(with = "crate::rational::serde_str")]
    pub delta: BigRational,
    /// `sum_{xi,y} |mu_hat(xi)|^2 |mu_hat(y xi)|^2 mu(y) > Delta sum_xi |mu_hat(xi)|^2`.
    pub stability: ExactCheck,
    /// The left side of `stability` recomputed from floating spectra.
    pub stability_lhs_float: f64,
    pub float_agrees: bool,
    /// `mu(0) < Delta / 4`.
    pub mass_at_zero: ExactCheck,
    /// `sum_x mu(x)^2 < Delta / 4`.
    pub l2_mass: ExactCheck,
}

impl HypothesisReport {
    pub fn pass(&self) -> bool {
        self.stability.pass && self.mass_at_zero.pass && self.l2_mass.pass
    }

    fn failures(&self) -> Vec<&str> {
        [&self.stability, &self.mass_at_zero, &self.l2_mass]
            .into_iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// `phi` and `mu` as integer numerators over shared denominators.
struct Exact<'a> {
    p: usize,
    phi: &'a PhiFunction,
    mu: &'a Measure,
}

impl Exact<'_> {
    /// `sum_x Phi[x] Phi[x y]` for every y, where `phi = Phi / D`.
    fn dilation_correlations(&self) -> Vec<BigUint> {
        let f = self.phi.numerators();
        let p = self.p;
        par::map_range(p, |y| (0..p).map(|x| &f[x] * &f[x * y % p]).sum())
    }

    /// `sum_{y in ys} M[y] c[y] / (E D^2)`.
    fn weigh(&self, ys: impl Iterator<Item = usize>, c: &[BigUint]) -> BigRational {
        let m = self.mu.numerators();
        let s: BigUint = ys.map(|y| &m[y] * &c[y]).sum();
        let d = self.phi.denominator();
        ratio_u(&s, &(self.mu.denominator() * d * d))
    }
}

/// Evaluates both hypotheses of the proposition; never fails on a probability measure.
pub fn verify_hypotheses(mu: &Measure, delta: &BigRational) -> HypothesisReport {
    let p = mu.p();
    let phi = mu.phi();
    let ex = Exact { p: p as usize, phi: &phi, mu };
    let corr = ex.dilation_correlations();
    // sum_{xi,y} |mu_hat(xi)|^2 |mu_hat(y xi)|^2 mu(y) = (1/p) sum_y mu(y) sum_x phi(x) phi(xy)
    let lhs = ex.weigh(0..p as usize, &corr) / from_u64(p);
    // sum_xi |mu_hat(xi)|^2 = p sum mu^2 = phi(0)
    let rhs = delta * phi.at_zero();
    let stability = ExactCheck::new(
        "sum |mu_hat(xi)|^2 |mu_hat(y xi)|^2 mu(y) > Delta sum |mu_hat|^2",
        lhs.clone(),
        Relation::Gt,
        rhs,
    );

    let sq: Vec<f64> = mu.fourier_magnitudes().iter().map(|m| m * m).collect();
    let w = mu.masses_f64();
    let pu = p as usize;
    let float_lhs = par::pairwise_sum(&par::map_range(pu, |y| {
        if w[y] == 0.0 {
            0.0
        } else {
            w[y] * par::pairwise_sum_by(pu, &|xi| sq[xi] * sq[xi * y % pu])
        }
    }));
    let exact_f = to_f64(&lhs);
    let float_agrees =
        (float_lhs - exact_f).abs() <= 1e3 * FLOAT_SLACK * exact_f.abs().max(float_lhs.abs()).max(1e-300);

    let quarter = delta / from_u64(4);
    HypothesisReport {
        delta: delta.clone(),
        stability,
        stability_lhs_float: float_lhs,
        float_agrees,
        mass_at_zero: ExactCheck::new("mu(0) < Delta/4", mu.mass(0), Relation::Lt, quarter.clone()),
        l2_mass: ExactCheck::new("sum mu(x)^2 < Delta/4", mu.l2_squared(), Relation::Lt, quarter),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSets {
    pub s1: Vec<u64>,
    pub s2: Vec<u64>,
    pub t: Vec<u64>,
    pub g: Vec<(u64, u64)>,
    pub s3: Vec<u64>,
    pub s0: Vec<u64>,
    pub g_prime: Vec<(u64, u64)>,
    pub s4: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineCertificate {
    pub schema: String,
    pub p: u64,
    #[serde(with = "crate::rational::serde_str")]
    pub delta: BigRational,
    pub hypotheses: HypothesisReport,
    /// Stage inequalities in proof order.
    pub stages: Vec<ExactCheck>,
    pub sets: StageSets,
    /// The final set `S = S_4`.
    pub s: Vec<u64>,
    pub sumset_size: usize,
    pub productset_size: usize,
}

impl PipelineCertificate {
    pub fn pass(&self) -> bool {
        self.hypotheses.pass() && self.stages.iter().all(|c| c.pass)
    }
}

struct Stages(Vec<ExactCheck>);

impl Stages {
    fn push(&mut self, c: ExactCheck) -> Result<()> {
        if !c.pass {
            return Err(Error::StageViolation(format!(
                "{}: {} {:?} {}",
                c.name,
                format_rational(&c.lhs),
                c.relation,
                format_rational(&c.rhs)
            )));
        }
        self.0.push(c);
        Ok(())
    }

    fn check(&mut self, name: &str, lhs: BigRational, rel: Relation, rhs: BigRational) -> Result<()> {
        self.push(ExactCheck::new(name, lhs, rel, rhs))
    }

    fn sized(&mut self, name: &str, n: usize, rel: Relation, rhs: BigRational) -> Result<()> {
        self.push(ExactCheck::new(name, from_u64(n as u64), rel, rhs).with_size(n))
    }
}

fn size(n: usize) -> BigRational {
    from_u64(n as u64)
}

fn is_subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

/// Runs every stage of the extraction, failing on the first violated inequality.
pub fn run_pipeline(mu: &Measure, delta: &BigRational) -> Result<PipelineCertificate> {
    let params = StabilityParams::new(delta.clone())?;
    let hypotheses = verify_hypotheses(mu, delta);
    if !hypotheses.pass() {
        return Err(Error::HypothesesFail(hypotheses.failures().join("; ")));
    }
    let p = mu.p();
    let pu = p as usize;
    let ctx = FieldContext::new(p)?;
    let phi = mu.phi();
    let phi0 = phi.at_zero();
    let pf = from_u64(p);
    let d = delta.clone();
    let ex = Exact { p: pu, phi: &phi, mu };
    let mut st = Stages(Vec::new());

    // (a) statistical multiplicative stability
    let corr = ex.dilation_correlations();
    let mult = ex.weigh(1..pu, &corr);
    st.check(
        "sum_{x, y!=0} phi(x) phi(xy) mu(y) > (3/4) Delta p phi(0)",
        mult.clone(),
        Relation::Gt,
        BigRational::new(3.into(), 4.into()) * &d * &pf * &phi0,
    )?;
    st.check("sum_{x, y!=0} phi(x) phi(xy) mu(y) <= p phi(0)", mult, Relation::Le, &pf * &phi0)?;

    // (b) S_1
    let s1_cut = params.s1_cut(&phi0);
    let s1: Vec<u64> = (0..p).filter(|&x| phi.value(x) > s1_cut).collect();
    if s1.is_empty() {
        return Err(Error::HypothesesEffectivelyEmpty("S1".into()));
    }
    let mut in_s1 = vec![false; pu];
    for &x in &s1 {
        in_s1[x as usize] = true;
    }
    let f = phi.numerators();
    let restricted: Vec<BigUint> = par::map_range(pu, |y| {
        s1.iter().filter(|&&x| in_s1[x as usize * y % pu]).map(|&x| &f[x as usize] * &f[x as usize * y % pu]).sum()
    });
    st.check(
        "sum_{x in S1, y!=0, xy in S1} phi(x) phi(xy) mu(y) > (1/2) Delta p phi(0)",
        ex.weigh(1..pu, &restricted),
        Relation::Gt,
        &d * &pf * &phi0 / from_u64(2),
    )?;

    // (c) size of S_1, and S_2
    st.sized("|S1| > Delta p / (2 phi(0))", s1.len(), Relation::Gt, &d * &pf / (from_u64(2) * &phi0))?;
    st.sized("|S1| < 8 p / (Delta phi(0))", s1.len(), Relation::Lt, from_u64(8) * &pf / (&d * &phi0))?;
    let s2: Vec<u64> = s1.iter().copied().filter(|&x| x != 0).collect();
    if s2.is_empty() {
        return Err(Error::HypothesesEffectivelyEmpty("S2".into()));
    }
    st.sized("|S2| >= |S1| / 2", s2.len(), Relation::Ge, size(s1.len()) / from_u64(2))?;

    // (d) expected intersection
    let mut in_s2 = vec![false; pu];
    for &x in &s2 {
        in_s2[x as usize] = true;
    }
    let inter: Vec<u64> =
        par::map_range(
            pu,
            |y| {
                if y == 0 {
                    0
                } else {
                    s2.iter().filter(|&&x| in_s2[x as usize * y % pu]).count() as u64
                }
            },
        );
    let masses = mu.masses();
    let expected: BigRational = (1..pu).map(|y| &masses[y] * from_u64(inter[y])).sum();
    st.check(
        "sum_{y!=0} |S2 cap y^-1 S2| mu(y) >= Delta p / (4 phi(0))",
        expected,
        Relation::Ge,
        &d * &pf / (from_u64(4) * &phi0),
    )?;

    // (e) T
    let t_cut = params.t_cut(p, &phi0);
    let t_full: Vec<u64> = (1..p).filter(|&y| from_u64(inter[y as usize]) > t_cut).collect();
    if t_full.is_empty() {
        return Err(Error::HypothesesEffectivelyEmpty("T".into()));
    }
    let mu_t: BigRational = t_full.iter().map(|&y| masses[y as usize].clone()).sum();
    st.check("mu(T) > Delta^2 / 64", mu_t, Relation::Gt, &d * &d / from_u64(64))?;
    st.sized(
        "|T| >= (Delta^5 / 2^15) |S1|",
        t_full.len(),
        Relation::Ge,
        pow_rational(&d, 5) / pow2(15) * size(s1.len()),
    )?;
    let mut ranked = t_full.clone();
    ranked.sort_by(|&a, &b| inter[b as usize].cmp(&inter[a as usize]).then(a.cmp(&b)));
    ranked.truncate(s2.len());
    ranked.sort_unstable();
    let t = ranked;
    st.sized(
        "|T| >= (Delta^5 / 2^15) |S2| after trimming",
        t.len(),
        Relation::Ge,
        pow_rational(&d, 5) / pow2(15) * size(s2.len()),
    )?;
    st.sized("|T| <= |S2| after trimming", t.len(), Relation::Le, size(s2.len()))?;
    st.check(
        "Delta p / (8 phi(0)) > (Delta^2 / 2^6) |S1|",
        t_cut.clone(),
        Relation::Gt,
        &d * &d / pow2(6) * size(s1.len()),
    )?;

    // (f) G
    let in_s2 = &in_s2;
    let g: Vec<(u64, u64)> = s2
        .iter()
        .flat_map(|&x| t.iter().filter(move |&&y| in_s2[(x * y % p) as usize]).map(move |&y| (x, y)))
        .collect();
    st.sized(
        "|G| >= (Delta/8)^7 |S2|^2",
        g.len(),
        Relation::Ge,
        pow_rational(&(&d / from_u64(8)), 7) * size(s2.len() * s2.len()),
    )?;

    // (g) multiplicative extraction through discrete logs in Z/(p-1)
    let log = |x: u64| ctx.discrete_log(x).expect("unit");
    let inst = BgsInstance::new(
        p - 1,
        s2.iter().map(|&x| log(x)).collect(),
        t.iter().map(|&y| log(y)).collect(),
        g.iter().map(|&(x, y)| (log(x), log(y))).collect(),
        size(s2.len()),
        pow_rational(&(&d / from_u64(8)), 7),
    )?;
    let ext = bgs_extract(&inst)?;
    st.sized(
        "|A'+A'| <= (2^205 / Delta^56) |S2|",
        ext.doubling,
        Relation::Le,
        pow2(205) / pow_rational(&d, 56) * size(s2.len()),
    )?;
    st.sized(
        "|A'| >= (Delta^28 / 2^99) |S2|",
        ext.a_prime.len(),
        Relation::Ge,
        pow_rational(&d, 28) / pow2(99) * size(s2.len()),
    )?;
    let mut s3: Vec<u64> = ext.a_prime.iter().map(|&a| ctx.power_of_generator(a)).collect();
    s3.sort_unstable();
    st.sized(
        "|S3| > (Delta^28 / 2^100) |S1|",
        s3.len(),
        Relation::Gt,
        pow_rational(&d, 28) / pow2(100) * size(s1.len()),
    )?;
    let s3_prod = productset(&s3, &s3, p)?.len();
    if s3_prod != ext.doubling {
        return Err(Error::StageViolation(format!("|S3 S3| = {s3_prod} differs from |A'+A'| = {}", ext.doubling)));
    }
    st.sized(
        "|S3 S3| <= (2^304 / Delta^84) |S3|",
        s3_prod,
        Relation::Le,
        pow2(304) / pow_rational(&d, 84) * size(s3.len()),
    )?;

    // (h) statistical additive stability
    let phi_ref = &phi;
    let diff: BigRational = s3.iter().flat_map(|&a| s3.iter().map(move |&b| phi_ref.value((a + p - b) % p))).sum();
    st.check(
        "sum_{x1,x2 in S3} phi(x1 - x2) > 2^-6 Delta^2 phi(0) |S3|^2",
        diff,
        Relation::Gt,
        &d * &d * &phi0 / pow2(6) * size(s3.len() * s3.len()),
    )?;

    // (i) S_0
    let s0_cut = params.s0_cut(&phi0);
    let s0: Vec<u64> = (0..p).filter(|&x| phi.value(x) > s0_cut).collect();
    st.sized("|S0| <= 2^7 p / (Delta^2 phi(0))", s0.len(), Relation::Le, pow2(7) * &pf / (&d * &d * &phi0))?;
    st.sized(
        "|S0| < (2^108 / Delta^31) |S3|",
        s0.len(),
        Relation::Lt,
        pow2(108) / pow_rational(&d, 31) * size(s3.len()),
    )?;

    // (j) G'
    let mut in_s0 = vec![false; pu];
    for &x in &s0 {
        in_s0[x as usize] = true;
    }
    let g_prime: Vec<(u64, u64)> = s3
        .iter()
        .flat_map(|&a| {
            let in_s0 = &in_s0;
            s3.iter().filter(move |&&b| in_s0[((a + p - b) % p) as usize]).map(move |&b| (a, (p - b) % p))
        })
        .collect();
    st.sized(
        "|G'| >= 2^-7 Delta^2 |S3|^2",
        g_prime.len(),
        Relation::Ge,
        &d * &d / pow2(7) * size(s3.len() * s3.len()),
    )?;

    // (k) additive extraction
    let n_add = pow2(108) / pow_rational(&d, 31) * size(s3.len());
    let inst = BgsInstance::new(
        p,
        s3.clone(),
        s3.iter().map(|&x| (p - x) % p).collect(),
        g_prime.clone(),
        n_add.clone(),
        pow_rational(&d, 64) / pow2(223),
    )?;
    let ext = bgs_extract(&inst)?;
    let s4 = ext.a_prime.clone();
    st.sized(
        "|A'+A'| <= (2^1821 / Delta^512) N",
        ext.doubling,
        Relation::Le,
        pow2(1821) / pow_rational(&d, 512) * &n_add,
    )?;
    st.sized(
        "|S4| > (Delta^225 / 2^799) |S3|",
        s4.len(),
        Relation::Gt,
        pow_rational(&d, 225) / pow2(799) * size(s3.len()),
    )?;
    let s4_sum = sumset(&s4, &s4, p).len();
    let s4_prod = productset(&s4, &s4, p)?.len();
    st.sized(
        "|S4 + S4| < (2^2728 / Delta^768) |S4|",
        s4_sum,
        Relation::Lt,
        pow2(2728) / pow_rational(&d, 768) * size(s4.len()),
    )?;
    st.sized(
        "|S4 S4| < (2^1103 / Delta^309) |S4|",
        s4_prod,
        Relation::Lt,
        pow2(1103) / pow_rational(&d, 309) * size(s4.len()),
    )?;

    // (l) final bounds with S = S_4
    if !(is_subset(&s4, &s3) && is_subset(&s3, &s2) && is_subset(&s2, &s1)) || s2.contains(&0) {
        return Err(Error::StageViolation("S4 in S3 in S2 in S1 with 0 not in S2".into()));
    }
    let middle = size(s4.len()) * &phi0;
    st.check(
        "(Delta^254 / 2^900) p < |S| sum |mu_hat|^2",
        pow_rational(&d, 254) / pow2(900) * &pf,
        Relation::Lt,
        middle.clone(),
    )?;
    st.check("|S| sum |mu_hat|^2 < (8 / Delta) p", middle, Relation::Lt, from_u64(8) / &d * &pf)?;
    st.sized(
        "|S+S| + |S S| < (2^2729 / Delta^768) |S|",
        s4_sum + s4_prod,
        Relation::Lt,
        pow2(2729) / pow_rational(&d, 768) * size(s4.len()),
    )?;

    Ok(PipelineCertificate {
        schema: CERT_SCHEMA.into(),
        p,
        delta: d,
        hypotheses,
        stages: st.0,
        sets: StageSets { s1, s2, t, g, s3, s0, g_prime, s4: s4.clone() },
        s: s4,
        sumset_size: s4_sum,
        productset_size: s4_prod,
    })
}

/// `Delta = p^{-10 eta}`, rounded down to a dyadic rational and capped at 1/2.
pub fn delta_for_eta(p: u64, eta: &BigRational) -> BigRational {
    let v = floor_dyadic((p as f64).powf(-10.0 * to_f64(eta)));
    v.min(BigRational::new(1.into(), 2.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum Outcome {
    /// Every nonzero coefficient is at most `p^{-delta}`.
    BoundHolds,
    /// The measure `nu_k` does not meet the hypotheses with `Delta = p^{-10 eta}`.
    HypothesesNotMet { hypotheses: HypothesisReport },
    Certified {
        certificate: Box<PipelineCertificate>,
        /// `(1/2^900) |H| / p^{2542 eta} < |S|`, in natural logs.
        size_lower: FloatCheck,
        /// `|S| < 8 p^{1+11 eta} / |H|`, in natural logs.
        size_upper: FloatCheck,
        /// `|S+S| + |S S| < 2^2729 p^{7680 eta} |S|`, in natural logs.
        doubling: FloatCheck,
        score: SumProductScore,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContradictionReport {
    pub schema: String,
    pub p: u64,
    pub subgroup_order: usize,
    pub alpha: f64,
    #[serde(with = "crate::rational::serde_str")]
    pub eta: BigRational,
    pub k: u64,
    #[serde(with = "crate::rational::serde_str")]
    pub delta: BigRational,
    /// `max_{xi != 0} |mu_hat_H(xi)|`.
    pub max_nontrivial: f64,
    pub argmax_xi: u64,
    /// `p^{-delta}`.
    pub threshold: f64,
    #[serde(with = "crate::rational::serde_str")]
    pub big_delta: BigRational,
    /// `1/|H| < Delta/4`.
    pub guard: ExactCheck,
    #[serde(flatten)]
    pub outcome: Outcome,
}

/// Chains the (k, delta) selection, the hypotheses for `nu_k`, and the extraction.
pub fn assemble_contradiction(ctx: &FieldContext, h: &SubgroupSpec, eta: &BigRational) -> Result<ContradictionReport> {
    assemble_contradiction_with(ctx, h, eta, None)
}

/// As [`assemble_contradiction`], with `Delta` supplied instead of derived from `eta`.
pub fn assemble_contradiction_with(
    ctx: &FieldContext,
    h: &SubgroupSpec,
    eta: &BigRational,
    big_delta: Option<BigRational>,
) -> Result<ContradictionReport> {
    let p = ctx.p();
    if let Some(d) = &big_delta {
        StabilityParams::new(d.clone())?;
    }
    let mu = Measure::uniform_on(p, &h.elements)?;
    let sel = select_k_delta(&mu, eta)?;
    let mags = mu.fourier_magnitudes();
    let (argmax_xi, max_nontrivial) =
        (1..p as usize).fold((1u64, mags[1]), |best, xi| if mags[xi] > best.1 { (xi as u64, mags[xi]) } else { best });
    let threshold = (p as f64).powf(-to_f64(&sel.delta));
    let big_delta = big_delta.unwrap_or_else(|| delta_for_eta(p, eta));
    let guard = ExactCheck::new(
        "1/|H| < Delta/4",
        BigRational::new(BigInt::one(), BigInt::from(h.order())),
        Relation::Lt,
        &big_delta / from_u64(4),
    );
    let large = sel.lambda_set.iter().any(|&xi| xi != 0);
    let outcome = if !large {
        Outcome::BoundHolds
    } else {
        let nu_k = mu.k_fold_nu(sel.k);
        let hypotheses = verify_hypotheses(&nu_k, &big_delta);
        if !hypotheses.pass() {
            Outcome::HypothesesNotMet { hypotheses }
        } else {
            let certificate = run_pipeline(&nu_k, &big_delta)?;
            let (lp, eta_f) = ((p as f64).ln(), to_f64(eta));
            let (n_s, n_h) = ((certificate.s.len() as f64).ln(), (h.order() as f64).ln());
            let score = sum_product_score(&certificate.s, p)?;
            Outcome::Certified {
                size_lower: FloatCheck::lt(
                    "(1/2^900) |H| / p^(2542 eta) < |S|",
                    -900.0 * std::f64::consts::LN_2 + n_h - 2542.0 * eta_f * lp,
                    n_s,
                ),
                size_upper: FloatCheck::lt(
                    "|S| < 8 p^(1+11 eta) / |H|",
                    n_s,
                    8f64.ln() + (1.0 + 11.0 * eta_f) * lp - n_h,
                ),
                doubling: FloatCheck::lt(
                    "|S+S| + |S S| < 2^2729 p^(7680 eta) |S|",
                    (score.score as f64).ln(),
                    2729.0 * std::f64::consts::LN_2 + 7680.0 * eta_f * lp + n_s,
                ),
                score,
                certificate: Box::new(certificate),
            }
        }
    };
    Ok(ContradictionReport {
        schema: CERT_SCHEMA.into(),
        p,
        subgroup_order: h.order(),
        alpha: h.alpha(),
        eta: eta.clone(),
        k: sel.k,
        delta: sel.delta,
        max_nontrivial,
        argmax_xi,
        threshold,
        big_delta,
        guard,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_rational;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn params_range() {
        assert!(StabilityParams::new(q("1/2")).is_ok());
        assert!(StabilityParams::new(q("0")).is_err());
        assert!(StabilityParams::new(q("3/5")).is_err());
    }

    #[test]
    fn uniform_hypotheses() {
        let mu = Measure::uniform(101);
        let r = verify_hypotheses(&mu, &q("1/2"));
        assert_eq!(r.stability.lhs, from_u64(1));
        assert_eq!(r.stability.rhs, q("1/2"));
        assert!(r.pass());
        assert!(r.float_agrees);
        assert_eq!(r.l2_mass.lhs, q("1/101"));
    }

    #[test]
    fn point_mass_fails() {
        let mu = Measure::point_mass(101, 0);
        let r = verify_hypotheses(&mu, &q("1/2"));
        assert!(!r.mass_at_zero.pass);
        assert!(matches!(run_pipeline(&mu, &q("1/2")), Err(Error::HypothesesFail(_))));
    }

    #[test]
    fn stability_oracle_from_spectra() {
        // naive double sum over spectra for a lopsided measure
        let w: Vec<BigUint> = [5u32, 1, 0, 3, 2, 0, 7].iter().map(|&v| BigUint::from(v)).collect();
        let mu = Measure::from_weights(7, w).unwrap();
        let r = verify_hypotheses(&mu, &q("1/2"));
        let sq: Vec<f64> = mu.fourier_magnitudes().iter().map(|m| m * m).collect();
        let masses = mu.masses_f64();
        let mut naive = 0.0;
        for xi in 0..7 {
            for y in 0..7 {
                naive += sq[xi] * sq[xi * y % 7] * masses[y];
            }
        }
        assert!((to_f64(&r.stability.lhs) - naive).abs() < 1e-12);
    }

    #[test]
    fn uniform_pipeline_all_pass() {
        let c = run_pipeline(&Measure::uniform(101), &q("1/2")).unwrap();
        assert!(c.pass());
        assert_eq!(c.sets.s1.len(), 101);
        assert_eq!(c.sets.s2.len(), 100);
        assert_eq!(c.s, c.sets.s2);
        assert_eq!(c.sumset_size, 101);
        assert_eq!(c.productset_size, 100);
        assert_eq!(c.schema, "cert/1");
    }

    #[test]
    fn pipeline_is_deterministic() {
        let a = serde_json::to_string(&run_pipeline(&Measure::uniform(31), &q("1/2")).unwrap()).unwrap();
        let b = serde_json::to_string(&run_pipeline(&Measure::uniform(31), &q("1/2")).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn full_group_bound_holds() {
        let ctx = FieldContext::new(101).unwrap();
        let r = assemble_contradiction(&ctx, &ctx.subgroup(1).unwrap(), &q("1/4")).unwrap();
        assert_eq!(r.outcome, Outcome::BoundHolds);
        assert!((r.max_nontrivial - 0.01).abs() < 1e-12);
    }

    #[test]
    fn small_subgroup_regression() {
        let ctx = FieldContext::new(101).unwrap();
        let r = assemble_contradiction(&ctx, &ctx.subgroup(20).unwrap(), &q("1/4")).unwrap();
        assert_eq!(r.subgroup_order, 5);
        let json = serde_json::to_value(&r).unwrap();
        assert!(json.get("outcome").is_some());
    }

    #[test]
    fn delta_for_eta_is_capped() {
        assert_eq!(delta_for_eta(7, &q("1/100")), q("1/2"));
        let d = delta_for_eta(101, &q("1/4"));
        assert!(to_f64(&d) <= 101f64.powf(-2.5));
    }
}
