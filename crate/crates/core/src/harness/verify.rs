use std::collections::BTreeSet;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::Tolerances;
use crate::bgs::{bgs_extract, extract_with_bounds, sumset, BgsInstance};
use crate::error::{Error, Result};
use crate::expsum::{check_incomplete_smear, complete_sum_bound_check, exp_sum, h1_length, magnitudes};
use crate::field::{primes_in, psi_table, FieldContext};
use crate::measure::{inverse_dft, Measure};
use crate::par;
use crate::pipeline::{assemble_contradiction, run_pipeline, Outcome};
use crate::rational::{from_u64, parse_rational, to_f64};
use crate::spectrum::{check_lambda_bounds, check_smear_out, check_statistical_mult, select_k_delta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Parseval,
    Convolution,
    Smear,
    Lemmas,
    Incomplete,
    All,
}

impl Suite {
    pub const EACH: [Suite; 5] = [Suite::Parseval, Suite::Convolution, Suite::Smear, Suite::Lemmas, Suite::Incomplete];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Parseval => "parseval",
            Suite::Convolution => "convolution",
            Suite::Smear => "smear",
            Suite::Lemmas => "lemmas",
            Suite::Incomplete => "incomplete",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    pub instances: usize,
    pub violations: usize,
    /// Instances that could not be decided: a coefficient on a threshold or a selection cap hit.
    pub skipped: usize,
    pub first_violation: Option<String>,
    pub notes: Vec<String>,
    pub elapsed_ms: u64,
}

impl SuiteResult {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub p_max: u64,
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    pub elapsed_ms: u64,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.suites.iter().all(SuiteResult::pass)
    }
}

enum Verdict {
    Ok,
    Skip,
    Bad(String),
}

#[derive(Default)]
struct Tally {
    instances: usize,
    violations: usize,
    skipped: usize,
    first: Option<String>,
    notes: Vec<String>,
}

impl Tally {
    fn add(&mut self, v: Verdict) {
        self.instances += 1;
        match v {
            Verdict::Ok => {}
            Verdict::Skip => self.skipped += 1,
            Verdict::Bad(msg) => {
                self.violations += 1;
                self.first.get_or_insert(msg);
            }
        }
    }

    fn merge(&mut self, other: Tally) {
        self.instances += other.instances;
        self.violations += other.violations;
        self.skipped += other.skipped;
        if self.first.is_none() {
            self.first = other.first;
        }
        self.notes.extend(other.notes);
    }

    fn from_result<T>(r: Result<T>, context: impl FnOnce() -> String, ok: impl FnOnce(T) -> Verdict) -> Verdict {
        match r {
            Ok(v) => ok(v),
            Err(Error::BoundaryAmbiguity { .. } | Error::KCapExceeded { .. } | Error::LoopCapExceeded { .. }) => {
                Verdict::Skip
            }
            Err(e) => Verdict::Bad(format!("{}: {e}", context())),
        }
    }
}

fn rng_for(seed: u64, p: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ p.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt.rotate_left(32))
}

/// A random probability measure with integer weights in `0..=1000` on a random support.
pub fn random_measure(p: u64, rng: &mut impl Rng) -> Measure {
    let density: f64 = rng.gen_range(0.1..1.0);
    let mut w: Vec<BigUint> = (0..p)
        .map(|_| if rng.gen_bool(density) { BigUint::from(rng.gen_range(1u32..=1000)) } else { BigUint::from(0u32) })
        .collect();
    if w.iter().all(|v| v == &BigUint::from(0u32)) {
        let i = rng.gen_range(0..p as usize);
        w[i] = BigUint::from(1u32);
    }
    Measure::from_weights(p, w).expect("nonzero weights")
}

/// Parseval, conjugate symmetry, and the spectral form of `phi`, within relative `tol`.
pub fn parseval_check(mu: &Measure, tol: f64) -> std::result::Result<(), String> {
    let p = mu.p();
    let spec = mu.fourier();
    let lhs = par::pairwise_sum_by(spec.len(), &|i| spec[i].norm_sqr());
    let rhs = p as f64 * to_f64(&mu.l2_squared());
    if (lhs - rhs).abs() > tol * lhs.abs().max(rhs.abs()) {
        return Err(format!("parseval at p={p}: {lhs} vs {rhs}"));
    }
    let pu = p as usize;
    for xi in 1..pu {
        if (spec[xi].conj() - spec[pu - xi]).norm() > tol * spec[xi].norm().max(1.0) {
            return Err(format!("conjugate symmetry at p={p} xi={xi}"));
        }
    }
    let psi = psi_table(p);
    let phi = mu.phi();
    let sq: Vec<Complex64> = spec.iter().map(|v| Complex64::new(v.norm_sqr(), 0.0)).collect();
    for x in 0..pu {
        let s = par::pairwise_sum_complex_by(pu, &|xi| sq[xi] * psi[x * xi % pu]);
        let exact = to_f64(&phi.value(x as u64));
        if (s.re - exact).abs() > tol * lhs.max(1.0) || s.im.abs() > tol * lhs.max(1.0) {
            return Err(format!("phi spectral form at p={p} x={x}: {s} vs {exact}"));
        }
    }
    Ok(())
}

/// `sum_x mu(x) nu_hat(x) = sum_xi mu_hat(xi) nu(xi)`.
pub fn duality_check(mu: &Measure, nu: &Measure, tol: f64) -> std::result::Result<(), String> {
    let (a, b) = (mu.masses_f64(), nu.masses_f64());
    let (fa, fb) = (mu.fourier(), nu.fourier());
    let n = a.len();
    let lhs = par::pairwise_sum_complex_by(n, &|x| fb[x] * a[x]);
    let rhs = par::pairwise_sum_complex_by(n, &|x| fa[x] * b[x]);
    if (lhs - rhs).norm() > tol * lhs.norm().max(rhs.norm()).max(1.0) {
        return Err(format!("duality at p={n}: {lhs} vs {rhs}"));
    }
    Ok(())
}

/// Exact `nu_k` against the inverse transform of `|mu_hat|^{2k}`, per entry within `tol`.
pub fn convolution_check(mu: &Measure, k: u64, tol: f64) -> std::result::Result<f64, String> {
    let p = mu.p();
    let exact = mu.k_fold_nu(k).masses_f64();
    let spec: Vec<Complex64> =
        mu.fourier_magnitudes().iter().map(|m| Complex64::new(m.powi(2 * k as i32), 0.0)).collect();
    let back = inverse_dft(&spec, &psi_table(p));
    let mut worst: f64 = 0.0;
    for (x, (e, b)) in exact.iter().zip(&back).enumerate() {
        let err = (e - b.re).abs().max(b.im.abs());
        if err > tol {
            return Err(format!("convolution at p={p} k={k} x={x}: exact {e} vs spectral {}", b.re));
        }
        worst = worst.max(err);
    }
    Ok(worst)
}

/// A random extraction instance in `Z/mZ` with `|A|, |B| <= n_max`.
pub fn bgs_instance_random(rng: &mut impl Rng, n_max: usize) -> BgsInstance {
    loop {
        let m: u64 = rng.gen_range(13..=64);
        let pick = |rng: &mut dyn rand::RngCore, k: usize| -> Vec<u64> {
            let mut s = BTreeSet::new();
            while s.len() < k {
                s.insert(rng.gen_range(0..m));
            }
            s.into_iter().collect()
        };
        let (na, nb) = (rng.gen_range(1..=n_max), rng.gen_range(1..=n_max));
        let a = pick(rng, na);
        let b = pick(rng, nb);
        let density: f64 = rng.gen_range(0.2..=1.0);
        let edges: Vec<(u64, u64)> =
            a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).filter(|_| rng.gen_bool(density)).collect();
        if edges.is_empty() {
            continue;
        }
        let sums: BTreeSet<u64> = edges.iter().map(|&(x, y)| (x + y) % m).collect();
        let n = a.len().max(b.len()).max(sums.len()) as u64;
        if n as usize > n_max {
            continue;
        }
        let alpha = from_u64(edges.len() as u64) / from_u64(n * n);
        return BgsInstance::new(m, a, b, edges, from_u64(n), alpha).expect("valid by construction");
    }
}

/// Whether some subset of `a` meets both bounds, by enumerating every subset.
fn subset_oracle(a: &[u64], m: u64, doubling: &BigRational, size: &BigRational) -> bool {
    (1u32..(1 << a.len())).any(|mask| {
        let s: Vec<u64> = a.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x).collect();
        from_u64(s.len() as u64) >= *size && from_u64(sumset(&s, &s, m).len() as u64) <= *doubling
    })
}

fn bgs_verdict(inst: &BgsInstance, doubling: &BigRational, size: &BigRational) -> Verdict {
    let m = inst.modulus;
    match extract_with_bounds(inst, doubling, size) {
        Ok(r) => {
            let own = sumset(&r.a_prime, &r.a_prime, m).len();
            let subset = r.a_prime.iter().all(|x| inst.a.contains(x));
            if subset && from_u64(own as u64) <= *doubling && from_u64(r.a_prime.len() as u64) >= *size {
                Verdict::Ok
            } else {
                Verdict::Bad(format!("extraction in Z/{m} returned an uncertified set {:?}", r.a_prime))
            }
        }
        Err(Error::ExtractionFailed(_)) if !subset_oracle(&inst.a, m, doubling, size) => Verdict::Ok,
        Err(e) => Verdict::Bad(format!("extraction in Z/{m} with A={:?}: {e}", inst.a)),
    }
}

fn parseval_suite(p: u64, seed: u64, tol: &Tolerances) -> Tally {
    let mut t = Tally::default();
    let Ok(ctx) = FieldContext::new(p) else { return t };
    let mut rng = rng_for(seed, p, 1);
    let mut measures: Vec<Measure> =
        ctx.all_subgroups().iter().map(|h| Measure::uniform_on(p, &h.elements).expect("nonempty")).collect();
    measures.extend((0..20).map(|_| random_measure(p, &mut rng)));
    for pair in measures.windows(2) {
        t.add(
            match parseval_check(&pair[0], tol.parseval).and_then(|_| duality_check(&pair[0], &pair[1], tol.parseval)) {
                Ok(()) => Verdict::Ok,
                Err(e) => Verdict::Bad(e),
            },
        );
    }
    t
}

fn convolution_suite(p: u64, seed: u64, tol: &Tolerances) -> Tally {
    let mut t = Tally::default();
    let Ok(ctx) = FieldContext::new(p) else { return t };
    let mut rng = rng_for(seed, p, 2);
    let mut measures: Vec<Measure> =
        ctx.all_subgroups().iter().map(|h| Measure::uniform_on(p, &h.elements).expect("nonempty")).collect();
    measures.extend((0..3).map(|_| random_measure(p, &mut rng)));
    for mu in &measures {
        for k in 1..=4 {
            t.add(match convolution_check(mu, k, tol.convolution) {
                Ok(_) => Verdict::Ok,
                Err(e) => Verdict::Bad(e),
            });
        }
        // nu = mu * mu^- against the defining double sum
        let nu = mu.nu().masses();
        let m = mu.masses();
        let pu = p as usize;
        let naive_ok = (0..pu).all(|x| {
            let s: BigRational = (0..pu).map(|y| &m[(x + y) % pu] * &m[y]).sum();
            s == nu[x]
        });
        t.add(if naive_ok { Verdict::Ok } else { Verdict::Bad(format!("nu differs from its double sum at p={p}")) });
    }
    t
}

fn smear_suite(p: u64) -> Tally {
    let mut t = Tally::default();
    let Ok(ctx) = FieldContext::new(p) else { return t };
    for h in ctx.all_subgroups() {
        for k in 1..=3 {
            t.add(Tally::from_result(
                check_smear_out(&ctx, &h, k),
                || format!("smear-out p={p} |H|={} k={k}", h.order()),
                |_| Verdict::Ok,
            ));
        }
    }
    t
}

fn lemmas_suite(p: u64, seed: u64, tol: &Tolerances) -> Tally {
    let mut t = Tally::default();
    let Ok(ctx) = FieldContext::new(p) else { return t };
    let q = |s: &str| parse_rational(s).expect("literal");
    for h in ctx.all_subgroups() {
        let n = h.order();
        t.add(Tally::from_result(
            complete_sum_bound_check(&ctx, &h),
            || format!("complete sum p={p} |H|={n}"),
            |_| Verdict::Ok,
        ));

        let mags = magnitudes(&ctx, &h);
        if p % 4 == 3 && n as u64 * 2 == p - 1 {
            let want = ((p + 1) as f64).sqrt() / 2.0;
            let bad = (1..p as usize).find(|&xi| (exp_sum(&ctx, &h, xi as u64).magnitude - want).abs() > tol.magnitude);
            t.add(match bad {
                None => Verdict::Ok,
                Some(xi) => Verdict::Bad(format!("quadratic magnitude at p={p} xi={xi}")),
            });
        }
        // |S(H, h xi)| = |S(H, xi)| by direct summation
        let invariant = (1..p).step_by(7.max(p as usize / 13)).all(|xi| {
            h.elements.iter().all(|&g| (exp_sum(&ctx, &h, ctx.mul(g, xi)).magnitude - mags[xi as usize]).abs() < 1e-9)
        });
        t.add(if invariant { Verdict::Ok } else { Verdict::Bad(format!("coset invariance at p={p} |H|={n}")) });

        for d in ["1/10", "1/4", "1/2"] {
            t.add(Tally::from_result(
                check_lambda_bounds(&ctx, &h, &q(d)),
                || format!("lambda bounds p={p} |H|={n} delta={d}"),
                |r| if r.pass() { Verdict::Ok } else { Verdict::Bad(format!("lambda bounds p={p} |H|={n} delta={d}")) },
            ));
        }
        let mu = Measure::uniform_on(p, &h.elements).expect("nonempty");
        for eta in ["1/4", "1/2"] {
            t.add(Tally::from_result(
                select_k_delta(&mu, &q(eta)),
                || format!("select p={p} |H|={n} eta={eta}"),
                |r| {
                    if r.pass() && r.delta_below_eta_over_k2() {
                        Verdict::Ok
                    } else {
                        Verdict::Bad(format!("selection bracket p={p} |H|={n} eta={eta}"))
                    }
                },
            ));
        }
        t.add(Tally::from_result(
            check_statistical_mult(&ctx, &h, &q("1/4")),
            || format!("statistical multiplicativity p={p} |H|={n}"),
            |_| Verdict::Ok,
        ));
        t.add(Tally::from_result(
            assemble_contradiction(&ctx, &h, &q("1/4")),
            || format!("assembly p={p} |H|={n}"),
            |r| match r.outcome {
                Outcome::Certified { certificate, .. } if !certificate.pass() => {
                    Verdict::Bad(format!("assembly certificate p={p} |H|={n}"))
                }
                _ => Verdict::Ok,
            },
        ));
    }
    if p > 8 {
        t.add(Tally::from_result(
            run_pipeline(&Measure::uniform(p), &q("1/2")),
            || format!("uniform pipeline p={p}"),
            |c| if c.pass() { Verdict::Ok } else { Verdict::Bad(format!("uniform certificate p={p}")) },
        ));
    }
    let mut rng = rng_for(seed, p, 3);
    for _ in 0..4 {
        let inst = bgs_instance_random(&mut rng, 12);
        t.add(match bgs_extract(&inst) {
            Ok(r) if r.certified() && sumset(&r.a_prime, &r.a_prime, inst.modulus).len() == r.doubling => Verdict::Ok,
            Ok(_) => Verdict::Bad(format!("uncertified extraction in Z/{}", inst.modulus)),
            Err(e) => Verdict::Bad(format!("extraction in Z/{}: {e}", inst.modulus)),
        });
        let len = inst.a.len() as u64;
        let doubling = from_u64(rng.gen_range(1..=len * (len + 1) / 2));
        let size = from_u64(rng.gen_range(1..=len));
        t.add(bgs_verdict(&inst, &doubling, &size));
    }
    t
}

fn incomplete_suite(p: u64) -> Tally {
    let mut t = Tally::default();
    let Ok(ctx) = FieldContext::new(p) else { return t };
    let g0 = ctx.generator();
    let pu = p as usize;
    let order = p - 1;
    let q = |s: &str| parse_rational(s).expect("literal");
    // translate inequality for every T, every admissible l, every xi, built incrementally in T
    for d in ["1/5", "1/2"] {
        let delta = q(d);
        let half_thr = (p as f64).powf(-to_f64(&delta)) / 2.0;
        let mut sums = vec![Complex64::new(0.0, 0.0); pu];
        let mut g_t = 1u64;
        let mut bad = None;
        for t_len in 1..=order {
            for (xi, s) in sums.iter_mut().enumerate() {
                *s += ctx.psi_at(g_t * xi as u64 % p);
            }
            g_t = ctx.mul(g_t, g0);
            let n = t_len as f64;
            let lmax = h1_length(p, t_len, &delta).unwrap_or(0);
            let mut g_l = 1u64;
            for l in 0..lmax {
                for xi in 1..p {
                    let moved = sums[ctx.mul(g_l, xi) as usize].norm() / n;
                    let rhs = sums[xi as usize].norm() / n - half_thr;
                    if moved <= rhs && bad.is_none() {
                        bad = Some(format!("translate p={p} T={t_len} delta={d} xi={xi} l={l}"));
                    }
                }
                g_l = ctx.mul(g_l, g0);
            }
        }
        t.add(bad.map_or(Verdict::Ok, Verdict::Bad));
    }
    let lengths: BTreeSet<u64> =
        [order.div_ceil(5), order.div_ceil(2), order].into_iter().filter(|&x| x >= 1).collect();
    let mut main_fail = 0;
    let mut min_margin = f64::INFINITY;
    for t_len in lengths {
        t.add(Tally::from_result(
            check_incomplete_smear(&ctx, g0, t_len, &q("1/4")),
            || format!("incomplete smear p={p} T={t_len}"),
            |r| {
                if !r.main.pass {
                    main_fail += 1;
                }
                min_margin = min_margin.min(r.main.margin());
                if r.proven_checks_pass() {
                    Verdict::Ok
                } else {
                    Verdict::Bad(format!("incomplete smear p={p} T={t_len}"))
                }
            },
        ));
    }
    if main_fail > 0 {
        t.notes.push(format!(
            "p={p}: p^-11eta inequality fails for {main_fail} segment(s), min log margin {min_margin:.3}"
        ));
    }
    t
}

/// Runs one suite (not `All`) over every prime `3 <= p <= p_max`.
pub fn run_suite(suite: Suite, p_max: u64, seed: u64, tol: &Tolerances) -> SuiteResult {
    let start = Instant::now();
    let primes = primes_in(3, p_max);
    let tallies = par::map_slice(&primes, |&p| match suite {
        Suite::Parseval => parseval_suite(p, seed, tol),
        Suite::Convolution => convolution_suite(p, seed, tol),
        Suite::Smear => smear_suite(p),
        Suite::Lemmas => lemmas_suite(p, seed, tol),
        Suite::Incomplete => incomplete_suite(p),
        Suite::All => unreachable!("expanded by run_verify"),
    });
    let mut total = Tally::default();
    for t in tallies {
        total.merge(t);
    }
    SuiteResult {
        suite: suite.name().into(),
        instances: total.instances,
        violations: total.violations,
        skipped: total.skipped,
        first_violation: total.first,
        notes: total.notes,
        elapsed_ms: start.elapsed().as_millis() as u64,
    }
}

pub fn run_verify(suite: Suite, p_max: u64, seed: u64, tol: &Tolerances) -> VerifyReport {
    let start = Instant::now();
    let suites = match suite {
        Suite::All => Suite::EACH.iter().map(|&s| run_suite(s, p_max, seed, tol)).collect(),
        s => vec![run_suite(s, p_max, seed, tol)],
    };
    VerifyReport { p_max, seed, suites, elapsed_ms: start.elapsed().as_millis() as u64 }
}
