//! Acceptance criteria, one PASS/FAIL line each. Oracles here are computed
//! independently of the library (naive transforms, direct set arithmetic).

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use expsum_core::bgs::{bgs_extract, extract_with_bounds};
use expsum_core::expsum::{check_incomplete_smear, check_translate_inequality, exp_sum, h1_length, magnitudes};
use expsum_core::harness::{
    bgs_instance_random, convolution_check, determinism_hash, duality_check, parseval_check, random_measure,
    run_verify, scan_rows, write_rows, Format, IndexSelection, ScanConfig, Suite, Tolerances,
};
use expsum_core::pipeline::run_pipeline;
use expsum_core::rational::{from_u64, parse_rational, pow2, to_f64};
use expsum_core::spectrum::{check_smear_out, select_k_delta};
use expsum_core::{Error, FieldContext, Measure};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn primes_upto(n: u64) -> Vec<u64> {
    (3..=n).filter(|&m| (2..m).take_while(|d| d * d <= m).all(|d| m % d != 0)).collect()
}

fn modpow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// The index-`m` subgroup as the set of `m`-th powers.
fn mth_powers(p: u64, m: u64) -> Vec<u64> {
    (1..p).map(|x| modpow(x, m, p)).collect::<BTreeSet<_>>().into_iter().collect()
}

/// `sum_x f(x) e(x xi / p)` by direct summation.
fn naive_dft(f: &[f64]) -> Vec<(f64, f64)> {
    let p = f.len();
    (0..p)
        .map(|xi| {
            f.iter().enumerate().fold((0.0, 0.0), |(re, im), (x, v)| {
                let t = TAU * ((x * xi) % p) as f64 / p as f64;
                (re + v * t.cos(), im + v * t.sin())
            })
        })
        .collect()
}

fn abs(z: (f64, f64)) -> f64 {
    z.0.hypot(z.1)
}

fn uniform_masses(p: u64, set: &[u64]) -> Vec<f64> {
    let mut m = vec![0.0; p as usize];
    for &x in set {
        m[x as usize] = 1.0 / set.len() as f64;
    }
    m
}

fn sumset(a: &[u64], b: &[u64], m: u64) -> usize {
    a.iter().flat_map(|x| b.iter().map(move |y| (x + y) % m)).collect::<BTreeSet<_>>().len()
}

fn productset(a: &[u64], b: &[u64], m: u64) -> usize {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y % m)).collect::<BTreeSet<_>>().len()
}

fn q(s: &str) -> BigRational {
    parse_rational(s).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn quadratic_magnitudes() -> Outcome {
    for p in [7u64, 11, 19, 23] {
        let ctx = FieldContext::new(p).map_err(|e| e.to_string())?;
        let h = ctx.subgroup(2).map_err(|e| e.to_string())?;
        let want = ((p + 1) as f64).sqrt() / 2.0;
        let ours = naive_dft(&mth_powers(p, 2).iter().fold(vec![0.0; p as usize], |mut v, &x| {
            v[x as usize] = 1.0;
            v
        }));
        for xi in 1..p {
            let lib = exp_sum(&ctx, &h, xi).magnitude;
            let direct = abs(ours[xi as usize]);
            ensure((lib - want).abs() <= 1e-9 && (direct - want).abs() <= 1e-9, || {
                format!("p={p} xi={xi}: library {lib}, direct {direct}, closed form {want}")
            })?;
        }
    }
    Ok("sqrt 2, sqrt 3, sqrt 5, sqrt 6 at every xi".into())
}

fn complete_sum_bound() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for p in primes_upto(101) {
        let ctx = FieldContext::new(p).map_err(|e| e.to_string())?;
        for m in (1..p).filter(|m| (p - 1) % m == 0) {
            let set = mth_powers(p, m);
            let h = ctx.subgroup(m).map_err(|e| e.to_string())?;
            ensure(h.elements == set, || format!("p={p} index {m}: subgroup differs from the m-th powers"))?;
            let ours = naive_dft(&uniform_masses(p, &set));
            let lib = magnitudes(&ctx, &h);
            for xi in 1..p as usize {
                let direct = abs(ours[xi]) * set.len() as f64;
                ensure((lib[xi] - direct).abs() < 1e-9, || {
                    format!("p={p} index {m} xi={xi}: {} vs {direct}", lib[xi])
                })?;
                ensure(direct < (p as f64).sqrt(), || format!("p={p} index {m} xi={xi}: {direct} >= sqrt p"))?;
                worst = worst.max(direct / (p as f64).sqrt());
                count += 1;
            }
        }
    }
    Ok(format!("{count} sums, max |S|/sqrt(p) = {worst:.4}"))
}

fn parseval_duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for p in [5u64, 7, 11, 101] {
        let measures: Vec<Measure> = (0..200).map(|_| random_measure(p, &mut rng)).collect();
        for (i, mu) in measures.iter().enumerate() {
            parseval_check(mu, 1e-9)?;
            duality_check(mu, &measures[(i + 1) % measures.len()], 1e-9)?;
            let m = mu.masses_f64();
            let ours = naive_dft(&m);
            let lhs: f64 = ours.iter().map(|z| z.0 * z.0 + z.1 * z.1).sum();
            let rhs = p as f64 * m.iter().map(|v| v * v).sum::<f64>();
            ensure((lhs - rhs).abs() <= 1e-9 * rhs, || format!("naive parseval at p={p}: {lhs} vs {rhs}"))?;
            let lib = mu.fourier_magnitudes();
            ensure(ours.iter().zip(&lib).all(|(z, l)| (abs(*z) - l).abs() < 1e-9), || {
                format!("spectrum differs at p={p}")
            })?;
        }
    }
    Ok("800 measures".into())
}

fn convolution_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for p in primes_upto(101) {
        let ctx = FieldContext::new(p).map_err(|e| e.to_string())?;
        for h in ctx.all_subgroups() {
            let mu = Measure::uniform_on(p, &h.elements).map_err(|e| e.to_string())?;
            let spec = naive_dft(&uniform_masses(p, &h.elements));
            for k in 1..=4u64 {
                worst = worst.max(convolution_check(&mu, k, 1e-8)?);
                // nu_k(x) = (1/p) sum_xi |mu_hat(xi)|^{2k} e(-x xi / p)
                let exact = mu.k_fold_nu(k).masses_f64();
                for (x, e) in exact.iter().enumerate() {
                    let s: f64 = (0..p as usize)
                        .map(|xi| {
                            abs(spec[xi]).powi(2 * k as i32) * (TAU * ((x * xi) % p as usize) as f64 / p as f64).cos()
                        })
                        .sum::<f64>()
                        / p as f64;
                    ensure((s - e).abs() <= 1e-8, || format!("p={p} |H|={} k={k} x={x}: {e} vs {s}", h.order()))?;
                }
                count += 1;
            }
        }
    }
    Ok(format!("{count} (p, H, k) cases, max library error {worst:.2e}"))
}

fn smear_out() -> Outcome {
    let mut count = 0;
    for p in primes_upto(101) {
        let ctx = FieldContext::new(p).map_err(|e| e.to_string())?;
        for h in ctx.all_subgroups() {
            let spec: Vec<f64> = naive_dft(&uniform_masses(p, &h.elements)).into_iter().map(abs).collect();
            for k in 1..=3u64 {
                check_smear_out(&ctx, &h, k).map_err(|e| e.to_string())?;
                let nh: Vec<f64> = spec.iter().map(|m| m.powi(2 * k as i32)).collect();
                let nu_k: Vec<f64> = (0..p as usize)
                    .map(|x| {
                        (0..p as usize)
                            .map(|xi| nh[xi] * (TAU * ((x * xi) % p as usize) as f64 / p as f64).cos())
                            .sum::<f64>()
                            / p as f64
                    })
                    .collect();
                for xi in 0..p as usize {
                    let lhs = spec[xi].powi(8 * (k * k) as i32);
                    let rhs: f64 = (0..p as usize).map(|x| nh[x * xi % p as usize].powi(2) * nu_k[x]).sum();
                    ensure(lhs <= rhs * (1.0 + 1e-9) + 1e-12, || {
                        format!("p={p} |H|={} k={k} xi={xi}: {lhs} > {rhs}", h.order())
                    })?;
                    count += 1;
                }
            }
        }
    }
    Ok(format!("{count} (p, H, k, xi) cases, zero violations"))
}

fn selection() -> Outcome {
    let mut ks = BTreeSet::new();
    for p in [101u64, 257] {
        let ctx = FieldContext::new(p).map_err(|e| e.to_string())?;
        for h in ctx.all_subgroups() {
            let spec: Vec<f64> = naive_dft(&uniform_masses(p, &h.elements)).into_iter().map(abs).collect();
            let mu = Measure::uniform_on(p, &h.elements).map_err(|e| e.to_string())?;
            for eta_s in ["1/4", "1/2"] {
                let eta = q(eta_s);
                let r = select_k_delta(&mu, &eta).map_err(|e| format!("p={p} |H|={} eta={eta_s}: {e}", h.order()))?;
                ensure(r.k <= 64, || format!("k={} above the cap", r.k))?;
                ensure(r.delta < &eta / from_u64(r.k * r.k), || {
                    format!("p={p} |H|={}: delta not below eta/k^2", h.order())
                })?;
                let thr = (p as f64).powf(-to_f64(&r.delta));
                let lambda: Vec<u64> = (0..p).filter(|&xi| spec[xi as usize] > thr).collect();
                ensure(lambda == r.lambda_set, || format!("p={p} |H|={}: Lambda differs", h.order()))?;
                let sum: f64 = spec.iter().map(|m| m.powi(4 * r.k as i32)).sum();
                ensure((sum - r.l2_spectral_mass).abs() <= 1e-9 * sum, || {
                    format!("p={p}: spectral mass {sum} vs {}", r.l2_spectral_mass)
                })?;
                let (n, pe) = (lambda.len() as f64, (p as f64).powf(to_f64(&eta)));
                ensure(n / pe <= sum && sum <= pe * n, || {
                    format!("p={p} |H|={} eta={eta_s}: bracket fails", h.order())
                })?;
                ks.insert(r.k);
            }
        }
    }
    Ok(format!("k values {ks:?}"))
}

fn uniform_pipeline() -> Outcome {
    let p = 101u64;
    let delta = q("1/2");
    let mu = Measure::uniform(p);
    let cert = run_pipeline(&mu, &delta).map_err(|e| e.to_string())?;
    ensure(cert.pass(), || "certificate has a failing check".into())?;
    // stability sum for phi = p nu: (1/p) sum_y mu(y) sum_x phi(x) phi(x y)
    let m = mu.masses();
    let pu = p as usize;
    let nu: Vec<BigRational> =
        (0..pu).map(|x| (0..pu).map(|y| &m[(x + y) % pu] * &m[y]).fold(BigRational::zero(), |a, b| a + b)).collect();
    let phi: Vec<BigRational> = nu.iter().map(|v| v * from_u64(p)).collect();
    let mut lhs = BigRational::zero();
    for y in 0..pu {
        let inner = (0..pu).map(|x| &phi[x] * &phi[x * y % pu]).fold(BigRational::zero(), |a, b| a + b);
        lhs += &m[y] * inner;
    }
    lhs /= from_u64(p);
    ensure(lhs == cert.hypotheses.stability.lhs, || "stability sum differs from the oracle".into())?;
    ensure(lhs > &delta * &phi[0], || "stability hypothesis fails".into())?;
    let l2: BigRational = m.iter().map(|v| v * v).fold(BigRational::zero(), |a, b| a + b) * from_u64(p);
    let s = cert.s.len();
    let lower = (0..254).fold(BigRational::one(), |a, _| a * &delta) / pow2(900) * from_u64(p);
    let upper = BigRational::from_integer(BigInt::from(8)) / &delta * from_u64(p);
    let mid = from_u64(s as u64) * &l2;
    ensure(lower < mid && mid < upper, || format!("sandwich fails with |S|={s}"))?;
    ensure(sumset(&cert.s, &cert.s, p) == cert.sumset_size, || "|S+S| differs".into())?;
    ensure(productset(&cert.s, &cert.s, p) == cert.productset_size, || "|S S| differs".into())?;
    Ok(format!("{} stages, |S|={s}, |S+S|={}, |S S|={}", cert.stages.len(), cert.sumset_size, cert.productset_size))
}

/// Some nonempty subset of `a` meets both bounds.
fn exists_subset(a: &[u64], m: u64, doubling: &BigRational, size: &BigRational) -> bool {
    (1u32..1 << a.len()).any(|mask| {
        let s: Vec<u64> = (0..a.len()).filter(|i| mask >> i & 1 == 1).map(|i| a[i]).collect();
        from_u64(s.len() as u64) >= *size && from_u64(sumset(&s, &s, m) as u64) <= *doubling
    })
}

fn bgs_certificates() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut found, mut refuted) = (0, 0);
    for i in 0..50 {
        let inst = bgs_instance_random(&mut rng, 12);
        let n = inst.a.len().max(inst.b.len());
        ensure(n <= 12, || format!("instance {i} too large"))?;
        let m = inst.modulus;
        let r = bgs_extract(&inst).map_err(|e| format!("instance {i}: {e}"))?;
        let ok = r.a_prime.iter().all(|x| inst.a.contains(x))
            && from_u64(sumset(&r.a_prime, &r.a_prime, m) as u64) <= inst.doubling_bound()
            && from_u64(r.a_prime.len() as u64) >= inst.size_bound();
        ensure(ok, || format!("instance {i}: returned set fails i) or ii)"))?;
        // tighter random bounds exercise the search paths
        let len = inst.a.len() as u64;
        let doubling = from_u64(rng.gen_range(1..=len * (len + 1) / 2));
        let size = from_u64(rng.gen_range(1..=len));
        match extract_with_bounds(&inst, &doubling, &size) {
            Ok(r) => {
                let ok = r.a_prime.iter().all(|x| inst.a.contains(x))
                    && from_u64(sumset(&r.a_prime, &r.a_prime, m) as u64) <= doubling
                    && from_u64(r.a_prime.len() as u64) >= size;
                ensure(ok, || format!("instance {i}: tight extraction not certified"))?;
                found += 1;
            }
            Err(Error::ExtractionFailed(_)) => {
                ensure(!exists_subset(&inst.a, m, &doubling, &size), || {
                    format!("instance {i}: missed an existing subset")
                })?;
                refuted += 1;
            }
            Err(e) => return Err(format!("instance {i}: {e}")),
        }
    }
    Ok(format!("50 instances certified; tight bounds: {found} found, {refuted} refuted by the oracle"))
}

fn incomplete_sums() -> Outcome {
    let p = 101u64;
    let t_len = 20u64;
    let ctx = FieldContext::new(p).map_err(|e| e.to_string())?;
    let g0 = ctx.generator();
    let order = (1..p).find(|&e| modpow(g0, e, p) == 1).unwrap();
    ensure(order == 100, || format!("generator order {order}"))?;
    let delta = q("1/5");
    let bound = t_len as f64 * (p as f64).powf(-0.2) / 4.0;
    let admissible = (0u64..).take_while(|&l| (l as f64) < bound).count() as u64;
    ensure(h1_length(p, t_len, &delta).ok() == Some(admissible), || "admissible length differs".into())?;
    let seg: Vec<u64> = (0..t_len).map(|t| modpow(g0, t, p)).collect();
    let sum_at = |xi: u64| -> f64 {
        let (re, im) = seg.iter().fold((0.0, 0.0), |(re, im), &x| {
            let t = TAU * ((x * xi) % p) as f64 / p as f64;
            (re + t.cos(), im + t.sin())
        });
        re.hypot(im) / t_len as f64
    };
    let mut checked = 0;
    for l in 0..admissible {
        for xi in 1..p {
            check_translate_inequality(&ctx, g0, t_len, &delta, xi, l).map_err(|e| e.to_string())?;
            let moved = sum_at(modpow(g0, l, p) * xi % p);
            ensure(moved > sum_at(xi) - (p as f64).powf(-0.2) / 2.0, || format!("oracle: xi={xi} l={l}"))?;
            checked += 1;
        }
    }
    let r = check_incomplete_smear(&ctx, g0, t_len, &q("1/4")).map_err(|e| e.to_string())?;
    ensure(r.proven_checks_pass(), || "averaging links fail".into())?;
    Ok(format!(
        "{checked} translates (l < {admissible}); chain main inequality {} with log margin {:.3}",
        if r.main.pass { "holds" } else { "fails" },
        r.main.margin()
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = ScanConfig {
        p_min: 7,
        p_max: 101,
        selection: IndexSelection::Indices(vec![2]),
        eta: q("1/4"),
        output: dir.path().join("scan.csv"),
        format: Format::Csv,
        parallelism: 4,
    };
    let mut hashes = Vec::new();
    let mut bodies = Vec::new();
    for run in 0..2 {
        let rows = scan_rows(&cfg).map_err(|e| e.to_string())?;
        let path = dir.path().join(format!("run{run}.csv"));
        let s = write_rows(&path, Format::Csv, &rows).map_err(|e| e.to_string())?;
        ensure(s.hash == determinism_hash(&rows), || "summary hash differs".into())?;
        hashes.push(s.hash);
        let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let stripped: Vec<String> =
            text.lines().map(|l| l.rsplit_once(',').map_or(l.to_string(), |(head, _)| head.to_string())).collect();
        bodies.push(stripped);
    }
    ensure(hashes[0] == hashes[1], || "hashes differ".into())?;
    ensure(bodies[0] == bodies[1], || "files differ outside elapsed_ms".into())?;
    Ok(format!("hash {}", &hashes[0][..16]))
}

fn verify_all() -> Outcome {
    let r = run_verify(Suite::All, 101, 0, &Tolerances::default());
    let summary: Vec<String> =
        r.suites.iter().map(|s| format!("{} {}/{}", s.suite, s.instances - s.violations, s.instances)).collect();
    ensure(r.pass(), || format!("violations: {:?}", r.suites.iter().find_map(|s| s.first_violation.clone())))?;
    Ok(summary.join(", "))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("1 quadratic-subgroup magnitudes", Duration::from_secs(1), quadratic_magnitudes),
        ("2 complete-sum bound p <= 101", Duration::from_secs(5), complete_sum_bound),
        ("3 Parseval and duality", Duration::from_secs(60), parseval_duality),
        ("4 convolution oracle equivalence", Duration::from_secs(30), convolution_oracle),
        ("5 smear-out suite", Duration::from_secs(60), smear_out),
        ("6 (k, delta) selection at p in {101, 257}", Duration::from_secs(60), selection),
        ("7 uniform pipeline certificate p=101", Duration::from_secs(10), uniform_pipeline),
        ("8 BGS extraction certificates", Duration::from_secs(60), bgs_certificates),
        ("9 incomplete-sum suite", Duration::from_secs(10), incomplete_sums),
        ("10 scan determinism", Duration::from_secs(60), determinism),
        ("11 verify all p_max=101", Duration::from_secs(60), verify_all),
    ];
    let mut failed = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(d) if elapsed > budget => Err(format!("{d}; over the {budget:?} budget")),
            o => o,
        };
        match outcome {
            Ok(detail) => println!("PASS  {name} [{:.2}s] {detail}", elapsed.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name} [{:.2}s] {detail}", elapsed.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
