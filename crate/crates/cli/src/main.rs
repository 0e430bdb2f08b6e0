use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use expsum_core::expsum::{
    check_incomplete_smear, check_translate_inequality, complete_sum_bound_check, exp_sum, h1_length,
    max_nontrivial_fourier,
};
use expsum_core::harness::{run_scan, run_verify, Format, ScanConfig, ScanOverrides, Suite, Tolerances};
use expsum_core::pipeline::{assemble_contradiction_with, run_pipeline, verify_hypotheses, CERT_SCHEMA};
use expsum_core::rational::{format_rational, parse_rational};
use expsum_core::{Error, FieldContext, Measure};
use num_rational::BigRational;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "expsum", version, about = "Exponential sums over multiplicative subgroups of F_p")]
struct Cli {
    /// Largest prime accepted.
    #[arg(long, global = true, env = "EXPSUM_P_CAP")]
    p_cap: Option<u64>,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Comma-separated `name=value` tolerance overrides (parseval, convolution, magnitude).
    #[arg(long, global = true)]
    tolerance_overrides: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exponential sums and the empirical exponent for one subgroup.
    Analyze {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        index: u64,
        #[arg(long)]
        xi: Option<u64>,
    },
    /// Tabulates empirical exponents over a range of primes.
    Scan(ScanArgs),
    /// Runs the extraction pipeline and prints its certificate.
    Pipeline(PipelineArgs),
    /// Runs a verification suite over all primes up to `--p-max`.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 101)]
        p_max: u64,
    },
    /// Checks the incomplete-sum chain on a segment `{g^t : t < length}`.
    Incomplete(IncompleteArgs),
}

#[derive(Args)]
struct ScanArgs {
    /// `key=value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p_min: Option<u64>,
    #[arg(long)]
    p_max: Option<u64>,
    /// `all` or a comma-separated list of indices.
    #[arg(long, conflicts_with = "alpha_min")]
    index: Option<String>,
    #[arg(long)]
    alpha_min: Option<f64>,
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    parallelism: Option<usize>,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, required_unless_present = "uniform", conflicts_with = "uniform")]
    index: Option<u64>,
    /// Use the uniform measure on F_p.
    #[arg(long)]
    uniform: bool,
    #[arg(long, default_value = "1/4")]
    eta: String,
    /// Overrides `Delta` (required with `--uniform`).
    #[arg(long, required_if_eq("uniform", "true"))]
    delta: Option<String>,
}

#[derive(Args)]
struct IncompleteArgs {
    #[arg(long)]
    p: u64,
    /// Segment generator; defaults to the least primitive root.
    #[arg(long)]
    generator: Option<u64>,
    #[arg(long)]
    length: u64,
    #[arg(long, default_value = "1/4")]
    eta: String,
    /// Also check the translate inequality at this delta.
    #[arg(long)]
    translate_delta: Option<String>,
    /// Restrict the translate check to one frequency (requires `--l`).
    #[arg(long, requires = "l", requires = "translate_delta")]
    xi: Option<u64>,
    #[arg(long, requires = "xi")]
    l: Option<u64>,
}

enum Failure {
    Usage(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BoundaryAmbiguity { .. }
            | Error::LoopCapExceeded { .. }
            | Error::KCapExceeded { .. }
            | Error::InequalityViolated(_)
            | Error::HypothesesFail(_)
            | Error::HypothesesEffectivelyEmpty(_)
            | Error::StageViolation(_)
            | Error::ExtractionFailed(_) => Failure::Violation(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type CmdResult = Result<Value, Failure>;

fn rational(s: &str, what: &str) -> Result<BigRational, Failure> {
    parse_rational(s).map_err(|e| Failure::Usage(format!("--{what}: {e}")))
}

fn analyze(p: u64, index: u64, xi: Option<u64>) -> CmdResult {
    let ctx = FieldContext::new(p)?;
    let h = ctx.subgroup(index)?;
    let bound = max_nontrivial_fourier(&ctx, &h);
    let check = complete_sum_bound_check(&ctx, &h)?;
    let xi = xi.unwrap_or(bound.argmax_xi);
    if xi.is_multiple_of(p) {
        return Err(Error::ZeroArgument.into());
    }
    Ok(json!({
        "p": p,
        "index": index,
        "subgroup_order": h.order(),
        "alpha": h.alpha(),
        "max_coeff": bound.max_nontrivial,
        "beta_emp": bound.beta_emp,
        "argmax_xi": bound.argmax_xi,
        "bound": bound,
        "sum": exp_sum(&ctx, &h, xi),
        "complete_sum_bound": check,
    }))
}

fn scan(args: ScanArgs, cap: Option<u64>) -> CmdResult {
    let format = args.format.as_deref().map(str::parse::<Format>).transpose()?;
    let cli = ScanOverrides {
        p_min: args.p_min,
        p_max: args.p_max,
        index: args.index,
        alpha_min: args.alpha_min,
        eta: args.eta,
        output: args.output,
        format,
        parallelism: args.parallelism,
    };
    let cfg = ScanConfig::resolve(cli, args.config.as_deref(), cap)?;
    let summary = run_scan(&cfg)?;
    Ok(json!({"output": cfg.output, "format": cfg.format, "summary": summary}))
}

fn pipeline(args: PipelineArgs) -> CmdResult {
    let ctx = FieldContext::new(args.p)?;
    let eta = rational(&args.eta, "eta")?;
    let big_delta = args.delta.as_deref().map(|d| rational(d, "delta")).transpose()?;
    match args.index {
        Some(index) => {
            let h = ctx.subgroup(index)?;
            let report = assemble_contradiction_with(&ctx, &h, &eta, big_delta)?;
            Ok(serde_json::to_value(report).expect("serializable"))
        }
        None => {
            let mu = Measure::uniform(args.p);
            let d = big_delta.expect("required by clap");
            match run_pipeline(&mu, &d) {
                Ok(cert) => {
                    let pass = cert.pass();
                    let out = json!({"schema": CERT_SCHEMA, "outcome": "certified", "certificate": cert});
                    if pass {
                        Ok(out)
                    } else {
                        Err(Failure::Violation(format!("certificate fails: {out}")))
                    }
                }
                Err(Error::HypothesesFail(_)) => Ok(json!({
                    "schema": CERT_SCHEMA,
                    "p": args.p,
                    "big_delta": format_rational(&d),
                    "outcome": "hypotheses_not_met",
                    "hypotheses": verify_hypotheses(&mu, &d),
                })),
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn verify(suite: &str, p_max: u64, seed: u64, tol: &Tolerances, cap: Option<u64>) -> CmdResult {
    let suite: Suite = suite.parse()?;
    let cap = cap.unwrap_or_else(expsum_core::field::p_cap_from_env);
    if p_max > cap {
        return Err(Error::TooLarge { p: p_max, cap }.into());
    }
    let report = run_verify(suite, p_max, seed, tol);
    let value = serde_json::to_value(&report).expect("serializable");
    if report.pass() {
        Ok(value)
    } else {
        println!("{value}");
        let first = report.suites.iter().find_map(|s| s.first_violation.clone()).unwrap_or_default();
        Err(Failure::Violation(first))
    }
}

fn incomplete(args: IncompleteArgs) -> CmdResult {
    let ctx = FieldContext::new(args.p)?;
    let g0 = args.generator.unwrap_or(ctx.generator());
    let eta = rational(&args.eta, "eta")?;
    let report = check_incomplete_smear(&ctx, g0, args.length, &eta)?;
    if !report.proven_checks_pass() {
        return Err(Failure::Violation(format!("incomplete chain: {}", json!(report))));
    }
    let translate = match args.translate_delta.as_deref() {
        None => Value::Null,
        Some(d) => {
            let delta = rational(d, "translate-delta")?;
            match (args.xi, args.l) {
                (Some(xi), Some(l)) => json!(check_translate_inequality(&ctx, g0, args.length, &delta, xi, l)?),
                _ => {
                    let admissible = h1_length(args.p, args.length, &delta)?;
                    let mut checked = 0u64;
                    for l in 0..admissible {
                        for xi in 1..args.p {
                            check_translate_inequality(&ctx, g0, args.length, &delta, xi, l)?;
                            checked += 1;
                        }
                    }
                    json!({"delta": format_rational(&delta), "admissible_l": admissible, "checked": checked, "violations": 0})
                }
            }
        }
    };
    Ok(json!({"smear": report, "translate": translate}))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(cap) = cli.p_cap {
        // library constructors read the cap from the environment
        std::env::set_var("EXPSUM_P_CAP", cap.to_string());
    }
    let tol = match cli.tolerance_overrides.as_deref().map(|s| Tolerances::default().with_overrides(s)).transpose() {
        Ok(t) => t.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Analyze { p, index, xi } => analyze(p, index, xi),
        Command::Scan(args) => scan(args, cli.p_cap),
        Command::Pipeline(args) => pipeline(args),
        Command::Verify { suite, p_max } => verify(&suite, p_max, cli.seed, &tol, cli.p_cap),
        Command::Incomplete(args) => incomplete(args),
    };
    match result {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Violation(msg)) => {
            eprintln!("violation: {msg}");
            ExitCode::from(1)
        }
    }
}
