//! `rectfrac`: runs the seeded experiments and the oracle suite.
//!
//! Exit status is 0 on success, 1 when a verification finds a violation and
//! 2 on configuration or I/O errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use rectfrac::experiments::{emit_report, parse_override, Experiment, ExperimentConfig, ExperimentResult};
use rectfrac::oracle::{oracle_suite, Fault};

#[derive(Parser, Debug)]
#[command(name = "rectfrac", version, about = "Fractional integration on product spaces: seeded experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory receiving `<id>/config.json`, `<id>/summary.json` and `<id>/trials.csv`.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the machine parallelism.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,
    /// Config override `key=value`; dotted keys reach nested fields.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, hide = true, value_enum)]
    inject_fault: Option<FaultArg>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FaultArg {
    KernelExponent,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Doubling and reverse-doubling exponents of the configured weight.
    EstimateDoubling(Common),
    /// Fractional integral norm ratios across refinements.
    VerifyHls(Common),
    /// Dilation slope of the mismatched-exponent norm ratio.
    VerifyNecessity(Common),
    /// Fractional maximal norm ratios and dyadic domination.
    VerifyMaximal(Common),
    /// Carleson sums across refinements.
    VerifyCarleson(Common),
    /// Decay of the cone cross-term functional.
    VerifyOrtho(Common),
    /// Exact dilation identities.
    VerifyCovariance(Common),
    /// Pointwise Hedberg-type audit of the cone pieces.
    AuditHedberg(Common),
    /// Compares every fast operator with its brute-force oracle.
    OracleSuite(Common),
}

/// Message for a run that could not start or finish; exits with status 2.
struct Failure(String);

fn usage_error(msg: &str) -> Failure {
    let mut cmd = Cli::command();
    Failure(format!("error: {msg}\n\n{}", cmd.render_usage()))
}

fn load_config(common: &Common) -> Result<ExperimentConfig, Failure> {
    let path = common.config.as_ref().ok_or_else(|| usage_error("--config <path> is required"))?;
    let mut overrides = Vec::new();
    for s in &common.overrides {
        overrides.push(parse_override(s).map_err(|e| Failure(e.to_string()))?);
    }
    if let Some(seed) = common.seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    ExperimentConfig::load(path, &overrides).map_err(|e| Failure(e.to_string()))
}

fn configure_threads(threads: Option<u32>) -> Result<(), Failure> {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .map_err(|e| Failure(format!("cannot start {n} threads: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn print_result(result: &ExperimentResult, paths: &[PathBuf]) {
    println!("experiment {} ({})", result.experiment, result.id);
    for (k, v) in &result.summary {
        println!("  {k}: {v}");
    }
    for w in &result.warnings {
        println!("warning: {w}");
    }
    for v in &result.violations {
        println!("violation: {v}");
    }
    for p in paths {
        println!("wrote {}", p.display());
    }
    println!("{}", if result.passed() { "PASS" } else { "FAIL" });
}

fn run_experiment(experiment: Experiment, common: &Common) -> Result<bool, Failure> {
    let cfg = load_config(common)?;
    configure_threads(common.threads)?;
    println!("resolved config:\n{}", cfg.to_pretty_json());
    let result = experiment.run(&cfg).map_err(|e| Failure(e.to_string()))?;
    let paths = emit_report(&result, &common.out).map_err(|e| Failure(format!("writing results: {e}")))?;
    print_result(&result, &paths);
    Ok(result.passed())
}

fn run_oracles(common: &Common) -> Result<bool, Failure> {
    let cfg = match common.config {
        Some(_) => Some(load_config(common)?),
        None => None,
    };
    configure_threads(common.threads)?;
    let seed = common.seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(0);
    let fault = common.inject_fault.map(|FaultArg::KernelExponent| Fault::KernelExponent);
    if let Some(c) = &cfg {
        println!("resolved config:\n{}", c.to_pretty_json());
    }
    println!("oracle suite, seed {seed}");
    let report = oracle_suite(seed, fault).map_err(|e| Failure(e.to_string()))?;
    for c in &report.checks {
        println!("  {:<28} max rel error {:.3e}  {}", c.name, c.max_rel_error, if c.passed { "ok" } else { "MISMATCH" });
    }
    let dir = common.out.join("oracle-suite");
    write_json(&dir, &serde_json::json!({ "seed": seed, "report": report }))?;
    println!("wrote {}", dir.join("summary.json").display());
    println!("{}", if report.passed() { "PASS" } else { "FAIL" });
    Ok(report.passed())
}

fn write_json(dir: &Path, value: &serde_json::Value) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure(format!("writing {}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let text = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
    std::fs::write(dir.join("summary.json"), text).map_err(io)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::EstimateDoubling(c) => run_experiment(Experiment::Doubling, c),
        Command::VerifyHls(c) => run_experiment(Experiment::HlsRatio, c),
        Command::VerifyNecessity(c) => run_experiment(Experiment::DilationNecessity, c),
        Command::VerifyMaximal(c) => run_experiment(Experiment::MaximalRegularity, c),
        Command::VerifyCarleson(c) => run_experiment(Experiment::Carleson, c),
        Command::VerifyOrtho(c) => run_experiment(Experiment::OrthoDecay, c),
        Command::VerifyCovariance(c) => run_experiment(Experiment::Covariance, c),
        Command::AuditHedberg(c) => run_experiment(Experiment::Hedberg, c),
        Command::OracleSuite(c) => run_oracles(c),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}
