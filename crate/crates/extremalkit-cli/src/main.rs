//! Command-line harness: problem and report I/O, example-corpus
//! reproduction, and batch runs.
//!
//! Exit codes: 0 success/holds, 2 violated or not-extremal (expected
//! negative results), 3 unknown within budget, 1 error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use extremalkit::corpus;
use extremalkit::decomp::{
    check_normal_qualification, fuzzy_decompose, normal_cone_at_origin, refined_decompose,
    DecompError,
};
use extremalkit::fans::SamplingParams;
use extremalkit::sets::SetSpec;
use extremalkit::solver::{
    check_conic_extremality, check_nonoverlapping, default_eta_grid, scaling_check, solve_system,
    CertStatus, ProblemSpec, SolverConfig,
};
use extremalkit::tangency::{tan_check, tne_check};
use extremalkit::verdict::Verdict;

#[derive(Parser)]
#[command(
    name = "extremalkit",
    version,
    about = "Tangential extremal principles toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Input file (JSON).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Write the run report to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for all stochastic behavior.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Override the solver movement tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Override the solver iteration budget.
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Override the number of sampled directions per scale.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Override the number of sampled directions per shell.
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Suppress the report on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the conic extremal problem and emit the normal certificate.
    Solve,
    /// Run a checker on a cone-system problem file.
    Check {
        #[arg(value_enum)]
        kind: CheckKind,
    },
    /// Decompose a Frechet normal over a cone intersection.
    Decompose {
        #[arg(value_enum)]
        mode: DecomposeMode,
    },
    /// Tangency property checks.
    Tangency {
        #[arg(value_enum)]
        kind: TangencyKind,
    },
    /// Re-run a fixed corpus example and compare against its labels.
    Reproduce { id: String },
    /// Run every corpus entry listed in a manifest.
    Batch,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    Nonoverlap,
    Extremality,
    Scaling,
    Qc,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecomposeMode {
    Fuzzy,
    Refined,
}

#[derive(Clone, Copy, ValueEnum)]
enum TangencyKind {
    Tne,
    Tan,
}

#[derive(Debug, Deserialize)]
struct DecomposeInput {
    cones: Vec<SetSpec>,
    x_star: Vec<f64>,
    #[serde(default)]
    epsilon: Option<f64>,
    #[serde(default)]
    solver: Option<SolverConfig>,
}

#[derive(Debug, Deserialize)]
struct TangencyInput {
    set: SetSpec,
    base_point: Vec<f64>,
    #[serde(default)]
    budget: Option<SamplingParams>,
}

#[derive(Debug, Deserialize)]
struct QcInput {
    families: Vec<QcFamilyInput>,
}

#[derive(Debug, Deserialize)]
struct QcFamilyInput {
    cones: Vec<SetSpec>,
}

#[derive(Debug, Deserialize)]
struct Manifest {
    entries: Vec<String>,
}

#[derive(Serialize)]
struct RunReport {
    version: String,
    command: String,
    config: serde_json::Value,
    results: serde_json::Value,
    wall_time_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    corpus_label_match: Option<bool>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Parse JSON with JSON-pointer paths on schema violations.
fn parse_input<T: serde::de::DeserializeOwned>(cli: &Cli) -> Result<T> {
    let path = cli
        .input
        .as_ref()
        .ok_or_else(|| anyhow!("--input is required for this command"))?;
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| anyhow!("schema violation at /{}: {}", e.path(), e.inner()))
}

fn solver_config(cli: &Cli, base: SolverConfig) -> SolverConfig {
    let mut cfg = base;
    cfg.seed = cli.seed;
    if let Some(t) = cli.tol {
        cfg.tol = t;
    }
    if let Some(m) = cli.max_iter {
        cfg.max_iter = m;
    }
    cfg
}

fn sampling_budget(cli: &Cli) -> SamplingParams {
    let mut b = SamplingParams::default().with_seed(cli.seed);
    if let Some(s) = cli.samples {
        b.num_dirs = s;
    }
    if let Some(s) = cli.budget {
        b.dirs_per_shell = s;
    }
    b
}

fn emit(cli: &Cli, report: &RunReport) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    if let Some(path) = &cli.output {
        std::fs::write(path, format!("{text}\n"))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if !cli.quiet && cli.output.is_none() {
        println!("{text}");
    }
    Ok(())
}

fn verdict_code<W>(v: &Verdict<W>) -> u8 {
    match v {
        Verdict::Holds => 0,
        Verdict::Violated { .. } => 2,
        Verdict::Unknown { .. } => 3,
    }
}

fn config_echo(cli: &Cli, command: &str) -> serde_json::Value {
    json!({
        "command": command,
        "input": cli.input.as_ref().map(|p| p.display().to_string()),
        "seed": cli.seed,
        "tol": cli.tol,
        "max_iter": cli.max_iter,
        "samples": cli.samples,
        "budget": cli.budget,
    })
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let start = Instant::now();
    let (command, results, code, label_match): (String, serde_json::Value, u8, Option<bool>) =
        match &cli.command {
            Command::Solve => {
                let problem: ProblemSpec = parse_input(cli)?;
                let system = problem.build()?;
                let cfg = solver_config(cli, problem.solver.clone());
                let cert = solve_system(&system, &cfg)?;
                let code = match &cert.status {
                    CertStatus::Extremal => 0,
                    CertStatus::NotExtremal { .. } | CertStatus::Degenerate { .. } => 2,
                    CertStatus::BudgetExceeded => 3,
                };
                ("solve".into(), serde_json::to_value(&cert)?, code, None)
            }
            Command::Check { kind } => {
                let (name, value, code) = match kind {
                    CheckKind::Nonoverlap => {
                        let problem: ProblemSpec = parse_input(cli)?;
                        let system = problem.build()?;
                        let v = check_nonoverlapping(&system)?;
                        (
                            "check-nonoverlap",
                            serde_json::to_value(&v)?,
                            verdict_code(&v),
                        )
                    }
                    CheckKind::Extremality => {
                        let problem: ProblemSpec = parse_input(cli)?;
                        let system = problem.build()?;
                        let v = check_conic_extremality(&system)?;
                        (
                            "check-extremality",
                            serde_json::to_value(&v)?,
                            verdict_code(&v),
                        )
                    }
                    CheckKind::Scaling => {
                        let problem: ProblemSpec = parse_input(cli)?;
                        let system = problem.build()?;
                        let v = scaling_check(&system, &default_eta_grid())?;
                        (
                            "check-scaling",
                            serde_json::to_value(&v)?,
                            verdict_code(&v),
                        )
                    }
                    CheckKind::Qc => {
                        let input: QcInput = parse_input(cli)?;
                        let mut reports = Vec::new();
                        let mut worst = 0u8;
                        for fam in &input.families {
                            let normals = fam
                                .cones
                                .iter()
                                .map(normal_cone_at_origin)
                                .collect::<Result<Vec<_>, _>>()?;
                            let rep = check_normal_qualification(&normals)?;
                            worst = worst.max(verdict_code(&rep.outcome));
                            reports.push(serde_json::to_value(&rep)?);
                        }
                        ("check-qc", serde_json::Value::Array(reports), worst)
                    }
                };
                (name.to_string(), value, code, None)
            }
            Command::Decompose { mode } => {
                let input: DecomposeInput = parse_input(cli)?;
                let cfg = solver_config(cli, input.solver.clone().unwrap_or_default());
                let outcome = match mode {
                    DecomposeMode::Fuzzy => {
                        let eps = input
                            .epsilon
                            .ok_or_else(|| anyhow!("fuzzy mode requires \"epsilon\""))?;
                        fuzzy_decompose(&input.x_star, eps, &input.cones, &cfg)
                    }
                    DecomposeMode::Refined => refined_decompose(&input.x_star, &input.cones, &cfg),
                };
                match outcome {
                    Ok(d) => ("decompose".into(), serde_json::to_value(&d)?, 0, None),
                    Err(
                        e @ (DecompError::QCViolated { .. }
                        | DecompError::StrictNegativityFails { .. }
                        | DecompError::NotFrechetNormal { .. }),
                    ) => (
                        "decompose".into(),
                        json!({ "error": e.to_string() }),
                        2,
                        None,
                    ),
                    Err(e) => return Err(e.into()),
                }
            }
            Command::Tangency { kind } => {
                let input: TangencyInput = parse_input(cli)?;
                let budget = input.budget.unwrap_or_else(|| sampling_budget(cli));
                let report = match kind {
                    TangencyKind::Tne => tne_check(&input.set, &input.base_point, &budget)?,
                    TangencyKind::Tan => tan_check(&input.set, &input.base_point, &budget)?,
                };
                let code = verdict_code(&report.outcome);
                (
                    "tangency".into(),
                    serde_json::to_value(&report)?,
                    code,
                    None,
                )
            }
            Command::Reproduce { id } => {
                let dir = corpus::default_corpus_dir();
                let (entry, expected) = corpus::load_entry(&dir, id)?;
                let run = corpus::run_entry(&entry, cli.seed)?;
                let problems = corpus::compare(&run, &expected);
                let matched = problems.is_empty();
                let code = if !matched {
                    1
                } else {
                    match run.primary.as_str() {
                        "holds" => 0,
                        "violated" => 2,
                        _ => 3,
                    }
                };
                (
                    "reproduce".into(),
                    json!({
                        "id": id,
                        "labels": run.labels,
                        "primary": run.primary,
                        "mismatches": problems,
                        "report": run.report,
                    }),
                    code,
                    Some(matched),
                )
            }
            Command::Batch => {
                let manifest: Manifest = parse_input(cli)?;
                let dir = corpus::default_corpus_dir();
                let mut rows = Vec::new();
                let mut all_match = true;
                for id in &manifest.entries {
                    let row = match corpus::load_entry(&dir, id)
                        .map_err(anyhow::Error::from)
                        .and_then(|(entry, expected)| {
                            let run = corpus::run_entry(&entry, cli.seed)?;
                            Ok((run, expected))
                        }) {
                        Ok((run, expected)) => {
                            let problems = corpus::compare(&run, &expected);
                            all_match &= problems.is_empty();
                            json!({
                                "id": id,
                                "matched": problems.is_empty(),
                                "primary": run.primary,
                                "labels": run.labels,
                                "mismatches": problems,
                            })
                        }
                        Err(e) => {
                            all_match = false;
                            json!({ "id": id, "matched": false, "error": e.to_string() })
                        }
                    };
                    rows.push(row);
                }
                let code = if all_match { 0 } else { 2 };
                (
                    "batch".into(),
                    serde_json::Value::Array(rows),
                    code,
                    Some(all_match),
                )
            }
        };
    let report = RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.clone(),
        config: config_echo(cli, &command),
        results,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        corpus_label_match: label_match,
    };
    emit(cli, &report)?;
    Ok(ExitCode::from(code))
}
