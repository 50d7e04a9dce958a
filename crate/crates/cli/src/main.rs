//! `mrfcd`: evaluate change-detection sample-complexity bounds, run the
//! verification suites, and simulate the optimal test risk on the built-in
//! ensembles.
//!
//! Exit codes: 0 success, 2 validation/config error, 3 runtime failure
//! (including failed verification checks).

mod config;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::ExperimentConfig;
use mrfcd_core::ensemble::{
    gaussian_single_edge_ensemble, ising_clique_ensemble, ising_single_edge_ensemble,
    ChangeEnsemble,
};
use mrfcd_core::lecam::{evaluate_bound, DetectionMode, ThresholdKind};
use mrfcd_core::risk::{risk_vs_n_sweep, simulate_risk};
use mrfcd_core::verify;
use mrfcd_core::{BoundReport, RiskReport};

#[derive(Parser)]
#[command(
    name = "mrfcd",
    version,
    about = "Sample-complexity bounds and risk simulations for structural change detection in Ising and Gaussian MRFs"
)]
struct Cli {
    /// JSON config file; explicit flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for Monte Carlo loops (results do not depend on this).
    /// Falls back to MRFCD_THREADS, then to machine parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a theorem threshold and its chi-square / risk-bound chain.
    Bound(Flags),
    /// Estimate the optimal average risk of the threshold test on an ensemble.
    Simulate(Flags),
    /// Map `simulate` over a list of sample sizes with derived seeds.
    Sweep(Flags),
    /// Run the named verification suites against their independent oracles.
    Verify(Flags),
    /// Render a CSV of risk or bound reports to a standalone SVG.
    Plot(Flags),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Bound(_) => "bound",
            Command::Simulate(_) => "simulate",
            Command::Sweep(_) => "sweep",
            Command::Verify(_) => "verify",
            Command::Plot(_) => "plot",
        }
    }

    fn flags(self) -> Flags {
        match self {
            Command::Bound(f)
            | Command::Simulate(f)
            | Command::Sweep(f)
            | Command::Verify(f)
            | Command::Plot(f) => f,
        }
    }
}

#[derive(Args, Default)]
struct Flags {
    /// Ensemble kind (simulate/sweep: ising-single-edge | ising-clique |
    /// gaussian-single-edge; bound: ising-easy | ising-clique | gaussian).
    #[arg(long)]
    kind: Option<String>,
    /// Number of nodes.
    #[arg(long)]
    p: Option<usize>,
    /// Max degree / clique parameter.
    #[arg(long)]
    d: Option<usize>,
    /// Minimum edge-weight magnitude (ising-easy bound; also the preset
    /// weight for ising-single-edge simulations).
    #[arg(long)]
    alpha: Option<f64>,
    /// Maximum edge-weight magnitude (ising-clique).
    #[arg(long)]
    beta: Option<f64>,
    /// Normalized precision off-diagonal lower bound (gaussian).
    #[arg(long)]
    gamma: Option<f64>,
    /// Explicit edge weight for simulations; defaults to alpha/beta/gamma
    /// according to the kind.
    #[arg(long)]
    lambda: Option<f64>,
    /// Reliability level in [0, 1].
    #[arg(long)]
    delta: Option<f64>,
    /// change-detection (default) or structure-learning.
    #[arg(long)]
    mode: Option<String>,
    /// Samples per dataset.
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated sample sizes for `sweep`.
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    /// Monte Carlo trials per arm.
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Verification suite name, or "all".
    #[arg(long)]
    suite: Option<String>,
    /// Input CSV for `plot`.
    #[arg(long)]
    input: Option<String>,
    /// Output path; stdout when omitted (plot requires it).
    #[arg(long)]
    out: Option<String>,
    /// json or csv.
    #[arg(long)]
    format: Option<String>,
}

impl Flags {
    fn into_config(self, command: Option<&str>) -> ExperimentConfig {
        ExperimentConfig {
            command: command.map(str::to_string),
            kind: self.kind,
            p: self.p,
            d: self.d,
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            lambda: self.lambda,
            delta: self.delta,
            mode: self.mode,
            n: self.n,
            n_list: self.n_list,
            trials: self.trials,
            seed: self.seed,
            suite: self.suite,
            input: self.input,
            out: self.out,
            format: self.format,
            threads: None,
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn validation(msg: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: msg.into(),
        }
    }

    fn runtime(msg: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: msg.into(),
        }
    }
}

impl From<mrfcd_core::Error> for CliError {
    fn from(e: mrfcd_core::Error) -> Self {
        CliError::validation(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file_cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::validation(format!("cannot read config {path:?}: {e}")))?;
            serde_json::from_str::<ExperimentConfig>(&text)
                .map_err(|e| CliError::validation(format!("bad config {path:?}: {e}")))?
        }
        None => ExperimentConfig::default(),
    };

    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("MRFCD_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .or(file_cfg.threads);
    if let Some(k) = threads {
        if k == 0 {
            return Err(CliError::validation("--threads must be positive"));
        }
        // Ignore the error if a pool already exists (e.g. repeated in tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }

    let flags_cfg = match cli.command {
        Some(cmd) => {
            let name = cmd.name();
            cmd.flags().into_config(Some(name))
        }
        None => ExperimentConfig::default(),
    };
    let cfg = flags_cfg.merge_over(file_cfg);

    match cfg.command.as_deref() {
        Some("bound") => cmd_bound(&cfg),
        Some("simulate") => cmd_simulate(&cfg),
        Some("sweep") => cmd_sweep(&cfg),
        Some("verify") => cmd_verify(&cfg),
        Some("plot") => cmd_plot(&cfg),
        Some(other) => Err(CliError::validation(format!(
            "unknown command {other:?}; expected bound | simulate | sweep | verify | plot"
        ))),
        None => Err(CliError::validation(
            "no command given on the command line or in the config file",
        )),
    }
}

fn require<T: Copy>(v: Option<T>, name: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::validation(format!("missing required parameter --{name}")))
}

fn require_str<'a>(v: &'a Option<String>, name: &str) -> Result<&'a str, CliError> {
    v.as_deref()
        .ok_or_else(|| CliError::validation(format!("missing required parameter --{name}")))
}

fn parse_mode(cfg: &ExperimentConfig) -> Result<DetectionMode, CliError> {
    match cfg.mode.as_deref() {
        None | Some("change-detection") => Ok(DetectionMode::ChangeDetection),
        Some("structure-learning") => Ok(DetectionMode::StructureLearning),
        Some(other) => Err(CliError::validation(format!(
            "unknown mode {other:?}; expected change-detection | structure-learning"
        ))),
    }
}

fn parse_format(cfg: &ExperimentConfig, default: &'static str) -> Result<&'static str, CliError> {
    match cfg.format.as_deref() {
        None => Ok(default),
        Some("json") => Ok("json"),
        Some("csv") => Ok("csv"),
        Some(other) => Err(CliError::validation(format!(
            "unknown format {other:?}; expected json | csv"
        ))),
    }
}

/// Write to stdout, or atomically (temp file + rename) to a path.
fn emit(out: Option<&str>, content: &str) -> Result<(), CliError> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => write_atomic(Path::new(path), content),
    }
}

fn write_atomic(path: &Path, content: &str) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, content)
        .map_err(|e| CliError::runtime(format!("cannot write {tmp:?}: {e}")))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::runtime(format!("cannot rename {tmp:?} to {path:?}: {e}")))
}

fn build_threshold_kind(cfg: &ExperimentConfig) -> Result<ThresholdKind, CliError> {
    let kind = require_str(&cfg.kind, "kind")?;
    let p = require(cfg.p, "p")?;
    match kind {
        "ising-easy" => Ok(ThresholdKind::IsingEasy {
            p,
            alpha: require(cfg.alpha, "alpha")?,
        }),
        "ising-clique" => Ok(ThresholdKind::IsingClique {
            p,
            d: require(cfg.d, "d")?,
            beta: require(cfg.beta, "beta")?,
        }),
        "gaussian" => Ok(ThresholdKind::Gaussian {
            p,
            gamma: require(cfg.gamma, "gamma")?,
        }),
        other => Err(CliError::validation(format!(
            "unknown bound kind {other:?}; expected ising-easy | ising-clique | gaussian"
        ))),
    }
}

fn build_ensemble(cfg: &ExperimentConfig) -> Result<ChangeEnsemble, CliError> {
    let kind = require_str(&cfg.kind, "kind")?;
    let p = require(cfg.p, "p")?;
    match kind {
        "ising-single-edge" => {
            let lambda = cfg.lambda.or(cfg.alpha);
            Ok(ising_single_edge_ensemble(
                p,
                require(lambda, "lambda (or alpha)")?,
            )?)
        }
        "ising-clique" => {
            let lambda = cfg.lambda.or(cfg.beta);
            Ok(ising_clique_ensemble(
                p,
                require(cfg.d, "d")?,
                require(lambda, "lambda (or beta)")?,
            )?)
        }
        "gaussian-single-edge" => {
            let lambda = cfg.lambda.or(cfg.gamma);
            Ok(gaussian_single_edge_ensemble(
                p,
                require(lambda, "lambda (or gamma)")?,
            )?)
        }
        other => Err(CliError::validation(format!(
            "unknown ensemble kind {other:?}; expected ising-single-edge | ising-clique | gaussian-single-edge"
        ))),
    }
}

fn cmd_bound(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let kind = build_threshold_kind(cfg)?;
    let delta = require(cfg.delta, "delta")?;
    let mode = parse_mode(cfg)?;
    let report = evaluate_bound(&kind, delta, mode, cfg.n)?;
    let format = parse_format(cfg, "json")?;
    let content = match format {
        "csv" => BoundReport::to_csv(std::slice::from_ref(&report)),
        _ => {
            let mut s = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::runtime(e.to_string()))?;
            s.push('\n');
            s
        }
    };
    emit(cfg.out.as_deref(), &content)
}

fn cmd_simulate(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let ensemble = build_ensemble(cfg)?;
    let n = require(cfg.n, "n")?;
    let trials = cfg.trials.unwrap_or(10_000);
    let seed = cfg.seed.unwrap_or(0);
    let report = simulate_risk(&ensemble, n, trials, seed)?;
    let format = parse_format(cfg, "csv")?;
    let content = match format {
        "json" => {
            let mut s = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::runtime(e.to_string()))?;
            s.push('\n');
            s
        }
        _ => RiskReport::to_csv(std::slice::from_ref(&report)),
    };
    emit(cfg.out.as_deref(), &content)
}

fn cmd_sweep(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let ensemble = build_ensemble(cfg)?;
    let n_list = cfg
        .n_list
        .clone()
        .ok_or_else(|| CliError::validation("missing required parameter --n-list"))?;
    if n_list.is_empty() {
        return Err(CliError::validation("--n-list must not be empty"));
    }
    let trials = cfg.trials.unwrap_or(10_000);
    let seed = cfg.seed.unwrap_or(0);
    let sweep = risk_vs_n_sweep(&ensemble, &n_list, trials, seed)?;
    let format = parse_format(cfg, "csv")?;
    let content = match format {
        "json" => {
            let body = serde_json::json!({
                "reports": sweep.reports,
                "smoothed_risk": sweep.smoothed_risk,
            });
            let mut s = serde_json::to_string_pretty(&body)
                .map_err(|e| CliError::runtime(e.to_string()))?;
            s.push('\n');
            s
        }
        _ => RiskReport::to_csv(&sweep.reports),
    };
    emit(cfg.out.as_deref(), &content)
}

fn cmd_verify(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let suite = cfg.suite.as_deref().unwrap_or("all");
    let outcomes = if suite == "all" {
        verify::run_all()?
    } else {
        vec![verify::run_suite(suite)?]
    };
    let mut failed = 0usize;
    for outcome in &outcomes {
        for check in outcome.failures() {
            println!("  FAIL {}: {}", check.name, check.detail);
        }
        let n_failed = outcome.failures().count();
        failed += n_failed;
        println!(
            "{} {} ({} checks)",
            if outcome.passed() { "PASS" } else { "FAIL" },
            outcome.suite,
            outcome.checks.len()
        );
    }
    if failed > 0 {
        Err(CliError::runtime(format!("{failed} checks failed")))
    } else {
        Ok(())
    }
}

fn cmd_plot(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let input = require_str(&cfg.input, "input")?;
    let out = require_str(&cfg.out, "out")?;
    let text = std::fs::read_to_string(input)
        .map_err(|e| CliError::runtime(format!("cannot read {input:?}: {e}")))?;
    let svg = match text.lines().next() {
        Some(h) if h == RiskReport::CSV_HEADER => {
            plot::risk_plot(&RiskReport::from_csv(&text)?).map_err(CliError::validation)?
        }
        Some(h) if h == BoundReport::CSV_HEADER => {
            plot::bound_plot(&BoundReport::from_csv(&text)?).map_err(CliError::validation)?
        }
        _ => {
            return Err(CliError::validation(
                "input is neither a risk nor a bound report CSV",
            ))
        }
    };
    write_atomic(Path::new(out), &svg)
}
