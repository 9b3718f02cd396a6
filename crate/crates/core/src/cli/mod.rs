//! Command-line front end: manifests, sweep expansion, experiment execution
//! and report generation.

mod analyze;
mod manifest;
mod report;
mod run;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use analyze::{analyze_command, AnalyzeOptions, AnalyzeReport, ANALYSIS_DIR, OBSERVATIONS_FILE};
pub use manifest::{
    expand_sweep, stable_hash, strategy_label, AgentEntry, AgentMeta, ConvergenceOptions, RunManifest,
};
pub use report::{read_transcripts, ConvergenceRow};
pub use run::{
    run_experiment, ConditionStatus, RunSummary, CONVERGENCE_FILE, MANIFEST_ECHO_FILE, PROFILES_FILE,
    TRANSCRIPTS_FILE,
};

use crate::analysis::AnalysisError;
use crate::engine::BatchError;
use crate::games::{equilibrium_anchors, GameKind, GameParams};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error("group size {size} is not used for {game}; set allow_nonstandard_group_sizes to override")]
    GroupSizeNotAllowed { game: GameKind, size: usize },
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("{}:{line}: {detail}", path.display())]
    Corrupt { path: PathBuf, line: usize, detail: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {detail}", path.display())]
    Csv { path: PathBuf, detail: String },
    #[error(transparent)]
    Batch(#[from] BatchError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{0}")]
    Game(#[from] crate::games::GameError),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn csv(path: &Path, e: csv::Error) -> Self {
        CliError::Csv { path: path.to_path_buf(), detail: e.to_string() }
    }
}

#[derive(Debug, Parser)]
#[command(name = "coopgym", version, about = "Run and analyze cooperation benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every simulation of a manifest and write the results directory.
    Run { manifest: PathBuf },
    /// Recompute profiles from a results directory.
    Analyze {
        results_dir: PathBuf,
        /// Fit the proximity regression.
        #[arg(long)]
        ols: bool,
        /// Emit bootstrap convergence curves.
        #[arg(long)]
        convergence: bool,
        /// Add model-family dummy columns to the regression.
        #[arg(long)]
        family_dummies: bool,
    },
    /// Check a manifest and report the size of its sweep.
    Validate { manifest: PathBuf },
    /// Print the Nash and Pareto anchors of a game.
    Anchors {
        game: String,
        #[arg(long)]
        group_size: Option<usize>,
    },
}

fn load_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    RunManifest::from_json(&text)
}

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "n/a".into()
    } else {
        format!("{v:.4}")
    }
}

/// Executes a parsed command, printing to stdout. Returns the exit code.
pub fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { manifest } => {
            let m = load_manifest(&manifest)?;
            let echo = m.output_dir.join(MANIFEST_ECHO_FILE);
            if let (Ok(a), Ok(b)) = (manifest.canonicalize(), echo.canonicalize()) {
                if a == b {
                    return Err(CliError::Manifest(format!(
                        "{} would be overwritten by the run's manifest echo",
                        manifest.display()
                    )));
                }
            }
            let s = run_experiment(&m)?;
            for c in &s.conditions {
                println!("{}\t{}\t{}/{} completed", c.agent_label, c.condition_key, c.completed, c.total);
            }
            println!("{} simulations in {:.1}s -> {}", s.n_configs, s.wall_clock_secs, s.output_dir.display());
            if let (Some(p), Some(c)) = (s.usage.prompt_tokens, s.usage.completion_tokens) {
                println!("tokens: {p} prompt, {c} completion");
            }
            Ok(s.exit_code())
        }
        Command::Analyze { results_dir, ols, convergence, family_dummies } => {
            let r = analyze_command(&results_dir, AnalyzeOptions { ols, convergence, family_dummies })?;
            println!("agent\tcondition\tn\tmean\tsd\tse\tproximity\tparse_fail");
            for p in &r.profiles {
                println!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    p.agent_label,
                    p.condition_key,
                    p.n_sims,
                    fmt_num(p.metric_mean),
                    fmt_num(p.metric_sd),
                    fmt_num(p.metric_se),
                    fmt_num(p.pareto_proximity),
                    fmt_num(p.parse_failure_rate)
                );
            }
            if let Some(fit) = &r.regression {
                println!("\n{}", fit.method);
                for ((n, c), s) in fit.predictor_names.iter().zip(&fit.coefficients).zip(&fit.std_errors) {
                    println!("{n:<24}{:>12}{:>12}", fmt_num(*c), fmt_num(*s));
                }
                println!("R^2 = {}, n = {}", fmt_num(fit.r_squared), fit.n_obs);
                if !fit.aliased.is_empty() {
                    println!("aliased columns: {}", fit.aliased.join(", "));
                }
            }
            println!("\nreports written to {}", r.out_dir.display());
            Ok(0)
        }
        Command::Validate { manifest } => {
            let m = load_manifest(&manifest)?;
            let cfgs = expand_sweep(&m)?;
            let conditions = cfgs.iter().filter(|c| c.sim_index == 0).count();
            println!("ok: {} simulations across {conditions} conditions", cfgs.len());
            Ok(0)
        }
        Command::Anchors { game, group_size } => {
            let kind: GameKind = game.parse()?;
            let mut p = GameParams::for_game(kind);
            if let Some(k) = group_size {
                p = p.with_group_size(k);
            }
            p.validate()?;
            let a = equilibrium_anchors(kind, &p)?;
            println!("game: {kind}\ngroup_size: {}\nmetric: {}", p.group_size, kind.metric_name());
            println!("nash: {}\npareto: {}", a.nash_metric, a.pareto_metric);
            Ok(0)
        }
    }
}
