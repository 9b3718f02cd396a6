use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use super::manifest::{expand_sweep, RunManifest};
use super::report::{convergence_rows, group_conditions, profile_rows, write_csv};
use super::CliError;
use crate::engine::{run_batch_streaming, SpecFactory, TokenUsage, Transcript, SCHEMA_VERSION};

pub const TRANSCRIPTS_FILE: &str = "transcripts.jsonl";
pub const PROFILES_FILE: &str = "profiles.csv";
pub const CONVERGENCE_FILE: &str = "convergence.csv";
pub const MANIFEST_ECHO_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionStatus {
    pub agent_label: String,
    pub condition_key: String,
    pub completed: usize,
    pub total: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub n_configs: usize,
    pub conditions: Vec<ConditionStatus>,
    pub usage: TokenUsage,
    pub wall_clock_secs: f64,
}

impl RunSummary {
    /// True when every condition produced at least one completed transcript.
    pub fn all_conditions_completed(&self) -> bool {
        self.conditions.iter().all(|c| c.completed > 0)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_conditions_completed() {
            0
        } else {
            1
        }
    }
}

#[derive(Serialize)]
struct ManifestEcho<'a> {
    artifact: &'static str,
    version: &'static str,
    schema_version: u32,
    manifest: &'a RunManifest,
    n_configs: usize,
    wall_clock_secs: f64,
    token_usage: &'a TokenUsage,
    conditions: &'a [ConditionStatus],
}

/// Drops the bulky prompt and reply text once a transcript has been written.
fn slim(mut t: Transcript) -> Transcript {
    t.system_prompts.clear();
    t.queries.clear();
    t.deliberation_log.clear();
    t
}

/// Expands the sweep, runs it and writes every artifact into `output_dir`.
pub fn run_experiment(m: &RunManifest) -> Result<RunSummary, CliError> {
    let started = Instant::now();
    let configs = expand_sweep(m)?;
    let dir = &m.output_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;

    let path = dir.join(TRANSCRIPTS_FILE);
    let mut out = BufWriter::new(File::create(&path).map_err(|e| CliError::io(&path, e))?);
    let mut kept = Vec::with_capacity(configs.len());
    let mut usage = TokenUsage::default();
    let mut write_err = None;
    run_batch_streaming(&configs, m.parallelism, &SpecFactory, |_, t| {
        if write_err.is_none() {
            if let Err(e) = writeln!(out, "{}", t.to_json_line()) {
                write_err = Some(e);
            }
        }
        usage.add(&t.usage);
        kept.push(slim(t));
    })?;
    if let Some(e) = write_err {
        return Err(CliError::io(&path, e));
    }
    out.flush().map_err(|e| CliError::io(&path, e))?;

    let groups = group_conditions(kept);
    write_csv(&dir.join(PROFILES_FILE), &profile_rows(&groups)?)?;
    if let Some(opts) = &m.convergence {
        write_csv(&dir.join(CONVERGENCE_FILE), &convergence_rows(&groups, opts)?)?;
    }

    let conditions: Vec<ConditionStatus> = groups
        .iter()
        .map(|g| ConditionStatus {
            agent_label: g.agent_label.clone(),
            condition_key: g.condition_key.clone(),
            completed: g.completed(),
            total: g.transcripts.len(),
        })
        .collect();
    let wall_clock_secs = started.elapsed().as_secs_f64();
    let echo = ManifestEcho {
        artifact: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        schema_version: SCHEMA_VERSION,
        manifest: m,
        n_configs: configs.len(),
        wall_clock_secs,
        token_usage: &usage,
        conditions: &conditions,
    };
    let echo_path = dir.join(MANIFEST_ECHO_FILE);
    let text = serde_json::to_string_pretty(&echo).expect("echo serializes");
    fs::write(&echo_path, text + "\n").map_err(|e| CliError::io(&echo_path, e))?;

    Ok(RunSummary { output_dir: dir.clone(), n_configs: configs.len(), conditions, usage, wall_clock_secs })
}
