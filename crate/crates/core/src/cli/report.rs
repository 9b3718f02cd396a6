use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::manifest::{stable_hash, ConvergenceOptions};
use super::CliError;
use crate::agents::SimRng;
use crate::analysis::{aggregate_profile, bootstrap_convergence, ProfileRow};
use crate::engine::Transcript;
use crate::games::{equilibrium_anchors, EquilibriumAnchors, GameKind};
use rand::SeedableRng;

/// Transcripts of one (agent, condition), in arrival order.
#[derive(Debug, Clone)]
pub struct ConditionGroup {
    pub agent_label: String,
    pub condition_key: String,
    pub game: GameKind,
    pub transcripts: Vec<Transcript>,
}

impl ConditionGroup {
    pub fn completed(&self) -> usize {
        self.transcripts.iter().filter(|t| t.status.is_completed()).count()
    }

    /// Metrics of completed transcripts, in arrival order.
    pub fn metrics(&self) -> Vec<f64> {
        self.transcripts.iter().filter(|t| t.status.is_completed()).filter_map(|t| t.metric).collect()
    }
}

/// Groups transcripts by agent label and condition, keeping first-seen order.
pub fn group_conditions(transcripts: impl IntoIterator<Item = Transcript>) -> Vec<ConditionGroup> {
    let mut groups: Vec<ConditionGroup> = Vec::new();
    for t in transcripts {
        let pos = groups
            .iter()
            .position(|g| g.agent_label == t.config.agent_label && g.condition_key == t.config.condition_key);
        match pos {
            Some(i) => groups[i].transcripts.push(t),
            None => groups.push(ConditionGroup {
                agent_label: t.config.agent_label.clone(),
                condition_key: t.config.condition_key.clone(),
                game: t.config.game,
                transcripts: vec![t],
            }),
        }
    }
    groups
}

/// Profile rows for groups with at least one completed transcript.
/// Proximity is NaN when the game has no cooperative anchor.
pub fn profile_rows(groups: &[ConditionGroup]) -> Result<Vec<ProfileRow>, CliError> {
    let mut rows = Vec::new();
    for g in groups.iter().filter(|g| g.completed() > 0) {
        let params = &g.transcripts[0].config.params;
        let (anchors, known) = match equilibrium_anchors(g.game, params) {
            Ok(a) => (a, true),
            Err(_) => (EquilibriumAnchors { nash_metric: 0.0, pareto_metric: 1.0 }, false),
        };
        let mut row = aggregate_profile(&g.transcripts, &anchors)?;
        if !known {
            row.pareto_proximity = f64::NAN;
        }
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub agent_label: String,
    pub game: GameKind,
    pub condition_key: String,
    pub n_sims: usize,
    pub subset_size: usize,
    pub mean_error: f64,
    pub sd_error: f64,
    pub p95_error: f64,
    pub mean_error_sd_units: f64,
}

/// Bootstrap curves per condition. Sizes above the available simulation
/// count are skipped. Each condition has its own RNG seeded from its key, so
/// the output does not depend on which other conditions are present.
pub fn convergence_rows(groups: &[ConditionGroup], opts: &ConvergenceOptions) -> Result<Vec<ConvergenceRow>, CliError> {
    let mut out = Vec::new();
    for g in groups {
        let metrics = g.metrics();
        let sizes: Vec<usize> = opts.subset_sizes.iter().copied().filter(|&k| k <= metrics.len()).collect();
        if metrics.is_empty() || sizes.is_empty() {
            continue;
        }
        let mut rng = SimRng::seed_from_u64(stable_hash(&format!("convergence|{}|{}", g.agent_label, g.condition_key)));
        for p in bootstrap_convergence(&metrics, &sizes, opts.resamples, &mut rng)? {
            out.push(ConvergenceRow {
                agent_label: g.agent_label.clone(),
                game: g.game,
                condition_key: g.condition_key.clone(),
                n_sims: metrics.len(),
                subset_size: p.subset_size,
                mean_error: p.mean_error,
                sd_error: p.sd_error,
                p95_error: p.p95_error,
                mean_error_sd_units: p.mean_error_sd_units,
            });
        }
    }
    Ok(out)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::csv(path, e))?;
    let mut out = Vec::new();
    for (i, rec) in r.deserialize().enumerate() {
        out.push(rec.map_err(|e| CliError::Corrupt {
            path: path.to_path_buf(),
            line: e.position().map_or(i + 2, |p| p.line() as usize),
            detail: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Reads transcripts.jsonl, reporting the first bad line by number.
pub fn read_transcripts(path: &Path) -> Result<Vec<Transcript>, CliError> {
    let file = File::open(path).map_err(|_| CliError::MissingInput(path.display().to_string()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(Transcript::from_json_line(&line).map_err(|e| CliError::Corrupt {
            path: path.to_path_buf(),
            line: i + 1,
            detail: e.to_string(),
        })?);
    }
    if out.is_empty() {
        return Err(CliError::MissingInput(format!("{} contains no transcripts", path.display())));
    }
    Ok(out)
}
