use serde::{Deserialize, Serialize};

use super::{mean_sd, AnalysisError};
use crate::engine::{SimulationStatus, Transcript};
use crate::games::{pareto_proximity, EquilibriumAnchors, GameKind};

/// Aggregate of one agent configuration on one game condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub agent_label: String,
    pub game: GameKind,
    pub condition_key: String,
    /// Completed transcripts only.
    pub n_sims: usize,
    pub metric_mean: f64,
    pub metric_sd: f64,
    pub metric_se: f64,
    pub pareto_proximity: f64,
    /// Share of all transcripts that ended in a parse failure.
    pub parse_failure_rate: f64,
}

/// Summarizes transcripts of a single (agent, game, condition).
///
/// Metrics are sorted before summation so the result does not depend on
/// transcript order.
pub fn aggregate_profile(transcripts: &[Transcript], anchors: &EquilibriumAnchors) -> Result<ProfileRow, AnalysisError> {
    let first = transcripts.first().ok_or(AnalysisError::NoCompletedTranscripts)?;
    let key = |t: &Transcript| (t.config.agent_label.clone(), t.config.game, t.config.condition_key.clone());
    let k0 = key(first);
    if let Some(other) = transcripts.iter().find(|t| key(t) != k0) {
        return Err(AnalysisError::MixedTranscripts(format!(
            "{}/{}/{} vs {}/{}/{}",
            k0.0, k0.1, k0.2, other.config.agent_label, other.config.game, other.config.condition_key
        )));
    }
    let mut metrics: Vec<f64> = transcripts
        .iter()
        .filter(|t| t.status.is_completed())
        .filter_map(|t| t.metric)
        .collect();
    if metrics.is_empty() {
        return Err(AnalysisError::NoCompletedTranscripts);
    }
    metrics.sort_by(f64::total_cmp);
    let (m, sd) = mean_sd(&metrics);
    let n = metrics.len();
    let failed = transcripts.iter().filter(|t| matches!(t.status, SimulationStatus::ParseFailed { .. })).count();
    Ok(ProfileRow {
        agent_label: k0.0,
        game: k0.1,
        condition_key: k0.2,
        n_sims: n,
        metric_mean: m,
        metric_sd: sd,
        metric_se: sd / (n as f64).sqrt(),
        pareto_proximity: pareto_proximity(m, anchors),
        parse_failure_rate: failed as f64 / transcripts.len() as f64,
    })
}
