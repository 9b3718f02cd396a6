use serde::{Deserialize, Serialize};

use super::SimulationConfig;
use crate::games::{Decision, PlayerId, RoundOutcome, SanctionMatrix};

/// Version tag written at the top level of every serialized transcript.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Deliberation,
    Decision,
    Sanction,
}

/// One agent query and every raw reply it produced (first attempt plus retries).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub round: u32,
    pub phase: Phase,
    pub player: PlayerId,
    /// User-message text of the first attempt.
    pub prompt: String,
    pub raw_responses: Vec<String>,
    /// Parse errors that triggered each retry, in order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeliberationMessage {
    pub round: u32,
    pub turn: u32,
    pub player: PlayerId,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u32,
    /// Main-phase decisions in player order.
    pub decisions: Vec<Decision>,
    /// Extraction-phase outcome before sanctions (CPR with sanctioning only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase1_outcome: Option<RoundOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sanctions: Option<SanctionMatrix>,
    pub outcome: RoundOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum SimulationStatus {
    Completed,
    ParseFailed { player: PlayerId, round: u32, phase: Phase },
    AgentError { player: PlayerId, round: u32, detail: String },
    /// The configuration or roster was rejected before play started.
    InvalidConfig { detail: String },
}

impl SimulationStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, SimulationStatus::Completed)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: Option<u64>,
    pub completion_tokens: Option<u64>,
}

impl TokenUsage {
    pub fn add(&mut self, other: &TokenUsage) {
        fn sum(a: Option<u64>, b: Option<u64>) -> Option<u64> {
            match (a, b) {
                (None, None) => None,
                (a, b) => Some(a.unwrap_or(0) + b.unwrap_or(0)),
            }
        }
        self.prompt_tokens = sum(self.prompt_tokens, other.prompt_tokens);
        self.completion_tokens = sum(self.completion_tokens, other.completion_tokens);
    }
}

/// Complete record of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub schema_version: u32,
    pub config_hash: String,
    pub config: SimulationConfig,
    /// System prompt of each player, in player order.
    pub system_prompts: Vec<String>,
    pub queries: Vec<QueryRecord>,
    pub deliberation_log: Vec<DeliberationMessage>,
    pub rounds: Vec<RoundRecord>,
    /// The single uniform draw deciding the Collective Risk loss event.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_draw: Option<f64>,
    pub status: SimulationStatus,
    pub metric: Option<f64>,
    pub usage: TokenUsage,
}

#[derive(Debug, thiserror::Error)]
pub enum TranscriptDecodeError {
    #[error("invalid transcript JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing schema_version")]
    MissingVersion,
    #[error("unsupported transcript schema_version {0}")]
    UnsupportedVersion(u64),
}

impl Transcript {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("transcript serializes")
    }

    /// Parses one JSONL line, rejecting unknown schema versions.
    pub fn from_json_line(line: &str) -> Result<Self, TranscriptDecodeError> {
        let value: serde_json::Value = serde_json::from_str(line)?;
        let version = value
            .get("schema_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or(TranscriptDecodeError::MissingVersion)?;
        if version != u64::from(SCHEMA_VERSION) {
            return Err(TranscriptDecodeError::UnsupportedVersion(version));
        }
        Ok(serde_json::from_value(value)?)
    }

    /// Main-phase decisions of every recorded round.
    pub fn decisions(&self) -> Vec<&[Decision]> {
        self.rounds.iter().map(|r| r.decisions.as_slice()).collect()
    }

    /// Number of raw responses recorded for `player` in `round` and `phase`.
    pub fn attempts(&self, player: PlayerId, round: u32, phase: Phase) -> usize {
        self.queries
            .iter()
            .filter(|q| q.player == player && q.round == round && q.phase == phase)
            .map(|q| q.raw_responses.len())
            .sum()
    }
}
