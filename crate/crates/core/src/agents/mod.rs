//! Decision-making backends.
//!
//! Scripted strategies play the equilibrium anchors (or seeded noise around
//! them) and are used for calibration and tests. [`LlmAgent`] speaks the
//! chat-completions wire protocol.

mod llm;
mod scripted;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use llm::{llm_complete, LlmAgent, LlmError, LlmSpec, DEFAULT_API_KEY_ENV};
pub use scripted::{scripted_decide, ScriptedAgent, ScriptedStrategy};

use crate::engine::{Phase, TokenUsage};
use crate::games::{GameKind, GameParams, PlayerId};

/// Random stream handed to agents; one independent stream per player.
pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

/// Describes how to build a player's agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentSpec {
    Scripted(ScriptedStrategy),
    Llm(LlmSpec),
}

impl AgentSpec {
    /// Human-readable label, e.g. `pareto_player` or the model name.
    pub fn label(&self) -> String {
        match self {
            AgentSpec::Scripted(s) => s.label(),
            AgentSpec::Llm(spec) => spec.model_name.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            AgentSpec::Scripted(ScriptedStrategy::NoisyPareto(eps)) if !(0.0..=1.0).contains(eps) => {
                Err(format!("noisy_pareto epsilon {eps} is outside [0, 1]"))
            }
            AgentSpec::Scripted(_) => Ok(()),
            AgentSpec::Llm(spec) => spec.validate(),
        }
    }

    pub fn build(&self) -> Box<dyn Agent> {
        match self {
            AgentSpec::Scripted(s) => Box::new(ScriptedAgent::new(*s)),
            AgentSpec::Llm(spec) => Box::new(LlmAgent::new(spec.clone())),
        }
    }
}

/// Everything an agent is told about one query.
///
/// LLM agents only read `messages`; scripted agents read the structured
/// fields, which carry exactly the information rendered into the prompt.
#[derive(Debug, Clone, Copy)]
pub struct Query<'a> {
    pub game: GameKind,
    pub params: &'a GameParams,
    pub player: PlayerId,
    pub round: u32,
    pub phase: Phase,
    /// Zero for the first attempt, incremented on each parse retry.
    pub attempt: u32,
    pub messages: &'a [ChatMessage],
    /// Phase-1 extractions of all players, during the sanction phase.
    pub extractions: Option<&'a [u32]>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Reply {
    pub text: String,
    pub usage: TokenUsage,
}

impl Reply {
    pub fn text(text: impl Into<String>) -> Self {
        Self { text: text.into(), usage: TokenUsage::default() }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AgentError {
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("{0}")]
    Other(String),
}

/// A player backend. Implementations must tolerate concurrent use across
/// simulations; the engine never issues two queries for the same player at
/// once.
pub trait Agent: Send + Sync {
    fn respond(&self, query: &Query<'_>, rng: &mut SimRng) -> Result<Reply, AgentError>;
}

impl<F> Agent for F
where
    F: Fn(&Query<'_>, &mut SimRng) -> Result<Reply, AgentError> + Send + Sync,
{
    fn respond(&self, query: &Query<'_>, rng: &mut SimRng) -> Result<Reply, AgentError> {
        self(query, rng)
    }
}
