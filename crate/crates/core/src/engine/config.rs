use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agents::AgentSpec;
use crate::games::{GameKind, GameParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PromptVariant {
    /// Formal numbered-rules layout.
    #[default]
    Standard,
    /// Prose layout used for robustness checks.
    Alternate,
}

impl PromptVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            PromptVariant::Standard => "standard",
            PromptVariant::Alternate => "alternate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptStrategy {
    ChainOfThought,
    TheoryOfMind,
}

impl PromptStrategy {
    pub fn short(self) -> &'static str {
        match self {
            PromptStrategy::ChainOfThought => "cot",
            PromptStrategy::TheoryOfMind => "tom",
        }
    }
}

pub const DEFAULT_COT_INSTRUCTION: &str =
    "Think step by step about the payoffs before answering, then output only the JSON.";
pub const DEFAULT_TOM_INSTRUCTION: &str = "Before deciding, reason about what the other players \u{2014} in your group and the other group \u{2014} are likely to choose and why, then output only the JSON.";

/// Text of the optional prompting-strategy instructions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyTexts {
    pub chain_of_thought: String,
    pub theory_of_mind: String,
}

impl Default for StrategyTexts {
    fn default() -> Self {
        Self {
            chain_of_thought: DEFAULT_COT_INSTRUCTION.to_string(),
            theory_of_mind: DEFAULT_TOM_INSTRUCTION.to_string(),
        }
    }
}

/// Everything needed to run one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Label of the agent configuration under test (e.g. a model name).
    pub agent_label: String,
    /// Identifies the experimental condition this simulation belongs to.
    pub condition_key: String,
    pub sim_index: u32,
    pub game: GameKind,
    pub params: GameParams,
    #[serde(default)]
    pub prompt_variant: PromptVariant,
    #[serde(default)]
    pub strategy: BTreeSet<PromptStrategy>,
    #[serde(default)]
    pub strategy_texts: StrategyTexts,
    #[serde(default)]
    pub deliberation: bool,
    #[serde(default = "one")]
    pub deliberation_rounds: u32,
    pub seed: u64,
    /// One spec per player, in player order.
    pub agents: Vec<AgentSpec>,
    #[serde(default = "three")]
    pub max_parse_retries: u32,
}

fn one() -> u32 {
    1
}

fn three() -> u32 {
    3
}

impl SimulationConfig {
    /// A homogeneous roster with default settings; mostly for tests and tools.
    pub fn new(game: GameKind, params: GameParams, agent: AgentSpec, seed: u64) -> Self {
        let n = params.n_players();
        Self {
            agent_label: agent.label(),
            condition_key: String::new(),
            sim_index: 0,
            game,
            params,
            prompt_variant: PromptVariant::Standard,
            strategy: BTreeSet::new(),
            strategy_texts: StrategyTexts::default(),
            deliberation: false,
            deliberation_rounds: 1,
            seed,
            agents: vec![agent; n],
            max_parse_retries: 3,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.params.validate().map_err(|e| e.to_string())?;
        if self.agents.len() != self.params.n_players() {
            return Err(format!(
                "roster has {} agents but the game has {} players",
                self.agents.len(),
                self.params.n_players()
            ));
        }
        if self.deliberation && self.deliberation_rounds == 0 {
            return Err("deliberation_rounds must be positive".into());
        }
        for a in &self.agents {
            a.validate()?;
        }
        Ok(())
    }

    /// Short hex digest of the canonical JSON form of this config.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&json);
        hex::encode(&digest[..8])
    }
}
