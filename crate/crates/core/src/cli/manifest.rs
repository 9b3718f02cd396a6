use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::CliError;
use crate::agents::AgentSpec;
use crate::analysis::{DEFAULT_RESAMPLES, DEFAULT_SUBSET_SIZES};
use crate::engine::{PromptStrategy, PromptVariant, SimulationConfig, StrategyTexts};
use crate::games::{GameKind, GameParams};

/// Descriptive attributes used as regression predictors.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentMeta {
    /// Parameter count in billions.
    pub size_b: Option<f64>,
    pub thinking: bool,
    pub family: Option<String>,
}

/// One agent configuration; every player of its simulations uses `spec`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentEntry {
    pub label: String,
    pub spec: AgentSpec,
    #[serde(default)]
    pub meta: AgentMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceOptions {
    pub subset_sizes: Vec<usize>,
    pub resamples: usize,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        Self { subset_sizes: DEFAULT_SUBSET_SIZES.to_vec(), resamples: DEFAULT_RESAMPLES }
    }
}

/// Experiment description read from a single JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub experiment_name: String,
    #[serde(default)]
    pub base_seed: u64,
    pub games: Vec<GameKind>,
    /// Group sizes per game; games not listed use 5.
    #[serde(default)]
    pub group_sizes: BTreeMap<GameKind, Vec<usize>>,
    #[serde(default = "default_variants")]
    pub prompt_variants: Vec<PromptVariant>,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<BTreeSet<PromptStrategy>>,
    #[serde(default)]
    pub strategy_texts: StrategyTexts,
    #[serde(default)]
    pub deliberation: bool,
    #[serde(default = "one")]
    pub deliberation_rounds: u32,
    #[serde(default = "fifty")]
    pub sims_per_condition: u32,
    pub agents: Vec<AgentEntry>,
    /// Partial `GameParams` objects merged over each game's defaults.
    #[serde(default)]
    pub param_overrides: BTreeMap<GameKind, Value>,
    #[serde(default = "one_usize")]
    pub parallelism: usize,
    #[serde(default = "three")]
    pub max_parse_retries: u32,
    pub output_dir: PathBuf,
    /// Permits group sizes outside each game's standard list.
    #[serde(default)]
    pub allow_nonstandard_group_sizes: bool,
    /// Writes convergence.csv when present.
    #[serde(default)]
    pub convergence: Option<ConvergenceOptions>,
}

fn default_variants() -> Vec<PromptVariant> {
    vec![PromptVariant::Standard]
}
fn default_strategies() -> Vec<BTreeSet<PromptStrategy>> {
    vec![BTreeSet::new()]
}
fn one() -> u32 {
    1
}
fn one_usize() -> usize {
    1
}
fn three() -> u32 {
    3
}
fn fifty() -> u32 {
    50
}

const DEFAULT_GROUP_SIZE: usize = 5;
const GROUP_COUNT: usize = 2;

impl RunManifest {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Manifest(format!("line {}: {e}", e.line())))
    }

    pub fn group_sizes_for(&self, game: GameKind) -> Vec<usize> {
        self.group_sizes.get(&game).cloned().unwrap_or_else(|| vec![DEFAULT_GROUP_SIZE])
    }

    /// Game parameters for one condition, overrides applied.
    pub fn params_for(&self, game: GameKind, group_size: usize) -> Result<GameParams, CliError> {
        let mut base = serde_json::to_value(GameParams::for_game(game)).expect("params serialize");
        if let Some(over) = self.param_overrides.get(&game) {
            let Value::Object(fields) = over else {
                return Err(CliError::Manifest(format!("param_overrides.{game} must be an object")));
            };
            let obj = base.as_object_mut().expect("params are an object");
            for (k, v) in fields {
                obj.insert(k.clone(), v.clone());
            }
        }
        let mut p: GameParams = serde_json::from_value(base)
            .map_err(|e| CliError::Manifest(format!("param_overrides.{game}: {e}")))?;
        p.group_count = GROUP_COUNT;
        p = p.with_group_size(group_size);
        p.validate().map_err(|e| CliError::Manifest(format!("{game} with group size {group_size}: {e}")))?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Manifest(m));
        if self.games.is_empty() {
            return bad("games is empty".into());
        }
        if self.agents.is_empty() {
            return bad("agents is empty".into());
        }
        if self.sims_per_condition == 0 {
            return bad("sims_per_condition must be positive".into());
        }
        if self.parallelism == 0 {
            return bad("parallelism must be positive".into());
        }
        if self.prompt_variants.is_empty() || self.strategies.is_empty() {
            return bad("prompt_variants and strategies must be non-empty".into());
        }
        if self.deliberation && self.deliberation_rounds == 0 {
            return bad("deliberation_rounds must be positive".into());
        }
        let mut labels = HashSet::new();
        for a in &self.agents {
            if a.label.trim().is_empty() || !labels.insert(a.label.as_str()) {
                return bad(format!("agent label {:?} is empty or duplicated", a.label));
            }
            a.spec.validate().map_err(|e| CliError::Manifest(format!("agent {}: {e}", a.label)))?;
        }
        for game in self.group_sizes.keys().chain(self.param_overrides.keys()) {
            if !self.games.contains(game) {
                return bad(format!("settings given for {game}, which is not in games"));
            }
        }
        for &game in &self.games {
            let sizes = self.group_sizes_for(game);
            if sizes.is_empty() {
                return bad(format!("no group sizes for {game}"));
            }
            for size in sizes {
                if !self.allow_nonstandard_group_sizes && !game.allowed_group_sizes().contains(&size) {
                    return Err(CliError::GroupSizeNotAllowed { game, size });
                }
                self.params_for(game, size)?;
            }
        }
        if let Some(c) = &self.convergence {
            if c.resamples == 0 || c.subset_sizes.contains(&0) {
                return bad("convergence resamples and subset sizes must be positive".into());
            }
        }
        Ok(())
    }
}

/// Label of a strategy set, e.g. `baseline` or `cot+tom`.
pub fn strategy_label(set: &BTreeSet<PromptStrategy>) -> String {
    if set.is_empty() {
        "baseline".into()
    } else {
        set.iter().map(|s| s.short()).collect::<Vec<_>>().join("+")
    }
}

/// Stable 64-bit hash of a string.
pub fn stable_hash(s: &str) -> u64 {
    let d = Sha256::digest(s.as_bytes());
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}

/// One config per agent × game × group size × variant × strategy set × sim,
/// in manifest order.
///
/// Seeds depend on the condition but not on the agent, so agents in the same
/// condition face identical random streams.
pub fn expand_sweep(m: &RunManifest) -> Result<Vec<SimulationConfig>, CliError> {
    m.validate()?;
    let mut out = Vec::new();
    for agent in &m.agents {
        for &game in &m.games {
            for size in m.group_sizes_for(game) {
                let params = m.params_for(game, size)?;
                for &variant in &m.prompt_variants {
                    for strategy in &m.strategies {
                        let condition = format!("{game}|size{size}|{}|{}", variant.as_str(), strategy_label(strategy));
                        let base = m.base_seed.wrapping_add(stable_hash(&condition));
                        for sim in 0..m.sims_per_condition {
                            let mut cfg = SimulationConfig::new(
                                game,
                                params.clone(),
                                agent.spec.clone(),
                                base.wrapping_add(u64::from(sim)),
                            );
                            cfg.agent_label = agent.label.clone();
                            cfg.condition_key = condition.clone();
                            cfg.sim_index = sim;
                            cfg.prompt_variant = variant;
                            cfg.strategy = strategy.clone();
                            cfg.strategy_texts = m.strategy_texts.clone();
                            cfg.deliberation = m.deliberation;
                            cfg.deliberation_rounds = m.deliberation_rounds;
                            cfg.max_parse_retries = m.max_parse_retries;
                            out.push(cfg);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}
