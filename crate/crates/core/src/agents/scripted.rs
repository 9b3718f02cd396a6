use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Agent, AgentError, Query, Reply, SimRng};
use crate::engine::Phase;
use crate::games::{oring_min_successful_withdrawal, Decision, GameKind, GameParams, PlayerId};

/// Reference strategies with known cooperative profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScriptedStrategy {
    /// Always plays this value (group-pool amount in Public Goods).
    Constant(u32),
    UniformRandom,
    NashPlayer,
    ParetoPlayer,
    /// Pareto play, replaced by a uniform random action with probability epsilon.
    NoisyPareto(f64),
}

impl ScriptedStrategy {
    pub fn label(&self) -> String {
        match self {
            ScriptedStrategy::Constant(v) => format!("constant_{v}"),
            ScriptedStrategy::UniformRandom => "uniform_random".into(),
            ScriptedStrategy::NashPlayer => "nash_player".into(),
            ScriptedStrategy::ParetoPlayer => "pareto_player".into(),
            ScriptedStrategy::NoisyPareto(eps) => format!("noisy_pareto_{eps}"),
        }
    }
}

fn scalar(kind: GameKind, v: u32, p: &GameParams) -> Decision {
    let v = v.min(p.endowment);
    match kind {
        GameKind::WeakestLink => Decision::Effort(v),
        GameKind::Cpr | GameKind::CprSanction => Decision::Extract(v),
        GameKind::CollectiveRisk => Decision::Contribute(v),
        GameKind::ORing => Decision::Withdraw(v),
        GameKind::PublicGoods => Decision::Allocate { keep: p.endowment - v, group: v, global: 0 },
    }
}

fn nash(kind: GameKind, p: &GameParams) -> Decision {
    match kind {
        GameKind::Cpr | GameKind::CprSanction => Decision::Extract(p.endowment),
        GameKind::PublicGoods => Decision::Allocate { keep: p.endowment, group: 0, global: 0 },
        _ => scalar(kind, 0, p),
    }
}

/// Collective Risk share for `player` in `round` (1-based).
///
/// The threshold is spread over all player-round slots; the remainder goes
/// one unit at a time to the earliest slots, so the total hits T exactly.
fn collective_risk_share(p: &GameParams, player: PlayerId, round: u32) -> u32 {
    let slots = p.n_players() as u64 * u64::from(p.rounds);
    let t = u64::from(p.risk_threshold);
    let base = t / slots;
    let remainder = t % slots;
    let slot = u64::from(round.saturating_sub(1)) * p.n_players() as u64 + player.index() as u64;
    let share = base + u64::from(slot < remainder);
    share.min(u64::from(p.endowment)) as u32
}

fn pareto(kind: GameKind, p: &GameParams, player: PlayerId, round: u32) -> Decision {
    match kind {
        GameKind::WeakestLink => Decision::Effort(p.endowment),
        GameKind::Cpr | GameKind::CprSanction => Decision::Extract(0),
        GameKind::CollectiveRisk => Decision::Contribute(collective_risk_share(p, player, round)),
        GameKind::ORing => Decision::Withdraw(oring_min_successful_withdrawal(p).unwrap_or(p.endowment)),
        GameKind::PublicGoods => Decision::Allocate { keep: 0, group: p.endowment, global: 0 },
    }
}

fn uniform(kind: GameKind, p: &GameParams, rng: &mut SimRng) -> Decision {
    let e = p.endowment;
    if kind == GameKind::PublicGoods {
        // Uniform over all (keep, group, global) compositions of e.
        let count = (e + 1) * (e + 2) / 2;
        let mut idx = rng.random_range(0..count);
        for keep in 0..=e {
            let options = e - keep + 1;
            if idx < options {
                return Decision::Allocate { keep, group: idx, global: e - keep - idx };
            }
            idx -= options;
        }
        unreachable!("index within composition count");
    }
    scalar(kind, rng.random_range(0..=e), p)
}

fn over_extractors(query: &Query<'_>) -> Decision {
    let p = query.params;
    let extractions = query.extractions.unwrap_or(&[]);
    let targets: BTreeMap<PlayerId, u32> = p
        .group_members(p.group_of(query.player))
        .filter(|&id| id != query.player && extractions.get(id.index()).is_some_and(|&x| x > 0))
        .map(|id| (id, 1))
        .collect();
    Decision::Sanction(targets)
}

fn no_sanctions() -> Decision {
    Decision::Sanction(BTreeMap::new())
}

fn deliberation_message(strategy: ScriptedStrategy, kind: GameKind, p: &GameParams) -> String {
    match strategy {
        ScriptedStrategy::NashPlayer => "I will look after my own payoff this round.".into(),
        ScriptedStrategy::ParetoPlayer | ScriptedStrategy::NoisyPareto(_) => {
            format!("Let's all play {} so everyone ends up better off.", pareto(kind, p, PlayerId(0), 1))
        }
        ScriptedStrategy::Constant(v) => format!("I am going to play {}.", scalar(kind, v, p)),
        ScriptedStrategy::UniformRandom => "I have not decided yet.".into(),
    }
}

/// Text reply of a scripted strategy for one query.
///
/// Only `UniformRandom` and `NoisyPareto` with `0 < epsilon < 1` (or `= 1`)
/// consume randomness, so `NoisyPareto(0)` replays `ParetoPlayer` and
/// `NoisyPareto(1)` replays `UniformRandom` draw for draw.
pub fn scripted_decide(strategy: ScriptedStrategy, query: &Query<'_>, rng: &mut SimRng) -> String {
    let (kind, p) = (query.game, query.params);
    if query.phase == Phase::Deliberation {
        return deliberation_message(strategy, kind, p);
    }
    let noisy = match strategy {
        ScriptedStrategy::NoisyPareto(eps) if eps >= 1.0 => Some(true),
        ScriptedStrategy::NoisyPareto(eps) if eps <= 0.0 => Some(false),
        ScriptedStrategy::NoisyPareto(eps) => Some(rng.random::<f64>() < eps),
        _ => None,
    };
    let decision = if query.phase == Phase::Sanction {
        match (strategy, noisy) {
            (ScriptedStrategy::ParetoPlayer, _) | (ScriptedStrategy::NoisyPareto(_), Some(false)) => {
                over_extractors(query)
            }
            _ => no_sanctions(),
        }
    } else {
        match (strategy, noisy) {
            (ScriptedStrategy::Constant(v), _) => scalar(kind, v, p),
            (ScriptedStrategy::NashPlayer, _) => nash(kind, p),
            (ScriptedStrategy::ParetoPlayer, _) | (ScriptedStrategy::NoisyPareto(_), Some(false)) => {
                pareto(kind, p, query.player, query.round)
            }
            (ScriptedStrategy::UniformRandom, _) | (ScriptedStrategy::NoisyPareto(_), _) => uniform(kind, p, rng),
        }
    };
    decision.to_agent_json()
}

#[derive(Debug, Clone, Copy)]
pub struct ScriptedAgent {
    strategy: ScriptedStrategy,
}

impl ScriptedAgent {
    pub fn new(strategy: ScriptedStrategy) -> Self {
        Self { strategy }
    }
}

impl Agent for ScriptedAgent {
    fn respond(&self, query: &Query<'_>, rng: &mut SimRng) -> Result<Reply, AgentError> {
        Ok(Reply::text(scripted_decide(self.strategy, query, rng)))
    }
}
