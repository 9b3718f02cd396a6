//! Game definitions: parameters, decision validation, payoff functions,
//! equilibrium anchors, primary metrics and Pareto proximity.
//!
//! Everything in this module is a pure function over value data.

mod anchors;
mod decision;
mod metric;
mod params;
mod payoff;

pub use anchors::{
    collective_risk_fair_share, equilibrium_anchors, oring_min_successful_withdrawal, pareto_proximity,
    EquilibriumAnchors,
};
pub use decision::{expected_variant, validate_decision, validate_sanction, Decision, Violation};
pub use metric::primary_metric;
pub use params::{GameKind, GameParams, GroupId, PlayerId};
pub use payoff::{
    apply_sanctions, payoff_collective_risk, payoff_cpr, payoff_oring, payoff_public_goods,
    payoff_weakest_link, RoundOutcome, SanctionMatrix,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GameError {
    #[error("unknown game {0:?}")]
    UnknownGame(String),
    #[error("malformed player id {0:?}")]
    BadPlayerId(String),
    #[error("invalid game parameters: {0}")]
    InvalidParams(String),
    #[error("expected {expected} players, got {got}")]
    WrongPlayerCount { expected: usize, got: usize },
    #[error("{player} chose {value}, outside [0, {max}]")]
    ActionOutOfRange { player: PlayerId, value: u32, max: u32 },
    #[error("{player}: expected a {expected} decision, got {got}")]
    WrongDecision { player: PlayerId, expected: &'static str, got: &'static str },
    #[error("{player}: {violation}")]
    InvalidDecision { player: PlayerId, violation: Violation },
    #[error("{from} cannot sanction {to}: not in the same group")]
    CrossGroupSanction { from: PlayerId, to: PlayerId },
    #[error("{0} cannot sanction themselves")]
    SelfSanction(PlayerId),
    #[error("contribution history has {got} rounds, expected {expected}")]
    IncompleteHistory { expected: usize, got: usize },
    #[error("no decisions to average")]
    EmptyMetric,
    #[error("{kind} metric cannot use a {got} decision")]
    MetricVariant { kind: GameKind, got: &'static str },
    #[error("{0} has no cooperative anchor distinct from Nash under these parameters")]
    NoCooperativeAnchor(GameKind),
}
