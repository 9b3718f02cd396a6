use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{GameKind, GameParams, PlayerId};

/// One player's action for one round (or one sanction phase).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Effort(u32),
    Extract(u32),
    /// Sanction units per target player.
    Sanction(BTreeMap<PlayerId, u32>),
    Contribute(u32),
    Withdraw(u32),
    Allocate { keep: u32, group: u32, global: u32 },
}

impl Decision {
    pub fn variant_name(&self) -> &'static str {
        match self {
            Decision::Effort(_) => "effort",
            Decision::Extract(_) => "extract",
            Decision::Sanction(_) => "sanction",
            Decision::Contribute(_) => "contribute",
            Decision::Withdraw(_) => "withdraw",
            Decision::Allocate { .. } => "allocate",
        }
    }

    /// The scalar averaged into the primary metric, if this variant carries one.
    pub fn metric_value(&self) -> Option<u32> {
        match *self {
            Decision::Effort(v)
            | Decision::Extract(v)
            | Decision::Contribute(v)
            | Decision::Withdraw(v) => Some(v),
            Decision::Allocate { group, .. } => Some(group),
            Decision::Sanction(_) => None,
        }
    }

    /// Compact JSON as an agent would emit it, e.g. `{"effort": 7}`.
    pub fn to_agent_json(&self) -> String {
        match self {
            Decision::Effort(v) => format!("{{\"effort\": {v}}}"),
            Decision::Extract(v) => format!("{{\"extract\": {v}}}"),
            Decision::Contribute(v) => format!("{{\"contribute\": {v}}}"),
            Decision::Withdraw(v) => format!("{{\"withdraw\": {v}}}"),
            Decision::Allocate { keep, group, global } => {
                format!("{{\"keep\": {keep}, \"group\": {group}, \"global\": {global}}}")
            }
            Decision::Sanction(targets) => {
                let body = targets
                    .iter()
                    .map(|(id, units)| format!("\"{id}\": {units}"))
                    .collect::<Vec<_>>()
                    .join(", ");
                format!("{{\"sanctions\": {{{body}}}}}")
            }
        }
    }
}

/// Why a decision is not admissible for a game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    #[error("wrong decision type: expected {expected}, got {got}")]
    WrongVariant { expected: String, got: String },
    #[error("{field} = {value} is outside [{min}, {max}]")]
    OutOfRange { field: String, value: i64, min: i64, max: i64 },
    #[error("allocation sums to {sum} but must equal exactly {endowment}")]
    AllocationSumMismatch { sum: i64, endowment: u32 },
    #[error("invalid sanction target {0}")]
    InvalidSanctionTarget(String),
}

/// Which decision a game expects during its main (non-sanction) phase.
pub fn expected_variant(kind: GameKind) -> &'static str {
    match kind {
        GameKind::WeakestLink => "effort",
        GameKind::Cpr | GameKind::CprSanction => "extract",
        GameKind::CollectiveRisk => "contribute",
        GameKind::ORing => "withdraw",
        GameKind::PublicGoods => "allocate",
    }
}

fn check_range(field: &str, value: u32, max: u32) -> Result<(), Violation> {
    if value > max {
        return Err(Violation::OutOfRange {
            field: field.to_string(),
            value: i64::from(value),
            min: 0,
            max: i64::from(max),
        });
    }
    Ok(())
}

/// Checks a main-phase decision against the game and its parameters.
///
/// Sanction decisions need to know who is sanctioning; use
/// [`validate_sanction`] for those.
pub fn validate_decision(kind: GameKind, d: &Decision, p: &GameParams) -> Result<(), Violation> {
    let e = p.endowment;
    match (kind, d) {
        (GameKind::WeakestLink, Decision::Effort(v)) => check_range("effort", *v, e),
        (GameKind::Cpr | GameKind::CprSanction, Decision::Extract(v)) => check_range("extract", *v, e),
        (GameKind::CollectiveRisk, Decision::Contribute(v)) => check_range("contribute", *v, e),
        (GameKind::ORing, Decision::Withdraw(v)) => check_range("withdraw", *v, e),
        (GameKind::PublicGoods, Decision::Allocate { keep, group, global }) => {
            let sum = i64::from(*keep) + i64::from(*group) + i64::from(*global);
            if sum != i64::from(e) {
                return Err(Violation::AllocationSumMismatch { sum, endowment: e });
            }
            Ok(())
        }
        _ => Err(Violation::WrongVariant {
            expected: expected_variant(kind).to_string(),
            got: d.variant_name().to_string(),
        }),
    }
}

/// Checks a sanction decision made by `sanctioner`.
///
/// Targets must be own-group members other than the sanctioner; units per
/// target are capped at the endowment.
pub fn validate_sanction(
    kind: GameKind,
    sanctioner: PlayerId,
    d: &Decision,
    p: &GameParams,
) -> Result<(), Violation> {
    let Decision::Sanction(targets) = d else {
        return Err(Violation::WrongVariant {
            expected: "sanction".to_string(),
            got: d.variant_name().to_string(),
        });
    };
    if kind != GameKind::CprSanction {
        return Err(Violation::WrongVariant {
            expected: expected_variant(kind).to_string(),
            got: "sanction".to_string(),
        });
    }
    for (&target, &units) in targets {
        if target == sanctioner || target.0 >= p.n_players() || !p.same_group(sanctioner, target) {
            return Err(Violation::InvalidSanctionTarget(target.to_string()));
        }
        check_range(&format!("sanctions.{target}"), units, p.endowment)?;
    }
    Ok(())
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_agent_json())
    }
}
