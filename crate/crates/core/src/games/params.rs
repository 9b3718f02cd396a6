use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::GameError;

/// The six games of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameKind {
    WeakestLink,
    Cpr,
    CprSanction,
    CollectiveRisk,
    #[serde(rename = "oring")]
    ORing,
    PublicGoods,
}

impl GameKind {
    pub const ALL: [GameKind; 6] = [
        GameKind::WeakestLink,
        GameKind::Cpr,
        GameKind::CprSanction,
        GameKind::CollectiveRisk,
        GameKind::ORing,
        GameKind::PublicGoods,
    ];

    /// Stable snake_case identifier used in files and on the command line.
    pub fn as_str(self) -> &'static str {
        match self {
            GameKind::WeakestLink => "weakest_link",
            GameKind::Cpr => "cpr",
            GameKind::CprSanction => "cpr_sanction",
            GameKind::CollectiveRisk => "collective_risk",
            GameKind::ORing => "oring",
            GameKind::PublicGoods => "public_goods",
        }
    }

    /// Group sizes swept for each game; both groups always share the size.
    pub fn allowed_group_sizes(self) -> &'static [usize] {
        match self {
            GameKind::WeakestLink | GameKind::CollectiveRisk | GameKind::Cpr => &[3, 5, 8, 10],
            GameKind::ORing => &[3, 5, 8],
            GameKind::PublicGoods => &[3, 4, 5, 8, 10],
            GameKind::CprSanction => &[5],
        }
    }

    /// Name of the per-round quantity averaged into the primary metric.
    pub fn metric_name(self) -> &'static str {
        match self {
            GameKind::WeakestLink => "effort",
            GameKind::Cpr | GameKind::CprSanction => "extraction",
            GameKind::CollectiveRisk => "contribution",
            GameKind::ORing => "withdrawal",
            GameKind::PublicGoods => "group_contribution",
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GameKind {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' ', '+'], "_");
        Ok(match norm.as_str() {
            "weakest_link" | "wl" => GameKind::WeakestLink,
            "cpr" => GameKind::Cpr,
            "cpr_sanction" | "cpr_sanctioning" | "cpr_with_sanction" => GameKind::CprSanction,
            "collective_risk" | "collrisk" => GameKind::CollectiveRisk,
            "oring" | "o_ring" => GameKind::ORing,
            "public_goods" | "pg" => GameKind::PublicGoods,
            _ => return Err(GameError::UnknownGame(s.to_string())),
        })
    }
}

/// Zero-based player index. Rendered as `player_1..player_N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlayerId(pub usize);

impl PlayerId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "player_{}", self.0 + 1)
    }
}

impl FromStr for PlayerId {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .strip_prefix("player_")
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| n >= 1)
            .map(|n| PlayerId(n - 1))
            .ok_or_else(|| GameError::BadPlayerId(s.to_string()))
    }
}

impl Serialize for PlayerId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PlayerId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Zero-based group index. Rendered as `group_1..group_K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupId(pub usize);

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "group_{}", self.0 + 1)
    }
}

/// Every numeric constant of a game instance.
///
/// Players are laid out group-major: players `0..group_size` form group 1,
/// the next `group_size` form group 2, and so on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GameParams {
    pub group_count: usize,
    pub group_size: usize,
    pub rounds: u32,
    pub endowment: u32,
    pub cpr_capacity: u32,
    pub cpr_factor: f64,
    pub sanction_cost: f64,
    pub sanction_damage: f64,
    pub risk_threshold: u32,
    pub risk_probability: f64,
    pub oring_pool: u32,
    pub oring_scale: f64,
    pub oring_success_threshold: f64,
    pub oring_reward: f64,
    pub pg_group_multiplier: f64,
    pub pg_global_multiplier: f64,
}

impl Default for GameParams {
    fn default() -> Self {
        Self {
            group_count: 2,
            group_size: 5,
            rounds: 3,
            endowment: 10,
            cpr_capacity: 100,
            cpr_factor: 3.0,
            sanction_cost: 1.0,
            sanction_damage: 2.0,
            risk_threshold: 100,
            risk_probability: 0.5,
            oring_pool: 200,
            oring_scale: 1000.0,
            oring_success_threshold: 50.0,
            oring_reward: 200.0,
            pg_group_multiplier: 2.0,
            pg_global_multiplier: 1.5,
        }
    }
}

impl GameParams {
    /// Defaults for `kind`; Collective Risk runs 10 rounds.
    pub fn for_game(kind: GameKind) -> Self {
        let mut p = Self::default();
        if kind == GameKind::CollectiveRisk {
            p.rounds = 10;
        }
        p
    }

    pub fn with_group_size(mut self, group_size: usize) -> Self {
        self.group_size = group_size;
        self
    }

    /// Total player count N.
    pub fn n_players(&self) -> usize {
        self.group_count * self.group_size
    }

    pub fn group_of(&self, player: PlayerId) -> GroupId {
        GroupId(player.0 / self.group_size.max(1))
    }

    pub fn group_members(&self, group: GroupId) -> impl Iterator<Item = PlayerId> {
        let start = group.0 * self.group_size;
        (start..start + self.group_size).map(PlayerId)
    }

    pub fn same_group(&self, a: PlayerId, b: PlayerId) -> bool {
        self.group_of(a) == self.group_of(b)
    }

    pub fn players(&self) -> impl Iterator<Item = PlayerId> {
        (0..self.n_players()).map(PlayerId)
    }

    pub fn validate(&self) -> Result<(), GameError> {
        let bad = |what: &str| Err(GameError::InvalidParams(what.to_string()));
        if self.group_count == 0 || self.group_size == 0 {
            return bad("group_count and group_size must be positive");
        }
        if self.n_players() < 2 {
            return bad("at least two players are required");
        }
        if self.rounds == 0 {
            return bad("rounds must be positive");
        }
        if self.endowment == 0 {
            return bad("endowment must be positive");
        }
        if self.cpr_capacity == 0 || self.oring_pool == 0 || self.risk_threshold == 0 {
            return bad("pools and thresholds must be positive");
        }
        let positive = [
            ("cpr_factor", self.cpr_factor),
            ("sanction_cost", self.sanction_cost),
            ("sanction_damage", self.sanction_damage),
            ("oring_scale", self.oring_scale),
            ("oring_success_threshold", self.oring_success_threshold),
            ("oring_reward", self.oring_reward),
            ("pg_group_multiplier", self.pg_group_multiplier),
            ("pg_global_multiplier", self.pg_global_multiplier),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(GameError::InvalidParams(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.risk_probability) {
            return bad("risk_probability must lie in [0, 1]");
        }
        Ok(())
    }
}
