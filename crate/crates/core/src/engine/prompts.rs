//! Prompt assembly for system, decision, deliberation and sanction queries.
//!
//! Numbers are rendered from the live [`GameParams`], so descriptions stay
//! truthful under group-size and payoff sweeps.

use std::fmt::Write as _;

use super::{DeliberationMessage, PromptStrategy, PromptVariant, RoundRecord, SimulationConfig};
use crate::games::{Decision, GameKind, GameParams, GroupId, PlayerId, RoundOutcome};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("deliberation is disabled for this simulation")]
    DeliberationDisabled,
    #[error("sanction prompts only exist for cpr_sanction, not {0}")]
    WrongGame(GameKind),
    #[error("round {round} is outside 1..={rounds}")]
    RoundOutOfRange { round: u32, rounds: u32 },
}

/// What a player is allowed to see when a prompt is built.
#[derive(Debug, Clone, Copy)]
pub struct PromptState<'a> {
    pub player: PlayerId,
    /// Completed rounds, oldest first.
    pub history: &'a [RoundRecord],
    /// Full deliberation log; builders filter it to the player's group.
    pub deliberation_log: &'a [DeliberationMessage],
}

const RETRY_SUFFIX: &str = "Respond again with ONLY the required JSON.";

/// Follow-up message sent after an unusable reply.
pub fn retry_message(error: &str) -> String {
    format!("Your previous response could not be used: {error}. {RETRY_SUFFIX}")
}

/// `3.0`, `1.5`, `1000.0` style for multipliers.
fn mult(v: f64) -> String {
    format!("{v:?}")
}

/// Integers without a fractional part, everything else as-is.
fn plain(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn tokens(v: f64) -> String {
    format!("{v:.2}")
}

fn percent(p: f64) -> String {
    plain((p * 1000.0).round() / 10.0)
}

/// Game rules block shown inside the system prompt.
pub fn game_description(kind: GameKind, variant: PromptVariant, p: &GameParams) -> String {
    let n = p.n_players();
    let g = p.group_count;
    let s = p.group_size;
    let e = p.endowment;
    match (kind, variant) {
        (GameKind::WeakestLink, PromptVariant::Standard) => format!(
            "Weakest-Link (Minimum-Effort) Coordination Game.\n\n\
             There are {g} groups of {s} players each ({n} players total).\n\
             Each player independently chooses an effort level from 0 to {e}.\n\n\
             Your payoff depends on two things:\n\
             1. The MINIMUM effort chosen across ALL {n} players (the 'weakest link')\n\
             2. Your own effort level\n\n\
             Payoff = 2 x (minimum effort across all players) - 1 x (your effort)\n\n\
             Higher effort is rewarded only if EVERYONE else also chooses high effort. If anyone chooses low effort, the minimum drops and high-effort players lose out.\n\
             The best outcome for everyone is if all players choose {e}, but this requires trusting that no one will choose lower."
        ),
        (GameKind::WeakestLink, PromptVariant::Alternate) => format!(
            "You are participating in a coordination activity with {others} other participants, organized into {g} groups of {s}.\n\n\
             Each participant selects an effort level between 0 and {e}. The key feature of this activity is that everyone's outcome depends on the lowest effort chosen by any single participant across all groups. This represents a 'weakest link' \u{2014} the group is only as strong as its least contributing member.\n\n\
             Your earnings are calculated as 2 times the lowest effort chosen by anyone, minus 1 times your own effort. Choosing high effort is beneficial when others do the same, but costly if someone else chooses low effort. The challenge is coordinating on a high effort level when you cannot be certain what others will choose.",
            others = n - 1
        ),
        (GameKind::Cpr, PromptVariant::Standard) => format!(
            "Common-Pool Resource Game.\n\n\
             There is a shared resource pool with {c} tokens.\n\
             Each player can extract between 0 and {e} tokens from the pool.\n\
             After all extractions, the remaining pool is multiplied by {f} (sustainability factor) and split equally among all {n} players.\n\n\
             Your payoff = tokens you extracted + your share of the regenerated pool.\n\
             Over-extraction depletes the pool for everyone.",
            c = p.cpr_capacity,
            f = mult(p.cpr_factor)
        ),
        (GameKind::Cpr, PromptVariant::Alternate) => format!(
            "You are participating in a shared resource activity. There is a common pool containing {c} tokens that all {n} participants share.\n\n\
             Each participant may withdraw between 0 and {e} tokens from the pool. After everyone has made their withdrawal, the tokens remaining in the pool are multiplied by {f} (representing natural replenishment) and the result is divided equally among all participants.\n\n\
             Your earnings are the tokens you withdrew plus your share of the replenished pool. Keep in mind that the more everyone withdraws, the less remains for replenishment, which affects everyone's share.",
            c = p.cpr_capacity,
            f = mult(p.cpr_factor)
        ),
        (GameKind::CprSanction, PromptVariant::Standard) => format!(
            "Common-Pool Resource Game with Sanctioning.\n\n\
             PHASE 1 - Extraction:\n\
             There is a shared resource pool with {c} tokens.\n\
             Each player can extract between 0 and {e} tokens.\n\
             Remaining pool is multiplied by {f} and split among all {n} players.\n\n\
             PHASE 2 - Sanctioning:\n\
             After seeing extractions, you can spend tokens to sanction other players.\n\
             Each sanction token costs you {cost} but reduces the target's payoff by {dmg}.\n\n\
             Final payoff = extraction + sustainability share - sanction costs - sanction impacts received.",
            c = p.cpr_capacity,
            f = mult(p.cpr_factor),
            cost = mult(p.sanction_cost),
            dmg = mult(p.sanction_damage)
        ),
        (GameKind::CprSanction, PromptVariant::Alternate) => format!(
            "You are participating in a shared resource activity with a second stage. There is a common pool containing {c} tokens that all {n} participants share.\n\n\
             In the first stage, each participant may withdraw between 0 and {e} tokens from the pool. The tokens remaining afterwards are multiplied by {f} and divided equally among all participants.\n\n\
             In the second stage, you will see what the members of your own group withdrew. You may then spend tokens to penalize members of your group: each penalty token costs you {cost} and lowers the penalized participant's earnings by {dmg}.\n\n\
             Your final earnings are your withdrawal plus your share of the replenished pool, minus the penalty tokens you spent and the penalties you received.",
            c = p.cpr_capacity,
            f = mult(p.cpr_factor),
            cost = mult(p.sanction_cost),
            dmg = mult(p.sanction_damage)
        ),
        (GameKind::CollectiveRisk, PromptVariant::Standard) => format!(
            "Collective-Risk Social Dilemma (Climate Game).\n\n\
             Over {r} rounds, all {n} players must collectively contribute at least {t} tokens to avoid catastrophe.\n\
             Each round, you have {e} tokens and decide how many to contribute.\n\
             Tokens you don't contribute are saved.\n\n\
             At the end of round {r}:\n\
             - If the group total meets the threshold ({t}), everyone keeps their savings.\n\
             - If not, there is a {pct}% chance everyone loses ALL their savings.\n\n\
             The challenge: contribute enough collectively without sacrificing too much individually.",
            r = p.rounds,
            t = p.risk_threshold,
            pct = percent(p.risk_probability)
        ),
        (GameKind::CollectiveRisk, PromptVariant::Alternate) => format!(
            "You are participating in a shared-risk activity that lasts {r} rounds. Together, all {n} participants need to contribute at least {t} tokens in total over the whole activity.\n\n\
             In every round you receive {e} tokens and choose how many of them to contribute. Whatever you do not contribute is added to your personal savings.\n\n\
             After the last round, if the combined contributions of everyone have reached {t} tokens, all participants keep their savings. If the total falls short, there is a {pct}% chance that every participant loses all of their savings.",
            r = p.rounds,
            t = p.risk_threshold,
            pct = percent(p.risk_probability)
        ),
        (GameKind::ORing, PromptVariant::Standard) => format!(
            "O-Ring Team Production Game.\n\n\
             There are {g} teams of {s} workers each ({n} workers total), sharing a common resource pool of {pool} units.\n\n\
             Each worker withdraws between 0 and {e} units from the pool for productive effort. Withdrawals are costly: you pay 1.0 per unit withdrawn.\n\n\
             Team production is MULTIPLICATIVE (O-Ring): each member's quality (withdrawal / {e}) multiplies together. If anyone on your team contributes nothing, your team produces nothing \u{2014} like the Space Shuttle Challenger, where one faulty O-ring destroyed the mission.\n\n\
             Additionally, all withdrawals deplete the shared pool. The fraction of pool remaining scales all teams' production equally.\n\n\
             Team_t production = {scale} x (pool remaining / {pool}) x product of all team member qualities\n\n\
             The system succeeds ONLY if EVERY team's production >= {thr}. If the system succeeds, a reward of {reward} is split equally among all {n} workers.\n\n\
             Your payoff = ({reward} / {n} if system succeeds, else 0) - 1.0 x your withdrawal",
            pool = p.oring_pool,
            scale = mult(p.oring_scale),
            thr = plain(p.oring_success_threshold),
            reward = mult(p.oring_reward)
        ),
        (GameKind::ORing, PromptVariant::Alternate) => format!(
            "You are participating in a team production activity. There are {g} teams of {s} members ({n} participants in total), and all of them draw on one shared pool of {pool} units.\n\n\
             Each participant takes between 0 and {e} units from the pool. Every unit you take costs you 1.0, and it also shrinks the shared pool that every team's output depends on.\n\n\
             A team's output is the product of its members' quality levels (units taken divided by {e}), scaled by {scale} and by the fraction of the shared pool still remaining. Because the qualities are multiplied, a single member who takes nothing brings the team's output to zero.\n\n\
             The activity succeeds only if every team's output reaches at least {thr}. On success, a reward of {reward} is divided equally among all {n} participants; your earnings are your share of that reward (or 0 on failure) minus the units you took.",
            pool = p.oring_pool,
            scale = mult(p.oring_scale),
            thr = plain(p.oring_success_threshold),
            reward = mult(p.oring_reward)
        ),
        (GameKind::PublicGoods, PromptVariant::Standard) => format!(
            "Intergroup Public Goods Game.\n\n\
             You have {e} tokens to allocate across three options:\n\
             1. KEEP: Token stays with you.\n\
             2. GROUP POOL: Multiplied by {gm} and split equally among your group ({s} members).\n\
             3. GLOBAL POOL: Multiplied by {nm} and split equally among ALL players ({n} total).\n\n\
             Your total allocation must equal exactly {e} tokens.",
            gm = mult(p.pg_group_multiplier),
            nm = mult(p.pg_global_multiplier)
        ),
        (GameKind::PublicGoods, PromptVariant::Alternate) => format!(
            "You are taking part in a group investment activity. You have been given {e} tokens that you must distribute across three options.\n\n\
             You may keep tokens for yourself, receiving their full value. You may place tokens into your group's shared pool. The group pool is multiplied by {gm} and the result is divided equally among all {s} members of your group. You may also place tokens into a global pool that benefits everyone. The global pool is multiplied by {nm} and divided equally among all {n} participants.\n\n\
             You must distribute all {e} tokens with none left over.",
            gm = mult(p.pg_group_multiplier),
            nm = mult(p.pg_global_multiplier)
        ),
    }
}

fn strategy_block(cfg: &SimulationConfig) -> Option<String> {
    if cfg.strategy.is_empty() {
        return None;
    }
    let lines: Vec<&str> = cfg
        .strategy
        .iter()
        .map(|s| match s {
            PromptStrategy::ChainOfThought => cfg.strategy_texts.chain_of_thought.as_str(),
            PromptStrategy::TheoryOfMind => cfg.strategy_texts.theory_of_mind.as_str(),
        })
        .collect();
    Some(lines.join("\n"))
}

pub fn build_system_prompt(cfg: &SimulationConfig, player: PlayerId, group: GroupId) -> String {
    let desc = game_description(cfg.game, cfg.prompt_variant, &cfg.params);
    let mut out = match cfg.prompt_variant {
        PromptVariant::Standard => format!("You are Player {player} in {group}.\n\nGAME RULES:\n{desc}\n\n"),
        PromptVariant::Alternate => format!(
            "You are participating in a group decision-making study. You have been assigned as {player} and belong to {group}.\n\nAbout this activity:\n{desc}\n\n"
        ),
    };
    if let Some(block) = strategy_block(cfg) {
        out.push_str(&block);
        out.push_str("\n\n");
    }
    out.push_str(match cfg.prompt_variant {
        PromptVariant::Standard => "IMPORTANT: Respond ONLY with valid JSON matching the required schema. Do not include any explanation or text outside the JSON.",
        PromptVariant::Alternate => "Please provide your response as a JSON object matching the required format. Do not include any additional text or explanation.",
    });
    out
}

/// JSON template the agent is asked to fill in.
pub fn schema_example(kind: GameKind) -> &'static str {
    match kind {
        GameKind::WeakestLink => r#"{"effort": <integer>}"#,
        GameKind::Cpr | GameKind::CprSanction => r#"{"extract": <integer>}"#,
        GameKind::CollectiveRisk => r#"{"contribute": <integer>}"#,
        GameKind::ORing => r#"{"withdraw": <integer>}"#,
        GameKind::PublicGoods => r#"{"keep": <integer>, "group": <integer>, "global": <integer>}"#,
    }
}

pub const SANCTION_SCHEMA: &str = r#"{"sanctions": {"player_id": <integer>, ...}}"#;

fn constraint_line(kind: GameKind, p: &GameParams) -> String {
    let e = p.endowment;
    match kind {
        GameKind::WeakestLink => format!("Choose an effort level from 0 to {e}."),
        GameKind::Cpr | GameKind::CprSanction => format!("Choose how many tokens to extract, from 0 to {e}."),
        GameKind::CollectiveRisk => format!("Choose how many tokens to contribute, from 0 to {e}."),
        GameKind::ORing => format!("Choose how many units to withdraw, from 0 to {e}."),
        GameKind::PublicGoods => format!("Your total allocation must equal exactly {e} tokens."),
    }
}

fn scalar(d: &Decision) -> u32 {
    d.metric_value().unwrap_or(0)
}

/// Summary of one completed round as seen by `viewer`: own-group decisions
/// and payoffs plus game-level aggregates.
pub fn round_summary(kind: GameKind, p: &GameParams, rec: &RoundRecord, viewer: PlayerId) -> String {
    let mut s = format!("--- Round {} ---\n", rec.round);
    let group = p.group_of(viewer);
    let pay = &rec.outcome.payoffs;
    for id in p.group_members(group) {
        let i = id.index();
        let d = &rec.decisions[i];
        let _ = match (kind, d) {
            (GameKind::WeakestLink, _) => writeln!(s, "{id}: effort {}, payoff {}", scalar(d), tokens(pay[i])),
            (GameKind::Cpr, _) => writeln!(s, "{id}: extracted {}, payoff {}", scalar(d), tokens(pay[i])),
            (GameKind::CprSanction, _) => {
                let (given, received) = rec
                    .sanctions
                    .as_ref()
                    .map(|m| (m.0[i].iter().sum::<u32>(), m.0.iter().map(|row| row[i]).sum::<u32>()))
                    .unwrap_or((0, 0));
                writeln!(
                    s,
                    "{id}: extracted {}, sanctions given {given}, received {received}, payoff {}",
                    scalar(d),
                    tokens(pay[i])
                )
            }
            (GameKind::CollectiveRisk, _) => writeln!(s, "{id}: contributed {}", scalar(d)),
            (GameKind::ORing, _) => writeln!(s, "{id}: withdrew {}, payoff {}", scalar(d), tokens(pay[i])),
            (GameKind::PublicGoods, Decision::Allocate { keep, group, global }) => writeln!(
                s,
                "{id}: keep {keep}, group {group}, global {global}, payoff {}",
                tokens(pay[i])
            ),
            (GameKind::PublicGoods, _) => writeln!(s, "{id}: {d}"),
        };
    }
    let total: u32 = rec.decisions.iter().map(scalar).sum();
    let _ = match kind {
        GameKind::WeakestLink => {
            let min = rec.decisions.iter().map(scalar).min().unwrap_or(0);
            write!(s, "Minimum effort across all players: {min}")
        }
        GameKind::Cpr | GameKind::CprSanction => write!(
            s,
            "Total extracted: {total} of {}; pool remaining {}",
            p.cpr_capacity,
            plain(rec.outcome.pool_remaining.unwrap_or(0.0))
        ),
        GameKind::CollectiveRisk => write!(
            s,
            "Contributed this round (all players): {total}; cumulative {} / {}",
            plain(rec.outcome.cumulative_contributions.unwrap_or(0.0)),
            p.risk_threshold
        ),
        GameKind::ORing => {
            let prods = rec.outcome.group_productions.as_deref().unwrap_or(&[]);
            let parts: Vec<String> =
                prods.iter().enumerate().map(|(g, v)| format!("{} {}", GroupId(g), tokens(*v))).collect();
            let verdict = if rec.outcome.success == Some(true) { "succeeded" } else { "failed" };
            write!(s, "Team productions: {}; system {verdict}", parts.join(", "))
        }
        GameKind::PublicGoods => {
            let own: u32 = p.group_members(group).map(|id| scalar(&rec.decisions[id.index()])).sum();
            let global: u32 = rec
                .decisions
                .iter()
                .map(|d| match d {
                    Decision::Allocate { global, .. } => *global,
                    _ => 0,
                })
                .sum();
            write!(s, "Your group pool total: {own}; global pool total: {global}")
        }
    };
    s
}

fn history_block(cfg: &SimulationConfig, state: &PromptState<'_>) -> Option<String> {
    if state.history.is_empty() {
        return None;
    }
    let parts: Vec<String> = state
        .history
        .iter()
        .map(|rec| round_summary(cfg.game, &cfg.params, rec, state.player))
        .collect();
    Some(parts.join("\n\n"))
}

fn group_chat<'a>(
    cfg: &SimulationConfig,
    state: &PromptState<'a>,
    round: u32,
) -> impl Iterator<Item = &'a DeliberationMessage> {
    let params = cfg.params.clone();
    let player = state.player;
    state
        .deliberation_log
        .iter()
        .filter(move |m| m.round == round && params.same_group(m.player, player))
}

fn collective_risk_status(cfg: &SimulationConfig, state: &PromptState<'_>, round: u32) -> String {
    let p = &cfg.params;
    let total = state
        .history
        .last()
        .and_then(|r| r.outcome.cumulative_contributions)
        .unwrap_or(0.0);
    let threshold = f64::from(p.risk_threshold);
    let pct = (100.0 * total / threshold).round();
    let remaining = (threshold - total).max(0.0);
    let mut s = format!(
        "COLLECTIVE RISK STATUS (Round {round} of {rounds}):\n\
         Cumulative contributions so far: {total} / {t} ({pct}%)\n\
         Still need {remaining} more tokens across all players to avoid catastrophe.\n\n",
        rounds = p.rounds,
        total = plain(total),
        t = p.risk_threshold,
        pct = plain(pct),
        remaining = plain(remaining)
    );
    if round == p.rounds {
        let _ = write!(
            s,
            "THIS IS THE FINAL ROUND. If the threshold is not met, there is a {}% chance ALL savings are lost.\n\n",
            percent(p.risk_probability)
        );
    }
    let _ = write!(
        s,
        "You have {} tokens this round. Decide how many to contribute.\nRespond with JSON: {}",
        p.endowment,
        schema_example(GameKind::CollectiveRisk)
    );
    s
}

pub fn build_decision_prompt(
    state: &PromptState<'_>,
    round: u32,
    cfg: &SimulationConfig,
) -> Result<String, PromptError> {
    let rounds = cfg.params.rounds;
    if round == 0 || round > rounds {
        return Err(PromptError::RoundOutOfRange { round, rounds });
    }
    let mut s = format!("=== Round {round} of {rounds} ===\n\n");
    if let Some(h) = history_block(cfg, state) {
        let _ = write!(s, "PREVIOUS ROUNDS:\n{h}\n\n");
    }
    let chat: Vec<_> = group_chat(cfg, state, round).collect();
    if !chat.is_empty() {
        s.push_str("GROUP DELIBERATION (your group's discussion before this decision):\n");
        for m in chat {
            let _ = writeln!(s, "[{}]: {}", m.player, m.message);
        }
        s.push('\n');
    }
    if cfg.game == GameKind::CollectiveRisk {
        s.push_str(&collective_risk_status(cfg, state, round));
        return Ok(s);
    }
    let lead = match cfg.prompt_variant {
        PromptVariant::Standard => "Now make your decision.",
        PromptVariant::Alternate => "Please make your decision now.",
    };
    let _ = write!(
        s,
        "{lead} {}\nRespond with EXACTLY this JSON format (fill in integer values):\n{}",
        constraint_line(cfg.game, &cfg.params),
        schema_example(cfg.game)
    );
    Ok(s)
}

/// Prompt for one deliberation turn of the round about to be played.
pub fn build_deliberation_prompt(
    state: &PromptState<'_>,
    round: u32,
    cfg: &SimulationConfig,
) -> Result<String, PromptError> {
    if !cfg.deliberation {
        return Err(PromptError::DeliberationDisabled);
    }
    let mut s = String::from(
        "This is the GROUP DELIBERATION phase. You can discuss strategy with your group members before making your actual decision.\n\n",
    );
    if let Some(h) = history_block(cfg, state) {
        let _ = write!(s, "PREVIOUS ROUNDS:\n{h}\n\n");
    }
    s.push_str("GROUP CHAT SO FAR:\n");
    for m in group_chat(cfg, state, round) {
        let _ = writeln!(s, "[{}]: {}", m.player, m.message);
    }
    s.push_str(
        "\nShare your thoughts with your group. What strategy do you think the group should adopt? Respond with a short message (1-3 sentences).",
    );
    Ok(s)
}

/// Phase-2 prompt of CPR with sanctioning; lists only the player's own group.
pub fn build_sanction_prompt(
    phase1: &RoundOutcome,
    extractions: &[u32],
    player: PlayerId,
    cfg: &SimulationConfig,
) -> Result<String, PromptError> {
    if cfg.game != GameKind::CprSanction {
        return Err(PromptError::WrongGame(cfg.game));
    }
    let p = &cfg.params;
    let mut s = String::from("SANCTIONING PHASE:\nHere are the extractions from Phase 1:\n");
    for id in p.group_members(p.group_of(player)) {
        let i = id.index();
        let _ = writeln!(
            s,
            "- {id}: extracted {}, phase 1 payoff: {}",
            extractions[i],
            tokens(phase1.payoffs[i])
        );
    }
    let total: u32 = extractions.iter().sum();
    let _ = write!(
        s,
        "\nResource pool: {} capacity, {total} extracted, {} remaining.\n\n\
         Your current phase 1 payoff is {}.\n\
         You may now spend tokens to sanction other players in your group who over-extracted.\n\
         Each sanction token costs you {} but reduces the target's payoff by {}.\n\n\
         Respond with JSON: {SANCTION_SCHEMA}",
        p.cpr_capacity,
        plain(phase1.pool_remaining.unwrap_or(0.0)),
        tokens(phase1.payoffs[player.index()]),
        mult(p.sanction_cost),
        mult(p.sanction_damage),
    );
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{AgentSpec, ScriptedStrategy};
    use crate::games::payoff_cpr;

    fn cfg(game: GameKind, variant: PromptVariant) -> SimulationConfig {
        let mut c = SimulationConfig::new(
            game,
            GameParams::for_game(game),
            AgentSpec::Scripted(ScriptedStrategy::ParetoPlayer),
            1,
        );
        c.prompt_variant = variant;
        c
    }

    fn empty_state(player: usize) -> PromptState<'static> {
        PromptState { player: PlayerId(player), history: &[], deliberation_log: &[] }
    }

    #[test]
    fn standard_system_prompt_header() {
        let c = cfg(GameKind::WeakestLink, PromptVariant::Standard);
        let s = build_system_prompt(&c, PlayerId(2), GroupId(0));
        assert!(s.starts_with("You are Player player_3 in group_1."));
        assert!(s.contains("GAME RULES:"));
        assert!(s.ends_with("Do not include any explanation or text outside the JSON."));
    }

    #[test]
    fn alternate_public_goods_uses_prose() {
        let c = cfg(GameKind::PublicGoods, PromptVariant::Alternate);
        let s = build_system_prompt(&c, PlayerId(0), GroupId(0));
        assert!(s.starts_with("You are participating in a group decision-making study."));
        assert!(s.contains("group investment activity"));
    }

    #[test]
    fn strategy_block_only_when_enabled() {
        let mut c = cfg(GameKind::Cpr, PromptVariant::Standard);
        let plain = build_system_prompt(&c, PlayerId(0), GroupId(0));
        assert!(!plain.contains("step by step"));
        assert!(!plain.contains("Before deciding"));
        c.strategy.insert(PromptStrategy::ChainOfThought);
        c.strategy.insert(PromptStrategy::TheoryOfMind);
        let s = build_system_prompt(&c, PlayerId(0), GroupId(0));
        let cot = s.find("step by step").unwrap();
        let tom = s.find("Before deciding").unwrap();
        assert!(cot < tom);
    }

    #[test]
    fn descriptions_follow_params() {
        let p = GameParams::default().with_group_size(4);
        let d = game_description(GameKind::CprSanction, PromptVariant::Standard, &p);
        assert!(d.contains("split among all 8 players"));
        let d = game_description(GameKind::PublicGoods, PromptVariant::Standard, &GameParams::default());
        assert!(d.contains("your group (5 members)"));
        let d = game_description(GameKind::WeakestLink, PromptVariant::Alternate, &GameParams::default());
        assert!(d.contains("with 9 other participants"));
        let d = game_description(GameKind::CollectiveRisk, PromptVariant::Standard, &GameParams::for_game(GameKind::CollectiveRisk));
        assert!(d.contains("there is a 50% chance"));
    }

    #[test]
    fn first_round_has_no_history() {
        let c = cfg(GameKind::WeakestLink, PromptVariant::Standard);
        let s = build_decision_prompt(&empty_state(0), 1, &c).unwrap();
        assert!(s.starts_with("=== Round 1 of 3 ==="));
        assert!(!s.contains("--- Round"));
        assert!(s.contains("Now make your decision."));
        assert!(s.ends_with(r#"{"effort": <integer>}"#));
        assert!(build_decision_prompt(&empty_state(0), 4, &c).is_err());
    }

    #[test]
    fn alternate_decision_wording() {
        let c = cfg(GameKind::PublicGoods, PromptVariant::Alternate);
        let s = build_decision_prompt(&empty_state(0), 1, &c).unwrap();
        assert!(s.contains("Please make your decision now. Your total allocation must equal exactly 10 tokens."));
    }

    #[test]
    fn collective_risk_final_round_warning() {
        let c = cfg(GameKind::CollectiveRisk, PromptVariant::Standard);
        let early = build_decision_prompt(&empty_state(0), 1, &c).unwrap();
        assert!(early.contains("Still need 100 more tokens"));
        assert!(!early.contains("THIS IS THE FINAL ROUND"));
        let last = build_decision_prompt(&empty_state(0), 10, &c).unwrap();
        assert!(last.contains("THIS IS THE FINAL ROUND"));
        assert!(last.contains("COLLECTIVE RISK STATUS (Round 10 of 10):"));
    }

    #[test]
    fn deliberation_requires_flag() {
        let c = cfg(GameKind::Cpr, PromptVariant::Standard);
        assert_eq!(
            build_deliberation_prompt(&empty_state(0), 1, &c),
            Err(PromptError::DeliberationDisabled)
        );
    }

    #[test]
    fn sanction_prompt_lists_own_group_only() {
        let c = cfg(GameKind::CprSanction, PromptVariant::Standard);
        let x = [5, 5, 5, 5, 5, 1, 1, 1, 1, 1];
        let phase1 = payoff_cpr(&x, &c.params).unwrap();
        let s = build_sanction_prompt(&phase1, &x, PlayerId(6), &c).unwrap();
        assert_eq!(s.matches(": extracted ").count(), 5);
        assert!(s.contains("- player_6: extracted 1"));
        assert!(!s.contains("- player_1:"));
        assert!(s.contains("Resource pool: 100 capacity, 30 extracted, 70 remaining."));
        assert!(s.contains("\"sanctions\""));
        let wrong = cfg(GameKind::Cpr, PromptVariant::Standard);
        assert_eq!(
            build_sanction_prompt(&phase1, &x, PlayerId(0), &wrong),
            Err(PromptError::WrongGame(GameKind::Cpr))
        );
    }

    #[test]
    fn formatting_helpers() {
        assert_eq!(mult(3.0), "3.0");
        assert_eq!(mult(1.5), "1.5");
        assert_eq!(plain(50.0), "50");
        assert_eq!(plain(54.432), "54.432");
        assert_eq!(percent(0.5), "50");
        assert_eq!(percent(0.125), "12.5");
    }
}
