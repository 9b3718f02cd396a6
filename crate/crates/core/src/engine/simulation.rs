use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::{Rng, SeedableRng};

use super::parse::{parse_decision, parse_sanctions, ParseError};
use super::prompts::{
    build_decision_prompt, build_deliberation_prompt, build_sanction_prompt, build_system_prompt, retry_message,
    PromptState,
};
use super::{
    DeliberationMessage, Phase, QueryRecord, RoundRecord, SimulationConfig, SimulationStatus, TokenUsage, Transcript,
    SCHEMA_VERSION,
};
use crate::agents::{Agent, ChatMessage, Query, SimRng};
use crate::games::{
    apply_sanctions, payoff_collective_risk, payoff_cpr, payoff_oring, payoff_public_goods, payoff_weakest_link,
    primary_metric, Decision, GameKind, PlayerId, RoundOutcome, SanctionMatrix,
};

/// RNG stream reserved for engine-side draws (the Collective Risk loss event).
const ENGINE_STREAM: u64 = 0;

/// Independent stream for `stream`, derived from the simulation seed.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

enum Abort {
    ParseFailed { player: PlayerId, round: u32, phase: Phase },
    AgentError { player: PlayerId, round: u32, detail: String },
}

impl From<Abort> for SimulationStatus {
    fn from(a: Abort) -> Self {
        match a {
            Abort::ParseFailed { player, round, phase } => SimulationStatus::ParseFailed { player, round, phase },
            Abort::AgentError { player, round, detail } => SimulationStatus::AgentError { player, round, detail },
        }
    }
}

fn panic_detail(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        format!("agent panicked: {s}")
    } else if let Some(s) = payload.downcast_ref::<String>() {
        format!("agent panicked: {s}")
    } else {
        "agent panicked".to_string()
    }
}

struct Run<'a> {
    cfg: &'a SimulationConfig,
    agents: &'a [Box<dyn Agent>],
    rngs: Vec<SimRng>,
    system_prompts: Vec<String>,
    queries: Vec<QueryRecord>,
    log: Vec<DeliberationMessage>,
    rounds: Vec<RoundRecord>,
    usage: TokenUsage,
}

impl<'a> Run<'a> {
    /// Queries one player, re-prompting with the parse error appended until
    /// `parse` accepts the reply or the retry budget is spent.
    fn ask<T>(
        &mut self,
        player: PlayerId,
        round: u32,
        phase: Phase,
        prompt: String,
        extractions: Option<&[u32]>,
        parse: impl Fn(&str) -> Result<T, ParseError>,
    ) -> Result<T, Abort> {
        let i = player.index();
        let mut messages = vec![ChatMessage::system(self.system_prompts[i].clone()), ChatMessage::user(prompt.clone())];
        self.queries.push(QueryRecord { round, phase, player, prompt, raw_responses: Vec::new(), errors: Vec::new() });
        let record = self.queries.len() - 1;
        let max_attempts = self.cfg.max_parse_retries + 1;
        for attempt in 0..max_attempts {
            let query = Query {
                game: self.cfg.game,
                params: &self.cfg.params,
                player,
                round,
                phase,
                attempt,
                messages: &messages,
                extractions,
            };
            let agent = &self.agents[i];
            let rng = &mut self.rngs[i];
            let reply = match catch_unwind(AssertUnwindSafe(|| agent.respond(&query, rng))) {
                Ok(Ok(reply)) => reply,
                Ok(Err(e)) => return Err(Abort::AgentError { player, round, detail: e.to_string() }),
                Err(payload) => return Err(Abort::AgentError { player, round, detail: panic_detail(payload) }),
            };
            self.usage.add(&reply.usage);
            self.queries[record].raw_responses.push(reply.text.clone());
            match parse(&reply.text) {
                Ok(value) => return Ok(value),
                Err(e) => {
                    let msg = e.to_string();
                    self.queries[record].errors.push(msg.clone());
                    messages.push(ChatMessage::assistant(reply.text));
                    messages.push(ChatMessage::user(retry_message(&msg)));
                }
            }
        }
        Err(Abort::ParseFailed { player, round, phase })
    }

    fn deliberate(&mut self, round: u32) -> Result<(), Abort> {
        for turn in 1..=self.cfg.deliberation_rounds {
            for player in self.cfg.params.players() {
                let state = PromptState { player, history: &self.rounds, deliberation_log: &self.log };
                let prompt = build_deliberation_prompt(&state, round, self.cfg).expect("deliberation enabled");
                let message = self.ask(player, round, Phase::Deliberation, prompt, None, |raw| Ok(raw.trim().to_string()))?;
                self.log.push(DeliberationMessage { round, turn, player, message });
            }
        }
        Ok(())
    }

    fn decide(&mut self, round: u32) -> Result<Vec<Decision>, Abort> {
        let (kind, params) = (self.cfg.game, self.cfg.params.clone());
        // Prompts are built up front so every player sees the same round state.
        let prompts: Vec<String> = params
            .players()
            .map(|player| {
                let state = PromptState { player, history: &self.rounds, deliberation_log: &self.log };
                build_decision_prompt(&state, round, self.cfg).expect("round within range")
            })
            .collect();
        let mut decisions = Vec::with_capacity(prompts.len());
        for (player, prompt) in params.players().zip(prompts) {
            decisions.push(self.ask(player, round, Phase::Decision, prompt, None, |raw| {
                parse_decision(raw, kind, &params)
            })?);
        }
        Ok(decisions)
    }

    fn sanction(&mut self, round: u32, phase1: &RoundOutcome, extractions: &[u32]) -> Result<SanctionMatrix, Abort> {
        let (kind, params) = (self.cfg.game, self.cfg.params.clone());
        let mut decisions = Vec::with_capacity(params.n_players());
        for player in params.players() {
            let prompt = build_sanction_prompt(phase1, extractions, player, self.cfg).expect("cpr_sanction game");
            decisions.push(self.ask(player, round, Phase::Sanction, prompt, Some(extractions), |raw| {
                parse_sanctions(raw, kind, player, &params)
            })?);
        }
        Ok(SanctionMatrix::from_decisions(&decisions).expect("validated sanctions"))
    }

    fn play(&mut self, loss_rng: &mut SimRng) -> Result<Option<f64>, Abort> {
        let cfg = self.cfg;
        let p = &cfg.params;
        let mut loss_draw = None;
        let mut cumulative = 0u64;
        for round in 1..=p.rounds {
            if cfg.deliberation {
                self.deliberate(round)?;
            }
            let decisions = self.decide(round)?;
            let values: Vec<u32> = decisions.iter().map(|d| d.metric_value().unwrap_or(0)).collect();
            let mut record = RoundRecord {
                round,
                decisions,
                phase1_outcome: None,
                sanctions: None,
                outcome: RoundOutcome {
                    payoffs: Vec::new(),
                    pool_remaining: None,
                    group_productions: None,
                    success: None,
                    cumulative_contributions: None,
                },
            };
            // Inputs were validated while parsing, so payoff errors are engine bugs.
            record.outcome = match cfg.game {
                GameKind::WeakestLink => payoff_weakest_link(&values, p).expect("validated efforts"),
                GameKind::Cpr => payoff_cpr(&values, p).expect("validated extractions"),
                GameKind::ORing => payoff_oring(&values, p).expect("validated withdrawals"),
                GameKind::PublicGoods => payoff_public_goods(&record.decisions, p).expect("validated allocations"),
                GameKind::CprSanction => {
                    let phase1 = payoff_cpr(&values, p).expect("validated extractions");
                    let matrix = self.sanction(round, &phase1, &values)?;
                    let outcome = apply_sanctions(&phase1, &matrix, p).expect("validated sanctions");
                    record.phase1_outcome = Some(phase1);
                    record.sanctions = Some(matrix);
                    outcome
                }
                GameKind::CollectiveRisk => {
                    cumulative += values.iter().map(|&v| u64::from(v)).sum::<u64>();
                    if round < p.rounds {
                        // Settlement happens once, after the last round.
                        RoundOutcome {
                            payoffs: vec![0.0; p.n_players()],
                            pool_remaining: None,
                            group_productions: None,
                            success: None,
                            cumulative_contributions: Some(cumulative as f64),
                        }
                    } else {
                        let draw: f64 = loss_rng.random();
                        loss_draw = Some(draw);
                        let history: Vec<Vec<u32>> = self
                            .rounds
                            .iter()
                            .map(|r| r.decisions.iter().map(|d| d.metric_value().unwrap_or(0)).collect())
                            .chain(std::iter::once(values.clone()))
                            .collect();
                        payoff_collective_risk(&history, p, draw).expect("complete history")
                    }
                }
            };
            self.rounds.push(record);
        }
        Ok(loss_draw)
    }
}

/// Runs one simulation to completion or to the first unrecoverable agent
/// failure. Never panics on agent misbehavior.
pub fn run_simulation(cfg: &SimulationConfig, agents: &[Box<dyn Agent>]) -> Transcript {
    let config_hash = cfg.config_hash();
    let mut transcript = Transcript {
        schema_version: SCHEMA_VERSION,
        config_hash,
        config: cfg.clone(),
        system_prompts: Vec::new(),
        queries: Vec::new(),
        deliberation_log: Vec::new(),
        rounds: Vec::new(),
        loss_draw: None,
        status: SimulationStatus::Completed,
        metric: None,
        usage: TokenUsage::default(),
    };
    if let Err(detail) = cfg.validate() {
        transcript.status = SimulationStatus::InvalidConfig { detail };
        return transcript;
    }
    if agents.len() != cfg.params.n_players() {
        transcript.status = SimulationStatus::InvalidConfig {
            detail: format!("{} agents supplied for {} players", agents.len(), cfg.params.n_players()),
        };
        return transcript;
    }
    let system_prompts: Vec<String> = cfg
        .params
        .players()
        .map(|id| build_system_prompt(cfg, id, cfg.params.group_of(id)))
        .collect();
    let mut run = Run {
        cfg,
        agents,
        rngs: (0..cfg.params.n_players()).map(|i| stream_rng(cfg.seed, i as u64 + 1)).collect(),
        system_prompts,
        queries: Vec::new(),
        log: Vec::new(),
        rounds: Vec::new(),
        usage: TokenUsage::default(),
    };
    let mut loss_rng = stream_rng(cfg.seed, ENGINE_STREAM);
    let result = run.play(&mut loss_rng);
    match result {
        Ok(loss_draw) => {
            transcript.loss_draw = loss_draw;
            transcript.metric = primary_metric(cfg.game, &run.rounds.iter().map(|r| &r.decisions[..]).collect::<Vec<_>>()).ok();
        }
        Err(abort) => transcript.status = abort.into(),
    }
    transcript.system_prompts = run.system_prompts;
    transcript.queries = run.queries;
    transcript.deliberation_log = run.log;
    transcript.rounds = run.rounds;
    transcript.usage = run.usage;
    transcript
}
