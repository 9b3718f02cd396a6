//! C ABI over the coopgym engine.
//!
//! Conventions:
//! - Every fallible call returns a `CgStatus`; on failure a message is
//!   available from `cg_last_error_message` on the same thread.
//! - Handles (`CgParams`, `CgTranscript`) are opaque and owned by the caller,
//!   who releases them with the matching `_free` function.
//! - Strings returned through `char **` out-parameters are heap allocated and
//!   must be released with `cg_string_free`.
//! - Complex values cross the boundary as JSON text.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use coopgym::agents::AgentSpec;
use coopgym::engine::{parse_decision, run_simulation, SimulationConfig, Transcript};
use coopgym::games::{
    equilibrium_anchors, pareto_proximity, payoff_collective_risk, payoff_cpr, payoff_oring, payoff_public_goods,
    payoff_weakest_link, validate_decision, Decision, EquilibriumAnchors, GameKind, GameParams,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    ParseFailed = 4,
    GameError = 5,
    NoValue = 6,
    Panic = 7,
}

/// Game kind plus its parameters.
pub struct CgParams {
    kind: GameKind,
    params: GameParams,
}

/// Result of one simulation.
pub struct CgTranscript {
    inner: Transcript,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

type Failure = (CgStatus, String);

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CgStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CgStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err((CgStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (CgStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| (CgStatus::NullPointer, format!("{name} is null")))
}

fn check_out<T>(p: *mut T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err((CgStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

fn game_err(e: impl std::fmt::Display) -> Failure {
    (CgStatus::GameError, e.to_string())
}

fn bad_arg(e: impl std::fmt::Display) -> Failure {
    (CgStatus::InvalidArgument, e.to_string())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) {
    *out = CString::new(s).expect("JSON has no interior nul").into_raw();
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn cg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Default parameters of `game` with two groups of `group_size` players
/// (0 keeps the default of 5).
#[no_mangle]
pub unsafe extern "C" fn cg_params_new(game: *const c_char, group_size: usize, out: *mut *mut CgParams) -> CgStatus {
    guard(|| {
        check_out(out, "out")?;
        let kind: GameKind = str_arg(game, "game")?.parse().map_err(bad_arg)?;
        let mut params = GameParams::for_game(kind);
        if group_size > 0 {
            params = params.with_group_size(group_size);
        }
        params.validate().map_err(bad_arg)?;
        *out = Box::into_raw(Box::new(CgParams { kind, params }));
        Ok(())
    })
}

/// Parameters from a JSON object; omitted fields take the game's defaults.
#[no_mangle]
pub unsafe extern "C" fn cg_params_from_json(
    game: *const c_char,
    json: *const c_char,
    out: *mut *mut CgParams,
) -> CgStatus {
    guard(|| {
        check_out(out, "out")?;
        let kind: GameKind = str_arg(game, "game")?.parse().map_err(bad_arg)?;
        let mut base = serde_json::to_value(GameParams::for_game(kind)).map_err(bad_arg)?;
        let over: serde_json::Value = serde_json::from_str(str_arg(json, "json")?).map_err(bad_arg)?;
        let serde_json::Value::Object(fields) = over else {
            return Err(bad_arg("params JSON must be an object"));
        };
        let obj = base.as_object_mut().expect("params are an object");
        obj.extend(fields);
        let params: GameParams = serde_json::from_value(base).map_err(bad_arg)?;
        params.validate().map_err(bad_arg)?;
        *out = Box::into_raw(Box::new(CgParams { kind, params }));
        Ok(())
    })
}

/// Total number of players, or 0 for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn cg_params_n_players(p: *const CgParams) -> usize {
    p.as_ref().map_or(0, |p| p.params.n_players())
}

#[no_mangle]
pub unsafe extern "C" fn cg_params_free(p: *mut CgParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Nash and Pareto anchors on the game's primary-metric scale.
#[no_mangle]
pub unsafe extern "C" fn cg_anchors(p: *const CgParams, out_nash: *mut f64, out_pareto: *mut f64) -> CgStatus {
    guard(|| {
        let p = ref_arg(p, "params")?;
        check_out(out_nash, "out_nash")?;
        check_out(out_pareto, "out_pareto")?;
        let a = equilibrium_anchors(p.kind, &p.params).map_err(game_err)?;
        *out_nash = a.nash_metric;
        *out_pareto = a.pareto_metric;
        Ok(())
    })
}

/// 0 at the Pareto anchor, 1 at the Nash anchor, clamped in between.
#[no_mangle]
pub extern "C" fn cg_pareto_proximity(metric: f64, nash: f64, pareto: f64) -> f64 {
    pareto_proximity(metric, &EquilibriumAnchors { nash_metric: nash, pareto_metric: pareto })
}

/// Per-player payoffs of one round (or of a whole Collective Risk game).
///
/// `actions` layout by game:
/// - weakest_link, cpr, cpr_sanction, oring: one value per player
///   (cpr_sanction gives phase-1 payoffs, before sanctions);
/// - public_goods: keep, group, global for each player in turn (3·N values);
/// - collective_risk: contributions round by round (rounds·N values),
///   settled with `loss_draw` in [0, 1).
///
/// `out_payoffs` must hold at least N values.
#[no_mangle]
pub unsafe extern "C" fn cg_payoff(
    p: *const CgParams,
    actions: *const u32,
    n_actions: usize,
    loss_draw: f64,
    out_payoffs: *mut f64,
    out_len: usize,
) -> CgStatus {
    guard(|| {
        let p = ref_arg(p, "params")?;
        if actions.is_null() && n_actions > 0 {
            return Err((CgStatus::NullPointer, "actions is null".into()));
        }
        check_out(out_payoffs, "out_payoffs")?;
        let n = p.params.n_players();
        if out_len < n {
            return Err(bad_arg(format!("out_len {out_len} is smaller than {n} players")));
        }
        let a: &[u32] = if n_actions == 0 { &[] } else { std::slice::from_raw_parts(actions, n_actions) };
        let expected = match p.kind {
            GameKind::PublicGoods => 3 * n,
            GameKind::CollectiveRisk => p.params.rounds as usize * n,
            _ => n,
        };
        if a.len() != expected {
            return Err(bad_arg(format!("expected {expected} action values, got {}", a.len())));
        }
        if let Some((i, v)) = a.iter().enumerate().find(|(_, &v)| v > p.params.endowment) {
            return Err(bad_arg(format!("action {i} = {v} exceeds the endowment {}", p.params.endowment)));
        }
        let outcome = match p.kind {
            GameKind::WeakestLink => payoff_weakest_link(a, &p.params),
            GameKind::Cpr | GameKind::CprSanction => payoff_cpr(a, &p.params),
            GameKind::ORing => payoff_oring(a, &p.params),
            GameKind::PublicGoods => {
                let decisions: Vec<Decision> = a
                    .chunks(3)
                    .map(|c| Decision::Allocate { keep: c[0], group: c[1], global: c[2] })
                    .collect();
                for d in &decisions {
                    validate_decision(p.kind, d, &p.params).map_err(bad_arg)?;
                }
                payoff_public_goods(&decisions, &p.params)
            }
            GameKind::CollectiveRisk => {
                if !(0.0..1.0).contains(&loss_draw) {
                    return Err(bad_arg("loss_draw must be in [0, 1)"));
                }
                let history: Vec<Vec<u32>> = a.chunks(n).map(<[u32]>::to_vec).collect();
                payoff_collective_risk(&history, &p.params, loss_draw)
            }
        }
        .map_err(game_err)?;
        std::slice::from_raw_parts_mut(out_payoffs, n).copy_from_slice(&outcome.payoffs);
        Ok(())
    })
}

/// Parses a raw agent reply; on success `*out_json` holds the decision,
/// e.g. `{"extract":5}`.
#[no_mangle]
pub unsafe extern "C" fn cg_parse_decision(
    p: *const CgParams,
    raw: *const c_char,
    out_json: *mut *mut c_char,
) -> CgStatus {
    guard(|| {
        let p = ref_arg(p, "params")?;
        check_out(out_json, "out_json")?;
        let d = parse_decision(str_arg(raw, "raw")?, p.kind, &p.params)
            .map_err(|e| (CgStatus::ParseFailed, e.to_string()))?;
        write_string(out_json, serde_json::to_string(&d).expect("decision serializes"));
        Ok(())
    })
}

/// Runs one simulation described by a `SimulationConfig` JSON document,
/// building each player's agent from the config's roster. Agent failures are
/// reported inside the transcript, not through the status code.
#[no_mangle]
pub unsafe extern "C" fn cg_run_simulation(config_json: *const c_char, out: *mut *mut CgTranscript) -> CgStatus {
    guard(|| {
        check_out(out, "out")?;
        let cfg: SimulationConfig = serde_json::from_str(str_arg(config_json, "config_json")?).map_err(bad_arg)?;
        cfg.validate().map_err(bad_arg)?;
        let agents: Vec<_> = cfg.agents.iter().map(AgentSpec::build).collect();
        let inner = run_simulation(&cfg, &agents);
        *out = Box::into_raw(Box::new(CgTranscript { inner }));
        Ok(())
    })
}

/// True when the simulation ran to completion.
#[no_mangle]
pub unsafe extern "C" fn cg_transcript_is_completed(t: *const CgTranscript) -> bool {
    t.as_ref().is_some_and(|t| t.inner.status.is_completed())
}

/// Primary metric of a completed simulation; `CG_STATUS_NO_VALUE` otherwise.
#[no_mangle]
pub unsafe extern "C" fn cg_transcript_metric(t: *const CgTranscript, out: *mut f64) -> CgStatus {
    guard(|| {
        let t = ref_arg(t, "transcript")?;
        check_out(out, "out")?;
        *out = t.inner.metric.ok_or((CgStatus::NoValue, "simulation did not complete".to_string()))?;
        Ok(())
    })
}

/// The full transcript as one line of JSON.
#[no_mangle]
pub unsafe extern "C" fn cg_transcript_to_json(t: *const CgTranscript, out_json: *mut *mut c_char) -> CgStatus {
    guard(|| {
        let t = ref_arg(t, "transcript")?;
        check_out(out_json, "out_json")?;
        write_string(out_json, t.inner.to_json_line());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cg_transcript_free(t: *mut CgTranscript) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}
