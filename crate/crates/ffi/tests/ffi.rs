use std::ffi::{c_char, CStr, CString};
use std::ptr;

use coopgym::agents::{AgentSpec, ScriptedStrategy};
use coopgym::engine::{SimulationConfig, Transcript};
use coopgym::games::{equilibrium_anchors, payoff_collective_risk, payoff_cpr, Decision, GameKind, GameParams};
use coopgym_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = cg_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn take_string(p: *mut c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
    unsafe { cg_string_free(p) };
    s
}

fn params(game: &str, size: usize) -> *mut CgParams {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { cg_params_new(c(game).as_ptr(), size, &mut p) }, CgStatus::Ok);
    p
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(cg_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn anchors_agree_with_library() {
    for kind in [GameKind::WeakestLink, GameKind::Cpr, GameKind::PublicGoods, GameKind::CollectiveRisk] {
        let p = params(kind.as_str(), 3);
        assert_eq!(unsafe { cg_params_n_players(p) }, 6);
        let (mut nash, mut pareto) = (f64::NAN, f64::NAN);
        assert_eq!(unsafe { cg_anchors(p, &mut nash, &mut pareto) }, CgStatus::Ok);
        let expect = equilibrium_anchors(kind, &GameParams::for_game(kind).with_group_size(3)).unwrap();
        assert_eq!((nash, pareto), (expect.nash_metric, expect.pareto_metric));
        assert_eq!(cg_pareto_proximity(pareto, nash, pareto), 0.0);
        assert_eq!(cg_pareto_proximity(nash, nash, pareto), 1.0);
        unsafe { cg_params_free(p) };
    }
}

#[test]
fn unreachable_threshold_has_no_anchor() {
    let mut p = ptr::null_mut();
    let json = c(r#"{"risk_threshold": 100000}"#);
    assert_eq!(unsafe { cg_params_from_json(c("collective_risk").as_ptr(), json.as_ptr(), &mut p) }, CgStatus::Ok);
    let (mut nash, mut pareto) = (0.0, 0.0);
    assert_eq!(unsafe { cg_anchors(p, &mut nash, &mut pareto) }, CgStatus::GameError);
    assert!(!last_error().is_empty());
    unsafe { cg_params_free(p) };
}

#[test]
fn unknown_game_and_null_arguments() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { cg_params_new(c("chess").as_ptr(), 5, &mut p) }, CgStatus::InvalidArgument);
    assert!(p.is_null());
    assert!(last_error().contains("chess"));
    assert_eq!(unsafe { cg_params_new(ptr::null(), 5, &mut p) }, CgStatus::NullPointer);
    assert_eq!(unsafe { cg_params_new(c("cpr").as_ptr(), 5, ptr::null_mut()) }, CgStatus::NullPointer);
    let (mut a, mut b) = (0.0, 0.0);
    assert_eq!(unsafe { cg_anchors(ptr::null(), &mut a, &mut b) }, CgStatus::NullPointer);
    unsafe {
        cg_params_free(ptr::null_mut());
        cg_transcript_free(ptr::null_mut());
        cg_string_free(ptr::null_mut());
    }
}

#[test]
fn params_from_json_overrides_defaults() {
    let mut p = ptr::null_mut();
    let json = c(r#"{"group_size": 4}"#);
    assert_eq!(unsafe { cg_params_from_json(c("cpr").as_ptr(), json.as_ptr(), &mut p) }, CgStatus::Ok);
    assert_eq!(unsafe { cg_params_n_players(p) }, 8);
    unsafe { cg_params_free(p) };
    let bad = c("[1,2]");
    assert_eq!(unsafe { cg_params_from_json(c("cpr").as_ptr(), bad.as_ptr(), &mut p) }, CgStatus::InvalidArgument);
}

#[test]
fn cpr_payoff_matches_library() {
    let p = params("cpr", 0);
    let actions: Vec<u32> = (0..10).collect();
    let mut out = vec![0.0; 10];
    assert_eq!(unsafe { cg_payoff(p, actions.as_ptr(), 10, 0.0, out.as_mut_ptr(), 10) }, CgStatus::Ok);
    let expect = payoff_cpr(&actions, &GameParams::for_game(GameKind::Cpr)).unwrap();
    assert_eq!(out, expect.payoffs);

    assert_eq!(unsafe { cg_payoff(p, actions.as_ptr(), 9, 0.0, out.as_mut_ptr(), 10) }, CgStatus::InvalidArgument);
    assert_eq!(unsafe { cg_payoff(p, actions.as_ptr(), 10, 0.0, out.as_mut_ptr(), 9) }, CgStatus::InvalidArgument);
    let over = [999u32; 10];
    assert_eq!(unsafe { cg_payoff(p, over.as_ptr(), 10, 0.0, out.as_mut_ptr(), 10) }, CgStatus::InvalidArgument);
    unsafe { cg_params_free(p) };
}

#[test]
fn collective_risk_payoff_takes_full_history() {
    let p = params("collective_risk", 0);
    let gp = GameParams::for_game(GameKind::CollectiveRisk);
    let rounds = gp.rounds as usize;
    let history: Vec<Vec<u32>> = (0..rounds).map(|r| (0..10).map(|i| ((r + i) % 3) as u32).collect()).collect();
    let flat: Vec<u32> = history.concat();
    let mut out = vec![0.0; 10];
    let status = unsafe { cg_payoff(p, flat.as_ptr(), flat.len(), 0.25, out.as_mut_ptr(), out.len()) };
    assert_eq!(status, CgStatus::Ok);
    assert_eq!(out, payoff_collective_risk(&history, &gp, 0.25).unwrap().payoffs);
    let status = unsafe { cg_payoff(p, flat.as_ptr(), flat.len(), 1.5, out.as_mut_ptr(), out.len()) };
    assert_eq!(status, CgStatus::InvalidArgument);
    unsafe { cg_params_free(p) };
}

#[test]
fn public_goods_rejects_bad_split() {
    let p = params("public_goods", 2);
    let mut out = vec![0.0; 4];
    let mut ok = Vec::new();
    for _ in 0..4 {
        ok.extend([0u32, 10, 0]);
    }
    assert_eq!(unsafe { cg_payoff(p, ok.as_ptr(), ok.len(), 0.0, out.as_mut_ptr(), 4) }, CgStatus::Ok);
    assert!(out.iter().all(|&x| x > 0.0));
    let mut bad = ok.clone();
    bad[0] = 5;
    assert_eq!(unsafe { cg_payoff(p, bad.as_ptr(), bad.len(), 0.0, out.as_mut_ptr(), 4) }, CgStatus::InvalidArgument);
    unsafe { cg_params_free(p) };
}

#[test]
fn parse_decision_round_trip() {
    let p = params("weakest_link", 0);
    let mut out = ptr::null_mut();
    let raw = c("Sure. {\"effort\": 4}");
    assert_eq!(unsafe { cg_parse_decision(p, raw.as_ptr(), &mut out) }, CgStatus::Ok);
    let d: Decision = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(d, Decision::Effort(4));

    let raw = c("no json here");
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { cg_parse_decision(p, raw.as_ptr(), &mut out) }, CgStatus::ParseFailed);
    assert!(out.is_null());
    assert!(!last_error().is_empty());
    unsafe { cg_params_free(p) };
}

#[test]
fn simulation_handle() {
    let game = GameKind::WeakestLink;
    let cfg = SimulationConfig::new(
        game,
        GameParams::for_game(game),
        AgentSpec::Scripted(ScriptedStrategy::ParetoPlayer),
        3,
    );
    let json = c(&serde_json::to_string(&cfg).unwrap());
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { cg_run_simulation(json.as_ptr(), &mut t) }, CgStatus::Ok);
    assert!(unsafe { cg_transcript_is_completed(t) });
    let mut metric = 0.0;
    assert_eq!(unsafe { cg_transcript_metric(t, &mut metric) }, CgStatus::Ok);
    assert_eq!(metric, 10.0);

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { cg_transcript_to_json(t, &mut out) }, CgStatus::Ok);
    let back = Transcript::from_json_line(&take_string(out)).unwrap();
    assert_eq!(back.metric, Some(10.0));
    unsafe { cg_transcript_free(t) };
}

#[test]
fn simulation_rejects_bad_config() {
    let mut t = ptr::null_mut();
    let json = c("{\"game\": \"cpr\"}");
    assert_eq!(unsafe { cg_run_simulation(json.as_ptr(), &mut t) }, CgStatus::InvalidArgument);
    assert!(t.is_null());
    let bytes = [0xffu8, 0xfe, 0];
    let status = unsafe { cg_run_simulation(bytes.as_ptr().cast(), &mut t) };
    assert_eq!(status, CgStatus::InvalidUtf8);
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/coopgym.h")).unwrap();
    for name in [
        "cg_version",
        "cg_last_error_message",
        "cg_string_free",
        "cg_params_new",
        "cg_params_from_json",
        "cg_params_free",
        "cg_anchors",
        "cg_pareto_proximity",
        "cg_payoff",
        "cg_parse_decision",
        "cg_run_simulation",
        "cg_transcript_metric",
        "cg_transcript_to_json",
        "cg_transcript_free",
        "CG_STATUS_OK",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
