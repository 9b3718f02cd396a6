use serde::{Deserialize, Serialize};

use super::{payoff_oring, GameError, GameKind, GameParams};

/// Selfish (Nash) and cooperative (Pareto) reference points on a game's
/// primary-metric scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumAnchors {
    pub nash_metric: f64,
    pub pareto_metric: f64,
}

/// Per-round fair share that exactly meets the Collective Risk threshold.
pub fn collective_risk_fair_share(p: &GameParams) -> f64 {
    f64::from(p.risk_threshold) / (p.n_players() as f64 * f64::from(p.rounds))
}

/// Smallest symmetric withdrawal for which the O-Ring system succeeds,
/// by exhaustive scan over `0..=endowment`.
pub fn oring_min_successful_withdrawal(p: &GameParams) -> Result<u32, GameError> {
    let n = p.n_players();
    for w in 0..=p.endowment {
        if payoff_oring(&vec![w; n], p)?.success == Some(true) {
            return Ok(w);
        }
    }
    Err(GameError::NoCooperativeAnchor(GameKind::ORing))
}

pub fn equilibrium_anchors(kind: GameKind, p: &GameParams) -> Result<EquilibriumAnchors, GameError> {
    p.validate()?;
    let e = f64::from(p.endowment);
    let (nash, pareto) = match kind {
        GameKind::WeakestLink => (0.0, e),
        GameKind::Cpr | GameKind::CprSanction => (e, 0.0),
        GameKind::CollectiveRisk => {
            let share = collective_risk_fair_share(p);
            if share > e {
                return Err(GameError::NoCooperativeAnchor(kind));
            }
            (0.0, share)
        }
        GameKind::ORing => (0.0, f64::from(oring_min_successful_withdrawal(p)?)),
        GameKind::PublicGoods => (0.0, e),
    };
    if nash == pareto {
        return Err(GameError::NoCooperativeAnchor(kind));
    }
    Ok(EquilibriumAnchors { nash_metric: nash, pareto_metric: pareto })
}

/// Normalized distance from the Pareto anchor: 0 is Pareto play, 1 is Nash
/// play; overshoot in either direction is clamped.
pub fn pareto_proximity(metric: f64, anchors: &EquilibriumAnchors) -> f64 {
    let span = (anchors.nash_metric - anchors.pareto_metric).abs();
    ((metric - anchors.pareto_metric).abs() / span).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_anchors() {
        let a = equilibrium_anchors(GameKind::WeakestLink, &GameParams::default()).unwrap();
        assert_eq!((a.nash_metric, a.pareto_metric), (0.0, 10.0));
        let a = equilibrium_anchors(GameKind::Cpr, &GameParams::default()).unwrap();
        assert_eq!((a.nash_metric, a.pareto_metric), (10.0, 0.0));
        let a = equilibrium_anchors(GameKind::PublicGoods, &GameParams::default()).unwrap();
        assert_eq!((a.nash_metric, a.pareto_metric), (0.0, 10.0));
    }

    #[test]
    fn collective_risk_fair_share_uses_actual_n() {
        let a = equilibrium_anchors(GameKind::CollectiveRisk, &GameParams::for_game(GameKind::CollectiveRisk))
            .unwrap();
        assert_eq!(a.pareto_metric, 1.0);
        // The 1.25 figure corresponds to eight players.
        let p = GameParams::for_game(GameKind::CollectiveRisk).with_group_size(4);
        assert_eq!(collective_risk_fair_share(&p), 1.25);
    }

    /// Brute-force oracle for the O-Ring cooperative anchor: evaluates the
    /// production formula directly for every symmetric profile.
    fn oring_oracle(p: &GameParams) -> Option<u32> {
        (0..=p.endowment).find(|&w| {
            let n = p.n_players() as f64;
            let pool = (f64::from(p.oring_pool) - n * f64::from(w)).max(0.0);
            let q = f64::from(w) / f64::from(p.endowment);
            let prod = p.oring_scale * pool / f64::from(p.oring_pool) * q.powi(p.group_size as i32);
            prod >= p.oring_success_threshold
        })
    }

    #[test]
    fn oring_anchor_matches_brute_force() {
        let a = equilibrium_anchors(GameKind::ORing, &GameParams::default()).unwrap();
        assert_eq!((a.nash_metric, a.pareto_metric), (0.0, 6.0));
        for &size in GameKind::ORing.allowed_group_sizes() {
            let p = GameParams::default().with_group_size(size);
            let w = oring_min_successful_withdrawal(&p).unwrap();
            assert_eq!(Some(w), oring_oracle(&p), "group size {size}");
        }
        // Sizes 3 / 5 / 8 frozen from the oracle.
        let frozen: Vec<u32> = [3, 5, 8]
            .iter()
            .map(|&s| oring_min_successful_withdrawal(&GameParams::default().with_group_size(s)).unwrap())
            .collect();
        assert_eq!(frozen, vec![4, 6, 8]);
    }

    #[test]
    fn oring_without_successful_profile_has_no_anchor() {
        // 20 players exhaust the pool at any withdrawal that could succeed.
        let p = GameParams::default().with_group_size(10);
        assert!(matches!(
            equilibrium_anchors(GameKind::ORing, &p),
            Err(GameError::NoCooperativeAnchor(GameKind::ORing))
        ));
    }

    #[test]
    fn proximity_examples() {
        let a = EquilibriumAnchors { nash_metric: 0.0, pareto_metric: 10.0 };
        assert_eq!(pareto_proximity(10.0, &a), 0.0);
        assert_eq!(pareto_proximity(0.0, &a), 1.0);
        assert_eq!(pareto_proximity(7.5, &a), 0.25);
        let cpr = EquilibriumAnchors { nash_metric: 10.0, pareto_metric: 0.0 };
        assert_eq!(pareto_proximity(2.5, &cpr), 0.25);
    }

    #[test]
    fn proximity_endpoints_over_swept_params() {
        for kind in GameKind::ALL {
            for &size in kind.allowed_group_sizes() {
                let p = GameParams::for_game(kind).with_group_size(size);
                let a = equilibrium_anchors(kind, &p).unwrap();
                assert_ne!(a.nash_metric, a.pareto_metric);
                assert_eq!(pareto_proximity(a.pareto_metric, &a), 0.0);
                assert_eq!(pareto_proximity(a.nash_metric, &a), 1.0);
            }
        }
    }
}
