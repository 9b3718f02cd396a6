//! Payoff functions for the six games.
//!
//! Every function here is pure: identical inputs give bit-identical outputs.

use serde::{Deserialize, Serialize};

use super::{Decision, GameError, GameParams, PlayerId};

/// Result of settling one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub payoffs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool_remaining: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_productions: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub success: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cumulative_contributions: Option<f64>,
}

impl RoundOutcome {
    fn payoffs_only(payoffs: Vec<f64>) -> Self {
        Self {
            payoffs,
            pool_remaining: None,
            group_productions: None,
            success: None,
            cumulative_contributions: None,
        }
    }
}

/// N×N sanction units; row `i` holds what player `i` imposed on each target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SanctionMatrix(pub Vec<Vec<u32>>);

impl SanctionMatrix {
    pub fn zeros(n: usize) -> Self {
        Self(vec![vec![0; n]; n])
    }

    /// Builds the matrix from per-player `Decision::Sanction` maps, in player order.
    pub fn from_decisions(decisions: &[Decision]) -> Result<Self, GameError> {
        let n = decisions.len();
        let mut m = Self::zeros(n);
        for (i, d) in decisions.iter().enumerate() {
            let Decision::Sanction(targets) = d else {
                return Err(GameError::WrongDecision {
                    player: PlayerId(i),
                    expected: "sanction",
                    got: d.variant_name(),
                });
            };
            for (&target, &units) in targets {
                if target.0 >= n {
                    return Err(GameError::CrossGroupSanction { from: PlayerId(i), to: target });
                }
                m.0[i][target.0] = units;
            }
        }
        Ok(m)
    }

    pub fn total_units(&self) -> u64 {
        self.0.iter().flatten().map(|&u| u64::from(u)).sum()
    }
}

fn check_len(len: usize, p: &GameParams) -> Result<(), GameError> {
    if len != p.n_players() {
        return Err(GameError::WrongPlayerCount { expected: p.n_players(), got: len });
    }
    Ok(())
}

fn check_actions(values: &[u32], p: &GameParams) -> Result<(), GameError> {
    check_len(values.len(), p)?;
    if let Some((i, &v)) = values.iter().enumerate().find(|(_, &v)| v > p.endowment) {
        return Err(GameError::ActionOutOfRange { player: PlayerId(i), value: v, max: p.endowment });
    }
    Ok(())
}

/// Weakest-link: `u_i = 2·min_j e_j − e_i`, minimum taken over all players.
pub fn payoff_weakest_link(efforts: &[u32], p: &GameParams) -> Result<RoundOutcome, GameError> {
    check_actions(efforts, p)?;
    let min = f64::from(*efforts.iter().min().expect("n_players >= 2"));
    let payoffs = efforts.iter().map(|&e| 2.0 * min - f64::from(e)).collect();
    Ok(RoundOutcome::payoffs_only(payoffs))
}

/// Common-pool resource: `u_i = x_i + factor·max(0, C − Σx)/N`.
pub fn payoff_cpr(extractions: &[u32], p: &GameParams) -> Result<RoundOutcome, GameError> {
    check_actions(extractions, p)?;
    let total: u64 = extractions.iter().map(|&x| u64::from(x)).sum();
    let pool = (f64::from(p.cpr_capacity) - total as f64).max(0.0);
    let share = p.cpr_factor * pool / p.n_players() as f64;
    let payoffs = extractions.iter().map(|&x| f64::from(x) + share).collect();
    Ok(RoundOutcome {
        pool_remaining: Some(pool),
        ..RoundOutcome::payoffs_only(payoffs)
    })
}

/// Subtracts sanction spending (row sums) and sanction damage (column sums)
/// from the phase-1 payoffs.
pub fn apply_sanctions(
    phase1: &RoundOutcome,
    sanctions: &SanctionMatrix,
    p: &GameParams,
) -> Result<RoundOutcome, GameError> {
    let n = p.n_players();
    check_len(phase1.payoffs.len(), p)?;
    if sanctions.0.len() != n || sanctions.0.iter().any(|row| row.len() != n) {
        return Err(GameError::WrongPlayerCount { expected: n, got: sanctions.0.len() });
    }
    let mut spent = vec![0u64; n];
    let mut received = vec![0u64; n];
    for (i, row) in sanctions.0.iter().enumerate() {
        for (j, &units) in row.iter().enumerate() {
            if units == 0 {
                continue;
            }
            if i == j {
                return Err(GameError::SelfSanction(PlayerId(i)));
            }
            if !p.same_group(PlayerId(i), PlayerId(j)) {
                return Err(GameError::CrossGroupSanction { from: PlayerId(i), to: PlayerId(j) });
            }
            spent[i] += u64::from(units);
            received[j] += u64::from(units);
        }
    }
    let payoffs = phase1
        .payoffs
        .iter()
        .enumerate()
        .map(|(i, &u)| u - p.sanction_cost * spent[i] as f64 - p.sanction_damage * received[i] as f64)
        .collect();
    Ok(RoundOutcome { payoffs, ..phase1.clone() })
}

/// Settles a finished Collective Risk game.
///
/// `history` is `rounds × N` contributions. Savings are what each player did
/// not contribute. If the global total misses the threshold, everyone loses
/// their savings when `loss_draw < risk_probability`.
pub fn payoff_collective_risk(
    history: &[Vec<u32>],
    p: &GameParams,
    loss_draw: f64,
) -> Result<RoundOutcome, GameError> {
    if history.len() != p.rounds as usize {
        return Err(GameError::IncompleteHistory { expected: p.rounds as usize, got: history.len() });
    }
    let n = p.n_players();
    let mut savings = vec![0.0; n];
    let mut total = 0u64;
    for round in history {
        check_actions(round, p)?;
        for (i, &c) in round.iter().enumerate() {
            savings[i] += f64::from(p.endowment - c);
            total += u64::from(c);
        }
    }
    let success = total >= u64::from(p.risk_threshold);
    let lost = !success && loss_draw < p.risk_probability;
    let payoffs = if lost { vec![0.0; n] } else { savings };
    Ok(RoundOutcome {
        success: Some(success),
        cumulative_contributions: Some(total as f64),
        ..RoundOutcome::payoffs_only(payoffs)
    })
}

/// O-Ring team production.
///
/// `P_g = scale·(pool remaining / R)·Π_{i∈g} (w_i / endowment)`; the system
/// succeeds when every group's production reaches the threshold, and each
/// player then earns `reward/N − w_i` (otherwise `−w_i`).
pub fn payoff_oring(withdrawals: &[u32], p: &GameParams) -> Result<RoundOutcome, GameError> {
    check_actions(withdrawals, p)?;
    let n = p.n_players();
    let total: u64 = withdrawals.iter().map(|&w| u64::from(w)).sum();
    let pool_cap = f64::from(p.oring_pool);
    let pool = (pool_cap - total as f64).max(0.0);
    let factor = p.oring_scale * pool / pool_cap;
    let productions: Vec<f64> = (0..p.group_count)
        .map(|g| {
            let quality: f64 = withdrawals[g * p.group_size..(g + 1) * p.group_size]
                .iter()
                .map(|&w| f64::from(w) / f64::from(p.endowment))
                .product();
            factor * quality
        })
        .collect();
    let success = productions.iter().all(|&prod| prod >= p.oring_success_threshold);
    let reward = if success { p.oring_reward / n as f64 } else { 0.0 };
    let payoffs = withdrawals.iter().map(|&w| reward - f64::from(w)).collect();
    Ok(RoundOutcome {
        payoffs,
        pool_remaining: Some(pool),
        group_productions: Some(productions),
        success: Some(success),
        cumulative_contributions: None,
    })
}

/// Public goods with keep / group pool / global pool channels.
pub fn payoff_public_goods(allocations: &[Decision], p: &GameParams) -> Result<RoundOutcome, GameError> {
    check_len(allocations.len(), p)?;
    let mut parts = Vec::with_capacity(allocations.len());
    for (i, d) in allocations.iter().enumerate() {
        super::validate_decision(super::GameKind::PublicGoods, d, p)
            .map_err(|v| GameError::InvalidDecision { player: PlayerId(i), violation: v })?;
        let Decision::Allocate { keep, group, global } = *d else { unreachable!("validated") };
        parts.push((f64::from(keep), f64::from(group), f64::from(global)));
    }
    let n = p.n_players() as f64;
    let global_share = p.pg_global_multiplier * parts.iter().map(|t| t.2).sum::<f64>() / n;
    let group_share: Vec<f64> = (0..p.group_count)
        .map(|g| {
            let pool: f64 = parts[g * p.group_size..(g + 1) * p.group_size].iter().map(|t| t.1).sum();
            p.pg_group_multiplier * pool / p.group_size as f64
        })
        .collect();
    let payoffs = parts
        .iter()
        .enumerate()
        .map(|(i, &(keep, _, _))| keep + group_share[p.group_of(PlayerId(i)).0] + global_share)
        .collect();
    Ok(RoundOutcome::payoffs_only(payoffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-9;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= TOL)
    }

    fn params() -> GameParams {
        GameParams::default()
    }

    #[test]
    fn weakest_link_examples() {
        let p = params();
        let out = payoff_weakest_link(&[10; 10], &p).unwrap();
        assert!(close(&out.payoffs, &[10.0; 10]));
        assert!(out.pool_remaining.is_none());

        let mut e = [10; 10];
        e[0] = 0;
        let out = payoff_weakest_link(&e, &p).unwrap();
        assert_eq!(out.payoffs[0], 0.0);
        assert!(out.payoffs[1..].iter().all(|&u| u == -10.0));

        let mut e = [2; 10];
        e[3] = 3;
        assert_eq!(payoff_weakest_link(&e, &p).unwrap().payoffs[3], 1.0);
    }

    #[test]
    fn wrong_length_is_rejected() {
        assert!(matches!(
            payoff_weakest_link(&[1, 2, 3], &params()),
            Err(GameError::WrongPlayerCount { expected: 10, got: 3 })
        ));
        assert!(payoff_cpr(&[0; 9], &params()).is_err());
        assert!(payoff_oring(&[0; 11], &params()).is_err());
    }

    #[test]
    fn cpr_examples() {
        let p = params();
        let out = payoff_cpr(&[10; 10], &p).unwrap();
        assert_eq!(out.pool_remaining, Some(0.0));
        assert!(close(&out.payoffs, &[10.0; 10]));
        let out = payoff_cpr(&[0; 10], &p).unwrap();
        assert!(close(&out.payoffs, &[30.0; 10]));
        let out = payoff_cpr(&[5; 10], &p).unwrap();
        assert_eq!(out.pool_remaining, Some(50.0));
        assert!(close(&out.payoffs, &[20.0; 10]));
    }

    #[test]
    fn sanction_examples() {
        let p = params();
        let phase1 = payoff_cpr(&[5; 10], &p).unwrap();
        let zero = apply_sanctions(&phase1, &SanctionMatrix::zeros(10), &p).unwrap();
        assert_eq!(zero.payoffs, phase1.payoffs);

        let mut m = SanctionMatrix::zeros(10);
        m.0[0][1] = 2;
        let out = apply_sanctions(&phase1, &m, &p).unwrap();
        assert!((out.payoffs[0] - (phase1.payoffs[0] - 2.0)).abs() <= TOL);
        assert!((out.payoffs[1] - (phase1.payoffs[1] - 4.0)).abs() <= TOL);
        assert_eq!(out.payoffs[2], phase1.payoffs[2]);

        let mut m = SanctionMatrix::zeros(10);
        m.0[0][1] = 1;
        m.0[1][0] = 1;
        let out = apply_sanctions(&phase1, &m, &p).unwrap();
        assert!((out.payoffs[0] - (phase1.payoffs[0] - 3.0)).abs() <= TOL);
        assert!((out.payoffs[1] - (phase1.payoffs[1] - 3.0)).abs() <= TOL);
    }

    #[test]
    fn sanction_errors() {
        let p = params();
        let phase1 = payoff_cpr(&[5; 10], &p).unwrap();
        let mut m = SanctionMatrix::zeros(10);
        m.0[0][7] = 1;
        assert!(matches!(apply_sanctions(&phase1, &m, &p), Err(GameError::CrossGroupSanction { .. })));
        let mut m = SanctionMatrix::zeros(10);
        m.0[3][3] = 1;
        assert!(matches!(apply_sanctions(&phase1, &m, &p), Err(GameError::SelfSanction(PlayerId(3)))));
    }

    fn cr_params() -> GameParams {
        GameParams::for_game(super::super::GameKind::CollectiveRisk)
    }

    #[test]
    fn collective_risk_threshold_met() {
        let p = cr_params();
        let history = vec![vec![1; 10]; 10];
        let out = payoff_collective_risk(&history, &p, 0.0).unwrap();
        assert_eq!(out.success, Some(true));
        assert_eq!(out.cumulative_contributions, Some(100.0));
        assert!(close(&out.payoffs, &[90.0; 10]));
    }

    fn history_totaling_99() -> Vec<Vec<u32>> {
        let mut h = vec![vec![1; 10]; 10];
        h[0][0] = 0;
        h
    }

    #[test]
    fn collective_risk_loss_branches() {
        let p = cr_params();
        let h = history_totaling_99();
        let lost = payoff_collective_risk(&h, &p, 0.3).unwrap();
        assert_eq!(lost.success, Some(false));
        assert_eq!(lost.cumulative_contributions, Some(99.0));
        assert!(lost.payoffs.iter().all(|&u| u == 0.0));

        let kept = payoff_collective_risk(&h, &p, 0.7).unwrap();
        assert_eq!(kept.success, Some(false));
        let mut savings = vec![90.0; 10];
        savings[0] = 91.0;
        assert!(close(&kept.payoffs, &savings));
    }

    #[test]
    fn collective_risk_requires_full_history() {
        let p = cr_params();
        assert!(matches!(
            payoff_collective_risk(&vec![vec![1; 10]; 9], &p, 0.5),
            Err(GameError::IncompleteHistory { expected: 10, got: 9 })
        ));
    }

    #[test]
    fn oring_examples() {
        let p = params();
        let out = payoff_oring(&[6; 10], &p).unwrap();
        assert_eq!(out.pool_remaining, Some(140.0));
        let prods = out.group_productions.as_ref().unwrap();
        assert_eq!(prods.len(), 2);
        // 1000·140/200 = 700; 0.6^5 = 0.07776
        for &prod in prods {
            assert!((prod - 54.432).abs() <= TOL, "{prod}");
        }
        assert_eq!(out.success, Some(true));
        assert!(close(&out.payoffs, &[14.0; 10]));

        let out = payoff_oring(&[5; 10], &p).unwrap();
        for &prod in out.group_productions.as_ref().unwrap() {
            assert!((prod - 23.4375).abs() <= TOL);
        }
        assert_eq!(out.success, Some(false));
        assert!(close(&out.payoffs, &[-5.0; 10]));

        let mut w = [8; 10];
        w[6] = 0;
        let out = payoff_oring(&w, &p).unwrap();
        assert_eq!(out.group_productions.as_ref().unwrap()[1], 0.0);
        assert_eq!(out.success, Some(false));
        let expected: Vec<f64> = w.iter().map(|&x| -f64::from(x)).collect();
        assert!(close(&out.payoffs, &expected));
    }

    fn alloc(keep: u32, group: u32, global: u32) -> Decision {
        Decision::Allocate { keep, group, global }
    }

    #[test]
    fn public_goods_examples() {
        let p = params();
        let out = payoff_public_goods(&vec![alloc(10, 0, 0); 10], &p).unwrap();
        assert!(close(&out.payoffs, &[10.0; 10]));
        let out = payoff_public_goods(&vec![alloc(0, 10, 0); 10], &p).unwrap();
        assert!(close(&out.payoffs, &[20.0; 10]));
        let out = payoff_public_goods(&vec![alloc(0, 0, 10); 10], &p).unwrap();
        assert!(close(&out.payoffs, &[15.0; 10]));
    }

    #[test]
    fn public_goods_rejects_bad_allocation() {
        let p = params();
        let mut a = vec![alloc(10, 0, 0); 10];
        a[4] = alloc(3, 3, 3);
        assert!(matches!(
            payoff_public_goods(&a, &p),
            Err(GameError::InvalidDecision { player: PlayerId(4), .. })
        ));
    }

    fn arb_allocation(e: u32) -> impl Strategy<Value = Decision> {
        (0..=e).prop_flat_map(move |k| (Just(k), 0..=e - k)).prop_map(move |(k, g)| alloc(k, g, e - k - g))
    }

    proptest! {
        #[test]
        fn public_goods_budget_conservation(
            size in 2usize..=10,
            allocs in proptest::collection::vec(arb_allocation(10), 20),
        ) {
            let p = params().with_group_size(size);
            let allocs = &allocs[..p.n_players()];
            let out = payoff_public_goods(allocs, &p).unwrap();
            let (mut k, mut g, mut n) = (0.0, 0.0, 0.0);
            for d in allocs {
                if let Decision::Allocate { keep, group, global } = *d {
                    k += f64::from(keep); g += f64::from(group); n += f64::from(global);
                }
            }
            let expected = k + p.pg_group_multiplier * g + p.pg_global_multiplier * n;
            let total: f64 = out.payoffs.iter().sum();
            prop_assert!((total - expected).abs() <= 1e-9);
        }

        #[test]
        fn cpr_marginal_extraction(
            x in proptest::collection::vec(0u32..=9, 10),
            who in 0usize..10,
        ) {
            let p = params();
            let total: u32 = x.iter().sum();
            // pool stays positive after the +1
            prop_assume!(total + 1 < p.cpr_capacity);
            let before = payoff_cpr(&x, &p).unwrap().payoffs[who];
            let mut y = x.clone();
            y[who] += 1;
            let after = payoff_cpr(&y, &p).unwrap().payoffs[who];
            let expected = 1.0 - p.cpr_factor / p.n_players() as f64;
            prop_assert!(((after - before) - expected).abs() <= 1e-9);
        }

        #[test]
        fn weakest_link_symmetry_and_upward_deviation(e in 0u32..10, who in 0usize..10, up in 1u32..=10) {
            let p = params();
            let sym = payoff_weakest_link(&[e; 10], &p).unwrap();
            prop_assert!(sym.payoffs.iter().all(|&u| u == f64::from(e)));
            let mut dev = [e; 10];
            dev[who] = (e + up).min(p.endowment);
            prop_assume!(dev[who] > e);
            let out = payoff_weakest_link(&dev, &p).unwrap();
            prop_assert!(out.payoffs[who] < sym.payoffs[who]);
        }

        #[test]
        fn sanction_accounting(units in proptest::collection::vec(0u32..=10, 100)) {
            let p = params();
            let mut m = SanctionMatrix::zeros(10);
            for i in 0..10 {
                for j in 0..10 {
                    if i != j && p.same_group(PlayerId(i), PlayerId(j)) {
                        m.0[i][j] = units[i * 10 + j];
                    }
                }
            }
            let phase1 = payoff_cpr(&[4; 10], &p).unwrap();
            let out = apply_sanctions(&phase1, &m, &p).unwrap();
            let lost: f64 = phase1.payoffs.iter().zip(&out.payoffs).map(|(a, b)| a - b).sum();
            let expected = (p.sanction_cost + p.sanction_damage) * m.total_units() as f64;
            prop_assert!((lost - expected).abs() <= 1e-9);
        }

        #[test]
        fn oring_zero_annihilates(w in proptest::collection::vec(0u32..=10, 10), zero_at in 0usize..10) {
            let p = params();
            let mut w = w;
            w[zero_at] = 0;
            let out = payoff_oring(&w, &p).unwrap();
            let g = p.group_of(PlayerId(zero_at)).0;
            prop_assert_eq!(out.group_productions.unwrap()[g], 0.0);
            prop_assert_eq!(out.success, Some(false));
        }

        #[test]
        fn payoffs_are_pure(x in proptest::collection::vec(0u32..=10, 10), draw in 0.0f64..1.0) {
            let p = params();
            prop_assert_eq!(payoff_cpr(&x, &p).unwrap(), payoff_cpr(&x, &p).unwrap());
            prop_assert_eq!(payoff_oring(&x, &p).unwrap(), payoff_oring(&x, &p).unwrap());
            let cr = GameParams::for_game(super::super::GameKind::CollectiveRisk);
            let h = vec![x.clone(); 10];
            let a = payoff_collective_risk(&h, &cr, draw).unwrap();
            let b = payoff_collective_risk(&h, &cr, draw).unwrap();
            prop_assert_eq!(
                a.payoffs.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                b.payoffs.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }
    }
}
