use super::{expected_variant, Decision, GameError, GameKind};

/// Mean of the game's designated scalar over all players and rounds.
///
/// `rounds` holds the main-phase decisions of each round. For Public Goods
/// the scalar is the group-pool component; sanction decisions never count.
pub fn primary_metric<R: AsRef<[Decision]>>(kind: GameKind, rounds: &[R]) -> Result<f64, GameError> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for round in rounds {
        for d in round.as_ref() {
            let matches = d.variant_name() == expected_variant(kind);
            let value = d.metric_value().filter(|_| matches).ok_or(GameError::MetricVariant {
                kind,
                got: d.variant_name(),
            })?;
            sum += f64::from(value);
            count += 1;
        }
    }
    if count == 0 {
        return Err(GameError::EmptyMetric);
    }
    Ok(sum / count as f64)
}
