use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{mean_sd, AnalysisError};

pub const DEFAULT_SUBSET_SIZES: [usize; 8] = [2, 5, 10, 15, 20, 30, 40, 50];
pub const DEFAULT_RESAMPLES: usize = 200;

/// Bootstrap error of the mean estimate at one simulation count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub subset_size: usize,
    pub mean_error: f64,
    pub sd_error: f64,
    pub p95_error: f64,
    /// `mean_error` over the full-data sample sd; 0 when that sd is 0.
    pub mean_error_sd_units: f64,
}

/// Linear-interpolated percentile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// For each subset size k, draws `resamples` samples of size k with
/// replacement and records |sample mean − full mean|. Sizes are processed in
/// the given order from one RNG stream.
pub fn bootstrap_convergence<R: Rng + ?Sized>(
    metrics: &[f64],
    subset_sizes: &[usize],
    resamples: usize,
    rng: &mut R,
) -> Result<Vec<ConvergencePoint>, AnalysisError> {
    if metrics.is_empty() {
        return Err(AnalysisError::EmptyMetrics);
    }
    if resamples == 0 {
        return Err(AnalysisError::ZeroResamples);
    }
    let n = metrics.len();
    if let Some(&k) = subset_sizes.iter().find(|&&k| k == 0 || k > n) {
        return Err(AnalysisError::InvalidSubsetSize { k, available: n });
    }
    let (full_mean, full_sd) = mean_sd(metrics);
    let mut out = Vec::with_capacity(subset_sizes.len());
    for &k in subset_sizes {
        let mut errors: Vec<f64> = (0..resamples)
            .map(|_| {
                let s: f64 = (0..k).map(|_| metrics[rng.random_range(0..n)]).sum();
                (s / k as f64 - full_mean).abs()
            })
            .collect();
        errors.sort_by(f64::total_cmp);
        let (me, sd) = mean_sd(&errors);
        out.push(ConvergencePoint {
            subset_size: k,
            mean_error: me,
            sd_error: sd,
            p95_error: percentile(&errors, 0.95),
            mean_error_sd_units: if full_sd > 0.0 { me / full_sd } else { 0.0 },
        });
    }
    Ok(out)
}
