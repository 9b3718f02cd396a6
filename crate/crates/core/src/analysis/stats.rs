use super::AnalysisError;

/// Arithmetic mean; NaN for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean and sample (n−1) standard deviation. The sd of a single value is 0.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let m = mean(values);
    if values.len() < 2 {
        return (m, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (m, (ss / (values.len() - 1) as f64).sqrt())
}

/// Standardizes with the sample standard deviation.
pub fn zscore(values: &[f64]) -> Result<Vec<f64>, AnalysisError> {
    if values.len() < 2 {
        return Err(AnalysisError::TooFewValues(values.len()));
    }
    let (m, sd) = mean_sd(values);
    if sd == 0.0 || !sd.is_finite() {
        return Err(AnalysisError::ZeroVariance);
    }
    Ok(values.iter().map(|v| (v - m) / sd).collect())
}
