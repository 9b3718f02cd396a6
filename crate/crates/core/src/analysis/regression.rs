use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::games::GameKind;

/// Tag carried by every regression output.
pub const OLS_METHOD_LABEL: &str = "OLS with fixed-effect dummies (least-squares approximation, not a Bayesian fit)";

/// A pivot below this fraction of its diagonal entry marks the column as
/// linearly dependent on the columns before it.
const COLLINEAR_TOL: f64 = 1e-9;
const RIDGE_SCALE: f64 = 1e-8;

/// One observation of the proximity regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationRow {
    pub log10_size: f64,
    pub thinking: bool,
    pub cot: bool,
    pub tom: bool,
    pub group_size: f64,
    pub game: String,
    #[serde(default)]
    pub family: Option<String>,
    pub proximity: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignOptions {
    /// Adds one dummy per model family beyond the alphabetically first.
    pub family_dummies: bool,
}

/// Row-major design matrix with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl DesignMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub method: String,
    pub predictor_names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub r_squared: f64,
    pub n_obs: usize,
    /// True when the ridge term was needed to solve the normal equations.
    pub regularized: bool,
    /// Columns found to be linear combinations of earlier columns.
    pub aliased: Vec<String>,
}

fn bool01(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Intercept, log10 size, thinking, CoT, ToM, group size and five game
/// dummies (Collective Risk is the reference level), then optional family
/// dummies.
pub fn build_design_matrix(rows: &[ObservationRow], opts: DesignOptions) -> Result<DesignMatrix, AnalysisError> {
    let dummy_games: Vec<GameKind> =
        GameKind::ALL.into_iter().filter(|g| *g != GameKind::CollectiveRisk).collect();
    let mut names: Vec<String> = ["intercept", "log10_size", "thinking", "cot", "tom", "group_size"]
        .into_iter()
        .map(String::from)
        .collect();
    names.extend(dummy_games.iter().map(|g| format!("game_{g}")));

    let families: Vec<String> = if opts.family_dummies {
        let mut f = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            f.push(r.family.clone().ok_or(AnalysisError::MissingFamily(i))?);
        }
        f.sort();
        f.dedup();
        f.into_iter().skip(1).collect()
    } else {
        Vec::new()
    };
    names.extend(families.iter().map(|f| format!("family_{f}")));

    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        let game: GameKind = r.game.parse().map_err(|_| AnalysisError::UnknownGame(r.game.clone()))?;
        let mut x = vec![1.0, r.log10_size, bool01(r.thinking), bool01(r.cot), bool01(r.tom), r.group_size];
        x.extend(dummy_games.iter().map(|g| bool01(*g == game)));
        x.extend(families.iter().map(|f| bool01(r.family.as_ref() == Some(f))));
        out.push(x);
    }
    Ok(DesignMatrix { names, rows: out })
}

/// Lower Cholesky factor of `a`. Columns whose pivot collapses below
/// `tol` times their diagonal are zeroed and reported.
fn cholesky(a: &[Vec<f64>], tol: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let p = a.len();
    let mut l = vec![vec![0.0; p]; p];
    let mut collapsed = Vec::new();
    for j in 0..p {
        let d = a[j][j] - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
        if !(d > tol * a[j][j]) || a[j][j] <= 0.0 {
            collapsed.push(j);
            continue;
        }
        let ljj = d.sqrt();
        l[j][j] = ljj;
        for i in j + 1..p {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            l[i][j] = (a[i][j] - s) / ljj;
        }
    }
    (l, collapsed)
}

fn cholesky_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let p = l.len();
    let mut z = vec![0.0; p];
    for i in 0..p {
        let s: f64 = (0..i).map(|k| l[i][k] * z[k]).sum();
        z[i] = (b[i] - s) / l[i][i];
    }
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|k| l[k][i] * x[k]).sum();
        x[i] = (z[i] - s) / l[i][i];
    }
    x
}

fn xt_times(x: &DesignMatrix, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.n_cols()];
    for (row, &vi) in x.rows.iter().zip(v) {
        for (o, &xij) in out.iter_mut().zip(row) {
            *o += xij * vi;
        }
    }
    out
}

fn residuals(x: &DesignMatrix, y: &[f64], beta: &[f64]) -> Vec<f64> {
    x.rows
        .iter()
        .zip(y)
        .map(|(row, &yi)| yi - row.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>())
        .collect()
}

/// Least squares via the normal equations.
///
/// When XᵀX is numerically singular a ridge term λ = 1e-8·trace(XᵀX)/cols is
/// added, which approximates the minimum-norm solution; the offending columns
/// are listed in `aliased`.
pub fn ols_fit(x: &DesignMatrix, y: &[f64]) -> Result<RegressionResult, AnalysisError> {
    let (n, p) = (x.n_rows(), x.n_cols());
    if n != y.len() {
        return Err(AnalysisError::LengthMismatch { x_rows: n, y_len: y.len() });
    }
    if n < p || p == 0 {
        return Err(AnalysisError::UnderDetermined { rows: n, cols: p });
    }
    for (i, row) in x.rows.iter().enumerate() {
        if row.len() != p {
            return Err(AnalysisError::RaggedRow { row: i, got: row.len(), expected: p });
        }
    }
    if !x.rows.iter().flatten().chain(y).all(|v| v.is_finite()) {
        return Err(AnalysisError::NonFinite);
    }

    let mut xtx = vec![vec![0.0; p]; p];
    for row in &x.rows {
        for i in 0..p {
            for j in 0..=i {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..p {
        for j in i + 1..p {
            xtx[i][j] = xtx[j][i];
        }
    }
    let xty = xt_times(x, y);

    let (mut l, collapsed) = cholesky(&xtx, COLLINEAR_TOL);
    let regularized = !collapsed.is_empty();
    if regularized {
        let trace: f64 = (0..p).map(|i| xtx[i][i]).sum();
        let lambda = RIDGE_SCALE * trace / p as f64;
        let mut ridge = xtx.clone();
        for (i, r) in ridge.iter_mut().enumerate() {
            r[i] += lambda;
        }
        let (lr, failed) = cholesky(&ridge, 0.0);
        if !failed.is_empty() || lambda <= 0.0 {
            return Err(AnalysisError::RankDeficient(collapsed.iter().map(|&j| x.names[j].clone()).collect()));
        }
        l = lr;
    }

    let mut beta = cholesky_solve(&l, &xty);
    if !regularized {
        // One refinement step tightens residual orthogonality.
        let delta = cholesky_solve(&l, &xt_times(x, &residuals(x, y, &beta)));
        for (b, d) in beta.iter_mut().zip(delta) {
            *b += d;
        }
    }

    let res = residuals(x, y, &beta);
    let ss_res: f64 = res.iter().map(|r| r * r).sum();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum();
    let r_squared = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };

    let rank = p - collapsed.len();
    let sigma2 = if n > rank { ss_res / (n - rank) as f64 } else { f64::NAN };
    let std_errors = (0..p)
        .map(|j| {
            let mut e = vec![0.0; p];
            e[j] = 1.0;
            (sigma2 * cholesky_solve(&l, &e)[j]).sqrt()
        })
        .collect();

    Ok(RegressionResult {
        method: OLS_METHOD_LABEL.to_string(),
        predictor_names: x.names.clone(),
        coefficients: beta,
        std_errors,
        r_squared,
        n_obs: n,
        regularized,
        aliased: collapsed.iter().map(|&j| x.names[j].clone()).collect(),
    })
}
