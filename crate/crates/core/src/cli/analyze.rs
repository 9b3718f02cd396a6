use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::manifest::{AgentMeta, ConvergenceOptions, RunManifest};
use super::report::{
    convergence_rows, group_conditions, profile_rows, read_csv, read_transcripts, write_csv, ConditionGroup,
    ConvergenceRow,
};
use super::run::{MANIFEST_ECHO_FILE, TRANSCRIPTS_FILE};
use super::CliError;
use crate::analysis::{
    build_design_matrix, ols_fit, DesignOptions, ObservationRow, ProfileRow, RegressionResult,
};
use crate::engine::PromptStrategy;
use crate::games::{equilibrium_anchors, pareto_proximity};

pub const ANALYSIS_DIR: &str = "analysis";
/// Optional pre-labeled regression rows; used instead of transcripts when present.
pub const OBSERVATIONS_FILE: &str = "observations.csv";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AnalyzeOptions {
    pub ols: bool,
    pub convergence: bool,
    pub family_dummies: bool,
}

#[derive(Debug, Clone)]
pub struct AnalyzeReport {
    pub out_dir: PathBuf,
    pub profiles: Vec<ProfileRow>,
    pub regression: Option<RegressionResult>,
    pub convergence: Option<Vec<ConvergenceRow>>,
}

#[derive(Serialize)]
struct CoefficientRow<'a> {
    predictor: &'a str,
    coefficient: f64,
    std_error: f64,
}

fn agent_meta(results_dir: &Path) -> Result<BTreeMap<String, AgentMeta>, CliError> {
    let path = results_dir.join(MANIFEST_ECHO_FILE);
    let text = fs::read_to_string(&path).map_err(|_| CliError::MissingInput(path.display().to_string()))?;
    let echo: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Corrupt {
        path: path.clone(),
        line: e.line(),
        detail: e.to_string(),
    })?;
    let manifest: RunManifest = serde_json::from_value(echo.get("manifest").cloned().unwrap_or_default())
        .map_err(|e| CliError::Corrupt { path: path.clone(), line: 0, detail: format!("manifest: {e}") })?;
    Ok(manifest.agents.into_iter().map(|a| (a.label, a.meta)).collect())
}

/// One regression row per completed transcript whose game has anchors.
fn observations_from_transcripts(
    groups: &[ConditionGroup],
    meta: &BTreeMap<String, AgentMeta>,
) -> Result<Vec<ObservationRow>, CliError> {
    let mut rows = Vec::new();
    for g in groups {
        let m = meta.get(&g.agent_label).and_then(|m| m.size_b.map(|s| (s, m))).ok_or_else(|| {
            CliError::MissingInput(format!(
                "size_b metadata for agent {:?}; add it to the manifest or supply {OBSERVATIONS_FILE}",
                g.agent_label
            ))
        })?;
        let (size_b, meta) = m;
        for t in g.transcripts.iter().filter(|t| t.status.is_completed()) {
            let (Some(metric), Ok(anchors)) = (t.metric, equilibrium_anchors(t.config.game, &t.config.params)) else {
                continue;
            };
            rows.push(ObservationRow {
                log10_size: size_b.log10(),
                thinking: meta.thinking,
                cot: t.config.strategy.contains(&PromptStrategy::ChainOfThought),
                tom: t.config.strategy.contains(&PromptStrategy::TheoryOfMind),
                group_size: t.config.params.group_size as f64,
                game: t.config.game.to_string(),
                family: meta.family.clone(),
                proximity: pareto_proximity(metric, &anchors),
            });
        }
    }
    Ok(rows)
}

/// Recomputes profiles from transcripts.jsonl and optionally fits the
/// proximity regression and bootstrap curves. Reports go to `analysis/`.
pub fn analyze_command(results_dir: &Path, opts: AnalyzeOptions) -> Result<AnalyzeReport, CliError> {
    if !results_dir.is_dir() {
        return Err(CliError::MissingInput(results_dir.display().to_string()));
    }
    let groups = group_conditions(read_transcripts(&results_dir.join(TRANSCRIPTS_FILE))?);
    let out_dir = results_dir.join(ANALYSIS_DIR);
    fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;

    let profiles = profile_rows(&groups)?;
    write_csv(&out_dir.join("profiles.csv"), &profiles)?;

    let regression = if opts.ols {
        let obs_path = results_dir.join(OBSERVATIONS_FILE);
        let rows: Vec<ObservationRow> = if obs_path.is_file() {
            read_csv(&obs_path)?
        } else {
            observations_from_transcripts(&groups, &agent_meta(results_dir)?)?
        };
        let design = build_design_matrix(&rows, DesignOptions { family_dummies: opts.family_dummies })?;
        let y: Vec<f64> = rows.iter().map(|r| r.proximity).collect();
        let fit = ols_fit(&design, &y)?;
        let table: Vec<CoefficientRow> = fit
            .predictor_names
            .iter()
            .zip(fit.coefficients.iter().zip(&fit.std_errors))
            .map(|(n, (&c, &s))| CoefficientRow { predictor: n, coefficient: c, std_error: s })
            .collect();
        write_csv(&out_dir.join("ols.csv"), &table)?;
        let path = out_dir.join("ols.json");
        let text = serde_json::to_string_pretty(&fit).expect("fit serializes");
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Some(fit)
    } else {
        None
    };

    let convergence = if opts.convergence {
        let rows = convergence_rows(&groups, &ConvergenceOptions::default())?;
        write_csv(&out_dir.join("convergence.csv"), &rows)?;
        Some(rows)
    } else {
        None
    };

    Ok(AnalyzeReport { out_dir, profiles, regression, convergence })
}
