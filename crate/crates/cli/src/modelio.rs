//! JSON model summaries: the stable output of `fit` and the input of `gof`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use ordr2_core::{FittedModel, GofReport, LinearFit, LinkKind};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Schema identifier embedded in every summary; see
/// `schema/fit-summary.schema.json`.
pub const FIT_SCHEMA_ID: &str = "ordr2.fit/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub converged: bool,
    pub iterations: u32,
    pub gradient_norm: f64,
    pub separation: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GofSection {
    pub gamma_r: f64,
    pub g_statistic: f64,
    pub measures: BTreeMap<String, f64>,
    pub skipped: BTreeMap<String, String>,
    pub notes: BTreeMap<String, String>,
}

impl From<&GofReport> for GofSection {
    fn from(report: &GofReport) -> Self {
        GofSection {
            gamma_r: report.gamma_r,
            g_statistic: report.g_statistic,
            measures: report.measures.iter().map(|(k, v)| (k.clone(), *v)).collect(),
            skipped: report.skipped.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
            notes: report.notes.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearSection {
    pub r_squared: f64,
    pub residual_ss: f64,
    pub total_ss: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitSummary {
    pub schema: String,
    /// "linear", "binary" or "ordinal".
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link: Option<LinkKind>,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_categories: Option<u32>,
    pub coefficients: Vec<CoefficientEntry>,
    pub thresholds: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loglik: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub null_loglik: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gof: Option<GofSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linear: Option<LinearSection>,
    /// Full fitted model, kept so `gof` can recompute measures later.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<FittedModel>,
}

pub fn summary_from_clm(kind: &str, model: FittedModel, report: &GofReport) -> FitSummary {
    FitSummary {
        schema: FIT_SCHEMA_ID.to_owned(),
        kind: kind.to_owned(),
        link: Some(model.link),
        n: model.n(),
        n_categories: Some(model.n_categories),
        coefficients: model
            .predictor_names
            .iter()
            .zip(&model.coefficients)
            .map(|(name, &value)| CoefficientEntry { name: name.clone(), value })
            .collect(),
        thresholds: model.thresholds.clone(),
        loglik: Some(model.loglik),
        null_loglik: Some(model.null_loglik),
        convergence: Some(ConvergenceRecord {
            converged: model.converged,
            iterations: model.iterations,
            gradient_norm: model.gradient_norm,
            separation: model.separation,
        }),
        gof: Some(GofSection::from(report)),
        linear: None,
        model: Some(model),
    }
}

pub fn summary_from_linear(fit: &LinearFit, n: usize) -> FitSummary {
    FitSummary {
        schema: FIT_SCHEMA_ID.to_owned(),
        kind: "linear".to_owned(),
        link: None,
        n,
        n_categories: None,
        coefficients: fit
            .names
            .iter()
            .zip(&fit.coefficients)
            .map(|(name, &value)| CoefficientEntry { name: name.clone(), value })
            .collect(),
        thresholds: Vec::new(),
        loglik: None,
        null_loglik: None,
        convergence: None,
        gof: None,
        linear: Some(LinearSection {
            r_squared: fit.r_squared,
            residual_ss: fit.residual_ss,
            total_ss: fit.total_ss,
        }),
        model: None,
    }
}

/// Write a summary to the path, or to stdout when no path is given.
pub fn write_summary(path: Option<&Path>, summary: &FitSummary) -> Result<(), CliError> {
    match path {
        Some(path) => {
            let file = File::create(path).map_err(CliError::io(path))?;
            let mut writer = BufWriter::new(file);
            serde_json::to_writer_pretty(&mut writer, summary)?;
            writer.write_all(b"\n").map_err(CliError::io(path))?;
            writer.flush().map_err(CliError::io(path))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut writer = stdout.lock();
            serde_json::to_writer_pretty(&mut writer, summary)?;
            writer.write_all(b"\n").map_err(CliError::io("<stdout>"))?;
        }
    }
    Ok(())
}

pub fn read_summary(path: &Path) -> Result<FitSummary, CliError> {
    let file = File::open(path).map_err(CliError::io(path))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}
