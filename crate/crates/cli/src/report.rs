//! JSON report layout. Field order is fixed by the struct definitions, so
//! identical runs serialize to identical bytes.

use crate::config::{Seeds, StudyConfig};
use coupled_uq::pce::SobolReport;
use coupled_uq::pipeline::{OracleComparison, UqResult};
use coupled_uq::surrogate::GpHyperparameters;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub config: StudyConfig,
    pub seeds: Seeds,
    pub dimension: usize,
    pub basis_size: usize,
    pub mean: f64,
    pub std: f64,
    pub variance: f64,
    pub oracle: Option<OracleReport>,
    pub sobol: Vec<SobolRow>,
    pub first_order_sum: f64,
    pub interaction_share: f64,
    pub design: DesignReport,
    pub fit: FitReport,
    pub surrogate: SurrogateReport,
}

#[derive(Debug, Serialize)]
pub struct OracleReport {
    pub mean: f64,
    pub std: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub mean_rel_error: f64,
    pub std_rel_error: f64,
}

impl From<OracleComparison> for OracleReport {
    fn from(c: OracleComparison) -> Self {
        Self {
            mean: c.oracle_mean,
            std: c.oracle_std,
            n_samples: c.n_samples,
            seed: c.seed,
            mean_rel_error: c.mean_rel_error,
            std_rel_error: c.std_rel_error,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SobolRow {
    pub variable: String,
    pub first_order: f64,
    pub total_order: f64,
}

pub fn sobol_rows(s: &SobolReport) -> Vec<SobolRow> {
    s.labels
        .iter()
        .zip(s.first_order.iter().zip(&s.total_order))
        .map(|(l, (f, t))| SobolRow {
            variable: l.clone(),
            first_order: *f,
            total_order: *t,
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct DesignReport {
    pub description: String,
    pub kind: &'static str,
    pub n_points: usize,
}

#[derive(Debug, Serialize)]
pub struct FitReport {
    pub method: &'static str,
    pub order: usize,
    pub residual_norm: f64,
    pub condition: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Default, Serialize)]
pub struct SurrogateReport {
    pub description: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_train: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length_scales: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signal_std: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jitter: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_marginal_likelihood: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clamped_queries: Option<u64>,
}

impl SurrogateReport {
    pub fn gp(description: String, n_train: usize, h: GpHyperparameters) -> Self {
        Self {
            description,
            n_train: Some(n_train),
            length_scales: Some(h.length_scales),
            signal_std: Some(h.signal_std),
            jitter: Some(h.jitter),
            log_marginal_likelihood: Some(h.log_marginal_likelihood),
            clamped_queries: None,
        }
    }
}

impl RunReport {
    pub fn new(config: StudyConfig, result: &UqResult, surrogate: SurrogateReport) -> Self {
        let d = result.pce.diagnostics();
        let m = result.moments();
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            seeds: config.seeds(),
            config,
            dimension: result.pce.basis().dim(),
            basis_size: result.pce.basis().len(),
            mean: m.mean,
            std: m.std,
            variance: m.variance,
            oracle: result.oracle.map(OracleReport::from),
            sobol: sobol_rows(&result.sobol),
            first_order_sum: result.sobol.first_order_sum(),
            interaction_share: result.sobol.interaction_share,
            design: DesignReport {
                description: result.provenance.design.clone(),
                kind: result.provenance.design_kind.as_str(),
                n_points: result.provenance.n_points,
            },
            fit: FitReport {
                method: d.method.as_str(),
                order: result.provenance.order,
                residual_norm: d.residual_norm,
                condition: d.condition,
                warnings: d.warnings.clone(),
            },
            surrogate,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct StudyReport {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub config: StudyConfig,
    pub seeds: Seeds,
    pub sizes: Vec<StudyRow>,
}

#[derive(Debug, Serialize)]
pub struct StudyRow {
    pub size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_uncertainty_first_order: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sobol_csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}
