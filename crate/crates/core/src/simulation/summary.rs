use serde::{Deserialize, Serialize};

use super::dgp::Dag;
use crate::error::{Error, Result};
use crate::genius::Method;

/// Operating characteristics of one estimator under one dag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dag: Dag,
    pub method: Method,
    /// Successful replicates the row is computed from.
    pub n_replicates: usize,
    pub n_failed_replicates: usize,
    pub bias: f64,
    /// Divide-by-R variance of the estimates.
    pub mc_variance: f64,
    pub proportion_bias_pct: f64,
    pub mse: f64,
    pub mean_var_estimate: f64,
    pub coverage_delta: f64,
    pub coverage_bootstrap: Option<f64>,
    /// False when fewer than two replicates were available, so the Monte
    /// Carlo variance carries no information.
    pub variance_defined: bool,
}

/// Summary statistics of replicate estimates against `true_value`.
///
/// `dag`, `method` and `n_failed_replicates` of the returned row are
/// placeholders for the caller to fill in.
pub fn operating_characteristics(
    estimates: &[f64],
    var_estimates: &[f64],
    ci_hits_delta: &[bool],
    ci_hits_boot: Option<&[bool]>,
    true_value: f64,
) -> Result<ReportRow> {
    if estimates.is_empty() {
        return Err(Error::EmptyInput("no replicate estimates".into()));
    }
    let r = estimates.len();
    if var_estimates.len() != r
        || ci_hits_delta.len() != r
        || ci_hits_boot.is_some_and(|h| h.len() != r)
    {
        return Err(Error::DimensionMismatch(
            "replicate summaries have different lengths".into(),
        ));
    }
    let rf = r as f64;
    let mean = estimates.iter().sum::<f64>() / rf;
    let bias = mean - true_value;
    let mc_variance = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / rf;
    let mse = estimates.iter().map(|e| (e - true_value).powi(2)).sum::<f64>() / rf;
    let frac = |hits: &[bool]| hits.iter().filter(|&&h| h).count() as f64 / rf;
    Ok(ReportRow {
        dag: Dag::A,
        method: Method::Naive,
        n_replicates: r,
        n_failed_replicates: 0,
        bias,
        mc_variance,
        proportion_bias_pct: 100.0 * bias / true_value,
        mse,
        mean_var_estimate: var_estimates.iter().sum::<f64>() / rf,
        coverage_delta: frac(ci_hits_delta),
        coverage_bootstrap: ci_hits_boot.map(frac),
        variance_defined: r > 1,
    })
}
