//! Delta-method variance of a product of coefficients and the nonparametric
//! row bootstrap.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::stats::{quantile_sorted, sd, RandomStream};

/// First-order variance of `theta * beta * scale`, treating the two
/// estimates as uncorrelated.
pub fn delta_var(theta: f64, se_theta: f64, beta: f64, se_beta: f64, scale: f64) -> f64 {
    scale * scale * (beta * beta * se_theta * se_theta + theta * theta * se_beta * se_beta)
}

/// Normal critical value for a two-sided 95% interval.
pub const Z_975: f64 = 1.96;

/// Largest tolerated fraction of failed bootstrap resamples.
pub const MAX_BOOTSTRAP_FAILURE_RATE: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BootstrapCi {
    /// Empirical 2.5% and 97.5% quantiles of the replicates.
    #[default]
    Percentile,
    /// Point estimate plus or minus 1.96 bootstrap standard errors.
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
    #[serde(default)]
    pub ci: BootstrapCi,
}

impl BootstrapConfig {
    pub fn new(replicates: usize, seed: u64) -> Self {
        Self {
            replicates,
            seed,
            ci: BootstrapCi::Percentile,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub replicates: usize,
    pub seed: u64,
    pub se: f64,
    pub ci: (f64, f64),
    pub failures: usize,
    /// Successful replicate estimates in replicate-index order.
    #[serde(skip)]
    pub estimates: Vec<f64>,
}

/// Resample rows `cfg.replicates` times and re-run `estimator` on each
/// resample. Replicate `b` draws from `RandomStream::new(cfg.seed, b)`, so the
/// result does not depend on the number of worker threads.
///
/// Failed replicates are dropped and counted. `point` centres the normal-type
/// interval.
pub fn bootstrap<F>(data: &Dataset, cfg: BootstrapConfig, point: f64, estimator: F) -> Result<BootstrapResult>
where
    F: Fn(&Dataset) -> Result<f64> + Sync,
{
    if cfg.replicates < 100 {
        return Err(Error::InvalidParameter(format!(
            "bootstrap needs at least 100 replicates (got {})",
            cfg.replicates
        )));
    }
    let n = data.n();
    let outcomes: Vec<Option<f64>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = RandomStream::new(cfg.seed, b as u64).rng();
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            estimator(&data.select_rows(&idx)).ok().filter(|v| v.is_finite())
        })
        .collect();
    let estimates: Vec<f64> = outcomes.iter().flatten().copied().collect();
    let failures = cfg.replicates - estimates.len();
    if failures as f64 > MAX_BOOTSTRAP_FAILURE_RATE * cfg.replicates as f64 {
        return Err(Error::TooManyFailures {
            what: "bootstrap resamples",
            failed: failures,
            total: cfg.replicates,
        });
    }
    let se = if estimates.len() > 1 { sd(&estimates) } else { 0.0 };
    let ci = match cfg.ci {
        BootstrapCi::Percentile => {
            let mut sorted = estimates.clone();
            sorted.sort_by(f64::total_cmp);
            (quantile_sorted(&sorted, 0.025), quantile_sorted(&sorted, 0.975))
        }
        BootstrapCi::Normal => (point - Z_975 * se, point + Z_975 * se),
    };
    Ok(BootstrapResult {
        replicates: cfg.replicates,
        seed: cfg.seed,
        se,
        ci,
        failures,
        estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_var_formula() {
        assert_eq!(delta_var(1.0, 0.0, 1.0, 0.0, 1.0), 0.0);
        assert!((delta_var(1.0, 0.1, 1.0, 0.2, 1.0) - 0.05).abs() < 1e-15);
        assert!((delta_var(1.0, 0.1, 1.0, 0.2, 2.0) - 0.2).abs() < 1e-15);
        assert_eq!(delta_var(1.0, 0.1, 1.0, 0.2, 0.0), 0.0);
    }

    #[test]
    fn requires_100_replicates() {
        let d = Dataset::new(vec![1.0, 2.0], vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        let r = bootstrap(&d, BootstrapConfig::new(99, 1), 0.0, |_| Ok(0.0));
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn failure_policy() {
        let d = Dataset::new(vec![1.0, 2.0, 3.0], vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 1.0]).unwrap();
        // fails whenever the first resampled row is row 0 (about a third of the time)
        let r = bootstrap(&d, BootstrapConfig::new(200, 3), 0.0, |s| {
            if s.y[0] == 1.0 {
                Err(Error::SingleClass)
            } else {
                Ok(s.y.iter().sum())
            }
        });
        assert!(matches!(r, Err(Error::TooManyFailures { .. })));

        let ok = bootstrap(&d, BootstrapConfig::new(200, 3), 0.0, |s| Ok(s.y.iter().sum())).unwrap();
        assert_eq!(ok.failures, 0);
        assert_eq!(ok.estimates.len(), 200);
        assert!(ok.ci.0 <= ok.ci.1);
    }
}
