use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::data::Dataset;
use crate::error::Result;
use crate::stats::{ols_fit, DesignMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelVariance {
    pub level: f64,
    pub count: usize,
    pub variance: f64,
}

/// Score test of `var(M | A, C)` depending on `(A, C)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HetTestResult {
    /// `n R^2` from the auxiliary regression of squared residuals.
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// Residual variance of the mediator model per exposure level (binary
    /// exposure only, otherwise empty).
    pub variance_by_level: Vec<LevelVariance>,
    pub n: usize,
}

/// Studentized Breusch-Pagan test: regress the squared residuals of
/// `M ~ 1 + A + C` on `(1, A, C)` and refer `n R^2` to chi-square with one
/// degree of freedom per non-intercept regressor.
///
/// No minimum sample size is enforced; below roughly ten observations the
/// chi-square reference has no practical validity.
pub fn het_variance_test(data: &Dataset) -> Result<HetTestResult> {
    let x = data.exposure_design()?;
    het_test_on(&x, data)
}

pub(crate) fn het_test_on(x: &DesignMatrix, data: &Dataset) -> Result<HetTestResult> {
    let n = data.n();
    let fit = ols_fit(x, &data.m)?;
    let e2: Vec<f64> = fit.residuals.iter().map(|e| e * e).collect();
    let aux = ols_fit(x, &e2)?;
    let e2v = DVector::from_column_slice(&e2);
    let centered = e2v.add_scalar(-e2v.mean());
    let tss = centered.norm_squared();
    let rss = aux.residuals.norm_squared();
    let r2 = if tss > 0.0 { (1.0 - rss / tss).clamp(0.0, 1.0) } else { 0.0 };
    let statistic = n as f64 * r2;
    let df = x.ncols() - 1;
    let p_value = if df == 0 {
        1.0
    } else {
        let chi = ChiSquared::new(df as f64).expect("df > 0");
        chi.sf(statistic).clamp(0.0, 1.0)
    };

    let variance_by_level = if data.binary_exposure() {
        [0.0, 1.0]
            .into_iter()
            .filter_map(|level| {
                let group: Vec<f64> = data
                    .a
                    .iter()
                    .zip(&e2)
                    .filter(|(a, _)| **a == level)
                    .map(|(_, e)| *e)
                    .collect();
                (!group.is_empty()).then(|| LevelVariance {
                    level,
                    count: group.len(),
                    variance: group.iter().sum::<f64>() / group.len() as f64,
                })
            })
            .collect()
    } else {
        Vec::new()
    };

    Ok(HetTestResult {
        statistic,
        df,
        p_value,
        variance_by_level,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_level_variances_on_fixture() {
        let d = Dataset::new(
            vec![0.0, 1.0, 2.0, 4.0],
            vec![0.0, 1.0, 1.0, 3.0],
            vec![0.0, 0.0, 1.0, 1.0],
        )
        .unwrap();
        let t = het_variance_test(&d).unwrap();
        assert_eq!(t.df, 1);
        assert_eq!(t.variance_by_level.len(), 2);
        // residuals +-0.5 in group 0 and +-1 in group 1
        assert!((t.variance_by_level[0].variance - 0.25).abs() < 1e-12);
        assert!((t.variance_by_level[1].variance - 1.0).abs() < 1e-12);
        // e^2 is a deterministic function of A here, so R^2 = 1
        assert!((t.statistic - 4.0).abs() < 1e-9);
        assert!((0.0..=1.0).contains(&t.p_value));
    }

    #[test]
    fn tiny_samples_pass_through() {
        let d = Dataset::new(
            vec![0.3, 1.0, 2.0, 4.0, 1.0],
            vec![0.1, 1.0, 1.5, 3.0, 0.2],
            vec![0.0, 0.0, 1.0, 1.0, 1.0],
        )
        .unwrap();
        let t = het_variance_test(&d).unwrap();
        assert!(t.statistic.is_finite());
        assert!((0.0..=1.0).contains(&t.p_value));
    }
}
