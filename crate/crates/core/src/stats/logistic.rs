//! Binary logistic regression fitted by iteratively reweighted least squares.

use nalgebra::{DMatrix, DVector};

use super::design::DesignMatrix;
use super::ols::{symmetrize, weighted_cross, Factorized, Family, RegressionFit};
use crate::error::{Error, Result};

/// Coefficients larger than this in absolute value are reported as separation.
pub const SEPARATION_BOUND: f64 = 30.0;

#[derive(Debug, Clone, Copy)]
pub struct LogisticOptions {
    pub max_iter: usize,
    /// Relative change in log-likelihood at which the iteration stops.
    pub tolerance: f64,
    pub separation_bound: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tolerance: 1e-10,
            separation_bound: SEPARATION_BOUND,
        }
    }
}

pub fn expit(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn log_likelihood(eta: &DVector<f64>, a: &[f64]) -> f64 {
    // log(1 + e^eta) computed without overflow
    eta.iter()
        .zip(a)
        .map(|(&e, &ai)| ai * e - (e.max(0.0) + (-e.abs()).exp().ln_1p()))
        .sum()
}

pub fn logistic_fit(x: &DesignMatrix, a: &[f64]) -> Result<RegressionFit> {
    logistic_fit_with(x, a, LogisticOptions::default())
}

/// Maximum-likelihood logistic regression of `a` on `x`.
///
/// `cov_model` is the inverse Fisher information; `cov_robust` is the
/// score-based sandwich. `residuals` are response residuals `a - p`.
pub fn logistic_fit_with(
    x: &DesignMatrix,
    a: &[f64],
    opts: LogisticOptions,
) -> Result<RegressionFit> {
    let values = x.values();
    let (n, p) = values.shape();
    if a.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "response has length {} but design has {n} rows",
            a.len()
        )));
    }
    if a.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::InvalidData(
            "logistic response must be coded 0/1".into(),
        ));
    }
    let ones = a.iter().filter(|&&v| v == 1.0).count();
    if ones == 0 || ones == n {
        return Err(Error::SingleClass);
    }
    // fail early on a collinear design
    Factorized::new(values, x.column_names())?;

    let mut beta = DVector::zeros(p);
    let mut eta = DVector::zeros(n);
    let mut ll = log_likelihood(&eta, a);
    let mut converged = false;
    let mut iterations = 0;
    let mut work = values.clone();
    let mut z = DVector::zeros(n);

    while iterations < opts.max_iter {
        iterations += 1;
        for i in 0..n {
            let mu = expit(eta[i]);
            let w = (mu * (1.0 - mu)).max(1e-300);
            let sw = w.sqrt();
            z[i] = sw * (eta[i] + (a[i] - mu) / w);
            for j in 0..p {
                work[(i, j)] = sw * values[(i, j)];
            }
        }
        let f = Factorized::new(&work, x.column_names())?;
        beta = f.solve(&z);
        if beta.iter().any(|b| !b.is_finite() || b.abs() > opts.separation_bound) {
            return Err(Error::Separation {
                bound: opts.separation_bound,
            });
        }
        eta = values * &beta;
        let ll_new = log_likelihood(&eta, a);
        let rel = (ll_new - ll).abs() / (ll.abs() + 1e-300);
        ll = ll_new;
        if rel < opts.tolerance {
            converged = true;
            break;
        }
    }

    let fitted = eta.map(expit);
    let residuals = DVector::from_iterator(n, a.iter().zip(fitted.iter()).map(|(ai, mu)| ai - mu));
    let info = weighted_cross(values, &fitted.map(|mu| mu * (1.0 - mu)));
    let cov_model = invert_spd(info, x.column_names())?;
    let meat = weighted_cross(values, &residuals.map(|e| e * e));
    let cov_robust = symmetrize(&cov_model * meat * &cov_model);

    Ok(RegressionFit {
        coefficients: beta,
        fitted,
        residuals,
        cov_model,
        cov_robust,
        family: Family::Logistic,
        converged,
        iterations,
        column_names: x.column_names().to_vec(),
    })
}

pub(crate) fn invert_spd(m: DMatrix<f64>, names: &[String]) -> Result<DMatrix<f64>> {
    let p = m.nrows();
    match m.cholesky() {
        Some(ch) => Ok(symmetrize(ch.solve(&DMatrix::identity(p, p)))),
        None => Err(Error::RankDeficient {
            column: names.last().cloned().unwrap_or_default(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intercept_only_closed_form() {
        let a = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        let d = DesignMatrix::intercept_only(a.len()).unwrap();
        let fit = logistic_fit(&d, &a).unwrap();
        assert!(fit.converged);
        assert!((fit.coefficients[0] - (0.25f64 / 0.75).ln()).abs() < 1e-9);
        let mean_fitted = fit.fitted.mean();
        assert!((mean_fitted - 0.25).abs() < 1e-10);
    }

    #[test]
    fn separation_detected() {
        let x = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0];
        let a = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let d = DesignMatrix::from_columns(6, true, &[("x", &x[..])]).unwrap();
        assert!(matches!(logistic_fit(&d, &a), Err(Error::Separation { .. })));
    }

    #[test]
    fn single_class() {
        let d = DesignMatrix::intercept_only(3).unwrap();
        assert!(matches!(
            logistic_fit(&d, &[1.0, 1.0, 1.0]),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn expit_is_stable() {
        assert_eq!(expit(0.0), 0.5);
        assert!(expit(-800.0) >= 0.0);
        assert_eq!(expit(800.0), 1.0);
    }
}
