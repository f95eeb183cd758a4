//! Ordinary least squares via Householder QR and heteroskedasticity-consistent
//! (sandwich) covariance.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::design::DesignMatrix;
use crate::error::{Error, Result};

/// Relative pivot threshold below which a column is treated as collinear.
pub const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Linear,
    Logistic,
}

/// Sandwich covariance variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HcType {
    /// `(X'X)^-1 (sum e_i^2 x_i x_i') (X'X)^-1`
    #[default]
    Hc0,
    /// HC0 scaled by `n / (n - p)`.
    Hc1,
}

#[derive(Debug, Clone)]
pub struct RegressionFit {
    pub coefficients: DVector<f64>,
    pub fitted: DVector<f64>,
    pub residuals: DVector<f64>,
    pub cov_model: DMatrix<f64>,
    pub cov_robust: DMatrix<f64>,
    pub family: Family,
    pub converged: bool,
    pub iterations: usize,
    pub column_names: Vec<String>,
}

impl RegressionFit {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|j| self.coefficients[j])
    }

    /// Robust standard error of the named coefficient.
    pub fn se_robust(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|j| self.cov_robust[(j, j)].max(0.0).sqrt())
    }

    pub fn se_model(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|j| self.cov_model[(j, j)].max(0.0).sqrt())
    }

    fn index_of(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }
}

/// Thin QR factorization of a full-column-rank matrix.
pub(crate) struct Factorized {
    qr: nalgebra::linalg::QR<f64, nalgebra::Dyn, nalgebra::Dyn>,
    r: DMatrix<f64>,
}

impl Factorized {
    pub(crate) fn new(x: &DMatrix<f64>, names: &[String]) -> Result<Self> {
        let qr = x.clone().qr();
        let r = qr.r();
        for j in 0..x.ncols() {
            let norm = x.column(j).norm();
            if norm == 0.0 || r[(j, j)].abs() <= RANK_TOLERANCE * norm {
                return Err(Error::RankDeficient {
                    column: names.get(j).cloned().unwrap_or_else(|| format!("#{j}")),
                });
            }
        }
        Ok(Self { qr, r })
    }

    /// Least-squares solution of `x b = y`.
    pub(crate) fn solve(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut qty = y.clone();
        self.qr.q_tr_mul(&mut qty);
        let p = self.r.ncols();
        let head = qty.rows(0, p).into_owned();
        self.r
            .solve_upper_triangular(&head)
            .expect("diagonal checked nonzero")
    }

    /// `(X'X)^-1 = R^-1 R^-T`.
    pub(crate) fn gram_inverse(&self) -> DMatrix<f64> {
        let p = self.r.ncols();
        let r_inv = self
            .r
            .solve_upper_triangular(&DMatrix::identity(p, p))
            .expect("diagonal checked nonzero");
        let g = &r_inv * r_inv.transpose();
        symmetrize(g)
    }
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// `sum_i w_i x_i x_i'`.
pub(crate) fn weighted_cross(x: &DMatrix<f64>, w: &DVector<f64>) -> DMatrix<f64> {
    let mut scaled = x.clone();
    for mut col in scaled.column_iter_mut() {
        col.component_mul_assign(w);
    }
    symmetrize(x.transpose() * scaled)
}

fn check_response(x: &DesignMatrix, y: &[f64]) -> Result<()> {
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "response has length {} but design has {} rows",
            y.len(),
            x.nrows()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("response".into()));
    }
    Ok(())
}

/// Coefficients only; skips every covariance computation.
pub fn ols_coefficients(x: &DesignMatrix, y: &[f64]) -> Result<DVector<f64>> {
    check_response(x, y)?;
    let f = Factorized::new(x.values(), x.column_names())?;
    Ok(f.solve(&DVector::from_column_slice(y)))
}

/// Least-squares fit of `y` on `x`.
///
/// `cov_model` is `s^2 (X'X)^-1` with `s^2 = RSS / (n - p)` (NaN when `n == p`);
/// `cov_robust` is the HC0 sandwich.
pub fn ols_fit(x: &DesignMatrix, y: &[f64]) -> Result<RegressionFit> {
    check_response(x, y)?;
    let values = x.values();
    let (n, p) = values.shape();
    let f = Factorized::new(values, x.column_names())?;
    let yv = DVector::from_column_slice(y);
    let coefficients = f.solve(&yv);
    let fitted = values * &coefficients;
    let residuals = &yv - &fitted;
    let bread = f.gram_inverse();
    let rss = residuals.norm_squared();
    let sigma2 = if n > p { rss / (n - p) as f64 } else { f64::NAN };
    let cov_model = &bread * sigma2;
    let cov_robust = sandwich_from_parts(values, &bread, &residuals, HcType::Hc0);
    Ok(RegressionFit {
        coefficients,
        fitted,
        residuals,
        cov_model,
        cov_robust,
        family: Family::Linear,
        converged: true,
        iterations: 1,
        column_names: x.column_names().to_vec(),
    })
}

pub(crate) fn sandwich_from_parts(
    x: &DMatrix<f64>,
    bread: &DMatrix<f64>,
    residuals: &DVector<f64>,
    hc: HcType,
) -> DMatrix<f64> {
    let (n, p) = x.shape();
    let meat = weighted_cross(x, &residuals.map(|e| e * e));
    let mut cov = symmetrize(bread * meat * bread);
    if hc == HcType::Hc1 && n > p {
        cov *= n as f64 / (n - p) as f64;
    }
    cov
}

/// Heteroskedasticity-consistent covariance of a linear fit produced from `x`.
pub fn sandwich_cov(fit: &RegressionFit, x: &DesignMatrix, hc: HcType) -> Result<DMatrix<f64>> {
    if fit.family != Family::Linear {
        return Err(Error::InvalidParameter(
            "sandwich_cov expects a linear-family fit".into(),
        ));
    }
    if fit.residuals.len() != x.nrows() || fit.coefficients.len() != x.ncols() {
        return Err(Error::DimensionMismatch(
            "fit was not produced from this design".into(),
        ));
    }
    let f = Factorized::new(x.values(), x.column_names())?;
    Ok(sandwich_from_parts(
        x.values(),
        &f.gram_inverse(),
        &fit.residuals,
        hc,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    macro_rules! assert_close {
        ($a:expr, $b:expr, $tol:expr) => {{
            let (a, b): (f64, f64) = ($a, $b);
            assert!((a - b).abs() <= $tol, "{a} vs {b} (tol {})", $tol);
        }};
    }

    #[test]
    fn exact_linear_relation() {
        let x = [1.0, 2.0, 3.0];
        let d = DesignMatrix::from_columns(3, false, &[("x", &x[..])]).unwrap();
        let fit = ols_fit(&d, &[2.0, 4.0, 6.0]).unwrap();
        assert_close!(fit.coefficients[0], 2.0, 1e-14);
        assert!(fit.residuals.iter().all(|e| e.abs() < 1e-14));
    }

    #[test]
    fn intercept_only_is_mean() {
        let d = DesignMatrix::intercept_only(3).unwrap();
        let fit = ols_fit(&d, &[1.0, 2.0, 3.0]).unwrap();
        assert_close!(fit.coefficients[0], 2.0, 1e-14);
        // s^2 = 1, (X'X)^-1 = 1/3
        assert_close!(fit.cov_model[(0, 0)], 1.0 / 3.0, 1e-14);
    }

    #[test]
    fn collinear_columns_are_rank_deficient() {
        let a = [0.0, 1.0, 0.0, 1.0];
        let d = DesignMatrix::from_columns(4, true, &[("a", &a[..]), ("b", &a[..])]).unwrap();
        match ols_fit(&d, &[1.0, 2.0, 3.0, 4.0]) {
            Err(Error::RankDeficient { column }) => assert_eq!(column, "b"),
            other => panic!("expected RankDeficient, got {other:?}"),
        }
    }

    #[test]
    fn zero_residuals_give_zero_sandwich() {
        let a = [0.0, 1.0, 2.0, 5.0];
        let y: Vec<f64> = a.iter().map(|v| 3.0 - 2.0 * v).collect();
        let d = DesignMatrix::from_columns(4, true, &[("a", &a[..])]).unwrap();
        let fit = ols_fit(&d, &y).unwrap();
        let cov = sandwich_cov(&fit, &d, HcType::Hc0).unwrap();
        assert!(cov.iter().all(|v| v.abs() < 1e-25));
    }

    #[test]
    fn hc1_scales_hc0() {
        let a = [0.0, 1.0, 2.0, 5.0, 3.0];
        let y = [1.0, 0.5, 2.0, 7.0, 2.5];
        let d = DesignMatrix::from_columns(5, true, &[("a", &a[..])]).unwrap();
        let fit = ols_fit(&d, &y).unwrap();
        let hc0 = sandwich_cov(&fit, &d, HcType::Hc0).unwrap();
        let hc1 = sandwich_cov(&fit, &d, HcType::Hc1).unwrap();
        for (u, v) in hc0.iter().zip(hc1.iter()) {
            assert_close!(u * 5.0 / 3.0, *v, 1e-14);
        }
        assert_eq!(hc0, fit.cov_robust);
    }

    #[test]
    fn length_mismatch() {
        let d = DesignMatrix::intercept_only(3).unwrap();
        assert!(matches!(
            ols_fit(&d, &[1.0, 2.0]),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
