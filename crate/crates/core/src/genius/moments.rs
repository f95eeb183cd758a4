//! First-stage nuisance fits and the linear moment system
//! `sum_i h_i (A_i - Ahat_i)(M_i - Mhat_i)(Y_i - z_i' theta) = 0`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::stats::{
    invert_spd, logistic_fit, mean, ols_fit, weighted_cross, DesignMatrix, Factorized,
};

/// How the standard error of theta accounts for the first stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaSe {
    /// Stacked estimating equations: first-stage estimation error propagated
    /// through the influence function.
    #[default]
    Stacked,
    /// Sandwich of the theta moment alone with first-stage fits held fixed.
    PlugIn,
}

/// Fitted `E[A | C]`.
pub(crate) struct ExposureStage {
    pub residuals: DVector<f64>,
    design: DMatrix<f64>,
    /// d fitted / d linear predictor (1 for the linear model).
    slope: DVector<f64>,
}

/// Fitted `E[M | A, C]`.
pub(crate) struct MediatorStage {
    pub residuals: DVector<f64>,
    design: DMatrix<f64>,
}

pub(crate) fn exposure_stage(data: &Dataset) -> Result<ExposureStage> {
    let n = data.n();
    let a = DVector::from_column_slice(&data.a);
    if data.k() == 0 {
        // intercept-only logistic and linear fits share the fitted value mean(A)
        let abar = mean(&data.a);
        return Ok(ExposureStage {
            residuals: a.add_scalar(-abar),
            design: DMatrix::from_element(n, 1, 1.0),
            slope: DVector::from_element(n, 1.0),
        });
    }
    let x = data.covariate_design()?;
    if data.binary_exposure() {
        let fit = logistic_fit(&x, &data.a)?;
        let slope = fit.fitted.map(|p| p * (1.0 - p));
        Ok(ExposureStage {
            residuals: fit.residuals,
            design: x.values().clone(),
            slope,
        })
    } else {
        let fit = ols_fit(&x, &data.a)?;
        Ok(ExposureStage {
            residuals: fit.residuals,
            design: x.values().clone(),
            slope: DVector::from_element(n, 1.0),
        })
    }
}

/// Design `(1, A, C)` or `(1, A, C, A*C)`.
pub(crate) fn mediator_design(data: &Dataset, interactions: bool) -> Result<DesignMatrix> {
    let n = data.n();
    let products: Vec<(String, Vec<f64>)> = if interactions {
        data.covariates()
            .map(|(name, col)| {
                (
                    format!("a:{name}"),
                    data.a.iter().zip(col).map(|(a, c)| a * c).collect(),
                )
            })
            .collect()
    } else {
        Vec::new()
    };
    let mut cols: Vec<(&str, &[f64])> = vec![("a", &data.a)];
    cols.extend(data.covariates());
    cols.extend(products.iter().map(|(n, v)| (n.as_str(), v.as_slice())));
    DesignMatrix::from_columns(n, true, &cols)
}

pub(crate) fn mediator_stage(data: &Dataset, interactions: bool) -> Result<MediatorStage> {
    let x = mediator_design(data, interactions)?;
    let f = Factorized::new(x.values(), x.column_names())?;
    let m = DVector::from_column_slice(&data.m);
    let coef = f.solve(&m);
    let residuals = &m - x.values() * coef;
    Ok(MediatorStage {
        residuals,
        design: x.values().clone(),
    })
}

pub(crate) struct MomentSolution {
    pub theta: DVector<f64>,
    /// `sum_i h_i ra_i rm_i Y_i`
    pub numerator: DVector<f64>,
    /// `sum_i h_i ra_i rm_i z_i'`
    pub jacobian: DMatrix<f64>,
    pub cov: Option<DMatrix<f64>>,
}

pub(crate) struct MomentInputs<'a> {
    /// Instruments h(C), n x q.
    pub instruments: &'a DMatrix<f64>,
    /// Regressors multiplying theta, n x q.
    pub regressors: &'a DMatrix<f64>,
    pub y: &'a [f64],
    pub exposure: &'a ExposureStage,
    pub mediator: &'a MediatorStage,
}

/// Weighted instruments `w_i = h_i ra_i rm_i` as an n x q matrix.
fn weighted_instruments(inp: &MomentInputs) -> DMatrix<f64> {
    let mut w = inp.instruments.clone();
    let rr = inp.exposure.residuals.component_mul(&inp.mediator.residuals);
    for mut col in w.column_iter_mut() {
        col.component_mul_assign(&rr);
    }
    w
}

/// Raw sums; does not check identification.
pub(crate) fn moment_sums(inp: &MomentInputs) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let w = weighted_instruments(inp);
    let y = DVector::from_column_slice(inp.y);
    let numerator = w.transpose() * y;
    let jacobian = w.transpose() * inp.regressors;
    (w, numerator, jacobian)
}

pub(crate) fn solve_moments(
    inp: &MomentInputs,
    se: Option<ThetaSe>,
) -> Result<MomentSolution> {
    let (w, numerator, jacobian) = moment_sums(inp);
    let q = jacobian.ncols();
    let names: Vec<String> = (0..q).map(|j| format!("moment {j}")).collect();
    let theta = if q == 1 {
        DVector::from_element(1, numerator[0] / jacobian[(0, 0)])
    } else {
        Factorized::new(&jacobian, &names)
            .map_err(|_| Error::SingularMomentSystem)?
            .solve(&numerator)
    };
    let cov = match se {
        None => None,
        Some(kind) => Some(theta_covariance(inp, &w, &jacobian, &theta, kind)?),
    };
    Ok(MomentSolution {
        theta,
        numerator,
        jacobian,
        cov,
    })
}

fn theta_covariance(
    inp: &MomentInputs,
    w: &DMatrix<f64>,
    jacobian: &DMatrix<f64>,
    theta: &DVector<f64>,
    kind: ThetaSe,
) -> Result<DMatrix<f64>> {
    let y = DVector::from_column_slice(inp.y);
    let e = y - inp.regressors * theta;
    // psi_i = w_i e_i, stored as rows
    let mut phi = w.clone();
    for mut col in phi.column_iter_mut() {
        col.component_mul_assign(&e);
    }

    if kind == ThetaSe::Stacked {
        let ex = inp.exposure;
        let md = inp.mediator;
        let h = inp.instruments;

        // d psi / d gamma summed: -sum h_i rm_i e_i slope_i xc_i'
        let mut hx = h.clone();
        let s = md.residuals.component_mul(&e).component_mul(&ex.slope);
        for mut col in hx.column_iter_mut() {
            col.component_mul_assign(&s);
        }
        let g_gamma = -(hx.transpose() * &ex.design);
        let info_gamma = weighted_cross(&ex.design, &ex.slope);
        let names_c: Vec<String> = (0..ex.design.ncols()).map(|j| format!("c{j}")).collect();
        let inv_gamma = invert_spd(info_gamma, &names_c)?;

        // d psi / d b summed: -sum h_i ra_i e_i xm_i'
        let mut hb = h.clone();
        let s = ex.residuals.component_mul(&e);
        for mut col in hb.column_iter_mut() {
            col.component_mul_assign(&s);
        }
        let g_b = -(hb.transpose() * &md.design);
        let gram_b = md.design.transpose() * &md.design;
        let names_m: Vec<String> = (0..md.design.ncols()).map(|j| format!("m{j}")).collect();
        let inv_b = invert_spd(gram_b, &names_m)?;

        // per-observation first-stage score contributions
        let mut score_gamma = ex.design.clone();
        for mut col in score_gamma.column_iter_mut() {
            col.component_mul_assign(&ex.residuals);
        }
        let mut score_b = md.design.clone();
        for mut col in score_b.column_iter_mut() {
            col.component_mul_assign(&md.residuals);
        }
        phi += score_gamma * (g_gamma * inv_gamma).transpose();
        phi += score_b * (g_b * inv_b).transpose();
    }

    let meat = phi.transpose() * &phi;
    let d_inv = jacobian
        .clone()
        .try_inverse()
        .ok_or(Error::SingularMomentSystem)?;
    let cov = &d_inv * meat * d_inv.transpose();
    Ok(crate::stats::symmetrize(cov))
}
