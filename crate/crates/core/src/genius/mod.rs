//! Heteroskedasticity-identified (GENIUS) estimation of the mediator effect
//! and the natural indirect effect.
//!
//! The mediator effect `theta_m` solves the empirical moment condition
//!
//! ```text
//! 0 = sum_i h(C_i) (A_i - E[A|C_i]) (M_i - E[M|A_i,C_i]) (Y_i - theta_m M_i)
//! ```
//!
//! which stays valid when `M` and `Y` share an unmeasured cause, when `A` and
//! `Y` share an unmeasured cause, and when `M` is observed with classical
//! error, provided `var(M | A, C)` changes with `A`. With `h = 1` the root is
//! the ratio `sum ra rm Y / sum ra rm M`. The indirect effect is then
//! `theta_m * beta_a * (a - a_star)` where `beta_a` is the coefficient of `A`
//! in the least-squares regression of `M` on `(1, A, C)`.

mod het;
mod inference;
mod moments;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use het::{het_variance_test, HetTestResult, LevelVariance};
pub use inference::{
    bootstrap, delta_var, BootstrapCi, BootstrapConfig, BootstrapResult,
    MAX_BOOTSTRAP_FAILURE_RATE, Z_975,
};
pub use moments::ThetaSe;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::stats::{ols_coefficients, ols_fit, sandwich_cov, sd, Factorized, HcType};
use het::het_test_on;
use moments::{exposure_stage, mediator_design, mediator_stage, solve_moments, MomentInputs};

/// Default relative threshold for weak identification.
pub const WEAK_ID_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Naive,
    Genius,
    GeniusInteraction,
    Oracle,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::Genius => "genius",
            Method::GeniusInteraction => "genius-interaction",
            Method::Oracle => "oracle",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Method::Naive),
            "genius" => Ok(Method::Genius),
            "genius-interaction" | "genius_interaction" => Ok(Method::GeniusInteraction),
            "oracle" => Ok(Method::Oracle),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeniusOptions {
    /// Include `A x C` products in the scalar estimator's mediator first stage.
    pub mediator_interactions: bool,
    pub theta_se: ThetaSe,
    /// Sandwich variant for `beta_a`.
    pub hc: HcType,
    pub weak_id_tolerance: f64,
}

impl Default for GeniusOptions {
    fn default() -> Self {
        Self {
            mediator_interactions: false,
            theta_se: ThetaSe::Stacked,
            hc: HcType::Hc0,
            weak_id_tolerance: WEAK_ID_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeniusFit {
    pub theta_m: f64,
    /// Coefficients of `M * C` (interaction system only).
    pub theta_mc: Option<Vec<f64>>,
    pub se_theta: f64,
    pub se_theta_mc: Option<Vec<f64>>,
    /// `sum ra rm Y`
    pub numerator: f64,
    /// `sum ra rm M`
    pub denominator: f64,
    pub weak_id: bool,
    pub het_test: HetTestResult,
    pub n: usize,
    /// Covariance of `(theta_m, theta_mc...)`.
    #[serde(skip)]
    pub cov_theta: Option<DMatrix<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inference {
    Delta,
    Bootstrap(BootstrapConfig),
    Both(BootstrapConfig),
}

impl Inference {
    pub fn bootstrap_config(&self) -> Option<BootstrapConfig> {
        match self {
            Inference::Delta => None,
            Inference::Bootstrap(c) | Inference::Both(c) => Some(*c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NieEstimate {
    pub method: Method,
    pub nie: f64,
    /// `(a, a_star)`
    pub contrast: (f64, f64),
    pub theta_m: f64,
    pub beta_a: f64,
    pub se_theta: f64,
    pub se_beta: f64,
    pub se_delta: f64,
    pub ci_delta: (f64, f64),
    pub bootstrap: Option<BootstrapResult>,
    pub theta_mc: Option<Vec<f64>>,
    pub beta_ac: Option<Vec<f64>>,
}

impl NieEstimate {
    pub fn se_bootstrap(&self) -> Option<f64> {
        self.bootstrap.as_ref().map(|b| b.se)
    }

    pub fn ci_bootstrap(&self) -> Option<(f64, f64)> {
        self.bootstrap.as_ref().map(|b| b.ci)
    }

    pub fn var_delta(&self) -> f64 {
        self.se_delta * self.se_delta
    }
}

/// Assembles a product-of-coefficients estimate with its delta interval.
pub(crate) fn product_estimate(
    method: Method,
    theta: (f64, f64),
    beta: (f64, f64),
    contrast: (f64, f64),
) -> NieEstimate {
    let scale = contrast.0 - contrast.1;
    let nie = theta.0 * beta.0 * scale;
    let se_delta = delta_var(theta.0, theta.1, beta.0, beta.1, scale).sqrt();
    NieEstimate {
        method,
        nie,
        contrast,
        theta_m: theta.0,
        beta_a: beta.0,
        se_theta: theta.1,
        se_beta: beta.1,
        se_delta,
        ci_delta: (nie - Z_975 * se_delta, nie + Z_975 * se_delta),
        bootstrap: None,
        theta_mc: None,
        beta_ac: None,
    }
}

struct WeakCheck {
    weak: bool,
    scaled: f64,
    threshold: f64,
}

fn weak_check(data: &Dataset, denominator: f64, tol: f64) -> WeakCheck {
    let scaled = denominator.abs() / data.n() as f64;
    let threshold = tol * sd(&data.a) * sd(&data.m);
    WeakCheck {
        weak: !(scaled >= threshold) || !denominator.is_finite(),
        scaled,
        threshold,
    }
}

fn weak_error(numerator: f64, denominator: f64, w: &WeakCheck) -> Error {
    Error::WeakIdentification {
        numerator,
        denominator,
        scaled: w.scaled,
        threshold: w.threshold,
    }
}

/// GENIUS fit that reports weak identification through `weak_id` instead of
/// failing. `theta_m` is then the (meaningless) raw ratio.
pub fn genius_fit_unchecked(data: &Dataset, opts: &GeniusOptions) -> Result<GeniusFit> {
    data.validate()?;
    let n = data.n();
    let exposure = exposure_stage(data)?;
    let mediator = mediator_stage(data, opts.mediator_interactions)?;
    let h = DMatrix::from_element(n, 1, 1.0);
    let z = DMatrix::from_column_slice(n, 1, &data.m);
    let sol = solve_moments(
        &MomentInputs {
            instruments: &h,
            regressors: &z,
            y: &data.y,
            exposure: &exposure,
            mediator: &mediator,
        },
        Some(opts.theta_se),
    )?;
    let numerator = sol.numerator[0];
    let denominator = sol.jacobian[(0, 0)];
    let check = weak_check(data, denominator, opts.weak_id_tolerance);
    let cov = sol.cov.expect("requested");
    let het_test = het_test_on(&data.exposure_design()?, data)?;
    Ok(GeniusFit {
        theta_m: sol.theta[0],
        theta_mc: None,
        se_theta: cov[(0, 0)].max(0.0).sqrt(),
        se_theta_mc: None,
        numerator,
        denominator,
        weak_id: check.weak,
        het_test,
        n,
        cov_theta: Some(cov),
    })
}

/// Scalar GENIUS estimate of the mediator effect with `h(C) = 1`.
pub fn genius_theta_m(data: &Dataset, opts: &GeniusOptions) -> Result<GeniusFit> {
    let fit = genius_fit_unchecked(data, opts)?;
    if fit.weak_id {
        let check = weak_check(data, fit.denominator, opts.weak_id_tolerance);
        return Err(weak_error(fit.numerator, fit.denominator, &check));
    }
    Ok(fit)
}

/// Point estimate of the scalar GENIUS NIE without any variance work.
pub fn genius_nie_point(data: &Dataset, a: f64, a_star: f64, opts: &GeniusOptions) -> Result<f64> {
    let n = data.n();
    let exposure = exposure_stage(data)?;
    let mediator = mediator_stage(data, opts.mediator_interactions)?;
    let h = DMatrix::from_element(n, 1, 1.0);
    let z = DMatrix::from_column_slice(n, 1, &data.m);
    let sol = solve_moments(
        &MomentInputs {
            instruments: &h,
            regressors: &z,
            y: &data.y,
            exposure: &exposure,
            mediator: &mediator,
        },
        None,
    )?;
    let check = weak_check(data, sol.jacobian[(0, 0)], opts.weak_id_tolerance);
    if check.weak {
        return Err(weak_error(sol.numerator[0], sol.jacobian[(0, 0)], &check));
    }
    let beta = ols_coefficients(&data.exposure_design()?, &data.m)?[1];
    Ok(sol.theta[0] * beta * (a - a_star))
}

/// Coefficient of `A` in the regression of `M` on `(1, A, C)` and its
/// sandwich standard error.
pub fn beta_a_fit(data: &Dataset, hc: HcType) -> Result<(f64, f64)> {
    let x = data.exposure_design()?;
    let fit = ols_fit(&x, &data.m)?;
    let cov = sandwich_cov(&fit, &x, hc)?;
    Ok((fit.coefficients[1], cov[(1, 1)].max(0.0).sqrt()))
}

/// GENIUS natural indirect effect `theta_m * beta_a * (a - a_star)`.
pub fn nie_genius(
    data: &Dataset,
    a: f64,
    a_star: f64,
    inference: Inference,
    opts: &GeniusOptions,
) -> Result<NieEstimate> {
    let fit = genius_theta_m(data, opts)?;
    let beta = beta_a_fit(data, opts.hc)?;
    let mut est = product_estimate(
        Method::Genius,
        (fit.theta_m, fit.se_theta),
        beta,
        (a, a_star),
    );
    if let Some(cfg) = inference.bootstrap_config() {
        let o = *opts;
        est.bootstrap = Some(bootstrap(data, cfg, est.nie, move |d| {
            genius_nie_point(d, a, a_star, &o)
        })?);
    }
    Ok(est)
}

/// Bootstrap of the full scalar GENIUS pipeline with default options.
pub fn bootstrap_nie(
    data: &Dataset,
    a: f64,
    a_star: f64,
    replicates: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    let opts = GeniusOptions::default();
    let point = genius_nie_point(data, a, a_star, &opts)?;
    bootstrap(data, BootstrapConfig::new(replicates, seed), point, |d| {
        genius_nie_point(d, a, a_star, &opts)
    })
}

fn interaction_inputs(data: &Dataset) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = data.n();
    let k = data.k();
    if k == 0 {
        return Err(Error::InvalidParameter(
            "interaction system needs at least one covariate".into(),
        ));
    }
    let mut h = DMatrix::from_element(n, 1 + k, 1.0);
    let mut z = DMatrix::zeros(n, 1 + k);
    z.column_mut(0).copy_from_slice(&data.m);
    for (j, col) in data.c.iter().enumerate() {
        h.column_mut(j + 1).copy_from_slice(col);
        for i in 0..n {
            z[(i, j + 1)] = data.m[i] * col[i];
        }
    }
    let names: Vec<String> = std::iter::once("(intercept)".to_string())
        .chain(data.covariate_names.iter().cloned())
        .collect();
    Factorized::new(&h, &names).map_err(|_| Error::SingularMomentSystem)?;
    Ok((h, z))
}

fn interaction_solution(
    data: &Dataset,
    se: Option<ThetaSe>,
    tol: f64,
) -> Result<(moments::MomentSolution, WeakCheck)> {
    let (h, z) = interaction_inputs(data)?;
    let exposure = exposure_stage(data)?;
    let mediator = mediator_stage(data, true)?;
    let sol = solve_moments(
        &MomentInputs {
            instruments: &h,
            regressors: &z,
            y: &data.y,
            exposure: &exposure,
            mediator: &mediator,
        },
        se,
    )?;
    let check = weak_check(data, sol.jacobian[(0, 0)], tol);
    if check.weak {
        return Err(weak_error(sol.numerator[0], sol.jacobian[(0, 0)], &check));
    }
    Ok((sol, check))
}

/// Joint estimate of `(theta_m, theta_mc)` from the stacked instruments
/// `h(C) = (1, C)`. The mediator first stage includes `A x C` products.
pub fn genius_theta_interaction(data: &Dataset, opts: &GeniusOptions) -> Result<GeniusFit> {
    data.validate()?;
    let (sol, check) = interaction_solution(data, Some(opts.theta_se), opts.weak_id_tolerance)?;
    let cov = sol.cov.clone().expect("requested");
    let q = sol.theta.len();
    let het_test = het_test_on(&data.exposure_design()?, data)?;
    Ok(GeniusFit {
        theta_m: sol.theta[0],
        theta_mc: Some(sol.theta.rows(1, q - 1).iter().copied().collect()),
        se_theta: cov[(0, 0)].max(0.0).sqrt(),
        se_theta_mc: Some((1..q).map(|j| cov[(j, j)].max(0.0).sqrt()).collect()),
        numerator: sol.numerator[0],
        denominator: sol.jacobian[(0, 0)],
        weak_id: check.weak,
        het_test,
        n: data.n(),
        cov_theta: Some(cov),
    })
}

/// Sample first and second moments of the covariates: `(E[C], E[C C'])`.
pub fn covariate_moments(data: &Dataset) -> (DVector<f64>, DMatrix<f64>) {
    let n = data.n() as f64;
    let k = data.k();
    let mean = DVector::from_iterator(k, data.c.iter().map(|c| c.iter().sum::<f64>() / n));
    let second = DMatrix::from_fn(k, k, |r, s| {
        data.c[r].iter().zip(&data.c[s]).map(|(u, v)| u * v).sum::<f64>() / n
    });
    (mean, second)
}

/// Indirect effect under linear `M*C` and `A*C` interactions:
/// `(a - a*) [theta_m (beta_a + beta_ac' E[C]) + theta_mc' (beta_a E[C] + E[CC'] beta_ac)]`.
pub fn interaction_nie_value(
    theta_m: f64,
    theta_mc: &DVector<f64>,
    beta_a: f64,
    beta_ac: &DVector<f64>,
    c_mean: &DVector<f64>,
    c_second: &DMatrix<f64>,
    scale: f64,
) -> f64 {
    let via_m = theta_m * (beta_a + beta_ac.dot(c_mean));
    let via_mc = theta_mc.dot(&(c_mean * beta_a + c_second * beta_ac));
    scale * (via_m + via_mc)
}

struct InteractionParts {
    theta: DVector<f64>,
    cov_theta: Option<DMatrix<f64>>,
    beta: DVector<f64>,
    cov_beta: Option<DMatrix<f64>>,
}

fn interaction_parts(data: &Dataset, opts: &GeniusOptions, with_cov: bool) -> Result<InteractionParts> {
    let se = with_cov.then_some(opts.theta_se);
    let (sol, _) = interaction_solution(data, se, opts.weak_id_tolerance)?;
    let x = mediator_design(data, true)?;
    let k = data.k();
    // (a, a:c1..a:ck) sit at 1 and 1+k+1..
    let idx: Vec<usize> = std::iter::once(1).chain((0..k).map(|j| 2 + k + j)).collect();
    let (beta_all, cov_all) = if with_cov {
        let fit = ols_fit(&x, &data.m)?;
        let cov = sandwich_cov(&fit, &x, opts.hc)?;
        (fit.coefficients, Some(cov))
    } else {
        (ols_coefficients(&x, &data.m)?, None)
    };
    let beta = DVector::from_iterator(idx.len(), idx.iter().map(|&i| beta_all[i]));
    let cov_beta = cov_all.map(|c| DMatrix::from_fn(idx.len(), idx.len(), |r, s| c[(idx[r], idx[s])]));
    Ok(InteractionParts {
        theta: sol.theta,
        cov_theta: sol.cov,
        beta,
        cov_beta,
    })
}

fn interaction_value(parts: &InteractionParts, data: &Dataset, scale: f64) -> f64 {
    let k = data.k();
    let (cm, cs) = covariate_moments(data);
    interaction_nie_value(
        parts.theta[0],
        &parts.theta.rows(1, k).into_owned(),
        parts.beta[0],
        &parts.beta.rows(1, k).into_owned(),
        &cm,
        &cs,
        scale,
    )
}

/// Natural indirect effect from the interaction-extended system.
///
/// The delta variance combines the sandwich covariance of `(theta_m, theta_mc)`
/// with the robust covariance of `(beta_a, beta_ac)` from
/// `M ~ 1 + A + C + A*C`; covariate moments are treated as fixed.
pub fn nie_interaction(
    data: &Dataset,
    a: f64,
    a_star: f64,
    inference: Inference,
    opts: &GeniusOptions,
) -> Result<NieEstimate> {
    data.validate()?;
    let scale = a - a_star;
    let k = data.k();
    let parts = interaction_parts(data, opts, true)?;
    let nie = interaction_value(&parts, data, scale);

    let (cm, cs) = covariate_moments(data);
    let theta_m = parts.theta[0];
    let theta_mc = parts.theta.rows(1, k).into_owned();
    let beta_a = parts.beta[0];
    let beta_ac = parts.beta.rows(1, k).into_owned();
    let mut g_theta = DVector::zeros(1 + k);
    g_theta[0] = beta_a + beta_ac.dot(&cm);
    g_theta.rows_mut(1, k).copy_from(&(&cm * beta_a + &cs * &beta_ac));
    let mut g_beta = DVector::zeros(1 + k);
    g_beta[0] = theta_m + theta_mc.dot(&cm);
    g_beta.rows_mut(1, k).copy_from(&(&cm * theta_m + &cs * &theta_mc));
    let cov_t = parts.cov_theta.as_ref().expect("requested");
    let cov_b = parts.cov_beta.as_ref().expect("requested");
    let var = scale * scale * ((g_theta.transpose() * cov_t * &g_theta)[0] + (g_beta.transpose() * cov_b * &g_beta)[0]);
    let se_delta = var.max(0.0).sqrt();

    let mut est = NieEstimate {
        method: Method::GeniusInteraction,
        nie,
        contrast: (a, a_star),
        theta_m,
        beta_a,
        se_theta: cov_t[(0, 0)].max(0.0).sqrt(),
        se_beta: cov_b[(0, 0)].max(0.0).sqrt(),
        se_delta,
        ci_delta: (nie - Z_975 * se_delta, nie + Z_975 * se_delta),
        bootstrap: None,
        theta_mc: Some(theta_mc.iter().copied().collect()),
        beta_ac: Some(beta_ac.iter().copied().collect()),
    };
    if let Some(cfg) = inference.bootstrap_config() {
        let o = *opts;
        est.bootstrap = Some(bootstrap(data, cfg, nie, move |d| {
            let p = interaction_parts(d, &o, false)?;
            Ok(interaction_value(&p, d, scale))
        })?);
    }
    Ok(est)
}
