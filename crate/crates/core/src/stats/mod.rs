//! Regression and sampling primitives shared by the estimators.

mod design;
mod logistic;
mod ols;
mod rng;

pub use design::DesignMatrix;
pub use logistic::{expit, logistic_fit, logistic_fit_with, LogisticOptions, SEPARATION_BOUND};
pub(crate) use logistic::invert_spd;
pub use ols::{
    ols_coefficients, ols_fit, sandwich_cov, Family, HcType, RegressionFit, RANK_TOLERANCE,
};
pub(crate) use ols::{symmetrize, weighted_cross, Factorized};
pub use rng::{sample, standard_normal, uniform, Dist, RandomStream};

/// Arithmetic mean; NaN for an empty slice.
pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample standard deviation (divisor `n - 1`).
pub fn sd(x: &[f64]) -> f64 {
    let m = mean(x);
    let ss: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
    (ss / (x.len() as f64 - 1.0)).sqrt()
}

/// Linear-interpolation quantile of sorted data (`q` in `[0, 1]`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}
