//! Baseline estimators: the linear mediation formula (product of
//! least-squares coefficients), the oracle version that adjusts for latent
//! confounders, and the plug-in risk-ratio indirect effect for discrete data.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::genius::{bootstrap, product_estimate, Inference, Method, NieEstimate};
use crate::stats::{ols_coefficients, ols_fit, sandwich_cov, DesignMatrix, HcType};

fn outcome_design(data: &Dataset, mediator: &[f64], latents: &[(&str, &[f64])]) -> Result<DesignMatrix> {
    let mut cols: Vec<(&str, &[f64])> = vec![("m", mediator), ("a", &data.a)];
    cols.extend_from_slice(latents);
    cols.extend(data.covariates());
    DesignMatrix::from_columns(data.n(), true, &cols)
}

/// `(coefficient, robust se)` of column 1 of `y ~ x`.
fn slope_with_se(x: &DesignMatrix, y: &[f64], hc: HcType) -> Result<(f64, f64)> {
    let fit = ols_fit(x, y)?;
    let cov = sandwich_cov(&fit, x, hc)?;
    Ok((fit.coefficients[1], cov[(1, 1)].max(0.0).sqrt()))
}

struct Parts<'a> {
    mediator: &'a [f64],
    latents: Vec<(&'static str, &'a [f64])>,
}

fn naive_parts(data: &Dataset) -> Parts<'_> {
    Parts {
        mediator: &data.m,
        latents: Vec::new(),
    }
}

fn oracle_parts(data: &Dataset) -> Result<Parts<'_>> {
    let true_m = data
        .true_m
        .as_deref()
        .ok_or_else(|| Error::MissingLatentColumns("true_m".into()))?;
    let mut latents: Vec<(&'static str, &[f64])> = Vec::new();
    if let Some(u) = data.latent_u.as_deref() {
        latents.push(("u", u));
    }
    if let Some(w) = data.latent_w.as_deref() {
        latents.push(("w", w));
    }
    if latents.is_empty() {
        return Err(Error::MissingLatentColumns("latent_u and/or latent_w".into()));
    }
    Ok(Parts {
        mediator: true_m,
        latents,
    })
}

fn point(data: &Dataset, parts: &Parts, scale: f64) -> Result<f64> {
    let theta = ols_coefficients(&outcome_design(data, parts.mediator, &parts.latents)?, &data.y)?[1];
    let beta = ols_coefficients(&data.exposure_design()?, parts.mediator)?[1];
    Ok(theta * beta * scale)
}

fn estimate(
    data: &Dataset,
    method: Method,
    parts: &Parts,
    a: f64,
    a_star: f64,
    inference: Inference,
    hc: HcType,
) -> Result<NieEstimate> {
    let theta = slope_with_se(&outcome_design(data, parts.mediator, &parts.latents)?, &data.y, hc)?;
    let beta = slope_with_se(&data.exposure_design()?, parts.mediator, hc)?;
    let mut est = product_estimate(method, theta, beta, (a, a_star));
    if let Some(cfg) = inference.bootstrap_config() {
        let scale = a - a_star;
        est.bootstrap = Some(match method {
            Method::Oracle => bootstrap(data, cfg, est.nie, |d| point(d, &oracle_parts(d)?, scale))?,
            _ => bootstrap(data, cfg, est.nie, |d| point(d, &naive_parts(d), scale))?,
        });
    }
    Ok(est)
}

/// Product-of-coefficients indirect effect: the coefficient of `M` in
/// `Y ~ 1 + M + A + C` times the coefficient of `A` in `M ~ 1 + A + C`.
/// Standard errors are sandwich-based.
pub fn nie_naive(data: &Dataset, a: f64, a_star: f64, inference: Inference, hc: HcType) -> Result<NieEstimate> {
    data.validate()?;
    estimate(data, Method::Naive, &naive_parts(data), a, a_star, inference, hc)
}

/// Naive estimator with the error-free mediator and the latent confounders
/// added to the outcome model, in the order `(1, M, A, U, W, C)`.
///
/// A latent column that is identically zero makes the outcome design rank
/// deficient.
pub fn nie_oracle(data: &Dataset, a: f64, a_star: f64, inference: Inference, hc: HcType) -> Result<NieEstimate> {
    data.validate()?;
    let parts = oracle_parts(data)?;
    estimate(data, Method::Oracle, &parts, a, a_star, inference, hc)
}

/// Point estimate only, for the simulation driver.
pub fn nie_point(data: &Dataset, method: Method, a: f64, a_star: f64) -> Result<f64> {
    match method {
        Method::Naive => point(data, &naive_parts(data), a - a_star),
        Method::Oracle => point(data, &oracle_parts(data)?, a - a_star),
        Method::Genius => crate::genius::genius_nie_point(data, a, a_star, &Default::default()),
        Method::GeniusInteraction => Err(Error::InvalidParameter(
            "no point-only path for the interaction estimator".into(),
        )),
    }
}

/// Counts of a binary outcome by mediator, exposure and covariate level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMediationTable {
    pub m_levels: Vec<String>,
    pub a_levels: Vec<String>,
    pub c_levels: Vec<String>,
    /// Row-major over `(y, m, a, c)` with `y` in {0, 1}.
    counts: Vec<u64>,
}

impl DiscreteMediationTable {
    pub fn new(
        m_levels: Vec<String>,
        a_levels: Vec<String>,
        c_levels: Vec<String>,
        counts: Vec<u64>,
    ) -> Result<Self> {
        let expected = 2 * m_levels.len() * a_levels.len() * c_levels.len();
        if counts.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{} counts for a table with {expected} cells",
                counts.len()
            )));
        }
        if counts.iter().all(|&c| c == 0) {
            return Err(Error::EmptyInput("table has no observations".into()));
        }
        let t = Self {
            m_levels,
            a_levels,
            c_levels,
            counts,
        };
        for (ai, a) in t.a_levels.iter().enumerate() {
            for (ci, c) in t.c_levels.iter().enumerate() {
                if t.margin(ai, ci) == 0 {
                    return Err(Error::EmptyCell(format!("no observations with a = {a}, c = {c}")));
                }
            }
        }
        Ok(t)
    }

    /// Builds a table from `(y, m, a, c, count)` records; levels are kept in
    /// order of first appearance and repeated records are summed.
    pub fn from_records<I, S>(records: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u8, S, S, S, u64)>,
        S: AsRef<str>,
    {
        fn level(levels: &mut Vec<String>, v: &str) -> usize {
            levels.iter().position(|l| l == v).unwrap_or_else(|| {
                levels.push(v.to_string());
                levels.len() - 1
            })
        }
        let mut ms = Vec::new();
        let mut as_ = Vec::new();
        let mut cs = Vec::new();
        let mut cells = Vec::new();
        for (y, m, a, c, n) in records {
            if y > 1 {
                return Err(Error::InvalidData(format!("outcome must be 0 or 1 (got {y})")));
            }
            let key = (y, level(&mut ms, m.as_ref()), level(&mut as_, a.as_ref()), level(&mut cs, c.as_ref()));
            cells.push((key, n));
        }
        let (nm, na, nc) = (ms.len(), as_.len(), cs.len());
        let mut counts = vec![0u64; 2 * nm * na * nc];
        for ((y, m, a, c), n) in cells {
            counts[((y as usize * nm + m) * na + a) * nc + c] += n;
        }
        Self::new(ms, as_, cs, counts)
    }

    pub fn count(&self, y: usize, m: usize, a: usize, c: usize) -> u64 {
        let (nm, na, nc) = (self.m_levels.len(), self.a_levels.len(), self.c_levels.len());
        self.counts[((y * nm + m) * na + a) * nc + c]
    }

    /// Table with every count multiplied by `k`.
    pub fn scaled(&self, k: u64) -> Self {
        Self {
            counts: self.counts.iter().map(|c| c * k).collect(),
            ..self.clone()
        }
    }

    fn cell(&self, m: usize, a: usize, c: usize) -> u64 {
        self.count(0, m, a, c) + self.count(1, m, a, c)
    }

    fn margin(&self, a: usize, c: usize) -> u64 {
        (0..self.m_levels.len()).map(|m| self.cell(m, a, c)).sum()
    }

    fn index(levels: &[String], what: &str, v: &str) -> Result<usize> {
        levels
            .iter()
            .position(|l| l == v)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown {what} level `{v}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RrNieEstimate {
    pub rr: f64,
    pub contrast: (String, String),
    pub c: String,
    pub numerator: f64,
    pub denominator: f64,
}

/// Conditional indirect effect on the risk-ratio scale from empirical
/// frequencies:
///
/// ```text
/// sum_m P(Y=1 | m, a, c) P(m | a, c) / sum_m P(Y=1 | m, a, c) P(m | a*, c)
/// ```
pub fn rr_nie_plugin(table: &DiscreteMediationTable, a: &str, a_star: &str, c: &str) -> Result<RrNieEstimate> {
    let ai = DiscreteMediationTable::index(&table.a_levels, "exposure", a)?;
    let si = DiscreteMediationTable::index(&table.a_levels, "exposure", a_star)?;
    let ci = DiscreteMediationTable::index(&table.c_levels, "covariate", c)?;
    let margin_a = table.margin(ai, ci) as f64;
    let margin_s = table.margin(si, ci) as f64;
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for (mi, m) in table.m_levels.iter().enumerate() {
        let cell_a = table.cell(mi, ai, ci);
        let cell_s = table.cell(mi, si, ci);
        if cell_a == 0 {
            if cell_s > 0 {
                return Err(Error::EmptyCell(format!(
                    "P(Y=1 | m = {m}, a = {a}, c = {c}) is undefined"
                )));
            }
            continue;
        }
        let p_y = table.count(1, mi, ai, ci) as f64 / cell_a as f64;
        numerator += p_y * (cell_a as f64 / margin_a);
        denominator += p_y * (cell_s as f64 / margin_s);
    }
    if denominator == 0.0 {
        return Err(Error::EmptyCell(format!(
            "no outcome events at a = {a}, c = {c}; risk ratio undefined"
        )));
    }
    Ok(RrNieEstimate {
        rr: numerator / denominator,
        contrast: (a.to_string(), a_star.to_string()),
        c: c.to_string(),
        numerator,
        denominator,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn collinear_naive_design() {
        let v = vec![0.0, 1.0, 0.0, 1.0, 1.0];
        let d = Dataset::new(v.clone(), v.clone(), v).unwrap();
        assert!(matches!(
            nie_naive(&d, 1.0, 0.0, Inference::Delta, HcType::Hc0),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn oracle_requires_latents() {
        let d = Dataset::new(
            vec![0.0, 1.0, 2.0, 4.0],
            vec![0.0, 1.0, 1.0, 3.0],
            vec![0.0, 0.0, 1.0, 1.0],
        )
        .unwrap();
        assert!(matches!(
            nie_oracle(&d, 1.0, 0.0, Inference::Delta, HcType::Hc0),
            Err(Error::MissingLatentColumns(_))
        ));
        let d2 = d.clone().with_latents(None, None, Some(d.m.clone())).unwrap();
        assert!(matches!(
            nie_oracle(&d2, 1.0, 0.0, Inference::Delta, HcType::Hc0),
            Err(Error::MissingLatentColumns(_))
        ));
    }

    #[test]
    fn zero_latent_is_rank_deficient() {
        let y = vec![0.1, 1.0, 2.2, 4.0, 0.3, 2.5];
        let m = vec![0.0, 1.0, 1.0, 3.0, 0.4, 2.0];
        let a = vec![0.0, 0.0, 1.0, 1.0, 0.0, 1.0];
        let d = Dataset::new(y, m.clone(), a)
            .unwrap()
            .with_latents(Some(vec![0.0; 6]), None, Some(m))
            .unwrap();
        assert!(matches!(
            nie_oracle(&d, 1.0, 0.0, Inference::Delta, HcType::Hc0),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn rr_is_one_when_mediator_distribution_is_unchanged() {
        // f(m | a, c) identical across a, different outcome risks
        let t = DiscreteMediationTable::new(
            labels(&["0", "1"]),
            labels(&["0", "1"]),
            labels(&["all"]),
            // y = 0: (m0,a0) (m0,a1) (m1,a0) (m1,a1)
            vec![3, 9, 1, 2, 1, 3, 3, 6],
        )
        .unwrap();
        // cells: (m0,a0)=4, (m0,a1)=12, (m1,a0)=4, (m1,a1)=8 -> f(m|a0) = 1/2, f(m|a1) = 3/5
        let r = rr_nie_plugin(&t, "1", "0", "all").unwrap();
        assert!(r.rr > 0.0);
        let same = DiscreteMediationTable::new(
            labels(&["0", "1"]),
            labels(&["0", "1"]),
            labels(&["all"]),
            vec![3, 6, 1, 2, 1, 2, 3, 6],
        )
        .unwrap();
        assert_eq!(rr_nie_plugin(&same, "1", "0", "all").unwrap().rr, 1.0);
        assert_eq!(rr_nie_plugin(&t, "1", "1", "all").unwrap().rr, 1.0);
    }

    #[test]
    fn rr_empty_cell() {
        let t = DiscreteMediationTable::from_records(vec![
            (1u8, "0", "0", "x", 2u64),
            (0, "1", "0", "x", 2),
            (1, "0", "1", "x", 5),
        ])
        .unwrap();
        // m = 1 never observed under a = 1
        assert!(matches!(
            rr_nie_plugin(&t, "1", "0", "x"),
            Err(Error::EmptyCell(_))
        ));
        assert!(matches!(
            rr_nie_plugin(&t, "2", "0", "x"),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn table_requires_each_exposure_covariate_margin() {
        let r = DiscreteMediationTable::from_records(vec![
            (1u8, "0", "0", "x", 2u64),
            (1, "0", "1", "y", 2),
        ]);
        assert!(matches!(r, Err(Error::EmptyCell(_))));
    }
}
