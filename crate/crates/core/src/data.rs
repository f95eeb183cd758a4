use crate::error::{Error, Result};
use crate::stats::DesignMatrix;

/// Observed mediation data: outcome `y`, mediator `m` (possibly mismeasured),
/// exposure `a` and covariate columns `c`.
///
/// The latent columns are only populated by the simulator (or by a user who
/// has them) and feed the oracle estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub y: Vec<f64>,
    pub m: Vec<f64>,
    pub a: Vec<f64>,
    pub c: Vec<Vec<f64>>,
    pub covariate_names: Vec<String>,
    pub latent_u: Option<Vec<f64>>,
    pub latent_w: Option<Vec<f64>>,
    pub true_m: Option<Vec<f64>>,
}

fn check_column(name: &str, col: &[f64], n: usize) -> Result<()> {
    if col.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "column `{name}` has length {} (expected {n})",
            col.len()
        )));
    }
    if col.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("column `{name}`")));
    }
    Ok(())
}

fn is_constant(x: &[f64]) -> bool {
    x.iter().all(|&v| v == x[0])
}

impl Dataset {
    /// Dataset without covariates.
    pub fn new(y: Vec<f64>, m: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        Self::with_covariates(y, m, a, Vec::new(), Vec::new())
    }

    pub fn with_covariates(
        y: Vec<f64>,
        m: Vec<f64>,
        a: Vec<f64>,
        c: Vec<Vec<f64>>,
        covariate_names: Vec<String>,
    ) -> Result<Self> {
        let d = Self {
            y,
            m,
            a,
            c,
            covariate_names,
            latent_u: None,
            latent_w: None,
            true_m: None,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn with_latents(
        mut self,
        latent_u: Option<Vec<f64>>,
        latent_w: Option<Vec<f64>>,
        true_m: Option<Vec<f64>>,
    ) -> Result<Self> {
        self.latent_u = latent_u;
        self.latent_w = latent_w;
        self.true_m = true_m;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.y.len();
        if n == 0 {
            return Err(Error::EmptyInput("dataset has no rows".into()));
        }
        check_column("y", &self.y, n)?;
        check_column("m", &self.m, n)?;
        check_column("a", &self.a, n)?;
        if self.covariate_names.len() != self.c.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} covariate names for {} covariate columns",
                self.covariate_names.len(),
                self.c.len()
            )));
        }
        for (name, col) in self.covariate_names.iter().zip(&self.c) {
            check_column(name, col, n)?;
        }
        for (name, col) in [
            ("latent_u", &self.latent_u),
            ("latent_w", &self.latent_w),
            ("true_m", &self.true_m),
        ] {
            if let Some(col) = col {
                check_column(name, col, n)?;
            }
        }
        if is_constant(&self.a) {
            return Err(Error::InvalidData("exposure is constant".into()));
        }
        if is_constant(&self.m) {
            return Err(Error::InvalidData("mediator is constant".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Number of covariate columns.
    pub fn k(&self) -> usize {
        self.c.len()
    }

    /// Exposure values are a subset of {0, 1}.
    pub fn binary_exposure(&self) -> bool {
        self.a.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Rows selected by `idx` (with repetition), without re-validating.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let pick = |col: &[f64]| idx.iter().map(|&i| col[i]).collect::<Vec<_>>();
        Self {
            y: pick(&self.y),
            m: pick(&self.m),
            a: pick(&self.a),
            c: self.c.iter().map(|col| pick(col)).collect(),
            covariate_names: self.covariate_names.clone(),
            latent_u: self.latent_u.as_deref().map(pick),
            latent_w: self.latent_w.as_deref().map(pick),
            true_m: self.true_m.as_deref().map(pick),
        }
    }

    /// Design `(1, A, C)`.
    pub fn exposure_design(&self) -> Result<DesignMatrix> {
        let mut cols: Vec<(&str, &[f64])> = vec![("a", &self.a)];
        cols.extend(self.covariates());
        DesignMatrix::from_columns(self.n(), true, &cols)
    }

    /// Design `(1, C)`.
    pub fn covariate_design(&self) -> Result<DesignMatrix> {
        let cols: Vec<(&str, &[f64])> = self.covariates().collect();
        DesignMatrix::from_columns(self.n(), true, &cols)
    }

    pub(crate) fn covariates(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.covariate_names
            .iter()
            .map(String::as_str)
            .zip(self.c.iter().map(Vec::as_slice))
    }
}
