use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Column-major regressor matrix with named columns.
///
/// When `has_intercept` is set, column 0 is the constant 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    values: DMatrix<f64>,
    column_names: Vec<String>,
    has_intercept: bool,
}

impl DesignMatrix {
    pub fn new(values: DMatrix<f64>, column_names: Vec<String>, has_intercept: bool) -> Result<Self> {
        let (n, p) = values.shape();
        if p == 0 {
            return Err(Error::DimensionMismatch("design matrix has no columns".into()));
        }
        if n < p {
            return Err(Error::DimensionMismatch(format!(
                "design matrix has {n} rows but {p} columns"
            )));
        }
        if column_names.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "{} column names for {p} columns",
                column_names.len()
            )));
        }
        if let Some(j) = (0..p).find(|&j| values.column(j).iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite(format!("design column `{}`", column_names[j])));
        }
        if has_intercept && values.column(0).iter().any(|&v| v != 1.0) {
            return Err(Error::InvalidData(
                "intercept flagged but column 0 is not identically 1".into(),
            ));
        }
        Ok(Self {
            values,
            column_names,
            has_intercept,
        })
    }

    /// Builds a design from named columns, optionally prepending an intercept.
    pub fn from_columns<S: AsRef<str>>(
        n: usize,
        intercept: bool,
        columns: &[(S, &[f64])],
    ) -> Result<Self> {
        let p = columns.len() + usize::from(intercept);
        let mut values = DMatrix::zeros(n, p);
        let mut names = Vec::with_capacity(p);
        let mut j = 0;
        if intercept {
            values.column_mut(0).fill(1.0);
            names.push("(intercept)".to_string());
            j = 1;
        }
        for (name, col) in columns {
            if col.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "column `{}` has length {} (expected {n})",
                    name.as_ref(),
                    col.len()
                )));
            }
            values.column_mut(j).copy_from_slice(col);
            names.push(name.as_ref().to_string());
            j += 1;
        }
        Self::new(values, names, intercept)
    }

    /// Intercept-only design with `n` rows.
    pub fn intercept_only(n: usize) -> Result<Self> {
        Self::from_columns::<&str>(n, true, &[])
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn has_intercept(&self) -> bool {
        self.has_intercept
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    /// Index of the column with the given name.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intercept_column_is_checked() {
        let values = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 2.0, 1.0]);
        let err = DesignMatrix::new(values, vec!["a".into(), "b".into()], true).unwrap_err();
        assert!(matches!(err, Error::InvalidData(_)));
    }

    #[test]
    fn rejects_wide_and_non_finite() {
        let wide = DMatrix::zeros(1, 2);
        assert!(DesignMatrix::new(wide, vec!["a".into(), "b".into()], false).is_err());
        let x = [1.0, f64::NAN, 2.0];
        assert!(matches!(
            DesignMatrix::from_columns(3, true, &[("x", &x[..])]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn from_columns_layout() {
        let a = [0.0, 1.0, 1.0];
        let d = DesignMatrix::from_columns(3, true, &[("a", &a[..])]).unwrap();
        assert_eq!(d.ncols(), 2);
        assert_eq!(d.column_names(), ["(intercept)", "a"]);
        assert_eq!(d.values()[(2, 1)], 1.0);
        assert_eq!(d.position("a"), Some(1));
    }
}
