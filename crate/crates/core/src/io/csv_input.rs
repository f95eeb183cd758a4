use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::mediation::DiscreteMediationTable;

/// Maps roles onto CSV header names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub outcome: String,
    pub mediator: String,
    pub exposure: String,
    #[serde(default)]
    pub covariates: Vec<String>,
    #[serde(default)]
    pub latent_u: Option<String>,
    #[serde(default)]
    pub latent_w: Option<String>,
    #[serde(default)]
    pub true_m: Option<String>,
}

impl ColumnSpec {
    pub fn new(outcome: &str, mediator: &str, exposure: &str) -> Self {
        Self {
            outcome: outcome.into(),
            mediator: mediator.into(),
            exposure: exposure.into(),
            covariates: Vec::new(),
            latent_u: None,
            latent_w: None,
            true_m: None,
        }
    }

    /// All selected names in role order.
    pub fn names(&self) -> Vec<&str> {
        let mut v = vec![self.outcome.as_str(), self.mediator.as_str(), self.exposure.as_str()];
        v.extend(self.covariates.iter().map(String::as_str));
        v.extend(
            [&self.latent_u, &self.latent_w, &self.true_m]
                .into_iter()
                .flatten()
                .map(String::as_str),
        );
        v
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for name in self.names() {
            if !seen.insert(name) {
                return Err(Error::InvalidParameter(format!(
                    "column `{name}` is assigned to more than one role"
                )));
            }
        }
        Ok(())
    }
}

/// A dataset read from CSV plus the complete-case bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedData {
    pub dataset: Dataset,
    pub rows_read: usize,
    pub rows_dropped: usize,
    pub warnings: Vec<String>,
}

const MISSING: [&str; 7] = ["", "NA", "N/A", "NaN", "nan", "null", "."];

/// Reads the columns named in `spec` from a headered CSV file. Rows with a
/// missing or non-numeric value in any selected column are dropped and
/// counted.
pub fn load_csv(path: impl AsRef<Path>, spec: &ColumnSpec) -> Result<LoadedData> {
    let file = std::fs::File::open(path.as_ref())?;
    read_csv(file, spec)
}

pub fn read_csv<R: Read>(reader: R, spec: &ColumnSpec) -> Result<LoadedData> {
    spec.validate()?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let positions: Vec<usize> = spec
        .names()
        .into_iter()
        .map(|name| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn(name.to_string()))
        })
        .collect::<Result<_>>()?;

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); positions.len()];
    let mut rows_read = 0;
    let mut dropped_missing = 0;
    let mut dropped_text = 0;
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2; // 1-based, after the header line
        let record = record.map_err(|e| Error::Parse {
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        rows_read += 1;
        let mut values = Vec::with_capacity(positions.len());
        let mut missing = false;
        let mut text = false;
        for &p in &positions {
            let field = record.get(p).unwrap_or("");
            if MISSING.contains(&field) {
                missing = true;
                break;
            }
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    text = true;
                    break;
                }
            }
        }
        if missing {
            dropped_missing += 1;
        } else if text {
            dropped_text += 1;
        } else {
            for (col, v) in columns.iter_mut().zip(values) {
                col.push(v);
            }
        }
    }
    let rows_dropped = dropped_missing + dropped_text;
    if rows_read > 0 && rows_dropped == rows_read {
        return Err(Error::AllRowsDropped(rows_read));
    }
    if rows_read == 0 {
        return Err(Error::EmptyInput("CSV has a header but no rows".into()));
    }
    let mut warnings = Vec::new();
    if dropped_missing > 0 {
        warnings.push(format!("{dropped_missing} row(s) dropped for missing values"));
    }
    if dropped_text > 0 {
        warnings.push(format!("{dropped_text} row(s) dropped for non-numeric values"));
    }

    let mut cols = columns.into_iter();
    let mut next = || cols.next().expect("one column per name");
    let y = next();
    let m = next();
    let a = next();
    let c: Vec<Vec<f64>> = spec.covariates.iter().map(|_| next()).collect();
    let latent_u = spec.latent_u.as_ref().map(|_| next());
    let latent_w = spec.latent_w.as_ref().map(|_| next());
    let true_m = spec.true_m.as_ref().map(|_| next());

    let dataset = Dataset::with_covariates(y, m, a, c, spec.covariates.clone())?
        .with_latents(latent_u, latent_w, true_m)?;
    Ok(LoadedData {
        dataset,
        rows_read,
        rows_dropped,
        warnings,
    })
}

/// Reads a long-format count table with header `y,m,a,c,count`. The `c`
/// column is optional; without it every row belongs to level `all`.
pub fn load_table_csv(path: impl AsRef<Path>) -> Result<DiscreteMediationTable> {
    read_table_csv(std::fs::File::open(path.as_ref())?)
}

pub fn read_table_csv<R: Read>(reader: R) -> Result<DiscreteMediationTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let find = |name: &str| header.iter().position(|h| h == name);
    let col = |name: &str| find(name).ok_or_else(|| Error::MissingColumn(name.to_string()));
    let (yi, mi, ai, ni) = (col("y")?, col("m")?, col("a")?, col("count")?);
    let ci = find("c");
    let mut records = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Parse {
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        let get = |p: usize| record.get(p).unwrap_or("").to_string();
        let y: u8 = get(yi).parse().ok().filter(|v| *v <= 1).ok_or_else(|| Error::Parse {
            row,
            column: "y".into(),
            message: format!("expected 0 or 1, found `{}`", get(yi)),
        })?;
        let count: u64 = get(ni).parse().map_err(|_| Error::Parse {
            row,
            column: "count".into(),
            message: format!("expected a non-negative integer, found `{}`", get(ni)),
        })?;
        let c = ci.map(get).unwrap_or_else(|| "all".to_string());
        records.push((y, get(mi), get(ai), c, count));
    }
    DiscreteMediationTable::from_records(records)
}
