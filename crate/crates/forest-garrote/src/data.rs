//! Dataset ingestion, dummy encoding of factor columns, train/test splitting
//! and the Friedman #1 synthetic generator.

use std::collections::BTreeSet;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// How a design-matrix column was produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnKind {
    Numeric,
    /// One-hot dummy for `level` of the original factor column `factor`.
    Dummy {
        factor: String,
        level: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnInfo {
    pub name: String,
    pub kind: ColumnKind,
    /// Index of the original (pre-expansion) variable this column belongs to.
    pub original_index: usize,
}

/// A fully numeric design matrix with named columns and a real-valued target.
///
/// Factor columns are one-hot expanded at load time (one dummy per level, no
/// reference level dropped), so `x` contains no missing entries and every
/// dummy column is {0,1}-valued.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub columns: Vec<ColumnInfo>,
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    /// Names of the original variables, in file order, target excluded.
    pub original_names: Vec<String>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Number of original (pre-dummy-expansion) variables.
    pub fn original_count(&self) -> usize {
        self.original_names.len()
    }

    /// Map a set of column indices back to original-variable indices.
    pub fn to_original_variables(&self, cols: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        cols.into_iter()
            .map(|c| self.columns[c].original_index)
            .collect()
    }

    pub fn from_parts(columns: Vec<ColumnInfo>, x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::InvalidData("empty dataset".into()));
        }
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                got: y.len(),
            });
        }
        if x.ncols() != columns.len() {
            return Err(Error::DimensionMismatch {
                expected: columns.len(),
                got: x.ncols(),
            });
        }
        let mut names = BTreeSet::new();
        for c in &columns {
            if !names.insert(c.name.clone()) {
                return Err(Error::InvalidData(format!(
                    "duplicate column name `{}`",
                    c.name
                )));
            }
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite entry in data".into()));
        }
        let mut original_names = Vec::new();
        for c in &columns {
            if c.original_index == original_names.len() {
                original_names.push(match &c.kind {
                    ColumnKind::Numeric => c.name.clone(),
                    ColumnKind::Dummy { factor, .. } => factor.clone(),
                });
            } else if c.original_index > original_names.len() {
                return Err(Error::InvalidData("original_index out of order".into()));
            }
        }
        Ok(Dataset {
            columns,
            x,
            y,
            original_names,
        })
    }

    /// Row-subset view materialized as a new dataset.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        let x = Array2::from_shape_fn((rows.len(), self.p()), |(i, j)| self.x[[rows[i], j]]);
        let y = Array1::from_iter(rows.iter().map(|&i| self.y[i]));
        Dataset {
            columns: self.columns.clone(),
            x,
            y,
            original_names: self.original_names.clone(),
        }
    }
}

/// Deterministic train/test split specification.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitSpec {
    pub seed: u64,
    pub train_fraction: f64,
}

/// Load an RFC-4180-style CSV (header mandatory, UTF-8, `.` decimal separator)
/// and expand factor columns into dummies.
///
/// A column is treated as numeric when every field parses as a finite float;
/// otherwise it is a factor and expands to one dummy column per level. The
/// target must be numeric and is removed from the design.
pub fn load_csv(path: impl AsRef<Path>, target: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);

    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let target_idx = headers
        .iter()
        .position(|h| h == target)
        .ok_or_else(|| Error::MissingTarget(target.to_string()))?;

    let mut raw: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    for record in reader.records() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::InvalidData(format!(
                "row has {} fields, header has {}",
                record.len(),
                headers.len()
            )));
        }
        for (j, field) in record.iter().enumerate() {
            raw[j].push(field.trim().to_string());
        }
    }
    let n = raw[0].len();
    if n == 0 {
        return Err(Error::InvalidData("empty dataset".into()));
    }

    for (j, col) in raw.iter().enumerate() {
        if col.iter().any(|v| v.is_empty()) {
            return Err(Error::InvalidData(format!(
                "column `{}` has missing entries",
                headers[j]
            )));
        }
    }

    let parse_numeric = |col: &[String]| -> Option<Vec<f64>> {
        let mut out = Vec::with_capacity(col.len());
        for v in col {
            match v.parse::<f64>() {
                Ok(x) if x.is_finite() => out.push(x),
                _ => return None,
            }
        }
        Some(out)
    };

    let y_raw = parse_numeric(&raw[target_idx])
        .ok_or_else(|| Error::NonNumericTarget(target.to_string()))?;
    let y = Array1::from_vec(y_raw);

    let mut columns = Vec::new();
    let mut data: Vec<Vec<f64>> = Vec::new();
    let mut original_index = 0usize;
    for (j, col) in raw.iter().enumerate() {
        if j == target_idx {
            continue;
        }
        let name = &headers[j];
        if let Some(values) = parse_numeric(col) {
            columns.push(ColumnInfo {
                name: name.clone(),
                kind: ColumnKind::Numeric,
                original_index,
            });
            data.push(values);
        } else {
            let mut levels: Vec<String> = col
                .iter()
                .cloned()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            levels.sort();
            if levels.len() < 2 {
                return Err(Error::InvalidData(format!(
                    "factor column `{name}` has a single constant level; dummy expansion would produce an all-ones column"
                )));
            }
            for level in &levels {
                columns.push(ColumnInfo {
                    name: format!("{name}={level}"),
                    kind: ColumnKind::Dummy {
                        factor: name.clone(),
                        level: level.clone(),
                    },
                    original_index,
                });
                data.push(
                    col.iter()
                        .map(|v| if v == level { 1.0 } else { 0.0 })
                        .collect(),
                );
            }
        }
        original_index += 1;
    }
    if columns.is_empty() {
        return Err(Error::InvalidData(
            "no predictor columns left after removing the target".into(),
        ));
    }

    let p = columns.len();
    let x = Array2::from_shape_fn((n, p), |(i, j)| data[j][i]);
    Dataset::from_parts(columns, x, y)
}

/// Split rows into a train/test pair after a seeded shuffle.
///
/// Sizes are `ceil(f * n)` and `n - ceil(f * n)`; the partition is disjoint,
/// exhaustive and fully determined by the seed and fraction.
pub fn split(d: &Dataset, s: &SplitSpec) -> Result<(Dataset, Dataset)> {
    if d.n() < 2 {
        return Err(Error::InvalidData("need at least 2 rows to split".into()));
    }
    if !(s.train_fraction > 0.0 && s.train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train_fraction must be in (0,1), got {}",
            s.train_fraction
        )));
    }
    let n = d.n();
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = rng::stream(s.seed, "split", 0);
    idx.shuffle(&mut rng);
    let n_train = ((s.train_fraction * n as f64).ceil() as usize).clamp(1, n - 1);
    let (train_idx, test_idx) = idx.split_at(n_train);
    Ok((d.subset(train_idx), d.subset(test_idx)))
}

/// Closed-form Friedman #1 response (noise-free part):
/// `10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5`.
pub fn friedman1_response(x: &[f64]) -> f64 {
    assert!(
        x.len() >= 5,
        "friedman1 response needs at least 5 coordinates"
    );
    10.0 * (std::f64::consts::PI * x[0] * x[1]).sin()
        + 20.0 * (x[2] - 0.5) * (x[2] - 0.5)
        + 10.0 * x[3]
        + 5.0 * x[4]
}

/// Generate the Friedman #1 benchmark: 5 relevant uniform predictors plus
/// `extra_noise_vars` irrelevant uniform columns, Gaussian noise of sd
/// `noise_sd` on the response. The canonical form uses `extra_noise_vars = 5`.
pub fn friedman1(n: usize, noise_sd: f64, extra_noise_vars: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    if noise_sd < 0.0 {
        return Err(Error::InvalidParameter("noise_sd must be >= 0".into()));
    }
    let p = 5 + extra_noise_vars;
    let mut x_rng = rng::stream(seed, "friedman-x", 0);
    let mut e_rng = rng::stream(seed, "friedman-noise", 0);
    let x = Array2::from_shape_fn((n, p), |_| x_rng.random::<f64>());
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let row: Vec<f64> = x.row(i).to_vec();
        let noise = if noise_sd > 0.0 {
            noise_sd * rng::standard_normal(&mut e_rng)
        } else {
            0.0
        };
        y[i] = friedman1_response(&row) + noise;
    }
    let columns = (0..p)
        .map(|j| ColumnInfo {
            name: if j < 5 {
                format!("x{}", j + 1)
            } else {
                format!("noise{}", j - 4)
            },
            kind: ColumnKind::Numeric,
            original_index: j,
        })
        .collect();
    Dataset::from_parts(columns, x, y)
}

/// Write a dataset back out as canonical CSV (used by `datagen`).
pub fn write_csv(d: &Dataset, path: impl AsRef<Path>, target_name: &str) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(Error::Csv)?;
    let mut header: Vec<String> = d.columns.iter().map(|c| c.name.clone()).collect();
    header.push(target_name.to_string());
    w.write_record(&header)?;
    for i in 0..d.n() {
        let mut row: Vec<String> = (0..d.p()).map(|j| format!("{}", d.x[[i, j]])).collect();
        row.push(format!("{}", d.y[i]));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
