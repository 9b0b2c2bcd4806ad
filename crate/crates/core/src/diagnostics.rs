//! Pearson correlation screening and variance inflation factors.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{centered_ss, LeastSquares};
use crate::panel::{standardize_named, Block};

pub const DEFAULT_CORR_CUTOFF: f64 = 0.70;
pub const DEFAULT_VIF_THRESHOLD: f64 = 5.0;

/// R-squared at or above this counts as exact collinearity.
const PERFECT_FIT: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    /// Row-major `k x k`.
    pub values: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let k = self.names.len();
        DMatrix::from_fn(k, k, |i, j| self.values[i][j])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatedPair {
    pub name_a: String,
    pub name_b: String,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VifEntry {
    pub name: String,
    /// `+inf` when the column is an exact combination of the others.
    #[serde(with = "crate::float_serde")]
    pub vif: f64,
    pub flagged: bool,
    pub perfect_collinearity: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VifTable {
    pub entries: Vec<VifEntry>,
    pub threshold: f64,
}

impl VifTable {
    pub fn flagged(&self) -> impl Iterator<Item = &VifEntry> {
        self.entries.iter().filter(|e| e.flagged)
    }
}

/// Pearson correlations of every pair of columns.
pub fn correlation_matrix(block: &Block) -> Result<CorrelationMatrix> {
    let n = block.nrows();
    let k = block.ncols();
    if n < 3 {
        return Err(Error::TooShort {
            required: 3,
            actual: n,
        });
    }
    let mut z = DMatrix::zeros(n, k);
    for (j, name) in block.names.iter().enumerate() {
        let col: Vec<f64> = block.values.column(j).iter().copied().collect();
        let (zc, _) = standardize_named(name, &col, false)?;
        z.set_column(j, &DVector::from_vec(zc));
    }
    let mut r = z.transpose() * &z / (n as f64 - 1.0);
    for i in 0..k {
        r[(i, i)] = 1.0;
        for j in 0..i {
            let v = (0.5 * (r[(i, j)] + r[(j, i)])).clamp(-1.0, 1.0);
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    Ok(CorrelationMatrix {
        names: block.names.clone(),
        values: r
            .row_iter()
            .map(|row| row.iter().copied().collect())
            .collect(),
    })
}

/// Unordered pairs with `|r| >= cutoff`, strongest first. Equal magnitudes
/// keep the matrix's upper-triangle order.
pub fn high_correlation_pairs(r: &CorrelationMatrix, cutoff: f64) -> Vec<CorrelatedPair> {
    let k = r.names.len();
    let mut pairs = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            let v = r.get(i, j);
            if v.abs() >= cutoff {
                pairs.push(CorrelatedPair {
                    name_a: r.names[i].clone(),
                    name_b: r.names[j].clone(),
                    r: v,
                });
            }
        }
    }
    pairs.sort_by(|a, b| b.r.abs().total_cmp(&a.r.abs()));
    pairs
}

/// Variance inflation factors from auxiliary regressions of each column on
/// the others plus an intercept. Exactly collinear columns get `+inf`.
pub fn vif(block: &Block, threshold: f64) -> Result<VifTable> {
    let n = block.nrows();
    let k = block.ncols();
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "VIF needs at least 2 regressors, got {k}"
        )));
    }
    if n <= k {
        return Err(Error::InsufficientRows { n, params: k });
    }

    let entries = (0..k)
        .map(|j| {
            let name = &block.names[j];
            let target = block.values.column(j).into_owned();
            let tss = centered_ss(&target);
            let mean = target.mean();
            if tss.is_nan()
                || tss <= 0.0
                || tss.sqrt() <= f64::EPSILON * mean.abs() * (n as f64).sqrt()
            {
                return Err(Error::ZeroVariance(name.clone()));
            }
            let r2 = auxiliary_r_squared(block, j, &target, tss);
            let (vif, perfect) = if r2 >= PERFECT_FIT {
                (f64::INFINITY, true)
            } else {
                (1.0 / (1.0 - r2), false)
            };
            Ok(VifEntry {
                name: name.clone(),
                vif,
                flagged: vif > threshold,
                perfect_collinearity: perfect,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VifTable { entries, threshold })
}

/// R-squared of column `j` on the remaining columns plus intercept. Other
/// columns that are themselves collinear are handled through a
/// minimum-norm least-squares solve.
fn auxiliary_r_squared(block: &Block, j: usize, target: &DVector<f64>, tss: f64) -> f64 {
    let n = block.nrows();
    let k = block.ncols();
    let mut others = DMatrix::from_element(n, k, 1.0);
    for (c, i) in (1..).zip((0..k).filter(|&i| i != j)) {
        others.set_column(c, &block.values.column(i));
    }
    let names: Vec<String> = (0..k).map(|i| i.to_string()).collect();
    let fitted = match LeastSquares::fit(&others, target, &names) {
        Ok(ls) => ls.fitted,
        Err(_) => {
            let svd = others.clone().svd(true, true);
            let eps = 1e-12 * svd.singular_values.max();
            let beta = svd.solve(target, eps).expect("u and v were computed");
            &others * beta
        }
    };
    let rss = (target - fitted).norm_squared();
    (1.0 - rss / tss).min(1.0)
}
