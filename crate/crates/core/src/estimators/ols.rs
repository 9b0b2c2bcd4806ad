use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{CoefficientTable, INTERCEPT};
use crate::error::{Error, Result};
use crate::linalg::{centered_ss, LeastSquares};
use crate::panel::DesignMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    /// Intercept row first when fitted with an intercept.
    pub coefficients: CoefficientTable,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub sigma2: f64,
    pub residuals: Vec<f64>,
    pub intercept: bool,
}

impl OlsFit {
    pub fn fitted(&self, d: &DesignMatrix) -> Vec<f64> {
        d.y.iter()
            .zip(&self.residuals)
            .map(|(y, e)| y - e)
            .collect()
    }
}

/// Prepends a column of ones.
pub(crate) fn with_intercept(x: &DMatrix<f64>) -> DMatrix<f64> {
    x.clone().insert_column(0, 1.0)
}

/// Pooled least squares with homoskedastic standard errors.
pub fn ols_fit(d: &DesignMatrix, intercept: bool) -> Result<OlsFit> {
    let n = d.nrows();
    let params = d.ncols() + usize::from(intercept);
    if n <= params {
        return Err(Error::InsufficientRows { n, params });
    }
    let (x, names) = if intercept {
        let mut names = Vec::with_capacity(params);
        names.push(INTERCEPT.to_string());
        names.extend(d.names.iter().cloned());
        (with_intercept(&d.x), names)
    } else {
        (d.x.clone(), d.names.clone())
    };

    let ls = LeastSquares::fit(&x, &d.y, &names)?;
    let residuals: DVector<f64> = &d.y - &ls.fitted;
    let rss = residuals.norm_squared();
    let df = n - params;
    let sigma2 = rss / df as f64;

    let se: Vec<f64> = ls
        .xtx_inv_diag()
        .iter()
        .map(|v| (sigma2 * v).sqrt())
        .collect();
    let coefficients = CoefficientTable::classical(&names, ls.beta.as_slice(), &se, df, n)?;

    let tss = if intercept {
        centered_ss(&d.y)
    } else {
        d.y.norm_squared()
    };
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    let denom = if intercept { n - 1 } else { n } as f64;
    let adj_r_squared = 1.0 - (1.0 - r_squared) * denom / df as f64;

    Ok(OlsFit {
        coefficients,
        r_squared,
        adj_r_squared,
        sigma2,
        residuals: residuals.as_slice().to_vec(),
        intercept,
    })
}
