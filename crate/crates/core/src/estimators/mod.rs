//! Pooled OLS, within-transformation fixed effects and ridge regression with
//! cross-validated penalty selection.

mod cv;
mod fe;
mod ols;
mod ridge;

pub use cv::{fold_assignment, log_grid, ridge_cv, CvCurve};
pub use fe::{fe_fit, FeFit, FeOptions};
pub use ols::{ols_fit, OlsFit};
pub use ridge::{ridge_fit, RidgeCoefficient, RidgeFit};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

pub const INTERCEPT: &str = "(Intercept)";

/// Default significance level for flagging coefficient rows.
pub const DEFAULT_ALPHA: f64 = 0.10;

/// One estimated coefficient with classical inference. Field names double as
/// the CSV/JSON column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub variable: String,
    pub estimate: f64,
    pub std_error: f64,
    #[serde(with = "crate::float_serde")]
    pub t_statistic: f64,
    #[serde(with = "crate::float_serde")]
    pub p_value: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub rows: Vec<CoefficientRow>,
    pub df_resid: usize,
    pub n: usize,
    /// Level used by [`mark_significance`], if it has been applied.
    pub alpha: Option<f64>,
}

impl CoefficientTable {
    /// Builds t statistics, two-sided Student-t p-values and 95% intervals
    /// from estimates and standard errors.
    pub fn classical(
        names: &[String],
        estimates: &[f64],
        std_errors: &[f64],
        df_resid: usize,
        n: usize,
    ) -> Result<Self> {
        if df_resid == 0 {
            return Err(Error::InsufficientRows {
                n,
                params: n - df_resid,
            });
        }
        let dist = StudentsT::new(0.0, 1.0, df_resid as f64)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let crit = dist.inverse_cdf(0.975);
        let rows = names
            .iter()
            .zip(estimates.iter().zip(std_errors))
            .map(|(name, (&estimate, &se))| {
                let t = if se > 0.0 {
                    estimate / se
                } else if estimate == 0.0 {
                    0.0
                } else {
                    estimate.signum() * f64::INFINITY
                };
                let p = (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0);
                CoefficientRow {
                    variable: name.clone(),
                    estimate,
                    std_error: se,
                    t_statistic: t,
                    p_value: p,
                    ci_lower: estimate - crit * se,
                    ci_upper: estimate + crit * se,
                    significant: false,
                }
            })
            .collect();
        Ok(CoefficientTable {
            rows,
            df_resid,
            n,
            alpha: None,
        })
    }

    pub fn row(&self, variable: &str) -> Option<&CoefficientRow> {
        self.rows.iter().find(|r| r.variable == variable)
    }

    pub fn estimates(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.estimate).collect()
    }
}

/// Flags rows with `p <= alpha`. The flag is presentation metadata; nothing
/// else in the table changes.
pub fn mark_significance(table: &CoefficientTable, alpha: f64) -> CoefficientTable {
    let mut marked = table.clone();
    for row in &mut marked.rows {
        row.significant = row.p_value <= alpha;
    }
    marked.alpha = Some(alpha);
    marked
}
