use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::LeastSquares;
use crate::panel::{mean_sd, DesignMatrix, Standardization};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeCoefficient {
    pub variable: String,
    /// Slope in response units per original unit of the regressor.
    pub estimate: f64,
    /// Slope per standard deviation of the regressor.
    pub standardized: f64,
}

/// Ridge fit with an unpenalized intercept. Carries no inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeFit {
    pub lambda: f64,
    pub intercept: f64,
    pub coefficients: Vec<RidgeCoefficient>,
    pub standardization: Vec<Standardization>,
    pub y_mean: f64,
}

impl RidgeFit {
    pub fn standardized_norm(&self) -> f64 {
        self.coefficients
            .iter()
            .map(|c| c.standardized * c.standardized)
            .sum::<f64>()
            .sqrt()
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> DVector<f64> {
        let slopes = DVector::from_iterator(
            self.coefficients.len(),
            self.coefficients.iter().map(|c| c.estimate),
        );
        (x * slopes).add_scalar(self.intercept)
    }
}

/// Solves `(Z'Z + lambda I) b = Z'(y - ybar)` on sample-standardized
/// predictors `Z`, then maps `b` back to original units.
pub fn ridge_fit(d: &DesignMatrix, lambda: f64) -> Result<RidgeFit> {
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    let n = d.nrows();
    if n < 2 {
        return Err(Error::TooShort {
            required: 2,
            actual: n,
        });
    }
    let k = d.ncols();
    let y_mean = d.y.mean();

    let mut standardization = Vec::with_capacity(k);
    let mut z = d.x.clone();
    for (j, name) in d.names.iter().enumerate() {
        let col: Vec<f64> = d.x.column(j).iter().copied().collect();
        let (mean, sd) = mean_sd(&col);
        if sd.is_nan() || sd <= 0.0 || sd <= f64::EPSILON * mean.abs() {
            return Err(Error::ZeroVariance(name.clone()));
        }
        let s = Standardization {
            mean,
            sd,
            sign_flip: false,
        };
        z.column_mut(j).apply(|v| *v = s.apply(*v));
        standardization.push(s);
    }
    let yc = d.y.add_scalar(-y_mean);

    let beta_z = if k == 0 {
        DVector::zeros(0)
    } else {
        let mut gram = z.transpose() * &z;
        for j in 0..k {
            gram[(j, j)] += lambda;
        }
        let rhs = z.transpose() * &yc;
        match gram.cholesky() {
            Some(chol) => chol.solve(&rhs),
            None => {
                // only reachable for singular Z'Z at lambda = 0
                LeastSquares::fit(&z, &yc, &d.names)?;
                return Err(Error::RankDeficient {
                    columns: d.names.clone(),
                });
            }
        }
    };

    let coefficients: Vec<RidgeCoefficient> = d
        .names
        .iter()
        .zip(beta_z.iter().zip(&standardization))
        .map(|(name, (&b, s))| RidgeCoefficient {
            variable: name.clone(),
            estimate: b / s.sd,
            standardized: b,
        })
        .collect();
    let intercept = y_mean
        - coefficients
            .iter()
            .zip(&standardization)
            .map(|(c, s)| c.estimate * s.mean)
            .sum::<f64>();

    Ok(RidgeFit {
        lambda,
        intercept,
        coefficients,
        standardization,
        y_mean,
    })
}
