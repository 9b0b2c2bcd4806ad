use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative size below which a QR pivot marks a column as dependent on the
/// columns before it.
const RANK_TOL: f64 = 1e-10;

/// Least-squares solution from a thin Householder QR, with `(X'X)^-1`
/// available for inference.
#[derive(Debug, Clone)]
pub(crate) struct LeastSquares {
    pub beta: DVector<f64>,
    pub fitted: DVector<f64>,
    r_inv: DMatrix<f64>,
}

impl LeastSquares {
    /// `names` labels the columns of `x` for rank-deficiency reports.
    pub fn fit(x: &DMatrix<f64>, y: &DVector<f64>, names: &[String]) -> Result<Self> {
        let (n, p) = x.shape();
        debug_assert_eq!(names.len(), p);
        if p == 0 {
            return Ok(LeastSquares {
                beta: DVector::zeros(0),
                fitted: DVector::zeros(n),
                r_inv: DMatrix::zeros(0, 0),
            });
        }
        if n < p {
            return Err(Error::InsufficientRows { n, params: p });
        }
        let qr = x.clone().qr();
        let r = qr.r();
        let q = qr.q();

        for j in 0..p {
            let norm = x.column(j).norm();
            if norm == 0.0 || r[(j, j)].abs() <= RANK_TOL * norm {
                return Err(Error::RankDeficient {
                    columns: dependent_set(x, &r, j, names),
                });
            }
        }

        let qty = q.transpose() * y;
        let beta = r
            .solve_upper_triangular(&qty)
            .expect("triangular factor checked nonsingular");
        let r_inv = r
            .solve_upper_triangular(&DMatrix::identity(p, p))
            .expect("triangular factor checked nonsingular");
        let fitted = x * &beta;
        Ok(LeastSquares {
            beta,
            fitted,
            r_inv,
        })
    }

    /// `(X'X)^-1 = R^-1 R^-T`
    #[cfg(test)]
    pub fn xtx_inv(&self) -> DMatrix<f64> {
        &self.r_inv * self.r_inv.transpose()
    }

    /// Diagonal of `(X'X)^-1` without forming the full matrix.
    pub fn xtx_inv_diag(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.r_inv.nrows(),
            self.r_inv.row_iter().map(|row| row.norm_squared()),
        )
    }
}

/// Names column `j` together with the earlier columns it is a combination of.
fn dependent_set(x: &DMatrix<f64>, r: &DMatrix<f64>, j: usize, names: &[String]) -> Vec<String> {
    let mut set = Vec::new();
    if j > 0 {
        let lead = r.view((0, 0), (j, j)).into_owned();
        let rhs = r.view((0, j), (j, 1)).into_owned();
        if let Some(c) = lead.solve_upper_triangular(&rhs) {
            let scale = x.column(j).norm().max(f64::MIN_POSITIVE);
            for i in 0..j {
                if (c[i] * x.column(i).norm()).abs() > 1e-6 * scale {
                    set.push(names[i].clone());
                }
            }
        }
    }
    set.push(names[j].clone());
    set
}

/// Sum of squares of `v` around its mean.
pub(crate) fn centered_ss(v: &DVector<f64>) -> f64 {
    let mean = v.mean();
    v.iter().map(|x| (x - mean).powi(2)).sum()
}
