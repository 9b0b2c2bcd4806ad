//! Reference implementations used as oracles. None of them call into the
//! library's numerical code: plain `Vec` arithmetic, Gaussian elimination,
//! cyclic Jacobi rotations and Simpson quadrature. The CV oracle borrows
//! only the library's fold partition.

#![allow(dead_code, clippy::needless_range_loop, clippy::excessive_precision)]

use nalgebra::{DMatrix, DVector};
use panelkit::estimators::fold_assignment;
use panelkit::indices::AdpiComponents;
use panelkit::{Block, DesignMatrix, PanelKey};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Mat = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn transpose(a: &Mat) -> Mat {
    let (n, m) = (a.len(), a[0].len());
    (0..m).map(|j| (0..n).map(|i| a[i][j]).collect()).collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut c = vec![vec![0.0; m]; n];
    for i in 0..n {
        for l in 0..k {
            let ail = a[i][l];
            for j in 0..m {
                c[i][j] += ail * b[l][j];
            }
        }
    }
    c
}

pub fn matvec(a: &Mat, v: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn invert(a: &Mat) -> Mat {
    let n = a.len();
    let mut aug: Mat = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs()))
            .unwrap();
        aug.swap(col, pivot);
        let p = aug[col][col];
        assert!(p.abs() > 1e-300, "singular matrix in oracle");
        for v in aug[col].iter_mut() {
            *v /= p;
        }
        for row in 0..n {
            if row != col {
                let f = aug[row][col];
                if f != 0.0 {
                    for j in 0..2 * n {
                        aug[row][j] -= f * aug[col][j];
                    }
                }
            }
        }
    }
    aug.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &Mat, b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m: Mat = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(*bi);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for j in col..=n {
                m[row][j] -= f * m[col][j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

/// Lanczos approximation (g = 7, nine terms).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn t_log_norm(df: f64) -> f64 {
    ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln()
}

pub fn t_density(x: f64, df: f64) -> f64 {
    (t_log_norm(df) - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp()
}

/// `P(0 <= T <= x)` by composite Simpson's rule.
pub fn t_half_mass(x: f64, df: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return 0.0;
    }
    let c = t_log_norm(df);
    let f = |u: f64| (c - (df + 1.0) / 2.0 * (1.0 + u * u / df).ln()).exp();
    let n = 4000;
    let h = x / n as f64;
    let mut s = f(0.0) + f(x);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * h);
    }
    s * h / 3.0
}

pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    (1.0 - 2.0 * t_half_mass(t, df)).max(0.0)
}

/// Upper quantile `q` with `P(|T| <= q) = level`, by bisection.
pub fn t_critical(level: f64, df: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 50.0);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if 2.0 * t_half_mass(mid, df) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Full classical OLS table from the normal equations.
#[derive(Debug, Clone)]
pub struct OlsOracle {
    pub beta: Vec<f64>,
    pub se: Vec<f64>,
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub ci_lower: Vec<f64>,
    pub ci_upper: Vec<f64>,
    pub df: usize,
    pub rss: f64,
}

/// `x` already contains whatever intercept or dummy columns are wanted.
pub fn ols_oracle(x: &Mat, y: &[f64], level: f64) -> OlsOracle {
    let n = x.len();
    let k = x[0].len();
    let xt = transpose(x);
    let xtx = matmul(&xt, x);
    let xty = matvec(&xt, y);
    let inv = invert(&xtx);
    let beta = matvec(&inv, &xty);
    let fitted = matvec(x, &beta);
    let rss: f64 = y.iter().zip(&fitted).map(|(a, b)| (a - b).powi(2)).sum();
    let df = n - k;
    let sigma2 = rss / df as f64;
    let se: Vec<f64> = (0..k).map(|j| (sigma2 * inv[j][j]).sqrt()).collect();
    let t: Vec<f64> = beta.iter().zip(&se).map(|(b, s)| b / s).collect();
    let p = t.iter().map(|t| t_two_sided_p(*t, df as f64)).collect();
    let q = t_critical(level, df as f64);
    OlsOracle {
        ci_lower: beta.iter().zip(&se).map(|(b, s)| b - q * s).collect(),
        ci_upper: beta.iter().zip(&se).map(|(b, s)| b + q * s).collect(),
        beta,
        se,
        t,
        p,
        df,
        rss,
    }
}

/// Eigenpairs of a symmetric matrix by cyclic Jacobi rotations, sorted by
/// eigenvalue descending. Eigenvectors are the columns of the returned matrix.
pub fn jacobi_eigen(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.len();
    let mut a = a.clone();
    let mut v: Mat = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n)
        .map(|r| order.iter().map(|&c| v[r][c]).collect())
        .collect();
    (values, vectors)
}

/// Sample correlation matrix of the columns of `x`.
pub fn correlation(x: &Mat) -> Mat {
    let n = x.len() as f64;
    let k = x[0].len();
    let cols: Vec<Vec<f64>> = (0..k).map(|j| x.iter().map(|r| r[j]).collect()).collect();
    let z: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| {
            let m = c.iter().sum::<f64>() / n;
            let sd = (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            c.iter().map(|v| (v - m) / sd).collect()
        })
        .collect();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| z[i].iter().zip(&z[j]).map(|(a, b)| a * b).sum::<f64>() / (n - 1.0))
                .collect()
        })
        .collect()
}

pub fn to_dmatrix(a: &Mat) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), a[0].len(), |i, j| a[i][j])
}

pub fn from_dmatrix(a: &DMatrix<f64>) -> Mat {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect())
        .collect()
}

pub fn with_intercept(x: &Mat) -> Mat {
    x.iter()
        .map(|r| std::iter::once(1.0).chain(r.iter().copied()).collect())
        .collect()
}

/// Random design with standard normal regressors and a linear response.
pub fn random_design(seed: u64, n: usize, k: usize, noise: f64) -> (DesignMatrix, Mat, Vec<f64>) {
    let mut r = rng(seed);
    let x: Mat = (0..n)
        .map(|_| (0..k).map(|_| normal(&mut r)).collect())
        .collect();
    let beta: Vec<f64> = (0..=k).map(|_| 3.0 * normal(&mut r)).collect();
    let y: Vec<f64> = x
        .iter()
        .map(|row| {
            beta[0]
                + row.iter().zip(&beta[1..]).map(|(a, b)| a * b).sum::<f64>()
                + noise * normal(&mut r)
        })
        .collect();
    let names = (0..k).map(|j| format!("x{j}")).collect();
    let keys = (0..n).map(|i| PanelKey::new("row", i as i32)).collect();
    let d = DesignMatrix::new(
        "y",
        DVector::from_vec(y.clone()),
        to_dmatrix(&x),
        names,
        keys,
    )
    .unwrap();
    (d, x, y)
}

/// Balanced panel of `groups x periods` rows. Regressors carry group-level
/// shifts so pooled and within estimates differ.
pub fn random_panel_design(seed: u64, groups: usize, periods: usize, k: usize) -> DesignMatrix {
    let mut r = rng(seed);
    let alpha: Vec<f64> = (0..groups).map(|_| 5.0 * normal(&mut r)).collect();
    let gamma: Vec<f64> = (0..periods).map(|_| normal(&mut r)).collect();
    let beta: Vec<f64> = (0..k).map(|_| 2.0 * normal(&mut r)).collect();
    let mut keys = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for g in 0..groups {
        let shift: Vec<f64> = (0..k).map(|_| 2.0 * normal(&mut r)).collect();
        for t in 0..periods {
            let row: Vec<f64> = shift.iter().map(|s| s + normal(&mut r)).collect();
            let y = alpha[g]
                + gamma[t]
                + row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>()
                + 0.5 * normal(&mut r);
            keys.push(PanelKey::new(format!("C{g:02}"), 2000 + t as i32));
            xs.push(row);
            ys.push(y);
        }
    }
    let names = (0..k).map(|j| format!("x{j}")).collect();
    DesignMatrix::new("y", DVector::from_vec(ys), to_dmatrix(&xs), names, keys).unwrap()
}

/// Least squares with explicit dummy columns. Returns slopes, one intercept
/// per group (sorted by name), and year effects relative to the first year
/// when `years` is set.
pub struct LsdvOracle {
    pub slopes: Vec<f64>,
    pub se: Vec<f64>,
    pub group_intercepts: Vec<(String, f64)>,
    pub year_effects: Vec<(i32, f64)>,
    pub df: usize,
}

pub fn lsdv_oracle(d: &DesignMatrix, years: bool) -> LsdvOracle {
    let mut groups: Vec<String> = d.keys.iter().map(|k| k.country.clone()).collect();
    groups.sort();
    groups.dedup();
    let mut periods: Vec<i32> = d.keys.iter().map(|k| k.year).collect();
    periods.sort();
    periods.dedup();
    let k = d.ncols();
    let x: Mat = (0..d.nrows())
        .map(|i| {
            let mut row: Vec<f64> = (0..k).map(|j| d.x[(i, j)]).collect();
            row.extend(
                groups
                    .iter()
                    .map(|g| f64::from(u8::from(&d.keys[i].country == g))),
            );
            if years {
                row.extend(
                    periods[1..]
                        .iter()
                        .map(|t| f64::from(u8::from(d.keys[i].year == *t))),
                );
            }
            row
        })
        .collect();
    let y: Vec<f64> = d.y.iter().copied().collect();
    let fit = ols_oracle(&x, &y, 0.95);
    let year_effects = if years {
        std::iter::once((periods[0], 0.0))
            .chain(
                periods[1..]
                    .iter()
                    .zip(&fit.beta[k + groups.len()..])
                    .map(|(t, b)| (*t, *b)),
            )
            .collect()
    } else {
        Vec::new()
    };
    LsdvOracle {
        slopes: fit.beta[..k].to_vec(),
        se: fit.se[..k].to_vec(),
        group_intercepts: groups
            .into_iter()
            .zip(fit.beta[k..].iter().copied())
            .collect(),
        year_effects,
        df: fit.df,
    }
}

/// 4x4 orthogonal matrix with every entry +-1/2 (a scaled Hadamard matrix).
pub fn half_hadamard() -> Mat {
    let h = [
        [1.0, 1.0, 1.0, 1.0],
        [1.0, -1.0, 1.0, -1.0],
        [1.0, 1.0, -1.0, -1.0],
        [1.0, -1.0, -1.0, 1.0],
    ];
    h.iter()
        .map(|r| r.iter().map(|v| v / 2.0).collect())
        .collect()
}

/// Data whose sample correlation matrix has exactly the eigenvalues
/// `4 * shares`, built by whitening random data and recolouring it with
/// `Q diag(sqrt(lambda)) Q'`. Because every entry of Q is +-1/2, the target
/// covariance has a unit diagonal and so is its own correlation matrix.
pub fn planted_spectrum(seed: u64, n: usize, shares: [f64; 4]) -> Mat {
    let mut r = rng(seed);
    let raw = DMatrix::from_fn(n, 4, |_, _| normal(&mut r));
    let means = raw.row_mean();
    let mut centered = raw.clone();
    for mut row in centered.row_iter_mut() {
        row -= &means;
    }
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    let l = cov.cholesky().expect("random data is full rank").l();
    let l_inv_t = l.try_inverse().unwrap().transpose();
    let white = &centered * l_inv_t;
    let q = to_dmatrix(&half_hadamard());
    let root = DMatrix::from_diagonal(&DVector::from_iterator(
        4,
        shares.iter().map(|s| (4.0 * s).sqrt()),
    ));
    let colour = &q * root * q.transpose();
    let out = white * colour;
    // arbitrary location and scale per column: correlations do not change
    let loc = [10.0, -3.0, 0.5, 200.0];
    let scale = [2.0, 0.1, 7.0, 50.0];
    (0..n)
        .map(|i| (0..4).map(|j| loc[j] + scale[j] * out[(i, j)]).collect())
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Ridge computed by hand: sample-standardized X, centered y, penalty on the
/// standardized scale, solved by Gaussian elimination.
pub fn ridge_oracle(x: &Mat, y: &[f64], lambda: f64) -> (f64, Vec<f64>) {
    let n = x.len();
    let k = x[0].len();
    let mut means = vec![0.0; k];
    let mut sds = vec![0.0; k];
    for j in 0..k {
        means[j] = x.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        sds[j] =
            (x.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
    }
    let z: Mat = x
        .iter()
        .map(|r| (0..k).map(|j| (r[j] - means[j]) / sds[j]).collect())
        .collect();
    let ym = y.iter().sum::<f64>() / n as f64;
    let yc: Vec<f64> = y.iter().map(|v| v - ym).collect();
    let zt = transpose(&z);
    let mut a = matmul(&zt, &z);
    for (j, row) in a.iter_mut().enumerate() {
        row[j] += lambda;
    }
    let bz = solve(&a, &matvec(&zt, &yc));
    let b: Vec<f64> = bz.iter().zip(&sds).map(|(b, s)| b / s).collect();
    let intercept = ym - b.iter().zip(&means).map(|(b, m)| b * m).sum::<f64>();
    (intercept, b)
}

/// Cross-validation computed fold by fold with the hand ridge solver.
pub fn cv_oracle(
    x: &Mat,
    y: &[f64],
    grid: &[f64],
    folds: usize,
    seed: u64,
) -> (Vec<f64>, Vec<f64>) {
    let assignment = fold_assignment(x.len(), folds, seed).unwrap();
    let mut means = Vec::new();
    let mut ses = Vec::new();
    for &lambda in grid {
        let errs: Vec<f64> = assignment
            .iter()
            .map(|test| {
                let train: Vec<usize> = (0..x.len()).filter(|i| !test.contains(i)).collect();
                let tx: Mat = train.iter().map(|&i| x[i].clone()).collect();
                let ty: Vec<f64> = train.iter().map(|&i| y[i]).collect();
                let (b0, b) = ridge_oracle(&tx, &ty, lambda);
                test.iter()
                    .map(|&i| {
                        let pred = b0 + x[i].iter().zip(&b).map(|(a, c)| a * c).sum::<f64>();
                        (y[i] - pred).powi(2)
                    })
                    .sum::<f64>()
                    / test.len() as f64
            })
            .collect();
        let k = errs.len() as f64;
        let m = errs.iter().sum::<f64>() / k;
        let sd = (errs.iter().map(|e| (e - m).powi(2)).sum::<f64>() / (k - 1.0)).sqrt();
        means.push(m);
        ses.push(sd / k.sqrt());
    }
    (means, ses)
}

/// Three ADPI components driven by one latent factor.
pub fn adpi_components(seed: u64, countries: usize, years: usize) -> AdpiComponents {
    let mut g = rng(seed);
    let mut keys = Vec::new();
    let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..countries {
        for t in 0..years {
            keys.push(PanelKey::new(format!("K{i}"), 2010 + t as i32));
            let base = normal(&mut g);
            a.push(0.05 + 0.02 * base + 0.01 * normal(&mut g));
            b.push(0.3 + 0.1 * base + 0.05 * normal(&mut g));
            c.push(0.15 - 0.03 * base + 0.02 * normal(&mut g));
        }
    }
    AdpiComponents::new(keys, a, b, c).unwrap()
}

/// Block with synthetic keys over the rows of `x`.
pub fn block_from(x: &Mat, names: &[&str]) -> Block {
    Block::new(
        names.iter().map(|s| s.to_string()).collect(),
        (0..x.len())
            .map(|i| PanelKey::new(format!("C{}", i % 7), 2000 + (i / 7) as i32))
            .collect(),
        to_dmatrix(x),
    )
    .unwrap()
}

/// Two columns with sample correlation exactly `r`.
pub fn correlated_pair(seed: u64, n: usize, r: f64) -> Mat {
    let mut g = rng(seed);
    let raw: Mat = (0..n)
        .map(|_| vec![normal(&mut g), normal(&mut g)])
        .collect();
    // orthonormalise the centered columns, then mix
    let c = correlation(&raw);
    let mean = |j: usize| raw.iter().map(|row| row[j]).sum::<f64>() / n as f64;
    let (m0, m1) = (mean(0), mean(1));
    let sd = |j: usize, m: f64| {
        (raw.iter().map(|row| (row[j] - m).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt()
    };
    let (s0, s1) = (sd(0, m0), sd(1, m1));
    let rho = c[0][1];
    raw.iter()
        .map(|row| {
            let a = (row[0] - m0) / s0;
            let b = ((row[1] - m1) / s1 - rho * a) / (1.0 - rho * rho).sqrt();
            vec![
                3.0 + 2.0 * a,
                -1.0 + 0.5 * (r * a + (1.0 - r * r).sqrt() * b),
            ]
        })
        .collect()
}
