use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ridge_fit;
use crate::error::{Error, Result};
use crate::panel::DesignMatrix;

/// Cross-validated prediction error over a penalty grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvCurve {
    /// Ascending, deduplicated.
    pub grid: Vec<f64>,
    #[serde(with = "crate::float_serde::vec")]
    pub mse_mean: Vec<f64>,
    #[serde(with = "crate::float_serde::vec")]
    pub mse_se: Vec<f64>,
    pub fold_count: usize,
    pub seed: u64,
    pub lambda_min: f64,
    pub lambda_1se: f64,
}

/// `count` points spaced evenly in log scale over `[min, max]`.
pub fn log_grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if !min.is_finite() || min <= 0.0 || !max.is_finite() || max < min || count == 0 {
        return Err(Error::InvalidArgument(format!(
            "log grid needs 0 < min <= max and count >= 1, got ({min}, {max}, {count})"
        )));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    let (lo, hi) = (min.ln(), max.ln());
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            if i == 0 {
                min
            } else if i == count - 1 {
                max
            } else {
                (lo + step * i as f64).exp()
            }
        })
        .collect())
}

/// Shuffles `0..n` with a ChaCha8 stream seeded by `seed` and cuts the
/// permutation into `folds` contiguous chunks whose sizes differ by at most
/// one. Each chunk is returned sorted.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 || folds > n {
        return Err(Error::InvalidArgument(format!(
            "fold count must be in [2, {n}], got {folds}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let base = n / folds;
    let extra = n % folds;
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let size = base + usize::from(f < extra);
        let mut chunk = order[start..start + size].to_vec();
        chunk.sort_unstable();
        out.push(chunk);
        start += size;
    }
    Ok(out)
}

/// K-fold cross-validation of [`ridge_fit`] over `grid`. Standardization is
/// re-estimated on every training fold. Grid points are evaluated in
/// parallel; each one is a pure function of the fold assignment, so the
/// result does not depend on scheduling.
pub fn ridge_cv(d: &DesignMatrix, grid: &[f64], folds: usize, seed: u64) -> Result<CvCurve> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("lambda grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|l| **l < 0.0 || !l.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda grid values must be finite and >= 0, got {bad}"
        )));
    }
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let n = d.nrows();
    let assignment = fold_assignment(n, folds, seed)?;
    let splits: Vec<(DesignMatrix, DesignMatrix)> = assignment
        .iter()
        .enumerate()
        .map(|(f, test)| {
            let train: Vec<usize> = assignment
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != f)
                .flat_map(|(_, idx)| idx.iter().copied())
                .collect();
            if train.len() < 2 {
                return Err(Error::FoldTooSmall { rows: train.len() });
            }
            let mut train = train;
            train.sort_unstable();
            Ok((d.subset(&train), d.subset(test)))
        })
        .collect::<Result<_>>()?;

    let per_lambda: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&lambda| {
            let errors = splits
                .iter()
                .map(|(train, test)| {
                    let fit = ridge_fit(train, lambda)?;
                    let pred = fit.predict(&test.x);
                    Ok((&test.y - pred).norm_squared() / test.nrows() as f64)
                })
                .collect::<Result<Vec<f64>>>()?;
            let k = errors.len() as f64;
            let mean = errors.iter().sum::<f64>() / k;
            let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (k - 1.0);
            Ok((mean, (var / k).sqrt()))
        })
        .collect::<Result<_>>()?;

    let mse_mean: Vec<f64> = per_lambda.iter().map(|p| p.0).collect();
    let mse_se: Vec<f64> = per_lambda.iter().map(|p| p.1).collect();

    // first index wins ties, i.e. the smallest lambda
    let best = mse_mean
        .iter()
        .enumerate()
        .fold(0, |best, (i, &m)| if m < mse_mean[best] { i } else { best });
    let bound = mse_mean[best] + mse_se[best];
    let one_se = mse_mean
        .iter()
        .rposition(|&m| m <= bound)
        .expect("lambda_min satisfies its own bound");

    Ok(CvCurve {
        lambda_min: grid[best],
        lambda_1se: grid[one_se],
        grid,
        mse_mean,
        mse_se,
        fold_count: folds,
        seed,
    })
}
