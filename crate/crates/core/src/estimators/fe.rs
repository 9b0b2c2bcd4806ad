use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::CoefficientTable;
use crate::error::{Error, Result};
use crate::linalg::LeastSquares;
use crate::panel::{DesignMatrix, PanelKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeOptions {
    pub country_effects: bool,
    pub year_effects: bool,
}

impl Default for FeOptions {
    fn default() -> Self {
        FeOptions {
            country_effects: true,
            year_effects: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeFit {
    /// Slopes only; intercepts are absorbed into the effects.
    pub coefficients: CoefficientTable,
    pub group_intercepts: BTreeMap<String, f64>,
    /// Year effects relative to the first year, which is normalized to 0.
    pub year_intercepts: Option<BTreeMap<i32, f64>>,
    pub within_r_squared: f64,
    pub sigma2: f64,
    pub residuals: Vec<f64>,
    pub groups: usize,
    pub periods: usize,
}

/// Maps each row to the index of its label, labels in first-appearance order.
fn index_by<T: Clone + Eq + std::hash::Hash>(
    labels: impl Iterator<Item = T>,
) -> (Vec<usize>, Vec<T>) {
    let mut lookup = HashMap::new();
    let mut levels = Vec::new();
    let ids = labels
        .map(|l| {
            *lookup.entry(l.clone()).or_insert_with(|| {
                levels.push(l);
                levels.len() - 1
            })
        })
        .collect();
    (ids, levels)
}

/// Subtracts per-level means from every column of `m` in place.
fn demean_by(m: &mut DMatrix<f64>, ids: &[usize], levels: usize) {
    let mut counts = vec![0usize; levels];
    for &g in ids {
        counts[g] += 1;
    }
    for mut col in m.column_iter_mut() {
        let mut sums = vec![0.0; levels];
        for (i, &g) in ids.iter().enumerate() {
            sums[g] += col[i];
        }
        for (i, &g) in ids.iter().enumerate() {
            col[i] -= sums[g] / counts[g] as f64;
        }
    }
}

/// Indicator columns for levels `skip..levels`.
fn dummies(ids: &[usize], levels: usize, skip: usize) -> DMatrix<f64> {
    DMatrix::from_fn(ids.len(), levels - skip, |i, j| {
        if ids[i] == j + skip {
            1.0
        } else {
            0.0
        }
    })
}

/// Fixed-effects regression via the within transformation.
///
/// Country effects demean every variable within country. With year effects
/// as well, the country-demeaned data are additionally residualized on the
/// country-demeaned year indicators, which is exact for unbalanced panels.
pub fn fe_fit(d: &DesignMatrix, options: FeOptions) -> Result<FeFit> {
    if !options.country_effects && !options.year_effects {
        return Err(Error::InvalidArgument(
            "fixed effects need country effects, year effects or both".into(),
        ));
    }
    let n = d.nrows();
    let k = d.ncols();
    let (country_ids, countries) = index_by(d.keys.iter().map(|k| k.country.clone()));
    let (year_ids, years) = index_by(d.keys.iter().map(|k| k.year));
    // relabel years so level 0 is the earliest
    let mut order: Vec<usize> = (0..years.len()).collect();
    order.sort_by_key(|&i| years[i]);
    let mut rank = vec![0; years.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let year_ids: Vec<usize> = year_ids.iter().map(|&i| rank[i]).collect();
    let years: Vec<i32> = order.iter().map(|&i| years[i]).collect();

    let g = countries.len();
    let t = years.len();
    if options.country_effects {
        if g < 2 {
            return Err(Error::SingleGroup);
        }
        let mut counts = vec![0usize; g];
        for &c in &country_ids {
            counts[c] += 1;
        }
        if let Some((c, &rows)) = counts.iter().enumerate().find(|(_, &r)| r < 2) {
            return Err(Error::GroupTooSmall {
                group: countries[c].clone(),
                rows,
            });
        }
    } else if t < 2 {
        return Err(Error::SingleGroup);
    }

    let absorbed = match (options.country_effects, options.year_effects) {
        (true, true) => g + t - 1,
        (true, false) => g,
        (false, true) => t,
        (false, false) => unreachable!(),
    };
    if n <= k + absorbed {
        return Err(Error::InsufficientRows {
            n,
            params: k + absorbed,
        });
    }
    let df = n - k - absorbed;

    // within transformation of [y | X]
    let mut yx = d.x.clone().insert_column(0, 0.0);
    yx.set_column(0, &d.y);
    match (options.country_effects, options.year_effects) {
        (true, false) => demean_by(&mut yx, &country_ids, g),
        (false, true) => demean_by(&mut yx, &year_ids, t),
        (true, true) => {
            demean_by(&mut yx, &country_ids, g);
            let mut yd = dummies(&year_ids, t, 1);
            demean_by(&mut yd, &country_ids, g);
            let names: Vec<String> = years[1..].iter().map(|y| format!("year_{y}")).collect();
            for mut col in yx.column_iter_mut() {
                let target = col.clone_owned();
                let ls = LeastSquares::fit(&yd, &target, &names)?;
                col -= &ls.fitted;
            }
        }
        (false, false) => unreachable!(),
    }
    let y_w = yx.column(0).into_owned();
    let x_w = yx.columns(1, k).into_owned();

    for (j, name) in d.names.iter().enumerate() {
        let raw = d.x.column(j);
        let mean = raw.mean();
        let spread = raw.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
        let scale = spread.max(mean.abs()).max(f64::MIN_POSITIVE);
        if x_w.column(j).amax() <= 1e-10 * scale {
            return Err(Error::ConstantWithinGroups(name.clone()));
        }
    }

    let ls = LeastSquares::fit(&x_w, &y_w, &d.names)?;
    let resid_w: DVector<f64> = &y_w - &ls.fitted;
    let rss = resid_w.norm_squared();
    let sigma2 = rss / df as f64;
    let se: Vec<f64> = ls
        .xtx_inv_diag()
        .iter()
        .map(|v| (sigma2 * v).sqrt())
        .collect();
    let coefficients = CoefficientTable::classical(&d.names, ls.beta.as_slice(), &se, df, n)?;
    let tss_w = y_w.norm_squared();
    let within_r_squared = if tss_w > 0.0 { 1.0 - rss / tss_w } else { 1.0 };

    // effects from the slope-adjusted response
    let partial: DVector<f64> = &d.y - &d.x * &ls.beta;
    let (group_intercepts, year_intercepts) = recover_effects(
        &partial,
        options,
        (&country_ids, &countries),
        (&year_ids, &years),
    )?;

    Ok(FeFit {
        coefficients,
        group_intercepts,
        year_intercepts,
        within_r_squared,
        sigma2,
        residuals: resid_w.as_slice().to_vec(),
        groups: g,
        periods: t,
    })
}

type Effects = (BTreeMap<String, f64>, Option<BTreeMap<i32, f64>>);

fn recover_effects(
    partial: &DVector<f64>,
    options: FeOptions,
    (country_ids, countries): (&[usize], &[String]),
    (year_ids, years): (&[usize], &[i32]),
) -> Result<Effects> {
    let level_means = |ids: &[usize], levels: usize| {
        let mut sums = vec![0.0; levels];
        let mut counts = vec![0usize; levels];
        for (i, &l) in ids.iter().enumerate() {
            sums[l] += partial[i];
            counts[l] += 1;
        }
        sums.iter()
            .zip(&counts)
            .map(|(s, &c)| s / c as f64)
            .collect::<Vec<_>>()
    };
    match (options.country_effects, options.year_effects) {
        (true, false) => {
            let alpha = level_means(country_ids, countries.len());
            Ok((countries.iter().cloned().zip(alpha).collect(), None))
        }
        (false, true) => {
            let gamma = level_means(year_ids, years.len());
            Ok((
                BTreeMap::new(),
                Some(years.iter().copied().zip(gamma).collect()),
            ))
        }
        _ => {
            let g = countries.len();
            let t = years.len();
            let mut x = dummies(country_ids, g, 0);
            let yd = dummies(year_ids, t, 1);
            let offset = x.ncols();
            x = x.resize_horizontally(offset + yd.ncols(), 0.0);
            x.columns_mut(offset, yd.ncols()).copy_from(&yd);
            let mut names: Vec<String> = countries.to_vec();
            names.extend(years[1..].iter().map(|y| format!("year_{y}")));
            let ls = LeastSquares::fit(&x, partial, &names)?;
            let alpha = countries
                .iter()
                .cloned()
                .zip(ls.beta.iter().take(g).copied())
                .collect();
            let mut gamma = BTreeMap::new();
            gamma.insert(years[0], 0.0);
            for (y, v) in years[1..].iter().zip(ls.beta.iter().skip(g)) {
                gamma.insert(*y, *v);
            }
            Ok((alpha, Some(gamma)))
        }
    }
}

impl FeFit {
    /// Fitted value for one observation, including its effects.
    pub fn predict(&self, key: &PanelKey, x: &[f64]) -> Option<f64> {
        let mut v: f64 = self
            .coefficients
            .rows
            .iter()
            .zip(x)
            .map(|(r, xi)| r.estimate * xi)
            .sum();
        if !self.group_intercepts.is_empty() {
            v += self.group_intercepts.get(&key.country)?;
        }
        if let Some(years) = &self.year_intercepts {
            v += years.get(&key.year)?;
        }
        Some(v)
    }
}
