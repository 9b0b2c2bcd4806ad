//! Correlation-basis principal component analysis.
//!
//! Loadings are unit-norm eigenvectors of the sample correlation matrix,
//! ordered by descending eigenvalue. Each loading column is oriented so its
//! largest-magnitude entry is positive. Tied eigenvalues are ordered by the
//! position of their eigenvector's dominant entry, so an identity
//! correlation matrix maps component `j` to input column `j`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{standardize_named, Block, PanelKey, Standardization};

const TIE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub names: Vec<String>,
    /// `loadings[variable][component]`.
    pub loadings: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub var_explained: Vec<f64>,
    pub standardization: Vec<Standardization>,
    pub n: usize,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn loading_matrix(&self) -> DMatrix<f64> {
        let p = self.names.len();
        DMatrix::from_fn(p, p, |i, j| self.loadings[i][j])
    }

    pub fn loading_column(&self, component: usize) -> Result<Vec<f64>> {
        self.check_component(component)?;
        Ok(self.loadings.iter().map(|row| row[component - 1]).collect())
    }

    fn check_component(&self, component: usize) -> Result<()> {
        if component == 0 || component > self.n_components() {
            return Err(Error::ComponentOutOfRange {
                component,
                available: self.n_components(),
            });
        }
        Ok(())
    }

    /// Z-scores the model's variables in `block`, reordering columns by name.
    fn standardized_rows(&self, block: &Block) -> Result<DMatrix<f64>> {
        let cols = self
            .names
            .iter()
            .map(|n| block.column_index(n))
            .collect::<Result<Vec<_>>>()?;
        Ok(DMatrix::from_fn(block.nrows(), self.names.len(), |i, j| {
            self.standardization[j].apply(block.values[(i, cols[j])])
        }))
    }
}

/// Component scores keyed by observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSeries {
    pub keys: Vec<PanelKey>,
    /// 1-based.
    pub component: usize,
    pub values: Vec<f64>,
}

impl ScoreSeries {
    pub fn to_map(&self) -> std::collections::HashMap<PanelKey, f64> {
        self.keys
            .iter()
            .cloned()
            .zip(self.values.iter().copied())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeRow {
    pub component: usize,
    pub eigenvalue: f64,
    pub share: f64,
    pub cumulative: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiplotKind {
    /// Loadings on components 1-2 scaled by the square root of the eigenvalue.
    VariableArrows,
    /// Scores on components 1-2, one point per row.
    RowPoints,
    /// Row scores averaged per country.
    CountryPoints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiplotRecord {
    /// `arrow` or `point`.
    pub kind: String,
    pub label: String,
    pub dim1: f64,
    pub dim2: f64,
}

pub fn fit_pca(block: &Block) -> Result<PcaModel> {
    let n = block.nrows();
    let p = block.ncols();
    if p < 2 {
        return Err(Error::InvalidArgument(format!(
            "PCA needs at least 2 variables, got {p}"
        )));
    }
    if n <= p {
        return Err(Error::InsufficientRows { n, params: p });
    }

    let mut z = DMatrix::zeros(n, p);
    let mut standardization = Vec::with_capacity(p);
    for (j, name) in block.names.iter().enumerate() {
        let col: Vec<f64> = block.values.column(j).iter().copied().collect();
        let (zc, params) = standardize_named(name, &col, false)?;
        z.set_column(j, &DVector::from_vec(zc));
        standardization.push(params);
    }
    let mut corr = z.transpose() * &z / (n as f64 - 1.0);
    corr = (&corr + corr.transpose()) * 0.5;
    for i in 0..p {
        corr[(i, i)] = 1.0;
    }

    let eig = SymmetricEigen::new(corr);
    let (eigenvalues, vectors) = order_and_orient(&eig.eigenvalues, &eig.eigenvectors);
    let total: f64 = eigenvalues.iter().sum();
    let var_explained = eigenvalues.iter().map(|v| v / total).collect();

    Ok(PcaModel {
        names: block.names.clone(),
        loadings: vectors
            .row_iter()
            .map(|row| row.iter().copied().collect())
            .collect(),
        eigenvalues,
        var_explained,
        standardization,
        n,
    })
}

fn dominant_index(v: &[f64]) -> usize {
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    v.iter().position(|x| x.abs() >= max - 1e-12).unwrap_or(0)
}

/// Sorts eigenpairs descending, breaks ties by dominant-entry position, flips
/// each vector so its dominant entry is positive and clamps tiny negative
/// eigenvalues to zero.
fn order_and_orient(values: &DVector<f64>, vectors: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let p = values.len();
    let columns: Vec<Vec<f64>> = (0..p)
        .map(|j| vectors.column(j).iter().copied().collect())
        .collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));

    let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mut start = 0;
    while start < p {
        let mut end = start + 1;
        while end < p && (values[order[start]] - values[order[end]]).abs() <= TIE_TOL * scale {
            end += 1;
        }
        order[start..end].sort_by_key(|&j| dominant_index(&columns[j]));
        start = end;
    }

    let mut out = DMatrix::zeros(p, p);
    let mut eigenvalues = Vec::with_capacity(p);
    for (c, &j) in order.iter().enumerate() {
        let mut v = columns[j].clone();
        if v[dominant_index(&v)] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        out.set_column(c, &DVector::from_vec(v));
        eigenvalues.push(values[j].max(0.0));
    }
    (eigenvalues, out)
}

/// Scores on one component (1-based) for every row of `block`.
pub fn scores(model: &PcaModel, block: &Block, component: usize) -> Result<ScoreSeries> {
    let loading = DVector::from_vec(model.loading_column(component)?);
    let z = model.standardized_rows(block)?;
    let values = z * loading;
    Ok(ScoreSeries {
        keys: block.keys.clone(),
        component,
        values: values.as_slice().to_vec(),
    })
}

pub fn scree_data(model: &PcaModel) -> Vec<ScreeRow> {
    let mut cumulative = 0.0;
    model
        .eigenvalues
        .iter()
        .zip(&model.var_explained)
        .enumerate()
        .map(|(j, (&eigenvalue, &share))| {
            cumulative += share;
            ScreeRow {
                component: j + 1,
                eigenvalue,
                share,
                cumulative,
            }
        })
        .collect()
}

pub fn biplot_data(model: &PcaModel, block: &Block, kind: BiplotKind) -> Result<Vec<BiplotRecord>> {
    if model.n_components() < 2 {
        return Err(Error::ComponentOutOfRange {
            component: 2,
            available: model.n_components(),
        });
    }
    match kind {
        BiplotKind::VariableArrows => {
            let s1 = model.eigenvalues[0].sqrt();
            let s2 = model.eigenvalues[1].sqrt();
            Ok(model
                .names
                .iter()
                .zip(&model.loadings)
                .map(|(name, row)| BiplotRecord {
                    kind: "arrow".into(),
                    label: name.clone(),
                    dim1: row[0] * s1,
                    dim2: row[1] * s2,
                })
                .collect())
        }
        BiplotKind::RowPoints => {
            let pc1 = scores(model, block, 1)?;
            let pc2 = scores(model, block, 2)?;
            Ok(pc1
                .keys
                .iter()
                .zip(pc1.values.iter().zip(&pc2.values))
                .map(|(key, (&a, &b))| BiplotRecord {
                    kind: "point".into(),
                    label: key.to_string(),
                    dim1: a,
                    dim2: b,
                })
                .collect())
        }
        BiplotKind::CountryPoints => {
            let pc1 = scores(model, block, 1)?;
            let pc2 = scores(model, block, 2)?;
            let mut order = Vec::new();
            let mut sums: BTreeMap<&str, (f64, f64, usize)> = BTreeMap::new();
            for (key, (&a, &b)) in pc1.keys.iter().zip(pc1.values.iter().zip(&pc2.values)) {
                let entry = sums.entry(key.country.as_str()).or_insert_with(|| {
                    order.push(key.country.as_str());
                    (0.0, 0.0, 0)
                });
                entry.0 += a;
                entry.1 += b;
                entry.2 += 1;
            }
            Ok(order
                .into_iter()
                .map(|c| {
                    let (a, b, m) = sums[c];
                    BiplotRecord {
                        kind: "point".into(),
                        label: c.to_string(),
                        dim1: a / m as f64,
                        dim2: b / m as f64,
                    }
                })
                .collect())
        }
    }
}
