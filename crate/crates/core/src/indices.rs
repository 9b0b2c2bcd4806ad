//! Composite indices: the External Openness index (first principal component
//! of the trade/investment block) and the Aid Dependence Pressure Index.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::decomposition::{fit_pca, scores, PcaModel, ScoreSeries};
use crate::error::{Error, Result};
use crate::panel::{mean_sd, standardize_named, Block, Panel, PanelKey};

pub const OPENNESS_PC1: &str = "External_Openness_PC1";

pub const DEFAULT_OPENNESS_VARIABLES: [&str; 4] = ["CurrentAccount", "Exports", "FDI", "Imports"];

/// Below this first-component share the single-index reading is doubtful.
pub const PC1_WARNING_SHARE: f64 = 0.4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalOpenness {
    pub scores: ScoreSeries,
    pub model: PcaModel,
    pub warning: Option<String>,
}

/// PC1 scores of the openness block. Rows missing any block variable are
/// left out of both fitting and scoring.
pub fn build_external_openness(panel: &Panel, variables: &[String]) -> Result<ExternalOpenness> {
    let block = panel.extract_block(variables)?;
    let model = fit_pca(&block)?;
    let scores = scores(&model, &block, 1)?;
    let share = model.var_explained[0];
    let warning = (share < PC1_WARNING_SHARE).then(|| {
        format!(
            "first component explains only {:.1}% of the block's variance; a single openness index is weakly supported",
            share * 100.0
        )
    });
    Ok(ExternalOpenness {
        scores,
        model,
        warning,
    })
}

/// Panel columns feeding the dependence index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdpiMapping {
    pub oda: String,
    pub gdp: String,
    pub revenue: String,
    pub tax: String,
}

/// The three ratios behind the index, one entry per observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdpiComponents {
    pub keys: Vec<PanelKey>,
    pub oda_gdp: Vec<f64>,
    pub oda_revenue: Vec<f64>,
    pub tax_gdp: Vec<f64>,
    /// How each ratio was formed, e.g. `oda_gdp = ODA / GDP`.
    pub formulas: Vec<String>,
}

impl AdpiComponents {
    pub fn new(
        keys: Vec<PanelKey>,
        oda_gdp: Vec<f64>,
        oda_revenue: Vec<f64>,
        tax_gdp: Vec<f64>,
    ) -> Result<Self> {
        let n = keys.len();
        if oda_gdp.len() != n || oda_revenue.len() != n || tax_gdp.len() != n {
            return Err(Error::InvalidArgument(
                "component series lengths differ from the key count".into(),
            ));
        }
        let series = [
            ("oda_gdp", &oda_gdp),
            ("oda_revenue", &oda_revenue),
            ("tax_gdp", &tax_gdp),
        ];
        for (name, values) in series {
            if let Some(i) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} is not finite at {}",
                    keys[i]
                )));
            }
        }
        Ok(AdpiComponents {
            keys,
            oda_gdp,
            oda_revenue,
            tax_gdp,
            formulas: Vec::new(),
        })
    }

    /// Forms `ODA/GDP`, `ODA/revenue` and `tax/GDP` from raw panel columns,
    /// dropping rows with any of the four inputs missing.
    pub fn from_panel(panel: &Panel, mapping: &AdpiMapping) -> Result<Self> {
        let names = [&mapping.oda, &mapping.gdp, &mapping.revenue, &mapping.tax];
        let mut unique: Vec<String> = Vec::new();
        for n in names {
            if !unique.contains(n) {
                unique.push(n.clone());
            }
        }
        let block = panel.extract_block(&unique)?;
        let col = |name: &str| -> Result<Vec<f64>> {
            let j = block.column_index(name)?;
            Ok(block.values.column(j).iter().copied().collect())
        };
        let oda = col(&mapping.oda)?;
        let gdp = col(&mapping.gdp)?;
        let revenue = col(&mapping.revenue)?;
        let tax = col(&mapping.tax)?;

        let ratio = |num: &[f64], den: &[f64], den_name: &str| -> Result<Vec<f64>> {
            num.iter()
                .zip(den)
                .enumerate()
                .map(|(i, (a, b))| {
                    if *b == 0.0 {
                        Err(Error::ZeroDenominator {
                            column: den_name.to_string(),
                            key: block.keys[i].clone(),
                        })
                    } else {
                        Ok(a / b)
                    }
                })
                .collect()
        };
        let oda_gdp = ratio(&oda, &gdp, &mapping.gdp)?;
        let oda_revenue = ratio(&oda, &revenue, &mapping.revenue)?;
        let tax_gdp = ratio(&tax, &gdp, &mapping.gdp)?;
        let mut components =
            AdpiComponents::new(block.keys.clone(), oda_gdp, oda_revenue, tax_gdp)?;
        components.formulas = vec![
            format!("oda_gdp = {} / {}", mapping.oda, mapping.gdp),
            format!("oda_revenue = {} / {}", mapping.oda, mapping.revenue),
            format!("tax_gdp = {} / {}", mapping.tax, mapping.gdp),
        ];
        Ok(components)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdpiVariant {
    #[default]
    MeanOfZ,
    PcaWeighted,
}

impl AdpiVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            AdpiVariant::MeanOfZ => "mean_of_z",
            AdpiVariant::PcaWeighted => "pca_weighted",
        }
    }
}

/// Population over which component z-scores are computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdpiScope {
    #[default]
    Pooled,
    PerYear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdpiSeries {
    pub keys: Vec<PanelKey>,
    pub values: Vec<f64>,
    pub variant: AdpiVariant,
    pub scope: AdpiScope,
    /// Weights on (oda_gdp, oda_revenue, sign-reversed tax_gdp).
    pub weights: [f64; 3],
    pub formulas: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub rank: usize,
    pub country: String,
    pub value: f64,
}

/// Builds the index with z-scores pooled over the whole panel.
pub fn build_adpi(components: &AdpiComponents, variant: AdpiVariant) -> Result<AdpiSeries> {
    build_adpi_scoped(components, variant, AdpiScope::Pooled)
}

/// Z-scores the three ratios (tax/GDP sign-reversed so every component rises
/// with dependence) and combines them, either as the equal-weight mean or as
/// the unit-variance first principal component of the oriented z-scores with
/// the ODA/GDP weight positive.
pub fn build_adpi_scoped(
    components: &AdpiComponents,
    variant: AdpiVariant,
    scope: AdpiScope,
) -> Result<AdpiSeries> {
    let n = components.len();
    if n < 3 {
        return Err(Error::TooShort {
            required: 3,
            actual: n,
        });
    }
    let series = [
        ("oda_gdp", &components.oda_gdp, false),
        ("oda_revenue", &components.oda_revenue, false),
        ("tax_gdp", &components.tax_gdp, true),
    ];
    let mut z = DMatrix::zeros(n, 3);
    for (j, (name, values, flip)) in series.iter().enumerate() {
        let zj = match scope {
            AdpiScope::Pooled => standardize_named(name, values, *flip)?.0,
            AdpiScope::PerYear => standardize_per_year(name, &components.keys, values, *flip)?,
        };
        for (i, v) in zj.into_iter().enumerate() {
            z[(i, j)] = v;
        }
    }

    let (values, weights) = match variant {
        AdpiVariant::MeanOfZ => {
            let values = z.row_iter().map(|r| (r[0] + r[1] + r[2]) / 3.0).collect();
            (values, [1.0 / 3.0; 3])
        }
        AdpiVariant::PcaWeighted => {
            let block = Block::new(
                series.iter().map(|s| s.0.to_string()).collect(),
                components.keys.clone(),
                z,
            )?;
            let model = fit_pca(&block)?;
            let mut w = model.loading_column(1)?;
            let sign = if w[0] < 0.0 { -1.0 } else { 1.0 };
            w.iter_mut().for_each(|x| *x *= sign);
            let raw: Vec<f64> = scores(&model, &block, 1)?
                .values
                .into_iter()
                .map(|s| s * sign)
                .collect();
            let (_, sd) = mean_sd(&raw);
            if sd.is_nan() || sd <= 0.0 {
                return Err(Error::ZeroVariance("adpi_pc1".into()));
            }
            (raw.iter().map(|s| s / sd).collect(), [w[0], w[1], w[2]])
        }
    };

    Ok(AdpiSeries {
        keys: components.keys.clone(),
        values,
        variant,
        scope,
        weights,
        formulas: components.formulas.clone(),
    })
}

fn standardize_per_year(
    name: &str,
    keys: &[PanelKey],
    values: &[f64],
    flip: bool,
) -> Result<Vec<f64>> {
    let mut by_year: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (i, k) in keys.iter().enumerate() {
        by_year.entry(k.year).or_default().push(i);
    }
    let mut out = vec![0.0; values.len()];
    for (year, idx) in by_year {
        let sub: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        let (z, _) = standardize_named(&format!("{name}[{year}]"), &sub, flip)?;
        for (i, v) in idx.into_iter().zip(z) {
            out[i] = v;
        }
    }
    Ok(out)
}

/// Countries ranked by index value in `year`, most dependent first. Ties share
/// a rank and the next rank is skipped.
pub fn rank_adpi(series: &AdpiSeries, year: i32) -> Result<Vec<RankEntry>> {
    let mut entries: Vec<(&str, f64)> = series
        .keys
        .iter()
        .zip(&series.values)
        .filter(|(k, _)| k.year == year)
        .map(|(k, &v)| (k.country.as_str(), v))
        .collect();
    if entries.is_empty() {
        return Err(Error::UnknownYear(year));
    }
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let mut out: Vec<RankEntry> = Vec::with_capacity(entries.len());
    for (pos, (country, value)) in entries.into_iter().enumerate() {
        let rank = match out.last() {
            Some(prev) if prev.value == value => prev.rank,
            _ => pos + 1,
        };
        out.push(RankEntry {
            rank,
            country: country.to_string(),
            value,
        });
    }
    Ok(out)
}
