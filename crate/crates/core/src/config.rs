//! Pipeline configuration read from a flat TOML file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{DEFAULT_CORR_CUTOFF, DEFAULT_VIF_THRESHOLD};
use crate::error::{Error, Result};
use crate::estimators::DEFAULT_ALPHA;
use crate::indices::{AdpiMapping, AdpiScope, AdpiVariant, DEFAULT_OPENNESS_VARIABLES};
use crate::panel::{IdColumns, Role, VariableSpec};
use crate::report::Format;

fn default_country() -> String {
    "country".into()
}
fn default_year() -> String {
    "year".into()
}
fn default_openness() -> Vec<String> {
    DEFAULT_OPENNESS_VARIABLES
        .iter()
        .map(|s| s.to_string())
        .collect()
}
fn default_corr_cutoff() -> f64 {
    DEFAULT_CORR_CUTOFF
}
fn default_vif_threshold() -> f64 {
    DEFAULT_VIF_THRESHOLD
}
fn default_grid_min() -> f64 {
    1e-3
}
fn default_grid_max() -> f64 {
    1e6
}
fn default_grid_count() -> usize {
    100
}
fn default_folds() -> usize {
    10
}
fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}
fn default_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv, Format::Text]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    #[serde(default = "default_country")]
    pub country_column: String,
    #[serde(default = "default_year")]
    pub year_column: String,
    pub response: String,
    pub regressors: Vec<String>,
    #[serde(default = "default_openness")]
    pub openness: Vec<String>,
    #[serde(default = "default_corr_cutoff")]
    pub corr_cutoff: f64,
    #[serde(default = "default_vif_threshold")]
    pub vif_threshold: f64,
    #[serde(default = "default_grid_min")]
    pub lambda_grid_min: f64,
    #[serde(default = "default_grid_max")]
    pub lambda_grid_max: f64,
    #[serde(default = "default_grid_count")]
    pub lambda_grid_count: usize,
    /// Fixed penalty; when set, cross-validation is skipped.
    pub lambda: Option<f64>,
    #[serde(default = "default_folds")]
    pub cv_folds: usize,
    pub seed: Option<u64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub year_effects: bool,
    pub adpi_oda: Option<String>,
    pub adpi_gdp: Option<String>,
    pub adpi_revenue: Option<String>,
    pub adpi_tax: Option<String>,
    #[serde(default)]
    pub adpi_variant: AdpiVariant,
    #[serde(default)]
    pub adpi_scope: AdpiScope,
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

impl PipelineConfig {
    /// A configuration with every optional field at its default.
    pub fn new(response: impl Into<String>, regressors: Vec<String>) -> Self {
        PipelineConfig {
            input: None,
            country_column: default_country(),
            year_column: default_year(),
            response: response.into(),
            regressors,
            openness: default_openness(),
            corr_cutoff: DEFAULT_CORR_CUTOFF,
            vif_threshold: DEFAULT_VIF_THRESHOLD,
            lambda_grid_min: default_grid_min(),
            lambda_grid_max: default_grid_max(),
            lambda_grid_count: default_grid_count(),
            lambda: None,
            cv_folds: default_folds(),
            seed: None,
            alpha: DEFAULT_ALPHA,
            year_effects: false,
            adpi_oda: None,
            adpi_gdp: None,
            adpi_revenue: None,
            adpi_tax: None,
            adpi_variant: AdpiVariant::default(),
            adpi_scope: AdpiScope::default(),
            output_dir: None,
            formats: default_formats(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let field = e
                .message()
                .split('`')
                .nth(1)
                .filter(|_| e.message().contains("field"))
                .unwrap_or("<root>")
                .to_string();
            Error::config(field, e.message().trim().to_string())
        })
    }

    /// Reads a config file. Relative `input` and `output_dir` paths are taken
    /// relative to the file's directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml_str(&text)?;
        if let Some(dir) = path.parent() {
            for slot in [&mut config.input, &mut config.output_dir] {
                if let Some(p) = slot.as_mut().filter(|p| p.is_relative()) {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(config)
    }

    pub fn id_columns(&self) -> IdColumns {
        IdColumns {
            country: self.country_column.clone(),
            year: self.year_column.clone(),
        }
    }

    /// Whether ridge cross-validation will run.
    pub fn runs_cv(&self) -> bool {
        self.lambda.is_none()
    }

    pub fn adpi_mapping(&self) -> Result<Option<AdpiMapping>> {
        match (
            &self.adpi_oda,
            &self.adpi_gdp,
            &self.adpi_revenue,
            &self.adpi_tax,
        ) {
            (None, None, None, None) => Ok(None),
            (Some(oda), Some(gdp), Some(revenue), Some(tax)) => Ok(Some(AdpiMapping {
                oda: oda.clone(),
                gdp: gdp.clone(),
                revenue: revenue.clone(),
                tax: tax.clone(),
            })),
            _ => {
                let missing = [
                    ("adpi_oda", &self.adpi_oda),
                    ("adpi_gdp", &self.adpi_gdp),
                    ("adpi_revenue", &self.adpi_revenue),
                    ("adpi_tax", &self.adpi_tax),
                ]
                .into_iter()
                .find(|(_, v)| v.is_none())
                .map(|(k, _)| k)
                .unwrap_or("adpi_oda");
                Err(Error::config(
                    missing,
                    "the ADPI mapping needs all four of adpi_oda, adpi_gdp, adpi_revenue, adpi_tax",
                ))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.response.trim().is_empty() {
            return Err(Error::config("response", "must not be empty"));
        }
        if self.regressors.is_empty() {
            return Err(Error::config(
                "regressors",
                "at least one regressor is required",
            ));
        }
        if self.regressors.contains(&self.response) {
            return Err(Error::config(
                "regressors",
                format!("response `{}` is also listed as a regressor", self.response),
            ));
        }
        for (field, list) in [
            ("regressors", &self.regressors),
            ("openness", &self.openness),
        ] {
            let mut seen = std::collections::HashSet::new();
            if let Some(dup) = list.iter().find(|n| !seen.insert(n.as_str())) {
                return Err(Error::config(field, format!("`{dup}` listed twice")));
            }
        }
        if self.openness.len() < 2 {
            return Err(Error::config(
                "openness",
                "the openness block needs at least 2 variables",
            ));
        }
        if self.openness.contains(&self.response) {
            return Err(Error::config(
                "openness",
                "the response cannot be in the openness block",
            ));
        }
        if !(self.corr_cutoff > 0.0 && self.corr_cutoff <= 1.0) {
            return Err(Error::config("corr_cutoff", "must lie in (0, 1]"));
        }
        if self.vif_threshold <= 0.0 || !self.vif_threshold.is_finite() {
            return Err(Error::config("vif_threshold", "must be a positive number"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config("alpha", "must lie in (0, 1)"));
        }
        if let Some(l) = self.lambda {
            if l < 0.0 || !l.is_finite() {
                return Err(Error::config("lambda", "must be a finite number >= 0"));
            }
        } else {
            if self.lambda_grid_min <= 0.0 || !self.lambda_grid_min.is_finite() {
                return Err(Error::config("lambda_grid_min", "must be positive"));
            }
            if self.lambda_grid_max < self.lambda_grid_min || !self.lambda_grid_max.is_finite() {
                return Err(Error::config(
                    "lambda_grid_max",
                    "must be >= lambda_grid_min",
                ));
            }
            if self.lambda_grid_count == 0 {
                return Err(Error::config("lambda_grid_count", "must be at least 1"));
            }
            if self.cv_folds < 2 {
                return Err(Error::config("cv_folds", "must be at least 2"));
            }
        }
        if self.formats.is_empty() {
            return Err(Error::config(
                "formats",
                "at least one output format is required",
            ));
        }
        self.adpi_mapping()?;
        Ok(())
    }

    /// The seed, which cross-validation cannot run without.
    pub fn cv_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| {
            Error::config(
                "seed",
                "a seed is required when the ridge penalty is chosen by cross-validation",
            )
        })
    }

    /// Validation for a full run: the general checks plus a seed whenever
    /// cross-validation will run.
    pub fn validate_pipeline(&self) -> Result<()> {
        self.validate()?;
        if self.runs_cv() {
            self.cv_seed()?;
        }
        Ok(())
    }

    /// Variables the input file must provide, each listed once.
    pub fn schema(&self) -> Vec<VariableSpec> {
        let mut specs = vec![VariableSpec::new(&self.response, Role::Response)];
        let mut push = |name: &String, role: Role| {
            if !specs.iter().any(|s| &s.name == name) {
                specs.push(VariableSpec::new(name, role));
            }
        };
        for r in self.regressors.iter().chain(&self.openness) {
            push(r, Role::Regressor);
        }
        for c in [
            &self.adpi_oda,
            &self.adpi_gdp,
            &self.adpi_revenue,
            &self.adpi_tax,
        ]
        .into_iter()
        .flatten()
        {
            push(c, Role::RawComponent);
        }
        specs
    }
}
