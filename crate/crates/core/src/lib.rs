//! Panel econometrics for country-year data: pooled OLS, fixed effects,
//! ridge regression with cross-validated penalty, multicollinearity
//! diagnostics, PCA-based indices and an aid-dependence composite index.

pub mod config;
pub mod decomposition;
pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod fixture;
mod float_serde;
pub mod indices;
mod linalg;
pub mod panel;
pub mod pipeline;
pub mod report;

pub use config::PipelineConfig;
pub use error::{Error, ErrorClass, Result};
pub use panel::{
    standardize, Block, DesignMatrix, IdColumns, MissingPolicy, Panel, PanelKey, Role,
    Standardization, VariableSpec,
};
pub use pipeline::{run_command, run_pipeline, run_pipeline_on_panel, Command};
pub use report::{render_report, write_outputs, Format, Report, StageKind, StageStatus};
