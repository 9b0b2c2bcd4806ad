use std::path::PathBuf;

use thiserror::Error;

use crate::panel::PanelKey;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad category of a failure, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorClass {
    Usage,
    Data,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate country-year key ({}, {})", .0.country, .0.year)]
    DuplicateKey(PanelKey),

    #[error("column `{0}` not found in CSV header")]
    MissingColumn(String),

    #[error("parse error at row {row}, column `{column}`: {message}")]
    ParseError {
        row: usize,
        column: String,
        message: String,
    },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable `{0}` is already registered")]
    NameCollision(String),

    #[error("variable `{0}` appears more than once in the selection")]
    DuplicateVariable(String),

    #[error("no rows left after listwise deletion")]
    EmptyDesign,

    #[error("variable `{0}` has zero variance")]
    ZeroVariance(String),

    #[error("need at least {required} observations, got {actual}")]
    TooShort { required: usize, actual: usize },

    #[error("design is rank deficient: {} are linearly dependent", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("insufficient rows: n = {n} but {params} parameters are estimated")]
    InsufficientRows { n: usize, params: usize },

    #[error("regressor `{0}` is constant within every group")]
    ConstantWithinGroups(String),

    #[error("fixed effects need at least two groups")]
    SingleGroup,

    #[error("group `{group}` has {rows} row(s); at least 2 are required")]
    GroupTooSmall { group: String, rows: usize },

    #[error("component {component} out of range for a model with {available} components")]
    ComponentOutOfRange { component: usize, available: usize },

    #[error("a training fold has {rows} row(s); at least 2 are required")]
    FoldTooSmall { rows: usize },

    #[error("year {0} not present in the series")]
    UnknownYear(i32),

    #[error("zero denominator in `{column}` at ({}, {})", .key.country, .key.year)]
    ZeroDenominator { column: String, key: PanelKey },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("I/O error at {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable tag, stable across releases.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DuplicateKey(_) => "duplicate_key",
            Error::MissingColumn(_) => "missing_column",
            Error::ParseError { .. } => "parse_error",
            Error::UnknownVariable(_) => "unknown_variable",
            Error::NameCollision(_) => "name_collision",
            Error::DuplicateVariable(_) => "duplicate_variable",
            Error::EmptyDesign => "empty_design",
            Error::ZeroVariance(_) => "zero_variance",
            Error::TooShort { .. } => "too_short",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::InsufficientRows { .. } => "insufficient_rows",
            Error::ConstantWithinGroups(_) => "constant_within_groups",
            Error::SingleGroup => "single_group",
            Error::GroupTooSmall { .. } => "group_too_small",
            Error::ComponentOutOfRange { .. } => "component_out_of_range",
            Error::FoldTooSmall { .. } => "fold_too_small",
            Error::UnknownYear(_) => "unknown_year",
            Error::ZeroDenominator { .. } => "zero_denominator",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Config { .. } => "config_error",
            Error::Io { .. } => "io_error",
            Error::Csv(_) => "csv_error",
            Error::Json(_) => "json_error",
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config { .. } | Error::InvalidArgument(_) => ErrorClass::Usage,
            Error::ZeroVariance(_)
            | Error::RankDeficient { .. }
            | Error::InsufficientRows { .. }
            | Error::ConstantWithinGroups(_)
            | Error::SingleGroup
            | Error::GroupTooSmall { .. }
            | Error::ComponentOutOfRange { .. }
            | Error::FoldTooSmall { .. }
            | Error::TooShort { .. }
            | Error::ZeroDenominator { .. } => ErrorClass::Numeric,
            _ => ErrorClass::Data,
        }
    }
}
