//! Stage-ordered report and its JSON, CSV and text renderings.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::decomposition::{BiplotRecord, PcaModel, ScoreSeries, ScreeRow};
use crate::diagnostics::{CorrelatedPair, CorrelationMatrix, VifTable};
use crate::error::{Error, ErrorClass, Result};
use crate::estimators::{CoefficientTable, CvCurve, FeFit, OlsFit, RidgeFit};
use crate::indices::{AdpiSeries, RankEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    PooledOlsFull,
    Diagnostics,
    Pca,
    PooledOlsPc1,
    FixedEffects,
    RidgeCv,
    RidgeFinal,
    Adpi,
}

impl StageKind {
    pub const ALL: [StageKind; 8] = [
        StageKind::PooledOlsFull,
        StageKind::Diagnostics,
        StageKind::Pca,
        StageKind::PooledOlsPc1,
        StageKind::FixedEffects,
        StageKind::RidgeCv,
        StageKind::RidgeFinal,
        StageKind::Adpi,
    ];

    pub fn number(self) -> usize {
        self as usize + 1
    }

    pub fn file_stem(self) -> &'static str {
        match self {
            StageKind::PooledOlsFull => "01_ols_full",
            StageKind::Diagnostics => "02_diagnostics",
            StageKind::Pca => "03_pca",
            StageKind::PooledOlsPc1 => "04_ols_pc1",
            StageKind::FixedEffects => "05_fe",
            StageKind::RidgeCv => "06_ridge_cv",
            StageKind::RidgeFinal => "07_ridge",
            StageKind::Adpi => "08_adpi",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            StageKind::PooledOlsFull => "Pooled OLS, full regressor set",
            StageKind::Diagnostics => "Multicollinearity diagnostics",
            StageKind::Pca => "PCA of the openness block",
            StageKind::PooledOlsPc1 => "Pooled OLS with External_Openness_PC1",
            StageKind::FixedEffects => "Fixed effects (within)",
            StageKind::RidgeCv => "Ridge cross-validation",
            StageKind::RidgeFinal => "Ridge regression at selected lambda",
            StageKind::Adpi => "Aid Dependence Pressure Index",
        }
    }

    /// Estimation stages halt everything estimated after them when they fail.
    pub fn is_estimation(self) -> bool {
        !matches!(self, StageKind::Diagnostics | StageKind::Adpi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Completed,
    Failed,
    Skipped,
}

impl StageStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            StageStatus::Completed => "completed",
            StageStatus::Failed => "failed",
            StageStatus::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageError {
    pub kind: String,
    pub class: ErrorClass,
    pub message: String,
}

impl From<&Error> for StageError {
    fn from(e: &Error) -> Self {
        StageError {
            kind: e.kind().to_string(),
            class: e.class(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsResult {
    pub correlation: Option<CorrelationMatrix>,
    pub cutoff: f64,
    pub high_pairs: Vec<CorrelatedPair>,
    pub vif: Option<VifTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaResult {
    pub model: PcaModel,
    pub scree: Vec<ScreeRow>,
    pub arrows: Vec<BiplotRecord>,
    pub country_points: Vec<BiplotRecord>,
    pub scores: ScoreSeries,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearRanking {
    pub year: i32,
    pub entries: Vec<RankEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdpiResult {
    pub series: AdpiSeries,
    pub rankings: Vec<YearRanking>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageResult {
    Ols(OlsFit),
    Diagnostics(DiagnosticsResult),
    Pca(Box<PcaResult>),
    FixedEffects(FeFit),
    RidgeCv(CvCurve),
    Ridge(RidgeFit),
    Adpi(AdpiResult),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: StageKind,
    pub status: StageStatus,
    /// Exact variable list the stage consumed.
    pub variables: Vec<String>,
    pub notes: Vec<String>,
    pub result: Option<StageResult>,
    pub error: Option<StageError>,
    /// Wall-clock time; kept out of the serialized report so that repeated
    /// runs produce identical files.
    #[serde(skip)]
    pub duration: Duration,
}

impl StageRecord {
    pub fn skipped(stage: StageKind, variables: Vec<String>, note: impl Into<String>) -> Self {
        StageRecord {
            stage,
            status: StageStatus::Skipped,
            variables,
            notes: vec![note.into()],
            result: None,
            error: None,
            duration: Duration::ZERO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub response: String,
    pub alpha: f64,
    pub stages: Vec<StageRecord>,
}

impl Report {
    pub fn stage(&self, kind: StageKind) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.stage == kind)
    }

    pub fn first_failure(&self) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.status == StageStatus::Failed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" | "txt" => Ok(Format::Text),
            other => Err(Error::config(
                "formats",
                format!("unknown format `{other}`"),
            )),
        }
    }
}

pub fn to_json(report: &Report) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<Report> {
    Ok(serde_json::from_str(text)?)
}

/// Two decimals, comma thousands separators, no locale dependence.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let fixed = format!("{v:.2}");
    let (sign, body) = match fixed.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", fixed.as_str()),
    };
    let (int_part, frac) = body.split_once('.').unwrap_or((body, "00"));
    let digits = int_part.as_bytes();
    let mut grouped = String::with_capacity(int_part.len() + int_part.len() / 3);
    for (i, d) in digits.iter().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            grouped.push(',');
        }
        grouped.push(*d as char);
    }
    format!("{sign}{grouped}.{frac}")
}

/// Lays out rows as a fixed-width table: first column left-aligned, the
/// rest right-aligned.
fn layout(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut s = String::new();
        for (j, cell) in cells.enumerate() {
            let pad = widths[j].saturating_sub(cell.chars().count());
            if j > 0 {
                s.push_str("  ");
            }
            if j == 0 {
                s.push_str(cell);
                s.extend(std::iter::repeat_n(' ', pad));
            } else {
                s.extend(std::iter::repeat_n(' ', pad));
                s.push_str(cell);
            }
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(&mut header.iter().copied());
    for row in rows {
        line(
            &mut row
                .iter()
                .map(String::as_str)
                .chain(std::iter::repeat(""))
                .take(cols),
        );
    }
    out
}

/// Text rendering of a coefficient table; significant rows carry `*`.
pub fn render_coefficient_table(table: &CoefficientTable) -> String {
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.variable.clone(),
                format_number(r.estimate),
                format_number(r.std_error),
                format_number(r.t_statistic),
                format_number(r.p_value),
                format_number(r.ci_lower),
                format_number(r.ci_upper),
                if r.significant {
                    "*".into()
                } else {
                    String::new()
                },
            ]
        })
        .collect();
    let mut out = layout(
        &[
            "Variable",
            "Estimate",
            "Std. Error",
            "t-Statistic",
            "P-Value",
            "CI Lower",
            "CI Upper",
            "Sig",
        ],
        &rows,
    );
    if let Some(alpha) = table.alpha {
        let _ = writeln!(out, "* p <= {alpha}");
    }
    out
}

fn render_ridge_table(fit: &RidgeFit) -> String {
    let mut rows = vec![vec![
        "(Intercept)".to_string(),
        format_number(fit.intercept),
        String::new(),
    ]];
    rows.extend(fit.coefficients.iter().map(|c| {
        vec![
            c.variable.clone(),
            format_number(c.estimate),
            format_number(c.standardized),
        ]
    }));
    layout(&["Variable", "Estimate", "Standardized"], &rows)
}

fn render_stage_body(out: &mut String, result: &StageResult) {
    match result {
        StageResult::Ols(fit) => {
            let t = &fit.coefficients;
            let _ = writeln!(
                out,
                "n = {}, df = {}, R^2 = {:.4}, adj. R^2 = {:.4}",
                t.n, t.df_resid, fit.r_squared, fit.adj_r_squared
            );
            out.push_str(&render_coefficient_table(t));
        }
        StageResult::FixedEffects(fit) => {
            let t = &fit.coefficients;
            let _ = writeln!(
                out,
                "n = {}, groups = {}, periods = {}, df = {}, within R^2 = {:.4}",
                t.n, fit.groups, fit.periods, t.df_resid, fit.within_r_squared
            );
            out.push_str(&render_coefficient_table(t));
            let rows: Vec<Vec<String>> = fit
                .group_intercepts
                .iter()
                .map(|(c, a)| vec![c.clone(), format_number(*a)])
                .collect();
            out.push('\n');
            out.push_str(&layout(&["Country", "Intercept"], &rows));
            if let Some(years) = &fit.year_intercepts {
                let rows: Vec<Vec<String>> = years
                    .iter()
                    .map(|(y, g)| vec![y.to_string(), format_number(*g)])
                    .collect();
                out.push('\n');
                out.push_str(&layout(&["Year", "Effect"], &rows));
            }
        }
        StageResult::Diagnostics(diag) => {
            if let Some(corr) = &diag.correlation {
                let mut header = vec![""];
                header.extend(corr.names.iter().map(String::as_str));
                let rows: Vec<Vec<String>> = corr
                    .names
                    .iter()
                    .zip(&corr.values)
                    .map(|(n, row)| {
                        std::iter::once(n.clone())
                            .chain(row.iter().map(|v| format_number(*v)))
                            .collect()
                    })
                    .collect();
                out.push_str("Correlation matrix\n");
                out.push_str(&layout(&header, &rows));
            }
            let _ = writeln!(out, "\nPairs with |r| >= {}", diag.cutoff);
            if diag.high_pairs.is_empty() {
                out.push_str("(none)\n");
            } else {
                let rows: Vec<Vec<String>> = diag
                    .high_pairs
                    .iter()
                    .map(|p| vec![p.name_a.clone(), p.name_b.clone(), format_number(p.r)])
                    .collect();
                out.push_str(&layout(&["Variable A", "Variable B", "r"], &rows));
            }
            if let Some(vif) = &diag.vif {
                let _ = writeln!(
                    out,
                    "\nVariance inflation factors (threshold {})",
                    vif.threshold
                );
                let rows: Vec<Vec<String>> = vif
                    .entries
                    .iter()
                    .map(|e| {
                        vec![
                            e.name.clone(),
                            format_number(e.vif),
                            if e.flagged { "*".into() } else { String::new() },
                        ]
                    })
                    .collect();
                out.push_str(&layout(&["Variable", "VIF", "Above"], &rows));
            }
        }
        StageResult::Pca(pca) => {
            let rows: Vec<Vec<String>> = pca
                .scree
                .iter()
                .map(|r| {
                    vec![
                        format!("PC{}", r.component),
                        format!("{:.4}", r.eigenvalue),
                        format!("{:.1}%", r.share * 100.0),
                        format!("{:.1}%", r.cumulative * 100.0),
                    ]
                })
                .collect();
            out.push_str(&layout(
                &["Component", "Eigenvalue", "Share", "Cumulative"],
                &rows,
            ));
            let m = &pca.model;
            let mut header = vec!["Variable".to_string()];
            header.extend((1..=m.n_components()).map(|c| format!("PC{c}")));
            let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows: Vec<Vec<String>> = m
                .names
                .iter()
                .zip(&m.loadings)
                .map(|(n, row)| {
                    std::iter::once(n.clone())
                        .chain(row.iter().map(|v| format_number(*v)))
                        .collect()
                })
                .collect();
            out.push_str("\nLoadings\n");
            out.push_str(&layout(&header_refs, &rows));
            if let Some(w) = &pca.warning {
                let _ = writeln!(out, "warning: {w}");
            }
        }
        StageResult::RidgeCv(cv) => {
            let _ = writeln!(
                out,
                "{} folds, seed {}, {} grid points in [{}, {}]",
                cv.fold_count,
                cv.seed,
                cv.grid.len(),
                cv.grid.first().copied().unwrap_or(f64::NAN),
                cv.grid.last().copied().unwrap_or(f64::NAN)
            );
            let _ = writeln!(
                out,
                "lambda_min = {} (log {:.4}), lambda_1se = {} (log {:.4})",
                cv.lambda_min,
                cv.lambda_min.ln(),
                cv.lambda_1se,
                cv.lambda_1se.ln()
            );
        }
        StageResult::Ridge(fit) => {
            let _ = writeln!(out, "lambda = {}", fit.lambda);
            out.push_str(&render_ridge_table(fit));
        }
        StageResult::Adpi(adpi) => {
            let s = &adpi.series;
            let _ = writeln!(
                out,
                "variant = {}, weights = ({:.4}, {:.4}, {:.4})",
                s.variant.as_str(),
                s.weights[0],
                s.weights[1],
                s.weights[2]
            );
            for f in &s.formulas {
                let _ = writeln!(out, "{f}");
            }
            if let Some(latest) = adpi.rankings.last() {
                let _ = writeln!(out, "\nRanking, {}", latest.year);
                let rows: Vec<Vec<String>> = latest
                    .entries
                    .iter()
                    .map(|e| {
                        vec![
                            e.rank.to_string(),
                            e.country.clone(),
                            format_number(e.value),
                        ]
                    })
                    .collect();
                out.push_str(&layout(&["Rank", "Country", "ADPI"], &rows));
            }
        }
    }
}

pub fn to_text(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Response: {}", report.response);
    for stage in &report.stages {
        let _ = writeln!(
            out,
            "\n== Stage {}: {} [{}] ==",
            stage.stage.number(),
            stage.stage.title(),
            stage.status.as_str()
        );
        if !stage.variables.is_empty() {
            let _ = writeln!(out, "Variables: {}", stage.variables.join(", "));
        }
        for note in &stage.notes {
            let _ = writeln!(out, "note: {note}");
        }
        if let Some(err) = &stage.error {
            let _ = writeln!(out, "error ({}): {}", err.kind, err.message);
        }
        if let Some(result) = &stage.result {
            render_stage_body(&mut out, result);
        }
    }
    out
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io("<csv buffer>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:?}")
    }
}

pub fn coefficient_csv(table: &CoefficientTable) -> Result<String> {
    csv_string(
        &[
            "variable",
            "estimate",
            "std_error",
            "t_statistic",
            "p_value",
            "ci_lower",
            "ci_upper",
            "significant",
        ],
        table.rows.iter().map(|r| {
            vec![
                r.variable.clone(),
                num(r.estimate),
                num(r.std_error),
                num(r.t_statistic),
                num(r.p_value),
                num(r.ci_lower),
                num(r.ci_upper),
                r.significant.to_string(),
            ]
        }),
    )
}

pub fn cv_curve_csv(cv: &CvCurve) -> Result<String> {
    csv_string(
        &["lambda", "log_lambda", "mse_mean", "mse_se"],
        cv.grid
            .iter()
            .zip(cv.mse_mean.iter().zip(&cv.mse_se))
            .map(|(l, (m, s))| vec![num(*l), num(l.ln()), num(*m), num(*s)]),
    )
}

/// One CSV per stage. Stages without a result get a status row.
pub fn stage_csv(stage: &StageRecord) -> Result<String> {
    let Some(result) = &stage.result else {
        let message = stage
            .error
            .as_ref()
            .map(|e| e.message.clone())
            .unwrap_or_else(|| stage.notes.join("; "));
        return csv_string(
            &["status", "message"],
            [vec![stage.status.as_str().to_string(), message]],
        );
    };
    match result {
        StageResult::Ols(fit) => coefficient_csv(&fit.coefficients),
        StageResult::FixedEffects(fit) => coefficient_csv(&fit.coefficients),
        StageResult::Diagnostics(diag) => {
            let mut rows = Vec::new();
            if let Some(corr) = &diag.correlation {
                for (a, row) in corr.names.iter().zip(&corr.values) {
                    for (b, r) in corr.names.iter().zip(row) {
                        rows.push(vec![
                            "correlation".into(),
                            a.clone(),
                            b.clone(),
                            num(*r),
                            String::new(),
                        ]);
                    }
                }
            }
            for p in &diag.high_pairs {
                rows.push(vec![
                    "high_pair".into(),
                    p.name_a.clone(),
                    p.name_b.clone(),
                    num(p.r),
                    "true".into(),
                ]);
            }
            if let Some(vif) = &diag.vif {
                for e in &vif.entries {
                    rows.push(vec![
                        "vif".into(),
                        e.name.clone(),
                        String::new(),
                        num(e.vif),
                        e.flagged.to_string(),
                    ]);
                }
            }
            csv_string(&["kind", "name_a", "name_b", "value", "flagged"], rows)
        }
        StageResult::Pca(pca) => {
            let m = &pca.model;
            let mut rows = Vec::new();
            for (name, row) in m.names.iter().zip(&m.loadings) {
                for (c, l) in row.iter().enumerate() {
                    rows.push(vec![
                        name.clone(),
                        (c + 1).to_string(),
                        num(*l),
                        num(m.eigenvalues[c]),
                        num(m.var_explained[c]),
                    ]);
                }
            }
            csv_string(
                &["variable", "component", "loading", "eigenvalue", "share"],
                rows,
            )
        }
        StageResult::RidgeCv(cv) => cv_curve_csv(cv),
        StageResult::Ridge(fit) => {
            let mut rows = vec![vec![
                "(Intercept)".into(),
                num(fit.intercept),
                String::new(),
            ]];
            rows.extend(
                fit.coefficients
                    .iter()
                    .map(|c| vec![c.variable.clone(), num(c.estimate), num(c.standardized)]),
            );
            csv_string(&["variable", "estimate", "standardized_estimate"], rows)
        }
        StageResult::Adpi(adpi) => adpi_csv(&adpi.series),
    }
}

pub fn adpi_csv(series: &AdpiSeries) -> Result<String> {
    csv_string(
        &[
            "country",
            "year",
            "adpi",
            "variant",
            "weight_oda_gdp",
            "weight_oda_rev",
            "weight_tax",
        ],
        series.keys.iter().zip(&series.values).map(|(k, v)| {
            vec![
                k.country.clone(),
                k.year.to_string(),
                num(*v),
                series.variant.as_str().to_string(),
                num(series.weights[0]),
                num(series.weights[1]),
                num(series.weights[2]),
            ]
        }),
    )
}

pub fn ranking_csv(rankings: &[YearRanking]) -> Result<String> {
    csv_string(
        &["year", "rank", "country", "adpi"],
        rankings.iter().flat_map(|r| {
            r.entries.iter().map(move |e| {
                vec![
                    r.year.to_string(),
                    e.rank.to_string(),
                    e.country.clone(),
                    num(e.value),
                ]
            })
        }),
    )
}

/// Plot-data sidecars as `(file name, contents)`, for whichever stages have
/// results.
pub fn plot_data(report: &Report) -> Result<Vec<(String, String)>> {
    let mut files = Vec::new();
    for stage in &report.stages {
        match &stage.result {
            Some(StageResult::Diagnostics(diag)) => {
                if let Some(corr) = &diag.correlation {
                    let rows = corr.names.iter().zip(&corr.values).flat_map(|(a, row)| {
                        corr.names
                            .iter()
                            .zip(row)
                            .map(move |(b, r)| vec![a.clone(), b.clone(), num(*r)])
                    });
                    files.push((
                        "correlation_heatmap.csv".into(),
                        csv_string(&["row_name", "col_name", "r"], rows)?,
                    ));
                }
                if let Some(vif) = &diag.vif {
                    let rows = vif
                        .entries
                        .iter()
                        .map(|e| vec![e.name.clone(), num(e.vif), e.flagged.to_string()]);
                    files.push((
                        "vif.csv".into(),
                        csv_string(&["name", "vif", "flagged"], rows)?,
                    ));
                }
            }
            Some(StageResult::Pca(pca)) => {
                let rows = pca.scree.iter().map(|r| {
                    vec![
                        r.component.to_string(),
                        num(r.eigenvalue),
                        num(r.share),
                        num(r.cumulative),
                    ]
                });
                files.push((
                    "scree.csv".into(),
                    csv_string(&["component", "eigenvalue", "share", "cumulative"], rows)?,
                ));
                let rows = pca
                    .arrows
                    .iter()
                    .chain(&pca.country_points)
                    .map(|r| vec![r.kind.clone(), r.label.clone(), num(r.dim1), num(r.dim2)]);
                files.push((
                    "biplot.csv".into(),
                    csv_string(&["kind", "label", "dim1", "dim2"], rows)?,
                ));
            }
            Some(StageResult::RidgeCv(cv)) => {
                files.push(("cv_curve.csv".into(), cv_curve_csv(cv)?));
            }
            _ => {}
        }
    }
    Ok(files)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Creates `dir` if needed and confirms a file can be written there.
pub fn ensure_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".panelkit_write_probe");
    fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))?;
    Ok(())
}

/// Writes one format of the report under `dir` and returns the paths written.
pub fn render_report(report: &Report, format: Format, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    match format {
        Format::Json => {
            let path = dir.join("report.json");
            write_file(&path, &to_json(report)?)?;
            written.push(path);
        }
        Format::Text => {
            let path = dir.join("report.txt");
            write_file(&path, &to_text(report))?;
            written.push(path);
        }
        Format::Csv => {
            for stage in &report.stages {
                let path = dir.join(format!("{}.csv", stage.stage.file_stem()));
                write_file(&path, &stage_csv(stage)?)?;
                written.push(path);
                if let Some(StageResult::Adpi(adpi)) = &stage.result {
                    let path = dir.join("08_adpi_ranking.csv");
                    write_file(&path, &ranking_csv(&adpi.rankings)?)?;
                    written.push(path);
                }
            }
        }
    }
    Ok(written)
}

/// Every requested format plus the plot-data sidecars under `dir/plotdata`.
pub fn write_outputs(report: &Report, formats: &[Format], dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for &f in formats {
        written.extend(render_report(report, f, dir)?);
    }
    let plot_dir = dir.join("plotdata");
    let files = plot_data(report)?;
    if !files.is_empty() {
        fs::create_dir_all(&plot_dir).map_err(|e| Error::io(&plot_dir, e))?;
    }
    for (name, contents) in files {
        let path = plot_dir.join(name);
        write_file(&path, &contents)?;
        written.push(path);
    }
    Ok(written)
}
