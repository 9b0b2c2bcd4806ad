//! End-to-end analysis: OLS, diagnostics, openness PCA, OLS with the PC1
//! index, fixed effects, ridge with cross-validation and the ADPI.

use std::fs::File;
use std::time::Instant;

use crate::config::PipelineConfig;
use crate::decomposition::{biplot_data, scree_data, BiplotKind, PcaModel};
use crate::diagnostics::{correlation_matrix, high_correlation_pairs, vif};
use crate::error::{Error, Result};
use crate::estimators::{
    fe_fit, log_grid, mark_significance, ols_fit, ridge_cv, ridge_fit, FeOptions,
};
use crate::indices::{
    build_adpi_scoped, build_external_openness, rank_adpi, AdpiComponents, OPENNESS_PC1,
};
use crate::panel::{DesignMatrix, MissingPolicy, Panel, Role, VariableSpec};
use crate::report::{
    ensure_writable, AdpiResult, DiagnosticsResult, PcaResult, Report, StageError, StageKind,
    StageRecord, StageResult, StageStatus, YearRanking,
};

/// One stage run on its own, as exposed by the CLI subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ols,
    Diagnose,
    Pca,
    Fe,
    Ridge,
    Adpi,
}

/// Loads the configured input file.
pub fn load_panel(config: &PipelineConfig) -> Result<Panel> {
    let path = config
        .input
        .as_ref()
        .ok_or_else(|| Error::config("input", "no input file given"))?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Panel::load_csv(file, &config.schema(), &config.id_columns())
}

/// Validates the config, checks the output directory, loads the input and
/// runs every stage.
pub fn run_pipeline(config: &PipelineConfig) -> Result<Report> {
    config.validate_pipeline()?;
    if let Some(dir) = &config.output_dir {
        ensure_writable(dir)?;
    }
    let panel = load_panel(config)?;
    run_pipeline_on_panel(config, &panel)
}

fn completed(stage: StageKind, variables: Vec<String>, result: StageResult) -> StageRecord {
    StageRecord {
        stage,
        status: StageStatus::Completed,
        variables,
        notes: Vec::new(),
        result: Some(result),
        error: None,
        duration: Default::default(),
    }
}

fn failed(stage: StageKind, variables: Vec<String>, error: &Error) -> StageRecord {
    StageRecord {
        stage,
        status: StageStatus::Failed,
        variables,
        notes: Vec::new(),
        result: None,
        error: Some(StageError::from(error)),
        duration: Default::default(),
    }
}

fn record(stage: StageKind, variables: Vec<String>, outcome: Result<StageResult>) -> StageRecord {
    match outcome {
        Ok(result) => completed(stage, variables, result),
        Err(e) => failed(stage, variables, &e),
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, std::time::Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn dropped_note(d: &DesignMatrix) -> Option<String> {
    (d.dropped > 0).then(|| format!("{} rows dropped for missing values", d.dropped))
}

fn ols_stage(
    stage: StageKind,
    panel: &Panel,
    config: &PipelineConfig,
    regressors: &[String],
) -> (StageRecord, Option<DesignMatrix>) {
    let (outcome, duration) = timed(|| {
        let d = panel.extract_design(&config.response, regressors, MissingPolicy::Listwise)?;
        let mut fit = ols_fit(&d, true)?;
        fit.coefficients = mark_significance(&fit.coefficients, config.alpha);
        Ok((fit, d))
    });
    let mut rec;
    let mut design = None;
    match outcome {
        Ok((fit, d)) => {
            rec = completed(stage, regressors.to_vec(), StageResult::Ols(fit));
            rec.notes.extend(dropped_note(&d));
            design = Some(d);
        }
        Err(e) => rec = failed(stage, regressors.to_vec(), &e),
    }
    rec.duration = duration;
    (rec, design)
}

fn diagnostics_stage(
    panel: &Panel,
    config: &PipelineConfig,
    design: Option<&DesignMatrix>,
) -> StageRecord {
    let variables = config.regressors.clone();
    let (mut rec, duration) = timed(|| {
        let block = match design {
            Some(d) => d.regressor_block(),
            None => match panel.extract_block(&variables) {
                Ok(b) => b,
                Err(e) => return failed(StageKind::Diagnostics, variables.clone(), &e),
            },
        };
        let correlation = match correlation_matrix(&block) {
            Ok(c) => c,
            Err(e) => return failed(StageKind::Diagnostics, variables.clone(), &e),
        };
        let high_pairs = high_correlation_pairs(&correlation, config.corr_cutoff);
        let mut notes = Vec::new();
        let vif_table = if block.ncols() >= 2 {
            match vif(&block, config.vif_threshold) {
                Ok(t) => Some(t),
                Err(e) => {
                    notes.push(format!("VIF not computed: {e}"));
                    None
                }
            }
        } else {
            notes.push("VIF needs at least 2 regressors".into());
            None
        };
        let mut rec = completed(
            StageKind::Diagnostics,
            variables.clone(),
            StageResult::Diagnostics(DiagnosticsResult {
                correlation: Some(correlation),
                cutoff: config.corr_cutoff,
                high_pairs,
                vif: vif_table,
            }),
        );
        rec.notes = notes;
        rec
    });
    rec.duration = duration;
    rec
}

fn pca_stage(
    panel: &Panel,
    config: &PipelineConfig,
) -> (StageRecord, Option<PcaModel>, Option<Panel>) {
    let variables = config.openness.clone();
    let (outcome, duration) = timed(|| {
        let index = build_external_openness(panel, &variables)?;
        let block = panel.extract_block(&variables)?;
        let arrows = biplot_data(&index.model, &block, BiplotKind::VariableArrows)?;
        let country_points = biplot_data(&index.model, &block, BiplotKind::CountryPoints)?;
        let augmented = panel.append_variable(
            VariableSpec::new(OPENNESS_PC1, Role::Regressor).with_unit("index"),
            &index.scores.to_map(),
        )?;
        let result = PcaResult {
            scree: scree_data(&index.model),
            arrows,
            country_points,
            scores: index.scores,
            warning: index.warning,
            model: index.model,
        };
        Ok((result, augmented))
    });
    let mut rec;
    let (mut model, mut augmented) = (None, None);
    match outcome {
        Ok((result, panel)) => {
            model = Some(result.model.clone());
            let warning = result.warning.clone();
            rec = completed(
                StageKind::Pca,
                variables,
                StageResult::Pca(Box::new(result)),
            );
            rec.notes.extend(warning);
            augmented = Some(panel);
        }
        Err(e) => rec = failed(StageKind::Pca, variables, &e),
    }
    rec.duration = duration;
    (rec, model, augmented)
}

/// Regressors once the openness block is replaced by its PC1 index.
pub fn pc1_regressors(config: &PipelineConfig) -> Vec<String> {
    std::iter::once(OPENNESS_PC1.to_string())
        .chain(
            config
                .regressors
                .iter()
                .filter(|r| !config.openness.contains(r) && r.as_str() != OPENNESS_PC1)
                .cloned(),
        )
        .collect()
}

fn fe_stage(design: &DesignMatrix, config: &PipelineConfig) -> StageRecord {
    let options = FeOptions {
        country_effects: true,
        year_effects: config.year_effects,
    };
    let (outcome, duration) = timed(|| {
        let mut fit = fe_fit(design, options)?;
        fit.coefficients = mark_significance(&fit.coefficients, config.alpha);
        Ok(StageResult::FixedEffects(fit))
    });
    let mut rec = record(StageKind::FixedEffects, design.names.clone(), outcome);
    if config.year_effects {
        rec.notes.push("country and year effects".into());
    }
    rec.duration = duration;
    rec
}

/// Runs cross-validation (unless a fixed penalty is configured) and the final
/// ridge fit. Returns the two stage records in order.
fn ridge_stages(design: &DesignMatrix, config: &PipelineConfig) -> [StageRecord; 2] {
    let variables = design.names.clone();
    let (cv_rec, lambda) = match config.lambda {
        Some(l) => (
            StageRecord::skipped(
                StageKind::RidgeCv,
                variables.clone(),
                format!("fixed lambda = {l} supplied; cross-validation not run"),
            ),
            Some(l),
        ),
        None => {
            let (outcome, duration) = timed(|| {
                let grid = log_grid(
                    config.lambda_grid_min,
                    config.lambda_grid_max,
                    config.lambda_grid_count,
                )?;
                let seed = config.cv_seed()?;
                ridge_cv(design, &grid, config.cv_folds, seed)
            });
            let lambda = outcome.as_ref().ok().map(|cv| cv.lambda_min);
            let mut rec = record(
                StageKind::RidgeCv,
                variables.clone(),
                outcome.map(StageResult::RidgeCv),
            );
            if let Some(l) = lambda {
                rec.notes.push(format!("selected lambda_min = {l}"));
            }
            rec.duration = duration;
            (rec, lambda)
        }
    };
    let final_rec = match lambda {
        Some(l) => {
            let (outcome, duration) = timed(|| ridge_fit(design, l).map(StageResult::Ridge));
            let mut rec = record(StageKind::RidgeFinal, variables, outcome);
            rec.duration = duration;
            rec
        }
        None => StageRecord::skipped(StageKind::RidgeFinal, variables, "halted: ridge_cv failed"),
    };
    [cv_rec, final_rec]
}

fn adpi_stage(panel: &Panel, config: &PipelineConfig) -> Result<StageRecord> {
    let Some(mapping) = config.adpi_mapping()? else {
        return Ok(StageRecord::skipped(
            StageKind::Adpi,
            Vec::new(),
            "no ADPI column mapping configured",
        ));
    };
    let variables = vec![
        mapping.oda.clone(),
        mapping.gdp.clone(),
        mapping.revenue.clone(),
        mapping.tax.clone(),
    ];
    let (outcome, duration) = timed(|| {
        let components = AdpiComponents::from_panel(panel, &mapping)?;
        let series = build_adpi_scoped(&components, config.adpi_variant, config.adpi_scope)?;
        let mut years: Vec<i32> = series.keys.iter().map(|k| k.year).collect();
        years.sort_unstable();
        years.dedup();
        let rankings = years
            .into_iter()
            .map(|year| {
                Ok(YearRanking {
                    year,
                    entries: rank_adpi(&series, year)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StageResult::Adpi(AdpiResult { series, rankings }))
    });
    let mut rec = record(StageKind::Adpi, variables, outcome);
    rec.duration = duration;
    Ok(rec)
}

fn halted(stage: StageKind, variables: Vec<String>, cause: StageKind) -> StageRecord {
    let cause = serde_json::to_value(cause)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    StageRecord::skipped(stage, variables, format!("halted: {cause} failed"))
}

fn new_report(config: &PipelineConfig) -> Report {
    Report {
        response: config.response.clone(),
        alpha: config.alpha,
        stages: Vec::new(),
    }
}

/// Runs all eight stages in order on an already loaded panel. A failed
/// estimation stage marks every later estimation stage as skipped; the
/// diagnostics and ADPI stages always run.
pub fn run_pipeline_on_panel(config: &PipelineConfig, panel: &Panel) -> Result<Report> {
    config.validate_pipeline()?;
    let mut report = new_report(config);
    let mut halt: Option<StageKind> = None;

    let (ols1, design1) = ols_stage(StageKind::PooledOlsFull, panel, config, &config.regressors);
    if ols1.status == StageStatus::Failed {
        halt = Some(StageKind::PooledOlsFull);
    }
    report.stages.push(ols1);

    report
        .stages
        .push(diagnostics_stage(panel, config, design1.as_ref()));

    let mut augmented = None;
    if let Some(cause) = halt {
        report
            .stages
            .push(halted(StageKind::Pca, config.openness.clone(), cause));
    } else {
        let (rec, _, aug) = pca_stage(panel, config);
        if rec.status == StageStatus::Failed {
            halt = Some(StageKind::Pca);
        }
        augmented = aug;
        report.stages.push(rec);
    }

    let stage4_vars = pc1_regressors(config);
    let mut design4 = None;
    match (halt, &augmented) {
        (None, Some(aug)) => {
            let (rec, d) = ols_stage(StageKind::PooledOlsPc1, aug, config, &stage4_vars);
            if rec.status == StageStatus::Failed {
                halt = Some(StageKind::PooledOlsPc1);
            }
            design4 = d;
            report.stages.push(rec);
        }
        (cause, _) => report.stages.push(halted(
            StageKind::PooledOlsPc1,
            stage4_vars.clone(),
            cause.unwrap_or(StageKind::Pca),
        )),
    }

    match (halt, &design4) {
        (None, Some(d)) => {
            let rec = fe_stage(d, config);
            if rec.status == StageStatus::Failed {
                halt = Some(StageKind::FixedEffects);
            }
            report.stages.push(rec);
        }
        (cause, _) => report.stages.push(halted(
            StageKind::FixedEffects,
            stage4_vars.clone(),
            cause.unwrap_or(StageKind::PooledOlsPc1),
        )),
    }

    match (halt, &design4) {
        (None, Some(d)) => {
            let [cv, fin] = ridge_stages(d, config);
            report.stages.push(cv);
            report.stages.push(fin);
        }
        (cause, _) => {
            let cause = cause.unwrap_or(StageKind::PooledOlsPc1);
            report
                .stages
                .push(halted(StageKind::RidgeCv, stage4_vars.clone(), cause));
            report
                .stages
                .push(halted(StageKind::RidgeFinal, stage4_vars, cause));
        }
    }

    report.stages.push(adpi_stage(panel, config)?);
    Ok(report)
}

/// Runs a single stage on the configured regressor list. `Fe` and `Ridge`
/// use the configured regressors as given; no PC1 substitution happens.
pub fn run_command(config: &PipelineConfig, panel: &Panel, command: Command) -> Result<Report> {
    config.validate()?;
    if command == Command::Ridge && config.runs_cv() {
        config.cv_seed()?;
    }
    let mut report = new_report(config);
    match command {
        Command::Ols => {
            let (rec, _) = ols_stage(StageKind::PooledOlsFull, panel, config, &config.regressors);
            report.stages.push(rec);
        }
        Command::Diagnose => report.stages.push(diagnostics_stage(panel, config, None)),
        Command::Pca => report.stages.push(pca_stage(panel, config).0),
        Command::Fe | Command::Ridge => {
            let design = panel.extract_design(
                &config.response,
                &config.regressors,
                MissingPolicy::Listwise,
            );
            let kinds: &[StageKind] = if command == Command::Fe {
                &[StageKind::FixedEffects]
            } else {
                &[StageKind::RidgeCv, StageKind::RidgeFinal]
            };
            match design {
                Ok(d) => {
                    if command == Command::Fe {
                        report.stages.push(fe_stage(&d, config));
                    } else {
                        report.stages.extend(ridge_stages(&d, config));
                    }
                }
                Err(e) => {
                    for &k in kinds {
                        report.stages.push(failed(k, config.regressors.clone(), &e));
                    }
                }
            }
        }
        Command::Adpi => {
            if config.adpi_mapping()?.is_none() {
                return Err(Error::config(
                    "adpi_oda",
                    "the adpi command needs adpi_oda, adpi_gdp, adpi_revenue and adpi_tax",
                ));
            }
            report.stages.push(adpi_stage(panel, config)?);
        }
    }
    Ok(report)
}
