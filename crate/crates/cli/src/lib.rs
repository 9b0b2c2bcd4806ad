//! Command-line front end. `run` is the whole program minus process exit so
//! that tests can drive it in-process.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use panelkit::pipeline::load_panel;
use panelkit::report::{ensure_writable, to_json, to_text};
use panelkit::{
    run_command, run_pipeline, write_outputs, Command, Error, ErrorClass, Format, PipelineConfig,
    Report, StageStatus,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "panelkit",
    version,
    about = "Panel regressions, diagnostics and indices for country-year data"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Run every stage in order
    Pipeline(Common),
    /// Pooled OLS on the configured regressors
    Ols(Common),
    /// Country (and optionally year) fixed effects
    Fe(Common),
    /// Ridge regression, with cross-validated penalty unless --lambda is given
    Ridge(Common),
    /// PCA of the openness block
    Pca(Common),
    /// Correlation screening and variance inflation factors
    Diagnose(Common),
    /// Aid Dependence Pressure Index and rankings
    Adpi(Common),
    /// Load the input and summarize it without estimating anything
    IngestCheck(Common),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// TOML config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input CSV, overriding the config
    #[arg(long)]
    input: Option<PathBuf>,
    /// Directory for report files; without it results go to stdout
    #[arg(long, env = "PANELKIT_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
    /// Output formats: json, csv, text (comma-separated or repeated)
    #[arg(long, value_delimiter = ',')]
    format: Vec<String>,
    /// |r| at or above which a pair is reported
    #[arg(long)]
    corr_cutoff: Option<f64>,
    /// VIF above which a regressor is flagged
    #[arg(long)]
    vif_threshold: Option<f64>,
    /// Fixed ridge penalty; skips cross-validation
    #[arg(long)]
    lambda: Option<f64>,
    /// Cross-validation folds
    #[arg(long)]
    folds: Option<usize>,
    /// Seed for fold assignment
    #[arg(long)]
    seed: Option<u64>,
    /// Significance level for marking coefficients
    #[arg(long)]
    alpha: Option<f64>,
    /// Add year effects to the fixed-effects model
    #[arg(long)]
    year_fe: bool,
    /// Response column, overriding the config
    #[arg(long)]
    response: Option<String>,
    /// Regressor columns, comma-separated, overriding the config
    #[arg(long, value_delimiter = ',')]
    regressors: Option<Vec<String>>,
}

fn exit_code(class: ErrorClass) -> i32 {
    match class {
        ErrorClass::Usage => EXIT_USAGE,
        ErrorClass::Data => EXIT_DATA,
        ErrorClass::Numeric => EXIT_NUMERIC,
    }
}

fn build_config(args: &Common) -> Result<PipelineConfig, Error> {
    let mut config = match &args.config {
        Some(path) => PipelineConfig::from_path(path)?,
        None => {
            let response = args.response.clone().ok_or_else(|| {
                Error::config(
                    "response",
                    "give --config or both --response and --regressors",
                )
            })?;
            let regressors = args.regressors.clone().ok_or_else(|| {
                Error::config(
                    "regressors",
                    "give --config or both --response and --regressors",
                )
            })?;
            PipelineConfig::new(response, regressors)
        }
    };
    if let Some(v) = &args.input {
        config.input = Some(v.clone());
    }
    if let Some(v) = &args.output_dir {
        config.output_dir = Some(v.clone());
    }
    if !args.format.is_empty() {
        config.formats = args
            .format
            .iter()
            .map(|f| f.parse())
            .collect::<Result<Vec<Format>, Error>>()?;
    }
    if let Some(v) = args.corr_cutoff {
        config.corr_cutoff = v;
    }
    if let Some(v) = args.vif_threshold {
        config.vif_threshold = v;
    }
    if let Some(v) = args.lambda {
        config.lambda = Some(v);
    }
    if let Some(v) = args.folds {
        config.cv_folds = v;
    }
    if let Some(v) = args.seed {
        config.seed = Some(v);
    }
    if let Some(v) = args.alpha {
        config.alpha = v;
    }
    if args.year_fe {
        config.year_effects = true;
    }
    if let Some(v) = &args.response {
        config.response = v.clone();
    }
    if let Some(v) = &args.regressors {
        config.regressors = v.clone();
    }
    Ok(config)
}

fn emit(
    report: &Report,
    config: &PipelineConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), Error> {
    for stage in &report.stages {
        let _ = writeln!(
            err,
            "stage {} {}: {} in {:.1} ms",
            stage.stage.number(),
            stage.stage.file_stem(),
            stage.status.as_str(),
            stage.duration.as_secs_f64() * 1e3
        );
    }
    match &config.output_dir {
        Some(dir) => {
            let written = write_outputs(report, &config.formats, dir)?;
            let _ = writeln!(out, "wrote {} files to {}", written.len(), dir.display());
        }
        None if config.formats == [Format::Json] => {
            let _ = out.write_all(to_json(report)?.as_bytes());
        }
        None => {
            let _ = out.write_all(to_text(report).as_bytes());
        }
    }
    Ok(())
}

fn ingest_check(config: &PipelineConfig, out: &mut dyn Write) -> Result<(), Error> {
    let panel = load_panel(config)?;
    let years = panel.years();
    let _ = writeln!(
        out,
        "{} rows, {} countries, years {}-{}",
        panel.len(),
        panel.countries().len(),
        years.first().copied().unwrap_or_default(),
        years.last().copied().unwrap_or_default()
    );
    for spec in panel.variables() {
        let _ = writeln!(
            out,
            "{}: {} missing",
            spec.name,
            panel.missing_count(&spec.name)?
        );
    }
    Ok(())
}

fn execute(sub: Sub, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Error> {
    let (args, command) = match sub {
        Sub::Pipeline(a) => (a, None),
        Sub::Ols(a) => (a, Some(Command::Ols)),
        Sub::Fe(a) => (a, Some(Command::Fe)),
        Sub::Ridge(a) => (a, Some(Command::Ridge)),
        Sub::Pca(a) => (a, Some(Command::Pca)),
        Sub::Diagnose(a) => (a, Some(Command::Diagnose)),
        Sub::Adpi(a) => (a, Some(Command::Adpi)),
        Sub::IngestCheck(a) => {
            let config = build_config(&a)?;
            ingest_check(&config, out)?;
            return Ok(EXIT_OK);
        }
    };
    let config = build_config(&args)?;
    let report = match command {
        None => run_pipeline(&config)?,
        Some(c) => {
            config.validate()?;
            if let Some(dir) = &config.output_dir {
                ensure_writable(dir)?;
            }
            let panel = load_panel(&config)?;
            run_command(&config, &panel, c)?
        }
    };
    emit(&report, &config, out, err)?;
    if let Some(failure) = report
        .stages
        .iter()
        .find(|s| s.status == StageStatus::Failed)
    {
        if let Some(e) = &failure.error {
            let _ = writeln!(
                err,
                "error: stage {} failed: {}",
                failure.stage.file_stem(),
                e.message
            );
            return Ok(exit_code(e.class));
        }
    }
    Ok(EXIT_OK)
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(e.class())
        }
    }
}
