//! Command definitions and implementations.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical/convergence
//! warning (the summary is still written).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ordr2_core::gof::{gof_report, PenaltySpec};
use ordr2_core::sim::{SimConfig, SimSetting};
use ordr2_core::{fit_clm, fit_ols, Error, FittedModel, LinkKind};

use crate::error::CliError;
use crate::modelio::{self, FitSummary};
use crate::runner;
use crate::sensory::{preprocess_sensory, to_table, SensoryPipelineSpec};
use crate::table::{load_csv, read_table, write_table, ResponseKind};

/// Seed fallback read when `--seed` is not given.
pub const SEED_ENV: &str = "ORDR2_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "ordr2",
    version,
    about = "Binary and ordinal cumulative-link regression with penalized likelihood-ratio fit measures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a linear, binary or ordinal model from a CSV file and emit a JSON summary.
    Fit(FitArgs),
    /// Recompute goodness-of-fit measures from a saved model summary.
    Gof(GofArgs),
    /// Run the latent-variable replication study and emit long-format/aggregate CSVs.
    Simulate(SimulateArgs),
    /// Emit the candidate penalty curves lambda(r) as CSV.
    PenaltyTable(PenaltyTableArgs),
    /// Preprocess a raw sensory CSV into binary, ordinal and linear datasets.
    PreprocessSensory(PreprocessArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Linear,
    Binary,
    Ordinal,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LinkArg {
    Probit,
    Logit,
}

impl From<LinkArg> for LinkKind {
    fn from(arg: LinkArg) -> Self {
        match arg {
            LinkArg::Probit => LinkKind::Probit,
            LinkArg::Logit => LinkKind::Logit,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SettingArg {
    A,
    B,
}

impl From<SettingArg> for SimSetting {
    fn from(arg: SettingArg) -> Self {
        match arg {
            SettingArg::A => SimSetting::SingleDistribution,
            SettingArg::B => SimSetting::MixedDistribution,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Input CSV with a header row; every non-response column is a predictor.
    #[arg(long)]
    pub data: PathBuf,
    /// Name of the response column.
    #[arg(long)]
    pub response: String,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long, value_enum, default_value = "probit")]
    pub link: LinkArg,
    /// Comma-separated penalties: l0..l6 or const:<value>.
    #[arg(long, value_delimiter = ',', default_value = "l1,l2,l3,l4,l5,l6")]
    pub penalties: Vec<String>,
    /// Output path for the JSON summary (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GofArgs {
    /// A JSON summary previously written by `fit`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "l1,l2,l3,l4,l5,l6")]
    pub penalties: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Covariate setting: a (two uniforms) or b (three normals, two uniforms).
    #[arg(long, value_enum)]
    pub setting: SettingArg,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "100,500,1000")]
    pub n: Vec<usize>,
    /// Disturbance standard deviations, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    pub sigma: Vec<f64>,
    /// Category counts: comma list and/or inclusive ranges, e.g. 2..10 or 2,5,10.
    #[arg(long, default_value = "2")]
    pub r: String,
    /// Replications per cell (the full study uses 1000).
    #[arg(long, default_value_t = 200)]
    pub reps: u32,
    /// Extra pure-noise covariates added to the fitted model only.
    #[arg(long, default_value_t = 0)]
    pub noise: u32,
    #[arg(long, value_enum, default_value = "probit")]
    pub link: LinkArg,
    #[arg(long, value_delimiter = ',', default_value = "l1,l2,l3,l4,l5,l6,const:3")]
    pub penalties: Vec<String>,
    /// Master seed; falls back to ORDR2_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Long-format per-replication CSV (skipped when omitted).
    #[arg(long)]
    pub out_rows: Option<PathBuf>,
    /// Aggregate CSV (stdout when omitted).
    #[arg(long)]
    pub out_agg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PenaltyTableArgs {
    /// Largest category count to tabulate.
    #[arg(long, default_value_t = 10)]
    pub r_max: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Raw sensory CSV (average panel rating plus the two compounds).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "rating")]
    pub rating_col: String,
    #[arg(long, default_value = "androstenone")]
    pub an_col: String,
    #[arg(long, default_value = "skatole")]
    pub sk_col: String,
    /// Ratings at or above this value are tainted in the binary coding.
    #[arg(long, default_value_t = 2.0)]
    pub cutpoint: f64,
    #[arg(long)]
    pub out_binary: PathBuf,
    #[arg(long)]
    pub out_ordinal: PathBuf,
    #[arg(long)]
    pub out_linear: PathBuf,
}

pub fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Gof(args) => cmd_gof(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::PenaltyTable(args) => cmd_penalty_table(args),
        Command::PreprocessSensory(args) => cmd_preprocess_sensory(args),
    }
}

fn parse_penalties(raw: &[String]) -> Result<Vec<PenaltySpec>, CliError> {
    raw.iter()
        .map(|s| s.parse::<PenaltySpec>().map_err(CliError::from))
        .collect()
}

pub fn cmd_fit(args: FitArgs) -> Result<ExitCode, CliError> {
    let penalties = parse_penalties(&args.penalties)?;
    match args.kind {
        KindArg::Linear => {
            let data = load_csv(&args.data, &args.response, ResponseKind::Linear)?;
            let fit = fit_ols(&data)?;
            let summary = modelio::summary_from_linear(&fit, data.n());
            modelio::write_summary(args.out.as_deref(), &summary)?;
            Ok(ExitCode::SUCCESS)
        }
        KindArg::Binary | KindArg::Ordinal => {
            let (kind_name, response_kind) = match args.kind {
                KindArg::Binary => ("binary", ResponseKind::Binary),
                _ => ("ordinal", ResponseKind::Ordinal),
            };
            let data = load_csv(&args.data, &args.response, response_kind)?;
            let (model, warn): (FittedModel, bool) = match fit_clm(&data, args.link.into()) {
                Ok(m) => {
                    let warn = m.separation;
                    (m, warn)
                }
                Err(Error::NotConverged(m)) => {
                    eprintln!(
                        "warning: no convergence after {} iterations (gradient norm {:.3e}); writing last iterate",
                        m.iterations, m.gradient_norm
                    );
                    (*m, true)
                }
                Err(e) => return Err(e.into()),
            };
            if model.separation {
                eprintln!("warning: separation suspected (coefficient norm diverged)");
            }
            let report = gof_report(&model, &penalties);
            let summary = modelio::summary_from_clm(kind_name, model, &report);
            modelio::write_summary(args.out.as_deref(), &summary)?;
            Ok(if warn { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
    }
}

pub fn cmd_gof(args: GofArgs) -> Result<ExitCode, CliError> {
    let penalties = parse_penalties(&args.penalties)?;
    let mut summary: FitSummary = modelio::read_summary(&args.model)?;
    let model = summary.model.take().ok_or_else(|| {
        CliError::InvalidArg(format!(
            "{}: summary carries no fitted model (linear summaries have no likelihood measures)",
            args.model.display()
        ))
    })?;
    let report = gof_report(&model, &penalties);
    let updated = modelio::summary_from_clm(&summary.kind, model, &report);
    modelio::write_summary(args.out.as_deref(), &updated)?;
    Ok(ExitCode::SUCCESS)
}

/// Parse "2", "2,5,7" and "2..10" (inclusive), in any comma-mixed combination.
pub fn parse_r_grid(raw: &str) -> Result<Vec<u32>, CliError> {
    let mut grid = Vec::new();
    for part in raw.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u32 = lo.trim().parse().map_err(|_| bad_r(part))?;
            let hi: u32 = hi.trim().parse().map_err(|_| bad_r(part))?;
            if lo > hi {
                return Err(bad_r(part));
            }
            grid.extend(lo..=hi);
        } else {
            grid.push(part.parse().map_err(|_| bad_r(part))?);
        }
    }
    if grid.is_empty() {
        return Err(CliError::InvalidArg("empty category grid".into()));
    }
    Ok(grid)
}

fn bad_r(part: &str) -> CliError {
    CliError::InvalidArg(format!("bad category grid entry '{part}'"))
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(raw) => raw
            .parse()
            .map_err(|_| CliError::InvalidArg(format!("{SEED_ENV}='{raw}' is not a valid seed"))),
        Err(_) => Ok(0),
    }
}

pub fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode, CliError> {
    let config = SimConfig {
        setting: args.setting.into(),
        n_grid: args.n,
        sigma_grid: args.sigma,
        r_grid: parse_r_grid(&args.r)?,
        replications: args.reps,
        noise_covariates: args.noise,
        link: args.link.into(),
        penalties: parse_penalties(&args.penalties)?,
        seed: resolve_seed(args.seed)?,
    };
    config.validate()?;
    let (rows, aggs) = runner::run_experiment_parallel(&config)?;
    if let Some(path) = &args.out_rows {
        runner::write_rows_csv(path, &rows)?;
    }
    runner::write_agg_csv(args.out_agg.as_deref(), &aggs)?;
    Ok(ExitCode::SUCCESS)
}

pub fn cmd_penalty_table(args: PenaltyTableArgs) -> Result<ExitCode, CliError> {
    if args.r_max < 2 {
        return Err(CliError::InvalidArg("--r-max must be at least 2".into()));
    }
    runner::write_penalty_csv(args.out.as_deref(), args.r_max)?;
    Ok(ExitCode::SUCCESS)
}

pub fn cmd_preprocess_sensory(args: PreprocessArgs) -> Result<ExitCode, CliError> {
    let table = read_table(&args.data)?;
    let spec = SensoryPipelineSpec {
        androstenone_column: args.an_col,
        skatole_column: args.sk_col,
        rating_column: args.rating_col,
        dichotomy_cutpoint: args.cutpoint,
        ..Default::default()
    };
    let outputs = preprocess_sensory(&table, &spec)?;
    eprintln!(
        "kept {} of {} rows ({} excluded for zero androstenone, {} for zero skatole)",
        outputs.n_kept,
        outputs.n_input,
        outputs.excluded_zero_androstenone,
        outputs.excluded_zero_skatole
    );
    write_table(&args.out_binary, &to_table(&outputs.binary, "taint"))?;
    write_table(&args.out_ordinal, &to_table(&outputs.ordinal, "taint_class"))?;
    write_table(&args.out_linear, &to_table(&outputs.linear, "rating"))?;
    Ok(ExitCode::SUCCESS)
}
