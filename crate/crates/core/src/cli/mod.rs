//! Command-line interface: `fit`, `select`, `simulate` and `generate`.
//!
//! Exit codes: 0 success, 2 input error, 3 non-convergence, 4 config error.

pub mod data;
pub mod report;
pub mod study;

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::error::Error;
use crate::ggdist::Family;
use crate::inference::{fit_mtp, fit_tp, select_model, FitOptions};
use crate::simstudy::{gen_dataset, ScenarioShape, SimScenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    NotConverged(String),
    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::NotConverged(_) => EXIT_NOT_CONVERGED,
            CliError::Config(_) => EXIT_CONFIG,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotConverged(_) | Error::Initialization(_) => CliError::NotConverged(e.to_string()),
            Error::Config(_) => CliError::Config(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mtpgg", version, about = "Marginalized two-part generalized gamma regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one model and write a JSON report.
    Fit(FitArgs),
    /// Fit every MTP family, rank by AIC and read the GG shape/scale.
    Select(SelectArgs),
    /// Run a simulation study from a TOML config.
    Simulate(SimulateArgs),
    /// Write one simulated dataset as CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Mtp,
    Tp,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Outcome column (non-negative, zeros allowed).
    #[arg(long)]
    pub outcome: String,
    /// Covariates of the binary (zero vs positive) part, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub binary_covars: Vec<String>,
    /// Covariates of the continuous (marginal mean) part, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub cont_covars: Vec<String>,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0.95)]
    pub ci_level: f64,
    /// Starting values `[alpha, beta, sigma, (k)]`, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub init: Option<Vec<f64>>,
    /// Subtract the sample mean from every covariate column. Slopes are
    /// unchanged; intercepts then refer to the covariate means.
    #[arg(long)]
    pub center: bool,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl DataArgs {
    fn options(&self) -> FitOptions<f64> {
        FitOptions {
            init: self.init.clone(),
            max_iter: self.max_iter,
            ci_level: self.ci_level,
            ..FitOptions::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    #[arg(long, value_enum, default_value_t = ModelArg::Mtp)]
    pub model: ModelArg,
}

#[derive(Debug, Clone, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Summary CSV path (overrides the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Families to fit (overrides the config), comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_family)]
    pub family: Vec<Family>,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// Generating family.
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    /// Gamma/Weibull shape or lognormal variance.
    #[arg(long)]
    pub shape: Option<f64>,
    /// GG scale (with --k).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// GG shape (with --sigma).
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Replicate index within the seed.
    #[arg(long, default_value_t = 0)]
    pub rep: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse::<Family>().map_err(|e| e.to_string())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Select(a) => cmd_select(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Generate(a) => cmd_generate(a),
    }
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, bytes)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Input(format!("cannot write to stdout: {e}"))),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Vec<u8>, CliError> {
    let mut s = serde_json::to_vec_pretty(v).map_err(|e| CliError::Input(e.to_string()))?;
    s.push(b'\n');
    Ok(s)
}

fn load(a: &DataArgs) -> Result<data::TableData, CliError> {
    let opts = a.options();
    opts.validate()?;
    let t = data::read_csv_file(&a.data, &a.outcome, &a.binary_covars, &a.cont_covars, a.center)?;
    t.dataset.check_two_part()?;
    Ok(t)
}

pub fn cmd_fit(a: &FitArgs) -> Result<(), CliError> {
    let t = load(&a.data)?;
    let opts = a.data.options();
    let fit = match a.model {
        ModelArg::Mtp => fit_mtp(&t.dataset, a.family, &opts)?,
        ModelArg::Tp => fit_tp(&t.dataset, a.family, &opts)?,
    };
    let rep = report::FitReport::new(&t, &fit);
    write_output(a.data.out.as_deref(), &to_json(&rep)?)?;
    if fit.converged {
        Ok(())
    } else {
        Err(CliError::NotConverged(format!("{} fit did not converge: {}", fit.family, fit.status)))
    }
}

pub fn cmd_select(a: &SelectArgs) -> Result<(), CliError> {
    let t = load(&a.data)?;
    let sel = select_model(&t.dataset, &a.data.options())?;
    let rep = report::SelectReport::new(&t, &sel);
    write_output(a.data.out.as_deref(), &to_json(&rep)?)?;
    if sel.ranking.is_empty() {
        Err(CliError::NotConverged("no family converged".into()))
    } else {
        Ok(())
    }
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let cfg = study::StudyConfig::load(&a.config)?;
    let plan = cfg.plan(&study::Overrides {
        out: a.out.clone(),
        seed: a.seed,
        reps: a.reps,
        workers: a.workers,
        families: a.family.clone(),
    })?;
    let (summaries, manifest) = study::run_plan(&plan)?;
    let file = File::create(&plan.out)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", plan.out.display())))?;
    study::write_summary_csv(file, &summaries)?;
    write_output(Some(&study::manifest_path(&plan.out)), &to_json(&manifest)?)
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<(), CliError> {
    let shape = match (a.family, a.shape, a.sigma, a.k) {
        (Family::Gg, None, Some(sigma), Some(k)) => ScenarioShape::Gg { sigma, k },
        (Family::Gg, ..) => return Err(CliError::Input("family gg needs --sigma and --k".into())),
        (_, Some(s), None, None) => ScenarioShape::Natural(s),
        (f, ..) => return Err(CliError::Input(format!("family {f} needs --shape only"))),
    };
    let mut s = SimScenario::new(a.family, shape, a.n).with_seed(a.seed).with_reps(a.rep + 1);
    if let Some(b2) = a.beta2 {
        s = s.with_beta2(b2);
    }
    let d = gen_dataset(&s, a.rep).map_err(|e| CliError::Input(e.to_string()))?;
    let mut buf = Vec::new();
    data::write_sim_dataset(&mut buf, &d)?;
    write_output(a.out.as_deref(), &buf)
}
