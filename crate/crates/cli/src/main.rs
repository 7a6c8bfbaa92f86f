//! `coarse-manifold`: batch front end for saddle finding, continuation and
//! manifold fitting.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use coarse_manifold::{Error, ManifoldKind};
use thiserror::Error as ThisError;

use crate::commands::Output;
use crate::config::{parse_override, RunConfig};

/// Exit code when the acceptance suite ran but some criterion failed.
const EXIT_CRITERIA: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Environment variable capping the worker pool.
const THREADS_ENV: &str = "COARSE_MANIFOLD_THREADS";

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Numerical {
        context: &'static str,
        #[source]
        source: Error,
    },
}

impl CliError {
    /// Wraps a library error with the stage it came from. Errors caused by
    /// bad input stay configuration errors.
    pub fn numerical(context: &'static str) -> impl Fn(Error) -> CliError {
        move |e| match e {
            Error::InvalidConfig(_) | Error::InvalidBasis(_) | Error::Io(_) | Error::Json(_) | Error::Dimension { .. } => {
                CliError::Config(format!("{context}: {e}"))
            }
            source => CliError::Numerical { context, source },
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical { .. } => EXIT_NUMERICAL,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::numerical("model")(e)
    }
}

#[derive(Parser, Debug)]
#[command(version, about = "Coarse saddles and their invariant manifolds for black-box simulators", long_about = None)]
struct Cli {
    /// Flat JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one config key; the value is parsed as JSON, else taken as a string.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_override, global = true)]
    set: Vec<(String, String)>,

    /// Omit the `# generated` header line from CSV output.
    #[arg(long, global = true)]
    no_timestamp: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Stable,
    Unstable,
}

impl From<Kind> for ManifoldKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Stable => ManifoldKind::Stable,
            Kind::Unstable => ManifoldKind::Unstable,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Newton solve for a coarse fixed point; prints it with its spectrum as JSON.
    Saddle {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pseudo-arclength continuation in a parameter; writes the branch CSV
    /// and reports stability changes on stderr.
    Continue {
        #[arg(long)]
        param: Option<String>,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        ds: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fits the stable manifold graph. Writes the model JSON, `<stem>.report.json`
    /// and `<stem>.surface.csv`.
    FitStable {
        #[arg(long)]
        degree: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fits the unstable manifold graph; outputs as for `fit-stable`.
    FitUnstable {
        #[arg(long)]
        degree: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solves the invariance equation of the mean-field ODE by collocation.
    OdeManifold {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Iterates the coarse map and writes the trajectory CSV.
    Simulate {
        /// Initial state, or graph coordinates when `--on-manifold` is given.
        #[arg(long, allow_hyphen_values = true)]
        init: Option<String>,
        /// Start on this manifold: a state is projected onto the graph first.
        #[arg(long)]
        on_manifold: Option<PathBuf>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the acceptance criteria and prints measured against expected values.
    Verify {
        /// `paper` runs everything, `deterministic` skips the kMC criterion.
        #[arg(long, default_value = "paper")]
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn path_string(p: &Option<PathBuf>) -> Option<String> {
    p.as_ref().map(|p| p.to_string_lossy().into_owned())
}

/// Subcommand flags behave like `--set` entries applied last.
fn flag_overrides(cmd: &Command) -> Vec<(String, String)> {
    let mut v = Vec::new();
    let mut put = |k: &str, val: Option<String>| {
        if let Some(val) = val {
            v.push((k.to_string(), val));
        }
    };
    match cmd {
        Command::Saddle { out } | Command::OdeManifold { out, .. } | Command::Verify { out, .. } => {
            put("out", path_string(out).map(|s| serde_json::to_string(&s).expect("string")));
        }
        Command::Continue { param, from, to, ds, out } => {
            put("param", param.as_ref().map(|s| serde_json::to_string(s).expect("string")));
            put("from", from.map(|x| x.to_string()));
            put("to", to.map(|x| x.to_string()));
            put("ds", ds.map(|x| x.to_string()));
            put("out", path_string(out).map(|s| serde_json::to_string(&s).expect("string")));
        }
        Command::FitStable { degree, out } | Command::FitUnstable { degree, out } => {
            put("degree", degree.map(|d| d.to_string()));
            put("out", path_string(out).map(|s| serde_json::to_string(&s).expect("string")));
        }
        Command::Simulate { steps, out, .. } => {
            put("steps", steps.map(|s| s.to_string()));
            put("out", path_string(out).map(|s| serde_json::to_string(&s).expect("string")));
        }
    }
    v
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // a second build in the same process fails harmlessly
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn run(cli: Cli) -> Result<u8, CliError> {
    init_threads()?;
    let mut overrides = cli.set.clone();
    overrides.extend(flag_overrides(&cli.command));
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    let out = Output { timestamp: !cli.no_timestamp };
    match cli.command {
        Command::Saddle { .. } => commands::saddle(&cfg)?,
        Command::Continue { .. } => commands::continuation(&cfg, &out)?,
        Command::FitStable { .. } => commands::fit(&cfg, ManifoldKind::Stable, cfg.degree, &out)?,
        Command::FitUnstable { .. } => commands::fit(&cfg, ManifoldKind::Unstable, cfg.degree, &out)?,
        Command::OdeManifold { kind, .. } => commands::ode_manifold(&cfg, kind.into())?,
        Command::Simulate { init, on_manifold, .. } => {
            let init = init.as_deref().map(commands::parse_vector).transpose()?;
            commands::simulate(&cfg, init, on_manifold.as_deref(), &out)?
        }
        Command::Verify { suite, .. } => {
            if !commands::verify(&cfg, &suite)? {
                return Ok(EXIT_CRITERIA);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
