//! `hypman`: stable/unstable manifolds, billiards and geodesic flows from
//! JSON configs.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{BilliardMode, GeodesicMode, RunConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad command line or config; exit 64.
    Usage(String),
    Core(hypman_core::Error),
    Io(String),
    /// A check ran and did not pass.
    Failed(String),
}

impl From<hypman_core::Error> for CliError {
    fn from(e: hypman_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use hypman_core::Error as E;
        match self {
            CliError::Usage(_) => 64,
            CliError::Core(E::NotHyperbolic(_)) => 2,
            CliError::Core(E::NoConvergence { .. }) => 3,
            CliError::Core(E::EclipseViolation) => 4,
            CliError::Core(E::InvalidBounds(_)) => 5,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hypman", version, about = "Stable and unstable manifolds of hyperbolic systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Local (and optionally global) stable/unstable manifolds.
    Manifold {
        #[command(flatten)]
        common: Common,
    },
    /// Rasters of points whose backward orbit stays in the unit ball.
    Dynchar {
        #[command(flatten)]
        common: Common,
    },
    /// Billiard trajectories, trapped sets and period-2 reports.
    Billiard {
        /// Overrides the `mode` of the config.
        #[arg(value_enum)]
        mode: Option<BilliardMode>,
        #[command(flatten)]
        common: Common,
    },
    /// Geodesic flow, cone checks and stable/unstable directions.
    Geodesic {
        #[arg(value_enum)]
        mode: Option<GeodesicMode>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the invariant checks of every module.
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Manifold { common }
            | Command::Dynchar { common }
            | Command::Billiard { common, .. }
            | Command::Geodesic { common, .. }
            | Command::Verify { common } => common,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = cli.command.common();
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size the worker pool: {e}")))?;
    }
    let cfg = RunConfig::load(&common.config)?;
    std::fs::create_dir_all(&common.out)?;
    let out = common.out.as_path();
    match &cli.command {
        Command::Manifold { .. } => commands::manifold::run(&cfg, out),
        Command::Dynchar { .. } => commands::dynchar::run(&cfg, out),
        Command::Billiard { mode, .. } => commands::billiard::run(&cfg, *mode, out),
        Command::Geodesic { mode, .. } => commands::geodesic::run(&cfg, *mode, out),
        Command::Verify { .. } => commands::verify::run(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hypman: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
