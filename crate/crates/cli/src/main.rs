mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::output::Format;

/// Reports for the fractional Yamabe bubble numerics.
#[derive(Debug, Parser)]
#[command(name = "fyk", version)]
struct Cli {
    /// Directory receiving one file per table.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Overrides the command's primary tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// `key = value` file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct IndexArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// alpha, kappa, Green constant and sphere area.
    Constants(IndexArgs),
    /// The nine bubble integrals over C0 against their closed forms.
    Integrals {
        #[command(flatten)]
        index: IndexArgs,
        /// bessel_moments or direct_2d.
        #[arg(long)]
        method: Option<String>,
    },
    /// Sign of the energy coefficient against the dimension gate.
    CoeffScan {
        #[arg(long)]
        n_min: Option<u32>,
        #[arg(long)]
        n_max: Option<u32>,
        #[arg(long)]
        gamma_step: Option<f64>,
    },
    /// Pohozaev identity for the bubble and the limit value for a power field.
    Pohozaev {
        #[command(flatten)]
        index: IndexArgs,
        /// Comma-separated radii.
        #[arg(long)]
        radii: Option<String>,
    },
    /// Weighted finite-volume solves.
    Solve {
        #[command(subcommand)]
        kind: SolveKind,
    },
}

#[derive(Debug, Subcommand)]
pub enum SolveKind {
    /// Bubble extension under refinement.
    Extension {
        #[command(flatten)]
        index: IndexArgs,
        #[arg(long)]
        extent: Option<f64>,
        /// Intervals per axis on the coarsest grid.
        #[arg(long)]
        coarse: Option<usize>,
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Green function decay fit.
    Green {
        #[command(flatten)]
        index: IndexArgs,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        width: Option<f64>,
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// First Dirichlet eigenvalue on half balls.
    Lambda1 {
        #[command(flatten)]
        index: IndexArgs,
        #[arg(long)]
        radii: Option<String>,
        /// Intervals per radius on each axis.
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Linearised correction for a trace-free second fundamental form.
    Linearized {
        #[command(flatten)]
        index: IndexArgs,
        /// `diag(a,b,..)` or `rows(a,b;c,d)`, optionally prefixed by
        /// `tracefree:`.
        #[arg(long, allow_hyphen_values = true)]
        pi: Option<String>,
        #[arg(long)]
        eps_hat: Option<f64>,
        #[arg(long)]
        extent: Option<f64>,
        #[arg(long)]
        resolution: Option<usize>,
    },
}

/// Global settings after merging flags with the config file.
pub struct Settings {
    pub config: Config,
    pub tol: Option<f64>,
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("FYK_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("FYK_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let format = config.get_or("format", cli.format, Format::Csv)?;
    let out = config.pick("out", cli.out)?;
    let tol = config.pick("tol", cli.tol)?;
    if let Some(t) = tol {
        if !(t > 0.0) {
            return Err(CliError::Usage("--tol must be positive".into()));
        }
    }
    let s = Settings { config, tol };
    let report = match cli.command {
        Command::Constants(ix) => commands::constants(&s, &ix)?,
        Command::Integrals { index, method } => commands::integrals(&s, &index, method)?,
        Command::CoeffScan {
            n_min,
            n_max,
            gamma_step,
        } => commands::coeff_scan(&s, n_min, n_max, gamma_step)?,
        Command::Pohozaev { index, radii } => commands::pohozaev(&s, &index, radii)?,
        Command::Solve { kind } => commands::solve(&s, kind)?,
    };
    let stdout = std::io::stdout();
    report.emit(format, out.as_deref(), &mut stdout.lock())?;
    if report.breaches.is_empty() {
        Ok(())
    } else {
        Err(CliError::Tolerance(report.breaches.join("; ")))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fyk: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
