//! Command-line driver for the `trishape` laboratory.
//!
//! Every subcommand reads an optional flat TOML file (`--config`), applies
//! the command-line flags on top, runs one computation and writes CSV or
//! JSON to `--out` or standard output. Identical inputs give byte-identical
//! output. Exit status: 0 on success, 1 when the mathematics rejects the
//! input (collinear start, shape off the hemisphere, ...), 2 on usage errors.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{Format, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<trishape::Error> for CliError {
    fn from(e: trishape::Error) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Domain(e.to_string())
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "trishape",
    version,
    about = "Planar three-body problem with potential -γI/Δ²: shape-sphere geodesics, curvature and N-gon census",
    after_help = "Exit status: 0 success, 1 domain error, 2 usage error.\nLog level: set TRISHAPE_LOG (error, warn, info, debug, trace)."
)]
pub struct Cli {
    /// Flat TOML file of run settings (same keys as the flags, with underscores); flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a zero-energy, zero-momentum solution and write the trajectory
    #[command(after_help = output::TRAJECTORY_HELP)]
    Simulate {
        #[command(flatten)]
        run: RunConfig,
    },
    /// Simulate, project to shape space and check the vertical-plane geodesic property
    #[command(after_help = output::VERIFY_HELP)]
    VerifyGeodesic {
        #[command(flatten)]
        run: RunConfig,
    },
    /// Closed-form hemisphere geodesic between two shapes
    #[command(after_help = output::GEODESIC_HELP)]
    Geodesic {
        /// Start shape w1,w2,w3
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        from: Vec<f64>,
        /// End shape w1,w2,w3 (same sphere and hemisphere as the start)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        to: Vec<f64>,
        #[command(flatten)]
        run: RunConfig,
    },
    /// Gauss curvature of the reduced metric (n = 3) or a sectional-curvature survey (n ≥ 4)
    #[command(after_help = output::CURVATURE_HELP)]
    Curvature {
        #[command(flatten)]
        run: RunConfig,
    },
    /// Monte Carlo census of triple-orientation sign vectors of generic N-gons
    #[command(after_help = output::COMPONENTS_HELP)]
    Components {
        #[command(flatten)]
        run: RunConfig,
    },
    /// Print the initial condition a simulation would start from
    #[command(after_help = output::IC_HELP)]
    Ic {
        #[command(flatten)]
        run: RunConfig,
    },
    /// Paired Klein-disc chords and hemisphere geodesics for plotting
    #[command(after_help = output::KLEIN_HELP)]
    Klein {
        #[command(flatten)]
        run: RunConfig,
    },
}

/// Parse `args` (including the program name), run, and return the exit code.
/// Results go to `stdout` unless `--out` is given; diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(text.as_bytes());
            } else {
                let _ = stderr.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match commands::dispatch(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "trishape: {e}");
            e.exit_code()
        }
    }
}
