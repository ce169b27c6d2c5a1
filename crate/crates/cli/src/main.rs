//! `mmit`: probe-response spectra of an atom-opto-magnomechanical cavity.
//!
//! Every failure prints exactly one line to stderr,
//! `error: kind=<kind> code=<exit code> message=<text>`, and exits with 2
//! (configuration), 3 (steady state did not converge) or 4 (singular
//! system, pole, or finite-difference step too large).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mmit::config::OutputFormat;
use mmit::response::Engine;

#[derive(Parser, Debug)]
#[command(name = "mmit", version, about = "Probe absorption, dispersion, transmission and group delay spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep δ and write the full response table.
    Spectrum {
        #[command(flatten)]
        common: Common,
    },
    /// Group delay with its step-halving check, on the grid or at given δ.
    Delay {
        #[command(flatten)]
        common: Common,
        /// Probe detunings in rad/s (repeatable); defaults to the sweep grid.
        #[arg(long = "at", value_name = "RAD_S", num_args = 1..)]
        at: Vec<f64>,
    },
    /// Solve the zero-order problem of a raw-drive configuration.
    SteadyState {
        #[command(flatten)]
        common: Common,
    },
    /// Detect transparency windows in the absorption spectrum.
    Windows {
        #[command(flatten)]
        common: Common,
        /// Minimum window depth as a fraction of the absorption range.
        #[arg(long)]
        prominence: Option<f64>,
    },
    /// Compare c₋ from the three engines point by point.
    Compare {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Run configuration (key = value, frequencies in Hz).
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    #[arg(long, value_parser = parse_engine)]
    pub engine: Option<Engine>,
    /// Override G_c/2π in Hz (`re` or `re+imj`).
    #[arg(long, value_name = "HZ", allow_hyphen_values = true)]
    pub gc: Option<String>,
    /// Override G_n/2π in Hz (`re` or `re+imj`).
    #[arg(long, value_name = "HZ", allow_hyphen_values = true)]
    pub gn: Option<String>,
    /// Number of sweep points.
    #[arg(long)]
    pub points: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    pub format: Option<OutputFormat>,
    /// Worker threads for the sweep.
    #[arg(long)]
    pub threads: Option<usize>,
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    s.parse()
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse()
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn fail(kind: &str, code: u8, message: &str) -> ExitCode {
    eprintln!("error: kind={kind} code={code} message={}", one_line(message));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text.split("\n\n").next().unwrap_or("invalid arguments");
            return fail("usage", mmit::EXIT_CONFIG as u8, first.trim_start_matches("error: "));
        }
    };

    let result = match cli.command {
        Command::Spectrum { common } => commands::spectrum(&common),
        Command::Delay { common, at } => commands::delay(&common, &at),
        Command::SteadyState { common } => commands::steady_state(&common),
        Command::Windows { common, prominence } => commands::windows(&common, prominence),
        Command::Compare { common } => commands::compare(&common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), e.exit_code() as u8, &e.to_string()),
    }
}
