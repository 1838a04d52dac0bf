//! `qswitch`: quantum-switch discrimination experiments from the command line.

mod commands;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "qswitch",
    version,
    about = "Commute / anti-commute discrimination with a superposition of gate orders"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every random stream the command uses.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Print one JSON document on stdout instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// JSON file of noise parameters; missing keys take their defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub noise: Option<PathBuf>,
    /// Directory for CSV/JSON outputs (created if needed).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Sample count; accepts forms like `1e4`.
    #[arg(long, global = true, value_name = "N", value_parser = parse_count)]
    pub samples: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ideal exit-port probabilities and verdict for one gate pair.
    Discriminate {
        #[arg(long, value_name = "GATE")]
        u1: String,
        #[arg(long, value_name = "GATE")]
        u2: String,
        /// Input polarization (default D, i.e. |+⟩).
        #[arg(long, value_name = "STATE", default_value = "D")]
        state: String,
    },
    /// Simulate a measurement suite: pauli, random100 or statesweep.
    Suite {
        which: String,
        /// Angle table to use instead of the built-in one.
        #[arg(long, value_name = "FILE")]
        table: Option<PathBuf>,
        /// Ignore --noise and use perfect visibility, no drift, equal detectors.
        #[arg(long)]
        noiseless: bool,
    },
    /// Best fixed-order success probability, its evaluation on the random
    /// pairs, and the gap to the simulated switch.
    Bound {
        #[arg(long, value_name = "FILE")]
        table: Option<PathBuf>,
        #[arg(long, value_name = "N")]
        max_iterations: Option<usize>,
        #[arg(long, value_name = "TOL")]
        primal_tol: Option<f64>,
        #[arg(long, value_name = "TOL")]
        gap_tol: Option<f64>,
    },
    /// Quarter-half-quarter waveplate angles for a gate.
    Compile { gate: String },
    /// Haar-random commuting and anti-commuting pairs (--samples per class).
    SamplePairs,
}

fn parse_count(s: &str) -> Result<usize, String> {
    if let Ok(n) = s.parse::<usize>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => Ok(v as usize),
        _ => Err(format!("'{s}' is not a non-negative whole number")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let g = &cli.global;
    let result = match &cli.command {
        Command::Discriminate { u1, u2, state } => commands::discriminate(g, u1, u2, state),
        Command::Suite { which, table, noiseless } => commands::suite(g, which, table.as_deref(), *noiseless),
        Command::Bound { table, max_iterations, primal_tol, gap_tol } => {
            commands::bound(g, table.as_deref(), *max_iterations, *primal_tol, *gap_tol)
        }
        Command::Compile { gate } => commands::compile(g, gate),
        Command::SamplePairs => commands::sample_pairs(g),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
