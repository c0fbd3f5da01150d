use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

use config::Common;

#[derive(Parser, Debug)]
#[command(name = "central-field", version, about = "Orbits in softened power-law central fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Relative equilibria and collision fixed points.
    Equilibria(EquilibriaArgs),
    /// Orbit class for one angular momentum.
    Classify(ClassifyArgs),
    /// Energy and angular momentum curves as CSV.
    Portrait(PortraitArgs),
    /// Compare the class functions of a bare and a softened flow.
    Equivalence(EquivalenceArgs),
    /// Integrate one trajectory of the regularized flow.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
pub struct EquilibriaArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Also classify by direct integration; disagreement exits with 3.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Args, Debug)]
pub struct PortraitArgs {
    #[command(flatten)]
    pub common: Common,
    /// Angular momentum grid `start:stop:count`.
    #[arg(long)]
    pub c_grid: Option<String>,
    /// Radii sampled per curve.
    #[arg(long)]
    pub points: Option<u64>,
}

#[derive(Args, Debug)]
pub struct EquivalenceArgs {
    #[command(flatten)]
    pub common: Common,
    /// Flavor of the first flow (default none, i.e. un-softened).
    #[arg(long)]
    pub flavor_a: Option<String>,
    /// Flavor of the second flow (default plain).
    #[arg(long)]
    pub flavor_b: Option<String>,
    #[arg(long)]
    pub samples: Option<u64>,
    /// Run the built-in grid of exponents and softenings.
    #[arg(long)]
    pub sweep: bool,
    /// Exit with 3 when a verdict differs from the expected one.
    #[arg(long)]
    pub assert_paper: bool,
    /// Print the sweep as a text table instead of JSON.
    #[arg(long)]
    pub table: bool,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_negative_numbers = true)]
    pub r0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub v0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub u0: Option<f64>,
    /// Start from `equilibrium` or from the outer `turning` point of `--c`.
    #[arg(long)]
    pub from: Option<String>,
    /// Rescaled time span.
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    /// Rescale (u, v) onto the energy surface instead of rejecting the start.
    #[arg(long)]
    pub project: bool,
    /// `full` (with theta) or `reduced`.
    #[arg(long)]
    pub field: Option<String>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn disagreement(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<central_field::Error> for CliError {
    fn from(e: central_field::Error) -> Self {
        use central_field::Error as E;
        let code = match e {
            E::InvalidParameter { .. }
            | E::Domain(_)
            | E::InvalidSoftening { .. }
            | E::Flavor { .. }
            | E::CExceedsBound { .. }
            | E::EnergyViolation { .. } => 2,
            _ => 4,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Equilibria(a) => commands::equilibria(a),
        Command::Classify(a) => commands::classify(a),
        Command::Portrait(a) => commands::portrait(a),
        Command::Equivalence(a) => commands::equivalence(a),
        Command::Simulate(a) => commands::simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message.replace('\n', " "));
            ExitCode::from(e.code)
        }
    }
}
