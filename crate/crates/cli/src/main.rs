//! `ddtruss`: generate material datasets, fit surrogates and solve trusses
//! from the command line.

mod args;
mod commands;
mod error;
mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use args::{parse_lambdas, LawArgs, OutputArgs, SolverArgs, SurrogateArgs, TrussArgs};
use commands::PathOptions;
use error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "ddtruss",
    version,
    about = "Data-driven truss equilibrium from stress-strain samples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a synthetic stress-strain dataset from a material law.
    Synth {
        #[command(flatten)]
        law: LawArgs,
        /// Number of samples.
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// Strain interval `lo:hi`.
        #[arg(long, default_value = "-0.005:0.005", allow_hyphen_values = true)]
        range: String,
        /// Standard deviation of additive stress noise, Pa.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Strain jitter of interior samples as a fraction of the spacing.
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Fit a surrogate and report its parameters.
    Fit {
        #[command(flatten)]
        surrogate: SurrogateArgs,
        /// Also tabulate the fitted curve at this many evenly spaced strains.
        #[arg(long)]
        dense: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Solve the truss at one load multiplier.
    Solve {
        #[command(flatten)]
        surrogate: SurrogateArgs,
        #[command(flatten)]
        truss: TrussArgs,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        lambda: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Trace the equilibrium path over increasing load multipliers.
    Path {
        #[command(flatten)]
        surrogate: SurrogateArgs,
        #[command(flatten)]
        truss: TrussArgs,
        /// `start:end:count` or a comma-separated list.
        #[arg(long, default_value = "1:10:10", allow_hyphen_values = true)]
        lambda: String,
        /// Displacement component to tabulate, `NODE:x` or `NODE:y`
        /// [default: largest reference load component].
        #[arg(long)]
        dof: Option<String>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the Chebyshev and kernel pipelines side by side and time them.
    Compare {
        #[command(flatten)]
        surrogate: SurrogateArgs,
        #[command(flatten)]
        truss: TrussArgs,
        #[arg(long, default_value = "1:10:10", allow_hyphen_values = true)]
        lambda: String,
        /// Timing repetitions; medians are reported.
        #[arg(long, default_value_t = 1)]
        repeat: usize,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth {
            law,
            n,
            range,
            noise,
            jitter,
            seed,
            out,
        } => commands::synth(&law, n, &range, noise, jitter, seed, &out),
        Command::Fit { surrogate, dense, out } => commands::fit(&surrogate, dense, &out),
        Command::Solve {
            surrogate,
            truss,
            lambda,
            solver,
            out,
        } => commands::solve(&surrogate, &truss, &solver, lambda, &out),
        Command::Path {
            surrogate,
            truss,
            lambda,
            dof,
            solver,
            out,
        } => {
            let lambdas = parse_lambdas(&lambda).map_err(CliError::Usage)?;
            let opts = PathOptions {
                lambdas: &lambdas,
                lambda_spec: &lambda,
                dof: dof.as_deref(),
            };
            commands::path(&surrogate, &truss, &solver, &opts, &out)
        }
        Command::Compare {
            surrogate,
            truss,
            lambda,
            repeat,
            solver,
            out,
        } => {
            let lambdas = parse_lambdas(&lambda).map_err(CliError::Usage)?;
            let opts = PathOptions {
                lambdas: &lambdas,
                lambda_spec: &lambda,
                dof: None,
            };
            commands::compare(&surrogate, &truss, &solver, &opts, repeat, &out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
