use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;
mod specs;

use commands::{bounds, counterexample, ee3d, geometry, trace1d};
use config::ConfigFile;
use error::CliError;

/// Spectral traces of Fermi projections: 1D sine-kernel sweeps, 3D Landau
/// reductions, geometry checks and counterexample domains.
#[derive(Parser, Debug)]
#[command(name = "fermi-ee", version)]
struct Cli {
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (falls back to the config file, then FERMI_EE_WORKERS).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Traces of f(A_{LΩ}) for the sine kernel over a range of scales.
    Trace1d(trace1d::Trace1dArgs),
    /// Reduced 3D trace in a constant magnetic field against its prediction.
    Ee3d(ee3d::Ee3dArgs),
    /// Sampled geometric integrals against closed forms.
    Geometry(geometry::GeometryArgs),
    /// Decay sequences, ε₀(L) and measured error terms of zigzag prisms.
    Counterexample(counterexample::CounterexampleArgs),
    /// Checks of the convolution bound 2^m m!.
    Bounds(bounds::BoundsArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    config::install_pool(config::resolve_workers(cli.workers, &file)?)?;
    eprintln!("fermi-ee: {} worker(s)", rayon::current_num_threads());
    match &cli.command {
        Command::Trace1d(a) => trace1d::run(&config::merge(a, file.section("trace1d"), "trace1d")?, &a.out),
        Command::Ee3d(a) => ee3d::run(&config::merge(a, file.section("ee3d"), "ee3d")?, &a.out),
        Command::Geometry(a) => geometry::run(&config::merge(a, file.section("geometry"), "geometry")?, &a.out),
        Command::Counterexample(a) => {
            counterexample::run(&config::merge(a, file.section("counterexample"), "counterexample")?, &a.out)
        }
        Command::Bounds(a) => bounds::run(&config::merge(a, file.section("bounds"), "bounds")?, &a.out),
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
