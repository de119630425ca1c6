//! `mfd-sim`: run hybrid, monolithic or abstract-only simulations of a
//! microfluidic network file and compare their probe readings.

mod failure;
mod probes;
mod report;
mod simulate;

use clap::{Parser, Subcommand, ValueEnum};
use failure::Failure;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(
    name = "mfd-sim",
    version,
    about = "Hybrid lattice Boltzmann / nodal-analysis flow simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Lattice junctions coupled to abstract channels.
    Hybrid,
    /// The whole network on one lattice.
    Cfd,
    /// Nodal analysis only.
    Abstract,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Shape {
    Straight,
    Cross,
    Ladder,
    Comb,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a network file and write fields, probes and a summary.
    Simulate(simulate::Args),
    /// Tabulate probe deviations between two run summaries.
    CompareRuns {
        /// Summary of the run under test (usually hybrid).
        hybrid: PathBuf,
        /// Summary of the reference run (usually cfd).
        cfd: PathBuf,
        /// Report CSV; printed to stdout only when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print one of the built-in example networks as a network file.
    Canonical {
        #[arg(value_enum)]
        shape: Shape,
        /// Arm or rail length in m.
        #[arg(long, default_value_t = 1e-3)]
        length: f64,
        /// Channel width in m.
        #[arg(long, default_value_t = 1e-4)]
        width: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn canonical(shape: Shape, length: f64, width: f64) -> mfd_sim::Network {
    use mfd_sim::netmodel::canonical as c;
    match shape {
        Shape::Straight => c::straight(length, width, 1000.0, 0.0),
        Shape::Cross => c::cross(length, width, 1000.0, 0.0),
        Shape::Ladder => c::ladder(length, width, 1000.0, 500.0, 0.0),
        Shape::Comb => c::comb(length, width, 1000.0, 0.0),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate(args) => simulate::simulate(&args),
        Command::CompareRuns { hybrid, cfd, out } => {
            report::compare_runs(&hybrid, &cfd, out.as_deref())
        }
        Command::Canonical {
            shape,
            length,
            width,
            out,
        } => {
            let doc = mfd_sim::netmodel::to_document(&canonical(shape, length, width));
            let text = serde_json::to_string_pretty(&doc).expect("network document") + "\n";
            match out {
                Some(path) => failure::write(&path, &text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("mfd-sim: {f}");
            ExitCode::from(f.code())
        }
    }
}
