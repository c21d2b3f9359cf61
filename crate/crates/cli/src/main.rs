//! `bmax`: fit aggregation estimators, certify the saddle point and run the
//! Monte-Carlo experiments from the command line.
//!
//! Exit statuses: 0 success, 2 bad configuration, 3 bad data, 4 solver did
//! not converge, 5 a duality or oracle check failed.

mod args;
mod duality;
mod experiment;
mod failure;
mod output;
mod solve;
mod source;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve::run(&a),
        Command::DualityCheck(a) => duality::run(&a),
        Command::Experiment(a) => experiment::run(&a),
        Command::OracleCheck(a) => experiment::run_oracle(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("bmax: {f}");
            f.exit_code()
        }
    }
}
