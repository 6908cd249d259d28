// Negated comparisons are used on purpose in domain checks: NaN must fail
// them and land in the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod app;
mod commands;
mod config;
mod output;
mod presets;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

/// Simulate photon-number-splitting attacks on sub-Poissonian sources,
/// monitor g2 signatures, and compute secret key rates and link budgets.
#[derive(Parser, Debug)]
#[command(name = "g2guard", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep the attack ratio and tabulate estimated photon statistics.
    AttackSweep(commands::attack_sweep::Args),
    /// Secret key rates and waiting time across channel loss.
    Keyrate(commands::keyrate::Args),
    /// Estimator stability across Monte Carlo sample counts.
    Convergence(commands::convergence::Args),
    /// Photon accumulation time and satellite-pass feasibility.
    WaitingTime(commands::waiting_time::Args),
    /// Beam-splitter receiver simulation and coincidence histogram.
    Hbt(commands::hbt::Args),
    /// Compare a measured g2 ensemble against a reference value.
    Detect(commands::detect::Args),
    /// Check a scenario file and list every violation.
    Validate(commands::validate::Args),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            std::process::exit(0);
        }
        Err(e) => {
            // Bad flags are configuration errors.
            eprint!("{e}");
            std::process::exit(1);
        }
    };

    let result = match &cli.command {
        Command::AttackSweep(a) => commands::attack_sweep::run(a),
        Command::Keyrate(a) => commands::keyrate::run(a),
        Command::Convergence(a) => commands::convergence::run(a),
        Command::WaitingTime(a) => commands::waiting_time::run(a),
        Command::Hbt(a) => commands::hbt::run(a),
        Command::Detect(a) => commands::detect::run(a),
        Command::Validate(a) => commands::validate::run(a),
    };

    if let Err(e) = result {
        e.report();
        std::process::exit(e.exit_code());
    }
}
