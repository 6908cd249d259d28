//! Check a scenario file and print one line per violation.

use crate::app::{AppError, AppResult};
use crate::config::{validate, ScenarioFile};
use crate::presets::PresetTable;
use std::path::PathBuf;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Scenario file to check.
    path: PathBuf,
    /// Extra preset definitions extending the built-in table.
    #[arg(long, value_name = "FILE")]
    presets_file: Option<PathBuf>,
}

pub fn run(args: &Args) -> AppResult<()> {
    let presets = PresetTable::load(args.presets_file.as_deref())?;
    let scenario = match ScenarioFile::load(&args.path) {
        Ok(sc) => sc,
        Err(AppError::Config(diags)) => {
            // Unparseable files are reported as diagnostics, not a crash.
            for d in &diags {
                println!("{d}");
            }
            return Err(AppError::Config(Vec::new()));
        }
        Err(other) => return Err(other),
    };
    let diags = validate(&scenario, &presets);
    for d in &diags {
        println!("{d}");
    }
    if diags.is_empty() {
        Ok(())
    } else {
        // The list itself is the report; exit code 1 signals violations.
        Err(AppError::Config(Vec::new()))
    }
}
