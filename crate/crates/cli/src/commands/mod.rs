//! Subcommand implementations.

pub mod attack_sweep;
pub mod convergence;
pub mod detect;
pub mod hbt;
pub mod keyrate;
pub mod validate;
pub mod waiting_time;

use crate::app::{core_err, AppError, AppResult};
use crate::config::{validate as validate_scenario, ScenarioFile};
use crate::output::CsvDoc;
use crate::presets::PresetTable;
use g2guard_core::photon_stats::build_distribution;
use g2guard_core::{PhotonDistribution, SourceParams};
use std::path::PathBuf;

#[derive(clap::Args, Debug, Clone)]
pub struct CommonArgs {
    /// Scenario file supplying any value not given as a flag.
    #[arg(long, value_name = "FILE", global = false)]
    pub config: Option<PathBuf>,
    /// Extra preset definitions extending the built-in table.
    #[arg(long, value_name = "FILE")]
    pub presets_file: Option<PathBuf>,
    /// Output CSV path (stdout when omitted).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

pub struct Ctx {
    pub presets: PresetTable,
    pub scenario: ScenarioFile,
    pub out: Option<PathBuf>,
}

/// Load presets and (when given) the scenario file. A scenario that fails
/// validation aborts before anything executes.
pub fn load_ctx(common: &CommonArgs) -> AppResult<Ctx> {
    let presets = PresetTable::load(common.presets_file.as_deref())?;
    let scenario = match &common.config {
        Some(path) => {
            let sc = ScenarioFile::load(path)?;
            let diags = validate_scenario(&sc, &presets);
            if !diags.is_empty() {
                return Err(AppError::Config(diags));
            }
            sc
        }
        None => ScenarioFile::default(),
    };
    let out = common.out.clone().or_else(|| {
        scenario
            .output
            .as_ref()
            .and_then(|o| o.path.as_ref())
            .map(PathBuf::from)
    });
    Ok(Ctx {
        presets,
        scenario,
        out,
    })
}

pub struct ResolvedSource {
    pub label: String,
    pub params: SourceParams,
    pub g3_derived: bool,
}

/// Source precedence: --preset flag, then the scenario's source section.
pub fn resolve_source(preset_flag: Option<&str>, ctx: &Ctx) -> AppResult<ResolvedSource> {
    if let Some(name) = preset_flag {
        let p = ctx.presets.source(name)?;
        return Ok(ResolvedSource {
            label: name.to_string(),
            params: p.params(),
            g3_derived: p.g3_derived,
        });
    }
    let Some(s) = &ctx.scenario.source else {
        return Err(AppError::config(
            "source: missing (pass --preset or a --config with a [source] section)",
        ));
    };
    if let Some(name) = &s.preset {
        let p = ctx.presets.source(name)?;
        return Ok(ResolvedSource {
            label: name.clone(),
            params: p.params(),
            g3_derived: p.g3_derived,
        });
    }
    // Scenario validation guarantees all four inline fields are present.
    Ok(ResolvedSource {
        label: "inline".to_string(),
        params: SourceParams::new(
            s.quantum_efficiency.unwrap(),
            s.g2.unwrap(),
            s.g3.unwrap(),
            s.repetition_rate_hz.unwrap(),
        ),
        g3_derived: false,
    })
}

pub fn build_source_distribution(src: &ResolvedSource) -> AppResult<PhotonDistribution> {
    build_distribution(&src.params).map_err(core_err("build_distribution"))
}

pub fn describe_source(doc: &mut CsvDoc, src: &ResolvedSource) {
    doc.meta("source", &src.label);
    doc.meta("source.quantum_efficiency", src.params.quantum_efficiency);
    doc.meta("source.g2", src.params.g2);
    doc.meta(
        "source.g3",
        format!(
            "{}{}",
            src.params.g3,
            if src.g3_derived { " (derived from P3)" } else { "" }
        ),
    );
    doc.meta("source.repetition_rate_hz", src.params.repetition_rate);
}

/// Convert a count given as f64 (so 1e7 works on the command line).
pub fn to_count(field: &'static str, v: f64) -> AppResult<u64> {
    if !(v >= 1.0) || (v - v.round()).abs() > 1e-6 || v > 1e18 {
        return Err(AppError::Config(vec![format!(
            "{field}: {v} is not a positive integer count"
        )]));
    }
    Ok(v.round() as u64)
}
