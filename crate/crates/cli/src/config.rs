//! Scenario files: a structured-text mirror of the command-line flags.
//!
//! Every key matches a flag; flags override file values, which override
//! defaults. `validate` reports each violation with its field path and never
//! partially executes anything.

use crate::app::{AppError, AppResult};
use crate::presets::PresetTable;
use g2guard_core::SourceParams;
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub source: Option<SourceSection>,
    pub attack: Option<AttackSection>,
    pub channel: Option<ChannelSection>,
    pub sampling: Option<SamplingSection>,
    pub hbt: Option<HbtSection>,
    pub detection: Option<DetectionSection>,
    pub link: Option<LinkSection>,
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub preset: Option<String>,
    pub quantum_efficiency: Option<f64>,
    pub g2: Option<f64>,
    pub g3: Option<f64>,
    pub repetition_rate_hz: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSection {
    /// "none", "soft" or "hard".
    pub kind: Option<String>,
    pub x: Option<f64>,
    /// start:end:step sweep over the attack ratio.
    pub x_sweep: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub loss_db: Option<f64>,
    pub loss_sweep: Option<String>,
    pub detector_efficiency: Option<f64>,
    pub dark_yield: Option<f64>,
    pub intrinsic_error: Option<f64>,
    pub baseline_error: Option<f64>,
    pub ec_efficiency: Option<f64>,
    pub exact_yield: Option<bool>,
    /// Transmission applied as per-photon thinning in sampling sweeps.
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    pub n_samples: Option<f64>,
    pub n_runs: Option<u64>,
    pub master_seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HbtSection {
    pub n_pulses: Option<f64>,
    pub efficiency: Option<f64>,
    pub dark_click_prob: Option<f64>,
    pub split_ratio: Option<f64>,
    pub max_lag: Option<u32>,
    /// Replace the source with a Poissonian control of this mean.
    pub poisson_mean: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSection {
    pub threshold: Option<f64>,
    pub k_sigma: Option<f64>,
    pub reference_g2: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    pub n_required: Option<f64>,
    pub repetition_rate_hz: Option<f64>,
    pub mu: Option<f64>,
    pub flyover_s: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<String>,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| AppError::config(format!("{}: {e}", path.display())))
    }
}

/// Inclusive start:end:step sweep, or a single value.
pub fn parse_sweep(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.len() {
        1 => {
            let v: f64 = parts[0]
                .trim()
                .parse()
                .map_err(|_| format!("'{spec}' is not a number"))?;
            Ok(vec![v])
        }
        3 => {
            let nums: Vec<f64> = parts
                .iter()
                .map(|p| p.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| format!("'{spec}' is not start:end:step"))?;
            let (start, end, step) = (nums[0], nums[1], nums[2]);
            if !(step > 0.0) {
                return Err(format!("sweep step must be positive, got {step}"));
            }
            if end < start {
                return Err(format!("sweep end {end} below start {start}"));
            }
            let n = ((end - start) / step).round() as usize;
            let mut values: Vec<f64> = (0..=n).map(|i| start + i as f64 * step).collect();
            // Snap the last point onto the endpoint when it lands there.
            if let Some(last) = values.last_mut() {
                if (*last - end).abs() < 1e-9 * step.max(1.0) {
                    *last = end;
                }
            }
            values.retain(|v| *v <= end + 1e-12);
            Ok(values)
        }
        _ => Err(format!("'{spec}' is not a value or start:end:step")),
    }
}

/// Comma-separated counts; scientific notation accepted for round values.
pub fn parse_sizes(spec: &str) -> Result<Vec<u64>, String> {
    spec.split(',')
        .map(|s| {
            let t = s.trim();
            let v: f64 = t.parse().map_err(|_| format!("'{t}' is not a number"))?;
            if !(v >= 1.0) || v.fract() != 0.0 && (v - v.round()).abs() > 1e-6 {
                return Err(format!("'{t}' is not a positive integer"));
            }
            Ok(v.round() as u64)
        })
        .collect()
}

fn check_unit(diags: &mut Vec<String>, field: &str, v: Option<f64>) {
    if let Some(v) = v {
        if !(0.0..=1.0).contains(&v) {
            diags.push(format!("{field}: {v} outside [0, 1]"));
        }
    }
}

fn check_positive(diags: &mut Vec<String>, field: &str, v: Option<f64>) {
    if let Some(v) = v {
        if !(v > 0.0) {
            diags.push(format!("{field}: {v} must be positive"));
        }
    }
}

/// Every violation in the scenario, each tagged with its field path.
pub fn validate(scenario: &ScenarioFile, presets: &PresetTable) -> Vec<String> {
    let mut diags = Vec::new();

    match &scenario.source {
        None => diags.push(
            "source: missing (set source.preset or the inline quantum_efficiency/g2/g3/repetition_rate_hz)"
                .to_string(),
        ),
        Some(s) => {
            let inline = [
                s.quantum_efficiency,
                s.g2,
                s.g3,
                s.repetition_rate_hz,
            ];
            let inline_given = inline.iter().filter(|v| v.is_some()).count();
            match (&s.preset, inline_given) {
                (Some(_), n) if n > 0 => diags.push(
                    "source.preset: give either a preset or inline fields, not both".to_string(),
                ),
                (Some(name), _) => {
                    if !presets.sources.contains_key(name.as_str()) {
                        diags.push(format!("source.preset: unknown preset '{name}'"));
                    }
                }
                (None, 0) => diags.push(
                    "source: missing (set source.preset or the inline fields)".to_string(),
                ),
                (None, n) if n < 4 => diags.push(
                    "source: inline source needs all of quantum_efficiency, g2, g3, repetition_rate_hz"
                        .to_string(),
                ),
                (None, _) => {
                    let params = SourceParams::new(
                        s.quantum_efficiency.unwrap(),
                        s.g2.unwrap(),
                        s.g3.unwrap(),
                        s.repetition_rate_hz.unwrap(),
                    );
                    if let Err(e) = params.validate() {
                        diags.push(format!("source: {e}"));
                    }
                }
            }
        }
    }

    if let Some(a) = &scenario.attack {
        if let Some(kind) = &a.kind {
            if !matches!(kind.as_str(), "none" | "soft" | "hard") {
                diags.push(format!(
                    "attack.kind: '{kind}' is not one of none, soft, hard"
                ));
            }
        }
        if a.x.is_some() && a.x_sweep.is_some() {
            diags.push("attack.x: give either x or x_sweep, not both".to_string());
        }
        if let Some(x) = a.x {
            if !(0.0..=1.0).contains(&x) {
                diags.push(format!("attack.x: {x} outside [0, 1]"));
            }
        }
        if let Some(spec) = &a.x_sweep {
            match parse_sweep(spec) {
                Err(e) => diags.push(format!("attack.x_sweep: {e}")),
                Ok(xs) => {
                    if xs.is_empty() {
                        diags.push("attack.x_sweep: empty sweep".to_string());
                    }
                    for x in xs {
                        if !(0.0..=1.0).contains(&x) {
                            diags.push(format!("attack.x_sweep: point {x} outside [0, 1]"));
                            break;
                        }
                    }
                }
            }
        }
    }

    if let Some(c) = &scenario.channel {
        if c.loss_db.is_some() && c.loss_sweep.is_some() {
            diags.push("channel.loss_db: give either loss_db or loss_sweep, not both".to_string());
        }
        if let Some(l) = c.loss_db {
            if !(l >= 0.0) {
                diags.push(format!("channel.loss_db: {l} must be >= 0"));
            }
        }
        if let Some(spec) = &c.loss_sweep {
            match parse_sweep(spec) {
                Err(e) => diags.push(format!("channel.loss_sweep: {e}")),
                Ok(ls) => {
                    if ls.is_empty() {
                        diags.push("channel.loss_sweep: empty sweep".to_string());
                    }
                    if ls.iter().any(|l| *l < 0.0) {
                        diags.push("channel.loss_sweep: negative loss".to_string());
                    }
                }
            }
        }
        check_unit(&mut diags, "channel.detector_efficiency", c.detector_efficiency);
        check_unit(&mut diags, "channel.dark_yield", c.dark_yield);
        check_unit(&mut diags, "channel.intrinsic_error", c.intrinsic_error);
        check_unit(&mut diags, "channel.baseline_error", c.baseline_error);
        check_unit(&mut diags, "channel.eta", c.eta);
        if let Some(f) = c.ec_efficiency {
            if !(f >= 1.0) {
                diags.push(format!("channel.ec_efficiency: {f} must be >= 1"));
            }
        }
    }

    if let Some(s) = &scenario.sampling {
        if let Some(n) = s.n_samples {
            if !(n >= 1.0) {
                diags.push(format!("sampling.n_samples: {n} must be >= 1"));
            }
        }
        if s.n_runs == Some(0) {
            diags.push("sampling.n_runs: must be >= 1".to_string());
        }
    }

    if let Some(h) = &scenario.hbt {
        check_unit(&mut diags, "hbt.efficiency", h.efficiency);
        check_unit(&mut diags, "hbt.dark_click_prob", h.dark_click_prob);
        check_unit(&mut diags, "hbt.split_ratio", h.split_ratio);
        check_positive(&mut diags, "hbt.poisson_mean", h.poisson_mean);
        if h.max_lag == Some(0) {
            diags.push("hbt.max_lag: must be >= 1".to_string());
        }
        if let (Some(n), Some(lag)) = (h.n_pulses, h.max_lag) {
            if n < (2 * lag + 1) as f64 {
                diags.push(format!(
                    "hbt.n_pulses: {n} shorter than 2*max_lag + 1 = {}",
                    2 * lag + 1
                ));
            }
        }
    }

    if let Some(d) = &scenario.detection {
        if let Some(t) = d.threshold {
            if !(t >= 0.0) {
                diags.push(format!("detection.threshold: {t} must be >= 0"));
            }
        }
        if let Some(k) = d.k_sigma {
            if !(k >= 0.0) {
                diags.push(format!("detection.k_sigma: {k} must be >= 0"));
            }
        }
        check_positive(&mut diags, "detection.reference_g2", d.reference_g2);
    }

    if let Some(l) = &scenario.link {
        check_positive(&mut diags, "link.n_required", l.n_required);
        check_positive(&mut diags, "link.repetition_rate_hz", l.repetition_rate_hz);
        check_positive(&mut diags, "link.mu", l.mu);
        check_positive(&mut diags, "link.flyover_s", l.flyover_s);
    }

    if let Some(o) = &scenario.output {
        if o.path.as_deref() == Some("") {
            diags.push("output.path: empty path".to_string());
        }
    }

    diags
}
