//! Named source and link presets, embedded at build time and extendable from
//! a user-supplied file.

use crate::app::{AppError, AppResult};
use g2guard_core::SourceParams;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

pub const EMBEDDED_PRESETS: &str = include_str!("../presets.toml");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourcePreset {
    pub quantum_efficiency: f64,
    pub g2: f64,
    pub g3: f64,
    pub repetition_rate_hz: f64,
    /// g3 back-solved from a published P3 rather than measured.
    #[serde(default)]
    pub g3_derived: bool,
}

impl SourcePreset {
    pub fn params(&self) -> SourceParams {
        SourceParams::new(
            self.quantum_efficiency,
            self.g2,
            self.g3,
            self.repetition_rate_hz,
        )
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkPreset {
    pub loss_db: f64,
    pub flyover_s: f64,
    pub distance_km: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetTable {
    #[serde(default)]
    pub sources: BTreeMap<String, SourcePreset>,
    #[serde(default)]
    pub links: BTreeMap<String, LinkPreset>,
}

impl PresetTable {
    pub fn embedded() -> Self {
        toml::from_str(EMBEDDED_PRESETS).expect("embedded preset table parses")
    }

    /// Embedded table extended/overridden by a user file.
    pub fn load(extra: Option<&Path>) -> AppResult<Self> {
        let mut table = Self::embedded();
        if let Some(path) = extra {
            let text = std::fs::read_to_string(path)
                .map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
            let user: PresetTable = toml::from_str(&text).map_err(|e| {
                AppError::config(format!("{}: {e}", path.display()))
            })?;
            table.sources.extend(user.sources);
            table.links.extend(user.links);
        }
        Ok(table)
    }

    pub fn source(&self, name: &str) -> AppResult<&SourcePreset> {
        self.sources.get(name).ok_or_else(|| {
            let known: Vec<_> = self.sources.keys().cloned().collect();
            AppError::config(format!(
                "source.preset: unknown preset '{name}' (known: {})",
                known.join(", ")
            ))
        })
    }

    pub fn link(&self, name: &str) -> AppResult<&LinkPreset> {
        self.links.get(name).ok_or_else(|| {
            let known: Vec<_> = self.links.keys().cloned().collect();
            AppError::config(format!(
                "link.preset: unknown preset '{name}' (known: {})",
                known.join(", ")
            ))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_table_parses_and_validates() {
        let t = PresetTable::embedded();
        for (name, preset) in &t.sources {
            preset.params().validate().unwrap_or_else(|e| {
                panic!("preset {name} invalid: {e}");
            });
        }
        assert!(t.sources.contains_key("our-hbn"));
        assert!(t.sources.contains_key("hbn-high"));
        assert!(t.sources.contains_key("qd"));
        let micius = t.link("micius").unwrap();
        assert_eq!(micius.loss_db, 38.0);
        assert_eq!(micius.flyover_s, 273.0);
    }

    #[test]
    fn derived_g3_values_are_flagged() {
        let t = PresetTable::embedded();
        assert!(!t.sources["our-hbn"].g3_derived);
        assert!(t.sources["hbn-high"].g3_derived);
        assert!(t.sources["qd"].g3_derived);
    }
}
