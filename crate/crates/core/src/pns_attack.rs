//! Soft and hard photon-number-splitting transforms.
//!
//! At strength `x`, the soft attack steals one photon from a multi-photon
//! pulse; the hard attack additionally blocks single-photon pulses. On the
//! truncated distribution both act as row-stochastic rearrangements, so total
//! probability is conserved exactly.

use crate::error::{Error, Result};
use crate::photon_stats::PhotonDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackKind {
    None,
    Soft,
    Hard,
}

impl AttackKind {
    pub fn name(&self) -> &'static str {
        match self {
            AttackKind::None => "none",
            AttackKind::Soft => "soft",
            AttackKind::Hard => "hard",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackSpec {
    pub kind: AttackKind,
    /// Attack ratio in [0, 1]; fraction of affected pulses.
    pub x: f64,
}

impl AttackSpec {
    pub fn none() -> Self {
        Self {
            kind: AttackKind::None,
            x: 0.0,
        }
    }

    pub fn soft(x: f64) -> Self {
        Self {
            kind: AttackKind::Soft,
            x,
        }
    }

    pub fn hard(x: f64) -> Self {
        Self {
            kind: AttackKind::Hard,
            x,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.x) {
            return Err(Error::domain("AttackSpec.x", self.x, "[0, 1]"));
        }
        Ok(())
    }

    /// Strength actually applied; `None` behaves as x = 0.
    pub fn effective_x(&self) -> f64 {
        match self.kind {
            AttackKind::None => 0.0,
            _ => self.x,
        }
    }
}

/// Transform a distribution under an attack of strength `x`.
///
/// Soft:  P0' = P0, P1' = P1 + x P2, P2' = (1-x) P2 + x P3, P3' = (1-x) P3.
/// Hard:  same, except P0' = P0 + x P1 and P1' = (1-x) P1 + x P2.
/// Nothing feeds P3 because the distribution is truncated at n = 3.
pub fn apply_attack(d: &PhotonDistribution, a: &AttackSpec) -> Result<PhotonDistribution> {
    a.validate()?;
    let x = a.effective_x();
    let [p0, p1, p2, p3] = d.probabilities();
    let q = match a.kind {
        AttackKind::None => [p0, p1, p2, p3],
        AttackKind::Soft => [
            p0,
            p1 + x * p2,
            (1.0 - x) * p2 + x * p3,
            (1.0 - x) * p3,
        ],
        AttackKind::Hard => [
            p0 + x * p1,
            (1.0 - x) * p1 + x * p2,
            (1.0 - x) * p2 + x * p3,
            (1.0 - x) * p3,
        ],
    };
    PhotonDistribution::from_probabilities(q)
}

/// Default guard on the post-attack mean when computing signatures.
///
/// A full hard attack on a dim source leaves `mu' = P2 + 2 P3`, typically a
/// percent of the original mean; the g2 value computed there blows up and any
/// finite-sample estimate of it is dominated by noise. Such sweep points are
/// refused rather than reported. 1e-3 keeps every realistic source point
/// except exactly that pathological one.
pub const MU_DIVERGENCE_GUARD: f64 = 1e-3;

/// Absolute changes `(|g2' - g2|, |mu' - mu|)` induced by an attack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackSignature {
    pub delta_g2: f64,
    pub delta_mu: f64,
}

/// Attack signature with the default divergence guard.
pub fn attack_signature(d: &PhotonDistribution, a: &AttackSpec) -> Result<AttackSignature> {
    attack_signature_with_guard(d, a, MU_DIVERGENCE_GUARD)
}

/// Attack signature refusing any point where pre- or post-attack mean falls
/// at or below `mu_guard`.
pub fn attack_signature_with_guard(
    d: &PhotonDistribution,
    a: &AttackSpec,
    mu_guard: f64,
) -> Result<AttackSignature> {
    if d.mu() <= mu_guard {
        return Err(Error::DegenerateMean {
            mu: d.mu(),
            tolerance: mu_guard,
        });
    }
    let attacked = apply_attack(d, a)?;
    if attacked.mu() <= mu_guard {
        return Err(Error::DegenerateMean {
            mu: attacked.mu(),
            tolerance: mu_guard,
        });
    }
    let g2_pre = d.g2_exact()?;
    let g2_post = attacked.g2_exact()?;
    Ok(AttackSignature {
        delta_g2: (g2_post - g2_pre).abs(),
        delta_mu: (attacked.mu() - d.mu()).abs(),
    })
}
