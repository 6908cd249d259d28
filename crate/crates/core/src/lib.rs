//! Simulation and analysis toolkit for QKD with imperfect single-photon
//! sources: photon-number statistics, photon-number-splitting attack models,
//! Monte Carlo estimators for g2/g3, a beam-splitter receiver model, secret
//! key rates, attack detection and link budgets.
//!
//! The Monte Carlo engine is data-parallel over independent runs (rayon,
//! enabled by the default `parallel` feature). Every parallel entry point has
//! a `_seq` twin producing bit-identical output; disabling the feature swaps
//! the primary names over to the sequential implementations.

// Negated comparisons are used on purpose in domain checks: NaN must fail
// them and land in the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detection;
pub mod error;
pub mod hbt;
pub mod keyrate;
pub mod photon_stats;
pub mod pns_attack;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};
pub use photon_stats::{build_distribution, PhotonDistribution, SourceParams};
pub use pns_attack::{apply_attack, attack_signature, AttackKind, AttackSpec};
pub use sampling::{
    estimate_stats, repeated_runs, sample_counts, Counts, Quantity, RunStatistics, SamplingPlan,
};
