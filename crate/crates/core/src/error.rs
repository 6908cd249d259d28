//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The mean-photon-number iteration failed to settle or left [0, 3].
    #[error("mean photon number iteration did not converge (last mu = {last_mu}, {iterations} iterations)")]
    NonConvergent { last_mu: f64, iterations: u32 },

    /// Source parameters are mutually inconsistent (computed P0 < 0).
    #[error("source parameters are mutually inconsistent: computed P0 = {p0} < 0")]
    InvalidDistribution { p0: f64 },

    /// Mean photon number too small for normalized correlations to be meaningful.
    #[error("mean photon number {mu} at or below {tolerance}; normalized correlations diverge")]
    DegenerateMean { mu: f64, tolerance: f64 },

    /// Total gain is zero, so yields and error rates are undefined.
    #[error("total gain is zero; QBER and rates are undefined")]
    DegenerateGain,

    /// The monitoring reference value must be positive.
    #[error("reference g2 {reference_g2} must be positive")]
    DegenerateReference { reference_g2: f64 },

    /// The link can never accumulate the requested number of photons.
    #[error("link cannot accumulate photons: {reason}")]
    InfeasibleLink { reason: &'static str },

    /// Every side peak of the coincidence histogram is empty.
    #[error("no coincidences in any side peak; cannot normalize g2")]
    InsufficientCoincidences,

    /// An argument fell outside its documented domain.
    #[error("{name} = {value} outside domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            domain,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
