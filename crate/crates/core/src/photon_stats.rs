//! Truncated photon-number distributions for pulsed single-photon sources.
//!
//! A source is characterized by its quantum efficiency (single-photon emission
//! probability), g2(0) and g3(0,0). Emission is truncated at n = 3 and the
//! multi-photon bounds are saturated:
//!
//! ```text
//! P1 = QE,   P2 = mu^2 g2 / 2,   P3 = mu^3 g3 / 6,   P0 = 1 - P1 - P2 - P3
//! ```
//!
//! with the mean photon number `mu = sum n P_n` resolved self-consistently by
//! fixed-point iteration. Saturating the bounds is the worst case for security
//! and is what makes measured (QE, g2, g3) triples reproduce published
//! distributions.
//!
//! Note the moment value of the constructed distribution is
//! `g2_exact = g2 + mu * g3`, slightly above the input parameter whenever
//! g3 > 0. Everything downstream (attack signatures, monitoring references)
//! consistently uses the moment value.

use crate::error::{Error, Result};

/// Convergence threshold for the mean-photon-number fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-12;
/// Iteration cap for the fixed point.
pub const MAX_ITERATIONS: u32 = 10_000;
/// Below this mean, normalized correlations are treated as divergent.
pub const MU_TOLERANCE: f64 = 1e-15;
/// Normalization slack accepted when constructing a distribution.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Measured characterization of a pulsed emitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceParams {
    /// Probability that a pulse carries exactly one photon.
    pub quantum_efficiency: f64,
    /// Second-order correlation at zero delay.
    pub g2: f64,
    /// Third-order correlation at zero delays.
    pub g3: f64,
    /// Pulse repetition rate in Hz.
    pub repetition_rate: f64,
}

impl SourceParams {
    pub fn new(quantum_efficiency: f64, g2: f64, g3: f64, repetition_rate: f64) -> Self {
        Self {
            quantum_efficiency,
            g2,
            g3,
            repetition_rate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.quantum_efficiency) {
            return Err(Error::domain(
                "quantum_efficiency",
                self.quantum_efficiency,
                "[0, 1]",
            ));
        }
        // Sub-Poissonian sources have g2 < 1 but values >= 1 stay legal.
        if !(self.g2 >= 0.0) {
            return Err(Error::domain("g2", self.g2, "[0, inf)"));
        }
        if !(self.g3 >= 0.0) {
            return Err(Error::domain("g3", self.g3, "[0, inf)"));
        }
        if !(self.repetition_rate > 0.0) {
            return Err(Error::domain(
                "repetition_rate",
                self.repetition_rate,
                "(0, inf)",
            ));
        }
        Ok(())
    }
}

/// Photon-number probabilities for n in {0, 1, 2, 3} plus the implied mean.
///
/// The mean is always recomputed from the probabilities, never stored
/// independently, so the two cannot drift apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonDistribution {
    p: [f64; 4],
    mu: f64,
}

impl PhotonDistribution {
    /// Build from raw probabilities, checking domain and normalization.
    pub fn from_probabilities(p: [f64; 4]) -> Result<Self> {
        for (n, &pn) in p.iter().enumerate() {
            if !(0.0..=1.0).contains(&pn) {
                let name = ["P0", "P1", "P2", "P3"][n];
                return Err(Error::domain(name, pn, "[0, 1]"));
            }
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::domain("sum(P_n)", sum, "1 +/- 1e-12"));
        }
        let mu = p[1] + 2.0 * p[2] + 3.0 * p[3];
        Ok(Self { p, mu })
    }

    pub fn vacuum() -> Self {
        Self {
            p: [1.0, 0.0, 0.0, 0.0],
            mu: 0.0,
        }
    }

    /// Probability of emitting exactly `n` photons (0 for n > 3).
    pub fn p(&self, n: usize) -> f64 {
        if n < 4 {
            self.p[n]
        } else {
            0.0
        }
    }

    pub fn probabilities(&self) -> [f64; 4] {
        self.p
    }

    /// Mean photon number, `sum n P_n`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// First three factorial moments `(<n>, <n(n-1)>, <n(n-1)(n-2)>)`.
    pub fn moments(&self) -> (f64, f64, f64) {
        let m1 = self.mu;
        let m2f = 2.0 * self.p[2] + 6.0 * self.p[3];
        let m3f = 6.0 * self.p[3];
        (m1, m2f, m3f)
    }

    /// Exact second-order correlation `<n(n-1)> / <n>^2`.
    pub fn g2_exact(&self) -> Result<f64> {
        let (m1, m2f, _) = self.moments();
        if m1 <= MU_TOLERANCE {
            return Err(Error::DegenerateMean {
                mu: m1,
                tolerance: MU_TOLERANCE,
            });
        }
        Ok(m2f / (m1 * m1))
    }

    /// Exact third-order correlation `<n(n-1)(n-2)> / <n>^3`.
    pub fn g3_exact(&self) -> Result<f64> {
        let (m1, _, m3f) = self.moments();
        if m1 <= MU_TOLERANCE {
            return Err(Error::DegenerateMean {
                mu: m1,
                tolerance: MU_TOLERANCE,
            });
        }
        Ok(m3f / (m1 * m1 * m1))
    }
}

/// Construct the truncated distribution implied by a source characterization.
///
/// `mu` solves `mu = QE + g2 mu^2 + g3 mu^3 / 2` by fixed-point iteration
/// starting from `mu = QE`; the iteration stops once successive values differ
/// by less than [`FIXED_POINT_TOL`].
pub fn build_distribution(src: &SourceParams) -> Result<PhotonDistribution> {
    src.validate()?;
    let p1 = src.quantum_efficiency;
    let mut mu = p1;
    let mut converged = false;
    let mut iterations = 0u32;
    while iterations < MAX_ITERATIONS {
        let next = p1 + src.g2 * mu * mu + 0.5 * src.g3 * mu * mu * mu;
        iterations += 1;
        let step = (next - mu).abs();
        mu = next;
        if !(0.0..=3.0).contains(&mu) {
            return Err(Error::NonConvergent {
                last_mu: mu,
                iterations,
            });
        }
        if step < FIXED_POINT_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergent {
            last_mu: mu,
            iterations,
        });
    }

    let p2 = 0.5 * mu * mu * src.g2;
    let p3 = mu * mu * mu * src.g3 / 6.0;
    let p0 = 1.0 - p1 - p2 - p3;
    if p0 < 0.0 {
        return Err(Error::InvalidDistribution { p0 });
    }
    PhotonDistribution::from_probabilities([p0, p1, p2, p3])
}
