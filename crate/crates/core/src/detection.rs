//! Attack detection from monitored g2 statistics, and photon-accumulation
//! waiting times for lossy links.

use crate::error::{Error, Result};
use crate::sampling::RunStatistics;

/// Default relative deviation that raises an alarm (the estimator itself is
/// converged to within 3% at usable sample counts, so smaller shifts are not
/// distinguishable from noise).
pub const DEFAULT_THRESHOLD: f64 = 0.03;
/// Default significance requirement in units of the per-run spread.
pub const DEFAULT_K_SIGMA: f64 = 3.0;

/// Outcome of comparing a measured g2 ensemble to a reference value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationVerdict {
    pub reference_g2: f64,
    pub measured_g2: f64,
    pub measured_std: f64,
    pub relative_deviation: f64,
    pub threshold: f64,
    pub k_sigma: f64,
    pub alarm: bool,
    /// Runs excluded because their sample mean was zero.
    pub n_degenerate_runs: usize,
}

/// Flag a photon-number-splitting attack when the measured mean deviates from
/// the reference by more than `threshold` (relative) AND by more than
/// `k_sigma` per-run standard deviations. The second condition suppresses
/// false alarms when the estimator spread is still large at small sample
/// counts. Deviation direction does not matter.
pub fn detect_attack(
    reference_g2: f64,
    measured: &RunStatistics,
    threshold: f64,
    k_sigma: f64,
) -> Result<DeviationVerdict> {
    if !(reference_g2 > 0.0) {
        return Err(Error::DegenerateReference { reference_g2 });
    }
    if !(threshold >= 0.0) {
        return Err(Error::domain("threshold", threshold, "[0, inf)"));
    }
    if !(k_sigma >= 0.0) {
        return Err(Error::domain("k_sigma", k_sigma, "[0, inf)"));
    }
    let (Some(mean), Some(std)) = (measured.mean(), measured.std()) else {
        return Err(Error::DegenerateMean {
            mu: 0.0,
            tolerance: 0.0,
        });
    };
    let relative_deviation = (mean - reference_g2).abs() / reference_g2;
    let alarm =
        relative_deviation > threshold && (mean - reference_g2).abs() > k_sigma * std;
    Ok(DeviationVerdict {
        reference_g2,
        measured_g2: mean,
        measured_std: std,
        relative_deviation,
        threshold,
        k_sigma,
        alarm,
        n_degenerate_runs: measured.n_degenerate(),
    })
}

/// Link parameters for accumulating a target number of detections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// Detections required for a stable estimate.
    pub n_required: f64,
    /// Pulse repetition rate in Hz.
    pub repetition_rate: f64,
    /// Mean photon number per pulse.
    pub mu: f64,
    pub loss_db: f64,
    pub detector_efficiency: f64,
}

impl LinkBudget {
    /// Budget with the customary defaults: 1e5 detections at 100 MHz.
    pub fn new(mu: f64, loss_db: f64) -> Self {
        Self {
            n_required: 1e5,
            repetition_rate: 1e8,
            mu,
            loss_db,
            detector_efficiency: 0.9,
        }
    }
}

/// Seconds until `n_required` photons are detected:
/// `T = N / (f (1 - e^-mu) 10^(-loss/10) eta_det)`.
pub fn waiting_time(lb: &LinkBudget) -> Result<f64> {
    if !(lb.n_required > 0.0) {
        return Err(Error::domain("n_required", lb.n_required, "(0, inf)"));
    }
    if !(lb.repetition_rate > 0.0) {
        return Err(Error::InfeasibleLink {
            reason: "repetition rate is zero",
        });
    }
    if !(lb.mu > 0.0) {
        return Err(Error::InfeasibleLink {
            reason: "mean photon number is zero; no pulse ever carries a photon",
        });
    }
    if !(lb.detector_efficiency > 0.0) {
        return Err(Error::InfeasibleLink {
            reason: "detector efficiency is zero",
        });
    }
    if !(lb.loss_db >= 0.0) {
        return Err(Error::domain("loss_db", lb.loss_db, "[0, inf)"));
    }
    let occupied = 1.0 - (-lb.mu).exp();
    let transmission = 10f64.powf(-lb.loss_db / 10.0);
    Ok(lb.n_required / (lb.repetition_rate * occupied * transmission * lb.detector_efficiency))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    pub waiting_time_s: f64,
    pub flyover_s: f64,
    pub feasible: bool,
    pub margin_s: f64,
}

/// A pass is feasible when the waiting time is strictly below the flyover
/// duration.
pub fn satellite_feasible(lb: &LinkBudget, flyover_s: f64) -> Result<Feasibility> {
    if !(flyover_s > 0.0) {
        return Err(Error::domain("flyover_s", flyover_s, "(0, inf)"));
    }
    let t = waiting_time(lb)?;
    Ok(Feasibility {
        waiting_time_s: t,
        flyover_s,
        feasible: t < flyover_s,
        margin_s: flyover_s - t,
    })
}
