//! Yields, gains, QBER and asymptotic secret key rates.
//!
//! Rates compare two post-processing strategies over the same channel model:
//!
//! * the monitored rate, which keeps both single- and two-photon pulses in
//!   the key once correlation monitoring rules out photon-number splitting:
//!   `R = 1/2 [-Qmu h2(Emu) f + Q1 (1 - Phi(2 e1 - 1)) + Q2 (1 - Phi((2 e2 - 1)^2))]`
//! * the GLLP baseline, which treats every multi-photon pulse as tagged:
//!   `R = 1/2 [-Qmu h2(Emu) f + Qmu Omega (1 - h2(Emu / Omega))]` with
//!   `Omega = 1 - P2 / Qmu`.
//!
//! Channel model per n-photon pulse: `eta_n = 1 - (1 - eta_tot)^n`,
//! `Y_n = Y0 + eta_n` (additive dark-count approximation; the exact form
//! `Y0 + eta_n - Y0 eta_n` is available behind a flag), `Q_n = Y_n P_n`,
//! `e_n = (e0 Y0 + e_int eta_n) / Y_n`.

use crate::error::{Error, Result};
use crate::photon_stats::PhotonDistribution;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Channel attenuation in dB; transmission is 10^(-loss_db/10).
    pub loss_db: f64,
    pub detector_efficiency: f64,
    /// Dark-count yield Y0 per pulse.
    pub dark_yield: f64,
    /// Intrinsic system error rate.
    pub intrinsic_error: f64,
    /// Error rate of background (dark) detections.
    pub baseline_error: f64,
    /// Error-correction inefficiency f(Emu) >= 1.
    pub ec_efficiency: f64,
    /// Use the exact yield `Y0 + eta_n - Y0 eta_n` instead of the additive
    /// approximation.
    pub exact_yield: bool,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            loss_db: 0.0,
            detector_efficiency: 0.9,
            dark_yield: 1e-6,
            intrinsic_error: 0.03,
            baseline_error: 0.5,
            ec_efficiency: 1.22,
            exact_yield: false,
        }
    }
}

impl ChannelParams {
    pub fn new(loss_db: f64, detector_efficiency: f64, dark_yield: f64) -> Self {
        Self {
            loss_db,
            detector_efficiency,
            dark_yield,
            ..Self::default()
        }
    }

    /// Channel transmission tau_L.
    pub fn transmission(&self) -> f64 {
        10f64.powf(-self.loss_db / 10.0)
    }

    /// Total efficiency tau_L * eta_det.
    pub fn eta_tot(&self) -> f64 {
        self.transmission() * self.detector_efficiency
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.loss_db >= 0.0) {
            return Err(Error::domain("loss_db", self.loss_db, "[0, inf)"));
        }
        for (name, v) in [
            ("detector_efficiency", self.detector_efficiency),
            ("dark_yield", self.dark_yield),
            ("intrinsic_error", self.intrinsic_error),
            ("baseline_error", self.baseline_error),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::domain(name, v, "[0, 1]"));
            }
        }
        if !(self.ec_efficiency >= 1.0) {
            return Err(Error::domain(
                "ec_efficiency",
                self.ec_efficiency,
                "[1, inf)",
            ));
        }
        Ok(())
    }
}

/// Binary Shannon entropy in bits, with h2(0) = h2(1) = 0 by continuity.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain("binary_entropy argument", x, "[0, 1]"));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

/// `Phi(a) = h2((1 + a) / 2)` for a in [-1, 1].
pub fn phi(a: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&a) {
        return Err(Error::domain("phi argument", a, "[-1, 1]"));
    }
    binary_entropy((1.0 + a) / 2.0)
}

/// Holevo bound on the eavesdropper's information about an n-photon pulse
/// prepared in states with overlap `cos_c`: `h2((1 + cos_c^n) / 2)`.
pub fn holevo_bound(n: u32, cos_c: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("n", 0.0, "[1, inf)"));
    }
    if !(0.0..=1.0).contains(&cos_c) {
        return Err(Error::domain("cos_c", cos_c, "[0, 1]"));
    }
    binary_entropy((1.0 + cos_c.powi(n as i32)) / 2.0)
}

/// Yields, gains and error rates per photon number, with their totals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldGain {
    pub yields: [f64; 4],
    pub gains: [f64; 4],
    pub errors: [f64; 4],
    pub q_mu: f64,
    pub e_mu: f64,
}

pub fn yields_and_gains(d: &PhotonDistribution, ch: &ChannelParams) -> Result<YieldGain> {
    ch.validate()?;
    let eta_tot = ch.eta_tot();
    let y0 = ch.dark_yield;

    let mut yields = [0.0; 4];
    let mut gains = [0.0; 4];
    let mut errors = [0.0; 4];
    let mut q_mu = 0.0;
    let mut weighted_error = 0.0;
    for n in 0..4 {
        let eta_n = 1.0 - (1.0 - eta_tot).powi(n as i32);
        yields[n] = if ch.exact_yield {
            y0 + eta_n - y0 * eta_n
        } else {
            y0 + eta_n
        };
        gains[n] = yields[n] * d.p(n);
        // Convention for a dead channel slot: only background errors remain.
        errors[n] = if yields[n] > 0.0 {
            (ch.baseline_error * y0 + ch.intrinsic_error * eta_n) / yields[n]
        } else {
            ch.baseline_error
        };
        q_mu += gains[n];
        weighted_error += errors[n] * yields[n] * d.p(n);
    }
    if q_mu <= 0.0 {
        return Err(Error::DegenerateGain);
    }
    Ok(YieldGain {
        yields,
        gains,
        errors,
        q_mu,
        e_mu: weighted_error / q_mu,
    })
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Error-correction cost common to both rates.
fn ec_cost(yg: &YieldGain, ch: &ChannelParams) -> Result<f64> {
    Ok(yg.q_mu * binary_entropy(clamp01(yg.e_mu))? * ch.ec_efficiency)
}

/// Monitored key rate: single- and two-photon gains both contribute.
pub fn rate_proposed(d: &PhotonDistribution, ch: &ChannelParams) -> Result<f64> {
    let yg = yields_and_gains(d, ch)?;
    let ec = ec_cost(&yg, ch)?;
    let one = yg.gains[1] * (1.0 - phi(2.0 * clamp01(yg.errors[1]) - 1.0)?);
    let a2 = (2.0 * clamp01(yg.errors[2]) - 1.0).powi(2);
    let two = yg.gains[2] * (1.0 - phi(a2)?);
    Ok((0.5 * (-ec + one + two)).max(0.0))
}

/// GLLP baseline with the untagged fraction estimated from P2.
pub fn rate_gllp(d: &PhotonDistribution, ch: &ChannelParams) -> Result<f64> {
    let yg = yields_and_gains(d, ch)?;
    let omega = 1.0 - d.p(2) / yg.q_mu;
    if omega <= 0.0 {
        return Ok(0.0);
    }
    let omega = omega.min(1.0);
    let ec = ec_cost(&yg, ch)?;
    // Entropy argument capped at 1/2: beyond it privacy amplification yields
    // nothing anyway.
    let arg = (yg.e_mu / omega).min(0.5);
    let gain = yg.q_mu * omega * (1.0 - binary_entropy(arg)?);
    Ok((0.5 * (-ec + gain)).max(0.0))
}

/// Everything the rate computation knows, for reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBreakdown {
    pub yields: [f64; 4],
    pub gains: [f64; 4],
    pub errors: [f64; 4],
    pub q_mu: f64,
    pub e_mu: f64,
    pub omega: f64,
    pub rate_proposed: f64,
    pub rate_gllp: f64,
}

pub fn rate_breakdown(d: &PhotonDistribution, ch: &ChannelParams) -> Result<RateBreakdown> {
    let yg = yields_and_gains(d, ch)?;
    Ok(RateBreakdown {
        yields: yg.yields,
        gains: yg.gains,
        errors: yg.errors,
        q_mu: yg.q_mu,
        e_mu: yg.e_mu,
        omega: 1.0 - d.p(2) / yg.q_mu,
        rate_proposed: rate_proposed(d, ch)?,
        rate_gllp: rate_gllp(d, ch)?,
    })
}
