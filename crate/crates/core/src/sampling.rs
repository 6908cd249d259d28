//! Monte Carlo engine: pulse-level sampling with optional per-event attacks
//! and binomial loss, estimator statistics over repeated runs, and
//! convergence scans.
//!
//! Runs are independent work units. Each run draws from its own RNG stream
//! derived from the master seed and the run index, and aggregation is keyed
//! by run index, so results are identical whether runs execute sequentially
//! or on a thread pool.

use crate::error::{Error, Result};
use crate::photon_stats::PhotonDistribution;
use crate::pns_attack::{AttackKind, AttackSpec};
use crate::rng::{derive_seed, seeded_rng, Stream};
use rand::Rng;
use rand_distr::{Binomial, Distribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingPlan {
    /// Pulses drawn per run.
    pub n_samples: u64,
    /// Independent repetitions.
    pub n_runs: usize,
    pub master_seed: u64,
}

impl SamplingPlan {
    pub fn new(n_samples: u64, n_runs: usize, master_seed: u64) -> Self {
        Self {
            n_samples,
            n_runs,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::domain("n_samples", 0.0, "[1, inf)"));
        }
        if self.n_runs == 0 {
            return Err(Error::domain("n_runs", 0.0, "[1, inf)"));
        }
        Ok(())
    }
}

impl Default for SamplingPlan {
    /// 10^7 samples, 100 runs.
    fn default() -> Self {
        Self::new(10_000_000, 100, 1)
    }
}

/// Histogram of photon numbers over n in {0, 1, 2, 3}.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub bins: [u64; 4],
}

impl Counts {
    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }

    pub fn frequencies(&self) -> [f64; 4] {
        let n = self.total() as f64;
        self.bins.map(|b| b as f64 / n)
    }
}

/// Plug-in estimators from a sampled histogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatedStats {
    pub mu: f64,
    pub g2: f64,
    pub g3: f64,
}

/// Sample factorial moments divided by powers of the sample mean.
pub fn estimate_stats(counts: &Counts) -> Result<EstimatedStats> {
    let total = counts.total();
    if total == 0 {
        return Err(Error::DegenerateMean {
            mu: 0.0,
            tolerance: 0.0,
        });
    }
    let n = total as f64;
    let [_, c1, c2, c3] = counts.bins.map(|b| b as f64);
    let mu = (c1 + 2.0 * c2 + 3.0 * c3) / n;
    if mu <= 0.0 {
        return Err(Error::DegenerateMean {
            mu,
            tolerance: 0.0,
        });
    }
    let m2f = (2.0 * c2 + 6.0 * c3) / n;
    let m3f = 6.0 * c3 / n;
    Ok(EstimatedStats {
        mu,
        g2: m2f / (mu * mu),
        g3: m3f / (mu * mu * mu),
    })
}

/// Per-pulse sampler: inverse-CDF photon number, then the per-event attack,
/// then binomial loss. Draws nothing it does not need, so an inactive attack
/// or lossless channel consumes exactly one uniform per pulse.
struct PulseSampler {
    cdf: [f64; 3],
    kind: AttackKind,
    x: f64,
    eta: f64,
}

impl PulseSampler {
    fn new(d: &PhotonDistribution, attack: &AttackSpec, eta: f64) -> Self {
        let p = d.probabilities();
        Self {
            cdf: [p[0], p[0] + p[1], p[0] + p[1] + p[2]],
            kind: attack.kind,
            x: attack.effective_x(),
            eta,
        }
    }

    #[inline]
    fn sample(&self, rng: &mut Stream) -> usize {
        let u: f64 = rng.random();
        let mut n = if u < self.cdf[0] {
            0
        } else if u < self.cdf[1] {
            1
        } else if u < self.cdf[2] {
            2
        } else {
            3
        };

        if self.x > 0.0 {
            match self.kind {
                AttackKind::None => {}
                // One photon is split off a multi-photon pulse with
                // probability x.
                AttackKind::Soft => {
                    if n >= 2 && rng.random::<f64>() < self.x {
                        n -= 1;
                    }
                }
                // As soft, and single-photon pulses are blocked with
                // probability x.
                AttackKind::Hard => {
                    if n >= 2 {
                        if rng.random::<f64>() < self.x {
                            n -= 1;
                        }
                    } else if n == 1 && rng.random::<f64>() < self.x {
                        n = 0;
                    }
                }
            }
        }

        if self.eta < 1.0 && n > 0 {
            let mut survivors = 0;
            for _ in 0..n {
                if rng.random::<f64>() < self.eta {
                    survivors += 1;
                }
            }
            n = survivors;
        }
        n
    }
}

/// One full run: sample, attack, thin, tally.
pub fn run_once(
    d: &PhotonDistribution,
    attack: &AttackSpec,
    eta: f64,
    n_samples: u64,
    seed: u64,
) -> Counts {
    let sampler = PulseSampler::new(d, attack, eta);
    let mut rng = seeded_rng(seed);
    let mut counts = Counts::default();
    for _ in 0..n_samples {
        counts.bins[sampler.sample(&mut rng)] += 1;
    }
    counts
}

/// Draw `n_samples` i.i.d. photon numbers from `d` (no attack, no loss).
pub fn sample_counts(d: &PhotonDistribution, n_samples: u64, seed: u64) -> Counts {
    run_once(d, &AttackSpec::none(), 1.0, n_samples, seed)
}

/// Thin a sampled histogram: every photon survives independently with
/// probability `eta`. Per photon-number bin this is a multinomial split over
/// the Binomial(n, eta) outcome probabilities, which is distribution-identical
/// to thinning pulse by pulse.
pub fn apply_linear_loss(counts: &Counts, eta: f64, seed: u64) -> Result<Counts> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::domain("eta", eta, "[0, 1]"));
    }
    if eta == 1.0 {
        return Ok(*counts);
    }
    let mut out = Counts::default();
    out.bins[0] = counts.bins[0];
    if eta == 0.0 {
        out.bins[0] = counts.total();
        return Ok(out);
    }
    let mut rng = seeded_rng(seed);
    for n in 1..=3usize {
        let pmf = binomial_pmf(n, eta);
        let split = multinomial_split(counts.bins[n], &pmf[..=n], &mut rng);
        for (k, c) in split.iter().enumerate() {
            out.bins[k] += c;
        }
    }
    Ok(out)
}

fn binomial_pmf(n: usize, eta: f64) -> [f64; 4] {
    let q = 1.0 - eta;
    match n {
        1 => [q, eta, 0.0, 0.0],
        2 => [q * q, 2.0 * eta * q, eta * eta, 0.0],
        3 => [
            q * q * q,
            3.0 * eta * q * q,
            3.0 * eta * eta * q,
            eta * eta * eta,
        ],
        _ => unreachable!(),
    }
}

fn multinomial_split(count: u64, pmf: &[f64], rng: &mut Stream) -> Vec<u64> {
    let mut out = vec![0u64; pmf.len()];
    let mut remaining = count;
    let mut mass_left = 1.0;
    for (k, &q) in pmf.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == pmf.len() {
            out[k] = remaining;
            break;
        }
        let p = (q / mass_left).clamp(0.0, 1.0);
        let drawn = Binomial::new(remaining, p)
            .expect("probability clamped to [0, 1]")
            .sample(rng);
        out[k] = drawn;
        remaining -= drawn;
        mass_left = (mass_left - q).max(0.0);
    }
    out
}

/// Estimated quantities tracked across repeated runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    Mu,
    G2,
    G3,
    P0,
    P1,
    P2,
    P3,
}

impl Quantity {
    pub const ALL: [Quantity; 7] = [
        Quantity::Mu,
        Quantity::G2,
        Quantity::G3,
        Quantity::P0,
        Quantity::P1,
        Quantity::P2,
        Quantity::P3,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Quantity::Mu => "mu",
            Quantity::G2 => "g2",
            Quantity::G3 => "g3",
            Quantity::P0 => "p0",
            Quantity::P1 => "p1",
            Quantity::P2 => "p2",
            Quantity::P3 => "p3",
        }
    }
}

/// Per-run values of one quantity, with mean and population standard
/// deviation over the runs that produced a value. Degenerate runs (sample
/// mean zero, so g2/g3 undefined) are kept as `None` rather than dropped.
#[derive(Debug, Clone)]
pub struct RunStatistics {
    pub quantity: Quantity,
    pub per_run: Vec<Option<f64>>,
    pub n_samples: u64,
}

impl RunStatistics {
    pub fn n_runs(&self) -> usize {
        self.per_run.len()
    }

    pub fn n_degenerate(&self) -> usize {
        self.per_run.iter().filter(|v| v.is_none()).count()
    }

    fn valid(&self) -> impl Iterator<Item = f64> + '_ {
        self.per_run.iter().filter_map(|v| *v)
    }

    pub fn mean(&self) -> Option<f64> {
        let n = self.per_run.len() - self.n_degenerate();
        if n == 0 {
            return None;
        }
        Some(self.valid().sum::<f64>() / n as f64)
    }

    /// Population standard deviation over the valid runs.
    pub fn std(&self) -> Option<f64> {
        let mean = self.mean()?;
        let n = (self.per_run.len() - self.n_degenerate()) as f64;
        let var = self.valid().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Some(var.sqrt())
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> Option<f64> {
        let n = (self.per_run.len() - self.n_degenerate()) as f64;
        Some(self.std()? / n.sqrt())
    }
}

/// Statistics for every tracked quantity over one ensemble of runs.
#[derive(Debug, Clone)]
pub struct RunResults {
    pub mu: RunStatistics,
    pub g2: RunStatistics,
    pub g3: RunStatistics,
    pub p: [RunStatistics; 4],
    pub plan: SamplingPlan,
}

impl RunResults {
    pub fn quantity(&self, q: Quantity) -> &RunStatistics {
        match q {
            Quantity::Mu => &self.mu,
            Quantity::G2 => &self.g2,
            Quantity::G3 => &self.g3,
            Quantity::P0 => &self.p[0],
            Quantity::P1 => &self.p[1],
            Quantity::P2 => &self.p[2],
            Quantity::P3 => &self.p[3],
        }
    }

    /// Indices of runs whose sample mean was zero.
    pub fn degenerate_runs(&self) -> Vec<usize> {
        self.g2
            .per_run
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.is_none().then_some(i))
            .collect()
    }
}

fn assemble(counts: Vec<Counts>, plan: &SamplingPlan) -> RunResults {
    let n = counts.len();
    let mut per_run: [Vec<Option<f64>>; 7] = Default::default();
    for col in per_run.iter_mut() {
        col.reserve(n);
    }
    for c in &counts {
        let freq = c.frequencies();
        match estimate_stats(c) {
            Ok(est) => {
                per_run[0].push(Some(est.mu));
                per_run[1].push(Some(est.g2));
                per_run[2].push(Some(est.g3));
            }
            Err(_) => {
                // Degenerate run: the mean is genuinely zero; g2/g3 undefined.
                per_run[0].push(Some(0.0));
                per_run[1].push(None);
                per_run[2].push(None);
            }
        }
        for k in 0..4 {
            per_run[3 + k].push(Some(freq[k]));
        }
    }
    let mut cols = per_run.into_iter();
    let mut next = |q: Quantity| RunStatistics {
        quantity: q,
        per_run: cols.next().unwrap(),
        n_samples: plan.n_samples,
    };
    RunResults {
        mu: next(Quantity::Mu),
        g2: next(Quantity::G2),
        g3: next(Quantity::G3),
        p: [
            next(Quantity::P0),
            next(Quantity::P1),
            next(Quantity::P2),
            next(Quantity::P3),
        ],
        plan: *plan,
    }
}

fn validated(attack: &AttackSpec, eta: f64, plan: &SamplingPlan) -> Result<()> {
    attack.validate()?;
    plan.validate()?;
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::domain("eta", eta, "[0, 1]"));
    }
    Ok(())
}

/// Repeated runs on the thread pool (run order never affects the result).
#[cfg(feature = "parallel")]
pub fn repeated_runs(
    d: &PhotonDistribution,
    attack: &AttackSpec,
    eta: f64,
    plan: &SamplingPlan,
) -> Result<RunResults> {
    use rayon::prelude::*;
    validated(attack, eta, plan)?;
    let counts: Vec<Counts> = (0..plan.n_runs)
        .into_par_iter()
        .map(|i| run_once(d, attack, eta, plan.n_samples, derive_seed(plan.master_seed, i as u64)))
        .collect();
    Ok(assemble(counts, plan))
}

/// Sequential fallback; bit-identical to the parallel path.
pub fn repeated_runs_seq(
    d: &PhotonDistribution,
    attack: &AttackSpec,
    eta: f64,
    plan: &SamplingPlan,
) -> Result<RunResults> {
    validated(attack, eta, plan)?;
    let counts: Vec<Counts> = (0..plan.n_runs)
        .map(|i| run_once(d, attack, eta, plan.n_samples, derive_seed(plan.master_seed, i as u64)))
        .collect();
    Ok(assemble(counts, plan))
}

#[cfg(not(feature = "parallel"))]
pub use repeated_runs_seq as repeated_runs;

/// One convergence-scan row: statistics at a given sample count plus the
/// relative deviation of the mean g2 from the largest-size reference.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub n_samples: u64,
    pub g2: RunStatistics,
    pub mu: RunStatistics,
    pub rel_dev_from_ref: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub reference_g2: f64,
}

/// Scan estimator stability across sample counts (sizes must be ascending).
/// The reference is the mean g2 at the largest size.
pub fn convergence_scan(
    d: &PhotonDistribution,
    sizes: &[u64],
    n_runs: usize,
    master_seed: u64,
) -> Result<ConvergenceTable> {
    convergence_scan_impl(d, sizes, n_runs, master_seed, |d, plan| {
        repeated_runs(d, &AttackSpec::none(), 1.0, plan)
    })
}

/// Sequential variant of [`convergence_scan`].
pub fn convergence_scan_seq(
    d: &PhotonDistribution,
    sizes: &[u64],
    n_runs: usize,
    master_seed: u64,
) -> Result<ConvergenceTable> {
    convergence_scan_impl(d, sizes, n_runs, master_seed, |d, plan| {
        repeated_runs_seq(d, &AttackSpec::none(), 1.0, plan)
    })
}

fn convergence_scan_impl(
    d: &PhotonDistribution,
    sizes: &[u64],
    n_runs: usize,
    master_seed: u64,
    runner: impl Fn(&PhotonDistribution, &SamplingPlan) -> Result<RunResults>,
) -> Result<ConvergenceTable> {
    if sizes.is_empty() {
        return Err(Error::domain("sizes.len", 0.0, "[1, inf)"));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain(
            "sizes",
            sizes.len() as f64,
            "strictly ascending",
        ));
    }
    let mut results = Vec::with_capacity(sizes.len());
    for (si, &size) in sizes.iter().enumerate() {
        let plan = SamplingPlan::new(size, n_runs, derive_seed(master_seed, si as u64));
        results.push(runner(d, &plan)?);
    }
    let reference_g2 = results
        .last()
        .and_then(|r| r.g2.mean())
        .ok_or(Error::DegenerateMean {
            mu: 0.0,
            tolerance: 0.0,
        })?;
    let rows = results
        .into_iter()
        .zip(sizes)
        .map(|(r, &size)| {
            let rel = r
                .g2
                .mean()
                .map(|m| (m - reference_g2).abs() / reference_g2)
                .unwrap_or(f64::NAN);
            ConvergenceRow {
                n_samples: size,
                g2: r.g2,
                mu: r.mu,
                rel_dev_from_ref: rel,
            }
        })
        .collect();
    Ok(ConvergenceTable {
        rows,
        reference_g2,
    })
}
