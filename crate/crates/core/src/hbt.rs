//! Receiver-side correlation measurement: a beam splitter feeding two
//! threshold (non-number-resolving) detectors, with coincidences counted in
//! pulse-index space.
//!
//! Analysis happens per pulse slot rather than in continuous time: at a fixed
//! repetition rate, integrating one full period around each peak is the same
//! as counting per-pulse coincidences, so the n-th side peak is exactly lag n.
//! The zero-lag rate normalized by the mean side-peak rate estimates g2(0).
//!
//! Click generation is chunked: each fixed-size chunk of pulses draws from its
//! own RNG stream, so the output is a pure function of (source, seed) no
//! matter how chunks are scheduled.

use crate::error::{Error, Result};
use crate::photon_stats::PhotonDistribution;
use crate::rng::{stream_rng, Stream};
use rand::Rng;
use rand_distr::{Distribution, Poisson};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    /// Probability a routed photon produces a click.
    pub efficiency: f64,
    /// Dark click probability per detector per pulse window.
    pub dark_click_prob: f64,
    /// Probability a photon is routed to detector A.
    pub split_ratio: f64,
}

impl DetectorParams {
    /// Balanced splitter with the given efficiency and dark click probability.
    pub fn new(efficiency: f64, dark_click_prob: f64) -> Self {
        Self {
            efficiency,
            dark_click_prob,
            split_ratio: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("efficiency", self.efficiency),
            ("dark_click_prob", self.dark_click_prob),
            ("split_ratio", self.split_ratio),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::domain(name, v, "[0, 1]"));
            }
        }
        Ok(())
    }
}

/// What arrives at the beam splitter each pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseSource<'a> {
    /// Photon numbers drawn from a truncated distribution.
    Distribution(&'a PhotonDistribution),
    /// Poissonian control with the given mean photon number.
    Poisson(f64),
    /// Exactly `n` photons every pulse.
    Constant(u32),
}

impl PulseSource<'_> {
    fn validate(&self) -> Result<()> {
        if let PulseSource::Poisson(mean) = self {
            if !(*mean > 0.0) {
                return Err(Error::domain("poisson_mean", *mean, "(0, inf)"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClickRecord {
    pub pulse_index: u64,
    pub clicked_a: bool,
    pub clicked_b: bool,
}

/// Bit-packed per-pulse click flags for both detectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClickStream {
    a: Vec<u64>,
    b: Vec<u64>,
    n_pulses: u64,
}

impl ClickStream {
    pub fn n_pulses(&self) -> u64 {
        self.n_pulses
    }

    pub fn record(&self, pulse_index: u64) -> ClickRecord {
        let w = (pulse_index / 64) as usize;
        let bit = pulse_index % 64;
        ClickRecord {
            pulse_index,
            clicked_a: self.a[w] >> bit & 1 == 1,
            clicked_b: self.b[w] >> bit & 1 == 1,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = ClickRecord> + '_ {
        (0..self.n_pulses).map(|i| self.record(i))
    }

    /// Total clicks on each detector.
    pub fn click_counts(&self) -> (u64, u64) {
        let count = |w: &[u64]| w.iter().map(|x| x.count_ones() as u64).sum();
        (count(&self.a), count(&self.b))
    }

    /// Assemble a stream from explicit per-pulse flags (synthetic inputs).
    pub fn from_flags(flags: &[(bool, bool)]) -> Self {
        let words = flags.len().div_ceil(64);
        let mut a = vec![0u64; words];
        let mut b = vec![0u64; words];
        for (i, &(fa, fb)) in flags.iter().enumerate() {
            if fa {
                a[i / 64] |= 1 << (i % 64);
            }
            if fb {
                b[i / 64] |= 1 << (i % 64);
            }
        }
        Self {
            a,
            b,
            n_pulses: flags.len() as u64,
        }
    }
}

/// Pulses per RNG chunk. Fixed so chunked generation is schedule-independent;
/// a multiple of 64 keeps chunks word-aligned.
const CHUNK_PULSES: u64 = 1 << 16;

enum SourceSampler {
    Cdf([f64; 3]),
    Poisson(Poisson<f64>),
    Constant(u32),
}

impl SourceSampler {
    fn new(source: &PulseSource<'_>) -> Self {
        match source {
            PulseSource::Distribution(d) => {
                let p = d.probabilities();
                SourceSampler::Cdf([p[0], p[0] + p[1], p[0] + p[1] + p[2]])
            }
            PulseSource::Poisson(mean) => {
                SourceSampler::Poisson(Poisson::new(*mean).expect("validated"))
            }
            PulseSource::Constant(n) => SourceSampler::Constant(*n),
        }
    }

    #[inline]
    fn draw(&self, rng: &mut Stream) -> u32 {
        match self {
            SourceSampler::Cdf(cdf) => {
                let u: f64 = rng.random();
                if u < cdf[0] {
                    0
                } else if u < cdf[1] {
                    1
                } else if u < cdf[2] {
                    2
                } else {
                    3
                }
            }
            SourceSampler::Poisson(p) => p.sample(rng) as u32,
            SourceSampler::Constant(n) => *n,
        }
    }
}

fn fill_chunk(
    source: &PulseSource<'_>,
    det: &DetectorParams,
    seed: u64,
    chunk: u64,
    n_pulses: u64,
) -> (Vec<u64>, Vec<u64>) {
    let start = chunk * CHUNK_PULSES;
    let len = CHUNK_PULSES.min(n_pulses - start);
    let words = (len as usize).div_ceil(64);
    let mut a = vec![0u64; words];
    let mut b = vec![0u64; words];

    let sampler = SourceSampler::new(source);
    let mut rng = stream_rng(seed, chunk);

    // Single uniform per photon decides routing and survival.
    let t_a_click = det.split_ratio * det.efficiency;
    let t_b_click = det.split_ratio + (1.0 - det.split_ratio) * det.efficiency;
    let dark = det.dark_click_prob;

    for j in 0..len {
        let n = sampler.draw(&mut rng);
        let mut ca = false;
        let mut cb = false;
        for _ in 0..n {
            let u: f64 = rng.random();
            if u < t_a_click {
                ca = true;
            } else if u >= det.split_ratio && u < t_b_click {
                cb = true;
            }
        }
        if dark > 0.0 {
            if rng.random::<f64>() < dark {
                ca = true;
            }
            if rng.random::<f64>() < dark {
                cb = true;
            }
        }
        if ca {
            a[(j / 64) as usize] |= 1 << (j % 64);
        }
        if cb {
            b[(j / 64) as usize] |= 1 << (j % 64);
        }
    }
    (a, b)
}

fn assemble_chunks(chunks: Vec<(Vec<u64>, Vec<u64>)>, n_pulses: u64) -> ClickStream {
    let words = (n_pulses as usize).div_ceil(64);
    let mut a = Vec::with_capacity(words);
    let mut b = Vec::with_capacity(words);
    for (ca, cb) in chunks {
        a.extend_from_slice(&ca);
        b.extend_from_slice(&cb);
    }
    ClickStream { a, b, n_pulses }
}

fn n_chunks(n_pulses: u64) -> u64 {
    n_pulses.div_ceil(CHUNK_PULSES)
}

/// Simulate the receiver for `n_pulses` pulses.
#[cfg(feature = "parallel")]
pub fn simulate_hbt(
    source: &PulseSource<'_>,
    n_pulses: u64,
    det: &DetectorParams,
    seed: u64,
) -> Result<ClickStream> {
    use rayon::prelude::*;
    det.validate()?;
    source.validate()?;
    if n_pulses == 0 {
        return Err(Error::domain("n_pulses", 0.0, "[1, inf)"));
    }
    let chunks: Vec<_> = (0..n_chunks(n_pulses))
        .into_par_iter()
        .map(|c| fill_chunk(source, det, seed, c, n_pulses))
        .collect();
    Ok(assemble_chunks(chunks, n_pulses))
}

/// Sequential fallback; bit-identical to the parallel path.
pub fn simulate_hbt_seq(
    source: &PulseSource<'_>,
    n_pulses: u64,
    det: &DetectorParams,
    seed: u64,
) -> Result<ClickStream> {
    det.validate()?;
    source.validate()?;
    if n_pulses == 0 {
        return Err(Error::domain("n_pulses", 0.0, "[1, inf)"));
    }
    let chunks: Vec<_> = (0..n_chunks(n_pulses))
        .map(|c| fill_chunk(source, det, seed, c, n_pulses))
        .collect();
    Ok(assemble_chunks(chunks, n_pulses))
}

#[cfg(not(feature = "parallel"))]
pub use simulate_hbt_seq as simulate_hbt;

/// Count pairs `base[j] && shifted[j + shift]` for `j` in `0..n_pairs`.
fn shifted_and_count(base: &[u64], shifted: &[u64], shift: u64, n_pairs: u64) -> u64 {
    let word_shift = (shift / 64) as usize;
    let bit_shift = shift % 64;
    let full_words = (n_pairs / 64) as usize;
    let tail_bits = n_pairs % 64;

    let fetch = |w: usize| -> u64 {
        let lo = shifted.get(w + word_shift).copied().unwrap_or(0);
        if bit_shift == 0 {
            lo
        } else {
            let hi = shifted.get(w + word_shift + 1).copied().unwrap_or(0);
            (lo >> bit_shift) | (hi << (64 - bit_shift))
        }
    };

    let mut total = 0u64;
    for (w, &word) in base.iter().enumerate().take(full_words) {
        total += (word & fetch(w)).count_ones() as u64;
    }
    if tail_bits > 0 {
        let mask = (1u64 << tail_bits) - 1;
        total += (base[full_words] & fetch(full_words) & mask).count_ones() as u64;
    }
    total
}

/// Coincidence counts per pulse lag, center plus `max_lag` side peaks on each
/// side. `counts[max_lag + k]` holds C(k) for k in `-max_lag ..= max_lag`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoincidenceHistogram {
    pub max_lag: u32,
    pub counts: Vec<u64>,
    pub n_pulses: u64,
}

impl CoincidenceHistogram {
    pub fn center(&self) -> u64 {
        self.counts[self.max_lag as usize]
    }

    /// Iterate side peaks as `(lag, count)` with lag != 0.
    pub fn side_peaks(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        let m = self.max_lag as i64;
        self.counts
            .iter()
            .enumerate()
            .map(move |(j, &c)| (j as i64 - m, c))
            .filter(|&(k, _)| k != 0)
    }
}

fn lag_count(s: &ClickStream, k: i64) -> u64 {
    let n = s.n_pulses;
    if k >= 0 {
        shifted_and_count(&s.a, &s.b, k as u64, n - k as u64)
    } else {
        let k = (-k) as u64;
        shifted_and_count(&s.b, &s.a, k, n - k)
    }
}

/// Histogram coincidences `A at pulse i, B at pulse i + k` over all lags
/// `|k| <= max_lag` (parallel over lags; per-lag counts merge associatively).
#[cfg(feature = "parallel")]
pub fn coincidence_histogram(s: &ClickStream, max_lag: u32) -> Result<CoincidenceHistogram> {
    use rayon::prelude::*;
    check_span(s, max_lag)?;
    let m = max_lag as i64;
    let counts: Vec<u64> = (-m..=m).into_par_iter().map(|k| lag_count(s, k)).collect();
    Ok(CoincidenceHistogram {
        max_lag,
        counts,
        n_pulses: s.n_pulses,
    })
}

/// Sequential fallback; identical output to the parallel path.
pub fn coincidence_histogram_seq(s: &ClickStream, max_lag: u32) -> Result<CoincidenceHistogram> {
    check_span(s, max_lag)?;
    let m = max_lag as i64;
    let counts: Vec<u64> = (-m..=m).map(|k| lag_count(s, k)).collect();
    Ok(CoincidenceHistogram {
        max_lag,
        counts,
        n_pulses: s.n_pulses,
    })
}

#[cfg(not(feature = "parallel"))]
pub use coincidence_histogram_seq as coincidence_histogram;

fn check_span(s: &ClickStream, max_lag: u32) -> Result<()> {
    if max_lag == 0 {
        return Err(Error::domain("max_lag", 0.0, "[1, inf)"));
    }
    let needed = 2 * max_lag as u64 + 1;
    if s.n_pulses < needed {
        return Err(Error::domain(
            "n_pulses",
            s.n_pulses as f64,
            "at least 2*max_lag + 1",
        ));
    }
    Ok(())
}

/// Default side-peak span: one repetition period per lag bin, out to where the
/// peaks are flat (500 periods).
pub const DEFAULT_MAX_LAG: u32 = 500;

#[derive(Debug, Clone)]
pub struct G2Estimate {
    pub g2: f64,
    /// Zero-lag coincidence rate per pulse.
    pub center_rate: f64,
    /// Mean side-peak rate per valid pulse pair.
    pub side_mean_rate: f64,
    pub histogram: CoincidenceHistogram,
}

/// Estimate g2(0) as the zero-lag coincidence rate over the mean side-peak
/// rate. Side peaks are normalized by their exact pair count `n - |k|`.
pub fn g2_from_clicks(s: &ClickStream, max_lag: u32) -> Result<G2Estimate> {
    let histogram = coincidence_histogram(s, max_lag)?;
    g2_from_histogram(histogram)
}

/// As [`g2_from_clicks`] on a precomputed histogram.
pub fn g2_from_histogram(histogram: CoincidenceHistogram) -> Result<G2Estimate> {
    let n = histogram.n_pulses as f64;
    let side_sum: u64 = histogram.side_peaks().map(|(_, c)| c).sum();
    if side_sum == 0 {
        return Err(Error::InsufficientCoincidences);
    }
    let side_mean_rate = histogram
        .side_peaks()
        .map(|(k, c)| c as f64 / (n - k.unsigned_abs() as f64))
        .sum::<f64>()
        / (2 * histogram.max_lag) as f64;
    let center_rate = histogram.center() as f64 / n;
    Ok(G2Estimate {
        g2: center_rate / side_mean_rate,
        center_rate,
        side_mean_rate,
        histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photon_stats::{build_distribution, SourceParams};
    use proptest::prelude::*;
    use rand::Rng;

    fn hbn() -> PhotonDistribution {
        build_distribution(&SourceParams::new(0.0363, 0.559, 0.185, 2.5e7)).unwrap()
    }

    #[test]
    fn dark_free_vacuum_never_clicks() {
        let det = DetectorParams::new(0.9, 0.0);
        let s = simulate_hbt_seq(&PulseSource::Constant(0), 200_000, &det, 1).unwrap();
        assert_eq!(s.click_counts(), (0, 0));
    }

    #[test]
    fn single_photons_click_one_side_only() {
        let det = DetectorParams::new(1.0, 0.0);
        let s = simulate_hbt_seq(&PulseSource::Constant(1), 100_000, &det, 2).unwrap();
        let (ca, cb) = s.click_counts();
        assert_eq!(ca + cb, 100_000);
        for r in s.iter().take(10_000) {
            assert!(r.clicked_a ^ r.clicked_b);
        }
        let est = g2_from_clicks(&s, 100).unwrap();
        assert_eq!(est.histogram.center(), 0);
        assert_eq!(est.g2, 0.0);
    }

    #[test]
    fn independent_clicks_give_unit_g2() {
        // Synthetic uncorrelated Bernoulli clicks on both detectors.
        let mut rng = crate::rng::seeded_rng(5);
        let flags: Vec<(bool, bool)> = (0..2_000_000)
            .map(|_| (rng.random::<f64>() < 0.05, rng.random::<f64>() < 0.05))
            .collect();
        let s = ClickStream::from_flags(&flags);
        let est = g2_from_clicks(&s, 100).unwrap();
        assert!((est.g2 - 1.0).abs() < 0.05, "g2 = {}", est.g2);
    }

    #[test]
    fn poisson_control_gives_unit_g2() {
        let det = DetectorParams::new(0.3, 0.0);
        let s = simulate_hbt_seq(&PulseSource::Poisson(0.5), 2_000_000, &det, 8).unwrap();
        let est = g2_from_clicks(&s, 100).unwrap();
        assert!((est.g2 - 1.0).abs() < 0.05, "g2 = {}", est.g2);
    }

    #[test]
    fn sub_poissonian_source_recovers_exact_g2() {
        let d = hbn();
        let det = DetectorParams::new(0.5, 1e-6);
        let s = simulate_hbt_seq(&PulseSource::Distribution(&d), 10_000_000, &det, 13).unwrap();
        let est = g2_from_clicks(&s, 200).unwrap();
        let exact = d.g2_exact().unwrap();
        assert!(
            (est.g2 - exact).abs() / exact < 0.10,
            "estimate {} vs exact {exact}",
            est.g2
        );
    }

    #[test]
    fn side_peaks_are_flat_for_iid_pulses() {
        let d = hbn();
        let det = DetectorParams::new(0.5, 0.0);
        let s = simulate_hbt_seq(&PulseSource::Distribution(&d), 10_000_000, &det, 21).unwrap();
        let h = coincidence_histogram_seq(&s, 200).unwrap();
        let side: Vec<u64> = h.side_peaks().map(|(_, c)| c).collect();
        let mean = side.iter().sum::<u64>() as f64 / side.len() as f64;
        let sigma = mean.sqrt();
        for (k, c) in h.side_peaks() {
            assert!(
                (c as f64 - mean).abs() < 5.0 * sigma,
                "lag {k}: count {c} vs mean {mean}"
            );
        }
    }

    #[test]
    fn dark_counts_pull_g2_toward_unity() {
        let d = hbn();
        let clean = DetectorParams::new(0.5, 0.0);
        let noisy = DetectorParams::new(0.5, 1e-3);
        let n = 10_000_000;
        let g_clean = g2_from_clicks(
            &simulate_hbt_seq(&PulseSource::Distribution(&d), n, &clean, 34).unwrap(),
            50,
        )
        .unwrap()
        .g2;
        let g_noisy = g2_from_clicks(
            &simulate_hbt_seq(&PulseSource::Distribution(&d), n, &noisy, 34).unwrap(),
            50,
        )
        .unwrap()
        .g2;
        assert!(
            g_noisy > g_clean,
            "dark counts must not sharpen antibunching: {g_clean} -> {g_noisy}"
        );
    }

    #[test]
    fn span_and_coincidence_preconditions() {
        let s = ClickStream::from_flags(&[(true, false); 50]);
        assert!(matches!(
            g2_from_clicks(&s, 100),
            Err(Error::Domain { .. })
        ));
        // A clicks but B never does: all side peaks empty.
        let s = ClickStream::from_flags(&vec![(true, false); 5000]);
        assert!(matches!(
            g2_from_clicks(&s, 10),
            Err(Error::InsufficientCoincidences)
        ));
    }

    fn naive_lag_count(flags: &[(bool, bool)], k: i64) -> u64 {
        let n = flags.len() as i64;
        (0..n)
            .filter(|&i| {
                let j = i + k;
                j >= 0 && j < n && flags[i as usize].0 && flags[j as usize].1
            })
            .count() as u64
    }

    proptest! {
        #[test]
        fn histogram_matches_naive_counting(
            flags in proptest::collection::vec((any::<bool>(), any::<bool>()), 21..400),
            max_lag in 1u32..10,
        ) {
            prop_assume!(flags.len() as u64 > 2 * max_lag as u64);
            let s = ClickStream::from_flags(&flags);
            let h = coincidence_histogram_seq(&s, max_lag).unwrap();
            for k in -(max_lag as i64)..=max_lag as i64 {
                let expected = naive_lag_count(&flags, k);
                prop_assert_eq!(h.counts[(k + max_lag as i64) as usize], expected);
            }
        }
    }
}
