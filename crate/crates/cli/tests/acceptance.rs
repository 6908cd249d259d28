//! Acceptance suite: one test per release criterion, each printing a
//! `[PASS]`/`[FAIL]` line (visible with `--nocapture` and in failure output).
//!
//! Every tolerance is pinned here. Monte Carlo criteria run at desk scale
//! with pinned seeds, so the whole suite is deterministic.

use g2guard_core::detection::{waiting_time, LinkBudget};
use g2guard_core::hbt::{g2_from_clicks, simulate_hbt, DetectorParams, PulseSource};
use g2guard_core::keyrate::{rate_breakdown, ChannelParams};
use g2guard_core::photon_stats::{build_distribution, PhotonDistribution, SourceParams};
use g2guard_core::pns_attack::{
    apply_attack, attack_signature, attack_signature_with_guard, AttackSpec,
};
use g2guard_core::rng::derive_seed;
use g2guard_core::sampling::{
    apply_linear_loss, convergence_scan, estimate_stats, repeated_runs, sample_counts,
    SamplingPlan,
};
use g2guard_core::Error;
use std::process::Command;

const HBN: (f64, f64, f64) = (0.0363, 0.559, 0.185);
const HBN_HIGH: (f64, f64, f64) = (0.80, 0.230, 0.050);
const QD: (f64, f64, f64) = (0.75, 0.126, 0.0199);

fn build(t: (f64, f64, f64)) -> PhotonDistribution {
    build_distribution(&SourceParams::new(t.0, t.1, t.2, 1e8)).unwrap()
}

struct Criterion {
    id: u32,
    name: &'static str,
    failures: Vec<String>,
}

impl Criterion {
    fn new(id: u32, name: &'static str) -> Self {
        Self {
            id,
            name,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        if !ok {
            self.failures.push(detail);
        }
    }

    fn finish(self) {
        if self.failures.is_empty() {
            println!("[PASS] criterion {}: {}", self.id, self.name);
        } else {
            println!("[FAIL] criterion {}: {}", self.id, self.name);
            for f in &self.failures {
                println!("       - {f}");
            }
            panic!(
                "criterion {} ({}) failed:\n{}",
                self.id,
                self.name,
                self.failures.join("\n")
            );
        }
    }
}

fn within(value: f64, expected: f64, tol: f64) -> bool {
    (value - expected).abs() <= tol
}

#[test]
fn criterion_1_distribution_reproduction() {
    let mut c = Criterion::new(1, "distribution reproduction to the last printed digit");

    // Tolerance = one unit in the last printed decimal place of each
    // reference value.
    let hbn = build(HBN);
    let hbn_expect: [(f64, f64, &str); 5] = [
        (0.963, 1e-3, "P0"),
        (0.036, 1e-3, "P1"),
        (0.00038, 1e-5, "P2"),
        (1.57e-6, 1e-8, "P3"),
        (0.037, 1e-3, "mu"),
    ];
    let hbn_got = [hbn.p(0), hbn.p(1), hbn.p(2), hbn.p(3), hbn.mu()];
    for (got, (expected, tol, name)) in hbn_got.iter().zip(hbn_expect) {
        c.check(
            within(*got, expected, tol),
            format!("hbn {name}: computed {got}, reference {expected} +/- {tol}"),
        );
    }

    let qd = build(QD);
    let qd_expect: [(f64, f64, &str); 5] = [
        (0.203, 1e-3, "P0"),
        (0.750, 1e-3, "P1"),
        (0.045, 1e-3, "P2"),
        (0.002, 1e-3, "P3"),
        (0.845, 1e-3, "mu"),
    ];
    let qd_got = [qd.p(0), qd.p(1), qd.p(2), qd.p(3), qd.mu()];
    for (got, (expected, tol, name)) in qd_got.iter().zip(qd_expect) {
        // Note on mu: the self-consistent construction gives 0.84627, which
        // also follows from the reference probabilities themselves
        // (0.750 + 2*0.045 + 3*0.002 = 0.846). The reference tuple's mu of
        // 0.845 is inconsistent with its own probabilities at the last digit,
        // so this sub-check cannot pass as stated.
        c.check(
            within(*got, expected, tol),
            format!("qd {name}: computed {got}, reference {expected} +/- {tol}"),
        );
    }

    c.finish();
}

#[test]
fn criterion_2_attack_transform_exactness() {
    let mut c = Criterion::new(2, "per-event attack matches transform oracle within 5 SE");

    let presets = [("hbn", HBN), ("hbn-high", HBN_HIGH), ("qd", QD)];
    let xs = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut case = 0u64;
    for (label, params) in presets {
        let d = build(params);
        for kind in ["soft", "hard"] {
            for &x in &xs {
                case += 1;
                let spec = if kind == "soft" {
                    AttackSpec::soft(x)
                } else {
                    AttackSpec::hard(x)
                };
                let oracle = apply_attack(&d, &spec).unwrap();
                if x == 1.0 && kind == "soft" {
                    c.check(
                        oracle.p(3) == 0.0,
                        format!("{label} soft x=1: oracle P3 = {} != 0", oracle.p(3)),
                    );
                }
                let plan = SamplingPlan::new(1_000_000, 100, derive_seed(20_000, case));
                let r = repeated_runs(&d, &spec, 1.0, &plan).unwrap();

                let mut quantities: Vec<(&str, Option<f64>, Option<f64>, f64)> = Vec::new();
                for (k, stat) in r.p.iter().enumerate() {
                    quantities.push((
                        ["p0", "p1", "p2", "p3"][k],
                        stat.mean(),
                        stat.std_error(),
                        oracle.p(k),
                    ));
                }
                quantities.push(("mu", r.mu.mean(), r.mu.std_error(), oracle.mu()));
                quantities.push((
                    "g2",
                    r.g2.mean(),
                    r.g2.std_error(),
                    oracle.g2_exact().unwrap(),
                ));
                quantities.push((
                    "g3",
                    r.g3.mean(),
                    r.g3.std_error(),
                    oracle.g3_exact().unwrap(),
                ));

                for (qname, mean, se, exact) in quantities {
                    let (Some(mean), Some(se)) = (mean, se) else {
                        c.check(false, format!("{label} {kind} x={x} {qname}: no valid runs"));
                        continue;
                    };
                    let ok = if se == 0.0 {
                        mean == exact
                    } else {
                        (mean - exact).abs() <= 5.0 * se
                    };
                    c.check(
                        ok,
                        format!(
                            "{label} {kind} x={x} {qname}: mean {mean} vs oracle {exact} \
                             (|z| = {:.2})",
                            (mean - exact).abs() / se.max(1e-300)
                        ),
                    );
                }
            }
        }
    }

    c.finish();
}

/// Least-squares R^2 of a straight-line fit.
fn linear_r2(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - (slope * p.0 + intercept);
            r * r
        })
        .sum();
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    1.0 - ss_res / ss_tot
}

/// Share of the endpoint change explained by the quadratic term: the
/// normalized second difference over a symmetric three-point window.
fn curvature_fraction(y0: f64, y_mid: f64, y_end: f64) -> f64 {
    (y0 - 2.0 * y_mid + y_end).abs() / (y_end - y0).abs()
}

#[test]
fn criterion_3_signature_shapes() {
    let mut c = Criterion::new(3, "mean shift linear; g2 shift linear (soft) vs curved (hard)");

    let presets = [("hbn", HBN), ("hbn-high", HBN_HIGH), ("qd", QD)];
    const CURVATURE_SPLIT: f64 = 0.25;

    for (label, params) in presets {
        let d = build(params);
        for kind in ["soft", "hard"] {
            let spec = |x: f64| {
                if kind == "soft" {
                    AttackSpec::soft(x)
                } else {
                    AttackSpec::hard(x)
                }
            };
            // The full hard attack on the dim source is excluded by the
            // divergence guard (checked separately below).
            let xs: Vec<f64> = if label == "hbn" && kind == "hard" {
                vec![0.0, 0.25, 0.5, 0.75]
            } else {
                vec![0.0, 0.25, 0.5, 0.75, 1.0]
            };
            let sig: Vec<_> = xs
                .iter()
                .map(|&x| attack_signature(&d, &spec(x)).unwrap())
                .collect();

            let mu_points: Vec<(f64, f64)> =
                xs.iter().zip(&sig).map(|(&x, s)| (x, s.delta_mu)).collect();
            let r2 = linear_r2(&mu_points);
            c.check(
                r2 > 0.999,
                format!("{label} {kind}: |delta mu| R^2 = {r2} <= 0.999"),
            );

            // Widest symmetric window: indices 0, mid, end.
            let g2_y: Vec<f64> = sig.iter().map(|s| s.delta_g2).collect();
            let cf = curvature_fraction(g2_y[0], g2_y[g2_y.len() / 2], g2_y[g2_y.len() - 1]);
            if kind == "soft" {
                c.check(
                    cf < CURVATURE_SPLIT,
                    format!("{label} soft: |delta g2| curvature {cf} not < {CURVATURE_SPLIT}"),
                );
            } else {
                c.check(
                    cf > CURVATURE_SPLIT,
                    format!("{label} hard: |delta g2| curvature {cf} not > {CURVATURE_SPLIT}"),
                );
            }
        }
    }

    // The excluded point itself: full hard attack on the dim source.
    let d = build(HBN);
    let guard = attack_signature(&d, &AttackSpec::hard(1.0));
    c.check(
        matches!(guard, Err(Error::DegenerateMean { .. })),
        format!("hbn hard x=1 should trip the divergence guard, got {guard:?}"),
    );
    // Overriding the guard shows the divergent value the guard protects
    // against.
    let raw = attack_signature_with_guard(&d, &AttackSpec::hard(1.0), 1e-15).unwrap();
    c.check(
        raw.delta_g2 > 10.0,
        format!("unguarded hard x=1 delta g2 = {} (expected blow-up)", raw.delta_g2),
    );

    c.finish();
}

#[test]
fn criterion_4_loss_invariance() {
    let mut c = Criterion::new(4, "g2 invariant under binomial thinning at 1e8 samples");

    let d = build(HBN);
    let n: u64 = 100_000_000;
    let n_runs = 20u64;
    let etas = [0.9, 0.5, 0.1];

    let mut base_mean = 0.0;
    let mut thinned_mean = [0.0; 3];
    for run in 0..n_runs {
        let counts = sample_counts(&d, n, derive_seed(40_000, run));
        base_mean += estimate_stats(&counts).unwrap().g2;
        for (i, &eta) in etas.iter().enumerate() {
            let thinned =
                apply_linear_loss(&counts, eta, derive_seed(41_000 + i as u64, run)).unwrap();
            thinned_mean[i] += estimate_stats(&thinned).unwrap().g2;
        }
    }
    base_mean /= n_runs as f64;
    for (i, &eta) in etas.iter().enumerate() {
        let mean = thinned_mean[i] / n_runs as f64;
        let rel = (mean - base_mean).abs() / base_mean;
        c.check(
            rel < 0.03,
            format!("eta {eta}: g2 {base_mean} -> {mean} (relative change {rel:.4})"),
        );
    }

    c.finish();
}

#[test]
fn criterion_5_convergence_reduced() {
    let mut c = Criterion::new(5, "g2 estimate within 3% at 1e5 samples; spread shrinks");

    let d = build(HBN);
    let sizes = [1_000, 10_000, 100_000, 1_000_000, 10_000_000];
    let table = convergence_scan(&d, &sizes, 100, 50_001).unwrap();

    let row = |n: u64| table.rows.iter().find(|r| r.n_samples == n).unwrap();
    let dev5 = row(100_000).rel_dev_from_ref;
    c.check(
        dev5 < 0.03,
        format!("relative deviation at 1e5 samples = {dev5:.4} >= 3%"),
    );
    let s3 = row(1_000).g2.std().unwrap();
    let s5 = row(100_000).g2.std().unwrap();
    c.check(
        s3 > s5,
        format!("std at 1e3 ({s3}) not larger than at 1e5 ({s5})"),
    );

    c.finish();
}

#[test]
fn criterion_6_keyrate_ordering() {
    let mut c = Criterion::new(6, "monitored rate dominates GLLP; agreement band; zero ordering");

    let d = build(HBN);
    let mut ch = ChannelParams::default(); // eta_det 0.9, Y0 1e-6, e_int 3%, f 1.22
    let mut first_zero_gllp: Option<u32> = None;
    let mut first_zero_prop: Option<u32> = None;
    let mut band_failures = Vec::new();

    for loss in 0..=40u32 {
        ch.loss_db = loss as f64;
        let b = rate_breakdown(&d, &ch).unwrap();
        c.check(
            b.rate_proposed >= b.rate_gllp - 1e-12,
            format!(
                "dominance violated at {loss} dB: {} < {}",
                b.rate_proposed, b.rate_gllp
            ),
        );
        if b.rate_gllp == 0.0 && first_zero_gllp.is_none() {
            first_zero_gllp = Some(loss);
        }
        if b.rate_proposed == 0.0 && first_zero_prop.is_none() {
            first_zero_prop = Some(loss);
        }
        if loss < 10 && b.rate_proposed > 0.0 {
            let gap = (b.rate_proposed - b.rate_gllp) / b.rate_proposed;
            if gap > 0.05 {
                band_failures.push(format!("{loss} dB: gap {:.1}%", gap * 100.0));
            }
        }
    }

    // Agreement within 5% below 10 dB. The untagged-fraction penalty
    // P2/Qmu grows like 1/transmission, so for this source the gap passes
    // 5% near 5 dB and reaches ~15% at 9 dB; no detector-efficiency or
    // dark-count setting brings it back under 5% across the whole band.
    // Recorded here as stated rather than loosened.
    c.check(
        band_failures.is_empty(),
        format!("5% agreement band below 10 dB: {}", band_failures.join(", ")),
    );

    match (first_zero_gllp, first_zero_prop) {
        (Some(g), Some(p)) => c.check(
            g < p,
            format!("GLLP zero at {g} dB not strictly below monitored zero at {p} dB"),
        ),
        (Some(_), None) => {} // GLLP died in-grid, monitored rate never did.
        (None, _) => c.check(false, "GLLP rate never reached zero on 0..40 dB".to_string()),
    }

    c.finish();
}

#[test]
fn criterion_7_micius_feasibility() {
    let mut c = Criterion::new(7, "waiting time at the Micius operating point");

    let lb = LinkBudget {
        n_required: 1e5,
        repetition_rate: 1e8,
        mu: 0.037,
        loss_db: 38.0,
        detector_efficiency: 0.9,
    };
    let t = waiting_time(&lb).unwrap();

    // Independent straight-line evaluation of the accumulation formula.
    let oracle = 1e5 / (1e8 * (1.0 - (-0.037f64).exp()) * 10f64.powf(-3.8) * 0.9);
    c.check(
        (t - oracle).abs() / oracle < 0.01,
        format!("waiting time {t} differs from direct evaluation {oracle}"),
    );
    c.check(
        (t - 193.0).abs() < 1.0,
        format!("waiting time {t} not ~193 s"),
    );
    c.check(t < 273.0, format!("waiting time {t} exceeds the 273 s flyover"));

    c.finish();
}

#[test]
fn criterion_8_hbt_pipeline() {
    let mut c = Criterion::new(8, "receiver recovers g2 at 1e8 pulses; Poisson control at unity");

    let d = build(HBN);
    let det = DetectorParams::new(0.1, 1e-6);
    let stream = simulate_hbt(&PulseSource::Distribution(&d), 100_000_000, &det, 80_001).unwrap();
    let est = g2_from_clicks(&stream, 500).unwrap();
    let exact = d.g2_exact().unwrap();
    let rel = (est.g2 - exact).abs() / exact;
    c.check(
        rel < 0.10,
        format!("g2 estimate {} vs exact {exact} (relative {rel:.4})", est.g2),
    );

    let control = simulate_hbt(&PulseSource::Poisson(1.0), 10_000_000, &det, 80_002).unwrap();
    let unit = g2_from_clicks(&control, 500).unwrap();
    c.check(
        (unit.g2 - 1.0).abs() < 0.03,
        format!("Poisson control g2 = {} not within 1 +/- 0.03", unit.g2),
    );

    c.finish();
}

#[test]
fn criterion_9_cli_determinism() {
    let mut c = Criterion::new(9, "identical seeds produce byte-identical CSV output");

    let bin = env!("CARGO_BIN_EXE_g2guard");
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<(&str, Vec<String>)> = vec![
        (
            "attack-sweep",
            vec![
                "attack-sweep".into(),
                "--preset".into(),
                "our-hbn".into(),
                "--kind".into(),
                "soft".into(),
                "--x".into(),
                "0:1:0.5".into(),
                "--samples".into(),
                "1e5".into(),
                "--runs".into(),
                "5".into(),
                "--seed".into(),
                "11".into(),
            ],
        ),
        (
            "keyrate",
            vec![
                "keyrate".into(),
                "--preset".into(),
                "our-hbn".into(),
                "--loss".into(),
                "0:40:5".into(),
            ],
        ),
        (
            "convergence",
            vec![
                "convergence".into(),
                "--preset".into(),
                "our-hbn".into(),
                "--sizes".into(),
                "1e3,1e4".into(),
                "--runs".into(),
                "10".into(),
                "--seed".into(),
                "13".into(),
            ],
        ),
        (
            "hbt",
            vec![
                "hbt".into(),
                "--preset".into(),
                "our-hbn".into(),
                "--pulses".into(),
                "1e6".into(),
                "--efficiency".into(),
                "0.5".into(),
                "--max-lag".into(),
                "20".into(),
                "--seed".into(),
                "17".into(),
            ],
        ),
        (
            "detect",
            vec![
                "detect".into(),
                "--preset".into(),
                "our-hbn".into(),
                "--kind".into(),
                "hard".into(),
                "--x".into(),
                "0.3".into(),
                "--samples".into(),
                "1e5".into(),
                "--runs".into(),
                "10".into(),
                "--seed".into(),
                "19".into(),
            ],
        ),
    ];

    for (name, args) in &cases {
        let out_a = dir.path().join(format!("{name}_a.csv"));
        let out_b = dir.path().join(format!("{name}_b.csv"));
        for out in [&out_a, &out_b] {
            let status = Command::new(bin)
                .args(args)
                .arg("--out")
                .arg(out)
                .status()
                .unwrap();
            c.check(
                status.success(),
                format!("{name}: exit status {status:?}"),
            );
        }
        let a = std::fs::read(&out_a).unwrap();
        let b = std::fs::read(&out_b).unwrap();
        c.check(
            a == b,
            format!("{name}: re-run output differs ({} vs {} bytes)", a.len(), b.len()),
        );
    }

    c.finish();
}
