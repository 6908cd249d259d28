//! Beam-splitter receiver simulation: coincidence histogram and g2 estimate.

use super::{load_ctx, to_count, CommonArgs};
use crate::app::{core_err, AppResult};
use crate::output::{num, CsvDoc};
use g2guard_core::hbt::{g2_from_clicks, simulate_hbt, DetectorParams, PulseSource, DEFAULT_MAX_LAG};
use g2guard_core::photon_stats::build_distribution;
use g2guard_core::rng::GENERATOR;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Named source preset.
    #[arg(long)]
    preset: Option<String>,
    /// Use a Poissonian control source with this mean instead of a preset.
    #[arg(long)]
    poisson_mean: Option<f64>,
    /// Number of pulses to simulate.
    #[arg(long)]
    pulses: Option<f64>,
    /// Detection efficiency per routed photon.
    #[arg(long)]
    efficiency: Option<f64>,
    /// Dark click probability per detector per pulse.
    #[arg(long)]
    dark: Option<f64>,
    /// Splitting ratio toward detector A.
    #[arg(long)]
    split: Option<f64>,
    /// Side peaks counted on each side of zero delay.
    #[arg(long)]
    max_lag: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: CommonArgs,
}

pub fn run(args: &Args) -> AppResult<()> {
    let ctx = load_ctx(&args.common)?;
    let sc = ctx.scenario.hbt.clone().unwrap_or_default();

    let n_pulses = to_count("hbt.n_pulses", args.pulses.or(sc.n_pulses).unwrap_or(1e7))?;
    let det = DetectorParams {
        efficiency: args.efficiency.or(sc.efficiency).unwrap_or(0.1),
        dark_click_prob: args.dark.or(sc.dark_click_prob).unwrap_or(1e-6),
        split_ratio: args.split.or(sc.split_ratio).unwrap_or(0.5),
    };
    let max_lag = args.max_lag.or(sc.max_lag).unwrap_or(DEFAULT_MAX_LAG);
    let seed = args
        .seed
        .or(ctx
            .scenario
            .sampling
            .as_ref()
            .and_then(|s| s.master_seed))
        .unwrap_or(1);

    let poisson = args.poisson_mean.or(sc.poisson_mean);

    let mut doc = CsvDoc::new("hbt", vec!["lag", "count", "rate"]);
    doc.meta("n_pulses", n_pulses);
    doc.meta("efficiency", det.efficiency);
    doc.meta("dark_click_prob", det.dark_click_prob);
    doc.meta("split_ratio", det.split_ratio);
    doc.meta("max_lag", max_lag);
    doc.meta("master_seed", seed);
    doc.meta("generator", GENERATOR);

    let stream = if let Some(mean) = poisson {
        doc.meta("source", format!("poisson mean {mean}"));
        simulate_hbt(&PulseSource::Poisson(mean), n_pulses, &det, seed)
            .map_err(core_err("hbt simulation"))?
    } else {
        let src = super::resolve_source(args.preset.as_deref(), &ctx)?;
        let d = build_distribution(&src.params).map_err(core_err("build_distribution"))?;
        super::describe_source(&mut doc, &src);
        doc.meta("source.g2_exact", d.g2_exact().map_err(core_err("g2_exact"))?);
        simulate_hbt(&PulseSource::Distribution(&d), n_pulses, &det, seed)
            .map_err(core_err("hbt simulation"))?
    };

    let (clicks_a, clicks_b) = stream.click_counts();
    let est = g2_from_clicks(&stream, max_lag).map_err(core_err("g2 from clicks"))?;
    doc.meta("clicks_a", clicks_a);
    doc.meta("clicks_b", clicks_b);
    doc.meta("g2_estimate", est.g2);
    doc.meta("center_rate", est.center_rate);
    doc.meta("side_mean_rate", est.side_mean_rate);

    let n = est.histogram.n_pulses as f64;
    let m = est.histogram.max_lag as i64;
    for (j, &count) in est.histogram.counts.iter().enumerate() {
        let lag = j as i64 - m;
        let pairs = n - lag.unsigned_abs() as f64;
        doc.row(vec![
            lag.to_string(),
            count.to_string(),
            num(count as f64 / pairs),
        ]);
    }

    doc.emit(ctx.out.as_deref())
}
