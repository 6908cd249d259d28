//! Estimator stability across Monte Carlo sample counts.

use super::{build_source_distribution, describe_source, load_ctx, CommonArgs};
use crate::app::{core_err, AppError, AppResult};
use crate::config::parse_sizes;
use crate::output::{num, opt_num, CsvDoc};
use g2guard_core::rng::GENERATOR;
use g2guard_core::sampling::convergence_scan;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Named source preset.
    #[arg(long)]
    preset: Option<String>,
    /// Comma-separated ascending sample counts; the largest is the reference.
    #[arg(long)]
    sizes: Option<String>,
    /// Repetitions per sample count.
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: CommonArgs,
}

pub fn run(args: &Args) -> AppResult<()> {
    let ctx = load_ctx(&args.common)?;
    let src = super::resolve_source(args.preset.as_deref(), &ctx)?;
    let d = build_source_distribution(&src)?;

    let sc_sampling = ctx.scenario.sampling.clone().unwrap_or_default();
    let sizes_spec = args
        .sizes
        .clone()
        .unwrap_or_else(|| "1e3,1e4,1e5,1e6,1e7".to_string());
    let sizes = parse_sizes(&sizes_spec)
        .map_err(|e| AppError::config(format!("sizes: {e}")))?;
    let n_runs = args.runs.or(sc_sampling.n_runs).unwrap_or(100) as usize;
    let seed = args.seed.or(sc_sampling.master_seed).unwrap_or(1);

    let table = convergence_scan(&d, &sizes, n_runs, seed).map_err(core_err("convergence"))?;

    let mut doc = CsvDoc::new(
        "convergence",
        vec![
            "n_samples",
            "g2_mean",
            "g2_std",
            "mu_mean",
            "mu_std",
            "rel_dev_from_ref",
            "n_degenerate",
        ],
    );
    describe_source(&mut doc, &src);
    doc.meta("n_runs", n_runs);
    doc.meta("master_seed", seed);
    doc.meta("generator", GENERATOR);
    doc.meta("reference_g2", table.reference_g2);

    for row in &table.rows {
        doc.row(vec![
            row.n_samples.to_string(),
            opt_num(row.g2.mean()),
            opt_num(row.g2.std()),
            opt_num(row.mu.mean()),
            opt_num(row.mu.std()),
            num(row.rel_dev_from_ref),
            row.g2.n_degenerate().to_string(),
        ]);
    }

    doc.emit(ctx.out.as_deref())
}
