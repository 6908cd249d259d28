//! Photon accumulation time across channel loss, with pass feasibility.

use super::{load_ctx, CommonArgs};
use crate::app::{core_err, AppError, AppResult};
use crate::config::parse_sweep;
use crate::output::{num, CsvDoc};
use g2guard_core::detection::{satellite_feasible, LinkBudget};
use g2guard_core::photon_stats::build_distribution;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Source preset whose mean photon number feeds the budget.
    #[arg(long)]
    preset: Option<String>,
    /// Mean photon number override.
    #[arg(long)]
    mu: Option<f64>,
    /// Channel loss in dB: single value or start:end:step sweep.
    #[arg(long)]
    loss: Option<String>,
    /// Link preset supplying loss and flyover duration (e.g. micius).
    #[arg(long)]
    link: Option<String>,
    /// Detections required for a stable estimate.
    #[arg(long)]
    n_required: Option<f64>,
    /// Pulse repetition rate in Hz.
    #[arg(long)]
    rep_rate: Option<f64>,
    #[arg(long)]
    det_eff: Option<f64>,
    /// Pass duration the waiting time must beat, in seconds.
    #[arg(long)]
    flyover: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

pub fn run(args: &Args) -> AppResult<()> {
    let ctx = load_ctx(&args.common)?;
    let sc_link = ctx.scenario.link.clone().unwrap_or_default();

    let link_preset = match &args.link {
        Some(name) => Some(ctx.presets.link(name)?.clone()),
        None => None,
    };

    let mu = match (args.mu, sc_link.mu) {
        (Some(m), _) => m,
        (None, Some(m)) => m,
        (None, None) => {
            let src = super::resolve_source(args.preset.as_deref(), &ctx)?;
            build_distribution(&src.params)
                .map_err(core_err("build_distribution"))?
                .mu()
        }
    };

    let loss_spec = args
        .loss
        .clone()
        .or_else(|| link_preset.as_ref().map(|l| l.loss_db.to_string()))
        .or(ctx
            .scenario
            .channel
            .as_ref()
            .and_then(|c| c.loss_db.map(|v| v.to_string())))
        .unwrap_or_else(|| "0:60:1".to_string());
    let losses =
        parse_sweep(&loss_spec).map_err(|e| AppError::config(format!("loss: {e}")))?;

    let n_required = args.n_required.or(sc_link.n_required).unwrap_or(1e5);
    let rep_rate = args
        .rep_rate
        .or(sc_link.repetition_rate_hz)
        .unwrap_or(1e8);
    let det_eff = args.det_eff.unwrap_or(0.9);
    let flyover = args
        .flyover
        .or(sc_link.flyover_s)
        .or_else(|| link_preset.as_ref().map(|l| l.flyover_s))
        .unwrap_or(273.0);

    let mut doc = CsvDoc::new(
        "waiting-time",
        vec!["loss_db", "t_wait_s", "feasible", "margin_s"],
    );
    doc.meta("mu", mu);
    doc.meta("n_required", n_required);
    doc.meta("repetition_rate_hz", rep_rate);
    doc.meta("detector_efficiency", det_eff);
    doc.meta("flyover_s", flyover);
    if let (Some(name), Some(lp)) = (&args.link, &link_preset) {
        doc.meta("link_preset", name);
        doc.meta("link_distance_km", lp.distance_km);
    }

    for &loss in &losses {
        let lb = LinkBudget {
            n_required,
            repetition_rate: rep_rate,
            mu,
            loss_db: loss,
            detector_efficiency: det_eff,
        };
        let f = satellite_feasible(&lb, flyover).map_err(core_err("waiting-time"))?;
        doc.row(vec![
            num(loss),
            num(f.waiting_time_s),
            (f.feasible as u8).to_string(),
            num(f.margin_s),
        ]);
    }

    doc.emit(ctx.out.as_deref())
}
