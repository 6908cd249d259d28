//! Secret key rates and photon-accumulation waiting time across channel loss.

use super::{build_source_distribution, describe_source, load_ctx, CommonArgs};
use crate::app::{core_err, AppError, AppResult};
use crate::config::parse_sweep;
use crate::output::{num, CsvDoc};
use g2guard_core::detection::{waiting_time, LinkBudget};
use g2guard_core::keyrate::{rate_breakdown, ChannelParams};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Named source preset.
    #[arg(long)]
    preset: Option<String>,
    /// Channel loss in dB: single value or start:end:step sweep.
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    det_eff: Option<f64>,
    /// Dark-count yield per pulse.
    #[arg(long)]
    dark_yield: Option<f64>,
    /// Intrinsic error rate.
    #[arg(long)]
    e_int: Option<f64>,
    /// Error-correction inefficiency.
    #[arg(long)]
    ec_f: Option<f64>,
    /// Use the exact dark-count yield form instead of the additive one.
    #[arg(long)]
    exact_yield: bool,
    /// Detections required for the waiting-time column.
    #[arg(long)]
    n_required: Option<f64>,
    /// Repetition rate for the waiting-time column (Hz).
    #[arg(long)]
    rep_rate: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

pub fn run(args: &Args) -> AppResult<()> {
    let ctx = load_ctx(&args.common)?;
    let src = super::resolve_source(args.preset.as_deref(), &ctx)?;
    let d = build_source_distribution(&src)?;

    let sc_channel = ctx.scenario.channel.clone().unwrap_or_default();
    let sc_link = ctx.scenario.link.clone().unwrap_or_default();

    let sweep_spec = args
        .loss
        .clone()
        .or(sc_channel.loss_sweep)
        .or(sc_channel.loss_db.map(|v| v.to_string()))
        .unwrap_or_else(|| "0:40:1".to_string());
    let losses =
        parse_sweep(&sweep_spec).map_err(|e| AppError::config(format!("channel.loss_db: {e}")))?;

    let mut ch = ChannelParams::default();
    ch.detector_efficiency = args
        .det_eff
        .or(sc_channel.detector_efficiency)
        .unwrap_or(ch.detector_efficiency);
    ch.dark_yield = args
        .dark_yield
        .or(sc_channel.dark_yield)
        .unwrap_or(ch.dark_yield);
    ch.intrinsic_error = args
        .e_int
        .or(sc_channel.intrinsic_error)
        .unwrap_or(ch.intrinsic_error);
    ch.baseline_error = sc_channel.baseline_error.unwrap_or(ch.baseline_error);
    ch.ec_efficiency = args
        .ec_f
        .or(sc_channel.ec_efficiency)
        .unwrap_or(ch.ec_efficiency);
    ch.exact_yield = args.exact_yield || sc_channel.exact_yield.unwrap_or(false);

    let n_required = args.n_required.or(sc_link.n_required).unwrap_or(1e5);
    let rep_rate = args
        .rep_rate
        .or(sc_link.repetition_rate_hz)
        .unwrap_or(1e8);

    let mut doc = CsvDoc::new(
        "keyrate",
        vec![
            "loss_db",
            "tau",
            "eta_tot",
            "q_mu",
            "e_mu",
            "omega",
            "r_proposed",
            "r_gllp",
            "t_wait_s",
        ],
    );
    describe_source(&mut doc, &src);
    doc.meta("channel.detector_efficiency", ch.detector_efficiency);
    doc.meta("channel.dark_yield", ch.dark_yield);
    doc.meta("channel.intrinsic_error", ch.intrinsic_error);
    doc.meta("channel.baseline_error", ch.baseline_error);
    doc.meta("channel.ec_efficiency", ch.ec_efficiency);
    doc.meta("channel.exact_yield", ch.exact_yield);
    doc.meta("link.n_required", n_required);
    doc.meta("link.repetition_rate_hz", rep_rate);
    doc.meta("source.mu", d.mu());

    for &loss in &losses {
        ch.loss_db = loss;
        let b = rate_breakdown(&d, &ch).map_err(core_err("keyrate"))?;
        let lb = LinkBudget {
            n_required,
            repetition_rate: rep_rate,
            mu: d.mu(),
            loss_db: loss,
            detector_efficiency: ch.detector_efficiency,
        };
        let t = waiting_time(&lb).map_err(core_err("waiting-time"))?;
        doc.row(vec![
            num(loss),
            num(ch.transmission()),
            num(ch.eta_tot()),
            num(b.q_mu),
            num(b.e_mu),
            num(b.omega),
            num(b.rate_proposed),
            num(b.rate_gllp),
            num(t),
        ]);
    }

    doc.emit(ctx.out.as_deref())
}
