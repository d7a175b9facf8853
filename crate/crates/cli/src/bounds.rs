//! `fblsched bounds`

use fblsched::fbl::{epsilon_validity_floor, BlocklengthBounds, TAU_MAX};
use fblsched::io::{bounds_csv, write_text};
use fblsched::sim::{bounds_rows, BoundsPlan, ExperimentPlan, Preset};
use fblsched::{dbw_to_watts, Error, LinkParams, PacketSpec};

use crate::exit::{Failure, OK};
use crate::BoundsArgs;

pub fn run(a: &BoundsArgs) -> Result<u8, Failure> {
    if let Some(bits) = &a.sweep {
        return sweep(a, bits);
    }
    let link = LinkParams::new(
        a.m_hat,
        dbw_to_watts(a.p_max_dbw),
        LinkParams::default().symbol_duration,
    )?;
    let pkt = PacketSpec::new(a.bits, 0.0, 1.0, a.epsilon, a.gain)?;
    let b = BlocklengthBounds::compute(&pkt, &link)?;
    let row = |name: &str, value: String| println!("{name:<16}{value}");
    row("bits", a.bits.to_string());
    row("epsilon", a.epsilon.to_string());
    row("m_hat", a.m_hat.to_string());
    row("gain", a.gain.to_string());
    row("p_max_watts", format!("{:.6}", link.max_power));
    row("tau", format!("{:.6}", b.tau));
    row("m_tilde", format!("{:.3}", b.min_power_blocklength));
    row("lower", format!("{:.3}", b.lower));
    row("g_e", format!("{:.3}", b.monotone_upper));
    row(
        "g_c",
        b.convex_upper
            .map_or("undefined".into(), |g| format!("{g:.3}")),
    );
    row(
        "epsilon_range",
        format!("({:.6e}, 0.5)", epsilon_validity_floor(a.m_hat)),
    );
    if b.convex_upper.is_none() {
        return Err(Failure::from(Error::TauOutOfRange {
            index: None,
            tau: b.tau,
        })
        .context(format!(
            "g_c needs tau < {TAU_MAX:.6}; raise epsilon above {:.6e} or m_hat",
            epsilon_validity_floor(a.m_hat)
        )));
    }
    Ok(OK)
}

fn sweep(a: &BoundsArgs, bits: &[f64]) -> Result<u8, Failure> {
    let ExperimentPlan::Bounds(BoundsPlan { epsilons, .. }) = Preset::Fig2.plan() else {
        unreachable!("the fig2 preset is a bounds plan");
    };
    let csv = bounds_csv(&bounds_rows(a.m_hat, bits, &epsilons)?);
    match &a.out {
        Some(path) => write_text(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(OK)
}
