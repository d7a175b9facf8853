//! `fblsched solve`

use std::io::Write;

use fblsched::io::{
    events_csv, read_instance, to_json, write_json, write_text, InstanceDocument, ScheduleDocument,
};
use fblsched::offline::{self, Schedule, SolveStatus, SolverConfig, SolverKind};
use fblsched::online::{run_online, OnlineConfig, OnlineRun, Policy};
use fblsched::Error;

use crate::exit::{Failure, INTERNAL, IO, NO_CONVERGENCE, OK};
use crate::SolveArgs;

pub fn run(a: &SolveArgs) -> Result<u8, Failure> {
    let doc = read_instance(&a.instance)?;
    let kind = SolverKind::from(a.solver);
    let cfg = a.tol.apply(SolverConfig::default().with_solver(kind));
    cfg.validate()?;
    let policy = match kind {
        SolverKind::RollingWindow => Some(Policy::RollingWindow),
        SolverKind::Myopic => Some(Policy::Myopic),
        _ => None,
    };
    let (schedule, run) = match policy {
        Some(p) => {
            let (schedule, run) = solve_online(&doc, p, &cfg)?;
            (schedule, Some(run))
        }
        None => (solve_offline(&doc, a, &cfg)?, None),
    };

    let out = ScheduleDocument::from(schedule.clone());
    out.validate(doc.link.symbol_duration_s).map_err(|e| {
        Failure::new(INTERNAL, e).context("solver produced an inconsistent schedule")
    })?;
    match &a.out {
        Some(path) => write_json(path, &out)?,
        None => {
            let text = to_json(&out)?;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Failure::new(IO, e))?;
        }
    }
    if let (Some(path), Some(run)) = (&a.events, &run) {
        write_text(path, &events_csv(&run.events))?;
    }
    summarize(&schedule, run.as_ref());

    Ok(match schedule.solver.status {
        SolveStatus::MaxIterations | SolveStatus::Stalled => NO_CONVERGENCE,
        _ => OK,
    })
}

fn solve_offline(
    doc: &InstanceDocument,
    a: &SolveArgs,
    cfg: &SolverConfig,
) -> Result<Schedule, Failure> {
    let inst = doc.to_instance(a.bounds.mode())?;
    offline::solve(&inst, cfg).map_err(|e| {
        let hint = match e {
            Error::NotConvexMode => "some packet has no convexity threshold; use --solver sum",
            Error::TauOutOfRange { .. } => "use --bounds general",
            _ => "",
        };
        let f = Failure::from(e);
        if hint.is_empty() {
            f
        } else {
            f.context(hint)
        }
    })
}

fn solve_online(
    doc: &InstanceDocument,
    policy: Policy,
    cfg: &SolverConfig,
) -> Result<(Schedule, OnlineRun), Failure> {
    let stream = doc.to_stream()?;
    let link = doc.link();
    let online = OnlineConfig {
        solver: cfg.with_solver(SolverKind::Mlwf),
    };
    let run = run_online(&stream, &link, policy, &online);
    Ok((run.schedule(&link, &online), run))
}

/// Human-readable summary on stderr, so stdout stays a clean document.
fn summarize(s: &Schedule, run: Option<&OnlineRun>) {
    let info = &s.solver;
    eprintln!(
        "solver {:?}, mode {:?}, status {:?}, {} iterations",
        info.solver, info.mode, info.status, info.iterations
    );
    eprintln!(
        "{:>4} {:>14} {:>14} {:>14} {:>14}",
        "k", "start", "m", "p (W)", "energy (J)"
    );
    for (k, p) in s.packets.iter().enumerate() {
        eprintln!(
            "{k:>4} {:>14.3} {:>14.3} {:>14.6} {:>14.6e}",
            p.start, p.m, p.p_watts, p.energy_joules
        );
    }
    eprintln!(
        "total energy {:.9e} J ({:.9e} W·symbols)",
        s.total_energy_joules, s.total_energy_watt_symbols
    );
    if let Some(r) = s.kkt_residual {
        eprintln!("kkt residual {r:.3e} (tolerance {:.1e})", info.kkt_tol);
    }
    if let Some(run) = run {
        if !run.dropped.is_empty() {
            eprintln!("dropped packets {:?}", run.dropped);
        }
    }
}
