//! `fblsched simulate` and `fblsched preset`

use std::path::Path;

use fblsched::io::{
    bounds_csv, policies_csv, policy_trials_csv, read_plan, sweep_csv, sweep_trials_csv, to_json,
    write_json, write_text, LinePlot, PlotSeries,
};
use fblsched::offline::{SolverConfig, SolverKind};
use fblsched::sim::{
    run_plan, BoundsRow, ExperimentPlan, PlanOutput, PolicyPlan, PolicyReport, Preset,
    SeriesReport, SweepAxis, SweepPlan,
};

use crate::exit::{Failure, IO, OK};
use crate::{OfflineSolverArg, SimulateArgs, Tolerances};

pub fn print_preset(preset: Preset) -> Result<u8, Failure> {
    print!("{}", to_json(&preset.plan())?);
    Ok(OK)
}

fn tune(cfg: &mut SolverConfig, solver: Option<OfflineSolverArg>, tol: &Tolerances) {
    *cfg = tol.apply(*cfg);
    match solver {
        Some(OfflineSolverArg::Mlwf) => cfg.solver = SolverKind::Mlwf,
        Some(OfflineSolverArg::Sum) => cfg.solver = SolverKind::Sum,
        None => {}
    }
}

pub fn run(a: &SimulateArgs) -> Result<u8, Failure> {
    let plan = match (a.preset, &a.config) {
        (Some(p), _) => Preset::from(p).plan(),
        (None, Some(path)) => read_plan(path)?,
        (None, None) => unreachable!("clap requires --preset or --config"),
    };
    let mut plan = plan.with_overrides(a.trials, a.seed);
    if let ExperimentPlan::Sweep(SweepPlan { base, .. })
    | ExperimentPlan::Policies(PolicyPlan { base, .. }) = &mut plan
    {
        tune(&mut base.solver, a.solver, &a.tol);
        base.solver.validate()?;
    }
    plan.validate()?;

    std::fs::create_dir_all(&a.out)
        .map_err(|e| Failure::new(IO, e).context(format!("creating {}", a.out.display())))?;
    write_json(&a.out.join("plan.json"), &plan)?;

    let quiet = a.quiet;
    let mut progress = |line: &str| {
        if !quiet {
            eprintln!("{line}");
        }
    };
    let output = run_plan(&plan, &mut progress)?;
    let written = write_outputs(&a.out, &output, !a.no_svg)?;
    if !quiet {
        for name in written {
            eprintln!("wrote {}", a.out.join(name).display());
        }
    }
    Ok(OK)
}

fn write_outputs(dir: &Path, output: &PlanOutput, svg: bool) -> Result<Vec<&'static str>, Failure> {
    let mut files: Vec<(&'static str, String)> = Vec::new();
    match output {
        PlanOutput::Sweep(series) => {
            files.push(("summary.csv", sweep_csv(series)));
            files.push(("trials.csv", sweep_trials_csv(series)));
            if svg {
                let (energy, gap) = sweep_plots(series);
                files.push(("energy.svg", energy.render()));
                files.push(("underestimation.svg", gap.render()));
            }
        }
        PlanOutput::Policies(reports) => {
            files.push(("policies.csv", policies_csv(reports)));
            files.push(("policy_trials.csv", policy_trials_csv(reports)));
            if svg {
                files.push(("energy.svg", policy_plot(reports).render()));
            }
        }
        PlanOutput::Bounds(rows) => {
            files.push(("bounds.csv", bounds_csv(rows)));
            if svg {
                files.push(("bounds.svg", bounds_plot(rows).render()));
            }
        }
    }
    for (name, text) in &files {
        write_text(&dir.join(name), text)?;
    }
    Ok(files.into_iter().map(|(n, _)| n).collect())
}

fn axis_label(axis: SweepAxis) -> &'static str {
    match axis {
        SweepAxis::Epsilon => "packet error probability ε",
        SweepAxis::N => "lifetime multiplier n",
        SweepAxis::Nu => "arrival multiplier ν",
        SweepAxis::Sigma => "Rayleigh scale σ",
    }
}

fn sweep_plots(series: &[SeriesReport]) -> (LinePlot, LinePlot) {
    let axis = series[0].points[0].axis;
    let log_x = matches!(axis, SweepAxis::Epsilon | SweepAxis::Sigma);
    let label = |s: &SeriesReport| {
        s.series
            .map(|(a, v)| format!(" {} = {v}", a.name()))
            .unwrap_or_default()
    };
    let mut energy = Vec::new();
    let mut gap = Vec::new();
    for s in series {
        let pts = |f: fn(&fblsched::sim::ExperimentReport) -> f64| {
            s.points.iter().map(|p| (p.value, f(p))).collect()
        };
        energy.push(PlotSeries {
            name: format!("FBL{}", label(s)),
            points: pts(|p| p.mean_energy_joules),
        });
        energy.push(PlotSeries {
            name: format!("Shannon{}", label(s)),
            points: pts(|p| p.mean_shannon_joules),
        });
        gap.push(PlotSeries {
            name: format!("underestimation{}", label(s)),
            points: pts(|p| p.underestimation_pct),
        });
    }
    let plot = |title: &str, y: &str, series| LinePlot {
        title: title.into(),
        x_label: axis_label(axis).into(),
        y_label: y.into(),
        log_x,
        log_y: false,
        series,
    };
    (
        plot("Mean transmission energy", "energy (J)", energy),
        plot("Shannon-design underestimation", "underestimation (%)", gap),
    )
}

fn policy_plot(reports: &[PolicyReport]) -> LinePlot {
    let line = |name: &str, f: fn(&PolicyReport) -> f64| PlotSeries {
        name: name.into(),
        points: reports.iter().map(|r| (r.sigma, f(r))).collect(),
    };
    LinePlot {
        title: "Energy by scheduling policy".into(),
        x_label: axis_label(SweepAxis::Sigma).into(),
        y_label: "energy (J)".into(),
        log_x: true,
        log_y: true,
        series: vec![
            line("offline MLWF", |r| r.mean_offline_mlwf),
            line("offline SUM", |r| r.mean_offline_sum),
            line("rolling window", |r| r.mean_rolling_window),
            line("myopic", |r| r.mean_myopic),
        ],
    }
}

fn bounds_plot(rows: &[BoundsRow]) -> LinePlot {
    let mut bits: Vec<f64> = rows.iter().map(|r| r.bits).collect();
    bits.dedup();
    let mut series = Vec::new();
    for &b in &bits {
        let of = |f: fn(&BoundsRow) -> Option<f64>| -> Vec<(f64, f64)> {
            rows.iter()
                .filter(|r| r.bits == b)
                .filter_map(|r| f(r).map(|y| (r.epsilon, y)))
                .collect()
        };
        series.push(PlotSeries {
            name: format!("g_E, N = {b}"),
            points: of(|r| Some(r.g_e)),
        });
        series.push(PlotSeries {
            name: format!("g_C, N = {b}"),
            points: of(|r| r.g_c),
        });
    }
    LinePlot {
        title: "Blocklength thresholds".into(),
        x_label: "packet error probability ε".into(),
        y_label: "blocklength (symbols)".into(),
        log_x: true,
        log_y: true,
        series,
    }
}
