//! CSV tables with fixed column order. Numbers use the shortest text that
//! parses back to the same `f64`; missing values are empty fields.

use std::path::Path;

use crate::io::DocumentError;
use crate::online::{Event, EventKind};
use crate::sim::{BoundsRow, PolicyReport, SeriesReport};

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn render(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    // Writing to memory cannot fail.
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(&r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

pub const SWEEP_HEADER: [&str; 10] = [
    "series_axis",
    "series_value",
    "axis",
    "value",
    "included",
    "excluded",
    "mean_energy_j",
    "mean_shannon_j",
    "underestimated_j",
    "underestimation_pct",
];

/// One row per grid point.
pub fn sweep_csv(series: &[SeriesReport]) -> String {
    let mut rows = Vec::new();
    for s in series {
        let (sa, sv) = match s.series {
            Some((a, v)) => (a.name().to_string(), num(v)),
            None => (String::new(), String::new()),
        };
        for p in &s.points {
            rows.push(vec![
                sa.clone(),
                sv.clone(),
                p.axis.name().to_string(),
                num(p.value),
                p.included.to_string(),
                p.excluded.to_string(),
                num(p.mean_energy_joules),
                num(p.mean_shannon_joules),
                num(p.underestimated_joules),
                num(p.underestimation_pct),
            ]);
        }
    }
    render(&SWEEP_HEADER, rows)
}

pub const SWEEP_TRIALS_HEADER: [&str; 8] = [
    "series_value",
    "axis",
    "value",
    "channel",
    "generation",
    "energy_j",
    "shannon_j",
    "note",
];

/// One row per trial of every grid point.
pub fn sweep_trials_csv(series: &[SeriesReport]) -> String {
    let mut rows = Vec::new();
    for s in series {
        let sv = s.series.map(|(_, v)| num(v)).unwrap_or_default();
        for p in &s.points {
            for t in &p.trials {
                rows.push(vec![
                    sv.clone(),
                    p.axis.name().to_string(),
                    num(p.value),
                    t.channel.to_string(),
                    t.generation.to_string(),
                    opt(t.energy_joules),
                    opt(t.shannon_joules),
                    t.note.clone().unwrap_or_default(),
                ]);
            }
        }
    }
    render(&SWEEP_TRIALS_HEADER, rows)
}

pub const POLICIES_HEADER: [&str; 9] = [
    "sigma",
    "included",
    "excluded",
    "offline_mlwf_j",
    "offline_sum_j",
    "rolling_window_j",
    "myopic_j",
    "rolling_window_drops",
    "myopic_drops",
];

/// One row per σ.
pub fn policies_csv(reports: &[PolicyReport]) -> String {
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                num(r.sigma),
                r.included.to_string(),
                r.excluded.to_string(),
                num(r.mean_offline_mlwf),
                num(r.mean_offline_sum),
                num(r.mean_rolling_window),
                num(r.mean_myopic),
                r.rolling_window_drops.to_string(),
                r.myopic_drops.to_string(),
            ]
        })
        .collect();
    render(&POLICIES_HEADER, rows)
}

pub const POLICY_TRIALS_HEADER: [&str; 10] = [
    "sigma",
    "channel",
    "generation",
    "offline_mlwf_j",
    "offline_sum_j",
    "rolling_window_j",
    "myopic_j",
    "rolling_window_drops",
    "myopic_drops",
    "note",
];

pub fn policy_trials_csv(reports: &[PolicyReport]) -> String {
    let mut rows = Vec::new();
    for r in reports {
        for t in &r.trials {
            rows.push(vec![
                num(r.sigma),
                t.channel.to_string(),
                t.generation.to_string(),
                opt(t.offline_mlwf),
                opt(t.offline_sum),
                opt(t.rolling_window),
                opt(t.myopic),
                t.rolling_window_drops.to_string(),
                t.myopic_drops.to_string(),
                t.note.clone().unwrap_or_default(),
            ]);
        }
    }
    render(&POLICY_TRIALS_HEADER, rows)
}

pub const BOUNDS_HEADER: [&str; 6] = ["bits", "epsilon", "tau", "lower", "g_e", "g_c"];

pub fn bounds_csv(rows: &[BoundsRow]) -> String {
    let rows = rows
        .iter()
        .map(|r| {
            vec![
                num(r.bits),
                num(r.epsilon),
                num(r.tau),
                num(r.lower),
                num(r.g_e),
                opt(r.g_c),
            ]
        })
        .collect();
    render(&BOUNDS_HEADER, rows)
}

pub const EVENTS_HEADER: [&str; 7] = [
    "time",
    "event",
    "packet",
    "m",
    "p_watts",
    "energy_watt_symbols",
    "note",
];

/// Online event log.
pub fn events_csv(events: &[Event]) -> String {
    let rows = events
        .iter()
        .map(|e| {
            let kind = match e.event {
                EventKind::Arrive => "arrive",
                EventKind::Commit => "commit",
                EventKind::Drop => "drop",
            };
            vec![
                num(e.time),
                kind.to_string(),
                e.packet.to_string(),
                num(e.m),
                num(e.p_watts),
                num(e.energy_watt_symbols),
                e.note.clone(),
            ]
        })
        .collect();
    render(&EVENTS_HEADER, rows)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), DocumentError> {
    std::fs::write(path, text).map_err(|e| DocumentError::io(path, e))
}
