//! Exhaustive grid search over small instances, used to validate the
//! solvers.

use crate::error::{Error, Result};
use crate::offline::config::{SolverConfig, SolverKind};
use crate::offline::instance::ProblemInstance;
use crate::offline::schedule::{Schedule, SolveStatus, SolverInfo};

pub const MAX_ORACLE_PACKETS: usize = 4;
/// Cap on enumerated grid points.
pub const MAX_ORACLE_VOLUME: f64 = 2e8;

/// Grid search on `m_k = ℓ_k + i·resolution` for all but the last packet,
/// which takes whatever remains of `D_K`.
pub fn brute_force_oracle(inst: &ProblemInstance, resolution: f64) -> Result<Schedule> {
    let n = inst.len();
    if n > MAX_ORACLE_PACKETS {
        return Err(Error::Domain {
            function: "brute_force_oracle",
            value: n as f64,
        });
    }
    if !(resolution > 0.0) {
        return Err(Error::Domain {
            function: "brute_force_oracle",
            value: resolution,
        });
    }
    let cfg = SolverConfig {
        solver: SolverKind::BruteForce,
        grid_resolution: resolution,
        ..SolverConfig::default()
    };
    let link = inst.link();
    let energy = |k: usize, m: f64| -> f64 {
        let curve = &inst.curves()[k];
        curve
            .power_of_blocklength(m, link.max_power, cfg.eps2)
            .map(|p| m * p)
            .unwrap_or(f64::INFINITY)
    };

    // Energy tables for the free packets.
    let mut tables: Vec<Vec<f64>> = Vec::with_capacity(n.saturating_sub(1));
    let mut volume = 1.0;
    for k in 0..n - 1 {
        let steps = ((inst.upper(k) - inst.lower(k)) / resolution).floor();
        if steps < 0.0 {
            return Err(Error::Infeasible(format!("packet {k} has an empty box")));
        }
        volume *= steps + 1.0;
        if volume > MAX_ORACLE_VOLUME {
            return Err(Error::Domain {
                function: "brute_force_oracle",
                value: volume,
            });
        }
        let lower = inst.lower(k);
        tables.push(
            (0..=steps as usize)
                .map(|i| energy(k, lower + i as f64 * resolution))
                .collect(),
        );
    }
    // The last packet's length is D_K − Σℓ − j·resolution.
    let base: f64 = (0..n - 1).map(|k| inst.lower(k)).sum();
    let last_max: usize = tables.iter().map(|t| t.len() - 1).sum();
    let last = n - 1;
    let last_len = |j: usize| inst.horizon() - base - j as f64 * resolution;
    let last_table: Vec<f64> = (0..=last_max)
        .map(|j| {
            let m = last_len(j);
            if m >= inst.lower(last) && m <= inst.upper(last) {
                energy(last, m)
            } else {
                f64::INFINITY
            }
        })
        .collect();

    let mut best = (f64::INFINITY, vec![0usize; n.saturating_sub(1)]);
    let mut idx = vec![0usize; n.saturating_sub(1)];
    search(
        inst,
        resolution,
        &tables,
        &last_table,
        0,
        0.0,
        0.0,
        0,
        &mut idx,
        &mut best,
    );
    if !best.0.is_finite() {
        return Err(Error::Infeasible(
            "no grid point satisfies the constraints".into(),
        ));
    }
    let mut m: Vec<f64> = best
        .1
        .iter()
        .enumerate()
        .map(|(k, &i)| inst.lower(k) + i as f64 * resolution)
        .collect();
    m.push(last_len(best.1.iter().sum()));
    let info = SolverInfo::new(&cfg, inst.mode(), SolveStatus::Grid, 1);
    Schedule::build(inst, &m, None, info)
}

#[allow(clippy::too_many_arguments)]
fn search(
    inst: &ProblemInstance,
    res: f64,
    tables: &[Vec<f64>],
    last_table: &[f64],
    k: usize,
    cum: f64,
    acc: f64,
    steps: usize,
    idx: &mut Vec<usize>,
    best: &mut (f64, Vec<usize>),
) {
    if k == tables.len() {
        let total = acc + last_table[steps];
        if total < best.0 {
            best.0 = total;
            best.1.clone_from(idx);
        }
        return;
    }
    let lo = inst.next_arrival(k);
    let hi = inst.packets()[k].deadline;
    let lower = inst.lower(k);
    for (i, &e) in tables[k].iter().enumerate() {
        let s = cum + lower + i as f64 * res;
        if s > hi {
            break;
        }
        if s < lo || acc + e >= best.0 {
            continue;
        }
        idx[k] = i;
        search(
            inst,
            res,
            tables,
            last_table,
            k + 1,
            s,
            acc + e,
            steps + i,
            idx,
            best,
        );
    }
}

/// `resolution · Σ_k max |E'_k|` over each box: how far the best grid
/// point can sit above the continuous optimum.
pub fn grid_energy_bound(inst: &ProblemInstance, resolution: f64, eps2: f64) -> Result<f64> {
    let pmax = inst.link().max_power;
    let mut sum = 0.0;
    for (k, curve) in inst.curves().iter().enumerate() {
        let mut worst: f64 = 0.0;
        for m in [inst.lower(k), inst.upper(k)] {
            let p = curve.power_of_blocklength(m, pmax, eps2)?;
            worst = worst.max(curve.energy_derivative_at(m, p * curve.gain()).abs());
        }
        sum += worst;
    }
    Ok(resolution * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbl::shannon::{shannon_energy_derivative, shannon_phi};
    use crate::offline::instance::BoundMode;
    use crate::offline::mlwf::solve_mlwf;
    use crate::types::{LinkParams, PacketSpec};

    #[test]
    fn single_packet_takes_deadline() {
        let p = PacketSpec::new(1.2e4, 0.0, 1500.0, 5e-4, 100.0).unwrap();
        let inst = ProblemInstance::new(vec![p], LinkParams::default(), BoundMode::Convex).unwrap();
        let s = brute_force_oracle(&inst, 1.0).unwrap();
        assert_eq!(s.packets[0].m, 1500.0);
    }

    #[test]
    fn shannon_pair_matches_equal_marginals() {
        // Loose constraints: the optimum equalizes the Shannon slopes.
        let a = PacketSpec::new(1.2e4, 0.0, 3000.0, 0.5, 100.0).unwrap();
        let b = PacketSpec::new(1.2e4, 500.0, 3200.0, 0.5, 30.0).unwrap();
        let inst =
            ProblemInstance::new(vec![a, b], LinkParams::default(), BoundMode::Convex).unwrap();
        let grid = brute_force_oracle(&inst, 1.0).unwrap();

        // Bisect the common level: φ_a(ω) + φ_b(ω) = 3200.
        let sum = |w: f64| shannon_phi(w, &a).unwrap() + shannon_phi(w, &b).unwrap();
        let (mut lo, mut hi) = (
            shannon_energy_derivative(200.0, &b),
            shannon_energy_derivative(3000.0, &a),
        );
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sum(mid) < 3200.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let ma = shannon_phi(lo, &a).unwrap();
        assert!(
            (grid.packets[0].m - ma).abs() <= 1.0,
            "{} vs {ma}",
            grid.packets[0].m
        );

        let wf = solve_mlwf(&inst, &SolverConfig::default()).unwrap();
        assert!((wf.packets[0].m - ma).abs() < 1e-4);
    }
}
