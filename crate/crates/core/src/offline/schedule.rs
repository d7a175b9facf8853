//! Solved schedules and their KKT certificate.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::offline::config::{SolverConfig, SolverKind};
use crate::offline::instance::{BoundMode, ProblemInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    /// KKT point of a convex problem.
    Optimal,
    /// KKT point without a convexity guarantee.
    Stationary,
    /// Iteration cap reached; the best iterate is returned.
    MaxIterations,
    /// Steps fell below the stopping tolerance but the KKT residual is
    /// above `kkt_tol`.
    Stalled,
    /// Best point of a finite grid.
    Grid,
    /// Produced by an online policy.
    Online,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduledPacket {
    pub m: f64,
    pub p_watts: f64,
    pub energy_watt_symbols: f64,
    pub energy_joules: f64,
    pub start: f64,
    pub finish: f64,
}

/// Multipliers of the arrival (`mu`) and deadline (`lambda`) cumulative
/// constraints, and the water levels `omega_k = Σ_{i≥k} (mu_i − lambda_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Duals {
    pub mu: Vec<f64>,
    pub lambda: Vec<f64>,
    pub omega: Vec<f64>,
}

impl Duals {
    /// Splits the level jumps `omega_j − omega_{j+1}` (with `omega_{K+1} = 0`)
    /// into their positive and negative parts.
    pub fn from_levels(omega: Vec<f64>) -> Self {
        let n = omega.len();
        let mut mu = vec![0.0; n];
        let mut lambda = vec![0.0; n];
        for j in 0..n {
            let next = if j + 1 < n { omega[j + 1] } else { 0.0 };
            let jump = omega[j] - next;
            mu[j] = jump.max(0.0);
            lambda[j] = (-jump).max(0.0);
        }
        Self { mu, lambda, omega }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverInfo {
    pub solver: SolverKind,
    pub mode: BoundMode,
    pub status: SolveStatus,
    pub iterations: usize,
    pub gamma: Option<f64>,
    pub eps1: f64,
    pub eps2: f64,
    pub kkt_tol: f64,
}

impl SolverInfo {
    pub fn new(
        cfg: &SolverConfig,
        mode: BoundMode,
        status: SolveStatus,
        iterations: usize,
    ) -> Self {
        Self {
            solver: cfg.solver,
            mode,
            status,
            iterations,
            gamma: None,
            eps1: cfg.eps1,
            eps2: cfg.eps2,
            kkt_tol: cfg.kkt_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub packets: Vec<ScheduledPacket>,
    pub duals: Option<Duals>,
    pub kkt_residual: Option<f64>,
    pub total_energy_watt_symbols: f64,
    pub total_energy_joules: f64,
    pub solver: SolverInfo,
}

impl Schedule {
    /// Evaluates powers and energies for back-to-back blocklengths `m` and,
    /// when duals are given, the KKT residual.
    pub fn build(
        inst: &ProblemInstance,
        m: &[f64],
        duals: Option<Duals>,
        solver: SolverInfo,
    ) -> Result<Self> {
        let link = inst.link();
        let mut packets = Vec::with_capacity(m.len());
        let mut t = 0.0;
        for (curve, &mk) in inst.curves().iter().zip(m) {
            let p = curve.power_of_blocklength(mk, link.max_power, solver.eps2)?;
            let e = mk * p;
            packets.push(ScheduledPacket {
                m: mk,
                p_watts: p,
                energy_watt_symbols: e,
                energy_joules: link.joules(e),
                start: t,
                finish: t + mk,
            });
            t += mk;
        }
        let total: f64 = packets.iter().map(|p| p.energy_watt_symbols).sum();
        let mut sched = Self {
            packets,
            duals,
            kkt_residual: None,
            total_energy_watt_symbols: total,
            total_energy_joules: link.joules(total),
            solver,
        };
        if sched.duals.is_some() {
            sched.kkt_residual = Some(kkt_residual(inst, &sched));
        }
        Ok(sched)
    }

    pub fn blocklengths(&self) -> Vec<f64> {
        self.packets.iter().map(|p| p.m).collect()
    }

    pub fn powers(&self) -> Vec<f64> {
        self.packets.iter().map(|p| p.p_watts).collect()
    }
}

/// Largest violation among primal feasibility, dual signs, complementary
/// slackness and stationarity.
///
/// Primal terms are in symbols. Dual terms are divided by
/// `max(1, max |omega|)` so the residual is insensitive to the energy
/// unit. A coordinate on a box face only needs the level on the correct
/// side of its boundary marginal.
pub fn kkt_residual(inst: &ProblemInstance, sched: &Schedule) -> f64 {
    let n = inst.len();
    let m: Vec<f64> = sched.blocklengths();
    if m.len() != n {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;

    let mut s = 0.0;
    for k in 0..n {
        worst = worst.max(inst.lower(k) - m[k]).max(m[k] - inst.upper(k));
        s += m[k];
        worst = worst
            .max(inst.next_arrival(k) - s)
            .max(s - inst.packets()[k].deadline);
    }
    worst = worst.max((s - inst.horizon()).abs());

    let Some(d) = &sched.duals else {
        return worst;
    };
    if d.mu.len() != n || d.lambda.len() != n || d.omega.len() != n {
        return f64::INFINITY;
    }
    let scale = d.omega.iter().fold(1.0f64, |a, w| a.max(w.abs()));
    let link = inst.link();
    let eps2 = sched.solver.eps2;

    let mut s = 0.0;
    for k in 0..n {
        s += m[k];
        worst = worst.max(-d.mu[k] / scale).max(-d.lambda[k] / scale);
        if k + 1 < n {
            worst = worst
                .max(d.mu[k] * (s - inst.next_arrival(k)) / scale)
                .max(d.lambda[k] * (inst.packets()[k].deadline - s) / scale);
        }
        let next = if k + 1 < n { d.omega[k + 1] } else { 0.0 };
        worst = worst.max((d.omega[k] - next - (d.mu[k] - d.lambda[k])).abs() / scale);

        let (l, u) = (inst.lower(k), inst.upper(k));
        let face = 1e-9 * (1.0 + u.abs());
        if u - l <= face {
            continue;
        }
        let curve = &inst.curves()[k];
        let slope = |mk: f64| -> f64 {
            curve
                .power_of_blocklength(mk, link.max_power, eps2)
                .map(|p| curve.energy_derivative_at(mk, p * curve.gain()))
                .unwrap_or(f64::NAN)
        };
        let w = d.omega[k];
        let gap = if m[k] <= l + face {
            (w - slope(l)).max(0.0)
        } else if m[k] >= u - face {
            (slope(u) - w).max(0.0)
        } else {
            (slope(m[k]) - w).abs()
        };
        if gap.is_nan() {
            return f64::INFINITY;
        }
        worst = worst.max(gap / scale);
    }
    worst
}
