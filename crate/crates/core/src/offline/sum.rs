//! Successive upper-bound minimization.
//!
//! Each iteration replaces every energy by its tangent plus a proximal
//! term `γ_k/2·(m − m^r)²` and solves the resulting separable quadratic
//! under the ladder constraints with the water-filling routine. The
//! per-packet minimizer at level `ω` is `clip(m^r + (ω − E'(m^r))/γ_k)`.
//!
//! With a fixed `γ` every packet shares it. Otherwise `γ_k` is the packet's
//! own curvature `E''_k(m^r)`, refreshed after every accepted step. Either
//! way all weights double whenever a step raises the objective, and an
//! accepted step halves the accumulated factor again.

use crate::error::Result;
use crate::offline::config::{SolverConfig, SolverKind};
use crate::offline::feasibility::feasible_point;
use crate::offline::instance::{BoundMode, ProblemInstance};
use crate::offline::schedule::{Duals, Schedule, SolveStatus, SolverInfo};
use crate::offline::waterfill::{solve_ladder, Coordinates, Ladder};

struct Prox<'a> {
    inst: &'a ProblemInstance,
    center: &'a [f64],
    grad: &'a [f64],
    gamma: &'a [f64],
}

impl Coordinates for Prox<'_> {
    fn len(&self) -> usize {
        self.inst.len()
    }
    fn lower(&self, k: usize) -> f64 {
        self.inst.lower(k)
    }
    fn upper(&self, k: usize) -> f64 {
        self.inst.upper(k)
    }
    fn level_range(&self, k: usize) -> (f64, f64) {
        let (g, c, w) = (self.grad[k], self.center[k], self.gamma[k]);
        (g + w * (self.lower(k) - c), g + w * (self.upper(k) - c))
    }
    fn response(&self, k: usize, omega: f64) -> f64 {
        (self.center[k] + (omega - self.grad[k]) / self.gamma[k])
            .clamp(self.lower(k), self.upper(k))
    }
}

/// Energy (Watt-symbols), slope and curvature at every `m_k`.
struct Evaluation {
    total: f64,
    grad: Vec<f64>,
    curvature: Vec<f64>,
}

fn evaluate(inst: &ProblemInstance, m: &[f64], eps2: f64) -> Result<Evaluation> {
    let pmax = inst.link().max_power;
    let mut total = 0.0;
    let mut grad = Vec::with_capacity(m.len());
    let mut curvature = Vec::with_capacity(m.len());
    for (curve, &mk) in inst.curves().iter().zip(m) {
        let p = curve.power_of_blocklength(mk, pmax, eps2)?;
        let x = p * curve.gain();
        total += mk * p;
        grad.push(curve.energy_derivative_at(mk, x));
        curvature.push(curve.energy_second_derivative_at(mk, x));
    }
    Ok(Evaluation {
        total,
        grad,
        curvature,
    })
}

/// Proximal weights from the curvatures, floored so that concave or flat
/// pieces still take bounded steps.
fn curvature_weights(curve: &[f64]) -> Vec<f64> {
    let top = curve.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let floor = (1e-6 * top).max(f64::MIN_POSITIVE);
    curve
        .iter()
        .map(|&c| if c > floor { c } else { floor })
        .collect()
}

/// Objective after every accepted iterate, starting with the initial point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SumTrace {
    pub objectives: Vec<f64>,
    pub gamma_doublings: usize,
}

pub fn solve_sum(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<Schedule> {
    solve_sum_traced(inst, cfg).map(|(s, _)| s)
}

pub fn solve_sum_traced(
    inst: &ProblemInstance,
    cfg: &SolverConfig,
) -> Result<(Schedule, SumTrace)> {
    cfg.validate()?;
    let eps2 = cfg.eps2;
    let n = inst.len();
    let mut m = feasible_point(inst)?;
    let mut ev = evaluate(inst, &m, eps2)?;
    let base = |ev: &Evaluation| match cfg.gamma {
        Some(g) => vec![g; n],
        None => curvature_weights(&ev.curvature),
    };
    let mut weights = base(&ev);
    let mut factor = 1.0f64;
    let mut trace = SumTrace {
        objectives: vec![ev.total],
        gamma_doublings: 0,
    };
    let lo = inst.cumulative_lower();
    let hi = inst.cumulative_upper();
    let ladder = Ladder {
        lo: &lo,
        hi: &hi,
        tol: 1e-9,
    };

    let mut omega = ev.grad.clone();
    let mut converged = false;
    let mut iterations = 0;
    let mut gamma: Vec<f64> = weights.clone();
    while iterations < cfg.max_iterations {
        iterations += 1;
        gamma = weights.iter().map(|w| w * factor).collect();
        let sub = solve_ladder(
            &Prox {
                inst,
                center: &m,
                grad: &ev.grad,
                gamma: &gamma,
            },
            &ladder,
        )?;
        let next = evaluate(inst, &sub.m, eps2)?;
        if next.total > ev.total + 1e-12 * ev.total.abs() && factor < 1e300 {
            factor *= 2.0;
            trace.gamma_doublings += 1;
            continue;
        }
        let step: f64 = sub.m.iter().zip(&m).map(|(a, b)| (a - b) * (a - b)).sum();
        m = sub.m;
        ev = next;
        omega = sub.omega;
        trace.objectives.push(ev.total);
        if step < cfg.sum_tol {
            converged = true;
            break;
        }
        if cfg.gamma.is_none() {
            weights = base(&ev);
            factor = (0.5 * factor).max(1.0);
        }
    }

    let status = match (converged, inst.mode()) {
        (false, _) => SolveStatus::MaxIterations,
        (true, BoundMode::Convex) => SolveStatus::Optimal,
        (true, BoundMode::General) => SolveStatus::Stationary,
    };
    let cfg = cfg.with_solver(SolverKind::Sum);
    let mut info = SolverInfo::new(&cfg, inst.mode(), status, iterations);
    info.gamma = Some(gamma.iter().fold(0.0f64, |a, &b| a.max(b)));
    let mut sched = Schedule::build(inst, &m, Some(Duals::from_levels(omega)), info)?;
    if converged && sched.kkt_residual.is_some_and(|r| r > cfg.kkt_tol) {
        sched.solver.status = SolveStatus::Stalled;
    }
    Ok((sched, trace))
}
