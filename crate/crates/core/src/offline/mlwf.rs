//! Multi-level water filling on the true energy functions (convex mode).

use crate::error::{Error, Result};
use crate::fbl::curve::RateCurve;
use crate::fbl::roots::newton_bisect;
use crate::offline::config::{SolverConfig, SolverKind};
use crate::offline::instance::{BoundMode, ProblemInstance};
use crate::offline::schedule::{Duals, Schedule, SolveStatus, SolverInfo};
use crate::offline::waterfill::{solve_ladder, Coordinates, Ladder};
use crate::types::{LinkParams, PacketSpec};

/// Energy slope `E'(m)` with power found by bisection to width `eps2`.
fn slope(curve: &RateCurve, m: f64, max_power: f64, eps2: f64) -> Result<f64> {
    let p = curve.power_of_blocklength(m, max_power, eps2)?;
    Ok(curve.energy_derivative_at(m, p * curve.gain()))
}

/// Blocklength in `[lower, upper]` whose energy slope is `omega`, given
/// the slopes at both ends; clipped outside them. The bracket is shrunk to
/// width `eps1`, with Newton steps on the slope where they help.
#[allow(clippy::too_many_arguments)]
fn invert_slope(
    curve: &RateCurve,
    omega: f64,
    (lower, upper): (f64, f64),
    (d_lower, d_upper): (f64, f64),
    max_power: f64,
    eps1: f64,
    eps2: f64,
) -> f64 {
    if omega <= d_lower {
        return lower;
    }
    if omega >= d_upper {
        return upper;
    }
    let g = curve.gain();
    let f = |m: f64| match curve.power_of_blocklength(m, max_power, eps2) {
        Ok(p) => (
            curve.energy_derivative_at(m, p * g) - omega,
            curve.energy_second_derivative_at(m, p * g),
        ),
        // Only reachable below the shortest feasible blocklength.
        Err(_) => (-1.0, 0.0),
    };
    let t = (omega - d_lower) / (d_upper - d_lower);
    newton_bisect(f, lower, upper, lower + t * (upper - lower), eps1)
}

/// Inverse of the energy slope on the packet's convex box
/// `[max(m̂, m̃), min(g_E, g_C, D − G)]`, clipped to that box.
pub fn phi(omega: f64, pkt: &PacketSpec, link: &LinkParams, cfg: &SolverConfig) -> Result<f64> {
    let inst = ProblemInstance::new(
        vec![PacketSpec {
            arrival: 0.0,
            deadline: pkt.lifetime(),
            ..*pkt
        }],
        *link,
        BoundMode::Convex,
    )?;
    let coords = EnergyCoords::new(&inst, cfg)?;
    Ok(coords.response(0, omega))
}

struct EnergyCoords<'a> {
    inst: &'a ProblemInstance,
    d_lower: Vec<f64>,
    d_upper: Vec<f64>,
    eps1: f64,
    eps2: f64,
}

impl<'a> EnergyCoords<'a> {
    fn new(inst: &'a ProblemInstance, cfg: &SolverConfig) -> Result<Self> {
        let pmax = inst.link().max_power;
        let mut d_lower = Vec::with_capacity(inst.len());
        let mut d_upper = Vec::with_capacity(inst.len());
        for (k, curve) in inst.curves().iter().enumerate() {
            let (l, u) = (inst.lower(k), inst.upper(k));
            if l > u {
                return Err(Error::Infeasible(format!(
                    "packet {k}: lower blocklength bound {l} exceeds upper bound {u}"
                )));
            }
            d_lower.push(slope(curve, l, pmax, cfg.eps2)?);
            d_upper.push(slope(curve, u, pmax, cfg.eps2)?);
        }
        Ok(Self {
            inst,
            d_lower,
            d_upper,
            eps1: cfg.eps1,
            eps2: cfg.eps2,
        })
    }
}

impl Coordinates for EnergyCoords<'_> {
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
        (self.d_lower[k], self.d_upper[k])
    }
    fn response(&self, k: usize, omega: f64) -> f64 {
        invert_slope(
            &self.inst.curves()[k],
            omega,
            (self.lower(k), self.upper(k)),
            (self.d_lower[k], self.d_upper[k]),
            self.inst.link().max_power,
            self.eps1,
            self.eps2,
        )
    }
}

/// Globally optimal schedule of a convex-mode instance.
pub fn solve_mlwf(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<Schedule> {
    if inst.mode() != BoundMode::Convex {
        return Err(Error::NotConvexMode);
    }
    cfg.validate()?;
    let coords = EnergyCoords::new(inst, cfg)?;
    let lo = inst.cumulative_lower();
    let hi = inst.cumulative_upper();
    let sol = solve_ladder(
        &coords,
        &Ladder {
            lo: &lo,
            hi: &hi,
            tol: cfg.eps1,
        },
    )?;
    let cfg = cfg.with_solver(SolverKind::Mlwf);
    let info = SolverInfo::new(&cfg, inst.mode(), SolveStatus::Optimal, sol.segments);
    let mut sched = Schedule::build(inst, &sol.m, Some(Duals::from_levels(sol.omega)), info)?;
    if sched.kkt_residual.is_some_and(|r| r > cfg.kkt_tol) {
        sched.solver.status = SolveStatus::Stalled;
    }
    Ok(sched)
}
