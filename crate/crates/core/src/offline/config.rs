use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbl::curve::DEFAULT_POWER_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// Multi-level water filling (convex mode only).
    Mlwf,
    /// Successive upper-bound minimization with a proximal term.
    Sum,
    /// Exhaustive grid search; a test oracle.
    BruteForce,
    /// Online rolling-window re-optimization.
    RollingWindow,
    /// Online baseline that stretches each packet to its deadline.
    Myopic,
}

/// Tolerances and knobs shared by the offline solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub solver: SolverKind,
    /// Bisection width on blocklength when inverting the energy slope (symbols).
    pub eps1: f64,
    /// Bisection width on power (W).
    pub eps2: f64,
    pub kkt_tol: f64,
    /// Proximal weight; estimated from the start point when absent.
    pub gamma: Option<f64>,
    /// Stop once `Σ (m^r − m^{r−1})²` falls below this.
    pub sum_tol: f64,
    pub max_iterations: usize,
    /// Grid step of the brute-force oracle (symbols).
    pub grid_resolution: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            solver: SolverKind::Mlwf,
            eps1: 1e-6,
            eps2: DEFAULT_POWER_TOL,
            kkt_tol: 1e-5,
            gamma: None,
            sum_tol: 1e-12,
            max_iterations: 100_000,
            grid_resolution: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn with_solver(mut self, solver: SolverKind) -> Self {
        self.solver = solver;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eps1", self.eps1),
            ("eps2", self.eps2),
            ("kkt_tol", self.kkt_tol),
            ("sum_tol", self.sum_tol),
            ("grid_resolution", self.grid_resolution),
            ("gamma", self.gamma.unwrap_or(1.0)),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain {
                    function: name,
                    value: v,
                });
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::Domain {
                function: "max_iterations",
                value: 0.0,
            });
        }
        Ok(())
    }
}
