//! Offline scheduling: instances, feasibility and the solvers.

pub mod config;
pub mod feasibility;
pub mod instance;
pub mod mlwf;
pub mod oracle;
pub mod schedule;
pub mod sum;
mod waterfill;

pub use config::{SolverConfig, SolverKind};
pub use feasibility::{feasible_exact, feasible_point, feasible_sufficient, sufficient_point};
pub use instance::{validate_instance, BoundMode, PacketBox, ProblemInstance};
pub use mlwf::{phi, solve_mlwf};
pub use oracle::{brute_force_oracle, grid_energy_bound};
pub use schedule::{kkt_residual, Duals, Schedule, ScheduledPacket, SolveStatus, SolverInfo};
pub use sum::{solve_sum, solve_sum_traced, SumTrace};

use crate::error::{Error, Result};

/// Runs the solver named in `cfg`.
pub fn solve(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<Schedule> {
    match cfg.solver {
        SolverKind::Mlwf => solve_mlwf(inst, cfg),
        SolverKind::Sum => solve_sum(inst, cfg),
        SolverKind::BruteForce => brute_force_oracle(inst, cfg.grid_resolution),
        other => Err(Error::Domain {
            function: solver_name(other),
            value: f64::NAN,
        }),
    }
}

fn solver_name(kind: SolverKind) -> &'static str {
    match kind {
        SolverKind::Mlwf => "mlwf",
        SolverKind::Sum => "sum",
        SolverKind::BruteForce => "brute-force",
        SolverKind::RollingWindow => "rolling-window",
        SolverKind::Myopic => "myopic",
    }
}
