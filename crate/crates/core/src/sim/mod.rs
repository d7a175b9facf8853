//! Traffic and channel generators and the Monte Carlo experiment drivers.

pub mod channel;
pub mod experiment;
pub mod plan;
pub mod traffic;

pub use channel::ChannelModel;
pub use experiment::{
    build_instance, compare_policies, energy_joules, gen_instance, gen_packets, policy_config,
    run_point, run_sweep, solve_instance, ExperimentConfig, ExperimentReport, PolicyReport,
    PolicyTrial, SweepAxis, TrialRecord, POLICY_BACKLOG, POLICY_SIGMAS, SHANNON_ERROR_PROB,
};
pub use plan::{
    bounds_rows, run_plan, BoundsPlan, BoundsRow, ExperimentPlan, PlanOutput, PolicyPlan, Preset,
    Series, SeriesReport, SweepPlan, EPSILON_GRID,
};
pub use traffic::{TrafficModel, TruncatedExponential};
