//! `fblsched`: bound inspection, offline and online solves, and Monte Carlo
//! experiments from the command line.

mod bounds;
mod exit;
mod simulate;
mod solve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fblsched::offline::{BoundMode, SolverConfig, SolverKind};
use fblsched::sim::Preset;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  internal error
  2  usage error
  3  file could not be read or written
  4  invalid instance, schedule or plan document
  5  infeasible instance (no schedule is written)
  6  tau outside the convexity range, or mlwf on a non-convex instance
  7  solver did not converge (the schedule is still written)";

#[derive(Parser, Debug)]
#[command(name = "fblsched", version, about, after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Blocklength limits of one packet, or a threshold table over ε.
    Bounds(BoundsArgs),
    /// Schedules an instance document and writes the schedule document.
    Solve(SolveArgs),
    /// Runs an experiment plan (preset or JSON file) and writes CSV and SVG.
    Simulate(SimulateArgs),
    /// Prints the plan document of a preset, for editing and `simulate --config`.
    Preset {
        #[arg(value_enum)]
        name: PresetArg,
    },
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// Packet size N (bits).
    #[arg(long, default_value_t = 1.2e4)]
    bits: f64,
    /// Target error probability ε.
    #[arg(long, default_value_t = 5e-4)]
    epsilon: f64,
    /// Minimum blocklength m̂ (symbols).
    #[arg(long, default_value_t = 200.0)]
    m_hat: f64,
    /// Channel power gain h; only ℓ and m̃ depend on it.
    #[arg(long, default_value_t = 1.0)]
    gain: f64,
    /// Peak power (dBW).
    #[arg(long, default_value_t = 26.0)]
    p_max_dbw: f64,
    /// Emit the threshold table over the ε grid for each of these packet sizes as CSV.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    sweep: Option<Vec<f64>>,
    /// CSV destination for --sweep (stdout when absent).
    #[arg(long, requires = "sweep")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Instance document (JSON).
    instance: PathBuf,
    /// Schedule document destination (stdout when absent).
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SolverArg::Mlwf)]
    solver: SolverArg,
    /// Upper blocklength limit: convex (g_C), general (g_E) or auto.
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    bounds: ModeArg,
    #[command(flatten)]
    tol: Tolerances,
    /// Event log (CSV) of the online policies.
    #[arg(long)]
    events: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Tolerances {
    /// Bisection width on blocklength (symbols).
    #[arg(long, env = "FBLSCHED_EPS1")]
    eps1: Option<f64>,
    /// Bisection width on power (W).
    #[arg(long, env = "FBLSCHED_EPS2")]
    eps2: Option<f64>,
    /// KKT residual above which a solve is reported as not converged.
    #[arg(long, env = "FBLSCHED_KKT_TOL")]
    kkt_tol: Option<f64>,
    /// Fixed proximal weight of the SUM solver (per-packet curvature when absent).
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, env = "FBLSCHED_MAX_ITERATIONS")]
    max_iterations: Option<usize>,
    /// Grid step of the brute-force oracle (symbols).
    #[arg(long)]
    grid: Option<f64>,
}

impl Tolerances {
    fn apply(&self, mut cfg: SolverConfig) -> SolverConfig {
        cfg.eps1 = self.eps1.unwrap_or(cfg.eps1);
        cfg.eps2 = self.eps2.unwrap_or(cfg.eps2);
        cfg.kkt_tol = self.kkt_tol.unwrap_or(cfg.kkt_tol);
        cfg.gamma = self.gamma.or(cfg.gamma);
        cfg.max_iterations = self.max_iterations.unwrap_or(cfg.max_iterations);
        cfg.grid_resolution = self.grid.unwrap_or(cfg.grid_resolution);
        cfg
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(
        long,
        value_enum,
        conflicts_with = "config",
        required_unless_present = "config"
    )]
    preset: Option<PresetArg>,
    /// Plan document (JSON); see `fblsched preset` for the format.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Channel realizations and packet generations per point (T × T trials).
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Offline solver for the sweeps.
    #[arg(long, value_enum)]
    solver: Option<OfflineSolverArg>,
    #[command(flatten)]
    tol: Tolerances,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Skip the SVG plots.
    #[arg(long)]
    no_svg: bool,
    /// Suppress progress lines on stderr.
    #[arg(short, long)]
    quiet: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PresetArg {
    Fig2,
    Fig4,
    Fig5,
    Fig6,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Fig2 => Preset::Fig2,
            PresetArg::Fig4 => Preset::Fig4,
            PresetArg::Fig5 => Preset::Fig5,
            PresetArg::Fig6 => Preset::Fig6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Mlwf,
    Sum,
    BruteForce,
    RollingWindow,
    Myopic,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Mlwf => SolverKind::Mlwf,
            SolverArg::Sum => SolverKind::Sum,
            SolverArg::BruteForce => SolverKind::BruteForce,
            SolverArg::RollingWindow => SolverKind::RollingWindow,
            SolverArg::Myopic => SolverKind::Myopic,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OfflineSolverArg {
    Mlwf,
    Sum,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Convex,
    General,
    Auto,
}

impl ModeArg {
    fn mode(self) -> Option<BoundMode> {
        match self {
            Self::Convex => Some(BoundMode::Convex),
            Self::General => Some(BoundMode::General),
            Self::Auto => None,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bounds(a) => bounds::run(&a),
        Command::Solve(a) => solve::run(&a),
        Command::Simulate(a) => simulate::run(&a),
        Command::Preset { name } => simulate::print_preset(name.into()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
