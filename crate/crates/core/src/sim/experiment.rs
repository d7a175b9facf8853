//! Monte Carlo drivers: the Shannon-underestimation sweep and the policy
//! comparison.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::offline::{solve, BoundMode, ProblemInstance, Schedule, SolverConfig, SolverKind};
use crate::online::{run_online, OnlineConfig, Policy};
use crate::sim::channel::ChannelModel;
use crate::sim::traffic::TrafficModel;
use crate::types::{dbw_to_watts, LinkParams, PacketSpec};

/// Error target of the Shannon-capacity reference design.
pub const SHANNON_ERROR_PROB: f64 = 0.5;

fn default_max_power() -> f64 {
    dbw_to_watts(26.0)
}

fn default_symbol_duration() -> f64 {
    66.7e-6
}

/// One experiment point: traffic, channel, link and solver settings and
/// the trial counts. Trials are the pairs (channel realization, packet
/// generation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub traffic: TrafficModel,
    pub channel: ChannelModel,
    #[serde(default = "default_max_power")]
    pub max_power_watts: f64,
    #[serde(default = "default_symbol_duration")]
    pub symbol_duration_s: f64,
    #[serde(default)]
    pub solver: SolverConfig,
    pub channel_realizations: usize,
    pub packet_generations: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            traffic: TrafficModel::default(),
            channel: ChannelModel::default(),
            max_power_watts: default_max_power(),
            symbol_duration_s: default_symbol_duration(),
            solver: SolverConfig::default(),
            channel_realizations: 100,
            packet_generations: 100,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn link(&self) -> Result<LinkParams> {
        LinkParams::new(
            self.traffic.m_hat,
            self.max_power_watts,
            self.symbol_duration_s,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.traffic.validate()?;
        self.channel.validate()?;
        self.link()?;
        self.solver.validate()?;
        if self.channel_realizations == 0 || self.packet_generations == 0 {
            return Err(Error::InvalidModel("trial counts must be positive".into()));
        }
        Ok(())
    }

    pub fn trials(&self) -> usize {
        self.channel_realizations * self.packet_generations
    }

    /// Independent generators for the traffic and channel of one trial.
    /// The traffic stream depends on both indices, the channel stream only
    /// on the realization, and neither on the grid point, so every grid
    /// point sees common random numbers.
    pub fn trial_rngs(&self, channel: usize, generation: usize) -> (ChaCha8Rng, ChaCha8Rng) {
        let mut traffic = ChaCha8Rng::seed_from_u64(self.seed);
        traffic.set_stream((1 << 40) | ((channel as u64) << 20) | generation as u64);
        let mut fading = ChaCha8Rng::seed_from_u64(self.seed);
        fading.set_stream((2 << 40) | channel as u64);
        (traffic, fading)
    }

    /// The packet stream of one trial.
    pub fn trial_packets(&self, channel: usize, generation: usize) -> Result<Vec<PacketSpec>> {
        let (mut rt, mut rc) = self.trial_rngs(channel, generation);
        gen_packets(&self.traffic, &self.channel, &mut rt, &mut rc)
    }
}

/// Samples a packet stream and one channel gain per packet.
pub fn gen_packets<R: rand::Rng + ?Sized, S: rand::Rng + ?Sized>(
    traffic: &TrafficModel,
    channel: &ChannelModel,
    traffic_rng: &mut R,
    channel_rng: &mut S,
) -> Result<Vec<PacketSpec>> {
    channel.validate()?;
    let mut packets = traffic.sample(traffic_rng)?;
    for p in &mut packets {
        p.channel_gain = channel.sample_gain(channel_rng);
    }
    Ok(packets)
}

/// Validated instance in convex mode, or general mode when some packet has
/// no convexity threshold. Equal arrival times (a backlog at time 0) are
/// accepted.
pub fn build_instance(packets: Vec<PacketSpec>, link: LinkParams) -> Result<ProblemInstance> {
    let simultaneous = packets.windows(2).any(|w| w[1].arrival <= w[0].arrival);
    let make = |mode| {
        if simultaneous {
            ProblemInstance::new_window(packets.clone(), link, mode)
        } else {
            ProblemInstance::new(packets.clone(), link, mode)
        }
    };
    match make(BoundMode::Convex) {
        Err(Error::TauOutOfRange { .. }) => make(BoundMode::General),
        other => other,
    }
}

pub fn gen_instance<R: rand::Rng + ?Sized, S: rand::Rng + ?Sized>(
    traffic: &TrafficModel,
    channel: &ChannelModel,
    link: LinkParams,
    traffic_rng: &mut R,
    channel_rng: &mut S,
) -> Result<ProblemInstance> {
    build_instance(
        gen_packets(traffic, channel, traffic_rng, channel_rng)?,
        link,
    )
}

/// Runs the configured solver, switching water filling to the proximal
/// solver in general mode.
pub fn solve_instance(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<Schedule> {
    if inst.mode() == BoundMode::General && cfg.solver == SolverKind::Mlwf {
        return solve(inst, &cfg.with_solver(SolverKind::Sum));
    }
    solve(inst, cfg)
}

/// `Σ m_k T_s p_k`.
pub fn energy_joules(sched: &Schedule, link: &LinkParams) -> f64 {
    sched
        .packets
        .iter()
        .map(|p| p.m * link.symbol_duration * p.p_watts)
        .sum()
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Epsilon,
    N,
    Nu,
    Sigma,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            Self::Epsilon => "epsilon",
            Self::N => "n",
            Self::Nu => "nu",
            Self::Sigma => "sigma",
        }
    }

    pub fn apply(self, cfg: &ExperimentConfig, value: f64) -> ExperimentConfig {
        let mut c = *cfg;
        match self {
            Self::Epsilon => c.traffic.error_prob = value,
            Self::N => c.traffic.n = value,
            Self::Nu => c.traffic.nu = value,
            Self::Sigma => c.channel.sigma = value,
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub channel: usize,
    pub generation: usize,
    /// Energy at the target error probability (J); `None` if infeasible.
    pub energy_joules: Option<f64>,
    /// Energy of the Shannon reference design (J).
    pub shannon_joules: Option<f64>,
    pub note: Option<String>,
}

impl TrialRecord {
    pub fn included(&self) -> bool {
        self.energy_joules.is_some() && self.shannon_joules.is_some()
    }
}

/// Aggregates of one sweep point. Means run over trials where both designs
/// were feasible; the others are counted in `excluded`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub axis: SweepAxis,
    pub value: f64,
    pub config: ExperimentConfig,
    pub trials: Vec<TrialRecord>,
    pub included: usize,
    pub excluded: usize,
    pub mean_energy_joules: f64,
    pub mean_shannon_joules: f64,
    /// Mean finite-blocklength energy minus mean Shannon-design energy (J).
    pub underestimated_joules: f64,
    /// `underestimated_joules` as a percentage of `mean_energy_joules`.
    pub underestimation_pct: f64,
}

fn run_trial(cfg: &ExperimentConfig, link: LinkParams, c: usize, g: usize) -> TrialRecord {
    let mut rec = TrialRecord {
        channel: c,
        generation: g,
        energy_joules: None,
        shannon_joules: None,
        note: None,
    };
    let outcome = (|| -> Result<()> {
        let packets = cfg.trial_packets(c, g)?;
        let target = build_instance(packets.clone(), link)?;
        rec.energy_joules = Some(solve_instance(&target, &cfg.solver)?.total_energy_joules);
        let shannon = packets
            .into_iter()
            .map(|p| p.with_error_prob(SHANNON_ERROR_PROB))
            .collect();
        let shannon = build_instance(shannon, link)?;
        rec.shannon_joules = Some(solve_instance(&shannon, &cfg.solver)?.total_energy_joules);
        Ok(())
    })();
    if let Err(e) = outcome {
        rec.note = Some(e.to_string());
    }
    rec
}

fn trial_indices(cfg: &ExperimentConfig) -> Vec<(usize, usize)> {
    (0..cfg.channel_realizations)
        .flat_map(|c| (0..cfg.packet_generations).map(move |g| (c, g)))
        .collect()
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

/// One experiment point at the target error probability and at the Shannon
/// reference.
pub fn run_point(cfg: &ExperimentConfig, axis: SweepAxis, value: f64) -> Result<ExperimentReport> {
    cfg.validate()?;
    let link = cfg.link()?;
    let trials: Vec<TrialRecord> = trial_indices(cfg)
        .into_par_iter()
        .map(|(c, g)| run_trial(cfg, link, c, g))
        .collect();
    let kept = || trials.iter().filter(|t| t.included());
    let included = kept().count();
    let e = mean(kept().filter_map(|t| t.energy_joules));
    let s = mean(kept().filter_map(|t| t.shannon_joules));
    Ok(ExperimentReport {
        axis,
        value,
        config: *cfg,
        included,
        excluded: trials.len() - included,
        trials,
        mean_energy_joules: e,
        mean_shannon_joules: s,
        underestimated_joules: e - s,
        underestimation_pct: 100.0 * (e - s) / e,
    })
}

/// Runs every grid point of `axis`. The grid is validated before any trial
/// runs.
pub fn run_sweep(
    base: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<ExperimentReport>> {
    let configs: Vec<ExperimentConfig> = values.iter().map(|&v| axis.apply(base, v)).collect();
    for c in &configs {
        c.validate()?;
    }
    configs
        .iter()
        .zip(values)
        .map(|(c, &v)| run_point(c, axis, v))
        .collect()
}

/// Energies (J) of one trial under the four schedulers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyTrial {
    pub channel: usize,
    pub generation: usize,
    pub offline_mlwf: Option<f64>,
    pub offline_sum: Option<f64>,
    pub rolling_window: Option<f64>,
    pub myopic: Option<f64>,
    pub rolling_window_drops: usize,
    pub myopic_drops: usize,
    pub note: Option<String>,
}

impl PolicyTrial {
    /// Every scheduler delivered every packet.
    pub fn included(&self) -> bool {
        self.offline_mlwf.is_some()
            && self.offline_sum.is_some()
            && self.rolling_window.is_some()
            && self.myopic.is_some()
            && self.rolling_window_drops == 0
            && self.myopic_drops == 0
    }
}

/// Aggregates of one σ point of the policy comparison, over the trials
/// where every scheduler delivered every packet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyReport {
    pub sigma: f64,
    pub config: ExperimentConfig,
    pub trials: Vec<PolicyTrial>,
    pub included: usize,
    pub excluded: usize,
    pub mean_offline_mlwf: f64,
    pub mean_offline_sum: f64,
    pub mean_rolling_window: f64,
    pub mean_myopic: f64,
    pub rolling_window_drops: usize,
    pub myopic_drops: usize,
}

/// Packets queued at time 0 in the policy comparison.
pub const POLICY_BACKLOG: usize = 3;

/// Default Rayleigh scales of the policy comparison. With gaps of about
/// `4m̂` the online policies drop packets often below this range, which
/// leaves too few trials where every policy delivers everything.
pub const POLICY_SIGMAS: [f64; 5] = [100.0, 200.0, 400.0, 800.0, 1600.0];

/// The policy-comparison setting: `ν = 4`, `n = 10`, `ε = 5e-4`, `K = 10`,
/// three packets already queued at time 0.
pub fn policy_config() -> ExperimentConfig {
    ExperimentConfig {
        traffic: TrafficModel {
            nu: 4.0,
            n: 10.0,
            packets: 10,
            backlog: POLICY_BACKLOG,
            ..TrafficModel::default()
        },
        ..ExperimentConfig::default()
    }
}

fn run_policy_trial(cfg: &ExperimentConfig, link: LinkParams, c: usize, g: usize) -> PolicyTrial {
    let mut rec = PolicyTrial {
        channel: c,
        generation: g,
        offline_mlwf: None,
        offline_sum: None,
        rolling_window: None,
        myopic: None,
        rolling_window_drops: 0,
        myopic_drops: 0,
        note: None,
    };
    let packets = match cfg.trial_packets(c, g) {
        Ok(p) => p,
        Err(e) => {
            rec.note = Some(e.to_string());
            return rec;
        }
    };
    let mut notes = Vec::new();
    match build_instance(packets.clone(), link) {
        Ok(inst) => {
            let run = |kind| solve_instance(&inst, &cfg.solver.with_solver(kind));
            match run(SolverKind::Mlwf) {
                Ok(s) => rec.offline_mlwf = Some(s.total_energy_joules),
                Err(e) => notes.push(format!("mlwf: {e}")),
            }
            match run(SolverKind::Sum) {
                Ok(s) => rec.offline_sum = Some(s.total_energy_joules),
                Err(e) => notes.push(format!("sum: {e}")),
            }
        }
        Err(e) => notes.push(format!("instance: {e}")),
    }
    let online = OnlineConfig {
        solver: cfg.solver.with_solver(SolverKind::Mlwf),
    };
    let rw = run_online(&packets, &link, Policy::RollingWindow, &online);
    rec.rolling_window = Some(rw.total_energy_joules);
    rec.rolling_window_drops = rw.dropped.len();
    let my = run_online(&packets, &link, Policy::Myopic, &online);
    rec.myopic = Some(my.total_energy_joules);
    rec.myopic_drops = my.dropped.len();
    if !notes.is_empty() {
        rec.note = Some(notes.join("; "));
    }
    rec
}

/// Offline water filling, offline SUM, rolling window and myopic on the
/// same trials, for every `σ` in `sigmas`.
pub fn compare_policies(base: &ExperimentConfig, sigmas: &[f64]) -> Result<Vec<PolicyReport>> {
    let configs: Vec<ExperimentConfig> = sigmas
        .iter()
        .map(|&s| SweepAxis::Sigma.apply(base, s))
        .collect();
    for c in &configs {
        c.validate()?;
    }
    let mut out = Vec::with_capacity(configs.len());
    for (cfg, &sigma) in configs.iter().zip(sigmas) {
        let link = cfg.link()?;
        let trials: Vec<PolicyTrial> = trial_indices(cfg)
            .into_par_iter()
            .map(|(c, g)| run_policy_trial(cfg, link, c, g))
            .collect();
        let kept = || trials.iter().filter(|t| t.included());
        let included = kept().count();
        out.push(PolicyReport {
            sigma,
            config: *cfg,
            included,
            excluded: trials.len() - included,
            mean_offline_mlwf: mean(kept().filter_map(|t| t.offline_mlwf)),
            mean_offline_sum: mean(kept().filter_map(|t| t.offline_sum)),
            mean_rolling_window: mean(kept().filter_map(|t| t.rolling_window)),
            mean_myopic: mean(kept().filter_map(|t| t.myopic)),
            rolling_window_drops: trials.iter().map(|t| t.rolling_window_drops).sum(),
            myopic_drops: trials.iter().map(|t| t.myopic_drops).sum(),
            trials,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::offline::{validate_instance, ScheduledPacket, SolveStatus, SolverInfo};

    fn small(cfg: ExperimentConfig) -> ExperimentConfig {
        ExperimentConfig {
            channel_realizations: 3,
            packet_generations: 3,
            seed: 11,
            ..cfg
        }
    }

    #[test]
    fn energy_of_one_packet() {
        let link = LinkParams::default();
        let sched = Schedule {
            packets: vec![ScheduledPacket {
                m: 1000.0,
                p_watts: 2.0,
                energy_watt_symbols: 2000.0,
                energy_joules: 0.1334,
                start: 0.0,
                finish: 1000.0,
            }],
            duals: None,
            kkt_residual: None,
            total_energy_watt_symbols: 2000.0,
            total_energy_joules: 0.1334,
            solver: SolverInfo::new(
                &SolverConfig::default(),
                BoundMode::Convex,
                SolveStatus::Optimal,
                0,
            ),
        };
        assert!((energy_joules(&sched, &link) - 0.1334).abs() < 1e-12);
        let empty = Schedule {
            packets: vec![],
            ..sched
        };
        assert_eq!(energy_joules(&empty, &link), 0.0);
    }

    #[test]
    fn generated_instances_are_valid() {
        let cfg = ExperimentConfig::default();
        let link = cfg.link().unwrap();
        for c in 0..5 {
            for g in 0..20 {
                let p = cfg.trial_packets(c, g).unwrap();
                assert_eq!(p[0].arrival, 0.0);
                validate_instance(p, link, BoundMode::Convex).unwrap();
            }
        }
    }

    #[test]
    fn shannon_point_has_no_underestimation() {
        let cfg = small(ExperimentConfig::default());
        let r = run_sweep(&cfg, SweepAxis::Epsilon, &[SHANNON_ERROR_PROB]).unwrap();
        assert_eq!(r[0].excluded, 0);
        assert!(r[0].underestimated_joules.abs() < 1e-12 * r[0].mean_energy_joules);
    }

    #[test]
    fn reports_are_reproducible() {
        let cfg = small(ExperimentConfig::default());
        let a = run_sweep(&cfg, SweepAxis::Epsilon, &[5e-3, 5e-4]).unwrap();
        let b = run_sweep(&cfg, SweepAxis::Epsilon, &[5e-3, 5e-4]).unwrap();
        assert_eq!(a, b);
        assert!(a[1].underestimation_pct > a[0].underestimation_pct);
        assert!(a[1].underestimation_pct > 0.0);
    }

    #[test]
    fn invalid_grid_fails_before_running() {
        let cfg = small(ExperimentConfig::default());
        assert!(run_sweep(&cfg, SweepAxis::Nu, &[5.0, 9.0]).is_err());
    }

    #[test]
    fn policies_run_on_a_backlog() {
        let cfg = small(policy_config());
        let r = compare_policies(&cfg, &[400.0]).unwrap();
        let r = &r[0];
        assert!(r.included > 0);
        let rel = (r.mean_offline_mlwf - r.mean_offline_sum).abs() / r.mean_offline_mlwf;
        assert!(rel < 1e-6);
        assert!(r.mean_offline_mlwf <= r.mean_rolling_window * (1.0 + 1e-9));
        assert!(r.mean_rolling_window <= r.mean_myopic);
    }
}
