//! Fixtures shared by the benchmarks.

use fblsched::offline::{BoundMode, ProblemInstance};
use fblsched::sim::ExperimentConfig;
use fblsched::{LinkParams, PacketSpec};

/// Reference packet: 12 kbit, ε = 5e-4, gain 100.
pub fn packet() -> PacketSpec {
    PacketSpec::new(1.2e4, 0.0, 2000.0, 5e-4, 100.0).expect("valid packet")
}

/// First convex-feasible instance with `k` packets from the default traffic
/// and channel models.
pub fn instance(k: usize) -> ProblemInstance {
    let mut cfg = ExperimentConfig::default();
    cfg.traffic.packets = k;
    let link = cfg.link().expect("default link");
    (0..)
        .map(|g| cfg.trial_packets(0, g).expect("default models"))
        .find_map(|p| {
            let inst = ProblemInstance::new(p, link, BoundMode::Convex).ok()?;
            fblsched::offline::feasible_exact(&inst).then_some(inst)
        })
        .expect("a feasible draw")
}

pub fn link() -> LinkParams {
    LinkParams::default()
}
