//! Online scheduling: packets are revealed at their arrival times and one
//! transmission is committed at a time.
//!
//! The rolling-window policy re-solves the offline problem over every
//! arrived, unsent packet (arrivals moved to the current time, deadlines
//! shifted by it) and commits only the head packet. The myopic policy
//! stretches the head packet to its own deadline.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbl::bounds::BlocklengthBounds;
use crate::fbl::curve::RateCurve;
use crate::offline::{
    solve, BoundMode, ProblemInstance, Schedule, ScheduledPacket, SolveStatus, SolverConfig,
    SolverInfo, SolverKind,
};
use crate::types::{LinkParams, PacketSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    RollingWindow,
    Myopic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Commitment {
    pub packet: usize,
    pub start: f64,
    pub m: f64,
    pub p_watts: f64,
    pub energy_watt_symbols: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Arrive,
    Commit,
    Drop,
}

/// One line of the event log. `m`, `p_watts` and `energy_watt_symbols` are
/// zero for arrivals and drops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub event: EventKind,
    pub packet: usize,
    pub m: f64,
    pub p_watts: f64,
    pub energy_watt_symbols: f64,
    pub note: String,
}

/// Scheduler state between commitments.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineState {
    pub time: f64,
    /// Ids of arrived, unsent packets in FIFO order.
    pub queue: VecDeque<usize>,
    /// Ids not yet arrived, in arrival order.
    pub pending: VecDeque<usize>,
    pub committed: Vec<Commitment>,
    pub dropped: Vec<usize>,
    pub events: Vec<Event>,
}

impl OnlineState {
    /// Starts at time 0 with every packet arriving at or before 0 queued.
    pub fn new(stream: &[PacketSpec]) -> Self {
        let mut state = Self {
            time: 0.0,
            queue: VecDeque::new(),
            pending: (0..stream.len()).collect(),
            committed: Vec::new(),
            dropped: Vec::new(),
            events: Vec::new(),
        };
        state.admit(stream);
        state
    }

    /// Moves every pending packet with arrival `<= time` into the queue.
    fn admit(&mut self, stream: &[PacketSpec]) {
        while let Some(&id) = self.pending.front() {
            if stream[id].arrival > self.time {
                break;
            }
            self.pending.pop_front();
            self.queue.push_back(id);
            self.events.push(Event {
                time: stream[id].arrival,
                event: EventKind::Arrive,
                packet: id,
                m: 0.0,
                p_watts: 0.0,
                energy_watt_symbols: 0.0,
                note: String::new(),
            });
        }
    }

    /// Jumps to the next arrival if the queue is empty.
    fn skip_idle(&mut self, stream: &[PacketSpec]) {
        if self.queue.is_empty() {
            if let Some(&id) = self.pending.front() {
                self.time = self.time.max(stream[id].arrival);
                self.admit(stream);
            }
        }
    }

    pub fn is_done(&self) -> bool {
        self.queue.is_empty() && self.pending.is_empty()
    }

    fn commit(&mut self, stream: &[PacketSpec], c: Commitment) {
        self.queue.pop_front();
        self.events.push(Event {
            time: c.start,
            event: EventKind::Commit,
            packet: c.packet,
            m: c.m,
            p_watts: c.p_watts,
            energy_watt_symbols: c.energy_watt_symbols,
            note: String::new(),
        });
        self.committed.push(c);
        self.time = c.start + c.m;
        self.admit(stream);
    }

    fn drop_head(&mut self, stream: &[PacketSpec], reason: String) {
        if let Some(id) = self.queue.pop_front() {
            self.dropped.push(id);
            self.events.push(Event {
                time: self.time,
                event: EventKind::Drop,
                packet: id,
                m: 0.0,
                p_watts: 0.0,
                energy_watt_symbols: 0.0,
                note: reason,
            });
        }
        self.skip_idle(stream);
    }
}

/// Offline solver settings used inside each window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OnlineConfig {
    pub solver: SolverConfig,
}

/// The queued packets seen from time `t`: arrivals at 0, deadlines `D − t`.
fn window_packets(state: &OnlineState, stream: &[PacketSpec]) -> Vec<PacketSpec> {
    state
        .queue
        .iter()
        .map(|&id| PacketSpec {
            arrival: 0.0,
            deadline: stream[id].deadline - state.time,
            ..stream[id]
        })
        .collect()
}

/// Solves a window in convex mode with the configured solver, falling back
/// to the proximal solver in general mode when a convexity threshold is
/// missing.
fn solve_window(
    packets: Vec<PacketSpec>,
    link: &LinkParams,
    cfg: &SolverConfig,
) -> Result<Schedule> {
    match ProblemInstance::new_window(packets.clone(), *link, BoundMode::Convex) {
        Ok(inst) => solve(&inst, cfg),
        Err(Error::TauOutOfRange { .. }) => {
            let inst = ProblemInstance::new_window(packets, *link, BoundMode::General)?;
            solve(&inst, &cfg.with_solver(SolverKind::Sum))
        }
        Err(e) => Err(e),
    }
}

/// One rolling-window decision. Returns the commitment, or `None` when the
/// head was dropped or nothing was queued.
pub fn rolling_window_step(
    state: &mut OnlineState,
    stream: &[PacketSpec],
    link: &LinkParams,
    cfg: &OnlineConfig,
) -> Option<Commitment> {
    state.skip_idle(stream);
    let &head = state.queue.front()?;
    if stream[head].deadline <= state.time {
        state.drop_head(stream, "deadline already passed".into());
        return None;
    }
    match solve_window(window_packets(state, stream), link, &cfg.solver) {
        Ok(s) => {
            let first = s.packets[0];
            let c = Commitment {
                packet: head,
                start: state.time,
                m: first.m,
                p_watts: first.p_watts,
                energy_watt_symbols: first.energy_watt_symbols,
            };
            state.commit(stream, c);
            Some(c)
        }
        Err(e) => {
            state.drop_head(stream, e.to_string());
            None
        }
    }
}

/// One myopic decision: `m = clip(D − t, ℓ, g_E)`.
pub fn myopic_step(
    state: &mut OnlineState,
    stream: &[PacketSpec],
    link: &LinkParams,
    cfg: &OnlineConfig,
) -> Option<Commitment> {
    state.skip_idle(stream);
    let &head = state.queue.front()?;
    let pkt = &stream[head];
    let room = pkt.deadline - state.time;
    let decided = BlocklengthBounds::compute(pkt, link).and_then(|b| {
        if room < b.lower {
            return Err(Error::Infeasible(format!(
                "{room} symbols left, at least {} needed",
                b.lower
            )));
        }
        let m = room.min(b.monotone_upper);
        let p = RateCurve::new(pkt)?.power_of_blocklength(m, link.max_power, cfg.solver.eps2)?;
        Ok((m, p))
    });
    match decided {
        Ok((m, p)) => {
            let c = Commitment {
                packet: head,
                start: state.time,
                m,
                p_watts: p,
                energy_watt_symbols: m * p,
            };
            state.commit(stream, c);
            Some(c)
        }
        Err(e) => {
            state.drop_head(stream, e.to_string());
            None
        }
    }
}

/// Result of replaying an arrival stream under one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineRun {
    pub policy: Policy,
    pub commitments: Vec<Commitment>,
    pub dropped: Vec<usize>,
    pub events: Vec<Event>,
    pub total_energy_watt_symbols: f64,
    pub total_energy_joules: f64,
    /// Commitments starting before arrival or ending after the deadline.
    pub violations: usize,
}

impl OnlineRun {
    /// Committed transmissions as a schedule (dropped packets omitted).
    pub fn schedule(&self, link: &LinkParams, cfg: &OnlineConfig) -> Schedule {
        let packets = self
            .commitments
            .iter()
            .map(|c| ScheduledPacket {
                m: c.m,
                p_watts: c.p_watts,
                energy_watt_symbols: c.energy_watt_symbols,
                energy_joules: link.joules(c.energy_watt_symbols),
                start: c.start,
                finish: c.start + c.m,
            })
            .collect();
        let kind = match self.policy {
            Policy::RollingWindow => SolverKind::RollingWindow,
            Policy::Myopic => SolverKind::Myopic,
        };
        Schedule {
            packets,
            duals: None,
            kkt_residual: None,
            total_energy_watt_symbols: self.total_energy_watt_symbols,
            total_energy_joules: self.total_energy_joules,
            solver: SolverInfo::new(
                &cfg.solver.with_solver(kind),
                BoundMode::Convex,
                SolveStatus::Online,
                self.commitments.len(),
            ),
        }
    }
}

/// Replays `stream` (FIFO order, deadlines increasing) under `policy`.
pub fn run_online(
    stream: &[PacketSpec],
    link: &LinkParams,
    policy: Policy,
    cfg: &OnlineConfig,
) -> OnlineRun {
    let mut state = OnlineState::new(stream);
    while !state.is_done() {
        match policy {
            Policy::RollingWindow => rolling_window_step(&mut state, stream, link, cfg),
            Policy::Myopic => myopic_step(&mut state, stream, link, cfg),
        };
    }
    let total: f64 = state.committed.iter().map(|c| c.energy_watt_symbols).sum();
    let tol = 1e-6;
    let violations = state
        .committed
        .iter()
        .filter(|c| {
            let p = &stream[c.packet];
            c.start < p.arrival - tol || c.start + c.m > p.deadline + tol
        })
        .count();
    OnlineRun {
        policy,
        commitments: state.committed,
        dropped: state.dropped,
        events: state.events,
        total_energy_watt_symbols: total,
        total_energy_joules: link.joules(total),
        violations,
    }
}
