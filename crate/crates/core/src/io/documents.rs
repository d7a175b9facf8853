//! Instance, schedule and experiment-plan documents.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::io::{pointer_of, DocumentError};
use crate::offline::{BoundMode, Duals, ProblemInstance, Schedule, ScheduledPacket, SolverInfo};
use crate::sim::ExperimentPlan;
use crate::types::{LinkParams, PacketSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDocument {
    pub m_hat: f64,
    pub p_max_watts: f64,
    pub symbol_duration_s: f64,
}

impl From<LinkParams> for LinkDocument {
    fn from(l: LinkParams) -> Self {
        Self {
            m_hat: l.min_blocklength,
            p_max_watts: l.max_power,
            symbol_duration_s: l.symbol_duration,
        }
    }
}

impl From<LinkDocument> for LinkParams {
    fn from(l: LinkDocument) -> Self {
        Self {
            min_blocklength: l.m_hat,
            max_power: l.p_max_watts,
            symbol_duration: l.symbol_duration_s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketDocument {
    pub bits: f64,
    pub arrival: f64,
    pub deadline: f64,
    pub epsilon: f64,
    pub gain: f64,
}

impl From<PacketSpec> for PacketDocument {
    fn from(p: PacketSpec) -> Self {
        Self {
            bits: p.bits,
            arrival: p.arrival,
            deadline: p.deadline,
            epsilon: p.error_prob,
            gain: p.channel_gain,
        }
    }
}

impl From<PacketDocument> for PacketSpec {
    fn from(p: PacketDocument) -> Self {
        Self {
            bits: p.bits,
            arrival: p.arrival,
            deadline: p.deadline,
            error_prob: p.epsilon,
            channel_gain: p.gain,
        }
    }
}

/// A scheduling problem: arrivals and deadlines in symbols, power in W.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub link: LinkDocument,
    pub packets: Vec<PacketDocument>,
}

impl InstanceDocument {
    pub fn new(packets: &[PacketSpec], link: LinkParams) -> Self {
        Self {
            link: link.into(),
            packets: packets.iter().map(|&p| p.into()).collect(),
        }
    }

    pub fn link(&self) -> LinkParams {
        self.link.into()
    }

    pub fn packets(&self) -> Vec<PacketSpec> {
        self.packets.iter().map(|&p| p.into()).collect()
    }

    /// Validated instance in `mode`; `None` picks convex mode when every
    /// packet has a convexity threshold and general mode otherwise.
    pub fn to_instance(&self, mode: Option<BoundMode>) -> Result<ProblemInstance, DocumentError> {
        let (packets, link) = (self.packets(), self.link());
        let built = match mode {
            Some(m) => ProblemInstance::new(packets, link, m),
            None => ProblemInstance::new_auto(packets, link),
        };
        built.map_err(|e| DocumentError::Invalid {
            pointer: instance_pointer(&e),
            source: e,
        })
    }

    /// Packets as an online arrival stream: valid packets, arrivals
    /// non-decreasing, deadlines increasing. Unlike an offline instance,
    /// several packets may arrive at once and deadlines may be unreachable.
    pub fn to_stream(&self) -> Result<Vec<PacketSpec>, DocumentError> {
        let invalid = |pointer: String, source: Error| DocumentError::Invalid { pointer, source };
        let link = self.link();
        link.validate().map_err(|e| invalid("/link".into(), e))?;
        let packets = self.packets();
        for (k, p) in packets.iter().enumerate() {
            p.validate(k)
                .map_err(|e| invalid(format!("/packets/{k}"), e))?;
        }
        for (k, w) in packets.windows(2).enumerate() {
            let reason = if w[1].arrival < w[0].arrival {
                "arrivals must not decrease"
            } else if w[1].deadline <= w[0].deadline {
                "deadlines must increase"
            } else {
                continue;
            };
            return Err(invalid(
                format!("/packets/{}", k + 1),
                Error::NotFifo {
                    index: k,
                    reason: reason.into(),
                },
            ));
        }
        Ok(packets)
    }
}

/// Where in an instance document a validation error points.
fn instance_pointer(e: &Error) -> String {
    match e {
        Error::InvalidLink(_) => "/link".into(),
        Error::EmptyInstance => "/packets".into(),
        Error::InvalidPacket { index, .. } => format!("/packets/{index}"),
        Error::FirstArrivalNotZero(_) => "/packets/0/arrival".into(),
        Error::NotFifo { index, .. } => format!("/packets/{}", index + 1),
        Error::NotSingleSchedulingInterval { index, .. } => {
            format!("/packets/{}/arrival", index + 1)
        }
        Error::TauOutOfRange { index: Some(i), .. } => format!("/packets/{i}/epsilon"),
        _ => "/".into(),
    }
}

/// A solved schedule. Times in symbols, powers in W, energies in both
/// Watt-symbols and Joules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDocument {
    pub packets: Vec<ScheduledPacket>,
    pub duals: Option<Duals>,
    pub kkt_residual: Option<f64>,
    pub total_energy_watt_symbols: f64,
    pub total_energy_joules: f64,
    pub solver: SolverInfo,
}

impl From<Schedule> for ScheduleDocument {
    fn from(s: Schedule) -> Self {
        Self {
            packets: s.packets,
            duals: s.duals,
            kkt_residual: s.kkt_residual,
            total_energy_watt_symbols: s.total_energy_watt_symbols,
            total_energy_joules: s.total_energy_joules,
            solver: s.solver,
        }
    }
}

impl From<ScheduleDocument> for Schedule {
    fn from(s: ScheduleDocument) -> Self {
        Self {
            packets: s.packets,
            duals: s.duals,
            kkt_residual: s.kkt_residual,
            total_energy_watt_symbols: s.total_energy_watt_symbols,
            total_energy_joules: s.total_energy_joules,
            solver: s.solver,
        }
    }
}

impl ScheduleDocument {
    /// Internal consistency: ordered, non-overlapping transmissions from
    /// time 0 (online policies may idle between them), energies matching
    /// `m·p`, totals matching their sum.
    pub fn validate(&self, symbol_duration: f64) -> Result<(), DocumentError> {
        let bad = |pointer: String, why: String| {
            Err(DocumentError::Invalid {
                pointer,
                source: Error::Infeasible(why),
            })
        };
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()));
        let mut t = 0.0;
        let mut total = 0.0;
        for (k, p) in self.packets.iter().enumerate() {
            if !(p.m > 0.0 && p.p_watts >= 0.0) {
                return bad(
                    format!("/packets/{k}"),
                    "m must be positive and p non-negative".into(),
                );
            }
            if !(p.start >= t || close(p.start, t)) || !close(p.finish, p.start + p.m) {
                return bad(
                    format!("/packets/{k}/start"),
                    "transmissions must not overlap".into(),
                );
            }
            if !close(p.energy_watt_symbols, p.m * p.p_watts)
                || !close(p.energy_joules, p.energy_watt_symbols * symbol_duration)
            {
                return bad(
                    format!("/packets/{k}/energy_watt_symbols"),
                    "energy must equal m·p".into(),
                );
            }
            t = p.finish;
            total += p.energy_watt_symbols;
        }
        if !close(total, self.total_energy_watt_symbols) {
            return bad(
                "/total_energy_watt_symbols".into(),
                "total must equal the packet sum".into(),
            );
        }
        Ok(())
    }
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T, DocumentError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| DocumentError::Parse {
        pointer: pointer_of(e.path()),
        message: e.into_inner().to_string(),
    })
}

fn read<T: DeserializeOwned>(path: &Path) -> Result<T, DocumentError> {
    let text = std::fs::read_to_string(path).map_err(|e| DocumentError::io(path, e))?;
    parse(&text)
}

pub fn parse_instance(text: &str) -> Result<InstanceDocument, DocumentError> {
    parse(text)
}

pub fn read_instance(path: &Path) -> Result<InstanceDocument, DocumentError> {
    read(path)
}

pub fn parse_schedule(text: &str) -> Result<ScheduleDocument, DocumentError> {
    parse(text)
}

pub fn read_schedule(path: &Path) -> Result<ScheduleDocument, DocumentError> {
    read(path)
}

fn from_value<T: DeserializeOwned>(value: serde_json::Value) -> Result<T, DocumentError> {
    serde_path_to_error::deserialize(value).map_err(|e| DocumentError::Parse {
        pointer: pointer_of(e.path()),
        message: e.into_inner().to_string(),
    })
}

/// Parses and validates an experiment plan. The body is decoded after the
/// `kind` tag is read so that errors keep their JSON pointer.
pub fn parse_plan(text: &str) -> Result<ExperimentPlan, DocumentError> {
    let mut value: serde_json::Value = parse(text)?;
    let bad_kind = |message: String| DocumentError::Parse {
        pointer: "/kind".into(),
        message,
    };
    let kind = match value.as_object_mut().map(|o| o.remove("kind")) {
        Some(Some(serde_json::Value::String(k))) => k,
        Some(_) => return Err(bad_kind("expected a string field `kind`".into())),
        None => {
            return Err(DocumentError::Parse {
                pointer: "/".into(),
                message: "expected an object".into(),
            })
        }
    };
    let plan = match kind.as_str() {
        "sweep" => ExperimentPlan::Sweep(from_value(value)?),
        "policies" => ExperimentPlan::Policies(from_value(value)?),
        "bounds" => ExperimentPlan::Bounds(from_value(value)?),
        other => {
            return Err(bad_kind(format!(
                "unknown kind `{other}`, expected sweep, policies or bounds"
            )))
        }
    };
    plan.validate().map_err(|e| DocumentError::Invalid {
        pointer: "/".into(),
        source: e,
    })?;
    Ok(plan)
}

pub fn read_plan(path: &Path) -> Result<ExperimentPlan, DocumentError> {
    let text = std::fs::read_to_string(path).map_err(|e| DocumentError::io(path, e))?;
    parse_plan(&text)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, DocumentError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| DocumentError::Parse {
        pointer: "/".into(),
        message: e.to_string(),
    })?;
    text.push('\n');
    Ok(text)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), DocumentError> {
    std::fs::write(path, to_json(value)?).map_err(|e| DocumentError::io(path, e))
}
