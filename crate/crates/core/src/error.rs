use thiserror::Error;

/// Failures raised by the capacity math, the solvers and the simulators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{function}: argument {value} is outside the domain")]
    Domain { function: &'static str, value: f64 },

    #[error("packet {index}: {reason}")]
    InvalidPacket { index: usize, reason: String },

    #[error("link parameters: {0}")]
    InvalidLink(String),

    #[error("instance has no packets")]
    EmptyInstance,

    #[error("first arrival must be 0, got {0}")]
    FirstArrivalNotZero(f64),

    #[error("FIFO rule violated between packets {index} and {}: {reason}", index + 1)]
    NotFifo { index: usize, reason: String },

    #[error(
        "packets {index} and {} do not share a scheduling interval: arrival {arrival} >= deadline {deadline}",
        index + 1
    )]
    NotSingleSchedulingInterval {
        index: usize,
        arrival: f64,
        deadline: f64,
    },

    #[error("tau = {tau} is outside (0, sqrt(3)/3){}; the convexity bound does not apply", packet_suffix(*index))]
    TauOutOfRange { index: Option<usize>, tau: f64 },

    #[error("blocklength {m} needs more than the maximum power (shortest feasible blocklength is {min_blocklength})")]
    InfeasiblePower { m: f64, min_blocklength: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("the water-filling solver needs convex bound mode")]
    NotConvexMode,

    #[error("model parameters: {0}")]
    InvalidModel(String),
}

fn packet_suffix(index: Option<usize>) -> String {
    index
        .map(|i| format!(" for packet {i}"))
        .unwrap_or_default()
}

pub type Result<T> = std::result::Result<T, Error>;
