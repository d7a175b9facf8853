//! Plain data shared by every layer: one packet and the link it is sent over.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest blocklength for which the normal approximation is trusted.
pub const MIN_VALID_BLOCKLENGTH: f64 = 100.0;

/// One packet: `bits` to deliver inside `[arrival, deadline]` (symbol units)
/// at block error probability `error_prob` over a channel with power gain
/// `channel_gain` (noise power normalized to one).
///
/// `error_prob = 0.5` is accepted: it is the Shannon-capacity reference
/// design, where the dispersion penalty vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketSpec {
    pub bits: f64,
    pub arrival: f64,
    pub deadline: f64,
    pub error_prob: f64,
    pub channel_gain: f64,
}

impl PacketSpec {
    pub fn new(
        bits: f64,
        arrival: f64,
        deadline: f64,
        error_prob: f64,
        channel_gain: f64,
    ) -> Result<Self> {
        let pkt = Self {
            bits,
            arrival,
            deadline,
            error_prob,
            channel_gain,
        };
        pkt.validate(0)?;
        Ok(pkt)
    }

    /// Checks the per-packet invariants; `index` only labels the error.
    pub fn validate(&self, index: usize) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidPacket { index, reason });
        if !(self.bits.is_finite() && self.bits > 0.0) {
            return bad(format!("bits must be positive, got {}", self.bits));
        }
        if !(self.arrival.is_finite() && self.arrival >= 0.0) {
            return bad(format!("arrival must be >= 0, got {}", self.arrival));
        }
        if !(self.deadline.is_finite() && self.deadline > self.arrival) {
            return bad(format!(
                "deadline {} must exceed arrival {}",
                self.deadline, self.arrival
            ));
        }
        if !(self.error_prob > 0.0 && self.error_prob <= 0.5) {
            return bad(format!(
                "error probability must lie in (0, 0.5], got {}",
                self.error_prob
            ));
        }
        if !(self.channel_gain.is_finite() && self.channel_gain > 0.0) {
            return bad(format!(
                "channel gain must be positive, got {}",
                self.channel_gain
            ));
        }
        Ok(())
    }

    /// Length of the packet's own window, `D - G`.
    pub fn lifetime(&self) -> f64 {
        self.deadline - self.arrival
    }

    /// Copy of the packet with a different error target.
    pub fn with_error_prob(mut self, error_prob: f64) -> Self {
        self.error_prob = error_prob;
        self
    }
}

/// Link-wide limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    /// Minimum blocklength m̂ (symbols).
    pub min_blocklength: f64,
    /// Peak transmit power (W).
    pub max_power: f64,
    /// Symbol duration (s); converts Watt-symbols to Joules.
    pub symbol_duration: f64,
}

impl LinkParams {
    pub fn new(min_blocklength: f64, max_power: f64, symbol_duration: f64) -> Result<Self> {
        let link = Self {
            min_blocklength,
            max_power,
            symbol_duration,
        };
        link.validate()?;
        Ok(link)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_blocklength.is_finite() && self.min_blocklength >= MIN_VALID_BLOCKLENGTH) {
            return Err(Error::InvalidLink(format!(
                "minimum blocklength must be >= {MIN_VALID_BLOCKLENGTH}, got {}",
                self.min_blocklength
            )));
        }
        if !(self.max_power.is_finite() && self.max_power > 0.0) {
            return Err(Error::InvalidLink(format!(
                "maximum power must be positive, got {}",
                self.max_power
            )));
        }
        if !(self.symbol_duration.is_finite() && self.symbol_duration > 0.0) {
            return Err(Error::InvalidLink(format!(
                "symbol duration must be positive, got {}",
                self.symbol_duration
            )));
        }
        Ok(())
    }

    /// Converts an energy in Watt-symbols to Joules.
    pub fn joules(&self, watt_symbols: f64) -> f64 {
        watt_symbols * self.symbol_duration
    }
}

impl Default for LinkParams {
    /// m̂ = 200 symbols, 26 dBW peak power, 66.7 µs LTE symbols.
    fn default() -> Self {
        Self {
            min_blocklength: 200.0,
            max_power: dbw_to_watts(26.0),
            symbol_duration: 66.7e-6,
        }
    }
}

pub fn dbw_to_watts(dbw: f64) -> f64 {
    10f64.powf(dbw / 10.0)
}
