//! Blocklength thresholds below which the energy function is provably
//! decreasing (`g_E`) and strictly convex (`g_C`).
//!
//! Both thresholds are SNR levels mapped back through the closed-form
//! blocklength of an SNR, so they do not depend on the channel gain.

use std::f64::consts::E;

use crate::error::{Error, Result};
use crate::fbl::curve::RateCurve;
use crate::fbl::special::{gaussian_q, lambert_w0};
use crate::types::{LinkParams, PacketSpec};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Upper end of the `τ` interval on which the convexity threshold exists.
pub const TAU_MAX: f64 = SQRT_3 / 3.0;

/// Per-packet blocklength limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlocklengthBounds {
    /// `max(m̂, m̃)`.
    pub lower: f64,
    /// `m̃`: shortest blocklength reachable at the power cap.
    pub min_power_blocklength: f64,
    /// `g_E`.
    pub monotone_upper: f64,
    /// `g_C`, absent when `τ ∉ (0, √3/3)`.
    pub convex_upper: Option<f64>,
    pub tau: f64,
}

impl BlocklengthBounds {
    pub fn compute(pkt: &PacketSpec, link: &LinkParams) -> Result<Self> {
        let curve = RateCurve::new(pkt)?;
        let min_power_blocklength = curve.blocklength_of_power(link.max_power);
        Ok(Self {
            lower: link.min_blocklength.max(min_power_blocklength),
            min_power_blocklength,
            monotone_upper: monotone_bound_of(&curve, link)?,
            convex_upper: convex_bound_of(&curve, link).ok(),
            tau: tau_of(&curve, link),
        })
    }
}

/// `τ = Q⁻¹(ε)/√m̂`.
pub fn tau(pkt: &PacketSpec, link: &LinkParams) -> Result<f64> {
    Ok(tau_of(&RateCurve::new(pkt)?, link))
}

fn tau_of(curve: &RateCurve, link: &LinkParams) -> f64 {
    curve.quantile() / link.min_blocklength.sqrt()
}

/// SNR above which the energy slope is negative: the root `x*` of
/// `x/(x+1) − ln(1+x) = −τ/2`, via the principal Lambert branch.
pub fn monotone_snr_threshold(tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::Domain {
            function: "monotone_snr_threshold",
            value: tau,
        });
    }
    let w = lambert_w0(-(-1.0 - 0.5 * tau).exp())?;
    Ok(-1.0 / w - 1.0)
}

/// `η(τ) = (3 + √(9 + 12τ(1−√3τ))) / (4(1−√3τ))`.
pub fn convexity_eta(tau: f64) -> f64 {
    let c = 1.0 - SQRT_3 * tau;
    (3.0 + (9.0 + 12.0 * tau * c).sqrt()) / (4.0 * c)
}

/// SNR above which the energy is strictly convex: `exp(η(τ) + τ/2) − 1`.
pub fn convex_snr_threshold(tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < TAU_MAX) {
        return Err(Error::TauOutOfRange { index: None, tau });
    }
    Ok((convexity_eta(tau) + 0.5 * tau).exp_m1())
}

/// `g_E`. Infinite for the Shannon design, whose energy decreases everywhere.
pub fn monotone_energy_bound(pkt: &PacketSpec, link: &LinkParams) -> Result<f64> {
    monotone_bound_of(&RateCurve::new(pkt)?, link)
}

fn monotone_bound_of(curve: &RateCurve, link: &LinkParams) -> Result<f64> {
    if curve.is_shannon() {
        return Ok(f64::INFINITY);
    }
    let x = monotone_snr_threshold(tau_of(curve, link))?;
    Ok(curve.blocklength_of_snr(x))
}

/// `g_C`. Infinite for the Shannon design, whose energy is convex
/// everywhere; [`Error::TauOutOfRange`] when `τ ≥ √3/3`.
pub fn convexity_bound(pkt: &PacketSpec, link: &LinkParams) -> Result<f64> {
    convex_bound_of(&RateCurve::new(pkt)?, link)
}

fn convex_bound_of(curve: &RateCurve, link: &LinkParams) -> Result<f64> {
    if curve.is_shannon() {
        return Ok(f64::INFINITY);
    }
    let x = convex_snr_threshold(tau_of(curve, link))?;
    Ok(curve.blocklength_of_snr(x))
}

/// Smallest error probability for which `τ < √3/3` at minimum blocklength
/// `m_hat`: `Q(√(3m̂)/3)`.
pub fn epsilon_validity_floor(m_hat: f64) -> f64 {
    gaussian_q((3.0 * m_hat).sqrt() / 3.0)
}

/// `η(0)` threshold, `e^{3/2} − 1`.
pub fn convex_snr_threshold_limit() -> f64 {
    E.powf(1.5) - 1.0
}
