//! The finite-blocklength rate curve of a single packet.
//!
//! Everything is expressed through the scaled residual
//!
//! ```text
//! F̃(m, x) = m·ln(1+x) − √m · √(x(x+2))/(x+1) · Q⁻¹(ε) − N·ln2
//! ```
//!
//! with `x = p·h` the receive SNR. `F̃ = −m·ln2·F` where `F` is the rate
//! residual, so both vanish on the same curve and the implicit-function
//! ratios agree there. `F̃` is quadratic in `√m`, which gives the closed-form
//! blocklength of a given SNR; the SNR (power) of a given blocklength has no
//! closed form and is found by bisection on that inverse.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::fbl::roots::newton_bisect;
use crate::fbl::special::gaussian_q_inv;
use crate::types::{LinkParams, PacketSpec};

/// Default bisection width on power (W).
pub const DEFAULT_POWER_TOL: f64 = 1e-9;
/// Default residual bound `|F(m, p)|` expected after a power solve.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;

/// A solved point on the rate curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityPoint {
    pub blocklength: f64,
    pub power: f64,
    pub snr: f64,
}

/// Partial derivatives of `F̃` at one `(m, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partials {
    pub f_m: f64,
    pub f_x: f64,
    pub f_mm: f64,
    pub f_mx: f64,
    pub f_xx: f64,
}

/// Rate curve of one packet with `Q⁻¹(ε)` and `N·ln2` precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCurve {
    bits: f64,
    bits_ln2: f64,
    q: f64,
    gain: f64,
}

/// `√(x(x+2))/(x+1)`, the channel-dispersion factor.
fn dispersion(x: f64) -> f64 {
    (x * (x + 2.0)).sqrt() / (x + 1.0)
}

impl RateCurve {
    pub fn new(pkt: &PacketSpec) -> Result<Self> {
        if !(pkt.error_prob > 0.0 && pkt.error_prob <= 0.5) {
            return Err(Error::Domain {
                function: "RateCurve::new",
                value: pkt.error_prob,
            });
        }
        if !(pkt.bits > 0.0 && pkt.channel_gain > 0.0) {
            return Err(Error::InvalidPacket {
                index: 0,
                reason: "bits and channel gain must be positive".into(),
            });
        }
        let q = if pkt.error_prob == 0.5 {
            0.0
        } else {
            gaussian_q_inv(pkt.error_prob)?
        };
        Ok(Self {
            bits: pkt.bits,
            bits_ln2: pkt.bits * LN_2,
            q,
            gain: pkt.channel_gain,
        })
    }

    pub fn bits(&self) -> f64 {
        self.bits
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// `Q⁻¹(ε)`; zero for the Shannon reference design.
    pub fn quantile(&self) -> f64 {
        self.q
    }

    pub fn is_shannon(&self) -> bool {
        self.q == 0.0
    }

    /// Rate residual `F(m, p)`; zero exactly on the rate curve.
    pub fn residual(&self, m: f64, p: f64) -> f64 {
        let x = p * self.gain;
        let penalty = (1.0 / m * (1.0 - 1.0 / ((x + 1.0) * (x + 1.0)))).sqrt() * self.q / LN_2;
        penalty - x.ln_1p() / LN_2 + self.bits / m
    }

    /// Scaled residual `F̃(m, x)`.
    pub fn scaled_residual(&self, m: f64, x: f64) -> f64 {
        m * x.ln_1p() - m.sqrt() * dispersion(x) * self.q - self.bits_ln2
    }

    pub fn partials(&self, m: f64, x: f64) -> Partials {
        let sm = m.sqrt();
        let xp1 = x + 1.0;
        let xx2 = x * (x + 2.0);
        let root = xx2.sqrt();
        let s = root / xp1;
        let ds = 1.0 / (root * xp1 * xp1);
        let d2s = -(3.0 * xp1 * xp1 - 2.0) / (xx2 * root * xp1 * xp1 * xp1);
        let q = self.q;
        Partials {
            f_m: x.ln_1p() - q * s / (2.0 * sm),
            f_x: m / xp1 - q * sm * ds,
            f_mm: q * s / (4.0 * m * sm),
            f_mx: 1.0 / xp1 - q * ds / (2.0 * sm),
            f_xx: -m / (xp1 * xp1) - q * sm * d2s,
        }
    }

    /// Closed-form blocklength at which SNR `x` exactly meets the rate
    /// requirement: the positive root of `F̃` read as a quadratic in `√m`.
    pub fn blocklength_of_snr(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::INFINITY;
        }
        let alpha = x.ln_1p();
        let beta = dispersion(x) * self.q;
        let root = (beta + (beta * beta + 4.0 * self.bits_ln2 * alpha).sqrt()) / (2.0 * alpha);
        root * root
    }

    pub fn blocklength_of_power(&self, power: f64) -> f64 {
        self.blocklength_of_snr(power * self.gain)
    }

    /// SNR needed at blocklength `m`, with no power cap. Independent of the
    /// channel gain.
    pub fn snr_of_blocklength(&self, m: f64) -> Result<f64> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::Domain {
                function: "snr_of_blocklength",
                value: m,
            });
        }
        // The Shannon SNR ignores the dispersion penalty, so it brackets
        // the root from below.
        let lo = (self.bits_ln2 / m).exp_m1();
        if self.is_shannon() {
            return Ok(lo);
        }
        let mut hi = 2.0 * lo + 1.0;
        while self.blocklength_of_snr(hi) > m {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Domain {
                    function: "snr_of_blocklength",
                    value: m,
                });
            }
        }
        Ok(self.bisect_snr(m, lo, hi, hi * 1e-12))
    }

    /// Bisection on SNR using the closed-form inverse as the comparison,
    /// then Newton polishing on `F̃` inside the final bracket.
    fn bisect_snr(&self, m: f64, mut lo: f64, mut hi: f64, width: f64) -> f64 {
        while hi - lo > width {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.blocklength_of_snr(mid) < m {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        self.polish(m, 0.5 * (lo + hi), lo, hi)
    }

    fn polish(&self, m: f64, mut x: f64, lo: f64, hi: f64) -> f64 {
        for _ in 0..6 {
            let f = self.scaled_residual(m, x);
            let fx = self.partials(m, x).f_x;
            if !(fx > 0.0) {
                break;
            }
            let next = x - f / fx;
            if !(next >= lo && next <= hi) {
                break;
            }
            let step = (next - x).abs();
            x = next;
            if step <= 2.0 * f64::EPSILON * x {
                break;
            }
        }
        x
    }

    /// Power meeting the rate requirement at blocklength `m` under the
    /// power cap `max_power`.
    ///
    /// Brackets `p` between the Shannon power (a lower bound) and
    /// `max_power`, then shrinks the bracket to width `tol` by
    /// Newton-accelerated bisection on `F̃`.
    pub fn power_of_blocklength(&self, m: f64, max_power: f64, tol: f64) -> Result<f64> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::Domain {
                function: "power_of_blocklength",
                value: m,
            });
        }
        let min_blocklength = self.blocklength_of_power(max_power);
        if m < min_blocklength {
            // Sums of blocklengths land a few ulps off the bound.
            if m >= min_blocklength * (1.0 - 1e-12) {
                return Ok(max_power);
            }
            return Err(Error::InfeasiblePower { m, min_blocklength });
        }
        let g = self.gain;
        let shannon = (self.bits_ln2 / m).exp_m1() / g;
        if self.is_shannon() {
            return Ok(shannon);
        }
        let lo = shannon.min(max_power);
        let f = |p: f64| {
            let x = p * g;
            (self.scaled_residual(m, x), self.partials(m, x).f_x * g)
        };
        Ok(newton_bisect(f, lo, max_power, lo, tol))
    }

    pub fn point(&self, m: f64, link: &LinkParams, tol: f64) -> Result<CapacityPoint> {
        let power = self.power_of_blocklength(m, link.max_power, tol)?;
        Ok(CapacityPoint {
            blocklength: m,
            power,
            snr: power * self.gain,
        })
    }

    /// `dx/dm` and `d²x/dm²` along the curve at `(m, x)`, by implicit
    /// differentiation of `F̃(m, x(m)) = 0`.
    pub fn snr_slopes(&self, m: f64, x: f64) -> (f64, f64) {
        let d = self.partials(m, x);
        let dx = -d.f_m / d.f_x;
        let d2x = -(d.f_mm + 2.0 * d.f_mx * dx + d.f_xx * dx * dx) / d.f_x;
        (dx, d2x)
    }

    /// Energy slope `E'(m)` given the SNR already solved at `m`.
    pub fn energy_derivative_at(&self, m: f64, x: f64) -> f64 {
        let d = self.partials(m, x);
        (x - m * d.f_m / d.f_x) / self.gain
    }

    /// Energy curvature `E''(m)` given the SNR already solved at `m`.
    pub fn energy_second_derivative_at(&self, m: f64, x: f64) -> f64 {
        let (dx, d2x) = self.snr_slopes(m, x);
        (2.0 * dx + m * d2x) / self.gain
    }

    /// Transmission energy `m·P(m)` in Watt-symbols.
    pub fn energy(&self, m: f64, max_power: f64, tol: f64) -> Result<f64> {
        Ok(m * self.power_of_blocklength(m, max_power, tol)?)
    }

    pub fn energy_derivative(&self, m: f64, max_power: f64, tol: f64) -> Result<f64> {
        let x = self.power_of_blocklength(m, max_power, tol)? * self.gain;
        Ok(self.energy_derivative_at(m, x))
    }

    pub fn energy_second_derivative(&self, m: f64, max_power: f64, tol: f64) -> Result<f64> {
        let x = self.power_of_blocklength(m, max_power, tol)? * self.gain;
        Ok(self.energy_second_derivative_at(m, x))
    }
}

fn positive(function: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain { function, value })
    }
}

/// `F(m, p)` for `pkt`.
pub fn capacity_residual(m: f64, p: f64, pkt: &PacketSpec) -> Result<f64> {
    Ok(RateCurve::new(pkt)?.residual(m, p))
}

pub fn power_of_blocklength(m: f64, pkt: &PacketSpec, link: &LinkParams, tol: f64) -> Result<f64> {
    RateCurve::new(pkt)?.power_of_blocklength(m, link.max_power, tol)
}

pub fn blocklength_of_power(power: f64, pkt: &PacketSpec) -> Result<f64> {
    let power = positive("blocklength_of_power", power)?;
    Ok(RateCurve::new(pkt)?.blocklength_of_power(power))
}

pub fn snr_of_blocklength(m: f64, pkt: &PacketSpec) -> Result<f64> {
    RateCurve::new(pkt)?.snr_of_blocklength(m)
}

pub fn blocklength_of_snr(x: f64, pkt: &PacketSpec) -> Result<f64> {
    let x = positive("blocklength_of_snr", x)?;
    Ok(RateCurve::new(pkt)?.blocklength_of_snr(x))
}

/// Energy in Watt-symbols at blocklength `m`, default power tolerance.
pub fn energy(m: f64, pkt: &PacketSpec, link: &LinkParams) -> Result<f64> {
    RateCurve::new(pkt)?.energy(m, link.max_power, DEFAULT_POWER_TOL)
}

pub fn energy_derivative(m: f64, pkt: &PacketSpec, link: &LinkParams) -> Result<f64> {
    RateCurve::new(pkt)?.energy_derivative(m, link.max_power, DEFAULT_POWER_TOL)
}

pub fn energy_second_derivative(m: f64, pkt: &PacketSpec, link: &LinkParams) -> Result<f64> {
    RateCurve::new(pkt)?.energy_second_derivative(m, link.max_power, DEFAULT_POWER_TOL)
}
