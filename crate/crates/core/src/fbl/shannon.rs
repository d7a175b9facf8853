//! Closed forms for the Shannon-capacity design (`ε = 0.5`).

use std::f64::consts::{E, LN_2};

use crate::error::{Error, Result};
use crate::fbl::special::lambert_w0;
use crate::types::PacketSpec;

/// `(2^{N/m} − 1)/h`.
pub fn shannon_power(m: f64, pkt: &PacketSpec) -> f64 {
    (pkt.bits * LN_2 / m).exp_m1() / pkt.channel_gain
}

/// `m·(2^{N/m} − 1)/h`.
pub fn shannon_energy(m: f64, pkt: &PacketSpec) -> f64 {
    m * shannon_power(m, pkt)
}

/// `d/dm` of [`shannon_energy`]: `(e^L(1 − L) − 1)/h` with `L = N·ln2/m`.
pub fn shannon_energy_derivative(m: f64, pkt: &PacketSpec) -> f64 {
    let l = pkt.bits * LN_2 / m;
    (l.exp_m1() - l * l.exp()) / pkt.channel_gain
}

/// `d²/dm²` of [`shannon_energy`]: `L²·e^L/(h·m)`.
pub fn shannon_energy_second_derivative(m: f64, pkt: &PacketSpec) -> f64 {
    let l = pkt.bits * LN_2 / m;
    l * l * l.exp() / (pkt.channel_gain * m)
}

/// Inverse of [`shannon_energy_derivative`]: `N·ln2 / (1 + W₀(−(ωh+1)/e))`.
///
/// Defined for `ω < 0`; the energy slope of the Shannon design is always
/// negative.
pub fn shannon_phi(omega: f64, pkt: &PacketSpec) -> Result<f64> {
    let z = -(omega * pkt.channel_gain + 1.0) / E;
    let w = lambert_w0(z)?;
    if !(omega < 0.0) || w <= -1.0 {
        return Err(Error::Domain {
            function: "shannon_phi",
            value: omega,
        });
    }
    Ok(pkt.bits * LN_2 / (1.0 + w))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pkt() -> PacketSpec {
        PacketSpec::new(1.2e4, 0.0, 1e4, 0.5, 7.0).unwrap()
    }

    #[test]
    fn power_inverts_capacity() {
        let p = pkt();
        let pmax = 398.0;
        let m = p.bits / (1.0 + pmax * p.channel_gain).log2();
        assert!((shannon_power(m, &p) / pmax - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phi_inverts_slope() {
        let p = pkt();
        for m in [250.0, 900.0, 2500.0, 8000.0] {
            let w = shannon_energy_derivative(m, &p);
            let back = shannon_phi(w, &p).unwrap();
            assert!((back / m - 1.0).abs() < 1e-9, "m = {m}, back = {back}");
        }
    }

    #[test]
    fn phi_rejects_nonnegative_slope() {
        assert!(shannon_phi(0.0, &pkt()).is_err());
        assert!(shannon_phi(0.1, &pkt()).is_err());
    }

    #[test]
    fn derivative_matches_difference() {
        let p = pkt();
        let m = 1300.0;
        let h = 1e-3;
        let fd = (shannon_energy(m + h, &p) - shannon_energy(m - h, &p)) / (2.0 * h);
        assert!((fd / shannon_energy_derivative(m, &p) - 1.0).abs() < 1e-7);
        let fd2 = (shannon_energy(m + 1.0, &p) - 2.0 * shannon_energy(m, &p)
            + shannon_energy(m - 1.0, &p))
            / 1.0;
        assert!((fd2 / shannon_energy_second_derivative(m, &p) - 1.0).abs() < 1e-4);
    }
}
