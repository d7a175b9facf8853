//! Gaussian tail function, its inverse, and the principal Lambert W branch.

use std::f64::consts::{E, FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// Gaussian tail probability `Q(x) = P[Z > x]` for a standard normal `Z`.
pub fn gaussian_q(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Inverse of [`gaussian_q`]: the `z` with `Q(z) = eps`.
///
/// Acklam's rational approximation of the normal quantile followed by
/// Halley refinement on `Q`. The upper half is mapped through
/// `Q⁻¹(eps) = -Q⁻¹(1 - eps)` so the refinement always works on a tail
/// probability that is known to full relative precision.
pub fn gaussian_q_inv(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain {
            function: "gaussian_q_inv",
            value: eps,
        });
    }
    if eps > 0.5 {
        // 1 - eps is exact for eps in [0.5, 1).
        return Ok(-lower_tail_quantile_neg(1.0 - eps));
    }
    Ok(lower_tail_quantile_neg(eps))
}

#[allow(clippy::excessive_precision)]
/// Returns `-Φ⁻¹(p)` for `p ∈ (0, 0.5]`, i.e. a non-negative `z` with `Q(z) = p`.
fn lower_tail_quantile_neg(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_690e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    // x approximates Φ⁻¹(p) <= 0.
    let mut x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };

    let sqrt_2pi = (2.0 * PI).sqrt();
    for _ in 0..4 {
        // Φ(x) = Q(-x); x <= 0 keeps this in the accurate tail.
        let err = gaussian_q(-x) - p;
        let u = err * sqrt_2pi * (0.5 * x * x).exp();
        let step = u / (1.0 + 0.5 * x * u);
        x -= step;
        if step.abs() <= 1e-15 * (1.0 + x.abs()) {
            break;
        }
    }
    -x
}

/// Principal branch `W₀` of the Lambert W function, `W(z)·e^{W(z)} = z`.
///
/// Defined for `z >= -1/e`; returns values in `[-1, ∞)`.
pub fn lambert_w0(z: f64) -> Result<f64> {
    let branch = -1.0 / E;
    if z.is_nan() || z < branch {
        // Points that round to the branch point from below are accepted.
        if z.is_nan() || (branch - z) > 4.0 * f64::EPSILON * branch.abs() {
            return Err(Error::Domain {
                function: "lambert_w0",
                value: z,
            });
        }
        return Ok(-1.0);
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z == f64::INFINITY {
        return Ok(f64::INFINITY);
    }

    // 2(1 + e·z) with e split in two doubles; plain 1 + E*z loses most
    // digits next to the branch point.
    let near_branch = 2.0 * (E.mul_add(z, 1.0) + E_LO * z);
    if near_branch <= 0.0 {
        return Ok(-1.0);
    }
    let p = near_branch.sqrt();
    if p < 1e-3 {
        // Halley is ill-conditioned here; the branch series is exact to
        // rounding.
        return Ok(branch_series(p));
    }
    let mut w = if near_branch < 0.5 {
        branch_series(p)
    } else if z.abs() < 0.25 {
        z - z * z + 1.5 * z * z * z - 8.0 / 3.0 * z.powi(4)
    } else if z < E {
        // Rough but monotone start on the middle range.
        let l = (1.0 + z).ln();
        l * (1.0 - (1.0 + l).ln() / (2.0 + l))
    } else {
        let l1 = z.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };

    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if !w.is_finite() {
            return Err(Error::Domain {
                function: "lambert_w0",
                value: z,
            });
        }
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w.max(-1.0))
}

const E_LO: f64 = 1.445_646_891_729_250_2e-16;

/// Series of `W₀` about `z = −1/e` in `p = √(2(1 + e·z))`.
fn branch_series(p: f64) -> f64 {
    const C: [f64; 9] = [
        -1.0,
        1.0,
        -1.0 / 3.0,
        11.0 / 72.0,
        -43.0 / 540.0,
        769.0 / 17_280.0,
        -221.0 / 8_505.0,
        680_863.0 / 43_545_600.0,
        -1_963.0 / 204_120.0,
    ];
    C.iter().rev().fold(0.0, |acc, c| acc * p + c)
}
