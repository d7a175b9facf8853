//! Capacity mathematics for one packet: special functions, the implicit
//! rate curve, energy and its derivatives, and the monotonicity/convexity
//! thresholds.

pub mod bounds;
pub mod curve;
pub mod roots;
pub mod shannon;
pub mod special;

pub use bounds::{
    convexity_bound, epsilon_validity_floor, monotone_energy_bound, tau, BlocklengthBounds, TAU_MAX,
};
pub use curve::{
    blocklength_of_power, blocklength_of_snr, capacity_residual, energy, energy_derivative,
    energy_second_derivative, power_of_blocklength, snr_of_blocklength, CapacityPoint, RateCurve,
    DEFAULT_POWER_TOL, DEFAULT_RESIDUAL_TOL,
};
pub use shannon::{shannon_energy, shannon_energy_derivative, shannon_phi, shannon_power};
pub use special::{gaussian_q, gaussian_q_inv, lambert_w0};
