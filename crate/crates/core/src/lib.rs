//! Energy-minimal blocklength/power scheduling of deadline-constrained
//! packet sequences under the finite-blocklength (normal approximation)
//! capacity model.
//!
//! - [`fbl`]: capacity math for one packet.
//! - [`offline`]: instance validation, feasibility, the water-filling and
//!   proximal solvers, and a brute-force oracle.
//! - [`online`]: the rolling-window and myopic schedulers.
//! - [`sim`]: traffic and channel generators and the experiment drivers.
//! - [`io`]: JSON documents, CSV tables and SVG plots.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod fbl;
pub mod io;
pub mod offline;
pub mod online;
pub mod sim;
pub mod types;

pub use error::{Error, Result};
pub use types::{dbw_to_watts, LinkParams, PacketSpec};
