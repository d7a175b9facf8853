//! Validated K-packet scheduling problems with per-packet blocklength boxes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbl::bounds::BlocklengthBounds;
use crate::fbl::curve::RateCurve;
use crate::types::{LinkParams, PacketSpec};

/// Which upper threshold caps each blocklength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMode {
    /// `u_k = min(g_E, g_C)`: every energy function is strictly convex on
    /// its box, so the water-filling solution is globally optimal.
    Convex,
    /// `u_k = g_E`: energies are only known to be decreasing.
    General,
}

/// Per-packet box `[lower, upper]` plus the thresholds it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketBox {
    /// `ℓ_k = max(m̂, m̃_k)`.
    pub lower: f64,
    /// Mode threshold before intersecting with the packet's own window.
    pub threshold: f64,
    /// `min(threshold, D_k − G_k)`.
    pub upper: f64,
    pub bounds: BlocklengthBounds,
}

/// Packets sorted in FIFO order, the link, and each packet's box.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    packets: Vec<PacketSpec>,
    link: LinkParams,
    mode: BoundMode,
    curves: Vec<RateCurve>,
    boxes: Vec<PacketBox>,
}

impl ProblemInstance {
    /// Strict validation: arrivals and deadlines strictly increasing, every
    /// consecutive pair sharing a scheduling interval, first arrival at 0.
    pub fn new(packets: Vec<PacketSpec>, link: LinkParams, mode: BoundMode) -> Result<Self> {
        Self::build(packets, link, mode, false)
    }

    /// Like [`ProblemInstance::new`] but accepts equal arrival times, as in
    /// an online window where every queued packet has already arrived.
    pub fn new_window(packets: Vec<PacketSpec>, link: LinkParams, mode: BoundMode) -> Result<Self> {
        Self::build(packets, link, mode, true)
    }

    /// Convex mode when every packet admits a convexity threshold,
    /// general mode otherwise.
    pub fn new_auto(packets: Vec<PacketSpec>, link: LinkParams) -> Result<Self> {
        match Self::new(packets.clone(), link, BoundMode::Convex) {
            Err(Error::TauOutOfRange { .. }) => Self::new(packets, link, BoundMode::General),
            other => other,
        }
    }

    fn build(
        packets: Vec<PacketSpec>,
        link: LinkParams,
        mode: BoundMode,
        simultaneous_arrivals: bool,
    ) -> Result<Self> {
        link.validate()?;
        if packets.is_empty() {
            return Err(Error::EmptyInstance);
        }
        for (i, p) in packets.iter().enumerate() {
            p.validate(i)?;
        }
        if packets[0].arrival != 0.0 {
            return Err(Error::FirstArrivalNotZero(packets[0].arrival));
        }
        for (i, w) in packets.windows(2).enumerate() {
            let (a, b) = (&w[0], &w[1]);
            let arrivals_ok = if simultaneous_arrivals {
                a.arrival <= b.arrival
            } else {
                a.arrival < b.arrival
            };
            if !arrivals_ok {
                return Err(Error::NotFifo {
                    index: i,
                    reason: format!("arrival {} then {}", a.arrival, b.arrival),
                });
            }
            if !(a.deadline < b.deadline) {
                return Err(Error::NotFifo {
                    index: i,
                    reason: format!("deadline {} then {}", a.deadline, b.deadline),
                });
            }
            if b.arrival >= a.deadline {
                return Err(Error::NotSingleSchedulingInterval {
                    index: i,
                    arrival: b.arrival,
                    deadline: a.deadline,
                });
            }
        }

        let mut curves = Vec::with_capacity(packets.len());
        let mut boxes = Vec::with_capacity(packets.len());
        for (i, p) in packets.iter().enumerate() {
            let curve = RateCurve::new(p)?;
            let bounds = BlocklengthBounds::compute(p, &link)?;
            let threshold = match mode {
                BoundMode::General => bounds.monotone_upper,
                BoundMode::Convex => match bounds.convex_upper {
                    Some(gc) => gc.min(bounds.monotone_upper),
                    None => {
                        return Err(Error::TauOutOfRange {
                            index: Some(i),
                            tau: bounds.tau,
                        })
                    }
                },
            };
            boxes.push(PacketBox {
                lower: bounds.lower,
                threshold,
                upper: threshold.min(p.lifetime()),
                bounds,
            });
            curves.push(curve);
        }
        Ok(Self {
            packets,
            link,
            mode,
            curves,
            boxes,
        })
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn packets(&self) -> &[PacketSpec] {
        &self.packets
    }

    pub fn link(&self) -> &LinkParams {
        &self.link
    }

    pub fn mode(&self) -> BoundMode {
        self.mode
    }

    pub fn curves(&self) -> &[RateCurve] {
        &self.curves
    }

    pub fn boxes(&self) -> &[PacketBox] {
        &self.boxes
    }

    pub fn lower(&self, k: usize) -> f64 {
        self.boxes[k].lower
    }

    pub fn upper(&self, k: usize) -> f64 {
        self.boxes[k].upper
    }

    /// `G_{k+1}` with the convention `G_{K+1} = D_K`.
    pub fn next_arrival(&self, k: usize) -> f64 {
        match self.packets.get(k + 1) {
            Some(p) => p.arrival,
            None => self.packets[k].deadline,
        }
    }

    /// Lower bounds on the cumulative blocklength after each packet.
    pub fn cumulative_lower(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.next_arrival(k)).collect()
    }

    /// Upper bounds on the cumulative blocklength after each packet.
    pub fn cumulative_upper(&self) -> Vec<f64> {
        self.packets.iter().map(|p| p.deadline).collect()
    }

    /// Total blocklength every schedule must use, `D_K`.
    pub fn horizon(&self) -> f64 {
        self.packets[self.len() - 1].deadline
    }

    /// Same arrivals, deadlines and gains at a different error target.
    pub fn with_error_prob(&self, error_prob: f64) -> Result<Self> {
        let packets = self
            .packets
            .iter()
            .map(|p| p.with_error_prob(error_prob))
            .collect();
        let simultaneous = self
            .packets
            .windows(2)
            .any(|w| w[0].arrival == w[1].arrival);
        Self::build(packets, self.link, self.mode, simultaneous)
    }

    /// Same packets under another bound mode.
    pub fn with_mode(&self, mode: BoundMode) -> Result<Self> {
        let simultaneous = self
            .packets
            .windows(2)
            .any(|w| w[0].arrival == w[1].arrival);
        Self::build(self.packets.clone(), self.link, mode, simultaneous)
    }
}

/// Strict validation in the given mode; see [`ProblemInstance::new`].
pub fn validate_instance(
    packets: Vec<PacketSpec>,
    link: LinkParams,
    mode: BoundMode,
) -> Result<ProblemInstance> {
    ProblemInstance::new(packets, link, mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pkt(g: f64, d: f64) -> PacketSpec {
        PacketSpec::new(1.2e4, g, d, 5e-4, 100.0).unwrap()
    }

    #[test]
    fn single_packet_horizon() {
        let inst = validate_instance(
            vec![pkt(0.0, 1000.0)],
            LinkParams::default(),
            BoundMode::Convex,
        )
        .unwrap();
        assert_eq!(inst.horizon(), 1000.0);
        assert_eq!(inst.next_arrival(0), 1000.0);
        assert_eq!(inst.upper(0), 1000.0);
    }

    #[test]
    fn split_point_is_rejected() {
        let err = validate_instance(
            vec![pkt(0.0, 400.0), pkt(500.0, 900.0)],
            LinkParams::default(),
            BoundMode::Convex,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::NotSingleSchedulingInterval { index: 0, .. }
        ));
    }

    #[test]
    fn fifo_violations() {
        let link = LinkParams::default();
        let err = validate_instance(
            vec![pkt(0.0, 900.0), pkt(0.0, 1000.0)],
            link,
            BoundMode::Convex,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotFifo { .. }));
        assert!(ProblemInstance::new_window(
            vec![pkt(0.0, 900.0), pkt(0.0, 1000.0)],
            link,
            BoundMode::Convex
        )
        .is_ok());
        let err = validate_instance(
            vec![pkt(0.0, 900.0), pkt(10.0, 800.0)],
            link,
            BoundMode::Convex,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotFifo { .. }));
        let err = validate_instance(vec![pkt(5.0, 900.0)], link, BoundMode::Convex).unwrap_err();
        assert!(matches!(err, Error::FirstArrivalNotZero(_)));
        assert!(matches!(
            validate_instance(vec![], link, BoundMode::Convex),
            Err(Error::EmptyInstance)
        ));
    }

    #[test]
    fn convex_mode_needs_small_tau() {
        let link = LinkParams::new(100.0, 398.0, 66.7e-6).unwrap();
        let p = PacketSpec::new(1.2e4, 0.0, 3000.0, 1e-9, 100.0).unwrap();
        let err = validate_instance(vec![p], link, BoundMode::Convex).unwrap_err();
        assert!(matches!(err, Error::TauOutOfRange { index: Some(0), .. }));
        let inst = ProblemInstance::new_auto(vec![p], link).unwrap();
        assert_eq!(inst.mode(), BoundMode::General);
    }

    #[test]
    fn boxes_follow_mode() {
        let link = LinkParams::default();
        let packets = vec![pkt(0.0, 20_000.0)];
        let c = validate_instance(packets.clone(), link, BoundMode::Convex).unwrap();
        let g = validate_instance(packets, link, BoundMode::General).unwrap();
        assert!((c.upper(0) - 3102.063).abs() < 1e-2);
        assert!((g.upper(0) - 16_509.246).abs() < 1e-2);
        assert_eq!(c.lower(0), g.lower(0));
    }
}
