//! Rayleigh block fading: one power gain per packet.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `|h̃|` is Rayleigh with scale `σ`, so the power gain `h = |h̃|²` is
/// exponential with mean `2σ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelModel {
    pub sigma: f64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self { sigma: 10.0 }
    }
}

impl ChannelModel {
    pub fn new(sigma: f64) -> Result<Self> {
        let c = Self { sigma };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidModel(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    pub fn mean_gain(&self) -> f64 {
        2.0 * self.sigma * self.sigma
    }

    /// Inverse-CDF draw `h = −2σ² ln u` with `u ∈ (0, 1)`, so `h > 0`.
    pub fn sample_gain<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        -self.mean_gain() * u.ln()
    }

    pub fn sample_gains<R: Rng + ?Sized>(&self, rng: &mut R, k: usize) -> Vec<f64> {
        (0..k).map(|_| self.sample_gain(rng)).collect()
    }
}
