//! Truncated-exponential arrival gaps and lifetimes.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::PacketSpec;

/// Exponential law with rate `rate` restricted to `[lo, hi]`. A negative
/// rate tilts mass toward `hi`; zero is the uniform law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedExponential {
    lo: f64,
    hi: f64,
    rate: f64,
}

/// `|rate·width|` below which the series forms are used.
const SMALL: f64 = 1e-6;

impl TruncatedExponential {
    pub fn new(lo: f64, hi: f64, rate: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi && rate.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "truncated exponential needs finite lo < hi and rate, got [{lo}, {hi}], {rate}"
            )));
        }
        Ok(Self { lo, hi, rate })
    }

    /// The member of the family on `[lo, hi]` whose mean is `mean`.
    pub fn with_mean(lo: f64, hi: f64, mean: f64) -> Result<Self> {
        let mut d = Self::new(lo, hi, 0.0)?;
        if !(mean > lo && mean < hi) {
            return Err(Error::InvalidModel(format!(
                "mean {mean} must lie strictly inside [{lo}, {hi}]"
            )));
        }
        let w = hi - lo;
        // The mean falls monotonically in the rate; ±800/w leaves well under
        // a 1e-300 share of the mass at the far end.
        let (mut a, mut b) = (-800.0 / w, 800.0 / w);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            d.rate = mid;
            if d.mean() > mean {
                a = mid;
            } else {
                b = mid;
            }
            if b - a <= 1e-15 * (1.0 + mid.abs()) {
                break;
            }
        }
        d.rate = 0.5 * (a + b);
        if (d.rate * w).abs() < 1e-12 {
            d.rate = 0.0;
        }
        Ok(d)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn mean(&self) -> f64 {
        let w = self.hi - self.lo;
        let t = self.rate * w;
        let offset = if t.abs() < SMALL {
            w * (0.5 - t / 12.0)
        } else {
            w * (1.0 / t - 1.0 / t.exp_m1())
        };
        self.lo + offset
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 0.0;
        }
        if x >= self.hi {
            return 1.0;
        }
        let w = self.hi - self.lo;
        let s = x - self.lo;
        if (self.rate * w).abs() < SMALL {
            return s / w;
        }
        (-self.rate * s).exp_m1() / (-self.rate * w).exp_m1()
    }

    /// Inverse of [`TruncatedExponential::cdf`] for `u ∈ [0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let w = self.hi - self.lo;
        let s = if (self.rate * w).abs() < SMALL {
            u * w
        } else {
            -(u * (-self.rate * w).exp_m1()).ln_1p() / self.rate
        };
        (self.lo + s).clamp(self.lo, self.hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.sample(Open01))
    }
}

/// Packet-stream generator.
///
/// Gaps `G_{k+1} − G_k` have mean `νm̂` on `[(ν−1)m̂, (ν+1)m̂]` and lifetimes
/// mean `nm̂` on `[(n−1)m̂, (n+1)m̂]`. The first `backlog` packets are
/// already queued at time 0: they keep the deadlines their nominal arrival
/// and lifetime would give, but their arrival is set to 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficModel {
    pub nu: f64,
    pub n: f64,
    pub m_hat: f64,
    pub packets: usize,
    pub bits: f64,
    pub error_prob: f64,
    #[serde(default)]
    pub backlog: usize,
}

impl Default for TrafficModel {
    fn default() -> Self {
        Self {
            nu: 6.0,
            n: 10.0,
            m_hat: 200.0,
            packets: 5,
            bits: 1.2e4,
            error_prob: 5e-4,
            backlog: 0,
        }
    }
}

impl TrafficModel {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(m));
        if !(self.m_hat.is_finite() && self.m_hat > 0.0) {
            return bad(format!("m_hat must be positive, got {}", self.m_hat));
        }
        if !(self.nu > 3.0 && self.nu <= self.n - 2.0) {
            return bad(format!(
                "need 3 < nu <= n - 2 for FIFO order and a single scheduling interval, got nu = {}, n = {}",
                self.nu, self.n
            ));
        }
        if !self.n.is_finite() {
            return bad(format!("n must be finite, got {}", self.n));
        }
        if self.packets == 0 {
            return bad("packets must be at least 1".into());
        }
        if self.backlog > self.packets {
            return bad(format!(
                "backlog {} exceeds the packet count {}",
                self.backlog, self.packets
            ));
        }
        if !(self.bits.is_finite() && self.bits > 0.0) {
            return bad(format!("bits must be positive, got {}", self.bits));
        }
        if !(self.error_prob > 0.0 && self.error_prob <= 0.5) {
            return bad(format!(
                "error_prob must lie in (0, 0.5], got {}",
                self.error_prob
            ));
        }
        Ok(())
    }

    pub fn gap_law(&self) -> Result<TruncatedExponential> {
        let m = self.m_hat;
        TruncatedExponential::with_mean((self.nu - 1.0) * m, (self.nu + 1.0) * m, self.nu * m)
    }

    pub fn lifetime_law(&self) -> Result<TruncatedExponential> {
        let m = self.m_hat;
        TruncatedExponential::with_mean((self.n - 1.0) * m, (self.n + 1.0) * m, self.n * m)
    }

    /// Draws arrivals and deadlines; every gain is set to `1`.
    ///
    /// Each packet consumes two uniforms (gap, then lifetime) in a fixed
    /// order, so models differing only in `ν` or `n` see common random
    /// numbers.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<PacketSpec>> {
        self.validate()?;
        let gap = self.gap_law()?;
        let life = self.lifetime_law()?;
        let mut out = Vec::with_capacity(self.packets);
        let mut g = 0.0;
        for k in 0..self.packets {
            let dg = gap.sample(rng);
            let lifetime = life.sample(rng);
            if k > 0 {
                g += dg;
            }
            let arrival = if k < self.backlog { 0.0 } else { g };
            out.push(PacketSpec {
                bits: self.bits,
                arrival,
                deadline: g + lifetime,
                error_prob: self.error_prob,
                channel_gain: 1.0,
            });
        }
        Ok(out)
    }
}
