//! Feasibility of the cumulative (ladder) constraints
//! `G_{k+1} ≤ S_k ≤ D_k`, `S_K = D_K`, `ℓ_k ≤ m_k ≤ u_k`, where `S_k` is
//! the blocklength used by the first `k` packets.

use crate::error::{Error, Result};
use crate::offline::instance::ProblemInstance;

/// Arrival-gap schedule `m̄_k = G_{k+1} − G_k`, returned when every gap
/// is at least `ℓ_k` and every lifetime `D_k − G_k` is at most the mode
/// threshold. Such a schedule is feasible but the test is only sufficient.
pub fn sufficient_point(inst: &ProblemInstance) -> Option<Vec<f64>> {
    let mut m = Vec::with_capacity(inst.len());
    for (k, (p, b)) in inst.packets().iter().zip(inst.boxes()).enumerate() {
        let gap = inst.next_arrival(k) - p.arrival;
        if gap < b.lower || p.lifetime() > b.threshold {
            return None;
        }
        m.push(gap);
    }
    Some(m)
}

pub fn feasible_sufficient(inst: &ProblemInstance) -> bool {
    sufficient_point(inst).is_some()
}

/// Reachable interval of `S_k` for every `k`, or the first packet at which
/// it becomes empty.
fn reachable(inst: &ProblemInstance) -> std::result::Result<Vec<(f64, f64)>, usize> {
    let mut out = Vec::with_capacity(inst.len());
    let (mut lo, mut hi) = (0.0, 0.0);
    for k in 0..inst.len() {
        let (l, u) = (inst.lower(k), inst.upper(k));
        if l > u {
            return Err(k);
        }
        lo = inst.next_arrival(k).max(lo + l);
        hi = inst.packets()[k].deadline.min(hi + u);
        if lo > hi {
            return Err(k);
        }
        out.push((lo, hi));
    }
    Ok(out)
}

/// Exact test: the forward recursion over reachable cumulative intervals
/// never becomes empty.
pub fn feasible_exact(inst: &ProblemInstance) -> bool {
    reachable(inst).is_ok()
}

/// A feasible schedule: the arrival-gap point where it is feasible,
/// otherwise the nearest cumulative choices to it found by a backward pass
/// over the reachable intervals.
pub fn feasible_point(inst: &ProblemInstance) -> Result<Vec<f64>> {
    let reach = reachable(inst).map_err(|k| {
        Error::Infeasible(format!(
            "no blocklength assignment meets the constraints up to packet {k}"
        ))
    })?;
    let n = inst.len();
    let mut m = vec![0.0; n];
    let mut s = inst.horizon();
    for k in (0..n).rev() {
        let (prev_lo, prev_hi) = if k == 0 { (0.0, 0.0) } else { reach[k - 1] };
        let lo = prev_lo.max(s - inst.upper(k));
        let hi = prev_hi.min(s - inst.lower(k));
        let prev = inst.packets()[k].arrival.max(lo).min(hi);
        m[k] = s - prev;
        s = prev;
    }
    Ok(m)
}
