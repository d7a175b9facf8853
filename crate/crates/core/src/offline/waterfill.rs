//! Divide-and-conquer water filling over ladder constraints.
//!
//! Minimizes a separable convex objective `Σ f_k(m_k)` subject to boxes
//! `m_k ∈ [ℓ_k, u_k]` and cumulative bounds `lo_k ≤ S_k ≤ hi_k` with the
//! final cumulative sum fixed. Each coordinate is described only through
//! its clipped response `m_k(ω) = clip(f_k'⁻¹(ω), ℓ_k, u_k)`.
//!
//! A segment with fixed start and end cumulative sums gets a single water
//! level found by bisection. If that level breaks an interior cumulative
//! bound, the most violated bound (leftmost on ties) is pinned and both
//! halves are solved again.

use crate::error::{Error, Result};

/// One coordinate family of the separable problem.
pub(crate) trait Coordinates {
    fn len(&self) -> usize;
    fn lower(&self, k: usize) -> f64;
    fn upper(&self, k: usize) -> f64;
    /// Marginals at the box ends, `(f_k'(ℓ_k), f_k'(u_k))`.
    fn level_range(&self, k: usize) -> (f64, f64);
    /// Clipped, nondecreasing response to the water level `omega`.
    fn response(&self, k: usize, omega: f64) -> f64;
}

/// Which cumulative bound a split point was pinned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Pin {
    /// `S_j = lo_j` (arrival of the next packet).
    Lower,
    /// `S_j = hi_j` (deadline).
    Upper,
}

#[derive(Debug, Clone)]
pub(crate) struct LadderSolution {
    pub m: Vec<f64>,
    /// Water level of the segment containing each coordinate.
    pub omega: Vec<f64>,
    /// Pin at each split point `j` (between coordinates `j` and `j+1`).
    pub pins: Vec<Option<Pin>>,
    /// Number of level searches performed.
    pub segments: usize,
}

pub(crate) struct Ladder<'a> {
    pub lo: &'a [f64],
    pub hi: &'a [f64],
    /// Target width of the summed response bracket (symbols).
    pub tol: f64,
}

struct Leaf {
    start: usize,
    end: usize,
}

pub(crate) fn solve_ladder<C: Coordinates>(c: &C, ladder: &Ladder<'_>) -> Result<LadderSolution> {
    let n = c.len();
    let mut sol = LadderSolution {
        m: vec![0.0; n],
        omega: vec![0.0; n],
        pins: vec![None; n.saturating_sub(1)],
        segments: 0,
    };
    let mut leaves = Vec::new();
    let total = ladder.hi[n - 1];
    segment(c, ladder, 0, n, 0.0, total, &mut sol, &mut leaves)?;
    reconcile_levels(c, &mut sol, &leaves);
    Ok(sol)
}

#[allow(clippy::too_many_arguments)]
fn segment<C: Coordinates>(
    c: &C,
    ladder: &Ladder<'_>,
    start: usize,
    end: usize,
    from: f64,
    to: f64,
    sol: &mut LadderSolution,
    leaves: &mut Vec<Leaf>,
) -> Result<()> {
    let budget = to - from;
    let omega = level_search(c, start, end, budget, ladder.tol, &mut sol.m[start..end])?;
    sol.segments += 1;

    // Most violated interior cumulative bound.
    let slack = 1e-12 * (1.0 + to.abs());
    let mut worst: Option<(usize, Pin, f64)> = None;
    let mut s = from;
    for j in start..end - 1 {
        s += sol.m[j];
        let (v, pin) = if s > ladder.hi[j] {
            (s - ladder.hi[j], Pin::Upper)
        } else {
            (ladder.lo[j] - s, Pin::Lower)
        };
        if v > slack && worst.map_or(true, |(_, _, w)| v > w) {
            worst = Some((j, pin, v));
        }
    }
    match worst {
        None => {
            sol.omega[start..end].fill(omega);
            leaves.push(Leaf { start, end });
            Ok(())
        }
        Some((j, pin, _)) => {
            let at = match pin {
                Pin::Upper => ladder.hi[j],
                Pin::Lower => ladder.lo[j],
            };
            sol.pins[j] = Some(pin);
            segment(c, ladder, start, j + 1, from, at, sol, leaves)?;
            segment(c, ladder, j + 1, end, at, to, sol, leaves)
        }
    }
}

/// Finds a level whose clipped responses on `start..end` sum to `budget`
/// and writes them into `out`.
fn level_search<C: Coordinates>(
    c: &C,
    start: usize,
    end: usize,
    budget: f64,
    tol: f64,
    out: &mut [f64],
) -> Result<f64> {
    let idx = start..end;
    let sum_lower: f64 = idx.clone().map(|k| c.lower(k)).sum();
    let sum_upper: f64 = idx.clone().map(|k| c.upper(k)).sum();
    let slack = 1e-9 * (1.0 + budget.abs());
    if budget < sum_lower - slack || budget > sum_upper + slack {
        return Err(Error::Infeasible(format!(
            "packets {start}..{end} need a total blocklength in [{sum_lower}, {sum_upper}], got {budget}"
        )));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in idx.clone() {
        let (a, b) = c.level_range(k);
        lo = lo.min(a);
        hi = hi.max(b);
    }
    if budget <= sum_lower {
        for (o, k) in out.iter_mut().zip(idx) {
            *o = c.lower(k);
        }
        return Ok(lo);
    }
    if budget >= sum_upper {
        for (o, k) in out.iter_mut().zip(idx) {
            *o = c.upper(k);
        }
        return Ok(hi);
    }

    let mut r_lo: Vec<f64> = idx.clone().map(|k| c.lower(k)).collect();
    let mut r_hi: Vec<f64> = idx.clone().map(|k| c.upper(k)).collect();
    let mut s_lo = sum_lower;
    let mut s_hi = sum_upper;
    let mut r_mid = vec![0.0; end - start];
    // Illinois false position on the level, bisecting whenever two steps
    // in a row fail to halve the bracket.
    let (mut f_lo, mut f_hi) = (s_lo - budget, s_hi - budget);
    let mut last_side = 0i8;
    let mut widths = [hi - lo; 2];
    for _ in 0..200 {
        if s_hi - s_lo <= tol {
            break;
        }
        let width = hi - lo;
        let stalled = width > 0.5 * widths[0];
        widths = [widths[1], width];
        let secant = lo - f_lo * (hi - lo) / (f_hi - f_lo);
        let mid = if !stalled && secant > lo && secant < hi {
            secant
        } else {
            widths = [width; 2];
            0.5 * (lo + hi)
        };
        if mid <= lo || mid >= hi {
            break;
        }
        for (r, k) in r_mid.iter_mut().zip(idx.clone()) {
            *r = c.response(k, mid);
        }
        let s: f64 = r_mid.iter().sum();
        if s < budget {
            lo = mid;
            s_lo = s;
            f_lo = s - budget;
            r_lo.copy_from_slice(&r_mid);
            if last_side == -1 {
                f_hi *= 0.5;
            }
            last_side = -1;
        } else {
            hi = mid;
            s_hi = s;
            f_hi = s - budget;
            r_hi.copy_from_slice(&r_mid);
            if last_side == 1 {
                f_lo *= 0.5;
            }
            last_side = 1;
        }
    }

    // Interpolate inside the final bracket so the sum is met exactly.
    let theta = if s_hi > s_lo {
        ((budget - s_lo) / (s_hi - s_lo)).clamp(0.0, 1.0)
    } else {
        0.5
    };
    for (i, k) in idx.enumerate() {
        let v = r_lo[i] + theta * (r_hi[i] - r_lo[i]);
        out[i] = v.clamp(c.lower(k), c.upper(k));
    }
    let residual = budget - out.iter().sum::<f64>();
    spread(c, start, out, residual);
    Ok(lo + theta * (hi - lo))
}

/// Pushes a leftover `residual` onto coordinates with room to move.
fn spread<C: Coordinates>(c: &C, start: usize, out: &mut [f64], mut residual: f64) {
    for _ in 0..out.len() {
        if residual == 0.0 {
            return;
        }
        for (i, v) in out.iter_mut().enumerate() {
            let k = start + i;
            let next = (*v + residual).clamp(c.lower(k), c.upper(k));
            residual -= next - *v;
            *v = next;
            if residual == 0.0 {
                return;
            }
        }
    }
}

/// Leaves whose coordinates all sit on a box face have an interval of
/// valid levels. Choose values in those intervals that respect the sign
/// each pin imposes on the level jump.
fn reconcile_levels<C: Coordinates>(c: &C, sol: &mut LadderSolution, leaves: &[Leaf]) {
    let n_leaves = leaves.len();
    if n_leaves == 0 {
        return;
    }
    let mut intervals = Vec::with_capacity(n_leaves);
    for leaf in leaves {
        let w = sol.omega[leaf.start];
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        let mut interior = false;
        for k in leaf.start..leaf.end {
            let (l, u) = (c.lower(k), c.upper(k));
            let m = sol.m[k];
            let eps = 1e-9 * (1.0 + u.abs());
            if u - l <= eps {
                continue;
            }
            let (el, eu) = c.level_range(k);
            if m <= l + eps {
                hi = hi.min(el);
            } else if m >= u - eps {
                lo = lo.max(eu);
            } else {
                interior = true;
            }
        }
        if interior || lo > hi {
            intervals.push((w, w, w));
        } else {
            let pref = if lo.is_finite() && hi.is_finite() {
                w.clamp(lo, hi)
            } else if lo.is_finite() {
                lo
            } else if hi.is_finite() {
                hi
            } else {
                w
            };
            intervals.push((lo, hi, pref));
        }
    }
    // Leaves are produced left to right; the pin between leaf i and i+1
    // sits at the last coordinate of leaf i.
    let relation = |i: usize| sol.pins[leaves[i].end - 1];
    let mut feasible = intervals.clone();
    for i in 1..n_leaves {
        let (plo, phi, _) = feasible[i - 1];
        let (lo, hi, pref) = feasible[i];
        let (lo, hi) = match relation(i - 1) {
            Some(Pin::Upper) => (lo.max(plo), hi),
            Some(Pin::Lower) => (lo, hi.min(phi)),
            None => (lo, hi),
        };
        if lo > hi {
            return;
        }
        feasible[i] = (lo, hi, pref);
    }
    let mut chosen = vec![0.0; n_leaves];
    for i in (0..n_leaves).rev() {
        let (mut lo, mut hi, pref) = feasible[i];
        if i + 1 < n_leaves {
            match relation(i) {
                Some(Pin::Upper) => hi = hi.min(chosen[i + 1]),
                Some(Pin::Lower) => lo = lo.max(chosen[i + 1]),
                None => {}
            }
        }
        if lo > hi {
            return;
        }
        chosen[i] = pref.clamp(lo, hi);
    }
    for (leaf, w) in leaves.iter().zip(chosen) {
        sol.omega[leaf.start..leaf.end].fill(w);
    }
}
