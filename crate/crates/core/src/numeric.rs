//! Summation, refinement bookkeeping and the divergence heuristic shared by
//! the variation, integration and cover estimators.

use std::num::NonZeroUsize;
use std::thread;

use serde::Serialize;

/// Leaf size of the pairwise summation tree.
const PAIRWISE_LEAF: usize = 8;

/// Pairwise (cascade) summation with a tree fixed by index, so the result
/// does not depend on how the caller produced the slice.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Applies `f` to every item on a pool of scoped threads and returns results
/// in input order. Output is independent of scheduling.
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = thread::available_parallelism()
        .map(NonZeroUsize::get)
        .unwrap_or(1)
        .min(16);
    if workers <= 1 || items.len() < 64 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(workers);
    let f = &f;
    thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(f).collect::<Vec<R>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker thread panicked"))
            .collect()
    })
}

/// Outcome of a refinement sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    Diverging,
    Infinite,
    Inconclusive,
}

/// A monotone refinement estimate together with its trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementEstimate {
    pub value: f64,
    pub status: Status,
    /// `(level, estimate)` for every computed level.
    pub trace: Vec<(u32, f64)>,
    pub tolerance_used: f64,
    /// First level from which every later pair of consecutive levels agrees
    /// within tolerance.
    pub converged_level: Option<u32>,
}

impl RefinementEstimate {
    /// Whether the last two levels agree within `tol` (relative, floored at 1).
    pub fn is_settled(&self, tol: f64) -> bool {
        match self.trace.as_slice() {
            [.., (_, p), (_, q)] => agree(*p, *q, tol),
            [_] => true,
            [] => false,
        }
    }
}

/// `|p − q| ≤ tol · max(1, |q|)`.
pub fn agree(p: f64, q: f64, tol: f64) -> bool {
    (p - q).abs() <= tol * q.abs().max(1.0)
}

/// Increment ratios of a 3-term moving mean of successive increments.
fn smoothed_ratios(values: &[f64]) -> Option<Vec<f64>> {
    let inc: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    if inc.len() < 3 {
        return None;
    }
    let smooth: Vec<f64> = inc.windows(3).map(|w| (w[0] + w[1] + w[2]) / 3.0).collect();
    if smooth.len() < 4 || smooth[smooth.len() - 4..].iter().any(|&s| s <= 0.0) {
        return None;
    }
    Some(smooth.windows(2).map(|w| w[1] / w[0]).collect())
}

/// The divergence rule: the last three ratios of (smoothed) successive
/// increments are all at least `0.9`, so the sequence keeps growing without
/// slowing down.
pub fn grows_without_slowing(values: &[f64]) -> bool {
    const RATIO: f64 = 0.9;
    if values.iter().any(|v| !v.is_finite()) {
        return false;
    }
    match smoothed_ratios(values) {
        Some(r) if r.len() >= 3 => r[r.len() - 3..].iter().all(|&q| q >= RATIO),
        _ => false,
    }
}

/// Three consecutive relative growths of at least 10%.
pub fn grows_ten_percent_thrice(values: &[f64]) -> bool {
    let mut run = 0;
    for w in values.windows(2) {
        if w[0] > 0.0 && w[1] >= 1.1 * w[0] {
            run += 1;
            if run >= 3 {
                return true;
            }
        } else {
            run = 0;
        }
    }
    false
}

/// First index `k ≥ 1` such that every consecutive pair from `k` on agrees.
pub fn first_settled_level(values: &[f64], tol: f64) -> Option<usize> {
    if values.len() < 2 {
        return None;
    }
    let mut first = None;
    for k in 1..values.len() {
        if agree(values[k - 1], values[k], tol) {
            first.get_or_insert(k);
        } else {
            first = None;
        }
    }
    first
}

/// Radical-inverse (van der Corput) value of `i` in `base`.
pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut value, mut scale) = (0.0, inv);
    while i > 0 {
        value += (i % base) as f64 * scale;
        i /= base;
        scale *= inv;
    }
    value
}

/// Uniform grid of `cells + 1` nodes on `[a, b]`; node `i` is
/// `a + (b − a)·(i / cells)`, so dyadic grids are nested bit-exactly.
pub fn uniform_grid(a: f64, b: f64, cells: usize) -> Vec<f64> {
    let n = cells.max(1);
    (0..=n)
        .map(|i| {
            if i == n {
                b
            } else {
                a + (b - a) * (i as f64 / n as f64)
            }
        })
        .collect()
}

/// Sorted union of two sorted knot lists without duplicates.
pub fn merge_sorted(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len() + ys.len());
    let (mut i, mut j) = (0, 0);
    while i < xs.len() || j < ys.len() {
        let next = match (xs.get(i), ys.get(j)) {
            (Some(&x), Some(&y)) if x <= y => {
                i += 1;
                if x == y {
                    j += 1;
                }
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        if out.last() != Some(&next) {
            out.push(next);
        }
    }
    out
}
