//! Partition sums, total variation and the variation function.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{
    first_settled_level, grows_without_slowing, merge_sorted, pairwise_sum, uniform_grid,
    RefinementEstimate, Status,
};
use crate::path::{Path, Smoothness};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_LEVEL: u32 = 14;

/// Strictly increasing knots `x₀ < … < x_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    knots: Vec<f64>,
}

impl Partition {
    pub fn new(knots: Vec<f64>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidPartition("no knots".into()));
        }
        if let Some(i) = knots.iter().position(|t| !t.is_finite()) {
            return Err(Error::InvalidPartition(format!("knot {i} is not finite")));
        }
        if let Some(i) = knots.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPartition(format!(
                "knots {} and {} are not strictly increasing",
                i,
                i + 1
            )));
        }
        Ok(Partition { knots })
    }

    /// `n` equal cells on `[a, b]`; a degenerate interval gives the single knot `a`.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if a == b {
            return Partition::new(vec![a]);
        }
        Partition::new(uniform_grid(a, b, n))
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// The common refinement of two partitions.
    pub fn refine(&self, other: &Partition) -> Partition {
        Partition {
            knots: merge_sorted(&self.knots, &other.knots),
        }
    }
}

/// Evaluates the path at every knot and returns the chord lengths.
fn chords(path: &Path, knots: &[f64]) -> Result<Vec<f64>> {
    let points = knots
        .iter()
        .map(|&t| path.evaluate(t))
        .collect::<Result<Vec<_>>>()?;
    points
        .windows(2)
        .map(|w| path.space().distance(&w[0], &w[1]))
        .collect()
}

/// `Σ ρ(f(xᵢ), f(xᵢ₊₁))` over the knots of `partition`.
pub fn partition_sum(path: &Path, partition: &Partition) -> Result<f64> {
    Ok(pairwise_sum(&chords(path, partition.knots())?))
}

/// Knots of dyadic level `k`: the uniform `2^k` grid, the path's breakpoints
/// and any `extra` knots.
fn level_knots(path: &Path, k: u32, extra: &[f64]) -> Vec<f64> {
    let base = uniform_grid(path.a(), path.b(), 1usize << k);
    merge_sorted(&merge_sorted(&base, path.breakpoints()), extra)
}

fn summarize(values: Vec<f64>, tol: f64) -> RefinementEstimate {
    let trace: Vec<(u32, f64)> = values
        .iter()
        .enumerate()
        .map(|(k, &v)| (k as u32, v))
        .collect();
    let value = *values.last().unwrap_or(&0.0);
    let status = if values.iter().any(|v| v.is_infinite()) {
        Status::Infinite
    } else if values.len() >= 2 && crate::numeric::agree(values[values.len() - 2], value, tol) {
        Status::Converged
    } else if grows_without_slowing(&values) {
        Status::Diverging
    } else {
        Status::Inconclusive
    };
    let converged_level = match status {
        Status::Converged => first_settled_level(&values, tol).map(|k| k as u32),
        _ => None,
    };
    RefinementEstimate {
        value: if status == Status::Infinite {
            f64::INFINITY
        } else {
            value
        },
        status,
        trace,
        tolerance_used: tol,
        converged_level,
    }
}

fn check_tol(tol: f64, max_level: u32) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tolerance {tol} must be positive"
        )));
    }
    if !(3..=24).contains(&max_level) {
        return Err(Error::InvalidParameter(format!(
            "max_level {max_level} must lie in 3..=24"
        )));
    }
    Ok(())
}

/// Total variation by nested dyadic refinement, levels `0..=max_level`.
///
/// Every level is a refinement of the previous one, so the trace is
/// nondecreasing and every estimate is a lower bound for the variation.
pub fn variation(path: &Path, tol: f64, max_level: u32) -> Result<RefinementEstimate> {
    check_tol(tol, max_level)?;
    if path.domain().is_degenerate() {
        return Ok(RefinementEstimate {
            value: 0.0,
            status: Status::Converged,
            trace: vec![(0, 0.0)],
            tolerance_used: tol,
            converged_level: Some(0),
        });
    }
    if path.hint() == Smoothness::PiecewiseLinear {
        // Every level refines the knot partition by collinear points, so each
        // level sum equals the knot sum exactly.
        let mut knots = vec![path.a()];
        knots.extend_from_slice(path.breakpoints());
        knots.push(path.b());
        let v = pairwise_sum(&chords(path, &knots)?);
        return Ok(summarize(vec![v; max_level as usize + 1], tol));
    }
    let values = (0..=max_level)
        .map(|k| Ok(pairwise_sum(&chords(path, &level_knots(path, k, &[]))?)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(summarize(values, tol))
}

/// `v_f(t) = ⋁ₐᵗ f` on a grid, together with the refinement estimate of the
/// full variation computed on the same partitions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationProfile {
    pub points: Vec<(f64, f64)>,
    pub total: RefinementEstimate,
    /// Set when the total variation is diverging; the values are then
    /// meaningless lower bounds.
    pub unbounded: bool,
}

/// The variation function on `grid` at the default maximum level.
pub fn variation_function(path: &Path, grid: &[f64], tol: f64) -> Result<VariationProfile> {
    variation_function_with(path, grid, tol, DEFAULT_MAX_LEVEL)
}

/// The variation function on `grid`; partitions at every level contain the
/// grid, so values at the finest level are exactly additive.
pub fn variation_function_with(
    path: &Path,
    grid: &[f64],
    tol: f64,
    max_level: u32,
) -> Result<VariationProfile> {
    check_tol(tol, max_level)?;
    if let Some(i) = grid.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::UnorderedGrid { index: i + 1 });
    }
    let grid = grid
        .iter()
        .map(|&t| path.domain().clamp(t))
        .collect::<Result<Vec<f64>>>()?;
    if path.domain().is_degenerate() {
        return Ok(VariationProfile {
            points: grid.iter().map(|&t| (t, 0.0)).collect(),
            total: summarize(vec![0.0, 0.0], tol),
            unbounded: false,
        });
    }
    let mut totals = Vec::with_capacity(max_level as usize + 1);
    let mut finest = Vec::new();
    for k in 0..=max_level {
        let knots = level_knots(path, k, &grid);
        let lengths = chords(path, &knots)?;
        totals.push(pairwise_sum(&lengths));
        if k == max_level {
            finest = cumulative_at(&knots, &lengths, &grid);
        }
    }
    let total = summarize(totals, tol);
    let unbounded = total.status == Status::Diverging;
    Ok(VariationProfile {
        points: grid.into_iter().zip(finest).collect(),
        total,
        unbounded,
    })
}

/// Partial chord sums from the first knot up to each grid value. Grid values
/// are knots, so each lookup is exact. Sums run over fixed index blocks
/// between consecutive grid points, then accumulate.
fn cumulative_at(knots: &[f64], lengths: &[f64], grid: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let (mut acc, mut from) = (0.0, 0usize);
    for &t in grid {
        let idx = knots.partition_point(|&k| k < t);
        acc += pairwise_sum(&lengths[from..idx]);
        from = idx;
        out.push(acc);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", content = "value", rename_all = "snake_case")]
pub enum BvVerdict {
    Bv(f64),
    NotBv,
    Inconclusive,
}

/// Bounded-variation verdict; `NotBv` only on a diverging trace.
pub fn is_bounded_variation(path: &Path, tol: f64, max_level: u32) -> Result<BvVerdict> {
    let est = variation(path, tol, max_level)?;
    Ok(match est.status {
        Status::Converged => BvVerdict::Bv(est.value),
        Status::Diverging | Status::Infinite => BvVerdict::NotBv,
        Status::Inconclusive => BvVerdict::Inconclusive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{MetricSpace, Point};
    use std::f64::consts::PI;

    fn circle(a: f64, b: f64) -> Path {
        Path::new(a, b, MetricSpace::euclidean(2), |t| {
            Point::new(vec![t.cos(), t.sin()])
        })
        .unwrap()
    }

    fn segment() -> Path {
        Path::new(0.0, 2.0, MetricSpace::euclidean(2), |t| {
            Point::new(vec![t, 0.0])
        })
        .unwrap()
    }

    #[test]
    fn trivial_partition_is_endpoint_distance() {
        let p = circle(0.0, 2.0);
        let d = Partition::new(vec![0.0, 2.0]).unwrap();
        assert_eq!(partition_sum(&p, &d).unwrap(), p.gap(0.0, 2.0).unwrap());
    }

    #[test]
    fn circle_chords() {
        let p = circle(0.0, PI);
        let d = Partition::uniform(0.0, PI, 3).unwrap();
        assert!((partition_sum(&p, &d).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn bad_partitions() {
        assert!(Partition::new(vec![0.0, 0.0]).is_err());
        assert!(Partition::new(vec![1.0, 0.5]).is_err());
        let d = Partition::new(vec![0.0, 3.0]).unwrap();
        assert!(matches!(
            partition_sum(&segment(), &d),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn segment_converges_at_level_one() {
        let est = variation(&segment(), 1e-6, 14).unwrap();
        assert_eq!(est.status, Status::Converged);
        assert_eq!(est.converged_level, Some(1));
        assert!((est.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn circle_variation() {
        let est = variation(&circle(0.0, 2.0 * PI), 1e-6, 14).unwrap();
        assert_eq!(est.status, Status::Converged);
        assert!((est.value - 2.0 * PI).abs() < 1e-6);
        for w in est.trace.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-12);
        }
    }

    #[test]
    fn degenerate_domain() {
        let est = variation(&circle(1.0, 1.0), 1e-6, 5).unwrap();
        assert_eq!((est.value, est.status), (0.0, Status::Converged));
    }

    #[test]
    fn variation_function_of_unit_segment() {
        let grid: Vec<f64> = (0..=8).map(|i| i as f64 * 0.25).collect();
        let prof = variation_function(&segment(), &grid, 1e-6).unwrap();
        for (t, v) in prof.points {
            assert!((v - t).abs() < 1e-12);
        }
        assert!(!prof.unbounded);
    }

    #[test]
    fn unordered_grid_rejected() {
        assert!(matches!(
            variation_function(&segment(), &[0.0, 1.0, 0.5], 1e-6),
            Err(Error::UnorderedGrid { index: 2 })
        ));
    }

    #[test]
    fn bv_verdicts() {
        match is_bounded_variation(&circle(0.0, 2.0 * PI), 1e-6, 14).unwrap() {
            BvVerdict::Bv(v) => assert!((v - 2.0 * PI).abs() < 1e-6),
            other => panic!("{other:?}"),
        }
        assert!(check_tol(0.0, 5).is_err());
        assert!(check_tol(1e-3, 2).is_err());
    }
}
