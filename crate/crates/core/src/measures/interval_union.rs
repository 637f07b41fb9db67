use serde::Serialize;

use crate::error::{Error, Result};
use crate::path::Interval;

/// Finite union of disjoint closed intervals, sorted by left endpoint.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct IntervalUnion {
    components: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        IntervalUnion::default()
    }

    pub fn single(lo: f64, hi: f64) -> Result<Self> {
        IntervalUnion::new(vec![(lo, hi)])
    }

    /// Validates disjointness; components may be given in any order.
    pub fn new(mut components: Vec<(f64, f64)>) -> Result<Self> {
        for &(lo, hi) in &components {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::InvalidIntervalUnion(format!(
                    "bad component [{lo}, {hi}]"
                )));
            }
        }
        components.sort_by(|x, y| x.0.total_cmp(&y.0));
        if let Some(w) = components.windows(2).find(|w| w[1].0 <= w[0].1) {
            return Err(Error::InvalidIntervalUnion(format!(
                "components [{}, {}] and [{}, {}] overlap",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
        Ok(IntervalUnion { components })
    }

    /// Union of possibly overlapping intervals, merged into components.
    pub fn merged(mut pieces: Vec<(f64, f64)>) -> Result<Self> {
        pieces.retain(|&(lo, hi)| lo <= hi);
        pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(pieces.len());
        for (lo, hi) in pieces {
            match out.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        IntervalUnion::new(out)
    }

    pub fn components(&self) -> &[(f64, f64)] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    /// Errors unless every component lies inside `domain`.
    pub fn check_inside(&self, domain: Interval) -> Result<()> {
        match self
            .components
            .iter()
            .find(|&&(lo, hi)| lo < domain.lo || hi > domain.hi)
        {
            Some(&(lo, hi)) => Err(Error::InvalidIntervalUnion(format!(
                "component [{lo}, {hi}] leaves the domain [{}, {}]",
                domain.lo, domain.hi
            ))),
            None => Ok(()),
        }
    }

    /// Union with a disjoint union.
    pub fn union_disjoint(&self, other: &IntervalUnion) -> Result<IntervalUnion> {
        let mut all = self.components.clone();
        all.extend_from_slice(&other.components);
        IntervalUnion::new(all)
    }
}

/// Lebesgue measure of the union: the sum of component lengths.
pub fn outer_measure(e: &IntervalUnion) -> f64 {
    e.components.iter().map(|(lo, hi)| hi - lo).sum()
}
