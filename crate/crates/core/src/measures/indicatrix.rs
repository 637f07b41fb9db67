use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::IntervalUnion;
use crate::metric::Point;
use crate::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatrixSample {
    pub y: Point,
    pub radius: f64,
    pub count: usize,
}

/// Number of maximal runs of grid parameters in `E` whose images lie within
/// `radius` of `y`. Preimages closer than `grid_step` merge into one run.
pub fn banach_indicatrix(
    path: &Path,
    e: &IntervalUnion,
    y: &Point,
    radius: f64,
    grid_step: f64,
) -> Result<IndicatrixSample> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "radius {radius} must be positive"
        )));
    }
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "grid step {grid_step} must be positive"
        )));
    }
    e.check_inside(path.domain())?;
    let mut count = 0;
    for &(lo, hi) in e.components() {
        let n = ((hi - lo) / grid_step).ceil().max(0.0) as usize;
        let mut inside_prev = false;
        for i in 0..=n {
            let t = if i == n {
                hi
            } else {
                lo + i as f64 * grid_step
            };
            let inside = path.space().distance(&path.evaluate(t)?, y)? <= radius;
            if inside && !inside_prev {
                count += 1;
            }
            inside_prev = inside;
        }
    }
    Ok(IndicatrixSample {
        y: y.clone(),
        radius,
        count,
    })
}
