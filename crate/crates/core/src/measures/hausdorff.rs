use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::IntervalUnion;
use crate::metric::Point;
use crate::numeric::{pairwise_sum, par_map, Status};
use crate::path::Path;

/// Sampling and budget settings for the cover estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverOptions {
    /// Points per subinterval used for its image diameter.
    pub samples: usize,
    /// Piece budget; exceeding it reports `Infinite`.
    pub max_pieces: usize,
}

impl Default for CoverOptions {
    fn default() -> Self {
        CoverOptions {
            samples: 33,
            max_pieces: 1 << 17,
        }
    }
}

/// `H¹_δ` proxies over a decreasing δ schedule.
///
/// Sampled diameters under-estimate true ones, so `upper` is a desk-scale
/// proxy for `H¹`, not a certified upper bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverEstimate {
    pub delta: f64,
    pub upper: f64,
    pub trace: Vec<(f64, f64)>,
    pub status: Status,
    pub pieces: usize,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    lo: f64,
    hi: f64,
    diam: f64,
}

fn sample_points(path: &Path, lo: f64, hi: f64, n: usize) -> Result<Vec<Point>> {
    (0..n)
        .map(|i| {
            let t = if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * (i as f64 / (n - 1) as f64)
            };
            path.evaluate(t)
        })
        .collect()
}

fn max_pairwise(path: &Path, pts: &[Point]) -> Result<f64> {
    let mut best = 0.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            best = best.max(path.space().distance(&pts[i], &pts[j])?);
        }
    }
    Ok(best)
}

fn piece(path: &Path, lo: f64, hi: f64, n: usize) -> Result<Piece> {
    let diam = max_pairwise(path, &sample_points(path, lo, hi, n)?)?;
    Ok(Piece { lo, hi, diam })
}

/// `D·{1e-1, 1e-2, 1e-3}` with `D` the sampled diameter of `f(E)`, or 1 when
/// the image is a single point.
pub fn default_delta_schedule(path: &Path, e: &IntervalUnion) -> Result<Vec<f64>> {
    let mut pts = Vec::new();
    for &(lo, hi) in e.components() {
        pts.extend(sample_points(path, lo, hi, 33)?);
    }
    let d = max_pairwise(path, &pts)?;
    let d = if d > 0.0 { d } else { 1.0 };
    Ok(vec![d * 1e-1, d * 1e-2, d * 1e-3])
}

/// Hausdorff length of `f(E)` from δ-fine covers by images of parameter
/// subintervals.
///
/// Overlapping piece images are not merged, so for a path that revisits
/// points this is the length counted with multiplicity, an upper bound for
/// the length of the image.
///
/// Each subinterval is bisected until its sampled image diameter drops below
/// δ; the diameters are then summed. Pieces carry over from one δ to the
/// next. The estimate for the last δ is returned.
pub fn hausdorff_length(path: &Path, e: &IntervalUnion, schedule: &[f64]) -> Result<CoverEstimate> {
    hausdorff_length_with(path, e, schedule, &CoverOptions::default())
}

pub fn hausdorff_length_with(
    path: &Path,
    e: &IntervalUnion,
    schedule: &[f64],
    opts: &CoverOptions,
) -> Result<CoverEstimate> {
    e.check_inside(path.domain())?;
    if schedule.len() < 3 {
        return Err(Error::InvalidParameter(
            "delta schedule needs at least 3 entries".into(),
        ));
    }
    if schedule.iter().any(|d| !(*d > 0.0 && d.is_finite()))
        || schedule.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidParameter(
            "delta schedule must be positive and strictly decreasing".into(),
        ));
    }
    if opts.samples < 2 {
        return Err(Error::InvalidParameter(
            "need at least 2 samples per piece".into(),
        ));
    }
    let min_len = 1e-14 * path.domain().len().max(1.0);
    let mut pieces = e
        .components()
        .iter()
        .map(|&(lo, hi)| piece(path, lo, hi, opts.samples))
        .collect::<Result<Vec<_>>>()?;
    let mut trace = Vec::with_capacity(schedule.len());
    for &delta in schedule {
        loop {
            if !pieces.iter().any(|p| p.diam >= delta) {
                break;
            }
            if pieces.len() > opts.max_pieces
                || pieces
                    .iter()
                    .any(|p| p.diam >= delta && p.hi - p.lo <= min_len)
            {
                return Ok(infinite(delta, trace, pieces.len()));
            }
            let mut jobs = Vec::new();
            let mut next = Vec::with_capacity(pieces.len() * 2);
            for p in &pieces {
                if p.diam >= delta {
                    let mid = p.lo + 0.5 * (p.hi - p.lo);
                    jobs.push((p.lo, mid));
                    jobs.push((mid, p.hi));
                    next.push(None);
                    next.push(None);
                } else {
                    next.push(Some(*p));
                }
            }
            let mut children = par_map(&jobs, |&(lo, hi)| piece(path, lo, hi, opts.samples))
                .into_iter()
                .collect::<Result<Vec<_>>>()?
                .into_iter();
            pieces = next
                .into_iter()
                .map(|slot| slot.unwrap_or_else(|| children.next().expect("one child per slot")))
                .collect();
        }
        let diams: Vec<f64> = pieces.iter().map(|p| p.diam).collect();
        trace.push((delta, pairwise_sum(&diams)));
    }
    let (delta, upper) = *trace.last().expect("schedule is nonempty");
    Ok(CoverEstimate {
        delta,
        upper,
        trace,
        status: Status::Converged,
        pieces: pieces.len(),
    })
}

fn infinite(delta: f64, trace: Vec<(f64, f64)>, pieces: usize) -> CoverEstimate {
    CoverEstimate {
        delta,
        upper: f64::INFINITY,
        trace,
        status: Status::Infinite,
        pieces,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{snowflake, MetricSpace};
    use std::f64::consts::PI;

    fn line(f: impl Fn(f64) -> f64 + Send + Sync + 'static, a: f64, b: f64) -> Path {
        Path::new(a, b, MetricSpace::euclidean(1), move |t| {
            Point::scalar(f(t))
        })
        .unwrap()
    }

    #[test]
    fn constant_image_has_zero_length() {
        let p = line(|_| 3.0, 0.0, 1.0);
        let e = IntervalUnion::single(0.0, 1.0).unwrap();
        let sched = default_delta_schedule(&p, &e).unwrap();
        assert_eq!(hausdorff_length(&p, &e, &sched).unwrap().upper, 0.0);
    }

    #[test]
    fn segment_length() {
        let p = line(|t| t, 0.0, 2.0);
        let e = IntervalUnion::single(0.0, 2.0).unwrap();
        let est = hausdorff_length(&p, &e, &default_delta_schedule(&p, &e).unwrap()).unwrap();
        assert!((est.upper - 2.0).abs() < 1e-6);
        assert_eq!(est.status, Status::Converged);
        assert_eq!(est.trace.len(), 3);
    }

    #[test]
    fn circle_length() {
        let p = Path::new(0.0, 2.0 * PI, MetricSpace::euclidean(2), |t| {
            Point::new(vec![t.cos(), t.sin()])
        })
        .unwrap();
        let e = IntervalUnion::single(0.0, 2.0 * PI).unwrap();
        let est = hausdorff_length(&p, &e, &default_delta_schedule(&p, &e).unwrap()).unwrap();
        assert!((est.upper - 2.0 * PI).abs() < 1e-3 * 2.0 * PI);
        for w in est.trace.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-12);
        }
    }

    #[test]
    fn snowflake_is_infinite() {
        let p = Path::new(
            0.0,
            1.0,
            snowflake(&MetricSpace::euclidean(1), 0.5).unwrap(),
            Point::scalar,
        )
        .unwrap();
        let e = IntervalUnion::single(0.0, 1.0).unwrap();
        let est = hausdorff_length(&p, &e, &[1e-1, 1e-2, 1e-3]).unwrap();
        assert_eq!(est.status, Status::Infinite);
    }

    #[test]
    fn schedule_validation() {
        let p = line(|t| t, 0.0, 1.0);
        let e = IntervalUnion::single(0.0, 1.0).unwrap();
        assert!(hausdorff_length(&p, &e, &[0.1, 0.01]).is_err());
        assert!(hausdorff_length(&p, &e, &[0.1, 0.2, 0.01]).is_err());
        let outside = IntervalUnion::single(0.0, 2.0).unwrap();
        assert!(hausdorff_length(&p, &outside, &[0.1, 0.01, 0.001]).is_err());
    }
}
