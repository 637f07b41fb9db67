//! Trapezoid integration of nonnegative grid data with a non-integrability
//! verdict, and an improper integrator that grades the grid geometrically
//! towards singular points.

use serde::Serialize;

use crate::derivative::{metric_derivative, MdEstimate, MdStatus, StepSchedule};
use crate::error::{Error, Result};
use crate::numeric::{
    agree, grows_ten_percent_thrice, grows_without_slowing, merge_sorted, pairwise_sum, par_map,
    uniform_grid,
};
use crate::path::Path;

/// Relative agreement between the two finest decimation levels.
pub const INTEGRABLE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrability {
    Integrable,
    NonIntegrable,
    Inconclusive,
}

impl Integrability {
    pub fn as_str(self) -> &'static str {
        match self {
            Integrability::Integrable => "integrable",
            Integrability::NonIntegrable => "non_integrable",
            Integrability::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralEstimate {
    /// Trapezoid sum over all cells with two finite endpoint values.
    pub value: f64,
    pub flag: Integrability,
    /// Sums over index decimations by 2, coarsest first.
    pub refinement_trace: Vec<f64>,
    /// `(r, sum over cells at distance ≥ r from every center)` for halving
    /// radii; this is the sequence of partial integrals that excise shrinking
    /// neighbourhoods of the singular points.
    pub shell_trace: Vec<(f64, f64)>,
}

fn validate(values: &[(f64, f64)]) -> Result<()> {
    if values.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two grid values".into(),
        ));
    }
    if let Some(i) = values.iter().position(|(t, _)| !t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "grid node {i} is not finite"
        )));
    }
    if let Some(i) = values.windows(2).position(|w| w[0].0 >= w[1].0) {
        return Err(Error::UnorderedGrid { index: i + 1 });
    }
    if let Some(&(t, v)) = values.iter().find(|(_, v)| *v < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "negative integrand {v} at {t}"
        )));
    }
    Ok(())
}

fn cell_area(p: (f64, f64), q: (f64, f64)) -> Option<f64> {
    (p.1.is_finite() && q.1.is_finite()).then(|| 0.5 * (q.0 - p.0) * (p.1 + q.1))
}

/// Trapezoid sum over the nodes `0, s, 2s, …` plus the last node; also
/// reports whether some cell has `+∞` at both ends.
fn decimated(values: &[(f64, f64)], s: usize) -> (f64, bool) {
    let n = values.len() - 1;
    let mut idx: Vec<usize> = (0..=n).step_by(s).collect();
    if *idx.last().unwrap() != n {
        idx.push(n);
    }
    let mut areas = Vec::with_capacity(idx.len());
    let mut infinite_cell = false;
    for w in idx.windows(2) {
        let (p, q) = (values[w[0]], values[w[1]]);
        match cell_area(p, q) {
            Some(a) => areas.push(a),
            None => infinite_cell |= p.1 == f64::INFINITY && q.1 == f64::INFINITY,
        }
    }
    (pairwise_sum(&areas), infinite_cell)
}

/// Trapezoid integral of nonnegative `(t, v)` data.
///
/// Shells are centred at both grid ends and at every node with a non-finite
/// value.
pub fn integrate_grid(values: &[(f64, f64)]) -> Result<IntegralEstimate> {
    integrate_grid_around(values, &[])
}

/// As [`integrate_grid`], with extra shell centers.
pub fn integrate_grid_around(values: &[(f64, f64)], centers: &[f64]) -> Result<IntegralEstimate> {
    validate(values)?;
    let n = values.len() - 1;

    let mut refinement_trace = Vec::new();
    let mut persistent_infinite = true;
    let mut s = 1usize;
    while n / s >= 2 || s == 1 {
        let (sum, inf) = decimated(values, s);
        refinement_trace.push(sum);
        persistent_infinite &= inf;
        s *= 2;
    }
    refinement_trace.reverse();
    let value = *refinement_trace.last().unwrap();

    let mut c: Vec<f64> = centers.to_vec();
    c.push(values[0].0);
    c.push(values[n].0);
    c.extend(
        values
            .iter()
            .filter(|(_, v)| !v.is_finite())
            .map(|(t, _)| *t),
    );
    c.sort_by(f64::total_cmp);
    c.dedup();
    let shell_trace = shells(values, &c);

    let shell_sums: Vec<f64> = shell_trace.iter().map(|s| s.1).collect();
    let flag = if persistent_infinite
        || grows_without_slowing(&shell_sums)
        || grows_ten_percent_thrice(&refinement_trace)
    {
        Integrability::NonIntegrable
    } else if refinement_trace.len() < 2
        || agree(
            refinement_trace[refinement_trace.len() - 2],
            value,
            INTEGRABLE_TOL,
        )
    {
        Integrability::Integrable
    } else {
        Integrability::Inconclusive
    };
    Ok(IntegralEstimate {
        value,
        flag,
        refinement_trace,
        shell_trace,
    })
}

/// Partial integrals over cells at distance at least `r` from every center,
/// for `r = L, L/2, …` until no further cell can enter.
fn shells(values: &[(f64, f64)], centers: &[f64]) -> Vec<(f64, f64)> {
    let mut cells = Vec::with_capacity(values.len());
    for w in values.windows(2) {
        let Some(area) = cell_area(w[0], w[1]) else {
            continue;
        };
        let (lo, hi) = (w[0].0, w[1].0);
        // Nearest centers at or left of `lo` and at or right of `hi`.
        let i = centers.partition_point(|&c| c <= lo);
        let left = if i > 0 {
            lo - centers[i - 1]
        } else {
            f64::INFINITY
        };
        let j = centers.partition_point(|&c| c < hi);
        let right = if j < centers.len() {
            centers[j] - hi
        } else {
            f64::INFINITY
        };
        let inside = centers[i.min(centers.len())..j.min(centers.len())]
            .iter()
            .any(|&c| lo < c && c < hi);
        let dist = if inside { 0.0 } else { left.min(right) };
        cells.push((dist, area));
    }
    let min_positive = cells
        .iter()
        .map(|c| c.0)
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !min_positive.is_finite() {
        return Vec::new();
    }
    let span = values[values.len() - 1].0 - values[0].0;
    let mut out = Vec::new();
    let mut r = span;
    loop {
        let areas: Vec<f64> = cells
            .iter()
            .map(|&(d, a)| if d >= r { a } else { 0.0 })
            .collect();
        out.push((r, pairwise_sum(&areas)));
        if r <= min_positive {
            break;
        }
        r *= 0.5;
    }
    out
}

/// Grid settings for [`integrate_improper`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImproperOptions {
    pub base_cells: usize,
    /// Grading radius around a singular node, in base cells.
    pub radius_cells: f64,
    /// Nodes per halving of the distance to a singular node.
    pub per_halving: usize,
    /// Innermost graded distance, relative to the domain length.
    pub floor_rel: f64,
}

impl Default for ImproperOptions {
    fn default() -> Self {
        ImproperOptions {
            base_cells: 4096,
            radius_cells: 8.0,
            per_halving: 64,
            floor_rel: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImproperIntegral {
    pub estimate: IntegralEstimate,
    pub centers: Vec<f64>,
    pub nodes: usize,
}

/// Nodes graded geometrically towards `c` on both sides within `radius`.
fn graded_nodes(c: f64, radius: f64, lo: f64, hi: f64, opts: &ImproperOptions) -> Vec<f64> {
    let floor = opts.floor_rel * (hi - lo);
    let mut out = Vec::new();
    let mut outer = radius;
    while outer > floor {
        let inner = 0.5 * outer;
        for k in 0..opts.per_halving {
            let d = inner + (outer - inner) * (k as f64 / opts.per_halving as f64);
            for x in [c - d, c + d] {
                if lo <= x && x <= hi {
                    out.push(x);
                }
            }
        }
        outer = inner;
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Integral of `h` over `[lo, hi]` given its values on the uniform base grid.
///
/// Base nodes with non-finite values, and the `extra` centers, are singular:
/// the grid is refined geometrically around each one before integration.
pub fn integrate_improper<H>(
    base: &[(f64, f64)],
    extra: &[f64],
    opts: &ImproperOptions,
    h: H,
) -> Result<ImproperIntegral>
where
    H: Fn(f64) -> Result<f64> + Sync,
{
    validate(base)?;
    let (lo, hi) = (base[0].0, base[base.len() - 1].0);
    let cell = (hi - lo) / (base.len() - 1) as f64;
    let mut centers: Vec<f64> = base
        .iter()
        .filter(|(_, v)| !v.is_finite())
        .map(|(t, _)| *t)
        .chain(extra.iter().copied().filter(|&t| lo <= t && t <= hi))
        .collect();
    centers.sort_by(f64::total_cmp);
    centers.dedup();

    let mut extra_nodes: Vec<f64> = Vec::new();
    for (i, &c) in centers.iter().enumerate() {
        let mut radius = opts.radius_cells * cell;
        if i > 0 {
            radius = radius.min(0.5 * (c - centers[i - 1]));
        }
        if i + 1 < centers.len() {
            radius = radius.min(0.5 * (centers[i + 1] - c));
        }
        extra_nodes.extend(graded_nodes(c, radius, lo, hi, opts));
    }
    extra_nodes.extend(centers.iter().copied());
    extra_nodes.sort_by(f64::total_cmp);
    extra_nodes.dedup();

    let base_t: Vec<f64> = base.iter().map(|p| p.0).collect();
    let new_t: Vec<f64> = extra_nodes
        .into_iter()
        .filter(|t| base_t.binary_search_by(|b| b.total_cmp(t)).is_err())
        .collect();
    let new_v = par_map(&new_t, |&t| h(t))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;

    let all_t = merge_sorted(&base_t, &new_t);
    let mut values = Vec::with_capacity(all_t.len());
    let (mut i, mut j) = (0, 0);
    for &t in &all_t {
        if i < base.len() && base[i].0 == t {
            values.push(base[i]);
            i += 1;
        } else {
            values.push((t, new_v[j]));
            j += 1;
        }
    }
    let estimate = integrate_grid_around(&values, &centers)?;
    Ok(ImproperIntegral {
        estimate,
        centers,
        nodes: values.len(),
    })
}

/// `∫ md(f, x) dx` together with the metric-derivative profile on the base
/// grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MdIntegral {
    pub integral: ImproperIntegral,
    pub profile: Vec<MdEstimate>,
}

/// Integrand value of an md estimate: finite only when it converged.
pub fn md_integrand(e: &MdEstimate) -> f64 {
    match e.status {
        MdStatus::Converged => e.value,
        MdStatus::Infinite => f64::INFINITY,
        _ => f64::NAN,
    }
}

/// Integral of the metric derivative over `[c, d] ⊂ [a, b]`.
pub fn integrate_md(
    path: &Path,
    c: f64,
    d: f64,
    opts: &ImproperOptions,
    schedule: &StepSchedule,
) -> Result<MdIntegral> {
    let dom = path.domain();
    if !(dom.lo <= c && c <= d && d <= dom.hi) {
        return Err(Error::InvalidParameter(format!(
            "[{c}, {d}] is not inside the domain"
        )));
    }
    if c == d {
        return Ok(MdIntegral {
            integral: ImproperIntegral {
                estimate: IntegralEstimate {
                    value: 0.0,
                    flag: Integrability::Integrable,
                    refinement_trace: vec![0.0],
                    shell_trace: Vec::new(),
                },
                centers: Vec::new(),
                nodes: 1,
            },
            profile: Vec::new(),
        });
    }
    let grid = uniform_grid(c, d, opts.base_cells.max(2));
    let profile = crate::derivative::md_profile(path, &grid, schedule)?;
    let base: Vec<(f64, f64)> = profile.iter().map(|e| (e.x, md_integrand(e))).collect();
    let breaks: Vec<f64> = path.breakpoints().to_vec();
    let integral = integrate_improper(&base, &breaks, opts, |x| {
        Ok(md_integrand(&metric_derivative(path, x, schedule)?))
    })?;
    Ok(MdIntegral { integral, profile })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{MetricSpace, Point};

    fn sample(f: impl Fn(f64) -> f64, ts: &[f64]) -> Vec<(f64, f64)> {
        ts.iter().map(|&t| (t, f(t))).collect()
    }

    #[test]
    fn constant_integrand() {
        let ts = uniform_grid(0.0, 2.0, 64);
        let est = integrate_grid(&sample(|_| 1.0, &ts)).unwrap();
        assert_eq!(est.value, 2.0);
        assert_eq!(est.flag, Integrability::Integrable);
    }

    #[test]
    fn inverse_sqrt_from_epsilon() {
        let eps = 2f64.powi(-27);
        let ts: Vec<f64> = (0..=27 * 64)
            .rev()
            .map(|i| 2f64.powf(-(i as f64) / 64.0))
            .collect();
        assert_eq!(ts[0], eps);
        let est = integrate_grid(&sample(|x| 0.5 / x.sqrt(), &ts)).unwrap();
        assert_eq!(est.flag, Integrability::Integrable);
        assert!((est.value - (1.0 - eps.sqrt())).abs() < 1e-4);
    }

    #[test]
    fn inverse_x_towards_zero() {
        let mut ts = vec![0.0];
        ts.extend((0..=40 * 16).rev().map(|i| 2f64.powf(-(i as f64) / 16.0)));
        let est = integrate_grid(&sample(|x| 1.0 / x, &ts)).unwrap();
        assert_eq!(est.flag, Integrability::NonIntegrable);
    }

    #[test]
    fn everywhere_infinite() {
        let ts = uniform_grid(0.0, 1.0, 16);
        let est = integrate_grid(&sample(|_| f64::INFINITY, &ts)).unwrap();
        assert_eq!(est.flag, Integrability::NonIntegrable);
    }

    #[test]
    fn validation() {
        assert!(matches!(
            integrate_grid(&[(0.0, 1.0), (1.0, 1.0), (0.5, 1.0)]),
            Err(Error::UnorderedGrid { index: 2 })
        ));
        assert!(integrate_grid(&[(0.0, -1.0), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn monotone_in_integrand() {
        let ts = uniform_grid(0.0, 1.0, 100);
        let lo = integrate_grid(&sample(|x| x * x, &ts)).unwrap().value;
        let hi = integrate_grid(&sample(|x| x * x + x.sin().abs(), &ts))
            .unwrap()
            .value;
        assert!(lo <= hi);
    }

    #[test]
    fn improper_sqrt_md() {
        let p = Path::new(0.0, 1.0, MetricSpace::euclidean(1), |t| {
            Point::scalar(t.sqrt())
        })
        .unwrap();
        let md = integrate_md(
            &p,
            0.0,
            1.0,
            &ImproperOptions::default(),
            &StepSchedule::default(),
        )
        .unwrap();
        assert_eq!(md.integral.estimate.flag, Integrability::Integrable);
        assert!(
            (md.integral.estimate.value - 1.0).abs() < 1e-4,
            "{}",
            md.integral.estimate.value
        );
        assert_eq!(md.integral.centers, vec![0.0]);
    }

    #[test]
    fn improper_inverse_x() {
        let ts = uniform_grid(0.0, 1.0, 256);
        let base = sample(|x| if x == 0.0 { f64::INFINITY } else { 1.0 / x }, &ts);
        let est =
            integrate_improper(&base, &[], &ImproperOptions::default(), |x| Ok(1.0 / x)).unwrap();
        assert_eq!(est.estimate.flag, Integrability::NonIntegrable);
    }
}
