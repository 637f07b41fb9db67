//! Metric derivatives, the metric-differentiability defect and the
//! bounded-quotient classification.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{par_map, radical_inverse};
use crate::path::Path;

/// Relative agreement required between the last three quotients and between
/// the two sides.
pub const QUOTIENT_TOL: f64 = 1e-6;
/// Quotients above this are treated as infinite.
pub const QUOTIENT_CAP: f64 = 1e12;
/// Minimal ratio between successive quotients for power-law growth.
const GROWTH_RATIO: f64 = 1.05;
/// Absolute floor for the agreement test, so that quotients tending to zero
/// linearly in the step still converge.
const ZERO_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MdStatus {
    Converged,
    Infinite,
    NoLimit,
    Inconclusive,
}

impl MdStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            MdStatus::Converged => "converged",
            MdStatus::Infinite => "infinite",
            MdStatus::NoLimit => "no_limit",
            MdStatus::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MdEstimate {
    pub x: f64,
    /// `+∞` when infinite; otherwise the finest available quotient.
    pub value: f64,
    pub status: MdStatus,
    /// `(signed step, quotient)`; negative steps are left-sided.
    pub step_trace: Vec<(f64, f64)>,
    /// Largest step `t` such that every scheduled quotient with step `≤ t`
    /// was at most `ZERO_RUN_TOL`; zero when there is no such run.
    pub zero_run: f64,
}

impl MdEstimate {
    pub fn finite_value(&self) -> Option<f64> {
        (self.status == MdStatus::Converged).then_some(self.value)
    }
}

/// Quotients at or below this count as zero for [`MdEstimate::zero_run`].
pub const ZERO_RUN_TOL: f64 = 1e-9;

/// Geometric step schedule `t₀·qᵏ`, `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    /// `None` means `1e-2·(b − a)`.
    pub t0: Option<f64>,
    pub q: f64,
    pub steps: usize,
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule {
            t0: None,
            q: 0.5,
            steps: 30,
        }
    }
}

impl StepSchedule {
    fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "ratio q = {} not in (0, 1)",
                self.q
            )));
        }
        if let Some(t0) = self.t0 {
            if !(t0 > 0.0 && t0.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "initial step {t0} must be positive"
                )));
            }
        }
        if self.steps < 3 {
            return Err(Error::InvalidParameter(
                "schedule needs at least 3 steps".into(),
            ));
        }
        Ok(())
    }
}

/// `ρ(f(x+t), f(x)) / |t|`, with `t` replaced by the representable step
/// `(x + t) − x`.
pub fn metric_quotient(path: &Path, x: f64, t: f64) -> Result<f64> {
    let d = path.domain();
    if !d.contains(x) {
        return Err(Error::OutOfDomain {
            t: x,
            a: d.lo,
            b: d.hi,
        });
    }
    let y = x + t;
    if !d.contains(y) {
        return Err(Error::OutOfDomain {
            t: y,
            a: d.lo,
            b: d.hi,
        });
    }
    let h = y - x;
    if h == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "step {t} vanishes at x = {x}"
        )));
    }
    Ok(path.gap(y, x)? / h.abs())
}

#[derive(Debug, Default)]
struct Side {
    quotients: Vec<f64>,
}

impl Side {
    fn settled(&self) -> bool {
        let n = self.quotients.len();
        if n < 3 {
            return false;
        }
        let last = &self.quotients[n - 3..];
        let hi = last.iter().cloned().fold(f64::MIN, f64::max);
        let lo = last.iter().cloned().fold(f64::MAX, f64::min);
        hi.is_finite() && hi - lo <= QUOTIENT_TOL * hi.abs().max(ZERO_FLOOR)
    }

    fn last(&self) -> f64 {
        *self.quotients.last().unwrap_or(&0.0)
    }

    fn infinite(&self) -> bool {
        let q = &self.quotients;
        if q.iter().any(|&v| v > QUOTIENT_CAP || v.is_infinite()) {
            return true;
        }
        q.len() >= 4
            && q[q.len() - 4..]
                .windows(2)
                .all(|w| w[0] > 0.0 && w[1] >= GROWTH_RATIO * w[0])
    }

    fn oscillates(&self) -> bool {
        let q = &self.quotients;
        let tail = &q[q.len().saturating_sub(12)..];
        if tail.len() < 5 {
            return false;
        }
        let diffs: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
        let flips = diffs.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
        let hi = tail.iter().cloned().fold(f64::MIN, f64::max);
        let lo = tail.iter().cloned().fold(f64::MAX, f64::min);
        flips >= 3 && hi - lo > QUOTIENT_TOL * hi.abs().max(ZERO_FLOOR)
    }
}

fn sides_agree(l: f64, r: f64) -> bool {
    (l - r).abs() <= QUOTIENT_TOL * l.abs().max(r.abs()).max(ZERO_FLOOR)
}

/// `md(f, x)` from one- or two-sided difference quotients along `schedule`.
///
/// In the interior both sides must settle at the same step and agree; at an
/// endpoint the single available side decides. The scan stops at the first
/// step where this happens.
pub fn metric_derivative(path: &Path, x: f64, schedule: &StepSchedule) -> Result<MdEstimate> {
    schedule.validate()?;
    let d = path.domain();
    let x = d.clamp(x)?;
    let len = d.len();
    if len == 0.0 {
        return Ok(MdEstimate {
            x,
            value: 0.0,
            status: MdStatus::Inconclusive,
            step_trace: Vec::new(),
            zero_run: 0.0,
        });
    }
    let t0 = schedule.t0.unwrap_or(1e-2 * len).min(len);
    let (room_left, room_right) = (x - d.lo, d.hi - x);
    let (use_left, use_right) = (room_left > 0.0, room_right > 0.0);
    let start = if use_left && use_right {
        t0.min(room_left).min(room_right)
    } else {
        t0.min(room_left.max(room_right))
    };

    let mut left = Side::default();
    let mut right = Side::default();
    let mut trace = Vec::new();
    let mut converged = None;
    let mut zero_since: Option<f64> = None;
    let mut t = start;
    for _ in 0..=schedule.steps {
        let mut step_max = 0.0f64;
        if use_right && x + t > x {
            let q = metric_quotient(path, x, t)?;
            right.quotients.push(q);
            trace.push((t, q));
            step_max = step_max.max(q);
        }
        if use_left && x - t < x {
            let q = metric_quotient(path, x, -t)?;
            left.quotients.push(q);
            trace.push((-t, q));
            step_max = step_max.max(q);
        }
        if step_max <= ZERO_RUN_TOL {
            zero_since.get_or_insert(t);
        } else {
            zero_since = None;
        }
        let done = match (use_left, use_right) {
            (true, true) => {
                left.settled() && right.settled() && sides_agree(left.last(), right.last())
            }
            (true, false) => left.settled(),
            (false, true) => right.settled(),
            (false, false) => false,
        };
        if done {
            let value = match (use_left, use_right) {
                (true, true) => 0.5 * (left.last() + right.last()),
                (true, false) => left.last(),
                _ => right.last(),
            };
            converged = Some(value);
            break;
        }
        t *= schedule.q;
    }

    let zero_run = zero_since.unwrap_or(0.0);
    if let Some(value) = converged {
        return Ok(MdEstimate {
            x,
            value,
            status: MdStatus::Converged,
            step_trace: trace,
            zero_run,
        });
    }
    let active: Vec<&Side> = [(use_left, &left), (use_right, &right)]
        .into_iter()
        .filter_map(|(on, s)| on.then_some(s))
        .collect();
    let status = if !active.is_empty() && active.iter().all(|s| s.infinite()) {
        MdStatus::Infinite
    } else if active.iter().any(|s| s.infinite())
        || active.iter().any(|s| s.oscillates())
        || (active.len() == 2
            && active.iter().all(|s| s.settled())
            && !sides_agree(left.last(), right.last()))
    {
        MdStatus::NoLimit
    } else {
        MdStatus::Inconclusive
    };
    let value = match status {
        MdStatus::Infinite => f64::INFINITY,
        _ => active.iter().map(|s| s.last()).sum::<f64>() / active.len().max(1) as f64,
    };
    Ok(MdEstimate {
        x,
        value,
        status,
        step_trace: trace,
        zero_run,
    })
}

/// [`metric_derivative`] at every grid point, computed in parallel and
/// returned in grid order.
pub fn md_profile(path: &Path, grid: &[f64], schedule: &StepSchedule) -> Result<Vec<MdEstimate>> {
    par_map(grid, |&x| metric_derivative(path, x, schedule))
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectEstimate {
    pub x: f64,
    pub r: f64,
    /// Sampled lower bound of the defect supremum.
    pub defect: f64,
    pub pairs: usize,
}

/// Sampled metric-differentiability defect at `x` and scale `r`.
///
/// Pairs `(y, z)` come from the 2-D Halton sequence (bases 2 and 3) mapped
/// onto `[x − r, x + r]²` and clipped to the domain.
pub fn metric_differentiability_defect(
    path: &Path,
    x: f64,
    md_value: f64,
    r: f64,
    samples: usize,
) -> Result<DefectEstimate> {
    if !md_value.is_finite() || md_value < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "md value {md_value} must be finite and nonnegative"
        )));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "scale {r} must be positive"
        )));
    }
    if samples < 16 {
        return Err(Error::InvalidParameter(
            "at least 16 samples are required".into(),
        ));
    }
    let d = path.domain();
    let x = d.clamp(x)?;
    let fx_cache = |s: f64| path.evaluate(s.clamp(d.lo, d.hi));
    let mut defect = 0.0f64;
    let mut pairs = 0;
    for i in 1..=samples as u64 {
        let y = (x - r + 2.0 * r * radical_inverse(i, 2)).clamp(d.lo, d.hi);
        let z = (x - r + 2.0 * r * radical_inverse(i, 3)).clamp(d.lo, d.hi);
        let denom = (x - y).abs() + (x - z).abs();
        if denom == 0.0 {
            continue;
        }
        let rho = path.space().distance(&fx_cache(y)?, &fx_cache(z)?)?;
        defect = defect.max((rho - md_value * (y - z).abs()).abs() / denom);
        pairs += 1;
    }
    Ok(DefectEstimate {
        x,
        r,
        defect,
        pairs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SLabel {
    BoundedQuotient,
    Unbounded,
    Inconclusive,
}

/// Step schedule and bound for [`classify_s`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundProbe {
    pub schedule: StepSchedule,
    pub bound: f64,
}

impl Default for BoundProbe {
    fn default() -> Self {
        BoundProbe {
            schedule: StepSchedule {
                t0: None,
                q: 0.5,
                steps: 40,
            },
            bound: 1e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SClassification {
    pub x: f64,
    pub label: SLabel,
    pub max_quotient: f64,
}

/// Labels grid points by whether the difference quotients stay below
/// `probe.bound`.
pub fn classify_s(path: &Path, grid: &[f64], probe: &BoundProbe) -> Result<Vec<SClassification>> {
    probe.schedule.validate()?;
    let d = path.domain();
    par_map(grid, |&x| -> Result<SClassification> {
        let x = d.clamp(x)?;
        let mut t = probe.schedule.t0.unwrap_or(1e-2 * d.len());
        let mut maxima = Vec::with_capacity(probe.schedule.steps + 1);
        for _ in 0..=probe.schedule.steps {
            let mut m = f64::NAN;
            for s in [t, -t] {
                let y = x + s;
                if d.contains(y) && y != x {
                    let q = metric_quotient(path, x, s)?;
                    m = if m.is_nan() { q } else { m.max(q) };
                }
            }
            if !m.is_nan() {
                maxima.push(m);
            }
            t *= probe.schedule.q;
        }
        let max_quotient = maxima.iter().cloned().fold(0.0, f64::max);
        let label = if maxima.is_empty() {
            SLabel::Inconclusive
        } else if max_quotient <= probe.bound {
            SLabel::BoundedQuotient
        } else {
            let tail = &maxima[maxima.len().saturating_sub(4)..];
            let growing = tail.windows(2).all(|w| w[1] >= w[0]);
            if growing && tail.last().is_some_and(|&q| q > probe.bound) {
                SLabel::Unbounded
            } else {
                SLabel::Inconclusive
            }
        };
        Ok(SClassification {
            x,
            label,
            max_quotient,
        })
    })
    .into_iter()
    .collect()
}
