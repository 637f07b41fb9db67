//! Paths `f: [a, b] → M` and real reparametrizations `g: [a, b] → [c, d]`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::metric::{MetricSpace, Point};

/// Parameters within this distance of the domain (relative to its length,
/// floored at 1) are clamped onto the boundary.
pub const DOMAIN_SLACK: f64 = 1e-12;

type Evaluator = Arc<dyn Fn(f64) -> Point + Send + Sync>;
type RealMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothness {
    Generic,
    Lipschitz(f64),
    PiecewiseSmooth,
    /// Affine between consecutive breakpoints.
    PiecewiseLinear,
}

/// A closed parameter interval `[lo, hi]` with `lo ≤ hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::InvalidParameter(format!(
                "bad interval [{lo}, {hi}]"
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }

    fn slack(&self) -> f64 {
        DOMAIN_SLACK * self.len().max(1.0)
    }

    /// Clamp `t` onto the interval if it lies within slack; error otherwise.
    pub fn clamp(&self, t: f64) -> Result<f64> {
        let s = self.slack();
        if t.is_nan() || t < self.lo - s || t > self.hi + s {
            return Err(Error::OutOfDomain {
                t,
                a: self.lo,
                b: self.hi,
            });
        }
        Ok(t.clamp(self.lo, self.hi))
    }
}

/// A path into a metric space.
///
/// `breakpoints` lists interior parameters where the path may fail to be
/// smooth (the knots of a sampled polyline, the corner of a piecewise
/// fixture); refinement partitions always include them.
#[derive(Clone)]
pub struct Path {
    domain: Interval,
    space: MetricSpace,
    evaluator: Evaluator,
    hint: Smoothness,
    breakpoints: Arc<[f64]>,
}

impl fmt::Debug for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Path")
            .field("domain", &self.domain)
            .field("space", &self.space.identifier())
            .field("hint", &self.hint)
            .field("breakpoints", &self.breakpoints.len())
            .finish()
    }
}

impl Path {
    pub fn new<F>(a: f64, b: f64, space: MetricSpace, evaluator: F) -> Result<Self>
    where
        F: Fn(f64) -> Point + Send + Sync + 'static,
    {
        Ok(Path {
            domain: Interval::new(a, b)?,
            space,
            evaluator: Arc::new(evaluator),
            hint: Smoothness::Generic,
            breakpoints: Arc::from(Vec::new()),
        })
    }

    pub fn with_hint(mut self, hint: Smoothness) -> Self {
        self.hint = hint;
        self
    }

    /// Registers interior knots; values outside the open domain are dropped.
    pub fn with_breakpoints(mut self, mut knots: Vec<f64>) -> Self {
        let d = self.domain;
        knots.retain(|&t| d.lo < t && t < d.hi);
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        self.breakpoints = Arc::from(knots);
        self
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn a(&self) -> f64 {
        self.domain.lo
    }

    pub fn b(&self) -> f64 {
        self.domain.hi
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn hint(&self) -> Smoothness {
        self.hint
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// `f(t)`, with `t` clamped onto `[a, b]` inside [`DOMAIN_SLACK`].
    pub fn evaluate(&self, t: f64) -> Result<Point> {
        let t = self.domain.clamp(t)?;
        let p = (self.evaluator)(t);
        self.space.check_point(&p)?;
        Ok(p)
    }

    /// `ρ(f(s), f(t))`.
    pub fn gap(&self, s: f64, t: f64) -> Result<f64> {
        self.space.distance(&self.evaluate(s)?, &self.evaluate(t)?)
    }

    /// The same evaluator on `[c, d] ⊂ [a, b]`.
    pub fn restrict(&self, c: f64, d: f64) -> Result<Path> {
        if !(self.a() <= c && c <= d && d <= self.b()) {
            return Err(Error::InvalidParameter(format!(
                "cannot restrict [{}, {}] to [{c}, {d}]",
                self.a(),
                self.b()
            )));
        }
        let mut out = self.clone();
        out.domain = Interval { lo: c, hi: d };
        Ok(out.with_breakpoints(self.breakpoints.to_vec()))
    }
}

/// A real function `g: [a, b] → [c, d]` with an optional derivative.
#[derive(Clone)]
pub struct RealFunction {
    name: String,
    domain: Interval,
    range: Interval,
    evaluator: RealMap,
    derivative: Option<RealMap>,
    absolutely_continuous: bool,
}

impl fmt::Debug for RealFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealFunction")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("range", &self.range)
            .field("has_derivative", &self.derivative.is_some())
            .finish()
    }
}

impl RealFunction {
    pub fn new<F>(name: &str, domain: Interval, range: Interval, evaluator: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        RealFunction {
            name: name.to_string(),
            domain,
            range,
            evaluator: Arc::new(evaluator),
            derivative: None,
            absolutely_continuous: false,
        }
    }

    pub fn with_derivative<F>(mut self, derivative: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    /// Marks the function as absolutely continuous (analytic knowledge).
    pub fn absolutely_continuous(mut self, ac: bool) -> Self {
        self.absolutely_continuous = ac;
        self
    }

    pub fn identity(a: f64, b: f64) -> Result<Self> {
        let d = Interval::new(a, b)?;
        Ok(RealFunction::new("identity", d, d, |x| x)
            .with_derivative(|_| 1.0)
            .absolutely_continuous(true))
    }

    /// `x ↦ slope·x + shift` on `[a, b]`.
    pub fn affine(a: f64, b: f64, slope: f64, shift: f64) -> Result<Self> {
        let (ya, yb) = (slope * a + shift, slope * b + shift);
        Ok(RealFunction::new(
            "affine",
            Interval::new(a, b)?,
            Interval::new(ya.min(yb), ya.max(yb))?,
            move |x| slope * x + shift,
        )
        .with_derivative(move |_| slope)
        .absolutely_continuous(true))
    }

    pub fn constant(a: f64, b: f64, value: f64) -> Result<Self> {
        Ok(RealFunction::new(
            "constant",
            Interval::new(a, b)?,
            Interval::new(value, value)?,
            move |_| value,
        )
        .with_derivative(|_| 0.0)
        .absolutely_continuous(true))
    }

    /// `x ↦ x²` on `[a, b]` with `0 ≤ a`.
    pub fn square(a: f64, b: f64) -> Result<Self> {
        if a < 0.0 {
            return Err(Error::InvalidParameter(
                "square needs a nonnegative domain".into(),
            ));
        }
        Ok(RealFunction::new(
            "square",
            Interval::new(a, b)?,
            Interval::new(a * a, b * b)?,
            |x| x * x,
        )
        .with_derivative(|x| 2.0 * x)
        .absolutely_continuous(true))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn range(&self) -> Interval {
        self.range
    }

    pub fn is_absolutely_continuous(&self) -> bool {
        self.absolutely_continuous
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    /// `g(x)`, clamped onto the declared range inside slack.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        let x = self.domain.clamp(x)?;
        let y = (self.evaluator)(x);
        self.range.clamp(y)
    }

    /// `g'(x)`: the supplied derivative, or a Richardson-extrapolated central
    /// difference (one-sided at the endpoints).
    pub fn derivative(&self, x: f64) -> Result<f64> {
        let x = self.domain.clamp(x)?;
        if let Some(d) = &self.derivative {
            return Ok(d(x));
        }
        let h = 1e-4 * self.domain.len().max(f64::MIN_POSITIVE);
        let g = |t: f64| (self.evaluator)(t);
        let lo = self.domain.lo;
        let hi = self.domain.hi;
        let diff = |h: f64| {
            if x - h < lo {
                (g(x + h) - g(x)) / h
            } else if x + h > hi {
                (g(x) - g(x - h)) / h
            } else {
                (g(x + h) - g(x - h)) / (2.0 * h)
            }
        };
        let (coarse, fine) = (diff(h), diff(h / 2.0));
        let interior = x - h >= lo && x + h <= hi;
        Ok(if interior {
            (4.0 * fine - coarse) / 3.0
        } else {
            2.0 * fine - coarse
        })
    }
}

/// `f ∘ g` on the domain of `g`.
pub fn compose(f: &Path, g: &RealFunction) -> Result<Path> {
    let (r, d) = (g.range(), f.domain());
    let slack = DOMAIN_SLACK * d.len().max(1.0);
    if r.lo < d.lo - slack || r.hi > d.hi + slack {
        return Err(Error::RangeMismatch {
            range_lo: r.lo,
            range_hi: r.hi,
            domain_lo: d.lo,
            domain_hi: d.hi,
        });
    }
    let (outer, inner) = (f.clone(), g.clone());
    let gd = g.domain();
    Path::new(gd.lo, gd.hi, f.space().clone(), move |t| {
        // t is already clamped into g's domain by Path::evaluate.
        let y = (inner.evaluator)(t).clamp(d.lo, d.hi);
        (outer.evaluator)(y)
    })
}
