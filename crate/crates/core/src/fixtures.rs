//! Analytically understood paths with ground-truth metadata.
//!
//! Metadata records mathematical facts about each fixture. Numerical code
//! reads it to decide hypotheses and never writes to it.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::cantor::{cantor, meets_cantor_set};
use crate::error::{Error, Result};
use crate::metric::{kuratowski_embed, snowflake, MetricSpace, Point};
use crate::path::{compose, Interval, Path, RealFunction, Smoothness};

pub const FIXTURE_NAMES: &[&str] = &[
    "constant",
    "segment",
    "segment_hold",
    "circle",
    "helix_embedded",
    "cantor",
    "sqrt",
    "osc_bv_fail",
    "diff_not_bv",
    "snowflake_id",
    "vp_pair",
];

/// Exact total variation, when known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum VariationTruth {
    Finite(f64),
    Infinite,
    Unknown,
}

/// Where the metric derivative fails to exist or is infinite.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "points", rename_all = "snake_case")]
pub enum SingularSet {
    Empty,
    Finite(Vec<f64>),
    CantorSet,
    Everywhere,
    Unknown,
}

impl SingularSet {
    /// Whether the closed interval `[c, d]` meets the set in infinitely many
    /// points, so that `md` cannot be taken as finite almost everywhere
    /// there by a finite exception. `None` when unknown.
    pub fn meets_infinitely(&self, c: f64, d: f64) -> Option<bool> {
        match self {
            SingularSet::Empty | SingularSet::Finite(_) => Some(false),
            SingularSet::CantorSet => {
                // Closed gaps touch the set only at their two endpoints.
                let eta = 1e-9 * (d - c);
                Some(c < d && meets_cantor_set(c + eta, d - eta))
            }
            SingularSet::Everywhere => Some(c < d),
            SingularSet::Unknown => None,
        }
    }

    /// Whether the set meets `[c, d]` at all.
    pub fn meets(&self, c: f64, d: f64) -> Option<bool> {
        match self {
            SingularSet::Empty => Some(false),
            SingularSet::Finite(pts) => Some(pts.iter().any(|&p| c <= p && p <= d)),
            SingularSet::CantorSet => Some(meets_cantor_set(c, d)),
            SingularSet::Everywhere => Some(true),
            SingularSet::Unknown => None,
        }
    }

    pub fn points(&self) -> &[f64] {
        match self {
            SingularSet::Finite(p) => p,
            _ => &[],
        }
    }
}

/// Closed-form metric derivative: `Some(v)` (possibly `+∞`) where `md`
/// exists, `None` where it does not.
pub type MdClosedForm = Arc<dyn Fn(f64) -> Option<f64> + Send + Sync>;

#[derive(Clone, Serialize)]
pub struct FixtureMeta {
    pub name: String,
    pub is_continuous: bool,
    pub is_bv: bool,
    pub is_ac: bool,
    pub has_property_n: bool,
    pub is_injective: bool,
    pub variation_exact: VariationTruth,
    pub md_singular: SingularSet,
    #[serde(skip)]
    pub md_closed_form: Option<MdClosedForm>,
}

impl fmt::Debug for FixtureMeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FixtureMeta")
            .field("name", &self.name)
            .field("is_continuous", &self.is_continuous)
            .field("is_bv", &self.is_bv)
            .field("is_ac", &self.is_ac)
            .field("has_property_n", &self.has_property_n)
            .field("is_injective", &self.is_injective)
            .field("variation_exact", &self.variation_exact)
            .field("md_singular", &self.md_singular)
            .field("md_closed_form", &self.md_closed_form.is_some())
            .finish()
    }
}

impl FixtureMeta {
    fn new(name: &str) -> Self {
        FixtureMeta {
            name: name.to_string(),
            is_continuous: true,
            is_bv: true,
            is_ac: true,
            has_property_n: true,
            is_injective: false,
            variation_exact: VariationTruth::Unknown,
            md_singular: SingularSet::Empty,
            md_closed_form: None,
        }
    }

    fn flags(mut self, bv: bool, ac: bool, n: bool, injective: bool) -> Self {
        self.is_bv = bv;
        self.is_ac = ac;
        self.has_property_n = n;
        self.is_injective = injective;
        self
    }

    fn variation(mut self, v: VariationTruth) -> Self {
        self.variation_exact = v;
        self
    }

    fn singular(mut self, s: SingularSet) -> Self {
        self.md_singular = s;
        self
    }

    fn md<F>(mut self, f: F) -> Self
    where
        F: Fn(f64) -> Option<f64> + Send + Sync + 'static,
    {
        self.md_closed_form = Some(Arc::new(f));
        self
    }

    /// AC exactly when continuous, BV and (N).
    pub fn is_consistent(&self) -> bool {
        self.is_ac == (self.is_continuous && self.is_bv && self.has_property_n)
            && match self.variation_exact {
                VariationTruth::Finite(_) => self.is_bv,
                VariationTruth::Infinite => !self.is_bv,
                VariationTruth::Unknown => true,
            }
    }

    pub fn md_at(&self, t: f64) -> Option<f64> {
        self.md_closed_form.as_ref().and_then(|f| f(t))
    }
}

/// The outer path, its metadata and the reparametrization of a composed
/// fixture.
#[derive(Debug, Clone)]
pub struct Composition {
    pub outer: Path,
    pub outer_meta: FixtureMeta,
    pub inner: RealFunction,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub path: Path,
    pub meta: FixtureMeta,
    pub composition: Option<Composition>,
}

/// Fixture parameters as `key → value` strings; vectors are comma separated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params(BTreeMap<String, String>);

impl Params {
    pub fn new() -> Self {
        Params::default()
    }

    /// Parses `key=value` items.
    pub fn parse<I, S>(items: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut map = BTreeMap::new();
        for item in items {
            let item = item.as_ref();
            let (k, v) = item.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("expected key=value, got `{item}`"))
            })?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Params(map))
    }

    pub fn with(mut self, key: &str, value: &str) -> Self {
        self.0.insert(key.to_string(), value.to_string());
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &String)> {
        self.0.iter()
    }

    fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.0.get(key) {
            None => Ok(default),
            Some(s) => parse_number(key, s),
        }
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.0.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("{key} = `{s}` is not a count"))),
        }
    }

    fn vector(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.0.get(key) {
            None => Ok(default.to_vec()),
            Some(s) => s.split(',').map(|c| parse_number(key, c.trim())).collect(),
        }
    }

    fn check_known(&self, name: &str, allowed: &[&str]) -> Result<()> {
        match self.0.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::InvalidParameter(format!(
                "fixture `{name}` has no parameter `{k}` (allowed: {})",
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }
}

fn parse_number(key: &str, s: &str) -> Result<f64> {
    let v = match s {
        "pi" => PI,
        "2pi" => 2.0 * PI,
        "4pi" => 4.0 * PI,
        _ => s
            .parse::<f64>()
            .map_err(|_| Error::InvalidParameter(format!("{key} = `{s}` is not a number")))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{key} must be finite")))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Builds a catalog fixture.
pub fn fixture(name: &str, params: &Params) -> Result<Fixture> {
    let simple = |path, meta| Fixture {
        path,
        meta,
        composition: None,
    };
    match name {
        "constant" => {
            params.check_known(name, &["p", "a", "b"])?;
            let p = params.vector("p", &[1.0, 2.0])?;
            let (a, b) = (params.f64("a", 0.0)?, params.f64("b", 1.0)?);
            let dim = p.len();
            let q = p.clone();
            let path = Path::new(a, b, MetricSpace::euclidean(dim), move |_| {
                Point::new(q.clone())
            })?
            .with_hint(Smoothness::Lipschitz(0.0));
            let meta = FixtureMeta::new(name)
                .flags(true, true, true, a == b)
                .variation(VariationTruth::Finite(0.0))
                .md(|_| Some(0.0));
            Ok(simple(path, meta))
        }
        "segment" => {
            params.check_known(name, &["p", "v", "a", "b"])?;
            let (path, speed) = segment_path(params, 0.0, 2.0)?;
            let len = path.domain().len();
            let meta = FixtureMeta::new(name)
                .flags(true, true, true, speed > 0.0)
                .variation(VariationTruth::Finite(speed * len))
                .md(move |_| Some(speed));
            Ok(simple(path, meta))
        }
        "segment_hold" => {
            params.check_known(name, &["p", "v"])?;
            let p = params.vector("p", &[0.0, 0.0])?;
            let v = params.vector("v", &[1.0, 0.0])?;
            if p.len() != v.len() {
                return Err(Error::DimensionMismatch {
                    expected: p.len(),
                    found: v.len(),
                });
            }
            let speed = norm(&v);
            let dim = p.len();
            let path = Path::new(0.0, 2.0, MetricSpace::euclidean(dim), move |t| {
                let s = t.min(1.0);
                Point::new(p.iter().zip(&v).map(|(pi, vi)| pi + s * vi).collect())
            })?
            .with_hint(Smoothness::Lipschitz(speed))
            .with_breakpoints(vec![1.0]);
            let meta = FixtureMeta::new(name)
                .flags(true, true, true, false)
                .variation(VariationTruth::Finite(speed))
                .singular(if speed > 0.0 {
                    SingularSet::Finite(vec![1.0])
                } else {
                    SingularSet::Empty
                })
                .md(move |t| match t {
                    t if t < 1.0 => Some(speed),
                    t if t > 1.0 => Some(0.0),
                    _ => (speed == 0.0).then_some(0.0),
                });
            Ok(simple(path, meta))
        }
        "circle" => {
            params.check_known(name, &["radius", "t0", "t1"])?;
            let r = params.f64("radius", 1.0)?;
            if r <= 0.0 {
                return Err(Error::InvalidParameter("radius must be positive".into()));
            }
            let (t0, t1) = (params.f64("t0", 0.0)?, params.f64("t1", 2.0 * PI)?);
            let path = circle_path(r, t0, t1)?;
            let meta = FixtureMeta::new(name)
                .flags(true, true, true, t1 - t0 < 2.0 * PI)
                .variation(VariationTruth::Finite(r * (t1 - t0)))
                .md(move |_| Some(r));
            Ok(simple(path, meta))
        }
        "helix_embedded" => {
            params.check_known(name, &["anchors", "t1"])?;
            let n = params.usize("anchors", 64)?;
            let t1 = params.f64("t1", 2.0 * PI)?;
            helix_embedded(n, t1)
        }
        "cantor" => {
            params.check_known(name, &[])?;
            let path = Path::new(0.0, 1.0, MetricSpace::euclidean(1), |t| {
                Point::scalar(cantor(t))
            })?;
            let meta = FixtureMeta::new(name)
                .flags(true, false, false, false)
                .variation(VariationTruth::Finite(1.0))
                .singular(SingularSet::CantorSet)
                .md(|t| {
                    if crate::cantor::cantor_gap(t).is_some() {
                        Some(0.0)
                    } else {
                        None
                    }
                });
            Ok(simple(path, meta))
        }
        "sqrt" => {
            params.check_known(name, &[])?;
            let path = Path::new(0.0, 1.0, MetricSpace::euclidean(1), |t| {
                Point::scalar(t.sqrt())
            })?;
            let meta = FixtureMeta::new(name)
                .flags(true, true, true, true)
                .variation(VariationTruth::Finite(1.0))
                .singular(SingularSet::Finite(vec![0.0]))
                .md(|t| {
                    Some(if t == 0.0 {
                        f64::INFINITY
                    } else {
                        0.5 / t.sqrt()
                    })
                });
            Ok(simple(path, meta))
        }
        "osc_bv_fail" => {
            params.check_known(name, &["b"])?;
            let b = params.f64("b", 1.0)?;
            let path = Path::new(0.0, b, MetricSpace::euclidean(1), |t| {
                Point::scalar(x_sin_inv(t))
            })?;
            let meta = not_bv(name)
                .singular(SingularSet::Finite(vec![0.0]))
                .md(|t| (t != 0.0).then(|| ((1.0 / t).sin() - (1.0 / t).cos() / t).abs()));
            Ok(simple(path, meta))
        }
        "diff_not_bv" => {
            params.check_known(name, &["b"])?;
            let b = params.f64("b", 1.0)?;
            let path = Path::new(0.0, b, MetricSpace::euclidean(1), |t| {
                Point::scalar(if t == 0.0 {
                    0.0
                } else {
                    t * t * (1.0 / (t * t)).sin()
                })
            })?;
            let meta = not_bv(name).md(|t| {
                Some(if t == 0.0 {
                    0.0
                } else {
                    let u = 1.0 / (t * t);
                    (2.0 * t * u.sin() - 2.0 / t * u.cos()).abs()
                })
            });
            Ok(simple(path, meta))
        }
        "snowflake_id" => {
            params.check_known(name, &["alpha"])?;
            let alpha = params.f64("alpha", 0.5)?;
            let space = snowflake(&MetricSpace::euclidean(1), alpha)?;
            let path = Path::new(0.0, 1.0, space, Point::scalar)?;
            let meta = if alpha < 1.0 {
                FixtureMeta::new(name)
                    .flags(false, false, false, true)
                    .variation(VariationTruth::Infinite)
                    .singular(SingularSet::Everywhere)
                    .md(|_| Some(f64::INFINITY))
            } else {
                FixtureMeta::new(name)
                    .flags(true, true, true, true)
                    .variation(VariationTruth::Finite(1.0))
                    .md(|_| Some(1.0))
            };
            Ok(simple(
                path.with_hint(if alpha < 1.0 {
                    Smoothness::Generic
                } else {
                    Smoothness::Lipschitz(1.0)
                }),
                meta,
            ))
        }
        "vp_pair" => {
            params.check_known(name, &[])?;
            vp_pair()
        }
        other => Err(Error::UnknownFixture(other.to_string())),
    }
}

/// Continuous, differentiable off the origin, (N) by countable smoothness,
/// unbounded variation.
fn not_bv(name: &str) -> FixtureMeta {
    FixtureMeta::new(name)
        .flags(false, false, true, false)
        .variation(VariationTruth::Infinite)
}

fn x_sin_inv(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * (1.0 / t).sin()
    }
}

fn segment_path(params: &Params, a0: f64, b0: f64) -> Result<(Path, f64)> {
    let p = params.vector("p", &[0.0, 0.0])?;
    let v = params.vector("v", &[1.0, 0.0])?;
    if p.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: v.len(),
        });
    }
    let (a, b) = (params.f64("a", a0)?, params.f64("b", b0)?);
    let speed = norm(&v);
    let dim = p.len();
    let path = Path::new(a, b, MetricSpace::euclidean(dim), move |t| {
        Point::new(p.iter().zip(&v).map(|(pi, vi)| pi + (t - a) * vi).collect())
    })?
    .with_hint(Smoothness::Lipschitz(speed));
    Ok((path, speed))
}

fn circle_path(r: f64, t0: f64, t1: f64) -> Result<Path> {
    Ok(Path::new(t0, t1, MetricSpace::euclidean(2), move |t| {
        Point::new(vec![r * t.cos(), r * t.sin()])
    })?
    .with_hint(Smoothness::Lipschitz(r)))
}

/// Unit circle pushed through a Kuratowski embedding over `n` anchors
/// placed evenly on the circle.
fn helix_embedded(n: usize, t1: f64) -> Result<Fixture> {
    let anchors: Vec<Point> = (0..n)
        .map(|k| {
            let th = 2.0 * PI * k as f64 / n as f64;
            Point::new(vec![th.cos(), th.sin()])
        })
        .collect();
    let emb = Arc::new(kuratowski_embed(&MetricSpace::euclidean(2), &anchors)?);
    let target = emb.target().clone();
    let map = Arc::clone(&emb);
    let path = Path::new(0.0, t1, target, move |t| {
        map.map(&[t.cos(), t.sin()])
            .unwrap_or_else(|_| Point::new(vec![f64::NAN; n]))
    })?
    .with_hint(Smoothness::Lipschitz(1.0));
    // d/dt |c(t) − aᵢ| = ⟨c − aᵢ, c′⟩ / |c − aᵢ|, which tends to ±1 at an anchor.
    let md_anchors = anchors.clone();
    let meta = FixtureMeta::new("helix_embedded")
        .flags(true, true, true, t1 < 2.0 * PI && n >= 3)
        .md(move |t| {
            let (c, s) = (t.cos(), t.sin());
            let best = md_anchors.iter().fold(0.0f64, |m, a| {
                let (dx, dy) = (c - a[0], s - a[1]);
                let r = (dx * dx + dy * dy).sqrt();
                let rate = if r < 1e-12 {
                    1.0
                } else {
                    (dx * -s + dy * c).abs() / r
                };
                m.max(rate)
            });
            Some(best)
        });
    Ok(Fixture {
        path,
        meta,
        composition: None,
    })
}

/// `f = √·` on `[0, 1]`, `g(x) = x² sin²(1/x)` with `g(0) = 0`, and
/// `f∘g = |x sin(1/x)|`.
fn vp_pair() -> Result<Fixture> {
    let outer = Path::new(0.0, 1.0, MetricSpace::euclidean(1), |t| {
        Point::scalar(t.sqrt())
    })?;
    let outer_meta = fixture("sqrt", &Params::new())?.meta;
    let unit = Interval::new(0.0, 1.0)?;
    let inner = RealFunction::new("x^2 sin^2(1/x)", unit, unit, |x| {
        if x == 0.0 {
            0.0
        } else {
            let s = (1.0 / x).sin();
            x * x * s * s
        }
    })
    .with_derivative(|x| {
        if x == 0.0 {
            0.0
        } else {
            let (s, c) = (1.0 / x).sin_cos();
            2.0 * s * (x * s - c)
        }
    })
    .absolutely_continuous(true);
    let path = compose(&outer, &inner)?;
    let meta = not_bv("vp_pair")
        .singular(SingularSet::Finite(vec![0.0]))
        .md(|x| (x != 0.0).then(|| ((1.0 / x).sin() - (1.0 / x).cos() / x).abs()));
    Ok(Fixture {
        path,
        meta,
        composition: Some(Composition {
            outer,
            outer_meta,
            inner,
        }),
    })
}
