//! Metric spaces used as path targets.
//!
//! Points are finite real vectors. Three concrete metrics are provided:
//! Euclidean `R^n`, the sup-norm sequence space over a finite index set, and
//! snowflaked versions `ρ^α` of any of these. [`kuratowski_embed`] maps a
//! space into the sup-norm space indexed by a finite anchor set.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of a metric space. The interpretation of the coordinates is fixed
/// by the owning space.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn scalar(x: f64) -> Self {
        Point(vec![x])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(v: [f64; N]) -> Self {
        Point(v.to_vec())
    }
}

/// How the coordinates of a point are to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    Scalar,
    Vector(usize),
    /// Coordinates indexed by a finite sample (anchor) set.
    Indexed(usize),
}

impl PointKind {
    pub fn len(self) -> usize {
        match self {
            PointKind::Scalar => 1,
            PointKind::Vector(n) | PointKind::Indexed(n) => n,
        }
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }
}

/// A metric space with a distance oracle.
///
/// Handles are immutable; cloning is cheap enough for the nesting depths
/// used here.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpace {
    Euclidean { dim: usize },
    SupNorm { dim: usize },
    Snowflake { base: Box<MetricSpace>, alpha: f64 },
}

impl MetricSpace {
    pub fn euclidean(dim: usize) -> Self {
        MetricSpace::Euclidean { dim }
    }

    pub fn sup_norm(dim: usize) -> Self {
        MetricSpace::SupNorm { dim }
    }

    /// Opaque tag identifying the space, e.g. `snowflake(euclidean(1),0.5)`.
    pub fn identifier(&self) -> String {
        self.to_string()
    }

    pub fn point_kind(&self) -> PointKind {
        match self {
            MetricSpace::Euclidean { dim: 1 } => PointKind::Scalar,
            MetricSpace::Euclidean { dim } => PointKind::Vector(*dim),
            MetricSpace::SupNorm { dim } => PointKind::Indexed(*dim),
            MetricSpace::Snowflake { base, .. } => base.point_kind(),
        }
    }

    pub fn dim(&self) -> usize {
        self.point_kind().len()
    }

    /// `ρ(p, q)`. NaN or negative values are reported as errors, never
    /// clamped.
    pub fn distance(&self, p: &[f64], q: &[f64]) -> Result<f64> {
        let d = self.raw_distance(p, q)?;
        if d.is_nan() || d < 0.0 {
            return Err(Error::NonMetricValue { value: d });
        }
        Ok(d)
    }

    fn raw_distance(&self, p: &[f64], q: &[f64]) -> Result<f64> {
        let dim = self.dim();
        for len in [p.len(), q.len()] {
            if len != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: len,
                });
            }
        }
        Ok(match self {
            MetricSpace::Euclidean { dim: 1 } => (p[0] - q[0]).abs(),
            MetricSpace::Euclidean { .. } => p
                .iter()
                .zip(q)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            MetricSpace::SupNorm { .. } => p
                .iter()
                .zip(q)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
            MetricSpace::Snowflake { base, alpha } => base.distance(p, q)?.powf(*alpha),
        })
    }

    pub fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: p.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for MetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricSpace::Euclidean { dim } => write!(f, "euclidean({dim})"),
            MetricSpace::SupNorm { dim } => write!(f, "supnorm({dim})"),
            MetricSpace::Snowflake { base, alpha } => write!(f, "snowflake({base},{alpha})"),
        }
    }
}

/// The space `(M, ρ^α)`. Valid for `0 < α ≤ 1` by concavity of `t ↦ t^α`.
pub fn snowflake(space: &MetricSpace, alpha: f64) -> Result<MetricSpace> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "snowflake exponent must lie in (0, 1], got {alpha}"
        )));
    }
    Ok(MetricSpace::Snowflake {
        base: Box::new(space.clone()),
        alpha,
    })
}

/// Kuratowski map `p ↦ (ρ(p, aᵢ) − ρ(a₀, aᵢ))ᵢ` into the sup-norm space
/// indexed by the anchors.
///
/// The map is 1-Lipschitz everywhere and an isometry on the anchor set.
/// Anchor `a₀` serves as basepoint.
#[derive(Debug, Clone)]
pub struct KuratowskiEmbedding {
    source: MetricSpace,
    target: MetricSpace,
    anchors: Vec<Point>,
    offsets: Vec<f64>,
}

impl KuratowskiEmbedding {
    pub fn source(&self) -> &MetricSpace {
        &self.source
    }

    pub fn target(&self) -> &MetricSpace {
        &self.target
    }

    pub fn anchors(&self) -> &[Point] {
        &self.anchors
    }

    pub fn map(&self, p: &[f64]) -> Result<Point> {
        let coords = self
            .anchors
            .iter()
            .zip(&self.offsets)
            .map(|(a, off)| Ok(self.source.distance(p, a)? - off))
            .collect::<Result<Vec<_>>>()?;
        Ok(Point(coords))
    }
}

pub fn kuratowski_embed(space: &MetricSpace, anchors: &[Point]) -> Result<KuratowskiEmbedding> {
    let Some(base) = anchors.first() else {
        return Err(Error::EmptyAnchors);
    };
    for a in anchors {
        space.check_point(a)?;
    }
    for i in 0..anchors.len() {
        for j in i + 1..anchors.len() {
            if space.distance(&anchors[i], &anchors[j])? == 0.0 {
                return Err(Error::DuplicateAnchor {
                    first: i,
                    second: j,
                });
            }
        }
    }
    let offsets = anchors
        .iter()
        .map(|a| space.distance(base, a))
        .collect::<Result<Vec<_>>>()?;
    Ok(KuratowskiEmbedding {
        source: space.clone(),
        target: MetricSpace::sup_norm(anchors.len()),
        anchors: anchors.to_vec(),
        offsets,
    })
}

/// Serializable space description, as accepted in run configuration files:
/// `{ kind = "snowflake", alpha = 0.5, base = { kind = "euclidean", dim = 1 } }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDescriptor {
    pub kind: SpaceKind,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub base: Option<Box<SpaceDescriptor>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Euclidean,
    Supnorm,
    Snowflake,
}

impl SpaceDescriptor {
    pub fn build(&self) -> Result<MetricSpace> {
        let need_dim = || {
            self.dim.filter(|&d| d > 0).ok_or_else(|| {
                Error::InvalidParameter(format!("{:?} space needs dim > 0", self.kind))
            })
        };
        match self.kind {
            SpaceKind::Euclidean => Ok(MetricSpace::euclidean(need_dim()?)),
            SpaceKind::Supnorm => Ok(MetricSpace::sup_norm(need_dim()?)),
            SpaceKind::Snowflake => {
                let alpha = self
                    .alpha
                    .ok_or_else(|| Error::InvalidParameter("snowflake space needs alpha".into()))?;
                let base = match (&self.base, self.dim) {
                    (Some(b), _) => b.build()?,
                    (None, Some(d)) if d > 0 => MetricSpace::euclidean(d),
                    _ => {
                        return Err(Error::InvalidParameter(
                            "snowflake space needs a base or a dim".into(),
                        ))
                    }
                };
                snowflake(&base, alpha)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
        (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect()
    }

    #[test]
    fn pythagorean_distance() {
        let e2 = MetricSpace::euclidean(2);
        assert_eq!(e2.distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
    }

    #[test]
    fn identity_of_indiscernibles() {
        let sf = snowflake(&MetricSpace::euclidean(3), 0.3).unwrap();
        for space in [MetricSpace::euclidean(3), MetricSpace::sup_norm(3), sf] {
            let p = [1.5, -2.0, 7.25];
            assert_eq!(space.distance(&p, &p).unwrap(), 0.0);
        }
    }

    #[test]
    fn snowflake_values() {
        let sf = snowflake(&MetricSpace::euclidean(1), 0.5).unwrap();
        assert_eq!(sf.distance(&[0.0], &[4.0]).unwrap(), 2.0);
        assert_eq!(sf.distance(&[0.0], &[9.0]).unwrap(), 3.0);

        let e2 = MetricSpace::euclidean(2);
        let same = snowflake(&e2, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let (p, q) = (random_point(&mut rng, 2), random_point(&mut rng, 2));
            assert_eq!(same.distance(&p, &q).unwrap(), e2.distance(&p, &q).unwrap());
        }
    }

    #[test]
    fn snowflake_rejects_bad_exponent() {
        let e1 = MetricSpace::euclidean(1);
        for alpha in [0.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(
                snowflake(&e1, alpha),
                Err(Error::InvalidParameter(_))
            ));
        }
    }

    #[test]
    fn snowflake_triangle_inequality_random_triples() {
        let sf = snowflake(&MetricSpace::euclidean(2), 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let (p, q, r) = (
                random_point(&mut rng, 2),
                random_point(&mut rng, 2),
                random_point(&mut rng, 2),
            );
            let lhs = sf.distance(&p, &r).unwrap();
            let rhs = sf.distance(&p, &q).unwrap() + sf.distance(&q, &r).unwrap();
            assert!(lhs <= rhs + 1e-12, "{lhs} > {rhs}");
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let e2 = MetricSpace::euclidean(2);
        assert_eq!(
            e2.distance(&[0.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1
            })
        );
    }

    #[test]
    fn nan_distance_is_not_clamped() {
        let e1 = MetricSpace::euclidean(1);
        assert!(matches!(
            e1.distance(&[f64::NAN], &[0.0]),
            Err(Error::NonMetricValue { .. })
        ));
    }

    #[test]
    fn kuratowski_single_anchor_is_distance_to_it() {
        let e2 = MetricSpace::euclidean(2);
        let emb = kuratowski_embed(&e2, &[Point::from([1.0, 1.0])]).unwrap();
        assert_eq!(emb.target(), &MetricSpace::sup_norm(1));
        assert_eq!(emb.map(&[1.0, 1.0]).unwrap().coords(), &[0.0]);
        for (p, d) in [([0.0, 0.0], 2f64.sqrt()), ([5.0, -3.0], 32f64.sqrt())] {
            assert_eq!(emb.map(&p).unwrap().coords(), &[d]);
        }
    }

    #[test]
    fn kuratowski_equilateral_triangle() {
        let e2 = MetricSpace::euclidean(2);
        let h = 3f64.sqrt() / 2.0;
        let anchors = vec![
            Point::from([0.0, 0.0]),
            Point::from([1.0, 0.0]),
            Point::from([0.5, h]),
        ];
        let emb = kuratowski_embed(&e2, &anchors).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let d = emb
                    .target()
                    .distance(
                        &emb.map(&anchors[i]).unwrap(),
                        &emb.map(&anchors[j]).unwrap(),
                    )
                    .unwrap();
                assert!((d - 1.0).abs() <= 1e-15, "{d}");
            }
        }
    }

    #[test]
    fn kuratowski_errors() {
        let e2 = MetricSpace::euclidean(2);
        assert!(matches!(
            kuratowski_embed(&e2, &[]),
            Err(Error::EmptyAnchors)
        ));
        let dup = [
            Point::from([0.0, 1.0]),
            Point::from([2.0, 0.0]),
            Point::from([0.0, 1.0]),
        ];
        assert_eq!(
            kuratowski_embed(&e2, &dup).unwrap_err(),
            Error::DuplicateAnchor {
                first: 0,
                second: 2
            }
        );
    }

    #[test]
    fn descriptor_builds_nested_spaces() {
        let desc: SpaceDescriptor = serde_json::from_str(
            r#"{"kind":"snowflake","alpha":0.5,"base":{"kind":"euclidean","dim":2}}"#,
        )
        .unwrap();
        let space = desc.build().unwrap();
        assert_eq!(space.identifier(), "snowflake(euclidean(2),0.5)");
        assert_eq!(space.point_kind(), PointKind::Vector(2));

        let bad = SpaceDescriptor {
            kind: SpaceKind::Supnorm,
            dim: None,
            alpha: None,
            base: None,
        };
        assert!(bad.build().is_err());
    }
}
