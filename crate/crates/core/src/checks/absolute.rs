use serde::Serialize;
use serde_json::json;

use super::{variation_settled, CheckOptions};
use crate::error::{Error, Result};
use crate::fixtures::FixtureMeta;
use crate::numeric::{par_map, uniform_grid};
use crate::path::Path;
use crate::report::{real, CheckReport, TheoremId, Verdict};
use crate::variation::variation;

/// Finest dyadic level of the family search.
const MAX_LEVEL: u32 = 12;
/// Largest number of intervals in one family.
const MAX_FAMILY: usize = 1 << 10;
/// Levels compared for shrinking families.
const LOOKBACK: usize = 4;
/// Required shrink factor of the family length over `LOOKBACK` levels.
const SHRINK: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AcEvidence {
    /// Some fixed-budget family keeps `Σρ ≥ ε` while its length shrinks.
    NotAcEvidence,
    AcConsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcModulusEntry {
    pub eps: f64,
    /// Smallest family length found with `Σρ ≥ ε`; any admissible `δ(ε)`
    /// is at most this. The domain length when no family reached `ε`.
    pub delta_hat: f64,
    /// `(level, length)` of the shortest family reaching `ε` per level.
    pub lengths: Vec<(u32, f64)>,
    pub shrinking: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcModulus {
    pub entries: Vec<AcModulusEntry>,
    pub evidence: AcEvidence,
}

/// Adversarial search for the AC modulus `δ(ε)`.
///
/// At each dyadic level the cells are ranked by the distance between the
/// images of their ends, and the family of the `k` largest is the shortest
/// family of that level reaching `ε`. `eps` defaults to `{0.5, 0.25, 0.1}`
/// times the variation (or the image diameter when the variation is not
/// finite).
pub fn ac_modulus(path: &Path, eps: Option<Vec<f64>>, opts: &CheckOptions) -> Result<AcModulus> {
    let (a, b) = (path.a(), path.b());
    let len = b - a;
    let fine = uniform_grid(a, b, 1 << MAX_LEVEL);
    let points = fine
        .iter()
        .map(|&t| path.evaluate(t))
        .collect::<Result<Vec<_>>>()?;
    let eps = match eps {
        Some(list) => {
            validate_eps(&list)?;
            list
        }
        None => {
            let var = variation(path, opts.variation_tol, opts.max_level)?;
            let scale = if variation_settled(&var, opts) && var.value.is_finite() {
                var.value
            } else {
                let mut diam = 0.0f64;
                for p in &points {
                    diam = diam.max(path.space().distance(&points[0], p)?);
                }
                diam
            };
            if scale == 0.0 || len == 0.0 {
                return Ok(AcModulus {
                    entries: Vec::new(),
                    evidence: AcEvidence::AcConsistent,
                });
            }
            vec![0.5 * scale, 0.25 * scale, 0.1 * scale]
        }
    };

    let levels: Vec<u32> = (1..=MAX_LEVEL).collect();
    let ranked = par_map(&levels, |&n| -> Result<Vec<f64>> {
        let stride = 1usize << (MAX_LEVEL - n);
        let mut chords = (0..1usize << n)
            .map(|i| {
                path.space()
                    .distance(&points[i * stride], &points[(i + 1) * stride])
            })
            .collect::<Result<Vec<f64>>>()?;
        chords.sort_by(|x, y| y.total_cmp(x));
        chords.truncate(MAX_FAMILY);
        Ok(chords)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut entries = Vec::with_capacity(eps.len());
    for &e in &eps {
        let mut lengths = Vec::new();
        for (&n, chords) in levels.iter().zip(&ranked) {
            let cell = len / (1u64 << n) as f64;
            let mut sum = 0.0;
            if let Some(k) = chords.iter().position(|&c| {
                sum += c;
                sum >= e
            }) {
                lengths.push((n, (k + 1) as f64 * cell));
            }
        }
        let delta_hat = lengths.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let shrinking = shrinks(&lengths);
        entries.push(AcModulusEntry {
            eps: e,
            delta_hat: if delta_hat.is_finite() {
                delta_hat
            } else {
                len
            },
            lengths,
            shrinking,
        });
    }
    let evidence = if entries.iter().any(|e| e.shrinking) {
        AcEvidence::NotAcEvidence
    } else {
        AcEvidence::AcConsistent
    };
    Ok(AcModulus { entries, evidence })
}

/// The last `LOOKBACK + 1` levels all reach `ε`, with nonincreasing lengths
/// that shrink by at least `SHRINK`.
fn shrinks(lengths: &[(u32, f64)]) -> bool {
    if lengths.len() <= LOOKBACK || lengths.last().map(|p| p.0) != Some(MAX_LEVEL) {
        return false;
    }
    let tail = &lengths[lengths.len() - LOOKBACK - 1..];
    let contiguous = tail.windows(2).all(|w| w[1].0 == w[0].0 + 1);
    let nonincreasing = tail.windows(2).all(|w| w[1].1 <= w[0].1);
    contiguous && nonincreasing && tail[LOOKBACK].1 <= SHRINK * tail[0].1
}

fn validate_eps(list: &[f64]) -> Result<()> {
    if list.is_empty() {
        return Err(Error::InvalidParameter("empty ε list".into()));
    }
    if list.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidParameter("ε values must be positive".into()));
    }
    if list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "ε values must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Evidence-only report: holds when the family search agrees with the
/// fixture's AC flag.
pub fn check_ac_modulus(
    path: &Path,
    meta: Option<&FixtureMeta>,
    eps: Option<Vec<f64>>,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let id = TheoremId::AcModulus;
    let m = ac_modulus(path, eps, opts)?;
    let (lhs, rhs) = m
        .entries
        .last()
        .map_or((path.domain().len(), f64::INFINITY), |e| {
            (e.delta_hat, e.eps)
        });
    let table: Vec<_> = m
        .entries
        .iter()
        .map(|e| json!({"eps": real(e.eps), "delta_hat": real(e.delta_hat), "shrinking": e.shrinking}))
        .collect();
    let report = CheckReport::new(id, Verdict::Inconclusive, lhs, rhs)
        .param("evidence", json!(m.evidence))
        .param("modulus", json!(table))
        .note("heuristic family search; evidence only");
    let Some(meta) = meta else {
        return Ok(report.note("no metadata to compare against"));
    };
    let agrees = meta.is_ac == (m.evidence == AcEvidence::AcConsistent);
    Ok(if agrees {
        CheckReport {
            verdict: Verdict::Holds,
            ..report
        }
        .note("evidence agrees with the AC flag")
    } else {
        report.note("evidence disagrees with the AC flag")
    })
}
