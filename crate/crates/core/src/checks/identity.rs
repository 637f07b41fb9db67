use serde_json::json;

use super::{cover_over, md_integral_over, variation_settled, CheckOptions};
use crate::derivative::{md_profile, MdStatus};
use crate::error::{Error, Result};
use crate::fixtures::FixtureMeta;
use crate::measures::{integrate_md, Integrability, IntervalUnion};
use crate::numeric::{par_map, uniform_grid, Status};
use crate::path::Path;
use crate::report::{real, CheckReport, TheoremId, Verdict};
use crate::variation::{variation, variation_function_with};

use super::absolute::{ac_modulus, AcEvidence};

/// Mismatch fraction between `md` and the difference quotient of `v_f`
/// tolerated in the absolutely continuous case.
const VF_MISMATCH_FRACTION: f64 = 0.05;

/// `∫ₐᵇ md ≤ ⋁ₐᵇ f`, with equality asserted for absolutely continuous paths.
pub fn check_variation_identity(
    path: &Path,
    meta: Option<&FixtureMeta>,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let id = TheoremId::VariationIdentity;
    let var = variation(path, opts.variation_tol, opts.max_level)?;
    let rhs = var.value;
    if let Some(m) = meta {
        if !(m.is_continuous && m.is_bv) {
            return Ok(CheckReport::new(id, Verdict::Inconclusive, f64::NAN, rhs)
                .param("variation_status", json!(var.status))
                .note("hypothesis unmet: path is not continuous with bounded variation"));
        }
    }
    if !variation_settled(&var, opts) {
        return Ok(CheckReport::new(id, Verdict::Inconclusive, f64::NAN, rhs)
            .param("variation_status", json!(var.status))
            .note("variation did not settle; bounded variation unconfirmed"));
    }
    let md = integrate_md(path, path.a(), path.b(), &opts.improper(), &opts.schedule)?;
    let est = &md.integral.estimate;
    let lhs = est.value;
    let mut report = CheckReport::new(id, Verdict::Holds, lhs, rhs)
        .param("variation_status", json!(var.status))
        .param("integrability", est.flag.as_str())
        .param("md_nodes", md.integral.nodes)
        .param("singular_nodes", md.integral.centers.len());
    if est.flag != Integrability::Integrable {
        report.verdict = Verdict::Inconclusive;
        return Ok(report.note("md integral not confirmed integrable"));
    }
    if lhs > rhs + opts.scale(rhs) {
        report.verdict = Verdict::Violated;
        return Ok(report.note("integral of md exceeds the variation"));
    }

    // md against the difference quotient of v_f on the md grid.
    let grid: Vec<f64> = md.profile.iter().map(|e| e.x).collect();
    let vf = variation_function_with(path, &grid, opts.variation_tol, opts.max_level)?;
    let (mut max_excess, mut mismatches, mut compared) = (f64::NEG_INFINITY, 0usize, 0usize);
    for i in 1..grid.len().saturating_sub(1) {
        let e = &md.profile[i];
        if e.status != MdStatus::Converged {
            continue;
        }
        let (t0, v0) = vf.points[i - 1];
        let (t1, v1) = vf.points[i + 1];
        let slope = (v1 - v0) / (t1 - t0);
        max_excess = max_excess.max(e.value - slope);
        compared += 1;
        if (e.value - slope).abs() > opts.tol * slope.abs().max(1.0) {
            mismatches += 1;
        }
    }
    let fraction = if compared > 0 {
        mismatches as f64 / compared as f64
    } else {
        0.0
    };
    report = report
        .real_param("md_minus_vf_slope_max", max_excess)
        .real_param("vf_slope_mismatch_fraction", fraction);

    match meta.map(|m| m.is_ac) {
        Some(true) => {
            report = report.param("equality_asserted", true);
            if (lhs - rhs).abs() > opts.scale(rhs) {
                report.verdict = Verdict::Violated;
                return Ok(report.note("equality fails for an absolutely continuous path"));
            }
            if fraction > VF_MISMATCH_FRACTION {
                report.verdict = Verdict::Inconclusive;
                return Ok(report.note("md disagrees with the slope of v_f on too many grid nodes"));
            }
            Ok(report.note("equality holds"))
        }
        Some(false) => {
            report = report.param("equality_asserted", false);
            if lhs < rhs - opts.scale(rhs) {
                Ok(report.note(
                    "strict inequality; equality not asserted since property (N) or AC fails",
                ))
            } else {
                Ok(report.note("inequality holds; equality not asserted since AC fails"))
            }
        }
        None => Ok(report
            .param("equality_asserted", false)
            .note("inequality holds; equality not asserted without metadata")),
    }
}

/// AC ⇔ continuous ∧ BV ∧ (N): metadata cross-check plus numeric
/// corroboration of the leg that decides it.
pub fn check_banach_zarecki(
    path: &Path,
    meta: &FixtureMeta,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let id = TheoremId::BanachZarecki;
    let mut failing = Vec::new();
    if !meta.is_continuous {
        failing.push("continuity");
    }
    if !meta.is_bv {
        failing.push("bounded_variation");
    }
    if !meta.has_property_n {
        failing.push("property_n");
    }
    let base = |verdict, lhs, rhs| {
        CheckReport::new(id, verdict, lhs, rhs)
            .param("fixture", meta.name.as_str())
            .param("is_ac", meta.is_ac)
            .param("is_continuous", meta.is_continuous)
            .param("is_bv", meta.is_bv)
            .param("has_property_n", meta.has_property_n)
            .param("failing_legs", json!(failing))
    };
    if !meta.is_consistent() {
        return Ok(base(Verdict::Violated, f64::NAN, f64::NAN)
            .note("fixture metadata contradicts the equivalence; fixture bug"));
    }

    if meta.is_ac {
        let vi = check_variation_identity(path, Some(meta), opts)?;
        let modulus = ac_modulus(path, None, opts)?;
        let ok = vi.verdict == Verdict::Holds && modulus.evidence != AcEvidence::NotAcEvidence;
        let verdict = if ok {
            Verdict::Holds
        } else {
            Verdict::Inconclusive
        };
        return Ok(base(verdict, vi.lhs, vi.rhs)
            .param("ac_evidence", json!(modulus.evidence))
            .note(if ok {
                "all three legs hold and the variation identity holds with equality"
            } else {
                "numeric corroboration of the AC case incomplete"
            }));
    }
    if !meta.is_bv {
        let var = variation(path, opts.variation_tol, opts.max_level)?;
        let ok = matches!(var.status, Status::Diverging | Status::Infinite);
        let verdict = if ok {
            Verdict::Holds
        } else {
            Verdict::Inconclusive
        };
        return Ok(base(verdict, f64::NAN, var.value)
            .param("variation_status", json!(var.status))
            .note(if ok {
                "not BV, hence not AC; variation diverging confirms"
            } else {
                "not BV per metadata but the variation trace did not diverge"
            }));
    }
    if !meta.has_property_n && meta.is_continuous {
        let vi = check_variation_identity(path, Some(meta), opts)?;
        let modulus = ac_modulus(path, None, opts)?;
        let gap = vi.verdict == Verdict::Holds && vi.lhs < vi.rhs - opts.scale(vi.rhs);
        let verdict = if gap {
            Verdict::Holds
        } else {
            Verdict::Inconclusive
        };
        return Ok(base(verdict, vi.lhs, vi.rhs)
            .param("ac_evidence", json!(modulus.evidence))
            .real_param("strict_gap", vi.rhs - vi.lhs)
            .note(if gap {
                "continuous and BV without property (N), hence not AC; strict gap between the md integral and the variation confirms"
            } else {
                "property (N) fails per metadata but no strict gap was measured"
            }));
    }
    Ok(base(Verdict::Inconclusive, f64::NAN, f64::NAN)
        .note("discontinuous path; no numeric corroboration"))
}

/// md ≡ 0 on an absolutely continuous path forces it to be constant.
///
/// With `hypothesis_free` the AC guard is dropped and a large diameter is
/// reported as a counterexample note instead of a verdict.
pub fn check_constancy(
    path: &Path,
    meta: Option<&FixtureMeta>,
    hypothesis_free: bool,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let id = TheoremId::Constancy;
    let ac = meta.map(|m| m.is_ac);
    if ac != Some(true) && !hypothesis_free {
        return Ok(CheckReport::skipped(
            id,
            "hypothesis unmet: path not known to be absolutely continuous",
        ));
    }
    let grid = uniform_grid(path.a(), path.b(), opts.grid_cells);
    let profile = md_profile(path, &grid, &opts.schedule)?;
    let positive = profile
        .iter()
        .filter(|e| e.status == MdStatus::Converged && e.value > opts.zero_tol)
        .count();
    let unresolved = profile
        .iter()
        .filter(|e| e.status != MdStatus::Converged)
        .count();
    let zero_fraction = 1.0 - (positive + unresolved) as f64 / profile.len() as f64;
    let md_vanishes = if ac == Some(true) {
        positive == 0 && unresolved == 0
    } else {
        positive == 0 && (unresolved as f64) <= VF_MISMATCH_FRACTION * profile.len() as f64
    };
    if !md_vanishes {
        return Ok(
            CheckReport::new(id, Verdict::Inconclusive, f64::NAN, opts.tol)
                .real_param("md_zero_fraction", zero_fraction)
                .note("hypothesis unmet: md is not zero on the grid"),
        );
    }
    let lhs = grid_diameter(path, &grid)?;
    let rhs = opts.tol;
    let report = CheckReport::new(id, Verdict::Holds, lhs, rhs)
        .real_param("md_zero_fraction", zero_fraction);
    if ac == Some(true) {
        return Ok(if lhs <= rhs {
            report.note("md vanishes and the path is constant")
        } else {
            CheckReport {
                verdict: Verdict::Violated,
                ..report
            }
            .note("md vanishes on an AC path yet the image is not a point")
        });
    }
    let note = if lhs > rhs {
        format!(
            "counterexample without the AC hypothesis: md vanishes on {:.1}% of the grid yet the image has diameter {lhs}",
            100.0 * zero_fraction
        )
    } else {
        "md vanishes and the sampled image is a point; AC not known".to_string()
    };
    Ok(CheckReport {
        verdict: Verdict::Inconclusive,
        ..report
    }
    .note(&note))
}

fn grid_diameter(path: &Path, grid: &[f64]) -> Result<f64> {
    let pts = grid
        .iter()
        .map(|&t| path.evaluate(t))
        .collect::<Result<Vec<_>>>()?;
    let idx: Vec<usize> = (0..pts.len()).collect();
    let rows = par_map(&idx, |&i| -> Result<f64> {
        let mut m = 0.0f64;
        for j in i + 1..pts.len() {
            m = m.max(path.space().distance(&pts[i], &pts[j])?);
        }
        Ok(m)
    });
    rows.into_iter().try_fold(0.0f64, |acc, r| Ok(acc.max(r?)))
}

/// `∫_A md = H¹(f(A))` for injective absolutely continuous paths.
pub fn check_injective_identity(
    path: &Path,
    meta: Option<&FixtureMeta>,
    a_set: &IntervalUnion,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let id = TheoremId::InjectiveIdentity;
    let Some(meta) = meta else {
        return Ok(CheckReport::skipped(
            id,
            "injectivity unknown for sampled input",
        ));
    };
    if !meta.is_injective {
        return Err(Error::NotInjective(format!(
            "fixture `{}` is not one-to-one",
            meta.name
        )));
    }
    a_set.check_inside(path.domain())?;
    let (lhs, flag) = md_integral_over(path, a_set, opts)?;
    let cover = cover_over(path, a_set, opts)?;
    let rhs = cover.upper;
    let mut report = CheckReport::new(id, Verdict::Holds, lhs, rhs)
        .param("integrability", flag.as_str())
        .param("cover_status", json!(cover.status))
        .param("components", json!(a_set.components()));
    if flag != Integrability::Integrable || cover.status != Status::Converged {
        report.verdict = Verdict::Inconclusive;
        return Ok(report.note("md integral or cover estimate did not settle"));
    }
    if meta.is_ac {
        if (lhs - rhs).abs() > opts.scale(rhs) {
            report.verdict = Verdict::Violated;
            return Ok(report.note("md integral and Hausdorff length differ"));
        }
        Ok(report.note("md integral equals the Hausdorff length of the image"))
    } else if lhs > rhs + opts.scale(rhs) {
        report.verdict = Verdict::Violated;
        Ok(report.note("md integral exceeds the Hausdorff length of the image"))
    } else {
        Ok(report.note("inequality leg only; AC fails"))
    }
}

/// `m*(v_f(A)) ≥ ∫_A md`, with equality for absolutely continuous paths.
pub fn check_vf_image(
    path: &Path,
    meta: Option<&FixtureMeta>,
    a_set: &IntervalUnion,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let id = TheoremId::VfImage;
    a_set.check_inside(path.domain())?;
    if meta.is_some_and(|m| !m.is_bv) {
        return Ok(CheckReport::skipped(
            id,
            "hypothesis unmet: path has unbounded variation",
        ));
    }
    let mut ends: Vec<f64> = a_set
        .components()
        .iter()
        .flat_map(|&(c, d)| [c, d])
        .collect();
    ends.dedup();
    let rhs = if ends.is_empty() {
        0.0
    } else {
        let vf = variation_function_with(path, &ends, opts.variation_tol, opts.max_level)?;
        if vf.unbounded || !variation_settled(&vf.total, opts) {
            return Ok(CheckReport::skipped(id, "variation did not settle"));
        }
        let at = |t: f64| {
            vf.points
                .iter()
                .find(|p| p.0 == t)
                .map(|p| p.1)
                .unwrap_or(f64::NAN)
        };
        a_set
            .components()
            .iter()
            .map(|&(c, d)| at(d) - at(c))
            .sum::<f64>()
    };
    let (lhs, flag) = md_integral_over(path, a_set, opts)?;
    let mut report = CheckReport::new(id, Verdict::Holds, lhs, rhs)
        .param("integrability", flag.as_str())
        .param("vf_image_measure", real(rhs));
    if flag != Integrability::Integrable {
        report.verdict = Verdict::Inconclusive;
        return Ok(report.note("md integral not confirmed integrable"));
    }
    if lhs > rhs + opts.scale(rhs) {
        report.verdict = Verdict::Violated;
        return Ok(report.note("md integral exceeds the measure of v_f(A)"));
    }
    if meta.is_some_and(|m| m.is_ac) {
        if (lhs - rhs).abs() > opts.scale(rhs) {
            report.verdict = Verdict::Violated;
            return Ok(report.note("equality fails for an absolutely continuous path"));
        }
        return Ok(report.note("equality holds"));
    }
    Ok(report.note("inequality leg asserted"))
}
