use serde_json::json;

use super::{cover_over, md_integral_over, variation_settled, CheckOptions};
use crate::derivative::{md_profile, MdEstimate, MdStatus};
use crate::error::Result;
use crate::fixtures::FixtureMeta;
use crate::measures::{outer_measure, Integrability, IntervalUnion};
use crate::numeric::{uniform_grid, Status};
use crate::path::Path;
use crate::report::{CheckReport, TheoremId, Verdict};
use crate::variation::variation;

/// Relative slack on `K` when testing the hypothesis `md ≤ K`.
const BOUND_SLACK: f64 = 1e-9;

/// Growth of the largest quotient from the coarse half of the step trace to
/// the fine half beyond which md counts as unbounded.
const TAIL_GROWTH: f64 = 2.0;

/// An upper estimate of the upper metric derivative at one node: the
/// converged value, `+∞`, or the largest quotient seen when the limit is
/// undecided and the quotients do not keep growing.
fn node_bound(e: &MdEstimate) -> f64 {
    match e.status {
        MdStatus::Converged => e.value,
        MdStatus::Infinite => f64::INFINITY,
        _ => {
            let mut qs: Vec<(f64, f64)> = e.step_trace.iter().map(|p| (p.0.abs(), p.1)).collect();
            qs.sort_by(|x, y| y.0.total_cmp(&x.0));
            let half = qs.len() / 2;
            let coarse = qs[..half].iter().map(|p| p.1).fold(0.0, f64::max);
            let fine = qs[half..].iter().map(|p| p.1).fold(0.0, f64::max);
            if fine > TAIL_GROWTH * coarse {
                f64::INFINITY
            } else {
                coarse.max(fine)
            }
        }
    }
}

/// Grid nodes on each component, proportional to its share of `[a, b]`.
fn grid_over(path: &Path, e: &IntervalUnion, opts: &CheckOptions) -> Vec<f64> {
    let len = path.domain().len().max(f64::MIN_POSITIVE);
    let mut nodes = Vec::new();
    for &(c, d) in e.components() {
        if c == d {
            nodes.push(c);
            continue;
        }
        let cells = ((opts.grid_cells as f64 * (d - c) / len).ceil() as usize).max(16);
        nodes.extend(uniform_grid(c, d, cells));
    }
    nodes
}

/// Largest md bound over the uniform grid of `[a, b]`.
pub(crate) fn max_md_on_grid(path: &Path, opts: &CheckOptions) -> Result<f64> {
    let grid = uniform_grid(path.a(), path.b(), opts.grid_cells);
    let profile = md_profile(path, &grid, &opts.schedule)?;
    Ok(profile.iter().map(node_bound).fold(0.0, f64::max))
}

/// `H¹(f(E)) ≤ K·m*(E)` whenever `md ≤ K` on `E`.
pub fn check_fundamental_lemma(
    path: &Path,
    e: &IntervalUnion,
    k: f64,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let id = TheoremId::FundamentalLemma;
    e.check_inside(path.domain())?;
    let measure = outer_measure(e);
    if !(k >= 0.0 && k.is_finite()) {
        return Ok(
            CheckReport::skipped(id, "hypothesis unmet: no finite bound K on md")
                .real_param("k", k),
        );
    }
    let grid = grid_over(path, e, opts);
    let profile = md_profile(path, &grid, &opts.schedule)?;
    let worst = profile.iter().map(node_bound).fold(0.0, f64::max);
    let rhs = k * measure;
    if worst > k * (1.0 + BOUND_SLACK) {
        return Ok(CheckReport::new(id, Verdict::Inconclusive, f64::NAN, rhs)
            .real_param("k", k)
            .real_param("max_md", worst)
            .note("hypothesis unmet: md exceeds K on the grid of E"));
    }
    let cover = cover_over(path, e, opts)?;
    let lhs = cover.upper;
    let mut report = CheckReport::new(id, Verdict::Holds, lhs, rhs)
        .real_param("k", k)
        .real_param("max_md", worst)
        .real_param("outer_measure", measure)
        .real_param("delta", cover.delta)
        .param("cover_status", json!(cover.status))
        .param("components", e.len());
    match cover.status {
        Status::Converged => {}
        Status::Infinite => {
            report.verdict = Verdict::Violated;
            return Ok(report
                .note("cover estimate is infinite under a finite Lipschitz bound; estimator bug"));
        }
        _ => {
            report.verdict = Verdict::Inconclusive;
            return Ok(report.note("cover estimate did not settle"));
        }
    }
    if lhs > rhs * (1.0 + opts.tol) {
        report.verdict = Verdict::Violated;
        return Ok(report.note("Hausdorff length exceeds K times the measure of E"));
    }
    Ok(report.note("Hausdorff length within K times the measure of E"))
}

/// `H¹(f(E)) ≤ ∫_E md`.
pub fn check_image_bound(
    path: &Path,
    meta: Option<&FixtureMeta>,
    e: &IntervalUnion,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let id = TheoremId::ImageBound;
    e.check_inside(path.domain())?;
    if let Some(m) = meta {
        if e.components()
            .iter()
            .any(|&(c, d)| m.md_singular.meets_infinitely(c, d) == Some(true))
        {
            return Ok(CheckReport::skipped(
                id,
                "hypothesis unmet: md is not finite on E (singular set meets E in infinitely many points)",
            ));
        }
    }
    let (rhs, flag) = md_integral_over(path, e, opts)?;
    let cover = cover_over(path, e, opts)?;
    let lhs = cover.upper;
    let mut report = CheckReport::new(id, Verdict::Holds, lhs, rhs)
        .param("integrability", flag.as_str())
        .param("cover_status", json!(cover.status))
        .real_param("delta", cover.delta)
        .param("components", e.len());
    if flag != Integrability::Integrable {
        report.verdict = Verdict::Inconclusive;
        return Ok(report.note("md integral not confirmed integrable"));
    }
    if cover.status != Status::Converged {
        report.verdict = Verdict::Inconclusive;
        return Ok(report.note("cover estimate did not settle"));
    }
    if lhs > rhs + opts.scale(rhs) {
        report.verdict = Verdict::Violated;
        return Ok(report.note("Hausdorff length exceeds the md integral"));
    }
    Ok(report.note("Hausdorff length bounded by the md integral"))
}

/// `E₀`: the union of `[x − r, x + r]` over grid nodes `x` where md
/// converged to at most `zero_tol` and every scheduled quotient up to `r`
/// vanished.
pub fn zero_set(path: &Path, opts: &CheckOptions) -> Result<IntervalUnion> {
    let grid = uniform_grid(path.a(), path.b(), opts.grid_cells);
    let profile = md_profile(path, &grid, &opts.schedule)?;
    let (a, b) = (path.a(), path.b());
    let pieces: Vec<(f64, f64)> = profile
        .iter()
        .filter(|e| e.status == MdStatus::Converged && e.value <= opts.zero_tol && e.zero_run > 0.0)
        .map(|e| ((e.x - e.zero_run).max(a), (e.x + e.zero_run).min(b)))
        .collect();
    IntervalUnion::merged(pieces)
}

/// `H¹(f({md = 0})) = 0`, measured on the detected zero region `E₀`.
pub fn check_sard(path: &Path, opts: &CheckOptions) -> Result<CheckReport> {
    let id = TheoremId::Sard;
    let e0 = zero_set(path, opts)?;
    let var = variation(path, opts.variation_tol, opts.max_level)?;
    let v = if variation_settled(&var, opts) {
        var.value
    } else {
        0.0
    };
    let rhs = opts.tol * (1.0 + v);
    let mut report = CheckReport::new(id, Verdict::Holds, 0.0, rhs)
        .param("zero_components", e0.len())
        .real_param("zero_measure", outer_measure(&e0))
        .param("variation_status", json!(var.status));
    if e0.is_empty() {
        return Ok(report.note("no md = 0 region detected; holds vacuously"));
    }
    let cover = cover_over(path, &e0, opts)?;
    report.lhs = cover.upper;
    report.slack = rhs - cover.upper;
    report = report.param("cover_status", json!(cover.status));
    if cover.status != Status::Converged {
        report.verdict = Verdict::Inconclusive;
        return Ok(report.note("cover estimate of the zero region did not settle"));
    }
    if cover.upper > rhs {
        report.verdict = Verdict::Violated;
        return Ok(report.note("image of the md = 0 region has positive length"));
    }
    Ok(report.note("image of the md = 0 region is length-null"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fixture, Params};

    fn opts() -> CheckOptions {
        CheckOptions {
            grid_cells: 1024,
            ..CheckOptions::default()
        }
    }

    #[test]
    fn fundamental_lemma_segment_and_circle() {
        let seg = fixture("segment", &Params::new()).unwrap();
        let e = IntervalUnion::single(0.0, 1.0).unwrap();
        let r = check_fundamental_lemma(&seg.path, &e, 1.0, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
        assert!((r.lhs - 1.0).abs() <= 1e-6);

        let circle = fixture("circle", &Params::new()).unwrap();
        let e = IntervalUnion::single(0.0, std::f64::consts::PI).unwrap();
        let r = check_fundamental_lemma(&circle.path, &e, 1.0, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
    }

    #[test]
    fn fundamental_lemma_constant_with_zero_bound() {
        let c = fixture("constant", &Params::new()).unwrap();
        let e = IntervalUnion::single(0.0, 1.0).unwrap();
        let r = check_fundamental_lemma(&c.path, &e, 0.0, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
    }

    #[test]
    fn fundamental_lemma_unmet_bound_is_inconclusive() {
        let seg = fixture("segment", &Params::new()).unwrap();
        let e = IntervalUnion::single(0.0, 1.0).unwrap();
        let r = check_fundamental_lemma(&seg.path, &e, 0.5, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let r = check_fundamental_lemma(&seg.path, &e, f64::INFINITY, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn image_bound_examples() {
        let seg = fixture("segment", &Params::new().with("v", "3,0")).unwrap();
        let e = IntervalUnion::single(0.0, 1.0).unwrap();
        let r = check_image_bound(&seg.path, Some(&seg.meta), &e, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
        assert!((r.lhs - 3.0).abs() < 1e-6 && (r.rhs - 3.0).abs() < 1e-6);

        let s = fixture("sqrt", &Params::new()).unwrap();
        let r = check_image_bound(&s.path, Some(&s.meta), &e, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
        assert!((r.lhs - 1.0).abs() < 1e-3, "{r:?}");
        assert!((r.rhs - 1.0).abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn image_bound_cantor_on_removed_intervals() {
        let c = fixture("cantor", &Params::new()).unwrap();
        let mut gaps = Vec::new();
        for k in 1..=3 {
            let w = 3f64.powi(-k);
            for j in 0..3usize.pow(k as u32 - 1) {
                let left = 3.0 * w * j as f64;
                let gap = crate::cantor::cantor_gap(left + 1.5 * w).unwrap();
                if (gap.0 - (left + w)).abs() < 1e-12 {
                    gaps.push((left + w, left + 2.0 * w));
                }
            }
        }
        gaps.sort_by(|x, y| x.0.total_cmp(&y.0));
        assert_eq!(gaps.len(), 7);
        let e = IntervalUnion::new(gaps).unwrap();
        let r = check_image_bound(&c.path, Some(&c.meta), &e, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
        assert!(r.lhs <= 1e-9 && r.rhs <= 1e-9, "{r:?}");

        let whole = IntervalUnion::single(0.0, 1.0).unwrap();
        let r = check_image_bound(&c.path, Some(&c.meta), &whole, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn sard_examples() {
        let hold = fixture("segment_hold", &Params::new()).unwrap();
        let e0 = zero_set(&hold.path, &opts()).unwrap();
        let &(lo, hi) = e0.components().first().unwrap();
        assert!(lo > 1.0 && lo < 1.01 && hi == 2.0, "{e0:?}");
        let r = check_sard(&hold.path, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.lhs <= 1e-6, "{r:?}");

        let circle = fixture("circle", &Params::new()).unwrap();
        let r = check_sard(&circle.path, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.params["zero_components"], 0);

        let cantor = fixture("cantor", &Params::new()).unwrap();
        let r = check_sard(&cantor.path, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
        assert!(r.params["zero_components"].as_u64().unwrap() > 10);
        assert!(r.lhs <= 1e-6);
    }

    #[test]
    fn max_md_matches_speed() {
        let seg = fixture("segment", &Params::new().with("v", "3,4")).unwrap();
        let k = max_md_on_grid(&seg.path, &opts()).unwrap();
        assert!((k - 5.0).abs() < 1e-9);
        let s = fixture("snowflake_id", &Params::new()).unwrap();
        assert!(max_md_on_grid(&s.path, &opts()).unwrap().is_infinite());
        let c = fixture("cantor", &Params::new()).unwrap();
        assert!(max_md_on_grid(&c.path, &opts()).unwrap().is_infinite());
        let hold = fixture("segment_hold", &Params::new()).unwrap();
        assert_eq!(max_md_on_grid(&hold.path, &opts()).unwrap(), 1.0);
    }
}
