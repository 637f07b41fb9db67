use serde::Serialize;
use serde_json::json;

use super::{variation_settled, CheckOptions};
use crate::derivative::{metric_derivative, MdStatus};
use crate::error::Result;
use crate::fixtures::FixtureMeta;
use crate::measures::{integrate_improper, md_integrand, ImproperIntegral, Integrability};
use crate::numeric::{par_map, uniform_grid, RefinementEstimate, Status};
use crate::path::{compose, Path, RealFunction};
use crate::report::{CheckReport, TheoremId, Verdict};
use crate::variation::variation;

/// Interior spot-check points for the chain rule.
const SPOT_POINTS: usize = 100;

/// Numeric pieces of the composition check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionAnalysis {
    /// `∫ h` with `h(x) = md(f, g(x))·|g′(x)|` and `h = 0` where `g′`
    /// vanishes.
    pub integral: ImproperIntegral,
    pub variation: RefinementEstimate,
    /// Largest `|md(f∘g, x) − h(x)|` over spot points where both converged.
    pub chain_rule_max_deviation: f64,
    pub chain_rule_points: usize,
    /// Spot points where `md(f∘g, x)` converged and `|g′(x)| > deriv_tol`
    /// but `md(f, g(x))` did not.
    pub differentiability_failures: usize,
}

/// `h(x)` and whether the outer derivative converged at `g(x)`.
fn integrand(f: &Path, g: &RealFunction, x: f64, opts: &CheckOptions) -> Result<(f64, MdStatus)> {
    let gp = g.derivative(x)?;
    let md = metric_derivative(f, g.evaluate(x)?, &opts.schedule)?;
    let h = if gp.abs() <= opts.deriv_tol {
        0.0
    } else {
        md_integrand(&md) * gp.abs()
    };
    Ok((h, md.status))
}

pub fn analyze_composition(
    f: &Path,
    g: &RealFunction,
    opts: &CheckOptions,
) -> Result<CompositionAnalysis> {
    let fg = compose(f, g)?;
    let dom = g.domain();
    let grid = uniform_grid(dom.lo, dom.hi, opts.grid_cells);
    let samples = par_map(&grid, |&x| integrand(f, g, x, opts))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let base: Vec<(f64, f64)> = grid.iter().zip(&samples).map(|(&x, s)| (x, s.0)).collect();
    // Singularities of the outer factor stay singular for the grading even
    // where the g′ = 0 convention zeroes h.
    let centers: Vec<f64> = grid
        .iter()
        .zip(&samples)
        .filter(|(_, s)| s.1 != MdStatus::Converged)
        .map(|(&x, _)| x)
        .collect();
    let integral = integrate_improper(&base, &centers, &opts.improper(), |x| {
        integrand(f, g, x, opts).map(|s| s.0)
    })?;
    let var = variation(&fg, opts.variation_tol, opts.max_level)?;

    let spots: Vec<f64> = (1..=SPOT_POINTS)
        .map(|i| dom.lo + dom.len() * i as f64 / (SPOT_POINTS + 1) as f64)
        .collect();
    let spot = par_map(&spots, |&x| -> Result<(Option<f64>, bool)> {
        let outer = metric_derivative(&fg, x, &opts.schedule)?;
        let gp = g.derivative(x)?;
        let inner = metric_derivative(f, g.evaluate(x)?, &opts.schedule)?;
        let converged = outer.status == MdStatus::Converged;
        let differentiability_fail =
            converged && gp.abs() > opts.deriv_tol && inner.status != MdStatus::Converged;
        let h = if gp.abs() <= opts.deriv_tol {
            Some(0.0)
        } else {
            inner.finite_value().map(|v| v * gp.abs())
        };
        let dev = match (outer.finite_value(), h) {
            (Some(o), Some(h)) => Some((o - h).abs()),
            _ => None,
        };
        Ok((dev, differentiability_fail))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let devs: Vec<f64> = spot.iter().filter_map(|s| s.0).collect();
    Ok(CompositionAnalysis {
        integral,
        variation: var,
        chain_rule_max_deviation: devs.iter().copied().fold(0.0, f64::max),
        chain_rule_points: devs.len(),
        differentiability_failures: spot.iter().filter(|s| s.1).count(),
    })
}

/// For AC `f` and `g`, `f∘g` is AC iff `md(f, g(x))·|g′(x)|` is integrable.
pub fn check_composition(
    f: &Path,
    f_meta: Option<&FixtureMeta>,
    g: &RealFunction,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let id = TheoremId::Composition;
    if f_meta.is_some_and(|m| !m.is_ac) || !g.is_absolutely_continuous() {
        return Ok(CheckReport::skipped(
            id,
            "hypothesis unmet: outer path or inner function not absolutely continuous",
        ));
    }
    let an = analyze_composition(f, g, opts)?;
    let est = &an.integral.estimate;
    let (lhs, rhs) = (est.value, an.variation.value);
    let mut report = CheckReport::new(id, Verdict::Inconclusive, lhs, rhs)
        .param("inner", g.name())
        .param("h_integrability", est.flag.as_str())
        .param("variation_status", json!(an.variation.status))
        .real_param("chain_rule_max_deviation", an.chain_rule_max_deviation)
        .param("chain_rule_points", an.chain_rule_points)
        .param("differentiability_failures", an.differentiability_failures)
        .param("singular_nodes", an.integral.centers.len());
    if f_meta.is_none() {
        report = report.note("AC of the outer path unknown");
    }
    let settled = variation_settled(&an.variation, opts);
    let diverging = matches!(an.variation.status, Status::Diverging | Status::Infinite);
    match est.flag {
        Integrability::Integrable if settled => {
            if (lhs - rhs).abs() <= opts.scale(rhs) {
                report.verdict = Verdict::Holds;
                Ok(report
                    .note("h integrable and the variation of the composition equals its integral"))
            } else {
                report.verdict = Verdict::Violated;
                Ok(report.note(
                    "h integrable but its integral differs from the variation of the composition",
                ))
            }
        }
        Integrability::NonIntegrable if diverging => {
            report.verdict = Verdict::Holds;
            Ok(report.note("non-integrable ⇔ not BV"))
        }
        Integrability::Integrable if diverging => {
            Ok(report.note("legs disagree: h integrable but the variation is diverging"))
        }
        Integrability::NonIntegrable if settled => {
            Ok(report.note("legs disagree: h non-integrable but the variation settled"))
        }
        _ => Ok(report.note("integrability or variation undecided")),
    }
}
