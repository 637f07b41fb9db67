//! Numeric verdicts for the theorems about metric-space paths.
//!
//! Every check is hypothesis-guarded: when a hypothesis cannot be confirmed
//! from metadata or numerics the verdict is `Inconclusive`. `Violated` is
//! reserved for a negative slack beyond tolerance with both sides settled.

mod absolute;
mod composition;
mod covering;
mod identity;

pub use absolute::{ac_modulus, check_ac_modulus, AcEvidence, AcModulus};
pub use composition::{analyze_composition, check_composition, CompositionAnalysis};
pub use covering::{check_fundamental_lemma, check_image_bound, check_sard, zero_set};
pub use identity::{
    check_banach_zarecki, check_constancy, check_injective_identity, check_variation_identity,
    check_vf_image,
};

use crate::derivative::StepSchedule;
use crate::error::{Error, Result};
use crate::fixtures::{Composition, Fixture, FixtureMeta};
use crate::measures::{ImproperOptions, IntervalUnion};
use crate::path::{Path, RealFunction};
use crate::report::{CheckReport, TheoremId};
use crate::variation::{DEFAULT_MAX_LEVEL, DEFAULT_TOL};

/// Tolerances and grid sizes shared by all checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOptions {
    /// Comparison tolerance, relative with floor 1.
    pub tol: f64,
    /// Convergence tolerance for the variation refinement.
    pub variation_tol: f64,
    pub max_level: u32,
    /// Cells of the uniform md grid.
    pub grid_cells: usize,
    pub schedule: StepSchedule,
    /// md values at or below this count as zero.
    pub zero_tol: f64,
    /// `|g′| ≤ deriv_tol` triggers the `h = 0` convention.
    pub deriv_tol: f64,
    /// Explicit δ schedule for cover estimates; default is image-scaled.
    pub delta_schedule: Option<Vec<f64>>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            tol: 1e-3,
            variation_tol: DEFAULT_TOL,
            max_level: DEFAULT_MAX_LEVEL,
            grid_cells: 4096,
            schedule: StepSchedule::default(),
            zero_tol: 1e-9,
            deriv_tol: 1e-9,
            delta_schedule: None,
        }
    }
}

impl CheckOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tol {} must be positive",
                self.tol
            )));
        }
        if self.grid_cells < 64 {
            return Err(Error::InvalidParameter(format!(
                "grid density {} is below 64",
                self.grid_cells
            )));
        }
        Ok(())
    }

    pub(crate) fn improper(&self) -> ImproperOptions {
        ImproperOptions {
            base_cells: self.grid_cells,
            ..ImproperOptions::default()
        }
    }

    /// `|lhs − rhs|`-style comparison scale.
    pub(crate) fn scale(&self, rhs: f64) -> f64 {
        self.tol * rhs.abs().max(1.0)
    }
}

/// A path with whatever is known about it.
#[derive(Debug, Clone)]
pub struct Subject {
    pub path: Path,
    /// `None` for sampled input, whose properties are unknown.
    pub meta: Option<FixtureMeta>,
    pub composition: Option<Composition>,
}

impl From<Fixture> for Subject {
    fn from(f: Fixture) -> Self {
        Subject {
            path: f.path,
            meta: Some(f.meta),
            composition: f.composition,
        }
    }
}

impl Subject {
    pub fn sampled(path: Path) -> Self {
        Subject {
            path,
            meta: None,
            composition: None,
        }
    }

    fn whole(&self) -> Result<IntervalUnion> {
        IntervalUnion::single(self.path.a(), self.path.b())
    }
}

/// Runs one check with its default sets: `E = A = [a, b]`,
/// `K = 1.001 · max md` on the grid, and `g = identity` when the subject is
/// not a composition.
pub fn run_check(id: TheoremId, subject: &Subject, opts: &CheckOptions) -> Result<CheckReport> {
    opts.validate()?;
    let path = &subject.path;
    let meta = subject.meta.as_ref();
    let report = match id {
        TheoremId::VariationIdentity => check_variation_identity(path, meta, opts)?,
        TheoremId::BanachZarecki => match meta {
            Some(m) => check_banach_zarecki(path, m, opts)?,
            None => CheckReport::skipped(id, "no analytic metadata for sampled input"),
        },
        TheoremId::FundamentalLemma => {
            let k = 1.001 * covering::max_md_on_grid(path, opts)?;
            check_fundamental_lemma(path, &subject.whole()?, k, opts)?
        }
        TheoremId::ImageBound => check_image_bound(path, meta, &subject.whole()?, opts)?,
        TheoremId::Sard => check_sard(path, opts)?,
        TheoremId::AcModulus => check_ac_modulus(path, meta, None, opts)?,
        TheoremId::Constancy => check_constancy(path, meta, false, opts)?,
        TheoremId::InjectiveIdentity => {
            check_injective_identity(path, meta, &subject.whole()?, opts)?
        }
        TheoremId::VfImage => check_vf_image(path, meta, &subject.whole()?, opts)?,
        TheoremId::Composition => match &subject.composition {
            Some(c) => check_composition(&c.outer, Some(&c.outer_meta), &c.inner, opts)?,
            None => {
                let g = RealFunction::identity(path.a(), path.b())?;
                check_composition(path, meta, &g, opts)?
            }
        },
    };
    Ok(if meta.is_none() {
        report.note("sampled input: estimates are interpolation-dependent")
    } else {
        report
    })
}

/// Runs `ids` concurrently and returns reports in theorem-id order.
/// Hypothesis errors become inconclusive reports; other errors propagate.
pub fn run_checks(
    ids: &[TheoremId],
    subject: &Subject,
    opts: &CheckOptions,
) -> Result<Vec<CheckReport>> {
    let mut ids = ids.to_vec();
    ids.sort();
    ids.dedup();
    let results: Vec<Result<CheckReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = ids
            .iter()
            .map(|&id| scope.spawn(move || run_check(id, subject, opts)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("check thread panicked"))
            .collect()
    });
    ids.iter()
        .zip(results)
        .map(|(&id, r)| match r {
            Err(Error::NotInjective(why)) => Ok(CheckReport::skipped(
                id,
                &format!("hypothesis unmet: {why}"),
            )),
            other => other,
        })
        .collect()
}

/// `∫_E md` summed over the components of `E`, with the weakest verdict.
pub(crate) fn md_integral_over(
    path: &Path,
    e: &IntervalUnion,
    opts: &CheckOptions,
) -> Result<(f64, crate::measures::Integrability)> {
    use crate::measures::{integrate_md, Integrability};
    e.check_inside(path.domain())?;
    let total_len = crate::measures::outer_measure(e).max(f64::MIN_POSITIVE);
    let (mut sum, mut flag) = (0.0, Integrability::Integrable);
    for &(c, d) in e.components() {
        let cells = ((opts.grid_cells as f64 * (d - c) / total_len).ceil() as usize).max(64);
        let improper = ImproperOptions {
            base_cells: cells,
            ..opts.improper()
        };
        // One-sided md at the component ends; the ends are null anyway.
        let piece = path.restrict(c, d)?;
        let md = integrate_md(&piece, c, d, &improper, &opts.schedule)?;
        sum += md.integral.estimate.value;
        flag = match (flag, md.integral.estimate.flag) {
            (Integrability::NonIntegrable, _) | (_, Integrability::NonIntegrable) => {
                Integrability::NonIntegrable
            }
            (Integrability::Inconclusive, _) | (_, Integrability::Inconclusive) => {
                Integrability::Inconclusive
            }
            _ => Integrability::Integrable,
        };
    }
    Ok((sum, flag))
}

/// Hausdorff length estimate of `f(E)` using the configured δ schedule.
pub(crate) fn cover_over(
    path: &Path,
    e: &IntervalUnion,
    opts: &CheckOptions,
) -> Result<crate::measures::CoverEstimate> {
    use crate::measures::{default_delta_schedule, hausdorff_length, CoverEstimate};
    use crate::numeric::Status;
    if e.is_empty() {
        return Ok(CoverEstimate {
            delta: 0.0,
            upper: 0.0,
            trace: Vec::new(),
            status: Status::Converged,
            pieces: 0,
        });
    }
    let schedule = match &opts.delta_schedule {
        Some(s) => s.clone(),
        None => default_delta_schedule(path, e)?,
    };
    hausdorff_length(path, e, &schedule)
}

/// Whether a variation estimate can serve as a settled right-hand side.
pub(crate) fn variation_settled(
    est: &crate::numeric::RefinementEstimate,
    opts: &CheckOptions,
) -> bool {
    use crate::numeric::Status;
    match est.status {
        Status::Converged => true,
        Status::Inconclusive => est.is_settled(opts.tol),
        _ => false,
    }
}
