//! Interval unions, Hausdorff length of images, the Banach indicatrix and
//! grid integration.

mod hausdorff;
mod indicatrix;
mod integrate;
mod interval_union;

pub use hausdorff::{
    default_delta_schedule, hausdorff_length, hausdorff_length_with, CoverEstimate, CoverOptions,
};
pub use indicatrix::{banach_indicatrix, IndicatrixSample};
pub use integrate::{
    integrate_grid, integrate_grid_around, integrate_improper, integrate_md, md_integrand,
    ImproperIntegral, ImproperOptions, Integrability, IntegralEstimate, MdIntegral, INTEGRABLE_TOL,
};
pub use interval_union::{outer_measure, IntervalUnion};
