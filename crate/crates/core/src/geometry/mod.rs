//! Dini moduli, convex domains and convex rings.

mod dini;
mod domain;
mod ring;

pub use dini::{DiniModulus, DiniReport, ModulusKind};
pub use domain::{ConvexDomain, Shape};
pub use ring::{cover, domain_convexity, make_annulus, make_rings, midpoint_convexity, rasterize, ConvexRing, ConvexityReport, Raster, Rings};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("modulus table too coarse near 0 (first sample at t = {t})")]
    TableTooCoarse { t: f64 },
    #[error("modulus is not convex-Dini")]
    NotConvexDini,
    #[error("the 3/4 ball is not inside the cap: distance {distance} < {required}")]
    ContainmentViolated { distance: f64, required: f64 },
    #[error("boundary gap {gap} below the required {required}")]
    GapTooSmall { gap: f64, required: f64 },
    #[error("domain reaches the grid border")]
    GridTooSmall,
    #[error("radii must satisfy 0 < r1 < r2 (got {r1}, {r2})")]
    BadRadii { r1: f64, r2: f64 },
}
