//! Numerical laboratory for the quasilinear operator
//!
//! ```text
//! Δ_H u = div(H(|∇u|) ∇u),   H(t) = h(t) / t,   F(t) = ∫₀ᵗ h
//! ```
//!
//! The crate computes H-potentials of convex rings by direct minimisation
//! of `∫ F(|∇v|)`, constructs explicit sub-solution barriers `f(w)` from the
//! harmonic potential `w` of a ring, and measures the quantities that enter
//! a Hopf-type boundary estimate: gradient bounds, the growth constant of a
//! solution at a boundary point, and the comparison principle.
//!
//! Everything here is pure computation over immutable inputs. The crate is
//! `no_std` and needs only `alloc`; file formats, configuration and the
//! command line live in the companion `hopf-lab` crate.
//!
//! Module map:
//!
//! * [`orlicz`]: the structural function `F` and its companions
//!   `h = F'`, `g = h⁻¹`, `F*`, `R = F''/F'`, plus condition certificates.
//! * [`geometry`]: Dini moduli, convex domains, the Dini cap and convex rings.
//! * [`field`]: grid topology of a ring and scalar fields on it.
//! * [`solver`]: energy minimisation, harmonic solves, level-set diagnostics
//!   and gradient flow lines.
//! * [`barrier`]: the majorant `ζ(w)`, the explicit barrier profile and its
//!   sub-solution certificate.
//! * [`hopf`]: Hopf constants, comparison and outer Lipschitz checks.

#![no_std]
#![forbid(unsafe_code)]
// NaN must fail range checks, and the kernels index several arrays in step.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod barrier;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod hopf;
pub mod interp;
pub mod linalg;
pub mod orlicz;
pub mod quad;
pub mod solver;

pub use barrier::{BarrierError, BarrierProfile, ZetaProfile, ZetaSource};
pub use field::{CellKind, ScalarField, Side, Topology};
pub use geometry::{ConvexDomain, ConvexRing, DiniModulus, GeometryError};
pub use grid::{Dir, Grid, Point};
pub use hopf::{HopfError, HopfReport};
pub use orlicz::{ConditionId, ConditionReport, OrliczError, OrliczFunction};
pub use solver::{SolveError, SolveOptions};
