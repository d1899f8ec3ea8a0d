//! Verification harness: Hopf growth constants, the discrete comparison
//! principle, the Lipschitz bound from an outer convex ball, and the
//! Orlicz–Hölder inequality.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::barrier::{tune_m, verify_with, zeta_from_field, BarrierError, SubsolutionReport, CHECK_DEPTH};
use crate::field::{ScalarField, Topology};
use crate::geometry::{make_annulus, Shape};
use crate::grid::{Grid, Point};
use crate::orlicz::{orlicz_norm, orlicz_norm_conjugate, OrliczError, OrliczFunction};
use crate::solver::{gradient_bounds, level_diagnostics, operator_residual, solve_harmonic, SolveError, SolveOptions};

#[derive(Debug, Error, Clone)]
pub enum HopfError {
    #[error("no radius is resolved by at least three cells (smallest tried {r})")]
    RadiusUnresolved { r: f64 },
    #[error("precondition failed: {0}")]
    PreconditionFail(String),
    #[error("h(1) = {h1}, the Hölder check needs h(1) = 1")]
    NotNormalized { h1: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error(transparent)]
    Orlicz(#[from] OrliczError),
    #[error(transparent)]
    Barrier(#[from] BarrierError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HopfReport {
    pub boundary_point: Point,
    /// Resolved radii, strictly decreasing.
    pub radii: Vec<f64>,
    /// `(max_{B_r ∩ D} u − u(x₀)) / r` per radius.
    pub ratios: Vec<f64>,
    pub c_estimate: f64,
    pub pass: bool,
    /// Radii below three cells, skipped.
    pub unresolved: Vec<f64>,
    pub u0: f64,
}

impl HopfReport {
    pub fn radius_unresolved(&self) -> bool {
        !self.unresolved.is_empty()
    }

    /// Rows `(radius, ratio)`.
    pub fn table(&self) -> Vec<(f64, f64)> {
        self.radii.iter().copied().zip(self.ratios.iter().copied()).collect()
    }
}

fn bilinear(u: &ScalarField, p: Point) -> Option<f64> {
    let topo = u.topology();
    let g = topo.grid();
    let (fx, fy) = g.fractional(p);
    let (i0, j0) = (fx.floor(), fy.floor());
    if i0 < 0.0 || j0 < 0.0 {
        return None;
    }
    let (i0, j0) = (i0 as usize, j0 as usize);
    if i0 + 1 >= g.nx || j0 + 1 >= g.ny {
        return None;
    }
    let (tx, ty) = (fx - i0 as f64, fy - j0 as f64);
    let mut acc = 0.0;
    for (di, dj, wgt) in [(0, 0, (1.0 - tx) * (1.0 - ty)), (1, 0, tx * (1.0 - ty)), (0, 1, (1.0 - tx) * ty), (1, 1, tx * ty)] {
        let c = g.index(i0 + di, j0 + dj);
        if !topo.is_interior(c) {
            return None;
        }
        acc += wgt * u.value(c);
    }
    Some(acc)
}

/// Discrete `max_{B_r(x₀) ∩ D} u` over cell centres, boundary crossing
/// points and interpolated samples on the circle.
fn ball_max(u: &ScalarField, x0: Point, r: f64) -> f64 {
    let topo = u.topology();
    let g = topo.grid();
    let mut m = f64::NEG_INFINITY;
    for &c in topo.cells() {
        if g.center_of(c).dist(x0) <= r {
            m = m.max(u.value(c));
        }
    }
    for (l, link) in topo.links().iter().enumerate() {
        if link.point.dist(x0) <= r {
            m = m.max(u.link_value(l));
        }
    }
    let n = 720;
    for k in 0..n {
        let a = core::f64::consts::TAU * k as f64 / n as f64;
        let p = Point::new(x0.x + r * a.cos(), x0.y + r * a.sin());
        if topo.phi_at(p) < 0.0 {
            if let Some(v) = bilinear(u, p) {
                m = m.max(v);
            }
        }
    }
    m
}

/// Growth ratios `(max_{B_r ∩ D} u − u(x₀))/r` at a boundary point `x0`.
/// Radii under three cells are skipped and flagged.
pub fn hopf_constant(u: &ScalarField, x0: Point, radii: &[f64]) -> Result<HopfReport, HopfError> {
    let topo = u.topology();
    let h = topo.grid().max_spacing();
    if !(topo.phi_at(x0).abs() <= 0.5 * h) {
        return Err(HopfError::InvalidInput("x0 is not on the ring boundary"));
    }
    let nearest = topo
        .links()
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.point.dist(x0).total_cmp(&b.1.point.dist(x0)))
        .ok_or(HopfError::InvalidInput("ring has no boundary links"))?;
    let u0 = u.link_value(nearest.0);
    let mut rs: Vec<f64> = radii.iter().copied().filter(|r| r.is_finite() && *r > 0.0).collect();
    rs.sort_by(|a, b| b.total_cmp(a));
    rs.dedup();
    let (resolved, unresolved): (Vec<f64>, Vec<f64>) = rs.iter().partition(|&&r| r >= 3.0 * h);
    if resolved.is_empty() {
        return Err(HopfError::RadiusUnresolved { r: rs.last().copied().unwrap_or(0.0) });
    }
    // growth below rounding level counts as none
    let floor = 1e-12 * (1.0 + u0.abs());
    let ratios: Vec<f64> = resolved
        .iter()
        .map(|&r| {
            let rise = ball_max(u, x0, r) - u0;
            if rise.abs() <= floor { 0.0 } else { rise / r }
        })
        .collect();
    let c_estimate = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let pass = c_estimate > 0.0 && ratios.last().unwrap() >= &(0.5 * ratios[0]) && ratios.iter().all(|r| r.is_finite());
    Ok(HopfReport { boundary_point: x0, radii: resolved, ratios, c_estimate, pass, unresolved, u0 })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComparisonReport {
    pub pass: bool,
    /// `max (v − u)` over interior cells.
    pub max_violation: f64,
    pub at: Point,
    pub tol_cmp: f64,
    /// Most negative `Δ_H v` on cells at least three deep.
    pub min_sub_residual: f64,
    /// Largest `|Δ_H u|` on the same cells.
    pub max_u_residual: f64,
    pub flux_scale: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    v[v.len() / 2]
}

/// Median of `h(|∇v|)` over cells at least three deep.
fn flux_scale(v: &ScalarField, of: &OrliczFunction) -> f64 {
    let topo = v.topology();
    let (gx, gy) = crate::solver::gradient(v);
    median(topo.cells().iter().filter(|&&c| topo.depth(c) >= CHECK_DEPTH).map(|&c| of.h(gx[c].hypot(gy[c]))).filter(|x| x.is_finite()).collect())
}

/// Checks `v ≤ u + tol_cmp` on interior cells for a sub-solution `v` and a
/// solution `u` on the same ring. Boundary disorder, or `v` failing to be a
/// sub-solution, is reported as a precondition failure.
pub fn comparison_check(u: &ScalarField, v: &ScalarField, of: &OrliczFunction, tol_cmp: f64) -> Result<ComparisonReport, HopfError> {
    let topo = u.topology();
    if !Arc::ptr_eq(topo, v.topology()) {
        return Err(HopfError::InvalidInput("u and v live on different topologies"));
    }
    for (l, link) in topo.links().iter().enumerate() {
        let (a, b) = (v.link_value(l), u.link_value(l));
        if a > b + 1e-12 * (1.0 + b.abs()) {
            return Err(HopfError::PreconditionFail(format!("boundary ordering violated at ({}, {}): v = {a}, u = {b}", link.point.x, link.point.y)));
        }
    }
    let scale = flux_scale(v, of).max(flux_scale(u, of));
    let rv = operator_residual(v, of);
    let ru = operator_residual(u, of);
    let mut min_sub = f64::INFINITY;
    let mut max_u = 0.0f64;
    for &c in topo.cells() {
        if topo.depth(c) >= CHECK_DEPTH {
            min_sub = min_sub.min(rv.value(c));
            max_u = max_u.max(ru.value(c).abs());
        }
    }
    if min_sub < -1e-3 * scale {
        return Err(HopfError::PreconditionFail(format!("v is not a sub-solution: residual {min_sub} below -1e-3 x flux scale {scale}")));
    }
    let g = topo.grid();
    let mut worst = f64::NEG_INFINITY;
    let mut at = Point::ORIGIN;
    for &c in topo.cells() {
        let d = v.value(c) - u.value(c);
        if d > worst {
            worst = d;
            at = g.center_of(c);
        }
    }
    Ok(ComparisonReport { pass: worst <= tol_cmp, max_violation: worst, at, tol_cmp, min_sub_residual: min_sub, max_u_residual: max_u, flux_scale: scale })
}

/// Max error of the harmonic potential of annulus(1, 2) against
/// `log(2/|x|)/log 2` on an `n × n` grid over `[−2.1, 2.1]²`.
pub fn harmonic_benchmark_error(n: usize) -> Result<f64, HopfError> {
    let g = Grid::square(-2.1, 2.1, n).ok_or(HopfError::InvalidInput("grid too small"))?;
    let ring = make_annulus(1.0, 2.0, g).map_err(|_| HopfError::InvalidInput("annulus does not fit the grid"))?;
    let topo = Topology::new(&ring);
    let w = solve_harmonic(&topo, &SolveOptions::default())?.field;
    let ln2 = core::f64::consts::LN_2;
    Ok(topo.cells().iter().fold(0.0f64, |m, &c| m.max((w.value(c) - (2.0 / g.center_of(c).norm()).ln() / ln2).abs())))
}

/// Comparison tolerance: twice the harmonic benchmark error at resolution `n`.
pub fn tol_cmp(n: usize) -> Result<f64, HopfError> {
    Ok(2.0 * harmonic_benchmark_error(n)?)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LipschitzReport {
    /// `max u(x)/(M·dist(x, −K))` over cells in `B_{r_D}` at least half a
    /// cell from `−K`.
    pub c_measured: f64,
    pub m: f64,
    pub barrier_m: f64,
    pub comparison: ComparisonReport,
    /// Sub-solution status of `f(w)`, i.e. super-solution status of `M − f(w)`.
    pub barrier: SubsolutionReport,
    pub pass: bool,
}

/// Lipschitz bound near the origin from the outer ring `B_{3r_D} ∖ (−K)`
/// on which `u` lives: builds `M − f(w)` with `f(1) = M`, compares it with
/// `u` and measures `u/(M·dist(x, −K))`.
pub fn outer_lipschitz_check(u: &ScalarField, m: f64, of: &OrliczFunction, tol_cmp: f64) -> Result<LipschitzReport, HopfError> {
    let topo = u.topology();
    let ring = topo.ring();
    let r_d = match ring.outer.shape() {
        Shape::Disk { radius, .. } => radius / 3.0,
        _ => return Err(HopfError::InvalidInput("outer ring must be bounded by a disk")),
    };
    if !(m >= 0.0 && m.is_finite()) {
        return Err(HopfError::InvalidInput("M must be finite and non-negative"));
    }
    if topo.cells().iter().any(|&c| u.value(c) < -1e-12) {
        return Err(HopfError::PreconditionFail(String::from("u takes negative values")));
    }
    let g = *topo.grid();
    let w = solve_harmonic(topo, &SolveOptions::default())?.field;
    let diag = level_diagnostics(&w, 1e-6)?;
    let zeta = zeta_from_field(&w, &diag, 100)?;
    let beta = gradient_bounds(&w)?.big_c;
    let target = if m > 0.0 { m } else { 1.0 };
    let profile = tune_m(of, &zeta, 1.0, beta, target)?;
    let barrier = verify_with(&w, &diag, &profile, of)?;
    // f(1) ≤ target, so M − f(w) ≥ 0 = u on −K without rescaling f
    let top = if m > 0.0 { m } else { profile.f1 };
    let sup = w.map(|x| top - profile.f(x));
    let comparison = comparison_check(&sup, u, of, tol_cmp)?;
    let mut c = 0.0f64;
    if m > 0.0 {
        for &cell in topo.cells() {
            let p = g.center_of(cell);
            let d = ring.inner.sdf(p);
            if p.norm() < r_d && d >= 0.5 * g.max_spacing() {
                c = c.max(u.value(cell) / (m * d));
            }
        }
    }
    let pass = c.is_finite() && comparison.pass && barrier.pass;
    Ok(LipschitzReport { c_measured: c, m, barrier_m: profile.m, comparison, barrier, pass })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HolderReport {
    pub lhs: f64,
    pub norm_u: f64,
    pub norm_v: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// `∫uv ≤ ‖u‖_F ‖v‖_{F*}` by cell quadrature; requires `h(1) = 1`.
pub fn orlicz_holder_check(u: &ScalarField, v: &ScalarField, of: &OrliczFunction) -> Result<HolderReport, HopfError> {
    let h1 = of.h(1.0);
    if (h1 - 1.0).abs() > 1e-9 {
        return Err(HopfError::NotNormalized { h1 });
    }
    if !Arc::ptr_eq(u.topology(), v.topology()) {
        return Err(HopfError::InvalidInput("u and v live on different topologies"));
    }
    let area = u.grid().cell_area();
    let lhs: f64 = u.topology().cells().iter().map(|&c| u.value(c) * v.value(c) * area).sum();
    let norm_u = orlicz_norm(u, of)?;
    let norm_v = orlicz_norm_conjugate(v, of)?;
    let rhs = norm_u * norm_v;
    Ok(HolderReport { lhs, norm_u, norm_v, rhs, pass: lhs <= rhs + 1e-6 * rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve_h_potential;

    fn annulus(n: usize) -> Arc<Topology> {
        let g = Grid::square(-2.1, 2.1, n).unwrap();
        Topology::new(&make_annulus(1.0, 2.0, g).unwrap())
    }

    #[test]
    fn hopf_on_harmonic_annulus() {
        let topo = annulus(129);
        let w = solve_harmonic(&topo, &SolveOptions::default()).unwrap().field;
        let rep = hopf_constant(&w, Point::new(2.0, 0.0), &[0.4, 0.2, 0.1]).unwrap();
        let exact = 1.0 / (2.0 * core::f64::consts::LN_2);
        assert!((rep.c_estimate - exact).abs() < 0.1 * exact, "{}", rep.c_estimate);
        assert!(rep.pass);
        assert!(rep.radii.windows(2).all(|r| r[1] < r[0]));
    }

    #[test]
    fn constant_field_fails_and_tiny_radius_is_flagged() {
        let topo = annulus(65);
        let u = ScalarField::ring_data(&topo, 0.3, 0.3, 0.3);
        let rep = hopf_constant(&u, Point::new(2.0, 0.0), &[0.5, 0.3, 0.01]).unwrap();
        assert!(rep.ratios.iter().all(|&r| r == 0.0));
        assert!(!rep.pass);
        assert!(rep.radius_unresolved());
        assert!(matches!(hopf_constant(&u, Point::new(2.0, 0.0), &[0.01]), Err(HopfError::RadiusUnresolved { .. })));
    }

    #[test]
    fn comparison_reflexive_and_bump_rejected() {
        let topo = annulus(65);
        let of = OrliczFunction::power(3.0).unwrap();
        let u = solve_h_potential(&topo, &of, &SolveOptions::default()).unwrap().field;
        let rep = comparison_check(&u, &u, &of, 0.0).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.max_violation, 0.0);
        let g = *topo.grid();
        let bump = {
            let mut v = u.clone();
            let vals: Vec<f64> = (0..g.len())
                .map(|c| {
                    let d = g.center_of(c).dist(Point::new(1.5, 0.0));
                    u.value(c) + if topo.is_interior(c) { 0.2 * (-d * d / 0.02).exp() } else { 0.0 }
                })
                .collect();
            v = ScalarField::from_parts(&topo, vals, v.link_values().to_vec()).unwrap();
            v
        };
        match comparison_check(&u, &bump, &of, 1e-3) {
            Err(HopfError::PreconditionFail(_)) => {}
            Ok(r) => assert!(!r.pass),
            Err(e) => panic!("{e}"),
        }
        let shifted = u.map(|x| x + 0.1);
        assert!(matches!(comparison_check(&u, &shifted, &of, 1e-3), Err(HopfError::PreconditionFail(_))));
    }

    #[test]
    fn holder_plateau_is_tight() {
        let topo = annulus(65);
        let of = OrliczFunction::power(3.0).unwrap();
        let one = ScalarField::ring_data(&topo, 1.0, 1.0, 1.0);
        let rep = orlicz_holder_check(&one, &one, &of).unwrap();
        assert!(rep.pass);
        assert!(rep.lhs >= 0.95 * rep.rhs, "{rep:?}");
        let of2 = OrliczFunction::from_fn("double", |t| 2.0 * t, 1e6).unwrap();
        assert!(matches!(orlicz_holder_check(&one, &one, &of2), Err(HopfError::NotNormalized { .. })));
    }
}
