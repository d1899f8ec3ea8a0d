use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::SolveError;
use crate::field::{Neighbor, ScalarField};
use crate::geometry::{midpoint_convexity, ConvexityReport};
use crate::grid::{Dir, Point};

/// Derivatives of a solved field and the level-set quantities built from
/// them. All vectors are indexed by grid cell and hold NaN off the interior
/// (and, apart from the gradient, on excluded cells).
#[derive(Debug, Clone)]
pub struct LevelDiagnostics {
    pub wx: Vec<f64>,
    pub wy: Vec<f64>,
    pub grad_norm: Vec<f64>,
    pub wxx: Vec<f64>,
    pub wyy: Vec<f64>,
    pub wxy: Vec<f64>,
    pub laplacian: Vec<f64>,
    /// `Δ_∞ w = ∇w·D²w·∇w`.
    pub inf_lap: Vec<f64>,
    /// Level-set curvature `κ = −div(∇w/|∇w|)`, positive for circles
    /// around a source at higher values.
    pub curvature: Vec<f64>,
    /// `Δ_∞w − (n−1)κ|∇w|³ − |∇w|²Δw` with `n = 2`.
    pub identity: Vec<f64>,
    /// Interior cells with `|∇w|` below `threshold`.
    pub excluded: Vec<usize>,
    pub threshold: f64,
}

// First and second derivative at 0 of the quadratic through three nodes.
fn quadratic(t: [f64; 3], f: [f64; 3]) -> (f64, f64) {
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let den = (t[i] - t[j]) * (t[i] - t[k]);
        d1 -= f[i] * (t[j] + t[k]) / den;
        d2 += 2.0 * f[i] / den;
    }
    (d1, d2)
}

fn opposite(d: Dir) -> Dir {
    match d {
        Dir::East => Dir::West,
        Dir::West => Dir::East,
        Dir::North => Dir::South,
        Dir::South => Dir::North,
    }
}

/// Derivatives along one axis at an unknown. Shortley–Weller when both
/// sides are at least half a cell long; otherwise the short side is
/// dropped for the next node beyond the long side, since dividing by a tiny
/// arm amplifies the solution error.
fn axis(w: &ScalarField, u: usize, plus: Dir) -> (f64, f64) {
    let topo = w.topology();
    let minus = opposite(plus);
    let h = w.grid().spacing(plus);
    let c = topo.cells()[u];
    let f0 = w.value(c);
    let (fp, b) = w.neighbor(u, plus);
    let (fm, a) = w.neighbor(u, minus);
    let far = |d: Dir, arm: f64| match topo.neighbors(u)[d.index()] {
        Neighbor::Cell(j) => {
            let (v, e) = w.neighbor(j, d);
            Some((v, arm + e))
        }
        Neighbor::Cut(_) => None,
    };
    let half = 0.5 * h;
    if a < half && b >= half {
        if let Some((fpp, bb)) = far(plus, b) {
            return quadratic([0.0, b, bb], [f0, fp, fpp]);
        }
    }
    if b < half && a >= half {
        if let Some((fmm, aa)) = far(minus, a) {
            return quadratic([0.0, -a, -aa], [f0, fm, fmm]);
        }
    }
    quadratic([-a, 0.0, b], [fm, f0, fp])
}

/// Gradient at interior cells (NaN elsewhere).
pub fn gradient(w: &ScalarField) -> (Vec<f64>, Vec<f64>) {
    let topo = w.topology();
    let n = topo.grid().len();
    let mut wx = vec![f64::NAN; n];
    let mut wy = vec![f64::NAN; n];
    for (u, &c) in topo.cells().iter().enumerate() {
        wx[c] = axis(w, u, Dir::East).0;
        wy[c] = axis(w, u, Dir::North).0;
    }
    (wx, wy)
}

// Centred difference of a cell quantity where both neighbours carry it,
// one-sided where only one does.
fn cell_diff(topo: &crate::field::Topology, u: usize, q: &[f64], plus: Dir, h: f64) -> Option<f64> {
    let c = topo.cells()[u];
    let cell_of = |d: Dir| match topo.neighbors(u)[d.index()] {
        Neighbor::Cell(j) => Some(topo.cells()[j]).filter(|&k| q[k].is_finite()),
        Neighbor::Cut(_) => None,
    };
    match (cell_of(plus), cell_of(opposite(plus))) {
        (Some(p), Some(m)) => Some((q[p] - q[m]) / (2.0 * h)),
        (Some(p), None) => Some((q[p] - q[c]) / h),
        (None, Some(m)) => Some((q[c] - q[m]) / h),
        (None, None) => None,
    }
}

/// Derivatives, `Δ_∞w`, curvature and the curvature identity. Cells with
/// `|∇w| < 10·δ` are excluded; it is an error only if nothing remains.
///
/// The curvature is measured as `−div(∇w/|∇w|)` by differencing the unit
/// normal field, independently of the Hessian used for `Δ_∞w`.
pub fn level_diagnostics(w: &ScalarField, delta: f64) -> Result<LevelDiagnostics, SolveError> {
    let topo = w.topology();
    let grid = *topo.grid();
    let n = grid.len();
    let mut wx = vec![f64::NAN; n];
    let mut wy = vec![f64::NAN; n];
    let mut wxx = vec![f64::NAN; n];
    let mut wyy = vec![f64::NAN; n];
    for (u, &c) in topo.cells().iter().enumerate() {
        (wx[c], wxx[c]) = axis(w, u, Dir::East);
        (wy[c], wyy[c]) = axis(w, u, Dir::North);
    }
    let mut wxy = vec![f64::NAN; n];
    for (u, &c) in topo.cells().iter().enumerate() {
        // mixed derivative from neighbouring gradients, both ways round
        let a = cell_diff(topo, u, &wx, Dir::North, grid.dy);
        let b = cell_diff(topo, u, &wy, Dir::East, grid.dx);
        wxy[c] = match (a, b) {
            (Some(a), Some(b)) => 0.5 * (a + b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => f64::NAN,
        };
    }
    let threshold = 10.0 * delta;
    let mut grad_norm = vec![f64::NAN; n];
    let mut nx = vec![f64::NAN; n];
    let mut ny = vec![f64::NAN; n];
    let mut excluded = Vec::new();
    for &c in topo.cells() {
        let g = wx[c].hypot(wy[c]);
        grad_norm[c] = g;
        if !(g >= threshold) || g == 0.0 {
            excluded.push(c);
            continue;
        }
        nx[c] = wx[c] / g;
        ny[c] = wy[c] / g;
    }
    if excluded.len() == topo.unknowns() {
        return Err(SolveError::VanishingGradient { threshold });
    }
    let mut laplacian = vec![f64::NAN; n];
    let mut inf_lap = vec![f64::NAN; n];
    let mut curvature = vec![f64::NAN; n];
    let mut identity = vec![f64::NAN; n];
    for (u, &c) in topo.cells().iter().enumerate() {
        if !nx[c].is_finite() {
            continue;
        }
        let (gx, gy, g) = (wx[c], wy[c], grad_norm[c]);
        let g2 = g * g;
        let lap = wxx[c] + wyy[c];
        let il = gx * gx * wxx[c] + 2.0 * gx * gy * wxy[c] + gy * gy * wyy[c];
        laplacian[c] = lap;
        inf_lap[c] = il;
        if let (Some(a), Some(b)) = (cell_diff(topo, u, &nx, Dir::East, grid.dx), cell_diff(topo, u, &ny, Dir::North, grid.dy)) {
            let kappa = -(a + b);
            curvature[c] = kappa;
            identity[c] = il - kappa * g2 * g - g2 * lap;
        }
    }
    Ok(LevelDiagnostics { wx, wy, grad_norm, wxx, wyy, wxy, laplacian, inf_lap, curvature, identity, excluded, threshold })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GradientBounds {
    pub c: f64,
    #[cfg_attr(feature = "serde", serde(rename = "C"))]
    pub big_c: f64,
    pub at_min: Point,
    pub at_max: Point,
}

/// `min` and `max` of `|∇w|` over interior cells, from [`gradient`].
pub fn gradient_bounds(w: &ScalarField) -> Result<GradientBounds, SolveError> {
    let topo = w.topology();
    let grid = *topo.grid();
    let (wx, wy) = gradient(w);
    let mut b = GradientBounds { c: f64::INFINITY, big_c: 0.0, at_min: Point::ORIGIN, at_max: Point::ORIGIN };
    for &c in topo.cells() {
        let g = wx[c].hypot(wy[c]);
        if !g.is_finite() {
            continue;
        }
        if g < b.c {
            b.c = g;
            b.at_min = grid.center_of(c);
        }
        if g > b.big_c {
            b.big_c = g;
            b.at_max = grid.center_of(c);
        }
    }
    if !(b.c >= 1e-6) {
        return Err(SolveError::DegenerateGradient { c: b.c });
    }
    Ok(b)
}

/// Cells of `{w > s}` together with the inner domain `K₁`, as a grid mask.
pub fn superlevel_mask(w: &ScalarField, s: f64) -> Vec<bool> {
    let topo = w.topology();
    let mut member: Vec<bool> = (0..topo.grid().len()).map(|c| topo.sdf_inner(c) < 0.0).collect();
    for &c in topo.cells() {
        member[c] = w.value(c) > s;
    }
    member
}

/// Random-midpoint convexity test of each superlevel set `{w > s}`.
pub fn superlevel_convexity(w: &ScalarField, levels: &[f64], pairs: usize, seed: u64) -> Vec<(f64, ConvexityReport)> {
    levels.iter().enumerate().map(|(k, &s)| (s, midpoint_convexity(w.grid(), &superlevel_mask(w, s), pairs, seed.wrapping_add(k as u64)))).collect()
}
