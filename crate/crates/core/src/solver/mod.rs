//! H-potentials by energy minimisation, harmonic potentials, and the
//! differential diagnostics of a solved field.

mod diagnostics;
mod energy;
mod flow;

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::field::{Neighbor, ScalarField, Topology};
use crate::grid::Dir;
use crate::linalg::{banded_cholesky_solve, pcg, Csr, Ic0};
use crate::orlicz::OrliczFunction;

pub use diagnostics::{gradient, gradient_bounds, level_diagnostics, superlevel_convexity, superlevel_mask, GradientBounds, LevelDiagnostics};
pub use flow::{trace_flow_line, FlowSample, FlowTracer};

pub(crate) use energy::Energy;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LinearSolver {
    /// Incomplete-Cholesky preconditioned conjugate gradients.
    ConjugateGradientLike,
    /// Banded Cholesky factorisation.
    DirectBanded,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolveOptions {
    /// Strictly decreasing regularisation parameters, last one ≥ 1e-8.
    pub delta_schedule: Vec<f64>,
    /// Max-norm tolerance on the discrete `Δ_H` residual.
    pub tol: f64,
    /// Newton iterations over all stages.
    pub max_iter: usize,
    pub linear_solver: LinearSolver,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { delta_schedule: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6], tol: 1e-8, max_iter: 200, linear_solver: LinearSolver::ConjugateGradientLike }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<(), SolveError> {
        let d = &self.delta_schedule;
        if d.is_empty() || d.windows(2).any(|w| !(w[1] < w[0])) || !(*d.last().unwrap() >= 1e-8) {
            return Err(SolveError::InvalidOptions("delta schedule must be strictly decreasing and end at or above 1e-8"));
        }
        if !(self.tol > 0.0) {
            return Err(SolveError::InvalidOptions("tol must be positive"));
        }
        Ok(())
    }
}

/// One line of the convergence log.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogEntry {
    pub iteration: usize,
    pub delta: f64,
    pub energy: f64,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct Solved {
    pub field: ScalarField,
    pub log: Vec<LogEntry>,
    /// Final `J_δ` at the last `δ`.
    pub energy: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Error)]
pub enum SolveError {
    #[error("invalid solver options: {0}")]
    InvalidOptions(&'static str),
    #[error("no convergence after {iterations} iterations (residual {residual})")]
    NonConvergence { iterations: usize, residual: f64, last: Box<Solved> },
    #[error("line search stalled at iteration {iteration} (residual {residual})")]
    LineSearchStall { iteration: usize, residual: f64 },
    #[error("gradient below {threshold} on every evaluated cell")]
    VanishingGradient { threshold: f64 },
    #[error("gradient bound c = {c} is degenerate")]
    DegenerateGradient { c: f64 },
    #[error("stagnation point at w = {w}")]
    StagnationPoint { w: f64 },
    #[error("ring has no interior cells")]
    EmptyRing,
    #[error("start point lies outside the ring")]
    OutsideRing,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn linear_solve(a: &Csr, b: &[f64], kind: LinearSolver, rel_tol: f64) -> Vec<f64> {
    if kind == LinearSolver::DirectBanded {
        if let Some(x) = banded_cholesky_solve(a, b) {
            return x;
        }
    }
    let pre = Ic0::new(a);
    let mut x = vec![0.0; a.n];
    pcg(a, b, &mut x, &pre, rel_tol, 20 * a.n.max(100));
    x
}

/// H-potential of the ring: minimiser of `∫ F(|∇v|)` with `v = 1` on the
/// inner and `v = 0` on the outer boundary, started from the harmonic
/// potential.
pub fn solve_h_potential(topo: &Arc<Topology>, of: &OrliczFunction, opts: &SolveOptions) -> Result<Solved, SolveError> {
    let data = ScalarField::ring_data(topo, 1.0, 0.0, 0.5);
    let start = solve_linear(&data, opts).map(|s| s.field).unwrap_or(data);
    minimize(&start, of, opts)
}

/// Minimises the discrete energy over the interior values of `initial`,
/// keeping its boundary data, with δ-continuation and damped Newton steps.
pub fn minimize(initial: &ScalarField, of: &OrliczFunction, opts: &SolveOptions) -> Result<Solved, SolveError> {
    opts.validate()?;
    let topo = initial.topology().clone();
    if topo.unknowns() == 0 {
        return Err(SolveError::EmptyRing);
    }
    let en = Energy::new(&topo);
    let links = initial.link_values().to_vec();
    let area = en.area();
    let n = en.unknowns();
    let mut u = initial.unknown_values();
    let mut g = vec![0.0; n];
    let mut hess = en.pattern().clone();
    let mut log = Vec::new();
    let mut iteration = 0usize;
    let last_stage = opts.delta_schedule.len() - 1;
    let mut energy = 0.0;
    let mut residual = f64::INFINITY;
    let finish = |u: &[f64], log: Vec<LogEntry>, energy: f64, residual: f64| {
        let mut field = initial.clone();
        field.set_unknowns(u);
        Solved { field, log, energy, residual }
    };
    for (stage, &delta) in opts.delta_schedule.iter().enumerate() {
        let stage_tol = if stage == last_stage { opts.tol } else { opts.tol.max(1e-5) };
        loop {
            en.gradient(of, delta, &u, &links, &mut g);
            energy = en.energy(of, delta, &u, &links);
            residual = max_abs(&g) / area;
            log.push(LogEntry { iteration, delta, energy, residual });
            en.hessian(of, delta, &u, &links, &mut hess);
            if residual < stage_tol || within_rounding(&g, &hess, &u, &links, area * stage_tol) {
                break;
            }
            if iteration >= opts.max_iter {
                return Err(SolveError::NonConvergence { iterations: iteration, residual, last: Box::new(finish(&u, log, energy, residual)) });
            }
            iteration += 1;
            let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
            let d = linear_solve(&hess, &rhs, opts.linear_solver, 1e-11);
            if let Some(next) = line_search(&en, of, delta, &u, &links, &g, &d, energy) {
                u = next;
                continue;
            }
            match gradient_descent(&en, of, delta, &u, &links, energy) {
                Some(next) => u = next,
                None => {
                    // an intermediate stage only needs a good starting point
                    if stage != last_stage && residual < 1e3 * stage_tol {
                        break;
                    }
                    return Err(SolveError::LineSearchStall { iteration, residual });
                }
            }
        }
    }
    Ok(finish(&u, log, energy, residual))
}

// Rows cut at a small θ have stiffness ~ 1/(θh²), so one ulp of u moves
// their residual by more than tol. Such rows count as converged once the
// gradient is within a few ulps of the Hessian diagonal.
fn within_rounding(g: &[f64], hess: &Csr, u: &[f64], links: &[f64], tol: f64) -> bool {
    let scale = max_abs(u).max(max_abs(links)).max(f64::MIN_POSITIVE);
    let diag = hess.diagonal();
    g.iter().zip(&diag).all(|(gi, di)| gi.abs() < tol + 16.0 * f64::EPSILON * scale * di.abs())
}

// Armijo halving on the energy. Steps whose energy change is at roundoff
// are accepted if they reduce the residual.
#[allow(clippy::too_many_arguments)]
fn line_search(en: &Energy, of: &OrliczFunction, delta: f64, u: &[f64], links: &[f64], g: &[f64], d: &[f64], e0: f64) -> Option<Vec<f64>> {
    let slope = dot(g, d);
    if !(slope < 0.0) || d.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let r0 = max_abs(g);
    let noise = 1e-13 * e0.abs().max(1e-300);
    let mut alpha = 1.0;
    let mut trial = vec![0.0; u.len()];
    let mut gt = vec![0.0; u.len()];
    for _ in 0..40 {
        for k in 0..u.len() {
            trial[k] = u[k] + alpha * d[k];
        }
        let e = en.energy(of, delta, &trial, links);
        if e.is_finite() {
            if e <= e0 + 1e-4 * alpha * slope {
                return Some(trial);
            }
            if e <= e0 + noise {
                en.gradient(of, delta, &trial, links, &mut gt);
                if max_abs(&gt) < r0 {
                    return Some(trial);
                }
            }
        }
        alpha *= 0.5;
    }
    None
}

// Barzilai–Borwein gradient steps with Armijo safeguarding; returns an
// iterate of strictly lower energy, or None.
fn gradient_descent(en: &Energy, of: &OrliczFunction, delta: f64, u0: &[f64], links: &[f64], e0: f64) -> Option<Vec<f64>> {
    let n = u0.len();
    let mut u = u0.to_vec();
    let mut e = e0;
    let mut g = vec![0.0; n];
    en.gradient(of, delta, &u, links, &mut g);
    let mut step = 1e-3 / max_abs(&g).max(1e-300);
    let mut improved = false;
    let mut trial = vec![0.0; n];
    let mut gn = vec![0.0; n];
    for _ in 0..200 {
        let gg = dot(&g, &g);
        if gg == 0.0 {
            break;
        }
        let mut accepted = false;
        for _ in 0..40 {
            for k in 0..n {
                trial[k] = u[k] - step * g[k];
            }
            let et = en.energy(of, delta, &trial, links);
            if et.is_finite() && et <= e - 1e-4 * step * gg {
                accepted = true;
                e = et;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        improved = true;
        en.gradient(of, delta, &trial, links, &mut gn);
        let mut ss = 0.0;
        let mut sy = 0.0;
        for k in 0..n {
            let s = trial[k] - u[k];
            ss += s * s;
            sy += s * (gn[k] - g[k]);
        }
        core::mem::swap(&mut u, &mut trial);
        core::mem::swap(&mut g, &mut gn);
        if sy > 0.0 {
            step = ss / sy;
        }
    }
    if improved {
        Some(u)
    } else {
        None
    }
}

/// Harmonic potential: the five-point ghost-fluid Laplace solve with
/// `w = 1` on the inner and `w = 0` on the outer boundary.
pub fn solve_harmonic(topo: &Arc<Topology>, opts: &SolveOptions) -> Result<Solved, SolveError> {
    solve_linear(&ScalarField::ring_data(topo, 1.0, 0.0, 0.5), opts)
}

/// Discrete Laplace solve keeping the boundary data of `data`.
pub fn solve_linear(data: &ScalarField, opts: &SolveOptions) -> Result<Solved, SolveError> {
    opts.validate()?;
    let topo = data.topology().clone();
    let n = topo.unknowns();
    if n == 0 {
        return Err(SolveError::EmptyRing);
    }
    let g = *topo.grid();
    let mut rows = Vec::with_capacity(n);
    for u in 0..n {
        let mut r = vec![u];
        for nb in topo.neighbors(u) {
            if let Neighbor::Cell(j) = nb {
                r.push(*j);
            }
        }
        rows.push(r);
    }
    let mut a = Csr::from_pattern(&rows);
    let mut b = vec![0.0; n];
    for u in 0..n {
        let mut diag = 0.0;
        for d in Dir::ALL {
            let h = g.spacing(d);
            match topo.neighbors(u)[d.index()] {
                Neighbor::Cell(j) => {
                    diag += 1.0 / (h * h);
                    let k = a.find(u, j).unwrap();
                    a.val[k] -= 1.0 / (h * h);
                }
                Neighbor::Cut(l) => {
                    let th = topo.links()[l].theta;
                    diag += 1.0 / (th * h * h);
                    b[u] += data.link_value(l) / (th * h * h);
                }
            }
        }
        let k = a.find(u, u).unwrap();
        a.val[k] += diag;
    }
    let mut x = linear_solve(&a, &b, opts.linear_solver, 1e-14);
    let mut ax = vec![0.0; n];
    let mut r = vec![0.0; n];
    let mut residual = f64::INFINITY;
    // iterative refinement: rows next to short links carry 1/(θh²) entries
    for _ in 0..4 {
        a.mul(&x, &mut ax);
        for i in 0..n {
            r[i] = b[i] - ax[i];
        }
        residual = max_abs(&r);
        if residual < 0.01 * opts.tol {
            break;
        }
        let d = linear_solve(&a, &r, opts.linear_solver, 1e-14);
        for i in 0..n {
            x[i] += d[i];
        }
    }
    let mut field = data.clone();
    field.set_unknowns(&x);
    let log = vec![LogEntry { iteration: 1, delta: 0.0, energy: f64::NAN, residual }];
    let solved = Solved { field, log, energy: f64::NAN, residual };
    if residual < opts.tol {
        Ok(solved)
    } else {
        Err(SolveError::NonConvergence { iterations: 1, residual, last: Box::new(solved) })
    }
}

/// Conservative discretisation of `Δ_H v = div(H(|∇v|)∇v)` at interior
/// cells (zero elsewhere), consistent with the energy of [`minimize`].
pub fn operator_residual(field: &ScalarField, of: &OrliczFunction) -> ScalarField {
    let topo = field.topology();
    let en = Energy::new(topo);
    let r = energy::residual_by_unknown(&en, field, of, 0.0);
    let mut values = vec![0.0; topo.grid().len()];
    for (k, &c) in topo.cells().iter().enumerate() {
        values[c] = r[k];
    }
    ScalarField::from_parts(topo, values, vec![0.0; topo.links().len()]).unwrap()
}

/// Discrete energy `J₀(v)` of a field.
pub fn energy_of(field: &ScalarField, of: &OrliczFunction) -> f64 {
    let en = Energy::new(field.topology());
    en.energy(of, 0.0, &field.unknown_values(), field.link_values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_annulus;
    use crate::grid::{Grid, Point};

    fn annulus(n: usize) -> Arc<Topology> {
        let g = Grid::square(-2.1, 2.1, n).unwrap();
        Topology::new(&make_annulus(1.0, 2.0, g).unwrap())
    }

    fn max_err(f: &ScalarField, exact: impl Fn(f64) -> f64) -> f64 {
        let g = f.grid();
        f.topology().cells().iter().fold(0.0f64, |m, &c| m.max((f.value(c) - exact(g.center_of(c).norm())).abs()))
    }

    #[test]
    fn affine_fields_have_zero_residual() {
        let t = annulus(65);
        let f = ScalarField::from_fn(&t, |p| 0.3 * p.x - 1.2 * p.y + 0.7);
        // exact everywhere for p = 2; for p ≠ 2 the one-component edge terms
        // of the first cell layer see only part of the gradient
        for (of, depth) in [(OrliczFunction::power(2.0).unwrap(), 1), (OrliczFunction::power(3.0).unwrap(), 2), (OrliczFunction::power(1.5).unwrap(), 2)] {
            let r = operator_residual(&f, &of);
            let m = t.cells().iter().filter(|&&c| t.depth(c) >= depth).fold(0.0f64, |m, &c| m.max(r.value(c).abs()));
            assert!(m < 1e-9, "{m}");
        }
    }

    #[test]
    fn quadratic_energy_residual_is_five_point_laplacian() {
        let t = annulus(33);
        let f = ScalarField::from_fn(&t, |p| (p.x * 3.0).sin() + p.y * p.y);
        let r = operator_residual(&f, &OrliczFunction::power(2.0).unwrap());
        let g = *t.grid();
        for (u, &c) in t.cells().iter().enumerate() {
            let mut lap = 0.0;
            for d in Dir::ALL {
                let (v, dist) = f.neighbor(u, d);
                lap += (v - f.value(c)) / (dist * g.spacing(d));
            }
            assert!((lap - r.value(c)).abs() < 1e-9 * lap.abs().max(1.0), "{lap} vs {}", r.value(c));
        }
    }

    #[test]
    fn harmonic_annulus_small_grid() {
        let t = annulus(65);
        let s = solve_harmonic(&t, &SolveOptions::default()).unwrap();
        let err = max_err(&s.field, |r| (2.0 / r).ln() / 2f64.ln());
        assert!(err < 2e-2, "{err}");
        let p2 = solve_h_potential(&t, &OrliczFunction::power(2.0).unwrap(), &SolveOptions::default()).unwrap();
        let diff = t.cells().iter().fold(0.0f64, |m, &c| m.max((s.field.value(c) - p2.field.value(c)).abs()));
        assert!(diff < 1e-6, "{diff}");
    }

    #[test]
    fn p3_annulus_small_grid() {
        let t = annulus(65);
        let s = solve_h_potential(&t, &OrliczFunction::power(3.0).unwrap(), &SolveOptions::default()).unwrap();
        let sq2 = 2f64.sqrt();
        let err = max_err(&s.field, |r| (sq2 - r.sqrt()) / (sq2 - 1.0));
        assert!(err < 3e-2, "{err}");
        for w in s.log.windows(2) {
            if w[0].delta == w[1].delta {
                assert!(w[1].energy <= w[0].energy + 1e-12 * w[0].energy.abs());
            }
        }
        let _ = Point::ORIGIN;
    }

    #[test]
    fn constant_data_gives_constant_solution() {
        let t = annulus(33);
        let data = ScalarField::ring_data(&t, 1.0, 1.0, 0.3);
        let s = minimize(&data, &OrliczFunction::power(3.0).unwrap(), &SolveOptions::default()).unwrap();
        for &c in t.cells() {
            assert!((s.field.value(c) - 1.0).abs() < 1e-8);
        }
        assert!(energy_of(&s.field, &OrliczFunction::power(3.0).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn max_iter_one_fails() {
        let t = annulus(33);
        let opts = SolveOptions { max_iter: 1, ..SolveOptions::default() };
        let r = solve_h_potential(&t, &OrliczFunction::power(3.0).unwrap(), &opts);
        assert!(matches!(r, Err(SolveError::NonConvergence { .. })));
    }

    #[test]
    fn banded_solver_agrees() {
        let t = annulus(33);
        let a = solve_harmonic(&t, &SolveOptions::default()).unwrap();
        let b = solve_harmonic(&t, &SolveOptions { linear_solver: LinearSolver::DirectBanded, ..SolveOptions::default() }).unwrap();
        for &c in t.cells() {
            assert!((a.field.value(c) - b.field.value(c)).abs() < 1e-10);
        }
    }
}
