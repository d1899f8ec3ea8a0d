use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{diagnostics::gradient, SolveError};
use crate::field::ScalarField;
use crate::grid::Point;

const MAX_STEPS: usize = 200_000;

/// A point of a gradient flow line, parametrised by the value of `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FlowSample {
    pub w: f64,
    pub grad_norm: f64,
    pub point: Point,
}

/// Integrates `dx/dw = ∇w/|∇w|²` through a field with precomputed
/// gradients.
pub struct FlowTracer<'a> {
    w: &'a ScalarField,
    wx: Vec<f64>,
    wy: Vec<f64>,
    threshold: f64,
}

impl<'a> FlowTracer<'a> {
    pub fn new(w: &'a ScalarField, threshold: f64) -> Self {
        let (wx, wy) = gradient(w);
        FlowTracer { w, wx, wy, threshold }
    }

    // Surrounding cells with a gradient, with bilinear weights.
    fn stencil(&self, p: Point) -> Option<([usize; 4], [f64; 4], bool)> {
        let g = self.w.grid();
        let (fx, fy) = g.fractional(p);
        let (i0, j0) = (fx.floor(), fy.floor());
        let (tx, ty) = (fx - i0, fy - j0);
        let mut cells = [usize::MAX; 4];
        let mut wts = [0.0; 4];
        let mut complete = true;
        for (k, (a, b)) in [(0, 0), (1, 0), (0, 1), (1, 1)].into_iter().enumerate() {
            let (i, j) = (i0 as i64 + a, j0 as i64 + b);
            wts[k] = (if a == 1 { tx } else { 1.0 - tx }) * (if b == 1 { ty } else { 1.0 - ty });
            if i < 0 || j < 0 || i >= g.nx as i64 || j >= g.ny as i64 {
                complete = false;
                continue;
            }
            let c = g.index(i as usize, j as usize);
            if self.wx[c].is_finite() {
                cells[k] = c;
            } else {
                complete = false;
            }
        }
        if cells.iter().all(|&c| c == usize::MAX) {
            return None;
        }
        Some((cells, wts, complete))
    }

    fn nearest(&self, p: Point, cells: &[usize; 4]) -> usize {
        let g = self.w.grid();
        let mut best = (f64::INFINITY, usize::MAX);
        for &c in cells {
            if c != usize::MAX {
                let d = g.center_of(c).dist(p);
                if d < best.0 {
                    best = (d, c);
                }
            }
        }
        best.1
    }

    /// Bilinear gradient, or the nearest cell's near the boundary.
    pub fn grad(&self, p: Point) -> Option<Point> {
        let (cells, wts, complete) = self.stencil(p)?;
        if complete {
            let mut gx = 0.0;
            let mut gy = 0.0;
            for k in 0..4 {
                gx += wts[k] * self.wx[cells[k]];
                gy += wts[k] * self.wy[cells[k]];
            }
            Some(Point::new(gx, gy))
        } else {
            let c = self.nearest(p, &cells);
            Some(Point::new(self.wx[c], self.wy[c]))
        }
    }

    /// First-order Taylor value from the nearest cell with a gradient.
    pub fn value(&self, p: Point) -> Option<f64> {
        let (cells, _, _) = self.stencil(p)?;
        let c = self.nearest(p, &cells);
        let x = self.w.grid().center_of(c);
        Some(self.w.value(c) + self.wx[c] * (p.x - x.x) + self.wy[c] * (p.y - x.y))
    }

    fn step_dir(&self, p: Point, w: f64) -> Result<Point, SolveError> {
        let g = self.grad(p).ok_or(SolveError::StagnationPoint { w })?;
        let n2 = g.dot(g);
        if !(n2.sqrt() >= self.threshold) {
            return Err(SolveError::StagnationPoint { w });
        }
        Ok(g * (1.0 / n2))
    }

    fn run(&self, x0: Point, w0: f64, sign: f64, out: &mut Vec<FlowSample>) -> Result<(), SolveError> {
        let topo = self.w.topology();
        let h = self.w.grid().max_spacing();
        let mut p = x0;
        let mut w = w0;
        for _ in 0..MAX_STEPS {
            let k1 = self.step_dir(p, w)?;
            let gn = 1.0 / k1.norm();
            let dw = sign * 0.5 * h * gn;
            let mid = p + k1 * (0.5 * dw);
            let k2 = if topo.phi_at(mid) < 0.0 { self.step_dir(mid, w + 0.5 * dw)? } else { k1 };
            let next = p + k2 * dw;
            if topo.phi_at(next) >= 0.0 {
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..50 {
                    let s = 0.5 * (lo + hi);
                    if topo.phi_at(p + k2 * (dw * s)) < 0.0 {
                        lo = s;
                    } else {
                        hi = s;
                    }
                }
                let end = p + k2 * (dw * hi);
                let g = self.grad(end).map_or(gn, |g| g.norm());
                out.push(FlowSample { w: w + dw * hi, grad_norm: g, point: end });
                return Ok(());
            }
            p = next;
            w += dw;
            let g = self.grad(p).map_or(f64::NAN, |g| g.norm());
            out.push(FlowSample { w, grad_norm: g, point: p });
        }
        Err(SolveError::StagnationPoint { w })
    }

    /// Traces the flow line through `x0` in both directions until it meets
    /// the ring boundary. Samples are sorted by ascending `w`.
    pub fn trace(&self, x0: Point) -> Result<Vec<FlowSample>, SolveError> {
        if !(self.w.topology().phi_at(x0) < 0.0) {
            return Err(SolveError::OutsideRing);
        }
        let w0 = self.value(x0).ok_or(SolveError::OutsideRing)?;
        let g0 = self.grad(x0).ok_or(SolveError::OutsideRing)?.norm();
        let mut up = Vec::new();
        self.run(x0, w0, 1.0, &mut up)?;
        let mut down = Vec::new();
        self.run(x0, w0, -1.0, &mut down)?;
        let mut out: Vec<FlowSample> = down.into_iter().rev().collect();
        out.push(FlowSample { w: w0, grad_norm: g0, point: x0 });
        out.extend(up);
        if out.windows(2).any(|s| !(s[1].w > s[0].w)) {
            out.sort_by(|a, b| a.w.total_cmp(&b.w));
        }
        Ok(out)
    }
}

/// Flow line of `w` through `x0`, with `threshold` the smallest admissible
/// `|∇w|` along the way.
pub fn trace_flow_line(w: &ScalarField, x0: Point, threshold: f64) -> Result<Vec<FlowSample>, SolveError> {
    FlowTracer::new(w, threshold).trace(x0)
}
