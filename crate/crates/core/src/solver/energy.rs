//! The discrete energy `J_δ(v) = Σ w_T (F(|G_T|_δ) − F(δ))`.
//!
//! Each interior cell carries four corner-quadrant terms whose gradient
//! pairs one x- and one y-difference quotient, weighted by the quadrant
//! area `(A/4)·θx·θy` left after cutting links at the boundary. Link weight
//! not covered by quadrants is carried by one-dimensional edge terms, so
//! that for `F(t) = t²/2` the Euler–Lagrange system is exactly the
//! symmetric five-point ghost-fluid Laplacian.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::field::{Neighbor, ScalarField, Topology};
use crate::grid::Dir;
use crate::linalg::Csr;
use crate::orlicz::OrliczFunction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Slot {
    Unknown(usize),
    Link(usize),
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Comp {
    plus: Slot,
    minus: Slot,
    inv: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Term {
    w: f64,
    c: [Comp; 2],
    n: usize,
}

/// Precomputed terms and Hessian pattern for one topology.
#[derive(Debug, Clone)]
pub(crate) struct Energy {
    terms: Vec<Term>,
    n: usize,
    area: f64,
    /// Home unknown of each term (owner of the Hessian rows it touches).
    pattern: Csr,
}

impl Energy {
    pub fn new(topo: &Topology) -> Energy {
        let g = topo.grid();
        let area = g.cell_area();
        let n = topo.unknowns();
        let slot = |u: usize, d: Dir| -> (Slot, f64) {
            match topo.neighbors(u)[d.index()] {
                Neighbor::Cell(j) => (Slot::Unknown(j), 1.0),
                Neighbor::Cut(l) => (Slot::Link(l), topo.links()[l].theta),
            }
        };
        let comp = |u: usize, d: Dir| -> (Comp, f64) {
            let (s, th) = slot(u, d);
            let inv = 1.0 / (th * g.spacing(d));
            let me = Slot::Unknown(u);
            let c = match d {
                Dir::East | Dir::North => Comp { plus: s, minus: me, inv },
                Dir::West | Dir::South => Comp { plus: me, minus: s, inv },
            };
            (c, th)
        };
        let mut terms = Vec::with_capacity(6 * n);
        for u in 0..n {
            for a in [Dir::East, Dir::West] {
                for b in [Dir::North, Dir::South] {
                    let (ca, ta) = comp(u, a);
                    let (cb, tb) = comp(u, b);
                    terms.push(Term { w: 0.25 * area * ta * tb, c: [ca, cb], n: 2 });
                }
            }
        }
        // quadrant weight landing on a link from the side of unknown u
        let covered = |u: usize, d: Dir| -> f64 {
            let (_, t) = slot(u, d);
            let perp = if d.is_x() { [Dir::North, Dir::South] } else { [Dir::East, Dir::West] };
            0.25 * area * t * (slot(u, perp[0]).1 + slot(u, perp[1]).1)
        };
        let opposite = |d: Dir| match d {
            Dir::East => Dir::West,
            Dir::West => Dir::East,
            Dir::North => Dir::South,
            Dir::South => Dir::North,
        };
        for u in 0..n {
            for d in Dir::ALL {
                let (s, th) = slot(u, d);
                let rest = match s {
                    Slot::Unknown(j) => {
                        if matches!(d, Dir::West | Dir::South) {
                            continue;
                        }
                        area - covered(u, d) - covered(j, opposite(d))
                    }
                    Slot::Link(_) => th * area - covered(u, d),
                };
                if rest > 1e-13 * area {
                    let (c, _) = comp(u, d);
                    terms.push(Term { w: rest, c: [c, c], n: 1 });
                }
            }
        }
        let mut rows: Vec<Vec<usize>> = Vec::with_capacity(n);
        let gr = *g;
        for &cell in topo.cells() {
            let (i, j) = gr.coords(cell);
            let mut r = Vec::with_capacity(9);
            for b in -1..=1i64 {
                for a in -1..=1i64 {
                    if let Some(o) = gr.offset_index(i, j, a, b) {
                        if let Some(k) = topo.unknown_of(o) {
                            r.push(k);
                        }
                    }
                }
            }
            rows.push(r);
        }
        Energy { terms, n, area, pattern: Csr::from_pattern(&rows) }
    }

    pub fn unknowns(&self) -> usize {
        self.n
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn pattern(&self) -> &Csr {
        &self.pattern
    }

    #[inline]
    fn value(s: Slot, u: &[f64], links: &[f64]) -> f64 {
        match s {
            Slot::Unknown(k) => u[k],
            Slot::Link(l) => links[l],
        }
    }

    #[inline]
    fn grad(t: &Term, u: &[f64], links: &[f64]) -> [f64; 2] {
        let mut gr = [0.0; 2];
        for k in 0..t.n {
            let c = t.c[k];
            gr[k] = (Self::value(c.plus, u, links) - Self::value(c.minus, u, links)) * c.inv;
        }
        gr
    }

    /// `J_δ(u)`, Kahan-summed.
    pub fn energy(&self, of: &OrliczFunction, delta: f64, u: &[f64], links: &[f64]) -> f64 {
        let f0 = of.big_f(delta);
        let mut sum = 0.0;
        let mut comp = 0.0;
        for t in &self.terms {
            let g = Self::grad(t, u, links);
            let s = (g[0] * g[0] + g[1] * g[1] + delta * delta).sqrt();
            let y = t.w * (of.big_f(s) - f0) - comp;
            let z = sum + y;
            comp = (z - sum) - y;
            sum = z;
        }
        sum
    }

    /// `∂J_δ/∂u` into `out`.
    pub fn gradient(&self, of: &OrliczFunction, delta: f64, u: &[f64], links: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for t in &self.terms {
            let g = Self::grad(t, u, links);
            let s = (g[0] * g[0] + g[1] * g[1] + delta * delta).sqrt();
            if s == 0.0 {
                continue;
            }
            let hs = t.w * of.big_h(s);
            for k in 0..t.n {
                let c = t.c[k];
                let flux = hs * g[k] * c.inv;
                if let Slot::Unknown(p) = c.plus {
                    out[p] += flux;
                }
                if let Slot::Unknown(m) = c.minus {
                    out[m] -= flux;
                }
            }
        }
    }

    /// Hessian of `J_δ` into `h` (pattern of [`Energy::pattern`]).
    pub fn hessian(&self, of: &OrliczFunction, delta: f64, u: &[f64], links: &[f64], h: &mut Csr) {
        h.clear();
        for t in &self.terms {
            let g = Self::grad(t, u, links);
            let s2 = g[0] * g[0] + g[1] * g[1] + delta * delta;
            let s = s2.sqrt();
            if s == 0.0 {
                continue;
            }
            let big_h = of.big_h(s);
            let coef = (of.dh(s) - big_h) / s2;
            let mut m = [[0.0; 2]; 2];
            for a in 0..t.n {
                for b in 0..t.n {
                    m[a][b] = t.w * (if a == b { big_h } else { 0.0 } + coef * g[a] * g[b]);
                }
            }
            for a in 0..t.n {
                let ca = t.c[a];
                for (sa, ja) in [(ca.plus, ca.inv), (ca.minus, -ca.inv)] {
                    let Slot::Unknown(ra) = sa else { continue };
                    for b in 0..t.n {
                        let cb = t.c[b];
                        for (sb, jb) in [(cb.plus, cb.inv), (cb.minus, -cb.inv)] {
                            let Slot::Unknown(rb) = sb else { continue };
                            let k = h.find(ra, rb).expect("hessian entry outside the stencil");
                            h.val[k] += m[a][b] * ja * jb;
                        }
                    }
                }
            }
        }
    }
}

/// Discrete `Δ_H` at every unknown: `−A⁻¹ ∂J₀/∂u`, a conservative
/// flux balance over the quadrant and edge terms, indexed by unknown.
pub(crate) fn residual_by_unknown(energy: &Energy, field: &ScalarField, of: &OrliczFunction, delta: f64) -> Vec<f64> {
    let u = field.unknown_values();
    let mut g = alloc::vec![0.0; energy.unknowns()];
    energy.gradient(of, delta, &u, field.link_values(), &mut g);
    let a = energy.area();
    g.iter().map(|v| -v / a).collect()
}
