//! Grid topology of a convex ring and scalar fields living on it.
//!
//! Cells whose centre lies strictly inside the ring are unknowns. Every
//! axis link from an unknown to a non-interior cell is cut where it crosses
//! the ring boundary; the crossing fraction `θ ∈ [θ_min, 1]` and the
//! boundary value at the crossing point define the Dirichlet data seen by
//! the discretisation.

use alloc::collections::VecDeque;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::ConvexRing;
use crate::grid::{Dir, Grid, Point};

/// Smallest admissible crossing fraction of a cut link.
pub const THETA_MIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CellKind {
    Interior,
    /// Inside `K₁` and adjacent to an interior cell.
    InnerBoundary,
    /// Outside `K₂` and adjacent to an interior cell.
    OuterBoundary,
    Outside,
}

/// Which boundary of the ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Side {
    Inner,
    Outer,
}

/// A cut axis link from an interior cell towards the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub cell: usize,
    pub unknown: usize,
    pub dir: Dir,
    pub theta: f64,
    pub side: Side,
    /// Boundary crossing point.
    pub point: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    /// Another unknown.
    Cell(usize),
    /// A cut link.
    Cut(usize),
}

/// Discrete structure of a ring on its grid.
pub struct Topology {
    ring: ConvexRing,
    kind: Vec<CellKind>,
    side: Vec<Option<Side>>,
    unknown_of: Vec<Option<usize>>,
    cells: Vec<usize>,
    neighbors: Vec<[Neighbor; 4]>,
    links: Vec<Link>,
    sdf_inner: Vec<f64>,
    sdf_outer: Vec<f64>,
    depth: Vec<u32>,
}

impl Topology {
    pub fn new(ring: &ConvexRing) -> Arc<Topology> {
        let grid = ring.grid;
        let n = grid.len();
        let sdf_inner: Vec<f64> = (0..n).map(|k| ring.inner.sdf(grid.center_of(k))).collect();
        let sdf_outer: Vec<f64> = (0..n).map(|k| ring.outer.sdf(grid.center_of(k))).collect();
        let interior: Vec<bool> = (0..n).map(|k| sdf_inner[k] > 0.0 && sdf_outer[k] < 0.0).collect();
        let mut unknown_of = vec![None; n];
        let mut cells = Vec::new();
        for k in 0..n {
            if interior[k] {
                unknown_of[k] = Some(cells.len());
                cells.push(k);
            }
        }
        let side: Vec<Option<Side>> = (0..n)
            .map(|k| {
                if interior[k] {
                    None
                } else if sdf_inner[k] <= 0.0 {
                    Some(Side::Inner)
                } else {
                    Some(Side::Outer)
                }
            })
            .collect();
        let mut kind = vec![CellKind::Outside; n];
        let mut links = Vec::new();
        let mut neighbors = Vec::with_capacity(cells.len());
        for (u, &c) in cells.iter().enumerate() {
            kind[c] = CellKind::Interior;
            let mut nb = [Neighbor::Cell(0); 4];
            for d in Dir::ALL {
                let o = grid.neighbor(c, d).expect("interior cell on the grid border");
                if let Some(j) = unknown_of[o] {
                    nb[d.index()] = Neighbor::Cell(j);
                    continue;
                }
                let s = side[o].unwrap();
                kind[o] = match s {
                    Side::Inner => CellKind::InnerBoundary,
                    Side::Outer => CellKind::OuterBoundary,
                };
                let p0 = grid.center_of(c);
                let p1 = grid.center_of(o);
                let f = |t: f64| {
                    let p = p0 + (p1 - p0) * t;
                    match s {
                        Side::Inner => -ring.inner.sdf(p),
                        Side::Outer => ring.outer.sdf(p),
                    }
                };
                let t = crossing(f);
                let theta = t.max(THETA_MIN);
                nb[d.index()] = Neighbor::Cut(links.len());
                links.push(Link { cell: c, unknown: u, dir: d, theta, side: s, point: p0 + (p1 - p0) * theta });
            }
            neighbors.push(nb);
        }
        // Chebyshev distance to the nearest non-interior cell
        let mut depth = vec![u32::MAX; n];
        let mut queue = VecDeque::new();
        for k in 0..n {
            if !interior[k] {
                depth[k] = 0;
                queue.push_back(k);
            }
        }
        while let Some(k) = queue.pop_front() {
            let (i, j) = grid.coords(k);
            for b in -1..=1i64 {
                for a in -1..=1i64 {
                    if let Some(o) = grid.offset_index(i, j, a, b) {
                        if depth[o] == u32::MAX {
                            depth[o] = depth[k] + 1;
                            queue.push_back(o);
                        }
                    }
                }
            }
        }
        Arc::new(Topology { ring: ring.clone(), kind, side, unknown_of, cells, neighbors, links, sdf_inner, sdf_outer, depth })
    }

    pub fn ring(&self) -> &ConvexRing {
        &self.ring
    }

    pub fn grid(&self) -> &Grid {
        &self.ring.grid
    }

    pub fn kind(&self, cell: usize) -> CellKind {
        self.kind[cell]
    }

    pub fn side(&self, cell: usize) -> Option<Side> {
        self.side[cell]
    }

    pub fn is_interior(&self, cell: usize) -> bool {
        self.kind[cell] == CellKind::Interior
    }

    pub fn unknown_of(&self, cell: usize) -> Option<usize> {
        self.unknown_of[cell]
    }

    pub fn unknowns(&self) -> usize {
        self.cells.len()
    }

    /// Grid cell of each unknown.
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn neighbors(&self, unknown: usize) -> &[Neighbor; 4] {
        &self.neighbors[unknown]
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    /// Chebyshev distance in cells to the nearest non-interior cell.
    pub fn depth(&self, cell: usize) -> u32 {
        self.depth[cell]
    }

    pub fn sdf_inner(&self, cell: usize) -> f64 {
        self.sdf_inner[cell]
    }

    pub fn sdf_outer(&self, cell: usize) -> f64 {
        self.sdf_outer[cell]
    }

    /// Ring level function: negative exactly in the open ring.
    pub fn phi(&self, cell: usize) -> f64 {
        self.sdf_outer[cell].max(-self.sdf_inner[cell])
    }

    /// Exact ring level function at an arbitrary point.
    pub fn phi_at(&self, p: Point) -> f64 {
        self.ring.outer.sdf(p).max(-self.ring.inner.sdf(p))
    }
}

impl core::fmt::Debug for Topology {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Topology").field("grid", &self.ring.grid).field("unknowns", &self.cells.len()).field("links", &self.links.len()).finish()
    }
}

// Root of f on [0, 1] with f(0) < 0 ≤ f(1); falls back to 1 when the sign
// pattern is violated by rounding.
fn crossing(f: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    if f(hi) < 0.0 || f(lo) >= 0.0 {
        return if f(lo) >= 0.0 { THETA_MIN } else { 1.0 };
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A scalar function on the cells of a ring grid together with its values
/// at the boundary crossing points of the cut links.
#[derive(Clone)]
pub struct ScalarField {
    topo: Arc<Topology>,
    values: Vec<f64>,
    link_values: Vec<f64>,
}

impl core::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ScalarField").field("topology", &self.topo).finish_non_exhaustive()
    }
}

impl ScalarField {
    /// Constant data on each boundary; interior cells start at `init`.
    pub fn ring_data(topo: &Arc<Topology>, inner: f64, outer: f64, init: f64) -> Self {
        let n = topo.grid().len();
        let values = (0..n)
            .map(|k| match topo.side(k) {
                None => init,
                Some(Side::Inner) => inner,
                Some(Side::Outer) => outer,
            })
            .collect();
        let link_values = topo
            .links()
            .iter()
            .map(|l| match l.side {
                Side::Inner => inner,
                Side::Outer => outer,
            })
            .collect();
        ScalarField { topo: topo.clone(), values, link_values }
    }

    /// `f` sampled at cell centres and crossing points.
    pub fn from_fn(topo: &Arc<Topology>, f: impl Fn(Point) -> f64) -> Self {
        let g = *topo.grid();
        let values = (0..g.len()).map(|k| f(g.center_of(k))).collect();
        let link_values = topo.links().iter().map(|l| f(l.point)).collect();
        ScalarField { topo: topo.clone(), values, link_values }
    }

    pub fn from_parts(topo: &Arc<Topology>, values: Vec<f64>, link_values: Vec<f64>) -> Option<Self> {
        if values.len() != topo.grid().len() || link_values.len() != topo.links().len() {
            return None;
        }
        Some(ScalarField { topo: topo.clone(), values, link_values })
    }

    /// Applies `f` to every cell and boundary value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            topo: self.topo.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            link_values: self.link_values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn topology(&self) -> &Arc<Topology> {
        &self.topo
    }

    pub fn grid(&self) -> &Grid {
        self.topo.grid()
    }

    pub fn value(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn link_values(&self) -> &[f64] {
        &self.link_values
    }

    pub fn link_value(&self, link: usize) -> f64 {
        self.link_values[link]
    }

    pub fn unknown_values(&self) -> Vec<f64> {
        self.topo.cells().iter().map(|&c| self.values[c]).collect()
    }

    pub fn interior_values(&self) -> Vec<f64> {
        self.unknown_values()
    }

    /// Overwrites the interior cells from a vector indexed by unknown.
    pub fn set_unknowns(&mut self, u: &[f64]) {
        for (k, &c) in self.topo.cells().iter().enumerate() {
            self.values[c] = u[k];
        }
    }

    /// Value and distance of the neighbour of `unknown` in direction `d`.
    pub fn neighbor(&self, unknown: usize, d: Dir) -> (f64, f64) {
        let h = self.grid().spacing(d);
        match self.topo.neighbors(unknown)[d.index()] {
            Neighbor::Cell(j) => (self.values[self.topo.cells()[j]], h),
            Neighbor::Cut(l) => (self.link_values[l], self.topo.links()[l].theta * h),
        }
    }

    /// Range of the boundary data.
    pub fn boundary_range(&self) -> (f64, f64) {
        self.link_values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}
