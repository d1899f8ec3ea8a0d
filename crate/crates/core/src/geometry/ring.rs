use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ConvexDomain, GeometryError};
use crate::grid::{Grid, Point};

/// Cell-centred inside mask and signed distance of a domain on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub inside: Vec<bool>,
    pub sdf: Vec<f64>,
}

/// Samples `dom` at cell centres. Fails with `GridTooSmall` when the domain
/// reaches a border cell.
pub fn rasterize(dom: &ConvexDomain, grid: &Grid) -> Result<Raster, GeometryError> {
    let sdf: Vec<f64> = (0..grid.len()).map(|k| dom.sdf(grid.center_of(k))).collect();
    let inside: Vec<bool> = sdf.iter().map(|&d| d < 0.0).collect();
    if (0..grid.len()).any(|k| inside[k] && grid.is_border(k)) {
        return Err(GeometryError::GridTooSmall);
    }
    Ok(Raster { inside, sdf })
}

/// A ring `K₂ ∖ K₁` of nested convex domains on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexRing {
    pub inner: ConvexDomain,
    pub outer: ConvexDomain,
    pub grid: Grid,
    /// Measured gap between the boundaries.
    pub gap: f64,
}

impl ConvexRing {
    /// Validates `K₁ ⋐ K₂` with a gap of at least two cells, a resolved
    /// inner domain, and an outer domain clear of the grid border.
    pub fn new(inner: ConvexDomain, outer: ConvexDomain, grid: Grid) -> Result<Self, GeometryError> {
        let outer_r = rasterize(&outer, &grid)?;
        let mut gap = f64::INFINITY;
        let mut inner_cells = 0usize;
        for k in 0..grid.len() {
            let s1 = inner.sdf(grid.center_of(k));
            let s2 = outer_r.sdf[k];
            if s1 < 0.0 {
                inner_cells += 1;
                if s2 >= 0.0 {
                    gap = gap.min(-s2 - s1.abs());
                }
            } else if s2 <= 0.0 {
                gap = gap.min(s1 - s2);
            }
        }
        let required = 2.0 * grid.max_spacing();
        if inner_cells == 0 || !(gap >= required) {
            return Err(GeometryError::GapTooSmall { gap, required });
        }
        Ok(ConvexRing { inner, outer, grid, gap })
    }
}

/// Concentric ring `B_{r2} ∖ B_{r1}` about the origin.
pub fn make_annulus(r1: f64, r2: f64, grid: Grid) -> Result<ConvexRing, GeometryError> {
    if !(r1 > 0.0 && r2 > r1 && r2.is_finite()) {
        return Err(GeometryError::BadRadii { r1, r2 });
    }
    ConvexRing::new(ConvexDomain::disk(Point::ORIGIN, r1)?, ConvexDomain::disk(Point::ORIGIN, r2)?, grid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rings {
    /// `K ∖ B_{r_D/2}((0, r_D))`.
    pub inner_ring: ConvexRing,
    /// `B_{3r_D}((0, −r_D)) ∖ (−K)`.
    pub outer_ring: ConvexRing,
}

/// The two rings attached to a cap `K` of radius `r_D`. Each ring lives on
/// `grid`, extended by whole cells where the ring's outer domain would
/// otherwise reach the border.
pub fn make_rings(k: &ConvexDomain, r_d: f64, grid: &Grid) -> Result<Rings, GeometryError> {
    if !(r_d > 0.0) {
        return Err(GeometryError::InvalidParameter("r_D must be positive"));
    }
    let inner_disk = ConvexDomain::disk(Point::new(0.0, r_d), 0.5 * r_d)?;
    let g1 = cover(grid, k.bbox());
    let inner_ring = ConvexRing::new(inner_disk, k.clone(), g1)?;
    let outer_disk = ConvexDomain::disk(Point::new(0.0, -r_d), 3.0 * r_d)?;
    let g2 = cover(grid, outer_disk.bbox());
    let outer_ring = ConvexRing::new(k.reflect(), outer_disk, g2)?;
    Ok(Rings { inner_ring, outer_ring })
}

/// `grid` extended by whole cells so that `bbox` plus a two-cell margin
/// lies strictly inside.
pub fn cover(grid: &Grid, bbox: (Point, Point)) -> Grid {
    let (lo, hi) = bbox;
    let x_hi = grid.origin.x + grid.nx as f64 * grid.dx;
    let y_hi = grid.origin.y + grid.ny as f64 * grid.dy;
    let grow = |need: f64, h: f64| if need > 0.0 { (need / h).ceil() as usize } else { 0 };
    let left = grow(grid.origin.x - (lo.x - 2.0 * grid.dx), grid.dx);
    let right = grow(hi.x + 2.0 * grid.dx - x_hi, grid.dx);
    let down = grow(grid.origin.y - (lo.y - 2.0 * grid.dy), grid.dy);
    let up = grow(hi.y + 2.0 * grid.dy - y_hi, grid.dy);
    Grid {
        nx: grid.nx + left + right,
        ny: grid.ny + down + up,
        origin: Point::new(grid.origin.x - left as f64 * grid.dx, grid.origin.y - down as f64 * grid.dy),
        dx: grid.dx,
        dy: grid.dy,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvexityReport {
    pub pairs: usize,
    pub violations: usize,
    pub worst: Option<(Point, Point)>,
}

impl ConvexityReport {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

/// Random-midpoint convexity test of a cell set: the midpoint of two member
/// cells must lie within one cell of a member.
pub fn midpoint_convexity(grid: &Grid, member: &[bool], pairs: usize, seed: u64) -> ConvexityReport {
    let cells: Vec<usize> = (0..grid.len()).filter(|&k| member[k]).collect();
    let mut report = ConvexityReport { pairs: 0, violations: 0, worst: None };
    if cells.len() < 2 {
        return report;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..pairs {
        let a = grid.center_of(cells[rng.gen_range(0..cells.len())]);
        let b = grid.center_of(cells[rng.gen_range(0..cells.len())]);
        let m = (a + b) * 0.5;
        report.pairs += 1;
        let (fx, fy) = grid.fractional(m);
        let (i0, j0) = (fx.floor() as i64, fy.floor() as i64);
        let mut ok = false;
        'search: for dj in -1..=2 {
            for di in -1..=2 {
                let (i, j) = (i0 + di, j0 + dj);
                if i < 0 || j < 0 || i >= grid.nx as i64 || j >= grid.ny as i64 {
                    continue;
                }
                let c = grid.index(i as usize, j as usize);
                if member[c] && grid.center_of(c).dist(m) <= 1.5 * grid.max_spacing() {
                    ok = true;
                    break 'search;
                }
            }
        }
        if !ok {
            report.violations += 1;
            report.worst.get_or_insert((a, b));
        }
    }
    report
}

/// Midpoint test against the exact signed distance of `dom`, sampling pairs
/// of interior cells of `grid`.
pub fn domain_convexity(dom: &ConvexDomain, grid: &Grid, pairs: usize, seed: u64) -> ConvexityReport {
    let member: Vec<bool> = (0..grid.len()).map(|k| dom.contains(grid.center_of(k))).collect();
    let cells: Vec<usize> = (0..grid.len()).filter(|&k| member[k]).collect();
    let mut report = ConvexityReport { pairs: 0, violations: 0, worst: None };
    if cells.len() < 2 {
        return report;
    }
    let tol = grid.max_spacing() * core::f64::consts::SQRT_2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..pairs {
        let a = grid.center_of(cells[rng.gen_range(0..cells.len())]);
        let b = grid.center_of(cells[rng.gen_range(0..cells.len())]);
        report.pairs += 1;
        if dom.sdf((a + b) * 0.5) > tol {
            report.violations += 1;
            report.worst.get_or_insert((a, b));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DiniModulus;

    #[test]
    fn unit_disk_area() {
        let g = Grid::square(-2.0, 2.0, 129).unwrap();
        let d = ConvexDomain::disk(Point::ORIGIN, 1.0).unwrap();
        let r = rasterize(&d, &g).unwrap();
        let area = r.inside.iter().filter(|&&b| b).count() as f64 * g.cell_area();
        assert!((area - core::f64::consts::PI).abs() < 0.02 * core::f64::consts::PI);
        assert_eq!(d.sdf(Point::ORIGIN), -1.0);
    }

    #[test]
    fn disk_touching_border() {
        let g = Grid::square(-1.0, 1.0, 33).unwrap();
        let d = ConvexDomain::disk(Point::ORIGIN, 1.0).unwrap();
        assert_eq!(rasterize(&d, &g), Err(GeometryError::GridTooSmall));
    }

    #[test]
    fn annulus_validation() {
        let g = Grid::square(-2.1, 2.1, 257).unwrap();
        assert!(make_annulus(1.0, 2.0, g).is_ok());
        assert!(matches!(make_annulus(2.0, 1.0, g), Err(GeometryError::BadRadii { .. })));
        let g33 = Grid::square(-1.1, 1.1, 33).unwrap();
        assert!(matches!(make_annulus(1.0, 1.01, g33), Err(GeometryError::GapTooSmall { .. })));
    }

    #[test]
    fn cap_rings() {
        let g = Grid::square(-1.0, 1.0, 257).unwrap();
        let eps = DiniModulus::power(0.5).unwrap();
        let k = ConvexDomain::dini_cap(0.25, &eps, g.dx).unwrap();
        let rings = make_rings(&k, 0.25, &g).unwrap();
        assert!(rings.inner_ring.gap >= 2.0 * g.dx);
        assert!(rings.outer_ring.gap >= 2.0 * g.dx);
        assert!(rings.outer_ring.inner.sdf(Point::ORIGIN).abs() < 1e-12);
        let coarse = Grid::square(-1.0, 1.0, 9).unwrap();
        assert!(matches!(make_rings(&k, 0.25, &coarse), Err(GeometryError::GapTooSmall { .. })));
    }

    #[test]
    fn convexity_of_domains() {
        let g = Grid::square(-1.0, 1.0, 129).unwrap();
        let eps = DiniModulus::power(0.5).unwrap();
        let k = ConvexDomain::dini_cap(0.25, &eps, g.dx).unwrap();
        assert!(domain_convexity(&k, &g, 10_000, 7).pass());
        let member: Vec<bool> = (0..g.len()).map(|c| k.contains(g.center_of(c))).collect();
        assert!(midpoint_convexity(&g, &member, 10_000, 7).pass());
        // an L-shaped set is caught
        let ell: Vec<bool> = (0..g.len())
            .map(|c| {
                let p = g.center_of(c);
                (p.y.abs() < 0.1 && p.x > -0.1 && p.x < 0.8) || (p.x.abs() < 0.1 && p.y > -0.1 && p.y < 0.8)
            })
            .collect();
        assert!(!midpoint_convexity(&g, &ell, 10_000, 7).pass());
    }
}
