use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{DiniModulus, GeometryError};
use crate::grid::Point;

const CURVE_SAMPLES: usize = 400;
const ARC_SAMPLES: usize = 400;

/// Analytic descriptor of a convex domain.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Shape {
    Disk { center: Point, radius: f64 },
    Polygon { vertices: Vec<Point> },
    /// `B_{r_D}((0, r_D)) ∩ {y > 2|x|ε(|x|)}`, corners rounded by `fillet`,
    /// point-reflected through the origin when `reflected`.
    DiniCap { r_d: f64, modulus: DiniModulus, fillet: f64, reflected: bool },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
enum Repr {
    Disk { center: Point, radius: f64 },
    /// Convex CCW polygon dilated by `round`.
    Rounded { vertices: Vec<Point>, round: f64 },
}

/// A convex planar domain with a signed distance function (negative
/// inside).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvexDomain {
    shape: Shape,
    repr: Repr,
}

impl ConvexDomain {
    pub fn disk(center: Point, radius: f64) -> Result<Self, GeometryError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeometryError::InvalidParameter("disk radius must be positive"));
        }
        Ok(ConvexDomain { shape: Shape::Disk { center, radius }, repr: Repr::Disk { center, radius } })
    }

    /// Convex polygon; vertices may be given in either orientation.
    pub fn polygon(mut vertices: Vec<Point>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::InvalidParameter("polygon needs three vertices"));
        }
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        if !is_convex(&vertices) {
            return Err(GeometryError::InvalidParameter("polygon is not convex"));
        }
        Ok(ConvexDomain { shape: Shape::Polygon { vertices: vertices.clone() }, repr: Repr::Rounded { vertices, round: 0.0 } })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn sdf(&self, p: Point) -> f64 {
        match &self.repr {
            Repr::Disk { center, radius } => p.dist(*center) - radius,
            Repr::Rounded { vertices, round } => polygon_sdf(vertices, p) - round,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.sdf(p) < 0.0
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bbox(&self) -> (Point, Point) {
        match &self.repr {
            Repr::Disk { center, radius } => (Point::new(center.x - radius, center.y - radius), Point::new(center.x + radius, center.y + radius)),
            Repr::Rounded { vertices, round } => {
                let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for v in vertices {
                    lo = Point::new(lo.x.min(v.x), lo.y.min(v.y));
                    hi = Point::new(hi.x.max(v.x), hi.y.max(v.y));
                }
                (Point::new(lo.x - round, lo.y - round), Point::new(hi.x + round, hi.y + round))
            }
        }
    }

    /// The point reflection `−K`.
    pub fn reflect(&self) -> ConvexDomain {
        let shape = match &self.shape {
            Shape::Disk { center, radius } => Shape::Disk { center: -*center, radius: *radius },
            Shape::Polygon { vertices } => Shape::Polygon { vertices: vertices.iter().map(|v| -*v).collect() },
            Shape::DiniCap { r_d, modulus, fillet, reflected } => Shape::DiniCap { r_d: *r_d, modulus: modulus.clone(), fillet: *fillet, reflected: !reflected },
        };
        let repr = match &self.repr {
            Repr::Disk { center, radius } => Repr::Disk { center: -*center, radius: *radius },
            Repr::Rounded { vertices, round } => Repr::Rounded { vertices: vertices.iter().map(|v| -*v).collect(), round: *round },
        };
        ConvexDomain { shape, repr }
    }

    /// The cap `K = B_{r_D}((0, r_D)) ∩ {y > 2|x|ε(|x|)}` touching the
    /// origin from above, with the two corners where the cut curve meets
    /// the circle rounded to radius `fillet` (typically one grid cell).
    ///
    /// Fails with `ContainmentViolated` unless `B_{3r_D/4}((0, r_D)) ⋐ K`.
    pub fn dini_cap(r_d: f64, modulus: &DiniModulus, fillet: f64) -> Result<Self, GeometryError> {
        if !(r_d > 0.0 && r_d.is_finite()) {
            return Err(GeometryError::InvalidParameter("r_D must be positive"));
        }
        if !(fillet >= 0.0 && fillet < 0.25 * r_d) {
            return Err(GeometryError::InvalidParameter("fillet must lie in [0, r_D/4)"));
        }
        if !modulus.is_convex_dini(r_d.min(modulus.t_cap)) {
            return Err(GeometryError::NotConvexDini);
        }
        let center = Point::new(0.0, r_d);
        let shape = Shape::DiniCap { r_d, modulus: modulus.clone(), fillet, reflected: false };
        let cut = |x: f64| 2.0 * x * modulus.eps(x);
        let excess = |x: f64| {
            let c = cut(x);
            x * x + c * c - 2.0 * r_d * c
        };
        // first crossing of the cut curve with the circle, x > 0; at x = r_D
        // the excess is (r_D − cut)² ≥ 0, so a crossing exists unless the
        // curve starts outside the disk
        let mut bracket = None;
        let n = 4000;
        let mut prev = 0.0;
        for k in 1..=n {
            let x = r_d * k as f64 / n as f64;
            let v = excess(x);
            if k == 1 && v > 0.0 {
                break;
            }
            if v >= 0.0 || k == n {
                bracket = Some((prev, x));
                break;
            }
            prev = x;
        }
        let domain = match bracket {
            None => {
                // the curve stays below the disk: K is the disk itself
                ConvexDomain { shape, repr: Repr::Disk { center, radius: r_d } }
            }
            Some((mut lo, mut hi)) => {
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if excess(mid) > 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                let xs = lo;
                let ys = cut(xs);
                let mut vertices = Vec::with_capacity(2 * CURVE_SAMPLES + ARC_SAMPLES + 1);
                for k in (1..=CURVE_SAMPLES).rev() {
                    let s = k as f64 / CURVE_SAMPLES as f64;
                    let x = xs * s * s;
                    vertices.push(Point::new(-x, cut(x)));
                }
                vertices.push(Point::ORIGIN);
                for k in 1..=CURVE_SAMPLES {
                    let s = k as f64 / CURVE_SAMPLES as f64;
                    let x = xs * s * s;
                    vertices.push(Point::new(x, cut(x)));
                }
                let phi0 = (ys - r_d).atan2(xs);
                let phi1 = core::f64::consts::PI - phi0;
                for k in 1..ARC_SAMPLES {
                    let phi = phi0 + (phi1 - phi0) * k as f64 / ARC_SAMPLES as f64;
                    vertices.push(Point::new(r_d * phi.cos(), r_d + r_d * phi.sin()));
                }
                let mut core = if fillet > 0.0 { inset(&vertices, fillet) } else { vertices };
                if core.len() < 3 {
                    return Err(GeometryError::InvalidParameter("fillet consumes the cap"));
                }
                // keep the origin on the boundary after rounding
                let bottom = core.iter().map(|v| v.y).fold(f64::INFINITY, f64::min) - fillet;
                for v in core.iter_mut() {
                    v.y -= bottom;
                }
                ConvexDomain { shape, repr: Repr::Rounded { vertices: core, round: fillet } }
            }
        };
        let depth = -domain.sdf(center);
        if !(depth > 0.75 * r_d) {
            return Err(GeometryError::ContainmentViolated { distance: depth, required: 0.75 * r_d });
        }
        Ok(domain)
    }
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    (0..n).map(|k| v[k].cross(v[(k + 1) % n])).sum::<f64>() * 0.5
}

fn is_convex(v: &[Point]) -> bool {
    let n = v.len();
    (0..n).all(|k| {
        let a = v[k];
        let b = v[(k + 1) % n];
        let c = v[(k + 2) % n];
        (b - a).cross(c - b) >= -1e-12 * (b - a).norm() * (c - b).norm()
    })
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    let t = if len2 > 0.0 { ((p - a).dot(ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    p.dist(a + ab * t)
}

/// Signed distance to a convex CCW polygon.
pub(crate) fn polygon_sdf(v: &[Point], p: Point) -> f64 {
    let n = v.len();
    let mut d = f64::INFINITY;
    let mut inside = true;
    for k in 0..n {
        let a = v[k];
        let b = v[(k + 1) % n];
        d = d.min(segment_distance(p, a, b));
        if (b - a).cross(p - a) < 0.0 {
            inside = false;
        }
    }
    if inside {
        -d
    } else {
        d
    }
}

/// Shrinks a convex CCW polygon by `r`: clips it against every edge's
/// half-plane moved inward by `r` (Sutherland–Hodgman).
fn inset(v: &[Point], r: f64) -> Vec<Point> {
    let n = v.len();
    let mut poly: Vec<Point> = v.to_vec();
    for k in 0..n {
        let a = v[k];
        let b = v[(k + 1) % n];
        let e = b - a;
        let len = e.norm();
        if len == 0.0 {
            continue;
        }
        // inward normal for CCW orientation
        let nrm = Point::new(-e.y / len, e.x / len);
        let off = a.dot(nrm) + r;
        let side = |p: Point| p.dot(nrm) - off;
        let mut out = Vec::with_capacity(poly.len());
        for j in 0..poly.len() {
            let p = poly[j];
            let q = poly[(j + 1) % poly.len()];
            let (sp, sq) = (side(p), side(q));
            if sp >= 0.0 {
                out.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                let t = sp / (sp - sq);
                out.push(p + (q - p) * t);
            }
        }
        poly = out;
        if poly.len() < 3 {
            return poly;
        }
    }
    poly
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn disk_sdf() {
        let d = ConvexDomain::disk(Point::new(1.0, 0.0), 2.0).unwrap();
        assert_eq!(d.sdf(Point::new(1.0, 0.0)), -2.0);
        assert_eq!(d.sdf(Point::new(4.0, 0.0)), 1.0);
    }

    #[test]
    fn square_sdf_and_orientation() {
        let sq = ConvexDomain::polygon(vec![Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 1.0), Point::new(1.0, 0.0)]).unwrap();
        assert!((sq.sdf(Point::new(0.5, 0.5)) + 0.5).abs() < 1e-15);
        assert!((sq.sdf(Point::new(2.0, 0.5)) - 1.0).abs() < 1e-15);
        assert!((sq.sdf(Point::new(2.0, 2.0)) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn nonconvex_polygon_rejected() {
        let v = vec![Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(1.0, 0.2), Point::new(1.0, 2.0)];
        assert!(ConvexDomain::polygon(v).is_err());
    }

    #[test]
    fn inset_square() {
        let v = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
        let s = inset(&v, 0.25);
        assert_eq!(s.len(), 4);
        assert!((signed_area(&s) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn cap_touches_origin_and_contains_ball() {
        let eps = DiniModulus::power(0.5).unwrap();
        for &fillet in &[0.0, 2.0 / 256.0] {
            let k = ConvexDomain::dini_cap(0.25, &eps, fillet).unwrap();
            assert!(k.sdf(Point::ORIGIN).abs() < 1e-12);
            assert!(k.sdf(Point::new(0.0, 0.25)) < -0.75 * 0.25);
            assert!(k.contains(Point::new(0.0, 0.01)));
            assert!(!k.contains(Point::new(0.0, -0.01)));
            let r = k.reflect();
            assert!(r.contains(Point::new(0.0, -0.1)));
            assert!(r.sdf(Point::ORIGIN).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_modulus_cap_is_a_disk() {
        let eps = DiniModulus::power(1.0).unwrap();
        let k = ConvexDomain::dini_cap(0.2, &eps, 0.0).unwrap();
        assert_eq!(k.sdf(Point::new(0.0, 0.2)), -0.2);
    }

    #[test]
    fn large_cap_violates_containment() {
        let eps = DiniModulus::power(0.5).unwrap();
        let r = ConvexDomain::dini_cap(0.9, &eps, 0.0);
        assert!(matches!(r, Err(GeometryError::ContainmentViolated { .. })));
    }
}
