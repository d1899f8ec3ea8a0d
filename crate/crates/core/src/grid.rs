//! Cell-centred rectangular grids.

use core::ops::{Add, Mul, Sub};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl core::ops::Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Axis directions between neighbouring cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Dir {
    East,
    West,
    North,
    South,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::East, Dir::West, Dir::North, Dir::South];

    pub fn offset(self) -> (i64, i64) {
        match self {
            Dir::East => (1, 0),
            Dir::West => (-1, 0),
            Dir::North => (0, 1),
            Dir::South => (0, -1),
        }
    }

    pub fn is_x(self) -> bool {
        matches!(self, Dir::East | Dir::West)
    }

    pub fn index(self) -> usize {
        match self {
            Dir::East => 0,
            Dir::West => 1,
            Dir::North => 2,
            Dir::South => 3,
        }
    }

    pub fn unit(self) -> Point {
        let (a, b) = self.offset();
        Point::new(a as f64, b as f64)
    }
}

/// A uniform grid of `nx × ny` cells; values live at cell centres.
/// Cell `(i, j)` has linear index `j * nx + i` (row-major, rows along x).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    /// Lower-left corner of the covered rectangle.
    pub origin: Point,
    pub dx: f64,
    pub dy: f64,
}

impl Grid {
    /// Grid covering `[x0, x1] × [y0, y1]` with `nx × ny` cells.
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), nx: usize, ny: usize) -> Option<Self> {
        let ok = nx >= 2 && ny >= 2 && x_range.1 > x_range.0 && y_range.1 > y_range.0;
        if !ok || !(x_range.0.is_finite() && x_range.1.is_finite() && y_range.0.is_finite() && y_range.1.is_finite()) {
            return None;
        }
        Some(Grid {
            nx,
            ny,
            origin: Point::new(x_range.0, y_range.0),
            dx: (x_range.1 - x_range.0) / nx as f64,
            dy: (y_range.1 - y_range.0) / ny as f64,
        })
    }

    /// Square grid of `n × n` cells over `[lo, hi]²`.
    pub fn square(lo: f64, hi: f64, n: usize) -> Option<Self> {
        Grid::new((lo, hi), (lo, hi), n, n)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    pub fn center(&self, i: usize, j: usize) -> Point {
        Point::new(self.origin.x + (i as f64 + 0.5) * self.dx, self.origin.y + (j as f64 + 0.5) * self.dy)
    }

    pub fn center_of(&self, idx: usize) -> Point {
        let (i, j) = self.coords(idx);
        self.center(i, j)
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn max_spacing(&self) -> f64 {
        self.dx.max(self.dy)
    }

    pub fn spacing(&self, d: Dir) -> f64 {
        if d.is_x() {
            self.dx
        } else {
            self.dy
        }
    }

    /// Neighbour of `idx` in direction `d`, if it exists.
    pub fn neighbor(&self, idx: usize, d: Dir) -> Option<usize> {
        let (i, j) = self.coords(idx);
        let (a, b) = d.offset();
        self.offset_index(i, j, a, b)
    }

    pub fn offset_index(&self, i: usize, j: usize, a: i64, b: i64) -> Option<usize> {
        let ii = i as i64 + a;
        let jj = j as i64 + b;
        if ii < 0 || jj < 0 || ii >= self.nx as i64 || jj >= self.ny as i64 {
            None
        } else {
            Some(self.index(ii as usize, jj as usize))
        }
    }

    /// Fractional cell coordinates of `p`: the centre of cell `(i, j)` maps
    /// to `(i, j)`.
    pub fn fractional(&self, p: Point) -> (f64, f64) {
        ((p.x - self.origin.x) / self.dx - 0.5, (p.y - self.origin.y) / self.dy - 0.5)
    }

    /// Cell whose centre is nearest to `p`, if `p` lies on the grid.
    pub fn nearest(&self, p: Point) -> Option<usize> {
        let (fx, fy) = self.fractional(p);
        let i = fx.round();
        let j = fy.round();
        if i < 0.0 || j < 0.0 || i >= self.nx as f64 || j >= self.ny as f64 {
            None
        } else {
            Some(self.index(i as usize, j as usize))
        }
    }

    pub fn is_border(&self, idx: usize) -> bool {
        let (i, j) = self.coords(idx);
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }
}
