//! Small 2D vector/affine toolbox shared by the geometry modules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

/// `det(a, b)` for plane vectors, i.e. the signed parallelogram area.
pub fn cross(a: Point, b: Point) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Signed shoelace area of a polygon given by its vertex cycle.
/// Positive for counterclockwise orientation.
pub fn signed_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..n {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        sum += p.x * q.y - q.x * p.y;
    }
    0.5 * sum
}

/// Affine map `p -> M p + t`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AffineMap {
    /// Row-major linear part `[[a, b], [c, d]]`.
    pub linear: [[f64; 2]; 2],
    pub translation: Point,
}

impl AffineMap {
    pub fn identity() -> Self {
        Self {
            linear: [[1.0, 0.0], [0.0, 1.0]],
            translation: Point::new(0.0, 0.0),
        }
    }

    /// Map with columns `col_a`, `col_b` and translation `t`.
    pub fn from_columns(col_a: Point, col_b: Point, t: Point) -> Self {
        Self {
            linear: [[col_a.x, col_b.x], [col_a.y, col_b.y]],
            translation: t,
        }
    }

    pub fn det(&self) -> f64 {
        self.linear[0][0] * self.linear[1][1] - self.linear[0][1] * self.linear[1][0]
    }

    pub fn apply(&self, p: Point) -> Point {
        Point::new(
            self.linear[0][0] * p.x + self.linear[0][1] * p.y + self.translation.x,
            self.linear[1][0] * p.x + self.linear[1][1] * p.y + self.translation.y,
        )
    }

    pub fn inverse(&self) -> Result<AffineMap> {
        let d = self.det();
        if d.abs() < 1e-300 {
            return Err(Error::Degenerate);
        }
        let [[a, b], [c, dd]] = self.linear;
        let inv = [[dd / d, -b / d], [-c / d, a / d]];
        let t = Point::new(
            -(inv[0][0] * self.translation.x + inv[0][1] * self.translation.y),
            -(inv[1][0] * self.translation.x + inv[1][1] * self.translation.y),
        );
        Ok(AffineMap {
            linear: inv,
            translation: t,
        })
    }

    /// `self` after `other`: `(self ∘ other)(p) = self(other(p))`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        let m = |r: usize, c: usize| {
            self.linear[r][0] * other.linear[0][c] + self.linear[r][1] * other.linear[1][c]
        };
        AffineMap {
            linear: [[m(0, 0), m(0, 1)], [m(1, 0), m(1, 1)]],
            translation: self.apply(other.translation),
        }
    }

    /// The affine map sending `src[0..3]` onto `dst[0..3]`.
    pub fn from_triangle_pair(src: [Point; 3], dst: [Point; 3]) -> Result<AffineMap> {
        // Solve M (src_i - src_0) = dst_i - dst_0 for the linear part.
        let e1 = src[1] - src[0];
        let e2 = src[2] - src[0];
        let d = cross(e1, e2);
        if d.abs() < 1e-300 {
            return Err(Error::Degenerate);
        }
        let f1 = dst[1] - dst[0];
        let f2 = dst[2] - dst[0];
        // Columns of M in the (e1, e2) frame, converted to the standard frame.
        let a = (f1.x * e2.y - f2.x * e1.y) / d;
        let b = (f2.x * e1.x - f1.x * e2.x) / d;
        let c = (f1.y * e2.y - f2.y * e1.y) / d;
        let dd = (f2.y * e1.x - f1.y * e2.x) / d;
        let linear = [[a, b], [c, dd]];
        let lin_src0 = Point::new(
            linear[0][0] * src[0].x + linear[0][1] * src[0].y,
            linear[1][0] * src[0].x + linear[1][1] * src[0].y,
        );
        Ok(AffineMap {
            linear,
            translation: dst[0] - lin_src0,
        })
    }
}
