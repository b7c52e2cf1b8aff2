//! Quarter-convex disks: the region under a concave non-increasing height
//! profile `f` on `[0, 1]` with `f(0) = 1`, plus affine normalization of
//! triangles and convex quadrilaterals onto that form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{cross, AffineMap, Point};
use crate::{CANONICAL_EPS, PREDICATE_EPS};

/// The disk `K = {(x, y) : 0 <= x <= 1, 0 <= y <= f(x)}` for a
/// piecewise-linear concave non-increasing `f` with `f(0) = 1`.
///
/// Breakpoints run from `(0, 1)` to `(1, f(1))` with strictly increasing
/// abscissas; consecutive collinear segments are merged on construction.
/// The left edge `{(0, y) : 0 <= y <= 1}` and the bottom edge
/// `{(x, 0) : 0 <= x <= 1}` of the boundary are implicit, as is the right
/// drop from `(1, f(1))` down to `(1, 0)` whenever `f(1) > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuarterConvexDisk {
    breakpoints: Vec<Point>,
}

/// The upper-right part of the disk boundary: the graph of `f` from
/// `(0, 1)` to `(1, f(1))`, extended by the right drop to `(1, 0)` when
/// `f(1) > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub vertices: Vec<Point>,
}

impl QuarterConvexDisk {
    /// Validate and canonicalize a breakpoint list.
    pub fn from_breakpoints<P: Into<Point> + Copy>(points: &[P]) -> Result<Self> {
        let mut pts: Vec<Point> = points.iter().map(|p| (*p).into()).collect();
        if pts.is_empty() {
            return Err(Error::BadDomain("empty breakpoint list".into()));
        }
        if pts.iter().any(|p| !p.is_finite()) {
            return Err(Error::BadDomain("non-finite coordinate".into()));
        }

        // Trailing vertical drop at x = 1 is the implicit right edge; keep
        // only its top endpoint.
        while pts.len() >= 2 {
            let n = pts.len();
            if (pts[n - 1].x - pts[n - 2].x).abs() <= CANONICAL_EPS
                && (pts[n - 1].x - 1.0).abs() <= CANONICAL_EPS
            {
                let top = pts[n - 2].y.max(pts[n - 1].y);
                pts.truncate(n - 1);
                let last = pts.last_mut().unwrap();
                last.y = top;
            } else {
                break;
            }
        }

        if pts.len() < 2 {
            return Err(Error::BadDomain("need at least two breakpoints".into()));
        }
        if pts[0].x.abs() > CANONICAL_EPS || (pts[0].y - 1.0).abs() > PREDICATE_EPS {
            return Err(Error::BadDomain(format!(
                "first breakpoint must be (0, 1), got ({}, {})",
                pts[0].x, pts[0].y
            )));
        }
        let last = *pts.last().unwrap();
        if (last.x - 1.0).abs() > CANONICAL_EPS {
            return Err(Error::BadDomain(format!(
                "last breakpoint must have x = 1, got x = {}",
                last.x
            )));
        }
        pts[0] = Point::new(0.0, 1.0);
        pts.last_mut().unwrap().x = 1.0;

        // Drop duplicate points, reject vertical interior segments.
        let mut dedup: Vec<Point> = vec![pts[0]];
        for &p in &pts[1..] {
            let prev = *dedup.last().unwrap();
            if p.x - prev.x <= CANONICAL_EPS {
                if (p.y - prev.y).abs() <= PREDICATE_EPS {
                    continue;
                }
                if p.x < prev.x - CANONICAL_EPS {
                    return Err(Error::BadDomain("abscissas not increasing".into()));
                }
                return Err(Error::BadDomain(format!(
                    "vertical segment at x = {}",
                    p.x
                )));
            }
            dedup.push(p);
        }
        let mut pts = dedup;

        for p in &pts {
            if p.y < -PREDICATE_EPS {
                return Err(Error::NegativeHeight(p.x));
            }
        }
        for p in &mut pts {
            p.y = p.y.max(0.0);
        }
        for w in pts.windows(2) {
            if w[1].y > w[0].y + PREDICATE_EPS {
                return Err(Error::NotMonotone(w[1].x));
            }
        }

        // The region under f is convex exactly when the slopes of f are
        // non-increasing.
        let slope = |a: Point, b: Point| (b.y - a.y) / (b.x - a.x);
        for w in pts.windows(3) {
            let s0 = slope(w[0], w[1]);
            let s1 = slope(w[1], w[2]);
            if s1 > s0 + 1e-9 {
                return Err(Error::NotConvex(w[1].x));
            }
        }

        // Canonical form: merge collinear consecutive segments.
        let mut canon: Vec<Point> = vec![pts[0]];
        for i in 1..pts.len() {
            while canon.len() >= 2 {
                let a = canon[canon.len() - 2];
                let b = canon[canon.len() - 1];
                if (slope(a, b) - slope(b, pts[i])).abs() <= 1e-12_f64.max(CANONICAL_EPS) {
                    canon.pop();
                } else {
                    break;
                }
            }
            canon.push(pts[i]);
        }

        Ok(Self { breakpoints: canon })
    }

    /// The triangle disk, `f(x) = 1 - x`.
    pub fn triangle() -> Self {
        Self {
            breakpoints: vec![Point::new(0.0, 1.0), Point::new(1.0, 0.0)],
        }
    }

    /// The unit-square disk, `f == 1`.
    pub fn square() -> Self {
        Self {
            breakpoints: vec![Point::new(0.0, 1.0), Point::new(1.0, 1.0)],
        }
    }

    pub fn breakpoints(&self) -> &[Point] {
        &self.breakpoints
    }

    /// `f(1)`, the height of the right edge.
    pub fn right_height(&self) -> f64 {
        self.breakpoints.last().unwrap().y
    }

    /// Evaluate `f` by linear interpolation. Errors outside `[0, 1]`.
    pub fn height_at(&self, x: f64) -> Result<f64> {
        if !(-PREDICATE_EPS..=1.0 + PREDICATE_EPS).contains(&x) {
            return Err(Error::OutOfDomain(x));
        }
        Ok(self.height_unchecked(x.clamp(0.0, 1.0)))
    }

    /// Interpolation without the domain check; `x` must be in `[0, 1]`.
    pub fn height_unchecked(&self, x: f64) -> f64 {
        let pts = &self.breakpoints;
        let mut lo = 0;
        let mut hi = pts.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if pts[mid].x <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (a, b) = (pts[lo], pts[hi]);
        if x <= a.x {
            return a.y;
        }
        if x >= b.x {
            return b.y;
        }
        a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x)
    }

    /// Largest `x` with `f(x) >= t`, i.e. the width of the horizontal slice
    /// at height `t`. Returns 1 for `t <= f(1)` and 0 for `t > 1`.
    pub fn width_at_height(&self, t: f64) -> f64 {
        if t <= self.right_height() {
            return 1.0;
        }
        if t > 1.0 {
            return 0.0;
        }
        let pts = &self.breakpoints;
        for w in pts.windows(2) {
            if w[1].y <= t {
                // f crosses t inside this segment (heights non-increasing).
                if (w[0].y - w[1].y).abs() < 1e-300 {
                    return w[1].x;
                }
                return w[0].x + (w[0].y - t) * (w[1].x - w[0].x) / (w[0].y - w[1].y);
            }
        }
        1.0
    }

    /// `|K|`: exact trapezoid sum of the piecewise-linear profile.
    pub fn area(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .map(|w| (w[1].x - w[0].x) * (w[0].y + w[1].y) * 0.5)
            .sum()
    }

    /// Membership test with tolerance `eps`.
    pub fn contains(&self, p: Point, eps: f64) -> bool {
        if p.x < -eps || p.x > 1.0 + eps || p.y < -eps {
            return false;
        }
        p.y <= self.height_unchecked(p.x.clamp(0.0, 1.0)) + eps
    }

    /// The boundary curve `C_K`.
    pub fn boundary(&self) -> BoundaryCurve {
        let mut vertices = self.breakpoints.clone();
        if self.right_height() > 0.0 {
            vertices.push(Point::new(1.0, 0.0));
        }
        BoundaryCurve { vertices }
    }

    /// The full vertex cycle of `K`, counterclockwise from the origin.
    pub fn polygon(&self) -> Vec<Point> {
        let mut verts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
        for p in self.breakpoints.iter().rev() {
            if p.dist(*verts.last().unwrap()) > 1e-15 {
                verts.push(*p);
            }
        }
        verts
    }

    /// Breakpoints as plain pairs, for file output.
    pub fn to_pairs(&self) -> Vec<(f64, f64)> {
        self.breakpoints.iter().map(|p| (p.x, p.y)).collect()
    }
}

impl Serialize for QuarterConvexDisk {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct File {
            breakpoints: Vec<(f64, f64)>,
        }
        File {
            breakpoints: self.to_pairs(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuarterConvexDisk {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct File {
            breakpoints: Vec<(f64, f64)>,
        }
        let file = File::deserialize(d)?;
        QuarterConvexDisk::from_breakpoints(&file.breakpoints).map_err(serde::de::Error::custom)
    }
}

/// Map an arbitrary non-degenerate triangle onto the normalized triangle
/// with vertices `(0,0)`, `(1,0)`, `(0,1)`; the disk is `f(x) = 1 - x`.
pub fn normalize_triangle(
    v1: Point,
    v2: Point,
    v3: Point,
) -> Result<(QuarterConvexDisk, AffineMap)> {
    let e1 = v2 - v1;
    let e2 = v3 - v1;
    let scale = e1.dist(Point::new(0.0, 0.0)).max(e2.dist(Point::new(0.0, 0.0)));
    if cross(e1, e2).abs() <= 1e-12 * scale.max(1.0) * scale.max(1.0) {
        return Err(Error::Degenerate);
    }
    let map = AffineMap::from_triangle_pair(
        [v1, v2, v3],
        [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)],
    )?;
    Ok((QuarterConvexDisk::triangle(), map))
}

/// Map a convex quadrilateral onto the normal form with vertices `(0,0)`,
/// `(1,0)`, `(0,1)` and `(x, y)`, where `0 <= x, y <= 1` and `x + y >= 1`;
/// the disk profile runs `(0,1) -> (x,y) -> (1,0)`.
///
/// Corner candidates are tried in input order (lowest index wins on ties,
/// e.g. for the square); for each corner both neighbor assignments are
/// tested and the lexicographically smaller feasible `(x, y)` is kept, so
/// the resulting breakpoints are invariant under affine maps of the input.
pub fn normalize_quadrilateral(
    vertices: [Point; 4],
) -> Result<(QuarterConvexDisk, AffineMap)> {
    if vertices.iter().any(|p| !p.is_finite()) {
        return Err(Error::BadDomain("non-finite vertex".into()));
    }
    let cx = vertices.iter().map(|p| p.x).sum::<f64>() / 4.0;
    let cy = vertices.iter().map(|p| p.y).sum::<f64>() / 4.0;
    let mut cycle = [0usize, 1, 2, 3];
    cycle.sort_by(|&a, &b| {
        let ta = (vertices[a].y - cy).atan2(vertices[a].x - cx);
        let tb = (vertices[b].y - cy).atan2(vertices[b].x - cx);
        ta.partial_cmp(&tb).unwrap()
    });

    let scale = (0..4)
        .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
        .map(|(i, j)| vertices[i].dist(vertices[j]))
        .fold(0.0, f64::max);
    for k in 0..4 {
        let a = vertices[cycle[k]];
        let b = vertices[cycle[(k + 1) % 4]];
        let c = vertices[cycle[(k + 2) % 4]];
        if cross(b - a, c - b) <= 1e-10 * scale * scale {
            return Err(Error::NotConvexQuad);
        }
    }

    let feas = PREDICATE_EPS;
    let unit = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
    for corner in 0..4 {
        let pos = cycle.iter().position(|&i| i == corner).unwrap();
        let next = cycle[(pos + 1) % 4];
        let prev = cycle[(pos + 3) % 4];
        let opposite = cycle[(pos + 2) % 4];
        let mut best: Option<(Point, AffineMap)> = None;
        for (na, nb) in [(next, prev), (prev, next)] {
            let map = AffineMap::from_triangle_pair(
                [vertices[corner], vertices[na], vertices[nb]],
                unit,
            )?;
            let fourth = map.apply(vertices[opposite]);
            let ok = fourth.x >= -feas
                && fourth.x <= 1.0 + feas
                && fourth.y >= -feas
                && fourth.y <= 1.0 + feas
                && fourth.x + fourth.y >= 1.0 - feas;
            if ok {
                let better = match &best {
                    None => true,
                    Some((p, _)) => (fourth.x, fourth.y) < (p.x, p.y),
                };
                if better {
                    best = Some((fourth, map));
                }
            }
        }
        if let Some((fourth, map)) = best {
            let x = fourth.x.clamp(0.0, 1.0);
            let y = fourth.y.clamp(0.0, 1.0);
            let disk = if x + y <= 1.0 + feas {
                // Fourth vertex on the diagonal: the quad degenerates to the
                // normalized triangle.
                QuarterConvexDisk::triangle()
            } else if x >= 1.0 - CANONICAL_EPS {
                QuarterConvexDisk::from_breakpoints(&[(0.0, 1.0), (1.0, y)])?
            } else {
                QuarterConvexDisk::from_breakpoints(&[(0.0, 1.0), (x, y), (1.0, 0.0)])?
            };
            return Ok((disk, map));
        }
    }
    Err(Error::NoFeasibleAssignment)
}
