//! Stair polygons: rectilinear simple polygons whose top chain rises then
//! falls and whose bottom chain falls then rises, classified by the step
//! counts `(l_up, r_up, l_down, r_down)`. Includes the canonical inscribed
//! stair under a disk profile and the tiling lattice for one-step shapes.

use serde::{Deserialize, Serialize};

use crate::disk::QuarterConvexDisk;
use crate::error::{Error, Result};
use crate::geom::{signed_area, Point};
use crate::lattice::Lattice;
use crate::CANONICAL_EPS;

/// Step counts `(l_up, r_up, l_down, r_down)`: the top chain rises `l_up`
/// times then falls `r_up` times; the bottom chain falls `l_down` times
/// then rises `r_down` times.
pub type Signature = (usize, usize, usize, usize);

/// One column of a stair polygon chain: constant height over an x-interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub x0: f64,
    pub x1: f64,
    pub top: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StairPolygon {
    vertices: Vec<Point>,
    signature: Signature,
    top_columns: Vec<Column>,
    bottom_columns: Vec<Column>,
}

impl StairPolygon {
    /// The inscribed stair `S(x_1, ..., x_{r+1})` under the disk profile:
    /// vertices `(0,0), (0,f(x_1)), (x_1,f(x_1)), (x_1,f(x_2)), ...,
    /// (x_{r+1}, f(x_{r+1})), (x_{r+1}, 0)`. Steps of equal height merge,
    /// so the signature is `(0, r', 0, 0)` with `r' <= r`.
    pub fn inscribed(disk: &QuarterConvexDisk, xs: &[f64]) -> Result<Self> {
        validate_abscissas(xs)?;
        let mut cols: Vec<Column> = Vec::with_capacity(xs.len());
        let mut prev_x = 0.0;
        for &x in xs {
            let top = disk.height_unchecked(x.min(1.0));
            match cols.last_mut() {
                Some(c) if (c.top - top).abs() <= CANONICAL_EPS => c.x1 = x,
                _ => cols.push(Column { x0: prev_x, x1: x, top }),
            }
            prev_x = x;
        }
        Self::from_columns(0.0, cols)
    }

    /// Build a flat-bottom stair from its column decomposition. Columns must
    /// be contiguous with tops strictly above `bottom` in a rise-then-fall
    /// pattern.
    pub fn from_columns(bottom: f64, columns: Vec<Column>) -> Result<Self> {
        for w in columns.windows(2) {
            if (w[0].x1 - w[1].x0).abs() > CANONICAL_EPS {
                return Err(Error::NotStair("columns not contiguous".into()));
            }
        }
        // Merge equal-height neighbors so signatures stay stable under
        // optimizer output noise.
        let mut cols: Vec<Column> = Vec::with_capacity(columns.len());
        for c in columns {
            if c.x1 - c.x0 <= CANONICAL_EPS {
                continue;
            }
            if c.top <= bottom + CANONICAL_EPS {
                return Err(Error::NotStair("column top at or below bottom".into()));
            }
            match cols.last_mut() {
                Some(p) if (p.top - c.top).abs() <= CANONICAL_EPS => p.x1 = c.x1,
                _ => cols.push(c),
            }
        }
        if cols.is_empty() {
            return Err(Error::NotStair("no columns".into()));
        }
        let (l_up, r_up) = rise_fall_counts(cols.iter().map(|c| c.top))
            .ok_or_else(|| Error::NotStair("top chain is not rise-then-fall".into()))?;

        let last_x1 = cols.last().unwrap().x1;
        let mut vertices = vec![Point::new(cols[0].x0, bottom), Point::new(last_x1, bottom)];
        for c in cols.iter().rev() {
            vertices.push(Point::new(c.x1, c.top));
            vertices.push(Point::new(c.x0, c.top));
        }
        let vertices = dedup_cycle(vertices);
        let whole = Column { x0: cols[0].x0, x1: last_x1, top: bottom };
        Ok(Self {
            vertices,
            signature: (l_up, r_up, 0, 0),
            top_columns: cols,
            bottom_columns: vec![whole],
        })
    }

    /// Classify an arbitrary rectilinear simple polygon as a stair polygon.
    pub fn from_vertices(vertices: &[Point]) -> Result<Self> {
        let verts = canonical_rectilinear_cycle(vertices)?;
        if !is_simple_rectilinear(&verts) {
            return Err(Error::NotSimple);
        }

        // Split the cycle at the leftmost and rightmost vertical edges.
        let n = verts.len();
        let x_min = verts.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let x_max = verts.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
        let left: Vec<usize> = (0..n)
            .filter(|&i| (verts[i].x - x_min).abs() <= CANONICAL_EPS)
            .collect();
        let right: Vec<usize> = (0..n)
            .filter(|&i| (verts[i].x - x_max).abs() <= CANONICAL_EPS)
            .collect();
        if left.len() != 2 || right.len() != 2 {
            return Err(Error::NotStair(
                "leftmost/rightmost side is not a single vertical edge".into(),
            ));
        }
        let (top_left, bottom_left) = if verts[left[0]].y >= verts[left[1]].y {
            (left[0], left[1])
        } else {
            (left[1], left[0])
        };
        // Counterclockwise cycle: walking backward from the top-left vertex
        // traverses the top chain toward the right edge.
        let mut idx = top_left;
        let mut top_chain = vec![verts[idx]];
        loop {
            idx = (idx + n - 1) % n;
            top_chain.push(verts[idx]);
            if (verts[idx].x - x_max).abs() <= CANONICAL_EPS {
                break;
            }
            if idx == bottom_left {
                return Err(Error::NotStair("top chain never reaches the right edge".into()));
            }
        }
        let mut idx = bottom_left;
        let mut bottom_chain = vec![verts[idx]];
        loop {
            idx = (idx + 1) % n;
            bottom_chain.push(verts[idx]);
            if (verts[idx].x - x_max).abs() <= CANONICAL_EPS {
                break;
            }
            if idx == top_left {
                return Err(Error::NotStair("bottom chain never reaches the right edge".into()));
            }
        }

        let top_cols = chain_columns(&top_chain)?;
        let bottom_cols = chain_columns(&bottom_chain)?;
        let (l_up, r_up) = rise_fall_counts(top_cols.iter().map(|c| c.top))
            .ok_or_else(|| Error::NotStair("top chain is not rise-then-fall".into()))?;
        // Fall-then-rise on the bottom is rise-then-fall of the negated heights.
        let (l_down, r_down) = rise_fall_counts(bottom_cols.iter().map(|c| -c.top))
            .ok_or_else(|| Error::NotStair("bottom chain is not fall-then-rise".into()))?;

        if top_chain[0].y <= bottom_chain[0].y + CANONICAL_EPS
            || top_chain.last().unwrap().y <= bottom_chain.last().unwrap().y + CANONICAL_EPS
        {
            return Err(Error::NotStair("chains touch at the side edges".into()));
        }

        Ok(Self {
            vertices: verts,
            signature: (l_up, r_up, l_down, r_down),
            top_columns: top_cols,
            bottom_columns: bottom_cols,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    /// Columns of the top chain, left to right.
    pub fn top_columns(&self) -> &[Column] {
        &self.top_columns
    }

    /// Columns of the bottom chain, left to right (one flat column for
    /// `(l, r, 0, 0)` shapes).
    pub fn bottom_columns(&self) -> &[Column] {
        &self.bottom_columns
    }

    pub fn flat_bottom(&self) -> bool {
        self.signature.2 == 0 && self.signature.3 == 0
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.top_columns[0].x0, self.top_columns.last().unwrap().x1)
    }

    /// Shoelace area of the polygon.
    pub fn area(&self) -> f64 {
        signed_area(&self.vertices).abs()
    }

    /// Membership test for flat-bottom stairs.
    pub fn contains(&self, p: Point, eps: f64) -> bool {
        debug_assert!(self.flat_bottom());
        let bottom = self.bottom_columns[0].top;
        if p.y < bottom - eps {
            return false;
        }
        self.top_columns
            .iter()
            .any(|c| p.x >= c.x0 - eps && p.x <= c.x1 + eps && p.y <= c.top + eps)
    }

    /// Horizontal slice of a flat-bottom stair at height `y`: rise-then-fall
    /// tops make `{x : top(x) >= y}` a single interval.
    pub fn row_interval(&self, y: f64) -> Option<(f64, f64)> {
        debug_assert!(self.flat_bottom());
        if y < self.bottom_columns[0].top {
            return None;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for c in &self.top_columns {
            if c.top >= y {
                lo = lo.min(c.x0);
                hi = hi.max(c.x1);
            }
        }
        lo.is_finite().then_some((lo, hi))
    }

    /// A lattice whose translates of this stair tile the plane. Defined for
    /// rectangles and one-descent stairs; other signatures cannot tile.
    pub fn tiling_lattice(&self) -> Result<Lattice> {
        let (l_up, r_up, l_down, r_down) = self.signature;
        if l_up > 0 || r_up > 1 || l_down > 0 || r_down > 0 {
            return Err(Error::UnsupportedSignature(l_up, r_up, l_down, r_down));
        }
        let bottom = self.bottom_columns[0].top;
        let (x_start, x_end) = self.x_range();
        if r_up == 0 {
            let c = &self.top_columns[0];
            return Lattice::new(
                Point::new(x_end - x_start, 0.0),
                Point::new(0.0, c.top - bottom),
            );
        }
        // One-step shape: column split x1, full width x2, heights h1 >= h2.
        // The copy at v1 stacks onto the low column, the copy at v2 continues
        // the row; |det| equals the stair area.
        let (c1, c2) = (&self.top_columns[0], &self.top_columns[1]);
        let x1 = c1.x1 - x_start;
        let x2 = x_end - x_start;
        let h1 = c1.top - bottom;
        let h2 = c2.top - bottom;
        Lattice::new(Point::new(x1, h2), Point::new(x2, h2 - h1))
    }
}

fn validate_abscissas(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::BadAbscissas("empty".into()));
    }
    let mut prev = 0.0;
    for &x in xs {
        if !(x > prev && x <= 1.0 + CANONICAL_EPS) {
            return Err(Error::BadAbscissas(format!(
                "expected strictly increasing values in (0, 1], got {:?}",
                xs
            )));
        }
        prev = x;
    }
    Ok(())
}

/// Count rises and falls of a sequence; `None` when a rise follows a fall.
fn rise_fall_counts<I: Iterator<Item = f64>>(heights: I) -> Option<(usize, usize)> {
    let hs: Vec<f64> = heights.collect();
    let mut rises = 0;
    let mut falls = 0;
    for w in hs.windows(2) {
        if w[1] > w[0] {
            if falls > 0 {
                return None;
            }
            rises += 1;
        } else if w[1] < w[0] {
            falls += 1;
        }
    }
    Some((rises, falls))
}

/// Convert a monotone-x chain of alternating edges into columns.
fn chain_columns(chain: &[Point]) -> Result<Vec<Column>> {
    let mut cols = Vec::new();
    for w in chain.windows(2) {
        let (a, b) = (w[0], w[1]);
        if (a.y - b.y).abs() <= CANONICAL_EPS {
            if b.x <= a.x + CANONICAL_EPS {
                return Err(Error::NotStair("chain doubles back".into()));
            }
            cols.push(Column { x0: a.x, x1: b.x, top: a.y });
        } else if (a.x - b.x).abs() > CANONICAL_EPS {
            return Err(Error::NotRectilinear);
        }
    }
    if cols.is_empty() {
        return Err(Error::NotStair("chain has no horizontal edge".into()));
    }
    Ok(cols)
}

/// Normalize a rectilinear vertex cycle: counterclockwise, duplicates
/// dropped, collinear runs merged.
fn canonical_rectilinear_cycle(vertices: &[Point]) -> Result<Vec<Point>> {
    if vertices.len() < 4 {
        return Err(Error::NotStair("too few vertices".into()));
    }
    let mut verts: Vec<Point> = Vec::with_capacity(vertices.len());
    for &p in vertices {
        if verts.last().map(|q| q.dist(p) <= CANONICAL_EPS).unwrap_or(false) {
            continue;
        }
        verts.push(p);
    }
    if verts.len() >= 2 && verts[0].dist(*verts.last().unwrap()) <= CANONICAL_EPS {
        verts.pop();
    }
    if signed_area(&verts) < 0.0 {
        verts.reverse();
    }
    for i in 0..verts.len() {
        let a = verts[i];
        let b = verts[(i + 1) % verts.len()];
        if (b.x - a.x).abs() > CANONICAL_EPS && (b.y - a.y).abs() > CANONICAL_EPS {
            return Err(Error::NotRectilinear);
        }
    }
    let mut merged: Vec<Point> = Vec::with_capacity(verts.len());
    let n = verts.len();
    for i in 0..n {
        let prev = verts[(i + n - 1) % n];
        let cur = verts[i];
        let next = verts[(i + 1) % n];
        let horiz =
            (prev.y - cur.y).abs() <= CANONICAL_EPS && (cur.y - next.y).abs() <= CANONICAL_EPS;
        let vert =
            (prev.x - cur.x).abs() <= CANONICAL_EPS && (cur.x - next.x).abs() <= CANONICAL_EPS;
        if !(horiz || vert) {
            merged.push(cur);
        }
    }
    if merged.len() < 4 {
        return Err(Error::NotStair("degenerate after merging".into()));
    }
    Ok(merged)
}

/// Reject self-intersecting rectilinear cycles by brute-force edge pairs.
fn is_simple_rectilinear(verts: &[Point]) -> bool {
    let n = verts.len();
    let edge = |i: usize| (verts[i], verts[(i + 1) % n]);
    for i in 0..n {
        for j in i + 1..n {
            if (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let (a, b) = edge(i);
            let (c, d) = edge(j);
            if boxes_overlap(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Open-box overlap test; exact for axis-parallel segments.
fn boxes_overlap(a: Point, b: Point, c: Point, d: Point) -> bool {
    let eps = CANONICAL_EPS;
    a.x.min(b.x) < c.x.max(d.x) - eps
        && c.x.min(d.x) < a.x.max(b.x) - eps
        && a.y.min(b.y) < c.y.max(d.y) - eps
        && c.y.min(d.y) < a.y.max(b.y) - eps
}

fn dedup_cycle(vertices: Vec<Point>) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(vertices.len());
    for p in vertices {
        if out.last().map(|q| q.dist(p) <= CANONICAL_EPS).unwrap_or(false) {
            continue;
        }
        out.push(p);
    }
    while out.len() >= 2 && out[0].dist(*out.last().unwrap()) <= CANONICAL_EPS {
        out.pop();
    }
    out
}
