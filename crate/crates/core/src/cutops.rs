//! Precedence split of overlapping translates and the covering
//! decomposition built on it.
//!
//! For two translates `K_a = K + a`, `K_b = K + b` of one disk, the overlap
//! splits into the part where `K_b`'s boundary curve passes above `K_a`'s
//! (the part `K_a` is *shadowed* on) and the symmetric part. Equal curve
//! heights are broken toward the rightward copy, matching strict inclusion
//! of the half-plane slices `K_a ∩ {x >= x0}`. Cutting the shadowed part
//! away always removes an axis-aligned upper quadrant, so intersecting all
//! cuts of a covering leaves each copy a flat-bottom stair cell; the cells
//! tile the window and drive the density audit
//! `N * A(1) >= |window|`.

use rayon::prelude::*;
use serde::Serialize;

use crate::disk::QuarterConvexDisk;
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::inscribe::{concave_extension, OptimizeConfig};
use crate::raster::multiplicity;
use crate::stair::{Column, StairPolygon};
use crate::PREDICATE_EPS;

/// Offset of a translative copy `K + u`.
pub type Translate = Point;

/// How the pointwise split rule is evaluated; the broken variants exist for
/// mutation tests that guard the checks against vacuity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitRule {
    #[default]
    Correct,
    /// Reverse the tie direction.
    FlipTie,
    /// Reverse the strict height comparison.
    FlipStrict,
}

/// Height of the boundary curve of `K + u` above abscissa `x`: the maximum
/// `z` with `(x, z)` on the curve. `None` when the vertical line misses it.
pub fn curve_height(disk: &QuarterConvexDisk, u: Translate, x: f64) -> Option<f64> {
    let t = x - u.x;
    if !(-PREDICATE_EPS..=1.0 + PREDICATE_EPS).contains(&t) {
        return None;
    }
    Some(u.y + disk.height_unchecked(t.clamp(0.0, 1.0)))
}

/// Pointwise split decision for `p` in the overlap of both copies; `true`
/// when `K_a` is shadowed by `K_b` at `p`. Precondition: `a != b`, `p` in
/// both copies.
fn shadow_rule(disk: &QuarterConvexDisk, p: Point, a: Translate, b: Translate, rule: SplitRule) -> bool {
    let ya = curve_height(disk, a, p.x).unwrap_or(f64::NEG_INFINITY);
    let yb = curve_height(disk, b, p.x).unwrap_or(f64::NEG_INFINITY);
    let strict = match rule {
        SplitRule::FlipStrict => ya > yb,
        _ => ya < yb,
    };
    if (ya - yb).abs() > PREDICATE_EPS {
        return strict;
    }
    // Equal curve heights only happen for horizontally offset copies whose
    // curves coincide locally; the copy extending further right strictly
    // contains the other's right slice.
    if (a.x - b.x).abs() > PREDICATE_EPS {
        match rule {
            SplitRule::FlipTie => b.x < a.x,
            _ => b.x > a.x,
        }
    } else {
        a.y > b.y
    }
}

/// Membership in the shadowed part, `false` outside the overlap.
pub fn shadow_contains(
    disk: &QuarterConvexDisk,
    p: Point,
    a: Translate,
    b: Translate,
    rule: SplitRule,
) -> bool {
    disk.contains(p - a, PREDICATE_EPS)
        && disk.contains(p - b, PREDICATE_EPS)
        && shadow_rule(disk, p, a, b, rule)
}

/// Membership in the cut remainder `K_a` minus its shadowed part; contains
/// all of `K_a \ K_b`.
pub fn cut_contains(
    disk: &QuarterConvexDisk,
    p: Point,
    a: Translate,
    b: Translate,
    rule: SplitRule,
) -> bool {
    disk.contains(p - a, PREDICATE_EPS) && !shadow_contains(disk, p, a, b, rule)
}

/// Checked pointwise split test: `p` must lie in the overlap.
pub fn is_shadowed(
    disk: &QuarterConvexDisk,
    p: Point,
    a: Translate,
    b: Translate,
) -> Result<bool> {
    if a.dist(b) <= PREDICATE_EPS {
        return Err(Error::AmbiguousOrientation);
    }
    if !(disk.contains(p - a, PREDICATE_EPS) && disk.contains(p - b, PREDICATE_EPS)) {
        return Err(Error::PointOutside(p.x, p.y));
    }
    Ok(shadow_rule(disk, p, a, b, SplitRule::Correct))
}

/// Ascending x positions where either copy's profile kinks inside `[lo, hi]`,
/// including the interval ends.
fn domain_cuts(disk: &QuarterConvexDisk, a: Translate, b: Translate, lo: f64, hi: f64) -> Vec<f64> {
    let mut xs = vec![lo, hi];
    for u in [a, b] {
        for bp in disk.breakpoints() {
            let x = bp.x + u.x;
            if x > lo && x < hi {
                xs.push(x);
            }
        }
    }
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    xs.dedup_by(|p, q| (*p - *q).abs() < 1e-14);
    xs
}

/// Curve-height difference `y_b(x) - y_a(x)`; monotone in `x` (concavity of
/// the profile), non-decreasing when `b` sits right of `a`.
fn height_gap(disk: &QuarterConvexDisk, a: Translate, b: Translate, x: f64) -> f64 {
    (b.y + disk.height_unchecked((x - b.x).clamp(0.0, 1.0)))
        - (a.y + disk.height_unchecked((x - a.x).clamp(0.0, 1.0)))
}

/// The half-plane constraint copy `b` imposes on `K_a` when the shadowed
/// part is removed: a downward step (upper-right quadrant) for right-hand
/// neighbors, an upward step (upper-left quadrant) for left-hand ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StepBound {
    /// Removes `{x >= x0, y >= level}`.
    Down { x0: f64, level: f64 },
    /// Removes `{x < x0, y >= level}`.
    Up { x0: f64, level: f64 },
}

/// Compute the quadrant constraint of `b` on `a`, or `None` when nothing of
/// `K_a` is shadowed.
pub fn step_bound(disk: &QuarterConvexDisk, a: Translate, b: Translate) -> Option<StepBound> {
    let lo = a.x.max(b.x);
    let hi = (a.x.min(b.x)) + 1.0;
    if hi - lo <= 1e-14 {
        return None;
    }
    if (a.x - b.x).abs() <= 1e-14 {
        return (b.y > a.y).then_some(StepBound::Down { x0: lo, level: b.y });
    }
    let cuts = domain_cuts(disk, a, b, lo, hi);
    let gaps: Vec<f64> = cuts.iter().map(|&x| height_gap(disk, a, b, x)).collect();
    if b.x > a.x {
        // Gap non-decreasing: shadow on {gap >= 0}.
        if gaps[gaps.len() - 1] < 0.0 {
            return None;
        }
        if gaps[0] >= 0.0 {
            return Some(StepBound::Down { x0: lo, level: b.y });
        }
        for i in 0..cuts.len() - 1 {
            if gaps[i] < 0.0 && gaps[i + 1] >= 0.0 {
                let x0 = linear_root(cuts[i], gaps[i], cuts[i + 1], gaps[i + 1]);
                return Some(StepBound::Down { x0, level: b.y });
            }
        }
        None
    } else {
        // Gap non-increasing: shadow on {gap > 0}.
        if gaps[0] <= 0.0 {
            return None;
        }
        if gaps[gaps.len() - 1] > 0.0 {
            return Some(StepBound::Up { x0: hi, level: b.y });
        }
        for i in 0..cuts.len() - 1 {
            if gaps[i] > 0.0 && gaps[i + 1] <= 0.0 {
                let x0 = linear_root(cuts[i], gaps[i], cuts[i + 1], gaps[i + 1]);
                return Some(StepBound::Up { x0, level: b.y });
            }
        }
        None
    }
}

fn linear_root(x0: f64, y0: f64, x1: f64, y1: f64) -> f64 {
    if (y1 - y0).abs() < 1e-300 {
        return x0;
    }
    (x0 - y0 * (x1 - x0) / (y1 - y0)).clamp(x0.min(x1), x0.max(x1))
}

/// A region bounded below by a flat line, above by a piecewise-linear
/// envelope over an x-interval.
#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeRegion {
    /// Envelope pieces: (x0, x1, height at x0, height at x1), contiguous.
    pub pieces: Vec<(f64, f64, f64, f64)>,
    pub bottom: f64,
}

impl EnvelopeRegion {
    pub fn area(&self) -> f64 {
        self.pieces
            .iter()
            .map(|&(x0, x1, h0, h1)| (x1 - x0) * (0.5 * (h0 + h1) - self.bottom))
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn x_range(&self) -> Option<(f64, f64)> {
        let first = self.pieces.first()?;
        let last = self.pieces.last()?;
        Some((first.0, last.1))
    }

    pub fn contains(&self, p: Point, eps: f64) -> bool {
        if p.y < self.bottom - eps {
            return false;
        }
        self.pieces.iter().any(|&(x0, x1, h0, h1)| {
            if p.x < x0 - eps || p.x > x1 + eps {
                return false;
            }
            let t = if x1 - x0 < 1e-300 { 0.0 } else { (p.x - x0) / (x1 - x0) };
            p.y <= h0 + t * (h1 - h0) + eps
        })
    }

    /// Closed polygon boundary, counterclockwise.
    pub fn polygon(&self) -> Vec<Point> {
        let Some((xl, xr)) = self.x_range() else {
            return Vec::new();
        };
        let mut verts = vec![Point::new(xl, self.bottom), Point::new(xr, self.bottom)];
        for &(x0, x1, h0, h1) in self.pieces.iter().rev() {
            verts.push(Point::new(x1, h1));
            verts.push(Point::new(x0, h0));
        }
        let mut out: Vec<Point> = Vec::with_capacity(verts.len());
        for v in verts {
            if out.last().map(|q| q.dist(v) > 1e-12).unwrap_or(true) {
                out.push(v);
            }
        }
        while out.len() >= 2 && out[0].dist(*out.last().unwrap()) <= 1e-12 {
            out.pop();
        }
        out
    }
}

/// The shadowed part `K_a ∩ {quadrant of b}` as an explicit region, plus
/// the minimum abscissa where the two boundary curves meet (when they do).
#[derive(Debug, Clone, Serialize)]
pub struct ShadowRegion {
    pub region: EnvelopeRegion,
    pub bound: Option<StepBound>,
    /// Least x of the curve intersection, from the polyline oracle.
    pub crossing_x: Option<f64>,
}

/// The remainder `K_a` minus its shadowed part. Always `K_a` minus an
/// axis-aligned upper quadrant.
#[derive(Debug, Clone, Serialize)]
pub struct CutRegion {
    pub region: EnvelopeRegion,
    pub quadrant: Option<Quadrant>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadrant {
    pub kind: QuadrantKind,
    pub corner: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QuadrantKind {
    /// `{x < corner.x, y >= corner.y}`
    UpperLeft,
    /// `{x >= corner.x, y >= corner.y}`
    UpperRight,
}

impl Quadrant {
    pub fn contains(&self, p: Point) -> bool {
        match self.kind {
            QuadrantKind::UpperLeft => p.x < self.corner.x && p.y >= self.corner.y,
            QuadrantKind::UpperRight => p.x >= self.corner.x && p.y >= self.corner.y,
        }
    }
}

fn overlap_nonempty(disk: &QuarterConvexDisk, a: Translate, b: Translate) -> bool {
    let lo = a.x.max(b.x);
    let hi = (a.x.min(b.x)) + 1.0;
    if hi - lo <= 1e-14 {
        return false;
    }
    let bottom = a.y.max(b.y);
    let cuts = domain_cuts(disk, a, b, lo, hi);
    // Top envelope of the overlap is the min of two concave curves, itself
    // concave; checking its kinks and the crossing suffices.
    let mut best = f64::NEG_INFINITY;
    for w in cuts.windows(2) {
        for x in [w[0], w[1], crossing_in(disk, a, b, w[0], w[1]).unwrap_or(w[0])] {
            let ya = curve_height(disk, a, x).unwrap_or(f64::NEG_INFINITY);
            let yb = curve_height(disk, b, x).unwrap_or(f64::NEG_INFINITY);
            best = best.max(ya.min(yb));
        }
    }
    best >= bottom - PREDICATE_EPS
}

fn crossing_in(
    disk: &QuarterConvexDisk,
    a: Translate,
    b: Translate,
    x0: f64,
    x1: f64,
) -> Option<f64> {
    let g0 = height_gap(disk, a, b, x0);
    let g1 = height_gap(disk, a, b, x1);
    if (g0 < 0.0) == (g1 < 0.0) {
        return None;
    }
    Some(linear_root(x0, g0, x1, g1))
}

/// Build `K_a ∩ [x_lo, x_hi] ∩ {y >= bottom}` capped by an extra constant
/// ceiling, as envelope pieces.
fn copy_slab(
    disk: &QuarterConvexDisk,
    a: Translate,
    x_lo: f64,
    x_hi: f64,
    bottom: f64,
    ceiling: f64,
) -> EnvelopeRegion {
    let mut pieces = Vec::new();
    if x_hi - x_lo > 1e-14 {
        let mut cuts: Vec<f64> = vec![x_lo, x_hi];
        for bp in disk.breakpoints() {
            let x = bp.x + a.x;
            if x > x_lo && x < x_hi {
                cuts.push(x);
            }
        }
        cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
        cuts.dedup_by(|p, q| (*p - *q).abs() < 1e-14);
        for w in cuts.windows(2) {
            push_capped_linear(&mut pieces, disk, a, w[0], w[1], ceiling, bottom);
        }
    }
    EnvelopeRegion { pieces, bottom }
}

/// Append `min(curve, ceiling)` over `[x0, x1]`, dropping parts at or below
/// `bottom` and splitting at crossings.
fn push_capped_linear(
    pieces: &mut Vec<(f64, f64, f64, f64)>,
    disk: &QuarterConvexDisk,
    a: Translate,
    x0: f64,
    x1: f64,
    ceiling: f64,
    bottom: f64,
) {
    let h = |x: f64| a.y + disk.height_unchecked((x - a.x).clamp(0.0, 1.0));
    let (h0, h1) = (h(x0), h(x1));
    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::new();
    let below0 = h0 <= ceiling;
    let below1 = h1 <= ceiling;
    if below0 == below1 {
        if below0 {
            segs.push((x0, x1, h0, h1));
        } else {
            segs.push((x0, x1, ceiling, ceiling));
        }
    } else {
        let xc = linear_root(x0, h0 - ceiling, x1, h1 - ceiling);
        if below0 {
            segs.push((x0, xc, h0, ceiling));
            segs.push((xc, x1, ceiling, ceiling));
        } else {
            segs.push((x0, xc, ceiling, ceiling));
            segs.push((xc, x1, ceiling, h1));
        }
    }
    for (sx0, sx1, sh0, sh1) in segs {
        if sx1 - sx0 <= 1e-14 {
            continue;
        }
        // Trim at the bottom line.
        let a0 = sh0 - bottom;
        let a1 = sh1 - bottom;
        if a0 <= 0.0 && a1 <= 0.0 {
            continue;
        }
        if a0 > 0.0 && a1 > 0.0 {
            pieces.push((sx0, sx1, sh0, sh1));
        } else {
            let xc = linear_root(sx0, a0, sx1, a1);
            if a0 > 0.0 {
                if xc - sx0 > 1e-14 {
                    pieces.push((sx0, xc, sh0, bottom));
                }
            } else if sx1 - xc > 1e-14 {
                pieces.push((xc, sx1, bottom, sh1));
            }
        }
    }
}

/// The part of the overlap that `K_a` is shadowed on. Empty region (not an
/// error) when the other copy's curve never rises above `K_a`'s.
pub fn shadowed_region(
    disk: &QuarterConvexDisk,
    a: Translate,
    b: Translate,
) -> Result<ShadowRegion> {
    if a.dist(b) <= PREDICATE_EPS {
        return Err(Error::AmbiguousOrientation);
    }
    if !overlap_nonempty(disk, a, b) {
        return Err(Error::DisjointCopies);
    }
    let bound = step_bound(disk, a, b);
    let bottom = a.y.max(b.y);
    let region = match bound {
        None => EnvelopeRegion { pieces: Vec::new(), bottom },
        Some(StepBound::Down { x0, .. }) => {
            copy_slab(disk, a, x0.max(a.x), a.x + 1.0, bottom, f64::INFINITY)
        }
        Some(StepBound::Up { x0, .. }) => {
            copy_slab(disk, a, a.x, x0.min(a.x + 1.0), bottom, f64::INFINITY)
        }
    };
    Ok(ShadowRegion {
        region,
        bound,
        crossing_x: curves_min_crossing_x(disk, a, b),
    })
}

/// `K_a` minus its shadowed part, together with the removed quadrant.
pub fn cut_region(disk: &QuarterConvexDisk, a: Translate, b: Translate) -> Result<CutRegion> {
    if a.dist(b) <= PREDICATE_EPS {
        return Err(Error::AmbiguousOrientation);
    }
    if !overlap_nonempty(disk, a, b) {
        return Err(Error::DisjointCopies);
    }
    let bound = step_bound(disk, a, b);
    let quadrant = bound.map(|sb| quadrant_of(disk, a, sb));
    let region = match bound {
        None => copy_slab(disk, a, a.x, a.x + 1.0, a.y, f64::INFINITY),
        Some(StepBound::Down { x0, level }) => {
            // Keep everything left of x0 plus the strip below the level.
            let mut left = copy_slab(disk, a, a.x, x0.min(a.x + 1.0), a.y, f64::INFINITY);
            let right =
                copy_slab(disk, a, x0.max(a.x), a.x + 1.0, a.y, level.max(a.y));
            left.pieces.extend(right.pieces);
            left
        }
        Some(StepBound::Up { x0, level }) => {
            let mut left = copy_slab(disk, a, a.x, x0.min(a.x + 1.0), a.y, level.max(a.y));
            let right = copy_slab(disk, a, x0.max(a.x), a.x + 1.0, a.y, f64::INFINITY);
            left.pieces.extend(right.pieces);
            left
        }
    };
    Ok(CutRegion { region, quadrant })
}

fn quadrant_of(disk: &QuarterConvexDisk, a: Translate, sb: StepBound) -> Quadrant {
    // Clamp the corner onto K_a so the anchor lies in the cut copy.
    let clamp_corner = |x: f64, level: f64| {
        let cx = x.clamp(a.x, a.x + 1.0);
        let cy = level.max(a.y);
        Point::new(cx, cy)
    };
    match sb {
        StepBound::Down { x0, level } => Quadrant {
            kind: QuadrantKind::UpperRight,
            corner: clamp_corner(x0, level),
        },
        StepBound::Up { x0, level } => {
            // Pull the corner left onto the curve when the level undercuts
            // the profile before x0.
            let mut cx = x0.clamp(a.x, a.x + 1.0);
            let level_c = level.max(a.y);
            if level_c > a.y {
                let t = (level_c - a.y).min(1.0);
                let reach = a.x + disk.width_at_height(t);
                cx = cx.min(reach);
            }
            Quadrant {
                kind: QuadrantKind::UpperLeft,
                corner: Point::new(cx, level_c),
            }
        }
    }
}

/// Least x where the two boundary curves intersect, by polyline overlap of
/// the profiles and right drops.
pub fn curves_min_crossing_x(
    disk: &QuarterConvexDisk,
    a: Translate,
    b: Translate,
) -> Option<f64> {
    let poly = |u: Translate| -> Vec<Point> {
        disk.boundary().vertices.iter().map(|&p| p + u).collect()
    };
    let (pa, pb) = (poly(a), poly(b));
    let mut best: Option<f64> = None;
    for sa in pa.windows(2) {
        for sb in pb.windows(2) {
            if let Some(x) = segment_crossing_min_x(sa[0], sa[1], sb[0], sb[1]) {
                best = Some(best.map_or(x, |b: f64| b.min(x)));
            }
        }
    }
    best
}

/// Minimum x of the intersection of two segments, covering collinear
/// overlap; `None` when disjoint.
fn segment_crossing_min_x(a0: Point, a1: Point, b0: Point, b1: Point) -> Option<f64> {
    let d = Point::new(a1.x - a0.x, a1.y - a0.y);
    let e = Point::new(b1.x - b0.x, b1.y - b0.y);
    let denom = d.x * e.y - d.y * e.x;
    let w = Point::new(b0.x - a0.x, b0.y - a0.y);
    let eps = 1e-12;
    if denom.abs() > eps {
        let t = (w.x * e.y - w.y * e.x) / denom;
        let s = (w.x * d.y - w.y * d.x) / -denom;
        // s parameterizes along b: solve properly.
        let s = if e.x.abs() > e.y.abs() {
            (a0.x + t * d.x - b0.x) / e.x
        } else if e.y.abs() > eps {
            (a0.y + t * d.y - b0.y) / e.y
        } else {
            s
        };
        if (-1e-9..=1.0 + 1e-9).contains(&t) && (-1e-9..=1.0 + 1e-9).contains(&s) {
            return Some(a0.x + t * d.x);
        }
        return None;
    }
    // Parallel: require collinearity.
    if (w.x * d.y - w.y * d.x).abs() > 1e-9 * (1.0 + d.x.abs() + d.y.abs()) {
        return None;
    }
    // Project onto the dominant axis.
    let (alo, ahi) = if d.x.abs() >= d.y.abs() {
        (a0.x.min(a1.x), a0.x.max(a1.x))
    } else {
        // Vertical segments share x.
        return overlap_1d(a0.y, a1.y, b0.y, b1.y).map(|_| a0.x);
    };
    let (blo, bhi) = (b0.x.min(b1.x), b0.x.max(b1.x));
    let lo = alo.max(blo);
    let hi = ahi.min(bhi);
    (lo <= hi + 1e-12).then_some(lo)
}

fn overlap_1d(a0: f64, a1: f64, b0: f64, b1: f64) -> Option<(f64, f64)> {
    let lo = a0.min(a1).max(b0.min(b1));
    let hi = a0.max(a1).min(b0.max(b1));
    (lo <= hi + 1e-12).then_some((lo, hi))
}

/// A finite translative covering of the window `[-l, l]^2`, validated by
/// raster at construction.
#[derive(Debug, Clone)]
pub struct CoveringInstance {
    disk: QuarterConvexDisk,
    translates: Vec<Translate>,
    window_half: f64,
}

impl CoveringInstance {
    pub fn new(
        disk: QuarterConvexDisk,
        translates: Vec<Translate>,
        window_half: f64,
        resolution: usize,
    ) -> Result<Self> {
        if !(window_half > 0.0 && window_half.is_finite()) {
            return Err(Error::BadDomain(format!(
                "window half-size must be positive, got {window_half}"
            )));
        }
        if translates.iter().any(|t| !t.is_finite()) {
            return Err(Error::BadDomain("non-finite translate".into()));
        }
        let mut translates = translates;
        translates.sort_by(|p, q| (p.x, p.y).partial_cmp(&(q.x, q.y)).unwrap());
        translates.dedup_by(|p, q| p.dist(*q) == 0.0);
        if translates.is_empty() {
            return Err(Error::BadDomain("no translates".into()));
        }
        let instance = Self { disk, translates, window_half };
        let grid = instance.coverage_grid(resolution.max(64));
        let covered = grid.covered();
        if covered < grid.samples() {
            return Err(Error::NotACovering(format!(
                "{} of {} samples uncovered at resolution {}",
                grid.samples() - covered,
                grid.samples(),
                resolution.max(64)
            )));
        }
        Ok(instance)
    }

    pub fn disk(&self) -> &QuarterConvexDisk {
        &self.disk
    }

    pub fn translates(&self) -> &[Translate] {
        &self.translates
    }

    pub fn window_half(&self) -> f64 {
        self.window_half
    }

    pub fn window_area(&self) -> f64 {
        4.0 * self.window_half * self.window_half
    }

    fn coverage_grid(&self, resolution: usize) -> crate::raster::MultiplicityGrid {
        let disk = &self.disk;
        multiplicity(self.window_half, resolution, &self.translates, |v, y| {
            let t = y - v.y;
            if !(0.0..=1.0).contains(&t) {
                return None;
            }
            Some((v.x, v.x + disk.width_at_height(t)))
        })
    }
}

/// A stair-shaped cell owned by one translate after all cuts.
#[derive(Debug, Clone, Serialize)]
pub struct CellRegion {
    pub owner: usize,
    pub stair: StairPolygon,
}

impl CellRegion {
    pub fn signature(&self) -> (usize, usize, usize, usize) {
        self.stair.signature()
    }

    /// Number of descents of the top chain.
    pub fn descents(&self) -> usize {
        self.stair.signature().1
    }
}

/// Intersect each translate's cut remainders with the window, producing the
/// stair cells that tile it. Cells that come out empty are dropped.
pub fn decompose_covering(instance: &CoveringInstance) -> Result<Vec<CellRegion>> {
    let disk = instance.disk();
    let ts = instance.translates();
    let l = instance.window_half();
    let cells: Vec<Result<Option<CellRegion>>> = ts
        .par_iter()
        .enumerate()
        .map(|(i, &u)| build_cell(disk, ts, i, u, l).map(|c| c.map(|stair| CellRegion { owner: i, stair })))
        .collect();
    let mut out = Vec::with_capacity(ts.len());
    for cell in cells {
        if let Some(c) = cell? {
            out.push(c);
        }
    }
    Ok(out)
}

fn build_cell(
    disk: &QuarterConvexDisk,
    translates: &[Translate],
    i: usize,
    u: Translate,
    l: f64,
) -> Result<Option<StairPolygon>> {
    let x_lo = u.x.max(-l);
    let x_hi = (u.x + 1.0).min(l);
    let bottom = u.y.max(-l);
    if x_hi - x_lo <= 1e-12 || bottom >= l {
        return Ok(None);
    }
    let mut bounds: Vec<StepBound> = Vec::new();
    for (j, &v) in translates.iter().enumerate() {
        if j == i {
            continue;
        }
        if let Some(sb) = step_bound(disk, u, v) {
            bounds.push(sb);
        }
    }

    // Elementary x-intervals: window/copy limits, step thresholds, kinks of
    // the own curve.
    let mut cuts = vec![x_lo, x_hi];
    for sb in &bounds {
        let x = match sb {
            StepBound::Down { x0, .. } | StepBound::Up { x0, .. } => *x0,
        };
        if x > x_lo && x < x_hi {
            cuts.push(x);
        }
    }
    for bp in disk.breakpoints() {
        let x = bp.x + u.x;
        if x > x_lo && x < x_hi {
            cuts.push(x);
        }
    }
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup_by(|p, q| (*p - *q).abs() < 1e-13);

    let mut columns: Vec<Column> = Vec::new();
    let mut started = false;
    let mut gap_after = false;
    for w in cuts.windows(2) {
        let (xa, xb) = (w[0], w[1]);
        let xm = 0.5 * (xa + xb);
        // Constant cap from the window top and all active step bounds.
        let mut cap = l;
        for sb in &bounds {
            match *sb {
                StepBound::Down { x0, level } if xm >= x0 => cap = cap.min(level),
                StepBound::Up { x0, level } if xm < x0 => cap = cap.min(level),
                _ => {}
            }
        }
        // The copy's own curve on this interval (linear there).
        let (ca, cb) = (
            u.y + disk.height_unchecked((xa - u.x).clamp(0.0, 1.0)),
            u.y + disk.height_unchecked((xb - u.x).clamp(0.0, 1.0)),
        );
        let curve_min = ca.min(cb);
        let slope = (cb - ca) / (xb - xa);
        let height = if curve_min >= cap - PREDICATE_EPS {
            // Curve clears the rectilinear cap.
            cap
        } else if slope.abs() <= 1e-9 {
            // Flat curve segment acting as the cap (exact-tiling contacts).
            cap.min(ca)
        } else if cap - curve_min <= 1e-7 {
            // Hairline corner contact; snap to the cap.
            cap
        } else {
            return Err(Error::NotACovering(format!(
                "boundary curve of translate {i} exposed on [{xa:.6}, {xb:.6}] \
                 (dip {:.3e}); points under it belong to no other copy",
                cap - curve_min
            )));
        };
        if height > bottom + 1e-12 {
            if gap_after {
                return Err(Error::NotACovering(format!(
                    "cell of translate {i} is disconnected"
                )));
            }
            started = true;
            columns.push(Column { x0: xa, x1: xb, top: height });
        } else if started {
            gap_after = true;
        }
    }
    if columns.is_empty() {
        return Ok(None);
    }
    let stair = StairPolygon::from_columns(bottom, columns)?;
    Ok(Some(stair))
}

/// Audit of a covering decomposition against the density certificate.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionAudit {
    /// Raster check: every interior sample lies in exactly one cell.
    pub tiling_ok: bool,
    /// Cell areas add up to the window area (1e-6 relative).
    pub area_ok: bool,
    /// Total top descents at most N - 1.
    pub bound_counting_ok: bool,
    /// `|window| <= N * A(1) + 1e-6`.
    pub bound_main_ok: bool,
    /// `sum |S_i| <= N * A((N-1)/N) + 1e-6` via the concave extension.
    pub bound_sharp_ok: bool,
    pub area_sum: f64,
    pub window_area: f64,
    pub sum_r: usize,
    pub n_translates: usize,
    pub a1: f64,
    /// `A((N-1)/N)` from the piecewise-linear extension.
    pub a_fractional: f64,
    pub cells: usize,
}

impl DecompositionAudit {
    pub fn all_ok(&self) -> bool {
        self.tiling_ok
            && self.area_ok
            && self.bound_counting_ok
            && self.bound_main_ok
            && self.bound_sharp_ok
    }
}

/// Run the five decomposition checks at the given raster resolution.
pub fn audit_decomposition(
    instance: &CoveringInstance,
    cells: &[CellRegion],
    cfg: &OptimizeConfig,
    resolution: usize,
) -> Result<DecompositionAudit> {
    let l = instance.window_half();
    let grid = multiplicity(l, resolution.max(64), cells, |cell, y| {
        cell.stair.row_interval(y).map(|(lo, hi)| (lo, hi))
    });
    let tiling_ok =
        grid.fraction_with_count(1) >= 0.999 && grid.defects_off_transitions(1) == 0;

    let area_sum: f64 = cells.iter().map(|c| c.stair.area()).sum();
    let window_area = instance.window_area();
    let area_ok = (area_sum - window_area).abs() <= 1e-6 * window_area;

    let sum_r: usize = cells.iter().map(|c| c.descents()).sum();
    let n = instance.translates().len();
    let bound_counting_ok = sum_r <= n.saturating_sub(1);

    let ext = concave_extension(instance.disk(), 1, cfg)?;
    let a1 = ext.knots[1];
    let t = (n as f64 - 1.0) / n as f64;
    let a_fractional = ext.eval(t);
    let bound_main_ok = window_area <= n as f64 * a1 + 1e-6;
    let bound_sharp_ok = area_sum <= n as f64 * a_fractional + 1e-6;

    Ok(DecompositionAudit {
        tiling_ok,
        area_ok,
        bound_counting_ok,
        bound_main_ok,
        bound_sharp_ok,
        area_sum,
        window_area,
        sum_r,
        n_translates: n,
        a1,
        a_fractional,
        cells: cells.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> QuarterConvexDisk {
        QuarterConvexDisk::triangle()
    }

    fn square() -> QuarterConvexDisk {
        QuarterConvexDisk::square()
    }

    fn pt(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn curve_height_examples() {
        let t = triangle();
        assert!((curve_height(&t, pt(0.0, 0.0), 0.4).unwrap() - 0.6).abs() < 1e-15);
        let s = square();
        assert!((curve_height(&s, pt(0.0, 0.0), 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(curve_height(&t, pt(0.0, 0.0), 1.2).is_none());
        assert!((curve_height(&t, pt(0.5, -0.25), 1.0).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn pointwise_split_examples() {
        let t = triangle();
        let (a, b) = (pt(0.0, 0.0), pt(0.2, 0.2));
        let p = pt(0.4, 0.4);
        // Curve heights 0.6 < 1.0: the first copy is shadowed.
        assert!(is_shadowed(&t, p, a, b).unwrap());
        assert!(!is_shadowed(&t, p, b, a).unwrap());
        assert!(matches!(
            is_shadowed(&t, pt(5.0, 5.0), a, b),
            Err(Error::PointOutside(_, _))
        ));
        assert!(matches!(
            is_shadowed(&t, p, a, a),
            Err(Error::AmbiguousOrientation)
        ));
    }

    #[test]
    fn tie_points_resolve_toward_right_copy() {
        let t = triangle();
        // Copies along the hypotenuse direction share the curve line.
        let a = pt(0.0, 0.0);
        let b = pt(0.1, -0.1);
        let p = pt(0.5, 0.3);
        assert!(is_shadowed(&t, p, a, b).unwrap());
        assert!(!is_shadowed(&t, p, b, a).unwrap());

        // Flat-top ties on the square: horizontal shifts.
        let s = square();
        let b2 = pt(0.3, 0.0);
        let p2 = pt(0.5, 0.5);
        assert!(is_shadowed(&s, p2, a, b2).unwrap());
        assert!(!is_shadowed(&s, p2, b2, a).unwrap());
    }

    #[test]
    fn split_partitions_overlap_pointwise() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        let disks = [
            triangle(),
            square(),
            QuarterConvexDisk::from_breakpoints(&[(0.0, 1.0), (0.5, 1.0), (1.0, 0.0)]).unwrap(),
        ];
        for d in &disks {
            let mut tested = 0;
            while tested < 2000 {
                let a = pt(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let b = pt(
                    a.x + rng.random_range(-0.9..0.9),
                    a.y + rng.random_range(-0.9..0.9),
                );
                if a.dist(b) < 1e-6 {
                    continue;
                }
                let p = pt(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                if !(d.contains(p - a, 0.0) && d.contains(p - b, 0.0)) {
                    continue;
                }
                tested += 1;
                let ab = shadow_contains(d, p, a, b, SplitRule::Correct);
                let ba = shadow_contains(d, p, b, a, SplitRule::Correct);
                assert!(ab != ba, "exactly one side must own {:?}", p);
            }
        }
    }

    #[test]
    fn shadow_region_of_diagonal_shift_is_full_overlap() {
        let t = triangle();
        let (a, b) = (pt(0.0, 0.0), pt(0.2, 0.2));
        let shadow = shadowed_region(&t, a, b).unwrap();
        // Overlap is the triangle {x >= 0.2, y >= 0.2, x + y <= 1}.
        assert!((shadow.region.area() - 0.5 * 0.6 * 0.6).abs() < 1e-12);
        let back = shadowed_region(&t, b, a).unwrap();
        assert!(back.region.area() < 1e-12);
        assert!(back.region.is_empty());
    }

    #[test]
    fn shadow_region_square_crossing_splits_at_one() {
        let s = square();
        let (a, b) = (pt(0.0, 0.0), pt(0.5, -0.5));
        // The curves cross at (1, 0.5); the left-above copy keeps the whole
        // open-left part of the overlap.
        let ba = shadowed_region(&s, b, a).unwrap();
        assert!((ba.region.area() - 0.25).abs() < 1e-12);
        assert!((ba.crossing_x.unwrap() - 1.0).abs() < 1e-12);
        let ab = shadowed_region(&s, a, b).unwrap();
        assert!(ab.region.area() < 1e-12);

        assert!(matches!(
            shadowed_region(&s, a, pt(2.0, 2.0)),
            Err(Error::DisjointCopies)
        ));
    }

    #[test]
    fn shadow_region_agrees_with_pointwise_rule() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let disks = [
            triangle(),
            square(),
            QuarterConvexDisk::from_breakpoints(&[(0.0, 1.0), (0.4, 0.8), (1.0, 0.3)]).unwrap(),
        ];
        for d in &disks {
            let mut pairs = 0;
            while pairs < 200 {
                let a = pt(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
                let b = pt(
                    a.x + rng.random_range(-0.9..0.9),
                    a.y + rng.random_range(-0.9..0.9),
                );
                if a.dist(b) < 1e-3 {
                    continue;
                }
                let Ok(shadow) = shadowed_region(d, a, b) else {
                    continue;
                };
                pairs += 1;
                for _ in 0..60 {
                    let p = pt(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
                    if !(d.contains(p - a, 0.0) && d.contains(p - b, 0.0)) {
                        continue;
                    }
                    // Skip the threshold line and region boundary fringes.
                    if let Some(sb) = shadow.bound {
                        let x0 = match sb {
                            StepBound::Down { x0, .. } | StepBound::Up { x0, .. } => x0,
                        };
                        if (p.x - x0).abs() < 1e-6 {
                            continue;
                        }
                    }
                    let pointwise = shadow_rule(d, p, a, b, SplitRule::Correct);
                    let regional = shadow.region.contains(p, 0.0);
                    if pointwise != regional {
                        // Tolerate only boundary-hugging disagreements.
                        let margin = 1e-6;
                        assert!(
                            shadow.region.contains(p, margin) != shadow.region.contains(p, -margin),
                            "interior disagreement at {:?} for {:?} {:?}",
                            p,
                            a,
                            b
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn cut_region_triangle_example() {
        let t = triangle();
        let (a, b) = (pt(0.0, 0.0), pt(0.2, 0.2));
        let cut = cut_region(&t, a, b).unwrap();
        let q = cut.quadrant.unwrap();
        assert_eq!(q.kind, QuadrantKind::UpperRight);
        assert!(q.corner.dist(pt(0.2, 0.2)) < 1e-12);
        // Removed area is the full overlap.
        assert!((cut.region.area() - (0.5 - 0.18)).abs() < 1e-12);

        assert!(matches!(
            cut_region(&t, a, pt(2.0, 2.0)),
            Err(Error::DisjointCopies)
        ));
    }

    #[test]
    fn cut_partition_identity_on_raster() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let disks = [triangle(), square()];
        for d in &disks {
            let mut pairs = 0;
            while pairs < 40 {
                let a = pt(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));
                let b = pt(
                    a.x + rng.random_range(-0.8..0.8),
                    a.y + rng.random_range(-0.8..0.8),
                );
                if a.dist(b) < 1e-3 {
                    continue;
                }
                let (Ok(cut_ab), Ok(cut_ba)) = (cut_region(d, a, b), cut_region(d, b, a)) else {
                    continue;
                };
                pairs += 1;
                let n = 128;
                for i in 0..n {
                    for j in 0..n {
                        let p = pt(
                            -1.5 + 3.0 * (i as f64 + 0.5) / n as f64,
                            -1.5 + 3.0 * (j as f64 + 0.5) / n as f64,
                        );
                        let in_union =
                            d.contains(p - a, -1e-9) || d.contains(p - b, -1e-9);
                        let in_ab = cut_ab.region.contains(p, -1e-9);
                        let in_ba = cut_ba.region.contains(p, -1e-9);
                        if in_ab && in_ba {
                            // Interior double-claim is a violation unless on
                            // a shared boundary pixel.
                            let strict_ab = cut_ab.region.contains(p, -1e-5);
                            let strict_ba = cut_ba.region.contains(p, -1e-5);
                            assert!(
                                !(strict_ab && strict_ba),
                                "double claim at {:?} for {:?} {:?}",
                                p,
                                a,
                                b
                            );
                        }
                        if in_union
                            && d.contains(p - a, -1e-5)
                            && d.contains(p - b, -1e-5)
                        {
                            assert!(
                                cut_ab.region.contains(p, 1e-6)
                                    || cut_ba.region.contains(p, 1e-6),
                                "unclaimed overlap point {:?}",
                                p
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn quadrant_reproduces_cut_region_on_raster() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let d = QuarterConvexDisk::from_breakpoints(&[(0.0, 1.0), (0.5, 1.0), (1.0, 0.0)])
            .unwrap();
        let mut pairs = 0;
        while pairs < 60 {
            let a = pt(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));
            let b = pt(
                a.x + rng.random_range(-0.8..0.8),
                a.y + rng.random_range(-0.8..0.8),
            );
            if a.dist(b) < 1e-3 {
                continue;
            }
            let Ok(cut) = cut_region(&d, a, b) else { continue };
            pairs += 1;
            let n = 96;
            for i in 0..n {
                for j in 0..n {
                    let p = pt(
                        a.x + (i as f64 + 0.5) / n as f64,
                        a.y + (j as f64 + 0.5) / n as f64,
                    );
                    if !d.contains(p - a, -1e-7) {
                        continue;
                    }
                    let via_quadrant = match cut.quadrant {
                        Some(q) => !q.contains(p),
                        None => true,
                    };
                    let via_region = cut.region.contains(p, 0.0);
                    if via_quadrant != via_region {
                        let margin = 2.0 / n as f64;
                        assert!(
                            cut.region.contains(p, margin) != cut.region.contains(p, -margin),
                            "quadrant mismatch beyond a pixel at {:?} ({:?} vs {:?})",
                            p,
                            cut.quadrant,
                            via_region
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn decompose_single_copy_window() {
        let t = triangle();
        let inst = CoveringInstance::new(t, vec![pt(-0.25, -0.25)], 0.2, 128).unwrap();
        let cells = decompose_covering(&inst).unwrap();
        assert_eq!(cells.len(), 1);
        let s = &cells[0].stair;
        assert_eq!(s.signature(), (0, 0, 0, 0));
        assert!((s.area() - 0.16).abs() < 1e-12);
        let (x0, x1) = s.x_range();
        assert!((x0 + 0.2).abs() < 1e-12 && (x1 - 0.2).abs() < 1e-12);
    }

    #[test]
    fn decompose_square_exact_tiling() {
        let s = square();
        let mut translates = Vec::new();
        for a in -2..2 {
            for b in -2..2 {
                translates.push(pt(a as f64, b as f64));
            }
        }
        let inst = CoveringInstance::new(s, translates, 1.5, 128).unwrap();
        let cells = decompose_covering(&inst).unwrap();
        assert_eq!(cells.len(), 16);
        let mut total = 0.0;
        for c in &cells {
            assert_eq!(c.signature(), (0, 0, 0, 0));
            total += c.stair.area();
        }
        assert!((total - 9.0).abs() < 1e-9, "total {total}");

        let audit =
            audit_decomposition(&inst, &cells, &OptimizeConfig::default(), 256).unwrap();
        assert!(audit.all_ok(), "{audit:?}");
        assert_eq!(audit.sum_r, 0);
    }

    #[test]
    fn decompose_triangle_lattice_with_extra_copy() {
        let t = triangle();
        let stair = StairPolygon::inscribed(&t, &[1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let lat = stair.tiling_lattice().unwrap();
        let mut translates: Vec<Point> = lat
            .points_within(5.0)
            .into_iter()
            .filter(|v| v.x > -2.3 && v.x < 1.3 && v.y > -2.3 && v.y < 1.3)
            .collect();
        translates.push(pt(-0.45, -0.55));
        let inst = CoveringInstance::new(t, translates, 1.0, 256).unwrap();
        let cells = decompose_covering(&inst).unwrap();
        let n = inst.translates().len();
        let sum_r: usize = cells.iter().map(|c| c.descents()).sum();
        assert!(sum_r <= n - 1, "sum_r {sum_r} vs N {n}");
        let audit =
            audit_decomposition(&inst, &cells, &OptimizeConfig::default(), 256).unwrap();
        assert!(audit.all_ok(), "{audit:?}");
        // N = 1 window audit arithmetic from the single-copy example:
        let single = CoveringInstance::new(
            QuarterConvexDisk::triangle(),
            vec![pt(-0.25, -0.25)],
            0.2,
            128,
        )
        .unwrap();
        let single_cells = decompose_covering(&single).unwrap();
        let audit =
            audit_decomposition(&single, &single_cells, &OptimizeConfig::default(), 256)
                .unwrap();
        assert!((audit.area_sum - 0.16).abs() < 1e-9);
        assert_eq!(audit.sum_r, 0);
        assert!(audit.all_ok(), "{audit:?}");
        // 0.16 <= 1 * A(1) = 1/3.
        assert!(audit.window_area <= audit.a1 + 1e-6);
    }

    #[test]
    fn covering_instance_rejects_gaps() {
        let s = square();
        let err = CoveringInstance::new(s, vec![pt(0.0, 0.0)], 1.0, 64).unwrap_err();
        assert!(matches!(err, Error::NotACovering(_)));
    }

    #[test]
    fn cells_stay_under_their_curve() {
        let t = triangle();
        let stair = StairPolygon::inscribed(&t, &[1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let lat = stair.tiling_lattice().unwrap();
        let translates: Vec<Point> = lat
            .points_within(5.0)
            .into_iter()
            .filter(|v| v.x > -2.3 && v.x < 1.3 && v.y > -2.3 && v.y < 1.3)
            .collect();
        let inst = CoveringInstance::new(t.clone(), translates, 1.0, 256).unwrap();
        let cells = decompose_covering(&inst).unwrap();
        for cell in &cells {
            let u = inst.translates()[cell.owner];
            for col in cell.stair.top_columns() {
                for frac in [0.25, 0.5, 0.75] {
                    let x = col.x0 + frac * (col.x1 - col.x0);
                    let curve = curve_height(&t, u, x).unwrap();
                    assert!(
                        col.top <= curve + 1e-9,
                        "cell top {} above curve {} at x {}",
                        col.top,
                        curve,
                        x
                    );
                }
            }
        }
    }
}
