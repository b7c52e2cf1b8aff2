//! Row-interval rasterization over the square window `[-l, l]^2`.
//!
//! Samples sit at half-pixel offsets, strictly interior to the window, so
//! boundary contacts of measure zero never flip a membership count. Shapes
//! contribute one x-interval per sample row; counts accumulate through
//! per-row difference arrays, which keeps the work linear in covered pixels.

use rayon::prelude::*;
use std::collections::BTreeMap;

/// Multiplicity counts over the sample grid of `[-half, half]^2`.
#[derive(Debug, Clone)]
pub struct MultiplicityGrid {
    pub half: f64,
    pub resolution: usize,
    /// Row-major counts, `resolution * resolution` entries.
    pub counts: Vec<u32>,
}

impl MultiplicityGrid {
    /// Coordinate of sample index `i` along either axis.
    pub fn coord(half: f64, resolution: usize, i: usize) -> f64 {
        -half + 2.0 * half * (i as f64 + 0.5) / resolution as f64
    }

    pub fn samples(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn covered(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn histogram(&self) -> BTreeMap<u32, usize> {
        let mut h = BTreeMap::new();
        for &c in &self.counts {
            *h.entry(c).or_insert(0usize) += 1;
        }
        h
    }

    pub fn fraction_with_count(&self, k: u32) -> f64 {
        let n = self.counts.iter().filter(|&&c| c == k).count();
        n as f64 / self.samples() as f64
    }

    /// Samples whose count differs from `k` and which do not sit next to a
    /// count transition (8-neighborhood). For a true tiling every defect
    /// hugs a cell boundary, so this is zero up to pixel effects.
    pub fn defects_off_transitions(&self, k: u32) -> usize {
        let n = self.resolution;
        let mut defects = 0;
        for row in 0..n {
            for col in 0..n {
                let c = self.counts[row * n + col];
                if c == k {
                    continue;
                }
                let mut boundary = row == 0 || col == 0 || row == n - 1 || col == n - 1;
                if !boundary {
                    'scan: for dr in -1i64..=1 {
                        for dc in -1i64..=1 {
                            let r = (row as i64 + dr) as usize;
                            let cc = (col as i64 + dc) as usize;
                            if self.counts[r * n + cc] != c {
                                boundary = true;
                                break 'scan;
                            }
                        }
                    }
                }
                if !boundary {
                    defects += 1;
                }
            }
        }
        defects
    }
}

/// Rasterize membership multiplicity: `row_span(shape, y)` yields the
/// x-interval covered by the shape on the horizontal line at `y`, or `None`.
pub fn multiplicity<T: Sync, F>(
    half: f64,
    resolution: usize,
    shapes: &[T],
    row_span: F,
) -> MultiplicityGrid
where
    F: Fn(&T, f64) -> Option<(f64, f64)> + Sync,
{
    let n = resolution;
    let step = 2.0 * half / n as f64;
    let counts: Vec<u32> = (0..n)
        .into_par_iter()
        .flat_map_iter(|row| {
            let y = MultiplicityGrid::coord(half, n, row);
            // Difference array with one slot of slack for the exclusive end.
            let mut diff = vec![0i32; n + 1];
            for shape in shapes {
                if let Some((lo, hi)) = row_span(shape, y) {
                    if hi <= lo {
                        continue;
                    }
                    // Sample i covered when coord(i) in [lo, hi].
                    let i0 = ((lo + half) / step - 0.5).ceil().max(0.0) as usize;
                    let i1f = ((hi + half) / step - 0.5).floor();
                    if i1f < 0.0 || i0 >= n {
                        continue;
                    }
                    let i1 = (i1f as usize).min(n - 1);
                    if i0 <= i1 {
                        diff[i0] += 1;
                        diff[i1 + 1] -= 1;
                    }
                }
            }
            let mut acc = 0i32;
            let mut row_counts = Vec::with_capacity(n);
            for d in diff.iter().take(n) {
                acc += d;
                row_counts.push(acc as u32);
            }
            row_counts
        })
        .collect();
    MultiplicityGrid {
        half,
        resolution: n,
        counts,
    }
}
