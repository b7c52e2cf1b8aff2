//! Maximum area `A(r)` of an inscribed stair polygon with `r` descents:
//! a seeded multi-start coordinate ascent, an exact dynamic-programming
//! oracle on a uniform grid, and the piecewise-linear concave extension of
//! the integer knots.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::disk::QuarterConvexDisk;
use crate::error::{Error, Result};
use crate::stair::StairPolygon;

/// Tuning for `max_stair_area`.
#[derive(Debug, Clone)]
pub struct OptimizeConfig {
    /// Multi-start count, including the deterministic seeds.
    pub restarts: usize,
    pub seed: u64,
    /// Acceptable gap against the grid oracle.
    pub tol: f64,
    /// Resolution of the final local refinement pass.
    pub refine_step: f64,
    /// Compare against `oracle_max_stair_area` on this grid when set.
    pub oracle_grid: Option<usize>,
    /// Extra start tuples (used to chain `A(r)` computations).
    pub warm_starts: Vec<Vec<f64>>,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            seed: 0,
            tol: 1e-6,
            refine_step: 1e-4,
            oracle_grid: None,
            warm_starts: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationResult {
    pub value: f64,
    /// Strictly increasing abscissas after collapsing tied coordinates.
    pub xs: Vec<f64>,
    pub iterations: usize,
    pub restarts_used: usize,
    /// `value - oracle_value` when an oracle comparison was requested.
    pub oracle_gap: Option<f64>,
}

/// Area of the inscribed stair with step abscissas `xs`:
/// `sum_k (x_k - x_{k-1}) f(x_k)` with `x_0 = 0`.
pub fn stair_objective(disk: &QuarterConvexDisk, xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::BadAbscissas("empty".into()));
    }
    let mut prev = 0.0;
    for &x in xs {
        if !(x > prev && x <= 1.0 + 1e-12) {
            return Err(Error::BadAbscissas(format!("{:?}", xs)));
        }
        prev = x;
    }
    Ok(objective_unchecked(disk, xs))
}

fn objective_unchecked(disk: &QuarterConvexDisk, xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut prev = 0.0;
    for &x in xs {
        sum += (x - prev) * disk.height_unchecked(x.min(1.0));
        prev = x;
    }
    sum
}

/// Exact maximum of the stair objective over the grid `{k / grid_n}` with
/// `r + 1` abscissas, by dynamic programming over (grid index, steps used).
pub fn oracle_max_stair_area(
    disk: &QuarterConvexDisk,
    r: usize,
    grid_n: usize,
) -> Result<(f64, Vec<f64>)> {
    if grid_n < 2 || grid_n < r + 1 {
        return Err(Error::BudgetTooLarge { grid_n, steps: r });
    }
    let cells = (grid_n as u64) * (grid_n as u64) * (r as u64 + 1);
    if cells > 2_000_000_000 {
        return Err(Error::BudgetTooLarge { grid_n, steps: r });
    }

    let xs: Vec<f64> = (1..=grid_n).map(|j| j as f64 / grid_n as f64).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| disk.height_unchecked(x)).collect();
    let n = grid_n;

    // best[j] = optimal value using k points with the last at grid index j.
    let mut best: Vec<f64> = (0..n).map(|j| xs[j] * fs[j]).collect();
    let mut parents: Vec<Vec<usize>> = Vec::with_capacity(r);
    for _ in 0..r {
        let mut next = vec![f64::NEG_INFINITY; n];
        let mut parent = vec![usize::MAX; n];
        for j in 1..n {
            // max over i < j of best[i] - f(x_j) * x_i, plus f(x_j) * x_j.
            let fj = fs[j];
            let mut arg = usize::MAX;
            let mut val = f64::NEG_INFINITY;
            for i in 0..j {
                let cand = best[i] - fj * xs[i];
                if cand > val {
                    val = cand;
                    arg = i;
                }
            }
            next[j] = val + fj * xs[j];
            parent[j] = arg;
        }
        parents.push(parent);
        best = next;
    }

    let (mut j, mut value) = (0usize, f64::NEG_INFINITY);
    for (idx, &v) in best.iter().enumerate() {
        if v > value {
            value = v;
            j = idx;
        }
    }
    let mut picked = vec![j];
    for parent in parents.iter().rev() {
        j = parent[j];
        picked.push(j);
    }
    picked.reverse();
    let mut chosen: Vec<f64> = picked.into_iter().map(|i| xs[i]).collect();
    // Collapse coordinates landing on equal heights, mirroring the stair
    // canonical form; the value is unchanged.
    chosen.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    Ok((value, chosen))
}

/// Best inscribed-stair area found for step budget `r`: seeded multi-start
/// coordinate ascent with golden-section line searches, followed by one
/// local grid refinement pass.
pub fn max_stair_area(
    disk: &QuarterConvexDisk,
    r: usize,
    cfg: &OptimizeConfig,
) -> Result<OptimizationResult> {
    let dim = r + 1;
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(cfg.restarts.max(2));
    // Closing uniform partition (ends at 1; exact for flat-topped disks).
    starts.push((1..=dim).map(|k| k as f64 / dim as f64).collect());
    // Interior uniform partition (exact for the triangle).
    starts.push((1..=dim).map(|k| k as f64 / (dim + 1) as f64).collect());
    for warm in &cfg.warm_starts {
        if let Some(s) = pad_start(warm, dim) {
            starts.push(s);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while starts.len() < cfg.restarts.max(2) {
        let mut s: Vec<f64> = (0..dim).map(|_| rng.random_range(1e-6..=1.0)).collect();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        starts.push(s);
    }

    let runs: Vec<(usize, f64, Vec<f64>, usize)> = starts
        .par_iter()
        .enumerate()
        .map(|(idx, start)| {
            let (value, xs, iters) = coordinate_ascent(disk, start.clone());
            (idx, value, xs, iters)
        })
        .collect();
    let mut best_idx = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.1 > runs[best_idx].1 {
            best_idx = i;
        }
    }
    let (_, _, xs, iterations) = runs[best_idx].clone();
    let xs = refine_pass(disk, xs, cfg.refine_step);

    // Collapse tied coordinates; the optimum may genuinely use fewer steps.
    let mut collapsed: Vec<f64> = Vec::with_capacity(xs.len());
    for &x in &xs {
        match collapsed.last() {
            Some(&p) if x - p <= 1e-12 => {}
            _ => collapsed.push(x),
        }
    }
    let value = objective_unchecked(disk, &collapsed);

    let oracle_gap = match cfg.oracle_grid {
        Some(grid_n) => {
            let (oracle_value, _) = oracle_max_stair_area(disk, r, grid_n)?;
            Some(value - oracle_value)
        }
        None => None,
    };

    Ok(OptimizationResult {
        value,
        xs: collapsed,
        iterations,
        restarts_used: runs.len(),
        oracle_gap,
    })
}

fn pad_start(warm: &[f64], dim: usize) -> Option<Vec<f64>> {
    let mut s: Vec<f64> = warm.iter().copied().filter(|x| (0.0..=1.0).contains(x)).collect();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if s.is_empty() || s.len() > dim {
        return None;
    }
    // Insert midpoints of the widest gaps until the dimension matches.
    while s.len() < dim {
        let mut gap_at = 0;
        let mut gap = 0.0;
        let mut prev = 0.0;
        for (i, &x) in s.iter().enumerate() {
            if x - prev > gap {
                gap = x - prev;
                gap_at = i;
            }
            prev = x;
        }
        let lo = if gap_at == 0 { 0.0 } else { s[gap_at - 1] };
        s.insert(gap_at, 0.5 * (lo + s[gap_at]));
    }
    Some(s)
}

/// Cyclic coordinate maximization. Each coordinate problem is concave
/// (piecewise-quadratic with downward kinks), so a golden-section search
/// plus breakpoint/endpoint candidates finds its global maximum.
fn coordinate_ascent(disk: &QuarterConvexDisk, mut xs: Vec<f64>) -> (f64, Vec<f64>, usize) {
    let dim = xs.len();
    let mut value = objective_unchecked(disk, &xs);
    let mut iterations = 0;
    for _ in 0..200 {
        iterations += 1;
        let before = value;
        for k in 0..dim {
            let lo = if k == 0 { 0.0 } else { xs[k - 1] };
            let hi = if k == dim - 1 { 1.0 } else { xs[k + 1] };
            if hi - lo < 1e-15 {
                continue;
            }
            let fixed_next = if k == dim - 1 {
                None
            } else {
                Some((xs[k + 1], disk.height_unchecked(xs[k + 1])))
            };
            let g = |v: f64| {
                let own = (v - lo) * disk.height_unchecked(v.min(1.0));
                match fixed_next {
                    Some((nx, nf)) => own + (nx - v) * nf,
                    None => own,
                }
            };
            let mut best_v = xs[k];
            let mut best_g = g(best_v);
            let mut consider = |v: f64, best_v: &mut f64, best_g: &mut f64| {
                if v < lo || v > hi {
                    return;
                }
                let gv = g(v);
                if gv > *best_g {
                    *best_g = gv;
                    *best_v = v;
                }
            };
            consider(golden_section_max(&g, lo, hi, 70), &mut best_v, &mut best_g);
            consider(hi, &mut best_v, &mut best_g);
            for bp in disk.breakpoints() {
                consider(bp.x, &mut best_v, &mut best_g);
            }
            xs[k] = best_v;
        }
        value = objective_unchecked(disk, &xs);
        if value - before < 1e-12 {
            break;
        }
    }
    (value, xs, iterations)
}

/// Golden-section maximization of a unimodal function on `[a, b]`.
fn golden_section_max<F: Fn(f64) -> f64>(g: &F, mut a: f64, mut b: f64, iters: usize) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - (b - a) * INV_PHI;
    let mut d = a + (b - a) * INV_PHI;
    let mut gc = g(c);
    let mut gd = g(d);
    for _ in 0..iters {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - (b - a) * INV_PHI;
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + (b - a) * INV_PHI;
            gd = g(d);
        }
    }
    0.5 * (a + b)
}

fn refine_pass(disk: &QuarterConvexDisk, mut xs: Vec<f64>, step: f64) -> Vec<f64> {
    let dim = xs.len();
    for k in 0..dim {
        let lo = if k == 0 { 0.0 } else { xs[k - 1] };
        let hi = if k == dim - 1 { 1.0 } else { xs[k + 1] };
        let mut best_v = xs[k];
        let mut best = objective_unchecked(disk, &xs);
        let mut try_v = |v: f64, xs: &mut Vec<f64>, best: &mut f64, best_v: &mut f64| {
            if v <= lo || v > hi {
                return;
            }
            let old = xs[k];
            xs[k] = v;
            let val = objective_unchecked(disk, xs);
            if val > *best {
                *best = val;
                *best_v = v;
            }
            xs[k] = old;
        };
        for j in -20i32..=20 {
            try_v(xs[k] + j as f64 * step, &mut xs, &mut best, &mut best_v);
        }
        try_v(hi, &mut xs, &mut best, &mut best_v);
        for bp in disk.breakpoints() {
            try_v(bp.x, &mut xs, &mut best, &mut best_v);
        }
        xs[k] = best_v;
    }
    xs
}

/// Piecewise-linear extension through the integer knots `A(0), ..., A(R)`.
#[derive(Debug, Clone, Serialize)]
pub struct ConcaveExtension {
    pub knots: Vec<f64>,
}

impl ConcaveExtension {
    /// Evaluate at a real argument in `[0, R]` (clamped).
    pub fn eval(&self, t: f64) -> f64 {
        let last = (self.knots.len() - 1) as f64;
        let t = t.clamp(0.0, last);
        let i = (t.floor() as usize).min(self.knots.len() - 2);
        let frac = t - i as f64;
        self.knots[i] + frac * (self.knots[i + 1] - self.knots[i])
    }

    pub fn max_knot(&self) -> usize {
        self.knots.len() - 1
    }
}

/// Compute `A(0..=r_max)` by chained optimization: each budget seeds the
/// next with the previous optimizer, which keeps the knots non-decreasing.
pub fn concave_extension(
    disk: &QuarterConvexDisk,
    r_max: usize,
    cfg: &OptimizeConfig,
) -> Result<ConcaveExtension> {
    let mut knots = Vec::with_capacity(r_max + 1);
    let mut chained = cfg.clone();
    for r in 0..=r_max {
        let opt = max_stair_area(disk, r, &chained)?;
        chained.warm_starts = vec![opt.xs.clone()];
        knots.push(opt.value);
    }
    Ok(ConcaveExtension { knots })
}
