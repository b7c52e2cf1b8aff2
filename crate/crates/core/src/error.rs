use thiserror::Error;

/// Errors raised by disk validation, stair construction, optimization and
/// covering decomposition.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("breakpoints do not describe a convex disk (slope increases at x = {0})")]
    NotConvex(f64),
    #[error("heights are not non-increasing (rise at x = {0})")]
    NotMonotone(f64),
    #[error("bad domain: {0}")]
    BadDomain(String),
    #[error("negative height at x = {0}")]
    NegativeHeight(f64),
    #[error("abscissa {0} outside [0, 1]")]
    OutOfDomain(f64),
    #[error("degenerate input polygon (zero area)")]
    Degenerate,
    #[error("vertices are not in convex position")]
    NotConvexQuad,
    #[error("no corner assignment maps the quadrilateral onto the normal form")]
    NoFeasibleAssignment,
    #[error("step abscissas must be strictly increasing inside (0, 1]: {0}")]
    BadAbscissas(String),
    #[error("polygon is not rectilinear")]
    NotRectilinear,
    #[error("polygon is not simple")]
    NotSimple,
    #[error("polygon violates the stair pattern: {0}")]
    NotStair(String),
    #[error("no tiling lattice for signature ({0}, {1}, {2}, {3})")]
    UnsupportedSignature(usize, usize, usize, usize),
    #[error("invalid step budget")]
    InvalidBudget,
    #[error("oracle budget too large: grid {grid_n} with {steps} steps")]
    BudgetTooLarge { grid_n: usize, steps: usize },
    #[error("lattice basis is degenerate")]
    DegenerateLattice,
    #[error("point ({0}, {1}) lies outside the copy intersection")]
    PointOutside(f64, f64),
    #[error("translative copies do not intersect")]
    DisjointCopies,
    #[error("copy orientation is ambiguous for this contact")]
    AmbiguousOrientation,
    #[error("translates do not cover the window: {0}")]
    NotACovering(String),
    #[error("covering generation failed after {0} patch attempts")]
    GenerationFailed(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
