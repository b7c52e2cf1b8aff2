//! Covering-density toolkit for quarter-convex disks.
//!
//! A quarter-convex disk is the region under a concave non-increasing
//! height profile `f` on `[0, 1]` with `f(0) = 1`, together with everything
//! affinely equivalent to it; the class contains all triangles and convex
//! quadrilaterals. The crate computes the supremum area `A(r)` of inscribed
//! stair polygons with `r` descents, derives the lattice covering density
//! `theta_L = |K| / A(1)`, constructs the optimal lattice covering, and
//! decomposes arbitrary finite translative coverings of a square window
//! into stair-shaped cells so the density certificate
//! `N * A(1) >= |window|` can be audited instance by instance.

pub mod cutops;
pub mod disk;
pub mod error;
pub mod geom;
pub mod inscribe;
pub mod lattice;
pub mod properties;
pub mod raster;
pub mod stair;

pub use disk::{normalize_quadrilateral, normalize_triangle, BoundaryCurve, QuarterConvexDisk};
pub use error::Error;
pub use geom::{AffineMap, Point};




/// Default tolerance for geometric predicates.
pub const PREDICATE_EPS: f64 = 1e-9;

/// Tolerance for merging collinear segments and degenerate steps.
pub const CANONICAL_EPS: f64 = 1e-12;
