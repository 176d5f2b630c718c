//! Geodesic distances and homogenized norms for planar two-phase periodic
//! metrics with high-contrast inclusions.
//!
//! The medium is a convex inclusion tiled over the integer lattice, with a
//! piecewise-constant conformal coefficient: 1 in the matrix phase and
//! `beta * eps^(-p)` (or a hard obstacle) in the inclusions. The crate
//! computes induced geodesic distances on grid graphs, estimates the
//! effective (homogenized) norm of the medium, estimates the opacity
//! threshold above which geodesics avoid the inclusions, and runs the
//! convergence experiments around the critical scaling exponent p = 1.

pub mod cli;
pub mod coefficient;
pub mod config;
pub mod curves;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod grid_solver;
pub mod homogenization;
pub mod opacity;
pub mod output;
pub mod tolerances;

pub use coefficient::{check_admissible, Admissibility, MetricParams, PExponent};
pub use curves::{length_functional, snap_to_matrix, Path};
pub use error::{Error, Result};
pub use geometry::{InclusionShape, Point2};
pub use grid_solver::{
    build_field, distance_folded, shortest_path, DistanceResult, GridSpec, SolverSettings, Stencil,
};
