//! High opacity coefficient estimation and geodesic-avoidance verification.
//!
//! The opacity threshold reported here is the supremum, over boundary point
//! pairs, of the ratio between the shorter boundary walk and the straight
//! chord. For a convex inclusion the cheapest interior crossing at contrast
//! beta costs beta times the chord, so any contrast above this ratio makes
//! boundary walks beat interior crossings for every pair. The estimator
//! samples equally spaced boundary points and then refines the best pair by
//! golden-section search in both arc-length parameters.

use crate::coefficient::MetricParams;
use crate::error::{Error, Result};
use crate::geometry::{periodic_contains, InclusionShape, Point2};
use crate::grid_solver::{build_field, shortest_path, GridSpec, Rect, SolverSettings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Estimated opacity threshold with the maximizing boundary pair.
#[derive(Debug, Clone)]
pub struct OpacityEstimate {
    pub lambda_hat: f64,
    pub worst_pair: (Point2, Point2),
    pub n_samples: usize,
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

fn golden_max(mut lo: f64, mut hi: f64, iters: usize, f: impl Fn(f64) -> f64) -> f64 {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        x1
    } else {
        x2
    }
}

/// Walk-to-chord ratio at two arc-length positions; degenerate pairs count
/// as the limit value 1 so they never carry the supremum.
fn arc_chord_ratio(shape: &InclusionShape, perimeter: f64, s1: f64, s2: f64) -> f64 {
    let a = shape.boundary_point_at(s1);
    let b = shape.boundary_point_at(s2);
    let chord = a.dist(b);
    if chord < 1e-12 {
        return 1.0;
    }
    let d = (s1 - s2).abs() % perimeter;
    let walk = d.min(perimeter - d);
    walk / chord
}

/// Estimates the opacity threshold by maximizing the walk/chord ratio over
/// equally spaced boundary pairs and refining the best pair.
pub fn estimate_lambda(shape: &InclusionShape, n_samples: usize) -> Result<OpacityEstimate> {
    if n_samples < 64 {
        return Err(Error::InvalidParams(format!(
            "n_samples >= 64 required, got {n_samples}"
        )));
    }
    let perimeter = shape.perimeter();
    let step = perimeter / n_samples as f64;
    let mut best = (1.0f64, 0.0f64, 0.0f64);
    for i in 0..n_samples {
        let s1 = i as f64 * step;
        for j in (i + 1)..n_samples {
            let s2 = j as f64 * step;
            let ratio = arc_chord_ratio(shape, perimeter, s1, s2);
            if ratio > best.0 {
                best = (ratio, s1, s2);
            }
        }
    }
    // Alternate golden-section passes on each parameter around the best
    // sampled pair.
    let (_, mut s1, mut s2) = best;
    for _ in 0..4 {
        s1 = golden_max(s1 - step, s1 + step, 48, |s| {
            arc_chord_ratio(shape, perimeter, s, s2)
        });
        s2 = golden_max(s2 - step, s2 + step, 48, |s| {
            arc_chord_ratio(shape, perimeter, s1, s)
        });
    }
    let refined = arc_chord_ratio(shape, perimeter, s1, s2).max(best.0);
    Ok(OpacityEstimate {
        lambda_hat: refined.max(1.0),
        worst_pair: (
            shape.boundary_point_at(s1),
            shape.boundary_point_at(s2),
        ),
        n_samples,
    })
}

/// One avoidance trial: a matrix-phase endpoint pair and the deepest
/// inclusion incursion of the geodesic between them.
#[derive(Debug, Clone)]
pub struct AvoidanceTrial {
    pub a: Point2,
    pub b: Point2,
    pub distance: f64,
    pub incursion_depth: f64,
    pub violation: bool,
}

/// Avoidance report over random matrix-phase endpoint pairs.
#[derive(Debug, Clone)]
pub struct AvoidanceReport {
    pub beta: f64,
    pub grid_spacing: f64,
    pub trials: Vec<AvoidanceTrial>,
}

impl AvoidanceReport {
    pub fn violations(&self) -> usize {
        self.trials.iter().filter(|t| t.violation).count()
    }
}

/// Maximum depth of the path inside the inclusion phase, sampled along each
/// segment at the given step.
pub fn max_incursion_depth(shape: &InclusionShape, path: &crate::curves::Path, step: f64) -> f64 {
    let mut depth = 0.0f64;
    for w in path.vertices().windows(2) {
        let len = w[0].dist(w[1]);
        let n = (len / step).ceil().max(1.0) as usize;
        for s in 0..=n {
            let p = w[0] + (w[1] - w[0]) * (s as f64 / n as f64);
            let sd = crate::geometry::periodic_signed_distance(shape, p);
            if sd < 0.0 {
                depth = depth.max(-sd);
            }
        }
    }
    depth
}

/// Runs single-scale geodesics between random matrix-phase pairs in a 3x3
/// cell window and reports incursions deeper than one grid spacing.
pub fn verify_avoidance(
    shape: &InclusionShape,
    beta: f64,
    n_trials: usize,
    settings: &SolverSettings,
    seed: u64,
) -> Result<AvoidanceReport> {
    let params = MetricParams::single_scale(beta)?;
    let spec = GridSpec::new(
        Rect {
            min: Point2::new(0.0, 0.0),
            max: Point2::new(3.0, 3.0),
        },
        settings.nodes_per_cell,
        settings.stencil,
    )?;
    let field = build_field(shape, &params, &spec);
    let h = spec.spacing();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(n_trials);
    while pairs.len() < n_trials {
        let a = Point2::new(rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0));
        let b = Point2::new(rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0));
        if a == b || periodic_contains(shape, a) || periodic_contains(shape, b) {
            continue;
        }
        pairs.push((a, b));
    }
    let trials: Vec<AvoidanceTrial> = pairs
        .par_iter()
        .map(|&(a, b)| -> Result<AvoidanceTrial> {
            let res = shortest_path(&field, a, b)?;
            let depth = max_incursion_depth(shape, &res.path, h / 4.0);
            Ok(AvoidanceTrial {
                a,
                b,
                distance: res.value,
                incursion_depth: depth,
                violation: depth > h * (1.0 + 1e-9),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AvoidanceReport {
        beta,
        grid_spacing: h,
        trials,
    })
}
