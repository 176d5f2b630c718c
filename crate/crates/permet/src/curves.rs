//! Polyline curves, the exact two-phase length functional, and the
//! constructive curve surgeries: snapping a point to the matrix phase,
//! pushing a curve out of the inclusions onto their boundaries, and
//! piecewise-geodesic refinement.
//!
//! The length functional here is exact: every segment is split analytically
//! at its crossings with the tiled inclusion, so it serves as the ground
//! truth the grid solver is measured against.

use crate::coefficient::MetricParams;
use crate::error::{Error, Result};
use crate::geometry::{
    boundary_point_toward, boundary_walk, periodic_contains, signed_distance, InclusionShape,
    Point2, ShapeKind,
};
use crate::grid_solver::{distance_folded, SolverSettings};
use crate::tolerances::TOL_CROSSING_DEPTH;

/// Piecewise-linear curve, parameterized by arc length.
///
/// Zero-length segments are dropped on construction. A curve that collapses
/// to a single point is kept as two equal vertices (the constant curve).
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    vertices: Vec<Point2>,
}

impl Path {
    pub fn new(points: Vec<Point2>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParams("path needs at least one vertex".into()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParams("path vertex not finite".into()));
        }
        let mut vertices: Vec<Point2> = Vec::with_capacity(points.len());
        for p in points {
            if vertices.last().is_none_or(|&q| q != p) {
                vertices.push(p);
            }
        }
        if vertices.len() == 1 {
            let p = vertices[0];
            vertices.push(p);
        }
        Ok(Path { vertices })
    }

    pub fn segment(a: Point2, b: Point2) -> Self {
        Path {
            vertices: if a == b { vec![a, a] } else { vec![a, b] },
        }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn first(&self) -> Point2 {
        self.vertices[0]
    }

    pub fn last(&self) -> Point2 {
        *self.vertices.last().unwrap()
    }

    pub fn euclidean_length(&self) -> f64 {
        self.vertices.windows(2).map(|w| w[0].dist(w[1])).sum()
    }

    /// Point at arc-length position `s`, clamped to the curve.
    pub fn point_at_arc_length(&self, s: f64) -> Point2 {
        if s <= 0.0 {
            return self.first();
        }
        let mut acc = 0.0;
        for w in self.vertices.windows(2) {
            let len = w[0].dist(w[1]);
            if s <= acc + len && len > 0.0 {
                let t = (s - acc) / len;
                return w[0] + (w[1] - w[0]) * t;
            }
            acc += len;
        }
        self.last()
    }

    /// Scales every vertex by `s` (coordinate change between folded and
    /// unfolded pictures).
    pub fn scaled(&self, s: f64) -> Path {
        Path {
            vertices: self.vertices.iter().map(|&v| v * s).collect(),
        }
    }
}

/// Parameter interval (sub-range of [0,1]) where the segment `a + t (b - a)`
/// lies inside the inclusion translated by `k`, if of positive length.
fn inclusion_interval_in_cell(
    shape: &InclusionShape,
    a: Point2,
    d: Point2,
    k: Point2,
) -> Option<(f64, f64)> {
    match shape.kind() {
        ShapeKind::Disk { center, radius } => {
            let rel = a - (*center + k);
            let aa = d.norm_sq();
            if aa == 0.0 {
                return None;
            }
            let bb = rel.dot(d);
            let cc = rel.norm_sq() - radius * radius;
            let disc = bb * bb - aa * cc;
            if disc <= 0.0 {
                return None;
            }
            let sq = disc.sqrt();
            clamp_interval((-bb - sq) / aa, (-bb + sq) / aa)
        }
        ShapeKind::Square { center, half_side } => {
            let c = *center + k;
            let h = *half_side;
            let mut t0: f64 = 0.0;
            let mut t1: f64 = 1.0;
            for (pa, pd, pc) in [(a.x, d.x, c.x), (a.y, d.y, c.y)] {
                if pd == 0.0 {
                    if (pa - pc).abs() >= h {
                        return None;
                    }
                } else {
                    let mut lo = (pc - h - pa) / pd;
                    let mut hi = (pc + h - pa) / pd;
                    if lo > hi {
                        std::mem::swap(&mut lo, &mut hi);
                    }
                    t0 = t0.max(lo);
                    t1 = t1.min(hi);
                    if t0 >= t1 {
                        return None;
                    }
                }
            }
            clamp_interval(t0, t1)
        }
        ShapeKind::ConvexPolygon { vertices } => {
            // Cyrus-Beck clipping against the edge half-planes.
            let n = vertices.len();
            let mut t0: f64 = 0.0;
            let mut t1: f64 = 1.0;
            for i in 0..n {
                let va = vertices[i] + k;
                let vb = vertices[(i + 1) % n] + k;
                let e = vb - va;
                let f0 = e.cross(a - va);
                let slope = e.cross(d);
                if slope == 0.0 {
                    if f0 <= 0.0 {
                        return None;
                    }
                } else if slope > 0.0 {
                    t0 = t0.max(-f0 / slope);
                } else {
                    t1 = t1.min(-f0 / slope);
                }
                if t0 >= t1 {
                    return None;
                }
            }
            clamp_interval(t0, t1)
        }
    }
}

fn clamp_interval(t0: f64, t1: f64) -> Option<(f64, f64)> {
    let lo = t0.max(0.0);
    let hi = t1.min(1.0);
    if hi > lo {
        Some((lo, hi))
    } else {
        None
    }
}

/// Inclusion crossings of the unfolded segment `a -> b` with positive
/// penetration depth, sorted by entry parameter. Each crossing carries the
/// integer translate it belongs to. Tangential touches (depth at rounding
/// level) are dropped, so chords hugging an inclusion boundary carry no
/// crossing.
pub(crate) fn crossing_intervals(
    shape: &InclusionShape,
    a: Point2,
    b: Point2,
) -> Vec<(f64, f64, Point2)> {
    let d = b - a;
    let kx_min = a.x.min(b.x).floor() as i64;
    let kx_max = a.x.max(b.x).floor() as i64;
    let ky_min = a.y.min(b.y).floor() as i64;
    let ky_max = a.y.max(b.y).floor() as i64;
    let mut out = Vec::new();
    for kx in kx_min..=kx_max {
        for ky in ky_min..=ky_max {
            let k = Point2::new(kx as f64, ky as f64);
            if let Some((t0, t1)) = inclusion_interval_in_cell(shape, a, d, k) {
                let mid = a + d * (0.5 * (t0 + t1)) - k;
                if -signed_distance(shape, mid) > TOL_CROSSING_DEPTH {
                    out.push((t0, t1, k));
                }
            }
        }
    }
    out.sort_by(|p, q| p.0.total_cmp(&q.0));
    out
}

/// Fraction of the segment `a -> b` (unfolded coordinates) lying in the
/// inclusion phase.
pub(crate) fn inclusion_fraction(shape: &InclusionShape, a: Point2, b: Point2) -> f64 {
    crossing_intervals(shape, a, b)
        .iter()
        .map(|(t0, t1, _)| t1 - t0)
        .sum()
}

/// Exact cost of the straight segment `a -> b` in unfolded coordinates
/// (period-1 tiling, weights 1 and `params.inclusion_weight()`).
pub(crate) fn segment_cost_unfolded(
    shape: &InclusionShape,
    params: &MetricParams,
    a: Point2,
    b: Point2,
) -> f64 {
    let len = a.dist(b);
    if len == 0.0 {
        return 0.0;
    }
    let frac = inclusion_fraction(shape, a, b);
    if params.p.is_infinite() {
        if frac > 0.0 {
            return f64::INFINITY;
        }
        return len;
    }
    len * ((1.0 - frac) + frac * params.inclusion_weight())
}

/// Exact cost of the straight segment `a -> b` in folded coordinates: the
/// phase structure is read off at `x / epsilon`.
pub fn segment_cost(shape: &InclusionShape, params: &MetricParams, a: Point2, b: Point2) -> f64 {
    let inv = 1.0 / params.epsilon;
    params.epsilon * segment_cost_unfolded(shape, params, a * inv, b * inv)
}

/// The two-phase length functional of a polyline in folded coordinates.
/// Returns infinity when the exponent is infinite and a positive-length
/// piece lies in the inclusion phase.
pub fn length_functional(shape: &InclusionShape, params: &MetricParams, path: &Path) -> f64 {
    path.vertices()
        .windows(2)
        .map(|w| segment_cost(shape, params, w[0], w[1]))
        .sum()
}

/// Moves `xi` to the scaled matrix phase: the identity when `xi` is already
/// there, otherwise the nearest point of the scaled inclusion boundary. The
/// displacement never exceeds sqrt(2) * epsilon.
pub fn snap_to_matrix(shape: &InclusionShape, epsilon: f64, xi: Point2) -> Point2 {
    let w = xi * (1.0 / epsilon);
    if !periodic_contains(shape, w) {
        return xi;
    }
    let k = w.cell();
    let local = w - k;
    let b = boundary_point_toward(shape, local);
    let snapped = (b + k) * epsilon;
    let bound = std::f64::consts::SQRT_2 * epsilon;
    assert!(
        snapped.dist(xi) <= bound * (1.0 + 1e-9),
        "snap displacement {} exceeds sqrt(2) * eps = {}",
        snapped.dist(xi),
        bound
    );
    snapped
}

const EDGE_PARAM_EPS: f64 = 1e-12;

/// Replaces every maximal sub-polyline inside a scaled inclusion by the
/// shorter boundary walk between its entry and exit points. The output lies
/// in the closed scaled matrix phase and stays within sqrt(2) * epsilon of
/// the input.
pub fn push_to_walls(shape: &InclusionShape, epsilon: f64, path: &Path) -> Result<Path> {
    let inv = 1.0 / epsilon;
    let unfolded: Vec<Point2> = path.vertices().iter().map(|&v| v * inv).collect();
    for (name, &endpoint) in [("start", unfolded.first().unwrap()), ("end", unfolded.last().unwrap())]
    {
        if periodic_contains(shape, endpoint) {
            return Err(Error::InvalidParams(format!(
                "path {name} point lies inside a scaled inclusion"
            )));
        }
    }

    let mut out: Vec<Point2> = vec![unfolded[0]];
    // Open incursion: the translate and the entry point (unfolded).
    let mut open: Option<(Point2, Point2)> = None;
    for w in unfolded.windows(2) {
        let (a, b) = (w[0], w[1]);
        let intervals = crossing_intervals(shape, a, b);
        if open.is_some() {
            let continues = intervals
                .first()
                .is_some_and(|(t0, _, k)| *t0 <= EDGE_PARAM_EPS && open.as_ref().unwrap().0 == *k);
            if !continues {
                // The previous segment ended exactly on the boundary: close
                // the incursion at the shared vertex.
                let (k, entry) = open.take().unwrap();
                append_wall_walk(shape, k, entry, a, &mut out)?;
            }
        }
        for (t0, t1, k) in intervals {
            if t1 - t0 <= EDGE_PARAM_EPS {
                continue;
            }
            if open.is_none() {
                let entry = a + (b - a) * t0;
                out.push(entry);
                open = Some((k, entry));
            } else {
                debug_assert!(
                    open.as_ref().is_some_and(|(ok, _)| *ok == k),
                    "incursion continued into a different translate"
                );
            }
            if t1 < 1.0 - EDGE_PARAM_EPS {
                let exit = a + (b - a) * t1;
                let (k, entry) = open.take().unwrap();
                append_wall_walk(shape, k, entry, exit, &mut out)?;
            }
        }
        if open.is_none() {
            out.push(b);
        }
    }
    if let Some((k, entry)) = open.take() {
        // The path ends exactly on the inclusion boundary.
        let last = *unfolded.last().unwrap();
        append_wall_walk(shape, k, entry, last, &mut out)?;
    }

    Path::new(out.into_iter().map(|p| p * epsilon).collect())
}

fn append_wall_walk(
    shape: &InclusionShape,
    k: Point2,
    entry: Point2,
    exit: Point2,
    out: &mut Vec<Point2>,
) -> Result<()> {
    // Clean the tiny numerical offset of the crossing points before asking
    // for the boundary walk.
    let pe = boundary_point_toward(shape, entry - k);
    let px = boundary_point_toward(shape, exit - k);
    let walk = boundary_walk(shape, pe, px)?;
    let diam_bound = std::f64::consts::SQRT_2 * (1.0 + 1e-9);
    for &p in &walk {
        debug_assert!(
            p.dist(entry - k) <= diam_bound,
            "wall walk strayed farther than the cell diameter"
        );
        out.push(p + k);
    }
    Ok(())
}

/// Splits the path at `m + 1` equally spaced arc-length parameters and
/// replaces each piece by the grid geodesic between its endpoints.
pub fn piecewise_geodesic_refine(
    shape: &InclusionShape,
    params: &MetricParams,
    path: &Path,
    m: usize,
    settings: &SolverSettings,
) -> Result<Path> {
    if m < 1 {
        return Err(Error::InvalidParams("refinement needs m >= 1".into()));
    }
    let total = path.euclidean_length();
    if total == 0.0 {
        return Ok(path.clone());
    }
    let waypoints: Vec<Point2> = (0..=m)
        .map(|j| path.point_at_arc_length(total * j as f64 / m as f64))
        .collect();
    let mut vertices: Vec<Point2> = Vec::new();
    for pair in waypoints.windows(2) {
        let piece = distance_folded(shape, params, pair[0], pair[1], settings)?;
        if vertices.is_empty() {
            vertices.extend_from_slice(piece.path.vertices());
        } else {
            vertices.extend_from_slice(&piece.path.vertices()[1..]);
        }
    }
    Path::new(vertices)
}
