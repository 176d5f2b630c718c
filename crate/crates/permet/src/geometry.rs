//! Planar geometry of the periodic inclusion.
//!
//! A single convex inclusion sits strictly inside the open unit cell (0,1)²
//! and is tiled by integer translates. The matrix phase is the complement of
//! the tiling. All shape predicates treat the inclusion as an open set: its
//! boundary belongs to the matrix phase.

use crate::error::{Error, Result};
use crate::tolerances::TOL_ON_BOUNDARY;
use std::ops::{Add, Mul, Sub};

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product, positive for a counterclockwise turn.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    /// Componentwise fractional part, mapped into [0, 1).
    pub fn frac(self) -> Point2 {
        Point2::new(self.x - self.x.floor(), self.y - self.y.floor())
    }

    /// Componentwise floor (the integer cell containing the point).
    pub fn cell(self) -> Point2 {
        Point2::new(self.x.floor(), self.y.floor())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Polar angle in [0, 2π).
    pub fn angle(self) -> f64 {
        let a = self.y.atan2(self.x);
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// The shape variant of the inclusion.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeKind {
    Disk { center: Point2, radius: f64 },
    Square { center: Point2, half_side: f64 },
    /// Strictly convex polygon, vertices in counterclockwise order.
    ConvexPolygon { vertices: Vec<Point2> },
}

/// The admissible inclusion: an open convex set strictly interior to the
/// unit cell, together with its clearance to the cell boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct InclusionShape {
    kind: ShapeKind,
    margin: f64,
}

fn cell_boundary_clearance(p: Point2) -> f64 {
    p.x.min(p.y).min(1.0 - p.x).min(1.0 - p.y)
}

impl InclusionShape {
    pub fn disk(center: Point2, radius: f64) -> Result<Self> {
        if radius <= 0.0 || !radius.is_finite() || !center.is_finite() {
            return Err(Error::InvalidShape(format!(
                "disk needs a positive radius and finite center, got r = {radius}"
            )));
        }
        let margin = cell_boundary_clearance(center) - radius;
        Self::check_margin(margin)?;
        Ok(InclusionShape {
            kind: ShapeKind::Disk { center, radius },
            margin,
        })
    }

    pub fn square(center: Point2, half_side: f64) -> Result<Self> {
        if half_side <= 0.0 || !half_side.is_finite() || !center.is_finite() {
            return Err(Error::InvalidShape(format!(
                "square needs a positive half side and finite center, got h = {half_side}"
            )));
        }
        let margin = cell_boundary_clearance(center) - half_side;
        Self::check_margin(margin)?;
        Ok(InclusionShape {
            kind: ShapeKind::Square { center, half_side },
            margin,
        })
    }

    pub fn convex_polygon(vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidShape(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidShape("polygon vertex not finite".into()));
        }
        let n = vertices.len();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if (b - a).cross(c - b) <= 0.0 {
                return Err(Error::InvalidShape(
                    "polygon must be strictly convex with counterclockwise vertices".into(),
                ));
            }
        }
        // The clearance of a convex set to the cell boundary is attained at a
        // vertex (the clearance function is concave on the cell).
        let margin = vertices
            .iter()
            .map(|&v| cell_boundary_clearance(v))
            .fold(f64::INFINITY, f64::min);
        Self::check_margin(margin)?;
        Ok(InclusionShape {
            kind: ShapeKind::ConvexPolygon { vertices },
            margin,
        })
    }

    fn check_margin(margin: f64) -> Result<()> {
        if margin > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidShape(format!(
                "inclusion must lie strictly inside the unit cell (margin = {margin})"
            )))
        }
    }

    pub fn kind(&self) -> &ShapeKind {
        &self.kind
    }

    /// Distance from the closure of the inclusion to the unit-cell boundary.
    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Largest rho such that the ball B_rho(x) is contained in the inclusion;
    /// zero if x is not inside.
    pub fn inradius_at(&self, x: Point2) -> f64 {
        (-signed_distance(self, x)).max(0.0)
    }

    pub fn is_centrally_symmetric(&self) -> bool {
        match &self.kind {
            ShapeKind::Disk { .. } | ShapeKind::Square { .. } => true,
            ShapeKind::ConvexPolygon { vertices } => {
                let n = vertices.len();
                if n % 2 != 0 {
                    return false;
                }
                let c = vertices
                    .iter()
                    .fold(Point2::new(0.0, 0.0), |acc, &v| acc + v)
                    * (1.0 / n as f64);
                vertices.iter().enumerate().all(|(i, &v)| {
                    let opposite = vertices[(i + n / 2) % n];
                    (v + opposite - c * 2.0).norm() < 1e-12
                })
            }
        }
    }

    /// Vertices of the boundary polygon in counterclockwise order. Disks are
    /// polygonized at `segments_per_boundary` edges; squares and polygons are
    /// exact.
    fn boundary_polygon(&self, segments_per_boundary: usize) -> Vec<Point2> {
        match &self.kind {
            ShapeKind::Disk { center, radius } => (0..segments_per_boundary)
                .map(|i| {
                    let t = std::f64::consts::TAU * i as f64 / segments_per_boundary as f64;
                    *center + Point2::new(radius * t.cos(), radius * t.sin())
                })
                .collect(),
            ShapeKind::Square { center, half_side } => {
                let h = *half_side;
                vec![
                    *center + Point2::new(h, -h),
                    *center + Point2::new(h, h),
                    *center + Point2::new(-h, h),
                    *center + Point2::new(-h, -h),
                ]
            }
            ShapeKind::ConvexPolygon { vertices } => vertices.clone(),
        }
    }

    pub fn perimeter(&self) -> f64 {
        match &self.kind {
            ShapeKind::Disk { radius, .. } => std::f64::consts::TAU * radius,
            ShapeKind::Square { half_side, .. } => 8.0 * half_side,
            ShapeKind::ConvexPolygon { vertices } => {
                let n = vertices.len();
                (0..n).map(|i| vertices[i].dist(vertices[(i + 1) % n])).sum()
            }
        }
    }

    /// Boundary point at arc-length position `s` (measured counterclockwise
    /// from a fixed reference vertex), with `s` taken modulo the perimeter.
    pub fn boundary_point_at(&self, s: f64) -> Point2 {
        let perimeter = self.perimeter();
        let mut s = s % perimeter;
        if s < 0.0 {
            s += perimeter;
        }
        match &self.kind {
            ShapeKind::Disk { center, radius } => {
                let t = s / radius;
                *center + Point2::new(radius * t.cos(), radius * t.sin())
            }
            _ => {
                let verts = self.boundary_polygon(0);
                let n = verts.len();
                let mut acc = 0.0;
                for i in 0..n {
                    let a = verts[i];
                    let b = verts[(i + 1) % n];
                    let len = a.dist(b);
                    if s <= acc + len {
                        let t = (s - acc) / len;
                        return a + (b - a) * t;
                    }
                    acc += len;
                }
                verts[0]
            }
        }
    }

    /// Arc-length position of a boundary point (inverse of
    /// [`boundary_point_at`](Self::boundary_point_at) up to the perimeter).
    fn boundary_position(&self, p: Point2) -> f64 {
        match &self.kind {
            ShapeKind::Disk { center, radius } => {
                let a = (p - *center).angle();
                a * radius
            }
            _ => {
                let verts = self.boundary_polygon(0);
                let n = verts.len();
                let mut best = (f64::INFINITY, 0.0);
                let mut acc = 0.0;
                for i in 0..n {
                    let a = verts[i];
                    let b = verts[(i + 1) % n];
                    let len = a.dist(b);
                    let t = ((p - a).dot(b - a) / (len * len)).clamp(0.0, 1.0);
                    let foot = a + (b - a) * t;
                    let d = p.dist(foot);
                    if d < best.0 {
                        best = (d, acc + t * len);
                    }
                    acc += len;
                }
                best.1
            }
        }
    }
}

/// Open-set membership in the single (untiled) inclusion.
pub fn contains(shape: &InclusionShape, x: Point2) -> bool {
    match shape.kind() {
        ShapeKind::Disk { center, radius } => (x - *center).norm_sq() < radius * radius,
        ShapeKind::Square { center, half_side } => {
            (x.x - center.x).abs() < *half_side && (x.y - center.y).abs() < *half_side
        }
        ShapeKind::ConvexPolygon { vertices } => {
            let n = vertices.len();
            (0..n).all(|i| {
                let a = vertices[i];
                let b = vertices[(i + 1) % n];
                (b - a).cross(x - a) > 0.0
            })
        }
    }
}

/// Membership in the periodic tiling of the inclusion.
pub fn periodic_contains(shape: &InclusionShape, x: Point2) -> bool {
    contains(shape, x.frac())
}

/// Signed distance to the single-cell inclusion boundary: negative inside,
/// zero on the boundary, positive outside.
pub fn signed_distance(shape: &InclusionShape, x: Point2) -> f64 {
    match shape.kind() {
        ShapeKind::Disk { center, radius } => (x - *center).norm() - radius,
        ShapeKind::Square { center, half_side } => {
            let dx = (x.x - center.x).abs() - half_side;
            let dy = (x.y - center.y).abs() - half_side;
            if dx > 0.0 || dy > 0.0 {
                Point2::new(dx.max(0.0), dy.max(0.0)).norm()
            } else {
                dx.max(dy)
            }
        }
        ShapeKind::ConvexPolygon { vertices } => {
            let n = vertices.len();
            // The polygon is the intersection of the edge half-planes, so for
            // interior points the boundary distance is the least line
            // distance; for exterior points it is the least segment distance.
            let mut inside = true;
            let mut min_line = f64::INFINITY;
            let mut min_seg = f64::INFINITY;
            for i in 0..n {
                let a = vertices[i];
                let b = vertices[(i + 1) % n];
                let edge = b - a;
                let len = edge.norm();
                let line_dist = edge.cross(x - a) / len;
                if line_dist <= 0.0 {
                    inside = false;
                }
                min_line = min_line.min(line_dist);
                let t = ((x - a).dot(edge) / (len * len)).clamp(0.0, 1.0);
                min_seg = min_seg.min(x.dist(a + edge * t));
            }
            if inside {
                -min_line
            } else {
                min_seg
            }
        }
    }
}

/// Signed distance against the periodic tiling: evaluated in the cell of `x`.
/// Positive values are a valid clearance only up to the shape margin, which
/// is the guaranteed distance to inclusions of neighboring cells.
pub fn periodic_signed_distance(shape: &InclusionShape, x: Point2) -> f64 {
    signed_distance(shape, x.frac())
}

/// The boundary point of the single-cell inclusion nearest to `x`. Ties are
/// broken by the smallest polar angle of the offset from `x`.
pub fn boundary_point_toward(shape: &InclusionShape, x: Point2) -> Point2 {
    match shape.kind() {
        ShapeKind::Disk { center, radius } => {
            let d = x - *center;
            let n = d.norm();
            if n == 0.0 {
                // Every boundary point is equidistant; angle 0 wins.
                *center + Point2::new(*radius, 0.0)
            } else {
                *center + d * (*radius / n)
            }
        }
        ShapeKind::Square { center, half_side } => {
            let h = *half_side;
            let lx = x.x - center.x;
            let ly = x.y - center.y;
            if lx.abs() >= h || ly.abs() >= h {
                // Outside or on the boundary: componentwise clamp projects
                // onto the closed square, which is then a boundary point.
                Point2::new(
                    center.x + lx.clamp(-h, h),
                    center.y + ly.clamp(-h, h),
                )
            } else {
                // Interior: project onto each face line and keep the nearest.
                let candidates = [
                    Point2::new(center.x + h, x.y),
                    Point2::new(center.x - h, x.y),
                    Point2::new(x.x, center.y + h),
                    Point2::new(x.x, center.y - h),
                ];
                pick_nearest_with_angle_tiebreak(x, &candidates)
            }
        }
        ShapeKind::ConvexPolygon { vertices } => {
            // The boundary is a union of segments; the nearest segment point
            // wins for interior and exterior queries alike.
            let n = vertices.len();
            let mut candidates = Vec::with_capacity(n);
            for i in 0..n {
                let a = vertices[i];
                let b = vertices[(i + 1) % n];
                let edge = b - a;
                let t = ((x - a).dot(edge) / edge.norm_sq()).clamp(0.0, 1.0);
                candidates.push(a + edge * t);
            }
            pick_nearest_with_angle_tiebreak(x, &candidates)
        }
    }
}

fn pick_nearest_with_angle_tiebreak(x: Point2, candidates: &[Point2]) -> Point2 {
    let mut best = candidates[0];
    let mut best_d = x.dist(best);
    let mut best_angle = (best - x).angle();
    for &c in &candidates[1..] {
        let d = x.dist(c);
        let angle = (c - x).angle();
        if d < best_d - 1e-15 || ((d - best_d).abs() <= 1e-15 && angle < best_angle) {
            best = c;
            best_d = d;
            best_angle = angle;
        }
    }
    best
}

fn require_on_boundary(shape: &InclusionShape, p: Point2, who: &str) -> Result<()> {
    let sd = signed_distance(shape, p);
    if sd.abs() <= TOL_ON_BOUNDARY {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "{who} ({}, {}) is not on the inclusion boundary (signed distance {sd:.3e})",
            p.x, p.y
        )))
    }
}

/// Length of the shorter boundary path between two boundary points.
pub fn boundary_geodesic_length(shape: &InclusionShape, a: Point2, b: Point2) -> Result<f64> {
    require_on_boundary(shape, a, "first point")?;
    require_on_boundary(shape, b, "second point")?;
    match shape.kind() {
        ShapeKind::Disk { center, radius } => {
            let va = a - *center;
            let vb = b - *center;
            let cos = (va.dot(vb) / (va.norm() * vb.norm())).clamp(-1.0, 1.0);
            Ok(radius * cos.acos())
        }
        _ => {
            let perimeter = shape.perimeter();
            let sa = shape.boundary_position(a);
            let sb = shape.boundary_position(b);
            let d = (sa - sb).abs();
            Ok(d.min(perimeter - d))
        }
    }
}

/// Number of segments used to polygonize one full boundary in walk
/// realizations. A disk walk then carries a relative length defect below
/// 1 - sinc(pi/64) < 5e-4.
pub const WALK_SEGMENTS_PER_BOUNDARY: usize = 64;

/// Vertices of the shorter boundary walk from `a` to `b`, endpoints included.
/// Square and polygon walks follow the exact corners. Disk arcs are
/// circumscribed: intermediate vertices sit at radius r / cos(step/2) at
/// half-step offsets from the endpoints, which makes every chord tangent to
/// the circle or outside it, so the walk carries no inclusion-phase length.
/// The walk overshoots the arc length by tan(x)/x - 1 < 1e-3 at
/// [`WALK_SEGMENTS_PER_BOUNDARY`] segments per full circle.
pub fn boundary_walk(shape: &InclusionShape, a: Point2, b: Point2) -> Result<Vec<Point2>> {
    require_on_boundary(shape, a, "walk start")?;
    require_on_boundary(shape, b, "walk end")?;
    match shape.kind() {
        ShapeKind::Disk { center, radius } => {
            let ta = (a - *center).angle();
            let tb = (b - *center).angle();
            let mut dt = tb - ta;
            if dt > std::f64::consts::PI {
                dt -= std::f64::consts::TAU;
            } else if dt < -std::f64::consts::PI {
                dt += std::f64::consts::TAU;
            }
            let step = std::f64::consts::TAU / WALK_SEGMENTS_PER_BOUNDARY as f64;
            let n = ((dt.abs() / step).ceil() as usize).max(1);
            let half = dt / (2.0 * n as f64);
            let r_out = radius / half.cos();
            let mut pts = Vec::with_capacity(n + 2);
            pts.push(a);
            for i in 1..=n {
                let t = ta + dt * (2 * i - 1) as f64 / (2 * n) as f64;
                pts.push(*center + Point2::new(r_out * t.cos(), r_out * t.sin()));
            }
            pts.push(b);
            Ok(pts)
        }
        _ => {
            let verts = shape.boundary_polygon(0);
            let n = verts.len();
            let perimeter = shape.perimeter();
            let sa = shape.boundary_position(a);
            let sb = shape.boundary_position(b);
            let forward = (sb - sa).rem_euclid(perimeter);
            let backward = perimeter - forward;
            // Corner arc-length positions.
            let mut corner_pos = Vec::with_capacity(n);
            let mut acc = 0.0;
            for i in 0..n {
                corner_pos.push(acc);
                acc += verts[i].dist(verts[(i + 1) % n]);
            }
            let mut pts = vec![a];
            if forward <= backward {
                // Walk counterclockwise from sa to sa + forward.
                let mut corners: Vec<(f64, Point2)> = corner_pos
                    .iter()
                    .zip(verts.iter())
                    .map(|(&s, &v)| ((s - sa).rem_euclid(perimeter), v))
                    .filter(|&(off, _)| off > 1e-12 && off < forward - 1e-12)
                    .collect();
                corners.sort_by(|p, q| p.0.total_cmp(&q.0));
                pts.extend(corners.into_iter().map(|(_, v)| v));
            } else {
                // Walk clockwise: offsets measured against the reverse direction.
                let mut corners: Vec<(f64, Point2)> = corner_pos
                    .iter()
                    .zip(verts.iter())
                    .map(|(&s, &v)| ((sa - s).rem_euclid(perimeter), v))
                    .filter(|&(off, _)| off > 1e-12 && off < backward - 1e-12)
                    .collect();
                corners.sort_by(|p, q| p.0.total_cmp(&q.0));
                pts.extend(corners.into_iter().map(|(_, v)| v));
            }
            pts.push(b);
            pts.dedup_by(|p, q| p.dist(*q) < 1e-14);
            Ok(pts)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn default_disk() -> InclusionShape {
        InclusionShape::disk(Point2::new(0.5, 0.5), 0.25).unwrap()
    }

    fn default_square() -> InclusionShape {
        InclusionShape::square(Point2::new(0.5, 0.5), 0.2).unwrap()
    }

    fn triangle() -> InclusionShape {
        InclusionShape::convex_polygon(vec![
            Point2::new(0.3, 0.3),
            Point2::new(0.7, 0.35),
            Point2::new(0.45, 0.7),
        ])
        .unwrap()
    }

    #[test]
    fn contains_disk_cases() {
        let d = default_disk();
        assert!(contains(&d, Point2::new(0.5, 0.5)));
        assert!(!contains(&d, Point2::new(0.75, 0.5))); // boundary is matrix
        assert!(!contains(&d, Point2::new(0.0, 0.0)));
    }

    #[test]
    fn periodic_contains_translates() {
        let d = default_disk();
        assert!(periodic_contains(&d, Point2::new(3.5, -2.5)));
        assert!(!periodic_contains(&d, Point2::new(3.0, -2.0)));
        let s = default_square();
        assert!(periodic_contains(&s, Point2::new(1.65, 0.5)));
    }

    #[test]
    fn periodic_contains_is_periodic() {
        let shapes = [default_disk(), default_square(), triangle()];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for shape in &shapes {
            for _ in 0..1000 {
                let x = Point2::new(rng.gen_range(-2.0..3.0), rng.gen_range(-2.0..3.0));
                let k = Point2::new(
                    rng.gen_range(-10i32..=10) as f64,
                    rng.gen_range(-10i32..=10) as f64,
                );
                assert_eq!(
                    periodic_contains(shape, x),
                    periodic_contains(shape, x + k),
                    "periodicity failed at {x:?} + {k:?}"
                );
            }
        }
    }

    #[test]
    fn signed_distance_cases() {
        let d = default_disk();
        assert_relative_eq!(signed_distance(&d, Point2::new(0.5, 0.5)), -0.25);
        assert_relative_eq!(signed_distance(&d, Point2::new(1.0, 0.5)), 0.25);
        let s = default_square();
        assert_relative_eq!(signed_distance(&s, Point2::new(0.5, 0.85)), 0.15);
        // Inside the square the distance is to the nearest face.
        assert_relative_eq!(signed_distance(&s, Point2::new(0.5, 0.6)), -0.1);
    }

    #[test]
    fn signed_distance_is_one_lipschitz() {
        let shapes = [default_disk(), default_square(), triangle()];
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for shape in &shapes {
            for _ in 0..500 {
                let a = Point2::new(rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5));
                let b = Point2::new(rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5));
                let lhs = (signed_distance(shape, a) - signed_distance(shape, b)).abs();
                assert!(
                    lhs <= a.dist(b) + 1e-12,
                    "Lipschitz violated: |sd({a:?}) - sd({b:?})| = {lhs}"
                );
            }
        }
    }

    #[test]
    fn boundary_projection_cases() {
        let d = default_disk();
        // Exact center: tie broken toward angle zero.
        let p = boundary_point_toward(&d, Point2::new(0.5, 0.5));
        assert_relative_eq!(p.x, 0.75, epsilon = 1e-12);
        assert_relative_eq!(p.y, 0.5, epsilon = 1e-12);
        let p = boundary_point_toward(&d, Point2::new(0.6, 0.5));
        assert_relative_eq!(p.x, 0.75, epsilon = 1e-12);
        let s = default_square();
        let p = boundary_point_toward(&s, Point2::new(0.5, 0.6));
        assert_relative_eq!(p.x, 0.5, epsilon = 1e-12);
        assert_relative_eq!(p.y, 0.7, epsilon = 1e-12);
    }

    #[test]
    fn boundary_projection_lands_on_boundary() {
        let shapes = [default_disk(), default_square(), triangle()];
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for shape in &shapes {
            for _ in 0..300 {
                let x = Point2::new(rng.gen_range(-0.2..1.2), rng.gen_range(-0.2..1.2));
                let p = boundary_point_toward(shape, x);
                assert!(
                    signed_distance(shape, p).abs() < 1e-9,
                    "projection off boundary for {x:?}: sd = {}",
                    signed_distance(shape, p)
                );
                // Projection distance matches |signed distance|.
                assert_relative_eq!(
                    x.dist(p),
                    signed_distance(shape, x).abs(),
                    epsilon = 1e-9,
                    max_relative = 1e-9
                );
            }
        }
    }

    #[test]
    fn boundary_geodesic_cases() {
        let d = default_disk();
        let a = Point2::new(0.75, 0.5);
        let b = Point2::new(0.25, 0.5);
        assert_relative_eq!(
            boundary_geodesic_length(&d, a, b).unwrap(),
            std::f64::consts::PI * 0.25,
            epsilon = 1e-12
        );
        assert_relative_eq!(boundary_geodesic_length(&d, a, a).unwrap(), 0.0);
        let s = default_square();
        let len = boundary_geodesic_length(&s, Point2::new(0.7, 0.5), Point2::new(0.3, 0.5))
            .unwrap();
        assert_relative_eq!(len, 0.8, epsilon = 1e-12);
        assert!(boundary_geodesic_length(&d, Point2::new(0.5, 0.5), a).is_err());
    }

    #[test]
    fn boundary_geodesic_metric_axioms() {
        let shapes = [default_disk(), default_square(), triangle()];
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for shape in &shapes {
            let perimeter = shape.perimeter();
            for _ in 0..200 {
                let a = shape.boundary_point_at(rng.gen_range(0.0..perimeter));
                let b = shape.boundary_point_at(rng.gen_range(0.0..perimeter));
                let c = shape.boundary_point_at(rng.gen_range(0.0..perimeter));
                let ab = boundary_geodesic_length(shape, a, b).unwrap();
                let ba = boundary_geodesic_length(shape, b, a).unwrap();
                let bc = boundary_geodesic_length(shape, b, c).unwrap();
                let ac = boundary_geodesic_length(shape, a, c).unwrap();
                assert_relative_eq!(ab, ba, epsilon = 1e-9);
                assert!(ac <= ab + bc + 1e-9, "triangle inequality failed");
                assert!(ab + 1e-9 >= a.dist(b), "boundary path shorter than chord");
            }
        }
    }

    #[test]
    fn boundary_walk_length_matches_geodesic() {
        let shapes = [default_disk(), default_square(), triangle()];
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for shape in &shapes {
            let perimeter = shape.perimeter();
            for _ in 0..100 {
                let a = shape.boundary_point_at(rng.gen_range(0.0..perimeter));
                let b = shape.boundary_point_at(rng.gen_range(0.0..perimeter));
                let walk = boundary_walk(shape, a, b).unwrap();
                let len: f64 = walk.windows(2).map(|w| w[0].dist(w[1])).sum();
                let exact = boundary_geodesic_length(shape, a, b).unwrap();
                // Circumscribed polygonization overshoots by < 1e-3 relative.
                assert!(len <= exact * (1.0 + 1e-3) + 1e-12);
                assert!(len >= exact - 1e-12);
                // No walk point sits inside the open inclusion.
                for &p in &walk {
                    assert!(signed_distance(shape, p) >= -1e-12);
                }
            }
        }
    }

    #[test]
    fn shape_validation() {
        assert!(InclusionShape::disk(Point2::new(0.5, 0.5), 0.5).is_err());
        assert!(InclusionShape::disk(Point2::new(0.9, 0.5), 0.2).is_err());
        assert!(InclusionShape::square(Point2::new(0.5, 0.5), 0.0).is_err());
        // Clockwise triangle rejected.
        assert!(InclusionShape::convex_polygon(vec![
            Point2::new(0.3, 0.3),
            Point2::new(0.45, 0.7),
            Point2::new(0.7, 0.35),
        ])
        .is_err());
        // Non-convex quad rejected.
        assert!(InclusionShape::convex_polygon(vec![
            Point2::new(0.3, 0.3),
            Point2::new(0.7, 0.3),
            Point2::new(0.4, 0.4),
            Point2::new(0.3, 0.7),
        ])
        .is_err());
    }

    #[test]
    fn margin_values() {
        assert_relative_eq!(default_disk().margin(), 0.25);
        assert_relative_eq!(default_square().margin(), 0.3);
    }
}
