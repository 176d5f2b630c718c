//! Discrete geodesic distances on a weighted grid graph.
//!
//! The solver always works in unfolded coordinates (unit period). A query in
//! folded coordinates is rescaled by the period, solved on a grid window
//! around the unfolded endpoints, and scaled back.
//!
//! Edge costs use a trapezoidal endpoint average with a midpoint guard: the
//! multiplier is max((wa+wb)/2, (wa+wb+2wm)/4), which is conservative against
//! inclusion slivers thinner than the spacing. Hard obstacles (infinite
//! exponent) remove nodes exactly and block every edge with a positive-length
//! obstacle crossing, checked analytically near the obstacle boundary.

use crate::coefficient::MetricParams;
use crate::curves::{crossing_intervals, segment_cost_unfolded, Path};
use crate::error::{Error, Result};
use crate::geometry::{periodic_contains, periodic_signed_distance, InclusionShape, Point2};
use crate::tolerances::MAX_CELLS_PER_SIDE;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

/// Neighbor stencil of the grid graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// Axis and diagonal moves.
    N8,
    /// Axis, diagonal and knight moves; worst-case anisotropy ~2.8% before
    /// shortening.
    N16,
}

const OFFSETS_N8: [(i32, i32); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

const OFFSETS_N16: [(i32, i32); 16] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
    (1, 2),
    (1, -2),
    (-1, 2),
    (-1, -2),
    (2, 1),
    (2, -1),
    (-2, 1),
    (-2, -1),
];

impl Stencil {
    pub fn offsets(self) -> &'static [(i32, i32)] {
        match self {
            Stencil::N8 => &OFFSETS_N8,
            Stencil::N16 => &OFFSETS_N16,
        }
    }
}

/// Axis-aligned rectangle in unfolded coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Point2,
    pub max: Point2,
}

impl Rect {
    pub fn bounding(points: &[Point2]) -> Rect {
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Rect { min, max }
    }

    pub fn padded(self, pad: f64) -> Rect {
        Rect {
            min: self.min - Point2::new(pad, pad),
            max: self.max + Point2::new(pad, pad),
        }
    }

    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        p.x >= self.min.x - tol
            && p.x <= self.max.x + tol
            && p.y >= self.min.y - tol
            && p.y <= self.max.y + tol
    }
}

/// Discretization of a rectangular window: the corners are snapped outward to
/// multiples of the spacing 1 / nodes_per_cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    window: Rect,
    nodes_per_cell: u32,
    stencil: Stencil,
}

impl GridSpec {
    pub fn new(window: Rect, nodes_per_cell: u32, stencil: Stencil) -> Result<Self> {
        if nodes_per_cell < 16 {
            return Err(Error::InvalidParams(format!(
                "nodes_per_cell must be at least 16, got {nodes_per_cell}"
            )));
        }
        let span = (window.max.x - window.min.x).max(window.max.y - window.min.y);
        if !span.is_finite() || span > MAX_CELLS_PER_SIDE {
            return Err(Error::ResourceLimit {
                cells: span,
                cap: MAX_CELLS_PER_SIDE,
            });
        }
        let n = nodes_per_cell as f64;
        let h = 1.0 / n;
        let ix0 = (window.min.x * n + 1e-9).floor();
        let iy0 = (window.min.y * n + 1e-9).floor();
        let ix1 = (window.max.x * n - 1e-9).ceil();
        let iy1 = (window.max.y * n - 1e-9).ceil();
        let window = Rect {
            min: Point2::new(ix0 * h, iy0 * h),
            max: Point2::new(ix1 * h, iy1 * h),
        };
        Ok(GridSpec {
            window,
            nodes_per_cell,
            stencil,
        })
    }

    /// Window around a point set with the given padding (at least one unit
    /// cell on each side).
    pub fn around(
        points: &[Point2],
        padding_cells: f64,
        nodes_per_cell: u32,
        stencil: Stencil,
    ) -> Result<Self> {
        let pad = padding_cells.max(1.0);
        Self::new(Rect::bounding(points).padded(pad), nodes_per_cell, stencil)
    }

    pub fn window(&self) -> Rect {
        self.window
    }

    pub fn nodes_per_cell(&self) -> u32 {
        self.nodes_per_cell
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.nodes_per_cell as f64
    }
}

/// Grid discretization knobs without the window, which query operations
/// derive from their endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub nodes_per_cell: u32,
    pub stencil: Stencil,
    pub padding_cells: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            nodes_per_cell: 64,
            stencil: Stencil::N16,
            padding_cells: 1.0,
        }
    }
}

impl SolverSettings {
    /// Reduced resolution for quick checks.
    pub fn smoke() -> Self {
        SolverSettings {
            nodes_per_cell: 32,
            ..Default::default()
        }
    }
}

/// Node weights sampled on the grid, with inclusion membership stored at half
/// spacing so edge midpoints are exact lookups.
#[derive(Debug, Clone)]
pub struct GridField {
    spec: GridSpec,
    shape: InclusionShape,
    params: MetricParams,
    nx: usize,
    ny: usize,
    /// Inclusion membership on the half-spacing grid (2nx-1) x (2ny-1).
    half_incl: Vec<bool>,
    /// Edge multiplier by (a, b, midpoint) membership bits.
    mult_table: [f64; 8],
    /// Lower bound on the distance to the obstacle phase, per node; present
    /// only for hard obstacles.
    clearance: Option<Vec<f32>>,
}

/// Evaluates the coefficient at every node and half-spacing position.
pub fn build_field(shape: &InclusionShape, params: &MetricParams, spec: &GridSpec) -> GridField {
    let h = spec.spacing();
    let w = spec.window();
    let nx = ((w.max.x - w.min.x) / h).round() as usize + 1;
    let ny = ((w.max.y - w.min.y) / h).round() as usize + 1;
    let hx = 2 * nx - 1;
    let hy = 2 * ny - 1;
    let half = h * 0.5;
    let mut half_incl = vec![false; hx * hy];
    for jh in 0..hy {
        let y = w.min.y + jh as f64 * half;
        let row = jh * hx;
        for ih in 0..hx {
            let x = w.min.x + ih as f64 * half;
            half_incl[row + ih] = periodic_contains(shape, Point2::new(x, y));
        }
    }
    let wg = params.inclusion_weight();
    let mut mult_table = [1.0f64; 8];
    for (bits, slot) in mult_table.iter_mut().enumerate() {
        let wa = if bits & 1 != 0 { wg } else { 1.0 };
        let wb = if bits & 2 != 0 { wg } else { 1.0 };
        let wm = if bits & 4 != 0 { wg } else { 1.0 };
        let trapezoid = 0.5 * (wa + wb);
        let guarded = 0.25 * (wa + wb + 2.0 * wm);
        *slot = trapezoid.max(guarded);
    }
    let clearance = if wg.is_infinite() {
        let margin = shape.margin();
        let mut c = vec![0.0f32; nx * ny];
        for j in 0..ny {
            let y = w.min.y + j as f64 * h;
            for i in 0..nx {
                let x = w.min.x + i as f64 * h;
                let sd = periodic_signed_distance(shape, Point2::new(x, y));
                c[j * nx + i] = sd.min(margin) as f32;
            }
        }
        Some(c)
    } else {
        None
    };
    GridField {
        spec: spec.clone(),
        shape: shape.clone(),
        params: *params,
        nx,
        ny,
        half_incl,
        mult_table,
        clearance,
    }
}

impl GridField {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn shape(&self) -> &InclusionShape {
        &self.shape
    }

    pub fn params(&self) -> &MetricParams {
        &self.params
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn node_pos(&self, u: usize) -> Point2 {
        let h = self.spec.spacing();
        let w = self.spec.window();
        let i = u % self.nx;
        let j = u / self.nx;
        Point2::new(w.min.x + i as f64 * h, w.min.y + j as f64 * h)
    }

    #[inline]
    fn node_in_inclusion(&self, i: usize, j: usize) -> bool {
        let hx = 2 * self.nx - 1;
        self.half_incl[2 * j * hx + 2 * i]
    }

    /// Coefficient value at the node.
    pub fn node_weight(&self, i: usize, j: usize) -> f64 {
        if self.node_in_inclusion(i, j) {
            self.params.inclusion_weight()
        } else {
            1.0
        }
    }

    /// True where the node weight is infinite.
    pub fn is_obstacle(&self, i: usize, j: usize) -> bool {
        self.params.p.is_infinite() && self.node_in_inclusion(i, j)
    }

    pub fn obstacle_count(&self) -> usize {
        if !self.params.p.is_infinite() {
            return 0;
        }
        (0..self.ny)
            .flat_map(|j| (0..self.nx).map(move |i| (i, j)))
            .filter(|&(i, j)| self.node_in_inclusion(i, j))
            .count()
    }

    /// Visits the stencil neighbors of `u` with their edge costs. Blocked
    /// edges (hard obstacles) are skipped.
    #[inline]
    pub fn for_each_neighbor(&self, u: usize, mut visit: impl FnMut(usize, f64)) {
        let nx = self.nx;
        let ny = self.ny;
        let hx = 2 * nx - 1;
        let i = (u % nx) as i64;
        let j = (u / nx) as i64;
        let h = self.spec.spacing();
        let hard = self.params.p.is_infinite();
        let a_bit = self.half_incl[(2 * j as usize) * hx + 2 * i as usize] as usize;
        if hard && a_bit != 0 {
            return;
        }
        for &(di, dj) in self.spec.stencil().offsets() {
            let i2 = i + di as i64;
            let j2 = j + dj as i64;
            if i2 < 0 || j2 < 0 || i2 >= nx as i64 || j2 >= ny as i64 {
                continue;
            }
            let v = (j2 as usize) * nx + i2 as usize;
            let b_bit = self.half_incl[(2 * j2 as usize) * hx + 2 * i2 as usize] as usize;
            let m_bit = self.half_incl
                [((2 * j + dj as i64) as usize) * hx + (2 * i + di as i64) as usize]
                as usize;
            let len = h * ((di * di + dj * dj) as f64).sqrt();
            if hard {
                if b_bit != 0 || m_bit != 0 {
                    continue;
                }
                // Endpoints and midpoint are clear; rule out a sliver
                // crossing analytically when the clearance cannot.
                let clear = self.clearance.as_ref().unwrap()[u] as f64;
                if clear <= len && self.segment_blocked(self.node_pos(u), self.node_pos(v)) {
                    continue;
                }
                visit(v, len);
            } else {
                let bits = a_bit | (b_bit << 1) | (m_bit << 2);
                visit(v, len * self.mult_table[bits]);
            }
        }
    }

    /// Allocating neighbor list; test and oracle use.
    pub fn neighbors(&self, u: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        self.for_each_neighbor(u, |v, c| out.push((v, c)));
        out
    }

    fn segment_blocked(&self, a: Point2, b: Point2) -> bool {
        !crossing_intervals(&self.shape, a, b).is_empty()
    }

    /// Exact cost of a straight segment in field (unfolded) coordinates.
    fn exact_cost(&self, a: Point2, b: Point2) -> f64 {
        segment_cost_unfolded(&self.shape, &self.params, a, b)
    }

    /// Indices of the grid-cell corners enclosing `p`.
    fn cell_corners(&self, p: Point2) -> [usize; 4] {
        let h = self.spec.spacing();
        let w = self.spec.window();
        let fi = ((p.x - w.min.x) / h).floor() as i64;
        let fj = ((p.y - w.min.y) / h).floor() as i64;
        let i = fi.clamp(0, self.nx as i64 - 2) as usize;
        let j = fj.clamp(0, self.ny as i64 - 2) as usize;
        [
            j * self.nx + i,
            j * self.nx + i + 1,
            (j + 1) * self.nx + i,
            (j + 1) * self.nx + i + 1,
        ]
    }
}

/// Solve statistics.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolveStats {
    pub nodes_expanded: u64,
    pub runtime_ms: f64,
}

/// A distance value with the geodesic polyline realizing it.
#[derive(Debug, Clone)]
pub struct DistanceResult {
    pub value: f64,
    pub path: Path,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    dist: f64,
    node: u32,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.dist == other.dist && self.node == other.node
    }
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: the max-heap pops the smallest (distance, node) pair.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const NO_PRED: u32 = u32::MAX;

/// Full single-source distance sweep over the grid graph; oracle and test
/// use. Unreachable nodes keep infinite distance.
pub fn graph_distances_from(field: &GridField, source: usize) -> Vec<f64> {
    let n = field.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapEntry {
        dist: 0.0,
        node: source as u32,
    });
    while let Some(HeapEntry { dist: d, node }) = heap.pop() {
        let u = node as usize;
        if d > dist[u] {
            continue;
        }
        field.for_each_neighbor(u, |v, cost| {
            let nd = d + cost;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(HeapEntry {
                    dist: nd,
                    node: v as u32,
                });
            }
        });
    }
    dist
}

/// Repeatedly replaces vertex triples (a, b, c) by the segment (a, c) when
/// that does not increase the exact length functional. Endpoints are kept.
pub fn local_shorten(field: &GridField, path: &Path, rounds: usize) -> Path {
    let mut pts: Vec<Point2> = path.vertices().to_vec();
    for _ in 0..rounds {
        if pts.len() < 3 {
            break;
        }
        let mut out: Vec<Point2> = Vec::with_capacity(pts.len());
        out.push(pts[0]);
        let mut changed = false;
        for i in 1..pts.len() - 1 {
            let a = *out.last().unwrap();
            let b = pts[i];
            let c = pts[i + 1];
            let direct = field.exact_cost(a, c);
            let via = field.exact_cost(a, b) + field.exact_cost(b, c);
            if direct <= via * (1.0 + 1e-12) {
                changed = true;
            } else {
                out.push(b);
            }
        }
        out.push(*pts.last().unwrap());
        pts = out;
        if !changed {
            break;
        }
    }
    Path::new(pts).expect("shortened path keeps its endpoints")
}

/// Discrete geodesic between two points of the field window (unfolded
/// coordinates). Endpoints need not be grid nodes: they are joined to their
/// cell corners by exact-cost stubs. The reported value is the exact length
/// functional of the reported (shortened) polyline.
pub fn shortest_path(field: &GridField, s: Point2, t: Point2) -> Result<DistanceResult> {
    let started = Instant::now();
    let window = field.spec().window();
    for &(p, name) in [(s, "source"), (t, "target")].iter() {
        if !window.contains(p, 1e-9) {
            let _ = name;
            return Err(Error::OutsideWindow { x: p.x, y: p.y });
        }
    }
    if field.params().p.is_infinite() {
        for &p in [s, t].iter() {
            if periodic_contains(field.shape(), p) {
                return Err(Error::EndpointInObstacle { x: p.x, y: p.y });
            }
        }
    }
    if s == t {
        return Ok(DistanceResult {
            value: 0.0,
            path: Path::segment(s, t),
            stats: SolveStats {
                nodes_expanded: 0,
                runtime_ms: elapsed_ms(started),
            },
        });
    }

    let direct_cost = field.exact_cost(s, t);

    // Source stubs: exact segment costs to the enclosing cell corners.
    let n = field.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![NO_PRED; n];
    let mut heap = BinaryHeap::new();
    for &c in field.cell_corners(s).iter() {
        let (i, j) = (c % field.nx, c / field.nx);
        if field.is_obstacle(i, j) {
            continue;
        }
        let cost = field.exact_cost(s, field.node_pos(c));
        if cost.is_finite() && cost < dist[c] {
            dist[c] = cost;
            heap.push(HeapEntry {
                dist: cost,
                node: c as u32,
            });
        }
    }

    // Target stubs, deduplicated (corners repeat when t sits on a node).
    let mut target_stubs: Vec<(usize, f64)> = Vec::with_capacity(4);
    for &c in field.cell_corners(t).iter() {
        let (i, j) = (c % field.nx, c / field.nx);
        if field.is_obstacle(i, j) {
            continue;
        }
        let cost = field.exact_cost(field.node_pos(c), t);
        if cost.is_finite() && !target_stubs.iter().any(|&(u, _)| u == c) {
            target_stubs.push((c, cost));
        }
    }

    let mut best_total = f64::INFINITY;
    let mut best_corner: Option<usize> = None;
    let mut expanded: u64 = 0;
    while let Some(HeapEntry { dist: d, node }) = heap.pop() {
        let u = node as usize;
        if d > dist[u] {
            continue;
        }
        if d >= best_total {
            break;
        }
        expanded += 1;
        for &(c, stub) in &target_stubs {
            if c == u && d + stub < best_total {
                best_total = d + stub;
                best_corner = Some(u);
            }
        }
        field.for_each_neighbor(u, |v, cost| {
            let nd = d + cost;
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = u as u32;
                heap.push(HeapEntry {
                    dist: nd,
                    node: v as u32,
                });
            }
        });
    }

    let grid_route = best_corner.map(|corner| {
        let mut chain = vec![corner];
        let mut u = corner;
        while pred[u] != NO_PRED {
            u = pred[u] as usize;
            chain.push(u);
        }
        chain.reverse();
        let mut vertices = Vec::with_capacity(chain.len() + 2);
        vertices.push(s);
        vertices.extend(chain.into_iter().map(|c| field.node_pos(c)));
        vertices.push(t);
        vertices
    });

    let (value, path) = match grid_route {
        Some(vertices) => {
            let raw = Path::new(vertices).expect("grid route has distinct endpoints");
            let rounds = raw.vertices().len();
            let shortened = local_shorten(field, &raw, rounds);
            let exact = path_exact_cost(field, &shortened);
            if direct_cost < exact {
                (direct_cost, Path::segment(s, t))
            } else {
                (exact, shortened)
            }
        }
        None => {
            if direct_cost.is_finite() {
                (direct_cost, Path::segment(s, t))
            } else {
                return Err(Error::Disconnected);
            }
        }
    };
    if !value.is_finite() {
        return Err(Error::Disconnected);
    }

    Ok(DistanceResult {
        value,
        path,
        stats: SolveStats {
            nodes_expanded: expanded,
            runtime_ms: elapsed_ms(started),
        },
    })
}

fn path_exact_cost(field: &GridField, path: &Path) -> f64 {
    path.vertices()
        .windows(2)
        .map(|w| field.exact_cost(w[0], w[1]))
        .sum()
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Folded-coordinate distance: unfolds the endpoints by the period, solves on
/// a window around them, and scales the value and the polyline back.
pub fn distance_folded(
    shape: &InclusionShape,
    params: &MetricParams,
    xi1: Point2,
    xi2: Point2,
    settings: &SolverSettings,
) -> Result<DistanceResult> {
    let eps = params.epsilon;
    let inv = 1.0 / eps;
    let w1 = xi1 * inv;
    let w2 = xi2 * inv;
    let spec = GridSpec::around(
        &[w1, w2],
        settings.padding_cells,
        settings.nodes_per_cell,
        settings.stencil,
    )?;
    let field = build_field(shape, params, &spec);
    let unfolded = shortest_path(&field, w1, w2)?;
    Ok(DistanceResult {
        value: unfolded.value * eps,
        path: unfolded.path.scaled(eps),
        stats: unfolded.stats,
    })
}
