//! Polygonal obstacles: boundary sampling into point sets, inflation by the
//! robot radius, and exact collision predicates used for ground-truth
//! adjudication. All types are immutable after construction and queries are
//! pure.

use nalgebra::{Point2, Vector2};
use thiserror::Error;

use crate::gpdf::ObstaclePointSet;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon vertex {0} is not finite")]
    NonFiniteVertex(usize),
    #[error("polygon has a near-zero-length edge at vertex {0}")]
    DegenerateEdge(usize),
    #[error("polygon has near-zero area")]
    DegenerateArea,
    #[error("polygon edges {0} and {1} intersect")]
    SelfIntersecting(usize, usize),
}

/// Disc robot footprint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotShape {
    pub radius: f64,
}

impl Default for RobotShape {
    fn default() -> Self {
        Self { radius: 0.5 }
    }
}

/// Simple polygon with counterclockwise vertices; may be non-convex.
#[derive(Debug, Clone)]
pub struct PolygonObstacle {
    vertices: Vec<Point2<f64>>,
}

const EPS: f64 = 1e-12;
const BOUNDARY_EPS: f64 = 1e-9;
/// Maximum segments used to approximate the inflation arc at one vertex.
const ARC_SEGMENTS: usize = 8;

impl PolygonObstacle {
    /// Validates and normalizes a vertex loop: at least three finite,
    /// pairwise-distinct vertices tracing a simple polygon. Clockwise input
    /// is reversed to counterclockwise.
    pub fn new(vertices: Vec<Point2<f64>>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        for (i, v) in vertices.iter().enumerate() {
            if !v.x.is_finite() || !v.y.is_finite() {
                return Err(GeometryError::NonFiniteVertex(i));
            }
        }
        let n = vertices.len();
        for i in 0..n {
            if nalgebra::distance(&vertices[i], &vertices[(i + 1) % n]) < BOUNDARY_EPS {
                return Err(GeometryError::DegenerateEdge(i));
            }
        }
        let area = signed_area(&vertices);
        if area.abs() < EPS {
            return Err(GeometryError::DegenerateArea);
        }
        let mut vertices = vertices;
        if area < 0.0 {
            vertices.reverse();
        }
        if let Some((i, j)) = first_self_intersection(&vertices) {
            return Err(GeometryError::SelfIntersecting(i, j));
        }
        Ok(Self { vertices })
    }

    fn from_vertices_unchecked(vertices: Vec<Point2<f64>>) -> Self {
        Self { vertices }
    }

    pub fn vertices(&self) -> &[Point2<f64>] {
        &self.vertices
    }

    /// Edges as (start, end) pairs in vertex order.
    pub fn edges(&self) -> impl Iterator<Item = (Point2<f64>, Point2<f64>)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Even-odd containment; boundary points count as inside.
    pub fn contains(&self, p: Point2<f64>) -> bool {
        if self.boundary_distance(p) < BOUNDARY_EPS {
            return true;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Unsigned distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Point2<f64>) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Samples the boundary at spacing at most `resolution`, walking edges in
    /// order and emitting each vertex exactly once.
    pub fn sample_boundary(&self, resolution: f64) -> ObstaclePointSet {
        assert!(resolution > 0.0, "resolution must be positive");
        let mut points = Vec::new();
        for (a, b) in self.edges() {
            // the end vertex belongs to the next edge
            let len = nalgebra::distance(&a, &b);
            let n = ((len / resolution) - 1e-9).ceil().max(1.0) as usize;
            for k in 0..n {
                let t = k as f64 / n as f64;
                points.push(a + (b - a) * t);
            }
        }
        ObstaclePointSet::from_points(points)
    }

    /// Minkowski sum with a disc of the given radius: edges shift outward,
    /// convex vertices grow arcs of at most [`ARC_SEGMENTS`] segments, reflex
    /// vertices take the miter intersection of the adjacent offset edges.
    ///
    /// Valid while the radius stays below the polygon's clearance scale (no
    /// two boundary sections closer than twice the radius across free
    /// space); the scenario loader re-validates inflated polygons.
    pub fn inflate(&self, radius: f64) -> PolygonObstacle {
        assert!(radius >= 0.0, "radius must be nonnegative");
        if radius == 0.0 {
            return self.clone();
        }
        let n = self.vertices.len();
        let mut out = Vec::new();
        for i in 0..n {
            let prev = self.vertices[(i + n - 1) % n];
            let v = self.vertices[i];
            let next = self.vertices[(i + 1) % n];
            let d_in = (v - prev).normalize();
            let d_out = (next - v).normalize();
            // outward normal is to the right of travel for a CCW loop
            let n_in = Vector2::new(d_in.y, -d_in.x);
            let n_out = Vector2::new(d_out.y, -d_out.x);
            let turn = d_in.x * d_out.y - d_in.y * d_out.x;
            if turn > EPS {
                // convex vertex: arc from n_in to n_out around v
                let a0 = n_in.y.atan2(n_in.x);
                let mut sweep = n_out.y.atan2(n_out.x) - a0;
                if sweep < 0.0 {
                    sweep += std::f64::consts::TAU;
                }
                let segs = ((sweep / (std::f64::consts::PI / ARC_SEGMENTS as f64)).ceil() as usize)
                    .clamp(1, ARC_SEGMENTS);
                for s in 0..=segs {
                    let a = a0 + sweep * s as f64 / segs as f64;
                    out.push(v + radius * Vector2::new(a.cos(), a.sin()));
                }
            } else if turn < -EPS {
                // reflex vertex: intersect the two offset edge lines
                let p1 = v + radius * n_in;
                let p2 = v + radius * n_out;
                let denom = d_in.x * d_out.y - d_in.y * d_out.x;
                let rhs = p2 - p1;
                let t = (rhs.x * d_out.y - rhs.y * d_out.x) / denom;
                out.push(p1 + t * d_in);
            } else {
                out.push(v + radius * n_out);
            }
        }
        PolygonObstacle::from_vertices_unchecked(out)
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.vertices)
    }
}

fn signed_area(vertices: &[Point2<f64>]) -> f64 {
    let n = vertices.len();
    let mut twice = 0.0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    twice / 2.0
}

fn first_self_intersection(vertices: &[Point2<f64>]) -> Option<(usize, usize)> {
    let n = vertices.len();
    for i in 0..n {
        for j in (i + 1)..n {
            // adjacent edges share a vertex and may touch there
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (a1, a2) = (vertices[i], vertices[(i + 1) % n]);
            let (b1, b2) = (vertices[j], vertices[(j + 1) % n]);
            if segments_intersect(a1, a2, b1, b2) {
                return Some((i, j));
            }
        }
    }
    None
}

fn orient(a: Point2<f64>, b: Point2<f64>, c: Point2<f64>) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Point2<f64>, b: Point2<f64>, p: Point2<f64>) -> bool {
    p.x >= a.x.min(b.x) - EPS
        && p.x <= a.x.max(b.x) + EPS
        && p.y >= a.y.min(b.y) - EPS
        && p.y <= a.y.max(b.y) + EPS
}

/// Closed-segment intersection test; touching counts.
fn segments_intersect(a1: Point2<f64>, a2: Point2<f64>, b1: Point2<f64>, b2: Point2<f64>) -> bool {
    let d1 = orient(b1, b2, a1);
    let d2 = orient(b1, b2, a2);
    let d3 = orient(a1, a2, b1);
    let d4 = orient(a1, a2, b2);
    if ((d1 > EPS && d2 < -EPS) || (d1 < -EPS && d2 > EPS))
        && ((d3 > EPS && d4 < -EPS) || (d3 < -EPS && d4 > EPS))
    {
        return true;
    }
    (d1.abs() <= EPS && on_segment(b1, b2, a1))
        || (d2.abs() <= EPS && on_segment(b1, b2, a2))
        || (d3.abs() <= EPS && on_segment(a1, a2, b1))
        || (d4.abs() <= EPS && on_segment(a1, a2, b2))
}

/// Distance from a point to a closed segment.
pub fn point_segment_distance(p: Point2<f64>, a: Point2<f64>, b: Point2<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return nalgebra::distance(&p, &a);
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    nalgebra::distance(&p, &(a + ab * t))
}

/// Samples a standalone segment including both endpoints.
pub fn sample_segment(a: Point2<f64>, b: Point2<f64>, resolution: f64) -> Vec<Point2<f64>> {
    assert!(resolution > 0.0);
    let len = nalgebra::distance(&a, &b);
    let n = ((len / resolution) - 1e-9).ceil().max(1.0) as usize;
    (0..=n).map(|k| a + (b - a) * (k as f64 / n as f64)).collect()
}

/// True iff `p` lies inside or on the boundary of any obstacle.
pub fn point_in_collision(p: Point2<f64>, obstacles: &[PolygonObstacle]) -> bool {
    obstacles.iter().any(|o| o.contains(p))
}

/// Distance to the nearest obstacle boundary, negated when `p` is inside an
/// obstacle; infinite when there are none.
pub fn signed_clearance(p: Point2<f64>, obstacles: &[PolygonObstacle]) -> f64 {
    let mut best = f64::INFINITY;
    for o in obstacles {
        let d = o.boundary_distance(p);
        let d = if o.contains(p) { -d } else { d };
        if d < best {
            best = d;
        }
    }
    best
}

/// Boundary samples of every obstacle merged into one point set, in obstacle
/// then arc-length order.
pub fn sample_boundaries(obstacles: &[PolygonObstacle], resolution: f64) -> ObstaclePointSet {
    let mut points = Vec::new();
    for o in obstacles {
        points.extend_from_slice(o.sample_boundary(resolution).points());
    }
    ObstaclePointSet::from_points(points)
}
