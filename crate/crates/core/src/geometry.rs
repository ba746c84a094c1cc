//! Car footprint and obstacle collision tests.
//!
//! Obstacles are unions of convex polygons. Overlap is decided with the
//! separating-axis test on closed sets, so shapes that merely touch collide.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Bounds, Config, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (p, q) = (pts[i], pts[(i + 1) % n]);
            p.x * q.y - q.x * p.y
        })
        .sum::<f64>()
        * 0.5
}

/// Car geometry and steering limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarParams {
    /// Half the rear axle length (`R`); the footprint is `2R` across.
    pub half_width: f64,
    /// Distance from the rear axle center to the center of mass (`d`);
    /// the footprint is `2d` long.
    pub axle_offset: f64,
    /// Maximum angular velocity (`W`).
    pub max_turn_rate: f64,
}

impl CarParams {
    pub fn new(half_width: f64, axle_offset: f64, max_turn_rate: f64) -> Result<Self> {
        let p = Self {
            half_width,
            axle_offset,
            max_turn_rate,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0 && self.axle_offset >= 0.0 && self.max_turn_rate > 0.0)
            || !(self.half_width.is_finite()
                && self.axle_offset.is_finite()
                && self.max_turn_rate.is_finite())
        {
            return Err(Error::Input(format!(
                "car parameters need R > 0, d >= 0, W > 0; got R={}, d={}, W={}",
                self.half_width, self.axle_offset, self.max_turn_rate
            )));
        }
        Ok(())
    }
}

/// Convex polygon with counterclockwise vertices and positive area.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
    min: Point,
    max: Point,
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Input(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices
            .iter()
            .any(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(Error::Input("polygon has non-finite coordinates".into()));
        }
        let area = signed_area(&vertices);
        let scale = vertices
            .iter()
            .map(|p| p.x.abs().max(p.y.abs()))
            .fold(1.0, f64::max);
        if area.abs() <= 1e-14 * scale * scale {
            return Err(Error::Input("polygon has zero area".into()));
        }
        if area < 0.0 {
            return Err(Error::Input("polygon is clockwise".into()));
        }
        let n = vertices.len();
        for i in 0..n {
            if cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n])
                < -1e-12 * scale * scale
            {
                return Err(Error::Input("polygon is not convex".into()));
            }
        }
        let min = vertices
            .iter()
            .fold(Point::new(f64::MAX, f64::MAX), |m, p| {
                Point::new(m.x.min(p.x), m.y.min(p.y))
            });
        let max = vertices
            .iter()
            .fold(Point::new(f64::MIN, f64::MIN), |m, p| {
                Point::new(m.x.max(p.x), m.y.max(p.y))
            });
        Ok(Self { vertices, min, max })
    }

    /// Like [`ConvexPolygon::new`] but accepts clockwise input, reversing it.
    /// The flag reports whether a reversal happened.
    pub fn with_any_orientation(mut vertices: Vec<Point>) -> Result<(Self, bool)> {
        let reversed = vertices.len() >= 3 && signed_area(&vertices) < 0.0;
        if reversed {
            vertices.reverse();
        }
        Ok((Self::new(vertices)?, reversed))
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::new(vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObstacleSet {
    pub polygons: Vec<ConvexPolygon>,
}

impl ObstacleSet {
    pub fn new(polygons: Vec<ConvexPolygon>) -> Self {
        Self { polygons }
    }

    pub fn is_empty(&self) -> bool {
        self.polygons.is_empty()
    }
}

/// The rectangle occupied by the car, corners counterclockwise starting at
/// rear-right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Footprint {
    pub corners: [Point; 4],
}

impl Footprint {
    fn bbox(&self) -> (Point, Point) {
        let mut min = self.corners[0];
        let mut max = self.corners[0];
        for c in &self.corners[1..] {
            min = Point::new(min.x.min(c.x), min.y.min(c.y));
            max = Point::new(max.x.max(c.x), max.y.max(c.y));
        }
        (min, max)
    }
}

/// Rectangle `2d × 2R` centered at `(x, y)` and rotated by `θ`.
pub fn footprint(params: &CarParams, q: Config) -> Footprint {
    let (s, c) = q.theta.sin_cos();
    let (d, r) = (params.axle_offset, params.half_width);
    let at = |lx: f64, ly: f64| Point::new(q.x + c * lx - s * ly, q.y + s * lx + c * ly);
    Footprint {
        corners: [at(-d, -r), at(d, -r), at(d, r), at(-d, r)],
    }
}

fn project(pts: &[Point], ax: f64, ay: f64) -> (f64, f64) {
    pts.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| {
        let v = p.x * ax + p.y * ay;
        (lo.min(v), hi.max(v))
    })
}

/// Closed-set separating-axis test between two convex vertex loops.
pub fn convex_sets_overlap(a: &[Point], b: &[Point]) -> bool {
    for pts in [a, b] {
        let n = pts.len();
        for i in 0..n {
            let (p, q) = (pts[i], pts[(i + 1) % n]);
            // edge normal; its orientation does not matter for interval tests
            let (ax, ay) = (q.y - p.y, p.x - q.x);
            if ax == 0.0 && ay == 0.0 {
                continue;
            }
            let (lo_a, hi_a) = project(a, ax, ay);
            let (lo_b, hi_b) = project(b, ax, ay);
            if hi_a < lo_b || hi_b < lo_a {
                return false;
            }
        }
    }
    true
}

pub fn convex_overlap(rect: &Footprint, poly: &ConvexPolygon) -> bool {
    let (min, max) = rect.bbox();
    if max.x < poly.min.x || poly.max.x < min.x || max.y < poly.min.y || poly.max.y < min.y {
        return false;
    }
    convex_sets_overlap(&rect.corners, &poly.vertices)
}

pub fn is_admissible(params: &CarParams, obstacles: &ObstacleSet, q: Config) -> bool {
    let fp = footprint(params, q);
    !obstacles.polygons.iter().any(|p| convex_overlap(&fp, p))
}

/// Per-node inadmissibility flags for a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityMask {
    spec: GridSpec,
    blocked: Vec<bool>,
}

impl AdmissibilityMask {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    #[inline]
    pub fn is_blocked(&self, i: usize, j: usize, k: usize) -> bool {
        self.blocked[self.spec.index(i, j, k)]
    }

    pub(crate) fn blocked(&self) -> &[bool] {
        &self.blocked
    }

    pub fn blocked_fraction(&self) -> f64 {
        self.blocked.iter().filter(|&&b| b).count() as f64 / self.blocked.len() as f64
    }
}

pub fn build_mask(
    params: &CarParams,
    obstacles: &ObstacleSet,
    spec: &GridSpec,
) -> AdmissibilityMask {
    build_mask_with(params, obstacles, spec, false)
}

/// With `strict_containment`, nodes whose footprint leaves the domain are
/// also blocked. Off by default: the walls only constrain the reference
/// point, through the never-updated boundary nodes.
pub fn build_mask_with(
    params: &CarParams,
    obstacles: &ObstacleSet,
    spec: &GridSpec,
    strict_containment: bool,
) -> AdmissibilityMask {
    let bounds = spec.bounds();
    let blocked = (0..spec.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j, k) = spec.unindex(idx);
            let q = spec.node_config(i, j, k);
            (strict_containment && !footprint_inside(params, q, &bounds))
                || !is_admissible(params, obstacles, q)
        })
        .collect();
    AdmissibilityMask {
        spec: *spec,
        blocked,
    }
}

fn footprint_inside(params: &CarParams, q: Config, bounds: &Bounds) -> bool {
    footprint(params, q)
        .corners
        .iter()
        .all(|c| bounds.contains(c.x, c.y))
}
