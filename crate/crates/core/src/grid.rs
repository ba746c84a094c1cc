//! Uniform discretization of the configuration space Ω × [0, 2π).
//!
//! The spatial axes carry `I + 1` and `J + 1` nodes including both walls. The
//! heading axis carries `K` nodes over `[0, 2π)`; node `K` is the same node as
//! `0`, so all heading index arithmetic is taken modulo `K`.
//!
//! Node `(i, j, k)` is stored at flat offset `(i * (J + 1) + j) * K + k`
//! (heading innermost).

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Stand-in for +∞ on blocked or unreached nodes. Finite so the update
/// formula never produces NaN.
pub const INF: f64 = 1e10;

/// True when `value` should be read as the [`INF`] sentinel.
#[inline]
pub fn is_inf(value: f64) -> bool {
    value >= 0.5 * INF
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Signed difference `a - b` wrapped into `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = normalize_angle(a - b);
    if d > std::f64::consts::PI {
        d - TAU
    } else {
        d
    }
}

/// A car configuration: reference point position and heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    pub x: f64,
    pub y: f64,
    /// Always in `[0, 2π)`.
    pub theta: f64,
}

impl Config {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }
}

/// Rectangular spatial domain `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let tol = 1e-12
            * (self.x_max - self.x_min)
                .abs()
                .max(self.y_max - self.y_min)
                .max(1.0);
        x >= self.x_min - tol
            && x <= self.x_max + tol
            && y >= self.y_min - tol
            && y <= self.y_max + tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    bounds: Bounds,
    ni: usize,
    nj: usize,
    nk: usize,
    dx: f64,
    dy: f64,
    dtheta: f64,
}

impl GridSpec {
    /// `ni`, `nj` are spatial cell counts, `nk` the number of heading nodes.
    pub fn new(bounds: Bounds, ni: usize, nj: usize, nk: usize) -> Result<Self> {
        if ni < 4 || nj < 4 || nk < 4 {
            return Err(Error::Grid(format!(
                "cell counts must be at least 4, got {ni}x{nj}x{nk}"
            )));
        }
        let dx = (bounds.x_max - bounds.x_min) / ni as f64;
        let dy = (bounds.y_max - bounds.y_min) / nj as f64;
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(Error::Grid(format!("degenerate domain {bounds:?}")));
        }
        Ok(Self {
            bounds,
            ni,
            nj,
            nk,
            dx,
            dy,
            dtheta: TAU / nk as f64,
        })
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }
    /// Spatial cell count along x (`I`).
    pub fn ni(&self) -> usize {
        self.ni
    }
    /// Spatial cell count along y (`J`).
    pub fn nj(&self) -> usize {
        self.nj
    }
    /// Heading node count (`K`).
    pub fn nk(&self) -> usize {
        self.nk
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn dy(&self) -> f64 {
        self.dy
    }
    pub fn dtheta(&self) -> f64 {
        self.dtheta
    }

    /// Total node count `(I + 1)(J + 1)K`.
    pub fn len(&self) -> usize {
        (self.ni + 1) * (self.nj + 1) * self.nk
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn stride_i(&self) -> usize {
        (self.nj + 1) * self.nk
    }

    #[inline]
    pub fn stride_j(&self) -> usize {
        self.nk
    }

    /// Flat offset of node `(i, j, k)`; indices are not checked.
    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * (self.nj + 1) + j) * self.nk + k
    }

    /// Inverse of [`GridSpec::index`].
    pub fn unindex(&self, idx: usize) -> (usize, usize, usize) {
        let k = idx % self.nk;
        let ij = idx / self.nk;
        (ij / (self.nj + 1), ij % (self.nj + 1), k)
    }

    pub fn is_spatial_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.ni || j == self.nj
    }

    pub fn node_to_config(&self, i: usize, j: usize, k: usize) -> Result<Config> {
        if i > self.ni || j > self.nj || k >= self.nk {
            return Err(Error::Index {
                i,
                j,
                k,
                ni: self.ni,
                nj: self.nj,
                nk: self.nk,
            });
        }
        Ok(self.node_config(i, j, k))
    }

    #[inline]
    pub(crate) fn node_config(&self, i: usize, j: usize, k: usize) -> Config {
        Config {
            x: self.bounds.x_min + i as f64 * self.dx,
            y: self.bounds.y_min + j as f64 * self.dy,
            theta: k as f64 * self.dtheta,
        }
    }

    /// Closest node in the per-axis (max-norm) sense, heading distance
    /// measured periodically. Exact half-cell ties resolve to the lower index.
    pub fn nearest_node(&self, q: Config) -> Result<(usize, usize, usize)> {
        if !self.bounds.contains(q.x, q.y) {
            return Err(Error::Domain { x: q.x, y: q.y });
        }
        let i = round_half_down((q.x - self.bounds.x_min) / self.dx).min(self.ni);
        let j = round_half_down((q.y - self.bounds.y_min) / self.dy).min(self.nj);
        let k = round_half_down(normalize_angle(q.theta) / self.dtheta) % self.nk;
        Ok((i, j, k))
    }

    /// Max-norm distance from `q` to its closest node (heading wrapped).
    pub fn off_grid_distance(&self, q: Config) -> Result<f64> {
        let (i, j, k) = self.nearest_node(q)?;
        let n = self.node_config(i, j, k);
        Ok((q.x - n.x)
            .abs()
            .max((q.y - n.y).abs())
            .max(angle_diff(q.theta, n.theta).abs()))
    }
}

fn round_half_down(t: f64) -> usize {
    let t = t.max(0.0);
    let f = t.floor();
    if t - f > 0.5 {
        f as usize + 1
    } else {
        f as usize
    }
}

/// One scalar per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct Field3 {
    spec: GridSpec,
    data: Vec<f64>,
}

impl Field3 {
    pub fn filled(spec: GridSpec, value: f64) -> Self {
        Self {
            spec,
            data: vec![value; spec.len()],
        }
    }

    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(Config) -> f64) -> Self {
        let mut data = Vec::with_capacity(spec.len());
        for i in 0..=spec.ni {
            for j in 0..=spec.nj {
                for k in 0..spec.nk {
                    data.push(f(spec.node_config(i, j, k)));
                }
            }
        }
        Self { spec, data }
    }

    pub fn from_vec(spec: GridSpec, data: Vec<f64>) -> Result<Self> {
        if data.len() != spec.len() {
            return Err(Error::Grid(format!(
                "field has {} entries, grid needs {}",
                data.len(),
                spec.len()
            )));
        }
        Ok(Self { spec, data })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.spec.index(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let idx = self.spec.index(i, j, k);
        self.data[idx] = value;
    }

    /// Trilinear interpolation over the eight surrounding nodes, periodic in
    /// heading. Returns [`INF`] when any corner is infinite.
    pub fn sample(&self, q: Config) -> Result<f64> {
        let s = &self.spec;
        let b = s.bounds;
        if !b.contains(q.x, q.y) {
            return Err(Error::Domain { x: q.x, y: q.y });
        }
        let (i0, fx) = cell(((q.x - b.x_min) / s.dx).max(0.0), s.ni);
        let (j0, fy) = cell(((q.y - b.y_min) / s.dy).max(0.0), s.nj);
        let tk = normalize_angle(q.theta) / s.dtheta;
        let k0f = tk.floor();
        let ft = tk - k0f;
        let k0 = (k0f as usize) % s.nk;
        let k1 = (k0 + 1) % s.nk;

        let mut acc = 0.0;
        for (di, wx) in [(0, 1.0 - fx), (1, fx)] {
            for (dj, wy) in [(0, 1.0 - fy), (1, fy)] {
                for (k, wt) in [(k0, 1.0 - ft), (k1, ft)] {
                    let v = self.get(i0 + di, j0 + dj, k);
                    if is_inf(v) {
                        return Ok(INF);
                    }
                    acc += wx * wy * wt * v;
                }
            }
        }
        Ok(acc)
    }

    /// Central differences of the interpolated field with one grid spacing
    /// per axis.
    pub fn central_gradient(&self, q: Config) -> Result<[f64; 3]> {
        let s = &self.spec;
        let b = s.bounds;
        let tol = 1e-12;
        if q.x - s.dx < b.x_min - tol
            || q.x + s.dx > b.x_max + tol
            || q.y - s.dy < b.y_min - tol
            || q.y + s.dy > b.y_max + tol
        {
            return Err(Error::Domain { x: q.x, y: q.y });
        }
        let at = |x: f64, y: f64, t: f64| -> Result<f64> {
            let v = self.sample(Config::new(x, y, t))?;
            if is_inf(v) {
                Err(Error::GradientUndefined(q))
            } else {
                Ok(v)
            }
        };
        let ux = (at(q.x + s.dx, q.y, q.theta)? - at(q.x - s.dx, q.y, q.theta)?) / (2.0 * s.dx);
        let uy = (at(q.x, q.y + s.dy, q.theta)? - at(q.x, q.y - s.dy, q.theta)?) / (2.0 * s.dy);
        let ut = (at(q.x, q.y, q.theta + s.dtheta)? - at(q.x, q.y, q.theta - s.dtheta)?)
            / (2.0 * s.dtheta);
        Ok([ux, uy, ut])
    }
}

fn cell(t: f64, n: usize) -> (usize, f64) {
    let i0 = (t.floor() as usize).min(n - 1);
    (i0, (t - i0 as f64).clamp(0.0, 1.0))
}
