//! Monotone upwind sweeping for the travel-time HJB equation
//!
//! ```text
//! 1 = |u_x cosθ + u_y sinθ| + W |−d u_x sinθ + d u_y cosθ + u_θ|
//! ```
//!
//! For each control pair `(v, ω)` the drift of the reference point is
//! `A = v cosθ − ωWd sinθ`, `B = v sinθ + ωWd cosθ`. Differencing every
//! derivative toward the node the drift points at and solving for the centre
//! value gives the candidate
//!
//! ```text
//! u* = (1 + |A|/Δx·u[i+sgnA] + |B|/Δy·u[j+sgnB] + |ω|W/Δθ·u[k+sgnω])
//!      / (|A|/Δx + |B|/Δy + |ω|W/Δθ)
//! ```
//!
//! and a node takes the smallest candidate if it beats its current value.
//! Passes run Gauss-Seidel style in all eight index orderings until the
//! sup-norm change of an outer iteration drops below `eps`.

use crate::error::{Error, Result};
use crate::geometry::{build_mask, is_admissible, AdmissibilityMask, CarParams};
use crate::grid::{is_inf, Field3, GridSpec, INF};
use crate::scene::Scene;

/// Bang-bang control command. `(0, 0)` is not a control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ControlPair {
    v: i8,
    w: i8,
}

impl ControlPair {
    /// Default candidate set in tie-breaking order: straight motions first,
    /// then forward/reverse arcs, then pivots.
    pub const ALL: [ControlPair; 8] = [
        ControlPair { v: 1, w: 0 },
        ControlPair { v: -1, w: 0 },
        ControlPair { v: 1, w: 1 },
        ControlPair { v: 1, w: -1 },
        ControlPair { v: -1, w: 1 },
        ControlPair { v: -1, w: -1 },
        ControlPair { v: 0, w: 1 },
        ControlPair { v: 0, w: -1 },
    ];

    pub fn new(v: i8, w: i8) -> Result<Self> {
        if !(-1..=1).contains(&v) || !(-1..=1).contains(&w) || (v == 0 && w == 0) {
            return Err(Error::Input(format!("invalid control pair ({v}, {w})")));
        }
        Ok(Self { v, w })
    }

    pub fn v(&self) -> i8 {
        self.v
    }

    pub fn w(&self) -> i8 {
        self.w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    /// Stop once an outer iteration changes no node by `eps` or more.
    pub eps: f64,
    pub max_outer: usize,
    pub control_set: Vec<ControlPair>,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            max_outer: 500,
            control_set: ControlPair::ALL.to_vec(),
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || self.max_outer == 0 || self.control_set.is_empty() {
            return Err(Error::Input(format!(
                "solver needs eps > 0, max_outer >= 1 and a non-empty control set; got eps={}, max_outer={}, {} controls",
                self.eps,
                self.max_outer,
                self.control_set.len()
            )));
        }
        Ok(())
    }
}

/// Precomputed upwind stencil for one heading and control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coeff {
    /// Signed x drift `A_k(v, ω)`.
    pub a_speed: f64,
    /// Signed y drift `B_k(v, ω)`.
    pub b_speed: f64,
    /// `sign(A)`, zero when the drift vanishes.
    pub a_sign: i8,
    pub b_sign: i8,
    pub w_sign: i8,
    wx: f64,
    wy: f64,
    wt: f64,
    inv_denom: f64,
    off_x: isize,
    off_y: isize,
    off_t: isize,
}

/// Drifts below this are treated as exactly zero, so that e.g. `cos(π/2)`
/// does not couple a node to an irrelevant (possibly blocked) neighbour.
const DRIFT_FLOOR: f64 = 1e-12;

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

#[derive(Debug, Clone)]
pub struct CoeffTable {
    controls: Vec<ControlPair>,
    entries: Vec<Coeff>,
}

impl CoeffTable {
    pub fn get(&self, k: usize, control: usize) -> &Coeff {
        &self.entries[k * self.controls.len() + control]
    }

    pub fn controls(&self) -> &[ControlPair] {
        &self.controls
    }

    #[inline]
    fn row(&self, k: usize) -> &[Coeff] {
        let n = self.controls.len();
        &self.entries[k * n..(k + 1) * n]
    }
}

pub fn precompute_coeffs(
    params: &CarParams,
    spec: &GridSpec,
    controls: &[ControlPair],
) -> CoeffTable {
    let wd = params.max_turn_rate * params.axle_offset;
    let nk = spec.nk();
    let mut entries = Vec::with_capacity(nk * controls.len());
    for k in 0..nk {
        let (s, c) = (k as f64 * spec.dtheta()).sin_cos();
        for pair in controls {
            let (v, w) = (pair.v as f64, pair.w as f64);
            let clean = |x: f64| if x.abs() < DRIFT_FLOOR { 0.0 } else { x };
            let a = clean(v * c - w * wd * s);
            let b = clean(v * s + w * wd * c);
            let (a_sign, b_sign) = (sign_of(a), sign_of(b));
            let wx = a.abs() / spec.dx();
            let wy = b.abs() / spec.dy();
            let wt = w.abs() * params.max_turn_rate / spec.dtheta();
            let k_next = (k as isize + pair.w as isize).rem_euclid(nk as isize);
            entries.push(Coeff {
                a_speed: a,
                b_speed: b,
                a_sign,
                b_sign,
                w_sign: pair.w,
                wx,
                wy,
                wt,
                inv_denom: 1.0 / (wx + wy + wt),
                // zero-weight terms read the node itself, which is never +∞
                off_x: a_sign as isize * spec.stride_i() as isize,
                off_y: b_sign as isize * spec.stride_j() as isize,
                off_t: k_next - k as isize,
            });
        }
    }
    CoeffTable {
        controls: controls.to_vec(),
        entries,
    }
}

/// Candidate from the working array. Blocked and wall nodes hold
/// `f64::INFINITY` there, which makes any candidate touching them `+∞` and so
/// never accepted. Unreached nodes hold the finite [`INF`] and enter the
/// arithmetic as a large number.
#[inline]
fn candidate(data: &[f64], idx: usize, c: &Coeff) -> f64 {
    let at = |off: isize| data[(idx as isize + off) as usize];
    (1.0 + c.wx * at(c.off_x) + c.wy * at(c.off_y) + c.wt * at(c.off_t)) * c.inv_denom
}

/// Candidate value at an interior node for the `control`-th pair of the
/// table. Saturates to [`INF`] when a referenced neighbour is infinite.
pub fn local_update(
    u: &Field3,
    coeffs: &CoeffTable,
    node: (usize, usize, usize),
    control: usize,
) -> f64 {
    let (i, j, k) = node;
    let spec = u.spec();
    assert!(
        i >= 1 && j >= 1 && i < spec.ni() && j < spec.nj() && k < spec.nk(),
        "local_update needs an interior node, got {node:?}"
    );
    let c = coeffs.get(k, control);
    let idx = spec.index(i, j, k);
    let data = u.data();
    let mut num = 1.0;
    for (w, off) in [(c.wx, c.off_x), (c.wy, c.off_y), (c.wt, c.off_t)] {
        if w > 0.0 {
            let n = data[(idx as isize + off) as usize];
            if is_inf(n) {
                return INF;
            }
            num += w * n;
        }
    }
    num * c.inv_denom
}

/// Index ordering for one pass: `+1` ascending, `-1` descending per axis
/// `(i, j, k)`.
pub type SweepDirection = [i8; 3];

/// Fixed pass order; each step flips one axis.
pub const SWEEP_ORDER: [SweepDirection; 8] = [
    [1, 1, 1],
    [1, 1, -1],
    [1, -1, -1],
    [1, -1, 1],
    [-1, -1, 1],
    [-1, -1, -1],
    [-1, 1, -1],
    [-1, 1, 1],
];

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub u: Field3,
    /// Recorded `v` per node, 0 where a node was never improved.
    pub v_opt: Vec<i8>,
    pub w_opt: Vec<i8>,
    pub outer_iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
    pub goal_node: (usize, usize, usize),
}

impl SolveResult {
    pub fn spec(&self) -> &GridSpec {
        self.u.spec()
    }

    /// Recorded controls at a node, `None` when the node was never improved.
    pub fn recorded_control(&self, i: usize, j: usize, k: usize) -> Option<ControlPair> {
        let idx = self.u.spec().index(i, j, k);
        ControlPair::new(self.v_opt[idx], self.w_opt[idx]).ok()
    }
}

/// Values at or above this still carry a visible share of the [`INF`]
/// sentinel and are reported as unreached.
pub const UNREACHED: f64 = 1e-3 * INF;

/// Maps a working value to the public convention: finite travel time or
/// exactly [`INF`].
#[inline]
fn settle(v: f64) -> f64 {
    if v >= UNREACHED {
        INF
    } else {
        v
    }
}

/// Change of one node over an outer iteration. Unreached values can keep
/// shrinking for many iterations before they drop below [`UNREACHED`]; their
/// relative decrease counts so the run does not stop while that is going on.
#[inline]
fn change(before: f64, after: f64) -> f64 {
    if after >= UNREACHED {
        if before.is_finite() {
            (before - after) / before
        } else {
            0.0
        }
    } else {
        (settle(before) - after).abs()
    }
}

/// In-place sweeping state. [`solve`] drives it to convergence; it is public
/// so callers can observe individual outer iterations.
pub struct Solver {
    /// Working values: `f64::INFINITY` on blocked and wall nodes, [`INF`] on
    /// nodes not reached yet.
    work: Vec<f64>,
    spec: GridSpec,
    v_opt: Vec<i8>,
    w_opt: Vec<i8>,
    mask: AdmissibilityMask,
    coeffs: CoeffTable,
    goal_idx: usize,
    goal_node: (usize, usize, usize),
    params: SolverParams,
    iterations: usize,
    residual: f64,
}

impl Solver {
    /// Initialization: zero at the node nearest the goal, [`INF`] elsewhere,
    /// blocked nodes from the footprint mask.
    pub fn new(scene: &Scene, spec: GridSpec, params: SolverParams) -> Result<Self> {
        params.validate()?;
        let mask = build_mask(&scene.car, &scene.obstacles, &spec);
        Self::with_mask(scene, mask, params)
    }

    pub fn with_mask(scene: &Scene, mask: AdmissibilityMask, params: SolverParams) -> Result<Self> {
        params.validate()?;
        let spec = *mask.spec();
        if spec.bounds() != scene.bounds {
            return Err(Error::Configuration(
                "grid bounds differ from the scene domain".into(),
            ));
        }
        if !is_admissible(&scene.car, &scene.obstacles, scene.goal) {
            return Err(Error::Configuration(format!(
                "goal {:?} is not admissible",
                scene.goal
            )));
        }
        let goal_node = spec.nearest_node(scene.goal)?;
        let (gi, gj, gk) = goal_node;
        if mask.is_blocked(gi, gj, gk) {
            return Err(Error::Configuration(format!(
                "grid node {goal_node:?} nearest the goal is blocked; refine the grid"
            )));
        }
        let goal_idx = spec.index(gi, gj, gk);
        let work = (0..spec.len())
            .map(|idx| {
                let (i, j, _) = spec.unindex(idx);
                if idx == goal_idx {
                    0.0
                } else if mask.blocked()[idx] || spec.is_spatial_boundary(i, j) {
                    f64::INFINITY
                } else {
                    INF
                }
            })
            .collect();
        let coeffs = precompute_coeffs(&scene.car, &spec, &params.control_set);
        Ok(Self {
            work,
            spec,
            v_opt: vec![0; spec.len()],
            w_opt: vec![0; spec.len()],
            mask,
            coeffs,
            goal_idx,
            goal_node,
            params,
            iterations: 0,
            residual: f64::INFINITY,
        })
    }

    /// Current iterate with unreached, blocked and wall nodes at [`INF`].
    pub fn field(&self) -> Field3 {
        Field3::from_vec(self.spec, self.work.iter().map(|&v| settle(v)).collect())
            .expect("sized from spec")
    }

    pub fn mask(&self) -> &AdmissibilityMask {
        &self.mask
    }

    pub fn coeffs(&self) -> &CoeffTable {
        &self.coeffs
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn goal_node(&self) -> (usize, usize, usize) {
        self.goal_node
    }

    /// One Gauss-Seidel pass; returns the largest decrease of any node
    /// (unreached-to-reached transitions count as [`INF`]).
    pub fn sweep(&mut self, dir: SweepDirection) -> f64 {
        let spec = self.spec;
        let (ni, nj, nk) = (spec.ni(), spec.nj(), spec.nk());
        let order = |n_lo: usize, n_hi: usize, d: i8| -> Box<dyn Iterator<Item = usize>> {
            if d > 0 {
                Box::new(n_lo..n_hi)
            } else {
                Box::new((n_lo..n_hi).rev())
            }
        };
        let data = &mut self.work;
        let mut max_change = 0.0f64;
        for i in order(1, ni, dir[0]) {
            for j in order(1, nj, dir[1]) {
                let base = spec.index(i, j, 0);
                for k in order(0, nk, dir[2]) {
                    let idx = base + k;
                    let current = data[idx];
                    if current == f64::INFINITY || idx == self.goal_idx {
                        continue;
                    }
                    let mut best = current;
                    let mut arg = None;
                    for (c, coeff) in self.coeffs.row(k).iter().enumerate() {
                        let cand = candidate(data, idx, coeff);
                        if cand < best {
                            best = cand;
                            arg = Some(c);
                        }
                    }
                    if let Some(c) = arg {
                        data[idx] = best;
                        let pair = self.coeffs.controls[c];
                        self.v_opt[idx] = pair.v;
                        self.w_opt[idx] = pair.w;
                        max_change = max_change.max(settle(current) - settle(best));
                    }
                }
            }
        }
        max_change
    }

    /// All eight passes; returns `sup |u^n − u^{n−1}|` over the iteration,
    /// measured on settled values.
    pub fn outer_iteration(&mut self) -> f64 {
        let before = self.work.clone();
        for dir in SWEEP_ORDER {
            self.sweep(dir);
        }
        self.iterations += 1;
        self.residual = before
            .iter()
            .zip(&self.work)
            .map(|(&a, &b)| change(a, b))
            .fold(0.0, f64::max);
        self.residual
    }

    pub fn run(mut self) -> SolveResult {
        while self.iterations < self.params.max_outer {
            if self.outer_iteration() < self.params.eps {
                break;
            }
        }
        self.into_result()
    }

    pub fn into_result(self) -> SolveResult {
        let u = self.field();
        let (mut v_opt, mut w_opt) = (self.v_opt, self.w_opt);
        // controls recorded while a node still held a sentinel blend are
        // meaningless once it is reported unreached
        for (idx, &v) in u.data().iter().enumerate() {
            if is_inf(v) {
                v_opt[idx] = 0;
                w_opt[idx] = 0;
            }
        }
        SolveResult {
            converged: self.residual < self.params.eps,
            u,
            v_opt,
            w_opt,
            outer_iterations: self.iterations,
            final_residual: self.residual,
            goal_node: self.goal_node,
        }
    }
}

/// Runs the sweeping scheme to convergence or the iteration cap. A capped
/// run is reported through [`SolveResult::converged`], not as an error.
pub fn solve(scene: &Scene, spec: GridSpec, params: SolverParams) -> Result<SolveResult> {
    Ok(Solver::new(scene, spec, params)?.run())
}
