//! Optimal trajectory reconstruction.
//!
//! Controls come from the bang-bang feedback law
//!
//! ```text
//! v = −sign(u_x cosθ + u_y sinθ)
//! ω = −sign(−d u_x sinθ + d u_y cosθ + u_θ)
//! ```
//!
//! evaluated on central differences of the interpolated value function.
//! Where a switching argument is inside the dead-band, or the gradient
//! stencil touches an unreachable node, the controls recorded by the solver
//! at the nearest node are used instead. The kinematics are integrated with
//! forward Euler and a zero-order hold on the controls.

use crate::error::{Error, Result};
use crate::geometry::{is_admissible, CarParams};
use crate::grid::{angle_diff, is_inf, Config, Field3, GridSpec};
use crate::scene::Scene;
use crate::solver::{ControlPair, SolveResult};

/// How controls are recovered along a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ControlMode {
    /// Feedback law on the interpolated field, recorded controls as fallback.
    #[default]
    Feedback,
    /// Recorded controls at the nearest node only.
    Recorded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceParams {
    pub dt: f64,
    /// Capture radius around the goal position.
    pub goal_tol: f64,
    /// Capture tolerance on heading (periodic).
    pub theta_tol: f64,
    /// Give up once `t` exceeds this multiple of `u(start)`.
    pub max_time_factor: f64,
    pub mode: ControlMode,
}

impl TraceParams {
    /// `dt = Δ/4` with `Δ = min(Δx, Δy)`, capture within two cells in
    /// position and two heading steps, cap at `1.5 u(start)`.
    pub fn for_grid(spec: &GridSpec) -> Self {
        Self {
            dt: 0.25 * spec.dx().min(spec.dy()),
            goal_tol: 2.0 * spec.dx().max(spec.dy()),
            theta_tol: 2.0 * spec.dtheta(),
            max_time_factor: 1.5,
            mode: ControlMode::Feedback,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0
            && self.goal_tol > 0.0
            && self.theta_tol > 0.0
            && self.max_time_factor >= 1.0)
        {
            return Err(Error::Input(format!("invalid trace parameters {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub config: Config,
    /// Control held over `[t, t + dt)`; `None` on the final sample.
    pub control: Option<ControlPair>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub duration: f64,
    pub reached_goal: bool,
    pub kink_count: usize,
}

/// Number of driving-direction reversals in a `v` sequence. Zeros (pivots)
/// are skipped, so `+1, 0, −1` counts once and `+1, 0, +1` not at all.
pub fn count_kinks(vs: impl IntoIterator<Item = i8>) -> usize {
    let mut last = 0i8;
    let mut kinks = 0;
    for v in vs.into_iter().filter(|&v| v != 0) {
        if last != 0 && v != last {
            kinks += 1;
        }
        last = v;
    }
    kinks
}

impl Trajectory {
    pub fn count_kinks(&self) -> usize {
        count_kinks(self.samples.iter().filter_map(|s| s.control.map(|c| c.v())))
    }

    /// Indices where `v` reverses sign relative to the previous non-zero
    /// command.
    pub fn kink_indices(&self) -> Vec<usize> {
        let mut last = 0i8;
        let mut out = Vec::new();
        for (n, s) in self.samples.iter().enumerate() {
            let Some(c) = s.control else { continue };
            if c.v() == 0 {
                continue;
            }
            if last != 0 && c.v() != last {
                out.push(n);
            }
            last = c.v();
        }
        out
    }
}

/// Borrowed view of the per-node controls recorded during the sweep.
#[derive(Debug, Clone, Copy)]
pub struct RecordedControls<'a> {
    pub v: &'a [i8],
    pub w: &'a [i8],
}

impl SolveResult {
    pub fn recorded(&self) -> RecordedControls<'_> {
        RecordedControls {
            v: &self.v_opt,
            w: &self.w_opt,
        }
    }
}

fn sign_with_band(arg: f64, band: f64) -> Option<i8> {
    if arg.abs() < band {
        None
    } else if arg > 0.0 {
        Some(-1)
    } else {
        Some(1)
    }
}

/// Bang-bang control at `q`. `band` is the dead-band on both switching
/// arguments. Fails only when neither the gradient nor the recorded controls
/// give a usable command.
pub fn control_law(
    u: &Field3,
    recorded: RecordedControls<'_>,
    q: Config,
    axle_offset: f64,
    band: f64,
) -> Result<ControlPair> {
    let spec = u.spec();
    let (i, j, k) = spec.nearest_node(q)?;
    let idx = spec.index(i, j, k);
    let (rv, rw) = (recorded.v[idx], recorded.w[idx]);

    let (v, w) = match u.central_gradient(q) {
        Ok([ux, uy, ut]) => {
            let (s, c) = q.theta.sin_cos();
            let v_arg = ux * c + uy * s;
            let w_arg = axle_offset * (-ux * s + uy * c) + ut;
            (
                sign_with_band(v_arg, band).unwrap_or(rv),
                sign_with_band(w_arg, band).unwrap_or(rw),
            )
        }
        Err(Error::GradientUndefined(_)) | Err(Error::Domain { .. }) => (rv, rw),
        Err(e) => return Err(e),
    };
    ControlPair::new(v, w).map_err(|_| Error::Unreachable(q))
}

/// One forward Euler step of the car kinematics.
pub fn euler_step(car: &CarParams, q: Config, c: ControlPair, dt: f64) -> Config {
    let (v, w) = (c.v() as f64, c.w() as f64 * car.max_turn_rate);
    let (s, co) = q.theta.sin_cos();
    let d = car.axle_offset;
    Config::new(
        q.x + dt * (v * co - w * d * s),
        q.y + dt * (v * s + w * d * co),
        q.theta + dt * w,
    )
}

/// Dead-band width: `10⁻³` times the median gradient norm over interior
/// nodes whose stencil is finite.
pub fn dead_band(u: &Field3) -> f64 {
    let s = u.spec();
    let mut norms = Vec::new();
    for i in 1..s.ni() {
        for j in 1..s.nj() {
            for k in 0..s.nk() {
                let (kp, km) = ((k + 1) % s.nk(), (k + s.nk() - 1) % s.nk());
                let vals = [
                    u.get(i + 1, j, k),
                    u.get(i - 1, j, k),
                    u.get(i, j + 1, k),
                    u.get(i, j - 1, k),
                    u.get(i, j, kp),
                    u.get(i, j, km),
                ];
                if vals.iter().any(|&v| is_inf(v)) {
                    continue;
                }
                let gx = (vals[0] - vals[1]) / (2.0 * s.dx());
                let gy = (vals[2] - vals[3]) / (2.0 * s.dy());
                let gt = (vals[4] - vals[5]) / (2.0 * s.dtheta());
                norms.push((gx * gx + gy * gy + gt * gt).sqrt());
            }
        }
    }
    if norms.is_empty() {
        return 0.0;
    }
    let mid = norms.len() / 2;
    let (_, m, _) = norms.select_nth_unstable_by(mid, f64::total_cmp);
    1e-3 * *m
}

/// Traces optimal trajectories against one solved field.
pub struct Tracer<'a> {
    result: &'a SolveResult,
    scene: &'a Scene,
    band: f64,
}

impl<'a> Tracer<'a> {
    pub fn new(result: &'a SolveResult, scene: &'a Scene) -> Self {
        Self {
            result,
            scene,
            band: dead_band(&result.u),
        }
    }

    /// Same as [`Tracer::new`] with an explicit dead-band width.
    pub fn with_band(result: &'a SolveResult, scene: &'a Scene, band: f64) -> Self {
        Self {
            result,
            scene,
            band,
        }
    }

    pub fn band(&self) -> f64 {
        self.band
    }

    pub fn control_at(&self, q: Config, mode: ControlMode) -> Result<ControlPair> {
        match mode {
            ControlMode::Feedback => control_law(
                &self.result.u,
                self.result.recorded(),
                q,
                self.scene.car.axle_offset,
                self.band,
            ),
            ControlMode::Recorded => {
                let (i, j, k) = self.result.spec().nearest_node(q)?;
                self.result
                    .recorded_control(i, j, k)
                    .ok_or(Error::Unreachable(q))
            }
        }
    }

    /// Travel time estimate at `q`: the interpolated value, or the nearest
    /// node's value when the interpolation stencil touches an unreachable
    /// node.
    pub fn value_at(&self, q: Config) -> Result<f64> {
        let u = &self.result.u;
        let v = u.sample(q)?;
        if !is_inf(v) {
            return Ok(v);
        }
        let (i, j, k) = u.spec().nearest_node(q)?;
        Ok(u.get(i, j, k))
    }

    pub fn integrate(&self, start: Config, tp: &TraceParams) -> Result<Trajectory> {
        tp.validate()?;
        let car = &self.scene.car;
        let goal = self.scene.goal;
        if !is_admissible(car, &self.scene.obstacles, start) {
            return Err(Error::Collision {
                t: 0.0,
                config: start,
            });
        }
        let u0 = self.value_at(start)?;
        if is_inf(u0) {
            return Err(Error::Unreachable(start));
        }
        let t_max = tp.max_time_factor * u0;
        let captured = |q: Config| {
            (q.x - goal.x).hypot(q.y - goal.y) <= tp.goal_tol
                && angle_diff(q.theta, goal.theta).abs() <= tp.theta_tol
        };

        let mut samples = Vec::new();
        let mut q = start;
        let mut steps = 0usize;
        let reached_goal = loop {
            let t = steps as f64 * tp.dt;
            if captured(q) {
                samples.push(Sample {
                    t,
                    config: q,
                    control: None,
                });
                break true;
            }
            if t > t_max {
                samples.push(Sample {
                    t,
                    config: q,
                    control: None,
                });
                break false;
            }
            let c = self.control_at(q, tp.mode)?;
            samples.push(Sample {
                t,
                config: q,
                control: Some(c),
            });
            q = euler_step(car, q, c, tp.dt);
            steps += 1;
            let t_next = steps as f64 * tp.dt;
            if !self.scene.bounds.contains(q.x, q.y)
                || !is_admissible(car, &self.scene.obstacles, q)
            {
                return Err(Error::Collision {
                    t: t_next,
                    config: q,
                });
            }
        };
        let duration = samples.last().map_or(0.0, |s| s.t);
        let mut traj = Trajectory {
            samples,
            duration,
            reached_goal,
            kink_count: 0,
        };
        traj.kink_count = traj.count_kinks();
        Ok(traj)
    }

    /// Steps where the interpolated travel time rises by more than `tol`.
    /// Steps with an infinite sample on either end are skipped; see
    /// [`Tracer::value_at`] for the nearest-node substitute used there.
    pub fn value_increases(&self, traj: &Trajectory, tol: f64) -> Result<Vec<(usize, f64)>> {
        let mut out = Vec::new();
        let mut prev = self.value_at(traj.samples[0].config)?;
        for (n, s) in traj.samples.iter().enumerate().skip(1) {
            let cur = self.value_at(s.config)?;
            if !is_inf(cur) && !is_inf(prev) && cur - prev > tol {
                out.push((n, cur - prev));
            }
            prev = cur;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ObstacleSet;
    use crate::grid::Bounds;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kink_counting() {
        assert_eq!(count_kinks([1, 1, 1, 1]), 0);
        assert_eq!(count_kinks([1, 1, -1, -1, 1]), 2);
        assert_eq!(count_kinks([1, 0, 1, 0, 0, 1]), 0);
        assert_eq!(count_kinks([1, 0, -1]), 1);
        assert_eq!(count_kinks([0, 0, -1, 1, 0]), 1);
        assert_eq!(count_kinks(Vec::<i8>::new()), 0);
    }

    #[test]
    fn euler_step_matches_kinematics() {
        let car = CarParams::new(0.04, 0.07, 4.0).unwrap();
        let q = Config::new(0.1, 0.2, 0.3);
        let c = ControlPair::new(-1, 1).unwrap();
        let n = euler_step(&car, q, c, 0.01);
        let (s, co) = 0.3f64.sin_cos();
        assert_abs_diff_eq!(n.x, 0.1 + 0.01 * (-co - 4.0 * 0.07 * s), epsilon = 1e-15);
        assert_abs_diff_eq!(n.y, 0.2 + 0.01 * (-s + 4.0 * 0.07 * co), epsilon = 1e-15);
        assert_abs_diff_eq!(n.theta, 0.34, epsilon = 1e-15);
    }

    #[test]
    fn feedback_on_synthetic_field() {
        let spec = GridSpec::new(Bounds::new(-1.0, 1.0, -1.0, 1.0), 20, 20, 16).unwrap();
        let u = Field3::from_fn(spec, |q| 2.0 - q.x);
        let zeros = vec![0i8; spec.len()];
        let rec = RecordedControls {
            v: &zeros,
            w: &zeros,
        };
        // gradient (−1, 0, 0), θ = 0, d = 0: v = +1, ω argument vanishes
        let mut w_rec = vec![0i8; spec.len()];
        w_rec.iter_mut().for_each(|w| *w = 1);
        let rec_w = RecordedControls {
            v: &zeros,
            w: &w_rec,
        };
        let c = control_law(&u, rec_w, Config::new(0.1, 0.0, 0.0), 0.0, 1e-6).unwrap();
        assert_eq!((c.v(), c.w()), (1, 1));
        // facing −x the same field asks for reverse
        let c = control_law(
            &u,
            rec_w,
            Config::new(0.1, 0.0, std::f64::consts::PI),
            0.0,
            1e-6,
        )
        .unwrap();
        assert_eq!(c.v(), -1);
        // nothing recorded and ω argument in the dead-band → straight
        let c = control_law(&u, rec, Config::new(0.1, 0.0, 0.0), 0.0, 1e-6);
        assert_eq!(c.unwrap(), ControlPair::new(1, 0).unwrap());
    }

    #[test]
    fn dead_band_of_linear_field() {
        let spec = GridSpec::new(Bounds::new(-1.0, 1.0, -1.0, 1.0), 10, 10, 8).unwrap();
        let u = Field3::from_fn(spec, |q| 3.0 * q.x + 4.0 * q.y);
        assert_abs_diff_eq!(dead_band(&u), 5e-3, epsilon = 1e-12);
    }

    #[test]
    fn start_at_goal_is_empty_trajectory() {
        let spec = GridSpec::new(Bounds::new(-1.0, 1.0, -1.0, 1.0), 24, 24, 16).unwrap();
        let scene = Scene::new(
            Bounds::new(-1.0, 1.0, -1.0, 1.0),
            CarParams::new(0.04, 0.07, 4.0).unwrap(),
            ObstacleSet::default(),
            Config::new(0.5, 0.5, 0.0),
        );
        let r = crate::solver::solve(&scene, spec, Default::default()).unwrap();
        let tracer = Tracer::new(&r, &scene);
        let traj = tracer
            .integrate(scene.goal, &TraceParams::for_grid(&spec))
            .unwrap();
        assert!(traj.reached_goal);
        assert_eq!(traj.duration, 0.0);
        assert_eq!(traj.kink_count, 0);
        assert_eq!(traj.samples.len(), 1);
    }
}
