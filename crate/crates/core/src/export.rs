//! CSV tables. Floats use Rust's shortest round-trip formatting, which is
//! locale-independent; infinite entries are written as `inf`.

use std::fmt::Write as _;

use crate::error::Result;
use crate::grid::{is_inf, normalize_angle, Field3};
use crate::trajectory::Trajectory;

fn num(out: &mut String, v: f64) {
    if is_inf(v) {
        out.push_str("inf");
    } else {
        write!(out, "{v}").unwrap();
    }
}

/// `t,x,y,theta,v,omega`; the final sample carries zero controls.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,x,y,theta,v,omega\n");
    for s in &traj.samples {
        let (v, w) = s.control.map_or((0, 0), |c| (c.v(), c.w()));
        writeln!(
            out,
            "{},{},{},{},{v},{w}",
            s.t, s.config.x, s.config.y, s.config.theta
        )
        .unwrap();
    }
    out
}

/// `x,y,u` over all spatial nodes at heading `theta`, linearly interpolated
/// between the two bracketing heading layers.
pub fn slice_csv(u: &Field3, theta: f64) -> Result<String> {
    let spec = u.spec();
    let t = normalize_angle(theta) / spec.dtheta();
    let k0 = t.floor() as usize % spec.nk();
    let k1 = (k0 + 1) % spec.nk();
    let f = t - t.floor();
    let mut out = String::from("x,y,u\n");
    for j in 0..=spec.nj() {
        for i in 0..=spec.ni() {
            let q = spec.node_to_config(i, j, 0)?;
            let (a, b) = (u.get(i, j, k0), u.get(i, j, k1));
            let v = if f == 0.0 {
                a
            } else if is_inf(a) || is_inf(b) {
                f64::INFINITY
            } else {
                (1.0 - f) * a + f * b
            };
            write!(out, "{},{},", q.x, q.y).unwrap();
            num(&mut out, v);
            out.push('\n');
        }
    }
    Ok(out)
}

/// `x,y,theta,u` for every finite node with `u <= max_value`.
pub fn point_cloud_csv(u: &Field3, max_value: Option<f64>) -> String {
    let spec = u.spec();
    let mut out = String::from("x,y,theta,u\n");
    for (idx, &v) in u.data().iter().enumerate() {
        if is_inf(v) || max_value.is_some_and(|m| v > m) {
            continue;
        }
        let (i, j, k) = spec.unindex(idx);
        let q = spec.node_to_config(i, j, k).expect("index from the field");
        writeln!(out, "{},{},{},{v}", q.x, q.y, q.theta).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Bounds, Config, GridSpec, INF};
    use crate::solver::ControlPair;
    use crate::trajectory::Sample;

    #[test]
    fn trajectory_table_layout() {
        let traj = Trajectory {
            samples: vec![
                Sample {
                    t: 0.0,
                    config: Config::new(0.5, -0.25, 0.0),
                    control: Some(ControlPair::new(-1, 1).unwrap()),
                },
                Sample {
                    t: 0.125,
                    config: Config::new(0.375, -0.25, 0.5),
                    control: None,
                },
            ],
            duration: 0.125,
            reached_goal: true,
            kink_count: 0,
        };
        assert_eq!(
            trajectory_csv(&traj),
            "t,x,y,theta,v,omega\n0,0.5,-0.25,0,-1,1\n0.125,0.375,-0.25,0.5,0,0\n"
        );
    }

    #[test]
    fn slice_interpolates_between_layers() {
        let spec = GridSpec::new(Bounds::new(0.0, 4.0, 0.0, 4.0), 4, 4, 4).unwrap();
        let mut u = Field3::from_fn(spec, |q| q.theta);
        let csv = slice_csv(&u, 0.5 * spec.dtheta()).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x,y,u"));
        let first: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|s| s.parse().unwrap())
            .collect();
        assert!((first[2] - 0.5 * spec.dtheta()).abs() < 1e-12);
        assert_eq!(csv.lines().count(), 1 + 25);
        u.set(0, 0, 1, INF);
        let csv = slice_csv(&u, 0.5 * spec.dtheta()).unwrap();
        assert!(csv.lines().nth(1).unwrap().ends_with(",inf"));
    }

    #[test]
    fn point_cloud_filters() {
        let spec = GridSpec::new(Bounds::new(0.0, 4.0, 0.0, 4.0), 4, 4, 4).unwrap();
        let mut u = Field3::from_fn(spec, |q| q.x);
        u.set(1, 1, 1, INF);
        assert_eq!(
            point_cloud_csv(&u, None).lines().count(),
            1 + spec.len() - 1
        );
        // x <= 1 keeps i = 0, 1
        assert_eq!(
            point_cloud_csv(&u, Some(1.0)).lines().count(),
            1 + 2 * 5 * 4 - 1
        );
    }
}
