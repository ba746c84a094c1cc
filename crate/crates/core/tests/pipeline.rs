use std::sync::OnceLock;

use approx::assert_abs_diff_eq;
use carplan::export::{point_cloud_csv, slice_csv, trajectory_csv};
use carplan::field_io::SavedField;
use carplan::geometry::is_admissible;
use carplan::grid::{Config, GridSpec};
use carplan::scene::{bundled, load_scene, Scene};
use carplan::solver::{solve, SolveResult, SolverParams};
use carplan::trajectory::{ControlMode, TraceParams, Tracer};
use carplan::Error;

fn free() -> &'static (Scene, SolveResult) {
    static CELL: OnceLock<(Scene, SolveResult)> = OnceLock::new();
    CELL.get_or_init(|| {
        let scene = bundled("paper_free").unwrap();
        let spec = GridSpec::new(scene.bounds, 40, 40, 40).unwrap();
        let r = solve(&scene, spec, SolverParams::default()).unwrap();
        assert!(r.converged);
        (scene, r)
    })
}

#[test]
fn value_gradient_on_the_lane_behind_the_goal() {
    let (_, r) = free();
    let [ux, uy, _] = r.u.central_gradient(Config::new(0.2, 0.5, 0.0)).unwrap();
    assert_abs_diff_eq!(ux, -1.0, epsilon = 1e-6);
    assert_abs_diff_eq!(uy, 0.0, epsilon = 0.05);
}

#[test]
fn lane_start_drives_straight_in() {
    let (scene, r) = free();
    let tracer = Tracer::new(r, scene);
    let t = tracer
        .integrate(
            Config::new(-0.5, 0.5, 0.0),
            &TraceParams::for_grid(r.spec()),
        )
        .unwrap();
    assert!(t.reached_goal);
    assert_eq!(t.kink_count, 0);
    // capture happens up to goal_tol before the goal
    let tol = TraceParams::for_grid(r.spec()).goal_tol;
    assert!((t.duration - 1.0).abs() <= tol + 1e-9, "{}", t.duration);
    for s in &t.samples {
        assert!((s.config.y - 0.5).abs() < 0.02);
    }
}

#[test]
fn durations_track_the_value_on_free_scene() {
    let (scene, r) = free();
    let spec = r.spec();
    let tracer = Tracer::new(r, scene);
    let tp = TraceParams::for_grid(spec);
    for s in &scene.starts {
        let t = tracer.integrate(s.config, &tp).unwrap();
        assert!(t.reached_goal, "{}", s.name);
        let u0 = tracer.value_at(s.config).unwrap();
        let bound = 0.1 * u0 + 5.0 * spec.dx().max(spec.dy());
        assert!(
            (t.duration - u0).abs() <= bound,
            "{}: T={} u={u0}",
            s.name,
            t.duration
        );
        for w in t.samples.windows(2) {
            assert!(w[1].t > w[0].t);
        }
        assert!(t
            .samples
            .iter()
            .all(|q| is_admissible(&scene.car, &scene.obstacles, q.config)));
    }
}

#[test]
fn recorded_mode_also_reaches_the_goal() {
    let (scene, r) = free();
    let tracer = Tracer::new(r, scene);
    let tp = TraceParams {
        mode: ControlMode::Recorded,
        ..TraceParams::for_grid(r.spec())
    };
    let t = tracer
        .integrate(scene.start("green").unwrap(), &tp)
        .unwrap();
    assert!(t.reached_goal);
}

#[test]
fn traces_are_reproducible() {
    let (scene, r) = free();
    let tracer = Tracer::new(r, scene);
    let tp = TraceParams::for_grid(r.spec());
    let q = scene.start("pink").unwrap();
    let a = tracer.integrate(q, &tp).unwrap();
    let b = tracer.integrate(q, &tp).unwrap();
    assert_eq!(trajectory_csv(&a), trajectory_csv(&b));
}

#[test]
fn start_inside_obstacle_is_a_collision() {
    let scene = bundled("paper_threepaths_obs").unwrap();
    let spec = GridSpec::new(scene.bounds, 24, 24, 16).unwrap();
    let r = solve(&scene, spec, SolverParams::default()).unwrap();
    let err = Tracer::new(&r, &scene)
        .integrate(Config::new(-0.1, 0.0, 0.0), &TraceParams::for_grid(&spec))
        .unwrap_err();
    assert!(matches!(err, Error::Collision { t, .. } if t == 0.0));
}

#[test]
fn container_round_trip_through_a_file() {
    let (scene, r) = free();
    let saved = SavedField {
        result: r.clone(),
        car: scene.car,
        goal: scene.goal,
        eps: SolverParams::default().eps,
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("free.cpvf");
    saved.save(&path).unwrap();
    let back = SavedField::load(&path).unwrap();
    back.check_compatible(scene).unwrap();
    assert_eq!(back.result.u, r.u);
    assert_eq!(back.result.outer_iterations, r.outer_iterations);
    assert_eq!(back.result.converged, r.converged);

    let other = bundled("narrow_spot").unwrap();
    assert!(matches!(
        back.check_compatible(&other),
        Err(Error::Compatibility(_))
    ));
}

#[test]
fn csv_exports_have_expected_shape() {
    let (_, r) = free();
    let spec = r.spec();
    let slice = slice_csv(&r.u, 0.0).unwrap();
    assert_eq!(slice.lines().count(), 1 + (spec.ni() + 1) * (spec.nj() + 1));
    let cloud = point_cloud_csv(&r.u, Some(0.3));
    assert!(cloud
        .lines()
        .skip(1)
        .all(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap() <= 0.3));
}

#[test]
fn scene_files_on_disk_match_bundled_copies() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenes");
    for name in [
        "paper_free",
        "parallel_park",
        "paper_threepaths_obs",
        "narrow_spot",
    ] {
        let (scene, warnings) = load_scene(format!("{dir}/{name}.scene")).unwrap();
        assert!(warnings.is_empty(), "{warnings:?}");
        assert_eq!(scene, bundled(name).unwrap());
    }
}
