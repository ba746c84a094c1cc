use std::path::Path;
use std::process::{Command, Output};

fn carplan(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carplan"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn solve_then_trace_from_saved_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = carplan(
        &[
            "solve",
            "--scene",
            "paper_free",
            "--grid",
            "40",
            "--out",
            "f.cpvf",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("converged true"));

    let o = carplan(
        &[
            "trace",
            "--scene",
            "paper_free",
            "--field",
            "f.cpvf",
            "--start-name",
            "green",
            "--out",
            "t.csv",
            "--svg",
            "t.svg",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert!(csv.starts_with("t,x,y,theta,v,omega\n"));
    assert!(csv.lines().nth(1).unwrap().starts_with("0,-0.6,0,"));
    assert!(csv.trim_end().ends_with(",0,0"));
    let svg = std::fs::read_to_string(dir.path().join("t.svg")).unwrap();
    assert!(svg.contains("steelblue"));
}

#[test]
fn trace_solves_on_the_fly_and_accepts_negative_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let o = carplan(
        &[
            "trace",
            "--scene",
            "paper_free",
            "--grid",
            "40",
            "--start",
            "-0.5,0.5,0",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("0 kinks"));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("t,x,y,theta,v,omega"));
}

#[test]
fn unknown_scene_is_a_load_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = carplan(
        &["solve", "--scene", "no_such_scene", "--out", "f.cpvf"],
        dir.path(),
    );
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("paper_free"));
}

#[test]
fn malformed_scene_file_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.scene"),
        "[domain]\nx = [-1.0, 1.0]\ny = [-1.0, 1.0]\n\n[car]\nhalf_width = 0.04\naxle_offset = 0.07\n\n[goal]\nx = 0.0\ny = 0.0\ntheta = 0.0\n",
    )
    .unwrap();
    let o = carplan(
        &[
            "solve",
            "--scene",
            "bad.scene",
            "--grid",
            "8",
            "--out",
            "f.cpvf",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("bad.scene"), "{}", stderr(&o));
}

#[test]
fn capped_iterations_exit_with_non_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let o = carplan(
        &[
            "solve",
            "--scene",
            "paper_free",
            "--grid",
            "20",
            "--max-iters",
            "1",
            "--out",
            "f.cpvf",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 4);
    assert!(dir.path().join("f.cpvf").exists());
}

#[test]
fn field_from_other_scene_is_incompatible() {
    let dir = tempfile::tempdir().unwrap();
    let o = carplan(
        &[
            "solve",
            "--scene",
            "paper_free",
            "--grid",
            "20",
            "--out",
            "f.cpvf",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let o = carplan(
        &["slice", "--scene", "narrow_spot", "--field", "f.cpvf"],
        dir.path(),
    );
    assert_eq!(code(&o), 6);
}

#[test]
fn corrupt_field_is_a_load_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("f.cpvf"), b"not a field").unwrap();
    let o = carplan(
        &["slice", "--scene", "paper_free", "--field", "f.cpvf"],
        dir.path(),
    );
    assert_eq!(code(&o), 3);
}

#[test]
fn start_in_obstacle_is_a_trajectory_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = carplan(
        &[
            "trace",
            "--scene",
            "paper_threepaths_obs",
            "--grid",
            "24,24,16",
            "--start",
            "-0.1,0,0",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 5, "{}", stderr(&o));
}

#[test]
fn off_grid_goal_is_warned_about() {
    let dir = tempfile::tempdir().unwrap();
    let o = carplan(
        &[
            "slice",
            "--scene",
            "paper_free",
            "--grid",
            "30",
            "--theta",
            "0",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("warning: goal lies"));
    let o = carplan(
        &["slice", "--scene", "paper_free", "--grid", "40"],
        dir.path(),
    );
    assert!(!stderr(&o).contains("warning"));
}

#[test]
fn oracle_prints_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let o = carplan(
        &["oracle", "--scene", "paper_free", "--grid", "16,16,8"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("median_abs "));
    assert!(out.contains("only_oracle_finite 0"));
}

#[test]
fn render_without_path_and_cloud_export() {
    let dir = tempfile::tempdir().unwrap();
    let o = carplan(
        &["render", "--scene", "narrow_spot", "--out", "s.svg"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let svg = std::fs::read_to_string(dir.path().join("s.svg")).unwrap();
    assert!(svg.starts_with("<svg"));

    let o = carplan(
        &[
            "cloud",
            "--scene",
            "paper_free",
            "--grid",
            "12,12,8",
            "--max-value",
            "0.2",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("x,y,theta,u\n"));
}
