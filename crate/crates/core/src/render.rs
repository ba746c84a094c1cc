//! Standalone SVG drawings of a scene and a traced path.

use std::fmt::Write as _;

use crate::geometry::{footprint, Point};
use crate::grid::Config;
use crate::scene::Scene;
use crate::trajectory::Trajectory;

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 20.0;

/// Maps domain coordinates to the canvas, y pointing up.
struct View {
    x0: f64,
    y1: f64,
    scale: f64,
}

impl View {
    fn new(scene: &Scene) -> Self {
        let b = scene.bounds;
        let scale = (CANVAS - 2.0 * MARGIN) / (b.x_max - b.x_min).max(b.y_max - b.y_min);
        Self {
            x0: b.x_min,
            y1: b.y_max,
            scale,
        }
    }

    fn px(&self, p: Point) -> (f64, f64) {
        (
            MARGIN + (p.x - self.x0) * self.scale,
            MARGIN + (self.y1 - p.y) * self.scale,
        )
    }

    fn points(&self, pts: &[Point]) -> String {
        let mut s = String::new();
        for (n, &p) in pts.iter().enumerate() {
            let (x, y) = self.px(p);
            if n > 0 {
                s.push(' ');
            }
            write!(s, "{x:.2},{y:.2}").unwrap();
        }
        s
    }
}

fn car(out: &mut String, view: &View, scene: &Scene, q: Config, style: &str, label: Option<&str>) {
    let fp = footprint(&scene.car, q);
    writeln!(
        out,
        r#"  <polygon points="{}" {style}/>"#,
        view.points(&fp.corners)
    )
    .unwrap();
    // front edge (corners 1 and 2) marks the headlights
    writeln!(
        out,
        r#"  <polyline points="{}" fill="none" stroke="gold" stroke-width="3"/>"#,
        view.points(&fp.corners[1..3])
    )
    .unwrap();
    if let Some(text) = label {
        let (x, y) = view.px(Point::new(q.x, q.y));
        writeln!(
            out,
            r#"  <text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14">{text}</text>"#,
            x + 8.0,
            y - 8.0
        )
        .unwrap();
    }
}

/// Domain, obstacles and goal, plus the trajectory polyline and numbered
/// car footprints at the start, every kink and the end when given.
pub fn render_svg(scene: &Scene, traj: Option<&Trajectory>) -> String {
    let view = View::new(scene);
    let b = scene.bounds;
    let (x0, y0) = view.px(Point::new(b.x_min, b.y_max));
    let (x1, y1) = view.px(Point::new(b.x_max, b.y_min));
    let width = x1 + MARGIN;
    let height = y1 + MARGIN;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    )
    .unwrap();
    writeln!(
        out,
        r#"  <rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="white" stroke="black" stroke-width="2"/>"#,
        x1 - x0,
        y1 - y0
    )
    .unwrap();
    for poly in &scene.obstacles.polygons {
        writeln!(
            out,
            r#"  <polygon points="{}" fill="black"/>"#,
            view.points(poly.vertices())
        )
        .unwrap();
    }
    car(
        &mut out,
        &view,
        scene,
        scene.goal,
        r#"fill="none" stroke="red" stroke-width="1.5" stroke-dasharray="4 3""#,
        None,
    );
    let (gx, gy) = view.px(Point::new(scene.goal.x, scene.goal.y));
    writeln!(
        out,
        r#"  <circle cx="{gx:.2}" cy="{gy:.2}" r="4" fill="red"/>"#
    )
    .unwrap();

    if let Some(traj) = traj.filter(|t| !t.samples.is_empty()) {
        let path: Vec<Point> = traj
            .samples
            .iter()
            .map(|s| Point::new(s.config.x, s.config.y))
            .collect();
        writeln!(
            out,
            r#"  <polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
            view.points(&path)
        )
        .unwrap();
        let mut marks = vec![0];
        marks.extend(traj.kink_indices());
        marks.push(traj.samples.len() - 1);
        marks.dedup();
        for (n, &m) in marks.iter().enumerate() {
            car(
                &mut out,
                &view,
                scene,
                traj.samples[m].config,
                r#"fill="steelblue" fill-opacity="0.35" stroke="navy" stroke-width="1.5""#,
                Some(&(n + 1).to_string()),
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
