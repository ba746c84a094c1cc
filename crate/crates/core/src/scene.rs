//! Scene description: domain, car, obstacles, goal and named starts.
//!
//! Scene files are TOML. Lengths are dimensionless, angles in radians:
//!
//! ```toml
//! [domain]
//! x = [-1.0, 1.0]
//! y = [-1.0, 1.0]
//!
//! [car]
//! half_width = 0.04     # R
//! axle_offset = 0.07    # d
//! max_turn_rate = 4.0   # W
//!
//! [goal]
//! x = 0.5
//! y = 0.5
//! theta = 0.0
//!
//! [[obstacle]]
//! vertices = [[0.0, 0.0], [0.2, 0.0], [0.2, 0.2], [0.0, 0.2]]
//!
//! [[start]]
//! name = "lane"
//! x = -0.5
//! y = 0.5
//! theta = 0.0
//! ```
//!
//! Obstacles must be convex; clockwise vertex lists are reversed with a
//! warning.

use std::path::Path;

use serde::Deserialize;
use toml::Spanned;

use crate::error::{Error, Result};
use crate::geometry::{is_admissible, CarParams, ConvexPolygon, ObstacleSet, Point};
use crate::grid::{Bounds, Config};

#[derive(Debug, Clone, PartialEq)]
pub struct NamedStart {
    pub name: String,
    pub config: Config,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub bounds: Bounds,
    pub car: CarParams,
    pub obstacles: ObstacleSet,
    pub goal: Config,
    pub starts: Vec<NamedStart>,
}

impl Scene {
    pub fn new(bounds: Bounds, car: CarParams, obstacles: ObstacleSet, goal: Config) -> Self {
        Self {
            bounds,
            car,
            obstacles,
            goal,
            starts: Vec::new(),
        }
    }

    pub fn start(&self, name: &str) -> Option<Config> {
        self.starts
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.config)
    }

    /// Parses scene text. `origin` names the source in diagnostics. Returns
    /// the scene and any non-fatal warnings.
    pub fn parse(text: &str, origin: &str) -> Result<(Scene, Vec<String>)> {
        let raw: RawScene = toml::from_str(text).map_err(|e| {
            let location = match e.span() {
                Some(span) => format!("{origin}:{}", line_of(text, span.start)),
                None => origin.to_string(),
            };
            Error::Scene {
                location,
                message: e.message().to_string(),
            }
        })?;
        raw.into_scene(text, origin)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.bounds.contains(self.goal.x, self.goal.y) {
            return Err(Error::Configuration(format!(
                "goal {:?} lies outside the domain",
                self.goal
            )));
        }
        if !is_admissible(&self.car, &self.obstacles, self.goal) {
            return Err(Error::Configuration(format!(
                "goal {:?} is not admissible",
                self.goal
            )));
        }
        Ok(())
    }
}

/// Reads and validates a scene file.
pub fn load_scene(path: impl AsRef<Path>) -> Result<(Scene, Vec<String>)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    Scene::parse(&text, &path.display().to_string())
}

/// Scene files shipped with the crate, by name.
pub const BUNDLED: [(&str, &str); 4] = [
    (
        "paper_free",
        include_str!("../../../scenes/paper_free.scene"),
    ),
    (
        "paper_threepaths_obs",
        include_str!("../../../scenes/paper_threepaths_obs.scene"),
    ),
    (
        "parallel_park",
        include_str!("../../../scenes/parallel_park.scene"),
    ),
    (
        "narrow_spot",
        include_str!("../../../scenes/narrow_spot.scene"),
    ),
];

pub fn bundled(name: &str) -> Option<Scene> {
    let name = name.strip_suffix(".scene").unwrap_or(name);
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, text)| Scene::parse(text, n).expect("bundled scenes are valid").0)
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScene {
    domain: RawDomain,
    car: Spanned<RawCar>,
    goal: Spanned<RawConfig>,
    #[serde(default)]
    obstacle: Vec<RawObstacle>,
    #[serde(default)]
    start: Vec<Spanned<RawStart>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    x: Spanned<[f64; 2]>,
    y: Spanned<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCar {
    half_width: f64,
    axle_offset: f64,
    max_turn_rate: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    x: f64,
    y: f64,
    theta: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObstacle {
    vertices: Spanned<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStart {
    name: String,
    x: f64,
    y: f64,
    theta: f64,
}

impl RawScene {
    fn into_scene(self, text: &str, origin: &str) -> Result<(Scene, Vec<String>)> {
        let at =
            |offset: usize, field: &str| format!("{origin}:{} ({field})", line_of(text, offset));
        let err = |location: String, message: String| Error::Scene { location, message };
        let mut warnings = Vec::new();

        let (x, y) = (self.domain.x.get_ref(), self.domain.y.get_ref());
        if !(x[0] < x[1]) {
            return Err(err(
                at(self.domain.x.span().start, "domain.x"),
                "expected x_min < x_max".into(),
            ));
        }
        if !(y[0] < y[1]) {
            return Err(err(
                at(self.domain.y.span().start, "domain.y"),
                "expected y_min < y_max".into(),
            ));
        }
        let bounds = Bounds::new(x[0], x[1], y[0], y[1]);

        let car_span = self.car.span().start;
        let c = self.car.into_inner();
        let car = CarParams::new(c.half_width, c.axle_offset, c.max_turn_rate)
            .map_err(|e| err(at(car_span, "car"), e.to_string()))?;

        let mut polygons = Vec::with_capacity(self.obstacle.len());
        for (n, ob) in self.obstacle.into_iter().enumerate() {
            let field = format!("obstacle[{n}]");
            let span = ob.vertices.span().start;
            let pts = ob
                .vertices
                .into_inner()
                .into_iter()
                .map(|[px, py]| Point::new(px, py))
                .collect();
            let (poly, reversed) = ConvexPolygon::with_any_orientation(pts)
                .map_err(|e| err(at(span, &field), e.to_string()))?;
            if reversed {
                warnings.push(format!(
                    "{}: clockwise vertices reversed to counterclockwise",
                    at(span, &field)
                ));
            }
            polygons.push(poly);
        }
        let obstacles = ObstacleSet::new(polygons);

        let goal_span = self.goal.span().start;
        let g = self.goal.into_inner();
        let goal = Config::new(g.x, g.y, g.theta);
        let scene_check = |q: Config, loc: String, what: &str| -> Result<()> {
            if !bounds.contains(q.x, q.y) {
                return Err(err(loc, format!("{what} lies outside the domain")));
            }
            if !is_admissible(&car, &obstacles, q) {
                return Err(err(
                    loc,
                    format!("{what} is not admissible (car overlaps an obstacle)"),
                ));
            }
            Ok(())
        };
        scene_check(goal, at(goal_span, "goal"), "goal")?;

        let mut starts: Vec<NamedStart> = Vec::new();
        for (n, s) in self.start.into_iter().enumerate() {
            let loc = at(s.span().start, &format!("start[{n}]"));
            let s = s.into_inner();
            if starts.iter().any(|o| o.name == s.name) {
                return Err(err(loc, format!("duplicate start name {:?}", s.name)));
            }
            let config = Config::new(s.x, s.y, s.theta);
            scene_check(config, loc, &format!("start {:?}", s.name))?;
            starts.push(NamedStart {
                name: s.name,
                config,
            });
        }

        Ok((
            Scene {
                bounds,
                car,
                obstacles,
                goal,
                starts,
            },
            warnings,
        ))
    }
}
