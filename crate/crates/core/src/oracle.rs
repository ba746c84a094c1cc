//! Brute-force travel-time reference for small grids.
//!
//! Every unblocked interior node gets one edge per control pair: the
//! kinematics are integrated with the tracer's Euler rule until the centroid
//! has covered `step_count · min(Δx, Δy)` of arc length, and the end point is
//! snapped to the nearest node. The edge cost is the time that took. A pivot
//! that does not move the centroid (`d = 0`) runs for `step_count` heading
//! steps instead. Shortest paths to the goal node on that graph approximate
//! the travel time; the snapping error dominates.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geometry::build_mask;
use crate::grid::{is_inf, Field3, GridSpec, INF};
use crate::scene::Scene;
use crate::solver::ControlPair;
use crate::trajectory::euler_step;

/// Euler sub-steps per grid spacing of travel.
const SUBSTEPS_PER_CELL: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub cost: f64,
}

/// Directed transition graph over grid nodes.
#[derive(Debug, Clone)]
pub struct ControlGraph {
    spec: GridSpec,
    /// Incoming edges per node, as `(predecessor, cost)`.
    incoming: Vec<Vec<(usize, f64)>>,
    goal: usize,
}

impl ControlGraph {
    pub fn build(scene: &Scene, spec: &GridSpec, step_count: usize) -> Result<Self> {
        if step_count == 0 {
            return Err(Error::Input("step_count must be positive".into()));
        }
        scene.validate()?;
        let mask = build_mask(&scene.car, &scene.obstacles, spec);
        let (gi, gj, gk) = spec.nearest_node(scene.goal)?;
        if mask.is_blocked(gi, gj, gk) {
            return Err(Error::Configuration(format!(
                "grid node {:?} nearest the goal is blocked",
                (gi, gj, gk)
            )));
        }
        let goal = spec.index(gi, gj, gk);
        let usable = |i: usize, j: usize, k: usize| {
            !spec.is_spatial_boundary(i, j) && !mask.is_blocked(i, j, k)
        };

        let h = spec.dx().min(spec.dy());
        let substeps = step_count * SUBSTEPS_PER_CELL;
        let car = &scene.car;
        let duration = |c: ControlPair| {
            let speed = (c.v() as f64).hypot(c.w() as f64 * car.max_turn_rate * car.axle_offset);
            if speed > 0.0 {
                step_count as f64 * h / speed
            } else {
                step_count as f64 * spec.dtheta() / car.max_turn_rate
            }
        };
        let bounds = spec.bounds();

        let mut incoming = vec![Vec::new(); spec.len()];
        for from in 0..spec.len() {
            let (i, j, k) = spec.unindex(from);
            if !usable(i, j, k) {
                continue;
            }
            for c in ControlPair::ALL {
                let cost = duration(c);
                let dt = cost / substeps as f64;
                let mut q = spec.node_to_config(i, j, k)?;
                for _ in 0..substeps {
                    q = euler_step(car, q, c, dt);
                }
                if !bounds.contains(q.x, q.y) {
                    continue;
                }
                let (ti, tj, tk) = spec.nearest_node(q)?;
                let to = spec.index(ti, tj, tk);
                if to != from && (to == goal || usable(ti, tj, tk)) {
                    incoming[to].push((from, cost));
                }
            }
        }
        Ok(Self {
            spec: *spec,
            incoming,
            goal,
        })
    }

    pub fn goal(&self) -> usize {
        self.goal
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.incoming.iter().enumerate().flat_map(|(to, preds)| {
            preds
                .iter()
                .map(move |&(from, cost)| Edge { from, to, cost })
        })
    }

    /// Backward Dijkstra from the goal node.
    pub fn travel_times(&self) -> Field3 {
        let mut dist = vec![INF; self.spec.len()];
        let mut heap = BinaryHeap::new();
        dist[self.goal] = 0.0;
        heap.push(State {
            cost: 0.0,
            node: self.goal,
        });
        while let Some(State { cost, node }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            for &(pred, w) in &self.incoming[node] {
                let next = cost + w;
                if next < dist[pred] {
                    dist[pred] = next;
                    heap.push(State {
                        cost: next,
                        node: pred,
                    });
                }
            }
        }
        Field3::from_vec(self.spec, dist).expect("sized from spec")
    }
}

#[derive(Copy, Clone, PartialEq)]
struct State {
    cost: f64,
    node: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| self.node.cmp(&other.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn dijkstra_travel_time(scene: &Scene, spec: &GridSpec, step_count: usize) -> Result<Field3> {
    Ok(ControlGraph::build(scene, spec, step_count)?.travel_times())
}

/// Discrepancy statistics between two fields on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldComparison {
    pub both_finite: usize,
    pub only_first_finite: usize,
    pub only_second_finite: usize,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub median_abs: f64,
    pub p90_abs: f64,
    pub p99_abs: f64,
}

pub fn compare_fields(a: &Field3, b: &Field3) -> Result<FieldComparison> {
    if a.spec() != b.spec() {
        return Err(Error::Compatibility(
            "fields live on different grids".into(),
        ));
    }
    let mut diffs = Vec::new();
    let (mut only_a, mut only_b) = (0, 0);
    for (&x, &y) in a.data().iter().zip(b.data()) {
        match (is_inf(x), is_inf(y)) {
            (false, false) => diffs.push((x - y).abs()),
            (false, true) => only_a += 1,
            (true, false) => only_b += 1,
            (true, true) => {}
        }
    }
    diffs.sort_by(f64::total_cmp);
    let pct = |p: f64| {
        if diffs.is_empty() {
            0.0
        } else {
            diffs[((diffs.len() - 1) as f64 * p).round() as usize]
        }
    };
    Ok(FieldComparison {
        both_finite: diffs.len(),
        only_first_finite: only_a,
        only_second_finite: only_b,
        max_abs: diffs.last().copied().unwrap_or(0.0),
        mean_abs: if diffs.is_empty() {
            0.0
        } else {
            diffs.iter().sum::<f64>() / diffs.len() as f64
        },
        median_abs: pct(0.5),
        p90_abs: pct(0.9),
        p99_abs: pct(0.99),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CarParams, ConvexPolygon, ObstacleSet};
    use crate::grid::{Bounds, Config};

    fn free_scene() -> Scene {
        Scene::new(
            Bounds::new(-1.0, 1.0, -1.0, 1.0),
            CarParams::new(0.04, 0.07, 4.0).unwrap(),
            ObstacleSet::default(),
            Config::new(0.5, 0.5, 0.0),
        )
    }

    fn grid() -> GridSpec {
        GridSpec::new(Bounds::new(-1.0, 1.0, -1.0, 1.0), 24, 24, 16).unwrap()
    }

    #[test]
    fn goal_is_zero_and_lane_is_exact() {
        let spec = grid();
        let step = 1;
        let g = ControlGraph::build(&free_scene(), &spec, step).unwrap();
        let f = g.travel_times();
        let (gi, gj, gk) = spec.nearest_node(free_scene().goal).unwrap();
        assert_eq!(f.get(gi, gj, gk), 0.0);
        let edge = step as f64 * spec.dx();
        for i in 1..spec.ni() {
            let x = spec.node_to_config(i, gj, 0).unwrap().x;
            let v = f.get(i, gj, 0);
            assert!((v - (x - 0.5).abs()).abs() <= edge + 1e-9, "x={x}: {v}");
        }
    }

    #[test]
    fn oracle_is_a_bellman_fixed_point() {
        let spec = grid();
        let g = ControlGraph::build(&free_scene(), &spec, 2).unwrap();
        let f = g.travel_times();
        let mut best = vec![INF; spec.len()];
        best[g.goal()] = 0.0;
        for e in g.edges() {
            assert!(e.cost > 0.0);
            let via = if is_inf(f.data()[e.to]) {
                INF
            } else {
                e.cost + f.data()[e.to]
            };
            best[e.from] = best[e.from].min(via);
        }
        for (n, (&b, &v)) in best.iter().zip(f.data()).enumerate() {
            if is_inf(v) {
                assert!(is_inf(b), "node {n}");
            } else {
                assert!((b - v).abs() < 1e-12, "node {n}: {b} vs {v}");
            }
        }
    }

    #[test]
    fn unreachable_nodes_stay_infinite() {
        let spec = grid();
        let mut scene = free_scene();
        // a closed box around a pocket at the lower left
        scene.obstacles = ObstacleSet::new(vec![
            ConvexPolygon::rect(-1.2, -0.3, -0.2, -0.2).unwrap(),
            ConvexPolygon::rect(-0.3, -1.2, -0.2, -0.2).unwrap(),
        ]);
        let f = dijkstra_travel_time(&scene, &spec, 1).unwrap();
        let (i, j, _) = spec.nearest_node(Config::new(-0.6, -0.6, 0.0)).unwrap();
        for k in 0..spec.nk() {
            assert!(is_inf(f.get(i, j, k)));
        }
        for i in 0..=spec.ni() {
            for k in 0..spec.nk() {
                assert!(is_inf(f.get(i, 0, k)));
            }
        }
    }

    #[test]
    fn comparison_statistics() {
        let spec = GridSpec::new(Bounds::new(0.0, 1.0, 0.0, 1.0), 4, 4, 4).unwrap();
        let a = Field3::from_fn(spec, |q| q.x);
        let mut b = Field3::from_fn(spec, |q| q.x + 0.5);
        b.set(0, 0, 0, INF);
        let c = compare_fields(&a, &b).unwrap();
        assert_eq!(c.only_first_finite, 1);
        assert_eq!(c.both_finite, spec.len() - 1);
        assert!((c.median_abs - 0.5).abs() < 1e-12);
        assert!((c.max_abs - 0.5).abs() < 1e-12);
    }

    #[test]
    fn blocked_goal_is_an_error() {
        let mut scene = free_scene();
        scene.obstacles = ObstacleSet::new(vec![ConvexPolygon::rect(0.4, 0.4, 0.6, 0.6).unwrap()]);
        assert!(dijkstra_travel_time(&scene, &grid(), 1).is_err());
    }
}
