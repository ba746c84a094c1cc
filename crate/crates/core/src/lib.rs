//! Time-optimal path planning for a rectangular car with a bounded turning
//! rate.
//!
//! The minimum travel time `u(x, y, θ)` to a goal configuration is computed
//! on a uniform grid by monotone upwind Gauss-Seidel sweeping of the
//! Hamilton-Jacobi-Bellman equation, with configurations whose footprint
//! touches an obstacle excluded. Optimal trajectories from any start are then
//! recovered from the bang-bang feedback law on the interpolated field.
//!
//! ```no_run
//! use carplan::{scene, solver, trajectory, grid::GridSpec};
//!
//! let scene = scene::bundled("paper_free").unwrap();
//! let spec = GridSpec::new(scene.bounds, 100, 100, 100).unwrap();
//! let result = solver::solve(&scene, spec, Default::default()).unwrap();
//! let tracer = trajectory::Tracer::new(&result, &scene);
//! let path = tracer
//!     .integrate(scene.start("lane").unwrap(), &trajectory::TraceParams::for_grid(&spec))
//!     .unwrap();
//! println!("{} s, {} kinks", path.duration, path.kink_count);
//! ```

pub mod error;
pub mod export;
pub mod field_io;
pub mod geometry;
pub mod grid;
pub mod oracle;
pub mod render;
pub mod scene;
pub mod solver;
pub mod trajectory;

pub use error::{Error, Result};
pub use geometry::CarParams;
pub use grid::{Config, Field3, GridSpec, INF};
pub use scene::Scene;
pub use solver::{solve, ControlPair, SolveResult, SolverParams};
pub use trajectory::{TraceParams, Tracer, Trajectory};
