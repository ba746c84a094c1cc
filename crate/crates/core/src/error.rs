use thiserror::Error;

use crate::grid::Config;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid index ({i}, {j}, {k}) out of range for grid {ni}x{nj}x{nk}")]
    Index {
        i: usize,
        j: usize,
        k: usize,
        ni: usize,
        nj: usize,
        nk: usize,
    },

    #[error("point ({x}, {y}) lies outside the domain")]
    Domain { x: f64, y: f64 },

    #[error("gradient undefined at {0:?}: stencil touches an unreachable node")]
    GradientUndefined(Config),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("trajectory left the admissible set at t={t:.6}, configuration {config:?}")]
    Collision { t: f64, config: Config },

    #[error("configuration {0:?} has no finite travel time to the goal")]
    Unreachable(Config),

    #[error("scene {location}: {message}")]
    Scene { location: String, message: String },

    #[error("incompatible field container: {0}")]
    Compatibility(String),

    #[error("malformed field container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
