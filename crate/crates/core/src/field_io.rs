//! Binary container for a solved value field.
//!
//! All integers and floats are little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4     | magic `CPVF` |
//! | 4     | version `u32` (= 1) |
//! | 32    | domain `x_min, x_max, y_min, y_max` as `f64` |
//! | 12    | cell counts `I, J, K` as `u32` |
//! | 24    | car `R, d, W` as `f64` |
//! | 24    | goal `x, y, θ` as `f64` |
//! | 8     | INF sentinel `f64` |
//! | 12    | goal node `i, j, k` as `u32` |
//! | 4     | outer iterations `u32` |
//! | 8     | final residual `f64` |
//! | 8     | tolerance `eps` `f64` |
//! | 1     | converged flag `u8` |
//! | 8·N   | values `u`, `N = (I+1)(J+1)K`, node order as in [`GridSpec::index`] |
//! | N     | recorded `v` as `i8` |
//! | N     | recorded `ω` as `i8` |

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::CarParams;
use crate::grid::{Bounds, Config, Field3, GridSpec, INF};
use crate::scene::Scene;
use crate::solver::SolveResult;

pub const MAGIC: [u8; 4] = *b"CPVF";
pub const VERSION: u32 = 1;

/// A solve result together with the problem data it was computed for.
#[derive(Debug, Clone)]
pub struct SavedField {
    pub result: SolveResult,
    pub car: CarParams,
    pub goal: Config,
    pub eps: f64,
}

impl SavedField {
    /// Errors unless the field was solved for this scene's domain, car and
    /// goal.
    pub fn check_compatible(&self, scene: &Scene) -> Result<()> {
        let spec = self.result.spec();
        if spec.bounds() != scene.bounds {
            return Err(Error::Compatibility(format!(
                "field domain {:?} differs from scene domain {:?}",
                spec.bounds(),
                scene.bounds
            )));
        }
        if self.car != scene.car {
            return Err(Error::Compatibility(format!(
                "field car {:?} differs from scene car {:?}",
                self.car, scene.car
            )));
        }
        if self.goal != scene.goal {
            return Err(Error::Compatibility(format!(
                "field goal {:?} differs from scene goal {:?}",
                self.goal, scene.goal
            )));
        }
        Ok(())
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let r = &self.result;
        let spec = r.spec();
        let b = spec.bounds();
        let mut buf = Vec::with_capacity(160 + spec.len() * 10);
        buf.extend_from_slice(&MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        for v in [b.x_min, b.x_max, b.y_min, b.y_max] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        for n in [spec.ni(), spec.nj(), spec.nk()] {
            buf.extend_from_slice(&(n as u32).to_le_bytes());
        }
        for v in [
            self.car.half_width,
            self.car.axle_offset,
            self.car.max_turn_rate,
            self.goal.x,
            self.goal.y,
            self.goal.theta,
            INF,
        ] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let (gi, gj, gk) = r.goal_node;
        for n in [gi, gj, gk, r.outer_iterations] {
            buf.extend_from_slice(&(n as u32).to_le_bytes());
        }
        buf.extend_from_slice(&r.final_residual.to_le_bytes());
        buf.extend_from_slice(&self.eps.to_le_bytes());
        buf.push(r.converged as u8);
        for v in r.u.data() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf.extend(r.v_opt.iter().map(|&v| v as u8));
        buf.extend(r.w_opt.iter().map(|&v| v as u8));
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let mut cur = Cursor {
            bytes: &bytes,
            pos: 0,
        };
        if cur.take(4)? != MAGIC {
            return Err(Error::Format(
                "bad magic; not a value-field container".into(),
            ));
        }
        let version = cur.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!(
                "unsupported container version {version}"
            )));
        }
        let bounds = Bounds::new(cur.f64()?, cur.f64()?, cur.f64()?, cur.f64()?);
        let (ni, nj, nk) = (
            cur.u32()? as usize,
            cur.u32()? as usize,
            cur.u32()? as usize,
        );
        let spec = GridSpec::new(bounds, ni, nj, nk)?;
        let car = CarParams::new(cur.f64()?, cur.f64()?, cur.f64()?)?;
        let goal = Config::new(cur.f64()?, cur.f64()?, cur.f64()?);
        let inf = cur.f64()?;
        if inf != INF {
            return Err(Error::Compatibility(format!(
                "container uses INF sentinel {inf}, this build uses {INF}"
            )));
        }
        let goal_node = (
            cur.u32()? as usize,
            cur.u32()? as usize,
            cur.u32()? as usize,
        );
        let outer_iterations = cur.u32()? as usize;
        let final_residual = cur.f64()?;
        let eps = cur.f64()?;
        let converged = cur.take(1)?[0] != 0;
        let n = spec.len();
        let data = cur
            .take(8 * n)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let v_opt = cur.take(n)?.iter().map(|&b| b as i8).collect();
        let w_opt = cur.take(n)?.iter().map(|&b| b as i8).collect();
        if cur.pos != bytes.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes after field data",
                bytes.len() - cur.pos
            )));
        }
        Ok(Self {
            result: SolveResult {
                u: Field3::from_vec(spec, data)?,
                v_opt,
                w_opt,
                outer_iterations,
                final_residual,
                converged,
                goal_node,
            },
            car,
            goal,
            eps,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::Format(format!(
                "truncated container: needed {end} bytes, have {}",
                self.bytes.len()
            )));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConvexPolygon, ObstacleSet};
    use crate::solver::{solve, SolverParams};

    fn saved() -> (Scene, SavedField) {
        let scene = Scene::new(
            Bounds::new(-1.0, 1.0, -1.0, 1.0),
            CarParams::new(0.04, 0.07, 4.0).unwrap(),
            ObstacleSet::new(vec![ConvexPolygon::rect(-0.4, -0.4, -0.1, 0.0).unwrap()]),
            Config::new(0.5, 0.5, 0.0),
        );
        scene.validate().unwrap();
        let spec = GridSpec::new(scene.bounds, 12, 10, 8).unwrap();
        let params = SolverParams::default();
        let result = solve(&scene, spec, params.clone()).unwrap();
        let s = SavedField {
            result,
            car: scene.car,
            goal: scene.goal,
            eps: params.eps,
        };
        (scene, s)
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let (_, s) = saved();
        let mut a = Vec::new();
        s.write_to(&mut a).unwrap();
        let back = SavedField::read_from(a.as_slice()).unwrap();
        let mut b = Vec::new();
        back.write_to(&mut b).unwrap();
        assert_eq!(a, b);
        assert_eq!(back.result.u, s.result.u);
        assert_eq!(back.result.v_opt, s.result.v_opt);
        assert_eq!(&a[..4], b"CPVF");
    }

    #[test]
    fn detects_corruption_and_mismatch() {
        let (scene, s) = saved();
        let mut a = Vec::new();
        s.write_to(&mut a).unwrap();
        assert!(matches!(
            SavedField::read_from(&a[..a.len() - 1]),
            Err(Error::Format(_))
        ));
        let mut bad = a.clone();
        bad[0] = b'X';
        assert!(matches!(
            SavedField::read_from(bad.as_slice()),
            Err(Error::Format(_))
        ));

        s.check_compatible(&scene).unwrap();
        let mut other = scene.clone();
        other.car.axle_offset = 0.0;
        assert!(matches!(
            s.check_compatible(&other),
            Err(Error::Compatibility(_))
        ));
        let mut other = scene;
        other.goal = Config::new(0.4, 0.5, 0.0);
        assert!(matches!(
            s.check_compatible(&other),
            Err(Error::Compatibility(_))
        ));
    }
}
