//! Small LP/MILP machinery: dense simplex, sparse warm-started relaxations,
//! branch-and-bound with bound propagation.

pub mod bnb;
pub mod lp;
mod model;
pub mod propagate;

pub use bnb::{solve_milp, BnbOptions, LpEngine, NodeOrder, SearchMode};
pub use lp::LpError;
pub use model::{solve_lp, Constraint, MilpModel, MilpSolution, MilpStatus, Relation, Variable};

use crate::error::{Error, Result};
use crate::geometry::{RigidObject, Scene, Vec3};

const BIG_M_SAFETY: f64 = 10.0;

/// `10 · 2 · (scene diagonal + max vertex radius)`.
pub fn big_m_for(scene: &Scene, object: &RigidObject) -> Result<f64> {
    big_m_for_bounds(scene.lo, scene.hi, scene.dim, object.max_radius())
}

pub fn big_m_for_bounds(lo: Vec3, hi: Vec3, dim: usize, radius: f64) -> Result<f64> {
    if (0..dim).any(|k| !(hi[k] > lo[k])) {
        return Err(Error::EmptyBounds);
    }
    Ok(BIG_M_SAFETY * 2.0 * ((hi - lo).norm() + radius))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Scene;

    #[test]
    fn unit_scene_point_object() {
        let m = big_m_for_bounds(Vec3::zeros(), Vec3::new(1.0, 1.0, 0.0), 2, 0.0).unwrap();
        assert!((m - 20.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!(big_m_for_bounds(Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), 2, 0.0).is_err());
        let s1 = Scene::new(2, Vec3::zeros(), Vec3::new(1.0, 1.0, 0.0), vec![]).unwrap();
        let s2 = Scene::new(2, Vec3::zeros(), Vec3::new(2.0, 2.0, 0.0), vec![]).unwrap();
        let obj = RigidObject::polygon(
            vec![Vec3::new(-0.1, -0.1, 0.0), Vec3::new(0.1, -0.1, 0.0), Vec3::new(0.0, 0.1, 0.0)],
            Some(Vec3::zeros()),
        )
        .unwrap();
        let r = obj.max_radius();
        let m1 = big_m_for(&s1, &obj).unwrap() / 20.0 - r;
        let m2 = big_m_for(&s2, &obj).unwrap() / 20.0 - r;
        assert!((m2 - 2.0 * m1).abs() < 1e-12);
    }
}
