use std::f64::consts::PI;

use super::Mat3;
use crate::error::{Error, Result};

/// Discrete rotation set. In 2D entry `k` is the rotation by `k·2π/n_R`
/// about z (entry 0 is the identity); in 3D the table is the 24-element
/// rotation group of the cube, identity first.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationTable {
    dim: usize,
    mats: Vec<Mat3>,
}

impl RotationTable {
    pub fn planar(n_r: usize) -> Result<Self> {
        if n_r == 0 {
            return Err(Error::InvalidInput("n_R must be positive".into()));
        }
        let mats = (0..n_r).map(|k| rot_z(k as f64 * 2.0 * PI / n_r as f64)).collect();
        Ok(Self { dim: 2, mats })
    }

    pub fn cube_group() -> Self {
        let mut mats = Vec::with_capacity(24);
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for p in perms {
            for signs in 0..8u32 {
                let mut m = Mat3::zeros();
                for (row, &col) in p.iter().enumerate() {
                    m[(row, col)] = if signs >> row & 1 == 1 { -1.0 } else { 1.0 };
                }
                if m.determinant() > 0.0 {
                    mats.push(m);
                }
            }
        }
        Self { dim: 3, mats }
    }

    /// Default table per dimension: 12 planar rotations or the cube group.
    pub fn for_dim(dim: usize, n_r: usize) -> Result<Self> {
        match dim {
            2 => Self::planar(n_r),
            3 if n_r == 24 => Ok(Self::cube_group()),
            3 => Err(Error::InvalidInput("3D rotation table must have 24 entries".into())),
            _ => Err(Error::InvalidInput(format!("unsupported dimension {dim}"))),
        }
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize) -> &Mat3 {
        &self.mats[k]
    }

    pub fn mats(&self) -> &[Mat3] {
        &self.mats
    }

    /// Angular step of a planar table.
    pub fn step(&self) -> f64 {
        2.0 * PI / self.mats.len() as f64
    }

    pub fn angle(&self, k: usize) -> f64 {
        k as f64 * self.step()
    }

    /// Signed shortest index difference `to − from` on the planar circle.
    pub fn signed_diff(&self, from: usize, to: usize) -> i64 {
        let n = self.mats.len() as i64;
        let mut d = (to as i64 - from as i64).rem_euclid(n);
        if d > n / 2 {
            d -= n;
        }
        d
    }
}

pub fn rot_z(theta: f64) -> Mat3 {
    let (s, c) = theta.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}
