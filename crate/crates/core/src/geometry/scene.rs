use super::polytope::ConvexPolytope;
use super::Vec3;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub dim: usize,
    pub lo: Vec3,
    pub hi: Vec3,
    pub obstacles: Vec<ConvexPolytope>,
}

impl Scene {
    pub fn new(dim: usize, lo: Vec3, hi: Vec3, obstacles: Vec<ConvexPolytope>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidInput(format!("dimension must be 2 or 3, got {dim}")));
        }
        for k in 0..dim {
            if !(hi[k] > lo[k]) {
                return Err(Error::InvalidInput("scene bounds are empty".into()));
            }
        }
        let mut lo = lo;
        let mut hi = hi;
        if dim == 2 {
            lo.z = 0.0;
            hi.z = 0.0;
        }
        let scene = Self { dim, lo, hi, obstacles };
        for o in &scene.obstacles {
            if o.dim() != dim {
                return Err(Error::DimensionMismatch);
            }
            if let Some((olo, ohi)) = o.bbox() {
                for k in 0..dim {
                    if olo[k] < lo[k] - 1e-9 || ohi[k] > hi[k] + 1e-9 {
                        return Err(Error::InvalidInput("obstacle extends beyond scene bounds".into()));
                    }
                }
            } else if !o.is_empty() {
                return Err(Error::InvalidInput("obstacle is unbounded".into()));
            }
        }
        Ok(scene)
    }

    pub fn bounds_polytope(&self) -> ConvexPolytope {
        ConvexPolytope::from_box(self.lo, self.hi, self.dim).expect("validated bounds")
    }

    pub fn diagonal(&self) -> f64 {
        (self.hi - self.lo).norm()
    }

    pub fn in_bounds(&self, x: &Vec3, eps: f64) -> bool {
        (0..self.dim).all(|k| x[k] >= self.lo[k] - eps && x[k] <= self.hi[k] + eps)
    }

    /// True when `x` lies strictly inside some obstacle (deeper than `eps`).
    pub fn in_obstacle(&self, x: &Vec3, eps: f64) -> bool {
        self.obstacles.iter().any(|o| o.violation(x) < -eps)
    }

    pub fn is_free(&self, x: &Vec3) -> bool {
        self.in_bounds(x, 0.0) && !self.in_obstacle(x, 0.0)
    }

    /// Uniform scaling about the origin.
    pub fn scaled(&self, f: f64) -> Result<Self> {
        let obstacles = self
            .obstacles
            .iter()
            .map(|o| ConvexPolytope::new(self.dim, o.rows().to_vec(), o.offsets().iter().map(|b| b * f).collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.dim, self.lo * f, self.hi * f, obstacles)
    }
}
