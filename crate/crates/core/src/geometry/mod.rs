//! Polytopes, rigid objects, rotations and scenes.
//!
//! Points are `Vec3` in both dimensions; 2D values keep z = 0.

mod facets;
mod object;
mod polytope;
mod ring;
mod rotation;
mod scene;

pub use facets::{facets_3d, Facet};
pub use object::{centroid, point_in_polygon, transform_object, Configuration, RigidObject};
pub use polytope::{affine_dim_of, ConvexPolytope, EMPTY_RADIUS};
pub use ring::{boundary_ring_2d, BoundaryRing, RingKind};
pub use rotation::{rot_z, RotationTable};
pub use scene::Scene;

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

/// Default containment tolerance in workspace units.
pub const DEFAULT_EPS: f64 = 1e-7;

pub fn chebyshev_center(p: &ConvexPolytope) -> crate::Result<(Vec3, f64)> {
    p.chebyshev_center()
}

pub fn intersect(p1: &ConvexPolytope, p2: &ConvexPolytope) -> crate::Result<ConvexPolytope> {
    p1.intersect(p2)
}

pub fn contains_point(p: &ConvexPolytope, x: &Vec3, eps: f64) -> bool {
    p.contains(x, eps)
}
