//! Multi-query rigid-body motion planning over a convex cover of free space.
//!
//! Offline, [`decompose`] grows obstacle-free polytopes and links the
//! overlapping ones; [`densegraph`] discretizes every overlap boundary into
//! configuration patches and certifies patch-to-patch motions with small
//! MILPs built by [`encode`]. Online, [`query`] attaches start and goal and
//! runs Dijkstra over the certified roadmap.

pub mod bench;
pub mod decompose;
pub mod densegraph;
pub mod encode;
mod error;
pub mod geometry;
pub mod io;
pub mod milp;
pub mod query;
pub mod render;

pub use error::{Error, Result};
pub use geometry::{Configuration, ConvexPolytope, RigidObject, RotationTable, Scene, Vec3};
