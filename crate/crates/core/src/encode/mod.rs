//! Union-containment certificates for segments, triangles and quads, their
//! interpolation-grid MILP blocks, and swept-boundary segment sets.

pub mod block;
pub mod reach;
pub mod union;

pub use block::{segment_block_satisfied, segment_constraints, AffinePoint, BVal, BlockOptions, ExprCtx, GroupInfo, SegmentBlock};
pub use reach::{
    reachable_boundary_2d, reachable_boundary_3d, static_segments, step_segments_milp, ArcApproxParams, Segment, SegmentKind, SegmentSet, SweptBoundary3d,
};
pub use union::{check_quad_in_union, check_segment_in_union, check_triangle_in_union, is_convex_quad};
