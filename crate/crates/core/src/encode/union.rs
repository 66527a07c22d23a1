//! Direct (non-MILP) certificates that a segment, triangle or convex
//! quadrilateral lies in the union of two convex polytopes.

use crate::error::{Error, Result};
use crate::geometry::{ConvexPolytope, Vec3};

/// Parameter interval of the segment inside `p1 ∩ p2`.
fn overlap_interval(p1: &ConvexPolytope, p2: &ConvexPolytope, xa: &Vec3, xb: &Vec3, eps: f64) -> Option<(f64, f64)> {
    let (l1, h1) = p1.segment_interval(xa, xb, eps)?;
    let (l2, h2) = p2.segment_interval(xa, xb, eps)?;
    let lo = l1.max(l2);
    let hi = h1.min(h2);
    (lo <= hi).then_some((lo, hi))
}

/// Condition (1): both endpoints in one polytope. Condition (2): endpoints
/// in different polytopes and some point of the segment in both.
pub fn check_segment_in_union(p1: &ConvexPolytope, p2: &ConvexPolytope, xa: &Vec3, xb: &Vec3, eps: f64) -> bool {
    let a1 = p1.contains(xa, eps);
    let a2 = p2.contains(xa, eps);
    let b1 = p1.contains(xb, eps);
    let b2 = p2.contains(xb, eps);
    if (a1 && b1) || (a2 && b2) {
        return true;
    }
    ((a1 && b2) || (a2 && b1)) && overlap_interval(p1, p2, xa, xb, eps).is_some()
}

pub fn check_triangle_in_union(p1: &ConvexPolytope, p2: &ConvexPolytope, tri: &[Vec3; 3], eps: f64) -> bool {
    (0..3).all(|i| check_segment_in_union(p1, p2, &tri[i], &tri[(i + 1) % 3], eps))
}

/// Vertices must be in cyclic order and form a convex (planar) quadrilateral.
pub fn check_quad_in_union(p1: &ConvexPolytope, p2: &ConvexPolytope, quad: &[Vec3; 4], eps: f64) -> Result<bool> {
    if !is_convex_quad(quad) {
        return Err(Error::NonConvexQuad);
    }
    Ok((0..4).all(|i| check_segment_in_union(p1, p2, &quad[i], &quad[(i + 1) % 4], eps)))
}

pub fn is_convex_quad(q: &[Vec3; 4]) -> bool {
    let scale = q.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let n = (q[1] - q[0]).cross(&(q[2] - q[0])) + (q[2] - q[0]).cross(&(q[3] - q[0]));
    if n.norm() < 1e-12 * scale * scale {
        return false;
    }
    let n = n.normalize();
    // Planarity.
    if (0..4).any(|i| (q[i] - q[0]).dot(&n).abs() > 1e-9 * scale) {
        return false;
    }
    (0..4).all(|i| {
        let a = q[(i + 1) % 4] - q[i];
        let b = q[(i + 2) % 4] - q[(i + 1) % 4];
        a.cross(&b).dot(&n) > 1e-12 * scale * scale
    })
}
