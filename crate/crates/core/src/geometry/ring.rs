use super::polytope::{affine_dim_of, ConvexPolytope};
use super::Vec3;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingKind {
    /// Full-dimensional polygon, counterclockwise.
    Polygon,
    /// Flat overlap: the ring walks the segment out and back.
    Segment,
    /// Overlap collapsed to a single point.
    Point,
}

/// Closed boundary loop parameterized by normalized arc length λ ∈ [0,1).
#[derive(Debug, Clone)]
pub struct BoundaryRing {
    pub kind: RingKind,
    pub vertices: Vec<Vec3>,
    /// λ at each vertex; `breaks[0] == 0`.
    pub breaks: Vec<f64>,
    pub perimeter: f64,
}

impl BoundaryRing {
    pub fn point_at(&self, lambda: f64) -> Vec3 {
        let n = self.vertices.len();
        if n == 1 || self.perimeter == 0.0 {
            return self.vertices[0];
        }
        let l = lambda.rem_euclid(1.0);
        let mut i = match self.breaks.binary_search_by(|b| b.total_cmp(&l)) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        i = i.min(n - 1);
        let next = (i + 1) % n;
        let end = if next == 0 { 1.0 } else { self.breaks[next] };
        let span = end - self.breaks[i];
        let t = if span > 0.0 { (l - self.breaks[i]) / span } else { 0.0 };
        self.vertices[i] + (self.vertices[next] - self.vertices[i]) * t
    }
}

fn from_loop(kind: RingKind, vertices: Vec<Vec3>) -> BoundaryRing {
    let n = vertices.len();
    let lens: Vec<f64> = (0..n).map(|i| (vertices[(i + 1) % n] - vertices[i]).norm()).collect();
    let perimeter: f64 = lens.iter().sum();
    let mut breaks = Vec::with_capacity(n);
    let mut acc = 0.0;
    for l in &lens {
        breaks.push(if perimeter > 0.0 { acc / perimeter } else { 0.0 });
        acc += l;
    }
    BoundaryRing {
        kind,
        vertices,
        breaks,
        perimeter,
    }
}

/// Boundary of a 2D intersection. The loop starts at the vertex with the
/// smallest (y, x) so the parameterization is reproducible.
pub fn boundary_ring_2d(p: &ConvexPolytope) -> Result<BoundaryRing> {
    if p.dim() != 2 {
        return Err(Error::DimensionMismatch);
    }
    if p.is_empty() {
        return Err(Error::EmptyPolytope);
    }
    let vs = p.vertices();
    match affine_dim_of(&vs) {
        None => Err(Error::EmptyPolytope),
        Some(0) => Ok(from_loop(RingKind::Point, vec![vs[0]])),
        Some(1) => {
            let (mut a, mut b) = (vs[0], vs[0]);
            let dir = vs.iter().map(|v| v - vs[0]).max_by(|x, y| x.norm().total_cmp(&y.norm())).unwrap();
            let dir = dir.normalize();
            let (mut lo, mut hi) = (0.0, 0.0);
            for v in &vs {
                let s = (v - vs[0]).dot(&dir);
                if s < lo {
                    lo = s;
                    a = *v;
                }
                if s > hi {
                    hi = s;
                    b = *v;
                }
            }
            let (a, b) = if (a.y, a.x) <= (b.y, b.x) { (a, b) } else { (b, a) };
            Ok(from_loop(RingKind::Segment, vec![a, b]))
        }
        Some(_) => {
            let c = vs.iter().fold(Vec3::zeros(), |acc, v| acc + v) / vs.len() as f64;
            let mut sorted = vs.clone();
            sorted.sort_by(|u, v| {
                let au = (u.y - c.y).atan2(u.x - c.x);
                let av = (v.y - c.y).atan2(v.x - c.x);
                au.total_cmp(&av)
            });
            let start = (0..sorted.len())
                .min_by(|&i, &j| (sorted[i].y, sorted[i].x).partial_cmp(&(sorted[j].y, sorted[j].x)).unwrap())
                .unwrap();
            sorted.rotate_left(start);
            Ok(from_loop(RingKind::Polygon, sorted))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(w: f64, h: f64) -> ConvexPolytope {
        ConvexPolytope::from_box(Vec3::zeros(), Vec3::new(w, h, 0.0), 2).unwrap()
    }

    #[test]
    fn unit_square_breaks() {
        let r = boundary_ring_2d(&rect(1.0, 1.0)).unwrap();
        assert_eq!(r.kind, RingKind::Polygon);
        let want = [0.0, 0.25, 0.5, 0.75];
        for (b, w) in r.breaks.iter().zip(want) {
            assert!((b - w).abs() < 1e-12);
        }
    }

    #[test]
    fn rectangle_breaks_follow_perimeter() {
        let r = boundary_ring_2d(&rect(2.0, 1.0)).unwrap();
        let want = [0.0, 1.0 / 3.0, 0.5, 5.0 / 6.0];
        for (b, w) in r.breaks.iter().zip(want) {
            assert!((b - w).abs() < 1e-12, "{:?}", r.breaks);
        }
        // Counterclockwise from the origin.
        assert!((r.point_at(0.1) - Vec3::new(0.6, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn wraps_around() {
        let r = boundary_ring_2d(&rect(2.0, 1.0)).unwrap();
        for l in [0.0, 0.13, 0.5, 0.99] {
            assert!((r.point_at(l) - r.point_at(l + 1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn flat_overlap_is_segment_ring() {
        let a = rect(1.0, 1.0);
        let b = ConvexPolytope::from_box(Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 1.0, 0.0), 2).unwrap();
        let r = boundary_ring_2d(&a.intersect(&b).unwrap()).unwrap();
        assert_eq!(r.kind, RingKind::Segment);
        assert!((r.perimeter - 2.0).abs() < 1e-9);
        assert!((r.point_at(0.5) - Vec3::new(1.0, 1.0, 0.0)).norm() < 1e-9);
    }
}
