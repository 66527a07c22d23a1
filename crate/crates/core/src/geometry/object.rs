use super::polytope::ConvexPolytope;
use super::rotation::RotationTable;
use super::Vec3;
use crate::error::{Error, Result};

/// Pose: translation plus an index into the rotation table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Configuration {
    pub p: Vec3,
    pub rot: usize,
}

impl Configuration {
    pub fn new(p: Vec3, rot: usize) -> Self {
        Self { p, rot }
    }

    /// Bitwise identity, used for junction checks.
    pub fn same_as(&self, other: &Self) -> bool {
        self.rot == other.rot
            && self.p.x.to_bits() == other.p.x.to_bits()
            && self.p.y.to_bits() == other.p.y.to_bits()
            && self.p.z.to_bits() == other.p.z.to_bits()
    }
}

/// Rigid polytope object. Vertices are stored in the body frame, whose origin
/// is the object's center.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidObject {
    dim: usize,
    vertices: Vec<Vec3>,
    edges: Vec<(usize, usize)>,
    faces: Vec<[usize; 3]>,
}

impl RigidObject {
    /// `vertices` and `center` in the same (file) frame. Edges implied by
    /// faces are added automatically.
    pub fn new(dim: usize, vertices: Vec<Vec3>, edges: Vec<(usize, usize)>, faces: Vec<[usize; 3]>, center: Vec3) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidInput(format!("dimension must be 2 or 3, got {dim}")));
        }
        if vertices.is_empty() {
            return Err(Error::InvalidInput("object has no vertices".into()));
        }
        let n = vertices.len();
        let mut all_edges: Vec<(usize, usize)> = Vec::new();
        let add = |a: usize, b: usize, all: &mut Vec<(usize, usize)>| -> Result<()> {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidInput(format!("bad edge ({a}, {b})")));
            }
            let e = (a.min(b), a.max(b));
            if !all.contains(&e) {
                all.push(e);
            }
            Ok(())
        };
        for &(a, b) in &edges {
            add(a, b, &mut all_edges)?;
        }
        for f in &faces {
            add(f[0], f[1], &mut all_edges)?;
            add(f[1], f[2], &mut all_edges)?;
            add(f[2], f[0], &mut all_edges)?;
        }
        if all_edges.is_empty() && n > 1 {
            return Err(Error::InvalidInput("object needs edges".into()));
        }
        let mut obj = Self {
            dim,
            vertices: vertices
                .iter()
                .map(|v| {
                    let mut w = v - center;
                    if dim == 2 {
                        w.z = 0.0;
                    }
                    w
                })
                .collect(),
            edges: all_edges,
            faces,
        };
        if !obj.is_connected() {
            return Err(Error::InvalidInput("object edge graph is not connected".into()));
        }
        if !obj.center_inside() {
            return Err(Error::InvalidInput(
                "object center lies outside the object; give an explicit `c` line with an interior point".into(),
            ));
        }
        obj.edges.sort();
        Ok(obj)
    }

    /// Closed polygon from an ordered vertex loop (2D).
    pub fn polygon(vertices: Vec<Vec3>, center: Option<Vec3>) -> Result<Self> {
        let n = vertices.len();
        let edges = (0..n).map(|i| (i, (i + 1) % n)).collect();
        let c = center.unwrap_or_else(|| centroid(&vertices));
        Self::new(2, vertices, edges, Vec::new(), c)
    }

    /// Axis-aligned rectangle `w × h` centered at the origin.
    pub fn rectangle(w: f64, h: f64) -> Self {
        let (x, y) = (w / 2.0, h / 2.0);
        Self::polygon(
            vec![Vec3::new(-x, -y, 0.0), Vec3::new(x, -y, 0.0), Vec3::new(x, y, 0.0), Vec3::new(-x, y, 0.0)],
            Some(Vec3::zeros()),
        )
        .expect("rectangle is valid")
    }

    /// Axis-aligned box `w × h × d` as a triangulated mesh centered at the origin.
    pub fn cuboid(w: f64, h: f64, d: f64) -> Self {
        let (x, y, z) = (w / 2.0, h / 2.0, d / 2.0);
        let v: Vec<Vec3> = (0..8)
            .map(|i| {
                Vec3::new(
                    if i & 1 == 0 { -x } else { x },
                    if i & 2 == 0 { -y } else { y },
                    if i & 4 == 0 { -z } else { z },
                )
            })
            .collect();
        let quads = [[0, 2, 3, 1], [4, 5, 7, 6], [0, 1, 5, 4], [2, 6, 7, 3], [0, 4, 6, 2], [1, 3, 7, 5]];
        let mut faces = Vec::new();
        for q in quads {
            faces.push([q[0], q[1], q[2]]);
            faces.push([q[0], q[2], q[3]]);
        }
        Self::new(3, v, Vec::new(), faces, Vec3::zeros()).expect("cuboid is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn max_radius(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Longest extent between two vertices.
    pub fn length(&self) -> f64 {
        let mut best: f64 = 0.0;
        for a in &self.vertices {
            for b in &self.vertices {
                best = best.max((a - b).norm());
            }
        }
        best
    }

    /// Smallest side of the body-frame bounding box (ignoring flat axes).
    pub fn min_extent(&self) -> f64 {
        let (lo, hi) = self.bbox();
        (0..self.dim).map(|k| hi[k] - lo[k]).filter(|e| *e > 1e-12).fold(f64::INFINITY, f64::min)
    }

    pub fn bbox(&self) -> (Vec3, Vec3) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// World-frame vertex positions `R·v + p`.
    pub fn transform(&self, q: &Configuration, table: &RotationTable) -> Vec<Vec3> {
        let r = table.get(q.rot);
        self.vertices.iter().map(|v| r * v + q.p).collect()
    }

    /// Canonical text of the vertex list (fingerprinting input).
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.vertices.len() as u32).to_le_bytes());
        for v in &self.vertices {
            for k in 0..3 {
                out.extend_from_slice(&v[k].to_le_bytes());
            }
        }
        out
    }

    fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &(a, b) in &self.edges {
                let w = if a == u {
                    b
                } else if b == u {
                    a
                } else {
                    continue;
                };
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|s| *s)
    }

    /// The origin (center) must lie in the object: on the segment for a
    /// stick, inside the outline polygon when the edges form one cycle,
    /// otherwise inside the convex hull.
    fn center_inside(&self) -> bool {
        let o = Vec3::zeros();
        let vs = &self.vertices;
        if vs.len() == 1 {
            return vs[0].norm() < 1e-9;
        }
        if self.dim == 2 {
            if vs.len() == 2 {
                let d = vs[1] - vs[0];
                let s = (-vs[0]).dot(&d) / d.norm_squared();
                return (0.0..=1.0).contains(&s) && (vs[0] + d * s).norm() < 1e-9;
            }
            if let Some(cycle) = self.outline_cycle() {
                return point_in_polygon(&o, &cycle.iter().map(|&i| vs[i]).collect::<Vec<_>>());
            }
        }
        match ConvexPolytope::from_points(self.dim, vs) {
            Ok(h) => h.contains(&o, 1e-9),
            Err(_) => false,
        }
    }

    /// Vertex order of the boundary loop when every vertex has degree two.
    pub fn outline_cycle(&self) -> Option<Vec<usize>> {
        let n = self.vertices.len();
        if self.edges.len() != n || n < 3 {
            return None;
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        if adj.iter().any(|a| a.len() != 2) {
            return None;
        }
        let mut cycle = vec![0];
        let mut prev = 0;
        let mut cur = adj[0][0];
        while cur != 0 {
            cycle.push(cur);
            let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
            prev = cur;
            cur = next;
            if cycle.len() > n {
                return None;
            }
        }
        (cycle.len() == n).then_some(cycle)
    }
}

pub fn centroid(pts: &[Vec3]) -> Vec3 {
    pts.iter().fold(Vec3::zeros(), |a, p| a + p) / pts.len().max(1) as f64
}

/// Even-odd test with boundary counted as inside.
pub fn point_in_polygon(x: &Vec3, poly: &[Vec3]) -> bool {
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let d = b - a;
        let cross = d.x * (x.y - a.y) - d.y * (x.x - a.x);
        let s = (x - a).dot(&d) / d.norm_squared().max(1e-300);
        if cross.abs() < 1e-12 && (-1e-12..=1.0 + 1e-12).contains(&s) {
            return true;
        }
    }
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.y > x.y) != (b.y > x.y) {
            let t = (x.y - a.y) / (b.y - a.y);
            if x.x < a.x + t * (b.x - a.x) {
                inside = !inside;
            }
        }
    }
    inside
}

pub fn transform_object(obj: &RigidObject, q: &Configuration, table: &RotationTable) -> Vec<Vec3> {
    obj.transform(q, table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_turn_negates() {
        let o = RigidObject::rectangle(1.2, 0.1);
        let t = RotationTable::planar(12).unwrap();
        let p = Vec3::new(2.0, 3.0, 0.0);
        let w = o.transform(&Configuration::new(p, 6), &t);
        for (v, x) in o.vertices().iter().zip(&w) {
            assert!((x - (p - v)).norm() < 1e-12);
        }
        let id = o.transform(&Configuration::new(Vec3::zeros(), 0), &t);
        assert_eq!(id, o.vertices());
    }

    #[test]
    fn l_shape_needs_explicit_center() {
        let l = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.2, 0.0, 0.0),
            Vec3::new(1.2, 0.1, 0.0),
            Vec3::new(0.1, 0.1, 0.0),
            Vec3::new(0.1, 0.8, 0.0),
            Vec3::new(0.0, 0.8, 0.0),
        ];
        assert!(RigidObject::polygon(l.clone(), None).is_err());
        assert!(RigidObject::polygon(l, Some(Vec3::new(0.05, 0.05, 0.0))).is_ok());
    }

    #[test]
    fn disconnected_rejected() {
        let v = vec![
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 2.0, 0.0),
        ];
        assert!(RigidObject::new(2, v, vec![(0, 1), (2, 3)], vec![], Vec3::zeros()).is_err());
    }

    #[test]
    fn cuboid_counts() {
        let c = RigidObject::cuboid(1.0, 0.8, 0.1);
        assert_eq!(c.vertices().len(), 8);
        assert_eq!(c.faces().len(), 12);
        assert_eq!(c.edges().len(), 18);
        assert!((c.min_extent() - 0.1).abs() < 1e-12);
    }
}
