use super::polytope::{affine_dim_of, ConvexPolytope};
use super::Vec3;
use crate::error::{Error, Result};

/// Planar polygon on the boundary of a 3D polytope.
#[derive(Debug, Clone)]
pub struct Facet {
    pub normal: Vec3,
    pub offset: f64,
    /// Counterclockwise when viewed from outside (against `normal`).
    pub vertices: Vec<Vec3>,
}

impl Facet {
    /// Orthonormal in-plane axes (u along the first edge).
    pub fn frame(&self) -> (Vec3, Vec3) {
        let u = (self.vertices[1] - self.vertices[0]).normalize();
        let v = self.normal.cross(&u).normalize();
        (u, v)
    }
}

fn order_in_plane(pts: &[Vec3], normal: &Vec3) -> Vec<Vec3> {
    let c = pts.iter().fold(Vec3::zeros(), |a, p| a + p) / pts.len() as f64;
    let u = (pts.iter().max_by(|a, b| (*a - c).norm().total_cmp(&(*b - c).norm())).unwrap() - c).normalize();
    let v = normal.cross(&u);
    let mut out = pts.to_vec();
    out.sort_by(|a, b| {
        let aa = (a - c).dot(&v).atan2((a - c).dot(&u));
        let ab = (b - c).dot(&v).atan2((b - c).dot(&u));
        aa.total_cmp(&ab)
    });
    out
}

pub fn facets_3d(p: &ConvexPolytope) -> Result<Vec<Facet>> {
    if p.dim() != 3 {
        return Err(Error::DimensionMismatch);
    }
    if p.is_empty() {
        return Err(Error::EmptyPolytope);
    }
    let vs = p.vertices();
    match affine_dim_of(&vs) {
        Some(3) => {}
        Some(2) => {
            let n = (vs[1] - vs[0]).cross(&(vs[2] - vs[0]));
            let n = vs
                .iter()
                .skip(2)
                .map(|w| (vs[1] - vs[0]).cross(&(w - vs[0])))
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .unwrap_or(n)
                .normalize();
            let offset = n.dot(&vs[0]);
            return Ok(vec![Facet {
                normal: n,
                offset,
                vertices: order_in_plane(&vs, &n),
            }]);
        }
        _ => return Err(Error::DegenerateIntersection),
    }
    let mut out: Vec<Facet> = Vec::new();
    let mut seen: Vec<Vec<usize>> = Vec::new();
    for (r, b) in p.rows().iter().zip(p.offsets()) {
        let on: Vec<usize> = (0..vs.len()).filter(|&i| (r.dot(&vs[i]) - b).abs() < 1e-8).collect();
        if on.len() < 3 {
            continue;
        }
        let pts: Vec<Vec3> = on.iter().map(|&i| vs[i]).collect();
        if affine_dim_of(&pts) != Some(2) || seen.contains(&on) {
            continue;
        }
        seen.push(on);
        out.push(Facet {
            normal: *r,
            offset: *b,
            vertices: order_in_plane(&pts, r),
        });
    }
    Ok(out)
}
