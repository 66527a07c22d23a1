use super::Vec3;
use crate::error::{Error, Result};
use crate::milp::lp::{LinearProgram, LpError, Relation};

/// Radius below which an intersection counts as empty. Touching polytopes
/// (radius exactly zero up to round-off) are kept as degenerate overlaps.
pub const EMPTY_RADIUS: f64 = -1e-9;

/// `{x | a_r·x ≤ b_r}` with unit-length rows. 2D polytopes keep a zero z
/// component in every row so that all arithmetic is done on `Vec3`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPolytope {
    dim: usize,
    a: Vec<Vec3>,
    b: Vec<f64>,
    empty: bool,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("dimension must be 2 or 3, got {dim}")))
    }
}

impl ConvexPolytope {
    pub fn new(dim: usize, rows: Vec<Vec3>, b: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        if rows.len() != b.len() {
            return Err(Error::InvalidInput("row/offset count mismatch".into()));
        }
        let mut a = Vec::with_capacity(rows.len());
        let mut bb = Vec::with_capacity(rows.len());
        for (mut r, off) in rows.into_iter().zip(b) {
            if dim == 2 {
                r.z = 0.0;
            }
            let n = r.norm();
            if !(n > 1e-12) || !off.is_finite() {
                return Err(Error::InvalidInput("zero or non-finite half-space row".into()));
            }
            a.push(r / n);
            bb.push(off / n);
        }
        let mut p = Self { dim, a, b: bb, empty: false };
        p.empty = p.chebyshev_center().map(|(_, r)| r < EMPTY_RADIUS).unwrap_or(false);
        Ok(p)
    }

    /// Rows taken verbatim (already unit length), as stored in a roadmap file.
    pub(crate) fn from_raw(dim: usize, a: Vec<Vec3>, b: Vec<f64>, empty: bool) -> Result<Self> {
        check_dim(dim)?;
        if a.len() != b.len() {
            return Err(Error::InvalidInput("row/offset count mismatch".into()));
        }
        Ok(Self { dim, a, b, empty })
    }

    pub fn from_box(lo: Vec3, hi: Vec3, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let mut rows = Vec::new();
        let mut b = Vec::new();
        for k in 0..dim {
            let mut e = Vec3::zeros();
            e[k] = 1.0;
            rows.push(e);
            b.push(hi[k]);
            rows.push(-e);
            b.push(-lo[k]);
        }
        Self::new(dim, rows, b)
    }

    /// Convex hull of a point cloud (small inputs; brute-force facet search).
    pub fn from_points(dim: usize, pts: &[Vec3]) -> Result<Self> {
        check_dim(dim)?;
        let mut rows: Vec<Vec3> = Vec::new();
        let mut b: Vec<f64> = Vec::new();
        let scale = pts.iter().map(|p| p.norm()).fold(1.0, f64::max);
        let tol = 1e-9 * scale;
        let push = |n: Vec3, off: f64, rows: &mut Vec<Vec3>, b: &mut Vec<f64>| {
            let dup = rows.iter().zip(b.iter()).any(|(r, o)| (r - n).norm() < 1e-9 && (o - off).abs() < tol);
            if !dup {
                rows.push(n);
                b.push(off);
            }
        };
        let n_pts = pts.len();
        if dim == 2 {
            for i in 0..n_pts {
                for j in 0..n_pts {
                    let d = pts[j] - pts[i];
                    if i == j || d.norm() < tol {
                        continue;
                    }
                    let n = Vec3::new(d.y, -d.x, 0.0).normalize();
                    let off = n.dot(&pts[i]);
                    if pts.iter().all(|p| n.dot(p) <= off + tol) {
                        push(n, off, &mut rows, &mut b);
                    }
                }
            }
        } else {
            for i in 0..n_pts {
                for j in i + 1..n_pts {
                    for k in j + 1..n_pts {
                        let n = (pts[j] - pts[i]).cross(&(pts[k] - pts[i]));
                        if n.norm() < 1e-12 * scale * scale {
                            continue;
                        }
                        let n = n.normalize();
                        for s in [n, -n] {
                            let off = s.dot(&pts[i]);
                            if pts.iter().all(|p| s.dot(p) <= off + tol) {
                                push(s, off, &mut rows, &mut b);
                            }
                        }
                    }
                }
            }
        }
        if rows.len() < dim + 1 {
            return Err(Error::InvalidInput("point set does not span a full-dimensional hull".into()));
        }
        Self::new(dim, rows, b)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Vec3] {
        &self.a
    }

    pub fn offsets(&self) -> &[f64] {
        &self.b
    }

    pub fn n_rows(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    #[inline]
    pub fn contains(&self, x: &Vec3, eps: f64) -> bool {
        self.a.iter().zip(&self.b).all(|(r, b)| r.dot(x) <= b + eps)
    }

    /// Largest row violation `max_r a_r·x − b_r` (negative inside).
    #[inline]
    pub fn violation(&self, x: &Vec3) -> f64 {
        self.a.iter().zip(&self.b).map(|(r, b)| r.dot(x) - b).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest inscribed ball. A negative radius means the polytope is empty.
    pub fn chebyshev_center(&self) -> Result<(Vec3, f64)> {
        let mut lp = LinearProgram::new();
        let xs: Vec<usize> = (0..self.dim).map(|_| lp.add_var(0.0, f64::NEG_INFINITY, f64::INFINITY)).collect();
        let r = lp.add_var(-1.0, f64::NEG_INFINITY, f64::INFINITY);
        for (row, b) in self.a.iter().zip(&self.b) {
            let mut terms: Vec<(usize, f64)> = xs.iter().enumerate().map(|(k, &v)| (v, row[k])).collect();
            terms.push((r, 1.0));
            lp.add_row(terms, Relation::Le, *b);
        }
        match lp.solve() {
            Ok(opt) => {
                let mut c = Vec3::zeros();
                for (k, &v) in xs.iter().enumerate() {
                    c[k] = opt.x[v];
                }
                Ok((c, opt.x[r]))
            }
            Err(LpError::Unbounded) => Err(Error::UnboundedPolytope),
            Err(LpError::Infeasible) => Ok((Vec3::zeros(), f64::NEG_INFINITY)),
            Err(LpError::NumericalFailure) => Err(Error::Numerical("chebyshev center".into())),
        }
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch);
        }
        let mut a = self.a.clone();
        a.extend_from_slice(&other.a);
        let mut b = self.b.clone();
        b.extend_from_slice(&other.b);
        let mut p = Self {
            dim: self.dim,
            a,
            b,
            empty: false,
        };
        p.empty = match p.chebyshev_center() {
            Ok((_, r)) => r < EMPTY_RADIUS,
            Err(Error::UnboundedPolytope) => false,
            Err(e) => return Err(e),
        };
        Ok(p)
    }

    /// Shrinks every face inward by `d`.
    pub fn eroded(&self, d: f64) -> Self {
        let b: Vec<f64> = self.b.iter().map(|b| b - d).collect();
        let mut p = Self {
            dim: self.dim,
            a: self.a.clone(),
            b,
            empty: false,
        };
        p.empty = p.chebyshev_center().map(|(_, r)| r < EMPTY_RADIUS).unwrap_or(false);
        p
    }

    /// Maximum of `dir·x` over the polytope.
    pub fn support(&self, dir: &Vec3) -> Result<f64> {
        let mut lp = LinearProgram::new();
        let xs: Vec<usize> = (0..self.dim).map(|k| lp.add_var(-dir[k], f64::NEG_INFINITY, f64::INFINITY)).collect();
        for (row, b) in self.a.iter().zip(&self.b) {
            lp.add_row(xs.iter().enumerate().map(|(k, &v)| (v, row[k])).collect(), Relation::Le, *b);
        }
        match lp.solve() {
            Ok(opt) => Ok(-opt.objective),
            Err(LpError::Unbounded) => Err(Error::UnboundedPolytope),
            Err(LpError::Infeasible) => Err(Error::EmptyPolytope),
            Err(LpError::NumericalFailure) => Err(Error::Numerical("support".into())),
        }
    }

    /// Drops rows implied by the others (LP redundancy test).
    pub fn remove_redundant(&self) -> Self {
        let mut keep: Vec<bool> = vec![true; self.a.len()];
        for r in 0..self.a.len() {
            // Duplicate rows: keep the tighter, first on ties.
            let dup = (0..self.a.len())
                .any(|s| s != r && keep[s] && (self.a[s] - self.a[r]).norm() < 1e-12 && (self.b[s] < self.b[r] || (self.b[s] == self.b[r] && s < r)));
            if dup {
                keep[r] = false;
                continue;
            }
            let others: Vec<usize> = (0..self.a.len()).filter(|&s| s != r && keep[s]).collect();
            let mut lp = LinearProgram::new();
            let xs: Vec<usize> = (0..self.dim).map(|k| lp.add_var(-self.a[r][k], f64::NEG_INFINITY, f64::INFINITY)).collect();
            for &s in &others {
                lp.add_row(xs.iter().enumerate().map(|(k, &v)| (v, self.a[s][k])).collect(), Relation::Le, self.b[s]);
            }
            // Bound the relaxed problem slightly beyond row r so it stays bounded.
            lp.add_row(xs.iter().enumerate().map(|(k, &v)| (v, self.a[r][k])).collect(), Relation::Le, self.b[r] + 1.0);
            if let Ok(opt) = lp.solve() {
                if -opt.objective <= self.b[r] + 1e-9 {
                    keep[r] = false;
                }
            }
        }
        let a = self.a.iter().zip(&keep).filter(|(_, k)| **k).map(|(r, _)| *r).collect();
        let b = self.b.iter().zip(&keep).filter(|(_, k)| **k).map(|(r, _)| *r).collect();
        Self {
            dim: self.dim,
            a,
            b,
            empty: self.empty,
        }
    }

    /// Vertex enumeration by intersecting `dim`-subsets of rows.
    pub fn vertices(&self) -> Vec<Vec3> {
        let mut out: Vec<Vec3> = Vec::new();
        let m = self.a.len();
        let tol = 1e-9 * (1.0 + self.b.iter().fold(0.0f64, |acc, b| acc.max(b.abs())));
        let try_push = |x: Vec3, out: &mut Vec<Vec3>| {
            if self.contains(&x, tol) && !out.iter().any(|v| (v - x).norm() < 1e-9) {
                out.push(x);
            }
        };
        if self.dim == 2 {
            for i in 0..m {
                for j in i + 1..m {
                    let (a1, a2) = (self.a[i], self.a[j]);
                    let det = a1.x * a2.y - a1.y * a2.x;
                    if det.abs() < 1e-12 {
                        continue;
                    }
                    let x = (self.b[i] * a2.y - self.b[j] * a1.y) / det;
                    let y = (a1.x * self.b[j] - a2.x * self.b[i]) / det;
                    try_push(Vec3::new(x, y, 0.0), &mut out);
                }
            }
        } else {
            for i in 0..m {
                for j in i + 1..m {
                    for k in j + 1..m {
                        let mat = nalgebra::Matrix3::from_rows(&[self.a[i].transpose(), self.a[j].transpose(), self.a[k].transpose()]);
                        if mat.determinant().abs() < 1e-12 {
                            continue;
                        }
                        if let Some(inv) = mat.try_inverse() {
                            let x = inv * Vec3::new(self.b[i], self.b[j], self.b[k]);
                            try_push(x, &mut out);
                        }
                    }
                }
            }
        }
        out
    }

    /// Axis-aligned bounding box from the vertex set.
    pub fn bbox(&self) -> Option<(Vec3, Vec3)> {
        let vs = self.vertices();
        if vs.is_empty() {
            return None;
        }
        let mut lo = vs[0];
        let mut hi = vs[0];
        for v in &vs[1..] {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        Some((lo, hi))
    }

    /// Interval of `s ∈ [0,1]` with `xa + s(xb − xa)` inside (closed, eps-inflated).
    pub fn segment_interval(&self, xa: &Vec3, xb: &Vec3, eps: f64) -> Option<(f64, f64)> {
        let d = xb - xa;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for (r, b) in self.a.iter().zip(&self.b) {
            let slope = r.dot(&d);
            let rest = b + eps - r.dot(xa);
            if slope.abs() < 1e-15 {
                if rest < 0.0 {
                    return None;
                }
            } else if slope > 0.0 {
                hi = hi.min(rest / slope);
            } else {
                lo = lo.max(rest / slope);
            }
            if lo > hi {
                return None;
            }
        }
        Some((lo, hi))
    }

    /// Euclidean projection of `x` onto the polytope, by active-set enumeration
    /// over subsets of at most `dim` rows.
    pub fn closest_point(&self, x: &Vec3) -> Option<Vec3> {
        if self.contains(x, 0.0) {
            return Some(*x);
        }
        let m = self.a.len();
        let tol = 1e-9;
        let mut best: Option<(f64, Vec3)> = None;
        let consider = |y: Vec3, best: &mut Option<(f64, Vec3)>| {
            if self.contains(&y, tol) {
                let d = (y - x).norm();
                if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                    *best = Some((d, y));
                }
            }
        };
        let project = |idx: &[usize]| -> Option<Vec3> {
            // Solve min |y - x| s.t. a_i·y = b_i for i in idx: y = x - Aᵀλ, (A Aᵀ) λ = A x - b.
            let k = idx.len();
            let mut g = nalgebra::DMatrix::<f64>::zeros(k, k);
            let mut rhs = nalgebra::DVector::<f64>::zeros(k);
            for (p, &i) in idx.iter().enumerate() {
                for (q, &j) in idx.iter().enumerate() {
                    g[(p, q)] = self.a[i].dot(&self.a[j]);
                }
                rhs[p] = self.a[i].dot(x) - self.b[i];
            }
            let lam = g.lu().solve(&rhs)?;
            let mut y = *x;
            for (p, &i) in idx.iter().enumerate() {
                y -= self.a[i] * lam[p];
            }
            if lam.iter().any(|l| !l.is_finite()) {
                return None;
            }
            Some(y)
        };
        for i in 0..m {
            if let Some(y) = project(&[i]) {
                consider(y, &mut best);
            }
            for j in i + 1..m {
                if (self.a[i].cross(&self.a[j])).norm() < 1e-12 {
                    continue;
                }
                if let Some(y) = project(&[i, j]) {
                    consider(y, &mut best);
                }
                if self.dim == 3 {
                    for k in j + 1..m {
                        let det = self.a[i].dot(&self.a[j].cross(&self.a[k]));
                        if det.abs() < 1e-12 {
                            continue;
                        }
                        if let Some(y) = project(&[i, j, k]) {
                            consider(y, &mut best);
                        }
                    }
                }
            }
        }
        best.map(|(_, y)| y)
    }

    /// Affine dimension of the polytope's vertex set (0..=dim), or None if empty.
    pub fn affine_dim(&self) -> Option<usize> {
        affine_dim_of(&self.vertices())
    }

    pub fn translated(&self, t: &Vec3) -> Self {
        let b = self.a.iter().zip(&self.b).map(|(r, b)| b + r.dot(t)).collect();
        Self {
            dim: self.dim,
            a: self.a.clone(),
            b,
            empty: self.empty,
        }
    }
}

pub fn affine_dim_of(pts: &[Vec3]) -> Option<usize> {
    let first = pts.first()?;
    let tol = 1e-9;
    let mut basis: Vec<Vec3> = Vec::new();
    for p in &pts[1..] {
        let mut d = p - first;
        for e in &basis {
            d -= e * e.dot(&d);
        }
        if d.norm() > tol {
            basis.push(d.normalize());
        }
    }
    Some(basis.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> ConvexPolytope {
        ConvexPolytope::from_box(Vec3::zeros(), Vec3::new(1.0, 1.0, 0.0), 2).unwrap()
    }

    #[test]
    fn chebyshev_unit_square() {
        let (c, r) = unit_square().chebyshev_center().unwrap();
        assert!((c - Vec3::new(0.5, 0.5, 0.0)).norm() < 1e-9);
        assert!((r - 0.5).abs() < 1e-9);
    }

    #[test]
    fn contradictory_slab_is_empty() {
        let p = ConvexPolytope::new(2, vec![Vec3::x(), -Vec3::x()], vec![0.0, -1.0]).unwrap();
        let (_, r) = p.chebyshev_center().unwrap();
        assert!(r < 0.0);
        assert!(p.is_empty());
    }

    #[test]
    fn unbounded_reported() {
        let p = ConvexPolytope::new(2, vec![Vec3::x()], vec![1.0]);
        assert!(matches!(p.unwrap().chebyshev_center(), Err(Error::UnboundedPolytope)));
    }

    #[test]
    fn containment_tolerance() {
        let sq = unit_square();
        assert!(sq.contains(&Vec3::new(0.5, 0.5, 0.0), 1e-9));
        assert!(!sq.contains(&Vec3::new(1.0 + 1e-6, 0.5, 0.0), 1e-9));
        assert!(sq.contains(&Vec3::new(1.0, 0.5, 0.0), 1e-9));
    }

    #[test]
    fn box_intersection() {
        let a = unit_square();
        let b = ConvexPolytope::from_box(Vec3::new(0.5, 0.5, 0.0), Vec3::new(1.5, 1.5, 0.0), 2).unwrap();
        let c = a.intersect(&b).unwrap();
        assert!(!c.is_empty());
        let (lo, hi) = c.bbox().unwrap();
        assert!((lo - Vec3::new(0.5, 0.5, 0.0)).norm() < 1e-9);
        assert!((hi - Vec3::new(1.0, 1.0, 0.0)).norm() < 1e-9);
        let far = ConvexPolytope::from_box(Vec3::new(2.0, 2.0, 0.0), Vec3::new(3.0, 3.0, 0.0), 2).unwrap();
        assert!(a.intersect(&far).unwrap().is_empty());
        let b3 = ConvexPolytope::from_box(Vec3::zeros(), Vec3::new(1.0, 1.0, 1.0), 3).unwrap();
        assert!(matches!(a.intersect(&b3), Err(Error::DimensionMismatch)));
    }

    #[test]
    fn touching_boxes_are_degenerate_not_empty() {
        let a = unit_square();
        let b = ConvexPolytope::from_box(Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 1.0, 0.0), 2).unwrap();
        let c = a.intersect(&b).unwrap();
        assert!(!c.is_empty());
        assert_eq!(c.affine_dim(), Some(1));
    }

    #[test]
    fn hull_from_points() {
        let pts = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(0.0, 2.0, 0.0),
            Vec3::new(0.5, 0.5, 0.0),
        ];
        let p = ConvexPolytope::from_points(2, &pts).unwrap();
        assert_eq!(p.n_rows(), 3);
        assert_eq!(p.vertices().len(), 3);
        let cube: Vec<Vec3> = (0..8)
            .map(|i| Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
            .collect();
        let c = ConvexPolytope::from_points(3, &cube).unwrap();
        assert_eq!(c.n_rows(), 6);
        assert_eq!(c.vertices().len(), 8);
    }

    #[test]
    fn redundant_rows_dropped() {
        let mut rows = unit_square().rows().to_vec();
        let mut b = unit_square().offsets().to_vec();
        rows.push(Vec3::new(1.0, 1.0, 0.0));
        b.push(5.0);
        rows.push(Vec3::x());
        b.push(1.0);
        let p = ConvexPolytope::new(2, rows, b).unwrap().remove_redundant();
        assert_eq!(p.n_rows(), 4);
    }

    #[test]
    fn closest_point_to_box() {
        let sq = unit_square();
        let y = sq.closest_point(&Vec3::new(2.0, 3.0, 0.0)).unwrap();
        assert!((y - Vec3::new(1.0, 1.0, 0.0)).norm() < 1e-9);
        let y = sq.closest_point(&Vec3::new(0.5, -2.0, 0.0)).unwrap();
        assert!((y - Vec3::new(0.5, 0.0, 0.0)).norm() < 1e-9);
        let cube = ConvexPolytope::from_box(Vec3::zeros(), Vec3::new(1.0, 1.0, 1.0), 3).unwrap();
        let y = cube.closest_point(&Vec3::new(2.0, 0.5, 3.0)).unwrap();
        assert!((y - Vec3::new(1.0, 0.5, 1.0)).norm() < 1e-9);
    }

    #[test]
    fn segment_interval_clips() {
        let sq = unit_square();
        let (lo, hi) = sq.segment_interval(&Vec3::new(-1.0, 0.5, 0.0), &Vec3::new(3.0, 0.5, 0.0), 0.0).unwrap();
        assert!((lo - 0.25).abs() < 1e-12 && (hi - 0.5).abs() < 1e-12);
        assert!(sq.segment_interval(&Vec3::new(-1.0, 2.0, 0.0), &Vec3::new(3.0, 2.0, 0.0), 0.0).is_none());
    }
}
