//! Boundary discretization, static freeness, and grouping of free
//! configurations into connected patches.

use crate::encode::{check_segment_in_union, step_segments_milp};
use crate::error::{Error, Result};
use crate::geometry::{boundary_ring_2d, facets_3d, Configuration, ConvexPolytope, RigidObject, RingKind, RotationTable, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryGrid {
    pub edge: (usize, usize),
    pub dim: usize,
    pub sites: Vec<Vec3>,
    /// `(facet, a, b)` lattice coordinates; 2D sites use `(0, n, 0)`.
    pub coords: Vec<(usize, usize, usize)>,
    pub n_r: usize,
    /// Distance between neighboring sites (arc length in 2D, `h` in 3D).
    pub spacing: f64,
    /// 2D sites form a closed ring.
    pub wrap: bool,
}

impl BoundaryGrid {
    pub fn n_configs(&self) -> usize {
        self.sites.len() * self.n_r
    }

    pub fn config(&self, c: usize) -> Configuration {
        Configuration::new(self.sites[c / self.n_r], c % self.n_r)
    }

    /// Grid-adjacent site pairs `(s, s')` with `s < s'`.
    pub fn site_neighbors(&self) -> Vec<(usize, usize)> {
        let n = self.sites.len();
        let mut out = Vec::new();
        if self.dim == 2 {
            for s in 0..n.saturating_sub(1) {
                out.push((s, s + 1));
            }
            if self.wrap && n > 2 {
                out.push((0, n - 1));
            }
            return out;
        }
        for s in 0..n {
            for t in s + 1..n {
                let (fa, aa, ba) = self.coords[s];
                let (fb, ab, bb) = self.coords[t];
                if fa == fb && aa.abs_diff(ab) + ba.abs_diff(bb) == 1 {
                    out.push((s, t));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams {
    /// Sites per 2D ring.
    pub n_t: usize,
    /// 3D facet lattice spacing.
    pub h: f64,
    pub n_r: usize,
}

/// Sites on the boundary of `P_i ∩ P_j`: `n_t` equally spaced ring
/// parameters in 2D, a rectangular lattice of spacing `h` on each facet in 3D.
pub fn discretize_boundary(edge: (usize, usize), pij: &ConvexPolytope, params: &GridParams) -> Result<BoundaryGrid> {
    if params.n_t == 0 || params.n_r == 0 || !(params.h > 0.0) {
        return Err(Error::InvalidInput("grid parameters must be positive".into()));
    }
    if pij.dim() == 2 {
        let ring = boundary_ring_2d(pij)?;
        if ring.kind == RingKind::Point {
            return Err(Error::DegenerateBoundary);
        }
        let sites: Vec<Vec3> = (0..params.n_t).map(|n| ring.point_at(n as f64 / params.n_t as f64)).collect();
        return Ok(BoundaryGrid {
            edge,
            dim: 2,
            coords: (0..params.n_t).map(|n| (0, n, 0)).collect(),
            sites,
            n_r: params.n_r,
            spacing: ring.perimeter / params.n_t as f64,
            wrap: true,
        });
    }
    let facets = facets_3d(pij).map_err(|e| match e {
        Error::DegenerateIntersection => Error::DegenerateBoundary,
        e => e,
    })?;
    let mut sites = Vec::new();
    let mut coords = Vec::new();
    for (f, facet) in facets.iter().enumerate() {
        let (u, v) = facet.frame();
        let o = facet.vertices[0];
        let uv: Vec<Vec3> = facet.vertices.iter().map(|x| Vec3::new((x - o).dot(&u), (x - o).dot(&v), 0.0)).collect();
        let (mut lo, mut hi) = (uv[0], uv[0]);
        for p in &uv {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let na = ((hi.x - lo.x) / params.h + 1e-9).floor() as usize + 1;
        let nb = ((hi.y - lo.y) / params.h + 1e-9).floor() as usize + 1;
        for a in 0..na {
            for b in 0..nb {
                let q = Vec3::new(lo.x + a as f64 * params.h, lo.y + b as f64 * params.h, 0.0);
                if in_convex_polygon(&q, &uv, 1e-9) {
                    sites.push(o + u * q.x + v * q.y);
                    coords.push((f, a, b));
                }
            }
        }
    }
    if sites.is_empty() {
        return Err(Error::DegenerateBoundary);
    }
    Ok(BoundaryGrid {
        edge,
        dim: 3,
        sites,
        coords,
        n_r: params.n_r,
        spacing: params.h,
        wrap: false,
    })
}

/// Point in a counterclockwise convex polygon (xy-plane), boundary inclusive.
fn in_convex_polygon(q: &Vec3, poly: &[Vec3], tol: f64) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let sign = {
        let mut area = 0.0;
        for i in 0..n {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            area += a.x * b.y - b.x * a.y;
        }
        area.signum()
    };
    (0..n).all(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let e = b - a;
        let cross = e.x * (q.y - a.y) - e.y * (q.x - a.x);
        sign * cross >= -tol * e.norm()
    })
}

/// Static pose inside `P_i ∪ P_j`: every object edge (faces reduce to their
/// edges) and every center-to-vertex segment passes the union check.
pub fn pose_in_union(obj: &RigidObject, q: &Configuration, table: &RotationTable, pi: &ConvexPolytope, pj: &ConvexPolytope, eps: f64) -> bool {
    let w = obj.transform(q, table);
    w.iter().all(|v| check_segment_in_union(pi, pj, &q.p, v, eps)) && obj.edges().iter().all(|&(a, b)| check_segment_in_union(pi, pj, &w[a], &w[b], eps))
}

/// Freeness flag per grid configuration (`site · n_r + rot`).
pub fn free_configurations(grid: &BoundaryGrid, obj: &RigidObject, table: &RotationTable, pi: &ConvexPolytope, pj: &ConvexPolytope, eps: f64) -> Vec<bool> {
    (0..grid.n_configs()).map(|c| pose_in_union(obj, &grid.config(c), table, pi, pj, eps)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigPatch {
    /// Coarse-graph edge `(i, j)` whose boundary holds the patch.
    pub edge: (usize, usize),
    /// Component number on that boundary.
    pub index: usize,
    pub configs: Vec<Configuration>,
    /// Intra-patch links between entries of `configs`.
    pub adjacency: Vec<(usize, usize)>,
}

impl ConfigPatch {
    pub fn centroid(&self) -> Vec3 {
        self.configs.iter().fold(Vec3::zeros(), |a, q| a + q.p) / self.configs.len() as f64
    }

    pub fn position_of(&self, q: &Configuration) -> Option<usize> {
        self.configs.iter().position(|c| c.same_as(q))
    }

    pub fn is_connected(&self) -> bool {
        let n = self.configs.len();
        let mut uf = UnionFind::new(n);
        for &(a, b) in &self.adjacency {
            uf.union(a, b);
        }
        (0..n).all(|c| uf.find(c) == uf.find(0))
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    /// Link grid neighbors whose connecting step is certified inside the
    /// union: the swept segments of a translation or a one-entry planar
    /// rotation, or (3D) a quarter turn at a site with a clearance ball of
    /// the object's radius.
    Swept,
    /// Every free configuration is its own patch.
    None,
}

/// Table entries a 90° turn apart (cube group).
fn quarter_turn(table: &RotationTable, a: usize, b: usize) -> bool {
    ((table.get(a).transpose() * table.get(b)).trace() - 1.0).abs() < 1e-9
}

pub(crate) fn step_in_union(
    obj: &RigidObject,
    qa: &Configuration,
    qb: &Configuration,
    table: &RotationTable,
    pi: &ConvexPolytope,
    pj: &ConvexPolytope,
    eps: f64,
) -> bool {
    step_segments_milp(obj, qa, qb, table, 1, false).is_some_and(|segs| segs.iter().all(|(x, y)| check_segment_in_union(pi, pj, x, y, eps)))
}

/// Union-find over linked free configuration pairs; each component becomes
/// a patch.
pub fn group_patches(
    grid: &BoundaryGrid,
    free: &[bool],
    obj: &RigidObject,
    table: &RotationTable,
    pi: &ConvexPolytope,
    pj: &ConvexPolytope,
    eps: f64,
    mode: Grouping,
) -> Vec<ConfigPatch> {
    let n_r = grid.n_r;
    let mut links: Vec<(usize, usize)> = Vec::new();
    if mode == Grouping::Swept {
        for &(s, t) in &grid.site_neighbors() {
            for k in 0..n_r {
                let (a, b) = (s * n_r + k, t * n_r + k);
                if free[a] && free[b] && step_in_union(obj, &grid.config(a), &grid.config(b), table, pi, pj, eps) {
                    links.push((a.min(b), a.max(b)));
                }
            }
        }
        if grid.dim == 2 {
            for s in 0..grid.sites.len() {
                for k in 0..n_r {
                    let k2 = (k + 1) % n_r;
                    if k2 == k || (n_r == 2 && k == 1) {
                        continue;
                    }
                    let (a, b) = (s * n_r + k, s * n_r + k2);
                    if free[a] && free[b] && step_in_union(obj, &grid.config(a), &grid.config(b), table, pi, pj, eps) {
                        links.push((a.min(b), a.max(b)));
                    }
                }
            }
        } else {
            let r = obj.max_radius();
            for s in 0..grid.sites.len() {
                let x = grid.sites[s];
                let ball_ok = pi.violation(&x) <= -r + eps || pj.violation(&x) <= -r + eps;
                if !ball_ok {
                    continue;
                }
                for k in 0..n_r {
                    for k2 in k + 1..n_r {
                        let (a, b) = (s * n_r + k, s * n_r + k2);
                        if free[a] && free[b] && quarter_turn(table, k, k2) {
                            links.push((a, b));
                        }
                    }
                }
            }
        }
    }
    links.sort_unstable();
    let mut uf = UnionFind::new(grid.n_configs());
    for &(a, b) in &links {
        uf.union(a, b);
    }
    let mut comp_of: Vec<Option<usize>> = vec![None; grid.n_configs()];
    let mut patches: Vec<ConfigPatch> = Vec::new();
    let mut local: Vec<usize> = vec![usize::MAX; grid.n_configs()];
    for c in 0..grid.n_configs() {
        if !free[c] {
            continue;
        }
        let root = uf.find(c);
        let pidx = match comp_of[root] {
            Some(p) => p,
            None => {
                comp_of[root] = Some(patches.len());
                patches.push(ConfigPatch {
                    edge: grid.edge,
                    index: patches.len(),
                    configs: Vec::new(),
                    adjacency: Vec::new(),
                });
                patches.len() - 1
            }
        };
        local[c] = patches[pidx].configs.len();
        patches[pidx].configs.push(grid.config(c));
    }
    for &(a, b) in &links {
        let p = comp_of[uf.find(a)].expect("linked configs are free");
        patches[p].adjacency.push((local[a], local[b]));
    }
    for p in &patches {
        assert!(p.is_connected(), "patch {:?}/{} is not connected", p.edge, p.index);
    }
    patches
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64) -> Vec3 {
        Vec3::new(x, y, 0.0)
    }

    fn bx(x0: f64, y0: f64, x1: f64, y1: f64) -> ConvexPolytope {
        ConvexPolytope::from_box(v(x0, y0), v(x1, y1), 2).unwrap()
    }

    fn params(n_t: usize) -> GridParams {
        GridParams { n_t, h: 0.5, n_r: 12 }
    }

    #[test]
    fn unit_square_sites() {
        let g = discretize_boundary((0, 1), &bx(0.0, 0.0, 1.0, 1.0), &params(4)).unwrap();
        assert_eq!(g.sites, vec![v(0.0, 0.0), v(1.0, 0.0), v(1.0, 1.0), v(0.0, 1.0)]);
        assert_eq!(g.site_neighbors().len(), 4);
    }

    #[test]
    fn cube_facets_lattice() {
        let c = ConvexPolytope::from_box(Vec3::zeros(), Vec3::new(1.0, 1.0, 1.0), 3).unwrap();
        let g = discretize_boundary((0, 1), &c, &GridParams { n_t: 1, h: 0.5, n_r: 24 }).unwrap();
        assert_eq!(g.sites.len(), 54);
        for s in &g.sites {
            assert!(c.contains(s, 1e-9) && c.violation(s) > -1e-9);
        }
    }

    #[test]
    fn point_intersection_is_degenerate() {
        let p = bx(0.0, 0.0, 1.0, 1.0).intersect(&bx(1.0, 1.0, 2.0, 2.0)).unwrap();
        assert!(matches!(discretize_boundary((0, 1), &p, &params(4)), Err(Error::DegenerateBoundary)));
    }

    #[test]
    fn point_object_always_free() {
        let (pi, pj) = (bx(0.0, 0.0, 2.0, 1.0), bx(1.0, 0.0, 3.0, 1.0));
        let g = discretize_boundary((0, 1), &pi.intersect(&pj).unwrap(), &params(8)).unwrap();
        let dot = RigidObject::new(2, vec![Vec3::zeros()], vec![], vec![], Vec3::zeros()).unwrap();
        let t = RotationTable::planar(12).unwrap();
        assert!(free_configurations(&g, &dot, &t, &pi, &pj, 1e-9).iter().all(|f| *f));
    }

    #[test]
    fn generous_clearance_single_patch() {
        let (pi, pj) = (bx(0.0, 0.0, 20.0, 20.0), bx(5.0, 5.0, 15.0, 15.0));
        let g = discretize_boundary((0, 1), &pi.intersect(&pj).unwrap(), &params(20)).unwrap();
        let stick = RigidObject::polygon(vec![v(-0.1, 0.0), v(0.1, 0.0)], Some(Vec3::zeros())).unwrap();
        let t = RotationTable::planar(12).unwrap();
        let free = free_configurations(&g, &stick, &t, &pi, &pj, 1e-9);
        assert!(free.iter().all(|f| *f));
        let patches = group_patches(&g, &free, &stick, &t, &pi, &pj, 1e-9, Grouping::Swept);
        assert_eq!(patches.len(), 1);
        assert_eq!(patches[0].configs.len(), 240);
        let none = group_patches(&g, &free, &stick, &t, &pi, &pj, 1e-9, Grouping::None);
        assert_eq!(none.len(), 240);
    }

    #[test]
    fn long_stick_excluded() {
        let (pi, pj) = (bx(0.0, 0.0, 2.0, 0.5), bx(1.5, 0.0, 3.0, 0.5));
        let g = discretize_boundary((0, 1), &pi.intersect(&pj).unwrap(), &params(8)).unwrap();
        let stick = RigidObject::polygon(vec![v(-2.0, 0.0), v(2.0, 0.0)], Some(Vec3::zeros())).unwrap();
        let t = RotationTable::planar(12).unwrap();
        let free = free_configurations(&g, &stick, &t, &pi, &pj, 1e-9);
        assert!(free.iter().all(|f| !*f));
    }
}
