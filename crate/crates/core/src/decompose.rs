//! Convex cover of the free workspace: visibility-graph sampling, region
//! inflation from uncovered edge points, and the coarse overlap graph.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{ConvexPolytope, Scene, Vec3, DEFAULT_EPS};

/// Midpoint samples per visibility edge for coverage measurement.
pub const COVERAGE_INTERVALS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityGraph {
    pub points: Vec<Vec3>,
    pub edges: Vec<(usize, usize)>,
}

impl VisibilityGraph {
    pub fn edge_length(&self, e: usize) -> f64 {
        let (i, j) = self.edges[e];
        (self.points[j] - self.points[i]).norm()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoarseGraph {
    pub dim: usize,
    pub polytopes: Vec<ConvexPolytope>,
    /// Pairs `(i, j)` with `i < j` whose intersection is nonempty.
    pub edges: Vec<(usize, usize)>,
    pub intersections: Vec<ConvexPolytope>,
}

impl CoarseGraph {
    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        let key = (i.min(j), i.max(j));
        self.edges.iter().position(|e| *e == key)
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter_map(move |&(a, b)| {
            if a == i {
                Some(b)
            } else if b == i {
                Some(a)
            } else {
                None
            }
        })
    }
}

/// True when the segment passes through the interior of an obstacle.
pub fn segment_hits_obstacle(scene: &Scene, xa: &Vec3, xb: &Vec3) -> bool {
    scene
        .obstacles
        .iter()
        .any(|o| o.segment_interval(xa, xb, -DEFAULT_EPS).is_some_and(|(lo, hi)| hi > lo))
}

fn uniform_point(scene: &Scene, rng: &mut ChaCha8Rng) -> Vec3 {
    let mut x = Vec3::zeros();
    for k in 0..scene.dim {
        x[k] = rng.gen_range(scene.lo[k]..=scene.hi[k]);
    }
    x
}

/// Default connection radius: a quarter of the scene diagonal.
pub fn default_radius(scene: &Scene) -> f64 {
    0.25 * scene.diagonal()
}

pub fn sample_visibility_graph(scene: &Scene, n_v: usize, radius: f64, seed: u64) -> Result<VisibilityGraph> {
    if n_v == 0 {
        return Err(Error::InvalidInput("n_v must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n_v);
    let mut tries = 0usize;
    while points.len() < n_v {
        if tries >= 100 * n_v {
            return Err(Error::SamplingExhausted(tries));
        }
        tries += 1;
        let x = uniform_point(scene, &mut rng);
        if !scene.in_obstacle(&x, -DEFAULT_EPS) {
            points.push(x);
        }
    }
    let edges: Vec<(usize, usize)> = (0..n_v)
        .into_par_iter()
        .flat_map_iter(|i| {
            let pts = &points;
            (i + 1..n_v).filter_map(move |j| ((pts[j] - pts[i]).norm() <= radius && !segment_hits_obstacle(scene, &pts[i], &pts[j])).then_some((i, j)))
        })
        .collect();
    Ok(VisibilityGraph { points, edges })
}

/// Per-edge midpoint coverage flags, updated incrementally as polytopes are
/// added.
#[derive(Debug, Clone)]
pub struct Coverage {
    mids: Vec<[Vec3; COVERAGE_INTERVALS]>,
    covered: Vec<[bool; COVERAGE_INTERVALS]>,
    lengths: Vec<f64>,
    total: f64,
}

impl Coverage {
    pub fn new(vg: &VisibilityGraph) -> Self {
        let mut mids = Vec::with_capacity(vg.edges.len());
        let mut lengths = Vec::with_capacity(vg.edges.len());
        for (e, &(i, j)) in vg.edges.iter().enumerate() {
            let (a, b) = (vg.points[i], vg.points[j]);
            mids.push(std::array::from_fn(|k| a + (b - a) * ((k as f64 + 0.5) / COVERAGE_INTERVALS as f64)));
            lengths.push(vg.edge_length(e));
        }
        let total = lengths.iter().sum();
        Self {
            covered: vec![[false; COVERAGE_INTERVALS]; mids.len()],
            mids,
            lengths,
            total,
        }
    }

    pub fn add(&mut self, p: &ConvexPolytope) {
        for (flags, mids) in self.covered.iter_mut().zip(&self.mids) {
            for (f, m) in flags.iter_mut().zip(mids) {
                if !*f && p.contains(m, DEFAULT_EPS) {
                    *f = true;
                }
            }
        }
    }

    /// Covered fraction of total edge length; 0 when there are no edges.
    pub fn ratio(&self) -> f64 {
        if self.total == 0.0 {
            return 0.0;
        }
        let covered: f64 = self
            .covered
            .iter()
            .zip(&self.lengths)
            .map(|(f, l)| l * f.iter().filter(|c| **c).count() as f64 / COVERAGE_INTERVALS as f64)
            .sum();
        covered / self.total
    }

    fn uncovered(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (e, flags) in self.covered.iter().enumerate() {
            for (k, f) in flags.iter().enumerate() {
                if !f {
                    out.push((e, k, self.lengths[e] / COVERAGE_INTERVALS as f64));
                }
            }
        }
        out
    }
}

pub fn check_coverage(vg: &VisibilityGraph, polys: &[ConvexPolytope]) -> f64 {
    let mut c = Coverage::new(vg);
    for p in polys {
        c.add(p);
    }
    c.ratio()
}

/// Draws `n_s` points uniformly from uncovered edge intervals, each outside
/// every polytope in `polys`.
pub fn sample_visibility_edge(vg: &VisibilityGraph, cov: &Coverage, polys: &[ConvexPolytope], n_s: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec3>> {
    let open = cov.uncovered();
    let total: f64 = open.iter().map(|o| o.2).sum();
    if open.is_empty() || total <= 0.0 {
        return Err(Error::NoUncoveredEdges);
    }
    let mut out = Vec::with_capacity(n_s);
    let mut tries = 0;
    while out.len() < n_s && tries < 100 * n_s.max(1) {
        tries += 1;
        let mut u = rng.gen::<f64>() * total;
        let mut pick = open[open.len() - 1];
        for o in &open {
            if u < o.2 {
                pick = *o;
                break;
            }
            u -= o.2;
        }
        let (e, k, _) = pick;
        let (i, j) = vg.edges[e];
        let s = (k as f64 + rng.gen::<f64>()) / COVERAGE_INTERVALS as f64;
        let x = vg.points[i] + (vg.points[j] - vg.points[i]) * s;
        if polys.iter().all(|p| !p.contains(&x, DEFAULT_EPS)) {
            out.push(x);
        }
    }
    if out.is_empty() {
        return Err(Error::NoUncoveredEdges);
    }
    Ok(out)
}

pub const INFLATE_ROUNDS: usize = 20;
pub const INFLATE_TOL: f64 = 1e-3;

/// Grows an obstacle-free polytope around `seed` by alternating separating
/// hyperplanes (through each obstacle's closest point to the current ball
/// center) with Chebyshev recentering.
pub fn inflate_region(seed: &Vec3, scene: &Scene) -> Result<ConvexPolytope> {
    if scene.in_obstacle(seed, -DEFAULT_EPS) || !scene.in_bounds(seed, DEFAULT_EPS) {
        return Err(Error::SeedInObstacle);
    }
    let bounds = scene.bounds_polytope();
    let mut center = *seed;
    let mut best: Option<(ConvexPolytope, f64)> = None;
    for _ in 0..INFLATE_ROUNDS {
        let poly = separating_region(&center, scene, &bounds)?;
        if !poly.contains(seed, DEFAULT_EPS) {
            break;
        }
        let (c, r) = poly.chebyshev_center()?;
        let improved = best.as_ref().is_none_or(|(_, br)| r > br + INFLATE_TOL);
        let better = best.as_ref().is_none_or(|(_, br)| r > *br);
        if better {
            best = Some((poly, r));
        }
        if !improved || r <= 0.0 {
            break;
        }
        center = c;
    }
    let (poly, _) = best.ok_or(Error::SeedInObstacle)?;
    Ok(poly.remove_redundant())
}

fn separating_region(center: &Vec3, scene: &Scene, bounds: &ConvexPolytope) -> Result<ConvexPolytope> {
    let mut obs: Vec<(f64, Vec3, &ConvexPolytope)> = scene
        .obstacles
        .iter()
        .filter(|o| !o.is_empty())
        .filter_map(|o| o.closest_point(center).map(|y| ((y - center).norm(), y, o)))
        .collect();
    obs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rows: Vec<Vec3> = bounds.rows().to_vec();
    let mut offs: Vec<f64> = bounds.offsets().to_vec();
    for (d, y, o) in obs {
        let current = ConvexPolytope::new(scene.dim, rows.clone(), offs.clone())?;
        let overlap = current.intersect(o)?;
        if overlap.is_empty() || overlap.chebyshev_center()?.1 <= 1e-9 {
            continue;
        }
        let n = if d > 1e-12 {
            (y - center) / d
        } else {
            // Center on the obstacle boundary: push away from its interior.
            let (oc, _) = o.chebyshev_center()?;
            let v = center - oc;
            if v.norm() < 1e-12 {
                return Err(Error::SeedInObstacle);
            }
            -v.normalize()
        };
        rows.push(n);
        offs.push(n.dot(&y));
    }
    ConvexPolytope::new(scene.dim, rows, offs)
}

pub fn construct_coarse_graph(dim: usize, polytopes: Vec<ConvexPolytope>) -> Result<CoarseGraph> {
    let n = polytopes.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let found: Vec<Option<((usize, usize), ConvexPolytope)>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let x = polytopes[i].intersect(&polytopes[j])?;
            Ok((!x.is_empty()).then(|| ((i, j), x.remove_redundant())))
        })
        .collect::<Result<_>>()?;
    let mut edges = Vec::new();
    let mut intersections = Vec::new();
    for (e, x) in found.into_iter().flatten() {
        edges.push(e);
        intersections.push(x);
    }
    Ok(CoarseGraph {
        dim,
        polytopes,
        edges,
        intersections,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposeParams {
    pub n_v: usize,
    pub n_s: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Visibility connection radius; `None` uses [`default_radius`].
    pub radius: Option<f64>,
    pub max_iterations: usize,
}

impl Default for DecomposeParams {
    fn default() -> Self {
        Self {
            n_v: 512,
            n_s: 5,
            alpha: 0.95,
            seed: 0,
            radius: None,
            max_iterations: 1000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DecomposeReport {
    pub graph: CoarseGraph,
    pub coverage: f64,
    pub iterations: usize,
    /// Coverage after each iteration.
    pub history: Vec<f64>,
}

const STALL_ITERATIONS: usize = 50;
const STALL_GAIN: f64 = 1e-4;

pub fn decompose(scene: &Scene, params: &DecomposeParams) -> Result<DecomposeReport> {
    if !(params.alpha >= 0.0 && params.alpha <= 1.0) {
        return Err(Error::InvalidInput(format!("alpha must lie in [0, 1], got {}", params.alpha)));
    }
    if params.alpha == 0.0 {
        return Ok(DecomposeReport {
            graph: construct_coarse_graph(scene.dim, Vec::new())?,
            coverage: 0.0,
            iterations: 0,
            history: Vec::new(),
        });
    }
    let radius = params.radius.unwrap_or_else(|| default_radius(scene));
    let vg = sample_visibility_graph(scene, params.n_v, radius, params.seed)?;
    let mut cov = Coverage::new(&vg);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(1));
    let mut polys: Vec<ConvexPolytope> = Vec::new();
    let mut history = Vec::new();
    let mut ratio = 0.0;
    let mut stall = 0;
    let mut iterations = 0;
    while ratio < params.alpha && iterations < params.max_iterations {
        iterations += 1;
        let seeds = match sample_visibility_edge(&vg, &cov, &polys, params.n_s, &mut rng) {
            Ok(s) => s,
            Err(Error::NoUncoveredEdges) => break,
            Err(e) => return Err(e),
        };
        let grown: Vec<Result<ConvexPolytope>> = seeds.par_iter().map(|s| inflate_region(s, scene)).collect();
        let mut batch: Vec<ConvexPolytope> = Vec::new();
        for (s, g) in seeds.iter().zip(grown) {
            let p = match g {
                Ok(p) => p,
                Err(Error::SeedInObstacle) => continue,
                Err(e) => return Err(e),
            };
            // A seed already covered by an earlier region of this batch adds nothing new.
            if batch.iter().any(|b| b.contains(s, DEFAULT_EPS)) {
                continue;
            }
            batch.push(p);
        }
        for p in batch {
            cov.add(&p);
            polys.push(p);
        }
        let next = cov.ratio();
        if next - ratio < STALL_GAIN {
            stall += 1;
            if stall >= STALL_ITERATIONS {
                return Err(Error::CoverageStall(next));
            }
        } else {
            stall = 0;
        }
        ratio = next;
        history.push(ratio);
        log::debug!("decompose iteration {iterations}: {} polytopes, coverage {ratio:.4}", polys.len());
    }
    Ok(DecomposeReport {
        graph: construct_coarse_graph(scene.dim, polys)?,
        coverage: ratio,
        iterations,
        history,
    })
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

    fn empty_scene() -> Scene {
        Scene::new(2, v(0.0, 0.0), v(4.0, 4.0), vec![]).unwrap()
    }

    #[test]
    fn complete_graph_in_empty_scene() {
        let g = sample_visibility_graph(&empty_scene(), 4, 100.0, 3).unwrap();
        assert_eq!(g.edges.len(), 6);
    }

    #[test]
    fn blocked_scene_exhausts_sampling() {
        let s = Scene::new(2, v(0.0, 0.0), v(1.0, 1.0), vec![bx(0.0, 0.0, 1.0, 1.0)]).unwrap();
        let r = sample_visibility_graph(&s, 10, 1.0, 0);
        assert!(matches!(r, Err(Error::SamplingExhausted(_))));
    }

    #[test]
    fn coverage_half_edge() {
        let g = VisibilityGraph {
            points: vec![v(0.0, 0.5), v(2.0, 0.5)],
            edges: vec![(0, 1)],
        };
        assert_eq!(check_coverage(&g, &[]), 0.0);
        assert!((check_coverage(&g, &[bx(0.0, 0.0, 1.0, 1.0)]) - 0.5).abs() < 0.01);
        assert_eq!(check_coverage(&g, &[bx(0.0, 0.0, 2.0, 1.0)]), 1.0);
    }

    #[test]
    fn no_uncovered_edges() {
        let g = VisibilityGraph {
            points: vec![v(0.0, 0.5), v(2.0, 0.5)],
            edges: vec![(0, 1)],
        };
        let p = vec![bx(0.0, 0.0, 2.0, 1.0)];
        let mut c = Coverage::new(&g);
        c.add(&p[0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(sample_visibility_edge(&g, &c, &p, 3, &mut rng), Err(Error::NoUncoveredEdges)));
    }

    #[test]
    fn empty_scene_inflates_to_bounds() {
        let s = empty_scene();
        let p = inflate_region(&v(1.0, 1.0), &s).unwrap();
        let (_, r) = p.chebyshev_center().unwrap();
        assert!((r - 2.0).abs() < 1e-9);
    }

    #[test]
    fn seed_inside_obstacle_rejected() {
        let s = Scene::new(2, v(0.0, 0.0), v(4.0, 4.0), vec![bx(1.0, 1.0, 2.0, 2.0)]).unwrap();
        assert!(matches!(inflate_region(&v(1.5, 1.5), &s), Err(Error::SeedInObstacle)));
    }

    #[test]
    fn slab_between_walls() {
        let s = Scene::new(2, v(0.0, 0.0), v(10.0, 3.0), vec![bx(0.0, 0.0, 10.0, 1.0), bx(0.0, 2.0, 10.0, 3.0)]).unwrap();
        let p = inflate_region(&v(5.0, 1.3), &s).unwrap();
        let (_, r) = p.chebyshev_center().unwrap();
        assert!(r >= 0.45, "radius {r}");
        for o in &s.obstacles {
            let x = p.intersect(o).unwrap();
            assert!(x.is_empty() || x.chebyshev_center().unwrap().1 <= 1e-7);
        }
    }

    #[test]
    fn coarse_graph_chain() {
        let g = construct_coarse_graph(2, vec![bx(0.0, 0.0, 2.0, 1.0), bx(1.0, 0.0, 3.0, 1.0), bx(2.5, 0.0, 4.0, 1.0)]).unwrap();
        assert_eq!(g.edges, vec![(0, 1), (1, 2)]);
        let g = construct_coarse_graph(2, vec![bx(0.0, 0.0, 1.0, 1.0), bx(2.0, 0.0, 3.0, 1.0)]).unwrap();
        assert!(g.edges.is_empty());
    }

    #[test]
    fn decompose_empty_scene_single_polytope() {
        let r = decompose(
            &empty_scene(),
            &DecomposeParams {
                n_v: 32,
                ..DecomposeParams::default()
            },
        )
        .unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.graph.polytopes.len(), 1);
        assert!(r.coverage >= 0.95);
    }

    #[test]
    fn zero_alpha_is_vacuous() {
        let r = decompose(
            &empty_scene(),
            &DecomposeParams {
                alpha: 0.0,
                ..DecomposeParams::default()
            },
        )
        .unwrap();
        assert!(r.graph.polytopes.is_empty());
    }
}
