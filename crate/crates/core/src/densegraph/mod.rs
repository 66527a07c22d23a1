//! Configuration patches on overlap boundaries and certified traversals
//! between them.

pub mod grid;
pub mod traversal;

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::decompose::CoarseGraph;
use crate::encode::ArcApproxParams;
use crate::error::{Error, Result};
use crate::geometry::{Configuration, ConvexPolytope, RigidObject, RotationTable, Vec3, DEFAULT_EPS};
use crate::milp::{big_m_for_bounds, BnbOptions, SearchMode};

pub(crate) use grid::step_in_union;
pub use grid::{discretize_boundary, free_configurations, group_patches, pose_in_union, BoundaryGrid, ConfigPatch, GridParams, Grouping};
pub use traversal::{
    build_traversal_model, fast_verify_n0, path_satisfies, search_one_waypoint, translation_cost, verify_traversal, Motion, TraversalModel, TraversalOutcome,
    TraversalProblem, TraversalSettings,
};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams {
    pub n_r: usize,
    pub n_t: usize,
    /// 3D facet spacing; `None` uses the object's smallest extent.
    pub h: Option<f64>,
    /// Intermediate waypoints for the first attempt.
    pub n_waypoints: usize,
    /// Retry infeasible pairs with one more waypoint.
    pub retry: bool,
    pub n_divisions: usize,
    pub eps: f64,
    pub dtheta_max: f64,
    /// Node budget per traversal MILP. Zero skips the MILP stage and leaves
    /// pairs the direct searches cannot settle unverified.
    pub node_limit: usize,
    /// Solve traversal MILPs to optimality instead of stopping at the first
    /// feasible motion.
    pub optimal: bool,
    /// Configurations per side kept in a traversal MILP.
    pub max_side_configs: usize,
    /// Lattice resolution of the one-waypoint direct search.
    pub lattice: usize,
    pub grouping: Grouping,
}

impl Default for DenseParams {
    fn default() -> Self {
        Self {
            n_r: 12,
            n_t: 60,
            h: None,
            n_waypoints: 0,
            retry: true,
            n_divisions: 10,
            eps: DEFAULT_EPS,
            dtheta_max: PI / 3.0,
            node_limit: 2_000,
            optimal: false,
            max_side_configs: 8,
            lattice: 8,
            grouping: Grouping::Swept,
        }
    }
}

impl DenseParams {
    pub fn defaults_for_dim(dim: usize) -> Self {
        Self {
            n_r: if dim == 3 { 24 } else { 12 },
            ..Self::default()
        }
    }

    pub fn table(&self, dim: usize) -> Result<RotationTable> {
        RotationTable::for_dim(dim, self.n_r)
    }

    pub fn arc(&self) -> Result<ArcApproxParams> {
        ArcApproxParams::new(self.dtheta_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairStatus {
    Certified,
    Infeasible,
    /// Budget exhausted or reduced model; may succeed on a rerun.
    Unverified,
    /// Rotation reach rules the pair out without a model.
    Pruned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseEdge {
    pub u: usize,
    pub w: usize,
    pub motion: Motion,
    /// Coarse-graph polytopes the motion is certified in.
    pub polys: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairRecord {
    pub u: usize,
    pub w: usize,
    pub status: PairStatus,
    /// Intermediate waypoints of the last attempt.
    pub n_waypoints: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildStats {
    /// Traversal problems posed (every waypoint count attempted counts once).
    pub milp_count: usize,
    /// Problems settled by direct evaluation without branch-and-bound.
    pub direct_count: usize,
    pub bnb_count: usize,
    pub certified: usize,
    pub infeasible: usize,
    pub unverified: usize,
    pub pruned: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGraph {
    pub dim: usize,
    pub params: DenseParams,
    pub patches: Vec<ConfigPatch>,
    pub edges: Vec<DenseEdge>,
    pub pairs: Vec<PairRecord>,
    pub stats: BuildStats,
}

impl DenseGraph {
    pub fn table(&self) -> Result<RotationTable> {
        self.params.table(self.dim)
    }

    pub fn settings(&self, big_m: f64) -> Result<TraversalSettings> {
        settings_for(&self.params, self.dim, big_m)
    }
}

pub(crate) fn settings_for(params: &DenseParams, dim: usize, big_m: f64) -> Result<TraversalSettings> {
    let table = params.table(dim)?;
    let max_step = if dim == 2 { params.arc()?.max_index_step(&table) } else { 0 };
    Ok(TraversalSettings {
        n_divisions: params.n_divisions,
        eps: params.eps,
        max_step,
        big_m,
        plain: false,
    })
}

/// Big-M for a polytope set: scene-style bound over its bounding box.
pub fn big_m_for_polys(polys: &[&ConvexPolytope], dim: usize, obj: &RigidObject) -> f64 {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for p in polys {
        if let Some((a, b)) = p.bbox() {
            lo = lo.inf(&a);
            hi = hi.sup(&b);
        }
    }
    for k in dim..3 {
        lo[k] = 0.0;
        hi[k] = 1.0;
    }
    big_m_for_bounds(lo, hi, dim, obj.max_radius()).unwrap_or(1e3)
}

/// Patches of every overlap boundary, in coarse-edge order.
pub fn build_patches(cg: &CoarseGraph, obj: &RigidObject, params: &DenseParams) -> Result<Vec<ConfigPatch>> {
    if obj.dim() != cg.dim {
        return Err(Error::DimensionMismatch);
    }
    let table = params.table(cg.dim)?;
    let gp = GridParams {
        n_t: params.n_t,
        h: params.h.unwrap_or_else(|| obj.min_extent()),
        n_r: params.n_r,
    };
    let per_edge: Vec<Result<Vec<ConfigPatch>>> = cg
        .edges
        .par_iter()
        .zip(&cg.intersections)
        .map(|(&(i, j), pij)| {
            let grid = match discretize_boundary((i, j), pij, &gp) {
                Ok(g) => g,
                Err(Error::DegenerateBoundary) => {
                    log::info!("edge ({i}, {j}): degenerate boundary skipped");
                    return Ok(Vec::new());
                }
                Err(e) => return Err(e),
            };
            let (pi, pj) = (&cg.polytopes[i], &cg.polytopes[j]);
            let free = free_configurations(&grid, obj, &table, pi, pj, params.eps);
            Ok(group_patches(&grid, &free, obj, &table, pi, pj, params.eps, params.grouping))
        })
        .collect();
    let mut out = Vec::new();
    for r in per_edge {
        out.extend(r?);
    }
    Ok(out)
}

/// Polytope indices of the traversal context for two patches, or `None`
/// when they share no polytope.
pub fn pair_context(a: (usize, usize), b: (usize, usize)) -> Option<Vec<usize>> {
    let shared: Vec<usize> = [a.0, a.1].into_iter().filter(|x| *x == b.0 || *x == b.1).collect();
    if shared.is_empty() {
        return None;
    }
    let mut ids = vec![a.0, a.1, b.0, b.1];
    ids.sort_unstable();
    ids.dedup();
    Some(ids)
}

/// Necessary condition on rotations: some pair of configurations is within
/// `(N + 1)` rotation steps (identical rotation in 3D).
pub fn rotation_reachable(u: &[Configuration], w: &[Configuration], table: &RotationTable, max_step: usize, n_waypoints: usize) -> bool {
    let mut ru: Vec<usize> = u.iter().map(|q| q.rot).collect();
    let mut rw: Vec<usize> = w.iter().map(|q| q.rot).collect();
    ru.sort_unstable();
    ru.dedup();
    rw.sort_unstable();
    rw.dedup();
    let budget = if table.dim() == 3 { 0 } else { max_step * (n_waypoints + 1) };
    ru.iter()
        .any(|&a| rw.iter().any(|&b| table.signed_diff(a, b).unsigned_abs() as usize <= budget))
}

/// Keeps at most `cap` configurations, nearest (position, then rotation
/// distance) to the other side's centroid first.
fn capped<'a>(side: &'a [Configuration], other: &[Configuration], table: &RotationTable, cap: usize) -> (Vec<Configuration>, Vec<usize>) {
    if side.len() <= cap {
        return (side.to_vec(), (0..side.len()).collect());
    }
    let c = other.iter().fold(Vec3::zeros(), |a, q| a + q.p) / other.len() as f64;
    let rot_gap = |q: &Configuration| other.iter().map(|o| table.signed_diff(q.rot, o.rot).unsigned_abs()).min().unwrap_or(0);
    let mut idx: Vec<usize> = (0..side.len()).collect();
    idx.sort_by(|&a, &b| {
        let ka = (rot_gap(&side[a]), (side[a].p - c).norm());
        let kb = (rot_gap(&side[b]), (side[b].p - c).norm());
        ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(a.cmp(&b))
    });
    idx.truncate(cap);
    idx.sort_unstable();
    (idx.iter().map(|&i| side[i]).collect(), idx)
}

#[derive(Debug, Clone)]
pub struct PairResult {
    pub status: PairStatus,
    pub motion: Option<Motion>,
    pub n_waypoints: usize,
    pub attempts: usize,
    pub direct: usize,
    pub bnb: usize,
}

/// Certifies a traversal between two configuration sets: the zero-waypoint
/// fast path, then (on retry) a direct one-waypoint search followed by a
/// budgeted MILP over capped configuration sets.
pub fn certify_pair(
    u: &[Configuration],
    w: &[Configuration],
    polys: &[&ConvexPolytope],
    obj: &RigidObject,
    table: &RotationTable,
    params: &DenseParams,
    st: &TraversalSettings,
) -> PairResult {
    let mut res = PairResult {
        status: PairStatus::Infeasible,
        motion: None,
        n_waypoints: params.n_waypoints,
        attempts: 0,
        direct: 0,
        bnb: 0,
    };
    let last = if params.retry { params.n_waypoints + 1 } else { params.n_waypoints };
    for n in params.n_waypoints..=last {
        res.n_waypoints = n;
        if !rotation_reachable(u, w, table, st.max_step, n) {
            if res.attempts == 0 && n == last {
                res.status = PairStatus::Pruned;
            }
            continue;
        }
        res.attempts += 1;
        if n == 0 {
            res.direct += 1;
            if let Some((a, b)) = fast_verify_n0(u, w, polys, obj, table, st) {
                let path = vec![u[a], w[b]];
                res.motion = Some(Motion {
                    cost: translation_cost(&path),
                    waypoints: path,
                    u_index: a,
                    w_index: b,
                });
                res.status = PairStatus::Certified;
                return res;
            }
            res.status = PairStatus::Infeasible;
            continue;
        }
        if n == 1 {
            res.direct += 1;
            if let Some(m) = search_one_waypoint(u, w, polys, obj, table, st, params.lattice) {
                res.motion = Some(m);
                res.status = PairStatus::Certified;
                return res;
            }
        }
        if params.node_limit == 0 {
            res.status = PairStatus::Unverified;
            continue;
        }
        let (uc, ui) = capped(u, w, table, params.max_side_configs);
        let (wc, wi) = capped(w, u, table, params.max_side_configs);
        let reduced = uc.len() < u.len() || wc.len() < w.len();
        let prob = TraversalProblem {
            u: &uc,
            w: &wc,
            polys: polys.to_vec(),
            n_waypoints: n,
        };
        let mut bnb = if params.optimal { BnbOptions::default() } else { BnbOptions::feasibility() };
        bnb.node_limit = params.node_limit;
        if params.optimal {
            bnb.mode = SearchMode::Optimize;
        }
        res.bnb += 1;
        match verify_traversal(&prob, obj, table, st, &bnb) {
            TraversalOutcome::Certified(mut m) => {
                m.u_index = ui[m.u_index];
                m.w_index = wi[m.w_index];
                res.motion = Some(m);
                res.status = PairStatus::Certified;
                return res;
            }
            TraversalOutcome::Infeasible => {
                res.status = if reduced { PairStatus::Unverified } else { PairStatus::Infeasible };
            }
            TraversalOutcome::Unverified => res.status = PairStatus::Unverified,
        }
    }
    res
}

/// Candidate patch pairs `(a, b)`, `a < b`, sharing a polytope.
pub fn candidate_pairs(patches: &[ConfigPatch]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..patches.len() {
        for b in a + 1..patches.len() {
            if pair_context(patches[a].edge, patches[b].edge).is_some() {
                out.push((a, b));
            }
        }
    }
    out
}

pub fn build_dense_graph(cg: &CoarseGraph, obj: &RigidObject, params: &DenseParams) -> Result<DenseGraph> {
    let patches = build_patches(cg, obj, params)?;
    let pairs = candidate_pairs(&patches);
    let mut dg = DenseGraph {
        dim: cg.dim,
        params: params.clone(),
        patches,
        edges: Vec::new(),
        pairs: Vec::new(),
        stats: BuildStats::default(),
    };
    run_pairs(&mut dg, cg, obj, &pairs)?;
    Ok(dg)
}

/// Re-attempts pairs left unverified, e.g. after raising the node budget.
pub fn resume_unverified(dg: &mut DenseGraph, cg: &CoarseGraph, obj: &RigidObject, params: &DenseParams) -> Result<usize> {
    dg.params = params.clone();
    let todo: Vec<(usize, usize)> = dg.pairs.iter().filter(|r| r.status == PairStatus::Unverified).map(|r| (r.u, r.w)).collect();
    dg.pairs.retain(|r| r.status != PairStatus::Unverified);
    dg.stats.unverified = 0;
    let before = dg.edges.len();
    run_pairs(dg, cg, obj, &todo)?;
    dg.pairs.sort_by_key(|r| (r.u, r.w));
    Ok(dg.edges.len() - before)
}

fn run_pairs(dg: &mut DenseGraph, cg: &CoarseGraph, obj: &RigidObject, pairs: &[(usize, usize)]) -> Result<()> {
    let table = dg.params.table(dg.dim)?;
    let params = dg.params.clone();
    let patches = &dg.patches;
    let results: Vec<Result<(Vec<usize>, PairResult)>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let ids = pair_context(patches[a].edge, patches[b].edge).expect("candidate pairs share a polytope");
            let polys: Vec<&ConvexPolytope> = ids.iter().map(|&i| &cg.polytopes[i]).collect();
            let st = settings_for(&params, cg.dim, big_m_for_polys(&polys, cg.dim, obj))?;
            let r = certify_pair(&patches[a].configs, &patches[b].configs, &polys, obj, &table, &params, &st);
            Ok((ids, r))
        })
        .collect();
    for (&(a, b), r) in pairs.iter().zip(results) {
        let (ids, r) = r?;
        dg.stats.milp_count += r.attempts;
        dg.stats.direct_count += r.direct;
        dg.stats.bnb_count += r.bnb;
        match r.status {
            PairStatus::Certified => dg.stats.certified += 1,
            PairStatus::Infeasible => dg.stats.infeasible += 1,
            PairStatus::Unverified => dg.stats.unverified += 1,
            PairStatus::Pruned => dg.stats.pruned += 1,
        }
        if let Some(m) = r.motion {
            dg.edges.push(DenseEdge {
                u: a,
                w: b,
                motion: m,
                polys: ids,
            });
        }
        dg.pairs.push(PairRecord {
            u: a,
            w: b,
            status: r.status,
            n_waypoints: r.n_waypoints,
        });
    }
    log::info!(
        "dense graph: {} patches, {} traversal problems, {} certified, {} infeasible, {} unverified, {} pruned",
        dg.patches.len(),
        dg.stats.milp_count,
        dg.stats.certified,
        dg.stats.infeasible,
        dg.stats.unverified,
        dg.stats.pruned
    );
    Ok(())
}
