//! Online phase: attach start and goal to a frozen roadmap, search it, and
//! stitch the stored motions with walks inside the visited patches.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::bench::{validate_plan, ValidationReport};
use crate::decompose::CoarseGraph;
use crate::densegraph::{
    big_m_for_polys, certify_pair, pose_in_union, step_in_union, translation_cost, DenseGraph, DenseParams, Motion, PairStatus, TraversalSettings,
};
use crate::error::{Error, Result};
use crate::geometry::{Configuration, ConvexPolytope, RigidObject, RotationTable, Scene};

pub use crate::densegraph::fast_verify_n0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentTag {
    /// Certified traversal between two roadmap vertices (or a query vertex).
    InterVertex,
    /// Walk along grid neighbors inside one patch, or an in-place turn at a
    /// query vertex.
    IntraVertex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanSegment {
    pub tag: SegmentTag,
    pub waypoints: Vec<Configuration>,
}

impl PlanSegment {
    pub fn cost(&self) -> f64 {
        translation_cost(&self.waypoints)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MotionPlan {
    pub segments: Vec<PlanSegment>,
    /// Sum of translation 1-norms over all segments.
    pub total: f64,
}

impl MotionPlan {
    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Concatenated waypoints with junctions listed once.
    pub fn waypoints(&self) -> Vec<Configuration> {
        let mut out: Vec<Configuration> = Vec::new();
        for s in &self.segments {
            let skip = usize::from(!out.is_empty());
            out.extend(s.waypoints.iter().skip(skip));
        }
        out
    }

    /// Every segment starts exactly where the previous one ended.
    pub fn junctions_continuous(&self) -> bool {
        self.segments.windows(2).all(|w| match (w[0].waypoints.last(), w[1].waypoints.first()) {
            (Some(a), Some(b)) => a.same_as(b),
            _ => false,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attachment {
    pub patch: usize,
    pub config: usize,
    /// Motion from the query configuration to `patches[patch].configs[config]`.
    pub motion: Motion,
    pub polys: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryVertex {
    pub q: Configuration,
    pub attachments: Vec<Attachment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryOptions {
    /// Stop attaching after this many certified patches.
    pub k: usize,
    /// Price of one rotation step inside a patch; `None` uses the arc length
    /// swept by the farthest vertex.
    pub rho: Option<f64>,
    /// Validator samples per step; zero skips validation.
    pub validate_samples: usize,
    pub validate_eps: f64,
}

impl Default for QueryOptions {
    fn default() -> Self {
        Self {
            k: 8,
            rho: None,
            validate_samples: 32,
            validate_eps: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Via {
    Intra,
    Dense(usize),
    Attach(usize),
    Direct,
}

/// Read-only planner over a coarse graph and the dense graph of one object.
pub struct Planner<'a> {
    pub scene: &'a Scene,
    pub coarse: &'a CoarseGraph,
    pub dense: &'a DenseGraph,
    pub object: &'a RigidObject,
    pub options: QueryOptions,
    table: RotationTable,
    /// Build parameters with the B&B stage switched off, so attaching a
    /// query only runs the closed-form and direct searches.
    online: DenseParams,
    base: Vec<usize>,
    adj: Vec<Vec<(usize, f64, Via)>>,
}

fn rotation_angle(table: &RotationTable, a: usize, b: usize) -> f64 {
    let r = table.get(a).transpose() * table.get(b);
    ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
}

impl<'a> Planner<'a> {
    pub fn new(scene: &'a Scene, coarse: &'a CoarseGraph, dense: &'a DenseGraph, object: &'a RigidObject, options: QueryOptions) -> Result<Self> {
        if scene.dim != coarse.dim || dense.dim != coarse.dim || object.dim() != coarse.dim {
            return Err(Error::DimensionMismatch);
        }
        let table = dense.table()?;
        let mut base = Vec::with_capacity(dense.patches.len() + 1);
        let mut n = 2;
        for p in &dense.patches {
            base.push(n);
            n += p.configs.len();
        }
        base.push(n);
        let mut planner = Self {
            scene,
            coarse,
            dense,
            object,
            options,
            table,
            online: DenseParams {
                node_limit: 0,
                ..dense.params.clone()
            },
            base,
            adj: vec![Vec::new(); n],
        };
        let rho = planner.rho();
        for (pi, p) in dense.patches.iter().enumerate() {
            for &(a, b) in &p.adjacency {
                let (qa, qb) = (&p.configs[a], &p.configs[b]);
                let mut w = (qa.p - qb.p).abs().sum();
                if qa.rot != qb.rot {
                    w += rho * rotation_angle(&planner.table, qa.rot, qb.rot) / planner.step_angle();
                }
                let (na, nb) = (planner.node(pi, a), planner.node(pi, b));
                planner.adj[na].push((nb, w, Via::Intra));
                planner.adj[nb].push((na, w, Via::Intra));
            }
        }
        for (ei, e) in dense.edges.iter().enumerate() {
            let (na, nb) = (planner.node(e.u, e.motion.u_index), planner.node(e.w, e.motion.w_index));
            planner.adj[na].push((nb, e.motion.cost, Via::Dense(ei)));
            planner.adj[nb].push((na, e.motion.cost, Via::Dense(ei)));
        }
        Ok(planner)
    }

    fn node(&self, patch: usize, config: usize) -> usize {
        self.base[patch] + config
    }

    fn locate(&self, node: usize) -> (usize, usize) {
        let p = self.base.partition_point(|&b| b <= node) - 1;
        (p, node - self.base[p])
    }

    fn step_angle(&self) -> f64 {
        if self.table.dim() == 2 {
            self.table.step()
        } else {
            std::f64::consts::FRAC_PI_2
        }
    }

    /// Cost of one elementary rotation step inside a patch.
    pub fn rho(&self) -> f64 {
        self.options.rho.unwrap_or(self.step_angle() * self.object.max_radius())
    }

    pub fn table(&self) -> &RotationTable {
        &self.table
    }

    fn settings(&self, polys: &[&ConvexPolytope]) -> Result<TraversalSettings> {
        self.dense.settings(big_m_for_polys(polys, self.dense.dim, self.object))
    }

    /// Rejects configurations that are out of range or collide with the scene.
    pub fn check_query(&self, q: &Configuration) -> Result<()> {
        if q.rot >= self.table.len() {
            return Err(Error::InvalidQuery(format!("rotation index {} out of range", q.rot)));
        }
        if (self.scene.dim..3).any(|k| q.p[k] != 0.0) {
            return Err(Error::InvalidQuery("planar query has a nonzero z coordinate".into()));
        }
        let world = self.object.transform(q, &self.table);
        if !self.scene.in_bounds(&q.p, 1e-9) || world.iter().any(|v| !self.scene.in_bounds(v, 1e-9)) {
            return Err(Error::InvalidQuery("object leaves the scene bounds".into()));
        }
        if self.scene.in_obstacle(&q.p, 0.0) || crate::bench::pose_penetration(self.scene, self.object, q, &self.table) > self.options.validate_eps {
            return Err(Error::InvalidQuery("object intersects an obstacle".into()));
        }
        Ok(())
    }

    /// Polytope sets (single polytopes and overlapping pairs) whose union
    /// holds the posed object.
    pub fn query_contexts(&self, q: &Configuration) -> Vec<Vec<usize>> {
        let eps = self.dense.params.eps;
        let polys = &self.coarse.polytopes;
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (i, p) in polys.iter().enumerate() {
            if pose_in_union(self.object, q, &self.table, p, p, eps) {
                out.push(vec![i]);
            }
        }
        for &(i, j) in &self.coarse.edges {
            if out.iter().any(|c| c.len() == 1 && (c[0] == i || c[0] == j)) {
                continue;
            }
            if pose_in_union(self.object, q, &self.table, &polys[i], &polys[j], eps) {
                out.push(vec![i, j]);
            }
        }
        out
    }

    /// Rotations reachable by turning in place at `q` inside the context,
    /// with BFS parents; entry 0 is `q`. Planar turns are certified one step
    /// at a time; in 3D every rotation is allowed once the circumscribed
    /// ball fits in one of the polytopes.
    fn rotation_fan(&self, q: &Configuration, ctx: &[usize]) -> (Vec<Configuration>, Vec<usize>) {
        let eps = self.dense.params.eps;
        let polys = &self.coarse.polytopes;
        let (pi, pj) = (&polys[ctx[0]], &polys[*ctx.last().expect("nonempty context")]);
        let n = self.table.len();
        let mut fan = vec![*q];
        let mut parent = vec![0];
        if self.scene.dim == 3 {
            let r = self.object.max_radius();
            if ctx.iter().any(|&i| polys[i].violation(&q.p) <= -r + eps) {
                for k in (0..n).filter(|&k| k != q.rot) {
                    fan.push(Configuration::new(q.p, k));
                    parent.push(0);
                }
            }
            return (fan, parent);
        }
        let mut head = 0;
        while head < fan.len() {
            let a = fan[head];
            for k in [(a.rot + 1) % n, (a.rot + n - 1) % n] {
                if fan.iter().any(|c| c.rot == k) {
                    continue;
                }
                let b = Configuration::new(q.p, k);
                if step_in_union(self.object, &a, &b, &self.table, pi, pj, eps) {
                    fan.push(b);
                    parent.push(head);
                }
            }
            head += 1;
        }
        (fan, parent)
    }

    /// Certified motions from `q` to nearby patches sharing a polytope with
    /// one of its contexts, nearest patches first, at most `k` of them.
    pub fn connect_query(&self, q: &Configuration) -> Result<QueryVertex> {
        self.check_query(q)?;
        let contexts = self.query_contexts(q);
        if contexts.is_empty() {
            return Err(Error::Disconnected);
        }
        let mut cands: Vec<(usize, Vec<usize>, usize, f64)> = Vec::new();
        for (pi, p) in self.dense.patches.iter().enumerate() {
            let ctx = contexts.iter().position(|c| c.contains(&p.edge.0) || c.contains(&p.edge.1));
            if let Some(ci) = ctx {
                let mut ids = contexts[ci].clone();
                ids.extend([p.edge.0, p.edge.1]);
                ids.sort_unstable();
                ids.dedup();
                cands.push((pi, ids, ci, (p.centroid() - q.p).norm()));
            }
        }
        cands.sort_by(|a, b| a.3.total_cmp(&b.3).then(a.0.cmp(&b.0)));
        let cands: Vec<(usize, Vec<usize>, usize)> = cands.into_iter().map(|(pi, ids, ci, _)| (pi, ids, ci)).collect();

        let mut attachments = Vec::new();
        for (pi, ids, _) in &cands {
            if let Some(c) = self.dense.patches[*pi].configs.iter().position(|x| x.same_as(q)) {
                attachments.push(Attachment {
                    patch: *pi,
                    config: c,
                    motion: Motion {
                        waypoints: vec![*q, *q],
                        u_index: 0,
                        w_index: c,
                        cost: 0.0,
                    },
                    polys: ids.clone(),
                });
            }
        }
        let fans: Vec<(Vec<Configuration>, Vec<usize>)> = contexts.iter().map(|c| self.rotation_fan(q, c)).collect();
        let k = self.options.k.max(1);
        let batch = rayon::current_num_threads().max(k);
        for chunk in cands.chunks(batch) {
            if attachments.len() >= k {
                break;
            }
            let found: Vec<Option<Attachment>> = chunk
                .par_iter()
                .map(|(pi, ids, ci)| {
                    if attachments.iter().any(|a| a.patch == *pi) {
                        return Ok(None);
                    }
                    let polys: Vec<&ConvexPolytope> = ids.iter().map(|&i| &self.coarse.polytopes[i]).collect();
                    let st = self.settings(&polys)?;
                    let (fan, parent) = &fans[*ci];
                    let r = certify_pair(fan, &self.dense.patches[*pi].configs, &polys, self.object, &self.table, &self.online, &st);
                    Ok(match (r.status, r.motion) {
                        (PairStatus::Certified, Some(mut m)) => {
                            let mut prefix = Vec::new();
                            let mut i = m.u_index;
                            while i != 0 {
                                i = parent[i];
                                prefix.push(fan[i]);
                            }
                            prefix.reverse();
                            prefix.extend(m.waypoints);
                            m.waypoints = prefix;
                            m.u_index = 0;
                            Some(Attachment {
                                patch: *pi,
                                config: m.w_index,
                                motion: m,
                                polys: ids.clone(),
                            })
                        }
                        _ => None,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            attachments.extend(found.into_iter().flatten());
        }
        attachments.truncate(k.max(attachments.iter().filter(|a| a.motion.cost == 0.0).count()));
        if attachments.is_empty() {
            return Err(Error::Disconnected);
        }
        log::debug!("query attached to {} of {} candidate patches", attachments.len(), cands.len());
        Ok(QueryVertex { q: *q, attachments })
    }

    /// Direct motion between two query configurations sharing a context.
    fn direct(&self, a: &Configuration, b: &Configuration) -> Result<Option<Motion>> {
        let ca = self.query_contexts(a);
        let cb = self.query_contexts(b);
        for x in &ca {
            for y in &cb {
                if !x.iter().any(|i| y.contains(i)) {
                    continue;
                }
                let mut ids: Vec<usize> = x.iter().chain(y).copied().collect();
                ids.sort_unstable();
                ids.dedup();
                let polys: Vec<&ConvexPolytope> = ids.iter().map(|&i| &self.coarse.polytopes[i]).collect();
                let st = self.settings(&polys)?;
                let r = certify_pair(&[*a], &[*b], &polys, self.object, &self.table, &self.online, &st);
                if let (PairStatus::Certified, Some(m)) = (r.status, r.motion) {
                    return Ok(Some(m));
                }
            }
        }
        Ok(None)
    }

    pub fn plan(&self, start: &Configuration, goal: &Configuration) -> Result<MotionPlan> {
        self.check_query(start)?;
        self.check_query(goal)?;
        if start.same_as(goal) {
            return Ok(MotionPlan::default());
        }
        let direct = self.direct(start, goal)?;
        let (s, g) = match (self.connect_query(start), self.connect_query(goal)) {
            (Ok(s), Ok(g)) => (s, g),
            (Err(Error::Disconnected), _) | (_, Err(Error::Disconnected)) if direct.is_none() => return Err(Error::NoPath),
            (Err(Error::Disconnected), _) | (_, Err(Error::Disconnected)) => {
                return self.finish(vec![PlanSegment {
                    tag: SegmentTag::InterVertex,
                    waypoints: direct.expect("checked").waypoints,
                }]);
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };

        // Node 0 is the start, node 1 the goal; extra edges overlay the
        // static adjacency.
        let mut extra: Vec<Vec<(usize, f64, Via)>> = vec![Vec::new(); 2];
        let mut goal_in: Vec<(usize, f64, usize)> = Vec::new();
        for (i, a) in s.attachments.iter().enumerate() {
            extra[0].push((self.node(a.patch, a.config), a.motion.cost, Via::Attach(i)));
        }
        for (i, a) in g.attachments.iter().enumerate() {
            goal_in.push((self.node(a.patch, a.config), a.motion.cost, i));
        }
        if let Some(m) = &direct {
            extra[0].push((1, m.cost, Via::Direct));
        }
        let n = self.adj.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred: Vec<Option<(usize, Via)>> = vec![None; n];
        let mut heap = BinaryHeap::new();
        dist[0] = 0.0;
        heap.push(HeapItem { cost: 0.0, node: 0 });
        while let Some(HeapItem { cost, node }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            if node == 1 {
                break;
            }
            let mut relax = |to: usize, w: f64, via: Via| {
                let c = cost + w;
                if c < dist[to] {
                    dist[to] = c;
                    pred[to] = Some((node, via));
                    heap.push(HeapItem { cost: c, node: to });
                }
            };
            if node < 2 {
                for &(to, w, via) in &extra[node] {
                    relax(to, w, via);
                }
            } else {
                for &(to, w, via) in &self.adj[node] {
                    relax(to, w, via);
                }
            }
            for &(at, w, i) in &goal_in {
                if at == node {
                    relax(1, w, Via::Attach(i));
                }
            }
        }
        if !dist[1].is_finite() {
            return Err(Error::NoPath);
        }

        let mut chain = vec![1usize];
        let mut vias = Vec::new();
        let mut cur = 1;
        while let Some((p, via)) = pred[cur] {
            chain.push(p);
            vias.push(via);
            cur = p;
        }
        chain.reverse();
        vias.reverse();

        let config_of = |node: usize| -> Configuration {
            match node {
                0 => *start,
                1 => *goal,
                _ => {
                    let (p, c) = self.locate(node);
                    self.dense.patches[p].configs[c]
                }
            }
        };
        let mut segments: Vec<PlanSegment> = Vec::new();
        for (t, via) in vias.iter().enumerate() {
            let (from, to) = (chain[t], chain[t + 1]);
            match via {
                Via::Intra => {
                    let q = config_of(to);
                    match segments.last_mut() {
                        Some(s) if s.tag == SegmentTag::IntraVertex => s.waypoints.push(q),
                        _ => segments.push(PlanSegment {
                            tag: SegmentTag::IntraVertex,
                            waypoints: vec![config_of(from), q],
                        }),
                    }
                }
                Via::Dense(e) => {
                    let e = &self.dense.edges[*e];
                    let mut w = e.motion.waypoints.clone();
                    if from != self.node(e.u, e.motion.u_index) {
                        w.reverse();
                    }
                    segments.push(PlanSegment {
                        tag: SegmentTag::InterVertex,
                        waypoints: w,
                    });
                }
                Via::Attach(i) => {
                    // An in-place turn at the query vertex is a walk inside
                    // its own configuration set, not a traversal.
                    if from == 0 {
                        let w = &s.attachments[*i].motion.waypoints;
                        let k = w.iter().take_while(|q| q.p == w[0].p).count().min(w.len() - 1);
                        if k > 1 {
                            segments.push(PlanSegment {
                                tag: SegmentTag::IntraVertex,
                                waypoints: w[..k].to_vec(),
                            });
                        }
                        segments.push(PlanSegment {
                            tag: SegmentTag::InterVertex,
                            waypoints: w[k.max(1) - 1..].to_vec(),
                        });
                    } else {
                        let mut w = g.attachments[*i].motion.waypoints.clone();
                        w.reverse();
                        let n = w.len();
                        let k = w.iter().rev().take_while(|q| q.p == w[n - 1].p).count().min(n - 1);
                        segments.push(PlanSegment {
                            tag: SegmentTag::InterVertex,
                            waypoints: w[..=n - k.max(1)].to_vec(),
                        });
                        if k > 1 {
                            segments.push(PlanSegment {
                                tag: SegmentTag::IntraVertex,
                                waypoints: w[n - k..].to_vec(),
                            });
                        }
                    }
                }
                Via::Direct => segments.push(PlanSegment {
                    tag: SegmentTag::InterVertex,
                    waypoints: direct.clone().expect("direct edge exists").waypoints,
                }),
            }
        }
        segments.retain(|s| s.waypoints.windows(2).any(|w| !w[0].same_as(&w[1])));
        self.finish(segments)
    }

    fn finish(&self, segments: Vec<PlanSegment>) -> Result<MotionPlan> {
        let total = segments.iter().map(PlanSegment::cost).sum();
        let plan = MotionPlan { segments, total };
        debug_assert!(plan.junctions_continuous());
        if self.options.validate_samples > 0 {
            let rep = self.validate(&plan);
            if !rep.pass {
                return Err(Error::Numerical(format!(
                    "plan failed validation (penetration {:.3e}, bounds exit {:.3e})",
                    rep.max_penetration, rep.max_exit
                )));
            }
        }
        Ok(plan)
    }

    pub fn validate(&self, plan: &MotionPlan) -> ValidationReport {
        validate_plan(
            plan,
            self.scene,
            self.object,
            &self.table,
            self.options.validate_samples.max(1),
            self.options.validate_eps,
        )
    }
}

#[derive(Debug, PartialEq)]
struct HeapItem {
    cost: f64,
    node: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
