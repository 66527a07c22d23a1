//! The traversal certificate between two configuration sets: MILP assembly
//! and decoding, the matrix-arithmetic fast path for zero intermediate
//! waypoints, and a direct search over single intermediate waypoints.

use crate::encode::{reach::apex_offset, segment_block_satisfied, segment_constraints, step_segments_milp, AffinePoint, BlockOptions, ExprCtx, GroupInfo};
use crate::geometry::{Configuration, ConvexPolytope, RigidObject, RotationTable, Vec3};
use crate::milp::{solve_milp, BnbOptions, MilpModel, MilpStatus};

#[derive(Debug, Clone, PartialEq)]
pub struct TraversalSettings {
    pub n_divisions: usize,
    pub eps: f64,
    /// Largest rotation-table step per waypoint transition.
    pub max_step: usize,
    pub big_m: f64,
    /// Disable the symbolic row reductions (uniform big-M everywhere).
    pub plain: bool,
}

#[derive(Debug, Clone)]
pub struct TraversalProblem<'a> {
    pub u: &'a [Configuration],
    pub w: &'a [Configuration],
    pub polys: Vec<&'a ConvexPolytope>,
    /// Intermediate waypoint count `N`.
    pub n_waypoints: usize,
}

/// Certified motion: waypoints `q_0 ∈ u`, …, `q_{N+1} ∈ w`.
#[derive(Debug, Clone, PartialEq)]
pub struct Motion {
    pub waypoints: Vec<Configuration>,
    pub u_index: usize,
    pub w_index: usize,
    /// Sum of 1-norm translations.
    pub cost: f64,
}

pub fn translation_cost(path: &[Configuration]) -> f64 {
    path.windows(2).map(|w| (w[1].p - w[0].p).abs().sum()).sum()
}

/// Built model plus the variable handles needed to decode a solution.
pub struct TraversalModel {
    pub model: MilpModel,
    start_sel: Vec<usize>,
    end_sel: Vec<usize>,
    /// Intermediate positions, `dim` variables each.
    pos: Vec<Vec<usize>>,
    /// Intermediate rotation selectors `(k, var)`; in 3D one shared set.
    rot_sel: Vec<Vec<(usize, usize)>>,
    /// Per step `(k, s, var)`.
    delta: Vec<Vec<(usize, i64, usize)>>,
    dim: usize,
    /// A block was found infeasible while building.
    pub structurally_infeasible: bool,
}

impl TraversalModel {
    pub fn n_waypoints(&self) -> usize {
        self.pos.len()
    }

    /// Waypoint sequence encoded by `x`. Positions across rotation steps are
    /// snapped so rotation and translation never mix.
    pub fn decode(&self, x: &[f64], prob: &TraversalProblem) -> Motion {
        let pick = |vars: &[usize]| vars.iter().enumerate().max_by(|a, b| x[*a.1].total_cmp(&x[*b.1])).map(|(i, _)| i).unwrap_or(0);
        let ua = pick(&self.start_sel);
        let wb = pick(&self.end_sel);
        let n = self.pos.len();
        let mut path = Vec::with_capacity(n + 2);
        path.push(prob.u[ua]);
        for t in 0..n {
            let mut p = Vec3::zeros();
            for (k, v) in self.pos[t].iter().enumerate() {
                p[k] = x[*v];
            }
            let sel = if self.dim == 3 { &self.rot_sel[0] } else { &self.rot_sel[t] };
            let rot = sel.iter().max_by(|a, b| x[a.1].total_cmp(&x[b.1])).map(|(k, _)| *k).unwrap_or(prob.u[ua].rot);
            path.push(Configuration::new(p, rot));
        }
        path.push(prob.w[wb]);
        let rotating = |t: usize| -> bool {
            if self.dim == 3 {
                return false;
            }
            self.delta[t].iter().any(|&(_, s, v)| s != 0 && x[v] > 0.5)
        };
        for t in 0..=n {
            if rotating(t) && t + 1 <= n {
                path[t + 1].p = path[t].p;
            }
        }
        for t in (0..=n).rev() {
            if rotating(t) && t >= 1 && t <= n {
                path[t].p = path[t + 1].p;
            }
        }
        let cost = translation_cost(&path);
        Motion {
            waypoints: path,
            u_index: ua,
            w_index: wb,
            cost,
        }
    }
}

fn bbox_of(polys: &[&ConvexPolytope], dim: usize) -> (Vec3, Vec3) {
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
        hi[k] = 0.0;
    }
    (lo, hi)
}

fn unit(k: usize) -> Vec3 {
    let mut e = Vec3::zeros();
    e[k] = 1.0;
    e
}

/// Assembles the traversal MILP: one-hot endpoint selection over `u` and
/// `w`, intermediate positions and rotation selectors, per-step rotation
/// transitions gating translation, the 1-norm objective, and interpolation
/// blocks for every swept-boundary segment. The static segments at the two
/// endpoints are not re-encoded: endpoint configurations are free by
/// construction.
pub fn build_traversal_model(prob: &TraversalProblem, obj: &RigidObject, table: &RotationTable, st: &TraversalSettings) -> TraversalModel {
    let dim = obj.dim();
    let n_r = table.len();
    let n = prob.n_waypoints;
    let mut m = MilpModel::new();
    m.big_m = st.big_m;
    let mut groups: Vec<GroupInfo> = Vec::new();

    let start_sel: Vec<usize> = prob.u.iter().map(|_| m.add_binary(0.0)).collect();
    let end_sel: Vec<usize> = prob.w.iter().map(|_| m.add_binary(0.0)).collect();
    m.add_eq(start_sel.iter().map(|&v| (v, 1.0)).collect(), 1.0);
    m.add_eq(end_sel.iter().map(|&v| (v, 1.0)).collect(), 1.0);
    let g_start = groups.len();
    groups.push(GroupInfo {
        members: start_sel.clone(),
        exactly_one: true,
    });
    let g_end = groups.len();
    groups.push(GroupInfo {
        members: end_sel.clone(),
        exactly_one: true,
    });

    let (lo, hi) = bbox_of(&prob.polys, dim);
    let pos: Vec<Vec<usize>> = (0..n).map(|_| (0..dim).map(|k| m.add_continuous(lo[k], hi[k], 0.0)).collect()).collect();

    // Rotation selectors of intermediate waypoints (2D) or the shared one (3D).
    let mut rot_sel: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut g_rot: Vec<usize> = Vec::new();
    let mut structurally_infeasible = false;
    if dim == 3 {
        let ks: Vec<usize> = (0..n_r)
            .filter(|k| prob.u.iter().any(|q| q.rot == *k) && prob.w.iter().any(|q| q.rot == *k))
            .collect();
        let sel: Vec<(usize, usize)> = ks.iter().map(|&k| (k, m.add_binary(0.0))).collect();
        if sel.is_empty() {
            structurally_infeasible = true;
            m.add_le(Vec::new(), -1.0);
        } else {
            m.add_eq(sel.iter().map(|&(_, v)| (v, 1.0)).collect(), 1.0);
        }
        for (side, confs) in [(&start_sel, prob.u), (&end_sel, prob.w)] {
            for (i, q) in confs.iter().enumerate() {
                if !ks.contains(&q.rot) {
                    m.vars[side[i]].hi = 0.0;
                }
            }
            for &(k, bv) in &sel {
                let mut terms: Vec<(usize, f64)> = confs.iter().enumerate().filter(|(_, q)| q.rot == k).map(|(i, _)| (side[i], 1.0)).collect();
                terms.push((bv, -1.0));
                m.add_eq(terms, 0.0);
            }
        }
        g_rot.push(groups.len());
        groups.push(GroupInfo {
            members: sel.iter().map(|s| s.1).collect(),
            exactly_one: true,
        });
        rot_sel.push(sel);
    } else {
        for _ in 0..n {
            let sel: Vec<(usize, usize)> = (0..n_r).map(|k| (k, m.add_binary(0.0))).collect();
            m.add_eq(sel.iter().map(|&(_, v)| (v, 1.0)).collect(), 1.0);
            g_rot.push(groups.len());
            groups.push(GroupInfo {
                members: sel.iter().map(|s| s.1).collect(),
                exactly_one: true,
            });
            rot_sel.push(sel);
        }
    }

    // Variables summing to "waypoint t has rotation k".
    let rot_vars = |t: usize, k: usize, rot_sel: &Vec<Vec<(usize, usize)>>| -> Vec<usize> {
        if t == 0 {
            prob.u.iter().enumerate().filter(|(_, q)| q.rot == k).map(|(i, _)| start_sel[i]).collect()
        } else if t == n + 1 {
            prob.w.iter().enumerate().filter(|(_, q)| q.rot == k).map(|(i, _)| end_sel[i]).collect()
        } else {
            rot_sel[t - 1].iter().filter(|(kk, _)| *kk == k).map(|(_, v)| *v).collect()
        }
    };

    // Rotation transitions per step (2D only).
    let s_max = st.max_step.min((n_r.saturating_sub(1)) / 2) as i64;
    let mut delta: Vec<Vec<(usize, i64, usize)>> = Vec::new();
    let mut g_delta: Vec<Option<usize>> = Vec::new();
    if dim == 2 {
        for t in 0..=n {
            let avail_a: Vec<usize> = (0..n_r).filter(|&k| !rot_vars(t, k, &rot_sel).is_empty()).collect();
            let avail_b: Vec<usize> = (0..n_r).filter(|&k| !rot_vars(t + 1, k, &rot_sel).is_empty()).collect();
            let mut d = Vec::new();
            for &k in &avail_a {
                for s in -s_max..=s_max {
                    let k2 = (k as i64 + s).rem_euclid(n_r as i64) as usize;
                    if avail_b.contains(&k2) {
                        d.push((k, s, m.add_binary(0.0)));
                    }
                }
            }
            for k in 0..n_r {
                let mut terms: Vec<(usize, f64)> = d.iter().filter(|e| e.0 == k).map(|e| (e.2, 1.0)).collect();
                terms.extend(rot_vars(t, k, &rot_sel).into_iter().map(|v| (v, -1.0)));
                if !terms.is_empty() {
                    m.add_eq(terms, 0.0);
                }
                let mut terms: Vec<(usize, f64)> = d
                    .iter()
                    .filter(|e| (e.0 as i64 + e.1).rem_euclid(n_r as i64) as usize == k)
                    .map(|e| (e.2, 1.0))
                    .collect();
                terms.extend(rot_vars(t + 1, k, &rot_sel).into_iter().map(|v| (v, -1.0)));
                if !terms.is_empty() {
                    m.add_eq(terms, 0.0);
                }
            }
            if d.is_empty() {
                structurally_infeasible = true;
                m.add_le(Vec::new(), -1.0);
                g_delta.push(None);
            } else {
                g_delta.push(Some(groups.len()));
                groups.push(GroupInfo {
                    members: d.iter().map(|e| e.2).collect(),
                    exactly_one: true,
                });
            }
            delta.push(d);
        }
    }

    // Position coordinate k of waypoint t as linear terms plus constant.
    let coord = |t: usize, k: usize| -> Vec<(usize, f64)> {
        if t == 0 {
            prob.u.iter().enumerate().map(|(i, q)| (start_sel[i], q.p[k])).filter(|e| e.1 != 0.0).collect()
        } else if t == n + 1 {
            prob.w.iter().enumerate().map(|(i, q)| (end_sel[i], q.p[k])).filter(|e| e.1 != 0.0).collect()
        } else {
            vec![(pos[t - 1][k], 1.0)]
        }
    };

    // 1-norm objective, translation gated by "no rotation in this step".
    for t in 0..=n {
        let ds: Vec<usize> = (0..dim).map(|_| m.add_continuous(0.0, f64::INFINITY, 1.0)).collect();
        for k in 0..dim {
            let mut diff: Vec<(usize, f64)> = coord(t + 1, k);
            diff.extend(coord(t, k).into_iter().map(|(v, c)| (v, -c)));
            let mut up = diff.clone();
            up.push((ds[k], -1.0));
            m.add_le(up, 0.0);
            let mut down: Vec<(usize, f64)> = diff.into_iter().map(|(v, c)| (v, -c)).collect();
            down.push((ds[k], -1.0));
            m.add_le(down, 0.0);
        }
        if dim == 2 {
            let mut gate: Vec<(usize, f64)> = ds.iter().map(|&v| (v, 1.0)).collect();
            gate.extend(delta[t].iter().filter(|e| e.1 == 0).map(|e| (e.2, -st.big_m)));
            m.add_le(gate, 0.0);
        }
    }

    let vertex = |t: usize, v: &Vec3| -> AffinePoint {
        if t == 0 || t == n + 1 {
            let (g, sel, confs) = if t == 0 { (g_start, &start_sel, prob.u) } else { (g_end, &end_sel, prob.w) };
            AffinePoint {
                constant: Vec3::zeros(),
                terms: Vec::new(),
                groups: vec![(g, confs.iter().enumerate().map(|(i, q)| (sel[i], table.get(q.rot) * v + q.p)).collect())],
            }
        } else {
            let terms = (0..dim).map(|k| (pos[t - 1][k], unit(k))).collect();
            let (g, sel) = if dim == 3 { (g_rot[0], &rot_sel[0]) } else { (g_rot[t - 1], &rot_sel[t - 1]) };
            let groups = if v.norm() == 0.0 {
                Vec::new()
            } else {
                vec![(g, sel.iter().map(|&(k, bv)| (bv, table.get(k) * v)).collect())]
            };
            AffinePoint {
                constant: Vec3::zeros(),
                terms,
                groups,
            }
        }
    };

    let var_lo: Vec<f64> = m.vars.iter().map(|v| v.lo).collect();
    let var_hi: Vec<f64> = m.vars.iter().map(|v| v.hi).collect();
    let ctx = ExprCtx {
        lo: &var_lo,
        hi: &var_hi,
        groups: &groups,
    };
    let opts = BlockOptions {
        n_divisions: st.n_divisions,
        eps: st.eps,
        plain: st.plain,
        big_m: st.big_m,
    };

    for t in 0..=n {
        for v in obj.vertices() {
            let a = vertex(t, v);
            let b = vertex(t + 1, v);
            let mut mid = a.lerp(&b, 0.5);
            if dim == 2 {
                if let Some(g) = g_delta[t] {
                    let offs: Vec<(usize, Vec3)> = delta[t]
                        .iter()
                        .filter(|e| e.1 != 0)
                        .map(|&(k, s, dv)| (dv, apex_offset(v, table, k, s)))
                        .filter(|e| e.1.norm() > 0.0)
                        .collect();
                    if !offs.is_empty() {
                        mid.groups.push((g, offs));
                    }
                }
            }
            for (x, y) in [(&a, &mid), (&mid, &b)] {
                let blk = segment_constraints(&mut m, x, y, &prob.polys, &ctx, &opts);
                structurally_infeasible |= blk.infeasible;
            }
        }
        if t + 1 <= n {
            let ws: Vec<AffinePoint> = obj.vertices().iter().map(|v| vertex(t + 1, v)).collect();
            let c = vertex(t + 1, &Vec3::zeros());
            for &(i, j) in obj.edges() {
                structurally_infeasible |= segment_constraints(&mut m, &ws[i], &ws[j], &prob.polys, &ctx, &opts).infeasible;
            }
            for w in &ws {
                structurally_infeasible |= segment_constraints(&mut m, &c, w, &prob.polys, &ctx, &opts).infeasible;
            }
        }
    }

    TraversalModel {
        model: m,
        start_sel,
        end_sel,
        pos,
        rot_sel,
        delta,
        dim,
        structurally_infeasible,
    }
}

/// Whether every step of `path` satisfies the interpolation-grid conditions
/// the traversal model imposes (endpoint statics excluded).
pub fn path_satisfies(path: &[Configuration], obj: &RigidObject, table: &RotationTable, polys: &[&ConvexPolytope], st: &TraversalSettings) -> bool {
    let last = path.len() - 1;
    path.windows(2).enumerate().all(|(t, w)| {
        let segs = match step_segments_milp(obj, &w[0], &w[1], table, st.max_step, t + 1 < last) {
            Some(s) => s,
            None => return false,
        };
        segs.iter().all(|(a, b)| segment_block_satisfied(a, b, polys, st.n_divisions, st.eps))
    })
}

/// Zero-waypoint certificate by direct evaluation: the first `(a, b)` pair
/// (row-major over `u × w`) whose single step meets every grid condition.
/// Accepts exactly when the zero-waypoint model is feasible.
pub fn fast_verify_n0(
    u: &[Configuration],
    w: &[Configuration],
    polys: &[&ConvexPolytope],
    obj: &RigidObject,
    table: &RotationTable,
    st: &TraversalSettings,
) -> Option<(usize, usize)> {
    for (a, qa) in u.iter().enumerate() {
        for (b, qb) in w.iter().enumerate() {
            if !step_admissible(qa, qb, table, st.max_step) {
                continue;
            }
            if path_satisfies(&[*qa, *qb], obj, table, polys, st) {
                return Some((a, b));
            }
        }
    }
    None
}

fn step_admissible(qa: &Configuration, qb: &Configuration, table: &RotationTable, max_step: usize) -> bool {
    if qa.rot == qb.rot {
        return true;
    }
    if table.dim() == 3 {
        return false;
    }
    let n = table.len();
    qa.p == qb.p && table.signed_diff(qa.rot, qb.rot).unsigned_abs() as usize <= max_step.min(n.saturating_sub(1) / 2)
}

/// Candidate intermediate positions for the one-waypoint search: a lattice
/// over the bounding box of the polytope set, filtered to the union.
fn lattice_points(polys: &[&ConvexPolytope], dim: usize, per_axis: usize) -> Vec<Vec3> {
    let (lo, hi) = bbox_of(polys, dim);
    let mut out = Vec::new();
    let steps = per_axis.max(2);
    let idx = |i: usize, k: usize| lo[k] + (hi[k] - lo[k]) * (i as f64 + 0.5) / steps as f64;
    let nz = if dim == 3 { steps } else { 1 };
    for i in 0..steps {
        for j in 0..steps {
            for l in 0..nz {
                let x = Vec3::new(idx(i, 0), idx(j, 1), if dim == 3 { idx(l, 2) } else { 0.0 });
                if polys.iter().any(|p| p.contains(&x, 0.0)) {
                    out.push(x);
                }
            }
        }
    }
    for p in polys {
        if let Ok((c, r)) = p.chebyshev_center() {
            if r > 0.0 {
                out.push(c);
            }
        }
    }
    out
}

/// Direct search for a one-waypoint motion: the intermediate pose either
/// completes one endpoint's motion type (translate then rotate, or rotate
/// then translate) or is a lattice point reached by two translations.
pub fn search_one_waypoint(
    u: &[Configuration],
    w: &[Configuration],
    polys: &[&ConvexPolytope],
    obj: &RigidObject,
    table: &RotationTable,
    st: &TraversalSettings,
    lattice: usize,
) -> Option<Motion> {
    let dim = obj.dim();
    let check = |a: usize, b: usize, mid: Configuration| -> Option<Motion> {
        let path = [u[a], mid, w[b]];
        if !step_admissible(&path[0], &path[1], table, st.max_step) || !step_admissible(&path[1], &path[2], table, st.max_step) {
            return None;
        }
        path_satisfies(&path, obj, table, polys, st).then(|| Motion {
            cost: translation_cost(&path),
            waypoints: path.to_vec(),
            u_index: a,
            w_index: b,
        })
    };
    for (a, qa) in u.iter().enumerate() {
        for (b, qb) in w.iter().enumerate() {
            if qa.rot != qb.rot {
                if dim == 3 {
                    continue;
                }
                if let Some(m) = check(a, b, Configuration::new(qb.p, qa.rot)) {
                    return Some(m);
                }
                if let Some(m) = check(a, b, Configuration::new(qa.p, qb.rot)) {
                    return Some(m);
                }
            }
        }
    }
    let pts = lattice_points(polys, dim, lattice);
    for (a, qa) in u.iter().enumerate() {
        for (b, qb) in w.iter().enumerate() {
            if qa.rot != qb.rot {
                continue;
            }
            for x in &pts {
                if let Some(m) = check(a, b, Configuration::new(*x, qa.rot)) {
                    return Some(m);
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraversalOutcome {
    Certified(Motion),
    Infeasible,
    /// Node budget exhausted or the model was reduced by a cap.
    Unverified,
}

/// Solves the traversal model and re-checks the decoded motion directly.
pub fn verify_traversal(prob: &TraversalProblem, obj: &RigidObject, table: &RotationTable, st: &TraversalSettings, bnb: &BnbOptions) -> TraversalOutcome {
    if prob.u.is_empty() || prob.w.is_empty() {
        return TraversalOutcome::Infeasible;
    }
    let tm = build_traversal_model(prob, obj, table, st);
    if tm.structurally_infeasible {
        return TraversalOutcome::Infeasible;
    }
    let sol = solve_milp(&tm.model, bnb);
    match sol.status {
        MilpStatus::Optimal | MilpStatus::Feasible => {
            let motion = tm.decode(&sol.values, prob);
            if path_satisfies(&motion.waypoints, obj, table, &prob.polys, st) {
                TraversalOutcome::Certified(motion)
            } else {
                log::warn!("decoded traversal failed direct re-check; treating as unverified");
                TraversalOutcome::Unverified
            }
        }
        MilpStatus::Infeasible => TraversalOutcome::Infeasible,
        MilpStatus::IterationLimit => TraversalOutcome::Unverified,
    }
}
