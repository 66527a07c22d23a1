//! Branch-and-bound over binary variables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;

use log::{debug, trace};

use super::lp::LpError;
use super::model::{MilpModel, MilpSolution, MilpStatus, Relation};
use super::propagate::RowIndex;

const CERT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Optimize,
    /// Stop at the first verified integral point.
    Feasibility,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpEngine {
    /// In-crate dense tableau; rebuilds every node.
    Dense,
    /// Sparse revised simplex (minilp) with warm-started children.
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeOrder {
    /// Lowest relaxation bound first, deeper first on ties, then creation order.
    BestFirst,
    /// Deepest first, then bound, then creation order.
    DepthFirst,
}

#[derive(Debug, Clone)]
pub struct BnbOptions {
    pub mode: SearchMode,
    pub node_limit: usize,
    pub engine: LpEngine,
    pub order: NodeOrder,
    pub propagate: bool,
    pub int_tol: f64,
    pub mip_start: Option<Vec<f64>>,
}

impl Default for BnbOptions {
    fn default() -> Self {
        Self {
            mode: SearchMode::Optimize,
            node_limit: 100_000,
            engine: LpEngine::Sparse,
            order: NodeOrder::BestFirst,
            propagate: true,
            int_tol: 1e-6,
            mip_start: None,
        }
    }
}

impl BnbOptions {
    pub fn feasibility() -> Self {
        Self {
            mode: SearchMode::Feasibility,
            order: NodeOrder::DepthFirst,
            ..Self::default()
        }
    }
}

/// Persistent list of branching decisions shared between siblings.
struct Fix {
    var: usize,
    val: f64,
    parent: Option<Rc<Fix>>,
}

struct Warm {
    sol: minilp::Solution,
    fixed: Vec<(usize, f64)>,
}

struct Node {
    bound: f64,
    depth: usize,
    id: usize,
    fixes: Option<Rc<Fix>>,
    warm: Option<Rc<Warm>>,
    order: NodeOrder,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: "greater" means "popped first".
    fn cmp(&self, other: &Self) -> Ordering {
        let by_bound = other.bound.total_cmp(&self.bound);
        let by_depth = self.depth.cmp(&other.depth);
        let by_id = other.id.cmp(&self.id);
        match self.order {
            NodeOrder::BestFirst => by_bound.then(by_depth).then(by_id),
            NodeOrder::DepthFirst => by_depth.then(by_bound).then(by_id),
        }
    }
}

enum NodeLp {
    Solved { x: Vec<f64>, obj: f64, warm: Option<Warm> },
    Infeasible,
    Trouble,
}

struct SparseCtx {
    vars: Vec<minilp::Variable>,
    root: Rc<Warm>,
}

fn build_sparse(model: &MilpModel, lo: &[f64], hi: &[f64]) -> Result<(Vec<minilp::Variable>, minilp::Solution), minilp::Error> {
    let mut p = minilp::Problem::new(minilp::OptimizationDirection::Minimize);
    let vars: Vec<minilp::Variable> = (0..model.vars.len()).map(|v| p.add_var(model.objective[v], (lo[v], hi[v]))).collect();
    for c in &model.constraints {
        let mut e = minilp::LinearExpr::empty();
        for &(v, a) in &c.terms {
            e.add(vars[v], a);
        }
        let op = match c.rel {
            Relation::Le => minilp::ComparisonOp::Le,
            Relation::Eq => minilp::ComparisonOp::Eq,
        };
        p.add_constraint(e, op, c.rhs);
    }
    let sol = p.solve()?;
    Ok((vars, sol))
}

fn guard<T>(f: impl FnOnce() -> T) -> Option<T> {
    std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).ok()
}

/// Warm-started node solve. minilp's `fix_var` occasionally reports a
/// feasible node as infeasible, so that verdict is confirmed by a cold solve.
fn solve_sparse_node(model: &MilpModel, ctx: &SparseCtx, base: &Rc<Warm>, lo: &[f64], hi: &[f64], binaries: &[usize]) -> NodeLp {
    let mut fixed = base.fixed.clone();
    let mut pending = Vec::new();
    for &v in binaries {
        if lo[v] == hi[v] {
            match fixed.binary_search_by_key(&v, |&(k, _)| k) {
                Ok(_) => {}
                Err(pos) => {
                    fixed.insert(pos, (v, lo[v]));
                    pending.push((v, lo[v]));
                }
            }
        }
    }
    let out = guard(|| {
        let mut sol = base.sol.clone();
        for &(v, val) in &pending {
            sol = sol.fix_var(ctx.vars[v], val)?;
        }
        Ok::<_, minilp::Error>(sol)
    });
    match out {
        None => NodeLp::Trouble,
        Some(Err(minilp::Error::Infeasible)) => match guard(|| build_sparse(model, lo, hi)) {
            Some(Ok((_, sol))) => sparse_solved(ctx, sol, fixed),
            Some(Err(minilp::Error::Infeasible)) => NodeLp::Infeasible,
            _ => NodeLp::Trouble,
        },
        Some(Err(minilp::Error::Unbounded)) => NodeLp::Trouble,
        Some(Ok(sol)) => sparse_solved(ctx, sol, fixed),
    }
}

fn sparse_solved(ctx: &SparseCtx, sol: minilp::Solution, fixed: Vec<(usize, f64)>) -> NodeLp {
    let x: Vec<f64> = ctx.vars.iter().map(|&v| *sol.var_value(v)).collect();
    let obj = sol.objective();
    NodeLp::Solved {
        x,
        obj,
        warm: Some(Warm { sol, fixed }),
    }
}

fn solve_dense_node(model: &MilpModel, lo: &[f64], hi: &[f64]) -> NodeLp {
    match model.to_lp(lo, hi).solve() {
        Ok(opt) => NodeLp::Solved {
            x: opt.x,
            obj: opt.objective,
            warm: None,
        },
        Err(LpError::Infeasible) => NodeLp::Infeasible,
        Err(_) => NodeLp::Trouble,
    }
}

fn fix_chain(mut f: Option<&Rc<Fix>>, lo: &mut [f64], hi: &mut [f64]) -> bool {
    while let Some(fx) = f {
        if fx.val > 0.5 {
            if hi[fx.var] < 0.5 {
                return false;
            }
            lo[fx.var] = 1.0;
        } else {
            if lo[fx.var] > 0.5 {
                return false;
            }
            hi[fx.var] = 0.0;
        }
        f = fx.parent.as_ref();
    }
    true
}

/// Rounds binaries; if the rounding leaves rows violated beyond tolerance,
/// re-solves the continuous part with those binaries fixed.
fn certify(
    model: &MilpModel,
    x: &[f64],
    binaries: &[usize],
    lo: &[f64],
    hi: &[f64],
    engine: LpEngine,
    sparse: Option<&SparseCtx>,
    warm: Option<&Rc<Warm>>,
) -> Option<Vec<f64>> {
    let mut y = x.to_vec();
    for &v in binaries {
        y[v] = y[v].round();
    }
    if model.is_feasible_point(&y, CERT_TOL) {
        return Some(y);
    }
    let mut lo2 = lo.to_vec();
    let mut hi2 = hi.to_vec();
    for &v in binaries {
        lo2[v] = y[v];
        hi2[v] = y[v];
    }
    let polished = match (engine, sparse, warm) {
        (LpEngine::Sparse, Some(ctx), Some(w)) => solve_sparse_node(model, ctx, w, &lo2, &hi2, binaries),
        _ => solve_dense_node(model, &lo2, &hi2),
    };
    if let NodeLp::Solved { x, .. } = polished {
        let mut z = x;
        for &v in binaries {
            z[v] = z[v].round();
        }
        if model.is_feasible_point(&z, CERT_TOL) {
            return Some(z);
        }
    }
    None
}

pub fn solve_milp(model: &MilpModel, opts: &BnbOptions) -> MilpSolution {
    let n = model.vars.len();
    let binaries: Vec<usize> = (0..n).filter(|&v| model.vars[v].binary).collect();
    let mut best: Option<(Vec<f64>, f64)> = None;

    if let Some(start) = &opts.mip_start {
        if model.is_feasible_point(start, CERT_TOL) {
            let obj = model.objective_value(start);
            if opts.mode == SearchMode::Feasibility {
                return MilpSolution {
                    status: MilpStatus::Feasible,
                    values: start.clone(),
                    objective: obj,
                    nodes: 0,
                };
            }
            best = Some((start.clone(), obj));
        } else {
            debug!("mip start rejected (violation {:.3e})", model.max_violation(start));
        }
    }

    let infeasible = |nodes| MilpSolution {
        status: MilpStatus::Infeasible,
        values: Vec::new(),
        objective: f64::INFINITY,
        nodes,
    };

    let mut root_lo: Vec<f64> = model.vars.iter().map(|v| v.lo).collect();
    let mut root_hi: Vec<f64> = model.vars.iter().map(|v| v.hi).collect();
    let index = RowIndex::new(model);
    if opts.propagate && !index.propagate(&mut root_lo, &mut root_hi, None) {
        return infeasible(0);
    }

    let sparse = if opts.engine == LpEngine::Sparse {
        match guard(|| build_sparse(model, &root_lo, &root_hi)) {
            Some(Ok((vars, sol))) => {
                let fixed = binaries.iter().filter(|&&v| root_lo[v] == root_hi[v]).map(|&v| (v, root_lo[v])).collect();
                Some(SparseCtx {
                    vars,
                    root: Rc::new(Warm { sol, fixed }),
                })
            }
            Some(Err(minilp::Error::Infeasible)) => return infeasible(1),
            _ => None,
        }
    } else {
        None
    };
    let engine = if sparse.is_some() { LpEngine::Sparse } else { LpEngine::Dense };

    let mut heap = BinaryHeap::new();
    let mut next_id = 0usize;
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        depth: 0,
        id: next_id,
        fixes: None,
        warm: None,
        order: opts.order,
    });
    next_id += 1;
    let mut nodes = 0usize;
    let mut trouble = false;
    let mut root_bound = f64::NEG_INFINITY;

    while let Some(node) = heap.pop() {
        if let Some((_, inc)) = &best {
            if node.bound >= inc - 1e-9 {
                continue;
            }
        }
        if nodes >= opts.node_limit {
            let (values, objective) = best.clone().unwrap_or((Vec::new(), f64::INFINITY));
            debug!("node limit {} reached", opts.node_limit);
            return MilpSolution {
                status: MilpStatus::IterationLimit,
                values,
                objective,
                nodes,
            };
        }
        nodes += 1;

        let mut lo = root_lo.clone();
        let mut hi = root_hi.clone();
        if !fix_chain(node.fixes.as_ref(), &mut lo, &mut hi) {
            continue;
        }
        if opts.propagate {
            let seeds: Vec<usize> = {
                let mut s = Vec::new();
                let mut f = node.fixes.as_ref();
                while let Some(fx) = f {
                    s.push(fx.var);
                    f = fx.parent.as_ref();
                }
                s
            };
            if !seeds.is_empty() && !index.propagate(&mut lo, &mut hi, Some(&seeds)) {
                continue;
            }
        }

        let result = match (&sparse, engine) {
            (Some(ctx), LpEngine::Sparse) => {
                let base = node.warm.clone().unwrap_or_else(|| ctx.root.clone());
                solve_sparse_node(model, ctx, &base, &lo, &hi, &binaries)
            }
            _ => solve_dense_node(model, &lo, &hi),
        };
        let (x, obj, warm) = match result {
            NodeLp::Solved { x, obj, warm } => (x, obj, warm),
            NodeLp::Infeasible => continue,
            NodeLp::Trouble => {
                trouble = true;
                continue;
            }
        };
        if node.depth == 0 {
            root_bound = obj;
        }
        if let Some((_, inc)) = &best {
            if obj >= inc - 1e-9 {
                continue;
            }
        }

        let mut branch_var = None;
        let mut best_frac = opts.int_tol;
        for &v in &binaries {
            let f = (x[v] - x[v].floor()).min(x[v].ceil() - x[v]);
            if f > best_frac + 1e-12 {
                best_frac = f;
                branch_var = Some(v);
            }
        }
        let warm = warm.map(Rc::new);

        match branch_var {
            None => {
                let cert = certify(model, &x, &binaries, &lo, &hi, engine, sparse.as_ref(), warm.as_ref());
                match cert {
                    Some(y) => {
                        let val = model.objective_value(&y);
                        trace!("incumbent {val} at node {nodes}");
                        if opts.mode == SearchMode::Feasibility {
                            return MilpSolution {
                                status: MilpStatus::Feasible,
                                values: y,
                                objective: val,
                                nodes,
                            };
                        }
                        if best.as_ref().is_none_or(|(_, b)| val < *b) {
                            best = Some((y, val));
                        }
                    }
                    None => {
                        debug!("integral relaxation failed certification at node {nodes}");
                        trouble = true;
                    }
                }
            }
            Some(v) => {
                // Keep warm starts only while the frontier is small.
                let keep = if heap.len() < 512 { warm } else { None };
                let up_first = x[v] >= 0.5;
                let first = if up_first { 1.0 } else { 0.0 };
                for val in [first, 1.0 - first] {
                    heap.push(Node {
                        bound: obj,
                        depth: node.depth + 1,
                        id: next_id,
                        fixes: Some(Rc::new(Fix {
                            var: v,
                            val,
                            parent: node.fixes.clone(),
                        })),
                        warm: keep.clone(),
                        order: opts.order,
                    });
                    next_id += 1;
                }
            }
        }
    }

    match best {
        Some((values, objective)) => {
            debug_assert!(root_bound <= objective + 1e-6 * (1.0 + objective.abs()));
            MilpSolution {
                status: MilpStatus::Optimal,
                values,
                objective,
                nodes,
            }
        }
        None if trouble => MilpSolution {
            status: MilpStatus::IterationLimit,
            values: Vec::new(),
            objective: f64::INFINITY,
            nodes,
        },
        None => infeasible(nodes),
    }
}
