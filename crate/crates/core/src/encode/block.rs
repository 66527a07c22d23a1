//! Interpolation-grid MILP block for one segment and its direct evaluator.

use crate::geometry::{ConvexPolytope, Vec3};
use crate::milp::MilpModel;

/// Binaries of which at most one (or exactly one) is set.
#[derive(Debug, Clone)]
pub struct GroupInfo {
    pub members: Vec<usize>,
    pub exactly_one: bool,
}

/// Point that is affine in model variables:
/// `constant + Σ coeff·x_var + Σ_groups Σ coeff·β`.
#[derive(Debug, Clone, Default)]
pub struct AffinePoint {
    pub constant: Vec3,
    pub terms: Vec<(usize, Vec3)>,
    pub groups: Vec<(usize, Vec<(usize, Vec3)>)>,
}

impl AffinePoint {
    pub fn constant(c: Vec3) -> Self {
        Self {
            constant: c,
            ..Self::default()
        }
    }

    /// `(1 − t)·self + t·other`, merging shared variables and groups.
    pub fn lerp(&self, other: &Self, t: f64) -> Self {
        let mut out = self.scaled(1.0 - t);
        out.add_scaled(other, t);
        out
    }

    pub fn scaled(&self, f: f64) -> Self {
        Self {
            constant: self.constant * f,
            terms: self.terms.iter().map(|(v, c)| (*v, c * f)).collect(),
            groups: self.groups.iter().map(|(g, ts)| (*g, ts.iter().map(|(v, c)| (*v, c * f)).collect())).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Self, f: f64) {
        self.constant += other.constant * f;
        for (v, c) in &other.terms {
            match self.terms.iter_mut().find(|(w, _)| w == v) {
                Some((_, d)) => *d += c * f,
                None => self.terms.push((*v, c * f)),
            }
        }
        for (g, ts) in &other.groups {
            let idx = match self.groups.iter().position(|(h, _)| h == g) {
                Some(i) => i,
                None => {
                    self.groups.push((*g, Vec::new()));
                    self.groups.len() - 1
                }
            };
            let mine = &mut self.groups[idx].1;
            for (v, c) in ts {
                match mine.iter_mut().find(|(w, _)| w == v) {
                    Some((_, d)) => *d += c * f,
                    None => mine.push((*v, c * f)),
                }
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec3 {
        let mut p = self.constant;
        for (v, c) in &self.terms {
            p += c * x[*v];
        }
        for (_, ts) in &self.groups {
            for (v, c) in ts {
                p += c * x[*v];
            }
        }
        p
    }

    /// Symbolic equality (same constant and coefficients to 1e-12).
    pub fn same_as(&self, other: &Self) -> bool {
        let mut d = self.clone();
        d.add_scaled(other, -1.0);
        d.constant.norm() < 1e-12 && d.terms.iter().all(|(_, c)| c.norm() < 1e-12) && d.groups.iter().all(|(_, ts)| ts.iter().all(|(_, c)| c.norm() < 1e-12))
    }

    /// Linear terms of `a·point` as (var, coeff) pairs plus the constant.
    fn project(&self, a: &Vec3) -> (Vec<(usize, f64)>, f64) {
        let mut out: Vec<(usize, f64)> = Vec::new();
        let mut push = |v: usize, c: f64| {
            if c != 0.0 {
                match out.iter_mut().find(|(w, _)| *w == v) {
                    Some((_, d)) => *d += c,
                    None => out.push((v, c)),
                }
            }
        };
        for (v, c) in &self.terms {
            push(*v, a.dot(c));
        }
        for (_, ts) in &self.groups {
            for (v, c) in ts {
                push(*v, a.dot(c));
            }
        }
        (out, a.dot(&self.constant))
    }

    /// Range of `a·point` over the variable box, using group exclusivity.
    pub fn range(&self, a: &Vec3, ctx: &ExprCtx) -> (f64, f64) {
        let base = a.dot(&self.constant);
        let (mut lo, mut hi) = (base, base);
        for (v, c) in &self.terms {
            let k = a.dot(c);
            let (l, h) = (ctx.lo[*v], ctx.hi[*v]);
            lo += (k * l).min(k * h);
            hi += (k * l).max(k * h);
        }
        for (g, ts) in &self.groups {
            let info = &ctx.groups[*g];
            let mut gmin = f64::INFINITY;
            let mut gmax = f64::NEG_INFINITY;
            let mut seen = 0usize;
            for (v, c) in ts {
                if ctx.hi[*v] < 0.5 {
                    continue;
                }
                let k = a.dot(c);
                if ctx.lo[*v] > 0.5 {
                    // Forced member: the group's value is exactly this term.
                    gmin = k;
                    gmax = k;
                    seen = usize::MAX;
                    break;
                }
                gmin = gmin.min(k);
                gmax = gmax.max(k);
                seen += 1;
            }
            let live_members = info.members.iter().filter(|&&m| ctx.hi[m] > 0.5).count();
            if seen != usize::MAX && (!info.exactly_one || seen < live_members || seen == 0) {
                gmin = gmin.min(0.0);
                gmax = gmax.max(0.0);
            }
            lo += gmin;
            hi += gmax;
        }
        (lo, hi)
    }
}

/// Variable bounds and group structure used for exact row reductions.
pub struct ExprCtx<'a> {
    pub lo: &'a [f64],
    pub hi: &'a [f64],
    pub groups: &'a [GroupInfo],
}

/// A binary in the block: either a model variable or a value fixed by
/// interval reasoning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BVal {
    Var(usize),
    Const(bool),
}

impl BVal {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            BVal::Var(v) => x[*v],
            BVal::Const(b) => f64::from(u8::from(*b)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BlockOptions {
    pub n_divisions: usize,
    pub eps: f64,
    /// Skip interval reductions and use the uniform model big-M everywhere.
    pub plain: bool,
    pub big_m: f64,
}

impl Default for BlockOptions {
    fn default() -> Self {
        Self {
            n_divisions: 10,
            eps: crate::geometry::DEFAULT_EPS,
            plain: false,
            big_m: 100.0,
        }
    }
}

/// Handles of the binaries emitted for one segment.
#[derive(Debug, Clone)]
pub struct SegmentBlock {
    /// `inside[η][i]`: interpolation point η is in polytope i.
    pub inside: Vec<Vec<BVal>>,
    pub cond1: Vec<BVal>,
    pub cond2: Vec<((usize, usize), BVal)>,
    /// Set when some grid point provably lies outside every polytope.
    pub infeasible: bool,
}

fn sum_terms(vals: &[(BVal, f64)]) -> (Vec<(usize, f64)>, f64) {
    let mut terms = Vec::new();
    let mut k = 0.0;
    for (b, c) in vals {
        match b {
            BVal::Var(v) => terms.push((*v, *c)),
            BVal::Const(true) => k += c,
            BVal::Const(false) => {}
        }
    }
    (terms, k)
}

/// Adds the interpolation-grid containment block for segment `(start, end)`:
/// big-M point containment per polytope, coverage per point, condition (1)
/// linking, condition (2) counting with endpoint linking, and the
/// disjunction. Rows whose outcome is fixed over the variable box are
/// resolved symbolically.
pub fn segment_constraints(
    model: &mut MilpModel,
    start: &AffinePoint,
    end: &AffinePoint,
    polys: &[&ConvexPolytope],
    ctx: &ExprCtx,
    opts: &BlockOptions,
) -> SegmentBlock {
    let degenerate = start.same_as(end);
    let n_pts = if degenerate { 1 } else { opts.n_divisions + 1 };
    let mut inside = Vec::with_capacity(n_pts);
    let mut infeasible = false;

    for k in 0..n_pts {
        let eta = if n_pts == 1 { 0.0 } else { k as f64 / opts.n_divisions as f64 };
        let x = start.lerp(end, eta);
        let mut row = Vec::with_capacity(polys.len());
        for poly in polys {
            row.push(point_in_poly(model, &x, poly, ctx, opts));
        }
        let (terms, k1) = sum_terms(&row.iter().map(|b| (*b, 1.0)).collect::<Vec<_>>());
        if k1 < 1.0 {
            if terms.is_empty() {
                infeasible = true;
                model.add_le(Vec::new(), -1.0);
            } else {
                model.add_ge(terms, 1.0);
            }
        }
        inside.push(row);
    }

    if degenerate {
        return SegmentBlock {
            inside,
            cond1: Vec::new(),
            cond2: Vec::new(),
            infeasible,
        };
    }

    let last = n_pts - 1;
    let mut cond1 = Vec::with_capacity(polys.len());
    for i in 0..polys.len() {
        let (a, b) = (inside[0][i], inside[last][i]);
        let c = match (a, b) {
            (BVal::Const(false), _) | (_, BVal::Const(false)) => BVal::Const(false),
            (BVal::Const(true), BVal::Const(true)) => BVal::Const(true),
            _ => {
                let v = model.add_binary(0.0);
                for e in [a, b] {
                    if let BVal::Var(w) = e {
                        model.add_le(vec![(v, 1.0), (w, -1.0)], 0.0);
                    }
                }
                BVal::Var(v)
            }
        };
        cond1.push(c);
    }

    let mut cond2 = Vec::new();
    if cond1.iter().all(|c| *c != BVal::Const(true)) {
        let m_c = (n_pts + 1) as f64;
        for i in 0..polys.len() {
            for j in i + 1..polys.len() {
                // Σ_η (β_iη + β_jη − 1) ≥ 1 − M_c(1 − c2)
                let mut vals = Vec::with_capacity(2 * n_pts);
                for pt in &inside {
                    vals.push((pt[i], 1.0));
                    vals.push((pt[j], 1.0));
                }
                let (terms, k) = sum_terms(&vals);
                let need = 1.0 + n_pts as f64;
                if terms.is_empty() && k < need {
                    continue;
                }
                let end_ok = |pt: &Vec<BVal>| pt[i] != BVal::Const(false) || pt[j] != BVal::Const(false);
                if !end_ok(&inside[0]) || !end_ok(&inside[last]) {
                    continue;
                }
                let v = model.add_binary(0.0);
                let mut t = terms;
                t.push((v, -m_c));
                model.add_ge(t, need - m_c - k);
                // Endpoints must lie in P_i ∪ P_j for the witness to certify the segment.
                for pt in [&inside[0], &inside[last]] {
                    let (et, ek) = sum_terms(&[(pt[i], 1.0), (pt[j], 1.0)]);
                    if ek < 1.0 {
                        let mut t = vec![(v, 1.0)];
                        t.extend(et.into_iter().map(|(w, c)| (w, -c)));
                        model.add_le(t, ek);
                    }
                }
                cond2.push(((i, j), BVal::Var(v)));
            }
        }
    }

    let mut disj: Vec<(BVal, f64)> = cond1.iter().map(|c| (*c, 1.0)).collect();
    disj.extend(cond2.iter().map(|(_, c)| (*c, 1.0)));
    let (terms, k) = sum_terms(&disj);
    if k < 1.0 {
        if terms.is_empty() {
            infeasible = true;
            model.add_le(Vec::new(), -1.0);
        } else {
            model.add_ge(terms, 1.0);
        }
    }

    SegmentBlock {
        inside,
        cond1,
        cond2,
        infeasible,
    }
}

fn point_in_poly(model: &mut MilpModel, x: &AffinePoint, poly: &ConvexPolytope, ctx: &ExprCtx, opts: &BlockOptions) -> BVal {
    let mut live: Vec<(Vec<(usize, f64)>, f64, f64)> = Vec::new();
    for (a, b) in poly.rows().iter().zip(poly.offsets()) {
        let (terms, k) = x.project(a);
        let rhs = b + opts.eps - k;
        if opts.plain {
            live.push((terms, rhs, opts.big_m));
            continue;
        }
        let (lo, hi) = x.range(a, ctx);
        let slack_hi = hi - b - opts.eps;
        let slack_lo = lo - b - opts.eps;
        if slack_lo > 0.0 {
            return BVal::Const(false);
        }
        if slack_hi <= 0.0 {
            continue;
        }
        live.push((terms, rhs, slack_hi));
    }
    if live.is_empty() {
        return BVal::Const(true);
    }
    let beta = model.add_binary(0.0);
    for (mut terms, rhs, m) in live {
        // a·x ≤ b + eps + M(1 − β)
        terms.push((beta, m));
        model.add_le(terms, rhs + m);
    }
    BVal::Var(beta)
}

/// Whether the block admits an assignment when the endpoints take the given
/// values. Setting every β to its true membership is optimal because all
/// block rows are monotone in β, so this decides feasibility exactly.
pub fn segment_block_satisfied(xa: &Vec3, xb: &Vec3, polys: &[&ConvexPolytope], n_divisions: usize, eps: f64) -> bool {
    let degenerate = (xa - xb).norm() == 0.0;
    let n_pts = if degenerate { 1 } else { n_divisions + 1 };
    let np = polys.len();
    let mut member = [[false; 4]; 64];
    let use_stack = np <= 4 && n_pts <= 64;
    let mut heap: Vec<Vec<bool>> = Vec::new();
    for k in 0..n_pts {
        let eta = if n_pts == 1 { 0.0 } else { k as f64 / n_divisions as f64 };
        let x = xa * (1.0 - eta) + xb * eta;
        let mut any = false;
        let mut row = vec![false; if use_stack { 0 } else { np }];
        for (i, p) in polys.iter().enumerate() {
            let m = p.contains(&x, eps);
            any |= m;
            if use_stack {
                member[k][i] = m;
            } else {
                row[i] = m;
            }
        }
        if !any {
            return false;
        }
        if !use_stack {
            heap.push(row);
        }
    }
    if degenerate {
        return true;
    }
    let get = |k: usize, i: usize| if use_stack { member[k][i] } else { heap[k][i] };
    let last = n_pts - 1;
    if (0..np).any(|i| get(0, i) && get(last, i)) {
        return true;
    }
    for i in 0..np {
        for j in i + 1..np {
            let ends = (get(0, i) || get(0, j)) && (get(last, i) || get(last, j));
            if !ends {
                continue;
            }
            let score: i64 = (0..n_pts).map(|k| get(k, i) as i64 + get(k, j) as i64 - 1).sum();
            if score >= 1 {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{solve_milp, BnbOptions};

    fn bx(x0: f64, y0: f64, x1: f64, y1: f64) -> ConvexPolytope {
        ConvexPolytope::from_box(Vec3::new(x0, y0, 0.0), Vec3::new(x1, y1, 0.0), 2).unwrap()
    }

    fn solve_const(a: Vec3, b: Vec3, polys: &[&ConvexPolytope], plain: bool) -> (bool, SegmentBlock, Vec<f64>) {
        let mut m = MilpModel::new();
        let ctx = ExprCtx { lo: &[], hi: &[], groups: &[] };
        let opts = BlockOptions {
            plain,
            ..BlockOptions::default()
        };
        let blk = segment_constraints(&mut m, &AffinePoint::constant(a), &AffinePoint::constant(b), polys, &ctx, &opts);
        let s = solve_milp(&m, &BnbOptions::feasibility());
        (s.is_feasible(), blk, s.values)
    }

    #[test]
    fn inside_one_box_uses_cond1() {
        let p = bx(0.0, 0.0, 1.0, 1.0);
        let far = bx(5.0, 5.0, 6.0, 6.0);
        for plain in [false, true] {
            let (ok, blk, x) = solve_const(Vec3::new(0.1, 0.2, 0.0), Vec3::new(0.8, 0.7, 0.0), &[&p, &far], plain);
            assert!(ok);
            assert_eq!(blk.cond1[0].value(&x), 1.0);
        }
    }

    #[test]
    fn straddling_boxes_use_cond2() {
        let p1 = bx(0.0, 0.0, 2.0, 1.0);
        let p2 = bx(1.0, 0.0, 3.0, 1.0);
        for plain in [false, true] {
            let (ok, blk, x) = solve_const(Vec3::new(0.5, 0.5, 0.0), Vec3::new(2.5, 0.5, 0.0), &[&p1, &p2], plain);
            assert!(ok);
            assert_eq!(blk.cond2[0].1.value(&x), 1.0);
        }
    }

    #[test]
    fn gap_is_infeasible() {
        let p1 = bx(0.0, 0.0, 1.0, 1.0);
        let p2 = bx(1.5, 0.0, 3.0, 1.0);
        for plain in [false, true] {
            let (ok, _, _) = solve_const(Vec3::new(0.5, 0.5, 0.0), Vec3::new(2.5, 0.5, 0.0), &[&p1, &p2], plain);
            assert!(!ok);
        }
    }

    #[test]
    fn third_polytope_endpoint_does_not_fake_cond2() {
        // The start lies only in P3 and the grid skips the gap between P3 and
        // P1. The P1/P2 overlap score alone would accept; endpoint linking
        // must reject.
        let p1 = bx(0.0, 0.0, 3.0, 1.0);
        let p2 = bx(0.5, 0.0, 5.0, 1.0);
        let p3 = bx(-1.0, 0.0, -0.2, 1.0);
        let a = Vec3::new(-0.3, 0.5, 0.0);
        let b = Vec3::new(4.0, 0.5, 0.0);
        let gap = Vec3::new(-0.1, 0.5, 0.0);
        assert!(!p1.contains(&gap, 1e-9) && !p2.contains(&gap, 1e-9) && !p3.contains(&gap, 1e-9));
        assert!(!segment_block_satisfied(&a, &b, &[&p1, &p2, &p3], 10, 1e-9));
        for plain in [false, true] {
            assert!(!solve_const(a, b, &[&p1, &p2, &p3], plain).0);
        }
    }

    #[test]
    fn degenerate_segment_is_point_test() {
        let p = bx(0.0, 0.0, 1.0, 1.0);
        let q = bx(2.0, 0.0, 3.0, 1.0);
        let x = Vec3::new(0.5, 0.5, 0.0);
        let (ok, blk, _) = solve_const(x, x, &[&p, &q], false);
        assert!(ok);
        assert_eq!(blk.inside.len(), 1);
        let y = Vec3::new(1.5, 0.5, 0.0);
        assert!(!solve_const(y, y, &[&p, &q], false).0);
    }

    #[test]
    fn group_range_uses_exclusivity() {
        let groups = vec![GroupInfo {
            members: vec![0, 1, 2],
            exactly_one: true,
        }];
        let lo = [0.0; 3];
        let hi = [1.0; 3];
        let ctx = ExprCtx {
            lo: &lo,
            hi: &hi,
            groups: &groups,
        };
        let p = AffinePoint {
            constant: Vec3::zeros(),
            terms: vec![],
            groups: vec![(0, vec![(0, Vec3::x()), (1, Vec3::x() * 2.0), (2, -Vec3::x())])],
        };
        assert_eq!(p.range(&Vec3::x(), &ctx), (-1.0, 2.0));
        let partial = AffinePoint {
            groups: vec![(0, vec![(0, Vec3::x())])],
            ..AffinePoint::default()
        };
        assert_eq!(partial.range(&Vec3::x(), &ctx), (0.0, 1.0));
    }
}
