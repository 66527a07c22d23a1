//! Dense two-phase tableau simplex.
//!
//! Sized for the small LPs used throughout the crate (Chebyshev centers,
//! redundancy tests, branch-and-bound on models with a few dozen columns).

use thiserror::Error;

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;
const BLAND_AFTER: usize = 1000;
const MAX_ITERS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex lost numerical stability")]
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// `min c·x` subject to sparse rows and per-variable bounds (infinite allowed).
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub cost: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub rows: Vec<(Vec<(usize, f64)>, Relation, f64)>,
}

#[derive(Debug, Clone)]
pub struct LpOptimum {
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, cost: f64, lo: f64, hi: f64) -> usize {
        self.cost.push(cost);
        self.lo.push(lo);
        self.hi.push(hi);
        self.cost.len() - 1
    }

    pub fn add_row(&mut self, terms: Vec<(usize, f64)>, rel: Relation, rhs: f64) {
        self.rows.push((terms, rel, rhs));
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn solve(&self) -> Result<LpOptimum, LpError> {
        solve_dense(self)
    }
}

/// How an original variable maps onto nonnegative tableau columns.
#[derive(Clone, Copy)]
enum ColMap {
    Fixed(f64),
    Shift { col: usize, lo: f64 },
    Flip { col: usize, hi: f64 },
    Free { pos: usize, neg: usize },
}

struct Tableau {
    m: usize,
    w: usize, // columns incl. rhs
    t: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.w + j]
    }

    fn pivot(&mut self, r: usize, c: usize, objs: &mut [&mut Vec<f64>]) {
        let w = self.w;
        let p = self.t[r * w + c];
        for j in 0..w {
            self.t[r * w + j] /= p;
        }
        let prow: Vec<f64> = self.t[r * w..(r + 1) * w].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + c];
            if f != 0.0 {
                let row = &mut self.t[i * w..(i + 1) * w];
                for (x, pv) in row.iter_mut().zip(&prow) {
                    *x -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        for d in objs.iter_mut() {
            if d.is_empty() {
                continue;
            }
            let f = d[c];
            if f != 0.0 {
                for (x, pv) in d.iter_mut().zip(&prow) {
                    *x -= f * pv;
                }
                d[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Runs primal simplex on reduced-cost row `d` restricted to `allowed` columns.
    fn run(&mut self, d: &mut Vec<f64>, allowed: usize, extra: &mut Vec<f64>) -> Result<(), LpError> {
        let n = self.w - 1;
        let mut degenerate = 0usize;
        let mut bland = false;
        for _ in 0..MAX_ITERS {
            let mut enter = None;
            if bland {
                enter = (0..allowed).find(|&j| d[j] < -PIVOT_TOL);
            } else {
                let mut best = -PIVOT_TOL;
                for (j, &dj) in d.iter().enumerate().take(allowed) {
                    if dj < best {
                        best = dj;
                        enter = Some(j);
                    }
                }
            }
            let Some(c) = enter else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, c);
                if a > PIVOT_TOL {
                    let ratio = self.at(i, n) / a;
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-12 || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li]) {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(LpError::Unbounded);
            };
            if ratio.abs() <= PIVOT_TOL {
                degenerate += 1;
                if degenerate > BLAND_AFTER {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            self.pivot(r, c, &mut [d, extra]);
            if !self.t[r * self.w + n].is_finite() {
                return Err(LpError::NumericalFailure);
            }
        }
        Err(LpError::NumericalFailure)
    }
}

pub fn solve_dense(lp: &LinearProgram) -> Result<LpOptimum, LpError> {
    let nv = lp.num_vars();
    let mut maps = Vec::with_capacity(nv);
    let mut ncols = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for v in 0..nv {
        let (lo, hi) = (lp.lo[v], lp.hi[v]);
        if lo > hi + FEAS_TOL {
            return Err(LpError::Infeasible);
        }
        let map = if lo.is_finite() && hi.is_finite() && (hi - lo).abs() <= 1e-12 {
            ColMap::Fixed(lo)
        } else if lo.is_finite() {
            let col = ncols;
            ncols += 1;
            if hi.is_finite() {
                bound_rows.push((col, hi - lo));
            }
            ColMap::Shift { col, lo }
        } else if hi.is_finite() {
            let col = ncols;
            ncols += 1;
            ColMap::Flip { col, hi }
        } else {
            ncols += 2;
            ColMap::Free {
                pos: ncols - 2,
                neg: ncols - 1,
            }
        };
        maps.push(map);
    }

    // Rows in structural columns, normalized so the rhs is nonnegative.
    struct StdRow {
        coef: Vec<f64>,
        rel: Relation,
        rhs: f64,
    }
    let mut rows: Vec<StdRow> = Vec::with_capacity(lp.rows.len() + bound_rows.len());
    for (terms, rel, rhs) in &lp.rows {
        let mut coef = vec![0.0; ncols];
        let mut r = *rhs;
        for &(v, a) in terms {
            match maps[v] {
                ColMap::Fixed(val) => r -= a * val,
                ColMap::Shift { col, lo } => {
                    coef[col] += a;
                    r -= a * lo;
                }
                ColMap::Flip { col, hi } => {
                    coef[col] -= a;
                    r -= a * hi;
                }
                ColMap::Free { pos, neg } => {
                    coef[pos] += a;
                    coef[neg] -= a;
                }
            }
        }
        if coef.iter().all(|c| c.abs() < 1e-14) {
            let ok = match rel {
                Relation::Le => r >= -FEAS_TOL,
                Relation::Ge => r <= FEAS_TOL,
                Relation::Eq => r.abs() <= FEAS_TOL,
            };
            if !ok {
                return Err(LpError::Infeasible);
            }
            continue;
        }
        rows.push(StdRow { coef, rel: *rel, rhs: r });
    }
    for &(col, ub) in &bound_rows {
        let mut coef = vec![0.0; ncols];
        coef[col] = 1.0;
        rows.push(StdRow {
            coef,
            rel: Relation::Le,
            rhs: ub,
        });
    }
    for row in rows.iter_mut() {
        if row.rhs < 0.0 {
            row.rhs = -row.rhs;
            row.coef.iter_mut().for_each(|c| *c = -*c);
            row.rel = match row.rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.rel != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.rel != Relation::Le).count();
    let n_struct_slack = ncols + n_slack;
    let n = n_struct_slack + n_art;
    let w = n + 1;
    let mut tab = Tableau {
        m,
        w,
        t: vec![0.0; m * w],
        basis: vec![0; m],
    };
    let mut s = ncols;
    let mut a = n_struct_slack;
    for (i, row) in rows.iter().enumerate() {
        tab.t[i * w..i * w + ncols].copy_from_slice(&row.coef);
        tab.t[i * w + n] = row.rhs;
        match row.rel {
            Relation::Le => {
                tab.t[i * w + s] = 1.0;
                tab.basis[i] = s;
                s += 1;
            }
            Relation::Ge => {
                tab.t[i * w + s] = -1.0;
                s += 1;
                tab.t[i * w + a] = 1.0;
                tab.basis[i] = a;
                a += 1;
            }
            Relation::Eq => {
                tab.t[i * w + a] = 1.0;
                tab.basis[i] = a;
                a += 1;
            }
        }
    }

    // Structural cost in tableau columns plus constant offset.
    let mut cost = vec![0.0; w];
    for v in 0..nv {
        let c = lp.cost[v];
        match maps[v] {
            ColMap::Fixed(_) => {}
            ColMap::Shift { col, .. } => cost[col] += c,
            ColMap::Flip { col, .. } => cost[col] -= c,
            ColMap::Free { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
        }
    }

    let reduce = |tab: &Tableau, base: &[f64]| -> Vec<f64> {
        let mut d = base.to_vec();
        for i in 0..tab.m {
            let cb = base[tab.basis[i]];
            if cb != 0.0 {
                for j in 0..w {
                    d[j] -= cb * tab.at(i, j);
                }
            }
        }
        d
    };

    if n_art > 0 {
        let mut c1 = vec![0.0; w];
        for c in c1.iter_mut().take(n).skip(n_struct_slack) {
            *c = 1.0;
        }
        let mut d1 = reduce(&tab, &c1);
        let mut dummy = Vec::new();
        tab.run(&mut d1, n, &mut dummy)?;
        let infeas = -d1[n];
        let scale = 1.0 + rows.iter().map(|r| r.rhs).fold(0.0, f64::max);
        if infeas > FEAS_TOL * scale {
            return Err(LpError::Infeasible);
        }
        // Drive artificials out of the basis; drop rows that turn out redundant.
        let mut i = 0;
        while i < tab.m {
            if tab.basis[i] >= n_struct_slack {
                let col = (0..n_struct_slack).find(|&j| tab.at(i, j).abs() > 1e-7);
                match col {
                    Some(j) => tab.pivot(i, j, &mut []),
                    None => {
                        let start = i * w;
                        tab.t.drain(start..start + w);
                        tab.basis.remove(i);
                        tab.m -= 1;
                        continue;
                    }
                }
            }
            i += 1;
        }
        for i in 0..tab.m {
            for j in n_struct_slack..n {
                tab.t[i * w + j] = 0.0;
            }
        }
    }

    let mut d2 = reduce(&tab, &cost);
    let mut dummy = Vec::new();
    tab.run(&mut d2, n_struct_slack, &mut dummy)?;

    let mut col_val = vec![0.0; n];
    for i in 0..tab.m {
        col_val[tab.basis[i]] = tab.at(i, n);
    }
    let mut x = vec![0.0; nv];
    for v in 0..nv {
        x[v] = match maps[v] {
            ColMap::Fixed(val) => val,
            ColMap::Shift { col, lo } => lo + col_val[col],
            ColMap::Flip { col, hi } => hi - col_val[col],
            ColMap::Free { pos, neg } => col_val[pos] - col_val[neg],
        };
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(LpError::NumericalFailure);
    }
    let objective = lp.cost.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>();
    Ok(LpOptimum { x, objective })
}
