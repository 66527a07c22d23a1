//! Activity-based bound propagation over `≤` rows.

use super::model::{MilpModel, Relation};

const TOL: f64 = 1e-9;

/// Rows in `a·x ≤ rhs` form with a column index for worklist propagation.
pub struct RowIndex {
    rows: Vec<(Vec<(usize, f64)>, f64)>,
    var_rows: Vec<Vec<usize>>,
    binary: Vec<bool>,
}

impl RowIndex {
    pub fn new(model: &MilpModel) -> Self {
        let mut rows = Vec::with_capacity(model.constraints.len());
        for c in &model.constraints {
            rows.push((c.terms.clone(), c.rhs));
            if c.rel == Relation::Eq {
                rows.push((c.terms.iter().map(|&(v, a)| (v, -a)).collect(), -c.rhs));
            }
        }
        let mut var_rows = vec![Vec::new(); model.vars.len()];
        for (r, (terms, _)) in rows.iter().enumerate() {
            for &(v, a) in terms {
                if a != 0.0 {
                    var_rows[v].push(r);
                }
            }
        }
        let binary = model.vars.iter().map(|v| v.binary).collect();
        Self { rows, var_rows, binary }
    }

    /// Tightens `lo`/`hi` in place. Returns false when some row can no longer
    /// be satisfied. Only binaries get fixed; continuous bounds are tightened
    /// when the gain is material, which keeps the worklist finite.
    pub fn propagate(&self, lo: &mut [f64], hi: &mut [f64], seeds: Option<&[usize]>) -> bool {
        let n_rows = self.rows.len();
        let mut queued = vec![false; n_rows];
        let mut work: Vec<usize> = Vec::new();
        match seeds {
            Some(vars) => {
                for &v in vars {
                    for &r in &self.var_rows[v] {
                        if !queued[r] {
                            queued[r] = true;
                            work.push(r);
                        }
                    }
                }
            }
            None => {
                work.extend((0..n_rows).rev());
                queued.iter_mut().for_each(|q| *q = true);
            }
        }
        let mut budget = 20 * n_rows + 1000;
        while let Some(r) = work.pop() {
            queued[r] = false;
            if budget == 0 {
                break;
            }
            budget -= 1;
            let (terms, rhs) = &self.rows[r];
            let mut min_act = 0.0;
            let mut n_inf = 0usize;
            let mut inf_var = usize::MAX;
            for &(v, a) in terms {
                let b = if a > 0.0 { lo[v] } else { hi[v] };
                if b.is_finite() {
                    min_act += a * b;
                } else if a != 0.0 {
                    n_inf += 1;
                    inf_var = v;
                }
            }
            if n_inf == 0 && min_act > rhs + TOL * (1.0 + rhs.abs()) {
                return false;
            }
            if n_inf > 1 {
                continue;
            }
            for &(v, a) in terms {
                if a == 0.0 || (n_inf == 1 && v != inf_var) {
                    continue;
                }
                let own = if a > 0.0 { lo[v] } else { hi[v] };
                let residual = if n_inf == 1 { min_act } else { min_act - a * own };
                let limit = (rhs - residual) / a;
                let mut changed = false;
                if a > 0.0 {
                    if self.binary[v] {
                        if limit < 1.0 - 1e-6 && hi[v] > 0.5 {
                            if lo[v] > 0.5 || limit < -1e-6 {
                                return false;
                            }
                            hi[v] = 0.0;
                            changed = true;
                        }
                    } else if limit < hi[v] - 1e-6 * (1.0 + limit.abs()) {
                        if limit < lo[v] - 1e-7 * (1.0 + lo[v].abs()) {
                            return false;
                        }
                        hi[v] = limit.max(lo[v]);
                        changed = true;
                    }
                } else if self.binary[v] {
                    if limit > 1e-6 && lo[v] < 0.5 {
                        if hi[v] < 0.5 || limit > 1.0 + 1e-6 {
                            return false;
                        }
                        lo[v] = 1.0;
                        changed = true;
                    }
                } else if limit > lo[v] + 1e-6 * (1.0 + limit.abs()) {
                    if limit > hi[v] + 1e-7 * (1.0 + hi[v].abs()) {
                        return false;
                    }
                    lo[v] = limit.min(hi[v]);
                    changed = true;
                }
                if changed {
                    for &r2 in &self.var_rows[v] {
                        if !queued[r2] {
                            queued[r2] = true;
                            work.push(r2);
                        }
                    }
                }
            }
        }
        true
    }
}
