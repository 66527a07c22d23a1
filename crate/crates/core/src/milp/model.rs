use std::fmt::Write as _;

use super::lp::{LinearProgram, LpError, Relation as LpRelation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub terms: Vec<(usize, f64)>,
    pub rel: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Variable {
    pub lo: f64,
    pub hi: f64,
    pub binary: bool,
}

/// Mixed binary/continuous linear program, always minimized.
#[derive(Debug, Clone, Default)]
pub struct MilpModel {
    pub vars: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<f64>,
    pub big_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    /// Integral and verified, but the search stopped before proving optimality
    /// (feasibility mode).
    Feasible,
    Infeasible,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct MilpSolution {
    pub status: MilpStatus,
    pub values: Vec<f64>,
    pub objective: f64,
    pub nodes: usize,
}

impl MilpSolution {
    pub fn is_feasible(&self) -> bool {
        matches!(self.status, MilpStatus::Optimal | MilpStatus::Feasible)
    }
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_continuous(&mut self, lo: f64, hi: f64, cost: f64) -> usize {
        self.vars.push(Variable { lo, hi, binary: false });
        self.objective.push(cost);
        self.vars.len() - 1
    }

    pub fn add_binary(&mut self, cost: f64) -> usize {
        self.vars.push(Variable {
            lo: 0.0,
            hi: 1.0,
            binary: true,
        });
        self.objective.push(cost);
        self.vars.len() - 1
    }

    pub fn add_le(&mut self, terms: Vec<(usize, f64)>, rhs: f64) {
        self.constraints.push(Constraint { terms, rel: Relation::Le, rhs });
    }

    pub fn add_ge(&mut self, terms: Vec<(usize, f64)>, rhs: f64) {
        let terms = terms.into_iter().map(|(v, a)| (v, -a)).collect();
        self.add_le(terms, -rhs);
    }

    pub fn add_eq(&mut self, terms: Vec<(usize, f64)>, rhs: f64) {
        self.constraints.push(Constraint { terms, rel: Relation::Eq, rhs });
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn n_bin(&self) -> usize {
        self.vars.iter().filter(|v| v.binary).count()
    }

    pub fn n_cont(&self) -> usize {
        self.vars.len() - self.n_bin()
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any bound, row or integrality requirement.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, var) in self.vars.iter().enumerate() {
            worst = worst.max(var.lo - x[v]).max(x[v] - var.hi);
            if var.binary {
                worst = worst.max(x[v].min(1.0 - x[v]).max(0.0));
            }
        }
        for c in &self.constraints {
            let act: f64 = c.terms.iter().map(|&(v, a)| a * x[v]).sum();
            let viol = match c.rel {
                Relation::Le => act - c.rhs,
                Relation::Eq => (act - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    pub fn is_feasible_point(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.vars.len() && self.max_violation(x) <= tol
    }

    pub(crate) fn to_lp(&self, lo: &[f64], hi: &[f64]) -> LinearProgram {
        let mut lp = LinearProgram::new();
        for v in 0..self.vars.len() {
            lp.add_var(self.objective[v], lo[v], hi[v]);
        }
        for c in &self.constraints {
            let rel = match c.rel {
                Relation::Le => LpRelation::Le,
                Relation::Eq => LpRelation::Eq,
            };
            lp.add_row(c.terms.clone(), rel, c.rhs);
        }
        lp
    }

    /// Text dump in CPLEX LP format for cross-checking with external solvers.
    pub fn to_lp_text(&self) -> String {
        let name = |v: usize| {
            if self.vars[v].binary {
                format!("b{v}")
            } else {
                format!("x{v}")
            }
        };
        let fmt_terms = |terms: &mut dyn Iterator<Item = (usize, f64)>| {
            let mut s = String::new();
            for (v, a) in terms {
                if a == 0.0 {
                    continue;
                }
                let sign = if a < 0.0 { "-" } else { "+" };
                let _ = write!(s, " {sign} {} {}", a.abs(), name(v));
            }
            if s.is_empty() {
                s.push_str(" 0 x0");
            }
            s
        };
        let mut out = String::from("Minimize\n obj:");
        out += &fmt_terms(&mut self.objective.iter().copied().enumerate());
        out += "\nSubject To\n";
        for (i, c) in self.constraints.iter().enumerate() {
            let op = match c.rel {
                Relation::Le => "<=",
                Relation::Eq => "=",
            };
            let _ = writeln!(out, " c{i}:{} {op} {}", fmt_terms(&mut c.terms.iter().copied()), c.rhs);
        }
        out += "Bounds\n";
        for (v, var) in self.vars.iter().enumerate() {
            if var.binary {
                continue;
            }
            let lo = if var.lo.is_finite() { var.lo.to_string() } else { "-inf".into() };
            let hi = if var.hi.is_finite() { var.hi.to_string() } else { "+inf".into() };
            let _ = writeln!(out, " {lo} <= {} <= {hi}", name(v));
        }
        let bins: Vec<String> = (0..self.vars.len()).filter(|&v| self.vars[v].binary).map(name).collect();
        if !bins.is_empty() {
            out += "Binaries\n";
            for chunk in bins.chunks(10) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        }
        out += "End\n";
        out
    }
}

/// Solves the continuous relaxation with the dense simplex.
pub fn solve_lp(model: &MilpModel) -> Result<MilpSolution, LpError> {
    let lo: Vec<f64> = model.vars.iter().map(|v| v.lo).collect();
    let hi: Vec<f64> = model.vars.iter().map(|v| v.hi).collect();
    match model.to_lp(&lo, &hi).solve() {
        Ok(opt) => Ok(MilpSolution {
            status: MilpStatus::Optimal,
            objective: opt.objective,
            values: opt.x,
            nodes: 0,
        }),
        Err(LpError::Infeasible) => Ok(MilpSolution {
            status: MilpStatus::Infeasible,
            values: Vec::new(),
            objective: f64::INFINITY,
            nodes: 0,
        }),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ge_is_stored_negated() {
        let mut m = MilpModel::new();
        let x = m.add_continuous(0.0, 10.0, 1.0);
        m.add_ge(vec![(x, 1.0)], 3.0);
        let s = solve_lp(&m).unwrap();
        assert!((s.objective - 3.0).abs() < 1e-9);
        assert!(m.is_feasible_point(&[3.0], 1e-9));
        assert!(!m.is_feasible_point(&[2.0], 1e-9));
    }

    #[test]
    fn lp_text_lists_binaries() {
        let mut m = MilpModel::new();
        let x = m.add_continuous(f64::NEG_INFINITY, 2.0, 1.0);
        let b = m.add_binary(-1.0);
        m.add_le(vec![(x, 1.0), (b, 2.5)], 4.0);
        let txt = m.to_lp_text();
        assert!(txt.contains("Binaries\n b1"));
        assert!(txt.contains("c0: + 1 x0 + 2.5 b1 <= 4"));
        assert!(txt.contains("-inf <= x0 <= 2"));
    }
}
