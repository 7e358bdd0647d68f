//! Dense linear programming: problem description, a bounded-variable revised
//! simplex with certificates, and the Dantzig selector's LP form.

mod dantzig;
mod dump;
mod simplex;

pub use dantzig::{build_dantzig_lp, dantzig_lp_parts, DantzigLpLayout};
pub use dump::{read_dump, write_dump};
pub use simplex::{solve_lp, solve_lp_with};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `min cᵀx` subject to row constraints and per-variable bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpProblem {
    /// New problem with every variable bounded to `[0, ∞)`.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LpProblem {
            objective,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_rows(&self) -> usize {
        self.constraints.len()
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn set_free(&mut self, var: usize) {
        self.set_bounds(var, f64::NEG_INFINITY, f64::INFINITY);
    }

    pub fn add_row(&mut self, coefficients: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint {
            coefficients,
            relation,
            rhs,
        });
    }

    /// Adds a row given as `(variable, coefficient)` pairs.
    pub fn add_sparse_row(&mut self, entries: &[(usize, f64)], relation: Relation, rhs: f64) {
        let mut coefficients = vec![0.0; self.n_vars()];
        for &(j, v) in entries {
            coefficients[j] += v;
        }
        self.add_row(coefficients, relation, rhs);
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if self.lower.len() != n {
            return Err(Error::DimensionMismatch {
                what: "lower bounds",
                expected: n,
                got: self.lower.len(),
            });
        }
        if self.upper.len() != n {
            return Err(Error::DimensionMismatch {
                what: "upper bounds",
                expected: n,
                got: self.upper.len(),
            });
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("objective has non-finite entries"));
        }
        for (j, (&l, &u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY || l > u {
                return Err(Error::invalid(format!("variable {j} has invalid bounds [{l}, {u}]")));
            }
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coefficients.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "constraint row",
                    expected: n,
                    got: row.coefficients.len(),
                });
            }
            if !row.rhs.is_finite() || row.coefficients.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("constraint {i} has non-finite entries")));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        crate::linalg::dot(&self.objective, x)
    }

    /// Largest violation of any row or bound at `x`.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.constraints {
            let ax = crate::linalg::dot(&row.coefficients, x);
            let v = match row.relation {
                Relation::Le => (ax - row.rhs).max(0.0),
                Relation::Ge => (row.rhs - ax).max(0.0),
                Relation::Eq => (ax - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for ((&xj, &l), &u) in x.iter().zip(&self.lower).zip(&self.upper) {
            worst = worst.max(l - xj).max(xj - u);
        }
        worst
    }

    /// `‖b‖∞` over the right-hand sides.
    pub fn rhs_norm(&self) -> f64 {
        self.constraints.iter().fold(0.0, |m, r| m.max(r.rhs.abs()))
    }

    /// `yᵀb − sup_{x in bounds, slacks in their ranges} yᵀ(Ax + s)`.
    ///
    /// A positive value proves the problem infeasible. Coefficients of the
    /// wrong sign smaller than `tol` in magnitude are treated as zero; larger
    /// ones make the supremum infinite and the margin `−∞`.
    pub fn farkas_margin(&self, y: &[f64], tol: f64) -> f64 {
        let mut sup = 0.0;
        let mut yb = 0.0;
        for (row, &yi) in self.constraints.iter().zip(y) {
            yb += yi * row.rhs;
            // Slack s with Ax + s = b: Le has s >= 0, Ge has s <= 0.
            let bad = match row.relation {
                Relation::Le => yi > tol,
                Relation::Ge => yi < -tol,
                Relation::Eq => false,
            };
            if bad {
                return f64::NEG_INFINITY;
            }
        }
        for j in 0..self.n_vars() {
            let g: f64 = self
                .constraints
                .iter()
                .zip(y)
                .map(|(r, yi)| yi * r.coefficients[j])
                .sum();
            if g > tol {
                if self.upper[j] == f64::INFINITY {
                    return f64::NEG_INFINITY;
                }
                sup += g * self.upper[j];
            } else if g < -tol {
                if self.lower[j] == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                sup += g * self.lower[j];
            }
        }
        yb - sup
    }

    /// Whether `r` is a direction along which the objective decreases without
    /// bound while every constraint and bound stays satisfied.
    pub fn is_improving_ray(&self, r: &[f64], tol: f64) -> bool {
        if crate::linalg::dot(&self.objective, r) >= -tol {
            return false;
        }
        for row in &self.constraints {
            let ar = crate::linalg::dot(&row.coefficients, r);
            let ok = match row.relation {
                Relation::Le => ar <= tol,
                Relation::Ge => ar >= -tol,
                Relation::Eq => ar.abs() <= tol,
            };
            if !ok {
                return false;
            }
        }
        r.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&rj, (&l, &u))| !(rj > tol && u.is_finite()) && !(rj < -tol && l.is_finite()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Proof attached to a non-optimal status.
#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// Row multipliers `y` with a positive [`LpProblem::farkas_margin`].
    Farkas(Vec<f64>),
    /// Improving direction in the original variables.
    Ray(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    /// One multiplier per constraint row.
    pub dual: Vec<f64>,
    /// `c_j − yᵀA_j` for each original variable.
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    pub duality_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub certificate: Option<Certificate>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pricing {
    /// Lowest-index improving column; terminates on degenerate problems.
    Bland,
    /// Most negative reduced cost, falling back to Bland after a run of
    /// degenerate pivots.
    Dantzig,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub pricing: Pricing,
    pub pivot_tol: f64,
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub refactor_every: usize,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            pricing: Pricing::Bland,
            pivot_tol: 1e-10,
            feasibility_tol: 1e-8,
            optimality_tol: 1e-9,
            refactor_every: 200,
            max_iterations: 1_000_000,
        }
    }
}
