//! Bounded-variable revised simplex.
//!
//! Every row gets a slack so the working system is `Ax + s = b` with box
//! bounds on all columns. Rows whose slack cannot absorb the initial residual
//! get an artificial column; phase one minimises their sum. The basis inverse
//! is kept explicitly and updated by elementary row operations, with a fresh
//! LU-based inverse every `refactor_every` pivots and before reporting. A
//! solve whose final residuals miss the tolerances is retried with frequent
//! refactorization.

use nalgebra::DMatrix;

use super::{Certificate, LpProblem, LpSolution, LpStatus, Pricing, Relation, SolverOptions};
use crate::error::{Error, Result};

/// Degenerate pivots tolerated under Dantzig pricing before switching to Bland.
const DEGENERATE_RUN_LIMIT: usize = 50;

/// Refactor interval used when retrying a solve whose certificate failed.
const MIN_REFACTOR_EVERY: usize = 20;

/// Bound relaxation used by the first pass of the ratio test.
const HARRIS_TOL: f64 = 1e-9;

/// Pivots smaller than this fraction of the largest blocking pivot are skipped.
const STABLE_FRACTION: f64 = 0.1;

/// Smallest `|α|` accepted when pivoting artificials out of the basis.
const ARTIFICIAL_PIVOT_TOL: f64 = 1e-7;

pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution> {
    solve_lp_with(problem, &SolverOptions::default())
}

pub fn solve_lp_with(problem: &LpProblem, opts: &SolverOptions) -> Result<LpSolution> {
    problem.validate()?;
    let mut t = Tableau::new(problem, *opts);
    let n = problem.n_vars();

    if t.n_artificial > 0 {
        t.set_phase_one_costs();
        match t.run()? {
            Outcome::Optimal => {}
            Outcome::Unbounded { .. } => unreachable!("phase one is bounded below by zero"),
        }
        let infeasibility: f64 = t.artificial_range().map(|j| t.x[j]).sum();
        if infeasibility > opts.feasibility_tol * (1.0 + problem.rhs_norm()) {
            let y = t.duals();
            let primal = t.x[..n].to_vec();
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                objective: problem.objective_value(&primal),
                primal_residual: problem.primal_residual(&primal),
                primal,
                dual: vec![0.0; problem.n_rows()],
                reduced_costs: vec![0.0; n],
                dual_objective: f64::NAN,
                duality_gap: f64::NAN,
                dual_residual: f64::NAN,
                iterations: t.iterations,
                certificate: Some(Certificate::Farkas(y)),
            });
        }
        t.retire_artificials()?;
    }

    t.set_phase_two_costs();
    let mut attempts = 0;
    loop {
        match t.run()? {
            Outcome::Unbounded { q, dir, alpha } => {
                let mut ray = vec![0.0; n];
                if q < n {
                    ray[q] = dir;
                }
                for (i, &b) in t.basis.iter().enumerate() {
                    if b < n {
                        ray[b] = -dir * alpha[i];
                    }
                }
                let primal = t.x[..n].to_vec();
                return Ok(LpSolution {
                    status: LpStatus::Unbounded,
                    objective: problem.objective_value(&primal),
                    primal_residual: problem.primal_residual(&primal),
                    primal,
                    dual: vec![0.0; problem.n_rows()],
                    reduced_costs: vec![0.0; n],
                    dual_objective: f64::NAN,
                    duality_gap: f64::NAN,
                    dual_residual: f64::NAN,
                    iterations: t.iterations,
                    certificate: Some(Certificate::Ray(ray)),
                });
            }
            Outcome::Optimal => {
                t.refactor()?;
                attempts += 1;
                if t.entering(Pricing::Bland).is_none() || attempts >= 3 {
                    break;
                }
            }
        }
    }
    let sol = t.optimal_solution(problem);
    if !is_certified(problem, &sol, opts) && opts.refactor_every > MIN_REFACTOR_EVERY {
        let tighter = SolverOptions {
            refactor_every: MIN_REFACTOR_EVERY,
            ..*opts
        };
        return solve_lp_with(problem, &tighter);
    }
    Ok(sol)
}

/// Whether an optimal solution meets the primal, dual and gap tolerances.
pub(crate) fn is_certified(p: &LpProblem, s: &LpSolution, opts: &SolverOptions) -> bool {
    s.status == LpStatus::Optimal
        && s.primal_residual <= opts.feasibility_tol * (1.0 + p.rhs_norm())
        && s.dual_residual <= opts.feasibility_tol
        && s.duality_gap.abs() <= 1e-7 * (1.0 + s.objective.abs())
}

enum Outcome {
    Optimal,
    Unbounded { q: usize, dir: f64, alpha: Vec<f64> },
}

struct Tableau {
    m: usize,
    n_orig: usize,
    n_artificial: usize,
    /// Sparse columns: originals, then one slack per row, then artificials.
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    orig_cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    b: Vec<f64>,
    basis: Vec<usize>,
    /// Row of each basic column, `usize::MAX` when nonbasic.
    pos: Vec<usize>,
    binv: DMatrix<f64>,
    since_refactor: usize,
    iterations: usize,
    opts: SolverOptions,
}

impl Tableau {
    fn new(p: &LpProblem, opts: SolverOptions) -> Self {
        let m = p.n_rows();
        let n = p.n_vars();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in p.constraints.iter().enumerate() {
            for (j, &v) in row.coefficients.iter().enumerate() {
                if v != 0.0 {
                    cols[j].push((i, v));
                }
            }
        }
        let mut lower = p.lower.clone();
        let mut upper = p.upper.clone();
        let mut x: Vec<f64> = (0..n)
            .map(|j| {
                if lower[j].is_finite() {
                    lower[j]
                } else if upper[j].is_finite() {
                    upper[j]
                } else {
                    0.0
                }
            })
            .collect();
        let b: Vec<f64> = p.constraints.iter().map(|r| r.rhs).collect();

        let mut residual = b.clone();
        for (j, col) in cols.iter().enumerate() {
            if x[j] != 0.0 {
                for &(i, v) in col {
                    residual[i] -= v * x[j];
                }
            }
        }

        let mut basis = vec![0; m];
        let mut binv_diag = vec![1.0; m];
        let mut artificials = Vec::new();
        for (i, row) in p.constraints.iter().enumerate() {
            let (sl, su) = match row.relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            cols.push(vec![(i, 1.0)]);
            lower.push(sl);
            upper.push(su);
            let r = residual[i];
            if r >= sl && r <= su {
                x.push(r);
                basis[i] = n + i;
            } else {
                let v = r.clamp(sl, su);
                x.push(v);
                artificials.push((i, (r - v).signum(), (r - v).abs()));
            }
        }
        for &(i, sign, value) in &artificials {
            let j = cols.len();
            cols.push(vec![(i, sign)]);
            lower.push(0.0);
            upper.push(f64::INFINITY);
            x.push(value);
            basis[i] = j;
            binv_diag[i] = sign;
        }
        let total = cols.len();
        let mut pos = vec![usize::MAX; total];
        for (i, &bj) in basis.iter().enumerate() {
            pos[bj] = i;
        }
        let binv = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(binv_diag));
        let mut orig_cost = p.objective.clone();
        orig_cost.resize(total, 0.0);
        Tableau {
            m,
            n_orig: n,
            n_artificial: artificials.len(),
            cols,
            cost: vec![0.0; total],
            orig_cost,
            lower,
            upper,
            x,
            b,
            basis,
            pos,
            binv,
            since_refactor: 0,
            iterations: 0,
            opts,
        }
    }

    fn artificial_range(&self) -> std::ops::Range<usize> {
        let start = self.n_orig + self.m;
        start..start + self.n_artificial
    }

    fn set_phase_one_costs(&mut self) {
        self.cost.iter_mut().for_each(|c| *c = 0.0);
        for j in self.artificial_range() {
            self.cost[j] = 1.0;
        }
    }

    fn set_phase_two_costs(&mut self) {
        self.cost.clone_from(&self.orig_cost);
    }

    /// Fixes artificials at zero and pivots basic ones out where possible.
    fn retire_artificials(&mut self) -> Result<()> {
        for j in self.artificial_range() {
            self.lower[j] = 0.0;
            self.upper[j] = 0.0;
            if self.pos[j] == usize::MAX {
                self.x[j] = 0.0;
            }
        }
        let n_real = self.n_orig + self.m;
        for r in 0..self.m {
            let a = self.basis[r];
            if a < n_real {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n_real {
                if self.pos[j] != usize::MAX {
                    continue;
                }
                let alpha_r: f64 = self.cols[j].iter().map(|&(k, v)| self.binv[(r, k)] * v).sum();
                if alpha_r.abs() > ARTIFICIAL_PIVOT_TOL
                    && best.is_none_or(|(_, b)| alpha_r.abs() > b.abs())
                {
                    best = Some((j, alpha_r));
                }
            }
            if let Some((j, _)) = best {
                let alpha = self.ftran(j);
                self.x[a] = 0.0;
                self.pivot(r, j, &alpha);
            }
        }
        self.refactor()
    }

    fn duals(&self) -> Vec<f64> {
        let costed: Vec<(usize, f64)> = self
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &bj)| self.cost[bj] != 0.0)
            .map(|(i, &bj)| (i, self.cost[bj]))
            .collect();
        (0..self.m)
            .map(|k| {
                let col = self.binv.column(k);
                costed.iter().map(|&(i, c)| c * col[i]).sum()
            })
            .collect()
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        self.cost[j] - self.cols[j].iter().map(|&(i, v)| y[i] * v).sum::<f64>()
    }

    /// Direction the nonbasic column `j` would move to improve the objective.
    fn improving_direction(&self, j: usize, d: f64) -> Option<f64> {
        let tol = self.opts.optimality_tol;
        if d < -tol && self.x[j] < self.upper[j] {
            Some(1.0)
        } else if d > tol && self.x[j] > self.lower[j] {
            Some(-1.0)
        } else {
            None
        }
    }

    fn entering(&self, pricing: Pricing) -> Option<(usize, f64)> {
        let y = self.duals();
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.cols.len() {
            if self.pos[j] != usize::MAX || self.lower[j] == self.upper[j] {
                continue;
            }
            let d = self.reduced_cost(j, &y);
            if let Some(dir) = self.improving_direction(j, d) {
                match pricing {
                    Pricing::Bland => return Some((j, dir)),
                    Pricing::Dantzig => {
                        if best.is_none_or(|(_, _, b)| d.abs() > b) {
                            best = Some((j, dir, d.abs()));
                        }
                    }
                }
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let mut alpha = vec![0.0; self.m];
        for &(k, v) in &self.cols[j] {
            let col = self.binv.column(k);
            for (a, c) in alpha.iter_mut().zip(col.iter()) {
                *a += v * c;
            }
        }
        alpha
    }

    /// Replaces the basic column of row `r` by `q`, given `α = B⁻¹ a_q`.
    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64]) {
        let ar = alpha[r];
        for k in 0..self.m {
            let mut col = self.binv.column_mut(k);
            let v = col[r] / ar;
            if v != 0.0 {
                for (i, c) in col.iter_mut().enumerate() {
                    *c -= alpha[i] * v;
                }
            }
            col[r] = v;
        }
        let leaving = self.basis[r];
        self.pos[leaving] = usize::MAX;
        self.basis[r] = q;
        self.pos[q] = r;
        self.since_refactor += 1;
    }

    /// Rebuilds `B⁻¹` from scratch. Basic slack and artificial columns are
    /// signed unit vectors, so only the block of structural basic columns on
    /// the rows not covered by a unit column needs an LU inverse.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        self.since_refactor = 0;
        if m == 0 {
            return Ok(());
        }
        let n = self.n_orig;
        let mut unit_sign = vec![0.0; m];
        let mut structural = Vec::new();
        for (p, &bj) in self.basis.iter().enumerate() {
            if bj >= n {
                let (row, sign) = self.cols[bj][0];
                unit_sign[row] = sign;
            } else {
                structural.push(p);
            }
        }
        let free_rows: Vec<usize> = (0..m).filter(|&r| unit_sign[r] == 0.0).collect();
        let k = structural.len();
        if free_rows.len() != k {
            return Err(Error::invalid("simplex basis became singular"));
        }
        let mut row_index = vec![usize::MAX; m];
        for (w, &r) in free_rows.iter().enumerate() {
            row_index[r] = w;
        }
        // A_WC and A_UC of the structural basic columns.
        let mut a_wc = DMatrix::zeros(k, k);
        // Entries of structural basic columns on unit rows, indexed by row.
        let mut a_uc: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        for (c, &p) in structural.iter().enumerate() {
            for &(r, v) in &self.cols[self.basis[p]] {
                if row_index[r] != usize::MAX {
                    a_wc[(row_index[r], c)] = v;
                } else {
                    a_uc[r].push((c, v));
                }
            }
        }
        let kinv = if k > 0 {
            a_wc.lu()
                .try_inverse()
                .ok_or_else(|| Error::invalid("simplex basis became singular"))?
        } else {
            DMatrix::zeros(0, 0)
        };
        let mut binv = DMatrix::zeros(m, m);
        for (c, &p) in structural.iter().enumerate() {
            for (w, &r) in free_rows.iter().enumerate() {
                binv[(p, r)] = kinv[(c, w)];
            }
        }
        for (p, &bj) in self.basis.iter().enumerate() {
            if bj < n {
                continue;
            }
            let (u, s) = self.cols[bj][0];
            binv[(p, u)] = s;
            // x_u = s (rhs_u − Σ_c a_{u,c} x_c), with x_c = K rhs_W.
            for &(c, v) in &a_uc[u] {
                for (w, &fr) in free_rows.iter().enumerate() {
                    binv[(p, fr)] -= s * v * kinv[(c, w)];
                }
            }
        }
        self.binv = binv;
        let mut rhs = self.b.clone();
        for j in 0..self.cols.len() {
            if self.pos[j] == usize::MAX && self.x[j] != 0.0 {
                for &(r, v) in &self.cols[j] {
                    rhs[r] -= v * self.x[j];
                }
            }
        }
        for i in 0..m {
            let row = self.binv.row(i);
            self.x[self.basis[i]] = row.iter().zip(&rhs).map(|(a, b)| a * b).sum();
        }
        Ok(())
    }

    /// Two-pass ratio test. The first pass finds the largest step allowed
    /// when every basic bound is relaxed by `HARRIS_TOL`; the second picks,
    /// among rows blocking within that step, a pivot whose magnitude is at
    /// least `STABLE_FRACTION` of the best available, lowest basic index first
    /// under Bland pricing and largest magnitude otherwise. Returns the step
    /// and the leaving row (`None` for a bound flip).
    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64], bland: bool) -> (f64, Option<usize>) {
        let alpha_max = alpha.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let piv_tol = self.opts.pivot_tol * alpha_max.max(1.0);
        let flip = self.upper[q] - self.lower[q];

        let mut relaxed = flip;
        for (i, &a) in alpha.iter().enumerate() {
            if a.abs() <= piv_tol {
                continue;
            }
            let bj = self.basis[i];
            let rate = -dir * a;
            let t = if rate < 0.0 {
                (self.x[bj] - self.lower[bj] + HARRIS_TOL) / -rate
            } else {
                (self.upper[bj] - self.x[bj] + HARRIS_TOL) / rate
            };
            relaxed = relaxed.min(t);
        }
        if relaxed == f64::INFINITY {
            return (f64::INFINITY, None);
        }

        let mut candidates: Vec<(usize, f64)> = Vec::new();
        let mut best_mag: f64 = 0.0;
        for (i, &a) in alpha.iter().enumerate() {
            if a.abs() <= piv_tol {
                continue;
            }
            let bj = self.basis[i];
            let rate = -dir * a;
            let t = if rate < 0.0 {
                (self.x[bj] - self.lower[bj]).max(0.0) / -rate
            } else {
                (self.upper[bj] - self.x[bj]).max(0.0) / rate
            };
            if t <= relaxed {
                candidates.push((i, t));
                best_mag = best_mag.max(a.abs());
            }
        }
        if candidates.is_empty() || flip <= relaxed && flip <= candidates.iter().fold(f64::INFINITY, |m, c| m.min(c.1)) {
            return (flip, None);
        }
        let stable = STABLE_FRACTION * best_mag;
        let mut chosen: Option<(usize, f64)> = None;
        for &(i, t) in &candidates {
            let a = alpha[i].abs();
            if a < stable {
                continue;
            }
            let better = match chosen {
                None => true,
                Some((r, _)) => {
                    if bland {
                        self.basis[i] < self.basis[r]
                    } else {
                        a > alpha[r].abs()
                    }
                }
            };
            if better {
                chosen = Some((i, t));
            }
        }
        let (r, t) = chosen.expect("the largest candidate is always stable");
        (t, Some(r))
    }

    fn run(&mut self) -> Result<Outcome> {
        let mut degenerate_run = 0usize;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Err(Error::invalid(format!(
                    "simplex iteration limit {} reached",
                    self.opts.max_iterations
                )));
            }
            let pricing = match self.opts.pricing {
                Pricing::Dantzig if degenerate_run < DEGENERATE_RUN_LIMIT => Pricing::Dantzig,
                _ => Pricing::Bland,
            };
            let Some((q, dir)) = self.entering(pricing) else {
                return Ok(Outcome::Optimal);
            };
            let alpha = self.ftran(q);
            let bland = pricing == Pricing::Bland;
            let (step, leave) = self.ratio_test(q, dir, &alpha, bland);
            if step == f64::INFINITY {
                return Ok(Outcome::Unbounded { q, dir, alpha });
            }
            self.iterations += 1;
            if step > 0.0 {
                degenerate_run = 0;
                self.x[q] += dir * step;
                for (i, &a) in alpha.iter().enumerate() {
                    if a != 0.0 {
                        let bj = self.basis[i];
                        self.x[bj] -= dir * a * step;
                    }
                }
            } else {
                degenerate_run += 1;
            }
            match leave {
                None => {
                    // Bound flip of the entering column.
                    self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
                }
                Some(r) => {
                    let bj = self.basis[r];
                    self.x[bj] = if -dir * alpha[r] < 0.0 {
                        self.lower[bj]
                    } else {
                        self.upper[bj]
                    };
                    self.pivot(r, q, &alpha);
                    if self.since_refactor >= self.opts.refactor_every {
                        self.refactor()?;
                    }
                }
            }
        }
    }

    fn optimal_solution(&self, p: &LpProblem) -> LpSolution {
        let n = self.n_orig;
        let y = self.duals();
        let primal = self.x[..n].to_vec();
        let objective = p.objective_value(&primal);
        let mut dual_objective: f64 = y.iter().zip(&self.b).map(|(a, b)| a * b).sum();
        let mut dual_residual: f64 = 0.0;
        let mut reduced_costs = Vec::with_capacity(n);
        for j in 0..n {
            let d = self.reduced_cost(j, &y);
            reduced_costs.push(d);
            if d > 0.0 {
                if p.lower[j].is_finite() {
                    dual_objective += d * p.lower[j];
                } else {
                    dual_residual = dual_residual.max(d);
                }
            } else if d < 0.0 {
                if p.upper[j].is_finite() {
                    dual_objective += d * p.upper[j];
                } else {
                    dual_residual = dual_residual.max(-d);
                }
            }
        }
        for (row, &yi) in p.constraints.iter().zip(&y) {
            let wrong = match row.relation {
                Relation::Le => yi.max(0.0),
                Relation::Ge => (-yi).max(0.0),
                Relation::Eq => 0.0,
            };
            dual_residual = dual_residual.max(wrong);
        }
        LpSolution {
            status: LpStatus::Optimal,
            primal_residual: p.primal_residual(&primal),
            primal,
            dual: y,
            reduced_costs,
            objective,
            dual_objective,
            duality_gap: objective - dual_objective,
            dual_residual,
            iterations: self.iterations,
            certificate: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_certified(p: &LpProblem, s: &LpSolution) {
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(s.primal_residual <= 1e-8 * (1.0 + p.rhs_norm()), "{s:?}");
        assert!(s.dual_residual <= 1e-8, "{s:?}");
        assert!(s.duality_gap.abs() <= 1e-7 * (1.0 + s.objective.abs()), "{s:?}");
    }

    #[test]
    fn lower_bound_row() {
        let mut p = LpProblem::new(vec![1.0]);
        p.set_free(0);
        p.add_row(vec![1.0], Relation::Ge, 3.0);
        let s = solve_lp(&p).unwrap();
        assert_certified(&p, &s);
        assert!((s.primal[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut p = LpProblem::new(vec![1.0]);
        p.set_free(0);
        p.add_row(vec![1.0], Relation::Le, 1.0);
        p.add_row(vec![1.0], Relation::Ge, 2.0);
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
        let Some(Certificate::Farkas(y)) = &s.certificate else {
            panic!("missing certificate")
        };
        assert!(p.farkas_margin(y, 1e-9) > 0.0);
    }

    #[test]
    fn single_coordinate_dantzig_toy() {
        // min u s.t. -u <= l <= u, 4 <= l <= 6.
        let mut p = LpProblem::new(vec![0.0, 1.0]);
        p.set_free(0);
        p.add_row(vec![1.0, -1.0], Relation::Le, 0.0);
        p.add_row(vec![-1.0, -1.0], Relation::Le, 0.0);
        p.add_row(vec![1.0, 0.0], Relation::Le, 6.0);
        p.add_row(vec![-1.0, 0.0], Relation::Le, -4.0);
        let s = solve_lp(&p).unwrap();
        assert_certified(&p, &s);
        assert!((s.primal[0] - 4.0).abs() < 1e-12);
        assert!((s.objective - 4.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_has_improving_ray() {
        let mut p = LpProblem::new(vec![-1.0, 0.0]);
        p.add_row(vec![1.0, -1.0], Relation::Le, 1.0);
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
        let Some(Certificate::Ray(r)) = &s.certificate else {
            panic!("missing ray")
        };
        assert!(p.is_improving_ray(r, 1e-9));
    }

    #[test]
    fn bound_flip_only() {
        let mut p = LpProblem::new(vec![-1.0, 2.0]);
        p.set_bounds(0, -1.0, 3.0);
        p.set_bounds(1, -2.0, 5.0);
        let s = solve_lp(&p).unwrap();
        assert_certified(&p, &s);
        assert_eq!(s.primal, vec![3.0, -2.0]);
    }

    #[test]
    fn equality_rows_and_redundancy() {
        // x + y = 2 stated twice, x - y = 0.
        let mut p = LpProblem::new(vec![1.0, 1.0]);
        p.add_row(vec![1.0, 1.0], Relation::Eq, 2.0);
        p.add_row(vec![1.0, 1.0], Relation::Eq, 2.0);
        p.add_row(vec![1.0, -1.0], Relation::Eq, 0.0);
        let s = solve_lp(&p).unwrap();
        assert_certified(&p, &s);
        assert!((s.primal[0] - 1.0).abs() < 1e-12 && (s.primal[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pricing_rules_agree() {
        let mut p = LpProblem::new(vec![-3.0, -2.0, -4.0]);
        p.add_row(vec![1.0, 1.0, 2.0], Relation::Le, 4.0);
        p.add_row(vec![2.0, 0.0, 3.0], Relation::Le, 5.0);
        p.add_row(vec![2.0, 1.0, 3.0], Relation::Le, 7.0);
        let a = solve_lp(&p).unwrap();
        let opts = SolverOptions {
            pricing: Pricing::Dantzig,
            ..Default::default()
        };
        let b = solve_lp_with(&p, &opts).unwrap();
        assert_certified(&p, &a);
        assert_certified(&p, &b);
        assert!((a.objective - b.objective).abs() < 1e-12);
    }
}
