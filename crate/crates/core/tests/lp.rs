//! The simplex solver against an exact rational tableau simplex.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparselab::lp::{
    read_dump, solve_lp, solve_lp_with, write_dump, Certificate, LpProblem, LpStatus, Pricing,
    Relation, SolverOptions,
};

#[derive(Debug, PartialEq)]
enum Exact {
    Optimal(BigRational),
    Infeasible,
    Unbounded,
}

fn q(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Dense rational tableau for `min cᵀx, Ax ≤ b, x ≥ 0` with Bland's rule.
/// Rows with negative right-hand side get an artificial column and a
/// textbook phase one.
struct Tableau {
    rows: Vec<Vec<BigRational>>,
    rhs: Vec<BigRational>,
    basis: Vec<usize>,
    /// Reduced costs of the current phase, updated with every pivot.
    reduced: Vec<BigRational>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v = &*v / &p;
            }
        }
        self.rhs[r] = &self.rhs[r] / &p;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        let eliminate = |row: &mut Vec<BigRational>, f: &BigRational| {
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= f * pv;
                }
            }
        };
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            eliminate(&mut self.rows[i], &f);
            self.rhs[i] -= &f * &pivot_rhs;
        }
        if !self.reduced[c].is_zero() {
            let f = self.reduced[c].clone();
            eliminate(&mut self.reduced, &f);
        }
        self.basis[r] = c;
    }

    fn set_costs(&mut self, cost: &[BigRational]) {
        self.reduced = cost.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            if cost[b].is_zero() {
                continue;
            }
            for (d, v) in self.reduced.iter_mut().zip(&self.rows[i]) {
                if !v.is_zero() {
                    *d -= &cost[b] * v;
                }
            }
        }
    }

    /// Minimises the current costs over columns `0..allowed`; `false` when
    /// unbounded.
    fn optimise(&mut self, allowed: usize) -> bool {
        loop {
            let Some(c) = (0..allowed).find(|&j| self.reduced[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, BigRational)> = None;
            for i in 0..self.rows.len() {
                if self.rows[i][c].is_positive() {
                    let ratio = &self.rhs[i] / &self.rows[i][c];
                    let better = match &leave {
                        None => true,
                        Some((r, best)) => {
                            ratio < *best || (ratio == *best && self.basis[i] < self.basis[*r])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }
}

fn exact_solve(a: &[Vec<i64>], b: &[i64], c: &[i64]) -> Exact {
    let m = a.len();
    let n = c.len();
    let negative: Vec<usize> = (0..m).filter(|&i| b[i] < 0).collect();
    // Columns: x (n), slacks (m), artificials (one per negative row).
    let width = n + m + negative.len();
    let mut rows = vec![vec![BigRational::zero(); width]; m];
    let mut rhs = Vec::with_capacity(m);
    let mut basis: Vec<usize> = (0..m).map(|i| n + i).collect();
    for i in 0..m {
        let sign = if b[i] < 0 { -1 } else { 1 };
        for j in 0..n {
            rows[i][j] = q(sign * a[i][j]);
        }
        rows[i][n + i] = q(sign);
        rhs.push(q(sign * b[i]));
    }
    for (k, &i) in negative.iter().enumerate() {
        rows[i][n + m + k] = BigRational::one();
        basis[i] = n + m + k;
    }
    let mut t = Tableau {
        rows,
        rhs,
        basis,
        reduced: Vec::new(),
    };
    if !negative.is_empty() {
        let mut phase1 = vec![BigRational::zero(); width];
        phase1[n + m..].iter_mut().for_each(|v| *v = BigRational::one());
        t.set_costs(&phase1);
        t.optimise(width);
        let infeasibility: BigRational = t
            .basis
            .iter()
            .zip(&t.rhs)
            .filter(|(&bj, _)| bj >= n + m)
            .map(|(_, v)| v.clone())
            .sum();
        if infeasibility.is_positive() {
            return Exact::Infeasible;
        }
        for r in 0..m {
            if t.basis[r] >= n + m {
                if let Some(c) = (0..n + m).find(|&j| !t.rows[r][j].is_zero()) {
                    t.pivot(r, c);
                }
            }
        }
    }
    let mut cost = vec![BigRational::zero(); width];
    for j in 0..n {
        cost[j] = q(c[j]);
    }
    t.set_costs(&cost);
    if !t.optimise(n + m) {
        return Exact::Unbounded;
    }
    let mut obj = BigRational::zero();
    for (i, &bj) in t.basis.iter().enumerate() {
        obj += &cost[bj] * &t.rhs[i];
    }
    Exact::Optimal(obj)
}

struct Instance {
    a: Vec<Vec<i64>>,
    b: Vec<i64>,
    c: Vec<i64>,
}

fn random_instance(rng: &mut ChaCha8Rng, max_dim: usize, allow_negative_rhs: bool) -> Instance {
    let m = rng.random_range(1..=max_dim);
    let n = rng.random_range(1..=max_dim);
    let a = (0..m)
        .map(|_| (0..n).map(|_| rng.random_range(-5..=5)).collect())
        .collect();
    let lo = if allow_negative_rhs { -10 } else { 0 };
    let b = (0..m).map(|_| rng.random_range(lo..=20)).collect();
    let c = (0..n).map(|_| rng.random_range(-5..=5)).collect();
    Instance { a, b, c }
}

/// Same problem, stated directly.
fn as_lp(inst: &Instance) -> LpProblem {
    let mut p = LpProblem::new(inst.c.iter().map(|&v| v as f64).collect());
    for (row, &rhs) in inst.a.iter().zip(&inst.b) {
        p.add_row(row.iter().map(|&v| v as f64).collect(), Relation::Le, rhs as f64);
    }
    p
}

/// Same problem with odd-indexed variables mirrored (`x = −x'`, `x' ≤ 0`)
/// and every other row written as `≥` after negation.
fn as_mirrored_lp(inst: &Instance) -> LpProblem {
    let n = inst.c.len();
    let flip = |j: usize| if j % 2 == 1 { -1.0 } else { 1.0 };
    let mut p = LpProblem::new((0..n).map(|j| flip(j) * inst.c[j] as f64).collect());
    for j in (1..n).step_by(2) {
        p.set_bounds(j, f64::NEG_INFINITY, 0.0);
    }
    for (i, (row, &rhs)) in inst.a.iter().zip(&inst.b).enumerate() {
        let coeffs: Vec<f64> = (0..n).map(|j| flip(j) * row[j] as f64).collect();
        if i % 2 == 0 {
            p.add_row(coeffs, Relation::Le, rhs as f64);
        } else {
            p.add_row(coeffs.iter().map(|v| -v).collect(), Relation::Ge, -(rhs as f64));
        }
    }
    p
}

fn assert_matches(p: &LpProblem, exact: &Exact, opts: &SolverOptions, label: &str) {
    let s = solve_lp_with(p, opts).unwrap();
    match exact {
        Exact::Optimal(v) => {
            let v = v.to_f64().unwrap();
            assert_eq!(s.status, LpStatus::Optimal, "{label}");
            assert!(
                (s.objective - v).abs() <= 1e-7 * (1.0 + v.abs()),
                "{label}: {} vs {v}",
                s.objective
            );
            assert!(s.primal_residual <= 1e-8 * (1.0 + p.rhs_norm()), "{label}");
            assert!(s.dual_residual <= 1e-8, "{label}");
            assert!(s.duality_gap.abs() <= 1e-7 * (1.0 + s.objective.abs()), "{label}");
        }
        Exact::Infeasible => {
            assert_eq!(s.status, LpStatus::Infeasible, "{label}");
            let Some(Certificate::Farkas(y)) = &s.certificate else {
                panic!("{label}: no Farkas certificate");
            };
            assert!(p.farkas_margin(y, 1e-9) > 0.0, "{label}");
        }
        Exact::Unbounded => {
            assert_eq!(s.status, LpStatus::Unbounded, "{label}");
            let Some(Certificate::Ray(r)) = &s.certificate else {
                panic!("{label}: no ray");
            };
            assert!(p.is_improving_ray(r, 1e-9), "{label}");
        }
    }
}

#[test]
fn matches_rational_reference_on_feasible_problems() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let bland = SolverOptions::default();
    let mut optimal = 0;
    for k in 0..1000 {
        let inst = random_instance(&mut rng, 30, false);
        let exact = exact_solve(&inst.a, &inst.b, &inst.c);
        assert_ne!(exact, Exact::Infeasible);
        if matches!(exact, Exact::Optimal(_)) {
            optimal += 1;
        }
        assert_matches(&as_lp(&inst), &exact, &bland, &format!("instance {k}"));
    }
    assert!(optimal > 100, "too few bounded instances: {optimal}");
}

#[test]
fn matches_rational_reference_with_phase_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let dantzig = SolverOptions {
        pricing: Pricing::Dantzig,
        ..Default::default()
    };
    let mut seen = [0usize; 3];
    for k in 0..300 {
        let inst = random_instance(&mut rng, 15, true);
        let exact = exact_solve(&inst.a, &inst.b, &inst.c);
        seen[match exact {
            Exact::Optimal(_) => 0,
            Exact::Infeasible => 1,
            Exact::Unbounded => 2,
        }] += 1;
        let label = format!("instance {k}");
        assert_matches(&as_lp(&inst), &exact, &SolverOptions::default(), &label);
        assert_matches(&as_mirrored_lp(&inst), &exact, &SolverOptions::default(), &label);
        assert_matches(&as_lp(&inst), &exact, &dantzig, &label);
    }
    assert!(seen.iter().all(|&c| c > 5), "status mix {seen:?}");
}

#[test]
fn identical_problems_give_identical_solutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let p = as_mirrored_lp(&random_instance(&mut rng, 20, true));
        let a = solve_lp(&p).unwrap();
        let b = solve_lp(&p).unwrap();
        // Debug output is bit-exact and treats NaN placeholders as equal.
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}

#[test]
fn dump_round_trip_reproduces_solution() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let p = as_mirrored_lp(&random_instance(&mut rng, 12, true));
    let reloaded = read_dump(&write_dump(&p)).unwrap();
    let a = solve_lp(&p).unwrap();
    let b = solve_lp(&reloaded).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}
