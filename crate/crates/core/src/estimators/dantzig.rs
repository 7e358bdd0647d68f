use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dictionaries::DesignSample;
use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{self, LpStatus, SolverOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverOutcome {
    #[serde(rename = "lp-optimal")]
    LpOptimal,
    /// The constraint set is empty; the estimate defaults to zero.
    #[serde(rename = "infeasible-default-zero")]
    InfeasibleDefaultZero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectorResult {
    pub lambda_hat: Vec<f64>,
    pub feasible: bool,
    /// `n⁻¹ Σ_j (f_λ̂(X_j) − Y_j) h_k(X_j)` for every `k`.
    pub residual_correlations: Vec<f64>,
    pub l1_norm: f64,
    pub solver: SolverOutcome,
    pub duality_gap: Option<f64>,
    #[serde(skip)]
    pub iterations: usize,
}

/// ℓ1-minimal vector among those whose residual correlations are all within
/// `epsilon`; zero (flagged infeasible) when no such vector exists.
pub fn dantzig_select(design: &DesignSample, y: &[f64], epsilon: f64) -> Result<SelectorResult> {
    dantzig_select_with(design, y, epsilon, &SolverOptions::default())
}

pub fn dantzig_select_with(
    design: &DesignSample,
    y: &[f64],
    epsilon: f64,
    opts: &SolverOptions,
) -> Result<SelectorResult> {
    if y.len() != design.n() {
        return Err(Error::DimensionMismatch {
            what: "response vector",
            expected: design.n(),
            got: y.len(),
        });
    }
    let gram_n = design.empirical_gram();
    let z = design.correlations(y);
    dantzig_select_parts(&gram_n, &z, epsilon, opts)
}

/// Dantzig selector from a precomputed `G_n = HᵀH/n` and `z = HᵀY/n`.
pub fn dantzig_select_parts(
    gram_n: &DMatrix<f64>,
    z: &[f64],
    epsilon: f64,
    opts: &SolverOptions,
) -> Result<SelectorResult> {
    let (problem, layout) = lp::dantzig_lp_parts(gram_n, z, epsilon)?;
    let sol = lp::solve_lp_with(&problem, opts)?;
    let n = z.len();
    let (lambda_hat, feasible, solver, gap) = match sol.status {
        LpStatus::Optimal => (
            layout.lambda(&sol.primal),
            true,
            SolverOutcome::LpOptimal,
            Some(sol.duality_gap),
        ),
        LpStatus::Infeasible => (vec![0.0; n], false, SolverOutcome::InfeasibleDefaultZero, None),
        LpStatus::Unbounded => {
            return Err(Error::invalid("Dantzig LP reported unbounded (objective is ≥ 0)"))
        }
    };
    let residual_correlations = linalg::sub(&linalg::mat_vec(gram_n, &lambda_hat), z);
    Ok(SelectorResult {
        l1_norm: linalg::norm1(&lambda_hat),
        lambda_hat,
        feasible,
        residual_correlations,
        solver,
        duality_gap: gap,
        iterations: sol.iterations,
    })
}

/// Largest residual correlation of `lambda` and whether it is within `epsilon`.
pub fn feasibility_check(
    lambda: &[f64],
    design: &DesignSample,
    y: &[f64],
    epsilon: f64,
) -> Result<(bool, f64)> {
    if lambda.len() != design.n_funcs() || y.len() != design.n() {
        return Err(Error::invalid("feasibility check: dimension mismatch"));
    }
    let fitted = design.evaluate(lambda);
    let resid = linalg::sub(&fitted, y);
    let corr = design.correlations(&resid);
    let max = linalg::norm_inf(&corr);
    Ok((max <= epsilon, max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionaries::{make_gaussian, sample_design, sample_response};

    fn orthonormal_design(n: usize) -> DesignSample {
        // Columns √n e_k: HᵀH/n = I.
        let h = DMatrix::identity(n, n) * (n as f64).sqrt();
        DesignSample::from_matrix(h, 0)
    }

    #[test]
    fn large_epsilon_gives_zero() {
        let m = make_gaussian(DMatrix::identity(5, 5)).unwrap();
        let d = sample_design(&m, 20, 1).unwrap();
        let r = sample_response(&d, &[1.0, 0.0, -1.0, 0.0, 0.5], 0.1, 0.0, 2).unwrap();
        let zmax = linalg::norm_inf(&d.correlations(&r.y));
        let s = dantzig_select(&d, &r.y, zmax * 1.01).unwrap();
        assert!(s.feasible);
        assert_eq!(s.solver, SolverOutcome::LpOptimal);
        assert!(s.lambda_hat.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn orthonormal_design_soft_thresholds() {
        let d = orthonormal_design(4);
        let y = [3.0, -1.0, 0.2, 0.0];
        let z = d.correlations(&y);
        let s = dantzig_select(&d, &y, 0.5).unwrap();
        for k in 0..4 {
            let want = z[k].signum() * (z[k].abs() - 0.5).max(0.0);
            assert!((s.lambda_hat[k] - want).abs() < 1e-9);
        }
    }

    #[test]
    fn noiseless_exact_recovery_small() {
        let m = make_gaussian(DMatrix::identity(6, 6)).unwrap();
        let d = sample_design(&m, 6, 3).unwrap();
        let star = [0.0, 0.0, 1.5, 0.0, 0.0, 0.0];
        let r = sample_response(&d, &star, 0.0, 0.0, 0).unwrap();
        let s = dantzig_select(&d, &r.y, 0.0).unwrap();
        for k in 0..6 {
            assert!((s.lambda_hat[k] - star[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn infeasible_maps_to_zero() {
        // G = 0 with z_1 = 1: no λ brings that correlation within 0.5.
        let g = DMatrix::zeros(2, 2);
        let s = dantzig_select_parts(&g, &[1.0, 0.0], 0.5, &SolverOptions::default()).unwrap();
        assert!(!s.feasible);
        assert_eq!(s.solver, SolverOutcome::InfeasibleDefaultZero);
        assert_eq!(s.lambda_hat, vec![0.0, 0.0]);
        assert!(s.duality_gap.is_none());
    }

    #[test]
    fn feasibility_check_of_truth_and_zero() {
        let m = make_gaussian(DMatrix::identity(3, 3)).unwrap();
        let d = sample_design(&m, 15, 4).unwrap();
        let star = [1.0, -1.0, 0.0];
        let r = sample_response(&d, &star, 0.0, 0.0, 0).unwrap();
        let (ok, max) = feasibility_check(&star, &d, &r.y, 0.0).unwrap();
        assert!(ok || max < 1e-14);
        assert!(max < 1e-14);
        let (_, max0) = feasibility_check(&[0.0; 3], &d, &r.y, 0.0).unwrap();
        let zmax = linalg::norm_inf(&d.correlations(&r.y));
        assert!((max0 - zmax).abs() < 1e-12);
    }

    #[test]
    fn result_json_field_names() {
        let d = orthonormal_design(2);
        let s = dantzig_select(&d, &[1.0, 0.0], 0.1).unwrap();
        let v: serde_json::Value = serde_json::to_value(&s).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        keys.sort();
        assert_eq!(
            keys,
            ["duality_gap", "feasible", "l1_norm", "lambda_hat", "residual_correlations", "solver"]
        );
        assert_eq!(v["solver"], "lp-optimal");
    }
}
