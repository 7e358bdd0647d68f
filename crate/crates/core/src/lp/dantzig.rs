use nalgebra::DMatrix;

use super::{LpProblem, Relation};
use crate::dictionaries::DesignSample;
use crate::error::{Error, Result};

/// Variable layout of the Dantzig selector LP: `λ_0..λ_{N−1}` (free) followed
/// by `u_0..u_{N−1}` (non-negative).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DantzigLpLayout {
    pub n_funcs: usize,
}

impl DantzigLpLayout {
    pub fn lambda(&self, x: &[f64]) -> Vec<f64> {
        x[..self.n_funcs].to_vec()
    }

    pub fn u(&self, x: &[f64]) -> Vec<f64> {
        x[self.n_funcs..2 * self.n_funcs].to_vec()
    }
}

/// `min Σu` subject to `−u ≤ λ ≤ u` and `|G_n λ − z| ≤ ε` componentwise,
/// with `G_n = HᵀH/n` and `z = HᵀY/n`.
pub fn build_dantzig_lp(
    design: &DesignSample,
    y: &[f64],
    epsilon: f64,
) -> Result<(LpProblem, DantzigLpLayout)> {
    if y.len() != design.n() {
        return Err(Error::DimensionMismatch {
            what: "response vector",
            expected: design.n(),
            got: y.len(),
        });
    }
    dantzig_lp_parts(&design.empirical_gram(), &design.correlations(y), epsilon)
}

/// Same LP from a precomputed empirical Gram matrix and correlation vector.
pub fn dantzig_lp_parts(
    gram_n: &DMatrix<f64>,
    z: &[f64],
    epsilon: f64,
) -> Result<(LpProblem, DantzigLpLayout)> {
    let n = z.len();
    if gram_n.nrows() != n || gram_n.ncols() != n {
        return Err(Error::DimensionMismatch {
            what: "empirical Gram matrix",
            expected: n,
            got: gram_n.nrows(),
        });
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid("epsilon must be finite and non-negative"));
    }
    let mut objective = vec![0.0; 2 * n];
    objective[n..].iter_mut().for_each(|c| *c = 1.0);
    let mut p = LpProblem::new(objective);
    for k in 0..n {
        p.set_free(k);
    }
    for k in 0..n {
        p.add_sparse_row(&[(k, 1.0), (n + k, -1.0)], Relation::Le, 0.0);
        p.add_sparse_row(&[(k, -1.0), (n + k, -1.0)], Relation::Le, 0.0);
    }
    for k in 0..n {
        let mut row = vec![0.0; 2 * n];
        for j in 0..n {
            row[j] = gram_n[(k, j)];
        }
        let neg: Vec<f64> = row.iter().map(|v| -v).collect();
        p.add_row(row, Relation::Le, z[k] + epsilon);
        p.add_row(neg, Relation::Le, epsilon - z[k]);
    }
    Ok((p, DantzigLpLayout { n_funcs: n }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve_lp, LpStatus};

    fn design(rows: &[&[f64]]) -> DesignSample {
        let n = rows.len();
        let p = rows[0].len();
        let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        DesignSample::from_matrix(DMatrix::from_row_slice(n, p, &flat), 0)
    }

    #[test]
    fn two_functions_give_eight_rows() {
        let d = design(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let (p, layout) = build_dantzig_lp(&d, &[1.0, 2.0], 0.1).unwrap();
        assert_eq!(p.n_vars(), 4);
        assert_eq!(p.objective, vec![0.0, 0.0, 1.0, 1.0]);
        assert_eq!(p.n_rows(), 8);
        assert_eq!(layout.n_funcs, 2);
    }

    #[test]
    fn large_epsilon_gives_zero() {
        let d = design(&[&[1.0, 0.5], &[0.2, 1.0], &[-1.0, 0.3]]);
        let y = [1.0, -2.0, 0.5];
        let zmax = crate::linalg::norm_inf(&d.correlations(&y));
        let (p, layout) = build_dantzig_lp(&d, &y, zmax).unwrap();
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(s.objective.abs() < 1e-12);
        assert!(layout.lambda(&s.primal).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn zero_response_gives_zero() {
        let d = design(&[&[1.0, 0.5], &[0.2, 1.0]]);
        for eps in [0.0, 0.3] {
            let (p, layout) = build_dantzig_lp(&d, &[0.0, 0.0], eps).unwrap();
            let s = solve_lp(&p).unwrap();
            assert_eq!(s.status, LpStatus::Optimal);
            assert!(layout.lambda(&s.primal).iter().all(|v| v.abs() < 1e-12));
        }
    }
}
