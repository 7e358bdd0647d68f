use nalgebra::DMatrix;

use crate::dictionaries::DesignSample;
use crate::error::{Error, Result};

pub const DEFAULT_LASSO_MAX_ITERS: usize = 100_000;
pub const DEFAULT_LASSO_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct LassoResult {
    pub lambda: Vec<f64>,
    /// Full coordinate sweeps performed.
    pub iterations: usize,
    pub converged: bool,
}

/// Cyclic coordinate descent on `n⁻¹Σ(Y_j − f_λ(X_j))² + 2ε‖λ‖₁`.
pub fn lasso_cd(
    design: &DesignSample,
    y: &[f64],
    epsilon: f64,
    max_iters: usize,
    tol: f64,
) -> Result<LassoResult> {
    if y.len() != design.n() {
        return Err(Error::DimensionMismatch {
            what: "response vector",
            expected: design.n(),
            got: y.len(),
        });
    }
    lasso_cd_parts(&design.empirical_gram(), &design.correlations(y), epsilon, max_iters, tol)
}

/// Same objective written through `G_n = HᵀH/n` and `z = HᵀY/n`:
/// `λᵀG_nλ − 2zᵀλ + 2ε‖λ‖₁` up to a constant. Each coordinate update is
/// `λ_k = soft(z_k − Σ_{j≠k} G_kj λ_j, ε) / G_kk`.
pub fn lasso_cd_parts(
    gram_n: &DMatrix<f64>,
    z: &[f64],
    epsilon: f64,
    max_iters: usize,
    tol: f64,
) -> Result<LassoResult> {
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
    let mut lambda = vec![0.0; n];
    // g = G_n λ, kept in sync with λ.
    let mut g = vec![0.0; n];
    for sweep in 1..=max_iters {
        let mut max_change: f64 = 0.0;
        for k in 0..n {
            let gkk = gram_n[(k, k)];
            let new = if gkk > 0.0 {
                let r = z[k] - (g[k] - gkk * lambda[k]);
                super::soft_threshold(r, epsilon) / gkk
            } else {
                0.0
            };
            let delta = new - lambda[k];
            if delta != 0.0 {
                let col = gram_n.column(k);
                for (gi, c) in g.iter_mut().zip(col.iter()) {
                    *gi += c * delta;
                }
                lambda[k] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change <= tol {
            return Ok(LassoResult {
                lambda,
                iterations: sweep,
                converged: true,
            });
        }
    }
    Ok(LassoResult {
        lambda,
        iterations: max_iters,
        converged: false,
    })
}
