use itertools::Itertools;

use super::IndexSet;
use crate::dictionaries::GramMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, floor_eigen};

/// Largest number of index sets (or pairs of sets) a single enumeration may
/// visit.
pub const ENUMERATION_BUDGET: u128 = 2_000_000;

/// Relative eigenvalue cutoff for whitening rank-deficient spans.
const WHITEN_REL_TOL: f64 = 1e-10;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Number of subsets visited by `md_Md(d)` (`rho = false`) or pairs visited
/// by `rho_d(d)` (`rho = true`) on `n_funcs` functions.
pub fn enumeration_count(n_funcs: usize, d: usize, rho: bool) -> u128 {
    if rho {
        binomial(n_funcs, 2 * d).saturating_mul(binomial(n_funcs.saturating_sub(2 * d), d))
    } else {
        binomial(n_funcs, d)
    }
}

fn check_budget(required: u128) -> Result<()> {
    if required > ENUMERATION_BUDGET {
        Err(Error::Budget {
            required,
            budget: ENUMERATION_BUDGET,
        })
    } else {
        Ok(())
    }
}

/// Smallest eigenvalue of the Gram block on `j`, floored at zero.
pub fn kappa(j: &IndexSet, gram: &GramMatrix) -> f64 {
    if j.is_empty() {
        return 0.0;
    }
    let sub = linalg::principal_submatrix(gram.entries(), j.members());
    floor_eigen(linalg::sym_extreme_eigenvalues(&sub).0)
}

fn canonical_correlation(i: &[usize], j: &[usize], gram: &GramMatrix) -> f64 {
    let g = gram.entries();
    let cross = linalg::submatrix(g, i, j);
    if cross.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    let wi = linalg::psd_inv_sqrt(&linalg::principal_submatrix(g, i), WHITEN_REL_TOL);
    let wj = linalg::psd_inv_sqrt(&linalg::principal_submatrix(g, j), WHITEN_REL_TOL);
    let c = &wi * cross * &wj;
    linalg::largest_singular_value(&c).clamp(0.0, 1.0)
}

/// Largest canonical correlation between the spans of two disjoint,
/// nonempty parts of the dictionary.
///
/// Rank-deficient blocks are whitened with a pseudo-inverse, so the result
/// is the correlation of the reduced spans.
pub fn cross_correlation(i: &IndexSet, j: &IndexSet, gram: &GramMatrix) -> Result<f64> {
    if i.is_empty() || j.is_empty() {
        return Err(Error::invalid("cross correlation needs two nonempty sets"));
    }
    if i.members().iter().any(|&k| j.contains(k)) {
        return Err(Error::invalid("cross correlation needs disjoint sets"));
    }
    Ok(canonical_correlation(i.members(), j.members(), gram))
}

/// Correlation between the span on `j` and the span of everything else;
/// zero when either side is empty.
pub fn rho_complement(j: &IndexSet, gram: &GramMatrix) -> f64 {
    let rest = j.complement(gram.n_funcs());
    if j.is_empty() || rest.is_empty() {
        return 0.0;
    }
    canonical_correlation(j.members(), &rest, gram)
}

/// `(m_d, M_d)`: extreme values of `‖f_u‖` over unit vectors with at most
/// `d` nonzero entries.
#[allow(non_snake_case)]
pub fn md_Md(d: usize, gram: &GramMatrix) -> Result<(f64, f64)> {
    let n = gram.n_funcs();
    if d == 0 || d > n {
        return Err(Error::invalid(format!("sparsity {d} outside 1..={n}")));
    }
    if gram.is_diagonal() {
        // Every d-subset block is diagonal, so the extremes are the extreme
        // diagonal entries.
        let diag = gram.diagonal();
        let lo = diag.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return Ok((floor_eigen(lo).sqrt(), hi.max(0.0).sqrt()));
    }
    check_budget(enumeration_count(n, d, false))?;
    let g = gram.entries();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for set in (0..n).combinations(d) {
        let (a, b) = linalg::sym_extreme_eigenvalues(&linalg::principal_submatrix(g, &set));
        lo = lo.min(a);
        hi = hi.max(b);
    }
    Ok((floor_eigen(lo).sqrt(), hi.max(0.0).sqrt()))
}

/// `(M_d − 1) ∨ (1 − m_d)`.
pub fn delta_d(d: usize, gram: &GramMatrix) -> Result<f64> {
    let (m, big_m) = md_Md(d, gram)?;
    Ok((big_m - 1.0).max(1.0 - m).max(0.0))
}

/// Largest correlation between the spans of disjoint sets of sizes `2d`
/// and `d`. Requires `3d ≤ N`.
pub fn rho_d(d: usize, gram: &GramMatrix) -> Result<f64> {
    let n = gram.n_funcs();
    if d == 0 || 3 * d > n {
        return Err(Error::invalid(format!("rho_d needs 1 <= 3d <= N (d = {d}, N = {n})")));
    }
    if gram.is_diagonal() {
        return Ok(0.0);
    }
    check_budget(enumeration_count(n, d, true))?;
    let mut best: f64 = 0.0;
    for big in (0..n).combinations(2 * d) {
        let rest: Vec<usize> = (0..n).filter(|k| big.binary_search(k).is_err()).collect();
        for small in rest.into_iter().combinations(d) {
            best = best.max(canonical_correlation(&big, &small, gram));
            if best >= 1.0 {
                return Ok(1.0);
            }
        }
    }
    Ok(best)
}

/// Upper bound on `ρ_d` in terms of `δ_{3d}`; `None` when `δ_{3d} ≥ 1`.
/// Reported as a diagnostic only.
pub fn rho_d_delta_bound(delta_3d: f64) -> Option<f64> {
    if !(0.0..1.0).contains(&delta_3d) {
        return None;
    }
    let up = ((1.0 + delta_3d) / (1.0 - delta_3d)).powi(2) - 1.0;
    let down = 1.0 - ((1.0 - delta_3d) / (1.0 + delta_3d)).powi(2);
    Some(up.max(down))
}
