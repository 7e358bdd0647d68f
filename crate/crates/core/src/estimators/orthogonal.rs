use crate::error::{Error, Result};

/// `sign(x) · max(|x| − t, 0)`.
pub fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

fn check(lambda_star: &[f64], epsilon: f64, norms_sq: &[f64]) -> Result<()> {
    if lambda_star.len() != norms_sq.len() {
        return Err(Error::DimensionMismatch {
            what: "squared norms",
            expected: lambda_star.len(),
            got: norms_sq.len(),
        });
    }
    if norms_sq.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::invalid("every squared norm must be positive"));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::invalid("epsilon must be non-negative"));
    }
    Ok(())
}

/// Large-sample Dantzig selector for an orthogonal dictionary: each
/// coefficient shrinks toward zero by `ε/‖h_k‖²`.
pub fn orthogonal_limit_selector(
    lambda_star: &[f64],
    epsilon: f64,
    norms_sq: &[f64],
) -> Result<Vec<f64>> {
    check(lambda_star, epsilon, norms_sq)?;
    Ok(lambda_star
        .iter()
        .zip(norms_sq)
        .map(|(&l, &s)| {
            let t = epsilon / s;
            if l >= t {
                l - t
            } else if l <= -t {
                l + t
            } else {
                0.0
            }
        })
        .collect())
}

/// `‖λ̂ − λ*‖ℓ2` of [`orthogonal_limit_selector`]:
/// `ε² Σ_{|λ*_k| ≥ ε/‖h_k‖²} ‖h_k‖⁻⁴ + Σ_{|λ*_k| < ε/‖h_k‖²} |λ*_k|²`, square-rooted.
pub fn limit_error_l2(lambda_star: &[f64], epsilon: f64, norms_sq: &[f64]) -> Result<f64> {
    check(lambda_star, epsilon, norms_sq)?;
    let total: f64 = lambda_star
        .iter()
        .zip(norms_sq)
        .map(|(&l, &s)| {
            if l.abs() >= epsilon / s {
                epsilon * epsilon / (s * s)
            } else {
                l * l
            }
        })
        .sum();
    Ok(total.sqrt())
}
