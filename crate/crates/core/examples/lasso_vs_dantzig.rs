//! LASSO and Dantzig selector at the same ε: the LASSO solution is feasible
//! for the Dantzig constraints, so the Dantzig ℓ1 norm is never larger.

use nalgebra::DMatrix;
use sparselab::dictionaries::{make_gaussian, sample_design, sample_response};
use sparselab::estimators::{
    dantzig_select, feasibility_check, lasso_cd, DEFAULT_LASSO_MAX_ITERS, DEFAULT_LASSO_TOL,
};
use sparselab::linalg;

fn main() -> sparselab::Result<()> {
    let model = make_gaussian(DMatrix::identity(30, 30))?;
    let design = sample_design(&model, 80, 2)?;
    let mut truth = vec![0.0; 30];
    truth[2] = 1.0;
    truth[11] = -1.0;
    truth[25] = 0.5;
    let y = sample_response(&design, &truth, 0.3, 0.0, 3)?.y;

    for eps in [0.02, 0.05, 0.1, 0.2] {
        let lasso = lasso_cd(&design, &y, eps, DEFAULT_LASSO_MAX_ITERS, DEFAULT_LASSO_TOL)?;
        let (_, corr) = feasibility_check(&lasso.lambda, &design, &y, eps)?;
        let dz = dantzig_select(&design, &y, eps)?;
        println!(
            "eps {eps:.2}: lasso |corr|max {corr:.4}, l1 {:.4}, err {:.4} | dantzig l1 {:.4}, err {:.4}",
            linalg::norm1(&lasso.lambda),
            linalg::norm2(&linalg::sub(&lasso.lambda, &truth)),
            dz.l1_norm,
            linalg::norm2(&linalg::sub(&dz.lambda_hat, &truth)),
        );
    }
    Ok(())
}
