//! Recover a sparse coefficient vector from noisy Gaussian-dictionary data
//! with a calibrated Dantzig selector.

use nalgebra::DMatrix;
use sparselab::dictionaries::{make_gaussian, population_l2_norm, sample_design, sample_response};
use sparselab::estimators::{dantzig_select, epsilon_calibrate, EpsilonRule};
use sparselab::geometry::IndexSet;
use sparselab::linalg;

fn main() -> sparselab::Result<()> {
    let (nf, n, sigma) = (64, 256, 0.5);
    let model = make_gaussian(DMatrix::identity(nf, nf))?;
    let design = sample_design(&model, n, 7)?;

    let mut truth = vec![0.0; nf];
    for (k, v) in [(3, 1.0), (17, -0.8), (40, 1.5), (58, 0.6)] {
        truth[k] = v;
    }
    let response = sample_response(&design, &truth, sigma, 0.0, 8)?;

    let rule = EpsilonRule::calibrated(sigma, 1.0, 2.0);
    let eps = epsilon_calibrate(&rule, Some(&model), None, nf, n)?;
    let fit = dantzig_select(&design, &response.y, eps)?;

    let diff = linalg::sub(&fit.lambda_hat, &truth);
    println!("epsilon            {eps:.4}");
    println!("true support       {:?}", IndexSet::support(&truth, 0.0).to_one_based());
    println!("estimated support  {:?}", IndexSet::support(&fit.lambda_hat, 1e-6).to_one_based());
    println!("l1 error           {:.4}", linalg::norm1(&diff));
    println!("l2 error           {:.4}", linalg::norm2(&diff));
    println!("L2(population)     {:.4}", population_l2_norm(&diff, model.gram())?);
    Ok(())
}
