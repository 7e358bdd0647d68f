//! On an orthonormal design the Dantzig selector is soft thresholding; the
//! LP solution matches the closed form and its error formula.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sparselab::dictionaries::DesignSample;
use sparselab::estimators::{dantzig_select, limit_error_l2, orthogonal_limit_selector};
use sparselab::linalg;

fn main() -> sparselab::Result<()> {
    let n = 16;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    // √n·Q has HᵀH/n = I.
    let design = DesignSample::from_matrix(a.qr().q() * (n as f64).sqrt(), 0);

    let truth: Vec<f64> = (0..n).map(|k| if k < 5 { 2.0 - 0.3 * k as f64 } else { 0.0 }).collect();
    let y = design.evaluate(&truth);
    let ones = vec![1.0; n];
    for eps in [0.1, 0.5, 1.0, 1.5] {
        let lp = dantzig_select(&design, &y, eps)?.lambda_hat;
        let closed = orthogonal_limit_selector(&truth, eps, &ones)?;
        let gap = lp.iter().zip(&closed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let err = linalg::norm2(&linalg::sub(&lp, &truth));
        println!(
            "eps {eps:.1}: max |LP - soft threshold| = {gap:.1e}, error {err:.4}, predicted {:.4}",
            limit_error_l2(&truth, eps, &ones)?
        );
    }
    Ok(())
}
