//! ψ1 and ψ2 Orlicz norms from closed forms and from samples.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use sparselab::empirical::{orlicz_norm, product_psi1_bound, ClosedForm, OrliczInput, Psi};

fn main() -> sparselab::Result<()> {
    let normal = OrliczInput::ClosedForm(ClosedForm::Normal { sd: 1.0 });
    let expo = OrliczInput::ClosedForm(ClosedForm::Exponential { rate: 1.0 });
    let psi2 = orlicz_norm(normal, Psi::Psi2, 1e-9)?;
    println!("N(0,1)  psi2 {:?}  (sqrt(8/3) = {:.6})", psi2, (8.0f64 / 3.0).sqrt());
    println!("N(0,1)  psi1 {:?}", orlicz_norm(normal, Psi::Psi1, 1e-9)?);
    println!("Exp(1)  psi1 {:?}, psi2 {:?}", orlicz_norm(expo, Psi::Psi1, 1e-9)?, orlicz_norm(expo, Psi::Psi2, 1e-9)?);

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let exp = Exp::new(1.0).unwrap();
    let sample: Vec<f64> = (0..200_000).map(|_| exp.sample(&mut rng)).collect();
    println!("Exp(1)  psi1 from 2e5 samples {:?}", orlicz_norm(OrliczInput::Sample(&sample), Psi::Psi1, 1e-6)?);

    let prod: Vec<f64> = (0..200_000)
        .map(|_| {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            a * b
        })
        .collect();
    let p = psi2.value().unwrap();
    println!(
        "product of normals psi1 {:?} <= {:.4}",
        orlicz_norm(OrliczInput::Sample(&prod), Psi::Psi1, 1e-6)?,
        product_psi1_bound(p, p)
    );
    Ok(())
}
