//! Lower estimates of empirical-process suprema over the ℓ1 ball and a
//! cone, and their √(1/n) decay.

use nalgebra::DMatrix;
use sparselab::dictionaries::make_gaussian;
use sparselab::empirical::stats::{loglog_slope, median};
use sparselab::empirical::{
    bernstein_max_check, empproc_sup_cone, empproc_sup_l1ball, empproc_sup_l1ball_sq,
};
use sparselab::geometry::IndexSet;

fn main() -> sparselab::Result<()> {
    let model = make_gaussian(DMatrix::identity(16, 16))?;
    let j = IndexSet::new(vec![0, 1, 2], 16)?;
    let ns = [500.0, 2_000.0, 8_000.0];
    let mut meds = [Vec::new(), Vec::new(), Vec::new()];
    for &n in &ns {
        let n = n as usize;
        let mut v = [Vec::new(), Vec::new(), Vec::new()];
        for seed in 0..10 {
            v[0].push(empproc_sup_l1ball(&model, n, 4, seed)?.value);
            v[1].push(empproc_sup_l1ball_sq(&model, n, 4, seed)?.value);
            v[2].push(empproc_sup_cone(&model, n, &j, 3, 4, seed)?.value);
        }
        for k in 0..3 {
            meds[k].push(median(&v[k]));
        }
        println!("n = {n:>5}: |f_u| {:.4}  |f_u|^2 {:.4}  cone {:.4}", meds[0].last().unwrap(), meds[1].last().unwrap(), meds[2].last().unwrap());
    }
    for (name, m) in ["|f_u|", "|f_u|^2", "cone"].iter().zip(&meds) {
        println!("slope {name}: {:.3}", loglog_slope(&ns, m).unwrap());
    }

    let check = bernstein_max_check(&model, 1_000, 1.0, 100, 8.0, 4)?;
    println!("Bernstein max with C = 8 holds in {:.0}% of reps; smallest C {:.3}", 100.0 * check.holds_rate, check.min_constant);
    Ok(())
}
