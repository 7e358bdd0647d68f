//! A dictionary of duplicated functions: coefficients are not identifiable
//! and β₂ is unbounded, yet the fitted function still converges.

use sparselab::empirical::{run_experiment, BoundGeometry, ExperimentConfig};
use sparselab::geometry::IndexSet;

fn main() -> sparselab::Result<()> {
    let mut config = ExperimentConfig::template("grouped")?;
    config.reps = 20;
    let model = config.build_model()?;
    let j = IndexSet::new(vec![0, 4, 8], model.n_funcs())?;
    let geometry = BoundGeometry::population(&model, &j)?;
    println!("beta2 bound for J = {:?}: {}", j.to_one_based(), serde_json::to_string(&geometry.beta2)?);

    let out = run_experiment(&config, None)?;
    let eps = out.records[0].epsilon_used;
    let l2 = &out.summary.metrics["err_L2_pop"];
    println!("epsilon {eps:.4}, d * eps^2 = {:.4}", config.d_star as f64 * eps * eps);
    println!("||f_hat - f*||_L2: median {:.4}, q95 {:.4}", l2.median, l2.q95);
    println!("function-space bound hold rates {:?}", out.summary.bound_hold_rates);
    Ok(())
}
