//! Monte Carlo check of the explicit-constant error bounds, writing the
//! trial and bound CSVs and the summary JSON to a temporary directory.

use std::fs::File;

use sparselab::cli::io::write_json_file;
use sparselab::empirical::{run_experiment, write_bounds_csv, write_trials_csv, ExperimentConfig};

fn main() -> sparselab::Result<()> {
    let mut config = ExperimentConfig::template("gaussian")?;
    config.reps = 20;
    let out = run_experiment(&config, None)?;

    println!("feasibility rate of the truth: {:.2}", out.summary.feasibility_rate);
    for (key, rate) in &out.summary.bound_hold_rates {
        println!("{key:<18} holds in {:>5.1}% of {} trials", 100.0 * rate, out.summary.bound_trials[key]);
    }
    println!("smallest D per D-scaled bound: {:?}", out.summary.min_d);

    let dir = std::env::temp_dir().join("sparselab-oracle-example");
    std::fs::create_dir_all(&dir)?;
    write_trials_csv(File::create(dir.join("trials.csv"))?, &out.records)?;
    write_bounds_csv(File::create(dir.join("bounds.csv"))?, &out.bound_rows)?;
    write_json_file(&dir.join("summary.json"), &out.summary)?;
    println!("wrote {}", dir.display());
    Ok(())
}
