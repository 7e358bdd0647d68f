//! Geometry report for an equicorrelated dictionary: restricted isometry
//! constants, canonical correlations and the β₂ estimate with its bounds.

use nalgebra::DMatrix;
use sparselab::dictionaries::GramMatrix;
use sparselab::geometry::{geometry_report, AscentOptions, IndexSet};

fn main() -> sparselab::Result<()> {
    let n = 12;
    let gram = GramMatrix::new(DMatrix::from_fn(n, n, |i, k| if i == k { 1.0 } else { 0.1 }))?;
    let j = IndexSet::parse("1,4,7", n)?;
    let report = geometry_report(&gram, &j, 4, &AscentOptions::default(), 3)?;

    println!("kappa(J) = {:.4}, rho(J) = {:.4}", report.kappa, report.rho);
    println!("beta2 estimate        {:?}", report.beta2_estimate);
    println!("  kappa-rho bound     {:?}", report.beta2_bound_kr);
    println!("  overlap bound       {:?}", report.beta2_bound_lem2);
    println!("  best s-split bound  {:?} (s = {:?})", report.beta2_bound_p3, report.beta2_bound_p3_s);
    for e in &report.rip {
        println!("d = {}: m = {:.4}, M = {:.4}, delta = {:.4}, rho_d = {:?}", e.d, e.m, e.big_m, e.delta, e.rho_d);
    }
    Ok(())
}
