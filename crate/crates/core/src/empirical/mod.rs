//! Orlicz norms, empirical-process suprema, Monte Carlo trials and the
//! bound-verification harness.

mod bounds;
mod empproc;
mod experiment;
mod orlicz;
mod records;
pub mod stats;

pub use bounds::{
    l2_l1_constant, verify_bounds, BoundGeometry, BoundRow, BoundSuite, EmpiricalGeometry, D_SCALED_BOUNDS,
    EXACT_TOL,
};
pub use empproc::{
    bernstein_max_check, bernstein_rate, bernstein_ratio, deviation_at, empproc_sup_cone, empproc_sup_l1ball,
    empproc_sup_l1ball_sq, psi1_norms, square_deviation_at, BernsteinCheck, SupEstimate, MC_REFERENCE_ROWS,
};
pub use experiment::{
    draw_coefficients, run_experiment, run_experiment_streaming, run_trial, run_trial_detail, summarize,
    trial_seed, ExperimentConfig, ExperimentOutput, ExperimentSummary, TrialDetail, TrialRecord,
    CONFIG_VERSION, SUPPORT_TOL,
};
pub use orlicz::{
    orlicz_norm, orlicz_std_error, product_psi1_bound, standard_normal_psi1, ClosedForm, OrliczInput,
    OrliczNorm, Psi,
};
pub use records::{
    read_bounds_csv, read_trials_csv, write_bounds_csv, write_trials_csv, BoundsWriter, RowWriter, TrialsWriter,
    BOUND_COLUMNS, TRIAL_COLUMNS,
};
