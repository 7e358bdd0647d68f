//! Dantzig selector, LASSO comparator, ε calibration and the closed-form
//! orthogonal-design limit.

mod dantzig;
mod epsilon;
mod lasso;
mod orthogonal;

pub use dantzig::{
    dantzig_select, dantzig_select_parts, dantzig_select_with, feasibility_check, SelectorResult,
    SolverOutcome,
};
pub use epsilon::{epsilon_calibrate, EpsilonMode, EpsilonRule, NormSource};
pub use lasso::{lasso_cd, lasso_cd_parts, LassoResult, DEFAULT_LASSO_MAX_ITERS, DEFAULT_LASSO_TOL};
pub use orthogonal::{limit_error_l2, orthogonal_limit_selector, soft_threshold};
