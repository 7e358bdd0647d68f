//! Explicit-constant error bounds evaluated on individual trials.
//!
//! Each suite is checked conditionally: theorem-type suites only produce rows
//! for trials where the true vector lies in the Dantzig constraint set, which
//! is the event the bounds are stated on. Suites whose preconditions fail for
//! a trial return no rows.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::experiment::TrialDetail;
use crate::dictionaries::{DictionaryKind, DictionaryModel, GramMatrix};
use crate::error::{Error, Result};
use crate::estimators::limit_error_l2;
use crate::geometry::{
    beta2_bound_global, beta2_bound_kappa_rho, beta2_bound_lemma2_level, beta_bound_23, d_tilde,
    Bound, GeometryReport, IndexSet,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSuite {
    Thm1,
    Thm2,
    Thm4,
    Cor2,
    Cor3,
    Cor5,
    Prop2,
    Example1,
    Example2,
}

impl BoundSuite {
    pub const ALL: [BoundSuite; 9] = [
        BoundSuite::Thm1,
        BoundSuite::Thm2,
        BoundSuite::Thm4,
        BoundSuite::Cor2,
        BoundSuite::Cor3,
        BoundSuite::Cor5,
        BoundSuite::Prop2,
        BoundSuite::Example1,
        BoundSuite::Example2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundSuite::Thm1 => "thm1",
            BoundSuite::Thm2 => "thm2",
            BoundSuite::Thm4 => "thm4",
            BoundSuite::Cor2 => "cor2",
            BoundSuite::Cor3 => "cor3",
            BoundSuite::Cor5 => "cor5",
            BoundSuite::Prop2 => "prop2",
            BoundSuite::Example1 => "example1",
            BoundSuite::Example2 => "example2",
        }
    }

    fn needs_empirical(self) -> bool {
        self == BoundSuite::Thm4
    }

    fn needs_population(self) -> bool {
        matches!(
            self,
            BoundSuite::Thm1 | BoundSuite::Thm2 | BoundSuite::Cor5
        )
    }
}

/// Bound ids whose right-hand side is the configured constant `D` times a
/// rate; their minimal `D` is reported.
pub const D_SCALED_BOUNDS: [&str; 4] = ["thm2/prop1_l2", "cor3/l2_sq", "example1/l2", "example2/L2_sq"];

/// Tolerance used by the exact-recovery bound.
pub const EXACT_TOL: f64 = 1e-6;

/// One evaluated bound. CSV columns: suite, bound_id, lhs, rhs, holds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub suite: BoundSuite,
    pub bound_id: String,
    pub lhs: f64,
    pub rhs: Bound,
    pub holds: bool,
}

impl BoundRow {
    fn new(suite: BoundSuite, id: &str, lhs: f64, rhs: Bound) -> Result<Self> {
        let holds = match rhs {
            Bound::Finite(r) => lhs <= r * (1.0 + 1e-12) + 1e-15,
            Bound::Unbounded => true,
            Bound::Inapplicable => return Err(Error::MissingGeometry("bound constant")),
        };
        Ok(BoundRow {
            suite,
            bound_id: id.to_string(),
            lhs,
            rhs,
            holds,
        })
    }

    /// `suite/bound_id`.
    pub fn key(&self) -> String {
        format!("{}/{}", self.suite.name(), self.bound_id)
    }
}

/// `β₂`-type bounds computed on the Gram matrix of the design sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalGeometry {
    /// Upper bound on `β̂₂(J)`.
    pub beta2: Bound,
    /// Upper bound on `β̂₂(d)`, the maximum over `d(J) ≤ 2d`.
    pub beta2_d: Bound,
}

/// Geometric constants entering the bounds, for the support `J` of the
/// true vector. All `β`-type fields are upper bounds; `Unbounded` means no
/// finite bound is certified and makes the corresponding check vacuous.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundGeometry {
    #[serde(rename = "J")]
    pub j: IndexSet,
    /// `B` with `‖f_λ‖_{L2(Π)} ≤ B‖f_λ‖_{L1(Π)}`.
    #[serde(rename = "B")]
    pub b: f64,
    /// Constant with `‖λ‖_{ℓ2} ≤ B'‖f_λ‖_{L1(Π)}` for all `λ`.
    pub b_coef: Bound,
    /// `β(J)`.
    pub beta: Bound,
    /// `β₂(J)`.
    pub beta2: Bound,
    /// `β₂(d)` with `d = d(J)`.
    pub beta2_d: Bound,
    pub d_tilde: Bound,
    pub empirical: Option<EmpiricalGeometry>,
}

/// `B` for the dictionary laws in this crate: `√(π/2)` for Gaussian
/// combinations (exact), `√2` for Rademacher sums (sharp Khinchine
/// constant for `p = 1`).
pub fn l2_l1_constant(model: &DictionaryModel) -> f64 {
    match model.kind() {
        DictionaryKind::Rademacher => std::f64::consts::SQRT_2,
        _ => FRAC_PI_2.sqrt(),
    }
}

/// Smallest finite bound, or `Unbounded` when none is finite.
fn certified(bounds: impl IntoIterator<Item = Bound>) -> Bound {
    match bounds.into_iter().fold(Bound::Inapplicable, Bound::min_upper) {
        Bound::Finite(v) => Bound::Finite(v),
        _ => Bound::Unbounded,
    }
}

/// `beta2_bound_lemma2_level`, skipping it when it is inapplicable or beyond
/// the enumeration budget.
fn lemma2_or_skip(level: usize, gram: &GramMatrix) -> Result<Bound> {
    match beta2_bound_lemma2_level(level, gram) {
        Err(Error::Budget { .. }) => Ok(Bound::Inapplicable),
        other => other,
    }
}

fn map(b: Bound, f: impl Fn(f64) -> f64) -> Bound {
    match b {
        Bound::Finite(v) => Bound::Finite(f(v)),
        other => other,
    }
}

impl BoundGeometry {
    /// Population constants from the model's Gram matrix.
    pub fn population(model: &DictionaryModel, j: &IndexSet) -> Result<Self> {
        let gram = model.gram();
        let d = j.d();
        let b = l2_l1_constant(model);
        let global = beta2_bound_global(gram);
        let beta2 = certified([beta2_bound_kappa_rho(j, gram), lemma2_or_skip(d, gram)?, global]);
        let beta2_d = certified([lemma2_or_skip(2 * d, gram)?, global]);
        let beta = match beta2 {
            Bound::Finite(v) => Bound::Finite(beta_bound_23(j, b, v)),
            other => other,
        };
        Ok(BoundGeometry {
            j: j.clone(),
            b,
            b_coef: map(global, |g| b * g),
            beta,
            beta2,
            beta2_d,
            d_tilde: d_tilde(j, b, gram),
            empirical: None,
        })
    }

    /// Adds bounds for `β̂₂` computed on the design's Gram matrix.
    pub fn with_empirical(mut self, gram_n: &GramMatrix) -> Result<Self> {
        let d = self.j.d();
        let global = beta2_bound_global(gram_n);
        self.empirical = Some(EmpiricalGeometry {
            beta2: certified([beta2_bound_kappa_rho(&self.j, gram_n), global]),
            beta2_d: certified([lemma2_or_skip(2 * d, gram_n)?, global]),
        });
        Ok(self)
    }

    /// Constants read from a geometry report. `β₂(d)` comes from the
    /// report's restricted isometry entries at level `2d` when present.
    pub fn from_report(report: &GeometryReport) -> Self {
        let beta2 = certified([
            report.beta2_bound_kr,
            report.beta2_bound_lem2,
            report.beta2_bound_p3,
        ]);
        let d = report.j.d();
        let level = |k: usize| report.rip.iter().find(|e| e.d == k);
        let beta2_d = match (level(2 * d), level(4 * d)) {
            (Some(e2), Some(e4)) => match e2.rho_d {
                Some(r) if r * e4.big_m < e4.m => Bound::Finite(1.0 / (e4.m - r * e4.big_m)),
                _ => Bound::Inapplicable,
            },
            _ => Bound::Inapplicable,
        };
        let global = report
            .rip
            .iter()
            .find(|e| e.d == report.n_funcs)
            .map(|e| if e.m > 0.0 { Bound::Finite(1.0 / e.m) } else { Bound::Unbounded })
            .unwrap_or(Bound::Inapplicable);
        BoundGeometry {
            j: report.j.clone(),
            b: report.b,
            b_coef: map(global, |g| report.b * g),
            beta: report.beta_bound,
            beta2,
            beta2_d: beta2_d.min_upper(global),
            d_tilde: report.d_tilde,
            empirical: None,
        }
    }
}

/// Evaluates one suite on one trial. Returns no rows when the suite's
/// preconditions do not hold for the trial. `d_const` is the constant `D`
/// of the `D`-scaled bounds.
pub fn verify_bounds(
    trial: &TrialDetail,
    geometry: Option<&BoundGeometry>,
    suite: BoundSuite,
    d_const: f64,
) -> Result<Vec<BoundRow>> {
    let rec = &trial.record;
    let eps = rec.epsilon_used;
    let d = trial.sparsity as f64;
    let sd = d.sqrt();
    let coef_errors = rec.err_l1.zip(rec.err_l2);
    let row = |id: &str, lhs: f64, rhs: Bound| BoundRow::new(suite, id, lhs, rhs);
    let fin = Bound::Finite;

    let conditioned = !matches!(suite, BoundSuite::Cor2 | BoundSuite::Prop2);
    if conditioned && !rec.feasible_star {
        return Ok(Vec::new());
    }
    let geo = || geometry.ok_or(Error::MissingGeometry("population geometry"));
    if let Some(g) = geometry {
        if g.j.d() != trial.sparsity && coef_errors.is_some() && suite.needs_population() {
            return Err(Error::invalid("geometry support does not match the trial"));
        }
    }

    let rows = match suite {
        BoundSuite::Thm1 => {
            let Some((l1, l2)) = coef_errors else { return Ok(Vec::new()) };
            let geometry = geo()?;
            vec![
                row("L1_pop", rec.err_l1_pop, map(geometry.beta, |b| 16.0 * b * eps))?,
                row("l1", l1, map(geometry.beta, |b| 32.0 * b * b * eps))?,
                row("cor1_l2", l2, map(geometry.b_coef, |b| 16.0 * b * b * sd * eps))?,
            ]
        }
        BoundSuite::Thm2 => {
            let Some((l1, l2)) = coef_errors else { return Ok(Vec::new()) };
            let geometry = geo()?;
            let b2 = geometry.b * geometry.b;
            vec![
                row("L2_pop", rec.err_l2_pop, map(geometry.beta2_d, |v| 16.0 * b2 * v * sd * eps))?,
                row("l2", l2, map(geometry.beta2_d, |v| 32.0 * b2 * v * v * sd * eps))?,
                row("thm3_L2_pop", rec.err_l2_pop, map(geometry.beta2, |v| 8.0 * v * sd * eps))?,
                row("thm3_l1", l1, map(geometry.beta2, |v| 16.0 * v * v * d * eps))?,
                row("thm3_l2", l2, map(geometry.beta2_d, |v| 16.0 * v * v * sd * eps))?,
                row("prop1_l2", l2, fin(d_const * sd * eps))?,
            ]
        }
        BoundSuite::Thm4 => {
            let Some((l1, l2)) = coef_errors else { return Ok(Vec::new()) };
            let emp = geo()?
                .empirical
                .as_ref()
                .ok_or(Error::MissingGeometry("empirical Gram bounds"))?;
            vec![
                row("L2_emp", rec.err_l2_emp, map(emp.beta2, |v| 4.0 * v * sd * eps))?,
                row("l1", l1, map(emp.beta2, |v| 8.0 * v * v * d * eps))?,
                row("l2", l2, map(emp.beta2_d, |v| 8.0 * v * v * sd * eps))?,
            ]
        }
        BoundSuite::Cor2 => {
            if !(trial.noiseless && eps == 0.0) {
                return Ok(Vec::new());
            }
            let Some((_, l2)) = coef_errors else { return Ok(Vec::new()) };
            vec![row("exact", l2, fin(EXACT_TOL))?]
        }
        BoundSuite::Cor3 => {
            let Some((_, l2)) = coef_errors else { return Ok(Vec::new()) };
            let rate: f64 = trial.lambda_star.iter().map(|v| (v * v).min(eps * eps)).sum();
            vec![row("l2_sq", l2 * l2, fin(d_const * rate))?]
        }
        BoundSuite::Cor5 => {
            let geometry = geo()?;
            let misfit_sq = trial.misfit * trial.misfit;
            vec![row(
                "L2_sq",
                rec.err_l2_pop.powi(2),
                map(geometry.d_tilde, |t| misfit_sq + 256.0 * t * eps * eps),
            )?]
        }
        BoundSuite::Prop2 => vec![row("feasible", trial.residual_star, fin(eps))?],
        BoundSuite::Example1 => {
            let Some((_, l2)) = coef_errors else { return Ok(Vec::new()) };
            let Some(norms_sq) = &trial.orthogonal_norms_sq else { return Ok(Vec::new()) };
            let limit = limit_error_l2(&trial.lambda_star, eps, norms_sq)?;
            vec![row("l2", l2, fin(d_const * limit))?]
        }
        BoundSuite::Example2 => {
            if !trial.grouped {
                return Ok(Vec::new());
            }
            vec![row("L2_sq", rec.err_l2_pop.powi(2), fin(d_const * d * eps * eps))?]
        }
    };
    Ok(rows)
}

/// Whether any suite in the list needs the population or empirical
/// geometry.
pub(crate) fn geometry_needs(suites: &[BoundSuite]) -> (bool, bool) {
    (
        suites.iter().any(|s| s.needs_population() || s.needs_empirical()),
        suites.iter().any(|s| s.needs_empirical()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionaries::{make_gaussian, make_grouped};
    use nalgebra::DMatrix;

    #[test]
    fn identity_population_geometry() {
        let model = make_gaussian(DMatrix::identity(12, 12)).unwrap();
        let j = IndexSet::new(vec![1, 5], 12).unwrap();
        let g = BoundGeometry::population(&model, &j).unwrap();
        assert_eq!(g.beta2, Bound::Finite(1.0));
        assert_eq!(g.beta2_d, Bound::Finite(1.0));
        let beta = g.beta.finite().unwrap();
        assert!((beta - (FRAC_PI_2 * 2.0).sqrt()).abs() < 1e-12);
        assert!((g.d_tilde.finite().unwrap() - FRAC_PI_2 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn grouped_geometry_is_unbounded() {
        let model = make_grouped(&[vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap();
        let j = IndexSet::new(vec![0], 6).unwrap();
        let g = BoundGeometry::population(&model, &j).unwrap();
        assert_eq!(g.beta2, Bound::Unbounded);
        assert_eq!(g.beta, Bound::Unbounded);
        assert_eq!(g.d_tilde, Bound::Unbounded);
    }

    #[test]
    fn unbounded_rhs_always_holds() {
        let r = BoundRow::new(BoundSuite::Thm1, "x", 1e9, Bound::Unbounded).unwrap();
        assert!(r.holds);
        assert!(BoundRow::new(BoundSuite::Thm1, "x", 1.0, Bound::Inapplicable).is_err());
        assert!(!BoundRow::new(BoundSuite::Thm1, "x", 1.1, Bound::Finite(1.0)).unwrap().holds);
    }
}
