//! Verification batteries behind `sparselab verify`. Each criterion runs a
//! fixed-size experiment or property sweep and reports pass/fail with the
//! measured values.

use std::collections::BTreeMap;
use std::time::Instant;

use itertools::Itertools;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dictionaries::{make_gaussian, sample_design, sample_response, DesignSample, GramMatrix};
use crate::empirical::{
    bernstein_max_check, empproc_sup_cone, empproc_sup_l1ball, empproc_sup_l1ball_sq, run_experiment,
    stats::{loglog_slope, median},
    BoundGeometry, BoundSuite, ExperimentConfig, ExperimentOutput,
};
use crate::error::{Error, Result};
use crate::estimators::{
    dantzig_select, feasibility_check, lasso_cd, orthogonal_limit_selector, soft_threshold, EpsilonRule,
    DEFAULT_LASSO_MAX_ITERS, DEFAULT_LASSO_TOL,
};
use crate::geometry::{
    beta2_bound_kappa_rho, beta2_bound_lemma2, beta2_bound_prop3, beta2_estimate, block_decompose, delta_d,
    in_cone, md_Md, project_into_cone, AscentOptions, Bound, IndexSet,
};
use crate::linalg;
use crate::rng::{derive_seed, rng_from_seed, tags, StreamRng};

pub const DEFAULT_VERIFY_SEED: u64 = 20_070_101;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifySuite {
    Lemma1,
    Beta2,
    Recovery,
    Bounds,
    Empproc,
}

impl VerifySuite {
    pub const ALL: [VerifySuite; 5] = [
        VerifySuite::Lemma1,
        VerifySuite::Beta2,
        VerifySuite::Recovery,
        VerifySuite::Bounds,
        VerifySuite::Empproc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VerifySuite::Lemma1 => "lemma1",
            VerifySuite::Beta2 => "beta2",
            VerifySuite::Recovery => "recovery",
            VerifySuite::Bounds => "bounds",
            VerifySuite::Empproc => "empproc",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|s| s.name() == text)
            .ok_or_else(|| Error::invalid(format!("unknown verify suite `{text}`")))
    }

    /// Acceptance criteria covered by the suite, in report order.
    pub fn criteria(self) -> &'static [u32] {
        match self {
            VerifySuite::Lemma1 => &[5],
            VerifySuite::Beta2 => &[3, 4],
            VerifySuite::Recovery => &[1, 2, 9],
            VerifySuite::Bounds => &[6, 7, 8, 10, 11],
            VerifySuite::Empproc => &[12],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    /// One-line description of what was measured against what.
    pub detail: String,
    pub values: BTreeMap<String, f64>,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: VerifySuite,
    pub seed: u64,
    /// Conjunction of the criteria's pass flags.
    pub pass: bool,
    pub criteria: Vec<CriterionResult>,
}

impl CriterionResult {
    /// `id: name: PASS|FAIL (detail)`.
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<28} {} ({}; {:.1}s)",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.detail,
            self.seconds
        )
    }
}

struct Measured {
    pass: bool,
    detail: String,
    values: Vec<(&'static str, f64)>,
}

fn finish(id: u32, name: &str, started: Instant, m: Result<Measured>) -> CriterionResult {
    let seconds = started.elapsed().as_secs_f64();
    match m {
        Ok(m) => CriterionResult {
            id,
            name: name.to_string(),
            pass: m.pass,
            detail: m.detail,
            values: m.values.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            seconds,
        },
        Err(e) => CriterionResult {
            id,
            name: name.to_string(),
            pass: false,
            detail: format!("error: {e}"),
            values: BTreeMap::new(),
            seconds,
        },
    }
}

fn run_one(id: u32, name: &str, f: impl FnOnce() -> Result<Measured>) -> CriterionResult {
    let t = Instant::now();
    finish(id, name, t, f())
}

/// Runs every criterion of `suite`. Errors inside a criterion count as
/// failures so the report always covers the whole suite.
pub fn run_suite(suite: VerifySuite, seed: u64, threads: Option<usize>) -> VerifyReport {
    run_suite_with(suite, seed, threads, |_| {})
}

/// Like [`run_suite`], calling `progress` as each criterion finishes.
pub fn run_suite_with(
    suite: VerifySuite,
    seed: u64,
    threads: Option<usize>,
    mut progress: impl FnMut(&CriterionResult),
) -> VerifyReport {
    let s = |id: u32| derive_seed(seed, tags::VERIFY, id as u64);
    let mut out = Vec::new();
    let mut push = |r: CriterionResult| {
        progress(&r);
        out.push(r);
    };
    match suite {
        VerifySuite::Lemma1 => push(run_one(5, "lemma1-cone-blocks", || lemma1_suite(s(5)))),
        VerifySuite::Beta2 => {
            push(run_one(3, "identity-geometry", geometry_sanity));
            push(run_one(4, "bound-ordering", || bound_ordering(s(4))));
        }
        VerifySuite::Recovery => {
            push(run_one(1, "noiseless-exact-recovery", || exact_recovery(s(1), threads)));
            push(run_one(2, "orthogonal-closed-form", || orthogonal_closed_form(s(2))));
            push(run_one(9, "lasso-necessary-condition", || lasso_condition(s(9))));
        }
        VerifySuite::Bounds => {
            let t = Instant::now();
            let sweep = sparsity_sweep(s(6), threads);
            let (c6, c7) = match sweep {
                Ok(sw) => (Ok(sw.scaling()), Ok(sw.conditional_bounds())),
                Err(e) => (Err(Error::invalid(e.to_string())), Err(e)),
            };
            push(finish(6, "sqrt-d-scaling", t, c6));
            push(finish(7, "conditional-theorem-bounds", Instant::now(), c7));
            push(run_one(8, "feasibility-of-truth", || feasibility_rate(s(8), threads)));
            let t = Instant::now();
            let thresholding = thresholding_shape(s(10), threads);
            let d10 = thresholding.as_ref().ok().map(|(_, d)| *d);
            push(finish(10, "thresholding-shape", t, thresholding.map(|(m, _)| m)));
            push(run_one(11, "grouped-recovery", || match d10 {
                Some(d) => grouped_recovery(s(11), d, threads),
                None => Err(Error::invalid("no D available from the thresholding criterion")),
            }));
        }
        VerifySuite::Empproc => push(run_one(12, "empirical-process-rates", || appendix_rates(s(12)))),
    }
    VerifyReport {
        suite,
        seed,
        pass: out.iter().all(|r| r.pass),
        criteria: out,
    }
}

fn gaussian(rng: &mut StreamRng) -> f64 {
    rng.sample(StandardNormal)
}

fn random_subset(rng: &mut StreamRng, n: usize, d: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..d {
        let k = rng.random_range(i..n);
        idx.swap(i, k);
    }
    let mut out = idx[..d].to_vec();
    out.sort_unstable();
    out
}

/// `√n·Q` for a random orthogonal `Q`, so that `HᵀH/n = I`.
fn orthonormal_design(rng: &mut StreamRng, n: usize) -> DesignSample {
    let a = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let q = a.qr().q();
    DesignSample::from_matrix(q * (n as f64).sqrt(), 0)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------- lemma1

fn lemma1_suite(seed: u64) -> Result<Measured> {
    const CASES: usize = 10_000;
    const TOL: f64 = 1e-10;
    let mut rng = rng_from_seed(seed);
    let mut worst_tail: f64 = f64::NEG_INFINITY;
    let mut worst_full: f64 = f64::NEG_INFINITY;
    let mut failures = 0usize;
    for _ in 0..CASES {
        let n = rng.random_range(2..=16);
        let dj = rng.random_range(1..=n);
        let j = IndexSet::new(random_subset(&mut rng, n, dj), n)?;
        // Blocks at least as large as J; see the decision ledger.
        let d = rng.random_range(dj..=n);
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let v = project_into_cone(&u, &j);
        let b = block_decompose(&v, &j, d);
        let tail = b.tail_l2_sum() - b.head_l2();
        let full = linalg::norm2(&v) - 2.0 * b.first_two_l2();
        let scale = linalg::norm2(&v).max(1.0);
        worst_tail = worst_tail.max(tail / scale);
        worst_full = worst_full.max(full / scale);
        if !in_cone(&v, &j) || tail > TOL * scale || full > TOL * scale || b.reconstruct() != v {
            failures += 1;
        }
    }
    Ok(Measured {
        pass: failures == 0,
        detail: format!("{CASES} cases, {failures} violations, tol {TOL:e}"),
        values: vec![
            ("cases", CASES as f64),
            ("violations", failures as f64),
            ("max_tail_excess", worst_tail),
            ("max_norm_excess", worst_full),
        ],
    })
}

// ---------------------------------------------------------------- beta2

fn geometry_sanity() -> Result<Measured> {
    let n = 12;
    let g = GramMatrix::identity(n);
    let opts = AscentOptions::default();
    let mut worst_est: f64 = 0.0;
    let mut lemma2_exact = true;
    let mut sets = 0usize;
    for d in 1..=3 {
        for members in (0..n).combinations(d) {
            let j = IndexSet::new(members, n)?;
            let est = beta2_estimate(&j, &g, &opts, sets as u64).finite().unwrap_or(f64::INFINITY);
            worst_est = worst_est.max((est - 1.0).abs());
            lemma2_exact &= beta2_bound_lemma2(&j, &g)? == Bound::Finite(1.0);
            sets += 1;
        }
    }
    let worst_delta = (1..=4).map(|d| delta_d(d, &g)).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
    Ok(Measured {
        pass: worst_est <= 1e-6 && worst_delta == 0.0 && lemma2_exact,
        detail: format!(
            "{sets} sets: max |beta2-1| = {worst_est:.2e}, max delta_d = {worst_delta}, lemma2 = 1: {lemma2_exact}"
        ),
        values: vec![
            ("sets", sets as f64),
            ("max_beta2_deviation", worst_est),
            ("max_delta", worst_delta),
            ("lemma2_exact", lemma2_exact as u8 as f64),
        ],
    })
}

/// Correlation matrix of a Wishart draw, shrunk toward the identity.
fn shrunk_gram(rng: &mut StreamRng, n: usize, shrink: f64) -> Result<GramMatrix> {
    let a = DMatrix::from_fn(n, n + 2, |_, _| gaussian(rng));
    let w = &a * a.transpose();
    let c = DMatrix::from_fn(n, n, |i, j| w[(i, j)] / (w[(i, i)] * w[(j, j)]).sqrt());
    let g = DMatrix::identity(n, n) * (1.0 - shrink) + c * shrink;
    GramMatrix::new((&g + g.transpose()) * 0.5)
}

fn bound_ordering(seed: u64) -> Result<Measured> {
    const GRAMS: usize = 50;
    const PROBES: usize = 100_000;
    let mut rng = rng_from_seed(seed);
    let opts = AscentOptions::default();
    let mut order_violations = 0usize;
    let mut rip_violations = 0usize;
    let mut checked = 0usize;
    let mut worst_gap = f64::NEG_INFINITY;
    for case in 0..GRAMS {
        let n = rng.random_range(4..=10);
        let shrink = rng.random_range(0.05..0.4);
        let g = shrunk_gram(&mut rng, n, shrink)?;
        let d = rng.random_range(1..=(n / 3).clamp(1, 3));
        let j = IndexSet::new(random_subset(&mut rng, n, d), n)?;
        let est = match beta2_estimate(&j, &g, &opts, derive_seed(seed, tags::ASCENT, case as u64)) {
            Bound::Finite(v) => v,
            _ => return Err(Error::invalid("beta2 estimate unbounded on a nonsingular Gram")),
        };
        let mut bounds = vec![beta2_bound_kappa_rho(&j, &g), beta2_bound_lemma2(&j, &g)?];
        for s in 1..=n - d {
            bounds.push(beta2_bound_prop3(&j, s, &g)?);
        }
        for b in bounds.into_iter().filter_map(Bound::finite) {
            checked += 1;
            worst_gap = worst_gap.max(est - b);
            if est > b + 1e-6 {
                order_violations += 1;
            }
        }

        // Random-search oracle for (m_d, M_d): probes can only land inside.
        let dr = rng.random_range(1..=n.min(3));
        let (m, big_m) = md_Md(dr, &g)?;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        let mut u = vec![0.0; n];
        for _ in 0..PROBES {
            u.iter_mut().for_each(|x| *x = 0.0);
            for k in random_subset(&mut rng, n, dr) {
                u[k] = gaussian(&mut rng);
            }
            let norm = linalg::norm2(&u);
            if norm == 0.0 {
                continue;
            }
            let f = linalg::quad_form(g.entries(), &u).max(0.0).sqrt() / norm;
            lo = lo.min(f);
            hi = hi.max(f);
        }
        if lo < m - 1e-9 || hi > big_m + 1e-9 {
            rip_violations += 1;
        }
    }
    Ok(Measured {
        pass: order_violations == 0 && rip_violations == 0,
        detail: format!(
            "{GRAMS} Grams, {checked} estimate/bound pairs, {order_violations} ordering and {rip_violations} m_d/M_d violations"
        ),
        values: vec![
            ("grams", GRAMS as f64),
            ("pairs_checked", checked as f64),
            ("ordering_violations", order_violations as f64),
            ("rip_violations", rip_violations as f64),
            ("max_estimate_minus_bound", worst_gap),
        ],
    })
}

// ---------------------------------------------------------------- recovery

fn exact_recovery(seed: u64, threads: Option<usize>) -> Result<Measured> {
    let mut c = ExperimentConfig::template("noiseless")?;
    c.n_funcs = 64;
    c.model.n_funcs = 64;
    c.n = 32;
    c.d_star = 3;
    c.reps = 100;
    c.seed = seed;
    let out = run_experiment(&c, threads)?;
    let rate = out.summary.recovery_rate;
    Ok(Measured {
        pass: rate >= 0.99,
        detail: format!("recovery_rate {rate:.3} over {} trials (need >= 0.99)", c.reps),
        values: vec![("recovery_rate", rate), ("trials", c.reps as f64)],
    })
}

fn orthogonal_closed_form(seed: u64) -> Result<Measured> {
    const PAIRS: usize = 20;
    let n = 32;
    let mut rng = rng_from_seed(seed);
    let ones = vec![1.0; n];
    let mut worst_match: f64 = 0.0;
    let mut worst_identity: f64 = 0.0;
    let mut identity_cases = 0usize;
    for pair in 0..PAIRS {
        let design = orthonormal_design(&mut rng, n);
        let eps = rng.random_range(0.05..0.5);
        let d = rng.random_range(1..=8);
        // Even pairs keep every nonzero above ε; odd pairs allow entries
        // that threshold to zero.
        let floor = if pair % 2 == 0 { eps + 0.05 } else { 0.0 };
        let mut lambda_star = vec![0.0; n];
        for k in random_subset(&mut rng, n, d) {
            let mag = rng.random_range(floor..2.0 + floor);
            lambda_star[k] = if rng.random::<bool>() { mag } else { -mag };
        }
        let y = design.evaluate(&lambda_star);
        let sel = dantzig_select(&design, &y, eps)?;
        let limit = orthogonal_limit_selector(&lambda_star, eps, &ones)?;
        worst_match = worst_match.max(max_abs_diff(&sel.lambda_hat, &limit));
        if lambda_star.iter().all(|&l| l == 0.0 || l.abs() >= eps) {
            identity_cases += 1;
            let err = linalg::norm2(&linalg::sub(&sel.lambda_hat, &lambda_star));
            worst_identity = worst_identity.max((err - (d as f64).sqrt() * eps).abs());
        }
    }
    Ok(Measured {
        pass: worst_match <= 1e-6 && worst_identity <= 1e-6 && identity_cases > 0,
        detail: format!(
            "max |LP - limit| = {worst_match:.2e}; error identity off by {worst_identity:.2e} on {identity_cases} pairs"
        ),
        values: vec![
            ("max_componentwise_diff", worst_match),
            ("max_identity_diff", worst_identity),
            ("identity_cases", identity_cases as f64),
        ],
    })
}

fn lasso_condition(seed: u64) -> Result<Measured> {
    const INSTANCES: usize = 100;
    const ORTHO: usize = 20;
    let mut rng = rng_from_seed(seed);
    let mut infeasible = 0usize;
    let mut unconverged = 0usize;
    let mut worst_excess = f64::NEG_INFINITY;
    for i in 0..INSTANCES {
        let nf = rng.random_range(5..=30);
        let n = rng.random_range(10..=60);
        let model = make_gaussian(DMatrix::identity(nf, nf))?;
        let design = sample_design(&model, n, derive_seed(seed, tags::DESIGN, i as u64))?;
        let mut lambda_star = vec![0.0; nf];
        let d = rng.random_range(1..=nf.min(5));
        for k in random_subset(&mut rng, nf, d) {
            lambda_star[k] = gaussian(&mut rng);
        }
        let sigma = rng.random_range(0.0..1.0);
        let resp = sample_response(&design, &lambda_star, sigma, 0.0, derive_seed(seed, tags::NOISE, i as u64))?;
        let eps = rng.random_range(0.01..0.5);
        let fit = lasso_cd(&design, &resp.y, eps, DEFAULT_LASSO_MAX_ITERS, DEFAULT_LASSO_TOL)?;
        unconverged += !fit.converged as usize;
        let (ok, max) = feasibility_check(&fit.lambda, &design, &resp.y, eps + 1e-4)?;
        worst_excess = worst_excess.max(max - eps);
        infeasible += !ok as usize;
    }
    let mut worst_ortho: f64 = 0.0;
    for _ in 0..ORTHO {
        let n = 16;
        let design = orthonormal_design(&mut rng, n);
        let y: Vec<f64> = (0..n).map(|_| 2.0 * gaussian(&mut rng)).collect();
        let eps = rng.random_range(0.05..1.0);
        let z = design.correlations(&y);
        let soft: Vec<f64> = z.iter().map(|&v| soft_threshold(v, eps)).collect();
        let lasso = lasso_cd(&design, &y, eps, DEFAULT_LASSO_MAX_ITERS, DEFAULT_LASSO_TOL)?.lambda;
        let dz = dantzig_select(&design, &y, eps)?.lambda_hat;
        worst_ortho = worst_ortho
            .max(max_abs_diff(&lasso, &soft))
            .max(max_abs_diff(&dz, &soft))
            .max(max_abs_diff(&lasso, &dz));
    }
    Ok(Measured {
        pass: infeasible == 0 && unconverged == 0 && worst_ortho <= 1e-5,
        detail: format!(
            "{infeasible}/{INSTANCES} LASSO fits outside eps+1e-4 ({unconverged} unconverged); orthonormal max diff {worst_ortho:.2e}"
        ),
        values: vec![
            ("infeasible", infeasible as f64),
            ("unconverged", unconverged as f64),
            ("max_correlation_excess", worst_excess),
            ("orthonormal_max_diff", worst_ortho),
        ],
    })
}

// ---------------------------------------------------------------- bounds

pub const SWEEP_SPARSITIES: [usize; 4] = [1, 2, 4, 8];

struct Sweep {
    outputs: Vec<(usize, ExperimentOutput)>,
}

fn sparsity_sweep(seed: u64, threads: Option<usize>) -> Result<Sweep> {
    let mut outputs = Vec::new();
    for (i, &d) in SWEEP_SPARSITIES.iter().enumerate() {
        let mut c = ExperimentConfig::template("gaussian")?;
        c.n_funcs = 128;
        c.model.n_funcs = 128;
        c.n = 512;
        c.d_star = d;
        c.sigma = 0.5;
        c.epsilon_rule = EpsilonRule::calibrated(0.5, 1.0, 2.0);
        c.reps = 50;
        c.seed = derive_seed(seed, tags::TRIAL, i as u64);
        c.bound_suite = vec![BoundSuite::Thm2, BoundSuite::Thm4];
        outputs.push((d, run_experiment(&c, threads)?));
    }
    Ok(Sweep { outputs })
}

impl Sweep {
    fn scaling(&self) -> Measured {
        let ds: Vec<f64> = self.outputs.iter().map(|(d, _)| *d as f64).collect();
        let meds: Vec<f64> = self
            .outputs
            .iter()
            .map(|(_, o)| median(&o.records.iter().filter_map(|r| r.err_l2).collect::<Vec<_>>()))
            .collect();
        let slope = loglog_slope(&ds, &meds).unwrap_or(f64::NAN);
        let mut values = vec![("slope", slope)];
        let names = ["median_err_l2_d1", "median_err_l2_d2", "median_err_l2_d4", "median_err_l2_d8"];
        values.extend(names.into_iter().zip(meds.iter().copied()));
        Measured {
            pass: (0.35..=0.65).contains(&slope),
            detail: format!("log-log slope of median err_l2 vs d = {slope:.3} (need [0.35, 0.65])"),
            values,
        }
    }

    fn conditional_bounds(&self) -> Measured {
        let rate = |key: &str| {
            let (mut n, mut h) = (0usize, 0usize);
            for (_, o) in &self.outputs {
                for r in o.bound_rows.iter().filter(|r| r.key() == key) {
                    n += 1;
                    h += r.holds as usize;
                }
            }
            (n, if n == 0 { f64::NAN } else { h as f64 / n as f64 })
        };
        let keys = [("thm2/l2", "thm2_l2"), ("thm4/L2_emp", "thm4_L2_emp"), ("thm4/l1", "thm4_l1"), ("thm4/l2", "thm4_l2")];
        let mut values = Vec::new();
        let mut pass = true;
        let mut parts = Vec::new();
        for (key, name) in keys {
            let (n, r) = rate(key);
            pass &= n > 0 && r >= 0.95;
            parts.push(format!("{key} {r:.3}"));
            values.push((name, r));
        }
        let conditioned = rate("thm2/l2").0;
        values.push(("conditioned_trials", conditioned as f64));
        Measured {
            pass,
            detail: format!("hold rates over {conditioned} conditioned trials: {} (need >= 0.95)", parts.join(", ")),
            values,
        }
    }
}

fn feasibility_rate(seed: u64, threads: Option<usize>) -> Result<Measured> {
    let mut c = ExperimentConfig::template("gaussian")?;
    c.n = 1024;
    c.reps = 200;
    c.seed = seed;
    c.epsilon_rule = EpsilonRule::calibrated(c.sigma, 1.0, 2.0);
    c.bound_suite = vec![BoundSuite::Prop2];
    let out = run_experiment(&c, threads)?;
    let rate = out.summary.feasibility_rate;
    Ok(Measured {
        pass: rate >= 0.95,
        detail: format!("feasibility_rate {rate:.3} over {} trials (need >= 0.95)", c.reps),
        values: vec![("feasibility_rate", rate)],
    })
}

pub const THRESHOLDING_SIZES: [usize; 2] = [2048, 4096];

/// Returns the measurement and the larger of the two minimal `D`s.
fn thresholding_shape(seed: u64, threads: Option<usize>) -> Result<(Measured, f64)> {
    let mut ds = Vec::new();
    for (i, &n) in THRESHOLDING_SIZES.iter().enumerate() {
        let mut c = ExperimentConfig::template("orthogonal")?;
        c.n = n;
        c.reps = 50;
        c.seed = derive_seed(seed, tags::TRIAL, i as u64);
        c.bound_suite = vec![BoundSuite::Cor3];
        let out = run_experiment(&c, threads)?;
        let d = out.summary.min_d.get("cor3/l2_sq").copied().unwrap_or(f64::INFINITY);
        ds.push(d);
    }
    let (lo, hi) = (ds[0].min(ds[1]), ds[0].max(ds[1]));
    let ratio = hi / lo;
    let m = Measured {
        pass: hi.is_finite() && lo > 0.0 && ratio < 2.0,
        detail: format!("minimal D = {:.3} (n=2048), {:.3} (n=4096); ratio {ratio:.3} (need < 2)", ds[0], ds[1]),
        values: vec![("min_D_n2048", ds[0]), ("min_D_n4096", ds[1]), ("ratio", ratio)],
    };
    Ok((m, hi))
}

fn grouped_recovery(seed: u64, d_const: f64, threads: Option<usize>) -> Result<Measured> {
    let mut c = ExperimentConfig::template("grouped")?;
    c.reps = 50;
    c.seed = seed;
    c.d_const = d_const;
    c.bound_suite = vec![BoundSuite::Example2];
    let out = run_experiment(&c, threads)?;
    let sq: Vec<f64> = out.records.iter().map(|r| r.err_l2_pop * r.err_l2_pop).collect();
    let med = median(&sq);
    let eps = out.records[0].epsilon_used;
    let rhs = d_const * c.d_star as f64 * eps * eps;

    // β₂ diagnostics on the grouped Gram must come back as sentinels.
    let model = c.build_model()?;
    let blocks = model.blocks().ok_or_else(|| Error::invalid("grouped model without blocks"))?;
    let j = IndexSet::new(blocks.iter().take(c.d_star).map(|b| b[0]).collect(), model.n_funcs())?;
    let geometry = BoundGeometry::population(&model, &j)?;
    let est = beta2_estimate(&j, model.gram(), &AscentOptions::quick(), seed);
    let json = serde_json::to_string(&(&geometry, est))?;
    let sentinel = geometry.beta2 == Bound::Unbounded && est == Bound::Unbounded && json.contains("\"unbounded\"");
    Ok(Measured {
        pass: med <= rhs && sentinel,
        detail: format!(
            "median ||f_hat - f*||^2 = {med:.4} vs D*d*eps^2 = {rhs:.4} (D = {d_const:.3}); beta2 unbounded: {sentinel}"
        ),
        values: vec![("median_sq_error", med), ("rhs", rhs), ("D", d_const), ("beta2_unbounded", sentinel as u8 as f64)],
    })
}

// ---------------------------------------------------------------- empproc

pub const RATE_SIZES: [usize; 3] = [1_000, 4_000, 16_000];
const RATE_SEEDS: usize = 50;
const RATE_RESTARTS: usize = 8;

fn appendix_rates(seed: u64) -> Result<Measured> {
    let nf = 16;
    let model = make_gaussian(DMatrix::identity(nf, nf))?;
    let j = IndexSet::new(vec![0, 1, 2], nf)?;
    let ns: Vec<f64> = RATE_SIZES.iter().map(|&n| n as f64).collect();
    let mut meds = [Vec::new(), Vec::new(), Vec::new()];
    for (i, &n) in RATE_SIZES.iter().enumerate() {
        let mut vals = [Vec::new(), Vec::new(), Vec::new()];
        for s in 0..RATE_SEEDS {
            let sd = derive_seed(seed, tags::TRIAL, (i * RATE_SEEDS + s) as u64);
            vals[0].push(empproc_sup_l1ball(&model, n, RATE_RESTARTS, sd)?.value);
            vals[1].push(empproc_sup_l1ball_sq(&model, n, RATE_RESTARTS, sd)?.value);
            vals[2].push(empproc_sup_cone(&model, n, &j, j.d(), RATE_RESTARTS, sd)?.value);
        }
        for k in 0..3 {
            meds[k].push(median(&vals[k]));
        }
    }
    let slopes: Vec<f64> = meds.iter().map(|m| loglog_slope(&ns, m).unwrap_or(f64::NAN)).collect();
    let slopes_ok = slopes.iter().all(|s| (-0.65..=-0.35).contains(s));

    let consts: Vec<f64> = [16usize, 64]
        .iter()
        .enumerate()
        .map(|(i, &n_funcs)| {
            let m = make_gaussian(DMatrix::identity(n_funcs, n_funcs))?;
            Ok(bernstein_max_check(&m, 1_000, 1.0, 200, 8.0, derive_seed(seed, tags::MONTE_CARLO, i as u64))?.min_constant)
        })
        .collect::<Result<_>>()?;
    let c_ratio = consts[0].max(consts[1]) / consts[0].min(consts[1]);
    Ok(Measured {
        pass: slopes_ok && c_ratio < 2.0,
        detail: format!(
            "slopes l1ball {:.3}, l1ball_sq {:.3}, cone {:.3} (need [-0.65, -0.35]); Bernstein min C {:.3} (N=16), {:.3} (N=64)",
            slopes[0], slopes[1], slopes[2], consts[0], consts[1]
        ),
        values: vec![
            ("slope_l1ball", slopes[0]),
            ("slope_l1ball_sq", slopes[1]),
            ("slope_cone", slopes[2]),
            ("bernstein_min_C_N16", consts[0]),
            ("bernstein_min_C_N64", consts[1]),
            ("bernstein_ratio", c_ratio),
        ],
    })
}
