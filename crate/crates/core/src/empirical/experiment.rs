use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::{geometry_needs, verify_bounds, BoundGeometry, BoundRow, BoundSuite, D_SCALED_BOUNDS};
use super::stats::MetricStats;
use crate::dictionaries::{
    population_l1_norm_with_misfit, sample_design, sample_response, DictionaryKind, DictionaryModel,
    GramMatrix, ModelParams, ModelSpec, DEFAULT_MC_SAMPLES,
};
use crate::error::{Error, Result};
use crate::estimators::{dantzig_select_parts, epsilon_calibrate, EpsilonMode, EpsilonRule};
use crate::geometry::IndexSet;
use crate::linalg;
use crate::lp::SolverOptions;
use crate::rng::{self, tags};

pub const CONFIG_VERSION: u32 = 1;

/// Threshold for "nonzero" when comparing supports, and the ℓ2 tolerance of
/// exact recovery.
pub const SUPPORT_TOL: f64 = 1e-6;

fn one() -> f64 {
    1.0
}

fn default_d() -> f64 {
    4.0
}

/// One Monte Carlo experiment. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub model: ModelSpec,
    #[serde(rename = "N")]
    pub n_funcs: usize,
    pub n: usize,
    /// Number of nonzero coefficients (active blocks for grouped models).
    pub d_star: usize,
    #[serde(default = "one")]
    pub coef_magnitude: f64,
    /// Ratio between consecutive nonzero magnitudes (1 = all equal).
    #[serde(default = "one")]
    pub coef_decay: f64,
    pub sigma: f64,
    /// Scale of the regression-function component outside the span.
    #[serde(default)]
    pub gamma: f64,
    pub epsilon_rule: EpsilonRule,
    pub reps: usize,
    pub seed: u64,
    #[serde(rename = "A", default = "one")]
    pub a: f64,
    #[serde(default)]
    pub bound_suite: Vec<BoundSuite>,
    /// Constant of the `D`-scaled bounds.
    #[serde(rename = "D", default = "default_d")]
    pub d_const: f64,
}

impl ExperimentConfig {
    /// Parses JSON, reporting the path of the offending field on failure.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let field = if path == "." || path.is_empty() {
                unknown_field(&inner.to_string()).unwrap_or_else(|| "<root>".into())
            } else {
                path
            };
            Error::config(field, inner.to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Builds the dictionary model.
    pub fn build_model(&self) -> Result<DictionaryModel> {
        DictionaryModel::try_from(self.model.clone()).map_err(|e| Error::config("model", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::config("version", format!("expected {CONFIG_VERSION}")));
        }
        let model = self.build_model()?;
        if model.n_funcs() != self.n_funcs {
            return Err(Error::config("N", "must equal model.N"));
        }
        if self.n == 0 {
            return Err(Error::config("n", "must be at least 1"));
        }
        let capacity = match model.blocks() {
            Some(b) => b.len(),
            None => self.n_funcs,
        };
        if self.d_star > capacity {
            return Err(Error::config("d_star", format!("must be at most {capacity}")));
        }
        if self.reps == 0 {
            return Err(Error::config("reps", "must be at least 1"));
        }
        if !(self.a >= 1.0 && self.a.is_finite()) {
            return Err(Error::config("A", "must be >= 1"));
        }
        if self.a * (self.n_funcs as f64).ln() > self.n as f64 {
            return Err(Error::config("A", "A·ln N must not exceed n"));
        }
        for (name, v) in [("sigma", self.sigma), ("gamma", self.gamma), ("coef_magnitude", self.coef_magnitude)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(name, "must be finite and >= 0"));
            }
        }
        if !(self.coef_decay > 0.0 && self.coef_decay <= 1.0) {
            return Err(Error::config("coef_decay", "must lie in (0, 1]"));
        }
        if !(self.d_const > 0.0 && self.d_const.is_finite()) {
            return Err(Error::config("D", "must be positive"));
        }
        self.epsilon_rule.validate()?;
        if self.epsilon_rule.mode == EpsilonMode::Calibrated && self.epsilon_rule.a != self.a {
            return Err(Error::config("epsilon_rule.A", "must equal the experiment's A"));
        }
        Ok(())
    }

    /// Template for a scenario kind: gaussian, rademacher, orthogonal,
    /// grouped, misspecified or noiseless.
    pub fn template(kind: &str) -> Result<Self> {
        let spec = |kind: DictionaryKind, n: usize, params: ModelParams| ModelSpec {
            kind,
            n_funcs: n,
            params,
        };
        let base = ExperimentConfig {
            version: CONFIG_VERSION,
            model: spec(DictionaryKind::Gaussian, 64, ModelParams::default()),
            n_funcs: 64,
            n: 256,
            d_star: 4,
            coef_magnitude: 1.0,
            coef_decay: 1.0,
            sigma: 0.5,
            gamma: 0.0,
            epsilon_rule: EpsilonRule::calibrated(0.5, 1.0, 2.0),
            reps: 50,
            seed: 1,
            a: 1.0,
            bound_suite: vec![BoundSuite::Thm1, BoundSuite::Thm2, BoundSuite::Thm4, BoundSuite::Prop2],
            d_const: default_d(),
        };
        let cfg = match kind {
            "gaussian" => base,
            "rademacher" => ExperimentConfig {
                model: spec(DictionaryKind::Rademacher, 64, ModelParams::default()),
                bound_suite: vec![BoundSuite::Thm1, BoundSuite::Thm2, BoundSuite::Prop2],
                ..base
            },
            "orthogonal" => ExperimentConfig {
                model: spec(DictionaryKind::OrthogonalScaled, 64, ModelParams::default()),
                n: 2048,
                d_star: 64,
                coef_decay: 0.8,
                sigma: 1.0,
                epsilon_rule: EpsilonRule::calibrated(1.0, 1.0, 2.0),
                bound_suite: vec![BoundSuite::Cor3, BoundSuite::Example1, BoundSuite::Prop2],
                ..base
            },
            "grouped" => ExperimentConfig {
                model: spec(
                    DictionaryKind::Grouped,
                    64,
                    ModelParams {
                        blocks: Some((0..16).map(|b| (4 * b + 1..=4 * b + 4).collect()).collect()),
                        ..ModelParams::default()
                    },
                ),
                n: 512,
                d_star: 3,
                bound_suite: vec![BoundSuite::Example2, BoundSuite::Prop2],
                ..base
            },
            "misspecified" => ExperimentConfig {
                n: 512,
                gamma: 0.3,
                // Misfit adds to the effective noise level.
                epsilon_rule: EpsilonRule::calibrated(0.8, 1.0, 2.0),
                bound_suite: vec![BoundSuite::Cor5],
                ..base
            },
            "noiseless" => ExperimentConfig {
                n: 32,
                d_star: 3,
                sigma: 0.0,
                epsilon_rule: EpsilonRule::explicit(0.0),
                reps: 100,
                bound_suite: vec![BoundSuite::Cor2],
                ..base
            },
            other => {
                return Err(Error::invalid(format!(
                    "unknown scenario kind `{other}` (expected gaussian, rademacher, orthogonal, grouped, misspecified or noiseless)"
                )))
            }
        };
        Ok(cfg)
    }
}

fn unknown_field(msg: &str) -> Option<String> {
    let start = msg.find("field `")? + 7;
    let end = msg[start..].find('`')? + start;
    Some(msg[start..end].to_string())
}

/// One row of the trial CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    /// The true (or projected) coefficient vector lies in the constraint set.
    pub feasible_star: bool,
    /// Coefficient errors; empty when coefficients are not identifiable or
    /// the model is misspecified.
    pub err_l1: Option<f64>,
    pub err_l2: Option<f64>,
    #[serde(rename = "err_L1_pop")]
    pub err_l1_pop: f64,
    #[serde(rename = "err_L2_pop")]
    pub err_l2_pop: f64,
    #[serde(rename = "err_L2_emp")]
    pub err_l2_emp: f64,
    pub exact_recovery: bool,
    pub support_recovered: bool,
    pub epsilon_used: f64,
    pub runtime_ms: f64,
}

/// A trial record with the vectors and flags the bound suites need.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialDetail {
    pub record: TrialRecord,
    pub lambda_hat: Vec<f64>,
    /// True coefficients (the projection onto the span when misspecified).
    pub lambda_star: Vec<f64>,
    /// `d(λ*)`, or the number of active blocks for grouped models.
    pub sparsity: usize,
    /// Largest residual correlation of `lambda_star`.
    pub residual_star: f64,
    pub misfit: f64,
    pub noiseless: bool,
    pub grouped: bool,
    /// `‖h_k‖²` when the population Gram matrix is diagonal.
    pub orthogonal_norms_sq: Option<Vec<f64>>,
    pub bounds: Vec<BoundRow>,
}

/// Seed of trial `index` under a master seed.
pub fn trial_seed(master: u64, index: usize) -> u64 {
    rng::derive_seed(master, tags::TRIAL, index as u64)
}

/// Random support of size `d_star` with magnitudes
/// `coef_magnitude·coef_decay^i` and random signs. Grouped models place the
/// block coefficient on the block's first element.
pub fn draw_coefficients(config: &ExperimentConfig, model: &DictionaryModel, seed: u64) -> Vec<f64> {
    let mut r = rng::rng_from_seed(rng::derive_seed(seed, tags::COEFFICIENTS, 0));
    let slots: Vec<usize> = match model.blocks() {
        Some(blocks) => blocks.iter().map(|b| b[0]).collect(),
        None => (0..config.n_funcs).collect(),
    };
    let mut idx = slots.clone();
    let mut lambda = vec![0.0; config.n_funcs];
    for i in 0..config.d_star {
        let k = r.random_range(i..idx.len());
        idx.swap(i, k);
        let sign = if r.random::<bool>() { 1.0 } else { -1.0 };
        lambda[idx[i]] = sign * config.coef_magnitude * config.coef_decay.powi(i as i32);
    }
    lambda
}

fn support(v: &[f64]) -> Vec<usize> {
    (0..v.len()).filter(|&k| v[k].abs() > SUPPORT_TOL).collect()
}

/// Runs one trial and returns its CSV record.
pub fn run_trial(config: &ExperimentConfig, trial_seed: u64) -> Result<TrialRecord> {
    let model = config.build_model()?;
    Ok(run_trial_detail(config, &model, trial_seed)?.record)
}

/// Samples a design and response, calibrates `ε`, solves, measures every
/// error and evaluates the configured bound suites.
pub fn run_trial_detail(config: &ExperimentConfig, model: &DictionaryModel, seed: u64) -> Result<TrialDetail> {
    let started = Instant::now();
    let lambda_star = draw_coefficients(config, model, seed);
    let design = sample_design(model, config.n, seed)?;
    let response = sample_response(&design, &lambda_star, config.sigma, config.gamma, seed)?;
    let rule = config.epsilon_rule.clone().with_default_sigma(config.sigma);
    let eps = epsilon_calibrate(&rule, Some(model), Some(&design), config.n_funcs, config.n)?;

    let gram_n = design.empirical_gram();
    let z = design.correlations(&response.y);
    let result = dantzig_select_parts(&gram_n, &z, eps, &SolverOptions::default())?;
    let runtime_ms = started.elapsed().as_secs_f64() * 1e3;

    let lambda0 = response.projection.clone();
    let delta = linalg::sub(&result.lambda_hat, &lambda0);
    let residual_star = linalg::norm_inf(&linalg::sub(&linalg::mat_vec(&gram_n, &lambda0), &z));
    let grouped = model.kind() == DictionaryKind::Grouped;
    let function_only = grouped || config.gamma > 0.0;

    let gram = model.gram();
    let fit_sq = linalg::quad_form(gram.entries(), &delta).max(0.0);
    let err_l2_pop = (fit_sq + config.gamma * config.gamma).sqrt();
    let err_l1_pop = population_l1_norm_with_misfit(
        &delta,
        config.gamma,
        model,
        DEFAULT_MC_SAMPLES,
        rng::derive_seed(seed, tags::MONTE_CARLO, 0),
    )?;
    let err_l2_emp = linalg::quad_form(&gram_n, &delta).max(0.0).sqrt();
    let (err_l1, err_l2) = if function_only {
        (None, None)
    } else {
        (Some(linalg::norm1(&delta)), Some(linalg::norm2(&delta)))
    };
    let exact_recovery = err_l2.is_some_and(|e| e <= SUPPORT_TOL);
    let support_recovered = !function_only && support(&result.lambda_hat) == support(&lambda0);

    let record = TrialRecord {
        seed,
        feasible_star: residual_star <= eps,
        err_l1,
        err_l2,
        err_l1_pop,
        err_l2_pop,
        err_l2_emp,
        exact_recovery,
        support_recovered,
        epsilon_used: eps,
        runtime_ms,
    };
    let mut detail = TrialDetail {
        record,
        lambda_hat: result.lambda_hat,
        sparsity: if grouped { config.d_star } else { support(&lambda0).len() },
        lambda_star: lambda0,
        residual_star,
        misfit: config.gamma,
        noiseless: config.sigma == 0.0 && config.gamma == 0.0,
        grouped,
        orthogonal_norms_sq: (gram.is_diagonal() && !function_only).then(|| gram.diagonal()),
        bounds: Vec::new(),
    };

    let (need_pop, need_emp) = geometry_needs(&config.bound_suite);
    let geometry = if need_pop && detail.record.feasible_star {
        let j = IndexSet::support(&detail.lambda_star, SUPPORT_TOL);
        let mut g = BoundGeometry::population(model, &j)?;
        if need_emp && !function_only {
            g = g.with_empirical(&GramMatrix::new(gram_n)?)?;
        }
        Some(g)
    } else {
        None
    };
    let mut rows = Vec::new();
    for &suite in &config.bound_suite {
        rows.extend(verify_bounds(&detail, geometry.as_ref(), suite, config.d_const)?);
    }
    detail.bounds = rows;
    Ok(detail)
}

/// Aggregated statistics; an exact function of the trial and bound rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub reps: usize,
    /// mean/median/q95 per error metric and for `epsilon_used`.
    pub metrics: BTreeMap<String, MetricStats>,
    pub recovery_rate: f64,
    pub support_recovery_rate: f64,
    pub feasibility_rate: f64,
    /// Fraction of evaluated trials where each bound (`suite/bound_id`) holds.
    pub bound_hold_rates: BTreeMap<String, f64>,
    /// Number of trials each bound was evaluated on.
    pub bound_trials: BTreeMap<String, usize>,
    /// Smallest `D` for which each `D`-scaled bound holds on every trial.
    pub min_d: BTreeMap<String, f64>,
    /// Log-log slopes from scaling sweeps; empty for a single experiment.
    pub slope_fits: BTreeMap<String, f64>,
}

/// Summary of trial records and bound rows. Runtime is not summarized so
/// the summary is reproducible run to run.
pub fn summarize(records: &[TrialRecord], rows: &[BoundRow], d_const: f64) -> ExperimentSummary {
    let reps = records.len();
    let rate = |f: &dyn Fn(&TrialRecord) -> bool| {
        if reps == 0 {
            0.0
        } else {
            records.iter().filter(|r| f(r)).count() as f64 / reps as f64
        }
    };
    let mut metrics = BTreeMap::new();
    let columns: [(&str, &dyn Fn(&TrialRecord) -> Option<f64>); 6] = [
        ("err_l1", &|r| r.err_l1),
        ("err_l2", &|r| r.err_l2),
        ("err_L1_pop", &|r| Some(r.err_l1_pop)),
        ("err_L2_pop", &|r| Some(r.err_l2_pop)),
        ("err_L2_emp", &|r| Some(r.err_l2_emp)),
        ("epsilon_used", &|r| Some(r.epsilon_used)),
    ];
    for (name, get) in columns {
        let vals: Vec<f64> = records.iter().filter_map(get).collect();
        if let Some(s) = MetricStats::of(&vals) {
            metrics.insert(name.to_string(), s);
        }
    }

    let mut counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut min_d: BTreeMap<String, f64> = BTreeMap::new();
    for r in rows {
        let key = r.key();
        let e = counts.entry(key.clone()).or_default();
        e.0 += 1;
        e.1 += r.holds as usize;
        if D_SCALED_BOUNDS.contains(&key.as_str()) {
            let unit = r.rhs.finite().map(|v| v / d_const).unwrap_or(f64::INFINITY);
            let need = if r.lhs <= 0.0 {
                0.0
            } else if unit > 0.0 {
                r.lhs / unit
            } else {
                f64::INFINITY
            };
            let cur = min_d.entry(key).or_insert(0.0);
            *cur = cur.max(need);
        }
    }
    ExperimentSummary {
        reps,
        metrics,
        recovery_rate: rate(&|r| r.exact_recovery),
        support_recovery_rate: rate(&|r| r.support_recovered),
        feasibility_rate: rate(&|r| r.feasible_star),
        bound_hold_rates: counts.iter().map(|(k, (n, h))| (k.clone(), *h as f64 / *n as f64)).collect(),
        bound_trials: counts.iter().map(|(k, (n, _))| (k.clone(), *n)).collect(),
        min_d,
        slope_fits: BTreeMap::new(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    /// Records in trial order.
    pub records: Vec<TrialRecord>,
    pub bound_rows: Vec<BoundRow>,
    pub summary: ExperimentSummary,
}

/// Runs `config.reps` trials with seeds `trial_seed(config.seed, i)`.
pub fn run_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentOutput> {
    run_experiment_streaming(config, threads, |_| Ok(()))
}

/// Like [`run_experiment`], handing each finished trial to `sink` in trial
/// order as soon as its batch completes, so callers can flush partial
/// results.
pub fn run_experiment_streaming(
    config: &ExperimentConfig,
    threads: Option<usize>,
    mut sink: impl FnMut(&TrialDetail) -> Result<()>,
) -> Result<ExperimentOutput> {
    config.validate()?;
    let model = config.build_model()?;
    let workers = threads.unwrap_or_else(rayon::current_num_threads).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let batch = workers * 4;
    let mut records = Vec::with_capacity(config.reps);
    let mut rows = Vec::new();
    for start in (0..config.reps).step_by(batch) {
        let end = (start + batch).min(config.reps);
        let done: Vec<Result<TrialDetail>> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| run_trial_detail(config, &model, trial_seed(config.seed, i)))
                .collect()
        });
        for d in done {
            let d = d?;
            sink(&d)?;
            records.push(d.record);
            rows.extend(d.bounds);
        }
    }
    let summary = summarize(&records, &rows, config.d_const);
    Ok(ExperimentOutput {
        records,
        bound_rows: rows,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: &str) -> ExperimentConfig {
        let mut c = ExperimentConfig::template(kind).unwrap();
        c.reps = 3;
        c
    }

    #[test]
    fn templates_validate_and_round_trip() {
        for kind in ["gaussian", "rademacher", "orthogonal", "grouped", "misspecified", "noiseless"] {
            let c = ExperimentConfig::template(kind).unwrap();
            c.validate().unwrap();
            let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
            assert_eq!(back, c, "{kind}");
        }
        assert!(ExperimentConfig::template("weird").is_err());
    }

    #[test]
    fn noiseless_template_fields() {
        let c = ExperimentConfig::template("noiseless").unwrap();
        assert_eq!(c.sigma, 0.0);
        assert_eq!(c.epsilon_rule.value, Some(0.0));
        assert_eq!(c.bound_suite, vec![BoundSuite::Cor2]);
    }

    #[test]
    fn config_errors_name_the_field() {
        let mut v: serde_json::Value = serde_json::from_str(&small("gaussian").to_json()).unwrap();
        v["typo_field"] = serde_json::json!(1);
        match ExperimentConfig::from_json(&v.to_string()) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "typo_field"),
            other => panic!("{other:?}"),
        }
        let mut v: serde_json::Value = serde_json::from_str(&small("gaussian").to_json()).unwrap();
        v["epsilon_rule"]["C"] = serde_json::json!("two");
        match ExperimentConfig::from_json(&v.to_string()) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "epsilon_rule.C"),
            other => panic!("{other:?}"),
        }
        let mut c = small("gaussian");
        c.d_star = 100;
        assert!(matches!(c.validate(), Err(Error::Config { field, .. }) if field == "d_star"));
    }

    #[test]
    fn trials_are_deterministic() {
        let c = small("gaussian");
        let a = run_trial(&c, 42).unwrap();
        let b = run_trial(&c, 42).unwrap();
        assert_eq!(
            TrialRecord { runtime_ms: 0.0, ..a },
            TrialRecord { runtime_ms: 0.0, ..b }
        );
    }

    #[test]
    fn zero_truth_gives_zero_estimate() {
        let mut c = small("gaussian");
        c.d_star = 0;
        let r = run_trial(&c, 7).unwrap();
        if r.feasible_star {
            assert_eq!(r.err_l2, Some(0.0));
            assert!(r.exact_recovery && r.support_recovered);
        }
    }

    #[test]
    fn single_rep_summary_matches_record() {
        let mut c = small("gaussian");
        c.reps = 1;
        let out = run_experiment(&c, Some(1)).unwrap();
        let r = &out.records[0];
        let m = &out.summary.metrics["err_l2"];
        assert_eq!((m.mean, m.median, m.q95), (r.err_l2.unwrap(), r.err_l2.unwrap(), r.err_l2.unwrap()));
        assert_eq!(out.summary.feasibility_rate, if r.feasible_star { 1.0 } else { 0.0 });
    }

    #[test]
    fn grouped_trials_report_function_errors_only() {
        let r = run_trial(&small("grouped"), 3).unwrap();
        assert!(r.err_l1.is_none() && r.err_l2.is_none());
        assert!(!r.exact_recovery);
        assert!(r.err_l2_pop >= 0.0);
    }

    #[test]
    fn decay_shapes_coefficients() {
        let mut c = small("orthogonal");
        c.d_star = 4;
        c.coef_decay = 0.5;
        let model = c.build_model().unwrap();
        let mut mags: Vec<f64> = draw_coefficients(&c, &model, 1).iter().map(|v| v.abs()).filter(|&v| v > 0.0).collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(mags, vec![1.0, 0.5, 0.25, 0.125]);
    }
}
