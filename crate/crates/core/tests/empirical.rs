//! Experiment harness, Orlicz norms and empirical-process estimates against
//! independent recomputations.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sparselab::dictionaries::{make_gaussian, DictionaryKind, ModelParams};
use sparselab::empirical::{
    empproc_sup_cone, empproc_sup_l1ball, orlicz_norm, orlicz_std_error, product_psi1_bound, read_bounds_csv,
    read_trials_csv, run_experiment, run_trial_detail, stats::median, summarize, trial_seed, write_bounds_csv,
    write_trials_csv, BoundSuite, ExperimentConfig, OrliczInput, Psi, TrialRecord,
};
use sparselab::estimators::{limit_error_l2, EpsilonRule};
use sparselab::geometry::IndexSet;

fn small(kind: &str, reps: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::template(kind).unwrap();
    c.reps = reps;
    c
}

fn without_runtime(r: &[TrialRecord]) -> Vec<TrialRecord> {
    r.iter().cloned().map(|mut t| {
        t.runtime_ms = 0.0;
        t
    }).collect()
}

#[test]
fn product_of_gaussians_respects_psi1_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sample: Vec<f64> = (0..1_000_000)
        .map(|_| rng.sample::<f64, _>(StandardNormal) * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let est = orlicz_norm(OrliczInput::Sample(&sample), Psi::Psi1, 1e-6).unwrap().value().unwrap();
    let se = orlicz_std_error(&sample, Psi::Psi1, est);
    let psi2 = (8.0f64 / 3.0).sqrt();
    let bound = product_psi1_bound(psi2, psi2);
    assert!((bound - 8.0 / 3.0).abs() < 1e-12);
    assert!(est <= bound + 3.0 * se, "estimate {est} ± {se} above bound {bound}");
}

#[test]
fn doubling_reps_keeps_the_first_half() {
    let a = run_experiment(&small("gaussian", 4), Some(1)).unwrap();
    let b = run_experiment(&small("gaussian", 8), Some(1)).unwrap();
    assert_eq!(without_runtime(&a.records), without_runtime(&b.records[..4]));
    let first: Vec<_> = b.bound_rows.iter().take(a.bound_rows.len()).cloned().collect();
    assert_eq!(a.bound_rows, first);
}

#[test]
fn thread_count_does_not_change_results() {
    let c = small("rademacher", 5);
    let a = run_experiment(&c, Some(1)).unwrap();
    let b = run_experiment(&c, Some(3)).unwrap();
    assert_eq!(without_runtime(&a.records), without_runtime(&b.records));
    assert_eq!(a.summary, b.summary);
    assert!(a.records.iter().all(|r| r.err_l1_pop.is_finite() && r.err_l1_pop >= 0.0));
}

#[test]
fn summary_recomputes_from_csv() {
    for kind in ["gaussian", "misspecified"] {
        let c = small(kind, 5);
        let out = run_experiment(&c, None).unwrap();
        let (mut t, mut b) = (Vec::new(), Vec::new());
        write_trials_csv(&mut t, &out.records).unwrap();
        write_bounds_csv(&mut b, &out.bound_rows).unwrap();
        let records = read_trials_csv(t.as_slice()).unwrap();
        let rows = read_bounds_csv(b.as_slice()).unwrap();
        assert_eq!(summarize(&records, &rows, c.d_const), out.summary, "{kind}");

        // Hold rates by hand.
        for (key, rate) in &out.summary.bound_hold_rates {
            let sel: Vec<_> = rows.iter().filter(|r| &r.key() == key).collect();
            let held = sel.iter().filter(|r| r.holds).count() as f64 / sel.len() as f64;
            assert_eq!(*rate, held);
        }
    }
}

#[test]
fn record_invariants_hold() {
    for kind in ["gaussian", "noiseless", "grouped", "orthogonal"] {
        let mut c = small(kind, 4);
        if kind == "orthogonal" {
            c.n = 256;
        }
        let out = run_experiment(&c, None).unwrap();
        for r in &out.records {
            for v in [r.err_l1, r.err_l2].into_iter().flatten().chain([r.err_l1_pop, r.err_l2_pop, r.err_l2_emp]) {
                assert!(v >= 0.0 && v.is_finite(), "{kind}: {r:?}");
            }
            assert!(!r.exact_recovery || r.support_recovered, "{kind}: {r:?}");
        }
        for (k, v) in &out.summary.bound_hold_rates {
            assert!((0.0..=1.0).contains(v), "{k}");
        }
        assert!((0.0..=1.0).contains(&out.summary.recovery_rate));
    }
}

#[test]
fn misspecified_runs_report_oracle_bound() {
    let out = run_experiment(&small("misspecified", 6), None).unwrap();
    assert!(out.records.iter().all(|r| r.err_l2.is_none()));
    let n = out.summary.bound_trials.get("cor5/L2_sq").copied().unwrap_or(0);
    let feasible = out.records.iter().filter(|r| r.feasible_star).count();
    assert_eq!(n, feasible);
}

#[test]
fn cone_with_full_support_dominates_vertices() {
    let model = make_gaussian(DMatrix::identity(6, 6)).unwrap();
    let all = IndexSet::new((0..6).collect(), 6).unwrap();
    for seed in 0..10 {
        let ball = empproc_sup_l1ball(&model, 300, 4, seed).unwrap();
        let cone = empproc_sup_cone(&model, 300, &all, 6, 4, seed).unwrap();
        assert!(cone.value >= ball.vertex_value - 1e-12, "seed {seed}: {} < {}", cone.value, ball.vertex_value);
    }
}

#[test]
fn finite_n_errors_approach_the_orthogonal_limit() {
    let taus = vec![1.0, 0.5, 2.0, 1.5, 0.8, 1.2, 1.0, 0.7];
    let mut medians = Vec::new();
    for n in [100, 1_000, 10_000] {
        let mut c = ExperimentConfig::template("orthogonal").unwrap();
        c.model.kind = DictionaryKind::OrthogonalScaled;
        c.model.n_funcs = 8;
        c.model.params = ModelParams {
            taus: Some(taus.clone()),
            ..ModelParams::default()
        };
        c.n_funcs = 8;
        c.n = n;
        c.d_star = 4;
        c.coef_decay = 1.0;
        c.sigma = 0.5;
        c.epsilon_rule = EpsilonRule::explicit(0.2);
        c.bound_suite = vec![BoundSuite::Example1];
        let model = c.build_model().unwrap();
        let norms_sq: Vec<f64> = taus.iter().map(|t| t * t).collect();
        let gaps: Vec<f64> = (0..50)
            .map(|i| {
                let t = run_trial_detail(&c, &model, trial_seed(3, i)).unwrap();
                let limit = limit_error_l2(&t.lambda_star, 0.2, &norms_sq).unwrap();
                (t.record.err_l2.unwrap() - limit).abs()
            })
            .collect();
        medians.push(median(&gaps));
    }
    assert!(medians[0] > medians[1] && medians[1] > medians[2], "{medians:?}");
}
