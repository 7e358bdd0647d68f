//! Geometry quantities against brute-force oracles and structural properties.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sparselab::dictionaries::GramMatrix;
use sparselab::geometry::{
    beta2_bound_kappa_rho, beta2_bound_lemma2, beta2_bound_prop3, beta2_estimate,
    block_decompose, delta_d, in_cone, md_Md, project_into_cone, rho_d, AscentOptions, Bound,
    IndexSet,
};

/// Correlation matrix of a random Wishart draw, shrunk toward the identity.
fn shrunk_gram(rng: &mut ChaCha8Rng, n: usize, shrink: f64) -> GramMatrix {
    let a = DMatrix::from_fn(n, n + 2, |_, _| rng.sample::<f64, _>(StandardNormal));
    let w = &a * a.transpose();
    let c = DMatrix::from_fn(n, n, |i, j| w[(i, j)] / (w[(i, i)] * w[(j, j)]).sqrt());
    let g = DMatrix::identity(n, n) * (1.0 - shrink) + c * shrink;
    GramMatrix::new((&g + g.transpose()) * 0.5).unwrap()
}

fn random_set(rng: &mut ChaCha8Rng, n: usize, d: usize) -> IndexSet {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..d {
        let k = rng.random_range(i..n);
        idx.swap(i, k);
    }
    IndexSet::new(idx[..d].to_vec(), n).unwrap()
}

fn norm_f(g: &GramMatrix, u: &[f64]) -> f64 {
    let v = DVector::from_column_slice(u);
    (v.transpose() * g.entries() * &v)[(0, 0)].max(0.0).sqrt()
}

#[test]
fn restricted_isometry_matches_random_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 8;
    let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let g = GramMatrix::new(&a * a.transpose() / n as f64).unwrap();
    let (m, big_m) = md_Md(2, &g).unwrap();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for _ in 0..100_000 {
        let i = rng.random_range(0..n);
        let mut k = rng.random_range(0..n - 1);
        if k >= i {
            k += 1;
        }
        let mut u = vec![0.0f64; n];
        u[i] = rng.sample(StandardNormal);
        u[k] = rng.sample(StandardNormal);
        let s: f64 = (u[i] * u[i] + u[k] * u[k]).sqrt();
        u.iter_mut().for_each(|x| *x /= s);
        let f = norm_f(&g, &u);
        lo = lo.min(f);
        hi = hi.max(f);
    }
    assert!(hi <= big_m + 1e-12 && hi >= big_m - 1e-3, "max {hi} vs {big_m}");
    assert!(lo >= m - 1e-12 && lo <= m + 1e-3, "min {lo} vs {m}");
}

#[test]
fn beta2_estimate_beats_dense_random_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..3 {
        let n = 4 + case;
        let g = shrunk_gram(&mut rng, n, 0.7);
        let j = random_set(&mut rng, n, 1 + case % 2);
        let est = beta2_estimate(&j, &g, &AscentOptions::default(), case as u64)
            .finite()
            .unwrap();
        // Oracle: Gaussian directions pushed into the cone by rescaling the
        // off-J part to a uniform fraction of the J mass.
        let mask = j.mask(n);
        let mut best: f64 = 0.0;
        for _ in 0..1_000_000 {
            let mut u: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let on: f64 = (0..n).filter(|&k| mask[k]).map(|k| u[k].abs()).sum();
            let off: f64 = (0..n).filter(|&k| !mask[k]).map(|k| u[k].abs()).sum();
            let t = rng.random::<f64>() * on / off;
            (0..n).filter(|&k| !mask[k]).for_each(|k| u[k] *= t);
            let on2: f64 = (0..n).filter(|&k| mask[k]).map(|k| u[k] * u[k]).sum();
            best = best.max(on2.sqrt() / norm_f(&g, &u));
        }
        assert!(est >= best - 1e-9, "case {case}: estimate {est} below search {best}");
        assert!(est <= best * 1.02, "case {case}: estimate {est} far above search {best}");
    }
}

#[test]
fn estimate_respects_every_upper_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let opts = AscentOptions {
        samples: 10_000,
        ..AscentOptions::default()
    };
    for case in 0..12 {
        let n = rng.random_range(6..=9);
        let shrink = rng.random_range(0.05..0.4);
        let g = shrunk_gram(&mut rng, n, shrink);
        let d = rng.random_range(1..=2);
        let j = random_set(&mut rng, n, d);
        let est = beta2_estimate(&j, &g, &opts, case).finite().unwrap();
        let mut bounds = vec![beta2_bound_kappa_rho(&j, &g), beta2_bound_lemma2(&j, &g).unwrap()];
        for s in 1..=n - d {
            bounds.push(beta2_bound_prop3(&j, s, &g).unwrap());
        }
        for b in bounds.into_iter().filter_map(Bound::finite) {
            assert!(est <= b + 1e-6, "case {case}: estimate {est} above bound {b}");
        }
    }
}

#[test]
fn lemma2_is_finite_near_identity() {
    let g = GramMatrix::new(DMatrix::from_fn(9, 9, |i, k| if i == k { 1.0 } else { 0.05 })).unwrap();
    let j = IndexSet::new(vec![4], 9).unwrap();
    let bound = beta2_bound_lemma2(&j, &g).unwrap().finite().expect("finite");
    let est = beta2_estimate(&j, &g, &AscentOptions::default(), 0).finite().unwrap();
    assert!(bound >= est);
}

#[test]
fn restricted_isometry_family_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..10 {
        let n = 9;
        let shrink = rng.random_range(0.1..0.9);
        let g = shrunk_gram(&mut rng, n, shrink);
        let fam: Vec<(f64, f64)> = (1..=n).map(|d| md_Md(d, &g).unwrap()).collect();
        for w in fam.windows(2) {
            assert!(w[1].0 <= w[0].0 + 1e-12 && w[1].1 >= w[0].1 - 1e-12);
            assert!(w[0].0 <= w[0].1);
        }
        let deltas: Vec<f64> = (1..=n).map(|d| delta_d(d, &g).unwrap()).collect();
        assert!(deltas.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        let rhos: Vec<f64> = (1..=3).map(|d| rho_d(d, &g).unwrap()).collect();
        assert!(rhos.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{rhos:?}");
        let ev = g.entries().clone().symmetric_eigenvalues();
        let (m, big_m) = fam[n - 1];
        assert!((m - ev.min().sqrt()).abs() < 1e-10);
        assert!((big_m - ev.max().sqrt()).abs() < 1e-10);
    }
}

#[test]
fn rho_d_grows_with_correlation_strength() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..20 {
        let n = rng.random_range(6..=9);
        let c = shrunk_gram(&mut rng, n, 1.0);
        let mut last = -1.0;
        for step in 0..=5 {
            let a = step as f64 * 0.1;
            let g = DMatrix::identity(n, n) * (1.0 - a) + c.entries() * a;
            let r = rho_d(2.min(n / 3), &GramMatrix::new(g).unwrap()).unwrap();
            assert!(r >= last - 1e-12, "{r} < {last}");
            last = r;
        }
    }
}

#[test]
fn estimate_scales_inversely_with_gram_scale() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let opts = AscentOptions {
        samples: 5_000,
        ..AscentOptions::default()
    };
    for case in 0..4 {
        let g = shrunk_gram(&mut rng, 6, 0.5);
        let j = random_set(&mut rng, 6, 2);
        let base = beta2_estimate(&j, &g, &opts, case).finite().unwrap();
        for c in [0.5, 2.0] {
            let scaled = beta2_estimate(&j, &g.scaled(c * c), &opts, case).finite().unwrap();
            assert!((scaled * c - base).abs() <= 1e-9 * base, "{scaled} * {c} vs {base}");
        }
    }
}

fn cone_vector() -> impl Strategy<Value = (Vec<f64>, Vec<usize>, usize)> {
    (2usize..=12).prop_flat_map(|n| {
        (
            prop::collection::vec(-10.0f64..10.0, n),
            prop::collection::vec(0..n, 1..=n),
            1usize..=n,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn lemma1_inequalities((u, j, d) in cone_vector()) {
        let n = u.len();
        let mut j = j;
        j.sort_unstable();
        j.dedup();
        let j = IndexSet::new(j, n).unwrap();
        // The tail bound needs blocks at least as large as J.
        let d = d.max(j.d());
        let v = project_into_cone(&u, &j);
        prop_assert!(in_cone(&v, &j));
        let b = block_decompose(&v, &j, d);
        prop_assert!(b.tail_l2_sum() <= b.head_l2() * (1.0 + 1e-10) + 1e-10);
        let full = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(full <= 2.0 * b.first_two_l2() * (1.0 + 1e-10) + 1e-10);
        prop_assert_eq!(b.reconstruct(), v);
    }

    #[test]
    fn blocks_partition_any_vector((u, j, d) in cone_vector()) {
        let n = u.len();
        let mut j = j;
        j.sort_unstable();
        j.dedup();
        let j = IndexSet::new(j, n).unwrap();
        let b = block_decompose(&u, &j, d);
        prop_assert_eq!(b.reconstruct(), u.clone());
        let mut seen = vec![false; n];
        for (k, s) in b.sets.iter().enumerate() {
            if k > 0 {
                prop_assert!(s.len() <= d && !s.is_empty());
            }
            for &i in s {
                prop_assert!(!seen[i]);
                seen[i] = true;
            }
        }
        for (i, &x) in u.iter().enumerate() {
            prop_assert!(x == 0.0 || seen[i]);
        }
    }

    #[test]
    fn orthogonal_dictionary_beta2(diag in prop::collection::vec(0.1f64..5.0, 3..=6), pick in 0usize..64) {
        let n = diag.len();
        let members: Vec<usize> = (0..n).filter(|k| pick >> k & 1 == 1).collect();
        prop_assume!(!members.is_empty());
        let g = GramMatrix::new(DMatrix::from_diagonal(&DVector::from_vec(diag.clone()))).unwrap();
        let j = IndexSet::new(members.clone(), n).unwrap();
        let expect = 1.0 / members.iter().map(|&k| diag[k].sqrt()).fold(f64::INFINITY, f64::min);
        let opts = AscentOptions { samples: 500, starts: 4, ..AscentOptions::default() };
        let est = beta2_estimate(&j, &g, &opts, 0).finite().unwrap();
        prop_assert!((est - expect).abs() <= 1e-6 * expect, "{} vs {}", est, expect);
    }
}
