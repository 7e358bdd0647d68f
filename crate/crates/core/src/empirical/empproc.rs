//! Lower estimates of the empirical-process suprema that control the
//! Dantzig selector's random-design analysis.
//!
//! Every estimator draws its design as `sample_design(model, n, seed)`, so
//! the same `(model, n, seed)` always sees the same sample.

use std::f64::consts::FRAC_2_PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::orlicz::standard_normal_psi1;
use crate::dictionaries::{sample_design, DesignSample, DictionaryKind, DictionaryModel};
use crate::error::{Error, Result};
use crate::geometry::{project_into_cone, IndexSet};
use crate::linalg;
use crate::rng::{self, tags};

/// Size of the Monte Carlo reference sample used as the population for
/// non-Gaussian dictionaries.
pub const MC_REFERENCE_ROWS: usize = 100_000;

const ASCENT_ITERS: usize = 100;
const INITIAL_STEP: f64 = 0.1;
const MIN_STEP: f64 = 1e-9;
const CONE_PROBES: usize = 200;

/// A lower estimate of a supremum together with the best single candidate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupEstimate {
    pub value: f64,
    /// Largest value over the fixed candidates (the vertices `±e_k` for the
    /// ℓ1 ball, `e_k` with `k ∈ J` for the cone).
    pub vertex_value: f64,
    pub argmax: Vec<f64>,
}

/// How `Π|f_u|` is computed.
enum Population {
    /// `√(2/π)·√(uᵀGu)`.
    Gaussian(DMatrix<f64>),
    /// Average over a large independent sample.
    Reference(DMatrix<f64>),
}

impl Population {
    fn new(model: &DictionaryModel, seed: u64) -> Result<Self> {
        if model.kind().is_gaussian() {
            Ok(Population::Gaussian(model.gram().entries().clone()))
        } else {
            let s = rng::derive_seed(seed, tags::MONTE_CARLO, 0);
            Ok(Population::Reference(sample_design(model, MC_REFERENCE_ROWS, s)?.h))
        }
    }

    fn l1(&self, u: &DVector<f64>) -> (f64, DVector<f64>) {
        match self {
            Population::Gaussian(g) => {
                let gu = g * u;
                let l2 = u.dot(&gu).max(0.0).sqrt();
                let c = FRAC_2_PI.sqrt();
                if l2 == 0.0 {
                    (0.0, DVector::zeros(u.len()))
                } else {
                    (c * l2, gu * (c / l2))
                }
            }
            Population::Reference(r) => abs_mean(r, u),
        }
    }
}

/// `n⁻¹Σ|f_u(X_i)|` and its (sub)gradient in `u`.
fn abs_mean(h: &DMatrix<f64>, u: &DVector<f64>) -> (f64, DVector<f64>) {
    let f = h * u;
    let n = h.nrows() as f64;
    let value = f.iter().map(|v| v.abs()).sum::<f64>() / n;
    let signs = f.map(|v| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 });
    (value, h.tr_mul(&signs) / n)
}

/// A signed, positively homogeneous objective whose absolute value is
/// maximized.
trait Deviation {
    fn eval(&self, u: &DVector<f64>) -> (f64, DVector<f64>);
}

/// `Π_n|f_u| − Π|f_u|`.
struct AbsDeviation<'a> {
    h: &'a DMatrix<f64>,
    pop: &'a Population,
}

impl Deviation for AbsDeviation<'_> {
    fn eval(&self, u: &DVector<f64>) -> (f64, DVector<f64>) {
        let (e, ge) = abs_mean(self.h, u);
        let (p, gp) = self.pop.l1(u);
        (e - p, ge - gp)
    }
}

/// `uᵀ(G_n − G)u = Π_n f_u² − Π f_u²`.
struct SquareDeviation {
    diff: DMatrix<f64>,
}

impl Deviation for SquareDeviation {
    fn eval(&self, u: &DVector<f64>) -> (f64, DVector<f64>) {
        let au = &self.diff * u;
        (u.dot(&au), au * 2.0)
    }
}

/// Step-size-adaptive ascent of `|obj|` on the set produced by `normalize`.
fn ascend(
    obj: &dyn Deviation,
    start: DVector<f64>,
    normalize: &dyn Fn(DVector<f64>) -> Option<DVector<f64>>,
) -> (f64, DVector<f64>) {
    let Some(mut u) = normalize(start) else {
        return (0.0, DVector::zeros(0));
    };
    let (mut val, mut grad) = obj.eval(&u);
    let mut step = INITIAL_STEP;
    for _ in 0..ASCENT_ITERS {
        if step < MIN_STEP {
            break;
        }
        let dir = &grad * val.signum();
        let norm = dir.norm();
        if norm == 0.0 {
            break;
        }
        let cand = normalize(&u + dir * (step / norm));
        match cand {
            Some(c) => {
                let (v, g) = obj.eval(&c);
                if v.abs() > val.abs() {
                    u = c;
                    val = v;
                    grad = g;
                    step = (step * 2.0).min(1.0);
                } else {
                    step *= 0.5;
                }
            }
            None => step *= 0.5,
        }
    }
    (val.abs(), u)
}

fn l1_normalize(v: DVector<f64>) -> Option<DVector<f64>> {
    let s = v.lp_norm(1);
    (s > 0.0 && s.is_finite()).then(|| v / s)
}

fn unit(n: usize, k: usize) -> DVector<f64> {
    let mut e = DVector::zeros(n);
    e[k] = 1.0;
    e
}

fn gaussian_direction<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Vertices, then ascent from the best vertices and from random points of
/// the ℓ1 sphere.
fn sup_over_l1_ball(
    obj: &dyn Deviation,
    n_funcs: usize,
    extra: Vec<DVector<f64>>,
    restarts: usize,
    seed: u64,
) -> SupEstimate {
    let mut scored: Vec<(f64, DVector<f64>)> = (0..n_funcs)
        .map(|k| {
            let e = unit(n_funcs, k);
            (obj.eval(&e).0.abs(), e)
        })
        .collect();
    let vertex_value = scored.iter().map(|s| s.0).fold(0.0, f64::max);
    scored.extend(extra.into_iter().filter_map(l1_normalize).map(|u| (obj.eval(&u).0.abs(), u)));
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut rng = rng::rng_from_seed(rng::derive_seed(seed, tags::ASCENT, 0));
    let mut starts: Vec<DVector<f64>> = scored.iter().take(restarts.div_ceil(2)).map(|s| s.1.clone()).collect();
    // A vertex is a kink of the ℓ1 sphere; nudge it so the ascent can move.
    for s in starts.iter_mut() {
        *s += gaussian_direction(&mut rng, n_funcs) * (0.01 / n_funcs as f64);
    }
    starts.extend((0..restarts / 2).map(|_| gaussian_direction(&mut rng, n_funcs)));

    let (mut best, mut arg) = scored.swap_remove(0);
    for s in starts {
        let (v, u) = ascend(obj, s, &l1_normalize);
        if v > best {
            best = v;
            arg = u;
        }
    }
    SupEstimate {
        value: best,
        vertex_value,
        argmax: arg.iter().copied().collect(),
    }
}

fn check_sizes(model: &DictionaryModel, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    if model.n_funcs() == 0 {
        return Err(Error::invalid("empty dictionary"));
    }
    Ok(())
}

/// Lower estimate of `sup_{‖u‖₁≤1} |(Π_n − Π)(|f_u|)|`.
pub fn empproc_sup_l1ball(model: &DictionaryModel, n: usize, restarts: usize, seed: u64) -> Result<SupEstimate> {
    check_sizes(model, n)?;
    let design = sample_design(model, n, seed)?;
    let pop = Population::new(model, seed)?;
    let obj = AbsDeviation { h: &design.h, pop: &pop };
    Ok(sup_over_l1_ball(&obj, model.n_funcs(), Vec::new(), restarts, seed))
}

/// Lower estimate of `sup_{‖u‖₁≤1} |(Π_n − Π)(f_u²)|`, with the population
/// second moments taken from the Gram matrix.
pub fn empproc_sup_l1ball_sq(
    model: &DictionaryModel,
    n: usize,
    restarts: usize,
    seed: u64,
) -> Result<SupEstimate> {
    check_sizes(model, n)?;
    let design = sample_design(model, n, seed)?;
    let diff = design.empirical_gram() - model.gram().entries();
    let p = model.n_funcs();
    // Midpoints (e_i ± e_k)/2 of the edges of the cross-polytope.
    let mut extra = Vec::new();
    for i in 0..p {
        for k in i + 1..p {
            for s in [1.0, -1.0] {
                let mut u = DVector::zeros(p);
                u[i] = 0.5;
                u[k] = 0.5 * s;
                extra.push(u);
            }
        }
    }
    let obj = SquareDeviation { diff };
    Ok(sup_over_l1_ball(&obj, p, extra, restarts, seed))
}

/// Lower estimate of `sup_{u ∈ K_J} |(Π_n − Π)(|f_u|)|` where
/// `K_J = C_J ∩ {‖u‖₂ ≤ 1}`. Candidates are `e_k` for `k ∈ J`, random
/// `d`-sparse unit vectors pushed into the cone, and ascent from the best
/// of them.
pub fn empproc_sup_cone(
    model: &DictionaryModel,
    n: usize,
    j: &IndexSet,
    d: usize,
    restarts: usize,
    seed: u64,
) -> Result<SupEstimate> {
    check_sizes(model, n)?;
    let p = model.n_funcs();
    if j.members().iter().any(|&k| k >= p) {
        return Err(Error::invalid("J has indices outside the dictionary"));
    }
    if j.d() > d || d > p {
        return Err(Error::invalid(format!(
            "need d(J) <= d <= N (d(J) = {}, d = {d}, N = {p})",
            j.d()
        )));
    }
    if j.is_empty() {
        return Ok(SupEstimate {
            value: 0.0,
            vertex_value: 0.0,
            argmax: vec![0.0; p],
        });
    }
    let design = sample_design(model, n, seed)?;
    let pop = Population::new(model, seed)?;
    let obj = AbsDeviation { h: &design.h, pop: &pop };
    let normalize = |v: DVector<f64>| {
        let w = DVector::from_vec(project_into_cone(v.as_slice(), j));
        let s = w.norm();
        (s > 0.0 && s.is_finite()).then(|| w / s)
    };

    let mut scored: Vec<(f64, DVector<f64>)> = j
        .members()
        .iter()
        .map(|&k| {
            let e = unit(p, k);
            (obj.eval(&e).0.abs(), e)
        })
        .collect();
    let vertex_value = scored.iter().map(|s| s.0).fold(0.0, f64::max);

    let mut prng = rng::rng_from_seed(rng::derive_seed(seed, tags::PROBES, 0));
    let mut idx: Vec<usize> = (0..p).collect();
    for _ in 0..CONE_PROBES {
        for i in 0..d {
            let k = prng.random_range(i..p);
            idx.swap(i, k);
        }
        let mut v = DVector::zeros(p);
        for &k in &idx[..d] {
            v[k] = prng.sample(StandardNormal);
        }
        if let Some(u) = normalize(v) {
            scored.push((obj.eval(&u).0.abs(), u));
        }
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut arng = rng::rng_from_seed(rng::derive_seed(seed, tags::ASCENT, 0));
    let mut starts: Vec<DVector<f64>> = scored.iter().take(restarts.div_ceil(2)).map(|s| s.1.clone()).collect();
    starts.extend((0..restarts / 2).map(|_| gaussian_direction(&mut arng, p)));

    let (mut best, mut arg) = scored.swap_remove(0);
    for s in starts {
        let (v, u) = ascend(&obj, s, &normalize);
        if v > best {
            best = v;
            arg = u;
        }
    }
    Ok(SupEstimate {
        value: best,
        vertex_value,
        argmax: arg.iter().copied().collect(),
    })
}

/// `|(Π_n − Π)(|f_u|)|` at one `u`, using the same population convention
/// (and, for non-Gaussian models, the same reference sample) as the
/// suprema estimated with `seed`.
pub fn deviation_at(model: &DictionaryModel, design: &DesignSample, u: &[f64], seed: u64) -> Result<f64> {
    if u.len() != model.n_funcs() || design.n_funcs() != model.n_funcs() {
        return Err(Error::invalid("deviation: dimension mismatch"));
    }
    let pop = Population::new(model, seed)?;
    let obj = AbsDeviation { h: &design.h, pop: &pop };
    Ok(obj.eval(&DVector::from_column_slice(u)).0.abs())
}

/// Rate `√(A log N / n) ∨ A log N / n`.
pub fn bernstein_rate(n_funcs: usize, n: usize, a: f64) -> f64 {
    let t = a * (n_funcs as f64).ln() / n as f64;
    t.sqrt().max(t)
}

/// `max_k |n⁻¹Σ_j η_j⁽ᵏ⁾| / (‖η⁽ᵏ⁾‖_{ψ1} · rate)` for one sample; coordinates
/// with zero mean and zero norm contribute 0.
pub fn bernstein_ratio(h: &DMatrix<f64>, psi1_norms: &[f64], a: f64) -> Result<f64> {
    if psi1_norms.len() != h.ncols() {
        return Err(Error::DimensionMismatch {
            what: "psi1 norms",
            expected: h.ncols(),
            got: psi1_norms.len(),
        });
    }
    let n = h.nrows();
    if n == 0 {
        return Err(Error::invalid("empty sample"));
    }
    let rate = bernstein_rate(h.ncols(), n, a);
    let mut worst: f64 = 0.0;
    for (k, col) in h.column_iter().enumerate() {
        let mean = col.sum() / n as f64;
        if mean == 0.0 {
            continue;
        }
        let scale = psi1_norms[k] * rate;
        worst = worst.max(if scale > 0.0 { mean.abs() / scale } else { f64::INFINITY });
    }
    Ok(worst)
}

/// `‖h_k(X)‖_{ψ1}` for every dictionary element.
pub fn psi1_norms(model: &DictionaryModel) -> Vec<f64> {
    match model.kind() {
        DictionaryKind::Rademacher => vec![1.0 / std::f64::consts::LN_2; model.n_funcs()],
        _ => {
            let c = standard_normal_psi1();
            model.column_norms().into_iter().map(|s| s * c).collect()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BernsteinCheck {
    #[serde(rename = "C")]
    pub c: f64,
    /// Fraction of repetitions where the maximal average is within the bound.
    pub holds_rate: f64,
    /// Smallest constant that makes the bound hold on every repetition.
    pub min_constant: f64,
    pub ratios: Vec<f64>,
}

/// Checks `max_k|n⁻¹Σ_j h_k(X_j)| ≤ C‖h_k‖_{ψ1}(√(A log N/n) ∨ A log N/n)` on
/// `reps` independent samples; repetition `r` uses the design seed
/// `derive_seed(seed, TRIAL, r)`.
pub fn bernstein_max_check(
    model: &DictionaryModel,
    n: usize,
    a: f64,
    reps: usize,
    c: f64,
    seed: u64,
) -> Result<BernsteinCheck> {
    check_sizes(model, n)?;
    if reps == 0 {
        return Err(Error::invalid("reps must be at least 1"));
    }
    if !(a >= 1.0) || !(c >= 0.0) {
        return Err(Error::invalid("need A >= 1 and C >= 0"));
    }
    let norms = psi1_norms(model);
    let ratios = (0..reps)
        .map(|r| {
            let design = sample_design(model, n, rng::derive_seed(seed, tags::TRIAL, r as u64))?;
            bernstein_ratio(&design.h, &norms, a)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(BernsteinCheck {
        c,
        holds_rate: ratios.iter().filter(|&&r| r <= c).count() as f64 / reps as f64,
        min_constant: ratios.iter().copied().fold(0.0, f64::max),
        ratios,
    })
}

/// `|uᵀ(G_n − G)u|` at one `u`.
pub fn square_deviation_at(model: &DictionaryModel, design: &DesignSample, u: &[f64]) -> Result<f64> {
    if u.len() != model.n_funcs() || design.n_funcs() != model.n_funcs() {
        return Err(Error::invalid("deviation: dimension mismatch"));
    }
    let diff = design.empirical_gram() - model.gram().entries();
    Ok(linalg::quad_form(&diff, u).abs())
}
