use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::cone::project_into_cone;
use super::rip::{kappa, md_Md, rho_complement, rho_d};
use super::IndexSet;
use crate::dictionaries::{sample_design, DictionaryModel, GramMatrix};
use crate::error::{Error, Result};
use crate::linalg::{self, EIGEN_FLOOR};
use crate::rng::{self, tags};

/// `‖f_λ‖` below this (for unit `λ`) counts as an exact cancellation.
const DEGENERATE_NORM: f64 = 1e-10;

/// Below this, `1 − ρ²` is treated as zero.
const CORRELATION_FLOOR: f64 = 1e-10;

/// Value of a geometric constant or bound. Serializes as a number or as the
/// strings `"unbounded"` / `"inapplicable"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    Finite(f64),
    Unbounded,
    /// The preconditions of the bound fail.
    Inapplicable,
}

impl Bound {
    pub fn finite(self) -> Option<f64> {
        match self {
            Bound::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        self == Bound::Unbounded
    }

    /// Smaller of two upper bounds; inapplicable bounds are ignored.
    pub fn min_upper(self, other: Bound) -> Bound {
        match (self, other) {
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(a.min(b)),
            (Bound::Finite(a), _) | (_, Bound::Finite(a)) => Bound::Finite(a),
            (Bound::Unbounded, _) | (_, Bound::Unbounded) => Bound::Unbounded,
            _ => Bound::Inapplicable,
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bound::Finite(v) => s.serialize_f64(*v),
            Bound::Unbounded => s.serialize_str("unbounded"),
            Bound::Inapplicable => s.serialize_str("inapplicable"),
        }
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Bound::Finite(v)),
            Raw::Text(t) if t == "unbounded" => Ok(Bound::Unbounded),
            Raw::Text(t) if t == "inapplicable" => Ok(Bound::Inapplicable),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("unknown bound sentinel `{t}`"))),
        }
    }
}

/// `1/√(κ(J)(1 − ρ²(J)))`; unbounded when `κ = 0` or `ρ = 1`.
pub fn beta2_bound_kappa_rho(j: &IndexSet, gram: &GramMatrix) -> Bound {
    if j.is_empty() {
        return Bound::Finite(0.0);
    }
    let k = kappa(j, gram);
    let r = rho_complement(j, gram);
    let denom = k * (1.0 - r * r);
    if k == 0.0 || 1.0 - r * r <= CORRELATION_FLOOR {
        Bound::Unbounded
    } else {
        Bound::Finite(1.0 / denom.sqrt())
    }
}

/// `1/(m_{2d} − ρ_d M_{2d})` when `ρ_d < m_{2d}/M_{2d}`, with `d = |J|`.
/// Inapplicable when the condition fails or `3d > N`.
pub fn beta2_bound_lemma2(j: &IndexSet, gram: &GramMatrix) -> Result<Bound> {
    beta2_bound_lemma2_level(j.d(), gram)
}

/// The same bound at sparsity level `d`. It depends on `J` only through
/// `d(J)` and holds for every `J` with `d(J) ≤ d`.
pub fn beta2_bound_lemma2_level(d: usize, gram: &GramMatrix) -> Result<Bound> {
    if d == 0 {
        return Ok(Bound::Finite(0.0));
    }
    if 3 * d > gram.n_funcs() {
        return Ok(Bound::Inapplicable);
    }
    let (m, big_m) = md_Md(2 * d, gram)?;
    if m == 0.0 {
        return Ok(Bound::Inapplicable);
    }
    let r = rho_d(d, gram)?;
    if r * big_m < m {
        Ok(Bound::Finite(1.0 / (m - r * big_m)))
    } else {
        Ok(Bound::Inapplicable)
    }
}

/// `1/√λ_min(G)`, a bound on `β₂(J)` for every `J`; unbounded when `G` is
/// singular.
pub fn beta2_bound_global(gram: &GramMatrix) -> Bound {
    let (lo, _) = linalg::sym_extreme_eigenvalues(gram.entries());
    if lo <= EIGEN_FLOOR {
        Bound::Unbounded
    } else {
        Bound::Finite(1.0 / lo.sqrt())
    }
}

/// `√s/(√s·m_{d+s} − √d·M_s)` when `M_s/m_{d+s} < √(s/d)`, with `d = |J|`.
pub fn beta2_bound_prop3(j: &IndexSet, s: usize, gram: &GramMatrix) -> Result<Bound> {
    let d = j.d();
    if d == 0 {
        return Ok(Bound::Finite(0.0));
    }
    if s == 0 || d + s > gram.n_funcs() {
        return Err(Error::invalid(format!(
            "need s >= 1 and d + s <= N (d = {d}, s = {s}, N = {})",
            gram.n_funcs()
        )));
    }
    let (m, _) = md_Md(d + s, gram)?;
    let (_, big_m) = md_Md(s, gram)?;
    let (sf, df) = (s as f64, d as f64);
    if m > 0.0 && big_m * df.sqrt() < sf.sqrt() * m {
        Ok(Bound::Finite(sf.sqrt() / (sf.sqrt() * m - df.sqrt() * big_m)))
    } else {
        Ok(Bound::Inapplicable)
    }
}

/// Smallest [`beta2_bound_prop3`] over `s ∈ 1..=N−d`, with the minimizing
/// `s`. Values of `s` whose enumeration exceeds the budget are skipped.
pub fn beta2_bound_prop3_best(j: &IndexSet, gram: &GramMatrix) -> Result<(Bound, Option<usize>)> {
    if j.is_empty() {
        return Ok((Bound::Finite(0.0), None));
    }
    let mut best = (Bound::Inapplicable, None);
    for s in 1..=gram.n_funcs() - j.d() {
        let b = match beta2_bound_prop3(j, s, gram) {
            Err(Error::Budget { .. }) => continue,
            other => other?,
        };
        if let Bound::Finite(v) = b {
            if best.0.finite().is_none_or(|cur| v < cur) {
                best = (b, Some(s));
            }
        }
    }
    Ok(best)
}

/// `B·β₂·√d(J)`.
pub fn beta_bound_23(j: &IndexSet, b: f64, beta2: f64) -> f64 {
    if j.is_empty() {
        return 0.0;
    }
    b * beta2 * (j.d() as f64).sqrt()
}

/// `B² d(J) / (κ(J)(1 − ρ²(J)))`; unbounded when `κ = 0` or `ρ = 1`.
pub fn d_tilde(j: &IndexSet, b: f64, gram: &GramMatrix) -> Bound {
    match beta2_bound_kappa_rho(j, gram) {
        Bound::Finite(v) => Bound::Finite(b * b * j.d() as f64 * v * v),
        other => other,
    }
}

/// Search effort for the cone maximizations behind [`beta2_estimate`] and
/// [`beta_estimate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AscentOptions {
    /// Ascent runs, started from the best random samples.
    pub starts: usize,
    /// Step attempts per run.
    pub iters: usize,
    /// Initial step along the normalized gradient.
    pub step: f64,
    /// Random cone samples scored before the ascent.
    pub samples: usize,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions {
            starts: 64,
            iters: 500,
            step: 1e-2,
            samples: 100_000,
        }
    }
}

impl AscentOptions {
    /// Reduced effort for use inside Monte Carlo loops.
    pub fn quick() -> Self {
        AscentOptions {
            starts: 8,
            iters: 200,
            step: 1e-2,
            samples: 2_000,
        }
    }
}

enum Eval {
    Value(f64, Vec<f64>),
    /// `‖f_λ‖` vanishes while `λ` has mass on `J`.
    Degenerate,
}

/// Objective over unit vectors of the cone, ratio of a norm on `J` to a
/// function norm. Values and gradients only need to be correct up to the
/// positive scaling used by the ascent.
trait ConeObjective {
    fn eval(&self, lambda: &[f64]) -> Eval;

    /// Candidate local maximizers near `lambda`, not necessarily in the cone.
    fn polish(&self, _lambda: &[f64]) -> Vec<Vec<f64>> {
        Vec::new()
    }
}

/// `Σ_J λ_j² / λᵀGλ`.
struct L2Ratio<'a> {
    gram: &'a DMatrix<f64>,
    mask: Vec<bool>,
}

impl ConeObjective for L2Ratio<'_> {
    fn eval(&self, lambda: &[f64]) -> Eval {
        let gl = linalg::mat_vec(self.gram, lambda);
        let q = linalg::dot(lambda, &gl);
        let on: f64 = (0..lambda.len()).filter(|&k| self.mask[k]).map(|k| lambda[k] * lambda[k]).sum();
        let scale = linalg::dot(lambda, lambda);
        if q <= (DEGENERATE_NORM * DEGENERATE_NORM) * scale {
            return if on > 0.0 { Eval::Degenerate } else { Eval::Value(0.0, vec![0.0; lambda.len()]) };
        }
        let r = on / q;
        let grad = (0..lambda.len())
            .map(|k| {
                let own = if self.mask[k] { lambda[k] } else { 0.0 };
                2.0 * (own - r * gl[k]) / q
            })
            .collect();
        Eval::Value(r, grad)
    }

    /// Exact maximizers of the ratio on the face of the cone containing
    /// `lambda`: over its support, and over its support with the cone
    /// boundary held active.
    fn polish(&self, lambda: &[f64]) -> Vec<Vec<f64>> {
        let n = lambda.len();
        let scale = linalg::norm_inf(lambda);
        let support: Vec<usize> = (0..n).filter(|&k| lambda[k].abs() > 1e-9 * scale).collect();
        if support.is_empty() {
            return Vec::new();
        }
        let k = support.len();
        let mut bases = vec![DMatrix::identity(k, k)];
        // Boundary normal: Σ_off σ_k x_k − Σ_J σ_k x_k = 0.
        let c = DVector::from_iterator(
            k,
            support.iter().map(|&i| if self.mask[i] { -lambda[i].signum() } else { lambda[i].signum() }),
        );
        if k > 1 && support.iter().any(|&i| !self.mask[i]) {
            let proj = DMatrix::identity(k, k) - &c * c.transpose() / c.norm_squared();
            let eig = SymmetricEigen::new(proj);
            let cols: Vec<_> = (0..k)
                .filter(|&i| eig.eigenvalues[i] > 0.5)
                .map(|i| eig.eigenvectors.column(i).into_owned())
                .collect();
            bases.push(DMatrix::from_columns(&cols));
        }
        let g_s = linalg::principal_submatrix(self.gram, &support);
        let p_s = DMatrix::from_diagonal(&DVector::from_iterator(
            k,
            support.iter().map(|&i| if self.mask[i] { 1.0 } else { 0.0 }),
        ));
        let mut out = Vec::new();
        for b in bases {
            let gb = b.transpose() * &g_s * &b;
            let pb = b.transpose() * &p_s * &b;
            let w = linalg::psd_inv_sqrt(&gb, 1e-12);
            let eig = SymmetricEigen::new(&w * pb * &w);
            let top = eig.eigenvalues.imax();
            let x = &b * (&w * eig.eigenvectors.column(top));
            let mut full = vec![0.0; n];
            for (pos, &i) in support.iter().enumerate() {
                full[i] = x[pos];
            }
            if linalg::dot(&full, lambda) < 0.0 {
                full.iter_mut().for_each(|v| *v = -*v);
            }
            out.push(full);
        }
        out
    }
}

/// `Σ_J |λ_j| / √(λᵀGλ)`: the L1 ratio for Gaussian features up to the
/// constant `√(2/π)`.
struct GaussianL1Ratio<'a> {
    gram: &'a DMatrix<f64>,
    mask: Vec<bool>,
}

impl ConeObjective for GaussianL1Ratio<'_> {
    fn eval(&self, lambda: &[f64]) -> Eval {
        let gl = linalg::mat_vec(self.gram, lambda);
        let q = linalg::dot(lambda, &gl);
        let on: f64 = (0..lambda.len()).filter(|&k| self.mask[k]).map(|k| lambda[k].abs()).sum();
        let scale = linalg::dot(lambda, lambda);
        if q <= (DEGENERATE_NORM * DEGENERATE_NORM) * scale {
            return if on > 0.0 { Eval::Degenerate } else { Eval::Value(0.0, vec![0.0; lambda.len()]) };
        }
        let root = q.sqrt();
        let r = on / root;
        let grad = (0..lambda.len())
            .map(|k| {
                let own = if self.mask[k] { lambda[k].signum() } else { 0.0 };
                own / root - r * gl[k] / q
            })
            .collect();
        Eval::Value(r, grad)
    }
}

/// `Σ_J |λ_j| / mean_i |(Hλ)_i|` over a fixed Monte Carlo sample `H`.
struct SampledL1Ratio {
    h: DMatrix<f64>,
    mask: Vec<bool>,
}

impl ConeObjective for SampledL1Ratio {
    fn eval(&self, lambda: &[f64]) -> Eval {
        let n = self.h.nrows() as f64;
        let f = linalg::mat_vec(&self.h, lambda);
        let l1 = linalg::norm1(&f) / n;
        let on: f64 = (0..lambda.len()).filter(|&k| self.mask[k]).map(|k| lambda[k].abs()).sum();
        if l1 <= DEGENERATE_NORM * linalg::norm2(lambda) {
            return if on > 0.0 { Eval::Degenerate } else { Eval::Value(0.0, vec![0.0; lambda.len()]) };
        }
        let r = on / l1;
        let signs: Vec<f64> = f.iter().map(|v| v.signum()).collect();
        let dl1 = linalg::mat_vec(&self.h.transpose(), &signs);
        let grad = (0..lambda.len())
            .map(|k| {
                let own = if self.mask[k] { lambda[k].signum() } else { 0.0 };
                own / l1 - r * dl1[k] / n / l1
            })
            .collect();
        Eval::Value(r, grad)
    }
}

fn normalize(v: &mut [f64]) -> bool {
    let s = linalg::norm2(v);
    if s == 0.0 || !s.is_finite() {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= s);
    true
}

/// Exact-cancellation candidates: pairs `e_i ∓ e_k` (`i ∈ J`) of identical or
/// opposite functions, and null directions of the Gram matrix.
fn cancellation_probes(j: &IndexSet, gram: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let n = gram.nrows();
    let mut probes = Vec::new();
    for &i in j.members() {
        for k in 0..n {
            if k == i {
                continue;
            }
            let (gii, gkk, gik) = (gram[(i, i)], gram[(k, k)], gram[(i, k)]);
            let tol = 1e-12 * gii.max(gkk);
            if (gii - gkk).abs() <= tol && (gik.abs() - gii).abs() <= tol {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                v[k] = -gik.signum();
                probes.push(v);
            }
        }
    }
    let eig = SymmetricEigen::new(gram.clone());
    let top = eig.eigenvalues.max().max(0.0);
    for (c, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev <= EIGEN_FLOOR * top.max(1.0) {
            let v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
            probes.push(project_into_cone(&v, j));
            probes.push(v);
        }
    }
    probes
}

/// Scaled random point of the cone.
fn cone_sample<R: Rng>(rng: &mut R, mask: &[bool]) -> Vec<f64> {
    let mut v: Vec<f64> = (0..mask.len()).map(|_| rng.sample(StandardNormal)).collect();
    let on: f64 = (0..v.len()).filter(|&k| mask[k]).map(|k| v[k].abs()).sum();
    let off: f64 = (0..v.len()).filter(|&k| !mask[k]).map(|k| v[k].abs()).sum();
    // Off-J mass as a random fraction of the J mass, biased toward the
    // boundary where maximizers tend to sit.
    let frac: f64 = rng.random::<f64>().powf(0.25);
    let s = if off > 0.0 { frac * on / off } else { 0.0 };
    for (k, x) in v.iter_mut().enumerate() {
        if !mask[k] {
            *x *= s;
        }
    }
    v
}

/// Result of a cone search: the best ratio found, or an exact cancellation.
fn cone_search(
    obj: &dyn ConeObjective,
    j: &IndexSet,
    n: usize,
    probes: &[Vec<f64>],
    opts: &AscentOptions,
    seed: u64,
) -> Bound {
    let mask = j.mask(n);
    for p in probes {
        if super::in_cone(p, j) && p.iter().enumerate().any(|(k, v)| mask[k] && *v != 0.0) {
            if let Eval::Degenerate = obj.eval(p) {
                return Bound::Unbounded;
            }
        }
    }

    let mut best = 0.0f64;
    // Deterministic starts: sign patterns supported on J.
    let mut candidates: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut flat = vec![0.0; n];
    for &k in j.members() {
        flat[k] = 1.0;
    }
    let mut rng = rng::rng_from_seed(rng::derive_seed(seed, tags::ASCENT, 0));
    let mut starts = vec![flat];
    for _ in 0..3 {
        let mut v = vec![0.0; n];
        for &k in j.members() {
            v[k] = rng.sample(StandardNormal);
        }
        starts.push(v);
    }
    for mut v in starts {
        if !normalize(&mut v) {
            continue;
        }
        match obj.eval(&v) {
            Eval::Degenerate => return Bound::Unbounded,
            Eval::Value(r, _) => {
                best = best.max(r);
                candidates.push((r, v));
            }
        }
    }

    // Random samples; keep the strongest as ascent starts.
    let keep = opts.starts.max(1);
    let mut pool: Vec<(f64, Vec<f64>)> = Vec::with_capacity(keep + 1);
    for _ in 0..opts.samples {
        let mut v = cone_sample(&mut rng, &mask);
        if !normalize(&mut v) {
            continue;
        }
        match obj.eval(&v) {
            Eval::Degenerate => return Bound::Unbounded,
            Eval::Value(r, _) => {
                best = best.max(r);
                if pool.len() < keep || r > pool[pool.len() - 1].0 {
                    let at = pool.partition_point(|(x, _)| *x >= r);
                    pool.insert(at, (r, v));
                    pool.truncate(keep);
                }
            }
        }
    }
    candidates.extend(pool);

    for (_, start) in candidates {
        match ascend(obj, j, start, opts) {
            None => return Bound::Unbounded,
            Some(r) => best = best.max(r),
        }
    }
    Bound::Finite(best)
}

/// Projected ascent from a unit cone vector; `None` on exact cancellation.
fn ascend(obj: &dyn ConeObjective, j: &IndexSet, mut lambda: Vec<f64>, opts: &AscentOptions) -> Option<f64> {
    let (mut value, mut grad) = match obj.eval(&lambda) {
        Eval::Degenerate => return None,
        Eval::Value(r, g) => (r, g),
    };
    let mut step = opts.step;
    for _ in 0..opts.iters {
        let gnorm = linalg::norm2(&grad);
        if gnorm < 1e-14 || step < 1e-12 {
            break;
        }
        let moved: Vec<f64> = lambda.iter().zip(&grad).map(|(x, g)| x + step * g / gnorm).collect();
        let mut cand = project_into_cone(&moved, j);
        if !normalize(&mut cand) {
            step *= 0.5;
            continue;
        }
        match obj.eval(&cand) {
            Eval::Degenerate => return None,
            Eval::Value(r, g) if r > value => {
                lambda = cand;
                value = r;
                grad = g;
                step = (step * 2.0).min(1.0);
            }
            Eval::Value(..) => step *= 0.5,
        }
    }
    for cand in obj.polish(&lambda) {
        let mut cand = project_into_cone(&cand, j);
        if !normalize(&mut cand) {
            continue;
        }
        match obj.eval(&cand) {
            Eval::Degenerate => return None,
            Eval::Value(r, _) => value = value.max(r),
        }
    }
    Some(value)
}

/// Lower estimate of `β₂(J)` from random cone samples refined by projected
/// gradient ascent. Unbounded when a cone direction with vanishing `‖f_λ‖`
/// and mass on `J` is found.
pub fn beta2_estimate(j: &IndexSet, gram: &GramMatrix, opts: &AscentOptions, seed: u64) -> Bound {
    if j.is_empty() {
        return Bound::Finite(0.0);
    }
    let n = gram.n_funcs();
    let g = gram.entries();
    let obj = L2Ratio {
        gram: g,
        mask: j.mask(n),
    };
    match cone_search(&obj, j, n, &cancellation_probes(j, g), opts, seed) {
        Bound::Finite(r) => Bound::Finite(r.sqrt()),
        other => other,
    }
}

/// Monte Carlo rows used for L1 norms of non-Gaussian features.
const BETA_MC_ROWS: usize = 20_000;

/// Lower estimate of `β(J)`. Gaussian kinds use `L1 = √(2/π)·L2`; other
/// kinds use a fixed Monte Carlo sample for the L1 norm.
pub fn beta_estimate(
    j: &IndexSet,
    model: &DictionaryModel,
    opts: &AscentOptions,
    seed: u64,
) -> Result<Bound> {
    if j.is_empty() {
        return Ok(Bound::Finite(0.0));
    }
    let n = model.n_funcs();
    let g = model.gram().entries();
    let probes = cancellation_probes(j, g);
    if model.kind().is_gaussian() {
        let obj = GaussianL1Ratio {
            gram: g,
            mask: j.mask(n),
        };
        return Ok(match cone_search(&obj, j, n, &probes, opts, seed) {
            Bound::Finite(r) => Bound::Finite(FRAC_PI_2.sqrt() * r),
            other => other,
        });
    }
    let sample = sample_design(model, BETA_MC_ROWS, rng::derive_seed(seed, tags::MONTE_CARLO, 1))?;
    let obj = SampledL1Ratio {
        h: sample.h,
        mask: j.mask(n),
    };
    Ok(cone_search(&obj, j, n, &probes, opts, seed))
}

/// Constant `B` with `‖f_λ‖_{L2} ≤ B‖f_λ‖_{L1}` on the cone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BConstant {
    pub value: f64,
    /// `true` when estimated from samples rather than known in closed form.
    pub estimate: bool,
}

/// `√(π/2)` for Gaussian kinds; otherwise the largest `L2/L1` ratio over
/// random cone samples with L1 from a Monte Carlo sample.
pub fn b_constant(model: &DictionaryModel, j: &IndexSet, samples: usize, seed: u64) -> Result<BConstant> {
    if model.kind().is_gaussian() {
        return Ok(BConstant {
            value: FRAC_PI_2.sqrt(),
            estimate: false,
        });
    }
    let n = model.n_funcs();
    let h = sample_design(model, BETA_MC_ROWS, rng::derive_seed(seed, tags::MONTE_CARLO, 2))?.h;
    let mask = if j.is_empty() { vec![true; n] } else { j.mask(n) };
    let mut rng = rng::rng_from_seed(rng::derive_seed(seed, tags::PROBES, 0));
    let mut best: f64 = 1.0;
    for _ in 0..samples {
        let v = cone_sample(&mut rng, &mask);
        let l2 = linalg::quad_form(model.gram().entries(), &v).max(0.0).sqrt();
        let l1 = linalg::norm1(&linalg::mat_vec(&h, &v)) / h.nrows() as f64;
        if l1 > 0.0 {
            best = best.max(l2 / l1);
        }
    }
    Ok(BConstant {
        value: best,
        estimate: true,
    })
}
