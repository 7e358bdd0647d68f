//! Synthetic dictionaries with known population geometry.
//!
//! A dictionary is a feature vector `(h_1(X), …, h_N(X))` whose joint law is
//! one of four kinds. Each kind carries its exact population Gram matrix
//! `⟨h_i, h_j⟩_{L2(Π)}`, so every population norm used downstream is a closed
//! form in the Gram matrix (plus Monte Carlo for the L1 norm of Rademacher
//! combinations).
//!
//! Index conventions: the Rust API is 0-based. The JSON form of grouped
//! partitions uses 1-based indices, matching the command-line tools.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_2_PI;

use crate::error::{Error, Result};
use crate::linalg::{self, EIGEN_FLOOR};
use crate::rng::{self, tags};

/// Eigenvalue tolerance when validating a user covariance.
const COVARIANCE_PSD_TOL: f64 = 1e-8;

/// Default Monte Carlo sample count for L1 norms of non-Gaussian laws.
pub const DEFAULT_MC_SAMPLES: usize = 100_000;

/// Smallest Monte Carlo sample count accepted by [`population_l1_norm`].
pub const MIN_MC_SAMPLES: usize = 1_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictionaryKind {
    Gaussian,
    Rademacher,
    OrthogonalScaled,
    Grouped,
}

impl DictionaryKind {
    /// Kinds whose linear combinations are centered Gaussian variables.
    pub fn is_gaussian(self) -> bool {
        !matches!(self, DictionaryKind::Rademacher)
    }
}

/// Population Gram matrix of a dictionary.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
}

impl GramMatrix {
    /// Validates symmetry and numerical positive semi-definiteness.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::invalid("Gram matrix must be square"));
        }
        if entries.nrows() == 0 {
            return Err(Error::invalid("Gram matrix must be non-empty"));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("Gram matrix has non-finite entries"));
        }
        if !linalg::is_symmetric(&entries, 1e-12) {
            return Err(Error::invalid("Gram matrix is not symmetric"));
        }
        let (lo, _) = linalg::sym_extreme_eigenvalues(&entries);
        if lo < -EIGEN_FLOOR {
            return Err(Error::invalid(format!(
                "Gram matrix is not positive semi-definite (min eigenvalue {lo:e})"
            )));
        }
        Ok(GramMatrix { entries })
    }

    pub fn identity(n: usize) -> Self {
        GramMatrix {
            entries: DMatrix::identity(n, n),
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("Gram rows must form a square matrix"));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        GramMatrix::new(DMatrix::from_row_slice(n, n, &flat))
    }

    pub fn n_funcs(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_funcs()).map(|k| self.entries[(k, k)]).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.n_funcs();
        (0..n).all(|i| (0..n).all(|j| i == j || self.entries[(i, j)] == 0.0))
    }

    /// `c · G`.
    pub fn scaled(&self, c: f64) -> Self {
        GramMatrix {
            entries: &self.entries * c,
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Law {
    /// `L z` with `L Lᵀ = Σ`; `None` means the covariance is diagonal.
    Gaussian {
        covariance: DMatrix<f64>,
        factor: Option<DMatrix<f64>>,
    },
    Rademacher,
    OrthogonalScaled {
        taus: Vec<f64>,
    },
    Grouped {
        blocks: Vec<Vec<usize>>,
        block_of: Vec<usize>,
    },
}

/// Generative model of the feature vector `(h_1(X), …, h_N(X))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelSpec", into = "ModelSpec")]
pub struct DictionaryModel {
    kind: DictionaryKind,
    law: Law,
    gram: GramMatrix,
}

impl DictionaryModel {
    pub fn kind(&self) -> DictionaryKind {
        self.kind
    }

    pub fn n_funcs(&self) -> usize {
        self.gram.n_funcs()
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    /// Disjoint blocks of a grouped model.
    pub fn blocks(&self) -> Option<&[Vec<usize>]> {
        match &self.law {
            Law::Grouped { blocks, .. } => Some(blocks),
            _ => None,
        }
    }

    /// Population standard deviations `‖h_k‖_{L2(Π)}`.
    pub fn column_norms(&self) -> Vec<f64> {
        self.gram.diagonal().into_iter().map(|v| v.max(0.0).sqrt()).collect()
    }

    fn fill_row<R: Rng>(&self, rng: &mut R, scratch: &mut Vec<f64>, out: &mut [f64]) {
        let n = out.len();
        match &self.law {
            Law::Gaussian { covariance, factor } => {
                scratch.clear();
                scratch.extend((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
                match factor {
                    None => {
                        for k in 0..n {
                            out[k] = covariance[(k, k)].sqrt() * scratch[k];
                        }
                    }
                    Some(l) => {
                        for (i, o) in out.iter_mut().enumerate() {
                            *o = (0..n).map(|k| l[(i, k)] * scratch[k]).sum();
                        }
                    }
                }
            }
            Law::Rademacher => {
                for o in out.iter_mut() {
                    *o = if rng.random::<bool>() { 1.0 } else { -1.0 };
                }
            }
            Law::OrthogonalScaled { taus } => {
                for (o, t) in out.iter_mut().zip(taus) {
                    *o = t * rng.sample::<f64, _>(StandardNormal);
                }
            }
            Law::Grouped { blocks, block_of } => {
                scratch.clear();
                scratch.extend((0..blocks.len()).map(|_| rng.sample::<f64, _>(StandardNormal)));
                for (o, b) in out.iter_mut().zip(block_of) {
                    *o = scratch[*b];
                }
            }
        }
    }
}

/// Mean-zero Gaussian features with the given covariance.
pub fn make_gaussian(covariance: DMatrix<f64>) -> Result<DictionaryModel> {
    let n = covariance.nrows();
    if n < 2 || covariance.ncols() != n {
        return Err(Error::invalid("covariance must be square with N >= 2"));
    }
    if covariance.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("covariance has non-finite entries"));
    }
    if !linalg::is_symmetric(&covariance, 1e-12) {
        return Err(Error::invalid("covariance is not symmetric"));
    }
    let (lo, _) = linalg::sym_extreme_eigenvalues(&covariance);
    if lo < -COVARIANCE_PSD_TOL {
        return Err(Error::invalid(format!(
            "covariance is not positive semi-definite (min eigenvalue {lo:e})"
        )));
    }
    if (0..n).any(|k| covariance[(k, k)] <= 0.0) {
        return Err(Error::invalid(
            "covariance has a zero variance: degenerate dictionary function",
        ));
    }
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || covariance[(i, j)] == 0.0));
    let factor = if diagonal {
        None
    } else {
        Some(linalg::psd_factor(&covariance))
    };
    let mut sym = covariance.clone();
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (sym[(i, j)] + sym[(j, i)]);
            sym[(i, j)] = avg;
            sym[(j, i)] = avg;
        }
    }
    Ok(DictionaryModel {
        kind: DictionaryKind::Gaussian,
        law: Law::Gaussian { covariance, factor },
        gram: GramMatrix { entries: sym },
    })
}

/// I.i.d. ±1 features.
pub fn make_rademacher(n_funcs: usize) -> Result<DictionaryModel> {
    if n_funcs < 2 {
        return Err(Error::invalid("a dictionary needs N >= 2 functions"));
    }
    Ok(DictionaryModel {
        kind: DictionaryKind::Rademacher,
        law: Law::Rademacher,
        gram: GramMatrix::identity(n_funcs),
    })
}

/// Independent Gaussian features with standard deviations `taus`.
pub fn make_orthogonal_scaled(taus: &[f64]) -> Result<DictionaryModel> {
    if taus.len() < 2 {
        return Err(Error::invalid("a dictionary needs N >= 2 functions"));
    }
    if taus.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::invalid("every scale must be a positive finite number"));
    }
    let n = taus.len();
    let gram = DMatrix::from_fn(n, n, |i, j| if i == j { taus[i] * taus[i] } else { 0.0 });
    Ok(DictionaryModel {
        kind: DictionaryKind::OrthogonalScaled,
        law: Law::OrthogonalScaled {
            taus: taus.to_vec(),
        },
        gram: GramMatrix { entries: gram },
    })
}

/// Duplicated dictionary: `h_j = φ_k` for `j` in block `k`, with `φ_k`
/// i.i.d. standard normal. Blocks are 0-based and must partition `0..N`.
pub fn make_grouped(blocks: &[Vec<usize>]) -> Result<DictionaryModel> {
    let n: usize = blocks.iter().map(Vec::len).sum();
    if n < 2 {
        return Err(Error::invalid("a dictionary needs N >= 2 functions"));
    }
    let mut block_of = vec![usize::MAX; n];
    for (b, block) in blocks.iter().enumerate() {
        if block.is_empty() {
            return Err(Error::invalid("partition contains an empty block"));
        }
        for &j in block {
            if j >= n {
                return Err(Error::invalid(format!(
                    "index {} outside 1..={n}: partition is incomplete",
                    j + 1
                )));
            }
            if block_of[j] != usize::MAX {
                return Err(Error::invalid(format!("index {} appears in two blocks", j + 1)));
            }
            block_of[j] = b;
        }
    }
    let gram = DMatrix::from_fn(n, n, |i, j| if block_of[i] == block_of[j] { 1.0 } else { 0.0 });
    let mut sorted: Vec<Vec<usize>> = blocks.to_vec();
    for b in &mut sorted {
        b.sort_unstable();
    }
    Ok(DictionaryModel {
        kind: DictionaryKind::Grouped,
        law: Law::Grouped {
            blocks: sorted,
            block_of,
        },
        gram: GramMatrix { entries: gram },
    })
}

/// Design matrix `H[i, k] = h_k(X_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignSample {
    pub h: DMatrix<f64>,
    pub seed: u64,
}

impl DesignSample {
    pub fn from_matrix(h: DMatrix<f64>, seed: u64) -> Self {
        DesignSample { h, seed }
    }

    pub fn n(&self) -> usize {
        self.h.nrows()
    }

    pub fn n_funcs(&self) -> usize {
        self.h.ncols()
    }

    /// `HᵀH / n`.
    pub fn empirical_gram(&self) -> DMatrix<f64> {
        self.h.tr_mul(&self.h) / self.n() as f64
    }

    /// `Hᵀy / n`.
    pub fn correlations(&self, y: &[f64]) -> Vec<f64> {
        let yv = DVector::from_column_slice(y);
        let z = self.h.tr_mul(&yv) / self.n() as f64;
        z.iter().copied().collect()
    }

    /// Values `f_λ(X_i)` for every row.
    pub fn evaluate(&self, lambda: &[f64]) -> Vec<f64> {
        linalg::mat_vec(&self.h, lambda)
    }

    /// `‖h_k‖_{L2(Π_n)}` for every column.
    pub fn column_norms(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.h
            .column_iter()
            .map(|c| (c.norm_squared() / n).sqrt())
            .collect()
    }
}

/// Draws `n` i.i.d. rows from the model. Row `i` uses its own substream of
/// `seed`, so any row can be regenerated independently.
pub fn sample_design(model: &DictionaryModel, n: usize, seed: u64) -> Result<DesignSample> {
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    let p = model.n_funcs();
    let base = rng::derive_seed(seed, tags::DESIGN, 0);
    let mut h = DMatrix::zeros(n, p);
    let mut row = vec![0.0; p];
    let mut scratch = Vec::with_capacity(p);
    for i in 0..n {
        let mut r = rng::substream(base, i as u64);
        model.fill_row(&mut r, &mut scratch, &mut row);
        for k in 0..p {
            h[(i, k)] = row[k];
        }
    }
    Ok(DesignSample { h, seed })
}

/// Responses `Y_j = f_{λ*}(X_j) + γ φ(X_j) + ξ_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponseSample {
    pub y: Vec<f64>,
    /// The true coefficient vector; absent when the regression function has
    /// a component outside the span of the dictionary (`γ > 0`).
    pub lambda_star: Option<Vec<f64>>,
    /// Coefficients of the `L2(Π)` projection of the regression function onto
    /// the span. Equal to `lambda_star` when the model is well specified.
    pub projection: Vec<f64>,
    pub sigma: f64,
    pub misfit: f64,
    pub seed: u64,
}

pub fn sample_response(
    design: &DesignSample,
    lambda_star: &[f64],
    sigma: f64,
    gamma: f64,
    seed: u64,
) -> Result<ResponseSample> {
    if lambda_star.len() != design.n_funcs() {
        return Err(Error::DimensionMismatch {
            what: "coefficient vector",
            expected: design.n_funcs(),
            got: lambda_star.len(),
        });
    }
    if !(sigma >= 0.0 && sigma.is_finite()) || !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::invalid("sigma and gamma must be finite and non-negative"));
    }
    let mut y = design.evaluate(lambda_star);
    if sigma > 0.0 {
        let base = rng::derive_seed(seed, tags::NOISE, 0);
        for (j, v) in y.iter_mut().enumerate() {
            let z: f64 = rng::substream(base, j as u64).sample(StandardNormal);
            *v += sigma * z;
        }
    }
    if gamma > 0.0 {
        let base = rng::derive_seed(seed, tags::MISFIT, 0);
        for (j, v) in y.iter_mut().enumerate() {
            let z: f64 = rng::substream(base, j as u64).sample(StandardNormal);
            *v += gamma * z;
        }
    }
    Ok(ResponseSample {
        y,
        lambda_star: (gamma == 0.0).then(|| lambda_star.to_vec()),
        projection: lambda_star.to_vec(),
        sigma,
        misfit: gamma,
        seed,
    })
}

/// `‖f_λ‖_{L2(Π)} = √(λᵀ G λ)`.
pub fn population_l2_norm(lambda: &[f64], gram: &GramMatrix) -> Result<f64> {
    if lambda.len() != gram.n_funcs() {
        return Err(Error::DimensionMismatch {
            what: "coefficient vector",
            expected: gram.n_funcs(),
            got: lambda.len(),
        });
    }
    Ok(linalg::quad_form(gram.entries(), lambda).max(0.0).sqrt())
}

/// `‖f_λ‖_{L1(Π)}`: closed form for Gaussian kinds, Monte Carlo for
/// Rademacher features.
pub fn population_l1_norm(
    lambda: &[f64],
    model: &DictionaryModel,
    mc_samples: usize,
    seed: u64,
) -> Result<f64> {
    population_l1_norm_with_misfit(lambda, 0.0, model, mc_samples, seed)
}

/// `‖f_λ + γφ‖_{L1(Π)}` with `φ` an independent standard normal component.
pub fn population_l1_norm_with_misfit(
    lambda: &[f64],
    gamma: f64,
    model: &DictionaryModel,
    mc_samples: usize,
    seed: u64,
) -> Result<f64> {
    let l2 = population_l2_norm(lambda, model.gram())?;
    if model.kind().is_gaussian() {
        return Ok(FRAC_2_PI.sqrt() * (l2 * l2 + gamma * gamma).sqrt());
    }
    if l2 == 0.0 && gamma == 0.0 {
        return Ok(0.0);
    }
    if mc_samples < MIN_MC_SAMPLES {
        return Err(Error::invalid(format!(
            "Monte Carlo L1 norm needs at least {MIN_MC_SAMPLES} samples, got {mc_samples}"
        )));
    }
    let base = rng::derive_seed(seed, tags::MONTE_CARLO, 0);
    let mut rng = rng::rng_from_seed(base);
    let mut acc = 0.0;
    for _ in 0..mc_samples {
        let mut f = 0.0;
        for &l in lambda {
            if rng.random::<bool>() {
                f += l;
            } else {
                f -= l;
            }
        }
        if gamma > 0.0 {
            f += gamma * rng.sample::<f64, _>(StandardNormal);
        }
        acc += f.abs();
    }
    Ok(acc / mc_samples as f64)
}

/// JSON form: `{"kind": ..., "N": ..., "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: DictionaryKind,
    #[serde(rename = "N")]
    pub n_funcs: usize,
    #[serde(default)]
    pub params: ModelParams,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Row-major covariance (gaussian); identity when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariance: Option<Vec<Vec<f64>>>,
    /// Per-function scales (orthogonal_scaled); all ones when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taus: Option<Vec<f64>>,
    /// 1-based partition (grouped).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<Vec<usize>>>,
}

impl TryFrom<ModelSpec> for DictionaryModel {
    type Error = Error;

    fn try_from(spec: ModelSpec) -> Result<Self> {
        let n = spec.n_funcs;
        let check_len = |got: usize, what: &'static str| {
            if got != n {
                Err(Error::DimensionMismatch {
                    what,
                    expected: n,
                    got,
                })
            } else {
                Ok(())
            }
        };
        let model = match spec.kind {
            DictionaryKind::Gaussian => match spec.params.covariance {
                Some(rows) => {
                    check_len(rows.len(), "covariance rows")?;
                    if rows.iter().any(|r| r.len() != n) {
                        return Err(Error::invalid("covariance rows must have length N"));
                    }
                    let flat: Vec<f64> = rows.into_iter().flatten().collect();
                    make_gaussian(DMatrix::from_row_slice(n, n, &flat))?
                }
                None => make_gaussian(DMatrix::identity(n, n))?,
            },
            DictionaryKind::Rademacher => make_rademacher(n)?,
            DictionaryKind::OrthogonalScaled => match spec.params.taus {
                Some(taus) => {
                    check_len(taus.len(), "taus")?;
                    make_orthogonal_scaled(&taus)?
                }
                None => make_orthogonal_scaled(&vec![1.0; n])?,
            },
            DictionaryKind::Grouped => {
                let blocks = spec
                    .params
                    .blocks
                    .ok_or_else(|| Error::invalid("grouped model requires `blocks`"))?;
                let zero_based = blocks
                    .iter()
                    .map(|b| {
                        b.iter()
                            .map(|&j| {
                                j.checked_sub(1)
                                    .ok_or_else(|| Error::invalid("block indices are 1-based"))
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                let m = make_grouped(&zero_based)?;
                check_len(m.n_funcs(), "partition size")?;
                m
            }
        };
        Ok(model)
    }
}

impl From<DictionaryModel> for ModelSpec {
    fn from(m: DictionaryModel) -> Self {
        let n_funcs = m.n_funcs();
        let params = match &m.law {
            Law::Gaussian { covariance, .. } => ModelParams {
                covariance: Some(
                    covariance
                        .row_iter()
                        .map(|r| r.iter().copied().collect())
                        .collect(),
                ),
                ..Default::default()
            },
            Law::Rademacher => ModelParams::default(),
            Law::OrthogonalScaled { taus } => ModelParams {
                taus: Some(taus.clone()),
                ..Default::default()
            },
            Law::Grouped { blocks, .. } => ModelParams {
                blocks: Some(
                    blocks
                        .iter()
                        .map(|b| b.iter().map(|j| j + 1).collect())
                        .collect(),
                ),
                ..Default::default()
            },
        };
        ModelSpec {
            kind: m.kind,
            n_funcs,
            params,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).amax()
    }

    #[test]
    fn gaussian_identity_gram() {
        let m = make_gaussian(DMatrix::identity(4, 4)).unwrap();
        assert_eq!(m.gram().entries(), &DMatrix::<f64>::identity(4, 4));
    }

    #[test]
    fn gaussian_rejects_zero_and_indefinite() {
        assert!(make_gaussian(DMatrix::zeros(3, 3)).is_err());
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(make_gaussian(bad).is_err());
    }

    #[test]
    fn gaussian_keeps_off_diagonal() {
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let m = make_gaussian(c).unwrap();
        assert_eq!(m.gram().get(0, 1), 0.5);
    }

    #[test]
    fn rademacher_gram_and_validation() {
        let m = make_rademacher(8).unwrap();
        assert_eq!(m.gram().entries(), &DMatrix::<f64>::identity(8, 8));
        assert!(make_rademacher(1).is_err());
    }

    #[test]
    fn rademacher_empirical_gram_converges() {
        let m = make_rademacher(2).unwrap();
        let d = sample_design(&m, 100_000, 3).unwrap();
        assert!(max_abs_diff(&d.empirical_gram(), m.gram().entries()) < 0.02);
    }

    #[test]
    fn orthogonal_scaled_gram() {
        let m = make_orthogonal_scaled(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(m.gram().entries(), &DMatrix::<f64>::identity(3, 3));
        let m = make_orthogonal_scaled(&[2.0, 2.0]).unwrap();
        assert_eq!(m.gram().diagonal(), vec![4.0, 4.0]);
        assert!(make_orthogonal_scaled(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn grouped_gram_and_partition_checks() {
        let m = make_grouped(&[vec![0, 1], vec![2]]).unwrap();
        let want = DMatrix::from_row_slice(3, 3, &[1., 1., 0., 1., 1., 0., 0., 0., 1.]);
        assert_eq!(m.gram().entries(), &want);
        let singletons: Vec<Vec<usize>> = (0..5).map(|j| vec![j]).collect();
        let m = make_grouped(&singletons).unwrap();
        assert_eq!(m.gram().entries(), &DMatrix::<f64>::identity(5, 5));
        assert!(make_grouped(&[vec![0, 1], vec![1, 2]]).is_err());
        assert!(make_grouped(&[vec![0, 3], vec![1]]).is_err());
    }

    #[test]
    fn grouped_design_duplicates_columns() {
        let m = make_grouped(&[vec![0, 1, 2], vec![3]]).unwrap();
        let d = sample_design(&m, 50, 1).unwrap();
        for i in 0..50 {
            assert_eq!(d.h[(i, 0)], d.h[(i, 1)]);
            assert_eq!(d.h[(i, 1)], d.h[(i, 2)]);
        }
    }

    #[test]
    fn design_column_means_near_zero() {
        let m = make_gaussian(DMatrix::identity(4, 4)).unwrap();
        let d = sample_design(&m, 10_000, 11).unwrap();
        for c in d.h.column_iter() {
            assert!(c.mean().abs() < 0.05);
        }
    }

    #[test]
    fn design_is_deterministic() {
        let m = make_gaussian(DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0])).unwrap();
        let a = sample_design(&m, 20, 99).unwrap();
        let b = sample_design(&m, 20, 99).unwrap();
        assert_eq!(a, b);
        let c = sample_design(&m, 20, 100).unwrap();
        assert_ne!(a.h, c.h);
    }

    #[test]
    fn noiseless_response_is_exact() {
        let m = make_gaussian(DMatrix::identity(3, 3)).unwrap();
        let d = sample_design(&m, 10, 5).unwrap();
        let lam = [1.0, -2.0, 0.5];
        let r = sample_response(&d, &lam, 0.0, 0.0, 1).unwrap();
        assert_eq!(r.y, d.evaluate(&lam));
        assert_eq!(r.lambda_star.as_deref(), Some(&lam[..]));
    }

    fn sample_variance(v: &[f64]) -> f64 {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    }

    #[test]
    fn pure_noise_and_pure_misfit_variances() {
        let m = make_gaussian(DMatrix::identity(2, 2)).unwrap();
        let d = sample_design(&m, 10_000, 5).unwrap();
        let r = sample_response(&d, &[0.0, 0.0], 2.0, 0.0, 8).unwrap();
        assert!((sample_variance(&r.y) / 4.0 - 1.0).abs() < 0.1);
        let r = sample_response(&d, &[0.0, 0.0], 0.0, 1.0, 8).unwrap();
        assert!((sample_variance(&r.y) - 1.0).abs() < 0.1);
        assert!(r.lambda_star.is_none());
    }

    #[test]
    fn l2_norm_examples() {
        let id = GramMatrix::identity(2);
        assert_eq!(population_l2_norm(&[1.0, 0.0], &id).unwrap(), 1.0);
        let ones = GramMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!((population_l2_norm(&[1.0, 1.0], &ones).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(population_l2_norm(&[1.0, -1.0], &ones).unwrap(), 0.0);
    }

    #[test]
    fn l1_norm_examples() {
        let g = make_gaussian(DMatrix::identity(3, 3)).unwrap();
        let e1 = [1.0, 0.0, 0.0];
        let v = population_l1_norm(&e1, &g, DEFAULT_MC_SAMPLES, 0).unwrap();
        assert!((v - 0.797_884_560_802_865_4).abs() < 1e-12);
        assert_eq!(population_l1_norm(&[0.0; 3], &g, 0, 0).unwrap(), 0.0);
        let r = make_rademacher(3).unwrap();
        let mc = 10_000;
        let v = population_l1_norm(&e1, &r, mc, 4).unwrap();
        assert!((v - 1.0).abs() <= 2.0 / (mc as f64).sqrt());
        assert!(population_l1_norm(&[1.0, 1.0, 0.0], &r, 999, 4).is_err());
    }

    #[test]
    fn model_json_round_trip() {
        let m = make_grouped(&[vec![0, 1], vec![2]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"kind\":\"grouped\""));
        assert!(s.contains("\"N\":3"));
        let back: DictionaryModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);

        let g: DictionaryModel =
            serde_json::from_str(r#"{"kind":"gaussian","N":3,"params":{}}"#).unwrap();
        assert_eq!(g.gram(), &GramMatrix::identity(3));
        assert!(serde_json::from_str::<DictionaryModel>(
            r#"{"kind":"gaussian","N":3,"params":{"bogus":1}}"#
        )
        .is_err());
    }
}
