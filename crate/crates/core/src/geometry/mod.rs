//! Geometry of a dictionary seen through its Gram matrix: cones of dominant
//! coordinates, restricted isometry constants, canonical correlations, and
//! the β/β₂ constants with their upper bounds.
//!
//! Indices are 0-based in this API. [`IndexSet`] serializes 1-based.

mod beta;
mod cone;
mod report;
mod rip;

pub use beta::{
    b_constant, beta2_bound_global, beta2_bound_kappa_rho, beta2_bound_lemma2,
    beta2_bound_lemma2_level, beta2_bound_prop3,
    beta2_bound_prop3_best, beta2_estimate, beta_bound_23, beta_estimate, d_tilde, AscentOptions,
    BConstant, Bound,
};
pub use cone::{block_decompose, in_cone, project_into_cone, ConeBlocks};
pub use report::{geometry_report, GeometryReport, RipEntry};
pub use rip::{
    cross_correlation, delta_d, enumeration_count, kappa, md_Md, rho_complement, rho_d,
    rho_d_delta_bound, ENUMERATION_BUDGET,
};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Sorted distinct indices into a dictionary of `n_funcs` functions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexSet {
    members: Vec<usize>,
}

impl IndexSet {
    /// From 0-based indices; sorts and rejects duplicates or out-of-range
    /// members.
    pub fn new(mut members: Vec<usize>, n_funcs: usize) -> Result<Self> {
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("index set has duplicate members"));
        }
        if let Some(&last) = members.last() {
            if last >= n_funcs {
                return Err(Error::invalid(format!(
                    "index {} out of range 1..={n_funcs}",
                    last + 1
                )));
            }
        }
        Ok(IndexSet { members })
    }

    pub fn empty() -> Self {
        IndexSet { members: Vec::new() }
    }

    pub fn from_one_based(members: &[usize], n_funcs: usize) -> Result<Self> {
        if members.contains(&0) {
            return Err(Error::invalid("index sets are 1-based; got 0"));
        }
        Self::new(members.iter().map(|&j| j - 1).collect(), n_funcs)
    }

    /// Parses `"1,3,5"` (1-based, whitespace tolerated, empty string allowed).
    pub fn parse(text: &str, n_funcs: usize) -> Result<Self> {
        let mut out = Vec::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let v: usize = part
                .parse()
                .map_err(|_| Error::invalid(format!("bad index `{part}`")))?;
            out.push(v);
        }
        Self::from_one_based(&out, n_funcs)
    }

    /// Support of `v` (entries with `|v_j| > tol`).
    pub fn support(v: &[f64], tol: f64) -> Self {
        IndexSet {
            members: (0..v.len()).filter(|&j| v[j].abs() > tol).collect(),
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn d(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.members.binary_search(&j).is_ok()
    }

    pub fn complement(&self, n_funcs: usize) -> Vec<usize> {
        (0..n_funcs).filter(|&j| !self.contains(j)).collect()
    }

    /// Membership mask of length `n_funcs`.
    pub fn mask(&self, n_funcs: usize) -> Vec<bool> {
        let mut m = vec![false; n_funcs];
        for &j in &self.members {
            m[j] = true;
        }
        m
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.members.iter().map(|j| j + 1).collect()
    }
}

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for IndexSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<usize>::deserialize(d)?;
        IndexSet::from_one_based(&raw, usize::MAX).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_serialize_one_based() {
        let j = IndexSet::parse("5, 1,3", 6).unwrap();
        assert_eq!(j.members(), &[0, 2, 4]);
        assert_eq!(serde_json::to_string(&j).unwrap(), "[1,3,5]");
        assert!(IndexSet::parse("0", 6).is_err());
        assert!(IndexSet::parse("7", 6).is_err());
        assert!(IndexSet::parse("2,2", 6).is_err());
        assert!(IndexSet::parse("", 6).unwrap().is_empty());
    }
}
