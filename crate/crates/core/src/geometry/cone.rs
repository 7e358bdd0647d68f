use serde::Serialize;

use super::IndexSet;

/// Whether the ℓ1 mass of `u` off `j` is at most its ℓ1 mass on `j`.
pub fn in_cone(u: &[f64], j: &IndexSet) -> bool {
    let (on, off) = split_l1(u, j);
    off <= on
}

fn split_l1(u: &[f64], j: &IndexSet) -> (f64, f64) {
    let mut on = 0.0;
    let mut off = 0.0;
    for (k, v) in u.iter().enumerate() {
        if j.contains(k) {
            on += v.abs();
        } else {
            off += v.abs();
        }
    }
    (on, off)
}

/// Euclidean projection of `u` onto the convex piece of the cone that keeps
/// the signs of `u` on `j` (zeros count as positive).
///
/// Points already in the cone are returned unchanged. With `j` empty the
/// cone is `{0}`.
pub fn project_into_cone(u: &[f64], j: &IndexSet) -> Vec<f64> {
    let (on, off) = split_l1(u, j);
    if off <= on {
        return u.to_vec();
    }
    if j.is_empty() {
        return vec![0.0; u.len()];
    }
    // Find μ with ‖soft(u_off, μ)‖₁ = ‖u_on‖₁ + d·μ.
    let d = j.d() as f64;
    let mut mags: Vec<f64> = (0..u.len())
        .filter(|&k| !j.contains(k))
        .map(|k| u[k].abs())
        .collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut mu = 0.0;
    let mut prefix = 0.0;
    for (k, &m) in mags.iter().enumerate() {
        prefix += m;
        let cand = (prefix - on) / ((k + 1) as f64 + d);
        let next = mags.get(k + 1).copied().unwrap_or(0.0);
        if cand >= next && cand <= m {
            mu = cand;
            break;
        }
    }
    let mut v: Vec<f64> = u
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            if j.contains(k) {
                if x < 0.0 {
                    x - mu
                } else {
                    x + mu
                }
            } else {
                x.signum() * (x.abs() - mu).max(0.0)
            }
        })
        .collect();
    // Round-off can leave the boundary point a hair outside.
    let (on, off) = split_l1(&v, j);
    if off > on {
        let s = on / off * (1.0 - 4.0 * f64::EPSILON);
        for (k, x) in v.iter_mut().enumerate() {
            if !j.contains(k) {
                *x *= s;
            }
        }
    }
    v
}

/// Greedy decomposition of a vector into `J0 = j` followed by blocks of at
/// most `d` indices outside `j`, taken by decreasing magnitude.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeBlocks {
    /// `sets[0]` is `J0`; later sets are the blocks `J1, J2, …`.
    pub sets: Vec<Vec<usize>>,
    /// Restriction of `u` to each set, as full-length vectors.
    pub blocks: Vec<Vec<f64>>,
}

impl ConeBlocks {
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.blocks.first().map_or(0, Vec::len);
        let mut out = vec![0.0; n];
        for b in &self.blocks {
            for (o, v) in out.iter_mut().zip(b) {
                *o += v;
            }
        }
        out
    }

    /// `Σ_{k≥2} ‖u⁽ᵏ⁾‖₂`.
    pub fn tail_l2_sum(&self) -> f64 {
        self.blocks.iter().skip(2).map(|b| crate::linalg::norm2(b)).sum()
    }

    /// `‖u⁽⁰⁾‖₂`.
    pub fn head_l2(&self) -> f64 {
        crate::linalg::norm2(&self.blocks[0])
    }

    /// `‖u⁽⁰⁾ + u⁽¹⁾‖₂`.
    pub fn first_two_l2(&self) -> f64 {
        let extra = self.blocks.get(1).map_or(0.0, |b| crate::linalg::norm2(b));
        self.head_l2().hypot(extra)
    }
}

/// Blocks cover the support of `u` off `j`; zero entries are not placed in
/// any block. Equal magnitudes are ordered by lower index.
pub fn block_decompose(u: &[f64], j: &IndexSet, d: usize) -> ConeBlocks {
    assert!(d >= 1, "block size must be at least 1");
    let n = u.len();
    let restrict = |idx: &[usize]| {
        let mut b = vec![0.0; n];
        for &k in idx {
            b[k] = u[k];
        }
        b
    };
    let mut rest: Vec<usize> = (0..n).filter(|&k| !j.contains(k) && u[k] != 0.0).collect();
    rest.sort_by(|&a, &b| u[b].abs().total_cmp(&u[a].abs()).then(a.cmp(&b)));
    let mut sets = vec![j.members().to_vec()];
    sets.extend(rest.chunks(d).map(|c| {
        let mut c = c.to_vec();
        c.sort_unstable();
        c
    }));
    let blocks = sets.iter().map(|s| restrict(s)).collect();
    ConeBlocks { sets, blocks }
}
