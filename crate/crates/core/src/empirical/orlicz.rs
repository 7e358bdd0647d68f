use std::f64::consts::{LN_2, SQRT_2};

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Young function: `ψ₁(x) = eˣ − 1` or `ψ₂(x) = e^{x²} − 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Psi {
    Psi1,
    Psi2,
}

impl Psi {
    fn exponent(self, x: f64) -> f64 {
        match self {
            Psi::Psi1 => x,
            Psi::Psi2 => x * x,
        }
    }
}

/// Laws with a closed-form `E ψ(|η|/C)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClosedForm {
    Normal { sd: f64 },
    Exponential { rate: f64 },
    Rademacher,
    Zero,
}

#[derive(Clone, Copy, Debug)]
pub enum OrliczInput<'a> {
    Sample(&'a [f64]),
    ClosedForm(ClosedForm),
}

/// Orlicz norm value; `Infinite` when `E ψ(|η|/C)` diverges for every `C`
/// tried. Serializes as a number or `"infinite"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OrliczNorm {
    Finite(f64),
    Infinite,
}

impl OrliczNorm {
    pub fn value(self) -> Option<f64> {
        match self {
            OrliczNorm::Finite(v) => Some(v),
            OrliczNorm::Infinite => None,
        }
    }
}

impl Serialize for OrliczNorm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            OrliczNorm::Finite(v) => s.serialize_f64(*v),
            OrliczNorm::Infinite => s.serialize_str("infinite"),
        }
    }
}

const C_MIN: f64 = 1e-300;
const C_MAX: f64 = 1e300;

/// `ln E exp(φ(|η|/C))`, where `ψ = exp∘φ − 1`. May be `+∞`.
fn log_moment(input: &OrliczInput, psi: Psi, c: f64) -> f64 {
    match input {
        OrliczInput::Sample(xs) => {
            let vals = xs.iter().map(|x| psi.exponent(x.abs() / c));
            log_mean_exp(vals, xs.len())
        }
        OrliczInput::ClosedForm(law) => match (*law, psi) {
            (ClosedForm::Zero, _) => 0.0,
            (ClosedForm::Rademacher, _) => psi.exponent(1.0 / c),
            (ClosedForm::Normal { sd }, Psi::Psi2) => {
                let t = 2.0 * (sd / c).powi(2);
                if t >= 1.0 {
                    f64::INFINITY
                } else {
                    -0.5 * (1.0 - t).ln()
                }
            }
            (ClosedForm::Normal { sd }, Psi::Psi1) => {
                // E e^{a|Z|} = 2 e^{a²/2} Φ(a)
                let a = sd / c;
                LN_2 + 0.5 * a * a + normal_cdf(a).ln()
            }
            (ClosedForm::Exponential { rate }, Psi::Psi1) => {
                let a = 1.0 / (rate * c);
                if a >= 1.0 {
                    f64::INFINITY
                } else {
                    -(1.0 - a).ln()
                }
            }
            (ClosedForm::Exponential { .. }, Psi::Psi2) => f64::INFINITY,
        },
    }
}

fn log_mean_exp(vals: impl Iterator<Item = f64> + Clone, len: usize) -> f64 {
    let max = vals.clone().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = vals.map(|v| (v - max).exp()).sum();
    max + (sum / len as f64).ln()
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// `inf{C > 0 : E ψ(|η|/C) ≤ 1}` by bisection on the decreasing map
/// `C ↦ E ψ(|η|/C)`, to relative tolerance `tol`. The returned value is the
/// upper end of the final bracket.
pub fn orlicz_norm(input: OrliczInput, psi: Psi, tol: f64) -> Result<OrliczNorm> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::invalid("tolerance must lie in (0, 1)"));
    }
    match input {
        OrliczInput::Sample(xs) => {
            if xs.is_empty() {
                return Err(Error::invalid("Orlicz norm of an empty sample"));
            }
            if xs.iter().any(|x| !x.is_finite()) {
                return Ok(OrliczNorm::Infinite);
            }
            if xs.iter().all(|&x| x == 0.0) {
                return Ok(OrliczNorm::Finite(0.0));
            }
        }
        OrliczInput::ClosedForm(law) => match law {
            ClosedForm::Zero => return Ok(OrliczNorm::Finite(0.0)),
            ClosedForm::Normal { sd } if sd == 0.0 => return Ok(OrliczNorm::Finite(0.0)),
            ClosedForm::Normal { sd } if !(sd > 0.0 && sd.is_finite()) => {
                return Err(Error::invalid("normal scale must be finite and >= 0"))
            }
            ClosedForm::Exponential { rate } if !(rate > 0.0 && rate.is_finite()) => {
                return Err(Error::invalid("exponential rate must be positive"))
            }
            _ => {}
        },
    }
    let target = LN_2;
    let within = |c: f64| log_moment(&input, psi, c) <= target;

    let mut hi = 1.0;
    while !within(hi) {
        hi *= 2.0;
        if hi > C_MAX {
            return Ok(OrliczNorm::Infinite);
        }
    }
    let mut lo = hi;
    while within(lo) {
        lo *= 0.5;
        if lo < C_MIN {
            return Ok(OrliczNorm::Finite(0.0));
        }
    }
    while hi / lo - 1.0 > tol {
        let mid = (lo * hi).sqrt();
        if within(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(OrliczNorm::Finite(hi))
}

/// Delta-method standard error of a sample Orlicz norm evaluated at `c`:
/// the standard error of the sample mean of `exp(φ(|η|/c))` divided by the
/// slope of that mean in `c`.
pub fn orlicz_std_error(sample: &[f64], psi: Psi, c: f64) -> f64 {
    let m = sample.len() as f64;
    if sample.len() < 2 || c <= 0.0 {
        return f64::INFINITY;
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut slope = 0.0;
    for x in sample {
        let a = x.abs() / c;
        let e = psi.exponent(a).exp();
        sum += e;
        sum_sq += e * e;
        // d/dc exp(φ(|x|/c)) = −exp(φ)·φ'(a)·a/c
        let dphi = match psi {
            Psi::Psi1 => a,
            Psi::Psi2 => 2.0 * a * a,
        };
        slope += e * dphi / c;
    }
    let mean = sum / m;
    let var = (sum_sq / m - mean * mean).max(0.0) * m / (m - 1.0);
    let se_mean = (var / m).sqrt();
    let slope = slope / m;
    if slope == 0.0 {
        return f64::INFINITY;
    }
    se_mean / slope
}

/// `‖η₁η₂‖_{ψ1} ≤ ‖η₁‖_{ψ2}‖η₂‖_{ψ2}`: the right-hand side.
pub fn product_psi1_bound(norm2_a: f64, norm2_b: f64) -> f64 {
    norm2_a * norm2_b
}

/// `‖h‖_{ψ1}` of a standard normal.
pub fn standard_normal_psi1() -> f64 {
    orlicz_norm(
        OrliczInput::ClosedForm(ClosedForm::Normal { sd: 1.0 }),
        Psi::Psi1,
        1e-12,
    )
    .ok()
    .and_then(OrliczNorm::value)
    .expect("closed form is finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Exp1, StandardNormal};

    fn closed(law: ClosedForm, psi: Psi) -> OrliczNorm {
        orlicz_norm(OrliczInput::ClosedForm(law), psi, 1e-10).unwrap()
    }

    #[test]
    fn gaussian_psi2_closed_form() {
        let v = closed(ClosedForm::Normal { sd: 1.0 }, Psi::Psi2).value().unwrap();
        // (1 − 2/C²)^{−1/2} = 2  ⇔  C² = 8/3
        assert!((v - (8.0f64 / 3.0).sqrt()).abs() < 1e-8);
        assert!((v - 1.63299).abs() < 1e-5);
        let scaled = closed(ClosedForm::Normal { sd: 3.0 }, Psi::Psi2).value().unwrap();
        assert!((scaled - 3.0 * v).abs() < 1e-8);
    }

    #[test]
    fn exponential_psi1_is_two() {
        let v = closed(ClosedForm::Exponential { rate: 1.0 }, Psi::Psi1).value().unwrap();
        assert!((v - 2.0).abs() < 1e-8);
        assert_eq!(closed(ClosedForm::Exponential { rate: 1.0 }, Psi::Psi2), OrliczNorm::Infinite);
    }

    #[test]
    fn zero_and_rademacher() {
        assert_eq!(closed(ClosedForm::Zero, Psi::Psi1), OrliczNorm::Finite(0.0));
        assert_eq!(
            orlicz_norm(OrliczInput::Sample(&[0.0; 5]), Psi::Psi2, 1e-6).unwrap(),
            OrliczNorm::Finite(0.0)
        );
        let r = closed(ClosedForm::Rademacher, Psi::Psi1).value().unwrap();
        assert!((r - 1.0 / LN_2).abs() < 1e-8);
        let r2 = closed(ClosedForm::Rademacher, Psi::Psi2).value().unwrap();
        assert!((r2 - 1.0 / LN_2.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn normal_psi1_solves_its_equation() {
        let c = standard_normal_psi1();
        // 2 e^{1/(2c²)} Φ(1/c) = 2, checked with an independent quadrature.
        let steps = 200_000;
        let h = 16.0 / steps as f64;
        let mut acc = 0.0;
        for i in 0..steps {
            let z = -8.0 + (i as f64 + 0.5) * h;
            acc += (z.abs() / c).exp() * (-0.5 * z * z).exp();
        }
        let moment = acc * h / (2.0 * std::f64::consts::PI).sqrt();
        assert!((moment - 2.0).abs() < 1e-8, "{moment}");
    }

    #[test]
    fn sample_estimates_track_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<f64> = (0..200_000).map(|_| rng.sample(StandardNormal)).collect();
        let v = orlicz_norm(OrliczInput::Sample(&xs), Psi::Psi2, 1e-8).unwrap().value().unwrap();
        let se = orlicz_std_error(&xs, Psi::Psi2, v);
        assert!((v - (8.0f64 / 3.0).sqrt()).abs() < 4.0 * se + 1e-3, "{v} ± {se}");
        let es: Vec<f64> = (0..200_000).map(|_| rng.sample(Exp1)).collect();
        let v = orlicz_norm(OrliczInput::Sample(&es), Psi::Psi1, 1e-8).unwrap().value().unwrap();
        let se = orlicz_std_error(&es, Psi::Psi1, v);
        assert!((v - 2.0).abs() < 4.0 * se, "{v} ± {se}");
    }

    #[test]
    fn product_bound_examples() {
        assert!((product_psi1_bound(1.633, 1.633) - 2.6667).abs() < 1e-4);
        assert_eq!(product_psi1_bound(0.0, 5.0), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(orlicz_norm(OrliczInput::Sample(&[]), Psi::Psi1, 1e-6).is_err());
        assert!(orlicz_norm(OrliczInput::Sample(&[1.0]), Psi::Psi1, 0.0).is_err());
        assert_eq!(
            orlicz_norm(OrliczInput::Sample(&[1.0, f64::INFINITY]), Psi::Psi1, 1e-6).unwrap(),
            OrliczNorm::Infinite
        );
    }
}
