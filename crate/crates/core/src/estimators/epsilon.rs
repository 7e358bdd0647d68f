use serde::{Deserialize, Serialize};

use crate::dictionaries::{DesignSample, DictionaryModel};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonMode {
    Explicit,
    Calibrated,
}

/// Where `max_k ‖h_k‖` comes from: the population Gram diagonal or the
/// empirical column norms `‖h_k‖_{L2(Π_n)}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormSource {
    #[default]
    Population,
    Empirical,
}

fn default_c() -> f64 {
    2.0
}

fn default_a() -> f64 {
    1.0
}

/// `ε = value` (explicit) or `ε = C σ max_k‖h_k‖ √(A ln N / n)` (calibrated).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonRule {
    pub mode: EpsilonMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(rename = "C", default = "default_c")]
    pub c: f64,
    #[serde(rename = "A", default = "default_a")]
    pub a: f64,
    /// Noise scale; experiments fill it from their own `sigma` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub norm_source: NormSource,
}

impl EpsilonRule {
    pub fn explicit(value: f64) -> Self {
        EpsilonRule {
            mode: EpsilonMode::Explicit,
            value: Some(value),
            c: default_c(),
            a: default_a(),
            sigma: None,
            norm_source: NormSource::Population,
        }
    }

    pub fn calibrated(sigma: f64, a: f64, c: f64) -> Self {
        EpsilonRule {
            mode: EpsilonMode::Calibrated,
            value: None,
            c,
            a,
            sigma: Some(sigma),
            norm_source: NormSource::Population,
        }
    }

    pub fn with_norm_source(mut self, source: NormSource) -> Self {
        self.norm_source = source;
        self
    }

    /// Fills `sigma` when unset.
    pub fn with_default_sigma(mut self, sigma: f64) -> Self {
        self.sigma.get_or_insert(sigma);
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            EpsilonMode::Explicit => match self.value {
                Some(v) if v >= 0.0 && v.is_finite() => Ok(()),
                Some(_) => Err(Error::config("epsilon_rule.value", "must be finite and >= 0")),
                None => Err(Error::config("epsilon_rule.value", "required in explicit mode")),
            },
            EpsilonMode::Calibrated => {
                if !(self.c > 0.0 && self.c.is_finite()) {
                    return Err(Error::config("epsilon_rule.C", "must be positive"));
                }
                if !(self.a >= 1.0 && self.a.is_finite()) {
                    return Err(Error::config("epsilon_rule.A", "must be >= 1"));
                }
                match self.sigma {
                    Some(s) if !(s >= 0.0 && s.is_finite()) => {
                        Err(Error::config("epsilon_rule.sigma", "must be finite and >= 0"))
                    }
                    _ => Ok(()),
                }
            }
        }
    }
}

/// Evaluates an [`EpsilonRule`]. Calibration reads `max_k ‖h_k‖` from the
/// model (population) or the design (empirical) per the rule.
pub fn epsilon_calibrate(
    rule: &EpsilonRule,
    model: Option<&DictionaryModel>,
    design: Option<&DesignSample>,
    n_funcs: usize,
    n: usize,
) -> Result<f64> {
    rule.validate()?;
    if rule.mode == EpsilonMode::Explicit {
        return Ok(rule.value.expect("validated"));
    }
    let sigma = rule
        .sigma
        .ok_or_else(|| Error::config("epsilon_rule.sigma", "required in calibrated mode"))?;
    if n == 0 || n_funcs < 2 {
        return Err(Error::invalid("calibration needs n >= 1 and N >= 2"));
    }
    let log_term = rule.a * (n_funcs as f64).ln();
    if log_term > n as f64 {
        return Err(Error::invalid(format!(
            "A·ln N = {log_term:.4} exceeds n = {n}; calibration requires A·ln N <= n"
        )));
    }
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let max_norm = match rule.norm_source {
        NormSource::Population => model
            .ok_or_else(|| Error::invalid("population norms need a dictionary model"))?
            .column_norms(),
        NormSource::Empirical => design
            .ok_or_else(|| Error::invalid("empirical norms need a design sample"))?
            .column_norms(),
    }
    .into_iter()
    .fold(0.0, f64::max);
    Ok(rule.c * sigma * max_norm * (log_term / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionaries::make_gaussian;
    use nalgebra::DMatrix;

    #[test]
    fn calibrated_value() {
        let m = make_gaussian(DMatrix::identity(64, 64)).unwrap();
        let rule = EpsilonRule::calibrated(1.0, 1.0, 2.0);
        let e = epsilon_calibrate(&rule, Some(&m), None, 64, 256).unwrap();
        let want = 2.0 * ((64f64).ln() / 256.0).sqrt();
        assert!((e - want).abs() < 1e-15);
        assert!((e - 0.254_916_747_542_202_2).abs() < 1e-15);
        assert!((e - 0.25493).abs() < 2e-5);
    }

    #[test]
    fn zero_noise_and_precondition() {
        let m = make_gaussian(DMatrix::identity(64, 64)).unwrap();
        let zero = EpsilonRule::calibrated(0.0, 1.0, 2.0);
        assert_eq!(epsilon_calibrate(&zero, Some(&m), None, 64, 256).unwrap(), 0.0);
        let rule = EpsilonRule::calibrated(1.0, 1.0, 2.0);
        assert!(epsilon_calibrate(&rule, Some(&m), None, 64, 4).is_err());
    }

    #[test]
    fn explicit_and_json() {
        let rule = EpsilonRule::explicit(0.3);
        assert_eq!(epsilon_calibrate(&rule, None, None, 10, 5).unwrap(), 0.3);
        let parsed: EpsilonRule =
            serde_json::from_str(r#"{"mode":"calibrated","C":3,"sigma":0.5}"#).unwrap();
        assert_eq!(parsed.a, 1.0);
        assert_eq!(parsed.c, 3.0);
        assert!(serde_json::from_str::<EpsilonRule>(r#"{"mode":"explicit","valu":1}"#).is_err());
    }
}
