//! Assembled asymptotic formulas `u^e * C * prod_i Psi(arg_i(u))`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::providers::{ConstantValue, Provenance};
use super::psi::log_tail_psi;
use super::quad::DriftIntegral;
use crate::constants::DriftSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    ThresholdFamily,
    UniqueMaximum,
    LocallyStationary,
    LocallyStationaryPlateau,
    Ruin,
}

/// Which branch of a three-case formula applies. `Plateau` is the
/// single-formula case of a locally stationary process with a flat maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Sub,
    Critical,
    Super,
    Plateau,
}

impl Regime {
    /// Compares the roughness `alpha`-side quantity against the curvature side.
    pub(crate) fn from_ordering(o: Ordering) -> Self {
        match o {
            Ordering::Less => Regime::Sub,
            Ordering::Equal => Regime::Critical,
            Ordering::Greater => Regime::Super,
        }
    }
}

/// Ordering with a relative tolerance of 1e-12, so that exponents computed
/// by different arithmetic still select the critical case.
pub(crate) fn tolerant_cmp(x: f64, y: f64) -> Ordering {
    if x == y || (x.is_finite() && y.is_finite() && (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0)) {
        Ordering::Equal
    } else {
        x.total_cmp(&y)
    }
}

pub(crate) fn tolerant_eq(x: f64, y: f64) -> bool {
    tolerant_cmp(x, y) == Ordering::Equal
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    Closed,
    Estimated,
    One,
}

/// The constant `C` with its ingredients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantFactor {
    pub kind: FactorKind,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_integral: Option<DriftIntegral>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constants: Vec<ConstantValue>,
}

impl ConstantFactor {
    pub fn one() -> Self {
        Self { kind: FactorKind::One, value: 1.0, stderr: None, drift_integral: None, constants: Vec::new() }
    }

    /// `constant * integral`, or the constant alone.
    pub fn from_parts(constant: ConstantValue, integral: Option<DriftIntegral>) -> Self {
        let scale = integral.map_or(1.0, |i| i.value);
        let kind = match constant.provenance {
            Provenance::Closed => FactorKind::Closed,
            Provenance::Estimated => FactorKind::Estimated,
        };
        Self {
            kind,
            value: constant.value * scale,
            stderr: constant.std_error.map(|s| s * scale),
            drift_integral: integral,
            constants: vec![constant],
        }
    }
}

/// Argument of one tail factor `Psi(arg(u))`.
#[derive(Clone)]
pub enum TailArg {
    /// `(scale u + offset) / divisor`
    Affine { scale: f64, offset: f64, divisor: f64 },
    /// `m(u) / divisor` for a user threshold function.
    Threshold { name: String, m: Arc<dyn Fn(f64) -> f64 + Send + Sync>, divisor: f64 },
}

impl TailArg {
    pub fn at(&self, u: f64) -> f64 {
        match self {
            TailArg::Affine { scale, offset, divisor } => (scale * u + offset) / divisor,
            TailArg::Threshold { m, divisor, .. } => m(u) / divisor,
        }
    }

    fn describe(&self) -> Value {
        match self {
            TailArg::Affine { scale, offset, divisor } => json!({"scale": scale, "offset": offset, "divisor": divisor}),
            TailArg::Threshold { name, divisor, .. } => json!({"threshold": name, "divisor": divisor}),
        }
    }
}

impl fmt::Debug for TailArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

#[derive(Debug, Clone)]
pub struct AsymptoticResult {
    pub model: Model,
    pub regime: Regime,
    pub prefactor_exponent: f64,
    pub constant_factor: ConstantFactor,
    pub tail: Vec<TailArg>,
    /// Common roughness index `alpha = min alpha_i`.
    pub alpha: f64,
    /// `a_i` entering the constant, zero where `alpha_i > alpha`.
    pub effective_a: Vec<f64>,
    /// Drift entering the constant or the drift integral.
    pub effective_drift: DriftSpec,
    pub inputs: Value,
}

impl AsymptoticResult {
    pub fn log_tail_product(&self, u: f64) -> f64 {
        self.tail.iter().map(|t| log_tail_psi(t.at(u))).sum()
    }

    pub fn tail_product(&self, u: f64) -> f64 {
        self.log_tail_product(u).exp()
    }

    /// Natural log of [`Self::value`]; finite even where the value underflows.
    pub fn log_value(&self, u: f64) -> f64 {
        self.prefactor_exponent * u.ln() + self.constant_factor.value.ln() + self.log_tail_product(u)
    }

    pub fn value(&self, u: f64) -> f64 {
        self.log_value(u).exp()
    }

    /// `{model, regime, prefactor_exponent, constant_factor, inputs, value_at}`.
    pub fn to_json(&self, us: &[f64]) -> Value {
        let value_at: Vec<Value> = us
            .iter()
            .map(|&u| json!({"u": u, "value": self.value(u), "log_value": self.log_value(u)}))
            .collect();
        json!({
            "model": self.model,
            "regime": self.regime,
            "prefactor_exponent": self.prefactor_exponent,
            "constant_factor": self.constant_factor,
            "alpha": self.alpha,
            "effective_a": self.effective_a,
            "effective_drift": self.effective_drift.id(),
            "tail": self.tail.iter().map(TailArg::describe).collect::<Vec<_>>(),
            "inputs": self.inputs,
            "value_at": value_at,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerant_comparison() {
        assert_eq!(tolerant_cmp(2.0, 2.0 + 1e-14), Ordering::Equal);
        assert_eq!(tolerant_cmp(1.0, 1.0 + 1e-9), Ordering::Less);
        assert_eq!(tolerant_cmp(1.0, f64::INFINITY), Ordering::Less);
        assert_eq!(tolerant_cmp(f64::INFINITY, f64::INFINITY), Ordering::Equal);
    }

    #[test]
    fn value_is_product_of_parts() {
        let r = AsymptoticResult {
            model: Model::Ruin,
            regime: Regime::Critical,
            prefactor_exponent: 0.5,
            constant_factor: ConstantFactor::from_parts(ConstantValue::closed(2.0, "test"), None),
            tail: vec![TailArg::Affine { scale: 1.0, offset: 0.0, divisor: 1.0 }; 2],
            alpha: 1.0,
            effective_a: vec![0.5, 0.5],
            effective_drift: DriftSpec::zero(2),
            inputs: Value::Null,
        };
        let u: f64 = 3.0;
        let psi = super::super::psi::tail_psi(u);
        assert!((r.value(u) - u.sqrt() * 2.0 * psi * psi).abs() < 1e-15);
        assert!(r.log_value(80.0).is_finite() && r.log_value(80.0) < -6000.0);
        let j = r.to_json(&[2.0]);
        assert_eq!(j["regime"], "critical");
        assert_eq!(j["constant_factor"]["kind"], "closed");
        assert_eq!(j["value_at"][0]["u"], 2.0);
    }
}
