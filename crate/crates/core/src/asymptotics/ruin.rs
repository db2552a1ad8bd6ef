//! Simultaneous ruin of `n` independent fBm risk processes
//! `U_i(t) = u d_i + c_i t - B_{alpha_i}(t)` on `[0, T]`.

use serde::{Deserialize, Serialize};

use super::local::{check_x, three_case_constant, CdfValue, LocalCoord, LocalExpansion};
use super::providers::{ConstantsSource, Provenance};
use super::result::{tolerant_cmp, tolerant_eq, AsymptoticResult, FactorKind, Model, Regime, TailArg};
use crate::constants::{Drift, DriftSpec};
use crate::error::{Error, Result};
use crate::paths::fbm::check_alpha;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuinModel {
    pub alpha: Vec<f64>,
    /// Premium rates.
    pub c: Vec<f64>,
    /// Initial capital shares.
    pub d: Vec<f64>,
    pub horizon: f64,
}

impl RuinModel {
    pub fn new(alpha: Vec<f64>, c: Vec<f64>, d: Vec<f64>, horizon: f64) -> Result<Self> {
        let m = Self { alpha, c, d, horizon };
        m.validate()?;
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.alpha.len();
        if n == 0 {
            return Err(Error::domain("need at least one coordinate"));
        }
        if self.c.len() != n || self.d.len() != n {
            return Err(Error::Mismatch(format!(
                "alpha has {n} entries, c has {}, d has {}",
                self.c.len(),
                self.d.len()
            )));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::domain(format!("T must be positive, got {}", self.horizon)));
        }
        for i in 0..n {
            check_alpha(self.alpha[i]).map_err(|e| e.at_coordinate(i))?;
            if !(self.d[i] > 0.0 && self.d[i].is_finite()) {
                return Err(Error::domain(format!("d must be positive, got {}", self.d[i])).at_coordinate(i));
            }
            if !self.c[i].is_finite() {
                return Err(Error::domain(format!("c must be finite, got {}", self.c[i])).at_coordinate(i));
            }
        }
        Ok(())
    }

    pub fn min_alpha(&self) -> f64 {
        self.alpha.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `b_i = d_i^2 / (2 T^{2 alpha_i})`.
    pub fn b(&self) -> Vec<f64> {
        self.alpha
            .iter()
            .zip(&self.d)
            .map(|(&al, &d)| d * d / (2.0 * self.horizon.powf(2.0 * al)))
            .collect()
    }

    /// Slopes `alpha_i d_i^2 / (2 T^{alpha_i + 1})` of the linear drifts.
    pub fn rates(&self) -> Vec<f64> {
        self.alpha
            .iter()
            .zip(&self.d)
            .map(|(&al, &d)| al * d * d / (2.0 * self.horizon.powf(al + 1.0)))
            .collect()
    }

    /// `theta = sum_i alpha_i d_i^2 / (2 T^{alpha_i + 1})`.
    pub fn theta(&self) -> f64 {
        self.rates().iter().sum()
    }

    pub fn effective_a(&self) -> Vec<f64> {
        let alpha = self.min_alpha();
        self.b()
            .into_iter()
            .zip(&self.alpha)
            .map(|(b, &al)| if tolerant_eq(al, alpha) { b } else { 0.0 })
            .collect()
    }

    /// `f_i(t) = alpha_i d_i^2 t / (2 T^{alpha_i + 1})` on `t >= 0`.
    pub fn effective_drift(&self) -> DriftSpec {
        DriftSpec::new(self.rates().into_iter().map(|r| Drift::PowerLaw { c: r, gamma: 1.0 }).collect())
    }

    pub fn regime(&self) -> Regime {
        Regime::from_ordering(tolerant_cmp(self.min_alpha(), 1.0))
    }

    /// The same problem as an expansion at the end point `t0 = T` of the
    /// standard deviation of `B_{alpha_i}(t) / d_i`, with trend `-c_i t / d_i`.
    pub fn local_expansion(&self) -> LocalExpansion {
        let t = self.horizon;
        let coords = (0..self.n())
            .map(|i| {
                let (al, c, d) = (self.alpha[i], self.c[i], self.d[i]);
                LocalCoord {
                    sigma: t.powf(al / 2.0) / d,
                    b: al * t.powf(al / 2.0 - 1.0) / (2.0 * d),
                    beta: 1.0,
                    a: 1.0 / (2.0 * t.powf(al)),
                    alpha: al,
                    c: -c / d,
                    gamma: 1.0,
                    h0: -c * t / d,
                }
            })
            .collect();
        LocalExpansion { t0: t, horizon: t, coords }
    }
}

/// `P{exists t <= T: U_i(t) < 0 for all i}` as
/// `u^{(2/alpha - 2)+} C prod_i Psi((d_i u + c_i T) / T^{alpha_i/2})`.
pub fn prop1_ruin_asymptotic(model: &RuinModel, constants: &dyn ConstantsSource) -> Result<AsymptoticResult> {
    model.validate()?;
    let alpha = model.min_alpha();
    let regime = model.regime();
    let a = model.effective_a();
    let drift = model.effective_drift();
    let constant_factor = three_case_constant(regime, alpha, &a, &drift, 0.0, constants)?;
    let t = model.horizon;
    Ok(AsymptoticResult {
        model: Model::Ruin,
        regime,
        prefactor_exponent: (2.0 / alpha - 2.0).max(0.0),
        constant_factor,
        tail: (0..model.n())
            .map(|i| TailArg::Affine {
                scale: model.d[i],
                offset: model.c[i] * t,
                divisor: t.powf(model.alpha[i] / 2.0),
            })
            .collect(),
        alpha,
        effective_a: a,
        effective_drift: drift,
        inputs: serde_json::to_value(model)?,
    })
}

/// Limit of `P{(T - tau_u) u^2 <= x | tau_u <= T}`.
pub fn prop1_ruin_time_cdf(model: &RuinModel, x: f64, constants: &dyn ConstantsSource) -> Result<CdfValue> {
    model.validate()?;
    check_x(x)?;
    let regime = model.regime();
    let closed = |value| CdfValue { x, value, std_error: None, regime, kind: FactorKind::Closed };
    match regime {
        Regime::Sub => Ok(closed(-(-model.theta() * x).exp_m1())),
        Regime::Critical if x == f64::INFINITY => Ok(closed(1.0)),
        Regime::Critical => {
            let r = constants.piterbarg_ratio(model.min_alpha(), &model.effective_a(), &model.effective_drift(), x)?;
            let kind = match r.provenance {
                Provenance::Closed => FactorKind::Closed,
                Provenance::Estimated => FactorKind::Estimated,
            };
            Ok(CdfValue { x, value: r.value, std_error: r.std_error, regime, kind })
        }
        _ => Ok(CdfValue { x, value: 1.0, std_error: None, regime, kind: FactorKind::One }),
    }
}
