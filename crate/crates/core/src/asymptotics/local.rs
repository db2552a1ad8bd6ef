//! Processes with a unique maximum of the standard deviation (or of the
//! trend, for locally stationary processes) and the induced laws of the
//! scaled ruin time.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::providers::ConstantsSource;
use super::quad::drift_integral;
use super::result::{
    tolerant_cmp, tolerant_eq, AsymptoticResult, ConstantFactor, FactorKind, Model, Regime, TailArg,
};
use crate::constants::{Drift, DriftSpec, PowerTerm};
use crate::error::{Error, Result};

fn finite_or_text(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

pub(crate) fn power_drift(terms: Vec<PowerTerm>) -> Drift {
    match terms.len() {
        0 => Drift::Zero,
        1 => Drift::PowerLaw { c: terms[0].c, gamma: terms[0].gamma },
        _ => Drift::PowerSum(terms),
    }
}

/// `-inf` for an interior point, `0` at either end of `[0, T]`.
pub(crate) fn lower_limit(t0: f64, horizon: f64) -> Result<f64> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::domain(format!("horizon must be positive, got {horizon}")));
    }
    if !(0.0..=horizon).contains(&t0) {
        return Err(Error::domain(format!("t0 = {t0} lies outside [0, {horizon}]")));
    }
    Ok(if t0 == 0.0 || t0 == horizon { 0.0 } else { f64::NEG_INFINITY })
}

fn check_alpha_a(alpha: f64, a: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 2], got {alpha}")));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("a must be positive, got {a}")));
    }
    Ok(())
}

/// The constant of a three-case formula on `[q, inf)`:
/// `H * int e^{-sum f}`, `P^f[q, inf)` or 1.
pub(crate) fn three_case_constant(
    regime: Regime,
    alpha: f64,
    a: &[f64],
    drift: &DriftSpec,
    q: f64,
    constants: &dyn ConstantsSource,
) -> Result<ConstantFactor> {
    Ok(match regime {
        Regime::Sub => {
            let h = constants.pickands(alpha, a)?;
            ConstantFactor::from_parts(h, Some(drift_integral(drift, q, f64::INFINITY)?))
        }
        Regime::Critical => ConstantFactor::from_parts(constants.piterbarg(alpha, a, drift, q, f64::INFINITY)?, None),
        _ => ConstantFactor::one(),
    })
}

/// Limit law of the scaled ruin time at `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfValue {
    pub x: f64,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    pub regime: Regime,
    pub kind: FactorKind,
}

pub(crate) fn check_x(x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("scaled time must be positive, got {x}")))
    }
}

/// `int_0^x e^{-sum f} / int_0^inf e^{-sum f}`, `P[0, x] / P[0, inf)` or 1.
pub(crate) fn three_case_cdf(
    regime: Regime,
    alpha: f64,
    a: &[f64],
    drift: &DriftSpec,
    x: f64,
    constants: &dyn ConstantsSource,
) -> Result<CdfValue> {
    check_x(x)?;
    let closed = |value| CdfValue { x, value, std_error: None, regime, kind: FactorKind::Closed };
    if x == f64::INFINITY {
        return Ok(closed(1.0));
    }
    match regime {
        Regime::Sub => {
            let num = drift_integral(drift, 0.0, x)?.value;
            let den = drift_integral(drift, 0.0, f64::INFINITY)?.value;
            Ok(closed((num / den).min(1.0)))
        }
        Regime::Critical => {
            let r = constants.piterbarg_ratio(alpha, a, drift, x)?;
            let kind = match r.provenance {
                super::providers::Provenance::Closed => FactorKind::Closed,
                super::providers::Provenance::Estimated => FactorKind::Estimated,
            };
            Ok(CdfValue { x, value: r.value, std_error: r.std_error, regime, kind })
        }
        _ => Ok(CdfValue { x, value: 1.0, std_error: None, regime, kind: FactorKind::One }),
    }
}

/// Expansions at the unique maximizer `t0` of the standard deviation:
/// `sigma_i(t) = sigma_i - b_i |t - t0|^beta_i`,
/// `1 - r_i(s, t) ~ a_i |t - s|^alpha_i`,
/// `h_i(t) = h_i(t0) - c_i |t - t0|^gamma_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalCoord {
    pub sigma: f64,
    pub b: f64,
    /// May be infinite, which removes the variance term from the drift.
    pub beta: f64,
    pub a: f64,
    pub alpha: f64,
    pub c: f64,
    pub gamma: f64,
    pub h0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalExpansion {
    pub t0: f64,
    pub horizon: f64,
    pub coords: Vec<LocalCoord>,
}

impl LocalExpansion {
    pub fn validate(&self) -> Result<()> {
        lower_limit(self.t0, self.horizon)?;
        if self.coords.is_empty() {
            return Err(Error::domain("need at least one coordinate"));
        }
        for (i, c) in self.coords.iter().enumerate() {
            let at = |e: Error| e.at_coordinate(i);
            if !(c.sigma > 0.0 && c.sigma.is_finite()) {
                return Err(at(Error::domain(format!("sigma(t0) must be positive, got {}", c.sigma))));
            }
            if c.b == 0.0 {
                return Err(at(Error::Precondition(
                    "b_i = 0 means a locally stationary coordinate; use thm3_asymptotic".into(),
                )));
            }
            if !(c.b > 0.0 && c.b.is_finite()) {
                return Err(at(Error::domain(format!("b must be positive, got {}", c.b))));
            }
            if !(c.beta > 0.0) {
                return Err(at(Error::domain(format!("beta must be positive, got {}", c.beta))));
            }
            check_alpha_a(c.alpha, c.a).map_err(at)?;
            if !(c.c.is_finite() && c.h0.is_finite()) {
                return Err(at(Error::domain("trend coefficients must be finite")));
            }
            let allowed = if c.c < 0.0 { c.gamma >= c.beta / 2.0 } else { c.gamma > 0.0 };
            if !allowed || c.gamma.is_nan() || (c.gamma == f64::INFINITY && c.c != 0.0) {
                return Err(at(Error::Assumption(format!(
                    "trend sign rule: need c < 0 with gamma >= beta/2, or c >= 0 with gamma > 0; got c = {}, gamma = {}, beta = {}",
                    c.c, c.gamma, c.beta
                ))));
            }
        }
        if !self.beta().is_finite() {
            return Err(Error::domain("beta = min(beta_i, 2 gamma_i) must be finite"));
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.coords.iter().map(|c| c.alpha).fold(f64::INFINITY, f64::min)
    }

    /// `min_i min(beta_i, 2 gamma_i)` with the trend term skipped where `c_i = 0`.
    pub fn beta(&self) -> f64 {
        self.coords
            .iter()
            .map(|c| if c.c != 0.0 { c.beta.min(2.0 * c.gamma) } else { c.beta })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn q(&self) -> Result<f64> {
        lower_limit(self.t0, self.horizon)
    }

    /// `f_i(t) = (b_i / sigma_i^3) |t|^beta_i 1{beta_i = beta} + (c_i / sigma_i^2) |t|^gamma_i 1{2 gamma_i = beta}`.
    pub fn effective_drift(&self) -> DriftSpec {
        let beta = self.beta();
        DriftSpec::new(
            self.coords
                .iter()
                .map(|c| {
                    let mut terms = Vec::new();
                    if tolerant_eq(c.beta, beta) {
                        terms.push(PowerTerm { c: c.b / c.sigma.powi(3), gamma: c.beta });
                    }
                    if c.c != 0.0 && tolerant_eq(2.0 * c.gamma, beta) {
                        terms.push(PowerTerm { c: c.c / (c.sigma * c.sigma), gamma: c.gamma });
                    }
                    power_drift(terms)
                })
                .collect(),
        )
    }

    /// `a_i / sigma_i^2` on coordinates with `alpha_i = alpha`.
    pub fn effective_a(&self) -> Vec<f64> {
        let alpha = self.alpha();
        self.coords
            .iter()
            .map(|c| if tolerant_eq(c.alpha, alpha) { c.a / (c.sigma * c.sigma) } else { 0.0 })
            .collect()
    }

    pub fn regime(&self) -> Regime {
        Regime::from_ordering(tolerant_cmp(self.alpha(), self.beta()))
    }

    fn describe(&self) -> serde_json::Value {
        json!({
            "t0": self.t0,
            "horizon": self.horizon,
            "coords": self.coords.iter().map(|c| json!({
                "sigma": c.sigma, "b": c.b, "beta": finite_or_text(c.beta), "a": c.a, "alpha": c.alpha,
                "c": c.c, "gamma": finite_or_text(c.gamma), "h0": c.h0,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Tail asymptotics at the unique maximizer of the standard deviation:
/// `u^{(2/alpha - 2/beta)+} C prod_i Psi((u - h_i(t0)) / sigma_i(t0))`.
pub fn thm2_asymptotic(exp: &LocalExpansion, constants: &dyn ConstantsSource) -> Result<AsymptoticResult> {
    exp.validate()?;
    let alpha = exp.alpha();
    let beta = exp.beta();
    let regime = exp.regime();
    let a = exp.effective_a();
    let drift = exp.effective_drift();
    let constant_factor = three_case_constant(regime, alpha, &a, &drift, exp.q()?, constants)?;
    Ok(AsymptoticResult {
        model: Model::UniqueMaximum,
        regime,
        prefactor_exponent: (2.0 / alpha - 2.0 / beta).max(0.0),
        constant_factor,
        tail: exp
            .coords
            .iter()
            .map(|c| TailArg::Affine { scale: 1.0, offset: -c.h0, divisor: c.sigma })
            .collect(),
        alpha,
        effective_a: a,
        effective_drift: drift,
        inputs: exp.describe(),
    })
}

/// Limit of `P{(T - tau_u) u^{2/beta} <= x | tau_u <= T}` for a maximizer
/// at `t0 = T`.
pub fn corollary1_ruin_time_cdf(exp: &LocalExpansion, x: f64, constants: &dyn ConstantsSource) -> Result<CdfValue> {
    exp.validate()?;
    if exp.t0 != exp.horizon {
        return Err(Error::Precondition(format!("the maximizer must be the end point T = {}, got t0 = {}", exp.horizon, exp.t0)));
    }
    three_case_cdf(exp.regime(), exp.alpha(), &exp.effective_a(), &exp.effective_drift(), x, constants)
}

/// A unit-variance coordinate with `1 - r(t, t + s) ~ a |s|^alpha` near
/// `t0` and trend `h(t) = h_max - c |t - t0|^gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryCoord {
    pub a: f64,
    pub alpha: f64,
    pub c: f64,
    pub gamma: f64,
    pub h_max: f64,
}

/// Trend maximized at the single point `t0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquePoint {
    pub t0: f64,
    pub horizon: f64,
    pub coords: Vec<StationaryCoord>,
}

impl UniquePoint {
    pub fn validate(&self) -> Result<()> {
        lower_limit(self.t0, self.horizon)?;
        if self.coords.is_empty() {
            return Err(Error::domain("need at least one coordinate"));
        }
        for (i, c) in self.coords.iter().enumerate() {
            let at = |e: Error| e.at_coordinate(i);
            check_alpha_a(c.alpha, c.a).map_err(at)?;
            if !(c.c >= 0.0 && c.c.is_finite() && c.h_max.is_finite()) {
                return Err(at(Error::Precondition(format!("need finite c >= 0, got {}", c.c))));
            }
            if c.c > 0.0 && !(c.gamma > 0.0 && c.gamma.is_finite()) {
                return Err(at(Error::domain(format!("gamma must be positive, got {}", c.gamma))));
            }
        }
        if !self.coords.iter().any(|c| c.c > 0.0) {
            return Err(Error::Precondition("need max c_i > 0".into()));
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.coords.iter().map(|c| c.alpha).fold(f64::INFINITY, f64::min)
    }

    /// `min gamma_i` over coordinates with `c_i != 0`.
    pub fn gamma(&self) -> f64 {
        self.coords.iter().filter(|c| c.c != 0.0).map(|c| c.gamma).fold(f64::INFINITY, f64::min)
    }

    /// `f_i(t) = c_i |t|^gamma 1{gamma_i = gamma}`.
    pub fn effective_drift(&self) -> DriftSpec {
        let gamma = self.gamma();
        DriftSpec::new(
            self.coords
                .iter()
                .map(|c| {
                    if c.c != 0.0 && tolerant_eq(c.gamma, gamma) {
                        power_drift(vec![PowerTerm { c: c.c, gamma: c.gamma }])
                    } else {
                        Drift::Zero
                    }
                })
                .collect(),
        )
    }

    pub fn effective_a(&self) -> Vec<f64> {
        let alpha = self.alpha();
        self.coords.iter().map(|c| if tolerant_eq(c.alpha, alpha) { c.a } else { 0.0 }).collect()
    }

    pub fn regime(&self) -> Regime {
        Regime::from_ordering(tolerant_cmp(self.alpha(), 2.0 * self.gamma()))
    }
}

/// Trend maximal on the whole plateau `[lower, upper]`.
#[derive(Clone)]
pub struct Plateau {
    pub lower: f64,
    pub upper: f64,
    pub horizon: f64,
    pub alpha: Vec<f64>,
    /// `t -> (a_1(t), ..., a_n(t))`.
    pub a: Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
    pub h_max: Vec<f64>,
}

impl fmt::Debug for Plateau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Plateau")
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("horizon", &self.horizon)
            .field("alpha", &self.alpha)
            .field("h_max", &self.h_max)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum Thm3Kind {
    UniquePoint(UniquePoint),
    Plateau(Plateau),
}

pub const PLATEAU_NODES: usize = 9;

/// Chebyshev points of the first kind on `[lo, hi]` with the weights of the
/// interpolatory rule through them.
pub fn chebyshev_rule(lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    use std::f64::consts::PI;
    let half = 0.5 * (hi - lo);
    (0..n)
        .map(|k| {
            let theta = (2 * k + 1) as f64 * PI / (2 * n) as f64;
            let s: f64 = (1..=n / 2).map(|j| (2.0 * j as f64 * theta).cos() / (4.0 * (j * j) as f64 - 1.0)).sum();
            let w = 2.0 / n as f64 * (1.0 - 2.0 * s);
            (0.5 * (lo + hi) + half * theta.cos(), w * half)
        })
        .collect()
}

fn plateau_asymptotic(p: &Plateau, constants: &dyn ConstantsSource) -> Result<AsymptoticResult> {
    lower_limit(p.lower, p.horizon)?;
    lower_limit(p.upper, p.horizon)?;
    if !(p.lower < p.upper) {
        return Err(Error::InvalidInterval { lo: p.lower, hi: p.upper, reason: "the plateau needs A < B".into() });
    }
    let n = p.alpha.len();
    if n == 0 || p.h_max.len() != n {
        return Err(Error::Mismatch(format!("alpha has {n} entries, h_max has {}", p.h_max.len())));
    }
    for (i, &al) in p.alpha.iter().enumerate() {
        check_alpha_a(al, 1.0).map_err(|e| e.at_coordinate(i))?;
    }
    let alpha = p.alpha.iter().copied().fold(f64::INFINITY, f64::min);
    let mut value = 0.0;
    let mut var = 0.0;
    let mut estimated = false;
    let mut used = Vec::new();
    for (t, w) in chebyshev_rule(p.lower, p.upper, PLATEAU_NODES) {
        let at = (p.a)(t);
        if at.len() != n {
            return Err(Error::Mismatch(format!("a({t}) has {} entries, expected {n}", at.len())));
        }
        if let Some(bad) = at.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::domain(format!("a({t}) must be positive, got {bad}")));
        }
        let eff: Vec<f64> = at.iter().zip(&p.alpha).map(|(&x, &al)| if tolerant_eq(al, alpha) { x } else { 0.0 }).collect();
        let h = constants.pickands(alpha, &eff)?;
        value += w * h.value;
        if let Some(se) = h.std_error {
            var += (w * se).powi(2);
            estimated = true;
        }
        used.push(h);
    }
    let constant_factor = ConstantFactor {
        kind: if estimated { FactorKind::Estimated } else { FactorKind::Closed },
        value,
        stderr: estimated.then(|| var.sqrt()),
        drift_integral: None,
        constants: used,
    };
    let mid = (p.a)(0.5 * (p.lower + p.upper));
    Ok(AsymptoticResult {
        model: Model::LocallyStationaryPlateau,
        regime: Regime::Plateau,
        prefactor_exponent: 2.0 / alpha,
        constant_factor,
        tail: p.h_max.iter().map(|&h| TailArg::Affine { scale: 1.0, offset: -h, divisor: 1.0 }).collect(),
        alpha,
        effective_a: mid.iter().zip(&p.alpha).map(|(&x, &al)| if tolerant_eq(al, alpha) { x } else { 0.0 }).collect(),
        effective_drift: DriftSpec::zero(n),
        inputs: json!({"lower": p.lower, "upper": p.upper, "horizon": p.horizon, "alpha": p.alpha, "h_max": p.h_max}),
    })
}

/// Tail asymptotics of a locally stationary process with trend maximal at a
/// single point or on a plateau.
pub fn thm3_asymptotic(kind: &Thm3Kind, constants: &dyn ConstantsSource) -> Result<AsymptoticResult> {
    let p = match kind {
        Thm3Kind::Plateau(p) => return plateau_asymptotic(p, constants),
        Thm3Kind::UniquePoint(p) => p,
    };
    p.validate()?;
    let alpha = p.alpha();
    let gamma = p.gamma();
    let regime = p.regime();
    let a = p.effective_a();
    let drift = p.effective_drift();
    let constant_factor = three_case_constant(regime, alpha, &a, &drift, lower_limit(p.t0, p.horizon)?, constants)?;
    Ok(AsymptoticResult {
        model: Model::LocallyStationary,
        regime,
        prefactor_exponent: (2.0 / alpha - 1.0 / gamma).max(0.0),
        constant_factor,
        tail: p.coords.iter().map(|c| TailArg::Affine { scale: 1.0, offset: -c.h_max, divisor: 1.0 }).collect(),
        alpha,
        effective_a: a,
        effective_drift: drift,
        inputs: serde_json::to_value(p)?,
    })
}

/// Limit of `P{(T - tau_u) u^{1/gamma} <= x | tau_u <= T}` for a trend
/// maximized at `t0 = T`.
pub fn corollary2_ruin_time_cdf(p: &UniquePoint, x: f64, constants: &dyn ConstantsSource) -> Result<CdfValue> {
    p.validate()?;
    if p.t0 != p.horizon {
        return Err(Error::Precondition(format!("the maximizer must be the end point T = {}, got t0 = {}", p.horizon, p.t0)));
    }
    three_case_cdf(p.regime(), p.alpha(), &p.effective_a(), &p.effective_drift(), x, constants)
}

#[cfg(test)]
mod tests {
    use super::super::providers::{ClosedFormConstants, ConstantValue};
    use super::*;
    use std::f64::consts::PI;

    fn coord(alpha: f64, b: f64, beta: f64, c: f64, gamma: f64) -> LocalCoord {
        LocalCoord { sigma: 1.0, b, beta, a: 1.0, alpha, c, gamma, h0: 0.0 }
    }

    fn expansion(t0: f64, coords: Vec<LocalCoord>) -> LocalExpansion {
        LocalExpansion { t0, horizon: 1.0, coords }
    }

    #[test]
    fn interior_and_boundary_gaussian_integrals() {
        let interior = thm2_asymptotic(&expansion(0.5, vec![coord(1.0, 1.0, 2.0, 0.0, 1.0)]), &ClosedFormConstants).unwrap();
        assert_eq!(interior.regime, Regime::Sub);
        assert!((interior.constant_factor.drift_integral.unwrap().value - PI.sqrt()).abs() < 1e-14);
        // H_{1,1} = 1.
        assert!((interior.constant_factor.value - PI.sqrt()).abs() < 1e-14);
        assert_eq!(interior.prefactor_exponent, 1.0);

        let boundary = thm2_asymptotic(&expansion(1.0, vec![coord(1.0, 1.0, 2.0, 0.0, 1.0)]), &ClosedFormConstants).unwrap();
        assert!((boundary.constant_factor.drift_integral.unwrap().value - PI.sqrt() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn super_regime_is_exactly_one() {
        let r = thm2_asymptotic(&expansion(0.3, vec![coord(1.5, 1.0, 1.0, 0.0, 1.0)]), &ClosedFormConstants).unwrap();
        assert_eq!(r.regime, Regime::Super);
        assert_eq!(r.constant_factor.kind, FactorKind::One);
        assert_eq!(r.constant_factor.value, 1.0);
        assert_eq!(r.prefactor_exponent, 0.0);
    }

    #[test]
    fn trend_term_joins_when_it_sets_beta() {
        // beta_1 = 2, 2 gamma_1 = 2: both terms enter.
        let e = expansion(0.5, vec![LocalCoord { sigma: 2.0, b: 8.0, beta: 2.0, a: 1.0, alpha: 1.0, c: 4.0, gamma: 1.0, h0: 0.0 }]);
        let f = &e.effective_drift().coords[0];
        assert!((f.eval(2.0) - (1.0 * 4.0 + 1.0 * 2.0)).abs() < 1e-15);
        assert_eq!(e.beta(), 2.0);
        // Trend steeper than the variance: only the variance term.
        let e = expansion(0.5, vec![coord(1.0, 1.0, 1.0, 1.0, 2.0)]);
        assert_eq!(e.effective_drift().coords[0].eval(2.0), 2.0);
        // Trend flatter: gamma sets beta = 1.
        let e = expansion(0.5, vec![coord(1.0, 1.0, 3.0, 1.0, 0.5)]);
        assert_eq!(e.beta(), 1.0);
        assert_eq!(e.effective_drift().coords[0].eval(4.0), 2.0);
    }

    #[test]
    fn sign_rule_is_enforced() {
        let ok = expansion(0.5, vec![coord(1.0, 1.0, 2.0, -1.0, 1.0)]);
        assert!(ok.validate().is_ok());
        let bad = expansion(0.5, vec![coord(1.0, 1.0, 2.0, -1.0, 0.5)]);
        assert!(matches!(bad.validate(), Err(Error::Coordinate { source, .. }) if matches!(*source, Error::Assumption(_))));
        let zero_b = expansion(0.5, vec![coord(1.0, 0.0, 2.0, 1.0, 1.0)]);
        let err = zero_b.validate().unwrap_err().to_string();
        assert!(err.contains("thm3_asymptotic"), "{err}");
    }

    #[test]
    fn corollary1_cases() {
        let sub = expansion(1.0, vec![coord(1.0, 0.5, 2.0, 0.0, 1.0), coord(1.0, 0.5, 2.0, 0.0, 1.0)]);
        let sub_lin = expansion(1.0, vec![coord(0.5, 0.75, 1.0, 0.0, 1.0)]);
        for x in [0.1, 1.0, 3.0] {
            let v = corollary1_ruin_time_cdf(&sub_lin, x, &ClosedFormConstants).unwrap();
            assert!((v.value - (1.0 - (-0.75 * x).exp())).abs() < 1e-12);
        }
        assert_eq!(corollary1_ruin_time_cdf(&sub, f64::INFINITY, &ClosedFormConstants).unwrap().value, 1.0);
        let sup = expansion(1.0, vec![coord(2.0, 1.0, 1.0, 0.0, 1.0)]);
        for x in [1e-3, 1.0, 1e3] {
            assert_eq!(corollary1_ruin_time_cdf(&sup, x, &ClosedFormConstants).unwrap().value, 1.0);
        }
        assert!(matches!(corollary1_ruin_time_cdf(&sup, 0.0, &ClosedFormConstants), Err(Error::Precondition(_))));
        let interior = expansion(0.5, vec![coord(2.0, 1.0, 1.0, 0.0, 1.0)]);
        assert!(corollary1_ruin_time_cdf(&interior, 1.0, &ClosedFormConstants).is_err());
    }

    fn point(t0: f64, alpha: f64, c: f64, gamma: f64) -> UniquePoint {
        UniquePoint { t0, horizon: 1.0, coords: vec![StationaryCoord { a: 1.0, alpha, c, gamma, h_max: 0.0 }] }
    }

    #[test]
    fn unique_point_cases() {
        let sub = thm3_asymptotic(&Thm3Kind::UniquePoint(point(0.5, 1.0, 1.0, 1.0)), &ClosedFormConstants).unwrap();
        assert_eq!(sub.regime, Regime::Sub);
        assert!((sub.constant_factor.drift_integral.unwrap().value - 2.0).abs() < 1e-14);
        let sup = thm3_asymptotic(&Thm3Kind::UniquePoint(point(0.5, 1.5, 1.0, 0.5)), &ClosedFormConstants).unwrap();
        assert_eq!(sup.constant_factor.kind, FactorKind::One);
        assert_eq!(sup.prefactor_exponent, 0.0);
        assert!(point(0.5, 1.0, -1.0, 1.0).validate().is_err());
        assert!(point(0.5, 1.0, 0.0, 1.0).validate().is_err());
    }

    #[test]
    fn corollary2_mirrors_corollary1() {
        let sub = point(1.0, 1.0, 0.5, 1.0);
        let v = corollary2_ruin_time_cdf(&sub, 2.0, &ClosedFormConstants).unwrap();
        assert!((v.value - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert_eq!(corollary2_ruin_time_cdf(&sub, f64::INFINITY, &ClosedFormConstants).unwrap().value, 1.0);
        let sup = point(1.0, 1.5, 1.0, 0.5);
        assert_eq!(corollary2_ruin_time_cdf(&sup, 0.3, &ClosedFormConstants).unwrap().value, 1.0);
        // Critical with drift c |t|^{1/2}: no closed-form ratio.
        let crit = UniquePoint { t0: 1.0, horizon: 1.0, coords: vec![StationaryCoord { a: 0.5, alpha: 1.0, c: 0.5, gamma: 0.5, h_max: 0.0 }] };
        assert!(matches!(corollary2_ruin_time_cdf(&crit, 1.0, &ClosedFormConstants), Err(Error::NoClosedForm(_))));
        let crit = UniquePoint { t0: 1.0, horizon: 1.0, coords: vec![StationaryCoord { a: 0.5, alpha: 2.0, c: 0.5, gamma: 1.0, h_max: 0.0 }] };
        assert_eq!(crit.regime(), Regime::Critical);
    }

    #[test]
    fn chebyshev_rule_is_interpolatory() {
        let rule = chebyshev_rule(-1.0, 3.0, PLATEAU_NODES);
        for deg in 0..=8 {
            let approx: f64 = rule.iter().map(|(t, w)| w * t.powi(deg)).sum();
            let exact = (3f64.powi(deg + 1) - (-1f64).powi(deg + 1)) / (deg + 1) as f64;
            assert!((approx - exact).abs() < 1e-10 * exact.abs().max(1.0), "degree {deg}");
        }
    }

    #[test]
    fn plateau_with_constant_a() {
        let p = Plateau {
            lower: 0.2,
            upper: 0.7,
            horizon: 1.0,
            alpha: vec![2.0],
            a: Arc::new(|_| vec![3.0]),
            h_max: vec![0.0],
        };
        let r = thm3_asymptotic(&Thm3Kind::Plateau(p.clone()), &ClosedFormConstants).unwrap();
        let h = (3.0 / PI).sqrt();
        assert!((r.constant_factor.value - 0.5 * h).abs() < 1e-14);
        assert_eq!(r.prefactor_exponent, 1.0);
        assert_eq!(r.regime, Regime::Plateau);
        let swapped = Plateau { lower: 0.7, upper: 0.2, ..p };
        assert!(thm3_asymptotic(&Thm3Kind::Plateau(swapped), &ClosedFormConstants).is_err());
    }

    #[test]
    fn plateau_integrates_a_varying_pickands_constant() {
        // H_{1, a(t)} = a(t) = 1 + t^2 on [0, 1] integrates to 4/3.
        let p = Plateau {
            lower: 0.0,
            upper: 1.0,
            horizon: 1.0,
            alpha: vec![1.0, 2.0],
            a: Arc::new(|t| vec![1.0 + t * t, 5.0]),
            h_max: vec![0.0, 0.0],
        };
        let r = thm3_asymptotic(&Thm3Kind::Plateau(p), &ClosedFormConstants).unwrap();
        assert!((r.constant_factor.value - 4.0 / 3.0).abs() < 1e-13);
        assert_eq!(r.constant_factor.kind, FactorKind::Closed);
        assert_eq!(r.constant_factor.constants.len(), PLATEAU_NODES);
        assert!(r.constant_factor.constants.iter().all(|c: &ConstantValue| c.detail.starts_with("H_{1")));
    }
}
