//! Threshold families: coordinates whose variance is maximal at 0 and
//! whose threshold drift scales like `u^-lambda_i`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::providers::{deterministic_piterbarg, ConstantsSource};
use super::quad::drift_integral;
use super::result::{tolerant_cmp, tolerant_eq, AsymptoticResult, ConstantFactor, Model, Regime, TailArg};
use crate::constants::{Drift, DriftSpec};
use crate::error::{Error, Result};

/// A threshold function `u -> m_u` with `m_u / u -> 1`.
#[derive(Clone)]
pub struct Threshold {
    pub name: String,
    pub m: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Threshold {
    pub fn new(name: impl Into<String>, m: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), m: Arc::new(m) }
    }
}

impl fmt::Debug for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Threshold({})", self.name)
    }
}

#[derive(Debug, Clone)]
pub struct ThresholdCoord {
    pub lambda: f64,
    pub drift: Drift,
    /// Limit standard deviation at 0.
    pub sigma: f64,
    pub a: f64,
    pub alpha: f64,
    /// `None` means `m_u = u`.
    pub threshold: Option<Threshold>,
}

impl ThresholdCoord {
    pub fn new(lambda: f64, drift: Drift, sigma: f64, a: f64, alpha: f64) -> Self {
        Self { lambda, drift, sigma, a, alpha, threshold: None }
    }

    pub fn with_threshold(mut self, t: Threshold) -> Self {
        self.threshold = Some(t);
        self
    }
}

#[derive(Debug, Clone)]
pub struct ThresholdFamilySpec {
    pub coords: Vec<ThresholdCoord>,
    pub x1: f64,
    pub x2: f64,
}

impl ThresholdFamilySpec {
    pub fn new(coords: Vec<ThresholdCoord>, x1: f64, x2: f64) -> Self {
        Self { coords, x1, x2 }
    }

    /// `lambda = max lambda_i`.
    pub fn lambda(&self) -> f64 {
        self.coords.iter().map(|c| c.lambda).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `alpha = min alpha_i`.
    pub fn alpha(&self) -> f64 {
        self.coords.iter().map(|c| c.alpha).fold(f64::INFINITY, f64::min)
    }

    /// `f_i / sigma_i^2` on coordinates with `lambda_i = lambda`, zero elsewhere.
    pub fn effective_drift(&self) -> DriftSpec {
        let lambda = self.lambda();
        DriftSpec::new(
            self.coords
                .iter()
                .map(|c| if tolerant_eq(c.lambda, lambda) { c.drift.scaled(1.0 / (c.sigma * c.sigma)) } else { Drift::Zero })
                .collect(),
        )
    }

    /// `a_i / sigma_i^2` on coordinates with `alpha_i = alpha`, zero elsewhere.
    pub fn effective_a(&self) -> Vec<f64> {
        let alpha = self.alpha();
        self.coords
            .iter()
            .map(|c| if tolerant_eq(c.alpha, alpha) { c.a / (c.sigma * c.sigma) } else { 0.0 })
            .collect()
    }

    fn describe(&self) -> serde_json::Value {
        let end = |x: f64| if x.is_finite() { json!(x) } else { json!(x.to_string()) };
        json!({
            "x1": end(self.x1),
            "x2": end(self.x2),
            "coords": self.coords.iter().map(|c| json!({
                "lambda": c.lambda, "drift": c.drift.id(), "sigma": c.sigma, "a": c.a, "alpha": c.alpha,
                "threshold": c.threshold.as_ref().map(|t| t.name.clone()),
            })).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClauseStatus {
    Pass,
    Fail,
    Unverified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub status: ClauseStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub clauses: Vec<Clause>,
}

impl AssumptionReport {
    /// No clause failed; unverified clauses do not block.
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.status != ClauseStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().filter(|c| c.status == ClauseStatus::Fail)
    }

    fn push(&mut self, name: &str, status: ClauseStatus, detail: impl Into<String>) {
        self.clauses.push(Clause { name: name.into(), status, detail: detail.into() });
    }
}

pub const CLAUSE_PARAMETERS: &str = "parameters";
pub const CLAUSE_MAX_LAMBDA: &str = "max lambda_i > 0";
pub const CLAUSE_INTERVAL: &str = "x1 < x2";
pub const CLAUSE_ORIGIN: &str = "f_i(0) = 0";
/// Negative drift components must not dominate at infinity.
pub const CLAUSE_DOMINANCE: &str = "drift dominance";
pub const CLAUSE_REGULAR_VARIATION: &str = "regular variation";
pub const CLAUSE_THRESHOLD: &str = "m_u / u -> 1";

/// Sample points `|t| = 10^(k/4)` for `k = 0..=24` on the unbounded side(s).
fn far_samples(x1: f64, x2: f64) -> Vec<f64> {
    let mut ts = Vec::new();
    for k in 0..=24 {
        let r = 10f64.powf(k as f64 / 4.0);
        if x2 == f64::INFINITY && r > x1 {
            ts.push(r);
        }
        if x1 == f64::NEG_INFINITY && -r < x2 {
            ts.push(-r);
        }
    }
    ts
}

/// Regular variation with positive index at the unbounded end(s).
fn regularly_varying(f: &Drift, x1: f64) -> ClauseStatus {
    let leading_positive = |terms: &[crate::constants::PowerTerm]| {
        terms
            .iter()
            .filter(|p| p.c != 0.0)
            .max_by(|a, b| a.gamma.total_cmp(&b.gamma))
            .is_some_and(|p| p.c > 0.0 && p.gamma > 0.0)
    };
    match f {
        Drift::User(_) => ClauseStatus::Unverified,
        Drift::LinearPositive { c } => {
            if *c > 0.0 && x1 >= 0.0 {
                ClauseStatus::Pass
            } else {
                ClauseStatus::Fail
            }
        }
        f => match f.power_terms() {
            Some(ts) if leading_positive(&ts) => ClauseStatus::Pass,
            _ => ClauseStatus::Fail,
        },
    }
}

pub fn check_assumptions_thm1(spec: &ThresholdFamilySpec) -> AssumptionReport {
    use ClauseStatus::*;
    let mut report = AssumptionReport { clauses: Vec::new() };

    let mut bad = Vec::new();
    if spec.coords.is_empty() {
        bad.push("no coordinates".to_string());
    }
    for (i, c) in spec.coords.iter().enumerate() {
        if !(c.sigma > 0.0 && c.sigma.is_finite()) {
            bad.push(format!("sigma_{i} = {} must be positive", c.sigma));
        }
        if !(c.a > 0.0 && c.a.is_finite()) {
            bad.push(format!("a_{i} = {} must be positive", c.a));
        }
        if !(c.alpha > 0.0 && c.alpha <= 2.0) {
            bad.push(format!("alpha_{i} = {} must lie in (0, 2]", c.alpha));
        }
        if !(c.lambda >= 0.0 && c.lambda.is_finite()) {
            bad.push(format!("lambda_{i} = {} must be finite and nonnegative", c.lambda));
        }
        if let Err(e) = c.drift.validate() {
            bad.push(format!("drift {i}: {e}"));
        }
    }
    if bad.is_empty() {
        report.push(CLAUSE_PARAMETERS, Pass, "sigma, a, alpha, lambda in range");
    } else {
        report.push(CLAUSE_PARAMETERS, Fail, bad.join("; "));
    }

    let lambda = spec.lambda();
    report.push(CLAUSE_MAX_LAMBDA, if lambda > 0.0 { Pass } else { Fail }, format!("max lambda_i = {lambda}"));

    let ordered = spec.x1 < spec.x2 && spec.x1 != f64::INFINITY && spec.x2 != f64::NEG_INFINITY;
    report.push(CLAUSE_INTERVAL, if ordered { Pass } else { Fail }, format!("[{}, {}]", spec.x1, spec.x2));

    let nonzero: Vec<String> = spec
        .coords
        .iter()
        .enumerate()
        .filter(|(_, c)| c.drift.eval(0.0).abs() > 1e-12)
        .map(|(i, c)| format!("f_{i}(0) = {}", c.drift.eval(0.0)))
        .collect();
    if nonzero.is_empty() {
        report.push(CLAUSE_ORIGIN, Pass, "every drift vanishes at 0");
    } else {
        report.push(CLAUSE_ORIGIN, Fail, nonzero.join("; "));
    }

    let unbounded = spec.x1 == f64::NEG_INFINITY || spec.x2 == f64::INFINITY;
    if unbounded && ordered && lambda > 0.0 {
        let eff = spec.effective_drift();
        let ratio = |t: f64| {
            let signed: f64 = eff.coords.iter().map(|f| f.eval(t)).sum();
            let total: f64 = eff.coords.iter().map(|f| f.eval(t).abs()).sum();
            if total > 0.0 { signed / total } else { f64::NAN }
        };
        let tail: Vec<(f64, f64)> =
            far_samples(spec.x1, spec.x2).into_iter().filter(|t| t.abs() >= 1e3).map(|t| (t, ratio(t))).collect();
        let worst = tail.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1));
        match worst {
            Some((t, r)) if r.is_nan() => report.push(CLAUSE_DOMINANCE, Fail, format!("effective drift vanishes at t = {t}")),
            Some((t, r)) if r <= 1e-6 => {
                report.push(CLAUSE_DOMINANCE, Fail, format!("signed/absolute drift ratio {r:e} at t = {t}"))
            }
            Some((_, r)) => report.push(CLAUSE_DOMINANCE, Pass, format!("ratio at least {r} for |t| in [1e3, 1e6]")),
            None => report.push(CLAUSE_DOMINANCE, Pass, "no unbounded side"),
        }

        let mut statuses = Vec::new();
        for (i, c) in spec.coords.iter().enumerate() {
            if tolerant_eq(c.lambda, lambda) {
                statuses.push((i, regularly_varying(&c.drift, spec.x1)));
            }
        }
        let detail = statuses.iter().map(|(i, s)| format!("f_{i}: {s:?}")).collect::<Vec<_>>().join(", ");
        let status = if statuses.iter().any(|s| s.1 == Fail) {
            Fail
        } else if statuses.iter().any(|s| s.1 == Unverified) {
            Unverified
        } else {
            Pass
        };
        report.push(CLAUSE_REGULAR_VARIATION, status, detail);
    }

    for (i, c) in spec.coords.iter().enumerate() {
        if let Some(t) = &c.threshold {
            let dev = |u: f64| ((t.m)(u) / u - 1.0).abs();
            let (d3, d6) = (dev(1e3), dev(1e6));
            let ok = d6 < 1e-2 && d6 <= d3 + 1e-12;
            let detail = format!("threshold {} ({i}): |m_u/u - 1| = {d3:e} at u=1e3, {d6:e} at u=1e6", t.name);
            report.push(CLAUSE_THRESHOLD, if ok { Pass } else { Fail }, detail);
        }
    }
    report
}

/// Exact asymptotics of `P{exists t in [x1, x2]: X_u(t) > m_u}` for a
/// threshold family, as `u^{(2/alpha - lambda)+} C prod_i Psi(m_{u,i}/sigma_i)`.
pub fn thm1_asymptotic(spec: &ThresholdFamilySpec, constants: &dyn ConstantsSource) -> Result<AsymptoticResult> {
    let report = check_assumptions_thm1(spec);
    if let Some(c) = report.failures().next() {
        return Err(Error::Assumption(format!("{}: {}", c.name, c.detail)));
    }
    let lambda = spec.lambda();
    let alpha = spec.alpha();
    let a = spec.effective_a();
    let drift = spec.effective_drift();
    let regime = Regime::from_ordering(tolerant_cmp(lambda, 2.0 / alpha));
    let constant_factor = match regime {
        Regime::Sub => {
            let h = constants.pickands(alpha, &a)?;
            ConstantFactor::from_parts(h, Some(drift_integral(&drift, spec.x1, spec.x2)?))
        }
        Regime::Critical => ConstantFactor::from_parts(constants.piterbarg(alpha, &a, &drift, spec.x1, spec.x2)?, None),
        _ => ConstantFactor::from_parts(deterministic_piterbarg(&drift, spec.x1, spec.x2)?, None),
    };
    let tail = spec
        .coords
        .iter()
        .map(|c| match &c.threshold {
            Some(t) => TailArg::Threshold { name: t.name.clone(), m: t.m.clone(), divisor: c.sigma },
            None => TailArg::Affine { scale: 1.0, offset: 0.0, divisor: c.sigma },
        })
        .collect();
    Ok(AsymptoticResult {
        model: Model::ThresholdFamily,
        regime,
        prefactor_exponent: (2.0 / alpha - lambda).max(0.0),
        constant_factor,
        tail,
        alpha,
        effective_a: a,
        effective_drift: drift,
        inputs: spec.describe(),
    })
}
