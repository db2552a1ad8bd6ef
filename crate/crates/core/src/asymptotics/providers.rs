//! Sources of Pickands and Piterbarg constants for the asymptotic formulas.
//!
//! [`ClosedFormConstants`] knows the handful of exact values, with
//! [`MonteCarloConstants`] estimating everything else. [`Layered`] tries one
//! and then the other.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::psi::log_tail_psi;
use super::quad::integrate_decaying;
use crate::constants::{
    piterbarg_ratio, tabulate, ConstantEstimate, Drift, DriftSpec, LadderPolicy, McOptions, PickandsPolicy,
    PiterbargProblem, TableRequest, TableTarget,
};
use crate::error::{Error, Result};
use crate::orthant::orthant_parts;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Closed,
    Estimated,
}

/// A constant together with where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantValue {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    pub provenance: Provenance,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<ConstantEstimate>,
}

impl ConstantValue {
    pub fn closed(value: f64, detail: impl Into<String>) -> Self {
        Self { value, std_error: None, provenance: Provenance::Closed, detail: detail.into(), estimate: None }
    }

    pub fn estimated(estimate: ConstantEstimate, detail: impl Into<String>) -> Self {
        Self {
            value: estimate.value,
            std_error: Some(estimate.std_error),
            provenance: Provenance::Estimated,
            detail: detail.into(),
            estimate: Some(estimate),
        }
    }
}

/// Provider of `H_{alpha,a}` and `P^f_{alpha,a}[x1, x2]` with a common
/// `alpha` for every coordinate. Entries with `a_i = 0` are deterministic
/// coordinates; they drop out entirely when their drift is zero as well.
pub trait ConstantsSource: Sync {
    fn pickands(&self, alpha: f64, a: &[f64]) -> Result<ConstantValue>;
    /// Either end may be infinite.
    fn piterbarg(&self, alpha: f64, a: &[f64], drift: &DriftSpec, x1: f64, x2: f64) -> Result<ConstantValue>;
    /// `P[0, x] / P[0, inf)`.
    fn piterbarg_ratio(&self, alpha: f64, a: &[f64], drift: &DriftSpec, x: f64) -> Result<ConstantValue>;
}

fn active_a(a: &[f64]) -> Vec<f64> {
    a.iter().copied().filter(|&x| x > 0.0).collect()
}

/// Removes coordinates with `a_i = 0` and zero drift, which contribute a
/// factor of one.
fn reduce(a: &[f64], drift: &DriftSpec) -> Result<(Vec<f64>, DriftSpec)> {
    if a.len() != drift.n() {
        return Err(Error::Mismatch(format!("a has {} entries, drift has {}", a.len(), drift.n())));
    }
    let (ka, kd): (Vec<f64>, Vec<Drift>) = a
        .iter()
        .zip(&drift.coords)
        .filter(|(&ai, f)| !(ai == 0.0 && matches!(f, Drift::Zero)))
        .map(|(&ai, f)| (ai, f.clone()))
        .unzip();
    Ok((ka, DriftSpec::new(kd)))
}

/// `int exp(sum w) 1{exists t in [x1, x2]: -f(t) > w} dw`, the Piterbarg
/// constant when every `a_i = 0`.
///
/// Exact when every coordinate is a sum of power laws with nonnegative
/// coefficients: the curve is then maximal, coordinate by coordinate, at the
/// point of the interval closest to 0. Otherwise the curve is sampled and
/// the orthant integral of the samples is returned.
pub fn deterministic_piterbarg(drift: &DriftSpec, x1: f64, x2: f64) -> Result<ConstantValue> {
    if x1.is_nan() || x2.is_nan() || x1 > x2 {
        return Err(Error::InvalidInterval { lo: x1, hi: x2, reason: "need x1 <= x2".into() });
    }
    let n = drift.n();
    if n == 0 {
        return Ok(ConstantValue::closed(1.0, "empty product"));
    }
    let nearest = 0f64.clamp(x1, x2);
    let monotone = drift.coords.iter().all(|f| match f {
        Drift::LinearPositive { c } => *c >= 0.0 && nearest >= 0.0,
        f => f.power_terms().is_some_and(|ts| ts.iter().all(|p| p.c >= 0.0)),
    });
    if monotone {
        return Ok(ConstantValue::closed((-drift.sum(nearest)).exp(), "curve maximum at the point nearest 0"));
    }
    const REACH: f64 = 64.0;
    let lo = x1.max(-REACH);
    let hi = x2.min(REACH);
    let mut times: Vec<f64> = Vec::new();
    if lo <= hi {
        times.extend((0..=4096).map(|k| lo + (hi - lo) * k as f64 / 4096.0));
    }
    for k in 0..=200 {
        let r = REACH * (1e6 / REACH).powf(k as f64 / 200.0);
        if x2 >= r {
            times.push(r);
        }
        if x1 <= -r {
            times.push(-r);
        }
    }
    times.push(nearest);
    let flat: Vec<f64> = times.iter().flat_map(|&t| drift.coords.iter().map(move |f| -f.eval(t))).collect();
    let (log_scale, reduced) = orthant_parts(n, &flat)?;
    Ok(ConstantValue::closed(log_scale.exp() * reduced, "orthant integral of the sampled curve"))
}

/// `E exp(sup_{0 <= t <= x} (sigma B(t) - mu t))` for standard Brownian B,
/// from the law of the drifted running maximum.
fn brownian_exp_sup(a: f64, c: f64, x: f64) -> Result<f64> {
    let sigma = (2.0 * a).sqrt();
    let mu = a + c;
    if x == f64::INFINITY {
        if c > 0.0 {
            return Ok(1.0 + a / c);
        }
        return Err(Error::domain("P[0, inf) diverges without positive drift"));
    }
    let s = sigma * x.sqrt();
    let k = 2.0 * mu / (sigma * sigma);
    let tail = |m: f64| {
        let first = (m + log_tail_psi((m + mu * x) / s)).exp();
        let second = ((1.0 - k) * m + log_tail_psi((m - mu * x) / s)).exp();
        first + second
    };
    Ok(1.0 + integrate_decaying(tail, 0.0, f64::INFINITY, 1e-12)?)
}

/// Exact values: `H_{1,a} = a`, `H_{2,a} = sqrt(a / pi)` for one active
/// coordinate, the one-dimensional Brownian `P^{ct}_{1,a}[0, x]`, and every
/// constant whose coordinates are all deterministic.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClosedFormConstants;

impl ClosedFormConstants {
    fn brownian_linear(&self, alpha: f64, a: &[f64], drift: &DriftSpec, x1: f64, x2: f64) -> Option<Result<f64>> {
        if alpha != 1.0 || a.len() != 1 || a[0] <= 0.0 {
            return None;
        }
        // On t >= 0 each of these is c t; the two-sided ones are symmetric.
        let (c, symmetric) = match &drift.coords[0] {
            Drift::Zero => (0.0, true),
            Drift::PowerLaw { c, gamma } if *gamma == 1.0 => (*c, true),
            Drift::LinearPositive { c } => (*c, false),
            _ => return None,
        };
        if c < 0.0 {
            return None;
        }
        if x1 == 0.0 && x2 > 0.0 {
            Some(brownian_exp_sup(a[0], c, x2))
        } else if symmetric && x2 == 0.0 && x1 < 0.0 {
            Some(brownian_exp_sup(a[0], c, -x1))
        } else {
            None
        }
    }
}

impl ConstantsSource for ClosedFormConstants {
    fn pickands(&self, alpha: f64, a: &[f64]) -> Result<ConstantValue> {
        let active = active_a(a);
        match (&active[..], alpha) {
            (&[a1], al) if al == 1.0 => Ok(ConstantValue::closed(a1, "H_{1,a} = a")),
            (&[a1], al) if al == 2.0 => Ok(ConstantValue::closed((a1 / PI).sqrt(), "H_{2,a} = sqrt(a/pi)")),
            _ => Err(Error::NoClosedForm(format!("H_{{{alpha},{a:?}}}"))),
        }
    }

    fn piterbarg(&self, alpha: f64, a: &[f64], drift: &DriftSpec, x1: f64, x2: f64) -> Result<ConstantValue> {
        let (a, drift) = reduce(a, drift)?;
        if a.iter().all(|&x| x == 0.0) {
            return deterministic_piterbarg(&drift, x1, x2);
        }
        match self.brownian_linear(alpha, &a, &drift, x1, x2) {
            Some(v) => Ok(ConstantValue::closed(v?, "Brownian running maximum with linear drift")),
            None => Err(Error::NoClosedForm(format!("P^{}_{{{alpha},{a:?}}}[{x1}, {x2}]", drift.id()))),
        }
    }

    fn piterbarg_ratio(&self, alpha: f64, a: &[f64], drift: &DriftSpec, x: f64) -> Result<ConstantValue> {
        let num = self.piterbarg(alpha, a, drift, 0.0, x)?;
        let den = self.piterbarg(alpha, a, drift, 0.0, f64::INFINITY)?;
        // P[0, x] <= P[0, inf); the clamp only removes rounding.
        Ok(ConstantValue::closed((num.value / den.value).min(1.0), "ratio of closed forms"))
    }
}

/// Monte Carlo estimates through the constants table, memoized per request.
pub struct MonteCarloConstants {
    pub opts: McOptions,
    pub ladder: LadderPolicy,
    pub pickands: PickandsPolicy,
    /// Persistent table; `None` keeps results in memory only.
    pub cache_dir: Option<PathBuf>,
    memo: Mutex<HashMap<String, ConstantValue>>,
}

impl MonteCarloConstants {
    pub fn new(opts: McOptions) -> Self {
        Self {
            opts,
            ladder: LadderPolicy::default(),
            pickands: PickandsPolicy::default(),
            cache_dir: None,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_cache_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.cache_dir = Some(dir.into());
        self
    }

    fn lookup(&self, req: TableRequest, detail: String) -> Result<ConstantValue> {
        let key = req.key();
        if let Some(v) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(v.clone());
        }
        let estimate = match &self.cache_dir {
            Some(dir) => tabulate(std::slice::from_ref(&req), dir)?.remove(0).estimate,
            None => req.compute()?,
        };
        let v = ConstantValue::estimated(estimate, detail);
        self.memo.lock().expect("memo lock").insert(key, v.clone());
        Ok(v)
    }
}

impl ConstantsSource for MonteCarloConstants {
    fn pickands(&self, alpha: f64, a: &[f64]) -> Result<ConstantValue> {
        let a = active_a(a);
        if a.is_empty() {
            return Err(Error::domain("Pickands constant needs some a_i > 0"));
        }
        let req = TableRequest {
            alpha: vec![alpha; a.len()],
            drift: DriftSpec::zero(a.len()),
            a,
            target: TableTarget::Pickands { policy: self.pickands.clone() },
            opts: self.opts,
        };
        self.lookup(req, "Pickands ladder".into())
    }

    fn piterbarg(&self, alpha: f64, a: &[f64], drift: &DriftSpec, x1: f64, x2: f64) -> Result<ConstantValue> {
        let (a, drift) = reduce(a, drift)?;
        if a.iter().all(|&x| x == 0.0) {
            return deterministic_piterbarg(&drift, x1, x2);
        }
        let target = if x1.is_finite() && x2.is_finite() {
            TableTarget::Piterbarg { s1: x1, s2: x2 }
        } else {
            TableTarget::LimitInterval {
                lower: x1.is_finite().then_some(x1),
                upper: x2.is_finite().then_some(x2),
                policy: self.ladder,
            }
        };
        let req = TableRequest { alpha: vec![alpha; a.len()], a, drift, target, opts: self.opts };
        self.lookup(req, format!("Piterbarg estimate on [{x1}, {x2}]"))
    }

    fn piterbarg_ratio(&self, alpha: f64, a: &[f64], drift: &DriftSpec, x: f64) -> Result<ConstantValue> {
        let (a, drift) = reduce(a, drift)?;
        let problem = PiterbargProblem::new(vec![alpha; a.len()], a, drift)?;
        let r = piterbarg_ratio(&problem, x, &self.opts, &self.ladder)?;
        Ok(ConstantValue {
            value: r.ratio,
            std_error: Some(r.std_error),
            provenance: Provenance::Estimated,
            detail: format!("common-path ratio with [0, inf) replaced by [0, {}]", r.horizon),
            estimate: None,
        })
    }
}

/// Tries `first`, falling back to `then` when `first` has no closed form.
pub struct Layered<A, B> {
    pub first: A,
    pub then: B,
}

impl<A: ConstantsSource, B: ConstantsSource> Layered<A, B> {
    pub fn new(first: A, then: B) -> Self {
        Self { first, then }
    }
}

impl<A: ConstantsSource, B: ConstantsSource> ConstantsSource for Layered<A, B> {
    fn pickands(&self, alpha: f64, a: &[f64]) -> Result<ConstantValue> {
        match self.first.pickands(alpha, a) {
            Err(Error::NoClosedForm(_)) => self.then.pickands(alpha, a),
            r => r,
        }
    }

    fn piterbarg(&self, alpha: f64, a: &[f64], drift: &DriftSpec, x1: f64, x2: f64) -> Result<ConstantValue> {
        match self.first.piterbarg(alpha, a, drift, x1, x2) {
            Err(Error::NoClosedForm(_)) => self.then.piterbarg(alpha, a, drift, x1, x2),
            r => r,
        }
    }

    fn piterbarg_ratio(&self, alpha: f64, a: &[f64], drift: &DriftSpec, x: f64) -> Result<ConstantValue> {
        match self.first.piterbarg_ratio(alpha, a, drift, x) {
            Err(Error::NoClosedForm(_)) => self.then.piterbarg_ratio(alpha, a, drift, x),
            r => r,
        }
    }
}

/// Closed forms where they exist, Monte Carlo otherwise.
pub fn default_constants(opts: McOptions) -> Layered<ClosedFormConstants, MonteCarloConstants> {
    Layered::new(ClosedFormConstants, MonteCarloConstants::new(opts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_pickands_values() {
        let c = ClosedFormConstants;
        assert_eq!(c.pickands(1.0, &[0.0, 4.0]).unwrap().value, 4.0);
        assert!((c.pickands(2.0, &[1.0]).unwrap().value - 0.564_189_583_547_756_3).abs() < 1e-15);
        assert!(matches!(c.pickands(1.5, &[1.0]), Err(Error::NoClosedForm(_))));
        assert!(matches!(c.pickands(1.0, &[1.0, 1.0]), Err(Error::NoClosedForm(_))));
    }

    #[test]
    fn brownian_linear_drift_limit() {
        let c = ClosedFormConstants;
        let drift = DriftSpec::new(vec![Drift::LinearPositive { c: 0.5 }]);
        let v = c.piterbarg(1.0, &[0.5], &drift, 0.0, f64::INFINITY).unwrap();
        assert_eq!(v.value, 2.0);
        assert_eq!(v.provenance, Provenance::Closed);
        // The finite-horizon law converges to the limit and is increasing in x.
        let mut last = 1.0;
        for x in [0.1, 1.0, 10.0, 100.0] {
            let p = c.piterbarg(1.0, &[0.5], &drift, 0.0, x).unwrap().value;
            assert!(p > last && p <= 2.0, "{x}: {p}");
            last = p;
        }
        assert!((last - 2.0).abs() < 1e-8);
    }

    #[test]
    fn brownian_zero_drift_grows_like_pickands() {
        // P^0_{1,a}[0, T] grows with slope H_{1,a} = a.
        let c = ClosedFormConstants;
        let drift = DriftSpec::zero(1);
        let p1 = c.piterbarg(1.0, &[2.0], &drift, 0.0, 50.0).unwrap().value;
        let p2 = c.piterbarg(1.0, &[2.0], &drift, 0.0, 100.0).unwrap().value;
        assert!(((p2 - p1) / 50.0 - 2.0).abs() < 1e-6);
    }

    #[test]
    fn deterministic_coordinates() {
        let c = ClosedFormConstants;
        let drift = DriftSpec::new(vec![Drift::PowerLaw { c: 1.0, gamma: 2.0 }; 2]);
        let v = c.piterbarg(1.0, &[0.0, 0.0], &drift, 1.0, 3.0).unwrap();
        assert!((v.value - (-2.0f64).exp()).abs() < 1e-15);
        let v = c.piterbarg(1.0, &[0.0, 0.0], &drift, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert_eq!(v.value, 1.0);
        // A zero coordinate with zero drift is dropped before the closed form applies.
        let mixed = DriftSpec::new(vec![Drift::LinearPositive { c: 0.5 }, Drift::Zero]);
        assert_eq!(c.piterbarg(1.0, &[0.5, 0.0], &mixed, 0.0, f64::INFINITY).unwrap().value, 2.0);
    }

    #[test]
    fn sampled_curve_matches_hand_value() {
        // Apexes (-t, t), t in [0, 1]. Slicing by w2: w2 <= 0 gives
        // int e^{w2} dw2 = 1, each w2 in (0, 1] gives e^{w2} e^{-w2} = 1.
        let drift = DriftSpec::new(vec![
            Drift::user("t", false, |t| t),
            Drift::user("-t", false, |t| -t),
        ]);
        let v = deterministic_piterbarg(&drift, 0.0, 1.0).unwrap().value;
        assert!((v - 2.0).abs() < 1e-3, "{v}");
    }

    #[test]
    fn layered_falls_back() {
        let layered = default_constants(McOptions::default().with_replicates(400).with_delta(1.0 / 16.0));
        let v = layered.pickands(1.0, &[3.0]).unwrap();
        assert_eq!(v.provenance, Provenance::Closed);
        let drift = DriftSpec::new(vec![Drift::PowerLaw { c: 1.0, gamma: 2.0 }]);
        let v = layered.piterbarg(1.5, &[1.0], &drift, 0.0, 1.0).unwrap();
        assert_eq!(v.provenance, Provenance::Estimated);
        assert!(v.std_error.is_some());
        let again = layered.piterbarg(1.5, &[1.0], &drift, 0.0, 1.0).unwrap();
        assert_eq!(v, again);
    }
}
