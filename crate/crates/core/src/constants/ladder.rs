//! Horizon ladders for the limit constants.

use serde::{Deserialize, Serialize};

use super::drift::{DriftSpec, Side};
use super::estimate::{
    piterbarg_estimate, piterbarg_family, piterbarg_family_values, CrnRequest, McOptions, PiterbargProblem,
};
use super::{ConstantEstimate, ConstantKind, LadderRung, SlopeDiagnostic};
use crate::error::{Error, Result};

/// Horizons `S0, 2 S0, 4 S0, ...`; stop once successive estimates differ by
/// less than `max(2 pooled SE, rel_tol * value)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderPolicy {
    pub s0: f64,
    pub max_rungs: usize,
    pub rel_tol: f64,
}

impl Default for LadderPolicy {
    fn default() -> Self {
        Self { s0: 1.0, max_rungs: 6, rel_tol: 0.02 }
    }
}

fn settled(prev: &LadderRung, cur: &LadderRung, rel_tol: f64) -> bool {
    let pooled = (prev.std_error.powi(2) + cur.std_error.powi(2)).sqrt();
    (cur.value - prev.value).abs() < (2.0 * pooled).max(rel_tol * cur.value.abs())
}

/// `P^f_{alpha,a}[0, inf)` or `P^f_{alpha,a}(-inf, inf)`.
pub fn piterbarg_limit(
    problem: &PiterbargProblem,
    side: Side,
    opts: &McOptions,
    policy: &LadderPolicy,
) -> Result<ConstantEstimate> {
    let x1 = match side {
        Side::Positive => 0.0,
        Side::Both => f64::NEG_INFINITY,
    };
    piterbarg_limit_interval(problem, x1, f64::INFINITY, opts, policy)
}

/// Finite window of rung `s` for an interval with unbounded end(s).
fn rung_window(x1: f64, x2: f64, s: f64) -> (f64, f64) {
    let lo = if x1.is_finite() { x1 } else { x2.min(0.0) - s };
    let hi = if x2.is_finite() { x2 } else { x1.max(0.0) + s };
    (lo, hi)
}

/// `P^f_{alpha,a}[x1, x2]` where at least one end is infinite. Rung `k`
/// replaces each infinite end by a window reaching `S0 2^k` past the origin
/// (or past the finite end on the same side of it).
pub fn piterbarg_limit_interval(
    problem: &PiterbargProblem,
    x1: f64,
    x2: f64,
    opts: &McOptions,
    policy: &LadderPolicy,
) -> Result<ConstantEstimate> {
    problem.validate()?;
    if x1.is_nan() || x2.is_nan() || x1 >= x2 || x1 == f64::INFINITY || x2 == f64::NEG_INFINITY {
        return Err(Error::InvalidInterval { lo: x1, hi: x2, reason: "need x1 < x2".into() });
    }
    if x1.is_finite() && x2.is_finite() {
        return Err(Error::InvalidInterval { lo: x1, hi: x2, reason: "finite interval needs no ladder".into() });
    }
    if !(policy.s0 > 0.0 && policy.max_rungs >= 2) {
        return Err(Error::domain("ladder needs S0 > 0 and at least two rungs"));
    }
    let side = match (x1, x2) {
        (a, b) if a == 0.0 && b == f64::INFINITY => Some(Side::Positive),
        (a, b) if a == f64::NEG_INFINITY && b == f64::INFINITY => Some(Side::Both),
        _ => None,
    };
    let coercive = if x1.is_finite() && x1 >= 0.0 { Side::Positive } else { Side::Both };
    if !problem.drift.is_coercive(coercive) {
        log::warn!(
            "drift {} is not known to grow on the unbounded side; the ladder may not settle",
            problem.drift.id()
        );
    }
    let mut ladder: Vec<LadderRung> = Vec::new();
    for k in 0..policy.max_rungs {
        let (s1, s2) = rung_window(x1, x2, policy.s0 * 2f64.powi(k as i32));
        let rung_opts = McOptions { rng: opts.rng.derive(k as u64), ..*opts };
        let mut est = piterbarg_estimate(problem, s1, s2, &rung_opts)?;
        let rung = LadderRung { s1, s2, value: est.value, std_error: est.std_error };
        let done = ladder.last().is_some_and(|prev| settled(prev, &rung, policy.rel_tol));
        log::debug!("ladder rung {k}: [{s1}, {s2}] -> {} ± {}", est.value, est.std_error);
        ladder.push(rung);
        if done {
            est.kind = ConstantKind::PiterbargLimit;
            est.side = side;
            est.ladder = ladder;
            return Ok(est);
        }
    }
    Err(Error::NonConvergence { ladder })
}

/// `P[0, x] / P[0, inf)` with both constants evaluated on common paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiterbargRatio {
    pub x: f64,
    pub ratio: f64,
    pub std_error: f64,
    /// Window standing in for `[0, inf)`, taken from a settled ladder.
    pub horizon: f64,
    pub ladder: Vec<LadderRung>,
}

/// Runs the `[0, inf)` ladder to find a settled horizon `S`, then estimates
/// `P[0, x]` and `P[0, max(S, x)]` as one common-path family. Every replicate
/// contributes a pair with numerator at most the denominator, so the ratio
/// lies in `[0, 1]`.
pub fn piterbarg_ratio(problem: &PiterbargProblem, x: f64, opts: &McOptions, policy: &LadderPolicy) -> Result<PiterbargRatio> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("ratio needs x > 0, got {x}")));
    }
    let limit = piterbarg_limit_interval(problem, 0.0, f64::INFINITY, opts, policy)?;
    let horizon = limit.s2.max(x);
    let delta = opts.step_for(0.0, horizon);
    let requests = [CrnRequest::interval(0.0, x), CrnRequest::interval(0.0, horizon)];
    let rng = opts.rng.derive(u64::MAX);
    let values = piterbarg_family_values(problem, 0.0, horizon, delta, &requests, opts.replicates, opts.estimator, rng)?;
    let num: f64 = values.iter().map(|v| v[0]).sum();
    let den: f64 = values.iter().map(|v| v[1]).sum();
    let ratio = num / den;
    // Linearized ratio estimator, batch means over contiguous blocks.
    let mean_den = den / values.len() as f64;
    let batches: Vec<(f64, usize)> = crate::mc::batch_ranges(values.len(), opts.batches.min(values.len()))
        .into_iter()
        .map(|(s, e)| (values[s..e].iter().map(|v| (v[0] - ratio * v[1]) / mean_den).sum(), e - s))
        .collect();
    let (_, std_error) = crate::mc::batch_mean_se(&batches);
    Ok(PiterbargRatio { x, ratio, std_error, horizon, ladder: limit.ladder })
}

/// Horizons for `P^0[0, T] / T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PickandsPolicy {
    pub horizons: Vec<f64>,
    pub rel_tol: f64,
}

impl Default for PickandsPolicy {
    fn default() -> Self {
        Self { horizons: vec![4.0, 8.0, 16.0, 32.0, 64.0], rel_tol: 0.05 }
    }
}

/// `H_{alpha,a}` as `P^0[0, T] / T` at the largest horizon. All rungs share
/// paths; the report includes a least-squares slope of `P^0[0, T]` on `T`.
pub fn pickands_estimate(alpha: &[f64], a: &[f64], opts: &McOptions, policy: &PickandsPolicy) -> Result<ConstantEstimate> {
    if let Some(x) = a.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::domain(format!("Pickands constants need every a_i > 0, got {x}")));
    }
    let mut horizons = policy.horizons.clone();
    horizons.sort_by(f64::total_cmp);
    horizons.dedup();
    if horizons.len() < 2 || horizons[0] <= 0.0 {
        return Err(Error::domain("need at least two positive horizons"));
    }
    let problem = PiterbargProblem::new(alpha.to_vec(), a.to_vec(), DriftSpec::zero(alpha.len()))?;
    let t_max = *horizons.last().expect("nonempty");
    let requests: Vec<CrnRequest> = horizons.iter().map(|&t| CrnRequest::interval(0.0, t)).collect();
    let family = piterbarg_family(&problem, 0.0, t_max, &requests, opts)?;
    let ladder: Vec<LadderRung> = family
        .iter()
        .zip(&horizons)
        .map(|(e, &t)| LadderRung { s1: 0.0, s2: t, value: e.value / t, std_error: e.std_error / t })
        .collect();
    let slope = least_squares(&horizons, &family.iter().map(|e| e.value).collect::<Vec<_>>());
    let k = ladder.len();
    if !settled(&ladder[k - 2], &ladder[k - 1], policy.rel_tol) {
        return Err(Error::NonConvergence { ladder });
    }
    let mut est = family.into_iter().last().expect("nonempty");
    est.kind = ConstantKind::Pickands;
    est.value = ladder[k - 1].value;
    est.std_error = ladder[k - 1].std_error;
    est.ladder = ladder;
    est.slope = Some(slope);
    Ok(est)
}

fn least_squares(x: &[f64], y: &[f64]) -> SlopeDiagnostic {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    SlopeDiagnostic { slope, intercept: my - slope * mx }
}

#[cfg(test)]
mod tests {
    use super::super::drift::Drift;
    use super::*;

    #[test]
    fn least_squares_recovers_line() {
        let d = least_squares(&[1.0, 2.0, 4.0], &[3.0, 5.0, 9.0]);
        assert!((d.slope - 2.0).abs() < 1e-12 && (d.intercept - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_drift_does_not_settle() {
        let p = PiterbargProblem::new(vec![1.0], vec![0.5], DriftSpec::zero(1)).unwrap();
        let opts = McOptions::default().with_replicates(4000).with_delta(1.0 / 32.0);
        match piterbarg_limit(&p, Side::Positive, &opts, &LadderPolicy::default()) {
            Err(Error::NonConvergence { ladder }) => {
                assert_eq!(ladder.len(), 6);
                assert!(ladder[5].value > 4.0 * ladder[0].value);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn positive_linear_drift_settles_near_two() {
        let p = PiterbargProblem::new(vec![1.0], vec![0.5], DriftSpec::new(vec![Drift::LinearPositive { c: 0.5 }])).unwrap();
        let opts = McOptions::default().with_replicates(20_000).with_delta(1.0 / 256.0);
        let e = piterbarg_limit(&p, Side::Positive, &opts, &LadderPolicy::default()).unwrap();
        assert!((e.value - 2.0).abs() < 0.2, "{}", e.value);
        assert_eq!(e.kind, ConstantKind::PiterbargLimit);
        assert!(e.ladder.len() >= 2);
    }

    #[test]
    fn rung_windows_cover_each_unbounded_end() {
        let inf = f64::INFINITY;
        assert_eq!(rung_window(0.0, inf, 4.0), (0.0, 4.0));
        assert_eq!(rung_window(-inf, inf, 4.0), (-4.0, 4.0));
        assert_eq!(rung_window(-inf, -1.0, 4.0), (-5.0, -1.0));
        assert_eq!(rung_window(2.0, inf, 4.0), (2.0, 6.0));
        assert_eq!(rung_window(-3.0, inf, 4.0), (-3.0, 4.0));
    }

    #[test]
    fn ratio_is_a_probability_and_tracks_the_exponential_law() {
        // Same seed and horizon for every x, so the numerators are nested.
        let p = PiterbargProblem::new(vec![1.0], vec![0.5], DriftSpec::new(vec![Drift::LinearPositive { c: 0.5 }])).unwrap();
        let opts = McOptions::default().with_replicates(4000).with_delta(1.0 / 64.0);
        let policy = LadderPolicy { rel_tol: 0.05, ..LadderPolicy::default() };
        let mut last = 0.0;
        for x in [0.25, 0.5, 1.0] {
            let r = piterbarg_ratio(&p, x, &opts, &policy).unwrap();
            assert!(r.ratio > 0.0 && r.ratio <= 1.0, "{r:?}");
            assert!(r.ratio >= last);
            last = r.ratio;
        }
        assert!(piterbarg_ratio(&p, 0.0, &opts, &policy).is_err());
    }

    #[test]
    fn pickands_rejects_zero_a() {
        let opts = McOptions::default().with_replicates(100);
        assert!(pickands_estimate(&[1.0], &[0.0], &opts, &PickandsPolicy::default()).is_err());
    }
}
