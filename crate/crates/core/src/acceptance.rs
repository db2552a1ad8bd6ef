//! The acceptance criteria as runnable checks, shared by the `acceptance`
//! test target and `vgx verify`.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    default_constants, prop1_ruin_asymptotic, prop1_ruin_time_cdf, tail_psi, thm2_asymptotic, thm3_asymptotic,
    AsymptoticResult, ClosedFormConstants, ConstantsSource, FactorKind, IntegralMethod, Layered, LocalCoord,
    LocalExpansion, MonteCarloConstants, Regime, RuinModel, StationaryCoord, Thm3Kind, UniquePoint,
};
use crate::constants::{
    pickands_estimate, piterbarg_estimate, piterbarg_family_values, piterbarg_limit, CrnRequest, Drift, DriftSpec,
    Estimator, LadderPolicy, McOptions, PickandsPolicy, PiterbargProblem, Side,
};
use crate::error::Result;
use crate::exceedance::{
    compare_ladder, estimate_exceedance_levels, estimate_exceedance_nested, estimate_ruin_levels, sample_ruin_time,
};
use crate::mc::{self, PairKernel};
use crate::orthant::{oracle, orthant_integral, pareto_prune, ApexSet};
use crate::paths::{CoordSpec, FbmGenerator, ProcessSpec, Trend};
use crate::rng::RngPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// Criteria 1, 2, 3, 8 and 9; a few minutes.
    Fast,
    /// Every criterion at its stated size.
    Full,
}

impl Suite {
    pub fn criteria(self) -> Vec<u8> {
        match self {
            Suite::Fast => vec![1, 2, 3, 8, 9],
            Suite::Full => (1..=9).collect(),
        }
    }
}

/// Deliberate defects for checking that the suite catches them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Simulate fBm with a roughness index 5% too large.
    Covariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { seed: 1, fault: None }
    }
}

/// Criteria that cannot pass as stated, with the reason.
pub const KNOWN_GAPS: &[(u8, &str)] = &[(
    7,
    "(T - tau_u) u^2 is at most T u^2 = 9, where the limit law still has mass e^{-9/4} = 0.105 above; \
     the distance is at least 0.105 for every sample",
)];

pub fn known_gap(id: u8) -> Option<&'static str> {
    KNOWN_GAPS.iter().find(|g| g.0 == id).map(|g| g.1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_gap: Option<String>,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let status = match (self.passed, &self.known_gap) {
            (true, _) => "PASS".to_string(),
            (false, Some(_)) => "FAIL (expected: known gap)".to_string(),
            (false, None) => "FAIL".to_string(),
        };
        format!("criterion {} [{}]: {status} in {:.1}s; {}", self.id, self.name, self.seconds, self.detail)
    }
}

pub fn criterion_name(id: u8) -> &'static str {
    match id {
        1 => "fbm exactness",
        2 => "orthant oracle equivalence",
        3 => "single-point identity",
        4 => "classical pickands constants",
        5 => "reflection-principle closure",
        6 => "two-dimensional ruin ladder",
        7 => "ruin-time exponential limit",
        8 => "regime dispatch table",
        9 => "invariant suites",
        _ => "unknown",
    }
}

pub fn run_criterion(id: u8, opts: &SuiteOptions) -> CriterionResult {
    let start = Instant::now();
    let seed = RngPolicy::seed(opts.seed).derive(id as u64);
    let outcome = match id {
        1 => fbm_exactness(seed, opts.fault),
        2 => orthant_equivalence(seed),
        3 => single_point(seed),
        4 => classical_pickands(seed),
        5 => reflection_closure(seed),
        6 => two_dimensional_ruin(seed),
        7 => ruin_time_limit(seed),
        8 => regime_table(seed),
        9 => invariants(seed),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (mut passed, mut detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    let limit = match id {
        1 => Some(60.0),
        3 => Some(120.0),
        4 => Some(3.0 * 600.0),
        _ => None,
    };
    if let Some(limit) = limit {
        if seconds >= limit {
            passed = false;
            detail.push_str(&format!("; runtime {seconds:.0}s exceeds {limit:.0}s"));
        }
    }
    CriterionResult {
        id,
        name: criterion_name(id).into(),
        passed,
        detail,
        seconds,
        known_gap: known_gap(id).map(String::from),
    }
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions, mut report: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    suite
        .criteria()
        .into_iter()
        .map(|id| {
            let r = run_criterion(id, opts);
            report(&r);
            r
        })
        .collect()
}

type Outcome = Result<(bool, String)>;

/// Running sums of `x_s x_t` and `(x_s x_t)^2` over the upper triangle.
struct CovarianceKernel {
    generator: FbmGenerator,
    scale: f64,
    rng: RngPolicy,
}

struct Moments {
    sum: Vec<f64>,
    sq: Vec<f64>,
}

impl PairKernel for CovarianceKernel {
    type State = (crate::paths::fbm::FbmWorkspace, [Vec<f64>; 2]);
    type Acc = Moments;

    fn state(&self) -> Self::State {
        let len = self.generator.steps() + 1;
        (self.generator.workspace(), [vec![0.0; len], vec![0.0; len]])
    }

    fn acc(&self) -> Moments {
        let len = self.generator.steps() + 1;
        Moments { sum: vec![0.0; len * (len + 1) / 2], sq: vec![0.0; len * (len + 1) / 2] }
    }

    fn generate(&self, st: &mut Self::State, pair: u64) {
        let mut r = self.rng.with_stream(pair).rng();
        let [a, b] = &mut st.1;
        self.generator.fill_pair(&mut r, &mut st.0, a, b);
        for v in [a, b] {
            v.iter_mut().for_each(|x| *x *= self.scale);
        }
    }

    fn consume(&self, st: &mut Self::State, half: usize, _: usize, acc: &mut Moments) {
        let x = &st.1[half];
        let mut idx = 0;
        for s in 0..x.len() {
            let xs = x[s];
            for &xt in &x[s..] {
                let p = xs * xt;
                acc.sum[idx] += p;
                acc.sq[idx] += p * p;
                idx += 1;
            }
        }
    }
}

fn fbm_exactness(seed: RngPolicy, fault: Option<Fault>) -> Outcome {
    const M: usize = 512;
    const R: usize = 20_000;
    let mut pass = true;
    let mut parts = Vec::new();
    for (j, alpha) in [0.5, 1.0, 1.5].into_iter().enumerate() {
        let simulated = if fault == Some(Fault::Covariance) { alpha * 1.05 } else { alpha };
        let delta = 1.0 / M as f64;
        let kernel = CovarianceKernel {
            generator: FbmGenerator::new(simulated, M)?,
            scale: delta.powf(simulated / 2.0),
            rng: seed.derive(j as u64),
        };
        let accs = mc::run(&kernel, R, 8);
        let mut total = kernel.acc();
        for a in accs {
            total.sum.iter_mut().zip(&a.sum).for_each(|(t, x)| *t += x);
            total.sq.iter_mut().zip(&a.sq).for_each(|(t, x)| *t += x);
        }
        let (mut worst, mut bad, mut idx) = (0.0f64, 0usize, 0);
        for s in 0..=M {
            for t in s..=M {
                let (ts, tt) = (s as f64 * delta, t as f64 * delta);
                let exact = 0.5 * (ts.powf(alpha) + tt.powf(alpha) - (tt - ts).powf(alpha));
                let mean = total.sum[idx] / R as f64;
                let var = (total.sq[idx] / R as f64 - mean * mean).max(0.0);
                let se = (var / R as f64).sqrt();
                let dev = (mean - exact).abs();
                if dev > 4.0 * se {
                    bad += 1;
                }
                if se > 0.0 {
                    worst = worst.max(dev / se);
                }
                idx += 1;
            }
        }
        pass &= bad == 0;
        parts.push(format!("alpha {alpha}: {bad} entries beyond 4 SE, worst {worst:.2} SE"));
    }
    Ok((pass, parts.join("; ")))
}

fn orthant_equivalence(seed: RngPolicy) -> Outcome {
    let mut rng = seed.rng();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(2..=3);
        let m = rng.random_range(1..=12);
        let pts: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let fast = orthant_integral(&ApexSet::new(pts.clone())?)?;
        let slow = oracle::inclusion_exclusion(&pts);
        worst = worst.max((fast - slow).abs() / slow.abs());
    }
    let two = orthant_integral(&ApexSet::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]])?)?;
    let target = 2.0 * std::f64::consts::E - 1.0;
    let err = (two - target).abs() / target;
    Ok((worst <= 1e-10 && err <= 1e-12, format!("worst relative error {worst:.2e}; {{(1,0),(0,1)}} gives {two} (relative error {err:.1e})")))
}

fn single_point(seed: RngPolicy) -> Outcome {
    let mut rng = seed.rng();
    let mut misses = 0;
    let mut worst = 0.0f64;
    for case in 0..50u64 {
        let n = rng.random_range(1..=3);
        let alpha: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..=2.0)).collect();
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..=1.0)).collect();
        let drift = DriftSpec::new(
            (0..n)
                .map(|_| Drift::PowerLaw { c: rng.random_range(0.0..1.0), gamma: rng.random_range(0.5..2.0) })
                .collect(),
        );
        let s: f64 = rng.random_range(-1.0..1.0);
        let exact = (-drift.sum(s)).exp();
        let problem = PiterbargProblem::new(alpha, a, drift)?;
        let opts = McOptions {
            replicates: 100_000,
            estimator: Estimator::Direct,
            rng: seed.derive(case + 1),
            ..McOptions::default()
        };
        let e = piterbarg_estimate(&problem, s, s, &opts)?;
        let z = (e.value - exact).abs() / e.std_error;
        if !(z <= 3.0) {
            misses += 1;
        }
        worst = worst.max(z);
    }
    Ok((misses == 0, format!("{misses} of 50 cases beyond 3 SE, worst {worst:.2} SE")))
}

fn classical_pickands(seed: RngPolicy) -> Outcome {
    let opts = McOptions { replicates: 100_000, delta: Some(2f64.powi(-8)), rng: seed, ..McOptions::default() };
    let policy = PickandsPolicy::default();
    let h1 = pickands_estimate(&[1.0], &[1.0], &opts, &policy)?;
    let h2 = pickands_estimate(&[2.0], &[1.0], &McOptions { rng: seed.derive(2), ..opts }, &policy)?;
    // H_{1,4} at a quarter of the step and horizons sees the same discretized law as H_{1,1}.
    let quarter = PickandsPolicy { horizons: policy.horizons.iter().map(|t| t / 4.0).collect(), ..policy.clone() };
    let h14 = pickands_estimate(
        &[1.0],
        &[4.0],
        &McOptions { delta: Some(2f64.powi(-10)), rng: seed.derive(4), ..opts },
        &quarter,
    )?;
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    let ok1 = (h1.value - 1.0).abs() <= 0.1;
    let ok2 = (h2.value - inv_sqrt_pi).abs() <= 0.1 * inv_sqrt_pi;
    let se = (16.0 * h1.std_error.powi(2) + h14.std_error.powi(2)).sqrt();
    let ok3 = (h14.value - 4.0 * h1.value).abs() <= 3.0 * se;
    Ok((
        ok1 && ok2 && ok3,
        format!(
            "H1 = {:.4} ± {:.4}; H2 = {:.4} ± {:.4} (target {inv_sqrt_pi:.4}); H_{{1,4}} = {:.4} vs 4 H1 = {:.4}, combined SE {se:.4}",
            h1.value, h1.std_error, h2.value, h2.std_error, h14.value, 4.0 * h1.value
        ),
    ))
}

fn reflection_closure(seed: RngPolicy) -> Outcome {
    let model = RuinModel::new(vec![1.0], vec![0.0], vec![1.0], 1.0)?;
    let us = [2.0, 2.5, 3.0];
    let est = estimate_ruin_levels(&model, &us, 1 << 14, 1_000_000, seed)?;
    let mut ok_a = true;
    let mut parts = Vec::new();
    for e in &est {
        let exact = 2.0 * tail_psi(e.u);
        let z = (e.probability - exact) / e.std_error;
        ok_a &= z.abs() <= 3.0;
        parts.push(format!("u={}: {:.5} vs {exact:.5} ({z:+.2} SE)", e.u, e.probability));
    }
    let problem = PiterbargProblem::new(vec![1.0], vec![0.5], DriftSpec::new(vec![Drift::LinearPositive { c: 0.5 }]))?;
    let limit = piterbarg_limit(&problem, Side::Positive, &McOptions { rng: seed.derive(1), ..McOptions::default() }, &LadderPolicy::default())?;
    let ok_b = (limit.value - 2.0).abs() <= 0.2;
    let prediction = prop1_ruin_asymptotic(&model, &ClosedFormConstants)?;
    let ladder = compare_ladder(&est, &prediction)?;
    let ok_c = ladder.rows.iter().all(|r| (0.9..=1.1).contains(&r.ratio));
    let ratios: Vec<String> = ladder.rows.iter().map(|r| format!("{:.4}", r.ratio)).collect();
    Ok((
        ok_a && ok_b && ok_c,
        format!(
            "(a) {} {}; (b) P = {:.4} ± {:.4} {}; (c) ratios [{}] {}",
            parts.join(", "),
            mark(ok_a),
            limit.value,
            limit.std_error,
            mark(ok_b),
            ratios.join(", "),
            mark(ok_c)
        ),
    ))
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAILED"
    }
}

fn two_dimensional_ruin(seed: RngPolicy) -> Outcome {
    let model = RuinModel::new(vec![1.0; 2], vec![0.0; 2], vec![1.0; 2], 1.0)?;
    let est = estimate_ruin_levels(&model, &[1.5, 2.0, 2.5], 1 << 10, 10_000_000, seed)?;
    let constants = default_constants(McOptions { rng: seed.derive(1), ..McOptions::default() });
    let prediction = prop1_ruin_asymptotic(&model, &constants)?;
    let ladder = compare_ladder(&est, &prediction)?;
    let at2 = &ladder.rows[1];
    let ok = (0.7..=1.3).contains(&at2.ratio) && ladder.approaching_one;
    let rows: Vec<String> =
        ladder.rows.iter().map(|r| format!("u={}: ratio {:.4} ± {:.4}", r.u, r.ratio, r.ratio_std_error)).collect();
    Ok((
        ok,
        format!(
            "C = {:.4} ± {:.4}; {}; approaching 1: {}",
            prediction.constant_factor.value,
            prediction.constant_factor.stderr.unwrap_or(0.0),
            rows.join(", "),
            ladder.approaching_one
        ),
    ))
}

fn ruin_time_limit(seed: RngPolicy) -> Outcome {
    let model = RuinModel::new(vec![0.5], vec![0.0], vec![1.0], 1.0)?;
    let theta = model.theta();
    let sample = sample_ruin_time(&model, 3.0, 2.0, 1 << 10, 10_000_000, seed)?;
    if sample.is_empty() {
        return Ok((false, "no ruin events".into()));
    }
    let law = |x: f64| {
        if x <= 0.0 {
            0.0
        } else {
            prop1_ruin_time_cdf(&model, x, &ClosedFormConstants).map_or(f64::NAN, |c| c.value)
        }
    };
    let ks = sample.ks_distance(law);
    Ok((ks < 0.05, format!("theta = {theta}; {} ruin times; KS distance {ks:.4}", sample.hits())))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Expect {
    /// Pickands constant times a closed-form drift integral.
    PickandsIntegral,
    Piterbarg,
    One,
}

fn classify(r: &AsymptoticResult) -> Option<Expect> {
    let c = &r.constant_factor;
    match (c.kind, &c.drift_integral) {
        (FactorKind::One, None) if c.value == 1.0 => Some(Expect::One),
        (FactorKind::One, _) => None,
        (_, Some(i)) if i.method == IntegralMethod::ClosedForm => Some(Expect::PickandsIntegral),
        (_, Some(_)) => None,
        (_, None) => Some(Expect::Piterbarg),
    }
}

fn regime_table(seed: RngPolicy) -> Outcome {
    let mut mc = MonteCarloConstants::new(McOptions {
        replicates: 2000,
        delta: Some(1.0 / 32.0),
        rng: seed,
        ..McOptions::default()
    });
    // Only the dispatch is under test here, so the estimates may be coarse.
    mc.pickands = PickandsPolicy { horizons: vec![2.0, 4.0, 8.0], rel_tol: 0.5 };
    mc.ladder = LadderPolicy { s0: 1.0, max_rungs: 8, rel_tol: 0.1 };
    let constants = Layered::new(ClosedFormConstants, mc);
    let local = |alpha: f64, beta: f64, t0: f64| LocalExpansion {
        t0,
        horizon: 1.0,
        coords: vec![LocalCoord { sigma: 1.0, b: 0.5, beta, a: 1.0, alpha, c: 0.0, gamma: 1.0, h0: 0.0 }],
    };
    let point = |alpha: f64, gamma: f64| {
        Thm3Kind::UniquePoint(UniquePoint {
            t0: 0.5,
            horizon: 1.0,
            coords: vec![StationaryCoord { a: 1.0, alpha, c: 1.0, gamma, h_max: 0.0 }],
        })
    };
    let ruin = |alpha: f64| RuinModel::new(vec![alpha], vec![0.5], vec![1.0], 1.0);
    let cs: &dyn ConstantsSource = &constants;
    let rows: Vec<(&str, Result<AsymptoticResult>, Regime, Expect)> = vec![
        ("local alpha=1 < beta=2", thm2_asymptotic(&local(1.0, 2.0, 1.0), cs), Regime::Sub, Expect::PickandsIntegral),
        ("local alpha=beta=1", thm2_asymptotic(&local(1.0, 1.0, 1.0), cs), Regime::Critical, Expect::Piterbarg),
        ("local alpha=2 > beta=1", thm2_asymptotic(&local(2.0, 1.0, 0.5), cs), Regime::Super, Expect::One),
        ("stationary alpha=1 < 2gamma=2", thm3_asymptotic(&point(1.0, 1.0), cs), Regime::Sub, Expect::PickandsIntegral),
        ("stationary alpha=2gamma=1", thm3_asymptotic(&point(1.0, 0.5), cs), Regime::Critical, Expect::Piterbarg),
        ("stationary alpha=1.5 > 2gamma=1", thm3_asymptotic(&point(1.5, 0.5), cs), Regime::Super, Expect::One),
        ("ruin alpha=0.5 < 1", ruin(0.5).and_then(|m| prop1_ruin_asymptotic(&m, cs)), Regime::Sub, Expect::PickandsIntegral),
        ("ruin alpha=1", ruin(1.0).and_then(|m| prop1_ruin_asymptotic(&m, cs)), Regime::Critical, Expect::Piterbarg),
        ("ruin alpha=1.5 > 1", ruin(1.5).and_then(|m| prop1_ruin_asymptotic(&m, cs)), Regime::Super, Expect::One),
    ];
    let mut bad = Vec::new();
    for (name, result, regime, expect) in rows {
        match result {
            Ok(r) if r.regime == regime && classify(&r) == Some(expect) => {}
            Ok(r) => bad.push(format!("{name}: got {:?} with {:?}", r.regime, classify(&r))),
            Err(e) => bad.push(format!("{name}: {e}")),
        }
    }
    if bad.is_empty() {
        Ok((true, "9 of 9 rows select the prescribed regime and constant".into()))
    } else {
        Ok((false, bad.join("; ")))
    }
}

fn random_spec<R: Rng>(rng: &mut R) -> Result<ProcessSpec> {
    let n = rng.random_range(1..=3);
    let coords = (0..n)
        .map(|_| {
            CoordSpec::fbm(rng.random_range(0.3..=2.0))
                .with_scale(rng.random_range(0.5..2.0))
                .with_trend(Trend::Linear { slope: rng.random_range(-2.0..2.0) })
        })
        .collect();
    ProcessSpec::new(coords, rng.random_range(0.5..2.0))
}

fn invariants(seed: RngPolicy) -> Outcome {
    let mut rng = seed.rng();
    let mut violations = [0usize; 5];
    for case in 0..100u64 {
        let stream = seed.derive(case + 1);
        // Grid monotonicity.
        let spec = random_spec(&mut rng)?;
        let u = rng.random_range(-1.0..2.0);
        let nested = estimate_exceedance_nested(&spec, u, &[8, 16, 32, 64], 64, stream)?;
        if nested.windows(2).any(|w| w[1].hits < w[0].hits) {
            violations[0] += 1;
        }
        // Threshold monotonicity.
        let mut us: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..2.0)).collect();
        us.sort_by(f64::total_cmp);
        let levels = estimate_exceedance_levels(&spec, &us, 32, 64, stream)?;
        if levels.windows(2).any(|w| w[1].hits > w[0].hits) {
            violations[1] += 1;
        }
        // Interval monotonicity, replicate by replicate.
        let n = rng.random_range(1..=2);
        let problem = PiterbargProblem::new(
            (0..n).map(|_| rng.random_range(0.3..=2.0)).collect(),
            (0..n).map(|_| rng.random_range(0.2..=2.0)).collect(),
            DriftSpec::new(
                (0..n)
                    .map(|_| Drift::PowerLaw { c: rng.random_range(0.0..1.0), gamma: rng.random_range(0.5..2.0) })
                    .collect(),
            ),
        )?;
        let (s1, s2) = (rng.random_range(-3.0..0.0), rng.random_range(0.5..3.0));
        let requests = [CrnRequest::interval(0.0, 0.25), CrnRequest::interval(s1 / 2.0, s2 / 2.0), CrnRequest::interval(s1, s2)];
        let values = piterbarg_family_values(&problem, s1, s2, 1.0 / 16.0, &requests, 16, Estimator::Direct, stream)?;
        if values.iter().any(|v| v.windows(2).any(|w| w[0] > w[1] * (1.0 + 1e-12))) {
            violations[2] += 1;
        }
        // Pruning invariance.
        let dim = rng.random_range(2..=4);
        let m = rng.random_range(1..=30);
        let mut pts: Vec<Vec<f64>> = (0..m).map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let base = orthant_integral(&ApexSet::new(pts.clone())?)?;
        let pruned = orthant_integral(&pareto_prune(&ApexSet::new(pts.clone())?))?;
        let dominated: Vec<f64> = pts[0].iter().map(|x| x - rng.random_range(0.0..1.0)).collect();
        pts.push(dominated);
        let padded = orthant_integral(&ApexSet::new(pts)?)?;
        if (pruned - base).abs() > 1e-12 * base || (padded - base).abs() > 1e-12 * base {
            violations[3] += 1;
        }
        // Monotonicity of the limiting ruin-time law.
        let n = rng.random_range(1..=3);
        let alpha: Vec<f64> = match rng.random_range(0..3) {
            0 => (0..n).map(|_| rng.random_range(0.2..0.95)).collect(),
            1 => vec![1.0],
            _ => (0..n).map(|_| rng.random_range(1.05..=2.0)).collect(),
        };
        let n = alpha.len();
        let model = RuinModel::new(
            alpha,
            (0..n).map(|_| rng.random_range(0.0..2.0)).collect(),
            (0..n).map(|_| rng.random_range(0.5..2.0)).collect(),
            rng.random_range(0.5..2.0),
        )?;
        let mut xs: Vec<f64> = (0..8).map(|_| rng.random_range(0.01..20.0)).collect();
        xs.sort_by(f64::total_cmp);
        let cdf = xs
            .iter()
            .map(|&x| prop1_ruin_time_cdf(&model, x, &ClosedFormConstants).map(|c| c.value))
            .collect::<Result<Vec<f64>>>()?;
        if cdf.windows(2).any(|w| w[1] < w[0]) || cdf.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            violations[4] += 1;
        }
    }
    let names = ["grid", "threshold", "interval", "pruning", "cdf"];
    let summary: Vec<String> = names.iter().zip(violations).map(|(n, v)| format!("{n} {v}/100")).collect();
    Ok((violations.iter().all(|&v| v == 0), format!("violations: {}", summary.join(", "))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_and_gaps() {
        assert_eq!(Suite::Full.criteria().len(), 9);
        assert!(Suite::Fast.criteria().iter().all(|id| known_gap(*id).is_none()));
        assert!(known_gap(7).is_some());
        let r = CriterionResult { id: 7, name: "x".into(), passed: false, detail: "d".into(), seconds: 1.0, known_gap: Some("g".into()) };
        assert!(r.line().contains("FAIL (expected"));
    }

    #[test]
    fn orthant_and_dispatch_criteria_pass() {
        let opts = SuiteOptions::default();
        for id in [2, 8] {
            let r = run_criterion(id, &opts);
            assert!(r.passed, "{}", r.line());
        }
    }
}
