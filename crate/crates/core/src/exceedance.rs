//! Direct Monte Carlo for the finite-`u` probabilities the asymptotics
//! approximate, and for the scaled ruin time.
//!
//! Paths live on the uniform grid `t_k = k T / m` and a replicate hits when
//! `max_k min_i (X_i(t_k) + h_i(t_k)) > u`. The grid misses excursions
//! between nodes, so every estimate here is biased low.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::asymptotics::{AsymptoticResult, FactorKind, Model, Regime, RuinModel};
use crate::error::{Error, Result};
use crate::mc::{self, PairKernel};
use crate::paths::{CoordSpec, Covariance, GridPath, ProcessSpec, Trend, VectorSampler, VectorWorkspace};
use crate::rng::RngPolicy;

const BATCHES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceEstimate {
    pub probability: f64,
    pub std_error: f64,
    pub hits: u64,
    pub replicates: usize,
    pub grid: usize,
    pub u: f64,
    pub spec: Value,
}

impl ExceedanceEstimate {
    fn from_hits(hits: u64, replicates: usize, grid: usize, u: f64, spec: Value) -> Self {
        let p = hits as f64 / replicates as f64;
        Self {
            probability: p,
            std_error: (p * (1.0 - p) / replicates as f64).sqrt(),
            hits,
            replicates,
            grid,
            u,
            spec,
        }
    }
}

fn check_run(m: usize, replicates: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::Precondition("grid size m must be positive".into()));
    }
    if replicates == 0 {
        return Err(Error::Precondition("need at least one replicate".into()));
    }
    Ok(())
}

fn check_levels(us: &[f64]) -> Result<()> {
    if us.is_empty() {
        return Err(Error::Precondition("no thresholds given".into()));
    }
    match us.iter().find(|u| !u.is_finite()) {
        Some(u) => Err(Error::Precondition(format!("threshold must be finite, got {u}"))),
        None => Ok(()),
    }
}

/// Per-path `max_k min_i x_i(t_k)` over the nodes `k = 0, s, 2s, ...`.
fn grid_sup(path: &[Vec<f64>], stride: usize) -> f64 {
    let len = path[0].len();
    let mut sup = f64::NEG_INFINITY;
    for k in (0..len).step_by(stride) {
        let low = path.iter().map(|x| x[k]).fold(f64::INFINITY, f64::min);
        sup = sup.max(low);
    }
    sup
}

struct PathState {
    ws: VectorWorkspace,
    paths: [Vec<Vec<f64>>; 2],
}

fn path_state(sampler: &VectorSampler) -> PathState {
    PathState { ws: sampler.workspace(), paths: [sampler.buffer(), sampler.buffer()] }
}

fn draw(sampler: &VectorSampler, rng: RngPolicy, st: &mut PathState, pair: u64) {
    let mut r = rng.with_stream(pair).rng();
    let [a, b] = &mut st.paths;
    sampler.fill_pair(&mut r, &mut st.ws, a, b, true);
}

/// Hit counts for every (stride, level) combination from one set of paths.
struct ScanKernel<'a> {
    sampler: VectorSampler,
    rng: RngPolicy,
    strides: &'a [usize],
    us: &'a [f64],
    record: bool,
}

#[derive(Default)]
struct ScanAcc {
    hits: Vec<u64>,
    sups: Vec<f64>,
}

impl PairKernel for ScanKernel<'_> {
    type State = PathState;
    type Acc = ScanAcc;

    fn state(&self) -> PathState {
        path_state(&self.sampler)
    }

    fn acc(&self) -> ScanAcc {
        ScanAcc { hits: vec![0; self.strides.len() * self.us.len()], sups: Vec::new() }
    }

    fn generate(&self, st: &mut PathState, pair: u64) {
        draw(&self.sampler, self.rng, st, pair);
    }

    fn consume(&self, st: &mut PathState, half: usize, _: usize, acc: &mut ScanAcc) {
        let path = &st.paths[half];
        for (j, &s) in self.strides.iter().enumerate() {
            let sup = grid_sup(path, s);
            if self.record && j == 0 {
                acc.sups.push(sup);
            }
            for (l, &u) in self.us.iter().enumerate() {
                if sup > u {
                    acc.hits[j * self.us.len() + l] += 1;
                }
            }
        }
    }
}

fn scan(
    spec: &ProcessSpec,
    us: &[f64],
    m: usize,
    strides: &[usize],
    replicates: usize,
    rng: RngPolicy,
    record: bool,
) -> Result<ScanAcc> {
    check_run(m, replicates)?;
    let kernel = ScanKernel { sampler: VectorSampler::new(spec, m)?, rng, strides, us, record };
    let batches = BATCHES.min(replicates);
    let mut total = kernel.acc();
    for acc in mc::run(&kernel, replicates, batches) {
        total.hits.iter_mut().zip(&acc.hits).for_each(|(t, h)| *t += h);
        total.sups.extend(acc.sups);
    }
    Ok(total)
}

/// `P{exists k: min_i (X_i(t_k) + h_i(t_k)) > u}` from `replicates` paths on
/// `m` grid steps.
pub fn estimate_exceedance(
    spec: &ProcessSpec,
    u: f64,
    m: usize,
    replicates: usize,
    rng: RngPolicy,
) -> Result<ExceedanceEstimate> {
    Ok(estimate_exceedance_levels(spec, &[u], m, replicates, rng)?.remove(0))
}

/// Estimates at several thresholds from the same paths.
pub fn estimate_exceedance_levels(
    spec: &ProcessSpec,
    us: &[f64],
    m: usize,
    replicates: usize,
    rng: RngPolicy,
) -> Result<Vec<ExceedanceEstimate>> {
    check_levels(us)?;
    let acc = scan(spec, us, m, &[1], replicates, rng, false)?;
    let echo = spec.describe();
    Ok(us
        .iter()
        .zip(acc.hits)
        .map(|(&u, h)| ExceedanceEstimate::from_hits(h, replicates, m, u, echo.clone()))
        .collect())
}

/// Estimates on nested grids. Paths are drawn on the finest grid and each
/// coarser grid reads every `(finest / m)`-th node, so a hit on a coarse grid
/// is a hit on every finer one.
pub fn estimate_exceedance_nested(
    spec: &ProcessSpec,
    u: f64,
    grids: &[usize],
    replicates: usize,
    rng: RngPolicy,
) -> Result<Vec<ExceedanceEstimate>> {
    check_levels(&[u])?;
    let finest = grids.iter().copied().max().ok_or_else(|| Error::Precondition("no grids given".into()))?;
    let strides = grids
        .iter()
        .map(|&m| {
            if m == 0 || finest % m != 0 {
                Err(Error::Precondition(format!("grid {m} does not divide the finest grid {finest}")))
            } else {
                Ok(finest / m)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let acc = scan(spec, &[u], finest, &strides, replicates, rng, false)?;
    let echo = spec.describe();
    Ok(grids
        .iter()
        .zip(acc.hits)
        .map(|(&m, h)| ExceedanceEstimate::from_hits(h, replicates, m, u, echo.clone()))
        .collect())
}

/// `max_k min_i (X_i(t_k) + h_i(t_k))` for each replicate in order; replicate
/// `r` hits at level `u` exactly when its entry exceeds `u`.
pub fn replicate_maxima(spec: &ProcessSpec, m: usize, replicates: usize, rng: RngPolicy) -> Result<Vec<f64>> {
    Ok(scan(spec, &[0.0], m, &[1], replicates, rng, true)?.sups)
}

/// The ruin event `exists t: B_i(t) - c_i t > u d_i for all i` as an
/// exceedance of `(B_i(t) - c_i t) / d_i`.
pub fn ruin_process(model: &RuinModel) -> Result<ProcessSpec> {
    model.validate()?;
    let coords = (0..model.n())
        .map(|i| {
            CoordSpec {
                covariance: Covariance::FBm { alpha: model.alpha[i] },
                trend: Trend::Linear { slope: -model.c[i] / model.d[i] },
                scale: model.d[i],
            }
        })
        .collect();
    ProcessSpec::new(coords, model.horizon)
}

fn ruin_echo(model: &RuinModel) -> Value {
    json!({ "ruin": model })
}

pub fn estimate_ruin(
    model: &RuinModel,
    u: f64,
    m: usize,
    replicates: usize,
    rng: RngPolicy,
) -> Result<ExceedanceEstimate> {
    Ok(estimate_ruin_levels(model, &[u], m, replicates, rng)?.remove(0))
}

/// Ruin estimates at several initial capitals from the same paths.
pub fn estimate_ruin_levels(
    model: &RuinModel,
    us: &[f64],
    m: usize,
    replicates: usize,
    rng: RngPolicy,
) -> Result<Vec<ExceedanceEstimate>> {
    let spec = ruin_process(model)?;
    let mut out = estimate_exceedance_levels(&spec, us, m, replicates, rng)?;
    for e in &mut out {
        e.spec = ruin_echo(model);
    }
    Ok(out)
}

/// Conditional sample of `(T - tau_u) u^s` over the replicates that hit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuinTimeSample {
    pub values: Vec<f64>,
    pub scaling: f64,
    pub u: f64,
    pub horizon: f64,
    pub grid: usize,
    pub replicates: usize,
}

impl RuinTimeSample {
    pub fn hits(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fraction of the sample at or below `x`.
    pub fn empirical_cdf(&self, x: f64) -> f64 {
        if self.values.is_empty() {
            return f64::NAN;
        }
        self.values.iter().filter(|&&v| v <= x).count() as f64 / self.values.len() as f64
    }

    /// Kolmogorov-Smirnov distance to a continuous law.
    pub fn ks_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        ks_distance(&self.values, cdf)
    }

    /// One column `value`, in replicate order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "value")?;
        for v in &self.values {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }
}

/// `sup_x |F_n(x) - F(x)|` for a continuous `F`.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    if sample.is_empty() {
        return f64::NAN;
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

fn check_scaling(scaling: f64) -> Result<()> {
    if scaling > 0.0 && scaling.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("scaling exponent must be positive, got {scaling}")))
    }
}

/// `(T - t_k) u^s` for the first node `t_k` at which every coordinate of the
/// (trended) path exceeds `u`.
pub fn scaled_passage(path: &GridPath, u: f64, scaling: f64) -> Result<Option<f64>> {
    check_scaling(scaling)?;
    let horizon = path.horizon();
    Ok(path.first_crossing(u).map(|k| (horizon - path.times[k]) * u.powf(scaling)))
}

fn first_crossing(path: &[Vec<f64>], u: f64) -> Option<usize> {
    (0..path[0].len()).find(|&k| path.iter().all(|x| x[k] > u))
}

struct PassageKernel {
    sampler: VectorSampler,
    rng: RngPolicy,
    u: f64,
    factor: f64,
    horizon: f64,
}

impl PairKernel for PassageKernel {
    type State = PathState;
    type Acc = Vec<f64>;

    fn state(&self) -> PathState {
        path_state(&self.sampler)
    }

    fn acc(&self) -> Vec<f64> {
        Vec::new()
    }

    fn generate(&self, st: &mut PathState, pair: u64) {
        draw(&self.sampler, self.rng, st, pair);
    }

    fn consume(&self, st: &mut PathState, half: usize, _: usize, acc: &mut Vec<f64>) {
        if let Some(k) = first_crossing(&st.paths[half], self.u) {
            acc.push((self.horizon - self.sampler.times()[k]) * self.factor);
        }
    }
}

/// Scaled first-passage times of `spec` over `u`. A sample with no hits is
/// returned empty rather than as an error.
pub fn sample_first_passage(
    spec: &ProcessSpec,
    u: f64,
    scaling: f64,
    m: usize,
    replicates: usize,
    rng: RngPolicy,
) -> Result<RuinTimeSample> {
    check_scaling(scaling)?;
    check_levels(&[u])?;
    check_run(m, replicates)?;
    let kernel = PassageKernel {
        sampler: VectorSampler::new(spec, m)?,
        rng,
        u,
        factor: u.powf(scaling),
        horizon: spec.horizon,
    };
    let values = mc::run(&kernel, replicates, BATCHES.min(replicates)).into_iter().flatten().collect();
    Ok(RuinTimeSample { values, scaling, u, horizon: spec.horizon, grid: m, replicates })
}

pub fn sample_ruin_time(
    model: &RuinModel,
    u: f64,
    scaling: f64,
    m: usize,
    replicates: usize,
    rng: RngPolicy,
) -> Result<RuinTimeSample> {
    sample_first_passage(&ruin_process(model)?, u, scaling, m, replicates, rng)
}

/// Monte Carlo estimate against the asymptotic formula at one `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub u: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub hits: u64,
    pub asymptotic: f64,
    pub log_asymptotic: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant_std_error: Option<f64>,
    pub ratio: f64,
    /// First-order combination of the Monte Carlo and constant errors.
    pub ratio_std_error: f64,
    pub model: Model,
    pub regime: Regime,
    pub constant_kind: FactorKind,
}

/// Ratio `p_hat / value(u)` with its propagated standard error.
pub fn compare_asymptotic(estimate: &ExceedanceEstimate, prediction: &AsymptoticResult, u: f64) -> Result<Comparison> {
    if estimate.u != u {
        return Err(Error::Mismatch(format!("estimate is at u = {}, prediction requested at u = {u}", estimate.u)));
    }
    if let Some(ruin) = estimate.spec.get("ruin") {
        if prediction.model != Model::Ruin || &prediction.inputs != ruin {
            return Err(Error::Mismatch("estimate and prediction describe different ruin models".into()));
        }
    }
    let log_asymptotic = prediction.log_value(u);
    let asymptotic = log_asymptotic.exp();
    let ratio = estimate.probability / asymptotic;
    let c = &prediction.constant_factor;
    let rel_c = c.stderr.map_or(0.0, |s| s / c.value);
    let rel_p = if estimate.probability > 0.0 { estimate.std_error / estimate.probability } else { f64::INFINITY };
    Ok(Comparison {
        u,
        estimate: estimate.probability,
        std_error: estimate.std_error,
        hits: estimate.hits,
        asymptotic,
        log_asymptotic,
        constant_std_error: c.stderr,
        ratio,
        ratio_std_error: ratio * rel_p.hypot(rel_c),
        model: prediction.model,
        regime: prediction.regime,
        constant_kind: c.kind,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderReport {
    pub rows: Vec<Comparison>,
    /// `|ratio - 1|` at the last level is below its value at the first, and
    /// no step moves away from 1 by more than two standard errors.
    pub approaching_one: bool,
}

/// [`compare_asymptotic`] over increasing thresholds.
pub fn compare_ladder(estimates: &[ExceedanceEstimate], prediction: &AsymptoticResult) -> Result<LadderReport> {
    if estimates.is_empty() {
        return Err(Error::Precondition("empty ladder".into()));
    }
    if estimates.windows(2).any(|w| w[1].u <= w[0].u) {
        return Err(Error::Precondition("ladder thresholds must increase".into()));
    }
    let rows = estimates.iter().map(|e| compare_asymptotic(e, prediction, e.u)).collect::<Result<Vec<_>>>()?;
    let gap = |c: &Comparison| (c.ratio - 1.0).abs();
    let steps_ok = rows.windows(2).all(|w| gap(&w[1]) <= gap(&w[0]) + 2.0 * w[1].ratio_std_error);
    let overall = rows.len() == 1 || gap(&rows[rows.len() - 1]) < gap(&rows[0]);
    Ok(LadderReport { approaching_one: steps_ok && overall, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{prop1_ruin_asymptotic, tail_psi, ClosedFormConstants};

    fn brownian(n: usize) -> ProcessSpec {
        ProcessSpec::new(vec![CoordSpec::fbm(1.0); n], 1.0).unwrap()
    }

    #[test]
    fn estimate_fields_are_consistent() {
        let e = estimate_exceedance(&brownian(1), 1.0, 64, 1001, RngPolicy::seed(1)).unwrap();
        assert_eq!(e.probability, e.hits as f64 / 1001.0);
        let se = (e.probability * (1.0 - e.probability) / 1001.0).sqrt();
        assert_eq!(e.std_error, se);
        assert_eq!((e.grid, e.replicates, e.u), (64, 1001, 1.0));
        assert_eq!(e.spec["n"], 1);
    }

    #[test]
    fn rejects_bad_runs() {
        let s = brownian(1);
        assert!(estimate_exceedance(&s, 1.0, 0, 10, RngPolicy::seed(0)).is_err());
        assert!(estimate_exceedance(&s, 1.0, 8, 0, RngPolicy::seed(0)).is_err());
        assert!(estimate_exceedance(&s, f64::INFINITY, 8, 10, RngPolicy::seed(0)).is_err());
        assert!(estimate_exceedance_nested(&s, 1.0, &[8, 12], 10, RngPolicy::seed(0)).is_err());
    }

    #[test]
    fn vacuous_threshold_always_hits() {
        let spec = ProcessSpec::new(
            vec![CoordSpec::fbm(0.6), CoordSpec::fbm(1.4).with_trend(Trend::Linear { slope: -1.0 })],
            2.0,
        )
        .unwrap();
        let e = estimate_exceedance(&spec, -10.0, 32, 2000, RngPolicy::seed(3)).unwrap();
        assert_eq!(e.probability, 1.0);
    }

    #[test]
    fn endpoint_only_grid_gives_the_product() {
        // With m = 1 only t = T can hit, where the coordinates are independent N(0, 1).
        let r = 400_000;
        let e = estimate_exceedance(&brownian(2), 1.0, 1, r, RngPolicy::seed(5)).unwrap();
        let p = tail_psi(1.0).powi(2);
        let se = (p * (1.0 - p) / r as f64).sqrt();
        assert!((e.probability - p).abs() < 4.0 * se, "{} vs {p}", e.probability);
    }

    #[test]
    fn brownian_running_maximum() {
        // P{sup B > 1.5} = 2 Psi(1.5); at m = 2^10 the grid deficit is about
        // 0.583 / sqrt(m) in the level, well inside the tolerance below.
        let r = 40_000;
        let e = estimate_exceedance(&brownian(1), 1.5, 1024, r, RngPolicy::seed(8)).unwrap();
        let p = 2.0 * tail_psi(1.5);
        let biased = 2.0 * tail_psi(1.5 + 0.5826 / 32.0);
        assert!(e.probability < p + 3.0 * e.std_error);
        assert!((e.probability - biased).abs() < 4.0 * e.std_error, "{} vs {biased}", e.probability);
    }

    #[test]
    fn nested_grids_and_levels_are_monotone() {
        let spec = brownian(2);
        let nested = estimate_exceedance_nested(&spec, 0.5, &[4, 16, 64, 256], 3000, RngPolicy::seed(2)).unwrap();
        assert!(nested.windows(2).all(|w| w[1].hits >= w[0].hits));
        let levels = estimate_exceedance_levels(&spec, &[0.0, 0.5, 1.0, 2.0], 64, 3000, RngPolicy::seed(2)).unwrap();
        assert!(levels.windows(2).all(|w| w[1].hits <= w[0].hits));
    }

    #[test]
    fn ruin_matches_equivalent_exceedance_replicate_by_replicate() {
        let model = RuinModel::new(vec![0.7, 1.3], vec![0.4, -0.2], vec![1.5, 0.8], 2.0).unwrap();
        let hand = ProcessSpec::new(
            vec![
                CoordSpec::fbm(0.7).with_scale(1.5).with_trend(Trend::user("-0.4t/1.5", |t| -0.4 * t / 1.5)),
                CoordSpec::fbm(1.3).with_scale(0.8).with_trend(Trend::user("0.2t/0.8", |t| 0.2 * t / 0.8)),
            ],
            2.0,
        )
        .unwrap();
        let rng = RngPolicy::seed(17);
        let a = replicate_maxima(&ruin_process(&model).unwrap(), 128, 999, rng).unwrap();
        let b = replicate_maxima(&hand, 128, 999, rng).unwrap();
        for u in [0.0, 0.5, 1.0, 1.5] {
            let ia: Vec<bool> = a.iter().map(|&s| s > u).collect();
            let ib: Vec<bool> = b.iter().map(|&s| s > u).collect();
            assert_eq!(ia, ib);
            let e = estimate_ruin(&model, u, 128, 999, rng).unwrap();
            assert_eq!(e.hits as usize, ia.iter().filter(|&&h| h).count());
        }
    }

    #[test]
    fn simultaneous_ruin_is_rarer_and_premium_helps() {
        let rng = RngPolicy::seed(4);
        let one = RuinModel::new(vec![1.0], vec![0.0], vec![1.0], 1.0).unwrap();
        let two = RuinModel::new(vec![1.0; 2], vec![0.0; 2], vec![1.0; 2], 1.0).unwrap();
        let rich = RuinModel::new(vec![1.0; 2], vec![3.0; 2], vec![1.0; 2], 1.0).unwrap();
        let p1 = estimate_ruin(&one, 1.0, 256, 4000, rng).unwrap();
        let p2 = estimate_ruin(&two, 1.0, 256, 4000, rng).unwrap();
        let p3 = estimate_ruin(&rich, 1.0, 256, 4000, rng).unwrap();
        // Coordinate 1 of `two` shares its stream with `one`.
        assert!(p2.hits <= p1.hits);
        assert!(p3.hits <= p2.hits);
        assert!(p3.hits < p2.hits);
    }

    #[test]
    fn synthetic_path_passage() {
        let times = GridPath::uniform_times(1.0, 4);
        let path = GridPath::new(times, vec![vec![0.0, 1.0, 3.0, 2.5, 4.0], vec![0.0, 3.0, 2.5, 3.0, 0.0]]);
        // Both coordinates exceed 2 first at index 2, t = 0.5.
        let v = scaled_passage(&path, 2.0, 2.0).unwrap().unwrap();
        assert_eq!(v, 0.5 * 4.0);
        assert_eq!(scaled_passage(&path, 5.0, 2.0).unwrap(), None);
        assert!(scaled_passage(&path, 2.0, 0.0).is_err());
    }

    #[test]
    fn ruin_time_sample_is_in_range() {
        let model = RuinModel::new(vec![0.5], vec![0.0], vec![1.0], 1.0).unwrap();
        let s = sample_ruin_time(&model, 1.5, 2.0, 128, 4000, RngPolicy::seed(9)).unwrap();
        assert!(!s.is_empty());
        assert!(s.values.iter().all(|&v| (0.0..=1.0 * 1.5f64.powi(2)).contains(&v)));
        assert!(sample_ruin_time(&model, 1.5, 0.0, 128, 10, RngPolicy::seed(9)).is_err());
        let none = sample_ruin_time(&model, 50.0, 2.0, 16, 100, RngPolicy::seed(9)).unwrap();
        assert!(none.is_empty());
        assert!(none.empirical_cdf(1.0).is_nan());
        let mut csv = Vec::new();
        s.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), s.hits() + 1);
    }

    #[test]
    fn ks_distance_hand_values() {
        let uniform = |x: f64| x.clamp(0.0, 1.0);
        assert!((ks_distance(&[0.5], uniform) - 0.5).abs() < 1e-15);
        assert!((ks_distance(&[0.25, 0.75], uniform) - 0.25).abs() < 1e-15);
        assert!((ks_distance(&[0.9, 0.9], uniform) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn comparison_and_ladder() {
        let model = RuinModel::new(vec![1.0], vec![0.0], vec![1.0], 1.0).unwrap();
        let pred = prop1_ruin_asymptotic(&model, &ClosedFormConstants).unwrap();
        let est = estimate_ruin_levels(&model, &[1.0, 1.5], 256, 2000, RngPolicy::seed(1)).unwrap();
        let c = compare_asymptotic(&est[0], &pred, 1.0).unwrap();
        assert!((c.asymptotic - 2.0 * tail_psi(1.0)).abs() < 1e-12);
        assert_eq!(c.ratio, c.estimate / c.asymptotic);
        assert!(matches!(compare_asymptotic(&est[0], &pred, 1.5), Err(Error::Mismatch(_))));
        let other = RuinModel::new(vec![1.0], vec![0.5], vec![1.0], 1.0).unwrap();
        let wrong = prop1_ruin_asymptotic(&other, &ClosedFormConstants).unwrap();
        assert!(matches!(compare_asymptotic(&est[0], &wrong, 1.0), Err(Error::Mismatch(_))));
        let ladder = compare_ladder(&est, &pred).unwrap();
        assert_eq!(ladder.rows.len(), 2);
        assert!(compare_ladder(&[est[1].clone(), est[0].clone()], &pred).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn model() -> impl Strategy<Value = RuinModel> {
            (1usize..=2)
                .prop_flat_map(|n| {
                    (
                        prop::collection::vec(0.3f64..1.9, n),
                        prop::collection::vec(-0.5f64..0.5, n),
                        prop::collection::vec(0.5f64..2.0, n),
                        0.5f64..2.0,
                    )
                })
                .prop_map(|(alpha, c, d, t)| RuinModel::new(alpha, c, d, t).unwrap())
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            #[test]
            fn common_paths_give_ordered_and_consistent_counts(m in model(), u in 0.0f64..1.5, seed: u64) {
                let rng = RngPolicy::seed(seed);
                let spec = ruin_process(&m).unwrap();
                let nested = estimate_exceedance_nested(&spec, u, &[16, 32, 64], 200, rng).unwrap();
                prop_assert!(nested[0].hits <= nested[1].hits && nested[1].hits <= nested[2].hits);

                let levels = estimate_ruin_levels(&m, &[u, u + 0.25, u + 0.5], 64, 200, rng).unwrap();
                prop_assert!(levels.windows(2).all(|w| w[0].hits >= w[1].hits));
                prop_assert_eq!(levels[0].hits, nested[2].hits);

                let maxima = replicate_maxima(&spec, 64, 200, rng).unwrap();
                prop_assert_eq!(maxima.iter().filter(|&&x| x > u).count() as u64, levels[0].hits);

                let sample = sample_ruin_time(&m, u, 2.0, 64, 200, rng).unwrap();
                prop_assert_eq!(sample.hits() as u64, levels[0].hits);
                let cap = m.horizon * u * u;
                prop_assert!(sample.values.iter().all(|&v| v >= 0.0 && v <= cap * (1.0 + 1e-12)));
            }
        }
    }
}
