//! Lattice estimators of `P^f_{alpha,a}[S1, S2]`.
//!
//! Time is discretized to the lattice `delta Z` intersected with the
//! interval. The lattice always contains 0 when the interval does, so paths
//! on nested intervals and on grids `delta`, `2 delta`, ... share points.
//!
//! Two estimators are available.
//!
//! * `Direct` averages the orthant integral of the apex set
//!   `p_{k,i} = sqrt(2 a_i) B_i(t_k) - a_i |t_k|^alpha_i - f_i(t_k)`.
//!   Simple, but `exp(sup)` has heavy tails and the variance grows quickly
//!   with the interval length.
//! * `Shift` tilts by `exp(sum_i p_{j,i})` for a lattice point `j` drawn with
//!   weight `exp(-sum_i f_i(t_j))`. Under the tilt the process seen from
//!   `t_j` is again `sqrt(2a) B - a |.|^alpha` (stationary increments), and
//!   the integrand becomes `I(P) / sum_l exp(sum_i p_{l,i})`, which lies in
//!   `[1/m, 1]`. The estimate is the total weight times its mean.
//!
//! Both estimators evaluate a family of sub-intervals and sub-grids on one
//! path. For `Shift` every member uses the normalizer of the outer lattice,
//! which keeps the estimates unbiased and makes them pathwise monotone under
//! inclusion, exactly as for `Direct`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::drift::DriftSpec;
use super::{ConstantEstimate, ConstantKind};
use crate::error::{Error, Result};
use crate::mc::{self, PairKernel};
use crate::orthant::orthant_parts;
use crate::paths::fbm::{check_alpha, FbmGenerator, FbmWorkspace};
use crate::rng::RngPolicy;

/// Tolerance when snapping interval ends to the lattice, in grid steps.
const SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    #[default]
    Shift,
    Direct,
}

/// `alpha`, `a` and drift of a Piterbarg constant.
#[derive(Debug, Clone)]
pub struct PiterbargProblem {
    pub alpha: Vec<f64>,
    pub a: Vec<f64>,
    pub drift: DriftSpec,
}

impl PiterbargProblem {
    pub fn new(alpha: Vec<f64>, a: Vec<f64>, drift: DriftSpec) -> Result<Self> {
        let p = Self { alpha, a, drift };
        p.validate()?;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.alpha.len();
        if n == 0 {
            return Err(Error::domain("need at least one coordinate"));
        }
        if self.a.len() != n || self.drift.n() != n {
            return Err(Error::Mismatch(format!(
                "alpha has {n} entries, a has {}, drift has {}",
                self.a.len(),
                self.drift.n()
            )));
        }
        for i in 0..n {
            check_alpha(self.alpha[i]).map_err(|e| e.at_coordinate(i))?;
            if !(self.a[i] >= 0.0 && self.a[i].is_finite()) {
                return Err(Error::domain(format!("a must be finite and nonnegative, got {}", self.a[i])).at_coordinate(i));
            }
        }
        self.drift.validate()
    }
}

/// Monte Carlo settings shared by the constant estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    /// Grid step; `None` picks `2^-8 min(1, S2 - S1)`.
    pub delta: Option<f64>,
    pub replicates: usize,
    pub batches: usize,
    pub estimator: Estimator,
    pub rng: RngPolicy,
}

impl Default for McOptions {
    fn default() -> Self {
        Self {
            delta: None,
            replicates: 100_000,
            batches: 50,
            estimator: Estimator::Shift,
            rng: RngPolicy::seed(0),
        }
    }
}

impl McOptions {
    pub fn with_replicates(mut self, r: usize) -> Self {
        self.replicates = r;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng = RngPolicy::seed(seed);
        self
    }

    pub fn with_estimator(mut self, e: Estimator) -> Self {
        self.estimator = e;
        self
    }

    pub fn step_for(&self, s1: f64, s2: f64) -> f64 {
        self.delta.unwrap_or_else(|| default_delta(s1, s2))
    }

    fn check(&self) -> Result<()> {
        if self.batches < 2 {
            return Err(Error::domain("need at least two batches"));
        }
        if self.replicates < self.batches {
            return Err(Error::domain(format!(
                "{} replicates cannot fill {} batches",
                self.replicates, self.batches
            )));
        }
        Ok(())
    }
}

pub fn default_delta(s1: f64, s2: f64) -> f64 {
    let len = s2 - s1;
    if len > 0.0 {
        2f64.powi(-8) * len.min(1.0)
    } else {
        2f64.powi(-8)
    }
}

/// A member of an estimator family: the lattice points of the outer grid
/// inside `[s1, s2]` whose index is a multiple of `stride`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrnRequest {
    pub s1: f64,
    pub s2: f64,
    pub stride: usize,
}

impl CrnRequest {
    pub fn interval(s1: f64, s2: f64) -> Self {
        Self { s1, s2, stride: 1 }
    }
}

fn check_interval(s1: f64, s2: f64) -> Result<()> {
    if !(s1.is_finite() && s2.is_finite()) {
        return Err(Error::InvalidInterval { lo: s1, hi: s2, reason: "ends must be finite".into() });
    }
    if s1 > s2 {
        return Err(Error::InvalidInterval { lo: s1, hi: s2, reason: "S1 exceeds S2".into() });
    }
    Ok(())
}

fn lattice_range(s1: f64, s2: f64, delta: f64) -> Result<(i64, i64)> {
    let lo = (s1 / delta - SNAP).ceil() as i64;
    let hi = (s2 / delta + SNAP).floor() as i64;
    if lo > hi {
        return Err(Error::InvalidInterval {
            lo: s1,
            hi: s2,
            reason: format!("contains no point of the grid with step {delta}"),
        });
    }
    Ok((lo, hi))
}

/// `P^f_{alpha,a}[S1, S2]`.
pub fn piterbarg_estimate(problem: &PiterbargProblem, s1: f64, s2: f64, opts: &McOptions) -> Result<ConstantEstimate> {
    let mut out = piterbarg_family(problem, s1, s2, &[CrnRequest::interval(s1, s2)], opts)?;
    Ok(out.remove(0))
}

/// Estimates for every request, all evaluated on common paths over `[s1, s2]`.
pub fn piterbarg_family(
    problem: &PiterbargProblem,
    s1: f64,
    s2: f64,
    requests: &[CrnRequest],
    opts: &McOptions,
) -> Result<Vec<ConstantEstimate>> {
    problem.validate()?;
    opts.check()?;
    check_interval(s1, s2)?;
    let delta = opts.step_for(s1, s2);
    let (accs, total_weight) = if s1 == s2 {
        if requests.iter().any(|r| r.s1 != s1 || r.s2 != s2) {
            return Err(Error::domain("requests must lie inside the outer interval"));
        }
        let k = SinglePoint::new(problem, s1, opts, requests.len());
        (mc::run(&k, opts.replicates, opts.batches), 1.0)
    } else {
        let k = FamilyKernel::new(problem, s1, s2, delta, requests, opts.estimator, opts.rng, false)?;
        let w = k.total_weight;
        (mc::run(&k, opts.replicates, opts.batches), w)
    };
    Ok(requests
        .iter()
        .enumerate()
        .map(|(q, r)| {
            let per_batch: Vec<(f64, usize)> = accs.iter().map(|a| (a.sums[q], a.count)).collect();
            let (mean, se) = mc::batch_mean_se(&per_batch);
            ConstantEstimate {
                kind: ConstantKind::Piterbarg,
                side: None,
                value: mean * total_weight,
                std_error: se * total_weight,
                grid_step: delta,
                s1: r.s1,
                s2: r.s2,
                replicates: opts.replicates,
                batches: opts.batches,
                alpha: problem.alpha.clone(),
                a: problem.a.clone(),
                drift: problem.drift.id(),
                estimator: opts.estimator,
                seed: opts.rng.master_seed,
                ladder: Vec::new(),
                slope: None,
            }
        })
        .collect())
}

/// Per-replicate contributions (`values[r][q]`) for each request; their
/// means are the family estimates. Used by the pathwise invariant checks.
pub fn piterbarg_family_values(
    problem: &PiterbargProblem,
    s1: f64,
    s2: f64,
    delta: f64,
    requests: &[CrnRequest],
    replicates: usize,
    estimator: Estimator,
    rng: RngPolicy,
) -> Result<Vec<Vec<f64>>> {
    problem.validate()?;
    check_interval(s1, s2)?;
    if s1 == s2 {
        return Err(Error::domain("per-replicate values need a nondegenerate interval"));
    }
    let k = FamilyKernel::new(problem, s1, s2, delta, requests, estimator, rng, true)?;
    let w = k.total_weight;
    let mut out: Vec<Vec<f64>> = mc::run(&k, replicates, 1).into_iter().flat_map(|a| a.values).collect();
    for row in out.iter_mut() {
        row.iter_mut().for_each(|v| *v *= w);
    }
    Ok(out)
}

struct Acc {
    sums: Vec<f64>,
    count: usize,
    values: Vec<Vec<f64>>,
}

struct Coord {
    generator: Option<FbmGenerator>,
    /// `sqrt(2 a) delta^(alpha/2)`
    scale: f64,
    /// `a (k delta)^alpha` for `k = 0, 1, ...`
    penalty: Vec<f64>,
    /// `f(t_k)` over the outer lattice
    drift: Vec<f64>,
}

struct FamilyKernel {
    n: usize,
    lo: i64,
    len: usize,
    /// Generated window `[win_lo, win_lo + win_len)` in lattice indices.
    win_lo: i64,
    win_len: usize,
    coords: Vec<Coord>,
    estimator: Estimator,
    cdf: Vec<f64>,
    total_weight: f64,
    /// Outer-lattice offsets per request; `None` means every point.
    members: Vec<Option<Vec<usize>>>,
    rng: RngPolicy,
    keep_values: bool,
}

struct FamilyState {
    ws: Vec<Option<FbmWorkspace>>,
    paths: [Vec<Vec<f64>>; 2],
    anchor: [usize; 2],
    apex: Vec<f64>,
    sums: Vec<f64>,
    gather: Vec<f64>,
}

impl FamilyKernel {
    #[allow(clippy::too_many_arguments)]
    fn new(
        problem: &PiterbargProblem,
        s1: f64,
        s2: f64,
        delta: f64,
        requests: &[CrnRequest],
        estimator: Estimator,
        rng: RngPolicy,
        keep_values: bool,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::domain(format!("grid step must be positive, got {delta}")));
        }
        let (lo, hi) = lattice_range(s1, s2, delta)?;
        let len = (hi - lo + 1) as usize;
        let (win_lo, win_hi) = match estimator {
            Estimator::Shift => (lo, hi),
            Estimator::Direct => (lo.min(0), hi.max(0)),
        };
        let win_len = (win_hi - win_lo + 1) as usize;
        let max_lag = (hi - lo).max(lo.abs()).max(hi.abs()) as usize;
        let times: Vec<f64> = (lo..=hi).map(|j| j as f64 * delta).collect();
        let coords = (0..problem.n())
            .map(|i| {
                let (alpha, a) = (problem.alpha[i], problem.a[i]);
                let generator = if a > 0.0 && win_len > 1 {
                    Some(FbmGenerator::new(alpha, win_len - 1).map_err(|e| e.at_coordinate(i))?)
                } else {
                    None
                };
                Ok(Coord {
                    generator,
                    scale: (2.0 * a).sqrt() * delta.powf(alpha / 2.0),
                    penalty: (0..=max_lag).map(|k| if a > 0.0 { a * (k as f64 * delta).powf(alpha) } else { 0.0 }).collect(),
                    drift: times.iter().map(|&t| problem.drift.coords[i].eval(t)).collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let weights: Vec<f64> = (0..len).map(|k| (-coords.iter().map(|c| c.drift[k]).sum::<f64>()).exp()).collect();
        let total_weight = match estimator {
            Estimator::Shift => weights.iter().sum(),
            Estimator::Direct => 1.0,
        };
        if !(total_weight > 0.0 && total_weight.is_finite()) {
            return Err(Error::domain(format!("lattice weight sum exp(-sum f) is {total_weight}")));
        }
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                acc += w / total_weight;
                acc
            })
            .collect();
        let members = requests
            .iter()
            .map(|r| {
                if r.stride == 0 {
                    return Err(Error::domain("stride must be positive"));
                }
                check_interval(r.s1, r.s2)?;
                if r.s1 < s1 - SNAP * delta || r.s2 > s2 + SNAP * delta {
                    return Err(Error::InvalidInterval {
                        lo: r.s1,
                        hi: r.s2,
                        reason: format!("not inside the outer interval [{s1}, {s2}]"),
                    });
                }
                let (rlo, rhi) = lattice_range(r.s1, r.s2, delta)?;
                if rlo == lo && rhi == hi && r.stride == 1 {
                    return Ok(None);
                }
                let idx: Vec<usize> = (rlo..=rhi)
                    .filter(|j| j.rem_euclid(r.stride as i64) == 0)
                    .map(|j| (j - lo) as usize)
                    .collect();
                if idx.is_empty() {
                    return Err(Error::InvalidInterval {
                        lo: r.s1,
                        hi: r.s2,
                        reason: format!("no grid point with stride {}", r.stride),
                    });
                }
                Ok(Some(idx))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n: problem.n(),
            lo,
            len,
            win_lo,
            win_len,
            coords,
            estimator,
            cdf,
            total_weight,
            members,
            rng,
            keep_values,
        })
    }

    fn fill_apex(&self, st: &mut FamilyState, half: usize) {
        let n = self.n;
        let anchor = st.anchor[half];
        let offset = (self.lo - self.win_lo) as usize;
        for (i, c) in self.coords.iter().enumerate() {
            let path = &st.paths[half][i];
            let has_path = c.generator.is_some();
            for k in 0..self.len {
                let (w, lag) = match self.estimator {
                    Estimator::Shift => (k, k.abs_diff(anchor)),
                    Estimator::Direct => (k + offset, (self.lo + k as i64).unsigned_abs() as usize),
                };
                let noise = if has_path { c.scale * (path[w] - path[anchor_index(self, anchor)]) } else { 0.0 };
                st.apex[k * n + i] = noise - c.penalty[lag] - c.drift[k];
            }
        }
        for k in 0..self.len {
            st.sums[k] = st.apex[k * n..(k + 1) * n].iter().sum();
        }
    }
}

/// Index in the generated window of the anchor point.
fn anchor_index(k: &FamilyKernel, anchor: usize) -> usize {
    match k.estimator {
        Estimator::Shift => anchor,
        Estimator::Direct => (-k.win_lo) as usize,
    }
}

impl PairKernel for FamilyKernel {
    type State = FamilyState;
    type Acc = Acc;

    fn state(&self) -> FamilyState {
        FamilyState {
            ws: self.coords.iter().map(|c| c.generator.as_ref().map(|g| g.workspace())).collect(),
            paths: [vec![vec![0.0; self.win_len]; self.n], vec![vec![0.0; self.win_len]; self.n]],
            anchor: [0, 0],
            apex: vec![0.0; self.len * self.n],
            sums: vec![0.0; self.len],
            gather: Vec::with_capacity(self.len * self.n),
        }
    }

    fn acc(&self) -> Acc {
        Acc {
            sums: vec![0.0; self.members.len()],
            count: 0,
            values: Vec::new(),
        }
    }

    fn generate(&self, st: &mut FamilyState, pair: u64) {
        let mut rng = self.rng.with_stream(pair).rng();
        let [pa, pb] = &mut st.paths;
        for (i, c) in self.coords.iter().enumerate() {
            if let (Some(g), Some(ws)) = (&c.generator, &mut st.ws[i]) {
                g.fill_pair(&mut rng, ws, &mut pa[i], &mut pb[i]);
            }
        }
        if self.estimator == Estimator::Shift {
            for h in 0..2 {
                let u: f64 = rng.random();
                st.anchor[h] = self.cdf.partition_point(|&c| c <= u).min(self.len - 1);
            }
        }
    }

    fn consume(&self, st: &mut FamilyState, half: usize, _replicate: usize, acc: &mut Acc) {
        self.fill_apex(st, half);
        let n = self.n;
        let outer_max = st.sums.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let norm: f64 = match self.estimator {
            Estimator::Shift => st.sums.iter().map(|s| (s - outer_max).exp()).sum(),
            Estimator::Direct => 0.0,
        };
        let mut row = Vec::new();
        for (q, member) in self.members.iter().enumerate() {
            let points: &[f64] = match member {
                None => &st.apex,
                Some(idx) => {
                    st.gather.clear();
                    for &k in idx {
                        st.gather.extend_from_slice(&st.apex[k * n..(k + 1) * n]);
                    }
                    &st.gather
                }
            };
            let (log_scale, reduced) = orthant_parts(n, points).expect("dimension checked at construction");
            let v = match self.estimator {
                Estimator::Shift => (log_scale - outer_max).exp() * reduced / norm,
                Estimator::Direct => log_scale.exp() * reduced,
            };
            acc.sums[q] += v;
            if self.keep_values {
                row.push(v);
            }
        }
        acc.count += 1;
        if self.keep_values {
            acc.values.push(row);
        }
    }
}

/// `S1 = S2 = S`: only `B(S) ~ N(0, |S|^alpha)` is needed.
struct SinglePoint {
    sd: Vec<f64>,
    shift: Vec<f64>,
    drift_sum: f64,
    estimator: Estimator,
    requests: usize,
    rng: RngPolicy,
}

impl SinglePoint {
    fn new(problem: &PiterbargProblem, s: f64, opts: &McOptions, requests: usize) -> Self {
        let n = problem.n();
        let sd = (0..n)
            .map(|i| (2.0 * problem.a[i]).sqrt() * s.abs().powf(problem.alpha[i] / 2.0))
            .collect();
        let shift = (0..n)
            .map(|i| {
                let pen = if problem.a[i] > 0.0 { problem.a[i] * s.abs().powf(problem.alpha[i]) } else { 0.0 };
                -pen - problem.drift.coords[i].eval(s)
            })
            .collect();
        Self {
            sd,
            shift,
            drift_sum: problem.drift.sum(s),
            estimator: opts.estimator,
            requests,
            rng: opts.rng,
        }
    }
}

impl PairKernel for SinglePoint {
    type State = [f64; 2];
    type Acc = Acc;

    fn state(&self) -> [f64; 2] {
        [0.0; 2]
    }

    fn acc(&self) -> Acc {
        Acc { sums: vec![0.0; self.requests], count: 0, values: Vec::new() }
    }

    fn generate(&self, st: &mut [f64; 2], pair: u64) {
        let mut rng = self.rng.with_stream(pair).rng();
        for h in st.iter_mut() {
            *h = 0.0;
        }
        for (sd, shift) in self.sd.iter().zip(&self.shift) {
            for h in st.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *h += sd * z + shift;
            }
        }
    }

    fn consume(&self, st: &mut [f64; 2], half: usize, _r: usize, acc: &mut Acc) {
        // One apex: I = exp(sum_i p_i). The shift estimator's ratio is 1 and
        // the weight is exp(-sum f), the exact value.
        let v = match self.estimator {
            Estimator::Direct => st[half].exp(),
            Estimator::Shift => (-self.drift_sum).exp(),
        };
        acc.sums.iter_mut().for_each(|s| *s += v);
        acc.count += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::super::drift::Drift;
    use super::*;

    fn brownian_half(drift: Drift) -> PiterbargProblem {
        PiterbargProblem::new(vec![1.0], vec![0.5], DriftSpec::new(vec![drift])).unwrap()
    }

    #[test]
    fn deterministic_coordinates_give_one() {
        let p = PiterbargProblem::new(vec![1.0, 1.5], vec![0.0, 0.0], DriftSpec::zero(2)).unwrap();
        for est in [Estimator::Shift, Estimator::Direct] {
            let opts = McOptions::default().with_replicates(200).with_estimator(est);
            let e = piterbarg_estimate(&p, -1.0, 2.0, &opts).unwrap();
            assert!((e.value - 1.0).abs() < 1e-12, "{est:?}: {}", e.value);
        }
    }

    #[test]
    fn single_point_identity() {
        let p = PiterbargProblem::new(
            vec![0.7, 1.2],
            vec![0.8, 1.5],
            DriftSpec::new(vec![Drift::PowerLaw { c: 0.3, gamma: 1.1 }, Drift::LinearPositive { c: 0.2 }]),
        )
        .unwrap();
        let s: f64 = 0.9;
        let exact = (-(0.3 * s.powf(1.1) + 0.2 * s)).exp();
        let opts = McOptions::default().with_replicates(40_000).with_estimator(Estimator::Direct);
        let e = piterbarg_estimate(&p, s, s, &opts).unwrap();
        assert!((e.value - exact).abs() < 3.0 * e.std_error, "{} ± {} vs {exact}", e.value, e.std_error);
        let e = piterbarg_estimate(&p, s, s, &McOptions::default().with_replicates(100)).unwrap();
        assert!((e.value - exact).abs() < 1e-15);
    }

    #[test]
    fn estimators_agree_on_short_interval() {
        let p = brownian_half(Drift::LinearPositive { c: 0.5 });
        let base = McOptions::default().with_replicates(40_000).with_delta(1.0 / 64.0);
        let s = piterbarg_estimate(&p, 0.0, 2.0, &base).unwrap();
        let d = piterbarg_estimate(&p, 0.0, 2.0, &base.with_estimator(Estimator::Direct).with_seed(9)).unwrap();
        let z = (s.value - d.value) / (s.std_error.powi(2) + d.std_error.powi(2)).sqrt();
        assert!(z.abs() < 4.0, "{} vs {}, z = {z}", s.value, d.value);
    }

    #[test]
    fn family_matches_separate_estimate_of_outer_interval() {
        let p = brownian_half(Drift::LinearPositive { c: 0.5 });
        let opts = McOptions::default().with_replicates(2000).with_delta(1.0 / 32.0);
        let fam = piterbarg_family(&p, 0.0, 2.0, &[CrnRequest::interval(0.0, 1.0), CrnRequest::interval(0.0, 2.0)], &opts).unwrap();
        let one = piterbarg_estimate(&p, 0.0, 2.0, &opts).unwrap();
        assert_eq!(fam[1].value, one.value);
        assert!(fam[0].value <= fam[1].value);
    }

    #[test]
    fn invalid_intervals() {
        let p = brownian_half(Drift::Zero);
        let opts = McOptions::default().with_replicates(100);
        assert!(matches!(piterbarg_estimate(&p, 1.0, 0.0, &opts), Err(Error::InvalidInterval { .. })));
        assert!(matches!(
            piterbarg_estimate(&p, 0.1, 0.2, &opts.with_delta(1.0)),
            Err(Error::InvalidInterval { .. })
        ));
        assert!(piterbarg_estimate(&p, 0.0, f64::INFINITY, &opts).is_err());
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let p = brownian_half(Drift::LinearPositive { c: 0.5 });
        let opts = McOptions::default().with_replicates(1000).with_delta(1.0 / 64.0);
        let a = piterbarg_estimate(&p, 0.0, 1.0, &opts).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| piterbarg_estimate(&p, 0.0, 1.0, &opts).unwrap());
        assert_eq!(a.value, b.value);
        assert_eq!(a.std_error, b.std_error);
    }

    #[test]
    fn two_sided_interval_uses_stationary_increments() {
        // With zero drift the constant depends on the interval only through
        // its length.
        let p = PiterbargProblem::new(vec![1.3], vec![1.0], DriftSpec::zero(1)).unwrap();
        let opts = McOptions::default().with_replicates(20_000).with_delta(1.0 / 32.0);
        let a = piterbarg_estimate(&p, -1.0, 1.0, &opts).unwrap();
        let b = piterbarg_estimate(&p, 0.0, 2.0, &opts.with_seed(1)).unwrap();
        let z = (a.value - b.value) / (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!(z.abs() < 4.0, "{} vs {}", a.value, b.value);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            // Per path: a sub-interval and a coarser grid both see a subset
            // of the apexes.
            #[test]
            fn nested_requests_are_ordered_per_path(
                alpha in 0.3f64..1.9,
                a in 0.2f64..2.0,
                c in 0.0f64..1.5,
                gamma in 0.5f64..2.0,
                seed: u64,
            ) {
                let p = PiterbargProblem::new(vec![alpha], vec![a], DriftSpec::new(vec![Drift::PowerLaw { c, gamma }])).unwrap();
                let requests = [
                    CrnRequest::interval(-0.5, 0.5),
                    CrnRequest::interval(-1.0, 1.0),
                    CrnRequest { s1: -1.0, s2: 1.0, stride: 2 },
                ];
                let values = piterbarg_family_values(
                    &p, -1.0, 1.0, 1.0 / 32.0, &requests, 64, Estimator::Direct, RngPolicy::seed(seed),
                ).unwrap();
                for row in &values {
                    prop_assert!(row[0] > 0.0);
                    prop_assert!(row[0] <= row[1]);
                    prop_assert!(row[2] <= row[1]);
                }
            }
        }
    }
}
