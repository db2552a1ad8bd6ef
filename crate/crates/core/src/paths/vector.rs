//! Vector processes with independent coordinates, scale divisors and trend.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde_json::json;

use super::circulant::{StationarySampler, Workspace, CHOLESKY_MAX_LEN};
use super::fbm::{check_alpha, FbmGenerator, FbmWorkspace};
use super::stationary::stationary_sampler;
use super::GridPath;
use crate::error::{Error, Result};
use crate::rng::RngPolicy;

/// A named covariance kernel `c(s, t)`.
#[derive(Clone)]
pub struct CovarianceFn {
    pub name: String,
    pub f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for CovarianceFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CovarianceFn({})", self.name)
    }
}

/// A named trend `h(t)`.
#[derive(Clone)]
pub struct TrendFn {
    pub name: String,
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for TrendFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TrendFn({})", self.name)
    }
}

#[derive(Debug, Clone)]
pub enum Covariance {
    /// Standard fBm, `Var B(t) = t^alpha`.
    FBm { alpha: f64 },
    /// Unit variance, correlation `exp(-a |t - s|^alpha)`.
    StationaryExp { a: f64, alpha: f64 },
    User(CovarianceFn),
}

#[derive(Debug, Clone)]
pub enum Trend {
    Zero,
    /// `h(t) = slope * t`.
    Linear { slope: f64 },
    User(TrendFn),
}

impl Trend {
    pub fn user(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Trend::User(TrendFn {
            name: name.into(),
            f: Arc::new(f),
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Trend::Zero => 0.0,
            Trend::Linear { slope } => slope * t,
            Trend::User(h) => (h.f)(t),
        }
    }

    fn describe(&self) -> serde_json::Value {
        match self {
            Trend::Zero => json!("zero"),
            Trend::Linear { slope } => json!({ "linear": slope }),
            Trend::User(h) => json!({ "user": h.name }),
        }
    }
}

impl Covariance {
    pub fn user(name: impl Into<String>, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Covariance::User(CovarianceFn {
            name: name.into(),
            f: Arc::new(f),
        })
    }

    fn describe(&self) -> serde_json::Value {
        match self {
            Covariance::FBm { alpha } => json!({ "fbm": { "alpha": alpha } }),
            Covariance::StationaryExp { a, alpha } => {
                json!({ "stationary_exp": { "a": a, "alpha": alpha } })
            }
            Covariance::User(c) => json!({ "user": c.name }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CoordSpec {
    pub covariance: Covariance,
    pub trend: Trend,
    /// Path divisor `d_i`.
    pub scale: f64,
}

impl CoordSpec {
    pub fn fbm(alpha: f64) -> Self {
        Self {
            covariance: Covariance::FBm { alpha },
            trend: Trend::Zero,
            scale: 1.0,
        }
    }

    pub fn with_trend(mut self, trend: Trend) -> Self {
        self.trend = trend;
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::domain(format!("scale d must be positive, got {}", self.scale)));
        }
        match self.covariance {
            Covariance::FBm { alpha } => check_alpha(alpha),
            Covariance::StationaryExp { a, alpha } => {
                check_alpha(alpha)?;
                if a > 0.0 && a.is_finite() {
                    Ok(())
                } else {
                    Err(Error::domain(format!("correlation scale a must be positive, got {a}")))
                }
            }
            Covariance::User(_) => Ok(()),
        }
    }
}

/// Centered Gaussian vector process with independent coordinates plus trend.
#[derive(Debug, Clone)]
pub struct ProcessSpec {
    pub coords: Vec<CoordSpec>,
    pub horizon: f64,
}

impl ProcessSpec {
    pub fn new(coords: Vec<CoordSpec>, horizon: f64) -> Result<Self> {
        let spec = Self { coords, horizon };
        spec.validate()?;
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.coords.is_empty() {
            return Err(Error::domain("process needs at least one coordinate"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::domain(format!("horizon must be positive, got {}", self.horizon)));
        }
        for (i, c) in self.coords.iter().enumerate() {
            c.validate().map_err(|e| e.at_coordinate(i))?;
        }
        Ok(())
    }

    pub fn describe(&self) -> serde_json::Value {
        json!({
            "n": self.n(),
            "horizon": self.horizon,
            "coords": self.coords.iter().map(|c| json!({
                "covariance": c.covariance.describe(),
                "trend": c.trend.describe(),
                "scale": c.scale,
            })).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone)]
enum Kernel {
    /// Unit-step fBm scaled by `delta^(alpha/2)`.
    Fbm { generator: FbmGenerator, step_scale: f64 },
    Sequence(StationarySampler),
}

#[derive(Clone)]
struct CoordSampler {
    kernel: Kernel,
    factor: f64,
    trend: Vec<f64>,
}

enum CoordWorkspace {
    Fbm(FbmWorkspace),
    Sequence(Workspace),
}

/// Scratch space for [`VectorSampler::fill_pair`], one per worker thread.
pub struct VectorWorkspace {
    coords: Vec<CoordWorkspace>,
}

/// A [`ProcessSpec`] prepared for repeated sampling on a fixed grid.
#[derive(Clone)]
pub struct VectorSampler {
    times: Vec<f64>,
    coords: Vec<CoordSampler>,
}

impl VectorSampler {
    pub fn new(spec: &ProcessSpec, m: usize) -> Result<Self> {
        spec.validate()?;
        if m == 0 {
            return Err(Error::domain("grid size must be positive"));
        }
        let times = GridPath::uniform_times(spec.horizon, m);
        let delta = spec.horizon / m as f64;
        let coords = spec
            .coords
            .iter()
            .enumerate()
            .map(|(i, c)| {
                build_coord(c, &times, delta).map_err(|e| e.at_coordinate(i))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { times, coords })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn points(&self) -> usize {
        self.times.len()
    }

    pub fn workspace(&self) -> VectorWorkspace {
        VectorWorkspace {
            coords: self
                .coords
                .iter()
                .map(|c| match &c.kernel {
                    Kernel::Fbm { generator, .. } => CoordWorkspace::Fbm(generator.workspace()),
                    Kernel::Sequence(s) => CoordWorkspace::Sequence(s.workspace()),
                })
                .collect(),
        }
    }

    /// Buffers shaped `n x (m + 1)`.
    pub fn buffer(&self) -> Vec<Vec<f64>> {
        vec![vec![0.0; self.points()]; self.n()]
    }

    /// Two independent joint samples. Coordinates draw from `rng` in index
    /// order, so equal specs and equal streams give equal paths.
    pub fn fill_pair<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        ws: &mut VectorWorkspace,
        a: &mut [Vec<f64>],
        b: &mut [Vec<f64>],
        include_trend: bool,
    ) {
        for (i, c) in self.coords.iter().enumerate() {
            let (ai, bi) = (&mut a[i], &mut b[i]);
            let step = match (&c.kernel, &mut ws.coords[i]) {
                (Kernel::Fbm { generator, step_scale }, CoordWorkspace::Fbm(w)) => {
                    generator.fill_pair(rng, w, ai, bi);
                    *step_scale
                }
                (Kernel::Sequence(s), CoordWorkspace::Sequence(w)) => {
                    s.fill_pair(rng, w, ai, bi);
                    1.0
                }
                _ => unreachable!("workspace built for another sampler"),
            };
            let factor = step * c.factor;
            for v in [ai, bi] {
                if include_trend {
                    for (x, h) in v.iter_mut().zip(&c.trend) {
                        *x = *x * factor + h;
                    }
                } else {
                    v.iter_mut().for_each(|x| *x *= factor);
                }
            }
        }
    }
}

fn build_coord(c: &CoordSpec, times: &[f64], delta: f64) -> Result<CoordSampler> {
    let m = times.len() - 1;
    let kernel = match &c.covariance {
        Covariance::FBm { alpha } => Kernel::Fbm {
            generator: FbmGenerator::new(*alpha, m)?,
            step_scale: delta.powf(alpha / 2.0),
        },
        Covariance::StationaryExp { a, alpha } => {
            Kernel::Sequence(stationary_sampler(*a, *alpha, delta, m + 1)?)
        }
        Covariance::User(cf) => {
            let len = times.len();
            if len > CHOLESKY_MAX_LEN {
                return Err(Error::domain(format!(
                    "user covariance needs a dense factorization; {len} points exceeds {CHOLESKY_MAX_LEN}"
                )));
            }
            let mut cov = vec![0.0; len * len];
            for (j, &s) in times.iter().enumerate() {
                for (k, &t) in times.iter().enumerate().take(j + 1) {
                    let st = (cf.f)(s, t);
                    let ts = (cf.f)(t, s);
                    if !st.is_finite() || (st - ts).abs() > 1e-12 * st.abs().max(1.0) {
                        return Err(Error::domain(format!(
                            "user covariance is not symmetric or finite at ({s}, {t}): {st} vs {ts}"
                        )));
                    }
                    cov[j * len + k] = st;
                    cov[k * len + j] = st;
                }
            }
            Kernel::Sequence(StationarySampler::from_covariance_matrix(&cov, len)?)
        }
    };
    Ok(CoordSampler {
        kernel,
        factor: 1.0 / c.scale,
        trend: times.iter().map(|&t| c.trend.eval(t)).collect(),
    })
}

/// One joint sample of `spec` on `m` uniform steps.
pub fn sample_vector(spec: &ProcessSpec, m: usize, rng: RngPolicy, include_trend: bool) -> Result<GridPath> {
    let sampler = VectorSampler::new(spec, m)?;
    let mut ws = sampler.workspace();
    let mut a = sampler.buffer();
    let mut b = sampler.buffer();
    sampler.fill_pair(&mut rng.rng(), &mut ws, &mut a, &mut b, include_trend);
    Ok(GridPath::new(sampler.times, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brownian(n: usize) -> ProcessSpec {
        ProcessSpec::new(vec![CoordSpec::fbm(1.0); n], 1.0).unwrap()
    }

    #[test]
    fn trend_is_added_pointwise() {
        let spec = ProcessSpec::new(
            vec![CoordSpec::fbm(1.0).with_trend(Trend::Linear { slope: -1.0 })],
            1.0,
        )
        .unwrap();
        let raw = sample_vector(&spec, 32, RngPolicy::new(3, 5), false).unwrap();
        let with = sample_vector(&spec, 32, RngPolicy::new(3, 5), true).unwrap();
        for k in 0..=32 {
            let diff = with.values[0][k] - (raw.values[0][k] - raw.times[k]);
            assert!(diff.abs() < 1e-14);
        }
    }

    #[test]
    fn coordinates_are_uncorrelated() {
        let spec = brownian(2);
        let reps = 4000u64;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for r in 0..reps {
            let p = sample_vector(&spec, 16, RngPolicy::new(8, r), false).unwrap();
            let (x, y) = (p.values[0][16], p.values[1][16]);
            sxy += x * y;
            sxx += x * x;
            syy += y * y;
        }
        let corr = sxy / (sxx * syy).sqrt();
        assert!(corr.abs() < 3.0 / (reps as f64).sqrt(), "{corr}");
    }

    #[test]
    fn scale_divides_variance() {
        let spec = ProcessSpec::new(
            vec![CoordSpec::fbm(1.0).with_scale(2.0), CoordSpec::fbm(1.0).with_scale(3.0)],
            1.0,
        )
        .unwrap();
        let reps = 8000u64;
        let mut s = [0.0; 2];
        for r in 0..reps {
            let p = sample_vector(&spec, 8, RngPolicy::new(21, r), false).unwrap();
            s[0] += p.values[0][8].powi(2);
            s[1] += p.values[1][8].powi(2);
        }
        let band = 4.0 * (2.0 / reps as f64).sqrt();
        assert!((s[0] / reps as f64 * 4.0 - 1.0).abs() < band);
        assert!((s[1] / reps as f64 * 9.0 - 1.0).abs() < band);
    }

    #[test]
    fn errors_carry_coordinate_index() {
        let spec = ProcessSpec {
            coords: vec![CoordSpec::fbm(1.0), CoordSpec::fbm(3.0)],
            horizon: 1.0,
        };
        match VectorSampler::new(&spec, 8) {
            Err(Error::Coordinate { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {:?}", other.err()),
        }
    }

    #[test]
    fn asymmetric_user_covariance_rejected() {
        let spec = ProcessSpec::new(
            vec![CoordSpec {
                covariance: Covariance::user("skew", |s, t| s.min(t) + 0.1 * (s - t)),
                trend: Trend::Zero,
                scale: 1.0,
            }],
            1.0,
        )
        .unwrap();
        assert!(matches!(VectorSampler::new(&spec, 8), Err(Error::Coordinate { index: 0, .. })));
    }

    #[test]
    fn user_brownian_covariance_matches_fbm_law() {
        let spec = ProcessSpec::new(
            vec![CoordSpec {
                covariance: Covariance::user("min", |s: f64, t: f64| s.min(t)),
                trend: Trend::Zero,
                scale: 1.0,
            }],
            2.0,
        )
        .unwrap();
        let reps = 6000u64;
        let mut s = 0.0;
        for r in 0..reps {
            let p = sample_vector(&spec, 8, RngPolicy::new(13, r), false).unwrap();
            assert_eq!(p.values[0][0], 0.0);
            s += p.values[0][8].powi(2);
        }
        let var = s / reps as f64;
        assert!((var / 2.0 - 1.0).abs() < 4.0 * (2.0 / reps as f64).sqrt(), "{var}");
    }

    #[test]
    fn rejects_empty_and_bad_horizon() {
        assert!(ProcessSpec::new(vec![], 1.0).is_err());
        assert!(ProcessSpec::new(vec![CoordSpec::fbm(1.0)], 0.0).is_err());
        assert!(ProcessSpec::new(vec![CoordSpec::fbm(1.0).with_scale(0.0)], 1.0).is_err());
    }
}
