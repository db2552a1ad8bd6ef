//! Unit-variance stationary processes with correlation `exp(-a |t|^alpha)`.

use super::circulant::StationarySampler;
use super::fbm::check_alpha;
use super::GridPath;
use crate::error::{Error, Result};
use crate::rng::RngPolicy;

pub fn exp_power_correlation(a: f64, alpha: f64, lag: f64) -> f64 {
    (-a * lag.abs().powf(alpha)).exp()
}

/// Sampler for `points` equally spaced values of the process, spacing `delta`.
pub fn stationary_sampler(a: f64, alpha: f64, delta: f64, points: usize) -> Result<StationarySampler> {
    check_alpha(alpha)?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("correlation scale a must be positive, got {a}")));
    }
    if points == 0 {
        return Err(Error::domain("need at least one grid point"));
    }
    if points == 1 {
        return StationarySampler::from_autocovariance(&[1.0], 1);
    }
    let acov: Vec<f64> = (0..points)
        .map(|k| exp_power_correlation(a, alpha, k as f64 * delta))
        .collect();
    StationarySampler::from_autocovariance(&acov, points)
}

/// Exact path on `t_k = k T / m`, `k = 0..=m`.
pub fn sample_stationary(a: f64, alpha: f64, horizon: f64, m: usize, rng: RngPolicy) -> Result<GridPath> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::domain(format!("horizon must be positive, got {horizon}")));
    }
    if m == 0 {
        return Err(Error::domain("grid size must be positive"));
    }
    let delta = horizon / m as f64;
    let sampler = stationary_sampler(a, alpha, delta, m + 1)?;
    let mut ws = sampler.workspace();
    let mut x = vec![0.0; m + 1];
    let mut y = vec![0.0; m + 1];
    sampler.fill_pair(&mut rng.rng(), &mut ws, &mut x, &mut y);
    Ok(GridPath::new(GridPath::uniform_times(horizon, m), vec![x]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(sample_stationary(0.0, 1.0, 1.0, 8, RngPolicy::seed(0)).is_err());
        assert!(sample_stationary(1.0, 2.5, 1.0, 8, RngPolicy::seed(0)).is_err());
        assert!(sample_stationary(1.0, 1.0, -1.0, 8, RngPolicy::seed(0)).is_err());
    }

    #[test]
    fn unit_marginal_variance() {
        let reps = 4000u64;
        let mut s = 0.0;
        for r in 0..reps {
            let p = sample_stationary(3.0, 1.3, 2.0, 32, RngPolicy::new(17, r)).unwrap();
            s += p.values[0][0].powi(2);
        }
        let var = s / reps as f64;
        assert!((var - 1.0).abs() < 4.0 * (2.0 / reps as f64).sqrt(), "{var}");
    }

    #[test]
    fn smooth_gaussian_correlation_uses_fallback_and_stays_exact() {
        // a = 1, alpha = 2 over [0, 0.1]: embedding is indefinite.
        let sampler = stationary_sampler(1.0, 2.0, 0.1 / 64.0, 65).unwrap();
        assert!(sampler.uses_fallback());
        let reps = 2000u64;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for r in 0..reps {
            let p = sample_stationary(1.0, 2.0, 0.1, 64, RngPolicy::new(2, r)).unwrap();
            let (x, y) = (p.values[0][0], p.values[0][1]);
            sxy += x * y;
            sxx += x * x;
            syy += y * y;
        }
        let corr = sxy / (sxx * syy).sqrt();
        let target = (-(0.1f64 / 64.0).powi(2)).exp();
        assert!((corr - target).abs() < 1e-4, "{corr} vs {target}");
    }
}
