//! Exact Gaussian path generation.

pub mod circulant;
pub mod fbm;
pub mod stationary;
pub mod vector;

use std::io::Write;

pub use circulant::{StationarySampler, CHOLESKY_MAX_LEN, EIGEN_CLIP};
pub use fbm::{fbm_covariance, fgn_autocovariance, sample_fbm, FbmGenerator};
pub use stationary::{exp_power_correlation, sample_stationary, stationary_sampler};
pub use vector::{
    sample_vector, CoordSpec, Covariance, CovarianceFn, ProcessSpec, Trend, TrendFn, VectorSampler,
    VectorWorkspace,
};

/// A joint sample of `n` coordinates on a uniform grid `0 = t_0 < ... < t_m = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    pub times: Vec<f64>,
    /// `values[i][k]` is coordinate `i` at `times[k]`.
    pub values: Vec<Vec<f64>>,
}

impl GridPath {
    pub fn new(times: Vec<f64>, values: Vec<Vec<f64>>) -> Self {
        debug_assert!(values.iter().all(|v| v.len() == times.len()));
        Self { times, values }
    }

    pub fn uniform_times(horizon: f64, m: usize) -> Vec<f64> {
        let delta = horizon / m as f64;
        let mut t: Vec<f64> = (0..=m).map(|k| k as f64 * delta).collect();
        t[m] = horizon;
        t
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Number of grid intervals `m`.
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn delta(&self) -> f64 {
        self.times[self.steps()] / self.steps() as f64
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.steps()]
    }

    /// `min_i values[i][k]`.
    pub fn coordinate_min(&self, k: usize) -> f64 {
        self.values.iter().map(|v| v[k]).fold(f64::INFINITY, f64::min)
    }

    /// First grid index at which every coordinate is strictly above `u`.
    pub fn first_crossing(&self, u: f64) -> Option<usize> {
        (0..self.times.len()).find(|&k| self.coordinate_min(k) > u)
    }

    /// CSV with header `t,x1,...,xn`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((1..=self.dim()).map(|i| format!("x{i}")))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for (k, t) in self.times.iter().enumerate() {
            write!(w, "{t}")?;
            for v in &self.values {
                write!(w, ",{}", v[k])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = Vec::new();
        self.write_csv(&mut out).expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("CSV output is ASCII")
    }
}
