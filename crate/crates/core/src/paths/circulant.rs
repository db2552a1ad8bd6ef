//! Exact sampling of stationary Gaussian sequences.
//!
//! The default route is circulant embedding: the autocovariance is mirrored
//! into a circulant of even size, its eigenvalues come from one FFT, and each
//! complex FFT of weighted white noise yields two independent exact samples
//! (real and imaginary parts). When the embedding is not nonnegative definite
//! the sampler falls back to a Cholesky factor of the Toeplitz matrix.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Negative eigenvalues above `-EIGEN_CLIP * max_eigenvalue` are clipped to zero.
pub const EIGEN_CLIP: f64 = 1e-10;

/// Largest sequence length for which the Cholesky fallback is attempted.
pub const CHOLESKY_MAX_LEN: usize = 4097;

#[derive(Clone)]
enum Method {
    /// White noise with the given variance.
    Iid(f64),
    /// Perfectly correlated sequence: one draw repeated.
    Constant(f64),
    Circulant {
        sqrt_eig: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    Cholesky(LowerTriangular),
}

/// Sampler for a stationary Gaussian sequence of fixed length.
#[derive(Clone)]
pub struct StationarySampler {
    len: usize,
    method: Method,
}

/// Per-thread scratch space for [`StationarySampler::fill_pair`].
pub struct Workspace {
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
    z1: Vec<f64>,
    z2: Vec<f64>,
}

impl StationarySampler {
    /// `acov[k]` is the covariance at lag `k`; it must hold at least `len`
    /// lags. The circulant has size `2 * (acov.len() - 1)`, so passing one
    /// extra lag beyond `len - 1` keeps power-of-two lengths FFT friendly.
    pub fn from_autocovariance(acov: &[f64], len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::domain("sequence length must be positive"));
        }
        if acov.len() < len {
            return Err(Error::domain(format!(
                "need {} autocovariance lags, got {}",
                len,
                acov.len()
            )));
        }
        let var = acov[0];
        if !(var > 0.0) || acov.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("autocovariance must be finite with positive variance"));
        }
        let lags = &acov[..len];
        let tol = 1e-14 * var;
        if lags[1..].iter().all(|c| c.abs() <= tol) {
            return Ok(Self { len, method: Method::Iid(var) });
        }
        if lags.iter().all(|c| (c - var).abs() <= tol) {
            return Ok(Self { len, method: Method::Constant(var) });
        }

        let k_max = acov.len() - 1;
        let size = 2 * k_max;
        let mut row: Vec<Complex<f64>> = (0..size)
            .map(|k| Complex::new(acov[k.min(size - k)], 0.0))
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(size);
        fft.process(&mut row);
        let max_eig = row.iter().map(|c| c.re).fold(f64::MIN, f64::max);
        let min_eig = row.iter().map(|c| c.re).fold(f64::MAX, f64::min);
        if min_eig < -EIGEN_CLIP * max_eig {
            if len <= CHOLESKY_MAX_LEN {
                log::debug!(
                    "circulant embedding of size {size} has eigenvalue {min_eig:e}; using Cholesky"
                );
                let factor = LowerTriangular::toeplitz(lags)?;
                return Ok(Self { len, method: Method::Cholesky(factor) });
            }
            return Err(Error::Embedding {
                min_eigenvalue: min_eig,
                max_eigenvalue: max_eig,
                size,
            });
        }
        let scale = 1.0 / size as f64;
        let sqrt_eig = row.iter().map(|c| (c.re.max(0.0) * scale).sqrt()).collect();
        Ok(Self {
            len,
            method: Method::Circulant { sqrt_eig, fft },
        })
    }

    /// Sampler from a full covariance matrix (row-major `len x len`), used for
    /// non-stationary user covariances.
    pub fn from_covariance_matrix(cov: &[f64], len: usize) -> Result<Self> {
        let factor = LowerTriangular::cholesky(cov, len)?;
        Ok(Self { len, method: Method::Cholesky(factor) })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn uses_fallback(&self) -> bool {
        matches!(self.method, Method::Cholesky(_))
    }

    pub fn workspace(&self) -> Workspace {
        let (buf, scratch) = match &self.method {
            Method::Circulant { sqrt_eig, fft } => (
                vec![Complex::new(0.0, 0.0); sqrt_eig.len()],
                vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()],
            ),
            _ => (Vec::new(), Vec::new()),
        };
        let z = match &self.method {
            Method::Cholesky(_) => self.len,
            _ => 0,
        };
        Workspace {
            buf,
            scratch,
            z1: vec![0.0; z],
            z2: vec![0.0; z],
        }
    }

    /// Writes two independent samples of the sequence into `a` and `b`.
    pub fn fill_pair<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        ws: &mut Workspace,
        a: &mut [f64],
        b: &mut [f64],
    ) {
        let n = self.len;
        debug_assert!(a.len() >= n && b.len() >= n);
        match &self.method {
            Method::Iid(var) => {
                let sd = var.sqrt();
                for x in a[..n].iter_mut() {
                    *x = sd * rng.sample::<f64, _>(StandardNormal);
                }
                for x in b[..n].iter_mut() {
                    *x = sd * rng.sample::<f64, _>(StandardNormal);
                }
            }
            Method::Constant(var) => {
                let sd = var.sqrt();
                let xa = sd * rng.sample::<f64, _>(StandardNormal);
                let xb = sd * rng.sample::<f64, _>(StandardNormal);
                a[..n].fill(xa);
                b[..n].fill(xb);
            }
            Method::Circulant { sqrt_eig, fft } => {
                for (w, s) in ws.buf.iter_mut().zip(sqrt_eig) {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    *w = Complex::new(s * re, s * im);
                }
                fft.process_with_scratch(&mut ws.buf, &mut ws.scratch);
                for k in 0..n {
                    a[k] = ws.buf[k].re;
                    b[k] = ws.buf[k].im;
                }
            }
            Method::Cholesky(l) => {
                for z in ws.z1.iter_mut() {
                    *z = rng.sample(StandardNormal);
                }
                for z in ws.z2.iter_mut() {
                    *z = rng.sample(StandardNormal);
                }
                l.apply(&ws.z1, &mut a[..n]);
                l.apply(&ws.z2, &mut b[..n]);
            }
        }
    }
}

/// Dense lower-triangular factor stored row by row.
#[derive(Clone)]
struct LowerTriangular {
    n: usize,
    rows: Vec<f64>,
}

impl LowerTriangular {
    fn toeplitz(lags: &[f64]) -> Result<Self> {
        let n = lags.len();
        let mut cov = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                cov[i * n + j] = lags[i.abs_diff(j)];
            }
        }
        Self::cholesky(&cov, n)
    }

    /// Cholesky factor of a positive semidefinite matrix. Pivots that fall to
    /// within `EIGEN_CLIP` of zero (relative to the largest diagonal entry)
    /// zero their column instead of failing.
    fn cholesky(cov: &[f64], n: usize) -> Result<Self> {
        if cov.len() != n * n {
            return Err(Error::domain("covariance matrix has wrong size"));
        }
        let max_diag = (0..n).map(|i| cov[i * n + i]).fold(0.0, f64::max);
        if !(max_diag > 0.0) {
            // Degenerate: every entry is zero.
            return Ok(Self { n, rows: vec![0.0; n * (n + 1) / 2] });
        }
        let tol = EIGEN_CLIP * max_diag * n as f64;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = cov[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d < -tol {
                return Err(Error::Embedding {
                    min_eigenvalue: d,
                    max_eigenvalue: max_diag,
                    size: n,
                });
            }
            if d <= tol {
                continue;
            }
            let ljj = d.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = cov[i * n + j];
                let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
                for k in 0..j {
                    s -= ri[k] * rj[k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        let mut rows = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            rows.extend_from_slice(&l[i * n..i * n + i + 1]);
        }
        Ok(Self { n, rows })
    }

    fn apply(&self, z: &[f64], out: &mut [f64]) {
        let mut offset = 0;
        for i in 0..self.n {
            let row = &self.rows[offset..offset + i + 1];
            out[i] = row.iter().zip(z).map(|(l, z)| l * z).sum();
            offset += i + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngPolicy;

    fn empirical_cov(sampler: &StationarySampler, pairs: usize, seed: u64) -> Vec<f64> {
        let n = sampler.len();
        let mut ws = sampler.workspace();
        let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
        let mut acc = vec![0.0; n];
        for q in 0..pairs {
            let mut rng = RngPolicy::new(seed, q as u64).rng();
            sampler.fill_pair(&mut rng, &mut ws, &mut a, &mut b);
            for k in 0..n {
                acc[k] += a[0] * a[k] + b[0] * b[k];
            }
        }
        acc.iter().map(|s| s / (2 * pairs) as f64).collect()
    }

    #[test]
    fn circulant_reproduces_ar1_autocovariance() {
        let rho: f64 = 0.6;
        let acov: Vec<f64> = (0..=16).map(|k| rho.powi(k)).collect();
        let s = StationarySampler::from_autocovariance(&acov, 17).unwrap();
        assert!(!s.uses_fallback());
        let emp = empirical_cov(&s, 20_000, 3);
        for k in 0..17 {
            // var of the product estimator is at most 2 / (2 * pairs)
            let se = (2.0f64 / 40_000.0).sqrt();
            assert!((emp[k] - acov[k]).abs() < 4.0 * se, "lag {k}: {} vs {}", emp[k], acov[k]);
        }
    }

    #[test]
    fn detects_white_noise_and_constant() {
        let s = StationarySampler::from_autocovariance(&[2.0, 0.0, 0.0], 3).unwrap();
        assert!(matches!(s.method, Method::Iid(_)));
        let s = StationarySampler::from_autocovariance(&[1.0, 1.0, 1.0], 3).unwrap();
        assert!(matches!(s.method, Method::Constant(_)));
    }

    #[test]
    fn falls_back_to_cholesky_when_embedding_is_indefinite() {
        // Gaussian correlation: positive definite, minimal embedding is not.
        let acov: Vec<f64> = (0..=8).map(|k| (-(k as f64 / 3.0).powi(2)).exp()).collect();
        let s = StationarySampler::from_autocovariance(&acov, 9).unwrap();
        assert!(s.uses_fallback());
        let emp = empirical_cov(&s, 20_000, 5);
        for k in 0..9 {
            assert!((emp[k] - acov[k]).abs() < 0.04, "lag {k}");
        }
    }

    #[test]
    fn rejects_nonpositive_variance() {
        assert!(StationarySampler::from_autocovariance(&[0.0, 0.0], 2).is_err());
        assert!(StationarySampler::from_autocovariance(&[1.0], 2).is_err());
    }

    #[test]
    fn semidefinite_cholesky_handles_rank_deficiency() {
        // Rank-one matrix v v^T.
        let v = [1.0, 2.0, 3.0];
        let cov: Vec<f64> = (0..9).map(|i| v[i / 3] * v[i % 3]).collect();
        let l = LowerTriangular::cholesky(&cov, 3).unwrap();
        let mut out = [0.0; 3];
        l.apply(&[1.0, 5.0, -7.0], &mut out);
        for k in 0..3 {
            assert!((out[k] - v[k]).abs() < 1e-12);
        }
    }
}
