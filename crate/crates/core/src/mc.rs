//! Batched replicate driver shared by the Monte Carlo estimators.
//!
//! Replicate `r` is half `r % 2` of pair `r / 2`, and pair `q` draws from
//! stream `q` of the caller's master seed. Batches are contiguous replicate
//! ranges evaluated in parallel and reduced in batch order, so results are
//! identical for every thread count.

use rayon::prelude::*;

pub(crate) trait PairKernel: Sync {
    type State;
    type Acc: Send;

    fn state(&self) -> Self::State;
    fn acc(&self) -> Self::Acc;
    /// Draws both halves of pair `pair` into `state`.
    fn generate(&self, state: &mut Self::State, pair: u64);
    /// Folds half `half` of the last generated pair into `acc`.
    fn consume(&self, state: &mut Self::State, half: usize, replicate: usize, acc: &mut Self::Acc);
}

pub(crate) fn batch_ranges(replicates: usize, batches: usize) -> Vec<(usize, usize)> {
    (0..batches)
        .map(|b| (b * replicates / batches, (b + 1) * replicates / batches))
        .collect()
}

pub(crate) fn run<K: PairKernel>(kernel: &K, replicates: usize, batches: usize) -> Vec<K::Acc> {
    batch_ranges(replicates, batches)
        .into_par_iter()
        .map(|(start, end)| {
            let mut state = kernel.state();
            let mut acc = kernel.acc();
            let mut current = None;
            for r in start..end {
                let pair = (r / 2) as u64;
                if current != Some(pair) {
                    kernel.generate(&mut state, pair);
                    current = Some(pair);
                }
                kernel.consume(&mut state, r % 2, r, &mut acc);
            }
            acc
        })
        .collect()
}

/// Mean and batch-means standard error from per-batch `(sum, count)`.
pub(crate) fn batch_mean_se(batches: &[(f64, usize)]) -> (f64, f64) {
    let total: f64 = batches.iter().map(|b| b.0).sum();
    let count: usize = batches.iter().map(|b| b.1).sum();
    let mean = total / count as f64;
    let k = batches.len();
    if k < 2 {
        return (mean, f64::NAN);
    }
    let ss: f64 = batches
        .iter()
        .map(|&(s, c)| {
            let d = s / c as f64 - mean;
            d * d
        })
        .sum();
    (mean, (ss / ((k - 1) * k) as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Counter;

    impl PairKernel for Counter {
        type State = [u64; 2];
        type Acc = Vec<(usize, u64)>;

        fn state(&self) -> [u64; 2] {
            [0, 0]
        }
        fn acc(&self) -> Self::Acc {
            Vec::new()
        }
        fn generate(&self, s: &mut [u64; 2], pair: u64) {
            *s = [2 * pair, 2 * pair + 1];
        }
        fn consume(&self, s: &mut [u64; 2], half: usize, r: usize, acc: &mut Self::Acc) {
            acc.push((r, s[half]));
        }
    }

    #[test]
    fn every_replicate_sees_its_own_half() {
        for (reps, batches) in [(10, 3), (7, 7), (101, 50)] {
            let out: Vec<(usize, u64)> = run(&Counter, reps, batches).into_iter().flatten().collect();
            assert_eq!(out.len(), reps);
            for (i, (r, v)) in out.into_iter().enumerate() {
                assert_eq!(r, i);
                assert_eq!(v, r as u64);
            }
        }
    }

    #[test]
    fn batch_statistics() {
        let (m, se) = batch_mean_se(&[(2.0, 2), (4.0, 2)]);
        assert_eq!(m, 1.5);
        assert!((se - 0.5).abs() < 1e-15);
    }
}
