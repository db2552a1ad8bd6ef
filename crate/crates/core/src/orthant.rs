//! The weighted orthant-union integral
//! `I(P) = ∫ exp(w_1 + ... + w_n) 1{w < p componentwise for some p in P} dw`.
//!
//! All routines work relative to the apex with the largest coordinate sum:
//! after subtracting it every term of the algorithms has a nonpositive
//! exponent, and the reduced integral lies in `[1, m]`.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Largest Pareto frontier accepted by the inclusion-exclusion route (n >= 4).
pub const FRONTIER_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct ApexSet {
    dim: usize,
    flat: Vec<f64>,
}

impl ApexSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(0);
        let mut flat = Vec::with_capacity(dim * points.len());
        for p in &points {
            if p.len() != dim {
                return Err(Error::domain("apexes must share one dimension"));
            }
            flat.extend_from_slice(p);
        }
        Self::from_flat(dim, flat)
    }

    /// Row-major points, `dim` coordinates each.
    pub fn from_flat(dim: usize, flat: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("apex dimension must be at least 1"));
        }
        if flat.is_empty() || flat.len() % dim != 0 {
            return Err(Error::domain("need at least one complete apex"));
        }
        if let Some(x) = flat.iter().find(|x| !x.is_finite()) {
            return Err(Error::domain(format!("apex coordinates must be finite, got {x}")));
        }
        Ok(Self { dim, flat })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.flat.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.flat[k * self.dim..(k + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.flat.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.flat
    }

    pub fn to_vecs(&self) -> Vec<Vec<f64>> {
        self.points().map(<[f64]>::to_vec).collect()
    }
}

/// `I(P)`. May overflow to infinity for very large apexes; see
/// [`log_orthant_integral`].
pub fn orthant_integral(apexes: &ApexSet) -> Result<f64> {
    let (log_scale, reduced) = orthant_parts(apexes.dim, &apexes.flat)?;
    Ok(log_scale.exp() * reduced)
}

pub fn log_orthant_integral(apexes: &ApexSet) -> Result<f64> {
    let (log_scale, reduced) = orthant_parts(apexes.dim, &apexes.flat)?;
    Ok(log_scale + reduced.ln())
}

/// `I(P) = exp(log_scale) * reduced`, where `log_scale` is the largest
/// coordinate sum of any apex and `reduced` lies in `[1, m]`.
///
/// `flat` holds finite row-major apexes; it is not validated here.
pub fn orthant_parts(dim: usize, flat: &[f64]) -> Result<(f64, f64)> {
    debug_assert!(dim > 0 && !flat.is_empty() && flat.len() % dim == 0);
    let best = best_apex(dim, flat);
    let log_scale: f64 = best.iter().sum();
    if dim == 1 {
        return Ok((log_scale, 1.0));
    }
    let shifted: Vec<f64> = flat
        .chunks_exact(dim)
        .flat_map(|p| p.iter().zip(&best).map(|(x, b)| x - b))
        .collect();
    let reduced = match dim {
        2 => staircase_2d(&shifted),
        3 => sweep_3d(&shifted),
        _ => {
            let frontier = prune_flat(dim, &shifted);
            let count = frontier.len() / dim;
            if count > FRONTIER_CAP {
                return Err(Error::FrontierTooLarge {
                    dim,
                    frontier: count,
                    cap: FRONTIER_CAP,
                });
            }
            inclusion_exclusion(dim, &frontier)
        }
    };
    Ok((log_scale, reduced))
}

fn best_apex(dim: usize, flat: &[f64]) -> Vec<f64> {
    flat.chunks_exact(dim)
        .max_by(|a, b| {
            let sa: f64 = a.iter().sum();
            let sb: f64 = b.iter().sum();
            sa.total_cmp(&sb)
        })
        .expect("nonempty apex set")
        .to_vec()
}

/// `1 - exp(lo - hi)`, so that `exp(hi) - exp(lo) = exp(hi) * gap(hi, lo)`.
fn gap(hi: f64, lo: f64) -> f64 {
    if lo == f64::NEG_INFINITY {
        1.0
    } else {
        -(lo - hi).exp_m1()
    }
}

fn staircase_2d(flat: &[f64]) -> f64 {
    let mut pts: Vec<(f64, f64)> = flat.chunks_exact(2).map(|p| (p[0], p[1])).collect();
    pts.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
    let mut total = 0.0;
    let mut prev_y = f64::NEG_INFINITY;
    for (x, y) in pts {
        if y > prev_y {
            total += (x + y).exp() * gap(y, prev_y);
            prev_y = y;
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Sweeps the third axis downwards. Each apex, when inserted into the 2-D
/// staircase of the apexes above it, adds a fixed amount of weighted area
/// that persists for all lower sweep levels, so
/// `I = sum_p gain_p * exp(z_p)`.
fn sweep_3d(flat: &[f64]) -> f64 {
    let mut pts: Vec<[f64; 3]> = flat.chunks_exact(3).map(|p| [p[0], p[1], p[2]]).collect();
    pts.sort_by(|a, b| b[2].total_cmp(&a[2]));
    // x -> y, with y strictly decreasing in x.
    let mut stair: BTreeMap<Key, f64> = BTreeMap::new();
    let mut total = 0.0;
    for [x, y, z] in pts {
        let succ = stair.range(Key(x)..).next().map(|(_, &ys)| ys);
        if matches!(succ, Some(ys) if ys >= y) {
            continue;
        }
        let mut h = succ.unwrap_or(f64::NEG_INFINITY);
        let mut hi = x;
        let mut removed = Vec::new();
        let mut lo = f64::NEG_INFINITY;
        for (&Key(xr), &yr) in stair.range(..=Key(x)).rev() {
            if yr > y {
                lo = xr;
                break;
            }
            total += (hi + y + z).exp() * gap(hi, xr) * gap(y, h);
            removed.push(Key(xr));
            hi = xr;
            h = yr;
        }
        total += (hi + y + z).exp() * gap(hi, lo) * gap(y, h);
        for k in removed {
            stair.remove(&k);
        }
        stair.insert(Key(x), y);
    }
    total
}

fn inclusion_exclusion(dim: usize, frontier: &[f64]) -> f64 {
    let pts: Vec<&[f64]> = frontier.chunks_exact(dim).collect();
    let mut total = 0.0;
    let mut mins = vec![f64::INFINITY; dim];
    ie_dfs(&pts, 0, &mut mins, 0, &mut total);
    total
}

fn ie_dfs(pts: &[&[f64]], start: usize, mins: &mut [f64], depth: usize, total: &mut f64) {
    for k in start..pts.len() {
        let saved = mins.to_vec();
        for (m, p) in mins.iter_mut().zip(pts[k]) {
            *m = m.min(*p);
        }
        let term = mins.iter().sum::<f64>().exp();
        if depth % 2 == 0 {
            *total += term;
        } else {
            *total -= term;
        }
        ie_dfs(pts, k + 1, mins, depth + 1, total);
        mins.copy_from_slice(&saved);
    }
}

fn dominates(p: &[f64], q: &[f64]) -> bool {
    p.iter().zip(q).all(|(a, b)| a >= b)
}

/// Indices of the Pareto-maximal apexes, one representative per duplicate,
/// in input order.
fn frontier_indices(dim: usize, flat: &[f64]) -> Vec<usize> {
    let m = flat.len() / dim;
    let pt = |k: usize| &flat[k * dim..(k + 1) * dim];
    let sums: Vec<f64> = (0..m).map(|k| pt(k).iter().sum()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    // A dominating apex has a sum at least as large, so it is visited first.
    order.sort_by(|&a, &b| sums[b].total_cmp(&sums[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for k in order {
        if !kept.iter().any(|&j| dominates(pt(j), pt(k))) {
            kept.push(k);
        }
    }
    kept.sort_unstable();
    kept
}

fn prune_flat(dim: usize, flat: &[f64]) -> Vec<f64> {
    frontier_indices(dim, flat)
        .into_iter()
        .flat_map(|k| flat[k * dim..(k + 1) * dim].iter().copied())
        .collect()
}

/// Drops every apex dominated (componentwise `<=`) by another one.
pub fn pareto_prune(apexes: &ApexSet) -> ApexSet {
    ApexSet {
        dim: apexes.dim,
        flat: prune_flat(apexes.dim, &apexes.flat),
    }
}

/// Brute-force references used by the test suites and `verify`.
pub mod oracle {
    /// Inclusion-exclusion over all `2^m - 1` nonempty subsets, compensated sum.
    pub fn inclusion_exclusion(points: &[Vec<f64>]) -> f64 {
        let m = points.len();
        assert!(m <= 24, "oracle is exponential in the number of apexes");
        let n = points[0].len();
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for mask in 1u32..(1u32 << m) {
            let mut exponent = 0.0;
            for i in 0..n {
                let mut lo = f64::INFINITY;
                for (k, p) in points.iter().enumerate() {
                    if mask & (1 << k) != 0 {
                        lo = lo.min(p[i]);
                    }
                }
                exponent += lo;
            }
            let term = if mask.count_ones() % 2 == 1 {
                exponent.exp()
            } else {
                -exponent.exp()
            };
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
        }
        sum + comp
    }

    /// Cell sum over the first `n - 1` axes on a grid of step at most `step`
    /// covering `[lower, max + step]`, refined at every apex coordinate so the
    /// indicator is constant per cell. The region below `lower` is one more
    /// cell and the last axis is integrated exactly.
    pub fn grid(points: &[Vec<f64>], lower: f64, step: f64) -> f64 {
        let n = points[0].len();
        assert!(n >= 2 && points.iter().flatten().all(|&x| x > lower));
        let axes: Vec<Vec<f64>> = (0..n - 1)
            .map(|i| {
                let top = points.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max) + step;
                let mut b: Vec<f64> = (0..)
                    .map(|k| lower + k as f64 * step)
                    .take_while(|&x| x < top)
                    .chain(points.iter().map(|p| p[i]))
                    .chain([f64::NEG_INFINITY, top])
                    .collect();
                b.sort_by(f64::total_cmp);
                b.dedup();
                b
            })
            .collect();
        let mut total = 0.0;
        let mut idx = vec![0usize; n - 1];
        loop {
            let mut weight = 1.0;
            let mut mid = vec![0.0; n - 1];
            for i in 0..n - 1 {
                let (a, b) = (axes[i][idx[i]], axes[i][idx[i] + 1]);
                weight *= b.exp() - a.exp();
                mid[i] = if a.is_finite() { 0.5 * (a + b) } else { b - 1.0 };
            }
            let last = points
                .iter()
                .filter(|p| (0..n - 1).all(|i| p[i] > mid[i]))
                .map(|p| p[n - 1])
                .fold(f64::NEG_INFINITY, f64::max);
            total += weight * last.exp();
            let mut i = 0;
            loop {
                if i == n - 1 {
                    return total;
                }
                idx[i] += 1;
                if idx[i] + 1 < axes[i].len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
        }
    }

    /// Quadratic domination scan.
    pub fn pareto_bruteforce(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for (k, p) in points.iter().enumerate() {
            let dominated = points.iter().enumerate().any(|(j, q)| {
                j != k && q.iter().zip(p).all(|(a, b)| a >= b) && (q != p || j < k)
            });
            if !dominated {
                out.push(p.clone());
            }
        }
        out
    }
}
