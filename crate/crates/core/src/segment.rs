//! Kernel change-point detection with an exact dynamic program.
//!
//! Segments are half-open index ranges `[a, b)` of the series. The cost of a
//! segment is its kernel scatter `(b − a) − (1/(b − a)) ΣΣ k(x_s, x_t)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub const DEFAULT_MIN_LEN: usize = 2;
pub const MAX_BANDWIDTH_PAIRS: usize = 1_000_000;
/// Longest series accepted; the prefix table is `(T + 1)²` scalars.
pub const MAX_SERIES_LEN: usize = 8192;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SegmentError {
    #[error("series of length {len} is too short, need at least {needed}")]
    SeriesTooShort { len: usize, needed: usize },
    #[error("series of length {len} exceeds the supported maximum {max}")]
    SeriesTooLong { len: usize, max: usize },
    #[error("empty segment ({a}, {b}]")]
    EmptySegment { a: usize, b: usize },
    #[error("cannot place {k_star} change points in {len} points with minimum segment length {min_len}")]
    InfeasiblePartition { k_star: usize, len: usize, min_len: usize },
    #[error("number of change points must be at least 1")]
    InvalidChangepointCount,
    #[error("bandwidth must be positive and finite")]
    InvalidBandwidth,
    #[error("series contains a non-finite value")]
    NonFinite,
}

/// Positive-definite kernel on scalar observations.
pub trait Kernel<T: Scalar>: Sync {
    fn eval(&self, x: T, y: T) -> T;
    fn bandwidth(&self) -> T;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Gaussian<T> {
    pub gamma: T,
}

impl<T: Scalar> Gaussian<T> {
    pub fn new(gamma: T) -> Result<Self, SegmentError> {
        if !(gamma > T::zero()) || !gamma.is_finite() {
            return Err(SegmentError::InvalidBandwidth);
        }
        Ok(Self { gamma })
    }
}

impl<T: Scalar> Kernel<T> for Gaussian<T> {
    #[inline]
    fn eval(&self, x: T, y: T) -> T {
        let d = x - y;
        (-self.gamma * d * d).exp()
    }

    fn bandwidth(&self) -> T {
        self.gamma
    }
}

/// `1 / median` of pairwise squared distances.
///
/// Falls back to `1` with a warning when the median is zero. More than
/// [`MAX_BANDWIDTH_PAIRS`] pairs are subsampled with a fixed seed.
pub fn median_bandwidth<T: Scalar>(series: &[T]) -> Result<T, SegmentError> {
    let n = series.len();
    if n < 2 {
        return Err(SegmentError::SeriesTooShort { len: n, needed: 2 });
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(SegmentError::NonFinite);
    }
    let total = n * (n - 1) / 2;
    let sq = |i: usize, j: usize| {
        let d = series[i] - series[j];
        d * d
    };
    let mut d2: Vec<T> = if total <= MAX_BANDWIDTH_PAIRS {
        (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).map(|(i, j)| sq(i, j)).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        (0..MAX_BANDWIDTH_PAIRS)
            .map(|_| {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                sq(i, j)
            })
            .collect()
    };
    let m = d2.len();
    let cmp = |a: &T, b: &T| a.partial_cmp(b).expect("finite distances");
    let upper = *d2.select_nth_unstable_by(m / 2, cmp).1;
    let median = if m % 2 == 1 {
        upper
    } else {
        let lower = d2[..m / 2].iter().copied().fold(T::neg_infinity(), T::max);
        (lower + upper) / T::lit(2.0)
    };
    if median > T::zero() {
        Ok(T::one() / median)
    } else {
        log::warn!("median pairwise distance is zero; using bandwidth 1");
        Ok(T::one())
    }
}

/// Two-dimensional prefix sums of the Gram matrix, so any block sum costs O(1).
pub struct GramPrefix<T> {
    n: usize,
    prefix: Vec<T>,
}

impl<T: Scalar> GramPrefix<T> {
    pub fn new<K: Kernel<T>>(series: &[T], kernel: &K) -> Result<Self, SegmentError> {
        let n = series.len();
        if n > MAX_SERIES_LEN {
            return Err(SegmentError::SeriesTooLong {
                len: n,
                max: MAX_SERIES_LEN,
            });
        }
        if series.iter().any(|x| !x.is_finite()) {
            return Err(SegmentError::NonFinite);
        }
        let w = n + 1;
        // row prefix sums in parallel, then accumulate down the columns
        let mut prefix = vec![T::zero(); w * w];
        prefix[w..].par_chunks_mut(w).enumerate().for_each(|(i, row)| {
            let mut acc = T::zero();
            for j in 0..n {
                acc += kernel.eval(series[i], series[j]);
                row[j + 1] = acc;
            }
        });
        for i in 2..w {
            let (done, rest) = prefix.split_at_mut(i * w);
            let prev = &done[(i - 1) * w..];
            for (cur, &p) in rest[..w].iter_mut().zip(prev) {
                *cur += p;
            }
        }
        Ok(Self { n, prefix })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    fn p(&self, i: usize, j: usize) -> T {
        self.prefix[i * (self.n + 1) + j]
    }

    /// `Σ_{s,t ∈ [a, b)} k(x_s, x_t)`.
    #[inline]
    pub fn block_sum(&self, a: usize, b: usize) -> T {
        self.p(b, b) - self.p(a, b) - self.p(b, a) + self.p(a, a)
    }

    #[inline]
    pub fn cost(&self, a: usize, b: usize) -> T {
        let len = T::from_count(b - a);
        (len - self.block_sum(a, b) / len).max(T::zero())
    }
}

/// Scatter cost of the points `series[a..b]`.
pub fn segment_cost<T: Scalar, K: Kernel<T>>(series: &[T], a: usize, b: usize, kernel: &K) -> Result<T, SegmentError> {
    if a >= b || b > series.len() {
        return Err(SegmentError::EmptySegment { a, b });
    }
    let seg = &series[a..b];
    let s: T = seg.iter().map(|&x| seg.iter().map(|&y| kernel.eval(x, y)).sum::<T>()).sum();
    let len = T::from_count(b - a);
    Ok((len - s / len).max(T::zero()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SegmentationResult<T> {
    pub changepoints: Vec<usize>,
    pub segment_costs: Vec<T>,
    pub total_cost: T,
    pub bandwidth: T,
}

impl<T: Scalar> SegmentationResult<T> {
    /// Segment boundaries including the endpoints `0` and `len`.
    pub fn boundaries(&self, len: usize) -> Vec<usize> {
        std::iter::once(0)
            .chain(self.changepoints.iter().copied())
            .chain(std::iter::once(len))
            .collect()
    }

    /// `segment,start,end,cost` rows with a header line; `end` is exclusive.
    pub fn to_delimited(&self, len: usize, delimiter: char) -> String {
        let d = delimiter;
        let mut out = format!("segment{d}start{d}end{d}cost\n");
        for (s, (w, c)) in self.boundaries(len).windows(2).zip(&self.segment_costs).enumerate() {
            out.push_str(&format!("{s}{d}{}{d}{}{d}{c}\n", w[0], w[1]));
        }
        out
    }
}

fn check_partition(len: usize, k_star: usize, min_len: usize) -> Result<(), SegmentError> {
    if k_star == 0 {
        return Err(SegmentError::InvalidChangepointCount);
    }
    let needed = (k_star + 1) * min_len.max(1);
    if len < needed {
        return Err(SegmentError::InfeasiblePartition { k_star, len, min_len });
    }
    Ok(())
}

/// Suffix tables `f[j][a]`: best cost of splitting `[a, T)` into `j + 1` segments.
fn suffix_tables<T: Scalar>(gram: &GramPrefix<T>, segments: usize, min_len: usize) -> Vec<Vec<T>> {
    let n = gram.len();
    let inf = T::infinity();
    let mut tables: Vec<Vec<T>> = Vec::with_capacity(segments);
    let first: Vec<T> = (0..=n)
        .map(|a| if n - a >= min_len { gram.cost(a, n) } else { inf })
        .collect();
    tables.push(first);
    for _ in 1..segments {
        let prev = tables.last().expect("at least one layer");
        let next: Vec<T> = (0..=n)
            .into_par_iter()
            .map(|a| {
                let mut best = inf;
                for b in (a + min_len)..=n {
                    if prev[b] < inf {
                        let v = gram.cost(a, b) + prev[b];
                        if v < best {
                            best = v;
                        }
                    }
                }
                best
            })
            .collect();
        tables.push(next);
    }
    tables
}

fn reconstruct<T: Scalar>(gram: &GramPrefix<T>, tables: &[Vec<T>], k_star: usize, min_len: usize, bandwidth: T) -> SegmentationResult<T> {
    let n = gram.len();
    let mut changepoints = Vec::with_capacity(k_star);
    let mut segment_costs = Vec::with_capacity(k_star + 1);
    let mut a = 0;
    for j in (1..=k_star).rev() {
        let target = tables[j][a];
        let slack = T::tol(1e-12) * target.abs().max(T::one());
        let prev = &tables[j - 1];
        let b = ((a + min_len)..=n)
            .find(|&b| prev[b] < T::infinity() && gram.cost(a, b) + prev[b] <= target + slack)
            .expect("optimal split exists");
        segment_costs.push(gram.cost(a, b));
        changepoints.push(b);
        a = b;
    }
    segment_costs.push(gram.cost(a, n));
    let total_cost = segment_costs.iter().copied().sum();
    SegmentationResult {
        changepoints,
        segment_costs,
        total_cost,
        bandwidth,
    }
}

/// Optimal placement of exactly `k_star` change points.
///
/// Among equal-cost optima the lexicographically smallest vector of change
/// points is returned.
pub fn detect_changepoints<T: Scalar, K: Kernel<T>>(
    series: &[T],
    k_star: usize,
    kernel: &K,
    min_len: usize,
) -> Result<SegmentationResult<T>, SegmentError> {
    let min_len = min_len.max(1);
    check_partition(series.len(), k_star, min_len)?;
    let gram = GramPrefix::new(series, kernel)?;
    let tables = suffix_tables(&gram, k_star + 1, min_len);
    Ok(reconstruct(&gram, &tables, k_star, min_len, kernel.bandwidth()))
}

/// Gaussian kernel, default minimum length; `gamma = None` uses [`median_bandwidth`].
pub fn detect_changepoints_gaussian<T: Scalar>(
    series: &[T],
    k_star: usize,
    gamma: Option<T>,
) -> Result<SegmentationResult<T>, SegmentError> {
    let gamma = match gamma {
        Some(g) => g,
        None => median_bandwidth(series)?,
    };
    detect_changepoints(series, k_star, &Gaussian::new(gamma)?, DEFAULT_MIN_LEN)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ElbowPoint<T> {
    pub k_star: usize,
    pub total_cost: T,
    pub changepoints: Vec<usize>,
}

/// Optimal totals for every `K = 1..=k_max` from one set of DP tables.
///
/// Values of `K` that cannot be placed under `min_len` are left out.
pub fn elbow_report<T: Scalar, K: Kernel<T>>(
    series: &[T],
    k_max: usize,
    kernel: &K,
    min_len: usize,
) -> Result<Vec<ElbowPoint<T>>, SegmentError> {
    let min_len = min_len.max(1);
    check_partition(series.len(), 1, min_len)?;
    let k_fit = (series.len() / min_len - 1).min(k_max);
    let gram = GramPrefix::new(series, kernel)?;
    let tables = suffix_tables(&gram, k_fit + 1, min_len);
    Ok((1..=k_fit)
        .map(|k| {
            let r = reconstruct(&gram, &tables, k, min_len, kernel.bandwidth());
            ElbowPoint {
                k_star: k,
                total_cost: r.total_cost,
                changepoints: r.changepoints,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bandwidth_examples() {
        assert_eq!(median_bandwidth(&[0.0f64, 1.0]).unwrap(), 1.0);
        assert_eq!(median_bandwidth(&[0.0f64, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(median_bandwidth(&[0.0f64, 1.0, 2.0]).unwrap(), 1.0);
        assert!(median_bandwidth(&[1.0f64]).is_err());
    }

    #[test]
    fn cost_examples() {
        let k = Gaussian::new(1.0f64).unwrap();
        assert_eq!(segment_cost(&[3.0f64; 6], 0, 6, &k).unwrap(), 0.0);
        assert_eq!(segment_cost(&[1.0f64, 2.0], 1, 2, &k).unwrap(), 0.0);
        let c = segment_cost(&[0.0f64, 10.0], 0, 2, &k).unwrap();
        assert!((c - (1.0 - (-100f64).exp())).abs() < 1e-15);
        assert!(segment_cost(&[0.0f64, 1.0], 1, 1, &k).is_err());

        let x = [0.3f64, -1.2, 2.5, 0.0, 0.7];
        let g = GramPrefix::new(&x, &k).unwrap();
        for a in 0..5 {
            for b in (a + 1)..=5 {
                assert!((g.cost(a, b) - segment_cost(&x, a, b, &k).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mean_shift_is_found() {
        let x: Vec<f64> = (0..100).map(|i| if i < 50 { 0.0 } else { 1.0 }).collect();
        let r = detect_changepoints_gaussian(&x, 1, Some(1.0)).unwrap();
        assert_eq!(r.changepoints, vec![50]);
        assert!((r.total_cost - r.segment_costs.iter().sum::<f64>()).abs() < 1e-9);
    }

    #[test]
    fn constant_series_ties_to_smallest_split() {
        let r = detect_changepoints_gaussian(&[2.0f64; 10], 1, Some(1.0)).unwrap();
        assert_eq!(r.changepoints, vec![2]);
        assert_eq!(r.total_cost, 0.0);
    }

    #[test]
    fn infeasible_and_invalid() {
        let k = Gaussian::new(1.0f64).unwrap();
        assert!(matches!(
            detect_changepoints(&[0.0f64; 5], 2, &k, 2),
            Err(SegmentError::InfeasiblePartition { .. })
        ));
        assert_eq!(detect_changepoints(&[0.0f64; 5], 0, &k, 2), Err(SegmentError::InvalidChangepointCount));
        assert!(Gaussian::new(0.0f64).is_err());
    }

    #[test]
    fn elbow_is_nonincreasing() {
        let x: Vec<f64> = (0..40).map(|i| ((i * 13 % 7) as f64) + if i > 20 { 5.0 } else { 0.0 }).collect();
        let k = Gaussian::new(0.5f64).unwrap();
        let e = elbow_report(&x, 5, &k, 2).unwrap();
        assert_eq!(e.len(), 5);
        assert!(e.windows(2).all(|w| w[1].total_cost <= w[0].total_cost + 1e-12));
        let direct = detect_changepoints(&x, 3, &k, 2).unwrap();
        assert_eq!(direct.changepoints, e[2].changepoints);
    }
}
