//! Approximate entropy and plug-in information measures on discretized series.
//!
//! All logarithms are natural, so every quantity is in nats.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::scalar::{sample_std, Scalar};

pub const DEFAULT_BINS: usize = 3;
pub const DEFAULT_ORDER: usize = 1;
pub const DEFAULT_APEN_M: usize = 2;
pub const DEFAULT_R_FRAC: f64 = 0.2;
pub const MIN_SHUFFLES: usize = 99;
/// Largest dense joint table the sample estimators will allocate.
pub const MAX_TABLE_CELLS: usize = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error("series of length {len} is too short, need at least {needed}")]
    SeriesTooShort { len: usize, needed: usize },
    #[error("tolerance r must be positive")]
    NonPositiveTolerance,
    #[error("series has {distinct} distinct values, fewer than the {bins} requested bins")]
    DegenerateSeries { distinct: usize, bins: usize },
    #[error("at least two bins are required, got {0}")]
    TooFewBins(usize),
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {MIN_SHUFFLES} shuffles, got {0}")]
    TooFewShuffles(usize),
    #[error("joint table with {0} cells is too large")]
    TableTooLarge(usize),
    #[error("series contains a non-finite value")]
    NonFinite,
    #[error("invalid probability table: {0}")]
    InvalidPmf(String),
    #[error("symbol {symbol} out of range for {bins} bins")]
    SymbolOutOfRange { symbol: usize, bins: usize },
}

/// Approximate entropy `Φ^m(r) − Φ^{m+1}(r)` with self-matches counted.
pub fn apen<T: Scalar>(series: &[T], m: usize, r: T) -> Result<T, EntropyError> {
    check_apen_input(series, m, r)?;
    Ok(phi(series, m, r) - phi(series, m + 1, r))
}

/// ApEn with `r = r_frac · sd(series)`. A constant series returns zero.
pub fn apen_relative<T: Scalar>(series: &[T], m: usize, r_frac: T) -> Result<T, EntropyError> {
    if r_frac <= T::zero() {
        return Err(EntropyError::NonPositiveTolerance);
    }
    let sd = sample_std(series);
    if sd == T::zero() {
        check_len(series.len(), m + 2)?;
        return Ok(T::zero());
    }
    apen(series, m, r_frac * sd)
}

/// Mean of the block-similarity fractions `C_i^m(r)` with no logarithm applied.
///
/// Kept alongside [`apen`] for comparison; it is not an entropy.
pub fn block_similarity_mean<T: Scalar>(series: &[T], m: usize, r: T) -> Result<T, EntropyError> {
    check_apen_input(series, m, r)?;
    let c = similarity_fractions(series, m, r);
    Ok(c.iter().copied().sum::<T>() / T::from_count(c.len()))
}

fn check_len(len: usize, needed: usize) -> Result<(), EntropyError> {
    if len < needed {
        Err(EntropyError::SeriesTooShort { len, needed })
    } else {
        Ok(())
    }
}

fn check_apen_input<T: Scalar>(series: &[T], m: usize, r: T) -> Result<(), EntropyError> {
    check_len(series.len(), m + 2)?;
    if !(r > T::zero()) {
        return Err(EntropyError::NonPositiveTolerance);
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(EntropyError::NonFinite);
    }
    Ok(())
}

fn similarity_fractions<T: Scalar>(x: &[T], m: usize, r: T) -> Vec<T> {
    let blocks = x.len() + 1 - m;
    let denom = T::from_count(blocks);
    (0..blocks)
        .into_par_iter()
        .map(|i| {
            let count = (0..blocks)
                .filter(|&j| (0..m).all(|k| (x[i + k] - x[j + k]).abs() <= r))
                .count();
            T::from_count(count) / denom
        })
        .collect()
}

fn phi<T: Scalar>(x: &[T], m: usize, r: T) -> T {
    if m == 0 {
        return T::zero();
    }
    let c = similarity_fractions(x, m, r);
    c.iter().map(|v| v.ln()).sum::<T>() / T::from_count(c.len())
}

/// Equal-frequency symbolization of a real series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DiscretizedSeries<T> {
    pub symbols: Vec<usize>,
    pub bins: usize,
    /// `bins + 1` boundaries: overall minimum, the smallest value in each of bins `1..bins`, overall maximum.
    pub edges: Vec<T>,
}

impl<T: Scalar> DiscretizedSeries<T> {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Wraps symbols that are already in `0..bins`.
    pub fn from_symbols(symbols: Vec<usize>, bins: usize) -> Result<Self, EntropyError> {
        if bins < 2 {
            return Err(EntropyError::TooFewBins(bins));
        }
        if let Some(&s) = symbols.iter().find(|&&s| s >= bins) {
            return Err(EntropyError::SymbolOutOfRange { symbol: s, bins });
        }
        let edges = (0..=bins).map(T::from_count).collect();
        Ok(Self { symbols, bins, edges })
    }
}

/// Quantile binning on mid-ranks, so tied values always share a bin.
pub fn discretize<T: Scalar>(series: &[T], bins: usize) -> Result<DiscretizedSeries<T>, EntropyError> {
    if bins < 2 {
        return Err(EntropyError::TooFewBins(bins));
    }
    if series.is_empty() {
        return Err(EntropyError::SeriesTooShort { len: 0, needed: 1 });
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(EntropyError::NonFinite);
    }
    let n = series.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| series[a].partial_cmp(&series[b]).expect("finite values"));

    let mut symbols = vec![0usize; n];
    let mut distinct = 0;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && series[order[end]] == series[order[start]] {
            end += 1;
        }
        distinct += 1;
        // mid-rank of the tie group, 0-based
        let mid = (start + end - 1) as f64 / 2.0;
        let s = (((mid + 0.5) * bins as f64 / n as f64).floor() as usize).min(bins - 1);
        for &idx in &order[start..end] {
            symbols[idx] = s;
        }
        start = end;
    }
    if distinct < bins {
        return Err(EntropyError::DegenerateSeries { distinct, bins });
    }

    let min = series[order[0]];
    let max = series[order[n - 1]];
    let mut edges = vec![min; bins + 1];
    edges[bins] = max;
    let mut lowest: Vec<Option<T>> = vec![None; bins];
    for &idx in &order {
        let s = symbols[idx];
        if lowest[s].is_none() {
            lowest[s] = Some(series[idx]);
        }
    }
    for b in 1..bins {
        edges[b] = lowest[b].unwrap_or(edges[b - 1]);
    }
    Ok(DiscretizedSeries { symbols, bins, edges })
}

fn xlogx<T: Scalar>(p: T) -> T {
    if p > T::zero() {
        p * p.ln()
    } else {
        T::zero()
    }
}

/// `−Σ p log p` over a probability vector.
pub fn shannon_pmf<T: Scalar>(p: &[T]) -> T {
    -p.iter().map(|&v| xlogx(v)).sum::<T>()
}

fn check_pmf<T: Scalar>(p: &[T]) -> Result<(), EntropyError> {
    if p.is_empty() {
        return Err(EntropyError::InvalidPmf("empty table".into()));
    }
    if p.iter().any(|&v| !(v >= T::zero()) || !v.is_finite()) {
        return Err(EntropyError::InvalidPmf("negative or non-finite mass".into()));
    }
    let total: T = p.iter().copied().sum();
    if (total - T::one()).abs() > T::tol(1e-9) {
        return Err(EntropyError::InvalidPmf(format!("masses sum to {total}")));
    }
    Ok(())
}

/// `H(Z|V)` from a joint table with rows indexed by `z` and columns by `v`.
pub fn conditional_entropy_pmf<T: Scalar>(joint: &Matrix<T>) -> Result<T, EntropyError> {
    check_pmf(joint.as_slice())?;
    let pv: Vec<T> = (0..joint.cols()).map(|j| (0..joint.rows()).map(|i| joint[(i, j)]).sum()).collect();
    let h = shannon_pmf(joint.as_slice()) - shannon_pmf(&pv);
    Ok(h.max(T::zero()))
}

/// Mutual information of rows and columns of a joint table.
pub fn mutual_information_pmf<T: Scalar>(joint: &Matrix<T>) -> Result<T, EntropyError> {
    check_pmf(joint.as_slice())?;
    let pz: Vec<T> = (0..joint.rows()).map(|i| joint.row(i).iter().copied().sum()).collect();
    let pv: Vec<T> = (0..joint.cols()).map(|j| (0..joint.rows()).map(|i| joint[(i, j)]).sum()).collect();
    let mut mi = T::zero();
    for i in 0..joint.rows() {
        for j in 0..joint.cols() {
            let p = joint[(i, j)];
            if p > T::zero() {
                mi += p * (p / (pz[i] * pv[j])).ln();
            }
        }
    }
    Ok(mi.max(T::zero()))
}

/// Joint law of `(z_t, z-past, v-past)` stored densely, `z` slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferTable<T> {
    pub n_target: usize,
    pub n_target_past: usize,
    pub n_source_past: usize,
    pub probs: Vec<T>,
}

impl<T: Scalar> TransferTable<T> {
    pub fn new(n_target: usize, n_target_past: usize, n_source_past: usize, probs: Vec<T>) -> Result<Self, EntropyError> {
        if probs.len() != n_target * n_target_past * n_source_past {
            return Err(EntropyError::InvalidPmf(format!(
                "expected {} cells, got {}",
                n_target * n_target_past * n_source_past,
                probs.len()
            )));
        }
        check_pmf(&probs)?;
        Ok(Self {
            n_target,
            n_target_past,
            n_source_past,
            probs,
        })
    }

    fn from_counts(n_target: usize, n_target_past: usize, n_source_past: usize, counts: &[usize]) -> Self {
        let total = T::from_count(counts.iter().sum());
        Self {
            n_target,
            n_target_past,
            n_source_past,
            probs: counts.iter().map(|&c| T::from_count(c) / total).collect(),
        }
    }

    #[inline]
    pub fn get(&self, z: usize, zp: usize, vp: usize) -> T {
        self.probs[(z * self.n_target_past + zp) * self.n_source_past + vp]
    }

    /// `T_{V→Z} = Σ p(z, zp, vp) log [p(z | zp, vp) / p(z | zp)]`.
    pub fn transfer_entropy(&self) -> T {
        let (nz, nzp, nvp) = (self.n_target, self.n_target_past, self.n_source_past);
        let mut p_zp = vec![T::zero(); nzp];
        let mut p_z_zp = vec![T::zero(); nz * nzp];
        let mut p_zp_vp = vec![T::zero(); nzp * nvp];
        for z in 0..nz {
            for zp in 0..nzp {
                for vp in 0..nvp {
                    let p = self.get(z, zp, vp);
                    p_zp[zp] += p;
                    p_z_zp[z * nzp + zp] += p;
                    p_zp_vp[zp * nvp + vp] += p;
                }
            }
        }
        let mut te = T::zero();
        for z in 0..nz {
            for zp in 0..nzp {
                for vp in 0..nvp {
                    let p = self.get(z, zp, vp);
                    if p > T::zero() {
                        te += p * (p * p_zp[zp] / (p_z_zp[z * nzp + zp] * p_zp_vp[zp * nvp + vp])).ln();
                    }
                }
            }
        }
        te.max(T::zero())
    }

    /// `H(Z_t | z-past)`, the ceiling on any transfer into `Z`.
    pub fn target_conditional_entropy(&self) -> T {
        let (nz, nzp, nvp) = (self.n_target, self.n_target_past, self.n_source_past);
        let mut p_z_zp = vec![T::zero(); nz * nzp];
        let mut p_zp = vec![T::zero(); nzp];
        for z in 0..nz {
            for zp in 0..nzp {
                let s: T = (0..nvp).map(|vp| self.get(z, zp, vp)).sum();
                p_z_zp[z * nzp + zp] = s;
                p_zp[zp] += s;
            }
        }
        (shannon_pmf(&p_z_zp) - shannon_pmf(&p_zp)).max(T::zero())
    }
}

/// Plug-in `H(Z)` of a symbol sequence.
pub fn shannon<T: Scalar>(d: &DiscretizedSeries<T>) -> T {
    if d.is_empty() {
        return T::zero();
    }
    let mut counts = vec![0usize; d.bins];
    for &s in &d.symbols {
        counts[s] += 1;
    }
    shannon_pmf(&to_pmf::<T>(&counts))
}

/// Plug-in `H(Z|V)` of two aligned symbol sequences.
pub fn conditional<T: Scalar>(dz: &DiscretizedSeries<T>, dv: &DiscretizedSeries<T>) -> Result<T, EntropyError> {
    if dz.len() != dv.len() {
        return Err(EntropyError::LengthMismatch(dz.len(), dv.len()));
    }
    if dz.is_empty() {
        return Ok(T::zero());
    }
    let mut counts = vec![0usize; dz.bins * dv.bins];
    for (&z, &v) in dz.symbols.iter().zip(&dv.symbols) {
        counts[z * dv.bins + v] += 1;
    }
    let joint = Matrix::from_vec(dz.bins, dv.bins, to_pmf(&counts));
    conditional_entropy_pmf(&joint)
}

fn to_pmf<T: Scalar>(counts: &[usize]) -> Vec<T> {
    let total = T::from_count(counts.iter().sum::<usize>().max(1));
    counts.iter().map(|&c| T::from_count(c) / total).collect()
}

fn past_index(symbols: &[usize], t: usize, k: usize, bins: usize) -> usize {
    (1..=k).fold(0, |acc, j| acc * bins + symbols[t - j])
}

fn past_states(bins: usize, k: usize) -> Result<usize, EntropyError> {
    bins.checked_pow(k as u32).ok_or(EntropyError::TableTooLarge(usize::MAX))
}

fn check_symbol_series(len: usize, k: usize, bins: usize) -> Result<(), EntropyError> {
    if bins < 2 {
        return Err(EntropyError::TooFewBins(bins));
    }
    check_len(len, k + 2)?;
    let recommended = bins.saturating_pow(k as u32 + 1).saturating_mul(10).saturating_add(k);
    if len < recommended {
        log::warn!("series length {len} is below the recommended {recommended} for order {k} with {bins} bins");
    }
    Ok(())
}

/// `S_Z = H(Z_t) − H(Z_t | k-lag past)` on symbols.
pub fn self_entropy_symbols<T: Scalar>(symbols: &[usize], k: usize, bins: usize) -> Result<T, EntropyError> {
    check_symbol_series(symbols.len(), k, bins)?;
    let npast = past_states(bins, k)?;
    let cells = npast.checked_mul(bins).ok_or(EntropyError::TableTooLarge(usize::MAX))?;
    if cells > MAX_TABLE_CELLS {
        return Err(EntropyError::TableTooLarge(cells));
    }
    let mut counts = vec![0usize; cells];
    for t in k..symbols.len() {
        counts[symbols[t] * npast + past_index(symbols, t, k, bins)] += 1;
    }
    mutual_information_pmf(&Matrix::from_vec(bins, npast, to_pmf(&counts)))
}

/// Discretizes `series` and returns its self-entropy.
pub fn self_entropy<T: Scalar>(series: &[T], k: usize, bins: usize) -> Result<T, EntropyError> {
    check_symbol_series(series.len(), k, bins)?;
    let d = discretize(series, bins)?;
    self_entropy_symbols(&d.symbols, k, bins)
}

/// Empirical joint table of `(z_t, z-past, v-past)` for `t ≥ k`.
pub fn transfer_table<T: Scalar>(
    source: &[usize],
    target: &[usize],
    k: usize,
    bins: usize,
) -> Result<TransferTable<T>, EntropyError> {
    if source.len() != target.len() {
        return Err(EntropyError::LengthMismatch(source.len(), target.len()));
    }
    check_symbol_series(target.len(), k, bins)?;
    let npast = past_states(bins, k)?;
    let cells = npast
        .checked_mul(npast)
        .and_then(|c| c.checked_mul(bins))
        .ok_or(EntropyError::TableTooLarge(usize::MAX))?;
    if cells > MAX_TABLE_CELLS {
        return Err(EntropyError::TableTooLarge(cells));
    }
    let mut counts = vec![0usize; cells];
    for t in k..target.len() {
        let zp = past_index(target, t, k, bins);
        let vp = past_index(source, t, k, bins);
        counts[(target[t] * npast + zp) * npast + vp] += 1;
    }
    Ok(TransferTable::from_counts(bins, npast, npast, &counts))
}

/// Plug-in `T_{V→Z}` on symbol sequences.
pub fn transfer_entropy_symbols<T: Scalar>(
    source: &[usize],
    target: &[usize],
    k: usize,
    bins: usize,
) -> Result<T, EntropyError> {
    Ok(transfer_table::<T>(source, target, k, bins)?.transfer_entropy())
}

/// Discretizes both series and returns `T_{source→target}`.
pub fn transfer_entropy<T: Scalar>(source: &[T], target: &[T], k: usize, bins: usize) -> Result<T, EntropyError> {
    if source.len() != target.len() {
        return Err(EntropyError::LengthMismatch(source.len(), target.len()));
    }
    check_symbol_series(target.len(), k, bins)?;
    let s = discretize(source, bins)?;
    let z = discretize(target, bins)?;
    transfer_entropy_symbols(&s.symbols, &z.symbols, k, bins)
}

/// Result of a circular-shift surrogate test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Significance<T> {
    pub observed: T,
    pub p_value: T,
    pub n_shuffles: usize,
}

/// Share of circular shifts of the source whose transfer entropy reaches the observed value.
pub fn shuffle_significance_symbols<T: Scalar>(
    source: &[usize],
    target: &[usize],
    k: usize,
    bins: usize,
    n_shuffles: usize,
    seed: u64,
) -> Result<Significance<T>, EntropyError> {
    if n_shuffles < MIN_SHUFFLES {
        return Err(EntropyError::TooFewShuffles(n_shuffles));
    }
    let observed = transfer_entropy_symbols::<T>(source, target, k, bins)?;
    let n = source.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shifts: Vec<usize> = (0..n_shuffles).map(|_| rng.random_range(1..n)).collect();
    let surrogate_te: Vec<T> = shifts
        .par_iter()
        .map(|&shift| {
            let mut shifted = source.to_vec();
            shifted.rotate_left(shift);
            transfer_entropy_symbols::<T>(&shifted, target, k, bins)
        })
        .collect::<Result<_, _>>()?;
    let tie = T::tol(1e-12);
    let hits = surrogate_te.iter().filter(|&&te| te >= observed - tie).count();
    Ok(Significance {
        observed,
        p_value: T::from_count(hits) / T::from_count(n_shuffles),
        n_shuffles,
    })
}

/// Discretizes both series and runs [`shuffle_significance_symbols`].
pub fn shuffle_significance<T: Scalar>(
    source: &[T],
    target: &[T],
    k: usize,
    bins: usize,
    n_shuffles: usize,
    seed: u64,
) -> Result<Significance<T>, EntropyError> {
    if source.len() != target.len() {
        return Err(EntropyError::LengthMismatch(source.len(), target.len()));
    }
    let s = discretize(source, bins)?;
    let z = discretize(target, bins)?;
    shuffle_significance_symbols(&s.symbols, &z.symbols, k, bins, n_shuffles, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoOptions {
    pub bins: usize,
    pub order: usize,
    pub apen_m: usize,
    pub r_frac: f64,
    /// Zero disables the surrogate test.
    pub n_shuffles: usize,
    pub seed: u64,
}

impl Default for InfoOptions {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            order: DEFAULT_ORDER,
            apen_m: DEFAULT_APEN_M,
            r_frac: DEFAULT_R_FRAC,
            n_shuffles: MIN_SHUFFLES,
            seed: 0,
        }
    }
}

/// Bivariate information summary for a target `Z` and a driver `V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct InformationReport<T> {
    pub shannon_z: T,
    pub shannon_v: T,
    pub conditional_z_given_v: T,
    pub self_entropy_z: T,
    pub self_entropy_v: T,
    pub transfer_v_to_z: T,
    pub transfer_z_to_v: T,
    pub apen_z: T,
    pub apen_v: T,
    pub p_value_v_to_z: Option<T>,
    pub p_value_z_to_v: Option<T>,
    pub options: InfoOptions,
}

/// One labeled arrow of the information-flow diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowEdge {
    pub from: String,
    pub to: String,
    pub measure: String,
    pub value: f64,
}

impl<T: Scalar> InformationReport<T> {
    /// Transfer arrows between the two series plus a self-loop for each self-entropy.
    pub fn flow_edges(&self, z_label: &str, v_label: &str) -> Vec<FlowEdge> {
        let edge = |from: &str, to: &str, measure: &str, value: T| FlowEdge {
            from: from.to_string(),
            to: to.to_string(),
            measure: measure.to_string(),
            value: value.to_f64_lossy(),
        };
        vec![
            edge(z_label, v_label, "transfer_entropy", self.transfer_z_to_v),
            edge(v_label, z_label, "transfer_entropy", self.transfer_v_to_z),
            edge(z_label, z_label, "self_entropy", self.self_entropy_z),
            edge(v_label, v_label, "self_entropy", self.self_entropy_v),
        ]
    }
}

pub fn information_report<T: Scalar>(z: &[T], v: &[T], opts: &InfoOptions) -> Result<InformationReport<T>, EntropyError> {
    if z.len() != v.len() {
        return Err(EntropyError::LengthMismatch(z.len(), v.len()));
    }
    let (k, bins) = (opts.order, opts.bins);
    check_symbol_series(z.len(), k, bins)?;
    let dz = discretize(z, bins)?;
    let dv = discretize(v, bins)?;
    let r_frac = T::lit(opts.r_frac);

    let (p_vz, p_zv) = if opts.n_shuffles > 0 {
        let a = shuffle_significance_symbols::<T>(&dv.symbols, &dz.symbols, k, bins, opts.n_shuffles, opts.seed)?;
        let b = shuffle_significance_symbols::<T>(
            &dz.symbols,
            &dv.symbols,
            k,
            bins,
            opts.n_shuffles,
            opts.seed.wrapping_add(1),
        )?;
        (Some(a.p_value), Some(b.p_value))
    } else {
        (None, None)
    };

    Ok(InformationReport {
        shannon_z: shannon(&dz),
        shannon_v: shannon(&dv),
        conditional_z_given_v: conditional(&dz, &dv)?,
        self_entropy_z: self_entropy_symbols(&dz.symbols, k, bins)?,
        self_entropy_v: self_entropy_symbols(&dv.symbols, k, bins)?,
        transfer_v_to_z: transfer_entropy_symbols(&dv.symbols, &dz.symbols, k, bins)?,
        transfer_z_to_v: transfer_entropy_symbols(&dz.symbols, &dv.symbols, k, bins)?,
        apen_z: apen_relative(z, opts.apen_m, r_frac)?,
        apen_v: apen_relative(v, opts.apen_m, r_frac)?,
        p_value_v_to_z: p_vz,
        p_value_z_to_v: p_zv,
        options: opts.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn apen_of_constant_is_zero() {
        let x = vec![3.5f64; 50];
        assert_eq!(apen(&x, 2, 0.1).unwrap(), 0.0);
        assert_eq!(apen_relative(&x, 2, 0.2).unwrap(), 0.0);
    }

    #[test]
    fn apen_errors() {
        assert!(matches!(apen(&[1.0f64, 2.0, 3.0], 2, 0.1), Err(EntropyError::SeriesTooShort { .. })));
        assert_eq!(apen(&[1.0f64; 10], 2, 0.0), Err(EntropyError::NonPositiveTolerance));
    }

    #[test]
    fn apen_invariant_under_affine_maps() {
        let x: Vec<f64> = (0..300).map(|i| ((i * 37 % 101) as f64).sin() + 0.01 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 5.0 * v + 7.0).collect();
        let a = apen_relative(&x, 2, 0.2).unwrap();
        let b = apen_relative(&y, 2, 0.2).unwrap();
        assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn alternating_series_is_regular() {
        let x: Vec<f64> = (0..200).map(|i| (i % 2) as f64).collect();
        assert!(apen_relative(&x, 2, 0.2).unwrap().abs() < 0.05);
        let literal = block_similarity_mean(&x, 2, 0.2).unwrap();
        assert!((literal - 0.5).abs() < 0.01);
    }

    #[test]
    fn discretize_examples() {
        let d = discretize(&[1.0f64, 2.0, 3.0, 4.0], 2).unwrap();
        assert_eq!(d.symbols, vec![0, 0, 1, 1]);
        let bits = [0.0f64, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0];
        let d = discretize(&bits, 2).unwrap();
        assert_eq!(d.symbols, bits.iter().map(|&b| b as usize).collect::<Vec<_>>());
        assert!(d.edges.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(
            discretize(&[1.0f64, 1.0, 2.0], 3),
            Err(EntropyError::DegenerateSeries { distinct: 2, bins: 3 })
        );
    }

    #[test]
    fn shannon_and_conditional_examples() {
        let d = DiscretizedSeries::<f64>::from_symbols(vec![0, 1, 2, 3, 3, 2, 1, 0], 4).unwrap();
        assert!((shannon(&d) - 4f64.ln()).abs() < 1e-15);
        assert!(conditional(&d, &d).unwrap().abs() < 1e-15);

        let pz = [0.2f64, 0.3, 0.5];
        let pv = [0.6f64, 0.4];
        let joint = Matrix::from_fn(3, 2, |i, j| pz[i] * pv[j]);
        assert!((conditional_entropy_pmf(&joint).unwrap() - shannon_pmf(&pz)).abs() < 1e-12);
    }

    #[test]
    fn self_entropy_examples() {
        let alt: Vec<usize> = (0..101).map(|i| i % 2).collect();
        assert!((self_entropy_symbols::<f64>(&alt, 1, 2).unwrap() - LN2).abs() < 1e-12);
        assert!(matches!(self_entropy_symbols::<f64>(&[0, 1], 1, 2), Err(EntropyError::SeriesTooShort { .. })));
    }

    #[test]
    fn transfer_table_examples() {
        // z_t = v_{t-1} with v a fair coin: cells (z, zp, vp) with z == vp, each 1/4
        let mut probs = vec![0.0f64; 8];
        for zp in 0..2 {
            for vp in 0..2 {
                probs[(vp * 2 + zp) * 2 + vp] = 0.25;
            }
        }
        let copy = TransferTable::new(2, 2, 2, probs).unwrap();
        assert!((copy.transfer_entropy() - LN2).abs() < 1e-12);
        assert!(copy.transfer_entropy() <= copy.target_conditional_entropy() + 1e-9);

        let pz = [0.3f64, 0.7];
        let pzp = [0.45f64, 0.55];
        let pvp = [0.1f64, 0.9];
        let mut prod = Vec::new();
        for z in pz {
            for zp in pzp {
                for vp in pvp {
                    prod.push(z * zp * vp);
                }
            }
        }
        let t = TransferTable::new(2, 2, 2, prod).unwrap();
        assert!(t.transfer_entropy().abs() < 1e-12);
        assert!(TransferTable::new(2, 2, 2, vec![0.1f64; 8]).is_err());
    }

    #[test]
    fn all_ties_give_unit_p_value() {
        let v: Vec<usize> = vec![0; 200];
        let z: Vec<usize> = (0..200).map(|i| i % 2).collect();
        let s = shuffle_significance_symbols::<f64>(&v, &z, 1, 2, 99, 7).unwrap();
        assert_eq!(s.p_value, 1.0);
        assert!(shuffle_significance_symbols::<f64>(&v, &z, 1, 2, 98, 7).is_err());
    }
}
