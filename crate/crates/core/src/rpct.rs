//! Reciprocal comparison tensors, their constrained rank-1 consensus
//! decomposition, and the chaos-index series derived from it.

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entropy::{self, EntropyError};
use crate::linalg::Matrix;
use crate::panel::{PanelError, PricePanel, ReturnsPanel};
use crate::rpcm::{self, ComparisonMatrix, PowerOptions, RpcmError};
use crate::scalar::{dot, mean, norm2, sample_std, Scalar};

#[derive(Debug, Error)]
pub enum RpctError {
    #[error("tensor has no slices")]
    Empty,
    #[error("slice {index} has order {found}, expected {expected}")]
    OrderMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("slice {0} is not reciprocal")]
    NonReciprocalSlice(usize),
    #[error("{count} dates for {slices} slices")]
    DateCountMismatch { count: usize, slices: usize },
    #[error("decomposition did not converge in {iterations} sweeps (last change {change:e}, rel_error {rel_error:e})")]
    NoConvergence {
        iterations: usize,
        change: f64,
        rel_error: f64,
    },
    #[error("factor {0} collapsed below the representable range")]
    DegenerateFactor(&'static str),
    #[error("slice index {index} out of range for horizon {horizon}")]
    IndexOutOfRange { index: usize, horizon: usize },
    #[error("series is {0}, aggregation needs daily input")]
    NotDaily(Aggregation),
    #[error("cannot parse date `{0}` (expected YYYY-MM-DD)")]
    BadDate(String),
    #[error("homogeneity threshold must exceed 1 (got {0})")]
    BadThreshold(f64),
    #[error("no lags requested")]
    NoLags,
    #[error(transparent)]
    Matrix(#[from] RpcmError),
    #[error(transparent)]
    Panel(#[from] PanelError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

/// `N × N × T` stack of reciprocal comparison matrices indexed by date.
#[derive(Clone, Debug)]
pub struct ComparisonTensor<T> {
    lag: usize,
    dates: Vec<String>,
    slices: Vec<ComparisonMatrix<T>>,
}

impl<T: Scalar> ComparisonTensor<T> {
    pub fn new(lag: usize, dates: Vec<String>, slices: Vec<ComparisonMatrix<T>>) -> Result<Self, RpctError> {
        let first = slices.first().ok_or(RpctError::Empty)?;
        if dates.len() != slices.len() {
            return Err(RpctError::DateCountMismatch {
                count: dates.len(),
                slices: slices.len(),
            });
        }
        let n = first.order();
        for (index, s) in slices.iter().enumerate() {
            if s.order() != n {
                return Err(RpctError::OrderMismatch {
                    index,
                    expected: n,
                    found: s.order(),
                });
            }
            if !s.is_reciprocal() {
                return Err(RpctError::NonReciprocalSlice(index));
            }
        }
        Ok(Self { lag, dates, slices })
    }

    pub fn lag(&self) -> usize {
        self.lag
    }

    pub fn order(&self) -> usize {
        self.slices[0].order()
    }

    pub fn horizon(&self) -> usize {
        self.slices.len()
    }

    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn slice(&self, t: usize) -> &ComparisonMatrix<T> {
        &self.slices[t]
    }

    pub fn slices(&self) -> &[ComparisonMatrix<T>] {
        &self.slices
    }

    pub fn frobenius_norm(&self) -> T {
        self.slices
            .iter()
            .map(|s| {
                let f = s.entries().frobenius_norm();
                f * f
            })
            .sum::<T>()
            .sqrt()
    }

    /// Permutes asset order in every slice: new index `k` takes old asset `perm[k]`.
    pub fn permute_assets(&self, perm: &[usize]) -> Result<Self, RpctError> {
        let n = self.order();
        let slices = self
            .slices
            .iter()
            .map(|s| ComparisonMatrix::new(Matrix::from_fn(n, n, |i, j| s.get(perm[i], perm[j]))))
            .collect::<Result<_, _>>()?;
        Self::new(self.lag, self.dates.clone(), slices)
    }
}

/// One slice per date with `a_ij = r_i / r_j`.
pub fn build_rpct<T: Scalar>(returns: &ReturnsPanel<T>) -> Result<ComparisonTensor<T>, RpctError> {
    let slices = (0..returns.horizon())
        .into_par_iter()
        .map(|t| ComparisonMatrix::from_weights(returns.row(t)))
        .collect::<Result<Vec<_>, _>>()?;
    ComparisonTensor::new(returns.lag, returns.dates.clone(), slices)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DecomposeOptions {
    /// Largest factor change (relative for `z`) that counts as converged.
    pub tol: f64,
    pub max_iters: usize,
    /// Only used to perturb away from a collapsed factor.
    pub seed: u64,
    /// Return the last iterate flagged unconverged instead of failing.
    pub accept_unconverged: bool,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 500,
            seed: 0,
            accept_unconverged: false,
        }
    }
}

/// Consensus factors `z ∘ (x yᵀ)` with unit-norm `x`, `y` and all magnitude in `z`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Rank1Factors<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub z: Vec<T>,
    /// `‖𝒜 − Â‖_F / ‖𝒜‖_F`.
    pub rel_error: T,
    pub iterations: usize,
    pub converged: bool,
    /// Squared residual after initialization and after each sweep.
    pub objective_history: Vec<T>,
}

impl<T: Scalar> Rank1Factors<T> {
    pub fn reconstruct_slice(&self, t: usize) -> Matrix<T> {
        Matrix::outer(&self.x, &self.y).scale(self.z[t])
    }

    /// True when the squared residual never rose by more than `slack · ‖𝒜‖²`.
    pub fn is_monotone(&self, tensor_norm_sq: T, slack: T) -> bool {
        self.objective_history
            .windows(2)
            .all(|w| w[1] <= w[0] + slack * tensor_norm_sq)
    }
}

fn objective<T: Scalar>(tensor: &ComparisonTensor<T>, x: &[T], y: &[T], z: &[T]) -> T {
    let n = tensor.order();
    tensor
        .slices()
        .iter()
        .zip(z)
        .map(|(s, &zt)| {
            let mut acc = T::zero();
            for i in 0..n {
                let zx = zt * x[i];
                for (j, &a) in s.entries().row(i).iter().enumerate() {
                    let d = a - zx * y[j];
                    acc += d * d;
                }
            }
            acc
        })
        .sum()
}

fn normalize_into<T: Scalar>(v: &mut [T], which: &'static str) -> Result<T, RpctError> {
    let nrm = norm2(v);
    if !(nrm > T::min_positive_value() * T::lit(1e8)) || !nrm.is_finite() {
        return Err(RpctError::DegenerateFactor(which));
    }
    v.iter_mut().for_each(|x| *x /= nrm);
    Ok(nrm)
}

/// Rank-1 alternating least squares with positivity preserved by construction.
///
/// Each half-step solves its least-squares subproblem exactly and then moves
/// the factor's norm into `z`, so the residual is nonincreasing sweep to sweep.
pub fn consensus_decompose<T: Scalar>(
    tensor: &ComparisonTensor<T>,
    opts: &DecomposeOptions,
) -> Result<Rank1Factors<T>, RpctError> {
    let n = tensor.order();
    let horizon = tensor.horizon();
    let tol = T::tol(opts.tol);
    let norm = tensor.frobenius_norm();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let unit = T::one() / T::from_count(n).sqrt();
    let mut x = vec![unit; n];
    let mut y = vec![unit; n];
    let mut z: Vec<T> = tensor.slices().iter().map(|s| mean(s.entries().as_slice())).collect();
    let mut history = vec![objective(tensor, &x, &y, &z)];
    let mut converged = false;
    let mut iterations = 0;
    let mut change = T::infinity();
    let mut escapes = 0;

    while iterations < opts.max_iters {
        iterations += 1;
        let (x_old, y_old, z_old) = (x.clone(), y.clone(), z.clone());
        let zz: T = z.iter().map(|&v| v * v).sum();
        if !(zz > T::zero()) {
            return Err(RpctError::DegenerateFactor("z"));
        }

        // x ← Σ_t z_t A_t y / (Σ z_t² ‖y‖²)
        let mut xs = vec![T::zero(); n];
        for (s, &zt) in tensor.slices().iter().zip(&z) {
            for (acc, v) in xs.iter_mut().zip(s.entries().matvec(&y)) {
                *acc += zt * v;
            }
        }
        xs.iter_mut().for_each(|v| *v /= zz);
        let sx = match normalize_into(&mut xs, "x") {
            Ok(s) => s,
            Err(e) if escapes < 3 => {
                escapes += 1;
                log::warn!("{e}; perturbing and retrying");
                y.iter_mut().for_each(|v| *v += T::lit(rng.random_range(0.0..1.0)) * unit);
                normalize_into(&mut y, "y")?;
                continue;
            }
            Err(e) => return Err(e),
        };
        x = xs;
        z.iter_mut().for_each(|v| *v *= sx);

        let zz: T = z.iter().map(|&v| v * v).sum();
        let mut ys = vec![T::zero(); n];
        for (s, &zt) in tensor.slices().iter().zip(&z) {
            for (acc, v) in ys.iter_mut().zip(s.entries().tmatvec(&x)) {
                *acc += zt * v;
            }
        }
        ys.iter_mut().for_each(|v| *v /= zz);
        let sy = normalize_into(&mut ys, "y")?;
        y = ys;
        z.iter_mut().for_each(|v| *v *= sy);

        // z_t ← xᵀ A_t y (x, y unit)
        for (zt, s) in z.iter_mut().zip(tensor.slices()) {
            *zt = dot(&x, &s.entries().matvec(&y)).max(T::zero());
        }

        let obj = objective(tensor, &x, &y, &z);
        debug_assert!(
            obj <= *history.last().unwrap() + T::tol(1e-12) * norm * norm,
            "ALS residual increased"
        );
        history.push(obj);

        let dz: Vec<T> = z.iter().zip(&z_old).map(|(&a, &b)| a - b).collect();
        let dx: Vec<T> = x.iter().zip(&x_old).map(|(&a, &b)| a - b).collect();
        let dy: Vec<T> = y.iter().zip(&y_old).map(|(&a, &b)| a - b).collect();
        let znorm = norm2(&z).max(T::min_positive_value());
        change = norm2(&dx).max(norm2(&dy)).max(norm2(&dz) / znorm);
        if change < tol {
            converged = true;
            break;
        }
    }

    let rel_error = history.last().copied().unwrap_or_else(T::zero).max(T::zero()).sqrt() / norm;
    if !converged && !opts.accept_unconverged {
        return Err(RpctError::NoConvergence {
            iterations,
            change: change.to_f64_lossy(),
            rel_error: rel_error.to_f64_lossy(),
        });
    }
    debug_assert_eq!(z.len(), horizon);
    Ok(Rank1Factors {
        x,
        y,
        z,
        rel_error,
        iterations,
        converged,
        objective_history: history,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Daily,
    Monthly,
    Quarterly,
}

impl std::fmt::Display for Aggregation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Aggregation::Daily => "daily",
            Aggregation::Monthly => "monthly",
            Aggregation::Quarterly => "quarterly",
        })
    }
}

impl std::str::FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "daily" => Ok(Self::Daily),
            "monthly" => Ok(Self::Monthly),
            "quarterly" => Ok(Self::Quarterly),
            other => Err(format!("unknown aggregation `{other}` (daily|monthly|quarterly)")),
        }
    }
}

pub const NEGATIVE_NOISE: f64 = 1e-12;

/// Chaos-index values per date. `psi` is raw; negatives are clamped only on output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FcixSeries<T> {
    pub dates: Vec<String>,
    pub psi: Vec<T>,
    pub aggregation: Aggregation,
    /// Values below `-NEGATIVE_NOISE`; smaller negatives are rounding and are clamped silently.
    pub negatives_clamped: usize,
    /// Largest relative gap between `z_t (yᵀx)` and power iteration on the reconstructed slice.
    pub max_eigen_gap: T,
}

impl<T: Scalar> FcixSeries<T> {
    pub fn from_values(dates: Vec<String>, psi: Vec<T>, aggregation: Aggregation) -> Self {
        let floor = -T::tol(NEGATIVE_NOISE);
        let negatives_clamped = psi.iter().filter(|&&p| p < floor).count();
        Self {
            dates,
            psi,
            aggregation,
            negatives_clamped,
            max_eigen_gap: T::zero(),
        }
    }

    pub fn clamped(&self) -> Vec<T> {
        self.psi.iter().map(|&p| p.max(T::zero())).collect()
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    /// `date,psi,psi_clamped` rows with a header line.
    pub fn to_delimited(&self, delimiter: char) -> String {
        let mut out = format!("date{d}psi{d}psi_clamped\n", d = delimiter);
        for ((date, &p), c) in self.dates.iter().zip(&self.psi).zip(self.clamped()) {
            out.push_str(&format!("{date}{delimiter}{p}{delimiter}{c}\n"));
        }
        out
    }
}

/// `ψ_t = (z_t yᵀx − N) / (N − 1)`, cross-checked against power iteration.
pub fn fcix_series<T: Scalar>(factors: &Rank1Factors<T>, n: usize, dates: &[String]) -> Result<FcixSeries<T>, RpctError> {
    if dates.len() != factors.z.len() {
        return Err(RpctError::DateCountMismatch {
            count: dates.len(),
            slices: factors.z.len(),
        });
    }
    let yx = dot(&factors.y, &factors.x);
    let lambdas: Vec<T> = factors.z.iter().map(|&zt| zt * yx).collect();
    let psi = lambdas
        .iter()
        .map(|&l| rpcm::inconsistency(l, n))
        .collect::<Result<Vec<_>, _>>()?;

    let opts = PowerOptions::default();
    let gaps = (0..factors.z.len())
        .into_par_iter()
        .map(|t| {
            if !(factors.z[t] > T::zero()) {
                return Ok(T::zero());
            }
            let e = rpcm::perron_eigenvalue_with(&factors.reconstruct_slice(t), &opts)?;
            Ok((e.lambda_max - lambdas[t]).abs() / lambdas[t].max(T::one()))
        })
        .collect::<Result<Vec<T>, RpcmError>>()?;
    let mut series = FcixSeries::from_values(dates.to_vec(), psi, Aggregation::Daily);
    series.max_eigen_gap = gaps.into_iter().fold(T::zero(), T::max);
    if series.negatives_clamped > 0 {
        log::info!("{} negative index values will be clamped on output", series.negatives_clamped);
    }
    Ok(series)
}

fn period_label(date: &str, period: Aggregation) -> Result<String, RpctError> {
    let head = date.get(..10).unwrap_or(date);
    let d = NaiveDate::parse_from_str(head, "%Y-%m-%d").map_err(|_| RpctError::BadDate(date.to_string()))?;
    Ok(match period {
        Aggregation::Daily => head.to_string(),
        Aggregation::Monthly => format!("{:04}-{:02}", d.year(), d.month()),
        Aggregation::Quarterly => format!("{:04}-Q{}", d.year(), (d.month() - 1) / 3 + 1),
    })
}

/// Calendar-period means of a daily series.
pub fn aggregate<T: Scalar>(series: &FcixSeries<T>, period: Aggregation) -> Result<FcixSeries<T>, RpctError> {
    if series.aggregation != Aggregation::Daily {
        return Err(RpctError::NotDaily(series.aggregation));
    }
    let mut groups: BTreeMap<String, Vec<T>> = BTreeMap::new();
    for (date, &p) in series.dates.iter().zip(&series.psi) {
        groups.entry(period_label(date, period)?).or_default().push(p);
    }
    let (labels, values): (Vec<_>, Vec<_>) = groups.into_iter().map(|(k, v)| (k, mean(&v))).unzip();
    let mut out = FcixSeries::from_values(labels, values, period);
    out.max_eigen_gap = series.max_eigen_gap;
    Ok(out)
}

/// Approximate entropy of the index with tolerance `r_frac` times its sample standard deviation.
pub fn regularity<T: Scalar>(psi: &[T], m: usize, r_frac: T) -> Result<T, RpctError> {
    if psi.len() < m + 2 {
        return Err(EntropyError::SeriesTooShort {
            len: psi.len(),
            needed: m + 2,
        }
        .into());
    }
    let sd = sample_std(psi);
    if !(sd > T::zero()) {
        return Ok(T::zero());
    }
    Ok(entropy::apen(psi, m, r_frac * sd)?)
}

/// The four volatility-regime statistics at slice `t`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RegimeDiagnostics<T> {
    pub index: usize,
    /// `‖adj(NI − A)‖₂ / N^{N−1}`; absent above the adjugate order cap.
    pub sensitivity_stat: Option<T>,
    pub sensitivity_note: Option<String>,
    pub consistency_stat: T,
    /// `‖A_t − A_{t+1}‖_F / max(‖A_t‖_F, ‖A_{t+1}‖_F)`.
    pub discrepancy_stat: T,
    /// Fraction of entries outside `[1/K, K]`.
    pub homogeneity_stat: T,
}

pub fn regime_diagnostics<T: Scalar>(
    tensor: &ComparisonTensor<T>,
    t: usize,
    k_threshold: T,
) -> Result<RegimeDiagnostics<T>, RpctError> {
    if t + 1 >= tensor.horizon() {
        return Err(RpctError::IndexOutOfRange {
            index: t,
            horizon: tensor.horizon(),
        });
    }
    if !(k_threshold > T::one()) {
        return Err(RpctError::BadThreshold(k_threshold.to_f64_lossy()));
    }
    let a = tensor.slice(t);
    let b = tensor.slice(t + 1);
    let (sensitivity_stat, sensitivity_note) = match rpcm::sensitivity(a) {
        Ok(s) => (Some(s), None),
        Err(e @ RpcmError::OrderCapExceeded { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let consistency_stat = rpcm::consistency_degree(a, T::tol(rpcm::DEFAULT_TAU));
    let diff = a.entries().sub(b.entries()).frobenius_norm();
    let scale = a.entries().frobenius_norm().max(b.entries().frobenius_norm());
    let discrepancy_stat = diff / scale;
    let lo = T::one() / k_threshold;
    let outside = a
        .entries()
        .as_slice()
        .iter()
        .filter(|&&v| v < lo || v > k_threshold)
        .count();
    let homogeneity_stat = T::from_count(outside) / T::from_count(a.order() * a.order());
    Ok(RegimeDiagnostics {
        index: t,
        sensitivity_stat,
        sensitivity_note,
        consistency_stat,
        discrepancy_stat,
        homogeneity_stat,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LagReportOptions {
    pub decompose: DecomposeOptions,
    pub apen_m: usize,
    pub r_frac: f64,
}

impl Default for LagReportOptions {
    fn default() -> Self {
        Self {
            decompose: DecomposeOptions {
                accept_unconverged: true,
                ..Default::default()
            },
            apen_m: 2,
            r_frac: 0.2,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LagPoint<T> {
    pub lag: usize,
    pub epsilon: T,
    pub psi_bar: T,
    pub regularity: Option<T>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    pub rms_residual: T,
}

/// Ordinary least squares line through `(x, y)`; `None` with fewer than two distinct `x`.
pub fn linear_fit<T: Scalar>(xs: &[T], ys: &[T]) -> Option<LinearFit<T>> {
    if xs.len() < 2 {
        return None;
    }
    let (mx, my) = (mean(xs), mean(ys));
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    if !(sxx > T::zero()) {
        return None;
    }
    let sxy: T = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: T = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    Some(LinearFit {
        slope,
        intercept,
        rms_residual: (ss / T::from_count(xs.len())).sqrt(),
    })
}

/// Decomposition error and mean index across lags, with `log ε` vs `log l` and `ψ̄` vs `l` fits.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LagScalingReport<T> {
    pub points: Vec<LagPoint<T>>,
    /// Slope of `ln ε` on `ln l` (≈ 0.5 under square-root growth).
    pub epsilon_exponent: Option<LinearFit<T>>,
    /// Slope of `ψ̄` on `l`.
    pub psi_slope: Option<LinearFit<T>>,
    pub notes: Vec<String>,
}

/// Errors below this are treated as an exact fit, leaving the exponent undefined.
pub const EPSILON_FLOOR: f64 = 1e-12;

pub fn lag_scaling_report<T: Scalar>(
    panel: &PricePanel<T>,
    lags: &[usize],
    opts: &LagReportOptions,
) -> Result<LagScalingReport<T>, RpctError> {
    if lags.is_empty() {
        return Err(RpctError::NoLags);
    }
    let points = lags
        .par_iter()
        .map(|&lag| -> Result<LagPoint<T>, RpctError> {
            let returns = panel.lag_returns(lag)?;
            let tensor = build_rpct(&returns)?;
            let factors = consensus_decompose(&tensor, &opts.decompose)?;
            let series = fcix_series(&factors, tensor.order(), tensor.dates())?;
            let regularity = regularity(&series.psi, opts.apen_m, T::lit(opts.r_frac)).ok();
            Ok(LagPoint {
                lag,
                epsilon: factors.rel_error,
                psi_bar: mean(&series.psi),
                regularity,
                iterations: factors.iterations,
                converged: factors.converged,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut notes = Vec::new();
    let mut epsilon_exponent = None;
    let mut psi_slope = None;
    if points.len() < 2 {
        notes.push("single lag: no fit".to_string());
    } else {
        let ls: Vec<T> = points.iter().map(|p| T::from_count(p.lag)).collect();
        if points.iter().any(|p| !(p.epsilon > T::lit(EPSILON_FLOOR))) {
            notes.push("decomposition error vanishes at some lag: epsilon exponent undefined".to_string());
        } else {
            let lx: Vec<T> = ls.iter().map(|l| l.ln()).collect();
            let ly: Vec<T> = points.iter().map(|p| p.epsilon.ln()).collect();
            epsilon_exponent = linear_fit(&lx, &ly);
        }
        let psis: Vec<T> = points.iter().map(|p| p.psi_bar).collect();
        psi_slope = linear_fit(&ls, &psis);
    }
    if points.iter().any(|p| !p.converged) {
        notes.push("some lags hit the sweep limit before converging".to_string());
    }
    Ok(LagScalingReport {
        points,
        epsilon_exponent,
        psi_slope,
        notes,
    })
}
