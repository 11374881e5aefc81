//! Long-memory diagnostics and VAR impulse responses.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entropy;
use crate::linalg::Matrix;
use crate::scalar::{mean, Scalar};

pub const WHITTLE_EXPONENT: f64 = 0.65;
pub const WHITTLE_MIN_LEN: usize = 128;
/// First-stage estimates above this trigger the difference-and-add-one step.
pub const TWO_STEP_THRESHOLD: f64 = 0.65;
pub const WHITTLE_LOWER: f64 = -0.5;
pub const WHITTLE_UPPER: f64 = 0.75;
pub const GOLDEN_TOL: f64 = 1e-6;
pub const SIMULATION_BURN_IN: usize = 512;
/// Published cointegrating vector and constant of the equilibrium term.
pub const REFERENCE_BETA: [f64; 2] = [1.0, -1.199];
pub const REFERENCE_RHO: f64 = 0.598;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FractsError {
    #[error("series of length {len} is too short, need at least {needed}")]
    SeriesTooShort { len: usize, needed: usize },
    #[error("optimization failed: {0}")]
    OptimizationFailure(String),
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("design matrix is singular")]
    SingularDesign,
    #[error("residual covariance is not positive semidefinite")]
    IndefiniteCovariance,
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("lag {lag} must be below the series length {len}")]
    LagTooLarge { lag: usize, len: usize },
    #[error("bandwidth {m} must lie in 1..={max}")]
    InvalidBandwidth { m: usize, max: usize },
    #[error("VAR order must be at least 1")]
    InvalidOrder,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

fn check_finite<T: Scalar>(x: &[T]) -> Result<(), FractsError> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(FractsError::NonFinite)
    }
}

/// `π_0(−d), …, π_{n−1}(−d)`, the weights of `Δ^d`.
pub fn frac_coefficients<T: Scalar>(d: T, n: usize) -> Vec<T> {
    let u = -d;
    let mut pi = Vec::with_capacity(n);
    let mut cur = T::one();
    for k in 0..n {
        if k > 0 {
            let kk = T::from_count(k);
            cur = cur * (u + kk - T::one()) / kk;
        }
        pi.push(cur);
    }
    pi
}

/// `Δ^d x_t = Σ_{n=0}^{t} π_n(−d) x_{t−n}`, truncated at the start of the series.
pub fn frac_diff<T: Scalar>(x: &[T], d: T) -> Vec<T> {
    let pi = frac_coefficients(d, x.len());
    (0..x.len())
        .map(|t| (0..=t).map(|n| pi[n] * x[t - n]).sum())
        .collect()
}

/// `Δ^{−d}` applied to Gaussian white noise, with the first
/// [`SIMULATION_BURN_IN`] draws discarded.
pub fn simulate_fractional_noise(n: usize, d: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps: Vec<f64> = (0..n + SIMULATION_BURN_IN).map(|_| StandardNormal.sample(&mut rng)).collect();
    frac_diff(&eps, -d).split_off(SIMULATION_BURN_IN)
}

/// Biased sample autocorrelations at lags `0..=max_lag`.
///
/// A zero-variance series has autocorrelation 1 at lag 0 and 0 elsewhere.
pub fn acf<T: Scalar>(x: &[T], max_lag: usize) -> Result<Vec<T>, FractsError> {
    if max_lag >= x.len() {
        return Err(FractsError::LagTooLarge { lag: max_lag, len: x.len() });
    }
    check_finite(x)?;
    let m = mean(x);
    let c: Vec<T> = x.iter().map(|&v| v - m).collect();
    let g0: T = c.iter().map(|&v| v * v).sum();
    Ok((0..=max_lag)
        .map(|k| {
            if k == 0 {
                T::one()
            } else if g0 == T::zero() {
                T::zero()
            } else {
                c[..c.len() - k].iter().zip(&c[k..]).map(|(&a, &b)| a * b).sum::<T>() / g0
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Periodogram<T> {
    /// `λ_j = 2πj/T` for `j = 0..=T/2`; index equals `j`.
    pub frequencies: Vec<T>,
    pub ordinates: Vec<T>,
}

fn periodogram_f64(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let norm = 2.0 * PI * n as f64;
    let freqs = (0..=half).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
    let ords = buf[..=half].iter().map(|z| z.norm_sqr() / norm).collect();
    (freqs, ords)
}

/// `I(λ_j) = |Σ x_t e^{−iλ_j t}|² / (2πT)` at the Fourier frequencies.
pub fn periodogram<T: Scalar>(x: &[T]) -> Result<Periodogram<T>, FractsError> {
    if x.len() < 2 {
        return Err(FractsError::SeriesTooShort { len: x.len(), needed: 2 });
    }
    check_finite(x)?;
    let xs: Vec<f64> = x.iter().map(|v| v.to_f64_lossy()).collect();
    let (f, o) = periodogram_f64(&xs);
    Ok(Periodogram {
        frequencies: f.into_iter().map(T::lit).collect(),
        ordinates: o.into_iter().map(T::lit).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhittleEstimate {
    pub d_hat: f64,
    pub bandwidth_m: usize,
    pub objective: f64,
    /// Set when the estimate came from the first-differenced series plus one.
    pub differenced: bool,
}

/// Default bandwidth `floor(T^0.65)`.
pub fn default_bandwidth(len: usize) -> usize {
    (len as f64).powf(WHITTLE_EXPONENT).floor() as usize
}

struct WhittleObjective {
    log_lambda: Vec<f64>,
    lambda: Vec<f64>,
    ordinates: Vec<f64>,
    mean_log_lambda: f64,
}

impl WhittleObjective {
    fn new(x: &[f64], m: usize) -> Result<Self, FractsError> {
        let max = (x.len() - 1) / 2;
        if m == 0 || m > max {
            return Err(FractsError::InvalidBandwidth { m, max });
        }
        let (freqs, ords) = periodogram_f64(x);
        let lambda = freqs[1..=m].to_vec();
        let log_lambda: Vec<f64> = lambda.iter().map(|l| l.ln()).collect();
        let mean_log_lambda = log_lambda.iter().sum::<f64>() / m as f64;
        Ok(Self {
            log_lambda,
            lambda,
            ordinates: ords[1..=m].to_vec(),
            mean_log_lambda,
        })
    }

    fn eval(&self, d: f64) -> f64 {
        let m = self.lambda.len() as f64;
        let g = self
            .log_lambda
            .iter()
            .zip(&self.ordinates)
            .map(|(ll, i)| (2.0 * d * ll).exp() * i)
            .sum::<f64>()
            / m;
        g.ln() - 2.0 * d * self.mean_log_lambda
    }
}

fn golden_section(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / 2.0;
    (x, f(x))
}

enum Stage {
    Interior(f64, f64),
    AtUpper(f64, f64),
}

fn whittle_stage(x: &[f64], m: usize) -> Result<Stage, FractsError> {
    let obj = WhittleObjective::new(x, m)?;
    if obj.ordinates.iter().all(|&i| i == 0.0) {
        return Err(FractsError::OptimizationFailure("periodogram vanishes on the bandwidth".into()));
    }
    let (d, v) = golden_section(|d| obj.eval(d), WHITTLE_LOWER, WHITTLE_UPPER, GOLDEN_TOL);
    if !v.is_finite() {
        return Err(FractsError::OptimizationFailure("objective is not finite".into()));
    }
    let edge = 10.0 * GOLDEN_TOL;
    if d - WHITTLE_LOWER < edge {
        return Err(FractsError::OptimizationFailure(format!(
            "minimum at the lower bound {WHITTLE_LOWER}"
        )));
    }
    if WHITTLE_UPPER - d < edge {
        return Ok(Stage::AtUpper(d, v));
    }
    Ok(Stage::Interior(d, v))
}

/// Local Whittle estimate of the memory parameter with the two-step extension
/// for nonstationary series. `bandwidth_m = None` uses [`default_bandwidth`].
pub fn local_whittle<T: Scalar>(x: &[T], bandwidth_m: Option<usize>) -> Result<WhittleEstimate, FractsError> {
    if x.len() < WHITTLE_MIN_LEN {
        return Err(FractsError::SeriesTooShort {
            len: x.len(),
            needed: WHITTLE_MIN_LEN,
        });
    }
    check_finite(x)?;
    let xs: Vec<f64> = x.iter().map(|v| v.to_f64_lossy()).collect();
    let m = bandwidth_m.unwrap_or_else(|| default_bandwidth(xs.len()));
    let (d1, v1) = match whittle_stage(&xs, m)? {
        Stage::Interior(d, v) | Stage::AtUpper(d, v) => (d, v),
    };
    if d1 <= TWO_STEP_THRESHOLD {
        return Ok(WhittleEstimate {
            d_hat: d1,
            bandwidth_m: m,
            objective: v1,
            differenced: false,
        });
    }
    let dx: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let m2 = bandwidth_m.unwrap_or_else(|| default_bandwidth(dx.len()));
    match whittle_stage(&dx, m2)? {
        Stage::Interior(d, v) => Ok(WhittleEstimate {
            d_hat: d + 1.0,
            bandwidth_m: m2,
            objective: v,
            differenced: true,
        }),
        Stage::AtUpper(..) => Err(FractsError::OptimizationFailure(format!(
            "differenced series still at the upper bound {WHITTLE_UPPER}"
        ))),
    }
}

/// Sample cross-correlations `corr(a_t, b_{t+p})` for `p = −max_lag..=max_lag`;
/// entry `p + max_lag` holds lag `p`.
pub fn xcf<T: Scalar>(a: &[T], b: &[T], max_lag: usize) -> Result<Vec<T>, FractsError> {
    if a.len() != b.len() {
        return Err(FractsError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if max_lag >= n {
        return Err(FractsError::LagTooLarge { lag: max_lag, len: n });
    }
    check_finite(a)?;
    check_finite(b)?;
    let ca: Vec<T> = {
        let m = mean(a);
        a.iter().map(|&v| v - m).collect()
    };
    let cb: Vec<T> = {
        let m = mean(b);
        b.iter().map(|&v| v - m).collect()
    };
    let sa: T = ca.iter().map(|&v| v * v).sum();
    let sb: T = cb.iter().map(|&v| v * v).sum();
    let denom = (sa * sb).sqrt();
    let l = max_lag as isize;
    Ok((-l..=l)
        .map(|p| {
            if denom == T::zero() {
                return T::zero();
            }
            let s: T = if p >= 0 {
                let p = p as usize;
                ca[..n - p].iter().zip(&cb[p..]).map(|(&x, &y)| x * y).sum()
            } else {
                let q = (-p) as usize;
                ca[q..].iter().zip(&cb[..n - q]).map(|(&x, &y)| x * y).sum()
            };
            s / denom
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct VarModel<T> {
    pub order: usize,
    /// `A_1..A_p`, each `k×k`.
    pub coefficients: Vec<Matrix<T>>,
    pub intercept: Vec<T>,
    /// Residual covariance with the degrees-of-freedom adjustment.
    pub sigma: Matrix<T>,
    /// Lower-triangular `P` with `P Pᵀ = Σ`.
    pub cholesky: Matrix<T>,
    pub n_obs: usize,
}

impl<T: Scalar> VarModel<T> {
    /// Builds a model from known parameters, factoring `sigma`.
    pub fn new(coefficients: Vec<Matrix<T>>, intercept: Vec<T>, sigma: Matrix<T>) -> Result<Self, FractsError> {
        if coefficients.is_empty() {
            return Err(FractsError::InvalidOrder);
        }
        let k = sigma.rows();
        if !sigma.is_square()
            || intercept.len() != k
            || coefficients.iter().any(|a| a.rows() != k || a.cols() != k)
        {
            return Err(FractsError::DimensionMismatch("coefficients, intercept and sigma must agree".into()));
        }
        let cholesky = sigma.cholesky_psd().ok_or(FractsError::IndefiniteCovariance)?;
        Ok(Self {
            order: coefficients.len(),
            coefficients,
            intercept,
            sigma,
            cholesky,
            n_obs: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.sigma.rows()
    }

    /// Companion matrix of the lag polynomial.
    pub fn companion(&self) -> Matrix<T> {
        let k = self.dim();
        let p = self.order;
        Matrix::from_fn(k * p, k * p, |i, j| {
            if i < k {
                self.coefficients[j / k][(i, j % k)]
            } else if j + k == i {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    pub fn spectral_radius(&self) -> T {
        spectral_radius(&self.companion())
    }

    pub fn is_stable(&self) -> bool {
        self.spectral_radius() < T::one()
    }
}

/// Spectral radius by repeated squaring: `ρ = lim ‖C^{2^k}‖^{1/2^k}`.
pub fn spectral_radius<T: Scalar>(c: &Matrix<T>) -> T {
    let s0 = c.max_abs();
    if s0 == T::zero() {
        return T::zero();
    }
    let mut m = c.scale(T::one() / s0);
    let mut log_scale = s0.ln();
    let mut power = T::one();
    for _ in 0..60 {
        m = m.matmul(&m);
        log_scale = log_scale + log_scale;
        power = power + power;
        let s = m.max_abs();
        if s == T::zero() {
            return T::zero();
        }
        m = m.scale(T::one() / s);
        log_scale += s.ln();
    }
    (log_scale / power).exp()
}

/// Least-squares VAR(p) with intercept; rows of `x` are observations.
pub fn var_fit<T: Scalar>(x: &Matrix<T>, p: usize) -> Result<VarModel<T>, FractsError> {
    if p == 0 {
        return Err(FractsError::InvalidOrder);
    }
    let (len, k) = (x.rows(), x.cols());
    check_finite(x.as_slice())?;
    let regressors = 1 + k * p;
    if len <= p || len - p <= regressors {
        return Err(FractsError::SeriesTooShort {
            len,
            needed: p + regressors + 1,
        });
    }
    let n_obs = len - p;
    let design = Matrix::from_fn(n_obs, regressors, |r, c| {
        if c == 0 {
            T::one()
        } else {
            let lag = (c - 1) / k + 1;
            x[(r + p - lag, (c - 1) % k)]
        }
    });
    let gram = design.transpose().matmul(&design);
    let mut beta = Matrix::zeros(regressors, k);
    for eq in 0..k {
        let y: Vec<T> = (0..n_obs).map(|r| x[(r + p, eq)]).collect();
        let sol = gram.solve_spd(&design.tmatvec(&y)).ok_or(FractsError::SingularDesign)?;
        for (c, v) in sol.into_iter().enumerate() {
            beta[(c, eq)] = v;
        }
    }
    let fitted = design.matmul(&beta);
    let resid = Matrix::from_fn(n_obs, k, |r, c| x[(r + p, c)] - fitted[(r, c)]);
    let dof = T::from_count(n_obs - regressors);
    let sigma = resid.transpose().matmul(&resid).scale(T::one() / dof);
    let sigma = Matrix::from_fn(k, k, |i, j| (sigma[(i, j)] + sigma[(j, i)]) / T::lit(2.0));
    let coefficients = (0..p)
        .map(|lag| Matrix::from_fn(k, k, |i, j| beta[(1 + lag * k + j, i)]))
        .collect();
    let intercept = (0..k).map(|i| beta[(0, i)]).collect();
    let mut model = VarModel::new(coefficients, intercept, sigma)?;
    model.n_obs = n_obs;
    Ok(model)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct IrfTable<T> {
    pub horizon: usize,
    /// `Θ_0..Θ_H`; entry `(i, j)` is the response of variable `i` to a shock in `j`.
    pub responses: Vec<Matrix<T>>,
    /// ApEn (m = 2, r = 0.2σ) of each path, indexed `[response][shock]`; `None`
    /// when the path is too short.
    pub apen_per_path: Vec<Vec<Option<T>>>,
    pub spectral_radius: T,
    pub stable: bool,
}

impl<T: Scalar> IrfTable<T> {
    pub fn path(&self, response: usize, shock: usize) -> Vec<T> {
        self.responses.iter().map(|m| m[(response, shock)]).collect()
    }

    /// `horizon,response` rows with a header line.
    pub fn path_delimited(&self, response: usize, shock: usize, delimiter: char) -> String {
        let mut out = format!("horizon{delimiter}response\n");
        for (h, v) in self.path(response, shock).into_iter().enumerate() {
            out.push_str(&format!("{h}{delimiter}{v}\n"));
        }
        out
    }
}

/// Orthogonalized impulse responses `Θ_h = Φ_h P` for `h = 0..=horizon`.
pub fn orth_irf<T: Scalar>(model: &VarModel<T>, horizon: usize) -> IrfTable<T> {
    let k = model.dim();
    let mut phi: Vec<Matrix<T>> = Vec::with_capacity(horizon + 1);
    phi.push(Matrix::identity(k));
    for h in 1..=horizon {
        let mut acc = Matrix::zeros(k, k);
        for i in 1..=h.min(model.order) {
            acc = acc.add(&model.coefficients[i - 1].matmul(&phi[h - i]));
        }
        phi.push(acc);
    }
    let responses: Vec<Matrix<T>> = phi.iter().map(|f| f.matmul(&model.cholesky)).collect();
    let rho = model.spectral_radius();
    let stable = rho < T::one();
    if !stable {
        log::warn!("VAR is not stable (companion spectral radius {rho}); responses need not decay");
    }
    let apen_per_path = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let path: Vec<T> = responses.iter().map(|m| m[(i, j)]).collect();
                    entropy::apen_relative(&path, entropy::DEFAULT_APEN_M, T::lit(entropy::DEFAULT_R_FRAC)).ok()
                })
                .collect()
        })
        .collect();
    IrfTable {
        horizon,
        responses,
        apen_per_path,
        spectral_radius: rho,
        stable,
    }
}

/// Equilibrium term `βᵀx_t + ρ` for each row of `x`.
pub fn long_run_equilibrium<T: Scalar>(x: &Matrix<T>, beta: &[T], rho: T) -> Result<Vec<T>, FractsError> {
    if x.cols() != beta.len() {
        return Err(FractsError::DimensionMismatch(format!(
            "{} columns but {} coefficients",
            x.cols(),
            beta.len()
        )));
    }
    Ok((0..x.rows())
        .map(|t| x.row(t).iter().zip(beta).map(|(&v, &b)| v * b).sum::<T>() + rho)
        .collect())
}
