//! Pairwise comparison matrices: construction, Perron eigenpair, consistency
//! statistics, eigenvalue sensitivity, permanent and the algebraic identities
//! satisfied by consistent reciprocal matrices.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::scalar::{norm2, Scalar};

/// Relative tolerance for the reciprocal flag.
pub const RECIPROCAL_TOL: f64 = 1e-9;
/// Default log-ratio tolerance for the consistency degree.
pub const DEFAULT_TAU: f64 = 1e-9;
/// Largest order handled by cofactor adjugates and the identity suite.
pub const ADJUGATE_ORDER_CAP: usize = 10;
/// Largest order handled by Ryser's formula.
pub const PERMANENT_ORDER_CAP: usize = 12;
pub const MAX_IDENTITY_POWER: u32 = 5;
const BALANCE_SWEEPS: usize = 20;

#[derive(Debug, Error)]
pub enum RpcmError {
    #[error("comparison matrix must be square and non-empty (got {rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("entry ({row},{col}) = {value} is not strictly positive and finite")]
    NonPositiveEntry { row: usize, col: usize, value: f64 },
    #[error("weight {index} = {value} is not strictly positive")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("power iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("order {0} is too small; need at least 2")]
    DegenerateOrder(usize),
    #[error("order {order} exceeds the cap of {cap}")]
    OrderCapExceeded { order: usize, cap: usize },
    #[error("characteristic polynomial derivative {0:e} is near zero (eigenvalue not simple)")]
    DerivativeNearZero(f64),
    #[error("power {0} outside 1..=5")]
    InvalidPower(u32),
    #[error("evaluation would overflow: {0}")]
    OverflowRisk(String),
    #[error("cannot parse matrix: {0}")]
    Parse(String),
}

/// Strictly positive square matrix of preference ratios.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct ComparisonMatrix<T> {
    entries: Matrix<T>,
    reciprocal: bool,
}

impl<T: Scalar> ComparisonMatrix<T> {
    pub fn new(entries: Matrix<T>) -> Result<Self, RpcmError> {
        if !entries.is_square() || entries.rows() == 0 {
            return Err(RpcmError::NotSquare {
                rows: entries.rows(),
                cols: entries.cols(),
            });
        }
        let n = entries.rows();
        for i in 0..n {
            for j in 0..n {
                let a = entries[(i, j)];
                if !(a > T::zero()) || !a.is_finite() {
                    return Err(RpcmError::NonPositiveEntry {
                        row: i,
                        col: j,
                        value: a.to_f64_lossy(),
                    });
                }
            }
        }
        let reciprocal = is_reciprocal(&entries);
        Ok(Self { entries, reciprocal })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, RpcmError> {
        let m = Matrix::from_rows(rows).ok_or(RpcmError::NotSquare {
            rows: rows.len(),
            cols: 0,
        })?;
        Self::new(m)
    }

    /// `a_ij = w_i / w_j`: reciprocal and consistent by construction.
    pub fn from_weights(w: &[T]) -> Result<Self, RpcmError> {
        if w.is_empty() {
            return Err(RpcmError::NotSquare { rows: 0, cols: 0 });
        }
        if let Some((index, &value)) = w.iter().enumerate().find(|(_, &x)| !(x > T::zero()) || !x.is_finite()) {
            return Err(RpcmError::NonPositiveWeight {
                index,
                value: value.to_f64_lossy(),
            });
        }
        let n = w.len();
        let entries = Matrix::from_fn(n, n, |i, j| if i == j { T::one() } else { w[i] / w[j] });
        Ok(Self {
            entries,
            reciprocal: true,
        })
    }

    /// Reciprocal matrix from its strict upper triangle, given row by row
    /// (`a_12, a_13, ..., a_1n, a_23, ...`).
    pub fn from_upper_triangle(n: usize, upper: &[T]) -> Result<Self, RpcmError> {
        assert_eq!(upper.len(), n * (n.saturating_sub(1)) / 2, "upper triangle length");
        let mut m = Matrix::identity(n);
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                m[(i, j)] = upper[k];
                m[(j, i)] = T::one() / upper[k];
                k += 1;
            }
        }
        Self::new(m)
    }

    /// Multiplies `a_ij` by `c` and `a_ji` by `1/c`, keeping reciprocity.
    pub fn with_pair_scaled(&self, i: usize, j: usize, c: T) -> Result<Self, RpcmError> {
        let mut m = self.entries.clone();
        m[(i, j)] *= c;
        if i != j {
            m[(j, i)] /= c;
        }
        Self::new(m)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.entries.rows()
    }

    #[inline]
    pub fn entries(&self) -> &Matrix<T> {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[(i, j)]
    }

    #[inline]
    pub fn is_reciprocal(&self) -> bool {
        self.reciprocal
    }

    /// Reciprocal and every triple consistent within `tau` in log-ratio.
    pub fn is_consistent(&self, tau: T) -> bool {
        self.reciprocal && consistency_degree(self, tau) == T::one()
    }

    /// Delimited text, one matrix row per line.
    pub fn to_delimited(&self, delimiter: char) -> String {
        let mut out = String::new();
        for i in 0..self.order() {
            let line: Vec<String> = self.entries.row(i).iter().map(|x| format!("{x:e}")).collect();
            out.push_str(&line.join(&delimiter.to_string()));
            out.push('\n');
        }
        out
    }

    pub fn from_delimited(text: &str, delimiter: char) -> Result<Self, RpcmError> {
        let rows: Vec<Vec<T>> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split(delimiter)
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map(T::lit)
                            .map_err(|_| RpcmError::Parse(format!("bad number `{}`", s.trim())))
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(RpcmError::Parse("ragged rows".into()));
        }
        Self::from_rows(&rows)
    }
}

fn is_reciprocal<T: Scalar>(m: &Matrix<T>) -> bool {
    let tol = T::tol(RECIPROCAL_TOL);
    let n = m.rows();
    (0..n).all(|i| {
        (m[(i, i)] - T::one()).abs() <= tol && (i + 1..n).all(|j| (m[(i, j)] * m[(j, i)] - T::one()).abs() <= tol)
    })
}

#[derive(Clone, Copy, Debug)]
pub struct PowerOptions {
    pub max_iters: usize,
    /// Relative change in the eigenvalue estimate that ends the iteration.
    pub tol: f64,
    /// Required `‖Av − λv‖ / ‖A‖_F` on success.
    pub residual_tol: f64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            tol: 1e-12,
            residual_tol: 1e-10,
        }
    }
}

/// Perron root and its unit right eigenvector.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EigenResult<T> {
    pub lambda_max: T,
    pub right_vector: Vec<T>,
    pub iterations: usize,
    pub residual: T,
}

pub fn perron_eigenvalue<T: Scalar>(a: &ComparisonMatrix<T>) -> Result<EigenResult<T>, RpcmError> {
    perron_eigenvalue_with(a.entries(), &PowerOptions::default())
}

/// Power iteration from the all-ones vector. Valid for any strictly positive matrix.
pub fn perron_eigenvalue_with<T: Scalar>(a: &Matrix<T>, opts: &PowerOptions) -> Result<EigenResult<T>, RpcmError> {
    let n = a.rows();
    let fro = a.frobenius_norm();
    let tol = T::tol(opts.tol);
    let res_tol = T::tol(opts.residual_tol) * fro;
    let mut v = vec![T::one() / T::from_count(n).sqrt(); n];
    let mut w = a.matvec(&v);
    let mut lambda = norm2(&w);
    let mut residual = T::infinity();
    for it in 1..=opts.max_iters {
        if !(lambda > T::zero()) {
            return Err(RpcmError::NoConvergence {
                iterations: it,
                residual: f64::NAN,
            });
        }
        for (vi, &wi) in v.iter_mut().zip(&w) {
            *vi = wi / lambda;
        }
        w = a.matvec(&v);
        let next = norm2(&w);
        residual = w
            .iter()
            .zip(&v)
            .map(|(&wi, &vi)| (wi - next * vi) * (wi - next * vi))
            .sum::<T>()
            .sqrt();
        let change = (next - lambda).abs() / next;
        lambda = next;
        if change <= tol && residual <= res_tol {
            return Ok(EigenResult {
                lambda_max: lambda,
                right_vector: v,
                iterations: it,
                residual,
            });
        }
    }
    Err(RpcmError::NoConvergence {
        iterations: opts.max_iters,
        residual: residual.to_f64_lossy(),
    })
}

/// Fraction of ordered triples `(i, j, l)` with `|log(a_il a_lj / a_ij)| ≤ tau`.
pub fn consistency_degree<T: Scalar>(a: &ComparisonMatrix<T>, tau: T) -> T {
    let n = a.order();
    let logs = a.entries().map(|x| x.ln());
    let mut count = 0usize;
    for i in 0..n {
        for j in 0..n {
            let lij = logs[(i, j)];
            for l in 0..n {
                if (logs[(i, l)] + logs[(l, j)] - lij).abs() <= tau {
                    count += 1;
                }
            }
        }
    }
    T::from_count(count) / T::from_count(n * n * n)
}

/// `(λ_max − N) / (N − 1)`.
pub fn inconsistency<T: Scalar>(lambda_max: T, n: usize) -> Result<T, RpcmError> {
    if n < 2 {
        return Err(RpcmError::DegenerateOrder(n));
    }
    let nn = T::from_count(n);
    Ok((lambda_max - nn) / (nn - T::one()))
}

/// `‖adj(λI − A)‖₂ / |p'_A(λ)|`, with `p'_A(λ) = tr adj(λI − A)`.
pub fn condition_number<T: Scalar>(a: &ComparisonMatrix<T>, lambda: T) -> Result<T, RpcmError> {
    let n = a.order();
    if n > ADJUGATE_ORDER_CAP {
        return Err(RpcmError::OrderCapExceeded {
            order: n,
            cap: ADJUGATE_ORDER_CAP,
        });
    }
    let shifted = Matrix::identity(n).scale(lambda).sub(a.entries());
    let adj = shifted.adjugate();
    let deriv = adj.trace();
    if deriv.abs() < T::lit(1e-14) {
        return Err(RpcmError::DerivativeNearZero(deriv.to_f64_lossy()));
    }
    Ok(adj.spectral_norm() / deriv.abs())
}

/// `‖adj(NI − A)‖₂ / N^{N−1}`, the reciprocal-matrix form of the condition number at `λ = N`.
pub fn sensitivity<T: Scalar>(a: &ComparisonMatrix<T>) -> Result<T, RpcmError> {
    let n = a.order();
    if n > ADJUGATE_ORDER_CAP {
        return Err(RpcmError::OrderCapExceeded {
            order: n,
            cap: ADJUGATE_ORDER_CAP,
        });
    }
    let nn = T::from_count(n);
    let adj = Matrix::identity(n).scale(nn).sub(a.entries()).adjugate();
    Ok(adj.spectral_norm() / nn.powi(n as i32 - 1))
}

/// Permanent by Ryser's inclusion–exclusion over Gray-code subsets.
pub fn permanent<T: Scalar>(a: &ComparisonMatrix<T>) -> Result<T, RpcmError> {
    let n = a.order();
    if n > PERMANENT_ORDER_CAP {
        return Err(RpcmError::OrderCapExceeded {
            order: n,
            cap: PERMANENT_ORDER_CAP,
        });
    }
    // Balance toward doubly stochastic first: perm(D_r A D_c) = Π r_i Π c_j perm(A),
    // and balanced entries keep the Ryser terms from cancelling catastrophically.
    let mut m = a.entries().clone();
    let mut log_scale = T::zero();
    for _ in 0..BALANCE_SWEEPS {
        for i in 0..n {
            let r = m.row(i).iter().copied().sum::<T>();
            log_scale += r.ln();
            for j in 0..n {
                m[(i, j)] /= r;
            }
        }
        for j in 0..n {
            let c = (0..n).map(|i| m[(i, j)]).sum::<T>();
            log_scale += c.ln();
            for i in 0..n {
                m[(i, j)] /= c;
            }
        }
    }
    let mut row_sums = vec![T::zero(); n];
    // Neumaier-compensated accumulation; the alternating terms cancel heavily.
    let (mut total, mut comp) = (T::zero(), T::zero());
    let mut gray: u32 = 0;
    for k in 1u32..(1u32 << n) {
        let bit = k.trailing_zeros() as usize;
        gray ^= 1 << bit;
        let adding = gray & (1 << bit) != 0;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if adding {
                *s += m[(i, bit)];
            } else {
                *s -= m[(i, bit)];
            }
        }
        let prod: T = row_sums.iter().fold(T::one(), |p, &s| p * s);
        let term = if gray.count_ones() % 2 == 1 { -prod } else { prod };
        let t = total + term;
        if total.abs() >= term.abs() {
            comp += (total - t) + term;
        } else {
            comp += (term - t) + total;
        }
        total = t;
    }
    let total = total + comp;
    let signed = if n % 2 == 1 { -total } else { total };
    Ok(signed * log_scale.exp())
}

/// `sinh(A)`: uses `(sinh N / N) A` for verified-consistent input, the Taylor series otherwise.
pub fn matrix_sinh<T: Scalar>(a: &ComparisonMatrix<T>) -> Matrix<T> {
    if a.is_consistent(T::tol(DEFAULT_TAU)) {
        let nn = T::from_count(a.order());
        a.entries().scale(nn.sinh() / nn)
    } else {
        sinh_series(a.entries())
    }
}

/// Odd-power Taylor series of `sinh`, truncated once a term is below `1e-15`
/// of the partial sum and past the peak term.
pub fn sinh_series<T: Scalar>(a: &Matrix<T>) -> Matrix<T> {
    let stop = T::lit(1e-15).max(T::epsilon() / T::lit(4.0));
    let a2 = a.matmul(a);
    let growth = a2.frobenius_norm().sqrt();
    let mut term = a.clone();
    let mut sum = a.clone();
    let mut m = 1usize;
    while m < 1000 {
        term = term.matmul(&a2).scale(T::one() / T::from_count((m + 1) * (m + 2)));
        m += 2;
        sum = sum.add(&term);
        let past_peak = T::from_count(m) > growth;
        if past_peak && term.frobenius_norm() <= stop * sum.frobenius_norm() {
            break;
        }
    }
    sum
}

/// Deviations from the identities of a consistent reciprocal matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct IdentityReport<T> {
    pub order: usize,
    pub power: u32,
    /// `σ₂ / σ₁` (zero for order 1).
    pub rank_ratio: T,
    /// `‖A^k − N^{k−1} A‖_F / ‖N^{k−1} A‖_F`.
    pub power_residual: T,
    /// `‖sinh(A) − (sinh N / N) A‖_F / ‖(sinh N / N) A‖_F`, series-evaluated `sinh`.
    pub sinh_residual: T,
    /// `|Tr sinh(A) − sinh N|`.
    pub trace_residual: T,
    /// `|Tr A − N · rank A|`.
    pub trace_rank_residual: T,
    /// Coefficient deviations from `λ^N − N λ^{N−1}`, degree 0 through `N−1`,
    /// each scaled by `N^k / N^N` (its weight when evaluated at `λ = N`).
    pub charpoly_residuals: Vec<T>,
}

impl<T: Scalar> IdentityReport<T> {
    pub fn max_charpoly_residual(&self) -> T {
        self.charpoly_residuals.iter().fold(T::zero(), |m, &x| m.max(x))
    }

    pub fn trace_residual_rel(&self) -> T {
        self.trace_residual / T::from_count(self.order).sinh()
    }
}

pub fn identity_residuals<T: Scalar>(a: &ComparisonMatrix<T>, k: u32) -> Result<IdentityReport<T>, RpcmError> {
    let n = a.order();
    if n > ADJUGATE_ORDER_CAP {
        return Err(RpcmError::OrderCapExceeded {
            order: n,
            cap: ADJUGATE_ORDER_CAP,
        });
    }
    if k == 0 || k > MAX_IDENTITY_POWER {
        return Err(RpcmError::InvalidPower(k));
    }
    let nn = T::from_count(n);
    let log_max = T::max_value().ln();
    let log_scale = T::from_count(k as usize - 1) * nn.ln() + a.entries().max_abs().ln() + nn.ln();
    if log_scale >= log_max {
        return Err(RpcmError::OverflowRisk(format!(
            "N^(k-1)·max|a| for N={n}, k={k} exceeds the representable range"
        )));
    }
    let lambda = perron_eigenvalue(a)?.lambda_max;
    if lambda > T::lit(700.0).min(log_max - T::lit(10.0)) {
        return Err(RpcmError::OverflowRisk(format!(
            "sinh series with spectral radius {lambda} overflows"
        )));
    }

    let sv = a.entries().singular_values();
    let rank_ratio = if sv.len() > 1 && sv[0] > T::zero() { sv[1] / sv[0] } else { T::zero() };
    let rank_tol = sv.first().copied().unwrap_or_else(T::zero) * T::lit(1e-10).max(T::epsilon() * nn * T::lit(4.0));
    let rank = sv.iter().filter(|&&s| s > rank_tol).count();

    let scaled = a.entries().scale(nn.powi(k as i32 - 1));
    let power_residual = a.entries().pow(k).sub(&scaled).frobenius_norm() / scaled.frobenius_norm();

    let sinh_a = sinh_series(a.entries());
    let target = a.entries().scale(nn.sinh() / nn);
    let sinh_residual = sinh_a.sub(&target).frobenius_norm() / target.frobenius_norm();
    let trace_residual = (sinh_a.trace() - nn.sinh()).abs();
    let trace_rank_residual = (a.entries().trace() - nn * T::from_count(rank)).abs();

    let coeffs = a.entries().char_poly();
    let charpoly_residuals = (0..n)
        .map(|d| {
            let expected = if d + 1 == n { -nn } else { T::zero() };
            (coeffs[d] - expected).abs() * nn.powi(d as i32) / nn.powi(n as i32)
        })
        .collect();

    Ok(IdentityReport {
        order: n,
        power: k,
        rank_ratio,
        power_residual,
        sinh_residual,
        trace_residual,
        trace_rank_residual,
        charpoly_residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perturbed_222() -> ComparisonMatrix<f64> {
        ComparisonMatrix::from_upper_triangle(3, &[2.0, 2.0, 2.0]).unwrap()
    }

    #[test]
    fn from_weights_examples() {
        let j3 = ComparisonMatrix::<f64>::from_weights(&[1.0, 1.0, 1.0]).unwrap();
        assert!(j3.entries().as_slice().iter().all(|&x| x == 1.0));
        let two = ComparisonMatrix::<f64>::from_weights(&[2.0, 1.0]).unwrap();
        assert_eq!(two.entries().as_slice(), &[1.0, 2.0, 0.5, 1.0]);
        assert!(two.is_reciprocal());
        assert!(matches!(
            ComparisonMatrix::<f64>::from_weights(&[1.0, 0.0]),
            Err(RpcmError::NonPositiveWeight { index: 1, .. })
        ));
    }

    #[test]
    fn validation_rejects_bad_entries() {
        let m = Matrix::from_rows(&[vec![1.0, -2.0], vec![0.5, 1.0]]).unwrap();
        assert!(matches!(ComparisonMatrix::new(m), Err(RpcmError::NonPositiveEntry { row: 0, col: 1, .. })));
        let rect = Matrix::<f64>::zeros(2, 3);
        assert!(matches!(ComparisonMatrix::new(rect), Err(RpcmError::NotSquare { .. })));
        let nonrecip = ComparisonMatrix::<f64>::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0]]).unwrap();
        assert!(!nonrecip.is_reciprocal());
    }

    #[test]
    fn perron_examples() {
        let j3 = ComparisonMatrix::<f64>::from_weights(&[1.0, 1.0, 1.0]).unwrap();
        assert!((perron_eigenvalue(&j3).unwrap().lambda_max - 3.0).abs() < 1e-12);
        let w = ComparisonMatrix::<f64>::from_weights(&[1.0, 2.0, 4.0]).unwrap();
        let e = perron_eigenvalue(&w).unwrap();
        assert!((e.lambda_max - 3.0).abs() < 1e-8);
        assert!(e.right_vector.iter().all(|&x| x > 0.0));
        assert!((norm2(&e.right_vector) - 1.0).abs() < 1e-12);
        // Frozen from a dense eigensolver on the 3×3 (see tests/rpcm_oracles.rs).
        let p = perron_eigenvalue(&perturbed_222()).unwrap();
        assert!((p.lambda_max - 3.053_621_575_878_972_6).abs() < 1e-9);
    }

    #[test]
    fn consistency_degree_examples() {
        let w = ComparisonMatrix::<f64>::from_weights(&[0.3, 1.7, 2.2, 9.0]).unwrap();
        assert_eq!(consistency_degree(&w, 1e-9), 1.0);
        let one = ComparisonMatrix::<f64>::from_weights(&[4.0]).unwrap();
        assert_eq!(consistency_degree(&one, 1e-9), 1.0);
        // 21 of 27 triples involve a repeated index and are trivially consistent;
        // all 6 distinct triples fail for the (2,2,2) matrix.
        assert!((consistency_degree(&perturbed_222(), 1e-9) - 21.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn inconsistency_examples() {
        assert_eq!(inconsistency(5.0f64, 5).unwrap(), 0.0);
        assert!((inconsistency(3.0536f64, 3).unwrap() - 0.0268).abs() < 1e-12);
        assert_eq!(inconsistency(7.0f64, 4).unwrap(), 1.0);
        assert!(matches!(inconsistency(1.0f64, 1), Err(RpcmError::DegenerateOrder(1))));
    }

    #[test]
    fn condition_number_matches_reported_example() {
        for (triple, expected) in [
            ([1.001, 0.995, 1.005], 1.000),
            ([1.002, 0.980, 1.015], 1.000),
            ([0.950, 0.775, 1.015], 1.015),
            ([1.875, 0.205, 0.580], 2.030),
            ([5.225, 3.170, 0.001], 417.709),
        ] {
            let a = ComparisonMatrix::<f64>::from_upper_triangle(3, &triple).unwrap();
            let c = condition_number(&a, 3.0).unwrap();
            assert!((c - expected).abs() <= 0.005 * expected, "{triple:?}: {c}");
        }
    }

    #[test]
    fn condition_number_guards() {
        let big = ComparisonMatrix::<f64>::from_weights(&[1.0; 11]).unwrap();
        assert!(matches!(condition_number(&big, 11.0), Err(RpcmError::OrderCapExceeded { .. })));
        // J₂ has p'(λ) = 2λ − 2, which vanishes at λ = 1.
        let j2 = ComparisonMatrix::<f64>::from_weights(&[1.0, 1.0]).unwrap();
        assert!(matches!(condition_number(&j2, 1.0), Err(RpcmError::DerivativeNearZero(_))));
    }

    #[test]
    fn permanent_examples() {
        let j3 = ComparisonMatrix::<f64>::from_weights(&[1.0, 1.0, 1.0]).unwrap();
        assert!((permanent(&j3).unwrap() - 6.0).abs() < 1e-12);
        let w = ComparisonMatrix::<f64>::from_weights(&[1.0, 2.0, 4.0]).unwrap();
        assert!((permanent(&w).unwrap() - 6.0).abs() < 6e-10);
        let nr = ComparisonMatrix::<f64>::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0]]).unwrap();
        assert!((permanent(&nr).unwrap() - 7.0).abs() < 1e-12);
        let big = ComparisonMatrix::<f64>::from_weights(&[1.0; 13]).unwrap();
        assert!(permanent(&big).is_err());
    }

    #[test]
    fn identity_residual_examples() {
        let w = ComparisonMatrix::<f64>::from_weights(&[0.5, 1.5, 3.0, 0.8]).unwrap();
        let r = identity_residuals(&w, 2).unwrap();
        assert!(r.power_residual <= 1e-10);
        assert!(r.sinh_residual <= 1e-12);
        assert!(r.max_charpoly_residual() <= 1e-8);
        assert!(r.trace_rank_residual <= 1e-12);

        let j4 = ComparisonMatrix::<f64>::from_weights(&[1.0; 4]).unwrap();
        assert!(identity_residuals(&j4, 3).unwrap().trace_residual <= 1e-8);

        let p = identity_residuals(&perturbed_222(), 2).unwrap();
        assert!(p.power_residual > 1e-3);
        assert!(identity_residuals(&j4, 0).is_err());
        assert!(identity_residuals(&j4, 6).is_err());
    }

    #[test]
    fn identity_overflow_guard() {
        let w = ComparisonMatrix::<f64>::from_weights(&[1.0, 1e307]).unwrap();
        assert!(matches!(identity_residuals(&w, 5), Err(RpcmError::OverflowRisk(_))));
    }

    #[test]
    fn matrix_sinh_shortcut_matches_series() {
        let w = ComparisonMatrix::<f64>::from_weights(&[1.0, 2.0, 0.25]).unwrap();
        let fast = matrix_sinh(&w);
        let slow = sinh_series(w.entries());
        assert!(fast.sub(&slow).frobenius_norm() <= 1e-12 * slow.frobenius_norm());
    }

    #[test]
    fn delimited_roundtrip() {
        let a = perturbed_222();
        let text = a.to_delimited(',');
        let back = ComparisonMatrix::<f64>::from_delimited(&text, ',').unwrap();
        assert_eq!(a, back);
        assert!(ComparisonMatrix::<f64>::from_delimited("1,2\n3", ',').is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let w = ComparisonMatrix::<f32>::from_weights(&[1.0, 2.0, 4.0]).unwrap();
        let e = perron_eigenvalue(&w).unwrap();
        assert!((e.lambda_max - 3.0).abs() < 1e-5);
        assert!((permanent(&w).unwrap() - 6.0).abs() < 1e-4);
    }
}
