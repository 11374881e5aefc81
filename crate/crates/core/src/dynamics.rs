//! Two-variable information-flow system
//!
//! ```text
//! dF/dt = (γ + θ) F² − α F
//! dV/dt = β V² − δ V
//! ```
//!
//! with its critical points, their linear classification, and RK4 paths.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::scalar::Scalar;

pub const CENTER_TOL: f64 = 1e-12;
pub const BLOWUP_LIMIT: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),
    #[error("parameter {name} = {value} must be finite and nonnegative")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("time step must be positive and finite")]
    NonPositiveStep,
    #[error("state left the bounded region at step {step}")]
    Blowup { step: usize },
}

/// `α = T_{F→V}`, `β = T_{V→F}`, `γ = S_F`, `δ = S_V`, `θ` = ApEn of the V→F response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SystemParams<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub delta: T,
    pub theta: T,
}

impl<T: Scalar> SystemParams<T> {
    pub fn new(alpha: T, beta: T, gamma: T, delta: T, theta: T) -> Result<Self, DynamicsError> {
        let p = Self {
            alpha,
            beta,
            gamma,
            delta,
            theta,
        };
        for (name, v) in [
            ("alpha", alpha),
            ("beta", beta),
            ("gamma", gamma),
            ("delta", delta),
            ("theta", theta),
        ] {
            if !v.is_finite() || v < T::zero() {
                return Err(DynamicsError::InvalidParameter {
                    name,
                    value: v.to_f64_lossy(),
                });
            }
        }
        p.validate()?;
        Ok(p)
    }

    /// Published estimates for the FCIX–VIX pair.
    pub fn reference() -> Self {
        Self {
            alpha: T::lit(0.005),
            beta: T::lit(0.022),
            gamma: T::lit(0.678),
            delta: T::lit(1.671),
            theta: T::lit(0.160),
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.beta > T::zero()) {
            return Err(DynamicsError::DegenerateParameters("beta must be positive".into()));
        }
        if !(self.gamma + self.theta > T::zero()) {
            return Err(DynamicsError::DegenerateParameters("gamma + theta must be positive".into()));
        }
        Ok(())
    }

    #[inline]
    fn g(&self) -> T {
        self.gamma + self.theta
    }
}

#[inline]
pub fn rhs<T: Scalar>(p: &SystemParams<T>, (f, v): (T, T)) -> (T, T) {
    (p.g() * f * f - p.alpha * f, p.beta * v * v - p.delta * v)
}

/// Exact Jacobian of [`rhs`]; diagonal because each equation involves one variable.
pub fn jacobian<T: Scalar>(p: &SystemParams<T>, (f, v): (T, T)) -> Matrix<T> {
    let two = T::lit(2.0);
    Matrix::from_vec(2, 2, vec![two * p.g() * f - p.alpha, T::zero(), T::zero(), two * p.beta * v - p.delta])
}

/// The alternative matrix with `θ` in both off-diagonal slots.
pub fn printed_jacobian<T: Scalar>(p: &SystemParams<T>, at: (T, T)) -> Matrix<T> {
    let mut j = jacobian(p, at);
    j[(0, 1)] = p.theta;
    j[(1, 0)] = p.theta;
    j
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Eigenvalue<T> {
    pub re: T,
    pub im: T,
}

/// Eigenvalues of a 2×2 matrix from its trace and determinant.
pub fn eigenvalues_2x2<T: Scalar>(m: &Matrix<T>) -> [Eigenvalue<T>; 2] {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    if b == T::zero() || c == T::zero() {
        // triangular: read off the diagonal exactly
        let mut e = [Eigenvalue { re: a, im: T::zero() }, Eigenvalue { re: d, im: T::zero() }];
        if e[1].re > e[0].re {
            e.swap(0, 1);
        }
        return e;
    }
    let two = T::lit(2.0);
    let half_tr = (a + d) / two;
    let half_gap = (a - d) / two;
    let disc = half_gap * half_gap + b * c;
    if disc >= T::zero() {
        let s = disc.sqrt();
        [
            Eigenvalue { re: half_tr + s, im: T::zero() },
            Eigenvalue { re: half_tr - s, im: T::zero() },
        ]
    } else {
        let s = (-disc).sqrt();
        [Eigenvalue { re: half_tr, im: s }, Eigenvalue { re: half_tr, im: -s }]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Source,
    Sink,
    Saddle,
    Center,
    Degenerate,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::Source => "source",
            Self::Sink => "sink",
            Self::Saddle => "saddle",
            Self::Center => "center",
            Self::Degenerate => "degenerate",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CriticalPoint<T> {
    pub f: T,
    pub v: T,
    pub jacobian_eigenvalues: [Eigenvalue<T>; 2],
    pub dim_stable: usize,
    pub dim_unstable: usize,
    pub dim_center: usize,
    pub classification: Classification,
    /// False for boundary points where either index is zero.
    pub practical: bool,
}

/// Linear classification of `point` from the Jacobian there.
pub fn classify<T: Scalar>(point: (T, T), jac: &Matrix<T>) -> CriticalPoint<T> {
    let eig = eigenvalues_2x2(jac);
    let tol = T::lit(CENTER_TOL);
    let dim_unstable = eig.iter().filter(|e| e.re > tol).count();
    let dim_stable = eig.iter().filter(|e| e.re < -tol).count();
    let dim_center = 2 - dim_unstable - dim_stable;
    let classification = match (dim_unstable, dim_stable) {
        (2, 0) => Classification::Source,
        (0, 2) => Classification::Sink,
        (1, 1) => Classification::Saddle,
        (0, 0) if eig.iter().all(|e| e.im != T::zero()) => Classification::Center,
        _ => Classification::Degenerate,
    };
    CriticalPoint {
        f: point.0,
        v: point.1,
        jacobian_eigenvalues: eig,
        dim_stable,
        dim_unstable,
        dim_center,
        classification,
        practical: point.0 != T::zero() && point.1 != T::zero(),
    }
}

/// The four equilibria: interior `(α/(γ+θ), δ/β)`, the origin, and the two axis points.
pub fn critical_points<T: Scalar>(p: &SystemParams<T>) -> Result<Vec<CriticalPoint<T>>, DynamicsError> {
    p.validate()?;
    let f1 = p.alpha / p.g();
    let v1 = p.delta / p.beta;
    let z = T::zero();
    Ok([(f1, v1), (z, z), (f1, z), (z, v1)]
        .into_iter()
        .map(|pt| classify(pt, &jacobian(p, pt)))
        .collect())
}

/// Fourth-order Runge–Kutta path including the start, `steps + 1` states.
pub fn trajectory<T: Scalar>(p: &SystemParams<T>, start: (T, T), dt: T, steps: usize) -> Result<Vec<(T, T)>, DynamicsError> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(DynamicsError::NonPositiveStep);
    }
    let limit = T::lit(BLOWUP_LIMIT);
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    let half = dt / two;
    let mut path = Vec::with_capacity(steps + 1);
    let mut s = start;
    path.push(s);
    for step in 1..=steps {
        let k1 = rhs(p, s);
        let k2 = rhs(p, (s.0 + half * k1.0, s.1 + half * k1.1));
        let k3 = rhs(p, (s.0 + half * k2.0, s.1 + half * k2.1));
        let k4 = rhs(p, (s.0 + dt * k3.0, s.1 + dt * k3.1));
        s = (
            s.0 + dt / six * (k1.0 + two * k2.0 + two * k3.0 + k4.0),
            s.1 + dt / six * (k1.1 + two * k2.1 + two * k3.1 + k4.1),
        );
        if !(s.0.abs() <= limit && s.1.abs() <= limit) {
            return Err(DynamicsError::Blowup { step });
        }
        path.push(s);
    }
    Ok(path)
}

/// [`trajectory`] for several starting points in parallel.
pub fn trajectories<T: Scalar>(
    p: &SystemParams<T>,
    starts: &[(T, T)],
    dt: T,
    steps: usize,
) -> Vec<Result<Vec<(T, T)>, DynamicsError>> {
    starts.par_iter().map(|&s| trajectory(p, s, dt, steps)).collect()
}
