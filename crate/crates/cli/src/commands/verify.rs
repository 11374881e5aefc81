use fcix_core::rpcm::{
    condition_number, consistency_degree, identity_residuals, inconsistency, perron_eigenvalue, permanent,
    ComparisonMatrix, DEFAULT_TAU,
};
use serde::Serialize;

use crate::error::CliError;

/// Published condition-number triplets `(a_12, a_13, a_23)` and values at `λ = 3`.
pub const CONDITION_EXAMPLES: [([f64; 3], f64); 5] = [
    ([1.001, 0.995, 1.005], 1.000),
    ([1.002, 0.980, 1.015], 1.000),
    ([0.950, 0.775, 1.015], 1.015),
    ([1.875, 0.205, 0.580], 2.030),
    ([5.225, 3.170, 0.001], 417.709),
];
pub const CONDITION_REL_TOL: f64 = 0.005;
/// Pair scaling applied by `--perturb`.
pub const PERTURBATION: f64 = 1.25;
const ORDERS: std::ops::RangeInclusive<usize> = 2..=8;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub perturbed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn table(&self) -> String {
        let mut out = format!("{:<40} {:>14} {:>10}  status\n", "check", "value", "tolerance");
        for c in &self.checks {
            out.push_str(&format!(
                "{:<40} {:>14.6e} {:>10.1e}  {}  {}\n",
                c.name,
                c.value,
                c.tolerance,
                if c.passed { "PASS" } else { "FAIL" },
                c.detail
            ));
        }
        out
    }

    pub fn into_result(self) -> Result<Self, CliError> {
        match self.failed() {
            0 => Ok(self),
            failed => Err(CliError::Verification { failed }),
        }
    }
}

fn weights(n: usize) -> Vec<f64> {
    (0..n).map(|i| 1.7f64.powi(i as i32) / (1.0 + i as f64)).collect()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Worst value of `metric` over all orders, compared as `value <= tolerance`.
fn worst(
    name: &str,
    tolerance: f64,
    mats: &[ComparisonMatrix<f64>],
    metric: impl Fn(&ComparisonMatrix<f64>) -> Result<f64, String>,
) -> Check {
    let mut value = 0.0f64;
    let mut at = mats.first().map_or(0, |a| a.order());
    for a in mats {
        match metric(a) {
            Ok(v) if v.is_nan() || v > value => {
                value = v;
                at = a.order();
            }
            Ok(_) => {}
            Err(e) => {
                return Check {
                    name: name.into(),
                    value: f64::NAN,
                    tolerance,
                    passed: false,
                    detail: format!("N={}: {e}", a.order()),
                }
            }
        }
    }
    Check {
        name: name.into(),
        value,
        tolerance,
        passed: value <= tolerance,
        detail: format!("worst at N={at}"),
    }
}

/// Identity suite on consistent matrices of order 2..=8 plus the condition-number examples.
///
/// With `perturb` the suite runs on matrices whose first pair is scaled by
/// [`PERTURBATION`], so the consistency identities are expected to fail.
pub fn cmd_verify(perturb: bool) -> VerifyReport {
    let mats: Vec<ComparisonMatrix<f64>> = ORDERS
        .map(|n| {
            let a = ComparisonMatrix::from_weights(&weights(n)).expect("positive weights");
            if perturb {
                a.with_pair_scaled(0, 1, PERTURBATION).expect("positive scale")
            } else {
                a
            }
        })
        .collect();
    let e = |err: fcix_core::rpcm::RpcmError| err.to_string();
    let mut checks = vec![
        worst("rank_one", 1e-10, &mats, |a| Ok(identity_residuals(a, 2).map_err(e)?.rank_ratio)),
        worst("perron_root", 1e-8, &mats, |a| {
            Ok((perron_eigenvalue(a).map_err(e)?.lambda_max - a.order() as f64).abs())
        }),
        worst("power_identity", 1e-8, &mats, |a| {
            let r2 = identity_residuals(a, 2).map_err(e)?.power_residual;
            let r3 = identity_residuals(a, 3).map_err(e)?.power_residual;
            Ok(r2.max(r3))
        }),
        worst("sinh_identity", 1e-8, &mats, |a| Ok(identity_residuals(a, 2).map_err(e)?.sinh_residual)),
        worst("sinh_trace", 1e-6, &mats, |a| Ok(identity_residuals(a, 2).map_err(e)?.trace_residual_rel())),
        worst("trace_rank", 1e-8, &mats, |a| Ok(identity_residuals(a, 2).map_err(e)?.trace_rank_residual)),
        worst("characteristic_polynomial", 1e-8, &mats, |a| {
            Ok(identity_residuals(a, 2).map_err(e)?.max_charpoly_residual())
        }),
        worst("permanent", 1e-8, &mats, |a| {
            let nf = factorial(a.order());
            Ok((permanent(a).map_err(e)? - nf).abs() / nf)
        }),
        worst("consistency_degree", 0.0, &mats, |a| Ok(1.0 - consistency_degree(a, DEFAULT_TAU))),
    ];

    let mut min_psi = f64::INFINITY;
    let mut note = String::new();
    for n in 3..=*ORDERS.end() {
        let base = ComparisonMatrix::from_weights(&weights(n)).expect("positive weights");
        let pert = base.with_pair_scaled(0, n - 1, 1.5).expect("positive scale");
        let psi = perron_eigenvalue(&pert)
            .and_then(|r| inconsistency(r.lambda_max, n))
            .unwrap_or(f64::NAN);
        if psi.is_nan() || psi < min_psi {
            min_psi = psi;
            note = format!("smallest psi at N={n}");
        }
    }
    checks.push(Check {
        name: "perturbation_monotonicity".into(),
        value: min_psi,
        tolerance: 0.0,
        passed: min_psi > 0.0,
        detail: note,
    });

    for (triple, expected) in CONDITION_EXAMPLES {
        let name = format!("condition_number[{},{},{}]", triple[0], triple[1], triple[2]);
        let got = ComparisonMatrix::from_upper_triangle(3, &triple).and_then(|a| condition_number(&a, 3.0));
        checks.push(match got {
            Ok(c) => Check {
                name,
                value: c,
                tolerance: CONDITION_REL_TOL,
                passed: (c - expected).abs() <= CONDITION_REL_TOL * expected,
                detail: format!("expected {expected:.3}"),
            },
            Err(err) => Check {
                name,
                value: f64::NAN,
                tolerance: CONDITION_REL_TOL,
                passed: false,
                detail: err.to_string(),
            },
        });
    }
    VerifyReport {
        perturbed: perturb,
        checks,
    }
}
