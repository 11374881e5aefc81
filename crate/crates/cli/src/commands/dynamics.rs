use std::time::Instant;

use fcix_core::dynamics::{self, CriticalPoint, SystemParams};
use serde::Serialize;

use crate::config::{ParamsSource, RunConfig};
use crate::error::CliError;
use crate::manifest::ArtifactWriter;

/// Starting points as multiples of the interior critical point.
pub const START_SCALES: [f64; 3] = [0.5, 0.99, 1.01];

#[derive(Debug, Clone, Serialize)]
pub struct PathStatus {
    pub start: (f64, f64),
    pub file: Option<String>,
    pub blowup_step: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DynamicsReport {
    pub source: ParamsSource,
    pub params: SystemParams<f64>,
    pub critical_points: Vec<CriticalPoint<f64>>,
    pub dt: f64,
    pub steps: usize,
    pub paths: Vec<PathStatus>,
}

/// Critical points plus RK4 paths around the interior point, written with `prefix`.
pub fn write_dynamics(
    out: &mut ArtifactWriter,
    cfg: &RunConfig,
    params: SystemParams<f64>,
    source: ParamsSource,
    prefix: &str,
) -> Result<DynamicsReport, CliError> {
    let critical_points = dynamics::critical_points(&params).map_err(|e| CliError::stage("dynamics", e))?;
    let (f1, v1) = (critical_points[0].f, critical_points[0].v);
    let starts: Vec<(f64, f64)> = START_SCALES.iter().map(|s| (f1 * s, v1 * s)).collect();
    let runs = dynamics::trajectories(&params, &starts, cfg.dynamics_dt, cfg.dynamics_steps);
    let mut paths = Vec::with_capacity(starts.len());
    for (k, (start, run)) in starts.iter().zip(runs).enumerate() {
        match run {
            Ok(path) => {
                let name = format!("{prefix}trajectory_{k}.csv");
                let mut csv = String::from("t,f,v\n");
                for (step, (f, v)) in path.iter().enumerate() {
                    csv.push_str(&format!("{},{f},{v}\n", step as f64 * cfg.dynamics_dt));
                }
                out.write(&name, csv)?;
                paths.push(PathStatus {
                    start: *start,
                    file: Some(name),
                    blowup_step: None,
                });
            }
            Err(dynamics::DynamicsError::Blowup { step }) => {
                log::info!("path from ({}, {}) diverged at step {step}", start.0, start.1);
                paths.push(PathStatus {
                    start: *start,
                    file: None,
                    blowup_step: Some(step),
                });
            }
            Err(e) => return Err(CliError::stage("dynamics", e)),
        }
    }
    let report = DynamicsReport {
        source,
        params,
        critical_points,
        dt: cfg.dynamics_dt,
        steps: cfg.dynamics_steps,
        paths,
    };
    out.write_json(&format!("{prefix}dynamics.json"), &report)?;
    Ok(report)
}

/// Stand-alone analysis with explicit parameters, or the published estimates when none are given.
pub fn cmd_dynamics(cfg: &RunConfig) -> Result<DynamicsReport, CliError> {
    let params = match &cfg.explicit_params {
        Some(p) => SystemParams::new(p.alpha, p.beta, p.gamma, p.delta, p.theta)
            .map_err(|e| CliError::stage("dynamics", e))?,
        None => {
            log::info!("no parameters given; using the published FCIX-VIX estimates");
            SystemParams::reference()
        }
    };
    let mut out = ArtifactWriter::create(&cfg.output)?;
    let start = Instant::now();
    let report = write_dynamics(&mut out, cfg, params, ParamsSource::Explicit, "")?;
    out.record("dynamics", start);
    out.finish("dynamics", cfg)?;
    Ok(report)
}
