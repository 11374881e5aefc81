use std::path::Path;

use fcix_core::panel::{self, LoadOptions, PricePanel};
use fcix_core::rpct::{self, Aggregation};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::manifest::{sha256_hex, ArtifactWriter, RunManifest};

pub const DAILY_FILE: &str = "fcix_daily.csv";
pub const RUN_FILE: &str = "run.json";
pub const FACTORS_FILE: &str = "consensus.csv";

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub input_sha256: String,
    pub tickers: Vec<String>,
    pub dropped_tickers: Vec<String>,
    pub lag: usize,
    pub horizon: usize,
    pub rel_error: f64,
    pub iterations: usize,
    pub converged: bool,
    pub negatives_clamped: usize,
    pub max_eigen_gap: f64,
    pub psi_mean: f64,
    pub psi_max: f64,
    pub psi_max_date: String,
    pub aggregation: Aggregation,
    pub aggregated_rows: usize,
}

#[derive(Debug)]
pub struct FcixOutcome {
    pub summary: RunSummary,
    pub daily: rpct::FcixSeries<f64>,
    pub aggregated: Option<rpct::FcixSeries<f64>>,
    pub manifest: RunManifest,
}

pub fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_panel(cfg: &RunConfig) -> Result<(PricePanel<f64>, Vec<u8>), CliError> {
    let path = cfg
        .input
        .as_deref()
        .ok_or_else(|| CliError::Usage("an input price file is required (--input or `input` in the config)".into()))?;
    let raw = read_input(path)?;
    let opts = LoadOptions {
        drop_incomplete: cfg.drop_incomplete,
        ..Default::default()
    };
    let panel = if cfg.wide {
        panel::load_prices_wide(raw.as_slice(), &opts)
    } else {
        panel::load_prices(raw.as_slice(), &opts)
    }
    .map_err(|e| CliError::stage("panel", e))?;
    if !panel.dropped().is_empty() {
        log::warn!("dropped incomplete tickers: {}", panel.dropped().join(", "));
    }
    Ok((panel, raw))
}

fn factors_csv(tickers: &[String], f: &rpct::Rank1Factors<f64>) -> String {
    let mut out = String::from("ticker,x,y\n");
    for ((t, x), y) in tickers.iter().zip(&f.x).zip(&f.y) {
        out.push_str(&format!("{t},{x},{y}\n"));
    }
    out
}

/// Prices to daily and aggregated chaos-index files plus a run summary.
pub fn cmd_fcix(cfg: &RunConfig) -> Result<FcixOutcome, CliError> {
    let mut out = ArtifactWriter::create(&cfg.output)?;
    let (panel, raw) = out.timed("panel", || load_panel(cfg))?;
    log::info!("panel: {} assets x {} dates", panel.n_assets(), panel.n_dates());

    let tensor = out.timed("rpct", || {
        let returns = panel.lag_returns(cfg.lag).map_err(|e| CliError::stage("returns", e))?;
        rpct::build_rpct(&returns).map_err(|e| CliError::stage("rpct", e))
    })?;
    let factors = out.timed("decompose", || {
        rpct::consensus_decompose(&tensor, &cfg.decompose_options()).map_err(|e| CliError::stage("decompose", e))
    })?;
    if !factors.converged {
        log::warn!("decomposition stopped after {} sweeps without converging", factors.iterations);
    }
    let daily = out.timed("fcix_series", || {
        rpct::fcix_series(&factors, tensor.order(), tensor.dates()).map_err(|e| CliError::stage("fcix_series", e))
    })?;
    if daily.negatives_clamped > 0 {
        log::warn!("{} negative index values clamped to zero on output", daily.negatives_clamped);
    }
    let aggregated = match cfg.aggregation {
        Aggregation::Daily => None,
        period => Some(out.timed("aggregate", || {
            rpct::aggregate(&daily, period).map_err(|e| CliError::stage("aggregate", e))
        })?),
    };

    out.write(DAILY_FILE, daily.to_delimited(','))?;
    if let Some(a) = &aggregated {
        out.write(&format!("fcix_{}.csv", a.aggregation), a.to_delimited(','))?;
    }
    out.write(FACTORS_FILE, factors_csv(panel.tickers(), &factors))?;

    let (mut psi_max, mut arg) = (f64::NEG_INFINITY, 0);
    for (t, &p) in daily.psi.iter().enumerate() {
        if p > psi_max {
            psi_max = p;
            arg = t;
        }
    }
    let summary = RunSummary {
        input_sha256: sha256_hex(&raw),
        tickers: panel.tickers().to_vec(),
        dropped_tickers: panel.dropped().to_vec(),
        lag: cfg.lag,
        horizon: daily.len(),
        rel_error: factors.rel_error,
        iterations: factors.iterations,
        converged: factors.converged,
        negatives_clamped: daily.negatives_clamped,
        max_eigen_gap: daily.max_eigen_gap,
        psi_mean: daily.psi.iter().sum::<f64>() / daily.len() as f64,
        psi_max,
        psi_max_date: daily.dates[arg].clone(),
        aggregation: cfg.aggregation,
        aggregated_rows: aggregated.as_ref().map_or(daily.len(), |a| a.len()),
    };
    out.write_json(RUN_FILE, &summary)?;
    let manifest = out.finish("fcix", cfg)?;
    Ok(FcixOutcome {
        summary,
        daily,
        aggregated,
        manifest,
    })
}

/// Decomposition error and mean index across several lags.
pub fn cmd_lag_report(cfg: &RunConfig, lags: &[usize]) -> Result<rpct::LagScalingReport<f64>, CliError> {
    if lags.is_empty() || lags.contains(&0) {
        return Err(CliError::Usage("--lags needs one or more positive lags".into()));
    }
    let mut out = ArtifactWriter::create(&cfg.output)?;
    let (panel, _) = out.timed("panel", || load_panel(cfg))?;
    let opts = rpct::LagReportOptions {
        decompose: cfg.decompose_options(),
        apen_m: cfg.entropy_m,
        r_frac: cfg.entropy_r_frac,
    };
    let report = out.timed("lag_report", || {
        rpct::lag_scaling_report(&panel, lags, &opts).map_err(|e| CliError::stage("lag_report", e))
    })?;
    let mut csv = String::from("lag,epsilon,psi_bar,regularity\n");
    for p in &report.points {
        let reg = p.regularity.map_or(String::new(), |r| r.to_string());
        csv.push_str(&format!("{},{},{},{}\n", p.lag, p.epsilon, p.psi_bar, reg));
    }
    out.write("lag_report.csv", csv)?;
    out.write_json("lag_report.json", &report)?;
    out.finish("lag-report", &serde_json::json!({ "config": cfg, "lags": lags }))?;
    Ok(report)
}
