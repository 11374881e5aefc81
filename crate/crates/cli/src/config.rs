//! Flat key-value run configuration. Precedence: flag > file > default.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use fcix_core::entropy::MIN_SHUFFLES;
use fcix_core::rpct::{Aggregation, DecomposeOptions};
use fcix_core::segment::MAX_SERIES_LEN;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Gaussian kernel bandwidth for segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(into = "String")]
pub enum GammaChoice {
    Auto,
    Fixed(f64),
}

impl From<GammaChoice> for String {
    fn from(g: GammaChoice) -> String {
        match g {
            GammaChoice::Auto => "auto".into(),
            GammaChoice::Fixed(v) => v.to_string(),
        }
    }
}

impl FromStr for GammaChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("auto") {
            return Ok(Self::Auto);
        }
        s.trim()
            .parse::<f64>()
            .map(Self::Fixed)
            .map_err(|_| format!("`{s}` is neither `auto` nor a number"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamsSource {
    Computed,
    Explicit,
}

impl FromStr for ParamsSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "computed" => Ok(Self::Computed),
            "explicit" => Ok(Self::Explicit),
            other => Err(format!("unknown params source `{other}` (computed|explicit)")),
        }
    }
}

/// One layer of settings. Every field is optional so layers can be stacked;
/// the same struct is read from the TOML file and from command-line flags.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    /// Price file (long `date,ticker,price` unless --wide).
    #[arg(long, short = 'i')]
    pub input: Option<PathBuf>,
    /// Input is wide: `date,<ticker>,<ticker>,...`.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub wide: Option<bool>,
    /// Drop tickers missing any date instead of failing.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub drop_incomplete: Option<bool>,
    /// Return lag l (the constitution criterion).
    #[arg(long)]
    pub lag: Option<usize>,
    #[arg(long)]
    pub decompose_tol: Option<f64>,
    #[arg(long)]
    pub decompose_max_iters: Option<usize>,
    #[arg(long)]
    pub decompose_seed: Option<u64>,
    /// Keep the last iterate when the sweep limit is hit.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub accept_unconverged: Option<bool>,
    /// daily, monthly or quarterly.
    #[arg(long)]
    pub aggregation: Option<String>,
    #[arg(long)]
    pub segment_k_star: Option<usize>,
    /// `auto` (median heuristic) or a positive number.
    #[arg(long)]
    pub segment_gamma: Option<String>,
    #[arg(long)]
    pub segment_min_len: Option<usize>,
    #[arg(long)]
    pub entropy_m: Option<usize>,
    #[arg(long)]
    pub entropy_r_frac: Option<f64>,
    #[arg(long)]
    pub entropy_bins: Option<usize>,
    #[arg(long)]
    pub entropy_order: Option<usize>,
    /// Surrogates for the transfer-entropy test; 0 disables it.
    #[arg(long)]
    pub entropy_shuffles: Option<usize>,
    #[arg(long)]
    pub entropy_seed: Option<u64>,
    /// Local Whittle bandwidth m = floor(T^exponent).
    #[arg(long)]
    pub whittle_exponent: Option<f64>,
    #[arg(long)]
    pub xcf_max_lag: Option<usize>,
    #[arg(long)]
    pub var_p: Option<usize>,
    #[arg(long)]
    pub var_horizon: Option<usize>,
    /// computed (from the analyses) or explicit (alpha..theta).
    #[arg(long)]
    pub dynamics_params: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub dynamics_dt: Option<f64>,
    #[arg(long)]
    pub dynamics_steps: Option<usize>,
    /// Output directory.
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    /// Worker threads (also FCIX_WORKERS).
    #[arg(long)]
    pub workers: Option<usize>,
}

macro_rules! overlay {
    ($hi:expr, $lo:expr, $($f:ident),* $(,)?) => {
        ConfigLayer { $($f: $hi.$f.or($lo.$f)),* }
    };
}

impl ConfigLayer {
    pub fn from_toml_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Input {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }

    /// Values in `self` win over `lower`.
    pub fn over(self, lower: ConfigLayer) -> ConfigLayer {
        overlay!(
            self,
            lower,
            input,
            wide,
            drop_incomplete,
            lag,
            decompose_tol,
            decompose_max_iters,
            decompose_seed,
            accept_unconverged,
            aggregation,
            segment_k_star,
            segment_gamma,
            segment_min_len,
            entropy_m,
            entropy_r_frac,
            entropy_bins,
            entropy_order,
            entropy_shuffles,
            entropy_seed,
            whittle_exponent,
            xcf_max_lag,
            var_p,
            var_horizon,
            dynamics_params,
            alpha,
            beta,
            gamma,
            delta,
            theta,
            dynamics_dt,
            dynamics_steps,
            output,
            workers,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplicitParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub theta: f64,
}

/// Fully resolved and validated settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub wide: bool,
    pub drop_incomplete: bool,
    pub lag: usize,
    pub decompose_tol: f64,
    pub decompose_max_iters: usize,
    pub decompose_seed: u64,
    pub accept_unconverged: bool,
    pub aggregation: Aggregation,
    pub segment_k_star: usize,
    pub segment_gamma: GammaChoice,
    pub segment_min_len: usize,
    pub entropy_m: usize,
    pub entropy_r_frac: f64,
    pub entropy_bins: usize,
    pub entropy_order: usize,
    pub entropy_shuffles: usize,
    pub entropy_seed: u64,
    pub whittle_exponent: f64,
    pub xcf_max_lag: usize,
    pub var_p: usize,
    pub var_horizon: usize,
    pub dynamics_params: ParamsSource,
    pub explicit_params: Option<ExplicitParams>,
    pub dynamics_dt: f64,
    pub dynamics_steps: usize,
    pub output: PathBuf,
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::resolve(ConfigLayer::default()).expect("defaults are valid")
    }
}

fn parse<T: FromStr<Err = String>>(key: &str, raw: Option<String>, default: T) -> Result<T, CliError> {
    match raw {
        None => Ok(default),
        Some(s) => s.parse().map_err(|e| CliError::Config(format!("{key}: {e}"))),
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(msg()))
    }
}

impl RunConfig {
    /// Stacks `flags` over the optional config file over defaults, then validates.
    pub fn load(flags: ConfigLayer, file: Option<&Path>) -> Result<Self, CliError> {
        let layer = match file {
            Some(path) => flags.over(ConfigLayer::from_toml_file(path)?),
            None => flags,
        };
        Self::resolve(layer)
    }

    pub fn resolve(l: ConfigLayer) -> Result<Self, CliError> {
        let explicit = [l.alpha, l.beta, l.gamma, l.delta, l.theta];
        let explicit_params = match explicit {
            [Some(alpha), Some(beta), Some(gamma), Some(delta), Some(theta)] => Some(ExplicitParams {
                alpha,
                beta,
                gamma,
                delta,
                theta,
            }),
            [None, None, None, None, None] => None,
            _ => return Err(CliError::Config("alpha, beta, gamma, delta and theta must be given together".into())),
        };
        let default_source = if explicit_params.is_some() {
            ParamsSource::Explicit
        } else {
            ParamsSource::Computed
        };
        let cfg = RunConfig {
            input: l.input,
            wide: l.wide.unwrap_or(false),
            drop_incomplete: l.drop_incomplete.unwrap_or(false),
            lag: l.lag.unwrap_or(1),
            decompose_tol: l.decompose_tol.unwrap_or(DecomposeOptions::default().tol),
            decompose_max_iters: l.decompose_max_iters.unwrap_or(DecomposeOptions::default().max_iters),
            decompose_seed: l.decompose_seed.unwrap_or(0),
            accept_unconverged: l.accept_unconverged.unwrap_or(false),
            aggregation: parse("aggregation", l.aggregation, Aggregation::Monthly)?,
            segment_k_star: l.segment_k_star.unwrap_or(1),
            segment_gamma: parse("segment_gamma", l.segment_gamma, GammaChoice::Auto)?,
            segment_min_len: l.segment_min_len.unwrap_or(fcix_core::segment::DEFAULT_MIN_LEN),
            entropy_m: l.entropy_m.unwrap_or(fcix_core::entropy::DEFAULT_APEN_M),
            entropy_r_frac: l.entropy_r_frac.unwrap_or(fcix_core::entropy::DEFAULT_R_FRAC),
            entropy_bins: l.entropy_bins.unwrap_or(fcix_core::entropy::DEFAULT_BINS),
            entropy_order: l.entropy_order.unwrap_or(fcix_core::entropy::DEFAULT_ORDER),
            entropy_shuffles: l.entropy_shuffles.unwrap_or(MIN_SHUFFLES),
            entropy_seed: l.entropy_seed.unwrap_or(0),
            whittle_exponent: l.whittle_exponent.unwrap_or(fcix_core::fracts::WHITTLE_EXPONENT),
            xcf_max_lag: l.xcf_max_lag.unwrap_or(20),
            var_p: l.var_p.unwrap_or(1),
            var_horizon: l.var_horizon.unwrap_or(20),
            dynamics_params: parse("dynamics_params", l.dynamics_params, default_source)?,
            explicit_params,
            dynamics_dt: l.dynamics_dt.unwrap_or(0.01),
            dynamics_steps: l.dynamics_steps.unwrap_or(1000),
            output: l.output.unwrap_or_else(|| PathBuf::from("fcix-out")),
            workers: l.workers,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        check(self.lag >= 1, || "lag must be at least 1".into())?;
        check(self.decompose_tol > 0.0 && self.decompose_tol.is_finite(), || {
            format!("decompose_tol = {} must be positive", self.decompose_tol)
        })?;
        check(self.decompose_max_iters >= 1, || "decompose_max_iters must be at least 1".into())?;
        check(self.segment_k_star >= 1, || "segment_k_star must be at least 1".into())?;
        check(self.segment_min_len >= 1, || "segment_min_len must be at least 1".into())?;
        check(
            (self.segment_k_star + 1) * self.segment_min_len <= MAX_SERIES_LEN,
            || "segment_k_star and segment_min_len exceed the supported series length".into(),
        )?;
        if let GammaChoice::Fixed(g) = self.segment_gamma {
            check(g > 0.0 && g.is_finite(), || format!("segment_gamma = {g} must be positive"))?;
        }
        check(self.entropy_m >= 1, || "entropy_m must be at least 1".into())?;
        check(self.entropy_r_frac > 0.0 && self.entropy_r_frac.is_finite(), || {
            format!("entropy_r_frac = {} must be positive", self.entropy_r_frac)
        })?;
        check(self.entropy_bins >= 2, || "entropy_bins must be at least 2".into())?;
        check(self.entropy_order >= 1, || "entropy_order must be at least 1".into())?;
        check(
            self.entropy_shuffles == 0 || self.entropy_shuffles >= MIN_SHUFFLES,
            || format!("entropy_shuffles must be 0 or at least {MIN_SHUFFLES}"),
        )?;
        check(self.whittle_exponent > 0.0 && self.whittle_exponent < 1.0, || {
            format!("whittle_exponent = {} must lie in (0, 1)", self.whittle_exponent)
        })?;
        check(self.var_p >= 1, || "var_p must be at least 1".into())?;
        check(self.dynamics_dt > 0.0 && self.dynamics_dt.is_finite(), || {
            format!("dynamics_dt = {} must be positive", self.dynamics_dt)
        })?;
        if let Some(p) = &self.explicit_params {
            fcix_core::dynamics::SystemParams::new(p.alpha, p.beta, p.gamma, p.delta, p.theta)
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        check(
            self.dynamics_params == ParamsSource::Computed || self.explicit_params.is_some(),
            || "dynamics_params = explicit needs alpha, beta, gamma, delta and theta".into(),
        )?;
        check(self.workers != Some(0), || "workers must be at least 1".into())?;
        Ok(())
    }

    pub fn decompose_options(&self) -> DecomposeOptions {
        DecomposeOptions {
            tol: self.decompose_tol,
            max_iters: self.decompose_max_iters,
            seed: self.decompose_seed,
            accept_unconverged: self.accept_unconverged,
        }
    }

    pub fn info_options(&self) -> fcix_core::entropy::InfoOptions {
        fcix_core::entropy::InfoOptions {
            bins: self.entropy_bins,
            order: self.entropy_order,
            apen_m: self.entropy_m,
            r_frac: self.entropy_r_frac,
            n_shuffles: self.entropy_shuffles,
            seed: self.entropy_seed,
        }
    }

    pub fn whittle_bandwidth(&self, len: usize) -> usize {
        (len as f64).powf(self.whittle_exponent).floor() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_beats_file_beats_default() {
        let file: ConfigLayer = toml::from_str("lag = 3\nvar_p = 2\naggregation = \"quarterly\"").unwrap();
        let flags = ConfigLayer {
            lag: Some(5),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(flags.over(file)).unwrap();
        assert_eq!(cfg.lag, 5);
        assert_eq!(cfg.var_p, 2);
        assert_eq!(cfg.aggregation, Aggregation::Quarterly);
        assert_eq!(cfg.entropy_bins, 3);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(toml::from_str::<ConfigLayer>("lagg = 1").is_err());
        for layer in [
            ConfigLayer {
                lag: Some(0),
                ..Default::default()
            },
            ConfigLayer {
                entropy_shuffles: Some(10),
                ..Default::default()
            },
            ConfigLayer {
                segment_gamma: Some("-1".into()),
                ..Default::default()
            },
            ConfigLayer {
                alpha: Some(1.0),
                ..Default::default()
            },
            ConfigLayer {
                dynamics_params: Some("explicit".into()),
                ..Default::default()
            },
        ] {
            assert!(matches!(RunConfig::resolve(layer), Err(CliError::Config(_))));
        }
    }

    #[test]
    fn explicit_params_switch_the_source() {
        let cfg = RunConfig::resolve(ConfigLayer {
            alpha: Some(1.0),
            beta: Some(1.0),
            gamma: Some(1.0),
            delta: Some(1.0),
            theta: Some(0.0),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(cfg.dynamics_params, ParamsSource::Explicit);
        assert_eq!(cfg.whittle_bandwidth(4096), 222);
    }
}
