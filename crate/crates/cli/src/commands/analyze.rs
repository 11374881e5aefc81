use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::ValueEnum;
use fcix_core::dynamics::SystemParams;
use fcix_core::entropy::{self, FlowEdge, InformationReport};
use fcix_core::fracts::{self, WhittleEstimate};
use fcix_core::linalg::Matrix;
use fcix_core::segment::{self, Gaussian};
use serde::Serialize;

use crate::commands::dynamics::{write_dynamics, DynamicsReport};
use crate::commands::fcix::read_input;
use crate::config::{GammaChoice, ParamsSource, RunConfig};
use crate::error::{CliError, ExitCode};
use crate::manifest::{ArtifactWriter, RunManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Analysis {
    Segment,
    Apen,
    Whittle,
    Xcf,
    Entropy,
    Var,
    Dynamics,
}

impl Analysis {
    pub const ALL: [Analysis; 7] = [
        Analysis::Segment,
        Analysis::Apen,
        Analysis::Whittle,
        Analysis::Xcf,
        Analysis::Entropy,
        Analysis::Var,
        Analysis::Dynamics,
    ];

    pub fn needs_pair(self) -> bool {
        !matches!(self, Analysis::Segment | Analysis::Apen | Analysis::Whittle)
    }

    pub fn name(self) -> &'static str {
        match self {
            Analysis::Segment => "segment",
            Analysis::Apen => "apen",
            Analysis::Whittle => "whittle",
            Analysis::Xcf => "xcf",
            Analysis::Entropy => "entropy",
            Analysis::Var => "var",
            Analysis::Dynamics => "dynamics",
        }
    }
}

/// A value column with optional dates.
#[derive(Debug, Clone, Serialize)]
pub struct Series {
    pub label: String,
    pub path: PathBuf,
    #[serde(skip)]
    pub dates: Option<Vec<String>>,
    #[serde(skip)]
    pub values: Vec<f64>,
}

/// Reads `value` or `date,value` rows (header required; the last column is the value).
pub fn load_series(path: &Path, label: &str) -> Result<Series, CliError> {
    let raw = read_input(path)?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(raw.as_slice());
    let bad = |msg: String| CliError::Stage {
        stage: "series",
        message: format!("{}: {msg}", path.display()),
        hint: "expected a header then `value` or `date,value` rows",
        code: ExitCode::Data,
    };
    let width = rdr.headers().map_err(|e| bad(e.to_string()))?.len();
    let mut dates = Vec::new();
    let mut values = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let cell = rec.get(width - 1).unwrap_or("");
        let v: f64 = cell
            .parse()
            .map_err(|_| bad(format!("row {}: cannot parse `{cell}`", row + 2)))?;
        if !v.is_finite() {
            return Err(bad(format!("row {}: non-finite value", row + 2)));
        }
        values.push(v);
        if width >= 2 {
            dates.push(rec.get(0).unwrap_or("").to_string());
        }
    }
    if values.is_empty() {
        return Err(bad("no observations".into()));
    }
    Ok(Series {
        label: label.to_string(),
        path: path.to_path_buf(),
        dates: (width >= 2).then_some(dates),
        values,
    })
}

fn check_aligned(z: &Series, v: &Series) -> Result<(), CliError> {
    if z.values.len() != v.values.len() {
        return Err(CliError::MisalignedSeries(format!(
            "{} has {} observations but {} has {}",
            z.path.display(),
            z.values.len(),
            v.path.display(),
            v.values.len()
        )));
    }
    if let (Some(a), Some(b)) = (&z.dates, &v.dates) {
        if let Some(k) = a.iter().zip(b).position(|(x, y)| x != y) {
            return Err(CliError::MisalignedSeries(format!(
                "dates differ at row {}: {} vs {}",
                k + 2,
                a[k],
                b[k]
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub analysis: String,
    pub message: String,
    #[serde(skip)]
    pub code: ExitCode,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesStats {
    pub label: String,
    pub apen: Option<f64>,
    pub whittle: Option<WhittleEstimate>,
    pub changepoints: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeSummary {
    pub series: Vec<Series>,
    pub analyses: Vec<Analysis>,
    pub per_series: Vec<SeriesStats>,
    pub transfer_v_to_z: Option<f64>,
    pub transfer_z_to_v: Option<f64>,
    pub p_value_v_to_z: Option<f64>,
    pub p_value_z_to_v: Option<f64>,
    pub var_stable: Option<bool>,
    pub dynamics_params: Option<SystemParams<f64>>,
    pub failures: Vec<Failure>,
}

#[derive(Debug)]
pub struct AnalyzeOutcome {
    pub summary: AnalyzeSummary,
    pub segmentations: Vec<Option<segment::SegmentationResult<f64>>>,
    pub information: Option<InformationReport<f64>>,
    pub dynamics: Option<DynamicsReport>,
    pub manifest: RunManifest,
}

impl AnalyzeOutcome {
    /// Exit status: the first failure's code, success when nothing failed.
    pub fn into_result(self) -> Result<Self, CliError> {
        match self.summary.failures.first() {
            None => Ok(self),
            Some(first) => Err(CliError::Partial {
                steps: self.summary.failures.iter().map(|f| f.analysis.clone()).collect(),
                code: first.code,
            }),
        }
    }
}

#[derive(Serialize)]
struct EntropyOutput<'a> {
    report: &'a InformationReport<f64>,
    flow: Vec<FlowEdge>,
}

#[derive(Serialize)]
struct VarOutput<'a> {
    model: &'a fracts::VarModel<f64>,
    spectral_radius: f64,
    stable: bool,
    horizon: usize,
    apen_per_path: &'a [Vec<Option<f64>>],
    paths: Vec<String>,
}

struct Runner {
    out: ArtifactWriter,
    failures: Vec<Failure>,
}

impl Runner {
    /// Runs one analysis step; an error is recorded and the remaining steps continue.
    fn step<R>(&mut self, name: String, f: impl FnOnce(&mut ArtifactWriter) -> Result<R, CliError>) -> Option<R> {
        let start = Instant::now();
        let res = f(&mut self.out);
        self.out.record(&name, start);
        match res {
            Ok(r) => Some(r),
            Err(e) => {
                log::error!("{name}: {e}");
                self.failures.push(Failure {
                    analysis: name,
                    message: e.to_string(),
                    code: e.exit_code(),
                });
                None
            }
        }
    }
}

fn upstream_failed(message: &str) -> CliError {
    CliError::Stage {
        stage: "dynamics",
        message: message.to_string(),
        hint: "fix the failed upstream step, raise var_horizon, or give explicit alpha..theta",
        code: ExitCode::Numeric,
    }
}

fn segment_one(out: &mut ArtifactWriter, cfg: &RunConfig, s: &Series) -> Result<segment::SegmentationResult<f64>, CliError> {
    let gamma = match cfg.segment_gamma {
        GammaChoice::Fixed(g) => g,
        GammaChoice::Auto => segment::median_bandwidth(&s.values).map_err(|e| CliError::stage("segment", e))?,
    };
    let kernel = Gaussian::new(gamma).map_err(|e| CliError::stage("segment", e))?;
    let r = segment::detect_changepoints(&s.values, cfg.segment_k_star, &kernel, cfg.segment_min_len)
        .map_err(|e| CliError::stage("segment", e))?;
    out.write(&format!("segments_{}.csv", s.label), r.to_delimited(s.values.len(), ','))?;
    Ok(r)
}

/// Runs the requested analyses over one series or an aligned pair.
///
/// With a pair the first series is the target `z` and the second the driver `v`.
pub fn cmd_analyze(cfg: &RunConfig, files: &[PathBuf], only: Option<&[Analysis]>) -> Result<AnalyzeOutcome, CliError> {
    if files.is_empty() || files.len() > 2 {
        return Err(CliError::Usage(format!("analyze takes one or two series files, got {}", files.len())));
    }
    let mut analyses: Vec<Analysis> = match only {
        Some(list) => {
            if files.len() == 1 {
                if let Some(a) = list.iter().find(|a| a.needs_pair()) {
                    return Err(CliError::MisalignedSeries(format!(
                        "{} needs two aligned series, got one",
                        a.name()
                    )));
                }
            }
            list.to_vec()
        }
        None => Analysis::ALL
            .into_iter()
            .filter(|a| files.len() == 2 || !a.needs_pair())
            .collect(),
    };
    analyses.sort();
    analyses.dedup();

    let labels = ["z", "v"];
    let series = files
        .iter()
        .zip(labels)
        .map(|(p, l)| load_series(p, l))
        .collect::<Result<Vec<_>, _>>()?;
    if series.len() == 2 {
        check_aligned(&series[0], &series[1])?;
    }

    let mut run = Runner {
        out: ArtifactWriter::create(&cfg.output)?,
        failures: Vec::new(),
    };
    let has = |a: Analysis| analyses.contains(&a);

    let mut per_series = Vec::new();
    let mut segmentations = Vec::new();
    for s in &series {
        let seg = if has(Analysis::Segment) {
            run.step(format!("segment[{}]", s.label), |out| segment_one(out, cfg, s))
        } else {
            None
        };
        let apen = if has(Analysis::Apen) {
            run.step(format!("apen[{}]", s.label), |_| {
                entropy::apen_relative(&s.values, cfg.entropy_m, cfg.entropy_r_frac).map_err(|e| CliError::stage("apen", e))
            })
        } else {
            None
        };
        let whittle = if has(Analysis::Whittle) {
            run.step(format!("whittle[{}]", s.label), |_| {
                fracts::local_whittle(&s.values, Some(cfg.whittle_bandwidth(s.values.len())))
                    .map_err(|e| CliError::stage("whittle", e))
            })
        } else {
            None
        };
        per_series.push(SeriesStats {
            label: s.label.clone(),
            apen,
            whittle,
            changepoints: seg.as_ref().map(|r| r.changepoints.clone()),
        });
        segmentations.push(seg);
    }

    let mut information = None;
    let mut irf = None;
    let mut var_stable = None;
    let mut dynamics = None;
    let mut dynamics_params = None;
    if let [z, v] = series.as_slice() {
        if has(Analysis::Xcf) {
            run.step("xcf".into(), |out| {
                let max_lag = cfg.xcf_max_lag.min(z.values.len().saturating_sub(1));
                let r = fracts::xcf(&z.values, &v.values, max_lag).map_err(|e| CliError::stage("xcf", e))?;
                let mut csv = String::from("lag,corr\n");
                for (k, c) in r.iter().enumerate() {
                    csv.push_str(&format!("{},{c}\n", k as i64 - max_lag as i64));
                }
                out.write("xcf.csv", csv)
            });
        }
        if has(Analysis::Entropy) || has(Analysis::Dynamics) {
            information = run.step("entropy".into(), |out| {
                let report = entropy::information_report(&z.values, &v.values, &cfg.info_options())
                    .map_err(|e| CliError::stage("entropy", e))?;
                out.write_json(
                    "entropy.json",
                    &EntropyOutput {
                        report: &report,
                        flow: report.flow_edges("z", "v"),
                    },
                )?;
                Ok(report)
            });
        }
        if has(Analysis::Var) || has(Analysis::Dynamics) {
            irf = run.step("var".into(), |out| {
                let n = z.values.len();
                let x = Matrix::from_fn(n, 2, |t, c| if c == 0 { z.values[t] } else { v.values[t] });
                let model = fracts::var_fit(&x, cfg.var_p).map_err(|e| CliError::stage("var", e))?;
                let table = fracts::orth_irf(&model, cfg.var_horizon);
                let mut paths = Vec::new();
                for (i, resp) in labels.iter().enumerate() {
                    for (j, shock) in labels.iter().enumerate() {
                        let name = format!("irf_{resp}_from_{shock}.csv");
                        out.write(&name, table.path_delimited(i, j, ','))?;
                        paths.push(name);
                    }
                }
                out.write_json(
                    "var.json",
                    &VarOutput {
                        model: &model,
                        spectral_radius: table.spectral_radius,
                        stable: table.stable,
                        horizon: table.horizon,
                        apen_per_path: &table.apen_per_path,
                        paths,
                    },
                )?;
                Ok(table)
            });
            var_stable = irf.as_ref().map(|t| t.stable);
        }
        if has(Analysis::Dynamics) {
            dynamics = run.step("dynamics".into(), |out| {
                let params = match cfg.dynamics_params {
                    ParamsSource::Explicit => {
                        let p = cfg.explicit_params.as_ref().expect("validated");
                        SystemParams::new(p.alpha, p.beta, p.gamma, p.delta, p.theta)
                    }
                    ParamsSource::Computed => {
                        let (Some(info), Some(table)) = (&information, &irf) else {
                            return Err(upstream_failed("computed parameters need the entropy and var steps"));
                        };
                        let theta = table.apen_per_path[0][1]
                            .ok_or_else(|| upstream_failed("the z response to a v shock is too short for ApEn"))?;
                        SystemParams::new(
                            info.transfer_z_to_v,
                            info.transfer_v_to_z,
                            info.self_entropy_z,
                            info.self_entropy_v,
                            theta,
                        )
                    }
                }
                .map_err(|e| CliError::stage("dynamics", e))?;
                write_dynamics(out, cfg, params, cfg.dynamics_params, "")
            });
            dynamics_params = dynamics.as_ref().map(|d| d.params);
        }
    }

    let summary = AnalyzeSummary {
        series,
        analyses,
        per_series,
        transfer_v_to_z: information.as_ref().map(|r| r.transfer_v_to_z),
        transfer_z_to_v: information.as_ref().map(|r| r.transfer_z_to_v),
        p_value_v_to_z: information.as_ref().and_then(|r| r.p_value_v_to_z),
        p_value_z_to_v: information.as_ref().and_then(|r| r.p_value_z_to_v),
        var_stable,
        dynamics_params,
        failures: run.failures.clone(),
    };
    run.out.write_json("analysis.json", &summary)?;
    let manifest = run.out.finish("analyze", &serde_json::json!({ "config": cfg, "series": files }))?;
    Ok(AnalyzeOutcome {
        summary,
        segmentations,
        information,
        dynamics,
        manifest,
    })
}
