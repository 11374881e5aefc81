use std::path::PathBuf;

use fcix_core::{dynamics, entropy, fracts, panel, rpcm, rpct, segment};
use thiserror::Error;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    Usage = 1,
    Data = 2,
    Numeric = 3,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {}: {source}", path.display())]
    Input {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("misaligned series: {0}")]
    MisalignedSeries(String),
    #[error("[{stage}] {message}\n  hint: {hint}")]
    Stage {
        stage: &'static str,
        message: String,
        hint: &'static str,
        code: ExitCode,
    },
    #[error("{failed} check(s) failed")]
    Verification { failed: usize },
    #[error("{} analysis step(s) failed: {}", .steps.len(), .steps.join(", "))]
    Partial { steps: Vec<String>, code: ExitCode },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) | CliError::Config(_) => ExitCode::Usage,
            CliError::Input { .. } | CliError::Output { .. } | CliError::MisalignedSeries(_) => ExitCode::Data,
            CliError::Stage { code, .. } => *code,
            CliError::Verification { .. } => ExitCode::Numeric,
            CliError::Partial { code, .. } => *code,
        }
    }

    pub fn stage(stage: &'static str, err: impl Into<fcix_core::Error>) -> Self {
        let err = err.into();
        let (code, hint) = classify(&err);
        CliError::Stage {
            stage,
            message: err.to_string(),
            hint,
            code,
        }
    }
}

fn classify(err: &fcix_core::Error) -> (ExitCode, &'static str) {
    use fcix_core::Error as E;
    use ExitCode::{Data, Numeric};
    match err {
        E::Panel(panel::PanelError::IncompletePanel { .. }) => {
            (Data, "fill the gaps or pass --drop-incomplete to skip sparse tickers")
        }
        E::Panel(panel::PanelError::LagTooLarge { .. }) => (Data, "use a smaller --lag or a longer price history"),
        E::Panel(_) => (Data, "check the price file: long format needs date,ticker,price columns"),
        E::Tensor(rpct::RpctError::NoConvergence { .. }) => (
            Numeric,
            "raise decompose_max_iters, loosen decompose_tol, or set accept_unconverged = true",
        ),
        E::Tensor(rpct::RpctError::Panel(_)) => (Data, "check the price panel"),
        E::Tensor(rpct::RpctError::BadDate(_)) => (Data, "dates must be ISO YYYY-MM-DD for aggregation"),
        E::Tensor(_) => (Numeric, "inspect the returns for extreme or degenerate values"),
        E::Matrix(rpcm::RpcmError::Parse(_)) => (Data, "check the matrix file"),
        E::Matrix(_) => (Numeric, "the comparison matrix is outside the supported range"),
        E::Segment(segment::SegmentError::SeriesTooShort { .. } | segment::SegmentError::SeriesTooLong { .. }) => {
            (Data, "adjust segment_k_star / segment_min_len to the series length")
        }
        E::Segment(segment::SegmentError::InfeasiblePartition { .. }) => {
            (Data, "lower segment_k_star or segment_min_len")
        }
        E::Segment(segment::SegmentError::NonFinite) => (Data, "remove NaN or infinite values from the series"),
        E::Segment(_) => (Numeric, "set an explicit positive segment_gamma"),
        E::Entropy(
            entropy::EntropyError::SeriesTooShort { .. }
            | entropy::EntropyError::LengthMismatch(..)
            | entropy::EntropyError::NonFinite,
        ) => (Data, "supply longer, finite series of equal length"),
        E::Entropy(entropy::EntropyError::DegenerateSeries { .. }) => {
            (Data, "the series has too few distinct values; lower entropy_bins")
        }
        E::Entropy(_) => (Numeric, "check entropy_bins, entropy_order and entropy_shuffles"),
        E::Fracts(
            fracts::FractsError::SeriesTooShort { .. }
            | fracts::FractsError::LengthMismatch(..)
            | fracts::FractsError::NonFinite,
        ) => (Data, "supply a longer, finite series"),
        E::Fracts(fracts::FractsError::OptimizationFailure(_)) => {
            (Numeric, "the estimate sits on the search boundary; try another whittle_exponent")
        }
        E::Fracts(fracts::FractsError::SingularDesign | fracts::FractsError::IndefiniteCovariance) => {
            (Numeric, "series are collinear or too short for var_p; lower var_p")
        }
        E::Fracts(_) => (Numeric, "check the long-memory and VAR options"),
        E::Dynamics(dynamics::DynamicsError::Blowup { .. }) => {
            (Numeric, "the path diverged; start below the interior critical point")
        }
        E::Dynamics(_) => (Numeric, "beta and gamma + theta must be positive"),
    }
}
