//! Financial chaos index analytics.
//!
//! Prices become lagged returns, returns become a tensor of reciprocal
//! pairwise comparison matrices, and a rank-1 consensus of that tensor yields
//! the per-date inconsistency series (FCIX). Around that core sit
//! segmentation, entropy, long-memory, VAR and dynamical-system diagnostics.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

// `!(a < b)` is used on purpose so NaN falls through to the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dynamics;
pub mod entropy;
pub mod fracts;
pub mod linalg;
pub mod panel;
pub mod rpcm;
pub mod rpct;
pub mod scalar;
pub mod segment;

pub use scalar::Scalar;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

use thiserror::Error;

/// Any error raised by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Panel(#[from] panel::PanelError),
    #[error(transparent)]
    Matrix(#[from] rpcm::RpcmError),
    #[error(transparent)]
    Tensor(#[from] rpct::RpctError),
    #[error(transparent)]
    Segment(#[from] segment::SegmentError),
    #[error(transparent)]
    Entropy(#[from] entropy::EntropyError),
    #[error(transparent)]
    Fracts(#[from] fracts::FractsError),
    #[error(transparent)]
    Dynamics(#[from] dynamics::DynamicsError),
}

pub type Matrix = linalg::Matrix<f64>;
pub type PricePanel = panel::PricePanel<f64>;
pub type ReturnsPanel = panel::ReturnsPanel<f64>;
pub type ComparisonMatrix = rpcm::ComparisonMatrix<f64>;
pub type ComparisonTensor = rpct::ComparisonTensor<f64>;
pub type Rank1Factors = rpct::Rank1Factors<f64>;
pub type FcixSeries = rpct::FcixSeries<f64>;
pub type SegmentationResult = segment::SegmentationResult<f64>;
pub type InformationReport = entropy::InformationReport<f64>;
pub type VarModel = fracts::VarModel<f64>;
pub type IrfTable = fracts::IrfTable<f64>;
pub type SystemParams = dynamics::SystemParams<f64>;
pub type CriticalPoint = dynamics::CriticalPoint<f64>;
