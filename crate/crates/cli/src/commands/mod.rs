pub mod analyze;
pub mod dynamics;
pub mod fcix;
pub mod verify;

pub use analyze::{cmd_analyze, Analysis};
pub use dynamics::cmd_dynamics;
pub use fcix::{cmd_fcix, cmd_lag_report};
pub use verify::cmd_verify;
