//! Parametric environment models: spatial kernels, the g_{k1 k2} correlation
//! matrix, contact regions, and coupling specifications.

pub mod correlation;
pub mod interaction;
pub mod kernel;

pub use correlation::{log_log_slope, ContactRegion, EnvCorrelation, RegimeKind, ScalingRegime};
pub use interaction::{InteractionChannel, InteractionSpec};
pub use kernel::Kernel;
