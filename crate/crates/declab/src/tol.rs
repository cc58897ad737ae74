//! Centralized numerical tolerances.
//!
//! Exact-arithmetic identities are checked near machine precision; quantities
//! that pass through an eigensolver or an integrator get correspondingly
//! looser thresholds.

/// State-vector normalization.
pub const NORM: f64 = 1e-12;

/// Entrywise identities that hold exactly in exact arithmetic
/// (operator equalities, commutators at distinct sites, reconstruction).
pub const EXACT: f64 = 1e-12;

/// Identities routed through an eigendecomposition.
pub const SPECTRAL: f64 = 1e-10;

/// Trace of a density matrix, |tr rho - 1|, over a full integration run.
pub const TRACE_DRIFT: f64 = 1e-8;

/// Per-step trace drift above which the integrator renormalizes (and logs).
pub const TRACE_RENORM: f64 = 1e-12;

/// Hermiticity of a density matrix, max entry of |rho - rho^dag|.
pub const HERMITICITY: f64 = 1e-12;

/// Density-matrix minimum eigenvalue floor (complete-positivity sanity).
pub const DENSITY_MIN_EIG: f64 = -1e-6;

/// Relative floor for eigenvalues of an environment correlation matrix:
/// min eig >= -PSD_REL * max eig.
pub const PSD_REL: f64 = 1e-10;

/// Certificate slack floor: theorem inequalities must hold up to this.
pub const SLACK: f64 = 1e-9;

/// Relative change allowed when doubling quadrature nodes.
pub const QUADRATURE_REL: f64 = 1e-8;

/// Modulus deviation allowed when checking translation invariance of a state.
pub const TRANSLATION_INVARIANCE: f64 = 1e-8;

/// Relative nonlinearity allowed in a rate fit before windowing kicks in.
pub const RATE_LINEARITY: f64 = 1e-2;

/// Weight on the top Fock level above which a boson state is unreliable.
pub const TRUNCATION_WEIGHT: f64 = 1e-8;

/// Dense-path cap on the full Hilbert dimension (state vectors, sparse ops).
pub const MODEL_DIM_CAP: usize = 1 << 14;

/// Cap on the dimension for dense density-matrix propagation.
pub const DENSE_EVOLUTION_CAP: usize = 2048;
