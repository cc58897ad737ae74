//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DeclabError {
    #[error("dimension mismatch at site {site:?}: operator is {got}x{got}, local dimension is {expected}")]
    DimensionMismatch {
        site: Vec<usize>,
        expected: usize,
        got: usize,
    },

    #[error("momentum {momentum:?} is not on the 2Pi n/L grid for L = {linear_size}")]
    OffGrid {
        momentum: Vec<f64>,
        linear_size: usize,
    },

    #[error("Hilbert dimension {requested} exceeds the dense-path cap {cap}; largest feasible linear size is L = {max_feasible_l}")]
    DimensionOverflow {
        requested: u128,
        cap: usize,
        max_feasible_l: usize,
    },

    #[error("operator is not Hermitian: max |H - H^dag| entry = {deviation:.3e}")]
    NonHermitian { deviation: f64 },

    #[error("spatial kernel has a negative Fourier component ({value:.3e} at grid index {index}); the environment correlation matrix would not be positive semidefinite")]
    KernelNotPositive { index: usize, value: f64 },

    #[error("contact region is empty")]
    EmptyContact,

    #[error("contact region site {site:?} is outside the lattice")]
    ContactOutsideLattice { site: Vec<usize> },

    #[error("Fock cutoff violated: {reason}")]
    CutoffViolation { reason: String },

    #[error("density matrix positivity violated: min eigenvalue {min_eig:.3e} < -1e-6; reduce the step size (current dt = {dt:.3e}, try dt <= {suggested_dt:.3e})")]
    PositivityViolation {
        min_eig: f64,
        dt: f64,
        suggested_dt: f64,
    },

    #[error("integration step dt = {dt:.3e} exceeds the stability bound {bound:.3e}; increase n_steps to at least {suggested_steps}")]
    StepTooLarge {
        dt: f64,
        bound: f64,
        suggested_steps: usize,
    },

    #[error("quadrature did not converge: doubling the node count changed the result by {relative_change:.3e} (> {tolerance:.0e} relative)")]
    QuadratureNotConverged {
        relative_change: f64,
        tolerance: f64,
    },

    #[error("state is not normalized: |norm - 1| = {deviation:.3e}")]
    NotNormalized { deviation: f64 },

    #[error("{context}: expected a(x) = m(x), the order-parameter site operator")]
    NotOrderParameterCoupling { context: String },

    #[error("parity structure required but absent: {reason}")]
    MissingParity { reason: String },

    #[error("invalid parameter: {reason}")]
    InvalidParameter { reason: String },
}
