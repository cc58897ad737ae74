//! Numerical laboratory for the decoherence of symmetry-breaking vacua on
//! finite lattices.
//!
//! A finite quantum lattice model that breaks a symmetry in the
//! infinite-volume limit has two kinds of low-energy states: the symmetric
//! ground state with anomalously large order-parameter fluctuations (the
//! AFV) and symmetry-broken pure-phase vacua (PPVs) with normal, clustering
//! correlations. Coupled locally to an environment, the AFV decoheres at a
//! rate set by the k = 0 environment correlation weight g₀₀, while PPVs are
//! insensitive to that mode. This crate builds the models, the environment
//! correlation matrices, the Markovian master-equation dynamics, and the
//! certificate machinery that checks the rate inequalities quantitatively.
//!
//! Layout:
//! - [`lattice`]: periodic hypercubic geometry, momentum grid, site maps
//! - [`hilbert`]: tensor-product Hilbert spaces and many-body state vectors
//! - [`sparse`]: coordinate-list sparse operators on the full space
//! - [`operators`]: one-site operator fields, intensive and momentum-space sums
//! - [`models`]: Ising chain/lattice and truncated free-boson builders
//! - [`environment`]: spatial kernels and the g_{k1k2} correlation matrix
//! - [`dynamics`]: unitary evolution and the fixed-step Lindblad integrator
//! - [`fragility`]: linear entropy, rate certificates, correlation regions
//!
//! Units: ħ = 1 and lattice constant 1 throughout; every report carries the
//! explicit λ²/ħ² prefactor so rates can be rescaled symbolically.

pub mod dynamics;
pub mod environment;
pub mod error;
pub mod fragility;
pub mod hilbert;
pub mod lattice;
pub mod linalg;
pub mod models;
pub mod operators;
pub mod random;
pub mod sparse;
pub mod tol;

pub use error::DeclabError;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, DeclabError>;
