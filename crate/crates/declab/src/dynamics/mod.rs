//! Closed-system evolution and the Markovian master-equation integrator.

pub mod density;
pub mod evolve;
pub mod lindblad;
pub mod spectral;

pub use density::DensityMatrix;
pub use evolve::{evolve_state, evolve_with, heisenberg_picture, Propagator};
pub use lindblad::{
    lindblad_step, propagate, propagation_convergence, LindbladGenerator, Trajectory,
    TrajectoryPoint,
};
pub use spectral::{energy_spread, SpectralDecomposition};
