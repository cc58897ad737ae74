//! Reduced density matrices of the principal system.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::DeclabError;
use crate::hilbert::ManyBodyState;
use crate::lattice::LatticeSpec;
use crate::linalg;
use crate::sparse::SparseOp;
use crate::tol;
use crate::Result;

/// Hermitian, unit-trace density matrix tagged with its lattice and time.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: Array2<Complex64>,
    lattice: LatticeSpec,
    time: f64,
}

impl DensityMatrix {
    /// Validate trace and Hermiticity (positivity is checked separately at
    /// sampled times since it needs an eigensolve).
    pub fn new(matrix: Array2<Complex64>, lattice: LatticeSpec, time: f64) -> Result<Self> {
        let trace = trace_of(&matrix);
        if (trace.re - 1.0).abs() > tol::SPECTRAL || trace.im.abs() > tol::SPECTRAL {
            return Err(DeclabError::InvalidParameter {
                reason: format!("density matrix trace {trace} is not 1"),
            });
        }
        let herm = linalg::hermiticity_deviation(&matrix);
        if herm > tol::HERMITICITY {
            return Err(DeclabError::NonHermitian { deviation: herm });
        }
        Ok(Self {
            matrix,
            lattice,
            time,
        })
    }

    pub(crate) fn from_parts_unchecked(
        matrix: Array2<Complex64>,
        lattice: LatticeSpec,
        time: f64,
    ) -> Self {
        Self {
            matrix,
            lattice,
            time,
        }
    }

    /// |psi><psi| at time 0.
    pub fn pure(state: &ManyBodyState) -> Self {
        let n = state.dim();
        let mut m = Array2::zeros((n, n));
        for (i, a) in state.amplitudes().iter().enumerate() {
            for (j, b) in state.amplitudes().iter().enumerate() {
                m[(i, j)] = a * b.conj();
            }
        }
        Self {
            matrix: m,
            lattice: state.lattice().clone(),
            time: 0.0,
        }
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn trace(&self) -> Complex64 {
        trace_of(&self.matrix)
    }

    /// tr(rho^2).
    pub fn purity(&self) -> f64 {
        // tr(rho rho) = sum_{ij} rho_ij rho_ji = sum |rho_ij|^2 for Hermitian rho
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// tr(rho A) through the sparse structure of A.
    pub fn expectation(&self, op: &SparseOp) -> Complex64 {
        op.entries()
            .map(|(r, c, v)| v * self.matrix[(c, r)])
            .sum()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (min, _) = linalg::eig_range(&self.matrix)?;
        Ok(min)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        linalg::hermiticity_deviation(&self.matrix)
    }
}

fn trace_of(m: &Array2<Complex64>) -> Complex64 {
    m.diag().iter().sum()
}
