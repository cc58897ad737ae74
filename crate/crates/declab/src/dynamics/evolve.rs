//! Closed-system unitary evolution of pure states.
//!
//! Small or diagonal Hamiltonians evolve through their spectral
//! decomposition; larger dense ones fall back to a Lanczos (Krylov)
//! approximation of e^{-iHt} psi, substepped so each Krylov space stays
//! accurate.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::dynamics::spectral::SpectralDecomposition;
use crate::error::DeclabError;
use crate::hilbert::ManyBodyState;
use crate::linalg;
use crate::sparse::SparseOp;
use crate::tol;
use crate::Result;

/// Above this dimension, non-diagonal Hamiltonians use the Krylov path.
const DENSE_EIG_CAP: usize = 2048;
const KRYLOV_DIM: usize = 40;

/// Cached propagator for repeated evolutions under one Hamiltonian.
#[derive(Debug, Clone)]
pub enum Propagator {
    Spectral(SpectralDecomposition),
    Krylov { hamiltonian: SparseOp, norm_bound: f64 },
}

impl Propagator {
    pub fn new(h: &SparseOp, tag: &str) -> Result<Self> {
        if h.is_diagonal() || h.dim() <= DENSE_EIG_CAP {
            Ok(Propagator::Spectral(SpectralDecomposition::new(h, tag)?))
        } else {
            let dev = h.hermiticity_deviation();
            if dev > 1e-9 * h.max_abs_entry().max(1.0) {
                return Err(DeclabError::NonHermitian { deviation: dev });
            }
            // infinity-norm upper bound on the spectral radius
            let mut row_sums = vec![0.0f64; h.dim()];
            for (r, _, v) in h.entries() {
                row_sums[r] += v.norm();
            }
            let norm_bound = row_sums.iter().cloned().fold(0.0, f64::max).max(1e-300);
            Ok(Propagator::Krylov {
                hamiltonian: h.clone(),
                norm_bound,
            })
        }
    }

    pub fn evolve_amplitudes(&self, amps: &Array1<Complex64>, t: f64) -> Array1<Complex64> {
        match self {
            Propagator::Spectral(s) => s.evolve(amps, t),
            Propagator::Krylov {
                hamiltonian,
                norm_bound,
            } => {
                let substeps = (t.abs() * norm_bound / 2.0).ceil().max(1.0) as usize;
                let dt = t / substeps as f64;
                let mut psi = amps.clone();
                for _ in 0..substeps {
                    psi = krylov_step(hamiltonian, &psi, dt);
                }
                psi
            }
        }
    }

    pub fn spectral(&self) -> Option<&SpectralDecomposition> {
        match self {
            Propagator::Spectral(s) => Some(s),
            _ => None,
        }
    }
}

/// e^{-iHt} |state>, norm checked afterwards (`evolve_state`).
pub fn evolve_state(state: &ManyBodyState, h: &SparseOp, t: f64) -> Result<ManyBodyState> {
    let prop = Propagator::new(h, "evolve")?;
    evolve_with(&prop, state, t)
}

pub fn evolve_with(prop: &Propagator, state: &ManyBodyState, t: f64) -> Result<ManyBodyState> {
    let amps = prop.evolve_amplitudes(state.amplitudes(), t);
    let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > tol::SPECTRAL {
        return Err(DeclabError::NotNormalized {
            deviation: (norm - 1.0).abs(),
        });
    }
    // renormalize the residual roundoff so downstream checks stay exact
    ManyBodyState::normalized(amps, state.space().clone(), state.lattice().clone())
}

/// Interaction-picture operator e^{+iHs} A e^{-iHs} (`heisenberg_picture`).
pub fn heisenberg_picture(op: &SparseOp, h: &SparseOp, s: f64) -> Result<SparseOp> {
    let spec = SpectralDecomposition::new(h, "heisenberg")?;
    Ok(spec.heisenberg(op, s))
}

/// One Lanczos approximation of e^{-iH dt} psi with full reorthogonalization.
fn krylov_step(h: &SparseOp, psi: &Array1<Complex64>, dt: f64) -> Array1<Complex64> {
    let dim = psi.len();
    let m = KRYLOV_DIM.min(dim);
    let norm0 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm0 == 0.0 {
        return psi.clone();
    }
    let mut basis: Vec<Array1<Complex64>> = Vec::with_capacity(m);
    basis.push(psi.mapv(|z| z / norm0));
    let mut tri = Array2::<Complex64>::zeros((m, m));
    let mut used = m;
    for j in 0..m {
        let mut w = h.apply(&basis[j]);
        // full reorthogonalization keeps the small matrix Hermitian
        for (i, b) in basis.iter().enumerate() {
            let coeff: Complex64 = b.iter().zip(w.iter()).map(|(a, c)| a.conj() * c).sum();
            tri[(i, j)] = coeff;
            w = &w - &b.mapv(|z| z * coeff);
        }
        let beta = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if j + 1 < m {
            if beta < 1e-13 {
                used = j + 1;
                break;
            }
            tri[(j + 1, j)] = Complex64::new(beta, 0.0);
            basis.push(w.mapv(|z| z / beta));
        }
    }
    let small = tri.slice(ndarray::s![..used, ..used]).to_owned();
    let (vals, vecs) = linalg::eigh(&small).expect("Krylov matrix Hermitian");
    // exp(-i T dt) e1 through the small eigenbasis
    let e1 = linalg::dagger(&vecs).column(0).to_owned();
    let rotated: Array1<Complex64> = e1
        .iter()
        .enumerate()
        .map(|(i, c)| c * Complex64::from_polar(1.0, -vals[i] * dt))
        .collect();
    let coeffs = vecs.dot(&rotated);
    let mut out: Array1<Complex64> = Array1::zeros(dim);
    for (j, b) in basis.iter().enumerate() {
        let w = coeffs[j] * norm0;
        out = out + b.mapv(|z| z * w);
    }
    out
}
