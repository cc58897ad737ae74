//! Concrete lattice models and their symmetric / symmetry-broken vacua.
//!
//! The Ising chain (Z2 up-down symmetry) and the truncated free-boson lattice
//! (U(1) phase symmetry) are the two solvable references. Each exposes a
//! [`VacuumPair`] holding the anomalously fluctuating symmetric ground state
//! (AFV) alongside a pure-phase vacuum (PPV), plus, in the Z2 case, the
//! parity decomposition of the PPV.

pub mod boson;
pub mod ising;

use num_complex::Complex64;

use crate::error::DeclabError;
use crate::hilbert::ManyBodyState;
use crate::sparse::SparseOp;
use crate::tol;
use crate::Result;

/// Result of splitting a state into even/odd components of a Z2 operator.
#[derive(Debug, Clone)]
pub struct ParityDecomposition {
    /// Overlap amplitude with the normalized even component (0 when absent).
    pub c_plus: Complex64,
    pub even: Option<ManyBodyState>,
    pub c_minus: Complex64,
    pub odd: Option<ManyBodyState>,
}

impl ParityDecomposition {
    /// |c+|^2 + |c-|^2, equal to 1 for any normalized input.
    pub fn weight_sum(&self) -> f64 {
        self.c_plus.norm_sqr() + self.c_minus.norm_sqr()
    }
}

/// Split `state` into even- and odd-parity components of `parity`.
///
/// Requires parity^2 = identity. Each component is normalized; the state is
/// reconstructed as c+ |even> + c- |odd>. A component with zero weight is
/// flagged absent and its coefficient is 0.
pub fn parity_decompose(
    state: &ManyBodyState,
    parity: &SparseOp,
) -> Result<ParityDecomposition> {
    let dim = state.dim();
    let involution_dev = parity
        .matmul(parity)
        .sub(&SparseOp::identity(dim))
        .max_abs_entry();
    if involution_dev > tol::EXACT {
        return Err(DeclabError::InvalidParameter {
            reason: format!("parity operator is not an involution (|P^2 - 1| = {involution_dev:.3e})"),
        });
    }
    let flipped = parity.apply(state.amplitudes());
    let half = Complex64::new(0.5, 0.0);
    let even_raw = (state.amplitudes() + &flipped).mapv(|z| z * half);
    let odd_raw = (state.amplitudes() - &flipped).mapv(|z| z * half);
    let n_even = even_raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let n_odd = odd_raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let cut = tol::EXACT;
    let even = (n_even > cut)
        .then(|| {
            ManyBodyState::normalized(even_raw, state.space().clone(), state.lattice().clone())
        })
        .transpose()?;
    let odd = (n_odd > cut)
        .then(|| {
            ManyBodyState::normalized(odd_raw, state.space().clone(), state.lattice().clone())
        })
        .transpose()?;
    Ok(ParityDecomposition {
        c_plus: Complex64::new(if even.is_some() { n_even } else { 0.0 }, 0.0),
        even,
        c_minus: Complex64::new(if odd.is_some() { n_odd } else { 0.0 }, 0.0),
        odd,
    })
}

/// Z2 parity data attached to a vacuum pair.
#[derive(Debug, Clone)]
pub struct ParityStructure {
    pub operator: SparseOp,
    pub decomposition: ParityDecomposition,
}

/// A symmetric ground state (AFV) paired with a pure-phase vacuum (PPV).
#[derive(Debug, Clone)]
pub struct VacuumPair {
    pub afv: ManyBodyState,
    pub ppv: ManyBodyState,
    /// Present only when the broken symmetry is Z2.
    pub parity: Option<ParityStructure>,
}

impl VacuumPair {
    /// Validate and assemble a pair: the AFV must preserve the symmetry
    /// (<afv|M|afv> = 0) and, when parity data is supplied, the PPV must be
    /// reconstructed by its even/odd components.
    pub fn new(
        afv: ManyBodyState,
        ppv: ManyBodyState,
        order_parameter: &SparseOp,
        parity: Option<ParityStructure>,
    ) -> Result<Self> {
        let sym = order_parameter.expectation(afv.amplitudes()).norm();
        if sym > tol::EXACT {
            return Err(DeclabError::InvalidParameter {
                reason: format!("AFV does not preserve the symmetry: |<M>| = {sym:.3e}"),
            });
        }
        if let Some(p) = &parity {
            let d = &p.decomposition;
            if (d.weight_sum() - 1.0).abs() > tol::EXACT {
                return Err(DeclabError::MissingParity {
                    reason: format!("|c+|^2 + |c-|^2 = {} != 1", d.weight_sum()),
                });
            }
            let mut rebuilt: ndarray::Array1<Complex64> = ndarray::Array1::zeros(ppv.dim());
            if let Some(even) = &d.even {
                rebuilt = rebuilt + even.amplitudes().mapv(|z| z * d.c_plus);
            }
            if let Some(odd) = &d.odd {
                rebuilt = rebuilt + odd.amplitudes().mapv(|z| z * d.c_minus);
            }
            let dev: f64 = rebuilt
                .iter()
                .zip(ppv.amplitudes().iter())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if dev > tol::EXACT {
                return Err(DeclabError::MissingParity {
                    reason: format!("parity components do not reconstruct the PPV (deviation {dev:.3e})"),
                });
            }
        }
        Ok(Self { afv, ppv, parity })
    }
}
