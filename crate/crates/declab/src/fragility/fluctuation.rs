//! Order-parameter fluctuations of pure states.

use num_complex::Complex64;
use serde::Serialize;

use crate::hilbert::ManyBodyState;
use crate::sparse::SparseOp;

/// Mean and second moments of a (possibly non-Hermitian) operator on a pure
/// state.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Fluctuation {
    #[serde(skip)]
    pub mean: Complex64,
    pub mean_re: f64,
    pub mean_im: f64,
    /// <delta M^dag delta M>, the operator ordering used by the rate bounds.
    pub normal: f64,
    /// (<delta M^dag delta M> + <delta M delta M^dag>) / 2. Coincides with
    /// `normal` for Hermitian operators; for bosonic order parameters the
    /// commutator term keeps it nonzero (1/(2|Lambda|) on ideal coherent
    /// states), which is the quantity whose decay the PPV scaling checks fit.
    pub symmetric: f64,
}

/// Compute the fluctuation of `op` on `state`.
pub fn operator_fluctuation(state: &ManyBodyState, op: &SparseOp) -> Fluctuation {
    let amps = state.amplitudes();
    let v = op.apply(amps);
    let mean: Complex64 = amps.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    let normal = v.iter().map(|z| z.norm_sqr()).sum::<f64>() - mean.norm_sqr();
    let w = op.dagger().apply(amps);
    let anti = w.iter().map(|z| z.norm_sqr()).sum::<f64>() - mean.norm_sqr();
    Fluctuation {
        mean,
        mean_re: mean.re,
        mean_im: mean.im,
        normal: normal.max(0.0),
        symmetric: (0.5 * (normal + anti)).max(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::boson::FreeBosonModel;
    use crate::models::ising::IsingModel;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ising_orderings_coincide() {
        let model = IsingModel::new(4, 1, 1.0).unwrap();
        let pair = model.vacuum_pair().unwrap();
        let m = model.order_parameter();
        let afv = operator_fluctuation(&pair.afv, &m);
        assert_abs_diff_eq!(afv.normal, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(afv.symmetric, 1.0, epsilon = 1e-12);
        let ppv = operator_fluctuation(&pair.ppv, &m);
        assert_abs_diff_eq!(ppv.normal, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn coherent_state_symmetric_fluctuation_is_half_commutator() {
        // normal ordering annihilates a coherent state; the symmetric
        // covariance keeps [M, M^dag]/2 = 1/(2 |Lambda|)
        let model = FreeBosonModel::new(4, 1, 10).unwrap();
        let st = model.coherent_state(Complex64::new(0.7, 0.2)).unwrap();
        let m = model.order_parameter();
        let f = operator_fluctuation(&st.state, &m);
        assert_abs_diff_eq!(f.normal, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(f.symmetric, 1.0 / 8.0, epsilon = 1e-9);
    }

    #[test]
    fn number_state_normal_fluctuation() {
        let model = FreeBosonModel::new(2, 1, 6).unwrap();
        let st = model.number_state(3).unwrap();
        let m = model.order_parameter();
        let f = operator_fluctuation(&st.state, &m);
        assert_abs_diff_eq!(f.normal, 1.5, epsilon = 1e-12);
        // symmetric adds half the commutator 1/(2 |Lambda|)
        assert_abs_diff_eq!(f.symmetric, 1.5 + 0.25, epsilon = 1e-12);
    }
}
