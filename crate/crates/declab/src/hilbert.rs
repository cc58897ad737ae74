//! Tensor-product Hilbert spaces and normalized many-body state vectors.
//!
//! A space is a list of factor dimensions; basis indices are mixed-radix
//! numbers with factor 0 most significant (row-major, matching the lattice
//! site order). Spin models use one factor per site with uniform local
//! dimension q; the boson model uses one factor per momentum mode with
//! per-mode Fock dimensions.

use ndarray::Array1;
use num_complex::Complex64;

use crate::error::DeclabError;
use crate::lattice::LatticeSpec;
use crate::tol;
use crate::Result;

/// Factor structure of a tensor-product space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSpace {
    dims: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl HilbertSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(DeclabError::InvalidParameter {
                reason: "every tensor factor must have positive dimension".into(),
            });
        }
        let mut total: u128 = 1;
        for &d in &dims {
            total = total.saturating_mul(d as u128);
        }
        if total > tol::MODEL_DIM_CAP as u128 {
            let max_l =
                LatticeSpec::max_feasible_linear_size(1, dims[0], tol::MODEL_DIM_CAP);
            return Err(DeclabError::DimensionOverflow {
                requested: total,
                cap: tol::MODEL_DIM_CAP,
                max_feasible_l: max_l,
            });
        }
        let total = total as usize;
        let mut strides = vec![1usize; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        Ok(Self {
            dims,
            strides,
            total,
        })
    }

    /// Uniform local dimension q on `n_factors` factors.
    pub fn uniform(n_factors: usize, q: usize) -> Result<Self> {
        Self::new(vec![q; n_factors])
    }

    pub fn dim(&self) -> usize {
        self.total
    }

    pub fn n_factors(&self) -> usize {
        self.dims.len()
    }

    pub fn factor_dim(&self, factor: usize) -> usize {
        self.dims[factor]
    }

    /// Local dimension when all factors agree, else None.
    pub fn uniform_local_dim(&self) -> Option<usize> {
        let q = self.dims[0];
        self.dims.iter().all(|&d| d == q).then_some(q)
    }

    pub fn stride(&self, factor: usize) -> usize {
        self.strides[factor]
    }

    /// Local basis label of `factor` inside full-space basis index `n`.
    #[inline]
    pub fn digit(&self, n: usize, factor: usize) -> usize {
        (n / self.strides[factor]) % self.dims[factor]
    }

    /// Replace the local basis label of `factor` inside `n`.
    #[inline]
    pub fn with_digit(&self, n: usize, factor: usize, value: usize) -> usize {
        let old = self.digit(n, factor);
        let stride = self.strides[factor];
        n + value * stride - old * stride
    }

    pub fn decode(&self, n: usize) -> Vec<usize> {
        (0..self.dims.len()).map(|f| self.digit(n, f)).collect()
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.strides)
            .map(|(&c, &s)| c * s)
            .sum()
    }
}

/// A normalized pure state on a lattice-tagged tensor-product space.
#[derive(Debug, Clone)]
pub struct ManyBodyState {
    amplitudes: Array1<Complex64>,
    space: HilbertSpace,
    lattice: LatticeSpec,
}

impl ManyBodyState {
    /// Wrap an amplitude vector, requiring unit norm within tolerance.
    pub fn new(
        amplitudes: Array1<Complex64>,
        space: HilbertSpace,
        lattice: LatticeSpec,
    ) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(DeclabError::InvalidParameter {
                reason: format!(
                    "amplitude vector has length {}, space dimension is {}",
                    amplitudes.len(),
                    space.dim()
                ),
            });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > tol::NORM {
            return Err(DeclabError::NotNormalized {
                deviation: (norm - 1.0).abs(),
            });
        }
        Ok(Self {
            amplitudes,
            space,
            lattice,
        })
    }

    /// Wrap and normalize (errors only on the zero vector).
    pub fn normalized(
        mut amplitudes: Array1<Complex64>,
        space: HilbertSpace,
        lattice: LatticeSpec,
    ) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(DeclabError::NotNormalized { deviation: 1.0 });
        }
        amplitudes.mapv_inplace(|a| a / norm);
        Self::new(amplitudes, space, lattice)
    }

    /// Basis state |n>.
    pub fn basis_state(n: usize, space: HilbertSpace, lattice: LatticeSpec) -> Result<Self> {
        let mut amplitudes = Array1::zeros(space.dim());
        amplitudes[n] = Complex64::new(1.0, 0.0);
        Self::new(amplitudes, space, lattice)
    }

    pub fn amplitudes(&self) -> &Array1<Complex64> {
        &self.amplitudes
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// <self|other>.
    pub fn overlap(&self, other: &ManyBodyState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Cyclically translate a site-factored state by `shift`.
///
/// The factor at site x of the result carries the local state previously at
/// x - shift, so conjugation maps a(x) to a(x + shift). Norm is preserved
/// exactly (pure index permutation).
pub fn translate_state(state: &ManyBodyState, shift: &[usize]) -> ManyBodyState {
    let space = state.space();
    let lattice = state.lattice();
    debug_assert_eq!(space.n_factors(), lattice.volume());
    let perm = translation_permutation(lattice, space, shift);
    let mut out = Array1::zeros(state.dim());
    for (n, &a) in state.amplitudes().iter().enumerate() {
        out[perm[n]] = a;
    }
    ManyBodyState {
        amplitudes: out,
        space: space.clone(),
        lattice: lattice.clone(),
    }
}

/// Basis-index permutation realizing the cyclic translation by `shift`.
pub fn translation_permutation(
    lattice: &LatticeSpec,
    space: &HilbertSpace,
    shift: &[usize],
) -> Vec<usize> {
    let volume = lattice.volume();
    // target factor for each source factor
    let moved: Vec<usize> = (0..volume)
        .map(|site| lattice.translate_site(site, shift))
        .collect();
    let dim = space.dim();
    let mut perm = vec![0usize; dim];
    let mut new_digits = vec![0usize; volume];
    for (n, target) in perm.iter_mut().enumerate() {
        for (f, &dest) in moved.iter().enumerate() {
            new_digits[dest] = space.digit(n, f);
        }
        *target = space.encode(&new_digits);
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn chain(l: usize) -> (LatticeSpec, HilbertSpace) {
        let lat = LatticeSpec::new(1, l).unwrap();
        let space = HilbertSpace::uniform(l, 2).unwrap();
        (lat, space)
    }

    #[test]
    fn mixed_radix_round_trip() {
        let space = HilbertSpace::new(vec![3, 2, 4]).unwrap();
        assert_eq!(space.dim(), 24);
        for n in 0..24 {
            let digits = space.decode(n);
            assert_eq!(space.encode(&digits), n);
            for (f, &d) in digits.iter().enumerate() {
                assert_eq!(space.digit(n, f), d);
                assert_eq!(space.with_digit(n, f, d), n);
            }
        }
    }

    #[test]
    fn rejects_unnormalized() {
        let (lat, space) = chain(2);
        let amps = Array1::from(vec![Complex64::new(0.7, 0.0); 4]);
        assert!(ManyBodyState::new(amps.clone(), space.clone(), lat.clone()).is_err());
        let st = ManyBodyState::normalized(amps, space, lat).unwrap();
        assert_abs_diff_eq!(st.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn dimension_cap_reports_feasible_size() {
        let err = HilbertSpace::uniform(20, 2).unwrap_err();
        match err {
            DeclabError::DimensionOverflow { max_feasible_l, .. } => {
                assert_eq!(max_feasible_l, 14)
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn translate_identity_shift() {
        let (lat, space) = chain(3);
        let st = ManyBodyState::basis_state(5, space, lat).unwrap();
        let moved = translate_state(&st, &[0]);
        assert_abs_diff_eq!((st.overlap(&moved) - 1.0).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn translate_swaps_two_site_product() {
        // |up down> -> |down up>: basis index 0b01 -> 0b10
        let (lat, space) = chain(2);
        let st = ManyBodyState::basis_state(0b01, space.clone(), lat.clone()).unwrap();
        let moved = translate_state(&st, &[1]);
        let expect = ManyBodyState::basis_state(0b10, space, lat).unwrap();
        assert_abs_diff_eq!((moved.overlap(&expect) - 1.0).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn full_period_returns_original() {
        let (lat, space) = chain(4);
        let amps = Array1::from(
            (0..16)
                .map(|i| Complex64::new(1.0 + i as f64, i as f64 * 0.2))
                .collect::<Vec<_>>(),
        );
        let st = ManyBodyState::normalized(amps, space, lat).unwrap();
        let mut moved = st.clone();
        for _ in 0..4 {
            moved = translate_state(&moved, &[1]);
        }
        assert_abs_diff_eq!((st.overlap(&moved) - 1.0).norm(), 0.0, epsilon = 1e-14);
    }
}
