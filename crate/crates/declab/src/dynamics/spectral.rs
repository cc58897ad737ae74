//! Spectral decomposition of Hamiltonians, with a diagonal fast path.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::DeclabError;
use crate::linalg;
use crate::sparse::SparseOp;
use crate::Result;

/// Eigenvalues and eigenvectors of a Hermitian operator, tagged with its
/// source. Diagonal operators skip the dense solve entirely (the eigenbasis
/// is the computational basis), which keeps the Ising and free-boson
/// Hamiltonians O(dim).
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Array1<f64>,
    /// None means the eigenbasis is the computational basis.
    vectors: Option<Array2<Complex64>>,
    source: String,
}

impl SpectralDecomposition {
    pub fn new(h: &SparseOp, source: &str) -> Result<Self> {
        let dev = h.hermiticity_deviation();
        if dev > 1e-9 * h.max_abs_entry().max(1.0) {
            return Err(DeclabError::NonHermitian { deviation: dev });
        }
        if h.is_diagonal() {
            let eigenvalues = h.diagonal().iter().map(|z| z.re).collect();
            return Ok(Self {
                eigenvalues,
                vectors: None,
                source: source.to_string(),
            });
        }
        let (eigenvalues, vectors) = linalg::eigh(&h.to_dense())?;
        Ok(Self {
            eigenvalues,
            vectors: Some(vectors),
            source: source.to_string(),
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Spectral radius max |E|.
    pub fn norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |m, &e| m.max(e.abs()))
    }

    /// e^{-i H t} applied to an amplitude vector.
    pub fn evolve(&self, amps: &Array1<Complex64>, t: f64) -> Array1<Complex64> {
        match &self.vectors {
            None => {
                let mut out = amps.clone();
                for (i, v) in out.iter_mut().enumerate() {
                    *v *= Complex64::from_polar(1.0, -self.eigenvalues[i] * t);
                }
                out
            }
            Some(v) => {
                let coeffs = linalg::dagger(v).dot(amps);
                let rotated: Array1<Complex64> = coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c * Complex64::from_polar(1.0, -self.eigenvalues[i] * t))
                    .collect();
                v.dot(&rotated)
            }
        }
    }

    /// e^{+i H s} A e^{-i H s}.
    pub fn heisenberg(&self, op: &SparseOp, s: f64) -> SparseOp {
        match &self.vectors {
            None => {
                // phases act entrywise on the sparse structure
                let triplets = op
                    .entries()
                    .map(|(r, c, v)| {
                        let phase = Complex64::from_polar(
                            1.0,
                            (self.eigenvalues[r] - self.eigenvalues[c]) * s,
                        );
                        (r, c, v * phase)
                    })
                    .collect();
                SparseOp::from_triplets(op.dim(), triplets)
            }
            Some(v) => {
                // U = V e^{iEs} V^dag; A' = U (A U^dag)
                let mut ve = v.clone();
                for (j, mut col) in ve.columns_mut().into_iter().enumerate() {
                    let ph = Complex64::from_polar(1.0, self.eigenvalues[j] * s);
                    col.mapv_inplace(|z| z * ph);
                }
                let u = ve.dot(&linalg::dagger(v));
                let a_udag = op.mul_dense(&linalg::dagger(&u));
                SparseOp::from_dense(&u.dot(&a_udag), 0.0)
            }
        }
    }

    /// Reconstruction residual ||H - V E V^dag|| relative to ||H||.
    pub fn reconstruction_error(&self, h: &SparseOp) -> f64 {
        let dense = h.to_dense();
        let rebuilt = match &self.vectors {
            None => Array2::from_diag(
                &self
                    .eigenvalues
                    .iter()
                    .map(|&e| Complex64::new(e, 0.0))
                    .collect::<Array1<Complex64>>(),
            ),
            Some(v) => {
                let diag = Array2::from_diag(
                    &self
                        .eigenvalues
                        .iter()
                        .map(|&e| Complex64::new(e, 0.0))
                        .collect::<Array1<Complex64>>(),
                );
                v.dot(&diag).dot(&linalg::dagger(v))
            }
        };
        let scale = linalg::frobenius(&dense).max(1e-300);
        linalg::frobenius(&(&rebuilt - &dense)) / scale
    }
}

/// Energy spread sqrt of the H variance on a pure state.
pub fn energy_spread(h: &SparseOp, amps: &Array1<Complex64>) -> f64 {
    let h_psi = h.apply(amps);
    let mean: Complex64 = amps.iter().zip(h_psi.iter()).map(|(a, b)| a.conj() * b).sum();
    let sq: f64 = h_psi.iter().map(|z| z.norm_sqr()).sum();
    (sq - mean.norm_sqr()).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_fast_path() {
        let h = SparseOp::from_diagonal(&[c(1.0, 0.0), c(-2.0, 0.0), c(0.5, 0.0)]);
        let s = SpectralDecomposition::new(&h, "diag").unwrap();
        assert!(s.reconstruction_error(&h) < 1e-14);
        assert_abs_diff_eq!(s.norm(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.ground_energy(), -2.0, epsilon = 1e-15);
        let psi = Array1::from(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let out = s.evolve(&psi, 2.0);
        assert_abs_diff_eq!((out[0] - Complex64::from_polar(1.0, -2.0)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn dense_path_reconstructs_and_evolves_unitarily() {
        let h = SparseOp::from_triplets(
            2,
            vec![(0, 1, c(1.0, -0.5)), (1, 0, c(1.0, 0.5)), (0, 0, c(0.3, 0.0))],
        );
        let s = SpectralDecomposition::new(&h, "dense").unwrap();
        assert!(s.reconstruction_error(&h) < 1e-10);
        let psi = Array1::from(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let out = s.evolve(&psi, 1.7);
        let norm: f64 = out.iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
        // forward then backward returns the start
        let back = s.evolve(&out, -1.7);
        let dev: f64 = back
            .iter()
            .zip(psi.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(dev < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = SparseOp::from_triplets(2, vec![(0, 1, c(1.0, 0.0))]);
        assert!(SpectralDecomposition::new(&h, "bad").is_err());
    }

    #[test]
    fn heisenberg_diagonal_hamiltonian() {
        let h = SparseOp::from_diagonal(&[c(0.0, 0.0), c(1.5, 0.0)]);
        let s = SpectralDecomposition::new(&h, "diag").unwrap();
        // raising operator picks up e^{i (E_1 - E_0) s}
        let a = SparseOp::from_triplets(2, vec![(1, 0, c(1.0, 0.0))]);
        let moved = s.heisenberg(&a, 0.7);
        let (_, _, v) = moved.entries().next().unwrap();
        assert_abs_diff_eq!((v - Complex64::from_polar(1.0, 1.5 * 0.7)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn heisenberg_matches_state_picture_dense() {
        // <psi| A(s) |psi> == <psi(s)| A |psi(s)> for a dense H
        let h = SparseOp::from_triplets(
            3,
            vec![
                (0, 1, c(0.4, 0.1)),
                (1, 0, c(0.4, -0.1)),
                (1, 2, c(-0.3, 0.2)),
                (2, 1, c(-0.3, -0.2)),
                (2, 2, c(1.0, 0.0)),
            ],
        );
        let s = SpectralDecomposition::new(&h, "h").unwrap();
        let a = SparseOp::from_triplets(3, vec![(0, 2, c(1.0, 1.0)), (1, 1, c(0.5, 0.0))]);
        let psi = Array1::from(vec![c(0.6, 0.0), c(0.0, 0.48), c(0.64, 0.0)]);
        for &t in &[0.3, 1.1] {
            let heis = s.heisenberg(&a, t).expectation(&psi);
            let evolved = s.evolve(&psi, t);
            let schr = a.expectation(&evolved);
            assert_abs_diff_eq!((heis - schr).norm(), 0.0, epsilon = 1e-11);
        }
    }

    #[test]
    fn energy_spread_on_eigenstate_is_zero() {
        let h = SparseOp::from_diagonal(&[c(1.0, 0.0), c(3.0, 0.0)]);
        let psi = Array1::from(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert_abs_diff_eq!(energy_spread(&h, &psi), 0.0, epsilon = 1e-15);
        let plus = Array1::from(vec![
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ]);
        assert_abs_diff_eq!(energy_spread(&h, &plus), 1.0, epsilon = 1e-12);
    }
}
