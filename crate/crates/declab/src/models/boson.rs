//! Free bosons on the periodic lattice, truncated per momentum mode.
//!
//! The Hilbert space is a product of Fock spaces, one factor per momentum
//! mode k with its own occupation cutoff. H = sum_k eps_k n_k is diagonal in
//! this basis. The real-space field is psi(x) = |Lambda|^{-1/2} sum_k a_k
//! e^{+ikx}, so [psi(x), psi^dag(y)] = delta_xy on the untruncated space, and
//! the order parameter M = (1/|Lambda|) sum_x psi(x) = a_0 / sqrt(|Lambda|)
//! touches only the k = 0 mode.
//!
//! The reference states live in the k = 0 mode alone: the number state |N>
//! (the AFV, with <delta M^dag delta M> = N/|Lambda|) and the coherent state
//! |alpha> (a PPV). Mode normalization: <alpha|M|alpha> = alpha/sqrt(|Lambda|).

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::environment::{EnvCorrelation, InteractionChannel, InteractionSpec};
use crate::error::DeclabError;
use crate::hilbert::{HilbertSpace, ManyBodyState};
use crate::lattice::LatticeSpec;
use crate::operators::embed_factor;
use crate::sparse::SparseOp;
use crate::tol;
use crate::Result;

/// Per-mode dispersion choices.
#[derive(Debug, Clone)]
pub enum Dispersion {
    /// eps_k = sum_i 2 (1 - cos k_i); gapless with the minimum at k = 0.
    Lattice,
    /// Explicit table over the momentum grid (flat row-major order).
    Table(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct FreeBosonModel {
    lattice: LatticeSpec,
    space: HilbertSpace,
    dispersion: Vec<f64>,
    cutoffs: Vec<usize>,
    hamiltonian: SparseOp,
}

/// A state built on the truncated Fock space, with its truncation health.
#[derive(Debug, Clone)]
pub struct BosonState {
    pub state: ManyBodyState,
    /// Max over modes of the weight sitting on the top Fock level.
    pub top_level_weight: f64,
    /// False when that weight exceeds the truncation threshold.
    pub reliable: bool,
}

impl FreeBosonModel {
    /// Uniform cutoff on every mode, lattice dispersion.
    pub fn new(linear_size: usize, dimension: usize, n_max: usize) -> Result<Self> {
        let lattice = LatticeSpec::new(dimension, linear_size)?;
        let cutoffs = vec![n_max; lattice.volume()];
        Self::with_cutoffs(lattice, cutoffs, Dispersion::Lattice)
    }

    /// Independent per-mode cutoffs. The k = 0 mode usually needs the deep
    /// cutoff; modes that only ever hold a virtual quantum can stay shallow.
    pub fn with_mode_cutoffs(
        linear_size: usize,
        dimension: usize,
        zero_mode_cutoff: usize,
        other_cutoff: usize,
    ) -> Result<Self> {
        let lattice = LatticeSpec::new(dimension, linear_size)?;
        let mut cutoffs = vec![other_cutoff; lattice.volume()];
        cutoffs[0] = zero_mode_cutoff;
        Self::with_cutoffs(lattice, cutoffs, Dispersion::Lattice)
    }

    pub fn with_cutoffs(
        lattice: LatticeSpec,
        cutoffs: Vec<usize>,
        dispersion: Dispersion,
    ) -> Result<Self> {
        let volume = lattice.volume();
        if cutoffs.len() != volume || cutoffs.contains(&0) {
            return Err(DeclabError::InvalidParameter {
                reason: "need a positive Fock cutoff for every momentum mode".into(),
            });
        }
        let dispersion = match dispersion {
            Dispersion::Lattice => (0..volume)
                .map(|k| {
                    lattice
                        .momentum_values(k)
                        .iter()
                        .map(|&ki| 2.0 * (1.0 - ki.cos()))
                        .sum()
                })
                .collect::<Vec<f64>>(),
            Dispersion::Table(t) => {
                if t.len() != volume {
                    return Err(DeclabError::InvalidParameter {
                        reason: "dispersion table length must equal the mode count".into(),
                    });
                }
                t
            }
        };
        let min = dispersion.iter().cloned().fold(f64::INFINITY, f64::min);
        if dispersion[0] > min + 1e-12 {
            return Err(DeclabError::InvalidParameter {
                reason: "dispersion must attain its minimum at k = 0".into(),
            });
        }
        let space = HilbertSpace::new(cutoffs.iter().map(|&c| c + 1).collect())?;
        let dim = space.dim();
        let mut triplets = Vec::with_capacity(dim);
        for n in 0..dim {
            let energy: f64 = (0..volume)
                .map(|m| dispersion[m] * space.digit(n, m) as f64)
                .sum();
            if energy != 0.0 {
                triplets.push((n, n, Complex64::new(energy, 0.0)));
            }
        }
        let hamiltonian = SparseOp::from_triplets(dim, triplets);
        Ok(Self {
            lattice,
            space,
            dispersion,
            cutoffs,
            hamiltonian,
        })
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn hamiltonian(&self) -> &SparseOp {
        &self.hamiltonian
    }

    pub fn dispersion(&self) -> &[f64] {
        &self.dispersion
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    /// Truncated annihilator on one mode's local Fock space.
    fn local_annihilator(&self, mode: usize) -> Array2<Complex64> {
        let d = self.cutoffs[mode] + 1;
        let mut a = Array2::zeros((d, d));
        for n in 1..d {
            a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
        }
        a
    }

    /// Full-space annihilator of mode k (flat momentum-grid index).
    pub fn mode_annihilator(&self, mode: usize) -> SparseOp {
        embed_factor(&self.local_annihilator(mode), mode, &self.space)
    }

    /// psi(x) = |Lambda|^{-1/2} sum_k a_k e^{+ikx}.
    pub fn field_annihilator(&self, site: usize) -> SparseOp {
        let volume = self.lattice.volume();
        let w = 1.0 / (volume as f64).sqrt();
        let ops: Vec<SparseOp> = (0..volume).map(|k| self.mode_annihilator(k)).collect();
        let terms: Vec<(Complex64, &SparseOp)> = (0..volume)
            .map(|k| (self.lattice.phase(k, site) * w, &ops[k]))
            .collect();
        SparseOp::weighted_sum(self.space.dim(), &terms)
    }

    /// M = (1/|Lambda|) sum_x psi(x) = a_0 / sqrt(|Lambda|).
    pub fn order_parameter(&self) -> SparseOp {
        let w = Complex64::new(1.0 / (self.lattice.volume() as f64).sqrt(), 0.0);
        self.mode_annihilator(0).scaled(w)
    }

    /// Momentum-space coupling operators a_k = |Lambda|^{-1} sum_x psi(x)
    /// e^{+ikx} for the psi channel: a_k = a_{-k} / sqrt(|Lambda|).
    pub fn psi_channel_ops(&self) -> Vec<SparseOp> {
        let volume = self.lattice.volume();
        let w = Complex64::new(1.0 / (volume as f64).sqrt(), 0.0);
        (0..volume)
            .map(|k| self.mode_annihilator(self.lattice.negate_momentum(k)).scaled(w))
            .collect()
    }

    /// Same for the psi^dag channel: a_k = a^dag_{+k} / sqrt(|Lambda|).
    pub fn psi_dagger_channel_ops(&self) -> Vec<SparseOp> {
        let volume = self.lattice.volume();
        let w = Complex64::new(1.0 / (volume as f64).sqrt(), 0.0);
        (0..volume)
            .map(|k| self.mode_annihilator(k).dagger().scaled(w))
            .collect()
    }

    /// Two-channel field coupling psi (x) b + psi^dag (x) b^dag. The psi
    /// channel pairs with the g+ correlation (built from <b^dag b>), the
    /// psi^dag channel with g- (built from <b b^dag>); cross-channel
    /// correlations vanish.
    pub fn field_coupling(
        &self,
        coupling: f64,
        corr_plus: EnvCorrelation,
        corr_minus: EnvCorrelation,
    ) -> Result<InteractionSpec> {
        // operator-norm bound for the one-site field on the truncated space
        let site_norm = (0..self.lattice.volume())
            .map(|k| (self.cutoffs[k] as f64).sqrt())
            .sum::<f64>()
            / (self.lattice.volume() as f64).sqrt();
        InteractionSpec::from_channels(
            coupling,
            vec![
                InteractionChannel {
                    label: "psi".into(),
                    momentum_ops: self.psi_channel_ops(),
                    site_norm,
                    correlation: corr_plus,
                },
                InteractionChannel {
                    label: "psi-dagger".into(),
                    momentum_ops: self.psi_dagger_channel_ops(),
                    site_norm,
                    correlation: corr_minus,
                },
            ],
        )
    }

    /// Diagonal translation unitary in the mode basis:
    /// T |{n_k}> = e^{-i sum_k (k.shift) n_k} |{n_k}>.
    pub fn translation_operator(&self, shift: &[usize]) -> SparseOp {
        let volume = self.lattice.volume();
        let dim = self.space.dim();
        let phases: Vec<f64> = (0..volume)
            .map(|k| {
                self.lattice
                    .momentum_values(k)
                    .iter()
                    .zip(shift)
                    .map(|(&ki, &si)| ki * si as f64)
                    .sum()
            })
            .collect();
        let diag: Vec<Complex64> = (0..dim)
            .map(|n| {
                let angle: f64 = (0..volume)
                    .map(|m| -phases[m] * self.space.digit(n, m) as f64)
                    .sum();
                Complex64::from_polar(1.0, angle)
            })
            .collect();
        SparseOp::from_diagonal(&diag)
    }

    fn classify(&self, state: ManyBodyState) -> BosonState {
        let mut worst: f64 = 0.0;
        for mode in 0..self.lattice.volume() {
            let top = self.cutoffs[mode];
            let w: f64 = state
                .amplitudes()
                .iter()
                .enumerate()
                .filter(|(n, _)| self.space.digit(*n, mode) == top)
                .map(|(_, a)| a.norm_sqr())
                .sum();
            worst = worst.max(w);
        }
        BosonState {
            reliable: worst <= tol::TRUNCATION_WEIGHT,
            top_level_weight: worst,
            state,
        }
    }

    /// Fock state with N quanta in the k = 0 mode, vacuum elsewhere.
    pub fn number_state(&self, n: usize) -> Result<BosonState> {
        if n > self.cutoffs[0] {
            return Err(DeclabError::CutoffViolation {
                reason: format!("N = {n} exceeds the k = 0 cutoff {}", self.cutoffs[0]),
            });
        }
        let index = self.space.with_digit(0, 0, n);
        let state = ManyBodyState::basis_state(index, self.space.clone(), self.lattice.clone())?;
        Ok(self.classify(state))
    }

    /// Coherent state with amplitude alpha in the k = 0 mode, vacuum
    /// elsewhere, truncated at the cutoff and renormalized. Requires the
    /// tail criterion |alpha|^2 + 6 |alpha| <= n_max so the discarded weight
    /// is negligible.
    pub fn coherent_state(&self, alpha: Complex64) -> Result<BosonState> {
        let n_max = self.cutoffs[0];
        let a = alpha.norm();
        if a * a + 6.0 * a > n_max as f64 {
            return Err(DeclabError::CutoffViolation {
                reason: format!(
                    "|alpha|^2 + 6|alpha| = {:.2} exceeds the k = 0 cutoff {n_max}",
                    a * a + 6.0 * a
                ),
            });
        }
        let mut amps = Array1::zeros(self.space.dim());
        let mut coeff = Complex64::new(1.0, 0.0);
        amps[0] = coeff;
        for n in 1..=n_max {
            coeff *= alpha / Complex64::new((n as f64).sqrt(), 0.0);
            amps[self.space.with_digit(0, 0, n)] = coeff;
        }
        let state = ManyBodyState::normalized(amps, self.space.clone(), self.lattice.clone())?;
        Ok(self.classify(state))
    }

    /// (`build_boson_states`) the AFV/PPV reference pair: (|N>, |alpha>).
    pub fn build_states(&self, n: usize, alpha: Complex64) -> Result<(BosonState, BosonState)> {
        Ok((self.number_state(n)?, self.coherent_state(alpha)?))
    }
}
