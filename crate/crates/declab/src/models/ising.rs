//! Ferromagnetic Ising model on the periodic hypercubic lattice.
//!
//! H = -J sum_<x,y> s3(x) s3(y), with s3 = diag(1, -1) so the order
//! parameter S3 = (1/|Lambda|) sum_x s3(x) has eigenvalues in [-1, 1] and
//! the fully polarized product states Xi+ = |++..>, Xi- = |--..> are exact
//! ground states for J > 0. Bonds are enumerated one per (site, direction);
//! on L = 2 each geometric pair therefore appears twice (the +1 and -1
//! neighbors coincide), which shifts energies but no observable used here.
//!
//! An optional transverse field -h sum_x s1(x) is the symmetry-preserving
//! perturbation hook: it commutes with the global spin flip P = prod_x s1(x),
//! splits the ground doublet, and turns the pair of vacua into genuinely
//! finite-size objects.

use ndarray::Array1;
use num_complex::Complex64;

use crate::error::DeclabError;
use crate::hilbert::{HilbertSpace, ManyBodyState};
use crate::lattice::LatticeSpec;
use crate::linalg;
use crate::models::{parity_decompose, ParityStructure, VacuumPair};
use crate::operators::{build_intensive, pauli, LocalOperatorField};
use crate::sparse::SparseOp;
use crate::Result;

#[derive(Debug, Clone)]
pub struct IsingModel {
    lattice: LatticeSpec,
    space: HilbertSpace,
    coupling: f64,
    transverse_field: f64,
    hamiltonian: SparseOp,
}

impl IsingModel {
    /// Build the unperturbed model (`build_ising`).
    pub fn new(linear_size: usize, dimension: usize, coupling: f64) -> Result<Self> {
        Self::with_transverse_field(linear_size, dimension, coupling, 0.0)
    }

    /// Perturbation hook: adds -h sum_x s1(x), which preserves the Z2
    /// symmetry.
    pub fn with_transverse_field(
        linear_size: usize,
        dimension: usize,
        coupling: f64,
        transverse_field: f64,
    ) -> Result<Self> {
        if linear_size < 2 {
            return Err(DeclabError::InvalidParameter {
                reason: "Ising model needs L >= 2".into(),
            });
        }
        if !coupling.is_finite() || !transverse_field.is_finite() {
            return Err(DeclabError::InvalidParameter {
                reason: "couplings must be finite".into(),
            });
        }
        let lattice = LatticeSpec::new(dimension, linear_size)?;
        let space = HilbertSpace::uniform(lattice.volume(), 2)?;
        let hamiltonian = build_hamiltonian(&lattice, &space, coupling, transverse_field);
        Ok(Self {
            lattice,
            space,
            coupling,
            transverse_field,
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

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn transverse_field(&self) -> f64 {
        self.transverse_field
    }

    /// The one-site order parameter m(x) = s3.
    pub fn order_parameter_site(&self) -> LocalOperatorField {
        let (_, _, s3) = pauli();
        LocalOperatorField::new(s3)
    }

    /// S3 = (1/|Lambda|) sum_x s3(x).
    pub fn order_parameter(&self) -> SparseOp {
        build_intensive(&self.order_parameter_site(), &self.lattice, &self.space)
            .expect("s3 covers the lattice")
    }

    /// Global spin flip P = prod_x s1(x); commutes with the Hamiltonian.
    pub fn parity_operator(&self) -> SparseOp {
        let dim = self.space.dim();
        let one = Complex64::new(1.0, 0.0);
        // flipping every spin maps basis index n to dim-1-n
        SparseOp::from_triplets(dim, (0..dim).map(|n| (dim - 1 - n, n, one)).collect())
    }

    /// Fully polarized up state Xi+.
    pub fn xi_plus(&self) -> ManyBodyState {
        ManyBodyState::basis_state(0, self.space.clone(), self.lattice.clone())
            .expect("basis state")
    }

    /// Fully polarized down state Xi-.
    pub fn xi_minus(&self) -> ManyBodyState {
        ManyBodyState::basis_state(self.space.dim() - 1, self.space.clone(), self.lattice.clone())
            .expect("basis state")
    }

    /// The unperturbed vacuum pair (`build_afv_ising`): the AFV is built
    /// explicitly as (Xi+ + Xi-)/sqrt(2) because the ground space is
    /// degenerate and a diagonalizer would return an arbitrary basis.
    pub fn vacuum_pair(&self) -> Result<VacuumPair> {
        let inv = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let afv_amps = (self.xi_plus().amplitudes() + self.xi_minus().amplitudes()).mapv(|z| z * inv);
        let afv = ManyBodyState::new(afv_amps, self.space.clone(), self.lattice.clone())?;
        let ppv = self.xi_plus();
        let parity_op = self.parity_operator();
        let decomposition = parity_decompose(&ppv, &parity_op)?;
        VacuumPair::new(
            afv,
            ppv,
            &self.order_parameter(),
            Some(ParityStructure {
                operator: parity_op,
                decomposition,
            }),
        )
    }

    /// Lowest eigenstate in each parity sector, for the perturbed model.
    ///
    /// Returns (even ground state, odd first excited, energy splitting).
    pub fn ground_doublet(&self) -> Result<(ManyBodyState, ManyBodyState, f64)> {
        if self.transverse_field == 0.0 {
            return Err(DeclabError::InvalidParameter {
                reason: "ground doublet of the unperturbed model is degenerate; use vacuum_pair"
                    .into(),
            });
        }
        let dense = self.hamiltonian.to_dense();
        let (vals, vecs) = linalg::eigh(&dense)?;
        let parity = self.parity_operator();
        let mut even: Option<(f64, Array1<Complex64>)> = None;
        let mut odd: Option<(f64, Array1<Complex64>)> = None;
        for j in 0..vals.len() {
            if even.is_some() && odd.is_some() {
                break;
            }
            let v = vecs.column(j).to_owned();
            let pv = parity.apply(&v);
            let expectation: Complex64 = v.iter().zip(pv.iter()).map(|(a, b)| a.conj() * b).sum();
            let p = expectation.re;
            if p > 0.99 && even.is_none() {
                even = Some((vals[j], v));
            } else if p < -0.99 && odd.is_none() {
                odd = Some((vals[j], v));
            } else if p.abs() <= 0.99 {
                return Err(DeclabError::MissingParity {
                    reason: format!(
                        "eigenvector {j} mixes parity sectors (<P> = {p:.6}); splitting below eigensolver resolution"
                    ),
                });
            }
        }
        let (e_even, v_even) = even.ok_or(DeclabError::MissingParity {
            reason: "no even-sector eigenstate found".into(),
        })?;
        let (e_odd, v_odd) = odd.ok_or(DeclabError::MissingParity {
            reason: "no odd-sector eigenstate found".into(),
        })?;
        // the sectors are exact invariant subspaces of H; projecting removes
        // the tiny cross-sector admixture a near-degenerate solve leaves in
        let half = Complex64::new(0.5, 0.0);
        let v_even = (&v_even + &parity.apply(&v_even)).mapv(|z| z * half);
        let v_odd = (&v_odd - &parity.apply(&v_odd)).mapv(|z| z * half);
        let even_state =
            ManyBodyState::normalized(v_even, self.space.clone(), self.lattice.clone())?;
        let odd_state =
            ManyBodyState::normalized(v_odd, self.space.clone(), self.lattice.clone())?;
        Ok((even_state, odd_state, e_odd - e_even))
    }

    /// Finite-size vacuum pair of the perturbed model: the AFV is the true
    /// (even) ground state and the PPV is (even + odd)/sqrt(2) with the
    /// relative phase fixed so the order parameter expectation is real and
    /// maximal.
    pub fn ground_doublet_pair(&self) -> Result<VacuumPair> {
        let (even, odd, _) = self.ground_doublet()?;
        let m = self.order_parameter();
        let m_even = m.apply(even.amplitudes());
        let cross: Complex64 = odd
            .amplitudes()
            .iter()
            .zip(m_even.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        // phase e^{i theta} on the odd part so <even|M|odd-rotated> >= 0
        let phase = if cross.norm() > 0.0 {
            cross / cross.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let inv = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let ppv_amps = even
            .amplitudes()
            .iter()
            .zip(odd.amplitudes().iter())
            .map(|(e, o)| (e + o * phase) * inv)
            .collect::<Array1<Complex64>>();
        let ppv = ManyBodyState::new(ppv_amps, self.space.clone(), self.lattice.clone())?;
        let parity_op = self.parity_operator();
        let decomposition = parity_decompose(&ppv, &parity_op)?;
        VacuumPair::new(
            even,
            ppv,
            &m,
            Some(ParityStructure {
                operator: parity_op,
                decomposition,
            }),
        )
    }

    /// Near-PPV built by projecting |++..+> onto the ground doublet. Its
    /// parity components have slightly unequal weights at finite size, so
    /// its overlap with its own spin flip is small but nonzero and shrinks
    /// as the lattice grows.
    pub fn projected_product_ppv(&self) -> Result<ManyBodyState> {
        let (even, odd, _) = self.ground_doublet()?;
        let up = self.xi_plus();
        let ce = even.overlap(&up);
        let co = odd.overlap(&up);
        let amps = even
            .amplitudes()
            .iter()
            .zip(odd.amplitudes().iter())
            .map(|(e, o)| e * ce + o * co)
            .collect::<Array1<Complex64>>();
        ManyBodyState::normalized(amps, self.space.clone(), self.lattice.clone())
    }

    /// Ground-state energy by direct minimization over the sparse diagonal
    /// (unperturbed model only).
    pub fn ground_energy(&self) -> Result<f64> {
        let dense = self.hamiltonian.to_dense();
        let (vals, _) = linalg::eigh(&dense)?;
        Ok(vals[0])
    }
}

fn build_hamiltonian(
    lattice: &LatticeSpec,
    space: &HilbertSpace,
    coupling: f64,
    transverse_field: f64,
) -> SparseOp {
    let dim = space.dim();
    let volume = lattice.volume();
    let bonds = lattice.bonds();
    let mut triplets: Vec<(usize, usize, Complex64)> = Vec::new();
    for n in 0..dim {
        let mut energy = 0.0;
        for &(x, y) in &bonds {
            let sx = 1.0 - 2.0 * space.digit(n, x) as f64;
            let sy = 1.0 - 2.0 * space.digit(n, y) as f64;
            energy -= coupling * sx * sy;
        }
        if energy != 0.0 {
            triplets.push((n, n, Complex64::new(energy, 0.0)));
        }
    }
    if transverse_field != 0.0 {
        let w = Complex64::new(-transverse_field, 0.0);
        for x in 0..volume {
            for n in 0..dim {
                let flipped = space.with_digit(n, x, 1 - space.digit(n, x));
                triplets.push((flipped, n, w));
            }
        }
    }
    SparseOp::from_triplets(dim, triplets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::traceless_basis;
    use crate::operators::embed_local;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_site_ground_energy_is_minus_two_j() {
        // the two (site, direction) bonds on L = 2 collapse onto one pair
        let model = IsingModel::new(2, 1, 1.0).unwrap();
        assert_abs_diff_eq!(model.ground_energy().unwrap(), -2.0, epsilon = 1e-12);
    }

    #[test]
    fn polarized_states_are_eigenstates() {
        let model = IsingModel::new(5, 1, 1.0).unwrap();
        let h = model.hamiltonian();
        let e0 = h.expectation(model.xi_plus().amplitudes()).re;
        for xi in [model.xi_plus(), model.xi_minus()] {
            let hv = h.apply(xi.amplitudes());
            let resid: f64 = hv
                .iter()
                .zip(xi.amplitudes().iter())
                .map(|(a, b)| (a - b * Complex64::new(e0, 0.0)).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(resid < 1e-12, "||H xi - E0 xi|| = {resid}");
        }
    }

    #[test]
    fn polarized_state_has_no_connected_correlations() {
        // <delta a(0) delta b(x)> = 0 for x != 0, for every one-site pair
        let model = IsingModel::new(4, 1, 1.0).unwrap();
        let xi = model.xi_plus();
        let mut ops = traceless_basis(2);
        ops.push(ndarray::Array2::eye(2).mapv(|v| Complex64::new(v, 0.0)));
        for a in &ops {
            for b in &ops {
                let a0 =
                    embed_local(&LocalOperatorField::new(a.clone()), 0, model.lattice(), model.space())
                        .unwrap();
                for x in 1..4 {
                    let bx = embed_local(
                        &LocalOperatorField::new(b.clone()),
                        x,
                        model.lattice(),
                        model.space(),
                    )
                    .unwrap();
                    let joint = a0.matmul(&bx).expectation(xi.amplitudes());
                    let disconnected = a0.expectation(xi.amplitudes())
                        * bx.expectation(xi.amplitudes());
                    assert_abs_diff_eq!((joint - disconnected).norm(), 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn afv_symmetry_and_fluctuation() {
        let model = IsingModel::new(4, 1, 1.0).unwrap();
        let pair = model.vacuum_pair().unwrap();
        let m = model.order_parameter();
        let mean = m.expectation(pair.afv.amplitudes());
        assert_abs_diff_eq!(mean.norm(), 0.0, epsilon = 1e-12);
        // <phi0| S3^dag S3 |phi0> = 1
        let m_phi = m.apply(pair.afv.amplitudes());
        let sq: f64 = m_phi.iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(sq, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn parity_action_on_vacuum_components() {
        let model = IsingModel::new(3, 1, 1.0).unwrap();
        let pair = model.vacuum_pair().unwrap();
        let p = model.parity_operator();
        // P phi0 = phi0
        let p_afv = p.apply(pair.afv.amplitudes());
        let dev: f64 = p_afv
            .iter()
            .zip(pair.afv.amplitudes().iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(dev < 1e-14);
        // P phi- = -phi-
        let parity = pair.parity.as_ref().unwrap();
        let odd = parity.decomposition.odd.as_ref().unwrap();
        let p_odd = p.apply(odd.amplitudes());
        let dev_odd: f64 = p_odd
            .iter()
            .zip(odd.amplitudes().iter())
            .map(|(a, b)| (a + b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(dev_odd < 1e-14);
        // c+ = c- = 1/sqrt(2)
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(parity.decomposition.c_plus.re, inv, epsilon = 1e-12);
        assert_abs_diff_eq!(parity.decomposition.c_minus.re, inv, epsilon = 1e-12);
    }

    #[test]
    fn hamiltonian_commutes_with_parity() {
        let model = IsingModel::with_transverse_field(4, 1, 1.0, 0.3).unwrap();
        let h = model.hamiltonian();
        let p = model.parity_operator();
        let comm = h.matmul(&p).sub(&p.matmul(h));
        assert!(comm.max_abs_entry() < 1e-12);
    }

    #[test]
    fn perturbed_doublet_splits_and_orders() {
        let model = IsingModel::with_transverse_field(4, 1, 1.0, 0.3).unwrap();
        let (even, odd, gap) = model.ground_doublet().unwrap();
        assert!(gap > 0.0, "even sector should be the ground state");
        let p = model.parity_operator();
        let pe = p.expectation(even.amplitudes()).re;
        let po = p.expectation(odd.amplitudes()).re;
        assert_abs_diff_eq!(pe, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(po, -1.0, epsilon = 1e-10);
    }

    #[test]
    fn perturbed_pair_has_positive_order_parameter() {
        let model = IsingModel::with_transverse_field(4, 1, 1.0, 0.3).unwrap();
        let pair = model.ground_doublet_pair().unwrap();
        let m = model.order_parameter();
        let nu = m.expectation(pair.ppv.amplitudes());
        assert!(nu.re > 0.5, "order parameter {nu} should be large and real");
        assert!(nu.im.abs() < 1e-12);
    }

    #[test]
    fn projected_product_overlap_with_flip_shrinks() {
        let mut prev = f64::INFINITY;
        for l in [4usize, 6, 8] {
            let model = IsingModel::with_transverse_field(l, 1, 1.0, 0.3).unwrap();
            let ppv = model.projected_product_ppv().unwrap();
            let p = model.parity_operator();
            let flipped_amps = p.apply(ppv.amplitudes());
            let overlap: Complex64 = ppv
                .amplitudes()
                .iter()
                .zip(flipped_amps.iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            let o = overlap.norm();
            assert!(o > 0.0 && o < prev, "overlap {o} at L = {l} (prev {prev})");
            prev = o;
        }
    }

    #[test]
    fn overflow_proposes_feasible_size() {
        match IsingModel::new(20, 1, 1.0) {
            Err(DeclabError::DimensionOverflow { max_feasible_l, .. }) => {
                assert_eq!(max_feasible_l, 14)
            }
            other => panic!("expected overflow, got {other:?}"),
        }
    }
}
