//! One-site operator fields and their full-space sums.
//!
//! A `LocalOperatorField` is a q x q matrix placed on lattice sites. It can
//! be embedded at a single site (tensor-product with identities elsewhere),
//! averaged into an intensive operator (1/|Lambda|) sum_x a(x), or Fourier
//! summed into a momentum-space operator a_k = |Lambda|^{-1} sum_x a(x)
//! e^{+ikx}. Momentum phases follow the +ikx convention; the environment's
//! b_k operators carry the conjugate phase and live in [`crate::environment`].

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::DeclabError;
use crate::hilbert::HilbertSpace;
use crate::lattice::LatticeSpec;
use crate::sparse::SparseOp;
use crate::Result;

/// A one-site operator placed on a set of sites (all of Lambda by default).
#[derive(Debug, Clone)]
pub struct LocalOperatorField {
    matrix: Array2<Complex64>,
    placement: Option<Vec<usize>>,
}

impl LocalOperatorField {
    pub fn new(matrix: Array2<Complex64>) -> Self {
        debug_assert_eq!(matrix.nrows(), matrix.ncols());
        Self {
            matrix,
            placement: None,
        }
    }

    /// Restrict the field to an explicit set of flat site indices.
    pub fn on_sites(matrix: Array2<Complex64>, sites: Vec<usize>) -> Self {
        let mut sites = sites;
        sites.sort_unstable();
        sites.dedup();
        Self {
            matrix,
            placement: Some(sites),
        }
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn local_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn covers_all(&self, lattice: &LatticeSpec) -> bool {
        match &self.placement {
            None => true,
            Some(sites) => sites.len() == lattice.volume(),
        }
    }

    pub fn dagger(&self) -> Self {
        let mut m = self.matrix.t().to_owned();
        m.mapv_inplace(|z| z.conj());
        Self {
            matrix: m,
            placement: self.placement.clone(),
        }
    }

    pub fn is_traceless(&self) -> bool {
        self.matrix.diag().iter().sum::<Complex64>().norm() < 1e-14
    }
}

/// Pauli matrices with eigenvalues +-1: (s1, s2, s3).
pub fn pauli() -> (Array2<Complex64>, Array2<Complex64>, Array2<Complex64>) {
    let c = Complex64::new;
    let s1 = ndarray::array![[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]];
    let s2 = ndarray::array![[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]];
    let s3 = ndarray::array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]];
    (s1, s2, s3)
}

/// Traceless orthonormal operator basis of the q x q matrices (generalized
/// Gell-Mann set, Hilbert-Schmidt normalized to tr(e_i^dag e_j) = delta_ij).
///
/// Together with the identity this spans all one-site operators; the identity
/// component drops out of every delta-subtracted correlation.
pub fn traceless_basis(q: usize) -> Vec<Array2<Complex64>> {
    let c = Complex64::new;
    let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
    let mut basis = Vec::with_capacity(q * q - 1);
    for j in 0..q {
        for k in (j + 1)..q {
            let mut sym = Array2::zeros((q, q));
            sym[(j, k)] = c(inv_sqrt2, 0.0);
            sym[(k, j)] = c(inv_sqrt2, 0.0);
            basis.push(sym);
            let mut asym = Array2::zeros((q, q));
            asym[(j, k)] = c(0.0, -inv_sqrt2);
            asym[(k, j)] = c(0.0, inv_sqrt2);
            basis.push(asym);
        }
    }
    for l in 1..q {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = Array2::zeros((q, q));
        for m in 0..l {
            diag[(m, m)] = c(norm, 0.0);
        }
        diag[(l, l)] = c(-(l as f64) * norm, 0.0);
        basis.push(diag);
    }
    basis
}

fn check_factor_dim(
    op: &LocalOperatorField,
    site_coords: Vec<usize>,
    factor_dim: usize,
) -> Result<()> {
    if op.local_dim() != factor_dim {
        return Err(DeclabError::DimensionMismatch {
            site: site_coords,
            expected: factor_dim,
            got: op.local_dim(),
        });
    }
    Ok(())
}

/// Embed a small matrix at one tensor factor: I x .. x m x .. x I.
pub fn embed_factor(m: &Array2<Complex64>, factor: usize, space: &HilbertSpace) -> SparseOp {
    let q = space.factor_dim(factor);
    debug_assert_eq!(m.nrows(), q);
    let dim = space.dim();
    let mut triplets = Vec::new();
    let mut small = Vec::new();
    for ((i, j), &v) in m.indexed_iter() {
        if v != Complex64::ZERO {
            small.push((i, j, v));
        }
    }
    for n in 0..dim {
        let digit = space.digit(n, factor);
        for &(i, j, v) in &small {
            if j == digit {
                triplets.push((space.with_digit(n, factor, i), n, v));
            }
        }
    }
    SparseOp::from_triplets(dim, triplets)
}

/// Embed a one-site operator at lattice site `x` (flat index) on a
/// site-factored space.
pub fn embed_local(
    op: &LocalOperatorField,
    x: usize,
    lattice: &LatticeSpec,
    space: &HilbertSpace,
) -> Result<SparseOp> {
    if x >= lattice.volume() || space.n_factors() != lattice.volume() {
        return Err(DeclabError::InvalidParameter {
            reason: format!("site index {x} outside lattice of volume {}", lattice.volume()),
        });
    }
    check_factor_dim(op, lattice.site_coords(x), space.factor_dim(x))?;
    Ok(embed_factor(op.matrix(), x, space))
}

/// (1/|Lambda|) sum_x a(x), the intensive average of a one-site operator.
///
/// Averaging contracts: the operator norm of the result is at most that of
/// the one-site matrix.
pub fn build_intensive(
    op: &LocalOperatorField,
    lattice: &LatticeSpec,
    space: &HilbertSpace,
) -> Result<SparseOp> {
    if !op.covers_all(lattice) {
        return Err(DeclabError::InvalidParameter {
            reason: "intensive operator requires placement on every site".into(),
        });
    }
    momentum_transform_grid(op, 0, lattice, space)
}

/// a_k = |Lambda|^{-1} sum_x a(x) e^{+ikx} for a flat momentum-grid index.
///
/// a_{k=0} coincides with the intensive operator of the same field, and
/// (a_k)^dag = (a^dag)_{-k}.
pub fn momentum_transform_grid(
    op: &LocalOperatorField,
    k: usize,
    lattice: &LatticeSpec,
    space: &HilbertSpace,
) -> Result<SparseOp> {
    let volume = lattice.volume();
    if space.n_factors() != volume {
        return Err(DeclabError::InvalidParameter {
            reason: "momentum transform requires a site-factored space".into(),
        });
    }
    let weight = 1.0 / volume as f64;
    let mut triplets = Vec::new();
    for x in 0..volume {
        check_factor_dim(op, lattice.site_coords(x), space.factor_dim(x))?;
        let phase = lattice.phase(k, x) * weight;
        let one_site = embed_factor(op.matrix(), x, space);
        for (r, c, v) in one_site.entries() {
            triplets.push((r, c, phase * v));
        }
    }
    Ok(SparseOp::from_triplets(space.dim(), triplets))
}

/// a_k for momentum components in radians; errors off the 2 Pi n / L grid.
pub fn momentum_transform(
    op: &LocalOperatorField,
    momentum: &[f64],
    lattice: &LatticeSpec,
    space: &HilbertSpace,
) -> Result<SparseOp> {
    let k = lattice.momentum_index(momentum)?;
    momentum_transform_grid(op, k, lattice, space)
}

/// The unitary permutation realizing the cyclic lattice translation by
/// `shift` on a site-factored space: T a(x) T^{-1} = a(x + shift).
pub fn translation_operator(
    lattice: &LatticeSpec,
    space: &HilbertSpace,
    shift: &[usize],
) -> SparseOp {
    let perm = crate::hilbert::translation_permutation(lattice, space, shift);
    let one = Complex64::new(1.0, 0.0);
    SparseOp::from_triplets(
        space.dim(),
        perm.iter().enumerate().map(|(n, &m)| (m, n, one)).collect(),
    )
}
