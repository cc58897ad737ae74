//! Coordinate-list sparse operators on the full Hilbert space.
//!
//! Full-space operators are kept sparse and densified only where a spectral
//! decomposition requires it. Entries are sorted by (row, col) and
//! duplicate-combined; exact zeros are dropped.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

/// Sparse square operator with complex entries.
#[derive(Debug, Clone)]
pub struct SparseOp {
    dim: usize,
    entries: Vec<(u32, u32, Complex64)>,
}

impl SparseOp {
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        debug_assert!(dim <= u32::MAX as usize);
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut entries: Vec<(u32, u32, Complex64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            debug_assert!(r < dim && c < dim);
            match entries.last_mut() {
                Some(last) if last.0 == r as u32 && last.1 == c as u32 => last.2 += v,
                _ => entries.push((r as u32, c as u32, v)),
            }
        }
        entries.retain(|&(_, _, v)| v != Complex64::ZERO);
        Self { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self {
            dim,
            entries: (0..dim as u32).map(|i| (i, i, one)).collect(),
        }
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        Self::from_triplets(
            diag.len(),
            diag.iter()
                .enumerate()
                .map(|(i, &v)| (i, i, v))
                .collect(),
        )
    }

    pub fn from_dense(m: &Array2<Complex64>, drop_below: f64) -> Self {
        let dim = m.nrows();
        debug_assert_eq!(dim, m.ncols());
        let mut triplets = Vec::new();
        for ((r, c), &v) in m.indexed_iter() {
            if v.norm() > drop_below {
                triplets.push((r, c, v));
            }
        }
        Self::from_triplets(dim, triplets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.entries
            .iter()
            .map(|&(r, c, v)| (r as usize, c as usize, v))
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries.iter().all(|&(r, c, _)| r == c)
    }

    /// Diagonal as a vector (including implicit zeros).
    pub fn diagonal(&self) -> Vec<Complex64> {
        let mut d = vec![Complex64::ZERO; self.dim];
        for &(r, c, v) in &self.entries {
            if r == c {
                d[r as usize] = v;
            }
        }
        d
    }

    pub fn dagger(&self) -> Self {
        let triplets = self
            .entries
            .iter()
            .map(|&(r, c, v)| (c as usize, r as usize, v.conj()))
            .collect();
        Self::from_triplets(self.dim, triplets)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for e in &mut out.entries {
            e.2 *= factor;
        }
        out.entries.retain(|&(_, _, v)| v != Complex64::ZERO);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut triplets: Vec<(usize, usize, Complex64)> =
            self.entries().chain(other.entries()).collect();
        // from_triplets re-sorts and combines
        let t = std::mem::take(&mut triplets);
        Self::from_triplets(self.dim, t)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    /// Weighted sum of operators on a shared space.
    pub fn weighted_sum(dim: usize, terms: &[(Complex64, &SparseOp)]) -> Self {
        let mut triplets = Vec::new();
        for &(w, op) in terms {
            debug_assert_eq!(op.dim, dim);
            for (r, c, v) in op.entries() {
                triplets.push((r, c, w * v));
            }
        }
        Self::from_triplets(dim, triplets)
    }

    /// y = A x.
    pub fn apply(&self, x: &Array1<Complex64>) -> Array1<Complex64> {
        debug_assert_eq!(x.len(), self.dim);
        let mut y = Array1::zeros(self.dim);
        let xs = x.as_slice().expect("contiguous");
        let ys = y.as_slice_mut().expect("contiguous");
        for &(r, c, v) in &self.entries {
            ys[r as usize] += v * xs[c as usize];
        }
        y
    }

    /// <x|A|x>.
    pub fn expectation(&self, x: &Array1<Complex64>) -> Complex64 {
        let xs = x.as_slice().expect("contiguous");
        let mut acc = Complex64::ZERO;
        for &(r, c, v) in &self.entries {
            acc += xs[r as usize].conj() * v * xs[c as usize];
        }
        acc
    }

    /// A . B for dense B.
    pub fn mul_dense(&self, b: &Array2<Complex64>) -> Array2<Complex64> {
        let mut out = Array2::zeros((self.dim, b.ncols()));
        self.mul_dense_into(b, &mut out);
        out
    }

    /// out = A . B without allocating.
    pub fn mul_dense_into(&self, b: &Array2<Complex64>, out: &mut Array2<Complex64>) {
        debug_assert_eq!(b.nrows(), self.dim);
        debug_assert_eq!(out.dim(), b.dim());
        let ncols = b.ncols();
        out.fill(Complex64::ZERO);
        if let (Some(bs), Some(os)) = (b.as_slice(), out.as_slice_mut()) {
            for &(r, c, v) in &self.entries {
                let src = &bs[c as usize * ncols..(c as usize + 1) * ncols];
                let dst = &mut os[r as usize * ncols..(r as usize + 1) * ncols];
                for j in 0..ncols {
                    dst[j] += v * src[j];
                }
            }
        } else {
            for &(r, c, v) in &self.entries {
                for j in 0..ncols {
                    out[(r as usize, j)] += v * b[(c as usize, j)];
                }
            }
        }
    }

    /// B . A for dense row-major B.
    pub fn dense_mul(&self, b: &Array2<Complex64>) -> Array2<Complex64> {
        let mut out = Array2::zeros((b.nrows(), self.dim));
        self.dense_mul_into(b, &mut out);
        out
    }

    /// out = B . A without allocating. Iterates row-major over B so the
    /// strided column writes stay within one row's cache lines.
    pub fn dense_mul_into(&self, b: &Array2<Complex64>, out: &mut Array2<Complex64>) {
        debug_assert_eq!(b.ncols(), self.dim);
        debug_assert_eq!(out.dim(), b.dim());
        let nrows = b.nrows();
        let ncols = self.dim;
        out.fill(Complex64::ZERO);
        if let (Some(bs), Some(os)) = (b.as_slice(), out.as_slice_mut()) {
            for i in 0..nrows {
                let src = &bs[i * ncols..(i + 1) * ncols];
                let dst = &mut os[i * ncols..(i + 1) * ncols];
                for &(r, c, v) in &self.entries {
                    dst[c as usize] += src[r as usize] * v;
                }
            }
        } else {
            for &(r, c, v) in &self.entries {
                for i in 0..nrows {
                    out[(i, c as usize)] += b[(i, r as usize)] * v;
                }
            }
        }
    }

    /// Sparse product A . B (used for small operator algebra and tests).
    pub fn matmul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        // entries are sorted by row, so CSR offsets are prefix counts
        let mut row_start = vec![0usize; other.dim + 1];
        for &(r, _, _) in &other.entries {
            row_start[r as usize + 1] += 1;
        }
        for r in 0..other.dim {
            row_start[r + 1] += row_start[r];
        }
        let mut triplets = Vec::new();
        for &(r, c, v) in &self.entries {
            let (s, e) = (row_start[c as usize], row_start[c as usize + 1]);
            for &(_, c2, v2) in &other.entries[s..e] {
                triplets.push((r as usize, c2 as usize, v * v2));
            }
        }
        Self::from_triplets(self.dim, triplets)
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let mut m = Array2::zeros((self.dim, self.dim));
        for &(r, c, v) in &self.entries {
            m[(r as usize, c as usize)] += v;
        }
        m
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, _, v)| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, _, v)| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Max entry of |A - A^dag|; zero for Hermitian operators.
    pub fn hermiticity_deviation(&self) -> f64 {
        self.sub(&self.dagger()).max_abs_entry()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn combines_duplicates_and_drops_zeros() {
        let op = SparseOp::from_triplets(
            2,
            vec![(0, 1, c(1.0, 0.0)), (0, 1, c(-1.0, 0.0)), (1, 0, c(2.0, 1.0))],
        );
        assert_eq!(op.nnz(), 1);
        assert_eq!(op.entries().next().unwrap(), (1, 0, c(2.0, 1.0)));
    }

    #[test]
    fn apply_matches_dense() {
        let op = SparseOp::from_triplets(
            3,
            vec![
                (0, 2, c(1.0, -1.0)),
                (1, 1, c(0.5, 0.0)),
                (2, 0, c(0.0, 2.0)),
            ],
        );
        let x = Array1::from(vec![c(1.0, 0.0), c(0.0, 1.0), c(2.0, 2.0)]);
        let y = op.apply(&x);
        let yd = op.to_dense().dot(&x);
        for i in 0..3 {
            assert_abs_diff_eq!((y[i] - yd[i]).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn matmul_matches_dense() {
        let a = SparseOp::from_triplets(3, vec![(0, 1, c(1.0, 1.0)), (2, 2, c(3.0, 0.0))]);
        let b = SparseOp::from_triplets(3, vec![(1, 0, c(2.0, 0.0)), (2, 1, c(0.0, 1.0))]);
        let ab = a.matmul(&b).to_dense();
        let ab_dense = a.to_dense().dot(&b.to_dense());
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!((ab[(i, j)] - ab_dense[(i, j)]).norm(), 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn dense_products_match() {
        let a = SparseOp::from_triplets(2, vec![(0, 1, c(1.0, 2.0)), (1, 1, c(-1.0, 0.0))]);
        let b = ndarray::array![[c(1.0, 0.0), c(2.0, 0.0)], [c(0.0, 1.0), c(1.0, 1.0)]];
        let left = a.mul_dense(&b);
        let left_dense = a.to_dense().dot(&b);
        let right = a.dense_mul(&b);
        let right_dense = b.dot(&a.to_dense());
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!((left[(i, j)] - left_dense[(i, j)]).norm(), 0.0, epsilon = 1e-15);
                assert_abs_diff_eq!((right[(i, j)] - right_dense[(i, j)]).norm(), 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn dagger_is_conjugate_transpose() {
        let a = SparseOp::from_triplets(2, vec![(0, 1, c(1.0, 2.0))]);
        let ad = a.dagger();
        assert_eq!(ad.entries().next().unwrap(), (1, 0, c(1.0, -2.0)));
        assert_abs_diff_eq!(a.hermiticity_deviation(), (c(1.0, 2.0)).norm() , epsilon = 1e-15);
        let h = SparseOp::from_triplets(2, vec![(0, 1, c(0.0, -1.0)), (1, 0, c(0.0, 1.0))]);
        assert_abs_diff_eq!(h.hermiticity_deviation(), 0.0, epsilon = 1e-15);
    }
}
