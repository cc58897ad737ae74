//! The environment correlation matrix g_{k1 k2} over the momentum grid.
//!
//! With environment operators b_k = sum_{x in contact} b(x) e^{-ikx} and a
//! separable space-time correlation <b^dag(x) b(y, s)> = f(x-y) h(s), the
//! half-integrated time correlation becomes
//!
//!   g_{k1 k2} = w sum_{x, y in contact} f(x - y) e^{+i k1.x} e^{-i k2.y},
//!
//! where w folds in (1/2) the integral of h. The matrix is Hermitian and,
//! for Fourier-nonnegative kernels, positive semidefinite. Its k = 0 entry
//! g00 = w sum f drives the anomalous decoherence of the AFV and obeys the
//! two scaling regimes: |contact|^2 when the environment correlates over a
//! region larger than the contact, |contact| x correlation volume otherwise.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::environment::kernel::Kernel;
use crate::error::DeclabError;
use crate::lattice::LatticeSpec;
use crate::linalg;
use crate::tol;
use crate::Result;

/// Which sites couple to the environment.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ContactRegion {
    /// Every lattice site.
    All,
    /// A contiguous sub-box anchored at the origin with the given extents.
    Block(Vec<usize>),
    /// Explicit coordinate tuples.
    Sites(Vec<Vec<usize>>),
}

impl ContactRegion {
    /// Sorted flat site indices; errors on empty or out-of-lattice regions.
    pub fn resolve(&self, lattice: &LatticeSpec) -> Result<Vec<usize>> {
        let indices: Vec<usize> = match self {
            ContactRegion::All => (0..lattice.volume()).collect(),
            ContactRegion::Block(extents) => {
                if extents.len() != lattice.dimension() {
                    return Err(DeclabError::InvalidParameter {
                        reason: "contact block rank must match the lattice dimension".into(),
                    });
                }
                if extents.contains(&0) {
                    return Err(DeclabError::EmptyContact);
                }
                if extents.iter().any(|&e| e > lattice.linear_size()) {
                    return Err(DeclabError::ContactOutsideLattice {
                        site: extents.clone(),
                    });
                }
                let mut out = Vec::new();
                let mut coords = vec![0usize; extents.len()];
                loop {
                    out.push(lattice.site_index(&coords));
                    let mut i = extents.len();
                    loop {
                        if i == 0 {
                            return finish(out);
                        }
                        i -= 1;
                        coords[i] += 1;
                        if coords[i] < extents[i] {
                            break;
                        }
                        coords[i] = 0;
                    }
                }
            }
            ContactRegion::Sites(sites) => {
                let mut out = Vec::with_capacity(sites.len());
                for s in sites {
                    if s.len() != lattice.dimension()
                        || s.iter().any(|&c| c >= lattice.linear_size())
                    {
                        return Err(DeclabError::ContactOutsideLattice { site: s.clone() });
                    }
                    out.push(lattice.site_index(s));
                }
                out
            }
        };
        finish(indices)
    }
}

fn finish(mut indices: Vec<usize>) -> Result<Vec<usize>> {
    indices.sort_unstable();
    indices.dedup();
    if indices.is_empty() {
        return Err(DeclabError::EmptyContact);
    }
    Ok(indices)
}

/// The positive environment correlation matrix plus the real-space model
/// that produced it.
#[derive(Debug, Clone)]
pub struct EnvCorrelation {
    kernel: Kernel,
    weight: f64,
    contact: Vec<usize>,
    lattice: LatticeSpec,
    matrix: Array2<Complex64>,
    min_eig: f64,
    max_eig: f64,
    /// Environment correlation time; metadata for the Markovianity guard.
    pub tau_c: Option<f64>,
}

/// Scaling classification of g00 against the rough order-of-magnitude
/// estimates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingRegime {
    pub regime: RegimeKind,
    pub correlation_length: f64,
    pub correlation_volume: f64,
    pub contact_size: usize,
    pub predicted_g00: f64,
    pub exact_g00: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeKind {
    /// Environment correlates over more than the contact region.
    LongRange,
    /// Contact region exceeds the correlation volume.
    ShortRange,
}

impl EnvCorrelation {
    /// Build the g matrix (`build_g_matrix`). The kernel is checked for
    /// Fourier nonnegativity first (unless the kernel opts out), then the
    /// assembled matrix's eigenvalue range is recorded.
    pub fn build(
        kernel: Kernel,
        weight: f64,
        contact: &ContactRegion,
        lattice: &LatticeSpec,
        tau_c: Option<f64>,
    ) -> Result<Self> {
        if !weight.is_finite() || weight < 0.0 {
            return Err(DeclabError::InvalidParameter {
                reason: "correlation weight must be finite and nonnegative".into(),
            });
        }
        kernel.validate(lattice)?;
        let contact = contact.resolve(lattice)?;
        Self::assemble(kernel, weight, contact, lattice.clone(), tau_c)
    }

    fn assemble(
        kernel: Kernel,
        weight: f64,
        contact: Vec<usize>,
        lattice: LatticeSpec,
        tau_c: Option<f64>,
    ) -> Result<Self> {
        let volume = lattice.volume();
        let nc = contact.len();
        // F_{xy} = f(x - y) on the contact region
        let mut f = Array2::<Complex64>::zeros((nc, nc));
        for (i, &x) in contact.iter().enumerate() {
            for (j, &y) in contact.iter().enumerate() {
                f[(i, j)] = Complex64::new(kernel.evaluate(&lattice, x, y), 0.0);
            }
        }
        // P_{kx} = e^{+ik.x}; g = w P F P^dag
        let mut p = Array2::<Complex64>::zeros((volume, nc));
        for k in 0..volume {
            for (j, &x) in contact.iter().enumerate() {
                p[(k, j)] = lattice.phase(k, x);
            }
        }
        let matrix = p
            .dot(&f)
            .dot(&linalg::dagger(&p))
            .mapv(|z| z * weight);
        let (min_eig, max_eig) = linalg::eig_range(&matrix)?;
        Ok(Self {
            kernel,
            weight,
            contact,
            lattice,
            matrix,
            min_eig,
            max_eig,
            tau_c,
        })
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn contact(&self) -> &[usize] {
        &self.contact
    }

    pub fn contact_size(&self) -> usize {
        self.contact.len()
    }

    /// g00 = w sum_{x,y in contact} f(x - y).
    pub fn g00(&self) -> f64 {
        self.matrix[(0, 0)].re
    }

    /// Diagonal g_{kk} as real values.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.matrix.nrows())
            .map(|k| self.matrix[(k, k)].re)
            .collect()
    }

    pub fn min_eig(&self) -> f64 {
        self.min_eig
    }

    pub fn max_eig(&self) -> f64 {
        self.max_eig
    }

    /// Positive semidefinite within the relative floor.
    pub fn is_positive(&self) -> bool {
        self.min_eig >= -tol::PSD_REL * self.max_eig.abs().max(1e-300)
    }

    /// Rebuild with the sums restricted to a new contact region
    /// (`restrict_contact`). For pointwise-nonnegative kernels, enlarging
    /// the region never decreases g00.
    pub fn restrict_contact(&self, contact: &ContactRegion) -> Result<Self> {
        let resolved = contact.resolve(&self.lattice)?;
        Self::assemble(
            self.kernel.clone(),
            self.weight,
            resolved,
            self.lattice.clone(),
            self.tau_c,
        )
    }

    /// Classify the scaling regime of g00 (`scaling_regime`).
    pub fn scaling_regime(&self) -> ScalingRegime {
        let xi = self.kernel.correlation_length(&self.lattice);
        let corr_volume = xi
            .powi(self.lattice.dimension() as i32)
            .min(self.lattice.volume() as f64);
        let nc = self.contact.len() as f64;
        let (regime, predicted) = if corr_volume >= nc {
            (RegimeKind::LongRange, self.weight * nc * nc)
        } else {
            (
                RegimeKind::ShortRange,
                self.weight * nc * corr_volume.min(nc),
            )
        };
        let exact = self.g00();
        ScalingRegime {
            regime,
            correlation_length: xi,
            correlation_volume: corr_volume,
            contact_size: self.contact.len(),
            predicted_g00: predicted,
            exact_g00: exact,
            ratio: if predicted != 0.0 { exact / predicted } else { f64::NAN },
        }
    }

    /// Markovianity guard: the master equation assumes the system energy
    /// spread stays below hbar / tau_c. Returns a warning string when the
    /// declared spread violates that; never enforces.
    pub fn markov_warning(&self, energy_spread: f64) -> Option<String> {
        let tau = self.tau_c?;
        if tau > 0.0 && energy_spread > 1.0 / tau {
            Some(format!(
                "system energy spread {energy_spread:.3e} exceeds 1/tau_c = {:.3e}; the Markovian approximation is suspect",
                1.0 / tau
            ))
        } else {
            None
        }
    }

    /// CSV rendering: rows and columns are momentum-grid indices, cells hold
    /// the complex entries as `re<sign>im i`.
    pub fn to_csv(&self) -> String {
        let n = self.matrix.nrows();
        let mut out = String::new();
        out.push_str("k1\\k2");
        for k2 in 0..n {
            out.push_str(&format!(",{k2}"));
        }
        out.push('\n');
        for k1 in 0..n {
            out.push_str(&format!("{k1}"));
            for k2 in 0..n {
                let z = self.matrix[(k1, k2)];
                let sign = if z.im < 0.0 { '-' } else { '+' };
                out.push_str(&format!(",{}{sign}{}i", z.re, z.im.abs()));
            }
            out.push('\n');
        }
        out
    }
}

/// Least-squares slope of log(y) against log(x).
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(DeclabError::InvalidParameter {
            reason: format!("need at least 3 points for a log-log fit, got {}", xs.len()),
        });
    }
    if xs.iter().chain(ys.iter()).any(|&v| !v.is_finite() || v <= 0.0) {
        return Err(DeclabError::InvalidParameter {
            reason: "log-log fit requires strictly positive data".into(),
        });
    }
    let lx: Array1<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Array1<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.mean().unwrap();
    let my = ly.mean().unwrap();
    let cov: f64 = lx
        .iter()
        .zip(ly.iter())
        .map(|(&a, &b)| (a - mx) * (b - my))
        .sum();
    let var: f64 = lx.iter().map(|&a| (a - mx) * (a - mx)).sum();
    Ok(cov / var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn chain(l: usize) -> LatticeSpec {
        LatticeSpec::new(1, l).unwrap()
    }

    /// Independent double-sum oracle for g00.
    fn g00_oracle(kernel: &Kernel, weight: f64, contact: &[usize], lat: &LatticeSpec) -> f64 {
        let mut acc = 0.0;
        for &x in contact {
            for &y in contact {
                acc += kernel.evaluate(lat, x, y);
            }
        }
        weight * acc
    }

    #[test]
    fn constant_kernel_full_contact_is_volume_squared() {
        let lat = chain(6);
        let g = EnvCorrelation::build(Kernel::Constant, 0.7, &ContactRegion::All, &lat, None)
            .unwrap();
        assert_abs_diff_eq!(g.g00(), 0.7 * 36.0, epsilon = 1e-10);
        assert!(g.is_positive());
    }

    #[test]
    fn delta_kernel_diagonal_is_contact_size() {
        let lat = chain(5);
        let g = EnvCorrelation::build(Kernel::Delta, 1.3, &ContactRegion::All, &lat, None)
            .unwrap();
        for v in g.diagonal() {
            assert_abs_diff_eq!(v, 1.3 * 5.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn single_site_contact() {
        let lat = chain(4);
        let g = EnvCorrelation::build(
            Kernel::Exponential { xi: 2.0 },
            2.0,
            &ContactRegion::Sites(vec![vec![1]]),
            &lat,
            None,
        )
        .unwrap();
        // g00 = w f(0) = 2.0
        assert_abs_diff_eq!(g.g00(), 2.0, epsilon = 1e-12);
        let r = g.scaling_regime();
        // both rough estimates coincide for a single-site contact
        assert_abs_diff_eq!(r.predicted_g00, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.ratio, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn matrix_entry_matches_double_sum_oracle() {
        let lat = chain(6);
        for kernel in [Kernel::Constant, Kernel::Delta, Kernel::Exponential { xi: 1.5 }] {
            let g = EnvCorrelation::build(
                kernel.clone(),
                0.9,
                &ContactRegion::Block(vec![4]),
                &lat,
                None,
            )
            .unwrap();
            let oracle = g00_oracle(&kernel, 0.9, g.contact(), &lat);
            assert!(
                (g.g00() - oracle).abs() <= 1e-10 * oracle.abs().max(1.0),
                "kernel {kernel:?}: matrix {} vs oracle {oracle}",
                g.g00()
            );
        }
    }

    #[test]
    fn hermitian_and_positive() {
        let lat = chain(8);
        let g = EnvCorrelation::build(
            Kernel::Exponential { xi: 2.5 },
            1.0,
            &ContactRegion::Block(vec![5]),
            &lat,
            None,
        )
        .unwrap();
        assert!(linalg::hermiticity_deviation(g.matrix()) < 1e-12);
        assert!(g.is_positive(), "min eig {}", g.min_eig());
    }

    #[test]
    fn restricting_contact_decreases_g00() {
        let lat = chain(8);
        let full = EnvCorrelation::build(Kernel::Constant, 1.0, &ContactRegion::All, &lat, None)
            .unwrap();
        let half = full
            .restrict_contact(&ContactRegion::Block(vec![4]))
            .unwrap();
        assert!(half.g00() < full.g00());
        // idempotent on the same region
        let again = full.restrict_contact(&ContactRegion::All).unwrap();
        assert_abs_diff_eq!(again.g00(), full.g00(), epsilon = 1e-12);
        let dev = linalg::max_abs_entry(&(again.matrix() - full.matrix()));
        assert!(dev < 1e-10);
    }

    #[test]
    fn disjoint_halves_are_superadditive() {
        let lat = chain(8);
        let h1 = ContactRegion::Sites((0..4).map(|x| vec![x]).collect());
        let h2 = ContactRegion::Sites((4..8).map(|x| vec![x]).collect());
        for kernel in [Kernel::Constant, Kernel::Exponential { xi: 2.0 }, Kernel::Delta] {
            let full =
                EnvCorrelation::build(kernel.clone(), 1.0, &ContactRegion::All, &lat, None)
                    .unwrap();
            let g1 = full.restrict_contact(&h1).unwrap();
            let g2 = full.restrict_contact(&h2).unwrap();
            assert!(
                full.g00() + 1e-12 >= g1.g00() + g2.g00(),
                "kernel {kernel:?}: {} < {} + {}",
                full.g00(),
                g1.g00(),
                g2.g00()
            );
        }
    }

    #[test]
    fn empty_contact_rejected() {
        let lat = chain(4);
        let empty = ContactRegion::Sites(vec![]);
        assert!(matches!(
            EnvCorrelation::build(Kernel::Constant, 1.0, &empty, &lat, None),
            Err(DeclabError::EmptyContact)
        ));
    }

    #[test]
    fn long_range_regime_ratio() {
        // xi >> L: the exact sum is within [0.5, 1] of w |contact|^2
        let lat = chain(8);
        let g = EnvCorrelation::build(
            Kernel::Exponential { xi: 100.0 },
            1.0,
            &ContactRegion::All,
            &lat,
            None,
        )
        .unwrap();
        let r = g.scaling_regime();
        assert_eq!(r.regime, RegimeKind::LongRange);
        assert!(r.ratio >= 0.5 && r.ratio <= 1.0, "ratio {}", r.ratio);
    }

    #[test]
    fn short_range_regime_bounded() {
        // xi_E = 1 with the whole lattice as contact: g00 / (w |contact|)
        // stays bounded as L grows
        let mut ratios = Vec::new();
        for l in [10usize, 14, 18] {
            let lat = chain(l);
            let g = EnvCorrelation::build(
                Kernel::Exponential { xi: 1.0 },
                1.0,
                &ContactRegion::All,
                &lat,
                None,
            )
            .unwrap();
            ratios.push(g.g00() / l as f64);
        }
        for w in ratios.windows(2) {
            assert!((w[1] - w[0]).abs() < 0.02, "ratios {ratios:?}");
        }
    }

    #[test]
    fn scaling_slopes_in_both_regimes() {
        // log-log slope of g00 vs |contact|: 2 for the constant kernel,
        // 1 for the delta kernel, over at least 4 sizes
        let lat = chain(16);
        let sizes = [2usize, 4, 8, 16];
        let mut long_range = Vec::new();
        let mut short_range = Vec::new();
        for &m in &sizes {
            let region = ContactRegion::Block(vec![m]);
            long_range.push(
                EnvCorrelation::build(Kernel::Constant, 1.0, &region, &lat, None)
                    .unwrap()
                    .g00(),
            );
            short_range.push(
                EnvCorrelation::build(Kernel::Delta, 1.0, &region, &lat, None)
                    .unwrap()
                    .g00(),
            );
        }
        let xs: Vec<f64> = sizes.iter().map(|&m| m as f64).collect();
        let s_long = log_log_slope(&xs, &long_range).unwrap();
        let s_short = log_log_slope(&xs, &short_range).unwrap();
        assert!((s_long - 2.0).abs() < 0.15, "long-range slope {s_long}");
        assert!((s_short - 1.0).abs() < 0.15, "short-range slope {s_short}");
    }

    #[test]
    fn unvalidated_negative_kernel_fails_positivity() {
        let lat = chain(4);
        let bad = Kernel::Tabulated {
            values: vec![1.0, -1.5, 1.0, -1.5],
            validate: false,
        };
        let g = EnvCorrelation::build(bad, 1.0, &ContactRegion::All, &lat, None).unwrap();
        assert!(!g.is_positive(), "min eig {}", g.min_eig());
    }

    #[test]
    fn markov_guard_warns() {
        let lat = chain(4);
        let g = EnvCorrelation::build(
            Kernel::Constant,
            1.0,
            &ContactRegion::All,
            &lat,
            Some(0.5),
        )
        .unwrap();
        assert!(g.markov_warning(1.0).is_none());
        assert!(g.markov_warning(5.0).is_some());
    }

    #[test]
    fn log_log_slope_needs_three_points() {
        assert!(log_log_slope(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }
}
