//! Linear entropy and its leading-order growth under a weak local coupling.
//!
//! The first-order (in lambda^2) linear entropy of an initially pure state is
//!
//!   S1(phi, t) = (lambda^2/hbar^2) int_0^t ds
//!                sum_{k1 k2} g_{k1 k2} <delta a_{k1}^dag(s) delta a_{k2}(s)>,
//!
//! evaluated by composite Simpson quadrature of the covariance integrand
//! along the closed-system trajectory phi(s). The delta subtraction uses the
//! instantaneous mean <phi(s)| a_k |phi(s)>, which for Hamiltonian
//! eigenstates is time independent and makes S1 exactly linear in t.
//! Multi-channel couplings contribute one covariance sum per channel;
//! cross-channel correlations vanish.

use ndarray::Array1;
use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::{DensityMatrix, Propagator};
use crate::environment::InteractionSpec;
use crate::error::DeclabError;
use crate::hilbert::ManyBodyState;
use crate::sparse::SparseOp;
use crate::tol;
use crate::Result;

/// S_lin(rho) = 1 - tr(rho^2); zero exactly on pure states.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    1.0 - rho.purity()
}

/// The covariance integrand of S1 at one time, summed over channels.
fn covariance_integrand(
    amps: &Array1<Complex64>,
    interaction: &InteractionSpec,
) -> f64 {
    let mut total = 0.0;
    for channel in interaction.channels() {
        let ops = &channel.momentum_ops;
        let g = channel.correlation.matrix();
        let vectors: Vec<Array1<Complex64>> = ops.iter().map(|a| a.apply(amps)).collect();
        let means: Vec<Complex64> = vectors
            .iter()
            .map(|v| amps.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum())
            .collect();
        let mut acc = Complex64::ZERO;
        for k1 in 0..ops.len() {
            for k2 in 0..ops.len() {
                let gv = g[(k1, k2)];
                if gv == Complex64::ZERO {
                    continue;
                }
                let cov: Complex64 = vectors[k1]
                    .iter()
                    .zip(vectors[k2].iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum::<Complex64>()
                    - means[k1].conj() * means[k2];
                acc += gv * cov;
            }
        }
        total += acc.re;
    }
    total
}

fn simpson(values: &[f64], dt: f64) -> f64 {
    let n = values.len() - 1;
    debug_assert!(n >= 2 && n.is_multiple_of(2));
    let mut acc = values[0] + values[n];
    for (j, v) in values.iter().enumerate().take(n).skip(1) {
        acc += if j % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * dt / 3.0
}

fn integrand_samples(
    state: &ManyBodyState,
    propagator: &Propagator,
    interaction: &InteractionSpec,
    t: f64,
    n_nodes: usize,
) -> Vec<f64> {
    (0..n_nodes)
        .map(|j| {
            let s = t * j as f64 / (n_nodes - 1) as f64;
            let amps = propagator.evolve_amplitudes(state.amplitudes(), s);
            covariance_integrand(&amps, interaction)
        })
        .collect()
}

/// S1(phi, t) by composite Simpson with `n_quad` intervals
/// (`first_order_entropy`). The node count is doubled internally and the two
/// results compared; disagreement beyond the relative gate is an error.
pub fn first_order_entropy(
    state: &ManyBodyState,
    h: &SparseOp,
    interaction: &InteractionSpec,
    t: f64,
    n_quad: usize,
) -> Result<f64> {
    let propagator = Propagator::new(h, "first-order-entropy")?;
    first_order_entropy_with(state, &propagator, interaction, t, n_quad)
}

pub fn first_order_entropy_with(
    state: &ManyBodyState,
    propagator: &Propagator,
    interaction: &InteractionSpec,
    t: f64,
    n_quad: usize,
) -> Result<f64> {
    if n_quad < 8 {
        return Err(DeclabError::InvalidParameter {
            reason: "quadrature needs n_quad >= 8".into(),
        });
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let n = n_quad + n_quad % 2;
    let coarse_vals = integrand_samples(state, propagator, interaction, t, n + 1);
    let fine_vals = integrand_samples(state, propagator, interaction, t, 2 * n + 1);
    let coarse = simpson(&coarse_vals, t / n as f64);
    let fine = simpson(&fine_vals, t / (2 * n) as f64);
    // below this scale the integrand is pure roundoff of the g-weighted
    // covariance sums and both results count as converged zeros
    let g_abs: f64 = interaction
        .channels()
        .iter()
        .map(|ch| ch.correlation.matrix().iter().map(|z| z.norm()).sum::<f64>())
        .sum();
    let roundoff_floor = t.abs() * 1e-12 * g_abs.max(1.0);
    let diff = (fine - coarse).abs();
    let converged = diff <= tol::QUADRATURE_REL * fine.abs()
        || fine.abs().max(coarse.abs()) <= roundoff_floor;
    if !converged {
        return Err(DeclabError::QuadratureNotConverged {
            relative_change: diff / fine.abs().max(roundoff_floor),
            tolerance: tol::QUADRATURE_REL,
        });
    }
    Ok(interaction.rate_prefactor() * fine)
}

/// S1 evaluated on a uniform time grid [0, t_final] with `n_points` samples
/// (cumulative quadrature over a refined node set).
pub fn first_order_series(
    state: &ManyBodyState,
    h: &SparseOp,
    interaction: &InteractionSpec,
    t_final: f64,
    n_points: usize,
    n_quad: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if n_points < 2 {
        return Err(DeclabError::InvalidParameter {
            reason: "series needs at least 2 points".into(),
        });
    }
    let propagator = Propagator::new(h, "first-order-series")?;
    let segments = n_points - 1;
    // even number of Simpson intervals per segment
    let per_segment = (n_quad / segments).max(2);
    let per_segment = per_segment + per_segment % 2;
    let n_nodes = segments * per_segment + 1;
    let nodes = integrand_samples(state, &propagator, interaction, t_final, n_nodes);
    let dt = t_final / (n_nodes - 1) as f64;
    let mut times = Vec::with_capacity(n_points);
    let mut values = Vec::with_capacity(n_points);
    times.push(0.0);
    values.push(0.0);
    let mut acc = 0.0;
    for seg in 0..segments {
        let start = seg * per_segment;
        let end = start + per_segment;
        acc += simpson(&nodes[start..=end], dt);
        times.push(t_final * (seg + 1) as f64 / segments as f64);
        values.push(interaction.rate_prefactor() * acc);
    }
    Ok((times, values))
}

/// Time series of the linear entropy and its first-order approximation,
/// with the extracted rate, the translation-invariance bound rate, and the
/// slack between them.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyReport {
    pub times: Vec<f64>,
    /// From the full master-equation dynamics; empty when only the
    /// first-order series was computed.
    pub s_lin: Vec<f64>,
    pub s_lin_first_order: Vec<f64>,
    /// lambda^2 / hbar^2.
    pub rate_prefactor: f64,
    /// Fitted decoherence-rate estimate (slope of S1 through the origin).
    pub slope: f64,
    /// g00 <delta A^dag delta A> rate bound.
    pub bound_rate: f64,
    /// slope - bound; nonnegative (within 1e-9) when the bound's
    /// preconditions hold.
    pub slack: f64,
    pub nonlinearity_flag: bool,
}

impl EntropyReport {
    /// Pointwise range check: S_lin must stay in [0, 1 - 1/dim].
    pub fn validate(&self, dim: usize) -> Result<()> {
        let upper = 1.0 - 1.0 / dim as f64;
        for &v in self.s_lin.iter().chain(self.s_lin_first_order.iter()) {
            if !(-tol::SPECTRAL..=upper + tol::SPECTRAL).contains(&v) {
                return Err(DeclabError::InvalidParameter {
                    reason: format!("linear entropy {v} outside [0, {upper}]"),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_state;
    use crate::environment::{ContactRegion, EnvCorrelation, Kernel};
    use crate::hilbert::HilbertSpace;
    use crate::lattice::LatticeSpec;
    use crate::models::ising::IsingModel;
    use crate::operators::{embed_local, momentum_transform_grid, LocalOperatorField};
    use approx::assert_abs_diff_eq;
    use ndarray::Array1;

    fn ising_interaction(
        model: &IsingModel,
        lambda: f64,
        kernel: Kernel,
        weight: f64,
    ) -> InteractionSpec {
        let corr = EnvCorrelation::build(
            kernel,
            weight,
            &ContactRegion::All,
            model.lattice(),
            None,
        )
        .unwrap();
        InteractionSpec::single_site(
            lambda,
            &model.order_parameter_site(),
            model.lattice(),
            model.space(),
            corr,
        )
        .unwrap()
    }

    #[test]
    fn entropy_trivial_values() {
        let lat = LatticeSpec::new(1, 2).unwrap();
        let space = HilbertSpace::uniform(2, 2).unwrap();
        let pure = DensityMatrix::pure(
            &ManyBodyState::basis_state(0, space, lat.clone()).unwrap(),
        );
        assert_abs_diff_eq!(linear_entropy(&pure), 0.0, epsilon = 1e-14);
        // maximally mixed dim 4 -> 0.75
        let c = Complex64::new(0.25, 0.0);
        let mixed = DensityMatrix::new(
            ndarray::Array2::from_diag(&Array1::from_elem(4, c)),
            lat.clone(),
            0.0,
        )
        .unwrap();
        assert_abs_diff_eq!(linear_entropy(&mixed), 0.75, epsilon = 1e-14);
        // equal mixture of two orthogonal pure states -> 0.5
        let h = Complex64::new(0.5, 0.0);
        let mut m = ndarray::Array2::zeros((4, 4));
        m[(0, 0)] = h;
        m[(3, 3)] = h;
        let half = DensityMatrix::new(m, lat, 0.0).unwrap();
        assert_abs_diff_eq!(linear_entropy(&half), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn ising_afv_closed_form() {
        // S1(phi0, t) = lambda^2 g00 t exactly
        let model = IsingModel::new(6, 1, 1.0).unwrap();
        let lambda = 0.01;
        let spec = ising_interaction(&model, lambda, Kernel::Constant, 1.0);
        let g00 = spec.channels()[0].correlation.g00();
        let pair = model.vacuum_pair().unwrap();
        for &t in &[0.5, 1.0, 3.0] {
            let s1 = first_order_entropy(&pair.afv, model.hamiltonian(), &spec, t, 16).unwrap();
            let expect = lambda * lambda * g00 * t;
            assert!(
                (s1 - expect).abs() <= 1e-12 * expect,
                "t = {t}: {s1} vs {expect}"
            );
        }
    }

    #[test]
    fn ising_ppv_entropy_vanishes() {
        let model = IsingModel::new(6, 1, 1.0).unwrap();
        let spec = ising_interaction(&model, 0.01, Kernel::Constant, 1.0);
        let pair = model.vacuum_pair().unwrap();
        let s1 = first_order_entropy(&pair.ppv, model.hamiltonian(), &spec, 2.0, 16).unwrap();
        assert_abs_diff_eq!(s1, 0.0, epsilon = 1e-16);
    }

    #[test]
    fn series_is_linear_for_eigenstates() {
        let model = IsingModel::new(4, 1, 1.0).unwrap();
        let spec = ising_interaction(&model, 0.02, Kernel::Exponential { xi: 1.5 }, 0.8);
        let pair = model.vacuum_pair().unwrap();
        let (times, values) =
            first_order_series(&pair.afv, model.hamiltonian(), &spec, 2.0, 9, 32).unwrap();
        assert_eq!(times.len(), 9);
        let slope = values[8] / times[8];
        for (t, v) in times.iter().zip(values.iter()).skip(1) {
            assert_abs_diff_eq!(v / t, slope, epsilon = 1e-12);
        }
    }

    #[test]
    fn schroedinger_and_heisenberg_integrands_agree() {
        // <phi(s)| dA^dag dA |phi(s)> equals <phi| dA^dag(s) dA(s) |phi>
        // with the delta subtraction at the same time slice
        let model = IsingModel::with_transverse_field(3, 1, 1.0, 0.6).unwrap();
        let (_, _, s3) = crate::operators::pauli();
        let field = LocalOperatorField::new(s3);
        let a1 = momentum_transform_grid(&field, 1, model.lattice(), model.space()).unwrap();
        let psi = {
            // superposition with nontrivial dynamics
            let plus = model.xi_plus();
            let amps = plus.amplitudes()
                + model.xi_minus().amplitudes().mapv(|z| z * Complex64::new(0.0, 1.0));
            ManyBodyState::normalized(amps, model.space().clone(), model.lattice().clone())
                .unwrap()
        };
        let s = 0.9;
        // Schroedinger picture
        let phi_s = evolve_state(&psi, model.hamiltonian(), s).unwrap();
        let v = a1.apply(phi_s.amplitudes());
        let mean: Complex64 = phi_s
            .amplitudes()
            .iter()
            .zip(v.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        let schr = v.iter().map(|z| z.norm_sqr()).sum::<f64>() - mean.norm_sqr();
        // Heisenberg picture
        let a1_s = crate::dynamics::heisenberg_picture(&a1, model.hamiltonian(), s).unwrap();
        let w = a1_s.apply(psi.amplitudes());
        let mean_h: Complex64 = psi
            .amplitudes()
            .iter()
            .zip(w.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        let heis = w.iter().map(|z| z.norm_sqr()).sum::<f64>() - mean_h.norm_sqr();
        assert_abs_diff_eq!(schr, heis, epsilon = 1e-10);
    }

    #[test]
    fn quadrature_gate_rejects_low_node_counts() {
        let model = IsingModel::new(3, 1, 1.0).unwrap();
        let spec = ising_interaction(&model, 0.01, Kernel::Constant, 1.0);
        let pair = model.vacuum_pair().unwrap();
        assert!(matches!(
            first_order_entropy(&pair.afv, model.hamiltonian(), &spec, 1.0, 4),
            Err(DeclabError::InvalidParameter { .. })
        ));
    }

    #[test]
    fn report_range_validation() {
        let report = EntropyReport {
            times: vec![0.0, 1.0],
            s_lin: vec![0.0, 0.3],
            s_lin_first_order: vec![0.0, 0.29],
            rate_prefactor: 1e-4,
            slope: 0.29,
            bound_rate: 0.28,
            slack: 0.01,
            nonlinearity_flag: false,
        };
        report.validate(4).unwrap();
        let bad = EntropyReport {
            s_lin: vec![0.9],
            ..report
        };
        assert!(bad.validate(4).is_err());
    }

    #[test]
    fn single_site_subtracted_covariance_matches_embedding() {
        // integrand for a one-site contact reduces to the embedded operator
        let model = IsingModel::new(3, 1, 1.0).unwrap();
        let corr = EnvCorrelation::build(
            Kernel::Delta,
            1.0,
            &ContactRegion::Sites(vec![vec![0]]),
            model.lattice(),
            None,
        )
        .unwrap();
        let spec = InteractionSpec::single_site(
            1.0,
            &model.order_parameter_site(),
            model.lattice(),
            model.space(),
            corr,
        )
        .unwrap();
        let pair = model.vacuum_pair().unwrap();
        // sum_{k1 k2} g a_k1^dag a_k2 with g_{k1k2} = e^{i(k1 - k2) . 0} = 1:
        // equals (sum_k a_k)^dag (sum_k a_k) = s3(0)^dag s3(0) covariance
        let integrand = covariance_integrand(pair.afv.amplitudes(), &spec);
        let s30 = embed_local(
            &model.order_parameter_site(),
            0,
            model.lattice(),
            model.space(),
        )
        .unwrap();
        let v = s30.apply(pair.afv.amplitudes());
        let mean: Complex64 = pair
            .afv
            .amplitudes()
            .iter()
            .zip(v.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        let expect = v.iter().map(|z| z.norm_sqr()).sum::<f64>() - mean.norm_sqr();
        assert_abs_diff_eq!(integrand, expect, epsilon = 1e-12);
    }
}
