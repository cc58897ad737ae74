//! Property tests for the structural invariants: operator algebra symmetry,
//! parity completeness, correlation-matrix positivity, the rate inequalities
//! on random inputs, and the boson fragility-ratio scaling.

use declab::dynamics::evolve_state;
use declab::environment::{ContactRegion, EnvCorrelation, InteractionSpec, Kernel};
use declab::fragility::{
    first_order_series, intensive_fluctuation_bound, correlation_region, operator_fluctuation,
    rate_bound_certificate, rate_extract, StateTrajectory,
};
use declab::hilbert::{translate_state, HilbertSpace, ManyBodyState};
use declab::lattice::LatticeSpec;
use declab::models::boson::FreeBosonModel;
use declab::models::ising::IsingModel;
use declab::models::parity_decompose;
use declab::operators::{
    build_intensive, embed_local, momentum_transform_grid, translation_operator,
    LocalOperatorField,
};
use declab::random;
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use proptest::prelude::*;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Strategy: an arbitrary complex 2x2 matrix with entries in [-1, 1]^2.
fn one_site_op() -> impl Strategy<Value = Array2<Complex64>> {
    proptest::collection::vec(
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| c64(re, im)),
        4,
    )
    .prop_map(|v| Array2::from_shape_vec((2, 2), v).unwrap())
}

/// Strategy: normalized state on `dim` amplitudes.
fn state_amplitudes(dim: usize) -> impl Strategy<Value = Array1<Complex64>> {
    proptest::collection::vec(
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| c64(re, im)),
        dim,
    )
    .prop_filter("nonzero", |v| {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3
    })
    .prop_map(Array1::from)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(25))]

    /// Embeddings at distinct sites commute.
    #[test]
    fn distinct_site_embeddings_commute(a in one_site_op(), b in one_site_op()) {
        let lattice = LatticeSpec::new(1, 3).unwrap();
        let space = HilbertSpace::uniform(3, 2).unwrap();
        let ea = embed_local(&LocalOperatorField::new(a), 0, &lattice, &space).unwrap();
        let eb = embed_local(&LocalOperatorField::new(b), 2, &lattice, &space).unwrap();
        let comm = ea.matmul(&eb).sub(&eb.matmul(&ea));
        prop_assert!(comm.max_abs_entry() < 1e-12);
    }

    /// Intensive operators are invariant under translation conjugation, and
    /// the k = 0 momentum transform reproduces them.
    #[test]
    fn intensive_operator_translation_invariant(a in one_site_op()) {
        let lattice = LatticeSpec::new(1, 4).unwrap();
        let space = HilbertSpace::uniform(4, 2).unwrap();
        let field = LocalOperatorField::new(a);
        let intensive = build_intensive(&field, &lattice, &space).unwrap();
        let t = translation_operator(&lattice, &space, &[1]);
        let conj = t.matmul(&intensive).matmul(&t.dagger());
        prop_assert!(conj.sub(&intensive).max_abs_entry() < 1e-12);
        let k0 = momentum_transform_grid(&field, 0, &lattice, &space).unwrap();
        prop_assert!(k0.sub(&intensive).max_abs_entry() < 1e-12);
    }

    /// Translation round-trips after a full period and preserves the norm.
    #[test]
    fn translation_periodicity(amps in state_amplitudes(16)) {
        let lattice = LatticeSpec::new(1, 4).unwrap();
        let space = HilbertSpace::uniform(4, 2).unwrap();
        let state = ManyBodyState::normalized(amps, space, lattice).unwrap();
        let mut moved = state.clone();
        for _ in 0..4 {
            moved = translate_state(&moved, &[1]);
            prop_assert!((moved.norm() - 1.0).abs() < 1e-12);
        }
        prop_assert!((state.overlap(&moved) - c64(1.0, 0.0)).norm() < 1e-12);
    }

    /// Parity decomposition is complete and reconstructs the state.
    #[test]
    fn parity_completeness(amps in state_amplitudes(16)) {
        let model = IsingModel::new(4, 1, 1.0).unwrap();
        let state = ManyBodyState::normalized(
            amps,
            model.space().clone(),
            model.lattice().clone(),
        ).unwrap();
        let d = parity_decompose(&state, &model.parity_operator()).unwrap();
        prop_assert!((d.weight_sum() - 1.0).abs() < 1e-12);
        let mut rebuilt: Array1<Complex64> = Array1::zeros(state.dim());
        if let Some(even) = &d.even {
            rebuilt = rebuilt + even.amplitudes().mapv(|z| z * d.c_plus);
        }
        if let Some(odd) = &d.odd {
            rebuilt = rebuilt + odd.amplitudes().mapv(|z| z * d.c_minus);
        }
        let dev: f64 = rebuilt
            .iter()
            .zip(state.amplitudes().iter())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        prop_assert!(dev < 1e-12);
    }

    /// Every correlation matrix built from a random Fourier-nonnegative
    /// kernel on a random contact region is positive semidefinite, and its
    /// k = 0 entry matches the direct double sum.
    #[test]
    fn correlation_matrices_positive(seed in 0u64..5000) {
        let lattice = LatticeSpec::new(1, 6).unwrap();
        let kernel = random::fourier_nonneg_kernel(&lattice, seed);
        let contact = random::random_contact(&lattice, seed.wrapping_add(77));
        let corr = EnvCorrelation::build(kernel.clone(), 0.7, &contact, &lattice, None).unwrap();
        prop_assert!(corr.is_positive(), "min eig {}", corr.min_eig());
        let mut direct = 0.0;
        for &x in corr.contact() {
            for &y in corr.contact() {
                direct += kernel.evaluate(&lattice, x, y);
            }
        }
        direct *= 0.7;
        prop_assert!((corr.g00() - direct).abs() <= 1e-10 * direct.abs().max(1.0));
    }

    /// The rate bound holds with slack >= -1e-9 on random translation-
    /// invariant states, random positive kernels, and random contacts.
    #[test]
    fn rate_bound_on_random_inputs(seed in 0u64..5000) {
        let l = 4 + (seed % 3) as usize;
        let model = IsingModel::new(l, 1, 1.0).unwrap();
        let lattice = model.lattice().clone();
        let kernel = random::fourier_nonneg_kernel(&lattice, seed);
        let contact = random::random_contact(&lattice, seed.wrapping_add(31));
        let corr = EnvCorrelation::build(kernel, 1.0, &contact, &lattice, None).unwrap();
        let spec = InteractionSpec::single_site(
            0.05,
            &model.order_parameter_site(),
            &lattice,
            model.space(),
            corr,
        ).unwrap();
        let state = random::translation_invariant_state(&lattice, model.space(), seed).unwrap();
        let t_op = translation_operator(&lattice, model.space(), &[1]);
        let cert = rate_bound_certificate(
            &state, model.hamiltonian(), &spec, 0.7, 16, &[t_op],
        ).unwrap();
        prop_assert_eq!(cert.pass, Some(true));
        prop_assert!(cert.slack >= -1e-9);
    }

    /// The intensive-fluctuation bound holds on translation-invariant
    /// product states (which cluster trivially) for arbitrary one-site
    /// couplings, with slack >= -1e-10 at every grid time.
    #[test]
    fn clustering_states_respect_intensive_bound(
        a in one_site_op(),
        theta in 0.0f64..std::f64::consts::PI,
        phi in 0.0f64..std::f64::consts::TAU,
    ) {
        let model = IsingModel::new(4, 1, 1.0).unwrap();
        // uniform product state (cos(theta/2), e^{i phi} sin(theta/2))^x4
        let up = c64((theta / 2.0).cos(), 0.0);
        let down = Complex64::from_polar((theta / 2.0).sin(), phi);
        let mut amps: Array1<Complex64> = Array1::zeros(16);
        for n in 0..16usize {
            let mut v = c64(1.0, 0.0);
            for s in 0..4 {
                v *= if n >> (3 - s) & 1 == 0 { up } else { down };
            }
            amps[n] = v;
        }
        let state = ManyBodyState::normalized(
            amps,
            model.space().clone(),
            model.lattice().clone(),
        ).unwrap();
        let traj = StateTrajectory::closed(&state, model.hamiltonian(), 0.6, 9).unwrap();
        let region = correlation_region(&traj, 0, 0.2).unwrap();
        let report = intensive_fluctuation_bound(
            &traj,
            &LocalOperatorField::new(a),
            &region,
        ).unwrap();
        prop_assert!(report.max_violation <= 1e-10, "violation {}", report.max_violation);
    }

    /// Closed evolution preserves overlaps (unitarity) on random states.
    #[test]
    fn evolution_preserves_overlaps(amps1 in state_amplitudes(8), amps2 in state_amplitudes(8)) {
        let model = IsingModel::with_transverse_field(3, 1, 1.0, 0.5).unwrap();
        let s1 = ManyBodyState::normalized(amps1, model.space().clone(), model.lattice().clone()).unwrap();
        let s2 = ManyBodyState::normalized(amps2, model.space().clone(), model.lattice().clone()).unwrap();
        let before = s1.overlap(&s2);
        let e1 = evolve_state(&s1, model.hamiltonian(), 1.3).unwrap();
        let e2 = evolve_state(&s2, model.hamiltonian(), 1.3).unwrap();
        let after = e1.overlap(&e2);
        prop_assert!((before - after).norm() < 1e-10);
    }
}

/// The boson AFV/PPV rate ratio grows linearly with the volume at fixed
/// density and full contact: fit exponent 1.0 +- 0.2.
#[test]
fn boson_fragility_ratio_scales_with_volume() {
    let lambda = 0.01;
    let mut volumes = Vec::new();
    let mut ratios = Vec::new();
    let mut differences = Vec::new();
    for &l in &[3usize, 4, 5, 6] {
        let n_quanta = l; // density 1
        let alpha = (n_quanta as f64).sqrt();
        let zero_cutoff = (alpha * alpha + 6.0 * alpha).ceil() as usize + 1;
        let model = FreeBosonModel::with_mode_cutoffs(l, 1, zero_cutoff, 2).unwrap();
        let lattice = model.lattice().clone();
        let corr = || {
            EnvCorrelation::build(Kernel::Constant, 1.0, &ContactRegion::All, &lattice, None)
                .unwrap()
        };
        let spec = model.field_coupling(lambda, corr(), corr()).unwrap();
        let (number, coherent) = model
            .build_states(n_quanta, c64(alpha, 0.0))
            .unwrap();
        let t_final = 1.0;
        let (times, afv_series) = first_order_series(
            &number.state,
            model.hamiltonian(),
            &spec,
            t_final,
            9,
            32,
        )
        .unwrap();
        let (_, ppv_series) = first_order_series(
            &coherent.state,
            model.hamiltonian(),
            &spec,
            t_final,
            9,
            32,
        )
        .unwrap();
        let afv_rate = rate_extract(&times, &afv_series).unwrap();
        let ppv_rate = rate_extract(&times, &ppv_series).unwrap();
        assert!(!afv_rate.nonlinear && !ppv_rate.nonlinear);
        volumes.push(l as f64);
        ratios.push(afv_rate.gamma / ppv_rate.gamma);
        differences.push(afv_rate.gamma - ppv_rate.gamma);
        // the difference itself matches lambda^2 n0 (g+00 + g-00); the
        // truncated coherent state's Fock tail leaves ~1e-6 relative slack
        let g00_sum = 2.0 * spec.channels()[0].correlation.g00();
        let expect = lambda * lambda * 1.0 * g00_sum;
        let rel = (afv_rate.gamma - ppv_rate.gamma - expect).abs() / expect;
        assert!(rel < 1e-5, "L = {l}: rate difference off by {rel:.3e}");
    }
    let slope = declab::environment::log_log_slope(&volumes, &ratios).unwrap();
    assert!(
        (slope - 1.0).abs() < 0.2,
        "fragility ratio exponent {slope} (ratios {ratios:?})"
    );
}

/// The number state's entropy dominates the coherent state's for any
/// two-channel coupling: the difference-side inequality in the U(1) case,
/// checked numerically on the boson model.
#[test]
fn boson_pair_entropy_difference_nonnegative() {
    let model = FreeBosonModel::with_mode_cutoffs(4, 1, 12, 2).unwrap();
    let lattice = model.lattice().clone();
    for (seed_plus, seed_minus) in [(11u64, 12u64), (13, 14), (15, 16)] {
        let kp = random::fourier_nonneg_kernel(&lattice, seed_plus);
        let km = random::fourier_nonneg_kernel(&lattice, seed_minus);
        let contact = random::random_contact(&lattice, seed_plus.wrapping_mul(3));
        let cp = EnvCorrelation::build(kp, 0.9, &contact, &lattice, None).unwrap();
        let cm = EnvCorrelation::build(km, 1.2, &contact, &lattice, None).unwrap();
        let spec = model.field_coupling(0.02, cp, cm).unwrap();
        let (number, coherent) = model.build_states(3, c64(0.8, -0.4)).unwrap();
        let t = 1.0;
        let s1_n = declab::fragility::first_order_entropy(
            &number.state,
            model.hamiltonian(),
            &spec,
            t,
            16,
        )
        .unwrap();
        let s1_a = declab::fragility::first_order_entropy(
            &coherent.state,
            model.hamiltonian(),
            &spec,
            t,
            16,
        )
        .unwrap();
        assert!(
            s1_n - s1_a >= -1e-12,
            "number {s1_n} vs coherent {s1_a}"
        );
    }
}

/// AFV anomalous fluctuation is volume independent while constructed
/// near-PPV pairs in the perturbed model lose their mutual overlap
/// monotonically.
#[test]
fn perturbed_overlap_shrinks_with_volume() {
    let mut fluct = Vec::new();
    let mut overlaps = Vec::new();
    for &l in &[4usize, 6, 8] {
        let model = IsingModel::with_transverse_field(l, 1, 1.0, 0.3).unwrap();
        let pair = model.ground_doublet_pair().unwrap();
        fluct.push(operator_fluctuation(&pair.afv, &model.order_parameter()).normal);
        let ppv = model.projected_product_ppv().unwrap();
        let p = model.parity_operator();
        let flipped = p.apply(ppv.amplitudes());
        let overlap: Complex64 = ppv
            .amplitudes()
            .iter()
            .zip(flipped.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        overlaps.push(overlap.norm());
    }
    for w in overlaps.windows(2) {
        assert!(w[1] < w[0], "overlap not decreasing: {overlaps:?}");
    }
    // the perturbed AFV fluctuation stays O(1)
    for f in &fluct {
        assert!(*f > 0.8, "AFV fluctuation collapsed: {fluct:?}");
    }
}

/// Everything is dimension generic: the closed entropy forms and the
/// region dichotomy hold on the 3x3 torus exactly as on chains.
#[test]
fn two_dimensional_torus_closed_forms() {
    let model = IsingModel::new(3, 2, 1.0).unwrap();
    assert_eq!(model.lattice().volume(), 9);
    let lambda = 0.02;
    let corr = EnvCorrelation::build(
        Kernel::Constant,
        0.7,
        &ContactRegion::All,
        model.lattice(),
        None,
    )
    .unwrap();
    let g00 = corr.g00();
    assert!((g00 - 0.7 * 81.0).abs() < 1e-9);
    let spec = InteractionSpec::single_site(
        lambda,
        &model.order_parameter_site(),
        model.lattice(),
        model.space(),
        corr,
    )
    .unwrap();
    let pair = model.vacuum_pair().unwrap();
    let t = 0.9;
    let s1 = declab::fragility::first_order_entropy(&pair.afv, model.hamiltonian(), &spec, t, 16)
        .unwrap();
    let expect = lambda * lambda * g00 * t;
    assert!((s1 - expect).abs() < 1e-12 * expect, "{s1} vs {expect}");
    let s1_ppv =
        declab::fragility::first_order_entropy(&pair.ppv, model.hamiltonian(), &spec, t, 16)
            .unwrap();
    assert!(s1_ppv.abs() < 1e-12 * expect);
    // region dichotomy on the torus
    let ppv_traj = StateTrajectory::closed(&pair.ppv, model.hamiltonian(), 0.5, 9).unwrap();
    assert_eq!(correlation_region(&ppv_traj, 4, 0.5).unwrap().volume, 1);
    let afv_traj = StateTrajectory::closed(&pair.afv, model.hamiltonian(), 0.5, 9).unwrap();
    assert_eq!(correlation_region(&afv_traj, 4, 0.5).unwrap().volume, 9);
}

/// The translation unitary conjugates site operators forward:
/// T a(x) T^{-1} = a(x + shift), matching the momentum phase convention.
#[test]
fn translation_conjugates_site_operators_forward() {
    let lattice = LatticeSpec::new(1, 3).unwrap();
    let space = HilbertSpace::uniform(3, 2).unwrap();
    let (s1, _, s3) = declab::operators::pauli();
    for m in [s1, s3] {
        let field = LocalOperatorField::new(m);
        let t = translation_operator(&lattice, &space, &[1]);
        for x in 0..3 {
            let at_x = embed_local(&field, x, &lattice, &space).unwrap();
            let moved = t.matmul(&at_x).matmul(&t.dagger());
            let expect = embed_local(&field, (x + 1) % 3, &lattice, &space).unwrap();
            assert!(moved.sub(&expect).max_abs_entry() < 1e-13);
        }
    }
}
