//! Seeded random inputs for the property suites: translation-invariant
//! states, Fourier-nonnegative kernels, and contact regions. Everything is a
//! pure function of its seed.

use ndarray::Array1;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::environment::{ContactRegion, Kernel};
use crate::hilbert::{translation_permutation, HilbertSpace, ManyBodyState};
use crate::lattice::LatticeSpec;
use crate::Result;

/// Random superposition of k = 0 translation-orbit states: one complex
/// Gaussian coefficient per translation orbit of the computational basis.
/// The result satisfies T |psi> = |psi> exactly for every lattice shift.
pub fn translation_invariant_state(
    lattice: &LatticeSpec,
    space: &HilbertSpace,
    seed: u64,
) -> Result<ManyBodyState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = space.dim();
    let unit_perms: Vec<Vec<usize>> = (0..lattice.dimension())
        .map(|mu| {
            let mut shift = vec![0usize; lattice.dimension()];
            shift[mu] = 1;
            translation_permutation(lattice, space, &shift)
        })
        .collect();
    let mut visited = vec![false; dim];
    let mut amps: Array1<Complex64> = Array1::zeros(dim);
    for n in 0..dim {
        if visited[n] {
            continue;
        }
        let mut orbit = vec![n];
        visited[n] = true;
        let mut stack = vec![n];
        while let Some(m) = stack.pop() {
            for perm in &unit_perms {
                let m2 = perm[m];
                if !visited[m2] {
                    visited[m2] = true;
                    orbit.push(m2);
                    stack.push(m2);
                }
            }
        }
        let z = Complex64::new(gaussian(&mut rng), gaussian(&mut rng));
        let w = z / Complex64::new((orbit.len() as f64).sqrt(), 0.0);
        for &m in &orbit {
            amps[m] = w;
        }
    }
    ManyBodyState::normalized(amps, space.clone(), lattice.clone())
}

/// Random kernel with a manifestly nonnegative Fourier spectrum: draw
/// s_hat(k) >= 0 symmetrized under k -> -k, inverse transform to real space.
pub fn fourier_nonneg_kernel(lattice: &LatticeSpec, seed: u64) -> Kernel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let volume = lattice.volume();
    let mut spectrum = vec![0.0f64; volume];
    for k in 0..volume {
        let neg = lattice.negate_momentum(k);
        if neg < k {
            spectrum[k] = spectrum[neg];
        } else {
            spectrum[k] = rng.gen::<f64>();
        }
    }
    let values: Vec<f64> = (0..volume)
        .map(|dx| {
            let mut acc = 0.0;
            for (k, s) in spectrum.iter().enumerate() {
                acc += s * lattice.phase(k, dx).re;
            }
            acc / volume as f64
        })
        .collect();
    Kernel::Tabulated {
        values,
        validate: true,
    }
}

/// Random nonempty contact region (each site kept with probability 1/2).
pub fn random_contact(lattice: &LatticeSpec, seed: u64) -> ContactRegion {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sites: Vec<Vec<usize>> = (0..lattice.volume())
        .filter(|_| rng.gen::<bool>())
        .map(|i| lattice.site_coords(i))
        .collect();
    if sites.is_empty() {
        sites.push(lattice.site_coords(rng.gen_range(0..lattice.volume())));
    }
    ContactRegion::Sites(sites)
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::translation_operator;

    #[test]
    fn states_are_exactly_invariant_and_seeded() {
        let lattice = LatticeSpec::new(1, 4).unwrap();
        let space = HilbertSpace::uniform(4, 2).unwrap();
        let st = translation_invariant_state(&lattice, &space, 7).unwrap();
        let t = translation_operator(&lattice, &space, &[1]);
        let moved = t.apply(st.amplitudes());
        let overlap: Complex64 = st
            .amplitudes()
            .iter()
            .zip(moved.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert!((overlap - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        let again = translation_invariant_state(&lattice, &space, 7).unwrap();
        assert!((st.overlap(&again).norm() - 1.0).abs() < 1e-14);
        let other = translation_invariant_state(&lattice, &space, 8).unwrap();
        assert!(st.overlap(&other).norm() < 0.999);
    }

    #[test]
    fn random_kernels_validate() {
        let lattice = LatticeSpec::new(1, 6).unwrap();
        for seed in 0..20 {
            let kernel = fourier_nonneg_kernel(&lattice, seed);
            kernel.validate(&lattice).unwrap();
        }
    }

    #[test]
    fn contacts_are_never_empty() {
        let lattice = LatticeSpec::new(1, 5).unwrap();
        for seed in 0..20 {
            let region = random_contact(&lattice, seed);
            assert!(!region.resolve(&lattice).unwrap().is_empty());
        }
    }
}
