//! Spatial correlation kernels f(x - y) of the environment.
//!
//! The environment enters only through its correlation data: a separable
//! space-time model <b^dag(x) b(y, s)> = f(x - y) h(s) whose half-integrated
//! time weight is folded into a single scalar. Physicality requires the
//! kernel to be positive semidefinite as a function on the lattice, which is
//! checked by Fourier nonnegativity on the momentum grid.

use serde::{Deserialize, Serialize};

use crate::error::DeclabError;
use crate::lattice::LatticeSpec;
use crate::Result;

/// Spatial kernel shapes. `Tabulated` accepts user data indexed by the
/// row-major wrapped displacement; `validate = false` skips the Fourier
/// nonnegativity gate so downstream positivity certificates can be exercised
/// against deliberately unphysical input.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Kernel {
    /// f = 1 everywhere: infinite correlation range.
    Constant,
    /// f(r) = exp(-r / xi) with the minimum-image distance r.
    Exponential { xi: f64 },
    /// f(r) = 1 at r = 0, else 0: zero correlation range.
    Delta,
    /// Explicit table f(dx) over the displacement grid.
    Tabulated {
        values: Vec<f64>,
        #[serde(default = "default_true")]
        validate: bool,
    },
}

fn default_true() -> bool {
    true
}

impl Kernel {
    /// Kernel value at the displacement between two flat site indices.
    pub fn evaluate(&self, lattice: &LatticeSpec, x: usize, y: usize) -> f64 {
        match self {
            Kernel::Constant => 1.0,
            Kernel::Exponential { xi } => {
                (-lattice.min_image_distance(x, y) / xi).exp()
            }
            Kernel::Delta => {
                if x == y {
                    1.0
                } else {
                    0.0
                }
            }
            Kernel::Tabulated { values, .. } => {
                let dx = wrapped_displacement(lattice, x, y);
                values[dx]
            }
        }
    }

    /// Correlation range xi_E; the correlation volume is xi_E^d clamped to
    /// the lattice.
    pub fn correlation_length(&self, lattice: &LatticeSpec) -> f64 {
        match self {
            Kernel::Constant => lattice.linear_size() as f64,
            Kernel::Exponential { xi } => xi.min(lattice.linear_size() as f64).max(1.0),
            Kernel::Delta => 1.0,
            Kernel::Tabulated { values, .. } => {
                // effective range from the normalized kernel mass around 0
                let f0 = values[0].abs().max(f64::MIN_POSITIVE);
                let mass: f64 = values.iter().map(|v| v.abs()).sum::<f64>() / f0;
                mass.powf(1.0 / lattice.dimension() as f64)
                    .clamp(1.0, lattice.linear_size() as f64)
            }
        }
    }

    pub fn wants_validation(&self) -> bool {
        match self {
            Kernel::Tabulated { validate, .. } => *validate,
            _ => true,
        }
    }

    /// Check basic shape requirements and Fourier nonnegativity on the grid.
    ///
    /// The discrete transform f_hat(k) = sum_dx f(dx) e^{-ik.dx} must be real
    /// (even kernel) and nonnegative up to roundoff, otherwise some
    /// correlation matrix built from this kernel would fail positivity.
    pub fn validate(&self, lattice: &LatticeSpec) -> Result<()> {
        if let Kernel::Exponential { xi } = self {
            if !xi.is_finite() || *xi <= 0.0 {
                return Err(DeclabError::InvalidParameter {
                    reason: "exponential kernel needs xi > 0".into(),
                });
            }
        }
        if let Kernel::Tabulated { values, .. } = self {
            if values.len() != lattice.volume() {
                return Err(DeclabError::InvalidParameter {
                    reason: format!(
                        "tabulated kernel has {} entries, lattice has {} displacements",
                        values.len(),
                        lattice.volume()
                    ),
                });
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(DeclabError::InvalidParameter {
                    reason: "tabulated kernel contains non-finite values".into(),
                });
            }
            // evenness f(dx) = f(-dx) keeps the transform real
            for dx in 0..values.len() {
                let neg = lattice.negate_momentum(dx); // same index map for -dx
                if (values[dx] - values[neg]).abs() > 1e-12 {
                    return Err(DeclabError::InvalidParameter {
                        reason: format!("tabulated kernel is not even at displacement index {dx}"),
                    });
                }
            }
        }
        if !self.wants_validation() {
            return Ok(());
        }
        let spectrum = self.fourier_spectrum(lattice);
        let max = spectrum.iter().cloned().fold(0.0, f64::max);
        let floor = -1e-10 * max.max(1.0);
        for (k, &v) in spectrum.iter().enumerate() {
            if v < floor {
                return Err(DeclabError::KernelNotPositive { index: k, value: v });
            }
        }
        Ok(())
    }

    /// Real part of the grid transform sum_dx f(dx) e^{-ik.dx} per momentum.
    pub fn fourier_spectrum(&self, lattice: &LatticeSpec) -> Vec<f64> {
        let volume = lattice.volume();
        (0..volume)
            .map(|k| {
                (0..volume)
                    .map(|dx| {
                        // phase(k, dx).conj() = e^{-ik.dx}
                        let ph = lattice.phase(k, dx).conj();
                        self.evaluate(lattice, dx, 0) * ph.re
                    })
                    .sum()
            })
            .collect()
    }
}

/// Row-major index of the componentwise wrapped displacement x - y.
fn wrapped_displacement(lattice: &LatticeSpec, x: usize, y: usize) -> usize {
    let cx = lattice.site_coords(x);
    let cy = lattice.site_coords(y);
    let l = lattice.linear_size();
    let d: Vec<usize> = cx
        .iter()
        .zip(&cy)
        .map(|(&a, &b)| (a + l - b) % l)
        .collect();
    lattice.site_index(&d)
}
