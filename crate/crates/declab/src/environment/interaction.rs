//! Local system-environment coupling specifications.
//!
//! H_int = lambda sum_{x in contact} a(x) (x) b(x), in momentum space
//! sum_k a_k (x) b_k. The system side enters through the full-lattice
//! momentum operators a_k; the environment side only through the g matrix of
//! a channel's [`EnvCorrelation`] (the contact restriction lives in b_k and
//! hence in g). Multi-term couplings are a list of channels whose
//! dissipators add independently; cross-channel correlations are taken to
//! vanish, and bath operators are mean zero by construction of the
//! correlation models.

use crate::environment::correlation::EnvCorrelation;
use crate::error::DeclabError;
use crate::lattice::LatticeSpec;
use crate::linalg;
use crate::operators::{momentum_transform_grid, LocalOperatorField};
use crate::hilbert::HilbertSpace;
use crate::sparse::SparseOp;
use crate::Result;

/// One coupling term: the system's momentum operators paired with the
/// channel's environment correlation matrix.
#[derive(Debug, Clone)]
pub struct InteractionChannel {
    pub label: String,
    /// a_k for every flat momentum-grid index.
    pub momentum_ops: Vec<SparseOp>,
    /// Operator norm of the one-site coupling operator (stability heuristic).
    pub site_norm: f64,
    pub correlation: EnvCorrelation,
}

/// The full coupling: dimensionless strength plus one or more channels.
#[derive(Debug, Clone)]
pub struct InteractionSpec {
    coupling: f64,
    channels: Vec<InteractionChannel>,
}

impl InteractionSpec {
    pub fn from_channels(coupling: f64, channels: Vec<InteractionChannel>) -> Result<Self> {
        if !coupling.is_finite() || coupling < 0.0 {
            return Err(DeclabError::InvalidParameter {
                reason: "coupling lambda must be finite and nonnegative".into(),
            });
        }
        if channels.is_empty() {
            return Err(DeclabError::InvalidParameter {
                reason: "interaction needs at least one channel".into(),
            });
        }
        let volume = channels[0].correlation.lattice().volume();
        for ch in &channels {
            if ch.momentum_ops.len() != volume {
                return Err(DeclabError::InvalidParameter {
                    reason: format!(
                        "channel '{}' has {} momentum operators, grid has {volume}",
                        ch.label,
                        ch.momentum_ops.len()
                    ),
                });
            }
        }
        Ok(Self { coupling, channels })
    }

    /// Single-channel coupling through a one-site operator field.
    pub fn single_site(
        coupling: f64,
        op: &LocalOperatorField,
        lattice: &LatticeSpec,
        space: &HilbertSpace,
        correlation: EnvCorrelation,
    ) -> Result<Self> {
        let momentum_ops: Vec<SparseOp> = (0..lattice.volume())
            .map(|k| momentum_transform_grid(op, k, lattice, space))
            .collect::<Result<_>>()?;
        let site_norm = linalg::operator_norm(op.matrix());
        Self::from_channels(
            coupling,
            vec![InteractionChannel {
                label: "site".into(),
                momentum_ops,
                site_norm,
                correlation,
            }],
        )
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// lambda^2 / hbar^2 with hbar = 1: the explicit rate prefactor carried
    /// by every report.
    pub fn rate_prefactor(&self) -> f64 {
        self.coupling * self.coupling
    }

    pub fn channels(&self) -> &[InteractionChannel] {
        &self.channels
    }

    /// Shared contact region (channels may differ only in kernels).
    pub fn contact(&self) -> &[usize] {
        self.channels[0].correlation.contact()
    }

    /// Sum over channels of g00.
    pub fn total_g00(&self) -> f64 {
        self.channels.iter().map(|c| c.correlation.g00()).sum()
    }

    pub fn with_coupling(&self, coupling: f64) -> Result<Self> {
        Self::from_channels(coupling, self.channels.clone())
    }
}
