//! Correlation regions and the intensive-fluctuation bound.
//!
//! A site x belongs to the correlation region of a reference site y iff some
//! pair of one-site operators at x and y has a normalized connected
//! correlation reaching the threshold at some time in [0, T]. The sup over
//! all one-site operator pairs is a canonical-correlation problem on the
//! traceless operator span (the identity drops out of every delta-subtracted
//! correlation): with Gram blocks G_x, G_y and cross block C_xy on the
//! orthonormal traceless basis, the sup equals the largest singular value of
//! G_x^{-1/2} C_xy G_y^{-1/2}, pseudo-inverting degenerate Gram blocks.
//!
//! States with clustering correlations keep the region's volume at O(1) as
//! the lattice grows, and then the fluctuation of every intensive operator
//! is pinned down by
//!
//!   <delta A^dag delta A>(t) <= (|Omega|/|Lambda| + eps)
//!                               <delta a^dag(y) delta a(y)>(t).

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::{evolve_with, Propagator};
use crate::error::DeclabError;
use crate::hilbert::ManyBodyState;
use crate::linalg;
use crate::operators::{build_intensive, embed_local, traceless_basis, LocalOperatorField};
use crate::sparse::SparseOp;
use crate::Result;

/// Threshold grace for roundoff at the membership comparison.
const MEMBERSHIP_GRACE: f64 = 1e-10;
/// Gram blocks below this absolute scale count as vanishing fluctuations.
const GRAM_CUTOFF: f64 = 1e-13;

/// A closed-system trajectory sampled on a uniform time grid.
#[derive(Debug, Clone)]
pub struct StateTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<ManyBodyState>,
    pub horizon: f64,
}

impl StateTrajectory {
    /// Evolve `state` under `h` over [0, horizon] with `n_points` uniform
    /// samples (endpoints included).
    pub fn closed(
        state: &ManyBodyState,
        h: &SparseOp,
        horizon: f64,
        n_points: usize,
    ) -> Result<Self> {
        if n_points < 2 && horizon > 0.0 {
            return Err(DeclabError::InvalidParameter {
                reason: "trajectory needs at least 2 grid points".into(),
            });
        }
        let propagator = Propagator::new(h, "trajectory")?;
        let n = if horizon == 0.0 { 1 } else { n_points };
        let mut times = Vec::with_capacity(n);
        let mut states = Vec::with_capacity(n);
        for j in 0..n {
            let t = if n == 1 {
                0.0
            } else {
                horizon * j as f64 / (n - 1) as f64
            };
            times.push(t);
            states.push(evolve_with(&propagator, state, t)?);
        }
        Ok(Self {
            times,
            states,
            horizon,
        })
    }
}

/// nu_{T,Lambda} = inf over the grid of |<phi(t)| M |phi(t)>|.
pub fn order_parameter_inf(traj: &StateTrajectory, m: &SparseOp) -> f64 {
    traj.states
        .iter()
        .map(|s| m.expectation(s.amplitudes()).norm())
        .fold(f64::INFINITY, f64::min)
}

/// An epsilon-correlation region.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationRegion {
    pub reference: usize,
    pub horizon: f64,
    pub epsilon: f64,
    pub members: Vec<usize>,
    pub volume: usize,
    pub n_time_points: usize,
    /// Sites whose one-site fluctuations vanish identically on the grid;
    /// they are excluded from the region by convention.
    pub excluded_zero_gram: Vec<usize>,
}

/// Per-site sup of the canonical correlation with a reference site over a
/// trajectory; regions for any threshold are cheap afterwards.
pub struct CorrelationAnalyzer {
    reference: usize,
    sups: Vec<f64>,
    zero_gram_sites: Vec<usize>,
    n_time_points: usize,
    horizon: f64,
}

impl CorrelationAnalyzer {
    pub fn new(traj: &StateTrajectory, reference: usize) -> Result<Self> {
        let lattice = traj.states[0].lattice().clone();
        let space = traj.states[0].space().clone();
        let volume = lattice.volume();
        if reference >= volume {
            return Err(DeclabError::InvalidParameter {
                reason: format!("reference site {reference} outside the lattice"),
            });
        }
        let q = space.uniform_local_dim().ok_or(DeclabError::InvalidParameter {
            reason: "correlation regions need a uniform site-factored space".into(),
        })?;
        let small_basis = traceless_basis(q);
        let embedded: Vec<Vec<SparseOp>> = (0..volume)
            .map(|x| {
                small_basis
                    .iter()
                    .map(|m| {
                        embed_local(&LocalOperatorField::new(m.clone()), x, &lattice, &space)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let b = small_basis.len();
        let mut sups = vec![0.0f64; volume];
        let mut always_zero = vec![true; volume];
        for state in &traj.states {
            let amps = state.amplitudes();
            // delta-subtracted basis vectors per site
            let mut vectors: Vec<Vec<Array1<Complex64>>> = Vec::with_capacity(volume);
            for ops in embedded.iter() {
                let site_vecs: Vec<Array1<Complex64>> = ops
                    .iter()
                    .map(|op| {
                        let v = op.apply(amps);
                        let mean: Complex64 =
                            amps.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                        &v - &amps.mapv(|z| z * mean)
                    })
                    .collect();
                vectors.push(site_vecs);
            }
            let gram = |z: usize| -> Array2<Complex64> {
                let mut g = Array2::zeros((b, b));
                for i in 0..b {
                    for j in 0..b {
                        g[(i, j)] = vectors[z][i]
                            .iter()
                            .zip(vectors[z][j].iter())
                            .map(|(a, c)| a.conj() * c)
                            .sum();
                    }
                }
                g
            };
            let g_ref = gram(reference);
            let g_ref_isqrt = match pseudo_inverse_sqrt(&g_ref)? {
                Some(m) => m,
                None => continue, // reference fluctuations vanish at this time
            };
            for x in 0..volume {
                let g_x = gram(x);
                let g_x_isqrt = match pseudo_inverse_sqrt(&g_x)? {
                    Some(m) => m,
                    None => continue,
                };
                always_zero[x] = false;
                let mut cross = Array2::zeros((b, b));
                for i in 0..b {
                    for j in 0..b {
                        cross[(i, j)] = vectors[x][i]
                            .iter()
                            .zip(vectors[reference][j].iter())
                            .map(|(a, c)| a.conj() * c)
                            .sum();
                    }
                }
                let w = g_x_isqrt.dot(&cross).dot(&g_ref_isqrt);
                let gram_w = linalg::dagger(&w).dot(&w);
                let (_, max) = linalg::eig_range(&gram_w)?;
                sups[x] = sups[x].max(max.max(0.0).sqrt());
            }
        }
        let zero_gram_sites: Vec<usize> = (0..volume).filter(|&x| always_zero[x]).collect();
        Ok(Self {
            reference,
            sups,
            zero_gram_sites,
            n_time_points: traj.times.len(),
            horizon: traj.horizon,
        })
    }

    /// Sup over grid times and operator pairs of the normalized correlation
    /// between `site` and the reference.
    pub fn site_sup(&self, site: usize) -> f64 {
        self.sups[site]
    }

    /// Materialize the region for a threshold; membership is monotone in
    /// epsilon by construction.
    pub fn region(&self, epsilon: f64) -> Result<CorrelationRegion> {
        if !epsilon.is_finite() || epsilon <= 0.0 || epsilon > 1.0 {
            return Err(DeclabError::InvalidParameter {
                reason: format!("epsilon must lie in (0, 1], got {epsilon}"),
            });
        }
        let members: Vec<usize> = (0..self.sups.len())
            .filter(|&x| self.sups[x] >= epsilon - MEMBERSHIP_GRACE)
            .collect();
        Ok(CorrelationRegion {
            reference: self.reference,
            horizon: self.horizon,
            epsilon,
            volume: members.len(),
            members,
            n_time_points: self.n_time_points,
            excluded_zero_gram: self.zero_gram_sites.clone(),
        })
    }
}

/// Compute the region of `reference` at threshold `epsilon` over a
/// trajectory (`correlation_region`).
pub fn correlation_region(
    traj: &StateTrajectory,
    reference: usize,
    epsilon: f64,
) -> Result<CorrelationRegion> {
    CorrelationAnalyzer::new(traj, reference)?.region(epsilon)
}

/// Grid-certified region: the membership decisions must not change when the
/// time grid is refined twofold. Returns the fine region and the certificate
/// flag.
pub fn certified_region(
    state: &ManyBodyState,
    h: &SparseOp,
    reference: usize,
    epsilon: f64,
    horizon: f64,
    n_points: usize,
) -> Result<(CorrelationRegion, bool)> {
    let coarse_traj = StateTrajectory::closed(state, h, horizon, n_points)?;
    let coarse = correlation_region(&coarse_traj, reference, epsilon)?;
    let fine_traj =
        StateTrajectory::closed(state, h, horizon, 2 * n_points.saturating_sub(1) + 1)?;
    let fine = correlation_region(&fine_traj, reference, epsilon)?;
    let stable = coarse.members == fine.members;
    Ok((fine, stable))
}

/// (G)^{-1/2} on the support of the Hermitian PSD matrix G; `None` when the
/// whole block vanishes.
fn pseudo_inverse_sqrt(g: &Array2<Complex64>) -> Result<Option<Array2<Complex64>>> {
    let (vals, vecs) = linalg::eigh(g)?;
    let max = vals.iter().cloned().fold(0.0, f64::max);
    if max <= GRAM_CUTOFF {
        return Ok(None);
    }
    let cutoff = 1e-12 * max;
    let n = vals.len();
    let mut out = Array2::zeros((n, n));
    for mu in 0..n {
        if vals[mu] > cutoff {
            let w = Complex64::new(1.0 / vals[mu].sqrt(), 0.0);
            let col = vecs.column(mu);
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += col[i] * w * col[j].conj();
                }
            }
        }
    }
    Ok(Some(out))
}

/// Per-time check of the intensive-fluctuation bound.
#[derive(Debug, Clone, Serialize)]
pub struct FluctuationBoundReport {
    pub times: Vec<f64>,
    /// <delta A^dag delta A> on the trajectory.
    pub lhs: Vec<f64>,
    /// (|Omega|/|Lambda| + eps) <delta a^dag(y) delta a(y)>.
    pub rhs: Vec<f64>,
    pub holds: bool,
    pub max_violation: f64,
    /// |Omega|/|Lambda| + eps: small only for clustering states.
    pub bound_ratio: f64,
}

/// Verify the intensive-fluctuation bound along a trajectory
/// (`intensive_fluctuation_bound`). The region must come from the same state
/// and horizon.
pub fn intensive_fluctuation_bound(
    traj: &StateTrajectory,
    op: &LocalOperatorField,
    region: &CorrelationRegion,
) -> Result<FluctuationBoundReport> {
    let lattice = traj.states[0].lattice().clone();
    let space = traj.states[0].space().clone();
    let intensive = build_intensive(op, &lattice, &space)?;
    let one_site = embed_local(op, region.reference, &lattice, &space)?;
    let ratio = region.volume as f64 / lattice.volume() as f64 + region.epsilon;
    let mut lhs = Vec::with_capacity(traj.states.len());
    let mut rhs = Vec::with_capacity(traj.states.len());
    let mut max_violation: f64 = f64::NEG_INFINITY;
    for state in &traj.states {
        let a = super::fluctuation::operator_fluctuation(state, &intensive).normal;
        let site = super::fluctuation::operator_fluctuation(state, &one_site).normal;
        let bound = ratio * site;
        max_violation = max_violation.max(a - bound);
        lhs.push(a);
        rhs.push(bound);
    }
    Ok(FluctuationBoundReport {
        times: traj.times.clone(),
        lhs,
        rhs,
        holds: max_violation <= 1e-10,
        max_violation,
        bound_ratio: ratio,
    })
}
