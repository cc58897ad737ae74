//! Fixed-step RK4 integration of the Markovian master equation
//!
//!   d rho/dt = -i [H, rho]
//!              + lambda^2 sum_{k1 k2} g_{k1 k2} (2 a_{k2} rho a_{k1}^dag
//!                - {a_{k1}^dag a_{k2}, rho}),
//!
//! with hbar = 1. Each channel's g matrix is eigendecomposed once,
//! g = sum_mu gamma_mu u_mu u_mu^dag, turning the double momentum sum into
//! canonical jump operators L_mu = sum_k conj(u_mu(k)) a_k with rates
//! lambda^2 gamma_mu. No superoperator matrix is ever formed; the right-hand
//! side is applied with sparse-dense products at O(dim^2) memory.

use ndarray::Array2;
use num_complex::Complex64;

use crate::dynamics::density::DensityMatrix;
use crate::environment::InteractionSpec;
use crate::error::DeclabError;
use crate::linalg;
use crate::sparse::SparseOp;
use crate::tol;
use crate::Result;

struct JumpOperator {
    rate: f64,
    op: SparseOp,
    dagger: SparseOp,
    /// L^dag L, precomputed.
    normal: SparseOp,
}

/// Prepared right-hand side of the master equation.
pub struct LindbladGenerator {
    hamiltonian: SparseOp,
    jumps: Vec<JumpOperator>,
    /// Stability step bound 0.1 min(1/||H||, 1/(lambda^2 ||g|| ||a||^2)).
    stability_dt: f64,
}

/// y += a * x over raw slices (keeps the RK4 loop allocation free).
#[inline]
fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

impl LindbladGenerator {
    pub fn new(h: &SparseOp, interaction: &InteractionSpec) -> Result<Self> {
        let dim = h.dim();
        let lambda_sq = interaction.rate_prefactor();
        let mut jumps = Vec::new();
        let mut dissipation_scale = 0.0;
        for channel in interaction.channels() {
            let corr = &channel.correlation;
            if !corr.is_positive() {
                return Err(DeclabError::InvalidParameter {
                    reason: format!(
                        "channel '{}' correlation matrix is not positive semidefinite (min eig {:.3e})",
                        channel.label,
                        corr.min_eig()
                    ),
                });
            }
            let (vals, vecs) = linalg::eigh(corr.matrix())?;
            let max = vals.iter().cloned().fold(0.0, f64::max);
            let cutoff = 1e-14 * max.max(1.0);
            for (mu, &gamma) in vals.iter().enumerate() {
                if gamma <= cutoff {
                    continue;
                }
                let weights: Vec<(Complex64, &SparseOp)> = channel
                    .momentum_ops
                    .iter()
                    .enumerate()
                    .map(|(k, op)| (vecs[(k, mu)].conj(), op))
                    .collect();
                let op = SparseOp::weighted_sum(dim, &weights);
                let dagger = op.dagger();
                let normal = dagger.matmul(&op);
                jumps.push(JumpOperator {
                    rate: lambda_sq * gamma,
                    op,
                    dagger,
                    normal,
                });
            }
            dissipation_scale +=
                lambda_sq * max * channel.site_norm * channel.site_norm;
        }
        // infinity-norm bound on the Hamiltonian spectral radius
        let mut row_sums = vec![0.0f64; dim];
        for (r, _, v) in h.entries() {
            row_sums[r] += v.norm();
        }
        let h_norm = row_sums.iter().cloned().fold(0.0, f64::max);
        let mut bound = f64::INFINITY;
        if h_norm > 0.0 {
            bound = bound.min(1.0 / h_norm);
        }
        if dissipation_scale > 0.0 {
            bound = bound.min(1.0 / dissipation_scale);
        }
        Ok(Self {
            hamiltonian: h.clone(),
            jumps,
            stability_dt: 0.1 * bound,
        })
    }

    pub fn stability_dt(&self) -> f64 {
        self.stability_dt
    }

    pub fn n_jumps(&self) -> usize {
        self.jumps.len()
    }

    /// d rho / dt (allocating convenience wrapper around `rhs_into`).
    pub fn rhs(&self, rho: &Array2<Complex64>) -> Array2<Complex64> {
        let mut out = Array2::zeros(rho.raw_dim());
        let mut t1 = Array2::zeros(rho.raw_dim());
        let mut t2 = Array2::zeros(rho.raw_dim());
        self.rhs_into(rho, &mut out, &mut t1, &mut t2);
        out
    }

    /// out = d rho / dt using the two scratch buffers, no allocations.
    fn rhs_into(
        &self,
        rho: &Array2<Complex64>,
        out: &mut Array2<Complex64>,
        t1: &mut Array2<Complex64>,
        t2: &mut Array2<Complex64>,
    ) {
        let minus_i = Complex64::new(0.0, -1.0);
        self.hamiltonian.mul_dense_into(rho, t1);
        self.hamiltonian.dense_mul_into(rho, t2);
        {
            let o = out.as_slice_mut().expect("contiguous");
            let a = t1.as_slice().expect("contiguous");
            let b = t2.as_slice().expect("contiguous");
            for j in 0..o.len() {
                o[j] = minus_i * (a[j] - b[j]);
            }
        }
        for jump in &self.jumps {
            let rate = Complex64::new(jump.rate, 0.0);
            jump.op.mul_dense_into(rho, t1); // L rho
            jump.dagger.dense_mul_into(t1, t2); // L rho L^dag
            axpy(
                out.as_slice_mut().expect("contiguous"),
                rate * 2.0,
                t2.as_slice().expect("contiguous"),
            );
            jump.normal.mul_dense_into(rho, t1); // L^dag L rho
            axpy(
                out.as_slice_mut().expect("contiguous"),
                -rate,
                t1.as_slice().expect("contiguous"),
            );
            jump.normal.dense_mul_into(rho, t1); // rho L^dag L
            axpy(
                out.as_slice_mut().expect("contiguous"),
                -rate,
                t1.as_slice().expect("contiguous"),
            );
        }
    }

    /// Classical fixed-step RK4 update (allocating convenience wrapper).
    pub fn step(&self, rho: &Array2<Complex64>, dt: f64) -> Array2<Complex64> {
        let mut stepper = LindbladStepper::new(self, rho.nrows());
        let mut next = rho.clone();
        stepper.step_inplace(&mut next, dt);
        next
    }

    /// Reusable stepping buffers for a propagation run.
    pub fn stepper(&self, dim: usize) -> LindbladStepper<'_> {
        LindbladStepper::new(self, dim)
    }
}

/// RK4 work buffers bound to one generator.
pub struct LindbladStepper<'a> {
    generator: &'a LindbladGenerator,
    k: [Array2<Complex64>; 4],
    stage: Array2<Complex64>,
    t1: Array2<Complex64>,
    t2: Array2<Complex64>,
}

impl<'a> LindbladStepper<'a> {
    fn new(generator: &'a LindbladGenerator, dim: usize) -> Self {
        let zero = || Array2::zeros((dim, dim));
        Self {
            generator,
            k: [zero(), zero(), zero(), zero()],
            stage: zero(),
            t1: zero(),
            t2: zero(),
        }
    }

    /// Advance rho by one RK4 step in place.
    pub fn step_inplace(&mut self, rho: &mut Array2<Complex64>, dt: f64) {
        let g = self.generator;
        let half = Complex64::new(dt / 2.0, 0.0);
        let full = Complex64::new(dt, 0.0);
        g.rhs_into(rho, &mut self.k[0], &mut self.t1, &mut self.t2);
        stage_from(&mut self.stage, rho, half, &self.k[0]);
        g.rhs_into(&self.stage, &mut self.k[1], &mut self.t1, &mut self.t2);
        stage_from(&mut self.stage, rho, half, &self.k[1]);
        g.rhs_into(&self.stage, &mut self.k[2], &mut self.t1, &mut self.t2);
        stage_from(&mut self.stage, rho, full, &self.k[2]);
        g.rhs_into(&self.stage, &mut self.k[3], &mut self.t1, &mut self.t2);
        let w = Complex64::new(dt / 6.0, 0.0);
        let r = rho.as_slice_mut().expect("contiguous");
        let (k1, k2, k3, k4) = (
            self.k[0].as_slice().expect("contiguous"),
            self.k[1].as_slice().expect("contiguous"),
            self.k[2].as_slice().expect("contiguous"),
            self.k[3].as_slice().expect("contiguous"),
        );
        for j in 0..r.len() {
            r[j] += w * (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]);
        }
    }
}

/// Max entry of |M - M^dag| without allocating.
fn hermiticity_in_place(m: &Array2<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// stage = base + a * k.
fn stage_from(
    stage: &mut Array2<Complex64>,
    base: &Array2<Complex64>,
    a: Complex64,
    k: &Array2<Complex64>,
) {
    let s = stage.as_slice_mut().expect("contiguous");
    let b = base.as_slice().expect("contiguous");
    let kk = k.as_slice().expect("contiguous");
    for j in 0..s.len() {
        s[j] = b[j] + a * kk[j];
    }
}

/// One RK4 step of the master equation (`lindblad_step`). Enforces the
/// stability bound, renormalizes the trace only when the drift exceeds the
/// threshold, and aborts on positivity violation with step-size advice.
pub fn lindblad_step(
    rho: &DensityMatrix,
    h: &SparseOp,
    interaction: &InteractionSpec,
    dt: f64,
) -> Result<DensityMatrix> {
    let generator = LindbladGenerator::new(h, interaction)?;
    if dt > generator.stability_dt() {
        return Err(DeclabError::StepTooLarge {
            dt,
            bound: generator.stability_dt(),
            suggested_steps: (dt / generator.stability_dt()).ceil() as usize,
        });
    }
    let mut next = generator.step(rho.matrix(), dt);
    let trace: Complex64 = next.diag().iter().sum();
    let drift = (trace.re - 1.0).abs().max(trace.im.abs());
    if drift > tol::TRACE_RENORM {
        log::debug!("renormalizing trace after drift {drift:.3e}");
        next.mapv_inplace(|z| z / trace);
    }
    let out = DensityMatrix::from_parts_unchecked(next, rho.lattice().clone(), rho.time() + dt);
    let min_eig = out.min_eigenvalue()?;
    if min_eig < tol::DENSITY_MIN_EIG {
        return Err(DeclabError::PositivityViolation {
            min_eig,
            dt,
            suggested_dt: dt / 2.0,
        });
    }
    Ok(out)
}

/// One sampled point of a trajectory, matching the CSV export columns.
#[derive(Debug, Clone)]
pub struct TrajectoryPoint {
    pub time: f64,
    pub s_lin: f64,
    pub trace: f64,
    pub min_eig: f64,
    pub order_mean: Complex64,
    pub order_fluct: f64,
}

/// A propagated trajectory with its integrator health counters.
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub final_state: DensityMatrix,
    pub max_trace_drift: f64,
    pub renormalizations: usize,
    pub max_hermiticity_dev: f64,
}

impl Trajectory {
    pub fn final_s_lin(&self) -> f64 {
        self.points.last().map(|p| p.s_lin).unwrap_or(0.0)
    }

    /// CSV with columns (t, S_lin, tr rho, min_eig rho, order mean, order fluctuation).
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("t,s_lin,trace,min_eig,order_mean_re,order_mean_im,order_fluct\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                p.time, p.s_lin, p.trace, p.min_eig, p.order_mean.re, p.order_mean.im, p.order_fluct
            ));
        }
        out
    }
}

/// Propagate over [0, t_final] with `n_steps` fixed RK4 steps, sampling
/// roughly `n_samples` points (`propagate`). Invariants are checked at every
/// sample: trace drift, Hermiticity, and min eigenvalue >= -1e-6.
pub fn propagate(
    rho0: &DensityMatrix,
    h: &SparseOp,
    interaction: &InteractionSpec,
    t_final: f64,
    n_steps: usize,
    n_samples: usize,
    order_parameter: Option<&SparseOp>,
) -> Result<Trajectory> {
    if n_steps < 10 {
        return Err(DeclabError::InvalidParameter {
            reason: "propagation needs n_steps >= 10".into(),
        });
    }
    if rho0.dim() > tol::DENSE_EVOLUTION_CAP {
        return Err(DeclabError::DimensionOverflow {
            requested: rho0.dim() as u128,
            cap: tol::DENSE_EVOLUTION_CAP,
            max_feasible_l: 0,
        });
    }
    let generator = LindbladGenerator::new(h, interaction)?;
    let dt = t_final / n_steps as f64;
    if t_final > 0.0 && dt > generator.stability_dt() {
        return Err(DeclabError::StepTooLarge {
            dt,
            bound: generator.stability_dt(),
            suggested_steps: (t_final / generator.stability_dt()).ceil() as usize,
        });
    }
    let m_sq = order_parameter.map(|m| m.dagger().matmul(m));
    let sample_every = (n_steps / n_samples.clamp(1, n_steps)).max(1);

    let mut rho = rho0.matrix().clone();
    let mut max_trace_drift: f64 = 0.0;
    let mut renormalizations = 0usize;
    let mut max_herm: f64 = 0.0;
    let mut points = Vec::new();

    let record =
        |rho: &Array2<Complex64>, t: f64, points: &mut Vec<TrajectoryPoint>| -> Result<()> {
            let dm = DensityMatrix::from_parts_unchecked(rho.clone(), rho0.lattice().clone(), t);
            let min_eig = dm.min_eigenvalue()?;
            if min_eig < tol::DENSITY_MIN_EIG {
                return Err(DeclabError::PositivityViolation {
                    min_eig,
                    dt,
                    suggested_dt: dt / 2.0,
                });
            }
            let (mean, fluct) = match (&order_parameter, &m_sq) {
                (Some(m), Some(msq)) => {
                    let mean = dm.expectation(m);
                    let fluct = dm.expectation(msq).re - mean.norm_sqr();
                    (mean, fluct)
                }
                _ => (Complex64::ZERO, 0.0),
            };
            points.push(TrajectoryPoint {
                time: t,
                s_lin: (1.0 - dm.purity()).max(0.0),
                trace: dm.trace().re,
                min_eig,
                order_mean: mean,
                order_fluct: fluct,
            });
            Ok(())
        };

    record(&rho, 0.0, &mut points)?;
    let mut stepper = generator.stepper(rho.nrows());
    for step in 1..=n_steps {
        stepper.step_inplace(&mut rho, dt);
        let trace: Complex64 = rho.diag().iter().sum();
        let drift = (trace.re - 1.0).abs().max(trace.im.abs());
        max_trace_drift = max_trace_drift.max(drift);
        if drift > tol::TRACE_RENORM {
            log::debug!("step {step}: renormalizing trace after drift {drift:.3e}");
            rho.mapv_inplace(|z| z / trace);
            renormalizations += 1;
        }
        let herm = hermiticity_in_place(&rho);
        max_herm = max_herm.max(herm);
        if step % sample_every == 0 || step == n_steps {
            record(&rho, step as f64 * dt, &mut points)?;
        }
    }
    let final_state =
        DensityMatrix::from_parts_unchecked(rho, rho0.lattice().clone(), t_final);
    Ok(Trajectory {
        points,
        final_state,
        max_trace_drift,
        renormalizations,
        max_hermiticity_dev: max_herm,
    })
}

/// Convergence gate: propagate with `n_steps` and with half as many, and
/// report the relative change of the final linear entropy.
pub fn propagation_convergence(
    rho0: &DensityMatrix,
    h: &SparseOp,
    interaction: &InteractionSpec,
    t_final: f64,
    n_steps: usize,
    order_parameter: Option<&SparseOp>,
) -> Result<(Trajectory, f64)> {
    let full = propagate(rho0, h, interaction, t_final, n_steps, 32, order_parameter)?;
    let half = propagate(
        rho0,
        h,
        interaction,
        t_final,
        (n_steps / 2).max(10),
        2,
        order_parameter,
    )?;
    let a = full.final_s_lin();
    let b = half.final_s_lin();
    let rel = (a - b).abs() / a.abs().max(1e-14);
    Ok((full, rel))
}
