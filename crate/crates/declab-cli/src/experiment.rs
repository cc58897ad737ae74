//! The per-point experiment pipeline: build the model and its vacua, build
//! the environment, compute entropy series and rates, run the certificates,
//! and optionally propagate the full master equation.

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::Serialize;

use declab::dynamics::{energy_spread, propagation_convergence, DensityMatrix};
use declab::environment::{EnvCorrelation, InteractionSpec, Kernel};
use declab::dynamics::Propagator;
use declab::fragility::{
    certified_region, difference_bound_certificate, first_order_entropy_with,
    first_order_series, intensive_fluctuation_bound, operator_fluctuation,
    rate_bound_certificate, rate_extract, DifferenceBoundParams, EntropyReport,
    StateTrajectory,
};
use declab::models::boson::FreeBosonModel;
use declab::models::ising::IsingModel;
use declab::models::VacuumPair;
use declab::operators::translation_operator;
use declab::sparse::SparseOp;

use crate::config::{ChannelMode, ExperimentConfig, ModelKind};

/// Which failure category an outcome belongs to, for exit-code mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeKind {
    Certificate,
    Convergence,
}

/// One named check with its full serialized record.
#[derive(Debug, Clone, Serialize)]
pub struct NamedOutcome {
    pub name: String,
    pub kind: OutcomeKind,
    /// None = preconditions unmet (not claimed either way).
    pub pass: Option<bool>,
    pub record: serde_json::Value,
}

/// Everything a single sweep point produces.
#[derive(Debug, Clone, Serialize)]
pub struct PointResult {
    pub point: usize,
    pub linear_size: usize,
    pub volume: usize,
    pub contact_size: usize,
    pub xi_e: f64,
    pub lambda: f64,
    pub g00: f64,
    pub gamma_afv: f64,
    pub gamma_ppv: f64,
    /// None when the PPV rate sits at roundoff (the Ising PPV rate is
    /// exactly zero, so the ratio is undefined there).
    pub gamma_ratio: Option<f64>,
    pub delta_gamma: f64,
    pub fluct_afv: f64,
    pub fluct_ppv: f64,
    pub fluct_ppv_symmetric: f64,
    pub s1_afv_final: f64,
    pub s1_ppv_final: f64,
    pub region_volume_ppv: Option<usize>,
    pub outcomes: Vec<NamedOutcome>,
    pub certificates_passed: bool,
    pub warnings: Vec<String>,
    /// Measured S_lin / S1 convention constant when dynamics ran.
    pub convention_constant: Option<f64>,
    /// Entropy time series with the fitted rate and its bound.
    pub afv_entropy_report: EntropyReport,
    #[serde(skip)]
    pub trajectory_csv: Option<String>,
    #[serde(skip)]
    pub g_matrix_csv: Option<String>,
}

/// A built model with its reference vacua, behind one interface.
pub enum BuiltModel {
    Ising {
        model: IsingModel,
        pair: VacuumPair,
    },
    Boson {
        model: FreeBosonModel,
        pair: VacuumPair,
    },
}

impl BuiltModel {
    pub fn build(config: &ExperimentConfig) -> Result<Self> {
        match config.model.kind {
            ModelKind::Ising => {
                let model = IsingModel::with_transverse_field(
                    config.model.linear_size,
                    config.model.dimension,
                    config.model.coupling,
                    config.model.transverse_field,
                )?;
                let pair = if config.model.transverse_field == 0.0 {
                    model.vacuum_pair()?
                } else {
                    model.ground_doublet_pair()?
                };
                Ok(BuiltModel::Ising { model, pair })
            }
            ModelKind::FreeBoson => {
                let n_max = config.model.n_max.expect("validated");
                let model = match config.model.zero_mode_n_max {
                    Some(deep) => FreeBosonModel::with_mode_cutoffs(
                        config.model.linear_size,
                        config.model.dimension,
                        deep,
                        n_max,
                    )?,
                    None => FreeBosonModel::new(
                        config.model.linear_size,
                        config.model.dimension,
                        n_max,
                    )?,
                };
                let volume = model.lattice().volume();
                let n = config.states.number.unwrap_or(volume);
                let alpha = config
                    .states
                    .coherent
                    .map(|[re, im]| Complex64::new(re, im))
                    .unwrap_or_else(|| Complex64::new((n as f64).sqrt(), 0.0));
                let (number, coherent) = model.build_states(n, alpha)?;
                if !number.reliable || !coherent.reliable {
                    bail!(
                        "boson states exceed the truncation reliability threshold (top-level weight {:.3e}); raise n-max",
                        number.top_level_weight.max(coherent.top_level_weight)
                    );
                }
                let pair = VacuumPair::new(
                    number.state,
                    coherent.state,
                    &model.order_parameter(),
                    None,
                )?;
                Ok(BuiltModel::Boson { model, pair })
            }
        }
    }

    pub fn hamiltonian(&self) -> &SparseOp {
        match self {
            BuiltModel::Ising { model, .. } => model.hamiltonian(),
            BuiltModel::Boson { model, .. } => model.hamiltonian(),
        }
    }

    pub fn pair(&self) -> &VacuumPair {
        match self {
            BuiltModel::Ising { pair, .. } => pair,
            BuiltModel::Boson { pair, .. } => pair,
        }
    }

    pub fn order_parameter(&self) -> SparseOp {
        match self {
            BuiltModel::Ising { model, .. } => model.order_parameter(),
            BuiltModel::Boson { model, .. } => model.order_parameter(),
        }
    }

    pub fn lattice(&self) -> &declab::lattice::LatticeSpec {
        match self {
            BuiltModel::Ising { model, .. } => model.lattice(),
            BuiltModel::Boson { model, .. } => model.lattice(),
        }
    }

    pub fn unit_translations(&self) -> Vec<SparseOp> {
        match self {
            BuiltModel::Ising { model, .. } => (0..model.lattice().dimension())
                .map(|mu| {
                    let mut shift = vec![0usize; model.lattice().dimension()];
                    shift[mu] = 1;
                    translation_operator(model.lattice(), model.space(), &shift)
                })
                .collect(),
            BuiltModel::Boson { model, .. } => (0..model.lattice().dimension())
                .map(|mu| {
                    let mut shift = vec![0usize; model.lattice().dimension()];
                    shift[mu] = 1;
                    model.translation_operator(&shift)
                })
                .collect(),
        }
    }

    pub fn interaction(&self, config: &ExperimentConfig) -> Result<InteractionSpec> {
        let env = &config.environment;
        let contact = env.contact.to_region()?;
        match self {
            BuiltModel::Ising { model, .. } => {
                let corr = EnvCorrelation::build(
                    env.kernel.clone(),
                    env.weight,
                    &contact,
                    model.lattice(),
                    env.tau_c,
                )?;
                Ok(InteractionSpec::single_site(
                    config.drive.lambda,
                    &model.order_parameter_site(),
                    model.lattice(),
                    model.space(),
                    corr,
                )?)
            }
            BuiltModel::Boson { model, .. } => {
                debug_assert_eq!(env.channels, ChannelMode::Pair);
                let corr_plus = EnvCorrelation::build(
                    env.kernel.clone(),
                    env.weight,
                    &contact,
                    model.lattice(),
                    env.tau_c,
                )?;
                let corr_minus = EnvCorrelation::build(
                    env.kernel_minus.clone().unwrap_or(env.kernel.clone()),
                    env.weight_minus.unwrap_or(env.weight),
                    &contact,
                    model.lattice(),
                    env.tau_c,
                )?;
                Ok(model.field_coupling(config.drive.lambda, corr_plus, corr_minus)?)
            }
        }
    }
}

fn positivity_certificate(channel_label: &str, corr: &EnvCorrelation) -> NamedOutcome {
    let pass = corr.is_positive();
    NamedOutcome {
        name: format!("g-positivity[{channel_label}]"),
        kind: OutcomeKind::Certificate,
        pass: Some(pass),
        record: serde_json::json!({
            "name": format!("g-positivity[{channel_label}]"),
            "min_eig": corr.min_eig(),
            "max_eig": corr.max_eig(),
            "g00": corr.g00(),
            "contact_size": corr.contact_size(),
            "pass": pass,
        }),
    }
}

/// The translation-invariance bound rate: sum over channels of
/// g00 <delta a_0^dag delta a_0>.
fn rate_bound_rhs(
    interaction: &InteractionSpec,
    state: &declab::hilbert::ManyBodyState,
) -> Result<f64> {
    let mut acc = 0.0;
    for channel in interaction.channels() {
        let f = operator_fluctuation(state, &channel.momentum_ops[0]);
        acc += channel.correlation.g00() * f.normal;
    }
    Ok(interaction.rate_prefactor() * acc)
}

/// Run the full pipeline for one resolved configuration.
pub fn run_point(point: usize, config: &ExperimentConfig) -> Result<PointResult> {
    let built = BuiltModel::build(config)?;
    let interaction = built.interaction(config)?;
    let h = built.hamiltonian().clone();
    let pair = built.pair().clone();
    let m_op = built.order_parameter();
    let drive = &config.drive;
    let mut warnings = Vec::new();
    let mut outcomes = Vec::new();

    // Markovianity guard on the declared correlation time
    for channel in interaction.channels() {
        for (tag, state) in [("afv", &pair.afv), ("ppv", &pair.ppv)] {
            let spread = energy_spread(&h, state.amplitudes());
            if let Some(w) = channel.correlation.markov_warning(spread) {
                warnings.push(format!("channel '{}', {tag}: {w}", channel.label));
            }
        }
    }

    // positivity certificates per channel
    for channel in interaction.channels() {
        outcomes.push(positivity_certificate(&channel.label, &channel.correlation));
    }

    // entropy series and rates
    let (times, s1_afv) = first_order_series(
        &pair.afv,
        &h,
        &interaction,
        drive.t_final,
        drive.n_time_grid.min(drive.n_quad + 1),
        drive.n_quad,
    )?;
    let (_, s1_ppv) = first_order_series(
        &pair.ppv,
        &h,
        &interaction,
        drive.t_final,
        drive.n_time_grid.min(drive.n_quad + 1),
        drive.n_quad,
    )?;
    let afv_rate = rate_extract(&times, &s1_afv)?;
    let ppv_rate = rate_extract(&times, &s1_ppv)?;

    // fluctuations of the order parameter
    let fluct_afv = operator_fluctuation(&pair.afv, &m_op);
    let fluct_ppv = operator_fluctuation(&pair.ppv, &m_op);

    // rate-bound certificates on both states
    let translations = built.unit_translations();
    for (tag, state) in [("afv", &pair.afv), ("ppv", &pair.ppv)] {
        let cert = rate_bound_certificate(
            state,
            &h,
            &interaction,
            drive.t_final,
            drive.n_quad,
            &translations,
        )?;
        outcomes.push(NamedOutcome {
            name: format!("rate-lower-bound[{tag}]"),
            kind: OutcomeKind::Certificate,
            pass: cert.pass,
            record: serde_json::to_value(&cert)?,
        });
    }

    // model-specific certificates
    let mut region_volume_ppv = None;
    match &built {
        BuiltModel::Ising { model, .. } => {
            let params = DifferenceBoundParams {
                t: drive.t_final,
                n_quad: drive.n_quad,
                horizon: drive.horizon,
                n_time_points: drive.n_time_grid,
                epsilon: drive.epsilon,
            };
            let cert = difference_bound_certificate(
                &pair,
                &h,
                &interaction,
                &model.order_parameter_site(),
                &params,
            )?;
            region_volume_ppv = Some(cert.region_volume);
            outcomes.push(NamedOutcome {
                name: "rate-difference-bound".into(),
                kind: OutcomeKind::Certificate,
                pass: cert.certificate.pass,
                record: serde_json::to_value(&cert)?,
            });
            // intensive-fluctuation bound along the PPV trajectory
            let (region, region_stable) = certified_region(
                &pair.ppv,
                &h,
                0,
                drive.epsilon,
                drive.horizon,
                drive.n_time_grid,
            )?;
            let traj =
                StateTrajectory::closed(&pair.ppv, &h, drive.horizon, drive.n_time_grid)?;
            let report =
                intensive_fluctuation_bound(&traj, &model.order_parameter_site(), &region)?;
            let pass = report.holds && region_stable;
            outcomes.push(NamedOutcome {
                name: "intensive-fluctuation-bound".into(),
                kind: OutcomeKind::Certificate,
                pass: Some(pass),
                record: serde_json::json!({
                    "name": "intensive-fluctuation-bound",
                    "region": region,
                    "region_grid_stable": region_stable,
                    "report": report,
                    "pass": pass,
                }),
            });
        }
        BuiltModel::Boson { .. } => {
            // U(1) case: the difference inequality is checked numerically
            let diff = s1_afv.last().unwrap() - s1_ppv.last().unwrap();
            let pass = diff >= -1e-12;
            outcomes.push(NamedOutcome {
                name: "pair-entropy-dominance".into(),
                kind: OutcomeKind::Certificate,
                pass: Some(pass),
                record: serde_json::json!({
                    "name": "pair-entropy-dominance",
                    "s1_afv": s1_afv.last(),
                    "s1_ppv": s1_ppv.last(),
                    "difference": diff,
                    "pass": pass,
                }),
            });
        }
    }

    // optional full master-equation propagation with its convergence gate
    let mut trajectory_csv = None;
    let mut convention_constant = None;
    let mut entropy_report = {
        // S_lin is filled from the dynamics below when it runs
        let bound_rate = rate_bound_rhs(&interaction, &pair.afv)?;
        EntropyReport {
            times: times.clone(),
            s_lin: Vec::new(),
            s_lin_first_order: s1_afv.clone(),
            rate_prefactor: interaction.rate_prefactor(),
            slope: afv_rate.gamma,
            bound_rate,
            slack: afv_rate.gamma - bound_rate,
            nonlinearity_flag: afv_rate.nonlinear,
        }
    };
    if drive.n_steps > 0 && drive.t_final > 0.0 {
        let rho0 = DensityMatrix::pure(&pair.afv);
        let (traj, rel_change) = propagation_convergence(
            &rho0,
            &h,
            &interaction,
            drive.t_final,
            drive.n_steps,
            Some(&m_op),
        )?;
        // re-evaluate the first-order series on the trajectory's own grid so
        // both columns of the report share a time axis
        let propagator = Propagator::new(&h, "entropy-report")?;
        let mut s1_at_samples = Vec::with_capacity(traj.points.len());
        for p in &traj.points {
            s1_at_samples.push(first_order_entropy_with(
                &pair.afv,
                &propagator,
                &interaction,
                p.time,
                drive.n_quad,
            )?);
        }
        entropy_report.times = traj.points.iter().map(|p| p.time).collect();
        entropy_report.s_lin = traj.points.iter().map(|p| p.s_lin).collect();
        entropy_report.s_lin_first_order = s1_at_samples;
        let health_pass = traj.max_trace_drift < 1e-8
            && traj.points.iter().all(|p| p.min_eig >= -1e-6);
        outcomes.push(NamedOutcome {
            name: "integrator-health".into(),
            kind: OutcomeKind::Certificate,
            pass: Some(health_pass),
            record: serde_json::json!({
                "name": "integrator-health",
                "max_trace_drift": traj.max_trace_drift,
                "renormalizations": traj.renormalizations,
                "max_hermiticity_dev": traj.max_hermiticity_dev,
                "pass": health_pass,
            }),
        });
        let converged = rel_change < 1e-6;
        outcomes.push(NamedOutcome {
            name: "propagation-convergence".into(),
            kind: OutcomeKind::Convergence,
            pass: Some(converged),
            record: serde_json::json!({
                "name": "propagation-convergence",
                "final_s_lin": traj.final_s_lin(),
                "step_halving_relative_change": rel_change,
                "pass": converged,
            }),
        });
        // measured S_lin / S1 convention constant at the earliest sample,
        // using the fitted first-order slope (S1 = gamma t at early times)
        if let Some(p) = traj.points.get(1) {
            let s1_at = afv_rate.gamma * p.time;
            if s1_at > 0.0 {
                convention_constant = Some(p.s_lin / s1_at);
            }
        }
        if config.output.trajectory {
            trajectory_csv = Some(traj.to_csv());
        }
    }

    let g_matrix_csv = config
        .output
        .export_g_matrix
        .then(|| interaction.channels()[0].correlation.to_csv());

    // range sanity on the report: S_lin must stay in [0, 1 - 1/dim]; an
    // unphysical (non-positive) g drives the first-order series negative,
    // which surfaces here as a failed certificate rather than a hard error
    let range = entropy_report.validate(pair.afv.dim());
    outcomes.push(NamedOutcome {
        name: "entropy-range".into(),
        kind: OutcomeKind::Certificate,
        pass: Some(range.is_ok()),
        record: serde_json::json!({
            "name": "entropy-range",
            "detail": range.as_ref().err().map(|e| e.to_string()),
            "pass": range.is_ok(),
        }),
    });
    let corr0 = &interaction.channels()[0].correlation;
    let certificates_passed = outcomes.iter().all(|o| o.pass != Some(false));
    Ok(PointResult {
        point,
        linear_size: config.model.linear_size,
        volume: built.lattice().volume(),
        contact_size: corr0.contact_size(),
        xi_e: corr0.kernel().correlation_length(built.lattice()),
        lambda: drive.lambda,
        g00: corr0.g00(),
        gamma_afv: afv_rate.gamma,
        gamma_ppv: ppv_rate.gamma,
        gamma_ratio: (ppv_rate.gamma.abs() > 1e-14 * afv_rate.gamma.abs())
            .then(|| afv_rate.gamma / ppv_rate.gamma),
        delta_gamma: afv_rate.gamma - ppv_rate.gamma,
        fluct_afv: fluct_afv.normal,
        fluct_ppv: fluct_ppv.normal,
        fluct_ppv_symmetric: fluct_ppv.symmetric,
        s1_afv_final: *s1_afv.last().unwrap(),
        s1_ppv_final: *s1_ppv.last().unwrap(),
        region_volume_ppv,
        outcomes,
        certificates_passed,
        warnings,
        convention_constant,
        afv_entropy_report: entropy_report,
        trajectory_csv,
        g_matrix_csv,
    })
}

/// Expand the sweep block into one resolved config per point (cartesian
/// product, deterministic order).
pub fn expand_sweep(config: &ExperimentConfig) -> Vec<ExperimentConfig> {
    let sweep = &config.sweep;
    if sweep.is_empty() {
        return vec![config.clone()];
    }
    let sizes: Vec<Option<usize>> = if sweep.linear_size.is_empty() {
        vec![None]
    } else {
        sweep.linear_size.iter().map(|&v| Some(v)).collect()
    };
    let blocks: Vec<Option<usize>> = if sweep.contact_block.is_empty() {
        vec![None]
    } else {
        sweep.contact_block.iter().map(|&v| Some(v)).collect()
    };
    let lambdas: Vec<Option<f64>> = if sweep.lambda.is_empty() {
        vec![None]
    } else {
        sweep.lambda.iter().map(|&v| Some(v)).collect()
    };
    let xis: Vec<Option<f64>> = if sweep.xi.is_empty() {
        vec![None]
    } else {
        sweep.xi.iter().map(|&v| Some(v)).collect()
    };
    let mut points = Vec::new();
    for &l in &sizes {
        for &b in &blocks {
            for &lam in &lambdas {
                for &xi in &xis {
                    let mut c = config.clone();
                    c.sweep = Default::default();
                    if let Some(l) = l {
                        c.model.linear_size = l;
                    }
                    if let Some(b) = b {
                        c.environment.contact = crate::config::ContactSpec::Block {
                            block: vec![b; c.model.dimension],
                        };
                    }
                    if let Some(lam) = lam {
                        c.drive.lambda = lam;
                    }
                    if let Some(xi) = xi {
                        c.environment.kernel = Kernel::Exponential { xi };
                    }
                    points.push(c);
                }
            }
        }
    }
    points
}

/// Convenience wrapper keeping anyhow context uniform.
pub fn run_point_with_context(point: usize, config: &ExperimentConfig) -> Result<PointResult> {
    run_point(point, config)
        .map_err(|e| anyhow!(e))
        .with_context(|| format!("sweep point {point}"))
}

/// Map library and pipeline errors onto the CLI exit-code taxonomy.
pub fn exit_code_for_error(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(declab_err) = cause.downcast_ref::<declab::DeclabError>() {
            return match declab_err {
                declab::DeclabError::QuadratureNotConverged { .. }
                | declab::DeclabError::StepTooLarge { .. }
                | declab::DeclabError::PositivityViolation { .. } => 3,
                _ => 2,
            };
        }
    }
    2
}
