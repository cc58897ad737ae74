//! The `verify` subcommand: run the full certificate suite for a config and
//! map failures onto exit codes (1 certificate, 3 convergence).

use anyhow::Result;

use declab::environment::EnvCorrelation;
use declab::fragility::{first_order_entropy, rate_bound_certificate};
use declab::models::ising::IsingModel;
use declab::operators::translation_operator;
use declab::random;

use crate::config::{ExperimentConfig, ModelKind};
use crate::experiment::{run_point, NamedOutcome, OutcomeKind};

pub struct VerifySummary {
    pub outcomes: Vec<NamedOutcome>,
    pub first_failure: Option<String>,
    pub exit_code: i32,
}

/// Number of random draws in the rate-bound property suite.
const PROPERTY_TRIALS: u64 = 100;

pub fn verify(config: &ExperimentConfig) -> Result<VerifySummary> {
    let point = run_point(0, config)?;
    let mut outcomes = point.outcomes;

    // explicit quadrature-convergence gate: doubling n_quad must not move S1
    {
        let built = crate::experiment::BuiltModel::build(config)?;
        let interaction = built.interaction(config)?;
        let h = built.hamiltonian().clone();
        let pair = built.pair();
        let t = config.drive.t_final;
        let coarse = first_order_entropy(&pair.afv, &h, &interaction, t, config.drive.n_quad)?;
        let fine =
            first_order_entropy(&pair.afv, &h, &interaction, t, 2 * config.drive.n_quad)?;
        let scale = fine.abs().max(1e-14);
        let rel = (fine - coarse).abs() / scale;
        let pass = rel < 1e-8;
        outcomes.push(NamedOutcome {
            name: "quadrature-convergence".into(),
            kind: OutcomeKind::Convergence,
            pass: Some(pass),
            record: serde_json::json!({
                "name": "quadrature-convergence",
                "n_quad": config.drive.n_quad,
                "relative_change_on_doubling": rel,
                "pass": pass,
            }),
        });
    }

    // randomized rate-bound property suite (Ising geometry)
    if config.model.kind == ModelKind::Ising {
        let l = config.model.linear_size.min(6);
        let model = IsingModel::new(l, config.model.dimension, config.model.coupling)?;
        let lattice = model.lattice().clone();
        let t_op = translation_operator(&lattice, model.space(), &[1]);
        let mut worst_slack = f64::INFINITY;
        let mut failures = 0usize;
        for trial in 0..PROPERTY_TRIALS {
            let seed = config.seed.wrapping_mul(1_000_003).wrapping_add(trial);
            let kernel = random::fourier_nonneg_kernel(&lattice, seed);
            let contact = random::random_contact(&lattice, seed.wrapping_add(101));
            let corr = EnvCorrelation::build(kernel, 1.0, &contact, &lattice, None)?;
            let spec = declab::environment::InteractionSpec::single_site(
                config.drive.lambda.max(1e-3),
                &model.order_parameter_site(),
                &lattice,
                model.space(),
                corr,
            )?;
            let state =
                random::translation_invariant_state(&lattice, model.space(), seed ^ 0xabcd)?;
            let cert = rate_bound_certificate(
                &state,
                model.hamiltonian(),
                &spec,
                config.drive.t_final.max(0.1),
                config.drive.n_quad,
                std::slice::from_ref(&t_op),
            )?;
            worst_slack = worst_slack.min(cert.slack);
            if cert.pass != Some(true) {
                failures += 1;
            }
        }
        let pass = failures == 0;
        outcomes.push(NamedOutcome {
            name: "rate-bound-property-suite".into(),
            kind: OutcomeKind::Certificate,
            pass: Some(pass),
            record: serde_json::json!({
                "name": "rate-bound-property-suite",
                "trials": PROPERTY_TRIALS,
                "failures": failures,
                "worst_slack": worst_slack,
                "linear_size": l,
                "pass": pass,
            }),
        });
    }

    let mut first_failure = None;
    let mut exit_code = 0;
    for o in &outcomes {
        if o.pass == Some(false) {
            if first_failure.is_none() {
                first_failure = Some(o.name.clone());
            }
            let code = match o.kind {
                OutcomeKind::Convergence => 3,
                OutcomeKind::Certificate => 1,
            };
            // convergence failures dominate the exit code
            if exit_code == 0 || code == 3 {
                exit_code = code;
            }
        }
    }
    Ok(VerifySummary {
        outcomes,
        first_failure,
        exit_code,
    })
}
