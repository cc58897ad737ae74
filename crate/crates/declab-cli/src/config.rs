//! Experiment configuration: a versioned TOML document with strict key
//! checking and range validation.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use declab::environment::{ContactRegion, Kernel};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub model: ModelBlock,
    #[serde(default)]
    pub states: StatesBlock,
    pub environment: EnvironmentBlock,
    pub drive: DriveBlock,
    #[serde(default)]
    pub sweep: SweepBlock,
    #[serde(default)]
    pub output: OutputBlock,
    /// Seed for the randomized property suites.
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ModelBlock {
    pub kind: ModelKind,
    pub linear_size: usize,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    /// Ising bond coupling J.
    #[serde(default = "default_coupling")]
    pub coupling: f64,
    /// Symmetry-preserving perturbation hook (Ising only).
    #[serde(default)]
    pub transverse_field: f64,
    /// Uniform Fock cutoff per momentum mode (boson only).
    #[serde(default)]
    pub n_max: Option<usize>,
    /// Deeper cutoff for the k = 0 mode (boson only).
    #[serde(default)]
    pub zero_mode_n_max: Option<usize>,
}

fn default_dimension() -> usize {
    1
}

fn default_coupling() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Ising,
    FreeBoson,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct StatesBlock {
    /// Boson AFV occupation N (defaults to the linear size: density 1).
    #[serde(default)]
    pub number: Option<usize>,
    /// Boson PPV coherent amplitude [re, im].
    #[serde(default)]
    pub coherent: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct EnvironmentBlock {
    pub kernel: Kernel,
    #[serde(default = "default_weight")]
    pub weight: f64,
    pub contact: ContactSpec,
    #[serde(default)]
    pub channels: ChannelMode,
    /// Kernel of the psi^dag channel (boson pair coupling).
    #[serde(default)]
    pub kernel_minus: Option<Kernel>,
    #[serde(default)]
    pub weight_minus: Option<f64>,
    /// Environment correlation time (Markovianity guard metadata).
    #[serde(default)]
    pub tau_c: Option<f64>,
}

fn default_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelMode {
    #[default]
    Single,
    /// psi (x) b + psi^dag (x) b^dag, boson only.
    Pair,
}

/// Contact region in config form.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ContactSpec {
    /// The literal string "all".
    Keyword(String),
    Block { block: Vec<usize> },
    Sites { sites: Vec<Vec<usize>> },
}

impl ContactSpec {
    pub fn to_region(&self) -> Result<ContactRegion> {
        match self {
            ContactSpec::Keyword(s) if s == "all" => Ok(ContactRegion::All),
            ContactSpec::Keyword(s) => bail!("unknown contact keyword '{s}' (expected \"all\")"),
            ContactSpec::Block { block } => Ok(ContactRegion::Block(block.clone())),
            ContactSpec::Sites { sites } => Ok(ContactRegion::Sites(sites.clone())),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct DriveBlock {
    pub lambda: f64,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    /// Master-equation steps; 0 skips the full propagation.
    #[serde(default)]
    pub n_steps: usize,
    #[serde(default = "default_n_quad")]
    pub n_quad: usize,
    /// Horizon T for nu and the correlation regions.
    #[serde(default = "default_t_final")]
    pub horizon: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_time_grid")]
    pub n_time_grid: usize,
}

fn default_t_final() -> f64 {
    1.0
}

fn default_n_quad() -> usize {
    32
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_time_grid() -> usize {
    33
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SweepBlock {
    #[serde(default)]
    pub linear_size: Vec<usize>,
    /// Contact block extents (per point, a cube of this linear extent).
    #[serde(default)]
    pub contact_block: Vec<usize>,
    #[serde(default)]
    pub lambda: Vec<f64>,
    /// Exponential-kernel correlation lengths.
    #[serde(default)]
    pub xi: Vec<f64>,
}

impl SweepBlock {
    pub fn is_empty(&self) -> bool {
        self.linear_size.is_empty()
            && self.contact_block.is_empty()
            && self.lambda.is_empty()
            && self.xi.is_empty()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct OutputBlock {
    #[serde(default)]
    pub dir: Option<String>,
    /// Export the g matrix as CSV (single-point runs).
    #[serde(default)]
    pub export_g_matrix: bool,
    /// Export master-equation trajectories as CSV.
    #[serde(default)]
    pub trajectory: bool,
}

impl ExperimentConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_str(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn from_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).context("parsing TOML")?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!(
                "schema_version {} unsupported (this build speaks {SCHEMA_VERSION})",
                self.schema_version
            );
        }
        let m = &self.model;
        if m.dimension == 0 {
            bail!("model.dimension must be positive");
        }
        if m.linear_size < 2 {
            bail!("model.linear-size must be at least 2");
        }
        if !m.coupling.is_finite() || !m.transverse_field.is_finite() {
            bail!("model couplings must be finite");
        }
        match m.kind {
            ModelKind::Ising => {
                if m.n_max.is_some() || m.zero_mode_n_max.is_some() {
                    bail!("n-max fields apply to the free-boson model only");
                }
            }
            ModelKind::FreeBoson => {
                if m.transverse_field != 0.0 {
                    bail!("transverse-field applies to the Ising model only");
                }
                if m.n_max.is_none() {
                    bail!("free-boson model needs model.n-max");
                }
            }
        }
        let e = &self.environment;
        if !e.weight.is_finite() || e.weight < 0.0 {
            bail!("environment.weight must be finite and nonnegative");
        }
        if let Some(w) = e.weight_minus {
            if !w.is_finite() || w < 0.0 {
                bail!("environment.weight-minus must be finite and nonnegative");
            }
        }
        if e.channels == ChannelMode::Pair && m.kind != ModelKind::FreeBoson {
            bail!("pair channels require the free-boson model");
        }
        if m.kind == ModelKind::FreeBoson && e.channels != ChannelMode::Pair {
            bail!("the free-boson model couples through pair channels; set environment.channels = \"pair\"");
        }
        e.contact.to_region().context("environment.contact")?;
        let d = &self.drive;
        if !d.lambda.is_finite() || d.lambda < 0.0 {
            bail!("drive.lambda must be finite and nonnegative");
        }
        if !d.t_final.is_finite() || d.t_final < 0.0 {
            bail!("drive.t-final must be finite and nonnegative");
        }
        if d.n_quad < 8 {
            bail!("drive.n-quad must be at least 8");
        }
        if !d.epsilon.is_finite() || d.epsilon <= 0.0 || d.epsilon > 1.0 {
            bail!("drive.epsilon must lie in (0, 1]");
        }
        if d.n_time_grid < 2 {
            bail!("drive.n-time-grid must be at least 2");
        }
        if d.n_steps != 0 && d.n_steps < 10 {
            bail!("drive.n-steps must be 0 (skip) or at least 10");
        }
        for &l in &self.sweep.linear_size {
            if l < 2 {
                bail!("sweep.linear-size entries must be at least 2");
            }
        }
        for &x in &self.sweep.xi {
            if !x.is_finite() || x <= 0.0 {
                bail!("sweep.xi entries must be positive");
            }
        }
        for &l in &self.sweep.lambda {
            if !l.is_finite() || l < 0.0 {
                bail!("sweep.lambda entries must be finite and nonnegative");
            }
        }
        Ok(())
    }

    /// Canonical serialized form used for the reproducibility hash.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// The `schema` subcommand text: an annotated template plus the output
/// column documentation.
pub const SCHEMA_TEXT: &str = r#"# declab experiment configuration (schema_version = 1)
#
# Unknown keys are rejected. Values shown are the defaults where one exists.

schema_version = 1
seed = 42                      # seed for randomized property suites

[model]
kind = "ising"                 # "ising" | "free-boson"
linear-size = 8                # L; sites = L^dimension
dimension = 1
coupling = 1.0                 # Ising bond J
transverse-field = 0.0         # symmetry-preserving perturbation hook (Ising)
# n-max = 6                    # uniform Fock cutoff per mode (free-boson)
# zero-mode-n-max = 21         # deeper k = 0 cutoff (free-boson)

[states]                       # free-boson reference states
# number = 4                   # AFV occupation N (default: linear-size)
# coherent = [0.5, 0.0]        # PPV amplitude alpha (default: sqrt(N))

[environment]
kernel = { kind = "constant" } # constant | exponential {xi} | delta |
                               # tabulated {values, validate}
weight = 1.0                   # half-integrated time correlation weight
contact = "all"                # "all" | { block = [m, ...] } | { sites = [[x...], ...] }
channels = "single"            # "single" | "pair" (free-boson)
# kernel-minus = { kind = "delta" }  # psi^dag channel kernel (pair)
# weight-minus = 1.0
# tau-c = 0.5                  # Markovianity guard metadata

[drive]
lambda = 0.01                  # coupling strength
t-final = 1.0                  # entropy horizon t
n-steps = 0                    # full master-equation steps; 0 = skip
n-quad = 32                    # Simpson intervals for S1
horizon = 1.0                  # T for nu and correlation regions
epsilon = 0.1                  # correlation-region threshold
n-time-grid = 33               # time-grid points for T-dependent quantities

[sweep]                        # optional; cartesian product of the lists
# linear-size = [4, 6, 8]
# contact-block = [1, 2, 4]
# lambda = [0.02, 0.01]
# xi = [1.0, 4.0]              # exponential-kernel correlation lengths

[output]
# dir = "out"                  # default "declab-out"; DECLAB_OUT overrides
export-g-matrix = false
trajectory = false

# ---------------------------------------------------------------------------
# run.csv columns (one row per sweep point):
#   point, linear_size, volume, contact_size, xi_e, lambda, g00,
#   gamma_afv, gamma_ppv, gamma_ratio, delta_gamma,
#   fluct_afv, fluct_ppv, s1_afv_final, s1_ppv_final,
#   region_volume_ppv, certificates_passed
# sweep.csv columns:
#   linear_size, volume, contact_size, xi_e, g00, gamma_afv, gamma_ppv,
#   ratio, delta_gamma
#   (log-log fit exponents land in sweep_summary.json)
# trajectory_<point>.csv columns:
#   t, s_lin, trace, min_eig, order_mean_re, order_mean_im, order_fluct
# certificates.json: list of certificate records
#   {name, inputs_hash, lhs, rhs, slack, rate_prefactor, preconditions,
#    pass, grid}
# record.json: config hash, code version, per-point results, wall clock
#
# Exit codes: 0 success, 1 certificate failure, 2 config error,
#             3 numerical-convergence failure.
"#;
