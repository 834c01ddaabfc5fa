//! Declarative experiment configuration (TOML, versioned schema).
//!
//! CLI flags override a handful of fields; environment variables are only
//! consulted for the output directory and worker count.

use serde::{Deserialize, Serialize};

use levyglass::couplings::{
    uniform_background_edges, CouplingLaw, CouplingMatrix, Edge, PlantedEdge, RegimeParams,
    SurvivalTable,
};
use levyglass::dynamics::EngineKind;
use levyglass::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: String,
    pub seed: u64,
    pub law: LawConfig,
    pub regime: RegimeConfig,
    pub experiment: ExperimentSpec,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, Error> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Input(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Input(format!(
                "unsupported schema_version {} (expected {})",
                self.schema_version, SCHEMA_VERSION
            )));
        }
        self.law.build_law()?;
        self.regime.build(&self.law)?;
        Ok(())
    }

    /// The sampled coupling matrix of this configuration.
    pub fn matrix(&self) -> Result<CouplingMatrix, Error> {
        let law = self.law.build_law()?;
        Ok(levyglass::couplings::sample_matrix(&law, self.law.matrix_seed.unwrap_or(self.seed)))
    }

    pub fn regime_params(&self) -> Result<RegimeParams, Error> {
        self.regime.build(&self.law)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
    pub n: usize,
    pub alpha: f64,
    pub variant: LawVariant,
    /// Seed for the matrix draw; defaults to the experiment seed.
    #[serde(default)]
    pub matrix_seed: Option<u64>,
    /// Planted overrides (any variant).
    #[serde(default)]
    pub planted: Vec<PlantedBond>,
    /// Uniform-magnitude background filled in on every non-planted pair.
    #[serde(default)]
    pub background: Option<BackgroundConfig>,
    /// Tabulated survival function for the general-tail variant.
    #[serde(default)]
    pub survival: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawVariant {
    Pareto,
    GeneralTail,
    /// Planted values over a zero base.
    Planted,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedBond {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundConfig {
    pub lo: f64,
    pub hi: f64,
    pub seed: u64,
}

impl LawConfig {
    pub fn build_law(&self) -> Result<CouplingLaw, Error> {
        let mut planted: Vec<PlantedEdge> = self
            .planted
            .iter()
            .map(|b| PlantedEdge {
                edge: Edge::new(b.i, b.j),
                value: b.value,
            })
            .collect();
        if let Some(bg) = &self.background {
            let exclude: Vec<Edge> = planted.iter().map(|p| p.edge).collect();
            planted.extend(uniform_background_edges(self.n, &exclude, bg.lo, bg.hi, bg.seed));
        }
        let law = match self.variant {
            LawVariant::Pareto => CouplingLaw::pareto(self.n, self.alpha)?,
            LawVariant::GeneralTail => {
                let points = self
                    .survival
                    .clone()
                    .ok_or_else(|| Error::Input("general-tail law needs a survival table".into()))?;
                CouplingLaw::general_tail(self.n, self.alpha, SurvivalTable::new(points)?)?
            }
            LawVariant::Planted => CouplingLaw::planted(self.n, Vec::new())?,
        };
        if planted.is_empty() {
            Ok(law)
        } else {
            law.with_planted(planted)
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeConfig {
    pub beta: f64,
    pub a: f64,
    pub gamma: f64,
    /// Timescale-window parameter; defaults to `e^{-10}`.
    #[serde(default)]
    pub delta: Option<f64>,
}

impl RegimeConfig {
    pub fn build(&self, law: &LawConfig) -> Result<RegimeParams, Error> {
        RegimeParams::new(self.beta, self.a, self.gamma, law.alpha, law.n)
    }

    pub fn delta(&self) -> f64 {
        self.delta.unwrap_or((-10.0f64).exp())
    }
}

fn default_bootstrap() -> usize {
    400
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExperimentSpec {
    /// Sample the matrix and export it.
    Sample {},
    /// Monte Carlo pass rates of the structural diagnostics over system sizes.
    Diagnose {
        n_values: Vec<usize>,
        seeds_per_n: u64,
        /// Caller constant for the row-sum flag.
        #[serde(default = "default_c_row")]
        c_row: f64,
        /// Share the underlying uniforms across system sizes (variance
        /// reduction for the trend).
        #[serde(default = "default_true")]
        common_random_numbers: bool,
    },
    /// One trajectory of the (restricted) dynamics.
    Simulate {
        engine: EngineConfig,
        duration: f64,
        #[serde(default)]
        frozen: Vec<usize>,
        #[serde(default)]
        record_null_events: bool,
    },
    /// Escape times from a well, with the exponential-approximation tests.
    Escape {
        samples: usize,
        /// Well label, e.g. "+" or "+-".
        label: String,
        #[serde(default = "default_horizon_multiplier")]
        horizon_multiplier: f64,
    },
    /// Dynamical autocorrelation law vs. the replica overlap law.
    Autocorr {
        s: f64,
        runs: usize,
        #[serde(default = "default_bins")]
        bins: usize,
        #[serde(default = "default_bootstrap")]
        bootstrap: usize,
    },
    /// Well decomposition report plus two-state rates per critical bond.
    Wells {},
    /// Stationary law of Y, detailed-balance defect, and a simulated
    /// occupancy check.
    Yproc {
        paths: usize,
        duration_s: f64,
    },
    /// Skeleton-vs-Y finite-dimensional comparison.
    CompareSkeleton {
        times_s: Vec<f64>,
        paths: usize,
        #[serde(default)]
        y_init: YInitConfig,
        #[serde(default = "default_bootstrap")]
        bootstrap: usize,
    },
    /// Exact spectral reports.
    Exact { report: ExactReport },
    /// Random-cluster reports.
    Fk { report: FkReport },
}

fn default_c_row() -> f64 {
    4.0
}

fn default_true() -> bool {
    true
}

fn default_horizon_multiplier() -> f64 {
    50.0
}

fn default_bins() -> usize {
    20
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineConfig {
    Naive,
    RejectionFree,
}

impl From<EngineConfig> for EngineKind {
    fn from(e: EngineConfig) -> Self {
        match e {
            EngineConfig::Naive => EngineKind::Naive,
            EngineConfig::RejectionFree => EngineKind::RejectionFree,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum YInitConfig {
    #[default]
    Uniform,
    Matched,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "what", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExactReport {
    /// Generator validity, spectral gap, mixing time, TV curve.
    Spectral {
        #[serde(default)]
        frozen: Vec<(usize, i8)>,
        #[serde(default)]
        tv_times: Vec<f64>,
    },
    /// Block-dynamics gap inequality for an explicit cover.
    Block { blocks: Vec<Vec<usize>> },
    /// Canonical-path congestion sweep over random boundaries.
    Congestion { pairs: usize },
    /// Within-well mixing vs. exit-time separation.
    WellSeparation { label: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "what", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FkReport {
    /// Both sides of the correlation identity for a vertex pair.
    Correlation { l: usize, i: usize, j: usize },
    /// `N E[p(J)]` over a grid of (beta multiple of beta_0, N).
    MeanBondProb {
        beta_multipliers: Vec<f64>,
        n_values: Vec<f64>,
    },
    /// Replica overlap law in uniform wells.
    QOverlap {
        samples: usize,
        sampler: WellSamplerConfig,
    },
    /// Skeleton-marginal uniformity below frozen bonds.
    Uniformity {
        l: usize,
        /// Top-L coordinate signs, e.g. "+".
        tau: String,
        samples: usize,
        #[serde(default = "default_rounds")]
        rounds: usize,
        #[serde(default = "default_bootstrap")]
        bootstrap: usize,
    },
}

fn default_rounds() -> usize {
    6
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WellSamplerConfig {
    ExactGibbs,
    Es { rounds: usize },
}

impl ExperimentSpec {
    /// Subcommand name this spec belongs to.
    pub fn subcommand(&self) -> &'static str {
        match self {
            ExperimentSpec::Sample {} => "sample",
            ExperimentSpec::Diagnose { .. } => "diagnose",
            ExperimentSpec::Simulate { .. } => "simulate",
            ExperimentSpec::Escape { .. } => "escape",
            ExperimentSpec::Autocorr { .. } => "autocorr",
            ExperimentSpec::Wells {} => "wells",
            ExperimentSpec::Yproc { .. } => "yproc",
            ExperimentSpec::CompareSkeleton { .. } => "compare",
            ExperimentSpec::Exact { .. } => "exact",
            ExperimentSpec::Fk { .. } => "fk",
        }
    }
}
