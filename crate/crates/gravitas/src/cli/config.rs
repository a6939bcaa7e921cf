//! Run configuration: built-in defaults, overridden by a TOML file, overridden
//! by command-line flags.
//!
//! File layout: optional top-level `seed`, `threads`, `output_dir`, `format`,
//! then one table per subcommand (`[optical_tree]`, `[box_cut]`,
//! `[entangle]`, `[semiclassical]`, `[compare]`, `[deflection]`,
//! `[phase_space_check]`). Every key inside a table is optional.

use crate::amplitudes::ModelParams;
use crate::entanglement::{Fig1Circuit, Readout, Yukawa};
use crate::estimators::BendingConfig;
use crate::semiclassical::{FeedbackConfig, DEFAULT_GAMMA};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpticalTreeConfig {
    pub params: ModelParams,
    /// Pole displacements relative to `max(m^2, mu^2)`, strictly decreasing.
    pub eps_ladder: Vec<f64>,
    /// Centre of the weight bump along the photon-energy path, units of `m`.
    pub center: f64,
    /// Initial quadrature panels.
    pub n_panels: usize,
    /// Allowed `|ratio_restored - 1|`.
    pub tolerance: f64,
}

impl Default for OpticalTreeConfig {
    fn default() -> Self {
        Self { params: ModelParams::default(), eps_ladder: vec![1e-2, 1e-3, 1e-4], center: 0.3, n_panels: 8, tolerance: 0.01 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoxCutConfig {
    pub params: ModelParams,
    /// Squared CM energies, units of `m^2`.
    pub s_values: Vec<f64>,
    pub n_samples: usize,
    /// Allowed `|ratio_restored - 1|` in combined standard errors.
    pub sigma_tolerance: f64,
}

impl Default for BoxCutConfig {
    fn default() -> Self {
        Self {
            params: ModelParams { mu: 1e-3, epsilon: 1e-12, ..ModelParams::default() },
            s_values: vec![4.1, 5.0, 6.5, 8.0, 10.0],
            n_samples: 1_000_000,
            sigma_tolerance: 2.0,
        }
    }
}

/// Masses, separation, trap, coupling and readout shared by the unitary and
/// the measurement-feedback channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub d: f64,
    pub masses: [f64; 2],
    pub trap_frequency: f64,
    pub readout: Readout,
    pub g_newton: f64,
    /// Yukawa regulator mass, inverse length.
    pub mu: f64,
    pub hbar: f64,
    /// Measurement rate, inverse time. Used by the feedback channel only.
    pub gamma: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        let c = Fig1Circuit::default();
        Self {
            d: c.d,
            masses: c.masses,
            trap_frequency: c.trap_frequency,
            readout: c.readout,
            g_newton: 1.0,
            mu: 0.0,
            hbar: 1.0,
            gamma: DEFAULT_GAMMA,
        }
    }
}

impl ChannelConfig {
    pub fn circuit(&self) -> Fig1Circuit {
        Fig1Circuit { d: self.d, masses: self.masses, trap_frequency: self.trap_frequency, readout: self.readout }
    }

    pub fn coupling(&self) -> Yukawa {
        Yukawa { g_newton: self.g_newton, mu: self.mu }
    }

    pub fn feedback(&self) -> FeedbackConfig {
        FeedbackConfig::matched(&self.circuit(), self.coupling(), self.gamma, self.hbar)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntangleConfig {
    pub channel: ChannelConfig,
    /// Interaction time.
    pub dt: f64,
    /// Rows in the time series over `[0, dt]`.
    pub n_times: usize,
    /// Duan level whose first crossing is reported.
    pub duan_threshold: f64,
}

impl Default for EntangleConfig {
    fn default() -> Self {
        Self { channel: ChannelConfig::default(), dt: 20.0, n_times: 201, duan_threshold: 0.99 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemiclassicalConfig {
    pub channel: ChannelConfig,
    pub n_traj: usize,
    pub n_steps: usize,
    /// Time step.
    pub dt: f64,
}

impl Default for SemiclassicalConfig {
    fn default() -> Self {
        Self { channel: ChannelConfig::default(), n_traj: 500, n_steps: 2000, dt: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub channel: ChannelConfig,
    pub n_traj: usize,
    pub dt: f64,
    /// Final time.
    pub horizon: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self { channel: ChannelConfig::default(), n_traj: 500, dt: 0.05, horizon: 100.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeflectionConfig {
    pub bending: BendingConfig,
    /// Desired integration time, s.
    pub target_time: f64,
}

impl Default for DeflectionConfig {
    fn default() -> Self {
        Self { bending: BendingConfig::default(), target_time: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseSpaceConfig {
    /// Shell mass.
    pub mu: f64,
    pub n_samples: usize,
    /// Allowed `|lhs - rhs|` in combined standard errors.
    pub sigma_tolerance: f64,
}

impl Default for PhaseSpaceConfig {
    fn default() -> Self {
        Self { mu: 0.5, n_samples: 1_000_000, sigma_tolerance: 3.0 }
    }
}

/// Contents of a configuration file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub optical_tree: OpticalTreeConfig,
    pub box_cut: BoxCutConfig,
    pub entangle: EntangleConfig,
    pub semiclassical: SemiclassicalConfig,
    pub compare: CompareConfig,
    pub deflection: DeflectionConfig,
    pub phase_space_check: PhaseSpaceConfig,
}

impl FileConfig {
    /// Reads a file and lays it over the defaults key by key, so a partial
    /// nested table such as `[box_cut.params]` keeps the subcommand's own
    /// defaults for the keys it omits.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("parsing {}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let user: toml::Table = toml::from_str(text).map_err(|e| e.to_string())?;
        let mut merged = toml::Table::try_from(Self::default()).map_err(|e| e.to_string())?;
        merge(&mut merged, user);
        merged.try_into().map_err(|e: toml::de::Error| e.to_string())
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Subcommand-specific part of a resolved run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "subcommand", content = "settings")]
pub enum CommandConfig {
    OpticalTree(OpticalTreeConfig),
    BoxCut(BoxCutConfig),
    Entangle(EntangleConfig),
    Semiclassical(SemiclassicalConfig),
    Compare(CompareConfig),
    Deflection(DeflectionConfig),
    PhaseSpaceCheck(PhaseSpaceConfig),
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CommandConfig::OpticalTree(_) => "optical-tree",
            CommandConfig::BoxCut(_) => "box-cut",
            CommandConfig::Entangle(_) => "entangle",
            CommandConfig::Semiclassical(_) => "semiclassical",
            CommandConfig::Compare(_) => "compare",
            CommandConfig::Deflection(_) => "deflection",
            CommandConfig::PhaseSpaceCheck(_) => "phase-space-check",
        }
    }

    /// Subcommands that need a seed.
    pub fn needs_seed(&self) -> bool {
        !matches!(self, CommandConfig::Entangle(_) | CommandConfig::Deflection(_))
    }

    /// Positive counts.
    pub fn validate_counts(&self) -> Result<(), String> {
        let counts: Vec<(&str, usize)> = match self {
            CommandConfig::OpticalTree(c) => vec![("n_panels", c.n_panels)],
            CommandConfig::BoxCut(c) => vec![("n_samples", c.n_samples)],
            CommandConfig::Entangle(c) => vec![("n_times", c.n_times)],
            CommandConfig::Semiclassical(c) => vec![("n_traj", c.n_traj), ("n_steps", c.n_steps)],
            CommandConfig::Compare(c) => vec![("n_traj", c.n_traj)],
            CommandConfig::Deflection(_) => vec![],
            CommandConfig::PhaseSpaceCheck(c) => vec![("n_samples", c.n_samples)],
        };
        match counts.iter().find(|(_, n)| *n == 0) {
            Some((name, _)) => Err(format!("{name} must be positive")),
            None => Ok(()),
        }
    }
}

/// Fully resolved configuration of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
    pub command: CommandConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.command.needs_seed() && self.seed.is_none() {
            return Err(format!("{} needs a seed (--seed or GRAVITAS_SEED)", self.command.name()));
        }
        if self.threads == Some(0) {
            return Err("threads must be positive".into());
        }
        self.command.validate_counts()
    }

    /// Seed of a stochastic run; zero for deterministic subcommands.
    pub fn seed_or_zero(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}
