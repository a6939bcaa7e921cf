//! Command-line front end: argument parsing, configuration resolution,
//! thread-pool setup and the determinism self-test.
//!
//! Exit codes: 0 success, 1 failed check or runtime error, 2 configuration
//! error.

pub mod commands;
pub mod config;
pub mod output;

use crate::entanglement::Readout;
use clap::{Args, Parser, Subcommand};
use commands::{execute, CliError};
use config::*;
use output::RunManifest;
use std::path::{Path, PathBuf};

/// Environment variable read when no seed is given on the command line or
/// in the config file.
pub const SEED_ENV: &str = "GRAVITAS_SEED";

#[derive(Debug, Parser)]
#[command(name = "gravitas", version, about = "Amplitude, unitarity and entanglement checks for Newtonian gravity coupled to matter")]
pub struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed (u64). Falls back to the config file, then GRAVITAS_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Format of tabular outputs; reports are always JSON.
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tree-level optical theorem along the photon-energy path.
    OpticalTree(OpticalTreeArgs),
    /// Box-amplitude cut versus two-quantum and elastic final states.
    BoxCut(BoxCutArgs),
    /// Unitary two-mass evolution: Duan product and log-negativity.
    Entangle(EntangleArgs),
    /// Measurement-and-feedback ensemble.
    Semiclassical(SemiclassicalArgs),
    /// Unitary and measurement-feedback channels side by side.
    Compare(CompareArgs),
    /// Light-deflection, integration-time and photon-budget estimates (SI).
    Deflection(DeflectionArgs),
    /// Invariant phase-space measure identity for three test functions.
    PhaseSpaceCheck(PhaseSpaceArgs),
    /// Runs every subcommand twice at reduced size and compares output hashes.
    SelfTest,
}

#[derive(Debug, Args, Default)]
pub struct ParamArgs {
    /// Newton constant (natural units, mass^-2).
    #[arg(long)]
    pub g_newton: Option<f64>,
    /// Matter mass (natural units).
    #[arg(long)]
    pub m: Option<f64>,
    /// Regulator / light-quantum mass (natural units, below m).
    #[arg(long)]
    pub mu: Option<f64>,
    /// Photon-matter coupling (natural units, mass).
    #[arg(long)]
    pub lambda_probe: Option<f64>,
    /// Box coupling (dimensionless).
    #[arg(long)]
    pub alpha_tilde: Option<f64>,
    /// Absolute pole displacement (natural units, mass^2).
    #[arg(long)]
    pub epsilon: Option<f64>,
}

impl ParamArgs {
    fn apply(&self, p: &mut crate::amplitudes::ModelParams) {
        set(&mut p.g_newton, self.g_newton);
        set(&mut p.m, self.m);
        set(&mut p.mu, self.mu);
        set(&mut p.lambda_probe, self.lambda_probe);
        set(&mut p.alpha_tilde, self.alpha_tilde);
        set(&mut p.epsilon, self.epsilon);
    }
}

#[derive(Debug, Args)]
pub struct OpticalTreeArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Relative pole displacements, comma separated, units of max(m^2, mu^2).
    #[arg(long, value_delimiter = ',')]
    pub eps_ladder: Vec<f64>,
    /// Weight-bump centre on the photon-energy path (units of m).
    #[arg(long)]
    pub center: Option<f64>,
    /// Initial quadrature panels (count).
    #[arg(long)]
    pub n_panels: Option<usize>,
    /// Allowed |ratio_restored - 1| (dimensionless).
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BoxCutArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Squared CM energies, comma separated (natural units, mass^2).
    #[arg(long, value_delimiter = ',')]
    pub s_values: Vec<f64>,
    /// Monte Carlo samples per side and s value (count).
    #[arg(long)]
    pub n_samples: Option<usize>,
    /// Allowed |ratio - 1| in combined standard errors (sigma).
    #[arg(long)]
    pub sigma_tolerance: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct ChannelArgs {
    /// Mean separation (natural units, length).
    #[arg(long)]
    pub d: Option<f64>,
    /// Mass of body 1 (natural units).
    #[arg(long)]
    pub m1: Option<f64>,
    /// Mass of body 2 (natural units).
    #[arg(long)]
    pub m2: Option<f64>,
    /// Local trap frequency, 0 for free masses (natural units, 1/time).
    #[arg(long)]
    pub trap_frequency: Option<f64>,
    /// Readout frame of the Duan witness.
    #[arg(long, value_enum)]
    pub readout: Option<ReadoutArg>,
    /// Newton constant (natural units).
    #[arg(long)]
    pub g_newton: Option<f64>,
    /// Yukawa regulator (natural units, 1/length).
    #[arg(long)]
    pub yukawa_mu: Option<f64>,
    /// Reduced Planck constant (natural units).
    #[arg(long)]
    pub hbar: Option<f64>,
    /// Measurement rate of the feedback channel (natural units, 1/time).
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum ReadoutArg {
    Direct,
    Facing,
}

impl ChannelArgs {
    fn apply(&self, c: &mut ChannelConfig) {
        set(&mut c.d, self.d);
        set(&mut c.masses[0], self.m1);
        set(&mut c.masses[1], self.m2);
        set(&mut c.trap_frequency, self.trap_frequency);
        if let Some(r) = self.readout {
            c.readout = match r {
                ReadoutArg::Direct => Readout::Direct,
                ReadoutArg::Facing => Readout::Facing,
            };
        }
        set(&mut c.g_newton, self.g_newton);
        set(&mut c.mu, self.yukawa_mu);
        set(&mut c.hbar, self.hbar);
        set(&mut c.gamma, self.gamma);
    }
}

#[derive(Debug, Args)]
pub struct EntangleArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Interaction time (natural units, time).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Rows in the time series (count).
    #[arg(long)]
    pub n_times: Option<usize>,
    /// Duan level whose first crossing is reported (dimensionless).
    #[arg(long)]
    pub duan_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SemiclassicalArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Trajectories (count).
    #[arg(long)]
    pub n_traj: Option<usize>,
    /// Steps per trajectory (count).
    #[arg(long)]
    pub n_steps: Option<usize>,
    /// Time step (natural units, time).
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Trajectories (count).
    #[arg(long)]
    pub n_traj: Option<usize>,
    /// Time step (natural units, time).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final time (natural units, time).
    #[arg(long)]
    pub horizon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DeflectionArgs {
    /// Source mass (kg).
    #[arg(long)]
    pub source_mass: Option<f64>,
    /// Impact parameter (m).
    #[arg(long)]
    pub b: Option<f64>,
    /// Superposition separation of the source (m).
    #[arg(long)]
    pub delta_b: Option<f64>,
    /// Laser wavelength (m).
    #[arg(long)]
    pub lambda_laser: Option<f64>,
    /// Cavity length (m).
    #[arg(long)]
    pub cavity_length: Option<f64>,
    /// Photons in the cavity (count).
    #[arg(long)]
    pub n_gamma: Option<f64>,
    /// Desired integration time for the photon budget (s).
    #[arg(long)]
    pub target_time: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PhaseSpaceArgs {
    /// Shell mass (natural units).
    #[arg(long)]
    pub mu: Option<f64>,
    /// Samples per side and test function (count).
    #[arg(long)]
    pub n_samples: Option<usize>,
    /// Allowed |lhs - rhs| in combined standard errors (sigma).
    #[arg(long)]
    pub sigma_tolerance: Option<f64>,
}

fn set<T>(target: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *target = v;
    }
}

fn set_vec(target: &mut Vec<f64>, value: &[f64]) {
    if !value.is_empty() {
        *target = value.to_vec();
    }
}

/// Merges defaults, the config file and the flags into a [`RunConfig`].
/// `env_seed` is the value of [`SEED_ENV`], if set.
pub fn resolve(cli: &Cli, env_seed: Option<&str>) -> Result<RunConfig, String> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let command = match &cli.command {
        Command::OpticalTree(a) => {
            let mut c = file.optical_tree.clone();
            a.params.apply(&mut c.params);
            set_vec(&mut c.eps_ladder, &a.eps_ladder);
            set(&mut c.center, a.center);
            set(&mut c.n_panels, a.n_panels);
            set(&mut c.tolerance, a.tolerance);
            CommandConfig::OpticalTree(c)
        }
        Command::BoxCut(a) => {
            let mut c = file.box_cut.clone();
            a.params.apply(&mut c.params);
            set_vec(&mut c.s_values, &a.s_values);
            set(&mut c.n_samples, a.n_samples);
            set(&mut c.sigma_tolerance, a.sigma_tolerance);
            CommandConfig::BoxCut(c)
        }
        Command::Entangle(a) => {
            let mut c = file.entangle.clone();
            a.channel.apply(&mut c.channel);
            set(&mut c.dt, a.dt);
            set(&mut c.n_times, a.n_times);
            set(&mut c.duan_threshold, a.duan_threshold);
            CommandConfig::Entangle(c)
        }
        Command::Semiclassical(a) => {
            let mut c = file.semiclassical.clone();
            a.channel.apply(&mut c.channel);
            set(&mut c.n_traj, a.n_traj);
            set(&mut c.n_steps, a.n_steps);
            set(&mut c.dt, a.dt);
            CommandConfig::Semiclassical(c)
        }
        Command::Compare(a) => {
            let mut c = file.compare.clone();
            a.channel.apply(&mut c.channel);
            set(&mut c.n_traj, a.n_traj);
            set(&mut c.dt, a.dt);
            set(&mut c.horizon, a.horizon);
            CommandConfig::Compare(c)
        }
        Command::Deflection(a) => {
            let mut c = file.deflection.clone();
            set(&mut c.bending.source_mass, a.source_mass);
            set(&mut c.bending.b, a.b);
            set(&mut c.bending.delta_b, a.delta_b);
            set(&mut c.bending.lambda_laser, a.lambda_laser);
            set(&mut c.bending.cavity_length, a.cavity_length);
            set(&mut c.bending.n_gamma, a.n_gamma);
            set(&mut c.target_time, a.target_time);
            CommandConfig::Deflection(c)
        }
        Command::PhaseSpaceCheck(a) => {
            let mut c = file.phase_space_check.clone();
            set(&mut c.mu, a.mu);
            set(&mut c.n_samples, a.n_samples);
            set(&mut c.sigma_tolerance, a.sigma_tolerance);
            CommandConfig::PhaseSpaceCheck(c)
        }
        Command::SelfTest => return Err("self-test has no run configuration".into()),
    };
    let env_seed = match env_seed {
        Some(s) => Some(s.trim().parse::<u64>().map_err(|e| format!("{SEED_ENV}={s:?}: {e}"))?),
        None => None,
    };
    Ok(RunConfig {
        seed: cli.seed.or(file.seed).or(env_seed),
        threads: cli.threads.or(file.threads),
        output_dir: cli.out.clone().or(file.output_dir).unwrap_or_else(|| PathBuf::from("gravitas-out")),
        format: cli.format.or(file.format).unwrap_or(OutputFormat::Csv),
        command,
    })
}

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs a resolved configuration on its thread pool.
pub fn run_config(cfg: &RunConfig) -> Result<RunManifest, CliError> {
    with_threads(cfg.threads, || execute(cfg))?
}

fn report(manifest: &RunManifest) -> i32 {
    for c in &manifest.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for n in &manifest.notes {
        println!("note: {n}");
    }
    for o in &manifest.outputs {
        println!("wrote {}", o.path.display());
    }
    if manifest.passed() {
        0
    } else {
        eprintln!("one or more checks failed; see the manifest for details");
        1
    }
}

/// Reduced-size configurations of every subcommand, used by the self-test.
pub fn self_test_configs(seed: u64, dir: &Path) -> Vec<RunConfig> {
    let small_channel = CompareConfig { horizon: 10.0, n_traj: 16, ..CompareConfig::default() };
    let commands = vec![
        CommandConfig::OpticalTree(OpticalTreeConfig::default()),
        CommandConfig::BoxCut(BoxCutConfig { n_samples: 20_000, s_values: vec![3.9, 5.0], ..BoxCutConfig::default() }),
        CommandConfig::Entangle(EntangleConfig { n_times: 21, ..EntangleConfig::default() }),
        CommandConfig::Semiclassical(SemiclassicalConfig { n_traj: 16, n_steps: 200, ..SemiclassicalConfig::default() }),
        CommandConfig::Compare(small_channel),
        CommandConfig::Deflection(DeflectionConfig::default()),
        CommandConfig::PhaseSpaceCheck(PhaseSpaceConfig { n_samples: 20_000, ..PhaseSpaceConfig::default() }),
    ];
    commands
        .into_iter()
        .map(|command| RunConfig { seed: Some(seed), threads: None, output_dir: dir.to_path_buf(), format: OutputFormat::Csv, command })
        .collect()
}

/// Runs every reduced configuration three times (twice on `threads`
/// workers, once on one worker) and compares the SHA-256 of each data file.
/// Returns one `(name, identical)` pair per subcommand.
pub fn self_test(seed: u64, threads: Option<usize>, root: &Path) -> Result<Vec<(String, bool)>, CliError> {
    let mut results = Vec::new();
    for (label, t) in [("a", threads), ("b", threads), ("single", Some(1))] {
        let dir = root.join(label);
        let mut hashes = Vec::new();
        for mut cfg in self_test_configs(seed, &dir) {
            cfg.threads = t;
            let m = run_config(&cfg)?;
            hashes.push((cfg.command.name().to_string(), m.outputs.iter().map(|o| o.sha256.clone()).collect::<Vec<_>>()));
        }
        results.push(hashes);
    }
    Ok(results[0]
        .iter()
        .zip(&results[1])
        .zip(&results[2])
        .map(|(((name, a), (_, b)), (_, c))| (name.clone(), a == b && a == c))
        .collect())
}

/// Entry point of the binary; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let env_seed = std::env::var(SEED_ENV).ok();
    if let Command::SelfTest = cli.command {
        let seed = match cli.seed.map(Ok).or_else(|| env_seed.as_deref().map(|s| s.trim().parse::<u64>())) {
            Some(Ok(s)) => s,
            Some(Err(e)) => {
                eprintln!("configuration error: {SEED_ENV}: {e}");
                return 2;
            }
            None => 20_240_601,
        };
        let root = cli.out.clone().unwrap_or_else(|| PathBuf::from("gravitas-out")).join("self-test");
        return match self_test(seed, cli.threads, &root) {
            Ok(rows) => {
                for (name, ok) in &rows {
                    println!("{} {name}: outputs {}", if *ok { "PASS" } else { "FAIL" }, if *ok { "bit-identical" } else { "differ" });
                }
                i32::from(!rows.iter().all(|(_, ok)| *ok))
            }
            Err(e) => {
                eprintln!("{e}");
                e.exit_code()
            }
        };
    }
    let cfg = match resolve(&cli, env_seed.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return 2;
        }
    };
    match run_config(&cfg) {
        Ok(m) => report(&m),
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
