use super::config::*;
use super::output::{Check, OutputSink, RunManifest, SCHEMA_VERSION};
use crate::entanglement::{propagator, GaussianState};
use crate::error::GravitasError;
use crate::estimators::deflection_report;
use crate::kinematics::{check_invariant_measure_identity, MeasureTestFunction};
use crate::rng::RngStream;
use crate::semiclassical::{compare_channels, run_ensemble, run_trajectory, EnsembleSettings};
use crate::unitarity::{
    optical_tree_check, unitarity_violation_scan, BumpWeight, PhotonEnergySweep, RowStatus, ScanGrid,
};
use serde::Serialize;
use std::time::Instant;

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Exit code 2.
    Config(String),
    /// Exit code 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<GravitasError> for CliError {
    fn from(e: GravitasError) -> Self {
        match e {
            GravitasError::InvalidParams(_)
            | GravitasError::ConfigShape(_)
            | GravitasError::NonpositiveSeparation(_)
            | GravitasError::StepSize { .. }
            | GravitasError::BelowThreshold { .. }
            | GravitasError::SuperluminalBoost { .. } => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("writing output: {e}"))
    }
}

#[derive(Default)]
struct Outcome {
    checks: Vec<Check>,
    provenance: Vec<(String, String)>,
    notes: Vec<String>,
}

impl Outcome {
    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }

    fn provenance(&mut self, result: &str, source: &str) {
        self.provenance.push((result.into(), source.into()));
    }
}

/// Runs a validated configuration, writes its data files and manifest, and
/// returns the manifest.
pub fn execute(cfg: &RunConfig) -> Result<RunManifest, CliError> {
    cfg.validate().map_err(CliError::Config)?;
    let start = Instant::now();
    let stem = cfg.command.name().replace('-', "_");
    let mut sink = OutputSink::new(&cfg.output_dir, &stem)?;
    let seed = cfg.seed_or_zero();
    let out = match &cfg.command {
        CommandConfig::OpticalTree(c) => cmd_optical_tree(c, &mut sink)?,
        CommandConfig::BoxCut(c) => cmd_box_cut(c, seed, cfg.format, &mut sink)?,
        CommandConfig::Entangle(c) => cmd_entangle(c, cfg.format, &mut sink)?,
        CommandConfig::Semiclassical(c) => cmd_semiclassical(c, seed, cfg.format, &mut sink)?,
        CommandConfig::Compare(c) => cmd_compare(c, seed, cfg.format, &mut sink)?,
        CommandConfig::Deflection(c) => cmd_deflection(c, &mut sink)?,
        CommandConfig::PhaseSpaceCheck(c) => cmd_phase_space_check(c, seed, &mut sink)?,
    };
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        toolkit_version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs: Vec::new(),
        provenance: out.provenance,
        checks: out.checks,
        notes: out.notes,
    };
    Ok(sink.finish(manifest)?.1)
}

fn cmd_optical_tree(c: &OpticalTreeConfig, sink: &mut OutputSink) -> Result<Outcome, CliError> {
    let path = PhotonEnergySweep::canonical(c.params.m);
    let weight = BumpWeight::for_ladder(c.center, &c.eps_ladder, c.params.m);
    let report = optical_tree_check(&path, &weight, &c.params, &c.eps_ladder, c.n_panels)?;
    sink.json("", "optical_report", &report)?;
    let mut out = Outcome::default();
    out.provenance("lhs", &report.provenance.lhs);
    out.provenance("rhs_with_gravitons", &report.provenance.rhs);
    match report.ratio_restored {
        Some(r) => out.check(
            "ratio_restored",
            (r - 1.0).abs() <= c.tolerance,
            format!("|lhs/rhs| = {r:.8}, tolerance {:e}", c.tolerance),
        ),
        None => out.check("ratio_restored", false, "right side with radiated states vanishes"),
    }
    out.notes.push(format!("ratio_elastic_only: {}", report.ratio_elastic_only_status));
    out.notes.push(format!("relative sign of lhs and rhs: {}", report.relative_sign));
    Ok(out)
}

#[derive(Serialize)]
struct BoxCutRow {
    s: f64,
    im_box: f64,
    mc_err_box: f64,
    rhs_annih: f64,
    mc_err_annih: f64,
    rhs_elastic: f64,
    rhs_elastic_err: f64,
    ratio_restored: Option<f64>,
    ratio_restored_err: Option<f64>,
    ratio_elastic: Option<f64>,
    ratio_elastic_err: Option<f64>,
    status: String,
}

fn status_text(s: &RowStatus) -> String {
    match s {
        RowStatus::Ok => "ok".into(),
        RowStatus::BelowThreshold => "below_threshold".into(),
        RowStatus::Undefined(why) => format!("undefined: {why}"),
    }
}

fn cmd_box_cut(c: &BoxCutConfig, seed: u64, format: OutputFormat, sink: &mut OutputSink) -> Result<Outcome, CliError> {
    let grid = ScanGrid::Box { s_values: c.s_values.clone(), n_samples: c.n_samples, stream: RngStream::new(seed, 0xB0C) };
    let rows = unitarity_violation_scan(&c.params, &grid)?;
    let table: Vec<BoxCutRow> = rows
        .iter()
        .map(|r| BoxCutRow {
            s: r.point,
            im_box: r.lhs,
            mc_err_box: r.lhs_error,
            rhs_annih: r.rhs_restored,
            mc_err_annih: r.rhs_restored_error,
            rhs_elastic: r.rhs_elastic,
            rhs_elastic_err: r.rhs_elastic_error,
            ratio_restored: r.ratio_restored,
            ratio_restored_err: r.ratio_restored_error,
            ratio_elastic: r.ratio_elastic,
            ratio_elastic_err: r.ratio_elastic_error,
            status: status_text(&r.status),
        })
        .collect();
    sink.table("", "box_cut_scan", &table, format)?;
    let mut out = Outcome::default();
    out.provenance("im_box", "box_cut_im_forward: flat two-body sampling");
    out.provenance("rhs_annih", "annihilation_rhs: stratified polar angle, independent stream");
    out.provenance("rhs_elastic", "elastic_rhs: adaptive quadrature");
    for r in &rows {
        match (&r.status, r.ratio_restored, r.ratio_restored_error) {
            (RowStatus::Ok, Some(q), Some(dq)) => {
                let pulls = (q - 1.0).abs() / dq;
                out.check(
                    &format!("ratio_restored(s={})", r.point),
                    pulls <= c.sigma_tolerance,
                    format!("ratio {q:.6} +- {dq:.2e} ({pulls:.2} sigma)"),
                );
                if let Some(e) = r.ratio_elastic {
                    out.notes.push(format!("s = {}: ratio_elastic = {e:.4e}", r.point));
                }
            }
            (status, _, _) => {
                let msg = format!("s = {}: {}", r.point, status_text(status));
                eprintln!("warning: {msg}");
                out.notes.push(msg);
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct EntangleSummary {
    duration: f64,
    duan: f64,
    log_negativity: f64,
    first_violation_time: Option<f64>,
    duan_threshold: f64,
    symplectic_defect: f64,
    min_physical_eigenvalue: f64,
}

fn cmd_entangle(c: &EntangleConfig, format: OutputFormat, sink: &mut OutputSink) -> Result<Outcome, CliError> {
    if !(c.dt >= 0.0) {
        return Err(CliError::Config(format!("dt must be nonnegative, got {}", c.dt)));
    }
    let circuit = c.channel.circuit();
    let coupling = c.channel.coupling();
    let initial = circuit.default_initial(c.channel.hbar);
    let h = circuit.hamiltonian(&coupling)?;
    let times: Vec<f64> = if c.dt == 0.0 || c.n_times == 1 {
        vec![c.dt]
    } else {
        (0..c.n_times).map(|i| c.dt * i as f64 / (c.n_times - 1) as f64).collect()
    };
    let rows = circuit.time_series(&initial, &times, &coupling)?;
    sink.table("", "witness_series", &rows, format)?;

    let final_state = propagator(&h, c.dt).apply(&initial);
    let defect = propagator(&h, c.dt).symplectic_defect();
    let last = rows.last().copied().expect("at least one row");
    let crossing = if c.dt > 0.0 {
        circuit.first_violation_time(&initial, &coupling, c.duan_threshold, c.dt, 400)?
    } else {
        None
    };
    let summary = EntangleSummary {
        duration: c.dt,
        duan: last.duan,
        log_negativity: last.e_n,
        first_violation_time: crossing,
        duan_threshold: c.duan_threshold,
        symplectic_defect: defect,
        min_physical_eigenvalue: final_state.min_physical_eigenvalue(),
    };
    sink.json("_summary", "entangle_summary", &summary)?;

    let mut out = Outcome::default();
    out.provenance("duan, E_N", "exact Gaussian propagation of the quadratized Hamiltonian");
    out.check("symplectic", defect < 1e-10, format!("max |S^T Omega S - Omega| = {defect:e}"));
    out.check("state_valid", final_state.validate().is_ok(), format!("min eigenvalue {:e}", summary.min_physical_eigenvalue));
    if c.dt == 0.0 {
        out.check("duan_at_zero", last.duan >= 1.0 - 1e-12, format!("duan = {}", last.duan));
    }
    Ok(out)
}

#[derive(Serialize)]
struct SemiclassicalSummary {
    n_traj: usize,
    heating_rate: f64,
    max_e_n: f64,
    min_duan: f64,
    min_ppt_margin: f64,
    ito_ratio_first_trajectory: [f64; 2],
    ito_tolerance: f64,
}

fn cmd_semiclassical(c: &SemiclassicalConfig, seed: u64, format: OutputFormat, sink: &mut OutputSink) -> Result<Outcome, CliError> {
    let fb = c.channel.feedback();
    let initial: GaussianState = c.channel.circuit().default_initial(c.channel.hbar);
    let ens = run_ensemble(&fb, &initial, c.n_traj, c.n_steps, c.dt, seed)?;
    sink.table("", "ensemble_series", &ens.rows, format)?;
    let first = run_trajectory(&fb, &initial, c.n_steps, c.dt, RngStream::new(seed, 0).derive(0))?;
    let (ito, tol) = first.ito_consistency();
    let summary = SemiclassicalSummary {
        n_traj: c.n_traj,
        heating_rate: ens.heating_rate(),
        max_e_n: ens.max_e_n(),
        min_duan: ens.min_duan(),
        min_ppt_margin: ens.rows.iter().map(|r| r.ppt_margin).fold(f64::INFINITY, f64::min),
        ito_ratio_first_trajectory: ito,
        ito_tolerance: tol,
    };
    sink.json("_summary", "semiclassical_summary", &summary)?;
    let mut out = Outcome::default();
    out.provenance("ensemble", "conditional Gaussian trajectories, streams (seed, i)");
    out.check("no_entanglement", summary.max_e_n < 1e-10, format!("max E_N = {:e}", summary.max_e_n));
    out.check("duan_at_least_one", summary.min_duan >= 1.0 - 1e-12, format!("min duan = {}", summary.min_duan));
    out.check(
        "ito_consistency",
        ito.iter().all(|r| (r - 1.0).abs() <= tol),
        format!("sum dW^2/(N dt) = {ito:?}, tolerance {tol:.3e}"),
    );
    Ok(out)
}

#[derive(Serialize)]
struct CompareSummary {
    headline: String,
    unitary_entangles: bool,
    semiclassical_entangles: bool,
    e_n_unitary_at_horizon: f64,
    max_e_n_semiclassical: f64,
    min_duan_unitary: f64,
    min_duan_semiclassical: f64,
    max_early_mean_rel_diff: f64,
    early_window: [f64; 2],
}

fn cmd_compare(c: &CompareConfig, seed: u64, format: OutputFormat, sink: &mut OutputSink) -> Result<Outcome, CliError> {
    let circuit = c.channel.circuit();
    let initial = circuit.default_initial(c.channel.hbar);
    let settings = EnsembleSettings { n_traj: c.n_traj, dt: c.dt, master_seed: seed };
    let rows = compare_channels(&c.channel.feedback(), &circuit, &initial, c.horizon, &settings)?;
    sink.table("", "channel_comparison", &rows, format)?;

    let last = rows.last().expect("at least one row");
    let max_en_sc = rows.iter().map(|r| r.e_n_semiclassical).fold(0.0, f64::max);
    let min_duan_u = rows.iter().map(|r| r.duan_unitary).fold(f64::INFINITY, f64::min);
    let min_duan_sc = rows.iter().map(|r| r.duan_semiclassical).fold(f64::INFINITY, f64::min);
    let window = [c.horizon / 20.0, c.horizon / 5.0];
    let early = rows
        .iter()
        .filter(|r| r.t >= window[0] && r.t <= window[1])
        .flat_map(|r| {
            [
                (r.mean_x1_semiclassical - r.mean_x1_unitary).abs() / r.mean_x1_unitary.abs(),
                (r.mean_x2_semiclassical - r.mean_x2_unitary).abs() / r.mean_x2_unitary.abs(),
            ]
        })
        .fold(0.0, f64::max);
    let unitary_entangles = last.e_n_unitary > 0.0 && min_duan_u < 1.0;
    let semiclassical_entangles = !(max_en_sc < 1e-10 && min_duan_sc >= 1.0 - 1e-12);
    let headline = match (unitary_entangles, semiclassical_entangles) {
        (true, false) => "unitary entangles, semiclassical does not",
        (true, true) => "both channels entangle",
        (false, false) => "neither channel entangles",
        (false, true) => "only the semiclassical channel entangles",
    };
    let summary = CompareSummary {
        headline: headline.into(),
        unitary_entangles,
        semiclassical_entangles,
        e_n_unitary_at_horizon: last.e_n_unitary,
        max_e_n_semiclassical: max_en_sc,
        min_duan_unitary: min_duan_u,
        min_duan_semiclassical: min_duan_sc,
        max_early_mean_rel_diff: early,
        early_window: window,
    };
    sink.json("_summary", "comparison_summary", &summary)?;

    let mut out = Outcome::default();
    out.provenance("unitary", "exact Gaussian propagation");
    out.provenance("semiclassical", "measurement-feedback ensemble");
    out.check("unitary entangles, semiclassical does not", unitary_entangles && !semiclassical_entangles, headline);
    out.check(
        "early_mean_positions",
        early <= 0.01,
        format!("max relative difference {early:.3e} on t in [{}, {}]", window[0], window[1]),
    );
    Ok(out)
}

fn cmd_deflection(c: &DeflectionConfig, sink: &mut OutputSink) -> Result<Outcome, CliError> {
    let report = deflection_report(&c.bending, c.target_time)?;
    sink.json("", "deflection_report", &report)?;
    let mut out = Outcome::default();
    out.provenance("all", "closed-form estimates, CODATA 2018 constants");
    out.notes.extend(report.notes.iter().cloned());
    Ok(out)
}

#[derive(Serialize)]
struct PhaseSpaceRow {
    test_function: &'static str,
    lhs: f64,
    lhs_err: f64,
    rhs: f64,
    rhs_err: f64,
    pull: f64,
}

#[derive(Serialize)]
struct PhaseSpaceDoc<'a> {
    mu: f64,
    n_samples: usize,
    rows: &'a [PhaseSpaceRow],
}

fn cmd_phase_space_check(c: &PhaseSpaceConfig, seed: u64, sink: &mut OutputSink) -> Result<Outcome, CliError> {
    if !(c.mu > 0.0) {
        return Err(CliError::Config(format!("mu must be positive, got {}", c.mu)));
    }
    let base = RngStream::new(seed, 0x95);
    let rows: Vec<PhaseSpaceRow> = MeasureTestFunction::ALL
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let r = check_invariant_measure_identity(|k| f.eval(k, c.mu), c.mu, base.derive(i as u64), c.n_samples);
            PhaseSpaceRow {
                test_function: f.name(),
                lhs: r.lhs.mean,
                lhs_err: r.lhs.std_error,
                rhs: r.rhs.mean,
                rhs_err: r.rhs.std_error,
                pull: (r.lhs.mean - r.rhs.mean) / r.mc_error,
            }
        })
        .collect();
    sink.json("", "phase_space_check", &PhaseSpaceDoc { mu: c.mu, n_samples: c.n_samples, rows: &rows })?;
    let mut out = Outcome::default();
    out.provenance("lhs", "three-momentum sampling");
    out.provenance("rhs", "four-momentum shell sampling, extrapolated to zero width");
    for r in &rows {
        out.check(r.test_function, r.pull.abs() <= c.sigma_tolerance, format!("pull {:.2} sigma", r.pull));
    }
    Ok(out)
}
