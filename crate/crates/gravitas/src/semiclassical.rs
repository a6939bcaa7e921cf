//! Measurement-and-feedback gravity: each mass is weakly and continuously
//! position-measured, and each receives a local force computed from the
//! other mass's measurement record.
//!
//! The conditional state stays Gaussian. One step is
//! 1. Kalman update on the position records (`R = 1/(4 gamma dt)`),
//! 2. measurement backaction `Var p_i += gamma hbar^2 dt`,
//! 3. local feedback kick from the linearized potential at the estimates,
//! 4. exact local free (plus trap) drift.
//!
//! The drift is split in two halves around steps 1-3.

use crate::entanglement::{
    duan_witness, evolve_gaussian, log_negativity, partial_transpose_min_symplectic, propagator, Fig1Circuit,
    GaussianState, Propagator, QuadraticHamiltonian, Readout, Yukawa,
};
use crate::error::{GravitasError, Result};
use crate::numeric::{linear_fit, KahanSum};
use crate::rng::RngStream;
use nalgebra::{Matrix2, Matrix4, Matrix4x2, Vector2, Vector4};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest allowed `gamma * dt`.
pub const MAX_GAMMA_DT: f64 = 0.1;

/// Measurement rate of the documented default run.
pub const DEFAULT_GAMMA: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedbackConfig {
    /// Measurement rate per mass (inverse time).
    pub gamma: f64,
    pub d: f64,
    pub masses: [f64; 2],
    pub trap_frequency: f64,
    pub coupling: Yukawa,
    pub hbar: f64,
    pub readout: Readout,
}

impl Default for FeedbackConfig {
    fn default() -> Self {
        Self::matched(&Fig1Circuit::default(), Yukawa::newton(1.0), DEFAULT_GAMMA, 1.0)
    }
}

impl FeedbackConfig {
    /// Same masses, separation, trap and readout as `circuit`.
    pub fn matched(circuit: &Fig1Circuit, coupling: Yukawa, gamma: f64, hbar: f64) -> Self {
        Self {
            gamma,
            d: circuit.d,
            masses: circuit.masses,
            trap_frequency: circuit.trap_frequency,
            coupling,
            hbar,
            readout: circuit.readout,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(GravitasError::InvalidParams(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.d > 0.0) {
            return Err(GravitasError::NonpositiveSeparation(self.d));
        }
        if !(self.masses.iter().all(|m| *m > 0.0) && self.hbar > 0.0 && self.trap_frequency >= 0.0) {
            return Err(GravitasError::InvalidParams("masses and hbar must be positive, trap frequency nonnegative".into()));
        }
        Ok(())
    }

    /// `(U'(d), U''(d))`: the constant and linear feedback gains.
    pub fn feedback_gain(&self) -> (f64, f64) {
        let [m1, m2] = self.masses;
        (self.coupling.d1(self.d, m1, m2), self.coupling.d2(self.d, m1, m2))
    }

    fn local_hamiltonian(&self) -> QuadraticHamiltonian {
        QuadraticHamiltonian::free(self.masses).with_local_traps(self.masses, self.trap_frequency)
    }
}

/// Symplectic part of the feedback map over `dt`: a momentum shear on each
/// mass from the curvature of the linearized potential.
pub fn feedback_symplectic(cfg: &FeedbackConfig, dt: f64) -> Matrix4<f64> {
    let (_, u2) = cfg.feedback_gain();
    let mut s = Matrix4::identity();
    s[(1, 0)] = -u2 * dt;
    s[(3, 2)] = -u2 * dt;
    s
}

/// Max-norm of the blocks of `s` coupling mass 1 to mass 2.
pub fn cross_block_norm(s: &Matrix4<f64>) -> f64 {
    s.fixed_view::<2, 2>(0, 2).abs().max().max(s.fixed_view::<2, 2>(2, 0).abs().max())
}

/// Precomputed step maps for fixed `cfg` and `dt`.
#[derive(Clone, Debug)]
pub struct Stepper {
    cfg: FeedbackConfig,
    dt: f64,
    drift: Propagator,
    shear: Matrix4<f64>,
    r: f64,
}

impl Stepper {
    pub fn new(cfg: &FeedbackConfig, dt: f64) -> Result<Self> {
        cfg.validate()?;
        if !(dt > 0.0) {
            return Err(GravitasError::InvalidParams(format!("dt must be positive, got {dt}")));
        }
        let gamma_dt = cfg.gamma * dt;
        if gamma_dt > MAX_GAMMA_DT {
            return Err(GravitasError::StepSize { gamma_dt });
        }
        Ok(Self {
            cfg: *cfg,
            dt,
            drift: propagator(&cfg.local_hamiltonian(), 0.5 * dt),
            shear: feedback_symplectic(cfg, dt),
            r: 1.0 / (4.0 * cfg.gamma * dt),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// One full step driven by Wiener increments `dw`; returns the new
    /// conditional state and the two position records.
    pub fn step(&self, state: &GaussianState, dw: [f64; 2]) -> Result<(GaussianState, [f64; 2])> {
        let half = self.drift.apply(state);
        let c = half.cov;
        let s = Matrix2::new(c[(0, 0)] + self.r, c[(0, 2)], c[(2, 0)], c[(2, 2)] + self.r);
        let chol = s.cholesky().ok_or_else(|| GravitasError::InvalidState("innovation covariance not positive".into()))?;
        let xi = Vector2::new(dw[0], dw[1]) / self.dt.sqrt();
        let innovation = chol.l() * xi;
        let record = [half.mean[0] + innovation[0], half.mean[2] + innovation[1]];

        let cht = Matrix4x2::from_columns(&[c.column(0).into_owned(), c.column(2).into_owned()]);
        let gain = cht * chol.inverse();
        let mut mean = half.mean + gain * innovation;
        let mut cov = c - gain * cht.transpose();

        let backaction = self.cfg.gamma * self.cfg.hbar * self.cfg.hbar * self.dt;
        cov[(1, 1)] += backaction;
        cov[(3, 3)] += backaction;

        let (u1, u2) = self.cfg.feedback_gain();
        let (est1, est2) = (mean[0], mean[2]);
        mean = self.shear * mean;
        mean[1] += (u1 + u2 * est2) * self.dt;
        mean[3] += (-u1 + u2 * est1) * self.dt;
        cov = self.shear * cov * self.shear.transpose();

        mean = self.drift.s * mean + self.drift.drift;
        cov = self.drift.s * cov * self.drift.s.transpose();
        cov = (cov + cov.transpose()) * 0.5;
        Ok((GaussianState { mean, cov, hbar: state.hbar }, record))
    }

    /// Covariance part of [`Stepper::step`], which does not depend on the noise.
    pub fn step_cov(&self, cov: &Matrix4<f64>) -> Matrix4<f64> {
        let st = GaussianState { mean: Vector4::zeros(), cov: *cov, hbar: self.cfg.hbar };
        self.step(&st, [0.0, 0.0]).map(|(s, _)| s.cov).unwrap_or(*cov)
    }
}

/// One measurement-and-feedback step. See [`Stepper`] for repeated use.
pub fn step_trajectory(state: &GaussianState, cfg: &FeedbackConfig, dt: f64, dw: [f64; 2]) -> Result<GaussianState> {
    Ok(Stepper::new(cfg, dt)?.step(state, dw)?.0)
}

/// A single conditional trajectory.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionalGaussianTrajectory {
    pub times: Vec<f64>,
    pub means: Vec<Vector4<f64>>,
    pub covs: Vec<Matrix4<f64>>,
    /// Position records `(y1, y2)` of each step.
    pub records: Vec<[f64; 2]>,
    /// Wiener increments `(dW1, dW2)` of each step.
    pub noise: Vec<[f64; 2]>,
    pub stream: RngStream,
}

impl ConditionalGaussianTrajectory {
    /// `sum dW_i^2 / (N dt)` for each mass, and the tolerance `5/sqrt(N)`.
    pub fn ito_consistency(&self) -> ([f64; 2], f64) {
        let n = self.noise.len().max(1) as f64;
        let dt = self.times.get(1).map(|t| t - self.times[0]).unwrap_or(1.0);
        let mut acc = [0.0; 2];
        for dw in &self.noise {
            acc[0] += dw[0] * dw[0];
            acc[1] += dw[1] * dw[1];
        }
        ([acc[0] / (n * dt), acc[1] / (n * dt)], 5.0 / n.sqrt())
    }
}

fn wiener_increments(rng: &mut crate::rng::StreamRng, dt: f64) -> [f64; 2] {
    let sd = dt.sqrt();
    let a: f64 = StandardNormal.sample(rng);
    let b: f64 = StandardNormal.sample(rng);
    [a * sd, b * sd]
}

/// Runs one trajectory of `n_steps` steps with noise from `stream`.
pub fn run_trajectory(
    cfg: &FeedbackConfig,
    initial: &GaussianState,
    n_steps: usize,
    dt: f64,
    stream: RngStream,
) -> Result<ConditionalGaussianTrajectory> {
    initial.validate()?;
    let stepper = Stepper::new(cfg, dt)?;
    let mut rng = stream.rng();
    let mut out = ConditionalGaussianTrajectory {
        times: vec![0.0],
        means: vec![initial.mean],
        covs: vec![initial.cov],
        records: Vec::with_capacity(n_steps),
        noise: Vec::with_capacity(n_steps),
        stream,
    };
    let mut state = initial.clone();
    for i in 0..n_steps {
        let dw = wiener_increments(&mut rng, dt);
        let (next, rec) = stepper.step(&state, dw)?;
        state = next;
        out.times.push((i + 1) as f64 * dt);
        out.means.push(state.mean);
        out.covs.push(state.cov);
        out.records.push(rec);
        out.noise.push(dw);
    }
    Ok(out)
}

/// Conditional covariance after each of `n_steps` steps.
pub fn conditional_covariance_path(cfg: &FeedbackConfig, initial: &Matrix4<f64>, n_steps: usize, dt: f64) -> Result<Vec<Matrix4<f64>>> {
    let stepper = Stepper::new(cfg, dt)?;
    let mut c = *initial;
    let mut out = vec![c];
    for _ in 0..n_steps {
        c = stepper.step_cov(&c);
        out.push(c);
    }
    Ok(out)
}

/// Ensemble statistics at one recorded time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRow {
    pub t: f64,
    #[serde(rename = "E_N_unconditional")]
    pub e_n_unconditional: f64,
    /// `2 nu / hbar - 1` of the partially transposed unconditional state;
    /// nonnegative exactly when it is PPT.
    pub ppt_margin: f64,
    pub duan: f64,
    /// Standard error of `duan` from ten contiguous trajectory batches.
    pub duan_error: f64,
    pub var_p_mean: f64,
    pub mean_x1: f64,
    pub mean_x1_error: f64,
    pub mean_x2: f64,
    pub mean_x2_error: f64,
    pub n_traj: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub rows: Vec<EnsembleRow>,
    pub n_traj: usize,
    pub master_seed: u64,
}

impl EnsembleStats {
    /// Slope of `var_p_mean` against time.
    pub fn heating_rate(&self) -> f64 {
        let t: Vec<f64> = self.rows.iter().map(|r| r.t).collect();
        let v: Vec<f64> = self.rows.iter().map(|r| r.var_p_mean).collect();
        linear_fit(&t, &v).0
    }

    pub fn max_e_n(&self) -> f64 {
        self.rows.iter().map(|r| r.e_n_unconditional).fold(0.0, f64::max)
    }

    pub fn min_duan(&self) -> f64 {
        self.rows.iter().map(|r| r.duan).fold(f64::INFINITY, f64::min)
    }
}

const DUAN_BATCHES: usize = 10;

/// Unconditional state: conditional covariance plus the covariance of the
/// conditional means over `means`.
fn unconditional(means: &[Vector4<f64>], cond: &Matrix4<f64>, hbar: f64) -> GaussianState {
    let n = means.len() as f64;
    let mut mu = [KahanSum::new(), KahanSum::new(), KahanSum::new(), KahanSum::new()];
    for m in means {
        for i in 0..4 {
            mu[i].add(m[i]);
        }
    }
    let mean = Vector4::from_fn(|i, _| mu[i].value() / n);
    let mut cov = *cond;
    for i in 0..4 {
        for j in i..4 {
            let mut s = KahanSum::new();
            for m in means {
                s.add((m[i] - mean[i]) * (m[j] - mean[j]));
            }
            let v = s.value() / n;
            cov[(i, j)] += v;
            if i != j {
                cov[(j, i)] += v;
            }
        }
    }
    GaussianState { mean, cov, hbar }
}

/// Runs `n_traj` independent trajectories (trajectory `i` on stream
/// `(master_seed, i)`) and reduces them in trajectory order.
pub fn run_ensemble(
    cfg: &FeedbackConfig,
    initial: &GaussianState,
    n_traj: usize,
    n_steps: usize,
    dt: f64,
    master_seed: u64,
) -> Result<EnsembleStats> {
    initial.validate()?;
    if n_traj == 0 {
        return Err(GravitasError::InvalidParams("n_traj must be positive".into()));
    }
    let stepper = Stepper::new(cfg, dt)?;
    let covs = conditional_covariance_path(cfg, &initial.cov, n_steps, dt)?;
    let master = RngStream::new(master_seed, 0);

    let paths: Vec<Vec<Vector4<f64>>> = (0..n_traj)
        .into_par_iter()
        .map(|i| {
            let mut rng = master.derive(i as u64).rng();
            let mut state = initial.clone();
            let mut means = Vec::with_capacity(n_steps + 1);
            means.push(state.mean);
            for _ in 0..n_steps {
                let dw = wiener_increments(&mut rng, dt);
                state = stepper.step(&state, dw).map(|(s, _)| s).expect("stepper validated");
                means.push(state.mean);
            }
            means
        })
        .collect();

    let batch = n_traj.div_ceil(DUAN_BATCHES);
    let rows = (0..=n_steps)
        .into_par_iter()
        .map(|k| {
            let ms: Vec<Vector4<f64>> = paths.iter().map(|p| p[k]).collect();
            let state = unconditional(&ms, &covs[k], initial.hbar);
            let frame = cfg.readout.frame(&state);
            let duan = duan_witness(&frame);
            let batch_duans: Vec<f64> = ms
                .chunks(batch)
                .filter(|c| c.len() > 1)
                .map(|c| duan_witness(&cfg.readout.frame(&unconditional(c, &covs[k], initial.hbar))))
                .collect();
            let nb = batch_duans.len() as f64;
            let duan_error = if nb > 1.0 {
                let mean = batch_duans.iter().sum::<f64>() / nb;
                (batch_duans.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (nb - 1.0) / nb).sqrt()
            } else {
                0.0
            };
            let n = n_traj as f64;
            let spread = |i: usize| ((state.cov[(i, i)] - covs[k][(i, i)]).max(0.0) / n).sqrt();
            EnsembleRow {
                t: k as f64 * dt,
                e_n_unconditional: log_negativity(&state),
                ppt_margin: 2.0 * partial_transpose_min_symplectic(&state) / state.hbar - 1.0,
                duan,
                duan_error,
                var_p_mean: 0.5 * (state.cov[(1, 1)] + state.cov[(3, 3)]),
                mean_x1: state.mean[0],
                mean_x1_error: spread(0),
                mean_x2: state.mean[2],
                mean_x2_error: spread(2),
                n_traj,
            }
        })
        .collect();
    Ok(EnsembleStats { rows, n_traj, master_seed })
}

/// Side-by-side witnesses and mean positions of the unitary and the
/// measurement-feedback channel at one time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub t: f64,
    pub duan_unitary: f64,
    #[serde(rename = "E_N_unitary")]
    pub e_n_unitary: f64,
    pub duan_semiclassical: f64,
    pub duan_semiclassical_error: f64,
    #[serde(rename = "E_N_semiclassical")]
    pub e_n_semiclassical: f64,
    pub mean_x1_unitary: f64,
    pub mean_x2_unitary: f64,
    pub mean_x1_semiclassical: f64,
    pub mean_x1_semiclassical_error: f64,
    pub mean_x2_semiclassical: f64,
    pub mean_x2_semiclassical_error: f64,
}

/// Ensemble settings for [`compare_channels`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSettings {
    pub n_traj: usize,
    pub dt: f64,
    pub master_seed: u64,
}

impl Default for EnsembleSettings {
    fn default() -> Self {
        Self { n_traj: 500, dt: 0.05, master_seed: 2024 }
    }
}

/// Runs both channels from the same initial state up to `horizon`.
pub fn compare_channels(
    semiclassical: &FeedbackConfig,
    unitary: &Fig1Circuit,
    initial: &GaussianState,
    horizon: f64,
    settings: &EnsembleSettings,
) -> Result<Vec<ComparisonRow>> {
    if semiclassical.masses != unitary.masses
        || semiclassical.d != unitary.d
        || semiclassical.trap_frequency != unitary.trap_frequency
        || semiclassical.readout != unitary.readout
    {
        return Err(GravitasError::InvalidParams("channels must share masses, separation, trap and readout".into()));
    }
    if !(horizon > 0.0) {
        return Err(GravitasError::InvalidParams(format!("horizon must be positive, got {horizon}")));
    }
    let n_steps = (horizon / settings.dt).round().max(1.0) as usize;
    let ens = run_ensemble(semiclassical, initial, settings.n_traj, n_steps, settings.dt, settings.master_seed)?;
    let h = unitary.hamiltonian(&semiclassical.coupling)?;
    Ok(ens
        .rows
        .iter()
        .map(|r| {
            let u = evolve_gaussian(initial, &h, r.t);
            let w = unitary.witness(&u, r.t);
            ComparisonRow {
                t: r.t,
                duan_unitary: w.duan,
                e_n_unitary: w.e_n,
                duan_semiclassical: r.duan,
                duan_semiclassical_error: r.duan_error,
                e_n_semiclassical: r.e_n_unconditional,
                mean_x1_unitary: u.mean[0],
                mean_x2_unitary: u.mean[2],
                mean_x1_semiclassical: r.mean_x1,
                mean_x1_semiclassical_error: r.mean_x1_error,
                mean_x2_semiclassical: r.mean_x2,
                mean_x2_semiclassical_error: r.mean_x2_error,
            }
        })
        .collect())
}
