//! Two masses as a Gaussian continuous-variable system: quadratized Yukawa
//! coupling, exact symplectic evolution, the Duan product and the
//! logarithmic negativity.
//!
//! Phase-space ordering is `z = (x1, p1, x2, p2)`.

use crate::amplitudes::ModelParams;
use crate::error::{GravitasError, Result};
use crate::numeric::bisect;
use nalgebra::{Matrix4, Matrix5, SMatrix, Vector4};
use serde::{Deserialize, Serialize};

/// Block-diagonal symplectic form, `[[0, 1], [-1, 0]]` per mode.
pub fn omega() -> Matrix4<f64> {
    let mut o = Matrix4::zeros();
    o[(0, 1)] = 1.0;
    o[(1, 0)] = -1.0;
    o[(2, 3)] = 1.0;
    o[(3, 2)] = -1.0;
    o
}

/// First and second moments of a two-mode Gaussian state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    pub mean: Vector4<f64>,
    pub cov: Matrix4<f64>,
    pub hbar: f64,
}

impl GaussianState {
    pub fn new(mean: Vector4<f64>, cov: Matrix4<f64>, hbar: f64) -> Result<Self> {
        let s = Self { mean, cov, hbar };
        s.validate()?;
        Ok(s)
    }

    /// Product of two minimum-uncertainty Gaussians with the given position
    /// variances, centred at the origin.
    pub fn product_minimal(var_x: [f64; 2], hbar: f64) -> Self {
        let mut cov = Matrix4::zeros();
        for (i, v) in var_x.iter().enumerate() {
            cov[(2 * i, 2 * i)] = *v;
            cov[(2 * i + 1, 2 * i + 1)] = hbar * hbar / (4.0 * v);
        }
        Self { mean: Vector4::zeros(), cov, hbar }
    }

    /// Product of harmonic-oscillator ground states of frequency `omega`.
    pub fn ground_states(masses: [f64; 2], omega: f64, hbar: f64) -> Self {
        Self::product_minimal([hbar / (2.0 * masses[0] * omega), hbar / (2.0 * masses[1] * omega)], hbar)
    }

    /// Two-mode squeezed vacuum with squeezing `r` in unit-mass, unit-frequency
    /// quadratures.
    pub fn two_mode_squeezed(r: f64, hbar: f64) -> Self {
        let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        let h = hbar / 2.0;
        let cov = Matrix4::new(
            h * c, 0.0, h * s, 0.0,
            0.0, h * c, 0.0, -h * s,
            h * s, 0.0, h * c, 0.0,
            0.0, -h * s, 0.0, h * c,
        );
        Self { mean: Vector4::zeros(), cov, hbar }
    }

    /// Smallest eigenvalue of `cov + i hbar Omega / 2`, through its real
    /// symmetric 8x8 embedding.
    pub fn min_physical_eigenvalue(&self) -> f64 {
        let a = self.cov;
        let b = omega() * (self.hbar / 2.0);
        let mut m = SMatrix::<f64, 8, 8>::zeros();
        m.fixed_view_mut::<4, 4>(0, 0).copy_from(&a);
        m.fixed_view_mut::<4, 4>(4, 4).copy_from(&a);
        m.fixed_view_mut::<4, 4>(0, 4).copy_from(&(-b));
        m.fixed_view_mut::<4, 4>(4, 0).copy_from(&b);
        m.symmetric_eigenvalues().min()
    }

    pub fn validate(&self) -> Result<()> {
        let scale = self.cov.abs().max().max(self.hbar);
        if (self.cov - self.cov.transpose()).abs().max() > 1e-12 * scale {
            return Err(GravitasError::InvalidState("covariance not symmetric".into()));
        }
        if self.min_physical_eigenvalue() < -1e-10 * scale {
            return Err(GravitasError::InvalidState("cov + i hbar Omega/2 is not positive semidefinite".into()));
        }
        Ok(())
    }

    /// True when the two modes are uncorrelated.
    pub fn is_product(&self, tol: f64) -> bool {
        let scale = self.cov.abs().max();
        self.cov.fixed_view::<2, 2>(0, 2).abs().max() <= tol * scale
    }

    /// Local parity `(x2, p2) -> (-x2, -p2)` on the second mass.
    pub fn mirror_second(&self) -> Self {
        let p = Matrix4::from_diagonal(&Vector4::new(1.0, 1.0, -1.0, -1.0));
        Self { mean: p * self.mean, cov: p * self.cov * p, hbar: self.hbar }
    }

    pub fn var_x_minus(&self) -> f64 {
        self.cov[(0, 0)] - 2.0 * self.cov[(0, 2)] + self.cov[(2, 2)]
    }

    pub fn var_p_plus(&self) -> f64 {
        self.cov[(1, 1)] + 2.0 * self.cov[(1, 3)] + self.cov[(3, 3)]
    }
}

/// `Var(x1 - x2) Var(p1 + p2) / hbar^2`; below 1 only for entangled states.
pub fn duan_witness(state: &GaussianState) -> f64 {
    state.var_x_minus() * state.var_p_plus() / (state.hbar * state.hbar)
}

/// Smaller symplectic eigenvalue of the partially transposed covariance.
///
/// With `K = V^(1/2) Omega V^(1/2)` real antisymmetric, `-K^2` is symmetric
/// with eigenvalues `nu^2`, each twice. This stays accurate when the two
/// symplectic eigenvalues are degenerate, as for pure product states.
pub fn partial_transpose_min_symplectic(state: &GaussianState) -> f64 {
    let flip = Matrix4::from_diagonal(&Vector4::new(1.0, 1.0, 1.0, -1.0));
    let v = flip * state.cov * flip;
    let eig = v.symmetric_eigen();
    let root = eig.eigenvectors * Matrix4::from_diagonal(&eig.eigenvalues.map(|x| x.max(0.0).sqrt())) * eig.eigenvectors.transpose();
    let k = root * omega() * root;
    let m = -(k * k);
    let m = (m + m.transpose()) * 0.5;
    m.symmetric_eigenvalues().min().max(0.0).sqrt()
}

/// `max(0, -ln(2 nu / hbar))`, in nats.
pub fn log_negativity(state: &GaussianState) -> f64 {
    let nu = partial_transpose_min_symplectic(state);
    (-(2.0 * nu / state.hbar).ln()).max(0.0)
}

/// [`log_negativity`] in bits.
pub fn log_negativity_log2(state: &GaussianState) -> f64 {
    log_negativity(state) / std::f64::consts::LN_2
}

/// `H = z^T hmat z / 2 + linear . z + constant`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticHamiltonian {
    pub hmat: Matrix4<f64>,
    pub linear: Vector4<f64>,
    pub constant: f64,
}

impl QuadraticHamiltonian {
    /// Free particles of the given masses.
    pub fn free(masses: [f64; 2]) -> Self {
        let mut h = Matrix4::zeros();
        h[(1, 1)] = 1.0 / masses[0];
        h[(3, 3)] = 1.0 / masses[1];
        Self { hmat: h, linear: Vector4::zeros(), constant: 0.0 }
    }

    /// Adds `m_i omega^2 x_i^2 / 2` for each mass.
    pub fn with_local_traps(mut self, masses: [f64; 2], omega: f64) -> Self {
        self.hmat[(0, 0)] += masses[0] * omega * omega;
        self.hmat[(2, 2)] += masses[1] * omega * omega;
        self
    }

    /// True when no term couples the two masses.
    pub fn is_local(&self) -> bool {
        self.hmat.fixed_view::<2, 2>(0, 2).iter().all(|x| *x == 0.0)
    }
}

/// Yukawa-regulated Newton potential `-G m1 m2 exp(-mu r) / r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Yukawa {
    pub g_newton: f64,
    /// Regulator mass; zero gives pure Newton.
    pub mu: f64,
}

impl From<&ModelParams> for Yukawa {
    fn from(p: &ModelParams) -> Self {
        Self { g_newton: p.g_newton, mu: p.mu }
    }
}

impl Yukawa {
    pub fn newton(g_newton: f64) -> Self {
        Self { g_newton, mu: 0.0 }
    }

    pub fn potential(&self, r: f64, m1: f64, m2: f64) -> f64 {
        -self.g_newton * m1 * m2 * (-self.mu * r).exp() / r
    }

    pub fn d1(&self, r: f64, m1: f64, m2: f64) -> f64 {
        self.g_newton * m1 * m2 * (-self.mu * r).exp() * (1.0 / (r * r) + self.mu / r)
    }

    pub fn d2(&self, r: f64, m1: f64, m2: f64) -> f64 {
        let mu = self.mu;
        -self.g_newton * m1 * m2 * (-mu * r).exp() * (2.0 / r.powi(3) + 2.0 * mu / (r * r) + mu * mu / r)
    }
}

/// Kinetic terms plus the second-order expansion of the potential in
/// `x2 - x1` about separation `d` (mass 1 at `-d/2`, mass 2 at `+d/2`).
pub fn quadratize_newton(d: f64, coupling: &Yukawa, masses: [f64; 2]) -> Result<QuadraticHamiltonian> {
    if !(d > 0.0) {
        return Err(GravitasError::NonpositiveSeparation(d));
    }
    let [m1, m2] = masses;
    let u1 = coupling.d1(d, m1, m2);
    let u2 = coupling.d2(d, m1, m2);
    let mut h = QuadraticHamiltonian::free(masses);
    h.hmat[(0, 0)] += u2;
    h.hmat[(2, 2)] += u2;
    h.hmat[(0, 2)] -= u2;
    h.hmat[(2, 0)] -= u2;
    h.linear[0] = -u1;
    h.linear[2] = u1;
    h.constant = coupling.potential(d, m1, m2);
    Ok(h)
}

/// Affine phase-space map `z -> S z + drift` generated by a quadratic
/// Hamiltonian over a fixed time.
#[derive(Clone, Debug, PartialEq)]
pub struct Propagator {
    pub s: Matrix4<f64>,
    pub drift: Vector4<f64>,
}

impl Propagator {
    /// Max-norm of `S^T Omega S - Omega`.
    pub fn symplectic_defect(&self) -> f64 {
        let o = omega();
        (self.s.transpose() * o * self.s - o).abs().max()
    }

    pub fn apply(&self, state: &GaussianState) -> GaussianState {
        GaussianState {
            mean: self.s * state.mean + self.drift,
            cov: self.s * state.cov * self.s.transpose(),
            hbar: state.hbar,
        }
    }

    /// `other` after `self`.
    pub fn then(&self, other: &Propagator) -> Propagator {
        Propagator { s: other.s * self.s, drift: other.s * self.drift + other.drift }
    }
}

/// Solves `dz/dt = Omega (hmat z + linear)` exactly through the exponential
/// of the augmented 5x5 generator.
pub fn propagator(h: &QuadraticHamiltonian, t: f64) -> Propagator {
    let o = omega();
    let a = o * h.hmat * t;
    let b = o * h.linear * t;
    let mut g = Matrix5::zeros();
    g.fixed_view_mut::<4, 4>(0, 0).copy_from(&a);
    g.fixed_view_mut::<4, 1>(0, 4).copy_from(&b);
    let e = g.exp();
    Propagator { s: e.fixed_view::<4, 4>(0, 0).into_owned(), drift: e.fixed_view::<4, 1>(0, 4).into_owned() }
}

/// Evolves `state` under `h` for time `t`.
pub fn evolve_gaussian(state: &GaussianState, h: &QuadraticHamiltonian, t: f64) -> GaussianState {
    let p = propagator(h, t);
    debug_assert!(p.symplectic_defect() < 1e-8 * p.s.abs().max().powi(2).max(1.0));
    p.apply(state)
}

/// Local frame in which the witnesses are read out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    /// Both masses measured along the common axis.
    Direct,
    /// Each mass measured along its own axis pointing at the other mass,
    /// i.e. a local parity on mass 2.
    Facing,
}

impl Readout {
    pub fn frame(&self, state: &GaussianState) -> GaussianState {
        match self {
            Readout::Direct => state.clone(),
            Readout::Facing => state.mirror_second(),
        }
    }
}

/// The two-mass entangling experiment: masses held in weak local traps at
/// separation `d`, prepared in a product state and left to interact.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig1Circuit {
    pub d: f64,
    pub masses: [f64; 2],
    /// Local trap frequency; zero for free masses.
    pub trap_frequency: f64,
    pub readout: Readout,
}

impl Default for Fig1Circuit {
    fn default() -> Self {
        Self { d: 10.0, masses: [1.0, 1.0], trap_frequency: 0.1, readout: Readout::Facing }
    }
}

/// Final state and witnesses of one circuit run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitOutcome {
    pub state: GaussianState,
    pub duan: f64,
    pub log_negativity: f64,
}

/// One row of a witness time series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRow {
    pub t: f64,
    pub duan: f64,
    #[serde(rename = "E_N")]
    pub e_n: f64,
    pub var_xminus: f64,
    pub var_pplus: f64,
}

impl Fig1Circuit {
    pub fn hamiltonian(&self, coupling: &Yukawa) -> Result<QuadraticHamiltonian> {
        Ok(quadratize_newton(self.d, coupling, self.masses)?.with_local_traps(self.masses, self.trap_frequency))
    }

    /// Trap ground states, or for free masses minimum-uncertainty states of
    /// position variance `d/10`.
    pub fn default_initial(&self, hbar: f64) -> GaussianState {
        if self.trap_frequency > 0.0 {
            GaussianState::ground_states(self.masses, self.trap_frequency, hbar)
        } else {
            GaussianState::product_minimal([self.d / 10.0; 2], hbar)
        }
    }

    pub fn witness(&self, state: &GaussianState, t: f64) -> WitnessRow {
        let r = self.readout.frame(state);
        WitnessRow { t, duan: duan_witness(&r), e_n: log_negativity(state), var_xminus: r.var_x_minus(), var_pplus: r.var_p_plus() }
    }

    pub fn run(&self, initial: &GaussianState, dt: f64, coupling: &Yukawa) -> Result<CircuitOutcome> {
        initial.validate()?;
        if !initial.is_product(1e-14) {
            return Err(GravitasError::InvalidState("initial state must be a product state".into()));
        }
        let h = self.hamiltonian(coupling)?;
        let state = evolve_gaussian(initial, &h, dt);
        let w = self.witness(&state, dt);
        Ok(CircuitOutcome { state, duan: w.duan, log_negativity: w.e_n })
    }

    /// Witnesses at each requested time.
    pub fn time_series(&self, initial: &GaussianState, times: &[f64], coupling: &Yukawa) -> Result<Vec<WitnessRow>> {
        let h = self.hamiltonian(coupling)?;
        Ok(times.iter().map(|&t| self.witness(&evolve_gaussian(initial, &h, t), t)).collect())
    }

    /// First time in `(0, t_max]` at which the Duan product falls below
    /// `threshold`, located on a grid of `n_grid` steps and refined by bisection.
    pub fn first_violation_time(
        &self,
        initial: &GaussianState,
        coupling: &Yukawa,
        threshold: f64,
        t_max: f64,
        n_grid: usize,
    ) -> Result<Option<f64>> {
        let h = self.hamiltonian(coupling)?;
        let f = |t: f64| duan_witness(&self.readout.frame(&evolve_gaussian(initial, &h, t))) - threshold;
        Ok(first_crossing(f, t_max, n_grid))
    }
}

/// First downward zero crossing of `f` on `(0, t_max]`.
pub fn first_crossing<F: Fn(f64) -> f64>(f: F, t_max: f64, n_grid: usize) -> Option<f64> {
    let mut prev = (0.0, f(0.0));
    for i in 1..=n_grid {
        let t = t_max * i as f64 / n_grid as f64;
        let v = f(t);
        if prev.1 >= 0.0 && v < 0.0 {
            return bisect(&f, prev.0, t, 1e-12 * t_max);
        }
        prev = (t, v);
    }
    None
}

/// Runs the default circuit at separation `d` from `initial` for `dt`.
pub fn run_fig1_circuit(initial: &GaussianState, d: f64, dt: f64, coupling: &Yukawa) -> Result<CircuitOutcome> {
    Fig1Circuit { d, ..Fig1Circuit::default() }.run(initial, dt, coupling)
}
