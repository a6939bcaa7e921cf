//! Closed-form Feynman amplitudes for Newtonian exchange, the photon-probe
//! processes and spin-0 / spin-2 mediators, with tensor-contraction
//! cross-checks of the exchange numerators.

use crate::error::{GravitasError, Result};
use crate::kinematics::{FourVector, KinematicConfig};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Couplings and masses shared by every amplitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Newton's constant, mass dimension -2. Zero gives the free theory.
    pub g_newton: f64,
    /// Probe-particle mass.
    pub m: f64,
    /// Yukawa regulator mass; must stay below `m`.
    pub mu: f64,
    /// Photon-matter coupling, mass dimension 1.
    pub lambda_probe: f64,
    /// Coupling of the particle-antiparticle box, kept independent of `g_newton`.
    pub alpha_tilde: f64,
    /// Absolute pole displacement.
    pub epsilon: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { g_newton: 1.0, m: 1.0, mu: 0.1, lambda_probe: 1.0, alpha_tilde: 1.0, epsilon: 1e-3 }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(GravitasError::InvalidParams(msg.to_string()));
        let all = [self.g_newton, self.m, self.mu, self.lambda_probe, self.alpha_tilde, self.epsilon];
        if all.iter().any(|x| !x.is_finite()) {
            return bad("non-finite parameter");
        }
        if self.g_newton < 0.0 {
            return bad("g_newton must be >= 0");
        }
        if self.m <= 0.0 || self.mu <= 0.0 || self.epsilon <= 0.0 {
            return bad("m, mu and epsilon must be > 0");
        }
        if self.mu >= self.m {
            return bad("mu must be below m");
        }
        if self.lambda_probe < 0.0 || self.alpha_tilde < 0.0 {
            return bad("couplings must be >= 0");
        }
        Ok(())
    }

    /// Absolute epsilon for a relative ladder entry: `eps_rel * max(m^2, mu^2)`.
    pub fn eps_from_rel(&self, eps_rel: f64) -> f64 {
        eps_rel * (self.m * self.m).max(self.mu * self.mu)
    }

    pub fn with_epsilon(mut self, eps: f64) -> Self {
        self.epsilon = eps;
        self
    }
}

/// Which formula produced an amplitude.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    NewtonExchange,
    SixPointTree,
    Spin2Exchange,
    Spin0Exchange,
    ComptonProbe,
    GravitonEmission,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexAmplitude {
    pub value: Complex64,
    pub channel: Channel,
}

/// Momentum-space Yukawa element `4 pi G m^2 / (q^2 + mu^2)`.
pub fn newton_potential_element(q: [f64; 3], params: &ModelParams) -> f64 {
    let q2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
    4.0 * PI * params.g_newton * params.m * params.m / (q2 + params.mu * params.mu)
}

/// Guard on `|-t + mu^2|` relative to `mu^2` below which the Newton
/// amplitude reports a pole.
pub const POLE_GUARD: f64 = 1e-12;

/// `-16 pi G m^4 / (-t + mu^2)`.
pub fn m_2to2_newton(t: f64, params: &ModelParams) -> Result<ComplexAmplitude> {
    let den = -t + params.mu * params.mu;
    if den.abs() < POLE_GUARD * params.mu * params.mu {
        return Err(GravitasError::Pole { denominator: den });
    }
    let m4 = params.m.powi(4);
    Ok(ComplexAmplitude { value: Complex64::new(-16.0 * PI * params.g_newton * m4 / den, 0.0), channel: Channel::NewtonExchange })
}

/// `1 / (x - i eps)`.
pub fn feynman_propagator(x: f64, eps: f64) -> Complex64 {
    let d = x * x + eps * eps;
    Complex64::new(x / d, eps / d)
}

fn check_masses(cfg: &KinematicConfig, n_in: usize, n_out: usize, masses: &[f64], what: &str) -> Result<()> {
    if cfg.incoming.len() != n_in || cfg.outgoing.len() != n_out || cfg.masses.len() != masses.len() {
        return Err(GravitasError::ConfigShape(format!(
            "{what}: expected {n_in} -> {n_out} legs, got {} -> {}",
            cfg.incoming.len(),
            cfg.outgoing.len()
        )));
    }
    for (i, (a, b)) in cfg.masses.iter().zip(masses).enumerate() {
        if (a - b).abs() > 1e-12 * b.abs().max(1.0) {
            return Err(GravitasError::ConfigShape(format!("{what}: leg {i} has mass {a}, expected {b}")));
        }
    }
    Ok(())
}

/// Outer denominators and exchanged momentum of the six-point tree, legs
/// ordered `(k, p1, p2) -> (k', p1', p2')`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SixPointParts {
    /// `(p1 + k)^2 + m^2`.
    pub absorb: f64,
    /// `(p2' + k')^2 + m^2`.
    pub emit: f64,
    /// `k~ = p1' - (p1 + k)`.
    pub exchanged: FourVector,
}

pub fn six_point_parts(cfg: &KinematicConfig, params: &ModelParams) -> Result<SixPointParts> {
    let m = params.m;
    check_masses(cfg, 3, 3, &[0.0, m, m, 0.0, m, m], "six-point tree")?;
    let (k, p1) = (cfg.incoming[0], cfg.incoming[1]);
    let (kp, p1p, p2p) = (cfg.outgoing[0], cfg.outgoing[1], cfg.outgoing[2]);
    Ok(SixPointParts {
        absorb: (p1 + k).square() + m * m,
        emit: (p2p + kp).square() + m * m,
        exchanged: p1p - (p1 + k),
    })
}

/// Photon absorbed on particle 1, Yukawa exchange, photon emitted from
/// particle 2; every denominator carries `-i eps`.
pub fn m_3to3_tree(cfg: &KinematicConfig, params: &ModelParams) -> Result<ComplexAmplitude> {
    let parts = six_point_parts(cfg, params)?;
    let eps = params.epsilon;
    let lam = params.lambda_probe;
    let mid = params.g_newton * params.m.powi(4)
        * feynman_propagator(parts.exchanged.square() + params.mu * params.mu, eps);
    let value = lam * feynman_propagator(parts.absorb, eps) * mid * lam * feynman_propagator(parts.emit, eps);
    Ok(ComplexAmplitude { value, channel: Channel::SixPointTree })
}

/// Near-pole imaginary part of the six-point tree with the on-shell delta
/// replaced by a unit-normalized Gaussian of width `delta_width` in
/// `k~^2 + mu^2`. The delta carries its `pi` from `Im 1/(x - i eps)`.
pub fn im_m_3to3_near_pole(cfg: &KinematicConfig, params: &ModelParams, delta_width: f64) -> Result<f64> {
    let parts = six_point_parts(cfg, params)?;
    let x = parts.exchanged.square() + params.mu * params.mu;
    let delta = (-0.5 * (x / delta_width).powi(2)).exp() / (delta_width * (2.0 * PI).sqrt());
    let lam = params.lambda_probe;
    Ok(PI * params.g_newton * params.m.powi(4) * (lam / parts.absorb) * delta * (lam / parts.emit))
}

/// Symmetric rank-2 tensor with lower indices.
pub type Tensor2 = [[f64; 4]; 4];
/// Rank-4 tensor with upper indices.
pub type Tensor4 = [[[[f64; 4]; 4]; 4]; 4];

/// Minkowski metric diag(-1, 1, 1, 1); numerically its own inverse.
pub const ETA: Tensor2 = [[-1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];

fn lower(p: &FourVector) -> [f64; 4] {
    [-p.e, p.px, p.py, p.pz]
}

/// `p_a p'_b + p'_a p_b - eta_ab (p.p' + m^2)` without the coupling.
pub fn spin2_vertex_structure(p: &FourVector, p_out: &FourVector, m: f64) -> Tensor2 {
    let a = lower(p);
    let b = lower(p_out);
    let x = p.dot(p_out) + m * m;
    let mut t = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            t[i][j] = a[i] * b[j] + b[i] * a[j] - ETA[i][j] * x;
        }
    }
    t
}

/// Graviton-matter vertex `sqrt(8 pi G) [p_a p'_b + p'_a p_b - eta_ab (p.p' + m^2)]`.
pub fn spin2_vertex(p: &FourVector, p_out: &FourVector, params: &ModelParams) -> Tensor2 {
    let g = (8.0 * PI * params.g_newton).sqrt();
    spin2_vertex_structure(p, p_out, params.m).map(|row| row.map(|x| g * x))
}

/// Trace `eta^{ab} T_ab`.
pub fn trace(t: &Tensor2) -> f64 {
    (0..4).map(|i| ETA[i][i] * t[i][i]).sum()
}

/// Tensor part and scalar factor of the graviton propagator.
#[derive(Clone, Debug)]
pub struct GravitonPropagator {
    pub tensor: Box<Tensor4>,
    pub scalar: Complex64,
}

/// `i / (q^2 - i eps) [eta^ac eta^bd + eta^ad eta^bc - eta^ab eta^cd]`.
pub fn graviton_propagator_tensor(q2: f64, eps: f64) -> GravitonPropagator {
    let mut t = Box::new([[[[0.0; 4]; 4]; 4]; 4]);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    t[a][b][c][d] = ETA[a][c] * ETA[b][d] + ETA[a][d] * ETA[b][c] - ETA[a][b] * ETA[c][d];
                }
            }
        }
    }
    GravitonPropagator { tensor: t, scalar: Complex64::i() * feynman_propagator(q2, eps) }
}

/// `T1_ab P^abcd T2_cd` by explicit index loops.
pub fn contract_exchange(t1: &Tensor2, p: &Tensor4, t2: &Tensor2) -> f64 {
    let mut sum = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            if t1[a][b] == 0.0 {
                continue;
            }
            for c in 0..4 {
                for d in 0..4 {
                    sum += t1[a][b] * p[a][b][c][d] * t2[c][d];
                }
            }
        }
    }
    sum
}

/// Minkowski products of an elastic configuration `(p1, p2) -> (p1', p2')`.
struct Dots {
    p1p2: f64,
    p1p2p: f64,
    p1pp2: f64,
    p1pp2p: f64,
    p1p1p: f64,
    p2p2p: f64,
    scale: f64,
}

fn elastic_dots(cfg: &KinematicConfig, m: f64) -> Result<Dots> {
    check_masses(cfg, 2, 2, &[m; 4], "elastic exchange")?;
    let (p1, p2) = (cfg.incoming[0], cfg.incoming[1]);
    let (q1, q2) = (cfg.outgoing[0], cfg.outgoing[1]);
    let norm = |p: &FourVector| (p.e * p.e + p.px * p.px + p.py * p.py + p.pz * p.pz).sqrt();
    Ok(Dots {
        p1p2: p1.dot(&p2),
        p1p2p: p1.dot(&q2),
        p1pp2: q1.dot(&p2),
        p1pp2p: q1.dot(&q2),
        p1p1p: p1.dot(&q1),
        p2p2p: p2.dot(&q2),
        scale: norm(&p1) * norm(&p2) * norm(&q1) * norm(&q2),
    })
}

/// Spin-2 exchange numerator from the full vertex-propagator-vertex
/// contraction, written in Minkowski products:
/// `4[(p1.p2)(p1'.p2') + (p1.p2')(p1'.p2) - (p1.p1')(p2.p2') - m^2 p1.p1' - m^2 p2.p2' - 2m^4]`.
pub fn n2_closed(cfg: &KinematicConfig, m: f64) -> Result<f64> {
    let d = elastic_dots(cfg, m)?;
    let m2 = m * m;
    Ok(4.0 * (d.p1p2 * d.p1pp2p + d.p1p2p * d.p1pp2 - d.p1p1p * d.p2p2p - m2 * d.p1p1p - m2 * d.p2p2p - 2.0 * m2 * m2))
}

/// The shorter numerator `4[(p1.p2')(p1'.p2) - m^2 p1.p1' - m^2 p2.p2' - 2m^4]`
/// that omits `(p1.p2)(p1'.p2') - (p1.p1')(p2.p2')`. It agrees with
/// [`n2_closed`] only in the static limit.
pub fn n2_as_printed(cfg: &KinematicConfig, m: f64) -> Result<f64> {
    let d = elastic_dots(cfg, m)?;
    let m2 = m * m;
    Ok(4.0 * (d.p1p2p * d.p1pp2 - m2 * d.p1p1p - m2 * d.p2p2p - 2.0 * m2 * m2))
}

/// `4 (p1.p1' + 2m^2)(p2.p2' + 2m^2)`.
pub fn n0_closed(cfg: &KinematicConfig, m: f64) -> Result<f64> {
    let d = elastic_dots(cfg, m)?;
    let m2 = m * m;
    Ok(4.0 * (d.p1p1p + 2.0 * m2) * (d.p2p2p + 2.0 * m2))
}

/// Tolerance of the built-in closed-form versus contraction self-check,
/// relative to the product of the legs' Euclidean norms.
pub const CONTRACT_TOL: f64 = 1e-10;

fn cross_check(closed: f64, contracted: f64, scale: f64) -> Result<()> {
    let s = closed.abs().max(contracted.abs()).max(scale);
    if (closed - contracted).abs() > CONTRACT_TOL * s {
        return Err(GravitasError::ContractMismatch { closed, contracted });
    }
    Ok(())
}

/// Spin-2 numerator by contracting the vertex structures through the
/// propagator tensor (couplings stripped).
pub fn n2_contracted(cfg: &KinematicConfig, m: f64) -> Result<f64> {
    check_masses(cfg, 2, 2, &[m; 4], "elastic exchange")?;
    let t1 = spin2_vertex_structure(&cfg.incoming[0], &cfg.outgoing[0], m);
    let t2 = spin2_vertex_structure(&cfg.incoming[1], &cfg.outgoing[1], m);
    let prop = graviton_propagator_tensor(1.0, 1.0);
    Ok(contract_exchange(&t1, &prop.tensor, &t2))
}

/// Spin-0 numerator from the scalar vertices, each obtained as the trace of
/// the spin-2 vertex structure.
pub fn n0_contracted(cfg: &KinematicConfig, m: f64) -> Result<f64> {
    check_masses(cfg, 2, 2, &[m; 4], "elastic exchange")?;
    let v1 = trace(&spin2_vertex_structure(&cfg.incoming[0], &cfg.outgoing[0], m));
    let v2 = trace(&spin2_vertex_structure(&cfg.incoming[1], &cfg.outgoing[1], m));
    Ok(v1 * v2)
}

fn exchange(cfg: &KinematicConfig, params: &ModelParams, numerator: f64, channel: Channel) -> ComplexAmplitude {
    let q2 = (cfg.outgoing[0] - cfg.incoming[0]).square();
    let value = 4.0 * PI * params.g_newton * numerator * feynman_propagator(q2, params.epsilon);
    ComplexAmplitude { value, channel }
}

/// `4 pi G N2 / ((p1' - p1)^2 - i eps)` with `N2` from [`n2_closed`],
/// cross-checked against [`n2_contracted`].
pub fn m_2to2_spin2(cfg: &KinematicConfig, params: &ModelParams) -> Result<ComplexAmplitude> {
    let closed = n2_closed(cfg, params.m)?;
    let contracted = n2_contracted(cfg, params.m)?;
    cross_check(closed, contracted, elastic_dots(cfg, params.m)?.scale)?;
    Ok(exchange(cfg, params, closed, Channel::Spin2Exchange))
}

/// `4 pi G N0 / ((p1' - p1)^2 - i eps)`, cross-checked against the scalar
/// vertex contraction.
pub fn m_2to2_spin0(cfg: &KinematicConfig, params: &ModelParams) -> Result<ComplexAmplitude> {
    let closed = n0_closed(cfg, params.m)?;
    let contracted = n0_contracted(cfg, params.m)?;
    cross_check(closed, contracted, elastic_dots(cfg, params.m)?.scale)?;
    Ok(exchange(cfg, params, closed, Channel::Spin0Exchange))
}

/// Absorption-then-emission plus emission-then-absorption for legs
/// `(k, p) -> (k', p')`, photon first.
pub fn m_compton_probe(cfg: &KinematicConfig, params: &ModelParams) -> Result<ComplexAmplitude> {
    let m = params.m;
    check_masses(cfg, 2, 2, &[0.0, m, 0.0, m], "compton probe")?;
    let (k, p) = (cfg.incoming[0], cfg.incoming[1]);
    let kp = cfg.outgoing[0];
    let eps = params.epsilon;
    let s_term = feynman_propagator((p + k).square() + m * m, eps);
    let u_term = feynman_propagator((p - kp).square() + m * m, eps);
    let value = params.lambda_probe.powi(2) / (2.0 * PI).powi(3) * (s_term + u_term);
    Ok(ComplexAmplitude { value, channel: Channel::ComptonProbe })
}

/// Emission amplitude with its disconnected spectator factor kept symbolic:
/// the full amplitude is `connected * delta^3(spectator' - spectator) * spectator_norm`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmissionAmplitude {
    pub connected: ComplexAmplitude,
    pub spectator: FourVector,
    /// `2 E (2 pi)^3` of the spectator.
    pub spectator_norm: f64,
}

/// Relative tolerance for spectator momenta to count as equal.
pub const SPECTATOR_TOL: f64 = 1e-12;

/// Photon absorbed on one particle which radiates a mass-`mu` quantum with
/// coupling `sqrt(G) m`; the other particle is a spectator. Legs are
/// `(photon, absorber, spectator) -> (radiated, absorber', spectator')`.
pub fn m_graviton_emission(cfg: &KinematicConfig, params: &ModelParams) -> Result<EmissionAmplitude> {
    let m = params.m;
    check_masses(cfg, 3, 3, &[0.0, m, m, params.mu, m, m], "graviton emission")?;
    let (k, p) = (cfg.incoming[0], cfg.incoming[1]);
    let (s_in, s_out) = (cfg.incoming[2], cfg.outgoing[2]);
    let diff = (s_in - s_out).to_array().iter().map(|x| x.abs()).fold(0.0, f64::max);
    if diff > SPECTATOR_TOL * s_in.e {
        return Err(GravitasError::SpectatorMismatch);
    }
    let value = params.g_newton.sqrt() * m * m * params.lambda_probe
        * feynman_propagator((p + k).square() + m * m, params.epsilon);
    Ok(EmissionAmplitude {
        connected: ComplexAmplitude { value, channel: Channel::GravitonEmission },
        spectator: s_in,
        spectator_norm: 2.0 * s_in.e * (2.0 * PI).powi(3),
    })
}
