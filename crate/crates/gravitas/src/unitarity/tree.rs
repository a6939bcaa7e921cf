use super::Provenance;
use crate::amplitudes::{m_3to3_tree, m_graviton_emission, six_point_parts, ModelParams};
use crate::error::{GravitasError, Result};
use crate::kinematics::{two_body_decay, FourVector, KinematicConfig};
use crate::numeric::{bisect, extrapolate_linear, integrate, QuadOptions};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A one-parameter family of six-point configurations, legs ordered
/// `(k, p1, p2) -> (k', p1', p2')`.
pub trait KinematicPath: Sync {
    fn config(&self, s: f64) -> Result<KinematicConfig>;
    fn range(&self) -> (f64, f64);
}

/// Photon of energy `s` along +z hits particle 1 at rest, which leaves with
/// fixed momentum `p_out` along +z. Particle 2 starts at rest and absorbs the
/// exchanged momentum, then emits the outgoing photon along `decay_dir` in
/// its own rest frame.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PhotonEnergySweep {
    pub m: f64,
    pub p_out: f64,
    pub decay_dir: [f64; 3],
    pub range: (f64, f64),
}

impl PhotonEnergySweep {
    /// `p_out = m/2`, decay along x, photon energies in `[0.18 m, 0.6 m]`.
    pub fn canonical(m: f64) -> Self {
        Self { m, p_out: 0.5 * m, decay_dir: [1.0, 0.0, 0.0], range: (0.18 * m, 0.6 * m) }
    }
}

impl KinematicPath for PhotonEnergySweep {
    fn config(&self, omega: f64) -> Result<KinematicConfig> {
        let m = self.m;
        let k = FourVector::new(omega, 0.0, 0.0, omega);
        let p1 = FourVector::at_rest(m);
        let p2 = FourVector::at_rest(m);
        let p1p = FourVector::on_shell(m, [0.0, 0.0, self.p_out]);
        let q = p2 + k + p1 - p1p;
        let mq = q.mass();
        if !(q.e > 0.0) || -q.square() <= m * m {
            return Err(GravitasError::BelowThreshold { sqrt_s: mq, threshold: m });
        }
        let (kp, p2p) = two_body_decay(&q, 0.0, m, self.decay_dir)?;
        KinematicConfig::new(vec![k, p1, p2], vec![kp, p1p, p2p], vec![0.0, m, m, 0.0, m, m])
    }

    fn range(&self) -> (f64, f64) {
        self.range
    }
}

/// Smooth weight with compact support.
pub trait WeightFn: Sync {
    fn eval(&self, s: f64) -> f64;
    fn support(&self) -> (f64, f64);
}

/// `exp(-1/(1-u^2))` with `u = (s - center)/half_width`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BumpWeight {
    pub center: f64,
    pub half_width: f64,
}

impl BumpWeight {
    /// Half-width `10 sqrt(eps_rel_min) * m` around `center`.
    pub fn for_ladder(center: f64, eps_ladder_rel: &[f64], m: f64) -> Self {
        let eps_min = eps_ladder_rel.iter().cloned().fold(f64::INFINITY, f64::min);
        Self { center, half_width: 10.0 * eps_min.sqrt() * m }
    }
}

impl WeightFn for BumpWeight {
    fn eval(&self, s: f64) -> f64 {
        let u = (s - self.center) / self.half_width;
        if u.abs() >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - u * u)).exp()
        }
    }

    fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }
}

/// Both sides of the optical theorem for the six-point tree, integrated
/// against a weight along a kinematic path.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OpticalReport {
    /// Weighted `i (M - M*)` at the smallest epsilon.
    pub lhs: f64,
    /// Right side with only massive particles and photons as final states.
    pub rhs_elastic: f64,
    /// Right side including the radiated mass-`mu` final state.
    pub rhs_with_gravitons: f64,
    /// Numerical error of `rhs_with_gravitons` (root finding and Jacobian).
    pub mc_error_rhs: f64,
    /// `(eps, lhs(eps))`, eps strictly decreasing.
    pub eps_ladder: Vec<(f64, f64)>,
    /// Linear extrapolation of the last two ladder points to eps = 0.
    pub extrapolated_lhs: f64,
    /// `|extrapolated_lhs / rhs_with_gravitons|`; `None` when the right side vanishes.
    pub ratio_restored: Option<f64>,
    /// `extrapolated_lhs / rhs_elastic`; `None` because the elastic side is identically zero.
    pub ratio_elastic_only: Option<f64>,
    pub ratio_elastic_only_status: String,
    /// Sign of `extrapolated_lhs / rhs_with_gravitons`.
    pub relative_sign: f64,
    /// Path parameter where `k~^2 + mu^2 = 0`.
    pub pole_location: f64,
    /// `|d(k~^2)/ds|` at the pole.
    pub jacobian: f64,
    pub provenance: Provenance,
}

fn exchanged_offset(path: &dyn KinematicPath, params: &ModelParams, s: f64) -> Result<f64> {
    let cfg = path.config(s)?;
    let parts = six_point_parts(&cfg, params)?;
    Ok(parts.exchanged.square() + params.mu * params.mu)
}

/// Legs of the time-reversed process `(k', p2', p1') -> (k, p2, p1)`, in the
/// order the six-point formula expects (photon absorbed on the first matter leg).
pub fn reversed(cfg: &KinematicConfig) -> KinematicConfig {
    let (k, p1, p2) = (cfg.incoming[0], cfg.incoming[1], cfg.incoming[2]);
    let (kp, p1p, p2p) = (cfg.outgoing[0], cfg.outgoing[1], cfg.outgoing[2]);
    KinematicConfig { incoming: vec![kp, p2p, p1p], outgoing: vec![k, p2, p1], masses: cfg.masses.clone() }
}

/// `i (M_{a->b} - M*_{b->a})` at one path point.
fn discontinuity(path: &dyn KinematicPath, params: &ModelParams, s: f64) -> Result<Complex64> {
    let cfg = path.config(s)?;
    let fwd = m_3to3_tree(&cfg, params)?.value;
    let back = m_3to3_tree(&reversed(&cfg), params)?.value;
    Ok(Complex64::i() * (fwd - back.conj()))
}

fn find_bracket(path: &dyn KinematicPath, params: &ModelParams) -> Result<(f64, f64)> {
    let (lo, hi) = path.range();
    let n = 256;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=n {
        let s = lo + (hi - lo) * i as f64 / n as f64;
        let g = exchanged_offset(path, params, s)?;
        if let Some((sp, gp)) = prev {
            if gp == 0.0 || gp.signum() != g.signum() {
                return Ok((sp, s));
            }
        }
        prev = Some((s, g));
    }
    Err(GravitasError::NoPoleCrossing { lo, hi })
}

/// Integrates `weight * i(M - M*)` along the path for each epsilon in the
/// ladder (relative to `max(m^2, mu^2)`) and compares the extrapolated value
/// with the radiated-state product evaluated at the pole. `n_panels` sets the
/// initial uniform partition of the adaptive quadrature.
pub fn optical_tree_check(
    path: &dyn KinematicPath,
    weight: &dyn WeightFn,
    params: &ModelParams,
    eps_ladder_rel: &[f64],
    n_panels: usize,
) -> Result<OpticalReport> {
    params.validate()?;
    if eps_ladder_rel.len() < 2 || eps_ladder_rel.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(GravitasError::InvalidParams("eps ladder needs >= 2 strictly decreasing entries".into()));
    }
    let bracket = find_bracket(path, params)?;
    let (a, b) = weight.support();
    let (lo, hi) = path.range();
    if a < lo || b > hi {
        return Err(GravitasError::InvalidParams(format!("weight support [{a}, {b}] leaves the path range [{lo}, {hi}]")));
    }

    let mut ladder = Vec::with_capacity(eps_ladder_rel.len());
    for &er in eps_ladder_rel {
        let p = params.with_epsilon(params.eps_from_rel(er));
        let failed = std::sync::atomic::AtomicBool::new(false);
        let q = integrate(
            |s| match discontinuity(path, &p, s) {
                Ok(d) => weight.eval(s) * d.re,
                Err(_) => {
                    failed.store(true, std::sync::atomic::Ordering::Relaxed);
                    0.0
                }
            },
            a,
            b,
            QuadOptions { initial_panels: n_panels.max(1), abs_tol: 0.0, rel_tol: 1e-10, max_panels: 200_000 },
        );
        if failed.into_inner() {
            return Err(GravitasError::InvalidParams("path configuration failed inside the weight support".into()));
        }
        ladder.push((p.epsilon, q.value));
    }
    let n = ladder.len();
    let (e1, l1) = ladder[n - 2];
    let (e2, l2) = ladder[n - 1];
    let extrapolated = extrapolate_linear(e1, l1, e2, l2);

    let rhs = radiated_state_rhs(path, weight, params, bracket, eps_ladder_rel[n - 1])?;
    let ratio = if rhs.value != 0.0 { Some((extrapolated / rhs.value).abs()) } else { None };
    Ok(OpticalReport {
        lhs: l2,
        rhs_elastic: 0.0,
        rhs_with_gravitons: rhs.value,
        mc_error_rhs: rhs.error,
        eps_ladder: ladder,
        extrapolated_lhs: extrapolated,
        ratio_restored: ratio,
        ratio_elastic_only: None,
        ratio_elastic_only_status: "undefined: with only massive particles and photons no final state contributes at this order, so the elastic-only right side is identically zero and the ratio diverges".into(),
        relative_sign: if rhs.value == 0.0 { 0.0 } else { (extrapolated / rhs.value).signum() },
        pole_location: rhs.root,
        jacobian: rhs.jacobian,
        provenance: Provenance::deterministic("six_point_tree_quadrature", "radiated_state_product"),
    })
}

struct RhsValue {
    value: f64,
    error: f64,
    root: f64,
    jacobian: f64,
}

/// `(2 pi)^4 sum_X B_X^2 M_{a->X} M*_{b->X} delta^4`, with the spectator
/// deltas resolved symbolically and the radiated-state delta resolved on the
/// path by root finding.
fn radiated_state_rhs(
    path: &dyn KinematicPath,
    weight: &dyn WeightFn,
    params: &ModelParams,
    bracket: (f64, f64),
    eps_rel: f64,
) -> Result<RhsValue> {
    let g = |s: f64| exchanged_offset(path, params, s).unwrap_or(f64::NAN);
    let root = bisect(g, bracket.0, bracket.1, 1e-12).ok_or(GravitasError::NoPoleCrossing { lo: bracket.0, hi: bracket.1 })?;
    let (lo, hi) = path.range();
    let h = 1e-6 * (hi - lo);
    let jac = |h: f64| ((g(root + h) - g(root - h)) / (2.0 * h)).abs();
    let jacobian = jac(h);
    let jacobian_err = (jacobian - jac(2.0 * h)).abs();

    let p = params.with_epsilon(params.eps_from_rel(eps_rel));
    let cfg = path.config(root)?;
    let (k, p1, p2) = (cfg.incoming[0], cfg.incoming[1], cfg.incoming[2]);
    let (kp, p1p, p2p) = (cfg.outgoing[0], cfg.outgoing[1], cfg.outgoing[2]);
    let radiated = k + p1 - p1p;
    if !(radiated.e > 0.0) {
        return Ok(RhsValue { value: 0.0, error: f64::MIN_POSITIVE, root, jacobian });
    }
    let radiated = FourVector::on_shell(params.mu, radiated.p3());
    let masses = vec![0.0, params.m, params.m, params.mu, params.m, params.m];
    let to_x_a = KinematicConfig { incoming: vec![k, p1, p2], outgoing: vec![radiated, p1p, p2], masses: masses.clone() };
    let to_x_b = KinematicConfig { incoming: vec![kp, p2p, p1p], outgoing: vec![radiated, p2, p1p], masses };
    let amp_a = m_graviton_emission(&to_x_a, &p)?;
    let amp_b = m_graviton_emission(&to_x_b, &p)?;

    let two_pi = 2.0 * PI;
    // Each spectator delta removes one d^3p/(2(2pi)^3 E) and is cancelled by its 2E(2pi)^3.
    let spectator_a = amp_a.spectator_norm / (2.0 * two_pi.powi(3) * amp_a.spectator.e);
    let spectator_b = amp_b.spectator_norm / (2.0 * two_pi.powi(3) * amp_b.spectator.e);
    // The radiated leg keeps d^3k/(2(2pi)^3 E); with delta^4 it becomes delta(k^2 + mu^2)/(2pi)^3.
    let product = amp_a.connected.value * amp_b.connected.value.conj() * spectator_a * spectator_b;
    let w = weight.eval(root);
    let value = two_pi.powi(4) / two_pi.powi(3) * product.re * w / jacobian;

    let dw = (weight.eval(root + h) - weight.eval(root - h)).abs() / (2.0 * h);
    let rel = jacobian_err / jacobian + if w > 0.0 { dw / w * 1e-12 } else { 0.0 } + product.im.abs() / product.norm().max(f64::MIN_POSITIVE);
    let error = (value.abs() * rel).max(f64::EPSILON * value.abs()).max(f64::MIN_POSITIVE);
    Ok(RhsValue { value, error, root, jacobian })
}
