//! Four-vectors in the (-,+,+,+) signature, Mandelstam invariants, boosts and
//! flat phase-space samplers.
//!
//! The phase-space measure used throughout is the bare Lorentz-invariant one,
//!
//! ```text
//! dPhi_n = prod_i d^3k_i / (2 E_i)  *  delta^4(sum_i k_i - P)
//! ```
//!
//! with no factors of 2*pi. Callers that need the `(2 pi)^3` per-leg
//! normalization multiply it in themselves.

use crate::error::{GravitasError, Result};
use crate::numeric::Estimate;
use crate::rng::{mc_estimate, RngStream};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Tolerance on |p^2 + m^2| relative to m^2 (or e^2 for massless legs).
pub const TOL_ONSHELL: f64 = 1e-9;
/// Componentwise relative tolerance on four-momentum conservation.
pub const TOL_CONSERVATION: f64 = 1e-10;
/// Relative tolerance on the invariance of Minkowski products under boosts.
pub const TOL_LORENTZ: f64 = 1e-10;

/// A four-momentum `(e, px, py, pz)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FourVector {
    pub e: f64,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

impl FourVector {
    pub const fn new(e: f64, px: f64, py: f64, pz: f64) -> Self {
        Self { e, px, py, pz }
    }

    /// A particle of mass `m` at rest.
    pub fn at_rest(m: f64) -> Self {
        Self::new(m, 0.0, 0.0, 0.0)
    }

    /// The on-shell vector of mass `m` with three-momentum `p`.
    pub fn on_shell(m: f64, p: [f64; 3]) -> Self {
        let e = (m * m + p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        Self::new(e, p[0], p[1], p[2])
    }

    pub fn p3(&self) -> [f64; 3] {
        [self.px, self.py, self.pz]
    }

    pub fn p_abs(&self) -> f64 {
        (self.px * self.px + self.py * self.py + self.pz * self.pz).sqrt()
    }

    /// Minkowski product with `other`.
    pub fn dot(&self, other: &FourVector) -> f64 {
        minkowski_dot(self, other)
    }

    /// `p^2 = -e^2 + |p|^2`; equals `-m^2` on shell.
    pub fn square(&self) -> f64 {
        self.dot(self)
    }

    /// Invariant mass `sqrt(-p^2)`, zero for spacelike vectors.
    pub fn mass(&self) -> f64 {
        (-self.square()).max(0.0).sqrt()
    }

    /// Contravariant components as an array.
    pub fn to_array(&self) -> [f64; 4] {
        [self.e, self.px, self.py, self.pz]
    }

    /// Velocity `p / e` of the frame in which this vector is at rest.
    pub fn velocity(&self) -> [f64; 3] {
        [self.px / self.e, self.py / self.e, self.pz / self.e]
    }

    /// |p^2 + m^2| relative to max(m^2, e^2), the scale of the cancellation.
    pub fn onshell_residual(&self, m: f64) -> f64 {
        let scale = (m * m).max(self.e * self.e);
        if scale == 0.0 {
            return self.square().abs();
        }
        (self.square() + m * m).abs() / scale
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, o: FourVector) -> FourVector {
        FourVector::new(self.e + o.e, self.px + o.px, self.py + o.py, self.pz + o.pz)
    }
}

impl AddAssign for FourVector {
    fn add_assign(&mut self, o: FourVector) {
        *self = *self + o;
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, o: FourVector) -> FourVector {
        FourVector::new(self.e - o.e, self.px - o.px, self.py - o.py, self.pz - o.pz)
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        FourVector::new(-self.e, -self.px, -self.py, -self.pz)
    }
}

impl Mul<f64> for FourVector {
    type Output = FourVector;
    fn mul(self, c: f64) -> FourVector {
        FourVector::new(self.e * c, self.px * c, self.py * c, self.pz * c)
    }
}

/// `-a.e*b.e + a.p . b.p`.
pub fn minkowski_dot(a: &FourVector, b: &FourVector) -> f64 {
    -a.e * b.e + a.px * b.px + a.py * b.py + a.pz * b.pz
}

/// Incoming and outgoing legs with their declared rest masses (incoming legs
/// first, then outgoing).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KinematicConfig {
    pub incoming: Vec<FourVector>,
    pub outgoing: Vec<FourVector>,
    pub masses: Vec<f64>,
}

impl KinematicConfig {
    /// Builds a configuration and checks on-shellness, positive energies and
    /// four-momentum conservation.
    pub fn new(incoming: Vec<FourVector>, outgoing: Vec<FourVector>, masses: Vec<f64>) -> Result<Self> {
        let cfg = Self { incoming, outgoing, masses };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn legs(&self) -> impl Iterator<Item = &FourVector> {
        self.incoming.iter().chain(self.outgoing.iter())
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.incoming.len() + self.outgoing.len();
        if self.masses.len() != n {
            return Err(GravitasError::ConfigShape(format!(
                "{} masses declared for {} legs",
                self.masses.len(),
                n
            )));
        }
        for (i, (p, &m)) in self.legs().zip(&self.masses).enumerate() {
            if !(p.e > 0.0) {
                return Err(GravitasError::OffShell { leg: i, residual: f64::INFINITY });
            }
            let r = p.onshell_residual(m);
            if r > TOL_ONSHELL {
                return Err(GravitasError::OffShell { leg: i, residual: r });
            }
        }
        let residual = conservation_residual(&self.incoming, &self.outgoing);
        if residual > TOL_CONSERVATION {
            return Err(GravitasError::NotConserved { residual });
        }
        Ok(())
    }

    pub fn total_incoming(&self) -> FourVector {
        self.incoming.iter().fold(FourVector::default(), |a, b| a + *b)
    }

    /// The same process with every leg boosted by `beta`.
    pub fn boosted(&self, beta: [f64; 3]) -> Result<KinematicConfig> {
        let b = |v: &Vec<FourVector>| v.iter().map(|p| boost(p, beta)).collect::<Result<Vec<_>>>();
        Ok(KinematicConfig { incoming: b(&self.incoming)?, outgoing: b(&self.outgoing)?, masses: self.masses.clone() })
    }
}

/// Largest componentwise |sum(in) - sum(out)| relative to the total energy.
pub fn conservation_residual(incoming: &[FourVector], outgoing: &[FourVector]) -> f64 {
    let pin = incoming.iter().fold(FourVector::default(), |a, b| a + *b);
    let pout = outgoing.iter().fold(FourVector::default(), |a, b| a + *b);
    let d = pin - pout;
    let scale = incoming.iter().chain(outgoing).map(|p| p.e.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    d.to_array().iter().map(|x| x.abs()).fold(0.0, f64::max) / scale
}

/// Mandelstam invariants of a 2 -> 2 process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mandelstam {
    pub s: f64,
    pub t: f64,
    pub u: f64,
}

/// `s = -(p1+p2)^2`, `t = -(p1'-p1)^2`, `u = -(p2'-p1)^2` for legs ordered
/// `(p1, p2) -> (p1', p2')`.
pub fn mandelstam(cfg: &KinematicConfig) -> Result<Mandelstam> {
    if cfg.incoming.len() != 2 || cfg.outgoing.len() != 2 {
        return Err(GravitasError::ConfigShape(format!(
            "mandelstam needs 2 -> 2, got {} -> {}",
            cfg.incoming.len(),
            cfg.outgoing.len()
        )));
    }
    let (p1, p2) = (cfg.incoming[0], cfg.incoming[1]);
    let (q1, q2) = (cfg.outgoing[0], cfg.outgoing[1]);
    Ok(Mandelstam { s: -(p1 + p2).square(), t: -(q1 - p1).square(), u: -(q2 - p1).square() })
}

/// Pure Lorentz boost of `v` by velocity `beta`.
pub fn boost(v: &FourVector, beta: [f64; 3]) -> Result<FourVector> {
    let b2 = beta[0] * beta[0] + beta[1] * beta[1] + beta[2] * beta[2];
    if b2 >= 1.0 {
        return Err(GravitasError::SuperluminalBoost { beta: b2.sqrt() });
    }
    if b2 == 0.0 {
        return Ok(*v);
    }
    let gamma = 1.0 / (1.0 - b2).sqrt();
    let bp = beta[0] * v.px + beta[1] * v.py + beta[2] * v.pz;
    let k = (gamma - 1.0) * bp / b2 + gamma * v.e;
    Ok(FourVector::new(gamma * (v.e + bp), v.px + k * beta[0], v.py + k * beta[1], v.pz + k * beta[2]))
}

/// A weighted phase-space point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceSample {
    pub momenta: Vec<FourVector>,
    pub weight: f64,
}

/// Rest-frame momentum of a two-body split of invariant mass `sqrt_s`.
pub fn two_body_momentum(sqrt_s: f64, m1: f64, m2: f64) -> f64 {
    let s = sqrt_s * sqrt_s;
    let a = (s - (m1 + m2) * (m1 + m2)).max(0.0);
    let b = (s - (m1 - m2) * (m1 - m2)).max(0.0);
    (a * b).sqrt() / (2.0 * sqrt_s)
}

/// Total two-body volume `pi k* / sqrt(s)` of the bare measure.
pub fn two_body_volume(sqrt_s: f64, m1: f64, m2: f64) -> f64 {
    PI * two_body_momentum(sqrt_s, m1, m2) / sqrt_s
}

fn uniform_direction<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let c: f64 = 2.0 * rng.random::<f64>() - 1.0;
    let phi = 2.0 * PI * rng.random::<f64>();
    let s = (1.0 - c * c).max(0.0).sqrt();
    [s * phi.cos(), s * phi.sin(), c]
}

/// Back-to-back pair along `dir` in the rest frame of `total`, boosted to the
/// frame in which `total` is given.
pub fn two_body_decay(total: &FourVector, m1: f64, m2: f64, dir: [f64; 3]) -> Result<(FourVector, FourVector)> {
    let m = total.mass();
    let k = two_body_momentum(m, m1, m2);
    let k1 = FourVector::on_shell(m1, [k * dir[0], k * dir[1], k * dir[2]]);
    let k2 = FourVector::on_shell(m2, [-k * dir[0], -k * dir[1], -k * dir[2]]);
    let beta = total.velocity();
    Ok((boost(&k1, beta)?, boost(&k2, beta)?))
}

fn check_threshold(total: &FourVector, threshold: f64) -> Result<f64> {
    let s = -total.square();
    let sqrt_s = s.max(0.0).sqrt();
    if !(total.e > 0.0) || s < threshold * threshold * (1.0 - 1e-15) {
        return Err(GravitasError::BelowThreshold { sqrt_s, threshold });
    }
    Ok(sqrt_s.max(threshold))
}

/// Uniform point on the two-body sphere in the rest frame of `total`,
/// boosted back. `E[weight * f]` estimates `int dPhi_2 f`.
pub fn sample_two_body<R: Rng + ?Sized>(total: &FourVector, m1: f64, m2: f64, rng: &mut R) -> Result<PhaseSpaceSample> {
    let sqrt_s = check_threshold(total, m1 + m2)?;
    let dir = uniform_direction(rng);
    let (k1, k2) = two_body_decay(total, m1, m2, dir)?;
    Ok(PhaseSpaceSample { momenta: vec![k1, k2], weight: two_body_volume(sqrt_s, m1, m2) })
}

/// Sequential 1 -> 2 -> 3 splitting, flat in the (b c) invariant mass
/// squared. The weight is `dM^2 * (pi k1/sqrt s) * (pi k2/M_bc)`, which makes
/// `E[weight * f]` an estimate of `int dPhi_3 f`.
pub fn sample_three_body<R: Rng + ?Sized>(total: &FourVector, masses: [f64; 3], rng: &mut R) -> Result<PhaseSpaceSample> {
    let [ma, mb, mc] = masses;
    let sqrt_s = check_threshold(total, ma + mb + mc)?;
    let lo = (mb + mc) * (mb + mc);
    let hi = ((sqrt_s - ma).max(mb + mc)).powi(2);
    let m2 = lo + (hi - lo) * rng.random::<f64>();
    let m_bc = m2.sqrt().max(mb + mc);
    let dir1 = uniform_direction(rng);
    let k = two_body_momentum(sqrt_s, ma, m_bc);
    let ka_rest = FourVector::on_shell(ma, [k * dir1[0], k * dir1[1], k * dir1[2]]);
    let q_rest = FourVector::on_shell(m_bc, [-k * dir1[0], -k * dir1[1], -k * dir1[2]]);
    let beta = total.velocity();
    let ka = boost(&ka_rest, beta)?;
    let q = boost(&q_rest, beta)?;
    let dir2 = uniform_direction(rng);
    let (kb, kc) = two_body_decay(&q, mb, mc, dir2)?;
    let w1 = two_body_volume(sqrt_s, ma, m_bc);
    let w2 = if m_bc > 0.0 { two_body_volume(m_bc, mb, mc) } else { 0.0 };
    Ok(PhaseSpaceSample { momenta: vec![ka, kb, kc], weight: (hi - lo) * w1 * w2 })
}

/// Both sides of `int d^3k/((2pi)^3 2E) f = int d^4k/(2pi)^3 delta(k^2+mu^2) theta(k0) f`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasureIdentity {
    pub lhs: Estimate,
    /// Right side extrapolated to zero shell width.
    pub rhs: Estimate,
    /// Right side at each shell width `(w, estimate)`.
    pub rhs_ladder: Vec<(f64, Estimate)>,
    /// Combined one-sigma error of `lhs - rhs`.
    pub mc_error: f64,
}

/// Knobs for [`check_invariant_measure_identity_with`].
#[derive(Clone, Copy, Debug)]
pub struct MeasureIdentityOptions {
    /// Scale `a` of the radial sampling density `exp(-r/a) / (8 pi a^3)`.
    pub radial_scale: f64,
    /// Shell widths as multiples of `mu^2`, largest first.
    pub width_ladder: [f64; 3],
}

impl MeasureIdentityOptions {
    pub fn for_mass(mu: f64) -> Self {
        Self { radial_scale: mu, width_ladder: [1e-1, 1e-2, 1e-3] }
    }
}

fn sample_radial<R: Rng + ?Sized>(gamma: &Gamma<f64>, a: f64, rng: &mut R) -> ([f64; 3], f64, f64) {
    let r: f64 = gamma.sample(rng);
    let d = uniform_direction(rng);
    let density = (-r / a).exp() / (8.0 * PI * a * a * a);
    ([r * d[0], r * d[1], r * d[2]], r, density)
}

/// [`check_invariant_measure_identity_with`] using the default options.
pub fn check_invariant_measure_identity<F>(test_fn: F, mu: f64, stream: RngStream, n: usize) -> MeasureIdentity
where
    F: Fn(&FourVector) -> f64 + Sync,
{
    check_invariant_measure_identity_with(test_fn, mu, stream, n, MeasureIdentityOptions::for_mass(mu))
}

/// Estimates the left side by sampling three-momenta and the right side by
/// sampling four-momenta on a Gaussian shell of width `w` in `k^2 + mu^2`,
/// on independent streams. The shell ladder shares random numbers, and the
/// two narrowest widths are extrapolated to zero in `w^2`.
pub fn check_invariant_measure_identity_with<F>(
    test_fn: F,
    mu: f64,
    stream: RngStream,
    n: usize,
    opts: MeasureIdentityOptions,
) -> MeasureIdentity
where
    F: Fn(&FourVector) -> f64 + Sync,
{
    let a = opts.radial_scale;
    let gamma = Gamma::new(3.0, a).expect("positive radial scale");
    let norm = (2.0 * PI).powi(3);
    let lhs = crate::rng::mc_mean(n, stream.derive(1), |rng| {
        let (p, _, dens) = sample_radial(&gamma, a, rng);
        let k = FourVector::on_shell(mu, p);
        test_fn(&k) / (2.0 * k.e) / dens / norm
    });
    let widths = opts.width_ladder.map(|x| x * mu * mu);
    let (h1, h2) = (widths[1] * widths[1], widths[2] * widths[2]);
    let est = mc_estimate::<4, _>(n, stream.derive(2), |rng| {
        let (p, r, dens) = sample_radial(&gamma, a, rng);
        let z: f64 = StandardNormal.sample(rng);
        let mut v = [0.0; 4];
        for (j, w) in widths.iter().enumerate() {
            let k0sq = r * r + mu * mu - w * z;
            if k0sq > 0.0 {
                let k0 = k0sq.sqrt();
                let k = FourVector::new(k0, p[0], p[1], p[2]);
                v[j] = test_fn(&k) / (2.0 * k0) / dens / norm;
            }
        }
        v[3] = crate::numeric::extrapolate_linear(h1, v[1], h2, v[2]);
        v
    });
    let rhs = est[3];
    MeasureIdentity {
        lhs,
        rhs,
        rhs_ladder: widths.iter().zip(est.iter()).map(|(w, e)| (*w, *e)).collect(),
        mc_error: (lhs.std_error.powi(2) + rhs.std_error.powi(2)).sqrt(),
    }
}

/// Elastic 2 -> 2 configuration of two mass-`m` particles in their CM frame,
/// momentum `p` along z, scattered by `theta` in the x-z plane.
pub fn elastic_cm(m: f64, p: f64, theta: f64) -> Result<KinematicConfig> {
    let (s, c) = theta.sin_cos();
    KinematicConfig::new(
        vec![FourVector::on_shell(m, [0.0, 0.0, p]), FourVector::on_shell(m, [0.0, 0.0, -p])],
        vec![FourVector::on_shell(m, [p * s, 0.0, p * c]), FourVector::on_shell(m, [-p * s, 0.0, -p * c])],
        vec![m; 4],
    )
}

/// Test functions for the measure identity, in units of the shell mass `mu`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureTestFunction {
    /// `exp(-|k|^2 / mu^2)`.
    Gaussian,
    /// `(k0 / mu)^2 exp(-|k|^2 / (2 mu^2))`.
    EnergyWeighted,
    /// `(1 + kz/mu + kx^2/mu^2) exp(-|k| / mu)`.
    Anisotropic,
}

impl MeasureTestFunction {
    pub const ALL: [MeasureTestFunction; 3] =
        [MeasureTestFunction::Gaussian, MeasureTestFunction::EnergyWeighted, MeasureTestFunction::Anisotropic];

    pub fn eval(&self, k: &FourVector, mu: f64) -> f64 {
        let r2 = (k.px * k.px + k.py * k.py + k.pz * k.pz) / (mu * mu);
        match self {
            MeasureTestFunction::Gaussian => (-r2).exp(),
            MeasureTestFunction::EnergyWeighted => (k.e / mu).powi(2) * (-0.5 * r2).exp(),
            MeasureTestFunction::Anisotropic => (1.0 + k.pz / mu + k.px * k.px / (mu * mu)) * (-r2.sqrt()).exp(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MeasureTestFunction::Gaussian => "gaussian",
            MeasureTestFunction::EnergyWeighted => "energy_weighted",
            MeasureTestFunction::Anisotropic => "anisotropic",
        }
    }
}
