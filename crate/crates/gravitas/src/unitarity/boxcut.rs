use crate::amplitudes::{feynman_propagator, ModelParams};
use crate::error::{GravitasError, Result};
use crate::kinematics::{boost, sample_two_body, two_body_momentum, FourVector};
use crate::numeric::{integrate_breaks, Estimate, MomentAccumulator, QuadOptions};
use crate::rng::{mc_mean, RngStream, CHUNK};
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Forward particle-antiparticle pair in the CM frame, momenta along +-z.
pub fn forward_pair(s: f64, m: f64) -> Result<(FourVector, FourVector)> {
    if !(s >= 4.0 * m * m) {
        return Err(GravitasError::BelowThreshold { sqrt_s: s.max(0.0).sqrt(), threshold: 2.0 * m });
    }
    let p = (s / 4.0 - m * m).max(0.0).sqrt();
    Ok((FourVector::on_shell(m, [0.0, 0.0, p]), FourVector::on_shell(m, [0.0, 0.0, -p])))
}

/// `D_min * D_max` for `D = (p1 - k1)^2 + m^2` over the mass-`mu` pair sphere,
/// equal to `mu^4 + m^2 (s - 4 mu^2)`. Positive means the squared
/// propagator is finite everywhere on the cut.
pub fn forward_denominator_bound(s: f64, m: f64, mu: f64) -> f64 {
    let p = (s / 4.0 - m * m).max(0.0).sqrt();
    let k = (s / 4.0 - mu * mu).max(0.0).sqrt();
    (s / 2.0 - mu * mu).powi(2) - 4.0 * p * p * k * k
}

fn assert_finite_cut(s: f64, params: &ModelParams) -> Result<()> {
    let b = forward_denominator_bound(s, params.m, params.mu);
    if !(b > 0.0) {
        return Err(GravitasError::InvalidParams(format!("t-channel denominator vanishes on the cut (D_min*D_max = {b})")));
    }
    Ok(())
}

fn prefactor(params: &ModelParams) -> f64 {
    -PI * PI * params.alpha_tilde.powi(4)
}

fn squared_propagator(p1: &FourVector, k1: &FourVector, mass2: f64, eps: f64) -> f64 {
    feynman_propagator((*p1 - *k1).square() + mass2, eps).norm_sqr()
}

/// Imaginary part of the forward box across the two-quantum cut,
/// `-pi^2 a^4 int dPhi_2(mu, mu) |1/((p1 - k1)^2 + m^2 - i eps)|^2`,
/// by flat two-body sampling in the CM frame.
pub fn box_cut_im_forward(s: f64, params: &ModelParams, n_samples: usize, stream: RngStream) -> Result<Estimate> {
    box_cut_im_forward_boosted(s, params, n_samples, stream, [0.0; 3])
}

/// As [`box_cut_im_forward`] with the whole process boosted by `beta`.
pub fn box_cut_im_forward_boosted(
    s: f64,
    params: &ModelParams,
    n_samples: usize,
    stream: RngStream,
    beta: [f64; 3],
) -> Result<Estimate> {
    params.validate()?;
    let (p1, p2) = forward_pair(s, params.m)?;
    assert_finite_cut(s, params)?;
    let p1 = boost(&p1, beta)?;
    let p2 = boost(&p2, beta)?;
    let total = p1 + p2;
    let (mu, m2, eps) = (params.mu, params.m * params.m, params.epsilon);
    if total.mass() < 2.0 * mu {
        return Err(GravitasError::BelowThreshold { sqrt_s: total.mass(), threshold: 2.0 * mu });
    }
    let est = mc_mean(n_samples, stream, |rng| match sample_two_body(&total, mu, mu, rng) {
        Ok(ps) => ps.weight * squared_propagator(&p1, &ps.momenta[0], m2, eps),
        Err(_) => f64::NAN,
    });
    Ok(est.scaled(prefactor(params)))
}

/// Default number of equal-width strata in `cos(theta)` for [`annihilation_rhs`].
pub const ANNIHILATION_STRATA: usize = 64;

/// Two-quantum final-state sum with the squared t-channel matter propagator.
/// Independent of [`box_cut_im_forward`]: the CM polar angle is stratified
/// into equal-width bins sampled in bin order, and the azimuth is drawn
/// after the polar angle.
pub fn annihilation_rhs(s: f64, params: &ModelParams, n_samples: usize, stream: RngStream) -> Result<Estimate> {
    params.validate()?;
    let (p1, _) = forward_pair(s, params.m)?;
    assert_finite_cut(s, params)?;
    let sqrt_s = s.sqrt();
    let mu = params.mu;
    if sqrt_s < 2.0 * mu {
        return Err(GravitasError::BelowThreshold { sqrt_s, threshold: 2.0 * mu });
    }
    let k = two_body_momentum(sqrt_s, mu, mu);
    let volume = PI * k / sqrt_s;
    let (m2, eps) = (params.m * params.m, params.epsilon);
    let strata = ANNIHILATION_STRATA.min(n_samples.max(1));
    let per = n_samples / strata;
    let extra = n_samples % strata;
    let width = 2.0 / strata as f64;
    let stream = stream.derive(0xA11);

    let parts: Vec<(f64, f64, u64)> = (0..strata)
        .into_par_iter()
        .map(|h| {
            let count = per + usize::from(h < extra);
            let lo = -1.0 + width * h as f64;
            let mut acc = MomentAccumulator::default();
            let chunks = count.div_ceil(CHUNK);
            for c in 0..chunks {
                let mut rng = stream.derive(h as u64).substream(c as u64);
                for _ in 0..CHUNK.min(count - c * CHUNK) {
                    let cos = lo + width * rng.random::<f64>();
                    let phi = 2.0 * PI * rng.random::<f64>();
                    let sin = (1.0 - cos * cos).max(0.0).sqrt();
                    let k1 = FourVector::on_shell(mu, [k * sin * phi.cos(), k * sin * phi.sin(), k * cos]);
                    acc.push(squared_propagator(&p1, &k1, m2, eps));
                }
            }
            let e = acc.estimate();
            (e.mean, e.std_error, acc.count())
        })
        .collect();

    // Stratum h carries measure width/2 of the angular average.
    let mut mean = 0.0;
    let mut var = 0.0;
    for (m, se, _) in &parts {
        mean += 0.5 * width * m;
        var += (0.5 * width * se).powi(2);
    }
    let est = Estimate { mean: volume * mean, std_error: volume * var.sqrt(), n: n_samples as u64 };
    Ok(est.scaled(prefactor(params)))
}

/// Elastic particle-antiparticle sum: final-state mass `m`, regulator mass
/// `mu` in the propagator. The integrand peaks at forward angles with width
/// `mu^2/(2 p^2)`, so it is integrated deterministically on a geometric
/// partition in `1 - cos(theta)`.
pub fn elastic_rhs(s: f64, params: &ModelParams) -> Result<(f64, f64)> {
    params.validate()?;
    let (p1, _) = forward_pair(s, params.m)?;
    let sqrt_s = s.sqrt();
    let p = p1.p_abs();
    let (mu2, eps, m) = (params.mu * params.mu, params.epsilon, params.m);
    let f = |v: f64| {
        let c = 1.0 - v;
        let sin = (1.0 - c * c).max(0.0).sqrt();
        let k1 = FourVector::on_shell(m, [p * sin, 0.0, p * c]);
        squared_propagator(&p1, &k1, mu2, eps)
    };
    let v0 = if p > 0.0 { (mu2 / (2.0 * p * p)).min(1.0) * 1e-3 } else { 1.0 };
    let mut breaks = vec![0.0];
    let mut v = v0;
    while v < 2.0 {
        breaks.push(v);
        v *= 2.0;
    }
    breaks.push(2.0);
    let q = integrate_breaks(f, &breaks, QuadOptions { initial_panels: 1, abs_tol: 0.0, rel_tol: 1e-12, max_panels: 50_000 });
    let scale = prefactor(params) * PI * p / sqrt_s * 0.5;
    Ok((scale * q.value, (scale * q.error).abs()))
}
