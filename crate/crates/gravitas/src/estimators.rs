//! Order-of-magnitude design estimates for a light-deflection measurement of
//! a superposed source mass, in SI units.

use crate::error::{GravitasError, Result};
use serde::{Deserialize, Serialize};

/// Newton constant, m^3 kg^-1 s^-2 (CODATA 2018).
pub const G_NEWTON: f64 = 6.674_30e-11;
/// Speed of light, m/s (exact).
pub const C_LIGHT: f64 = 299_792_458.0;
/// Planck constant, J s (exact).
pub const H_PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = H_PLANCK / (2.0 * std::f64::consts::PI);
/// Electron volt, J (exact).
pub const ELECTRON_VOLT: f64 = 1.602_176_634e-19;

/// Planck mass `sqrt(hbar c / G)`, kg.
pub fn planck_mass() -> f64 {
    (HBAR * C_LIGHT / G_NEWTON).sqrt()
}

/// Inputs of the deflection estimate. Lengths in metres, masses in kg.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BendingConfig {
    /// Source mass.
    pub source_mass: f64,
    /// Impact parameter.
    pub b: f64,
    /// Separation of the two branches of the superposed source.
    pub delta_b: f64,
    pub lambda_laser: f64,
    /// Cavity length.
    pub cavity_length: f64,
    pub n_gamma: f64,
    /// Integration time, s.
    pub t_integration: f64,
}

impl Default for BendingConfig {
    /// 1 g at 100 um, superposed over 10 um, probed at 1000 nm in a 1 m cavity.
    fn default() -> Self {
        Self {
            source_mass: 1e-3,
            b: 100e-6,
            delta_b: 10e-6,
            lambda_laser: 1000e-9,
            cavity_length: 1.0,
            n_gamma: 1.0,
            t_integration: 1.0,
        }
    }
}

impl BendingConfig {
    /// Lengths and masses strictly positive; `delta_b` may be zero.
    pub fn validate(&self) -> Result<()> {
        let positive = [self.source_mass, self.b, self.lambda_laser, self.cavity_length, self.n_gamma, self.t_integration];
        if positive.iter().any(|x| !(*x > 0.0)) || !(self.delta_b >= 0.0) {
            return Err(GravitasError::InvalidParams("bending config: lengths, masses and counts must be positive".into()));
        }
        Ok(())
    }
}

/// Differential deflection `G M delta_b / (c^2 b^2)`, radians.
pub fn deflection_diff(cfg: &BendingConfig) -> f64 {
    G_NEWTON * cfg.source_mass * cfg.delta_b / (C_LIGHT * C_LIGHT * cfg.b * cfg.b)
}

/// Cavity round trips needed to separate the two peaks by one wavelength.
pub fn cavity_passes(cfg: &BendingConfig) -> f64 {
    cfg.lambda_laser / (cfg.cavity_length * deflection_diff(cfg))
}

/// Single-photon integration time `b^2 lambda c / (G M delta_b)`, s.
pub fn integration_time(cfg: &BendingConfig) -> f64 {
    cfg.b * cfg.b * cfg.lambda_laser * C_LIGHT / (G_NEWTON * cfg.source_mass * cfg.delta_b)
}

/// Integration time with `n_gamma` photons in the cavity, `T / sqrt(n_gamma)`.
pub fn integration_time_with_photons(cfg: &BendingConfig, n_gamma: f64) -> f64 {
    integration_time(cfg) / n_gamma.sqrt()
}

/// How the energy of one laser photon is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhotonEnergy {
    /// `h c / lambda`.
    Planck,
    /// `hbar c / lambda`, the inverse wavelength read in natural units.
    Reduced,
}

impl PhotonEnergy {
    /// Energy of one photon at `lambda`, J.
    pub fn joules(&self, lambda: f64) -> f64 {
        match self {
            PhotonEnergy::Planck => H_PLANCK * C_LIGHT / lambda,
            PhotonEnergy::Reduced => HBAR * C_LIGHT / lambda,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonBudget {
    pub n_gamma: f64,
    pub photon_energy_ev: f64,
    pub effective_mass_kg: f64,
    pub effective_mass_planck: f64,
}

/// Photons needed to finish in `target_time`, and their total mass-energy,
/// with photon energy `h c / lambda`.
pub fn photon_budget(cfg: &BendingConfig, target_time: f64) -> Result<PhotonBudget> {
    photon_budget_with(cfg, target_time, PhotonEnergy::Planck)
}

pub fn photon_budget_with(cfg: &BendingConfig, target_time: f64, energy: PhotonEnergy) -> Result<PhotonBudget> {
    if !(target_time > 0.0) {
        return Err(GravitasError::InvalidParams(format!("target time must be positive, got {target_time}")));
    }
    let n_gamma = (integration_time(cfg) / target_time).powi(2);
    let e = energy.joules(cfg.lambda_laser);
    let mass = n_gamma * e / (C_LIGHT * C_LIGHT);
    Ok(PhotonBudget {
        n_gamma,
        photon_energy_ev: e / ELECTRON_VOLT,
        effective_mass_kg: mass,
        effective_mass_planck: mass / planck_mass(),
    })
}

/// Flat record of every derived quantity, with units in the field names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeflectionReport {
    pub config: BendingConfig,
    pub deflection_rad: f64,
    pub cavity_passes: f64,
    pub integration_time_s: f64,
    pub integration_time_with_n_gamma_s: f64,
    pub target_time_s: f64,
    pub budget_planck_energy: PhotonBudget,
    pub budget_reduced_energy: PhotonBudget,
    pub planck_mass_kg: f64,
    pub notes: Vec<String>,
}

/// Every estimate for `cfg`, with the photon budget for `target_time`.
pub fn deflection_report(cfg: &BendingConfig, target_time: f64) -> Result<DeflectionReport> {
    cfg.validate()?;
    let planck = photon_budget_with(cfg, target_time, PhotonEnergy::Planck)?;
    let reduced = photon_budget_with(cfg, target_time, PhotonEnergy::Reduced)?;
    let notes = vec![
        format!(
            "photon energy: h c / lambda = {:.4} eV; hbar c / lambda = {:.4} eV",
            planck.photon_energy_ev, reduced.photon_energy_ev
        ),
        "the photon count assumes the single-photon time from integration_time_s".into(),
    ];
    Ok(DeflectionReport {
        config: *cfg,
        deflection_rad: deflection_diff(cfg),
        cavity_passes: cavity_passes(cfg),
        integration_time_s: integration_time(cfg),
        integration_time_with_n_gamma_s: integration_time_with_photons(cfg, cfg.n_gamma),
        target_time_s: target_time,
        budget_planck_energy: planck,
        budget_reduced_energy: reduced,
        planck_mass_kg: planck_mass(),
        notes,
    })
}
