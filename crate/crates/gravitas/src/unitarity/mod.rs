//! Optical-theorem checks for the six-point tree pole and for the box
//! amplitude's two-quantum cut, with and without radiated final states.

mod boxcut;
mod tree;

pub use boxcut::{
    annihilation_rhs, box_cut_im_forward, box_cut_im_forward_boosted, elastic_rhs, forward_denominator_bound,
    forward_pair, ANNIHILATION_STRATA,
};
pub use tree::{optical_tree_check, reversed, BumpWeight, KinematicPath, OpticalReport, PhotonEnergySweep, WeightFn};

use crate::amplitudes::ModelParams;
use crate::error::{GravitasError, Result};
use crate::rng::RngStream;
use serde::{Deserialize, Serialize};

/// Which code paths and random streams produced the two sides of a check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub lhs: String,
    pub rhs: String,
    pub lhs_stream: Option<RngStream>,
    pub rhs_stream: Option<RngStream>,
}

impl Provenance {
    pub fn deterministic(lhs: &str, rhs: &str) -> Self {
        Self { lhs: lhs.into(), rhs: rhs.into(), lhs_stream: None, rhs_stream: None }
    }

    /// True when the sides came from different code paths and, if random,
    /// from different streams.
    pub fn independent(&self) -> bool {
        self.lhs != self.rhs && (self.lhs_stream.is_none() || self.lhs_stream != self.rhs_stream)
    }
}

/// Grid for [`unitarity_violation_scan`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanGrid {
    /// Weight-bump centres along the canonical photon-energy path.
    Tree { centers: Vec<f64>, eps_ladder_rel: Vec<f64>, n_panels: usize },
    /// Values of `s` for the forward box.
    Box { s_values: Vec<f64>, n_samples: usize, stream: RngStream },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    /// A right side vanishes identically; ratios are undefined.
    Undefined(String),
    BelowThreshold,
}

/// One grid point of a violation scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanRow {
    pub point: f64,
    pub lhs: f64,
    pub lhs_error: f64,
    pub rhs_elastic: f64,
    pub rhs_elastic_error: f64,
    pub rhs_restored: f64,
    pub rhs_restored_error: f64,
    pub ratio_restored: Option<f64>,
    pub ratio_restored_error: Option<f64>,
    pub ratio_elastic: Option<f64>,
    pub ratio_elastic_error: Option<f64>,
    pub status: RowStatus,
}

fn ratio(a: f64, da: f64, b: f64, db: f64) -> (Option<f64>, Option<f64>) {
    if b == 0.0 || a == 0.0 {
        return (None, None);
    }
    let r = a / b;
    (Some(r), Some(r.abs() * ((da / a).powi(2) + (db / b).powi(2)).sqrt()))
}

/// Left side, elastic-only right side and radiation-restored right side per
/// grid point.
pub fn unitarity_violation_scan(params: &ModelParams, grid: &ScanGrid) -> Result<Vec<ScanRow>> {
    params.validate()?;
    let mut rows = Vec::new();
    match grid {
        ScanGrid::Tree { centers, eps_ladder_rel, n_panels } => {
            let path = PhotonEnergySweep::canonical(params.m);
            for &c in centers {
                let w = BumpWeight::for_ladder(c, eps_ladder_rel, params.m);
                let rep = optical_tree_check(&path, &w, params, eps_ladder_rel, *n_panels)?;
                let (lhs, rhs) = (rep.extrapolated_lhs, rep.rhs_with_gravitons);
                let lhs_err = rep.eps_ladder.last().map(|(_, l)| (l - lhs).abs()).unwrap_or(0.0);
                let restored = if rhs == 0.0 { None } else { Some((lhs / rhs).abs()) };
                let status = if rhs == 0.0 {
                    RowStatus::Undefined("radiated-state side vanishes: no pole under the weight or free theory".into())
                } else {
                    RowStatus::Undefined(rep.ratio_elastic_only_status.clone())
                };
                rows.push(ScanRow {
                    point: c,
                    lhs,
                    lhs_error: lhs_err,
                    rhs_elastic: 0.0,
                    rhs_elastic_error: 0.0,
                    rhs_restored: rhs,
                    rhs_restored_error: rep.mc_error_rhs,
                    ratio_restored: restored,
                    ratio_restored_error: restored.map(|r| r * (rep.mc_error_rhs / rhs.abs() + lhs_err / lhs.abs())),
                    ratio_elastic: None,
                    ratio_elastic_error: None,
                    status,
                });
            }
        }
        ScanGrid::Box { s_values, n_samples, stream } => {
            for (i, &s) in s_values.iter().enumerate() {
                let lhs_stream = stream.derive(2 * i as u64);
                let rhs_stream = stream.derive(2 * i as u64 + 1);
                let lhs = match box_cut_im_forward(s, params, *n_samples, lhs_stream) {
                    Ok(v) => v,
                    Err(GravitasError::BelowThreshold { .. }) => {
                        rows.push(ScanRow {
                            point: s,
                            lhs: 0.0,
                            lhs_error: 0.0,
                            rhs_elastic: 0.0,
                            rhs_elastic_error: 0.0,
                            rhs_restored: 0.0,
                            rhs_restored_error: 0.0,
                            ratio_restored: None,
                            ratio_restored_error: None,
                            ratio_elastic: None,
                            ratio_elastic_error: None,
                            status: RowStatus::BelowThreshold,
                        });
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let rhs = annihilation_rhs(s, params, *n_samples, rhs_stream)?;
                let (el, el_err) = elastic_rhs(s, params)?;
                let (rr, rr_err) = ratio(lhs.mean, lhs.std_error, rhs.mean, rhs.std_error);
                let (re, re_err) = ratio(lhs.mean, lhs.std_error, el, el_err);
                let status = if rr.is_none() {
                    RowStatus::Undefined("right side vanishes: free theory".into())
                } else {
                    RowStatus::Ok
                };
                rows.push(ScanRow {
                    point: s,
                    lhs: lhs.mean,
                    lhs_error: lhs.std_error,
                    rhs_elastic: el,
                    rhs_elastic_error: el_err,
                    rhs_restored: rhs.mean,
                    rhs_restored_error: rhs.std_error,
                    ratio_restored: rr,
                    ratio_restored_error: rr_err,
                    ratio_elastic: re,
                    ratio_elastic_error: re_err,
                    status,
                });
            }
        }
    }
    Ok(rows)
}
