//! Tree-level optical theorem on the six-point amplitude: the weighted
//! discontinuity along a photon-energy path against the radiated-state sum.

use gravitas::amplitudes::ModelParams;
use gravitas::unitarity::{optical_tree_check, unitarity_violation_scan, BumpWeight, PhotonEnergySweep, ScanGrid};

fn main() -> gravitas::Result<()> {
    let params = ModelParams::default();
    let ladder = [1e-2, 1e-3, 1e-4];
    let path = PhotonEnergySweep::canonical(params.m);
    let weight = BumpWeight::for_ladder(0.3, &ladder, params.m);
    let report = optical_tree_check(&path, &weight, &params, &ladder, 8)?;
    for (eps, lhs) in &report.eps_ladder {
        println!("eps = {eps:.0e}: lhs = {lhs:.8}");
    }
    println!("extrapolated lhs   {:.8}", report.extrapolated_lhs);
    println!("rhs with radiation {:.8} +- {:.1e}", report.rhs_with_gravitons, report.mc_error_rhs);
    println!("|lhs/rhs| = {:?}, sign {}", report.ratio_restored, report.relative_sign);
    println!("pole at omega = {:.6}, jacobian {:.6}", report.pole_location, report.jacobian);
    println!("elastic only: {}", report.ratio_elastic_only_status);

    let grid = ScanGrid::Tree { centers: vec![0.3, 0.35, 0.4, 0.5], eps_ladder_rel: ladder.to_vec(), n_panels: 8 };
    for row in unitarity_violation_scan(&params, &grid)? {
        println!("center {:.2}: ratio_restored {:?} ({:?})", row.point, row.ratio_restored, row.status);
    }
    Ok(())
}
