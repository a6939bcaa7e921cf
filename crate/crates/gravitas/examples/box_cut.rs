//! Imaginary part of the forward box against the two-quantum final-state
//! sum and against the elastic final-state sum.

use gravitas::amplitudes::ModelParams;
use gravitas::rng::RngStream;
use gravitas::unitarity::{unitarity_violation_scan, ScanGrid};

fn main() -> gravitas::Result<()> {
    let params = ModelParams { mu: 1e-3, epsilon: 1e-12, ..ModelParams::default() };
    let grid = ScanGrid::Box { s_values: vec![3.9, 4.1, 5.0, 6.5, 8.0, 10.0], n_samples: 200_000, stream: RngStream::new(5, 0) };
    println!("{:>5} {:>12} {:>12} {:>12} {:>14}  status", "s", "Im box", "two-quantum", "elastic", "ratio");
    for r in unitarity_violation_scan(&params, &grid)? {
        println!(
            "{:>5.1} {:>12.5e} {:>12.5e} {:>12.5e} {:>14}  {:?}",
            r.point,
            r.lhs,
            r.rhs_restored,
            r.rhs_elastic,
            r.ratio_restored.map(|q| format!("{q:.5}")).unwrap_or_else(|| "-".into()),
            r.status
        );
    }
    Ok(())
}
