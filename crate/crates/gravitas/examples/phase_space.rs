//! Mandelstam invariants under boosts, two- and three-body phase-space
//! volumes, and the invariant measure identity.

use gravitas::kinematics::{
    check_invariant_measure_identity, elastic_cm, mandelstam, sample_three_body, sample_two_body, two_body_volume,
    FourVector, MeasureTestFunction,
};
use gravitas::rng::{mc_mean, RngStream};

fn main() -> gravitas::Result<()> {
    let cfg = elastic_cm(1.0, 0.8, 0.7)?;
    let rest = mandelstam(&cfg)?;
    let moving = mandelstam(&cfg.boosted([0.3, -0.5, 0.6])?)?;
    println!("s, t, u at rest:  {:.12} {:.12} {:.12}", rest.s, rest.t, rest.u);
    println!("s, t, u boosted:  {:.12} {:.12} {:.12}", moving.s, moving.t, moving.u);

    let total = FourVector::at_rest(3.0);
    let stream = RngStream::new(11, 0);
    let two = mc_mean(100_000, stream.derive(0), |rng| sample_two_body(&total, 1.0, 0.5, rng).map(|s| s.weight).unwrap_or(f64::NAN));
    println!("two-body volume: sampled {:.6}, exact {:.6}", two.mean, two_body_volume(3.0, 1.0, 0.5));
    let three = mc_mean(200_000, stream.derive(1), |rng| {
        sample_three_body(&total, [0.5, 0.5, 0.5], rng).map(|s| s.weight).unwrap_or(f64::NAN)
    });
    println!("three-body volume: {:.6} +- {:.1e}", three.mean, three.std_error);

    for f in MeasureTestFunction::ALL {
        let r = check_invariant_measure_identity(|k| f.eval(k, 0.5), 0.5, stream.derive(10), 400_000);
        println!(
            "{:>16}: d3k/2E side {:.6e} +- {:.1e}, shell side {:.6e} +- {:.1e}",
            f.name(),
            r.lhs.mean,
            r.lhs.std_error,
            r.rhs.mean,
            r.rhs.std_error
        );
    }
    Ok(())
}
