//! Spin-2 and spin-0 exchange numerators against the static value `4 m^4`,
//! and the tensor-contraction cross-check.

use gravitas::amplitudes::{m_2to2_newton, m_2to2_spin2, n0_closed, n0_contracted, n2_as_printed, n2_closed, n2_contracted, ModelParams};
use gravitas::kinematics::{elastic_cm, mandelstam};
use std::f64::consts::FRAC_PI_2;

fn main() -> gravitas::Result<()> {
    let m = 1.0;
    println!("{:>8} {:>14} {:>14} {:>14}", "v", "N2/4m^4 - 1", "N0/4m^4 - 1", "printed - 1");
    for v in [1e-3, 1e-2, 1e-1, 1.0] {
        let p = m * v;
        let cfg = elastic_cm(m, p, FRAC_PI_2)?;
        let norm = 4.0 * m.powi(4);
        println!(
            "{v:>8.0e} {:>14.6e} {:>14.6e} {:>14.6e}",
            n2_closed(&cfg, m)? / norm - 1.0,
            n0_closed(&cfg, m)? / norm - 1.0,
            n2_as_printed(&cfg, m)? / norm - 1.0
        );
    }

    let cfg = elastic_cm(m, 0.7, 1.1)?;
    println!("N2 closed {:.12}, contracted {:.12}", n2_closed(&cfg, m)?, n2_contracted(&cfg, m)?);
    println!("N0 closed {:.12}, contracted {:.12}", n0_closed(&cfg, m)?, n0_contracted(&cfg, m)?);

    let params = ModelParams { mu: 1e-9, epsilon: 1e-14, ..ModelParams::default() };
    let slow = elastic_cm(m, 1e-4, 0.5)?;
    let spin2 = m_2to2_spin2(&slow, &params)?.value.re;
    let newton = m_2to2_newton(mandelstam(&slow)?.t, &params)?.value.re;
    println!("static limit: spin-2 / Newton = {:.8}", spin2 / newton);
    Ok(())
}
