//! Measurement-and-feedback ensemble next to the unitary channel.

use gravitas::entanglement::Fig1Circuit;
use gravitas::semiclassical::{compare_channels, EnsembleSettings, FeedbackConfig};

fn main() -> gravitas::Result<()> {
    let circuit = Fig1Circuit::default();
    let feedback = FeedbackConfig::default();
    let initial = circuit.default_initial(feedback.hbar);
    let rows = compare_channels(&feedback, &circuit, &initial, 40.0, &EnsembleSettings { n_traj: 200, ..Default::default() })?;
    println!("{:>6} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}", "t", "duan_U", "E_N_U", "duan_FB", "E_N_FB", "x1_U", "x1_FB");
    for r in rows.iter().step_by(100) {
        println!(
            "{:>6.1} {:>10.5} {:>10.5} {:>10.5} {:>10.1e} {:>10.5} {:>10.5}",
            r.t, r.duan_unitary, r.e_n_unitary, r.duan_semiclassical, r.e_n_semiclassical, r.mean_x1_unitary, r.mean_x1_semiclassical
        );
    }
    Ok(())
}
