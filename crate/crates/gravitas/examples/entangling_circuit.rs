//! Two trapped masses coupled by linearized Newtonian gravity: Duan product,
//! log-negativity and the first time the Duan product drops below 0.99.

use gravitas::entanglement::{Fig1Circuit, Yukawa};

fn main() -> gravitas::Result<()> {
    let circuit = Fig1Circuit::default();
    let initial = circuit.default_initial(1.0);
    let coupling = Yukawa::newton(1.0);
    let times: Vec<f64> = (0..=8).map(|i| 5.0 * i as f64).collect();
    println!("{:>6} {:>10} {:>10}", "t", "duan", "E_N");
    for row in circuit.time_series(&initial, &times, &coupling)? {
        println!("{:>6.1} {:>10.6} {:>10.6}", row.t, row.duan, row.e_n);
    }
    let t_star = circuit.first_violation_time(&initial, &coupling, 0.99, 20.0, 200)?;
    println!("duan < 0.99 first at t = {t_star:?}");
    Ok(())
}
