//! Light-deflection estimates for a 1 g source superposed over 10 um.

use gravitas::estimators::{deflection_report, BendingConfig};

fn main() -> gravitas::Result<()> {
    let report = deflection_report(&BendingConfig::default(), 1.0)?;
    println!("differential deflection  {:.3e} rad", report.deflection_rad);
    println!("integration time         {:.3e} s", report.integration_time_s);
    println!("photons for 1 s          {:.3e}", report.budget_planck_energy.n_gamma);
    println!(
        "effective mass           {:.3e} m_pl (h c/lambda), {:.3e} m_pl (hbar c/lambda)",
        report.budget_planck_energy.effective_mass_planck, report.budget_reduced_energy.effective_mass_planck
    );
    Ok(())
}
