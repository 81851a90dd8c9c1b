//! Tabulates the Carleman weight for the log modulus and compares the linear
//! modulus with its closed form.

use parabolic_uniqueness::modulus::{is_osgood, ModulusOfContinuity};
use parabolic_uniqueness::weight::CarlemanWeight;

fn main() -> parabolic_uniqueness::Result<()> {
    for mu in ModulusOfContinuity::registry() {
        println!("{:<12} osgood: {}", mu.name(), is_osgood(&mu));
    }

    let (gamma, t_h, alpha) = (8.0, 1.0, 0.5);
    let w = CarlemanWeight::new(ModulusOfContinuity::log(), gamma, t_h, alpha)?;
    let lin = CarlemanWeight::new(ModulusOfContinuity::linear(), gamma, t_h, alpha)?;
    println!(
        "{:>10} {:>14} {:>14} {:>14}",
        "t", "log psi (log)", "log psi (lin)", "closed form"
    );
    for t in [1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0] {
        let exact = gamma * (t_h.powf(alpha) - f64::powf(t, alpha)) / alpha;
        println!(
            "{t:>10.1e} {:>14.6} {:>14.6} {exact:>14.6}",
            w.log_psi_at_time(t)?,
            lin.log_psi_at_time(t)?
        );
    }
    println!("phi''(T/2) = {:.6}", w.phi_second_at_time(0.5 * t_h)?);
    Ok(())
}
