//! Checks the invariants of the synthetic coefficient family and sweeps the
//! mollifier estimates over dyadic levels.

use parabolic_uniqueness::coefficients::{
    synthetic_coefficient, verify_mollifier_estimates, SampleSpec,
};
use parabolic_uniqueness::modulus::ModulusOfContinuity;

fn main() -> parabolic_uniqueness::Result<()> {
    let spec = SampleSpec::default();
    let a = synthetic_coefficient(1, 0.5, ModulusOfContinuity::log(), 0.4, 1.0, &spec)?;
    let inv = a.check_invariants(&spec);
    println!(
        "{}: ellipticity {:.4}, holder quotient {:.4}, osgood quotient {:.4}, holds {}",
        a.name(),
        inv.ellipticity_min,
        inv.holder_quotient,
        inv.osgood_quotient,
        inv.holds
    );
    let rep = verify_mollifier_estimates(&a, 4, &spec)?;
    for r in &rep.rows {
        println!(
            "h = {}  eps = {:.3e}  C1 = {:.4}  C2 = {:.4}",
            r.h, r.epsilon, r.c1, r.c2
        );
    }
    println!("drift: C1 {:.3}  C2 {:.3}", rep.c1_drift, rep.c2_drift);
    Ok(())
}
