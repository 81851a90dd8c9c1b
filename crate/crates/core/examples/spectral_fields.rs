//! Builds a band-limited field on the torus, differentiates it spectrally and
//! checks Parseval.

use parabolic_uniqueness::ensemble::{member_rng, random_block_field};
use parabolic_uniqueness::spectral::{SpectralField, TorusGrid, DEFAULT_PERIOD};

fn main() -> parabolic_uniqueness::Result<()> {
    let grid = TorusGrid::new(1, 256, DEFAULT_PERIOD)?;
    let k = 3.0 * grid.frequency_step();
    let u = SpectralField::from_real_fn(&grid, |x| (k * x[0]).sin());
    let du = u.derivative(0)?.to_physical();
    let err = (0..grid.len())
        .map(|i| (du.physical_values()[i].re - k * (k * grid.point(i)[0]).cos()).abs())
        .fold(0.0, f64::max);
    println!("d/dx sin({k:.3} x): max error {err:.2e}");

    let v = random_block_field(&grid, &mut member_rng(7, 0), 4)?;
    let phys = v.to_physical().l2_norm();
    let freq = v.to_frequency().l2_norm();
    println!("random block field: |v|_L2 physical {phys:.12}  frequency {freq:.12}");
    println!(
        "H^1 norm {:.6}, sup norm {:.6}",
        v.sobolev_norm(1.0),
        v.sup_norm()
    );
    Ok(())
}
