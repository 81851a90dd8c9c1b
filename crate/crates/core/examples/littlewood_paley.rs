//! Splits a random field into dyadic blocks and compares the dyadic and
//! spectral Sobolev norms.

use parabolic_uniqueness::ensemble::{member_rng, random_block_field};
use parabolic_uniqueness::littlewood_paley::{
    dyadic_sobolev, j_max, CutoffProfile, DyadicDecomposition,
};
use parabolic_uniqueness::spectral::{TorusGrid, DEFAULT_PERIOD};

fn main() -> parabolic_uniqueness::Result<()> {
    let grid = TorusGrid::new(1, 1024, DEFAULT_PERIOD)?;
    let cut = CutoffProfile::default();
    let h = j_max(&grid, &cut).expect("grid resolves at least one block");
    let u = random_block_field(&grid, &mut member_rng(1, 0), h)?;
    let dec = DyadicDecomposition::new(&u, &cut)?;
    for (j, n) in dec.block_norms().iter().enumerate() {
        println!("block {j:>2}: {n:.6e}");
    }
    let rebuilt = dec.partial_sum(dec.j_max)?;
    println!("|u - sum of blocks| = {:.2e}", rebuilt.sub(&u)?.l2_norm());
    for s in [0.0, 1.0, 2.0] {
        println!(
            "s = {s}: dyadic / spectral = {:.4}",
            dyadic_sobolev(&u, s, &cut) / u.sobolev_norm(s)
        );
    }
    Ok(())
}
