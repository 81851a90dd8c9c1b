//! Applies a paraproduct, checks its adjoint and picks the smallest order
//! giving a positive operator.

use parabolic_uniqueness::littlewood_paley::CutoffProfile;
use parabolic_uniqueness::paraproduct::{
    choose_m, demo_symbol, test_ensemble, Paraproduct, SymbolMatrix,
};
use parabolic_uniqueness::spectral::{SpectralField, TorusGrid, DEFAULT_PERIOD};

fn main() -> parabolic_uniqueness::Result<()> {
    let grid = TorusGrid::new(1, 512, DEFAULT_PERIOD)?;
    let cut = CutoffProfile::default();
    let a = demo_symbol(&grid);
    let op = Paraproduct::new(&a, 2, cut)?;
    let ens = test_ensemble(&grid, 3, 2, 5, 0.0)?;
    let lhs = op.apply(&ens[0])?.inner(&ens[1])?;
    let rhs = ens[0].inner(&op.adjoint(&ens[1])?)?;
    println!("<T u, v> = {lhs:.12}\n<u, T* v> = {rhs:.12}");

    let elliptic = SymbolMatrix::scalar(SpectralField::from_real_fn(&grid, |x| {
        1.0 + 0.4 * x[0].sin()
    }))?;
    let probe = test_ensemble(&grid, 3, 50, 6, 1.0)?;
    let report = choose_m(&elliptic, 0.6, &probe, cut)?;
    println!(
        "chosen m = {} (min ratio {:.4}, margin {:.4})",
        report.m, report.min_ratio, report.margin
    );
    Ok(())
}
