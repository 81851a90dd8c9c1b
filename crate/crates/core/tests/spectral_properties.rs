use parabolic_uniqueness::ensemble::{member_rng, random_block_field};
use parabolic_uniqueness::littlewood_paley::{dyadic_block, j_max, CutoffProfile};
use parabolic_uniqueness::spectral::{SpectralField, TorusGrid, DEFAULT_PERIOD};
use proptest::prelude::*;

fn grid() -> TorusGrid {
    TorusGrid::new(1, 128, DEFAULT_PERIOD).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval_holds(seed in 0u64..10_000, h in 0usize..4) {
        let u = random_block_field(&grid(), &mut member_rng(seed, 0), h).unwrap();
        let a = u.to_physical().l2_norm();
        let b = u.to_frequency().l2_norm();
        prop_assert!((a - b).abs() <= 1e-12 * b);
    }

    #[test]
    fn refine_preserves_norm_and_samples(seed in 0u64..10_000) {
        let g = grid();
        let u = random_block_field(&g, &mut member_rng(seed, 1), 3).unwrap();
        let f = u.refine().unwrap();
        prop_assert_eq!(f.grid().n(), 2 * g.n());
        prop_assert!((f.l2_norm() - u.l2_norm()).abs() <= 1e-12 * u.l2_norm());
        let (up, fp) = (u.to_physical(), f.to_physical());
        for i in 0..g.len() {
            let d = (up.physical_values()[i] - fp.physical_values()[2 * i]).norm();
            prop_assert!(d <= 1e-12 * up.sup_norm());
        }
    }

    #[test]
    fn derivative_is_linear(s1 in 0u64..1000, s2 in 0u64..1000, c in -3.0f64..3.0) {
        let g = grid();
        let u = random_block_field(&g, &mut member_rng(s1, 2), 3).unwrap();
        let v = random_block_field(&g, &mut member_rng(s2, 3), 3).unwrap();
        let lhs = u.add(&v.scale_real(c)).unwrap().derivative(0).unwrap();
        let rhs = u.derivative(0).unwrap().add(&v.derivative(0).unwrap().scale_real(c)).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().l2_norm() <= 1e-12 * (1.0 + lhs.l2_norm()));
    }

    #[test]
    fn blocks_are_idempotent_up_to_neighbours(seed in 0u64..10_000) {
        let g = grid();
        let cut = CutoffProfile::default();
        let h = j_max(&g, &cut).unwrap();
        let u = random_block_field(&g, &mut member_rng(seed, 4), h).unwrap();
        // Delta_j applied to the sum of its neighbours reproduces Delta_j
        let j = 2;
        let near = dyadic_block(&u, j - 1, &cut).unwrap()
            .add(&dyadic_block(&u, j, &cut).unwrap()).unwrap()
            .add(&dyadic_block(&u, j + 1, &cut).unwrap()).unwrap();
        let a = dyadic_block(&near, j, &cut).unwrap();
        let b = dyadic_block(&u, j, &cut).unwrap();
        prop_assert!(a.sub(&b).unwrap().l2_norm() <= 1e-12 * (1.0 + u.l2_norm()));
    }
}

#[test]
fn refine_splits_the_nyquist_mode() {
    let g = TorusGrid::new(1, 8, DEFAULT_PERIOD).unwrap();
    let k = g.nyquist();
    let u = SpectralField::from_real_fn(&g, |x| (k * x[0]).cos());
    let f = u.refine().unwrap().to_physical();
    prop_assert_close(f.max_imag(), 0.0);
    for i in 0..f.grid().len() {
        let x = f.grid().point(i)[0];
        prop_assert_close(f.physical_values()[i].re, (k * x).cos());
    }
}

fn prop_assert_close(a: f64, b: f64) {
    assert!((a - b).abs() < 1e-12, "{a} vs {b}");
}
