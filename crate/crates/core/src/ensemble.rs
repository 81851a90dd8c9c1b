//! Seeded random band-limited fields.
//!
//! Coefficients are drawn per integer mode in a fixed order that does not
//! depend on the grid size, so the same seed gives the same function on any
//! grid that resolves its band.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::spectral::{SpectralField, TorusGrid};

/// Independent generator for member `stream` of an ensemble seeded by `seed`.
pub fn member_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Lower edge of the frequency annulus of dyadic block `h`.
pub fn block_inner(h: usize) -> f64 {
    if h == 0 {
        0.0
    } else {
        0.55 * 2f64.powi(h as i32)
    }
}

/// Upper edge of the frequency annulus of dyadic block `h`.
pub fn block_outer(h: usize) -> f64 {
    1.9 * 2f64.powi(h as i32)
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Real field with independent complex Gaussian coefficients on the modes
/// with `lo <= |xi| <= hi`. Fails if the band is not below the grid's Nyquist.
pub fn band_limited(
    grid: &TorusGrid,
    rng: &mut ChaCha8Rng,
    lo: f64,
    hi: f64,
) -> Result<SpectralField> {
    if hi >= grid.nyquist() {
        return Err(Error::Resolution {
            block: 0,
            required: grid.points_for_frequency(hi * 1.000_001),
            have: grid.n(),
        });
    }
    let step = grid.frequency_step();
    let mmax = (hi / step).floor() as i64;
    let mut modes = Vec::new();
    let second = if grid.dim() == 2 { mmax } else { 0 };
    for m1 in -second..=second {
        for m0 in -mmax..=mmax {
            // one draw per conjugate pair, taken at the lexicographically positive member
            if (m1, m0) < (0, 0) || (m1 == 0 && m0 < 0) {
                continue;
            }
            let z = gaussian(rng);
            let xi = step * ((m0 * m0 + m1 * m1) as f64).sqrt();
            if xi < lo || xi > hi {
                continue;
            }
            if m0 == 0 && m1 == 0 {
                modes.push(([0, 0], Complex64::new(z.re, 0.0)));
            } else {
                modes.push(([m0, m1], z));
                modes.push(([-m0, -m1], z.conj()));
            }
        }
    }
    SpectralField::from_modes(grid, &modes)
}

/// Rescales to unit `H^s` norm (left unchanged if zero).
pub fn normalize(u: &SpectralField, s: f64) -> SpectralField {
    let n = u.sobolev_norm(s);
    if n > 0.0 {
        u.scale_real(1.0 / n)
    } else {
        u.clone()
    }
}

/// Random field whose spectrum covers a random contiguous run of dyadic blocks in `0..=h_max`.
pub fn random_block_field(
    grid: &TorusGrid,
    rng: &mut ChaCha8Rng,
    h_max: usize,
) -> Result<SpectralField> {
    let a = rng.random_range(0..=h_max);
    let b = rng.random_range(0..=h_max);
    let (lo, hi) = (a.min(b), a.max(b));
    band_limited(
        grid,
        rng,
        block_inner(lo),
        block_outer(hi).min(0.999 * grid.nyquist()),
    )
}

/// Random field concentrated in the core of dyadic block `h`.
pub fn single_block_field(
    grid: &TorusGrid,
    rng: &mut ChaCha8Rng,
    h: usize,
) -> Result<SpectralField> {
    let (lo, hi) = if h == 0 {
        (0.0, 1.0)
    } else {
        (0.75 * 2f64.powi(h as i32), 1.5 * 2f64.powi(h as i32))
    };
    band_limited(grid, rng, lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::DEFAULT_PERIOD;

    #[test]
    fn same_seed_same_function_on_refined_grid() {
        let g = TorusGrid::new(1, 256, DEFAULT_PERIOD).unwrap();
        let gf = g.refined().unwrap();
        let u = band_limited(&g, &mut member_rng(3, 1), 0.0, 20.0).unwrap();
        let v = band_limited(&gf, &mut member_rng(3, 1), 0.0, 20.0).unwrap();
        assert!((u.l2_norm() - v.l2_norm()).abs() < 1e-12 * u.l2_norm());
        let up = u.to_physical();
        let vp = v.to_physical();
        for i in 0..g.len() {
            assert!((up.raw()[i] - vp.raw()[2 * i]).norm() < 1e-12);
        }
        assert!(u.max_imag() < 1e-13);
    }

    #[test]
    fn bands_respect_limits() {
        let g = TorusGrid::new(2, 64, DEFAULT_PERIOD).unwrap();
        let u = single_block_field(&g, &mut member_rng(1, 0), 2).unwrap();
        for (i, z) in u.frequency_values().iter().enumerate() {
            if z.norm() > 0.0 {
                let xi = g.frequency_norm(i);
                assert!((3.0..=6.0).contains(&xi));
            }
        }
        assert!(band_limited(&g, &mut member_rng(1, 0), 0.0, 9.0).is_err());
        assert!(u.max_imag() < 1e-13);
    }
}
