//! Dyadic frequency decomposition.
//!
//! With a smooth non-increasing profile `psi` equal to 1 on `[0, 11/10]` and 0
//! on `[19/10, inf)`, `chi(xi) = psi(|xi|)` and `phi(xi) = chi(xi) - chi(2 xi)`:
//! `Delta_0 = chi(D)`, `Delta_j = phi(2^{-j} D)` for `j >= 1`, and
//! `S_k = chi(2^{-k} D) = sum_{j <= k} Delta_j`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::smooth::{fall, Jet};
use crate::spectral::{SpectralField, TorusGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffProfile {
    pub inner: f64,
    pub outer: f64,
}

impl Default for CutoffProfile {
    fn default() -> Self {
        CutoffProfile {
            inner: 1.1,
            outer: 1.9,
        }
    }
}

impl CutoffProfile {
    pub fn psi_jet(&self, t: f64) -> Jet {
        fall(t, self.inner, self.outer)
    }

    pub fn psi(&self, t: f64) -> f64 {
        self.psi_jet(t).value
    }

    pub fn chi(&self, xi: [f64; 2]) -> f64 {
        self.psi((xi[0] * xi[0] + xi[1] * xi[1]).sqrt())
    }

    pub fn phi_cut(&self, xi: [f64; 2]) -> f64 {
        self.chi(xi) - self.chi([2.0 * xi[0], 2.0 * xi[1]])
    }

    /// Multiplier of `Delta_j` at frequency `xi`.
    pub fn block_symbol(&self, j: usize, xi: [f64; 2]) -> f64 {
        if j == 0 {
            return self.chi(xi);
        }
        let s = 2f64.powi(-(j as i32));
        self.chi([s * xi[0], s * xi[1]]) - self.chi([2.0 * s * xi[0], 2.0 * s * xi[1]])
    }

    /// Multiplier of `S_k` at frequency `xi`.
    pub fn low_pass_symbol(&self, k: usize, xi: [f64; 2]) -> f64 {
        let s = 2f64.powi(-(k as i32));
        self.chi([s * xi[0], s * xi[1]])
    }

    /// `max |chi(xi) + sum_{j=1}^J phi(2^{-j} xi) - chi(2^{-J} xi)|` over `|xi| <= xi_max`.
    pub fn partition_defect(&self, big_j: usize, xi_max: f64, samples: usize) -> f64 {
        (0..=samples)
            .map(|i| {
                let xi = [xi_max * i as f64 / samples as f64, 0.0];
                let sum: f64 = (0..=big_j).map(|j| self.block_symbol(j, xi)).sum();
                (sum - self.low_pass_symbol(big_j, xi)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Largest `j` with `19/10 * 2^j <= Nyquist`, or `None` if even `Delta_0` is unresolved.
pub fn j_max(grid: &TorusGrid, cut: &CutoffProfile) -> Option<usize> {
    let ny = grid.nyquist();
    if cut.outer > ny {
        return None;
    }
    Some((ny / cut.outer).log2().floor() as usize)
}

/// Smallest `J` with `S_J = Id` on the grid.
pub fn full_depth(grid: &TorusGrid, cut: &CutoffProfile) -> usize {
    let m = grid.max_frequency() / cut.inner;
    if m <= 1.0 {
        0
    } else {
        m.log2().ceil() as usize
    }
}

/// `Delta_j u`, without the resolution check.
pub fn block_unchecked(u: &SpectralField, j: usize, cut: &CutoffProfile) -> SpectralField {
    u.apply_multiplier(|xi| cut.block_symbol(j, xi))
}

/// `Delta_j u`; fails if the block's support `19/10 * 2^j` passes the Nyquist frequency.
pub fn dyadic_block(u: &SpectralField, j: usize, cut: &CutoffProfile) -> Result<SpectralField> {
    let g = u.grid();
    let top = cut.outer * 2f64.powi(j as i32);
    if top > g.nyquist() {
        return Err(Error::Resolution {
            block: j,
            required: g.points_for_frequency(top),
            have: g.n(),
        });
    }
    Ok(block_unchecked(u, j, cut))
}

/// `S_k u = chi(2^{-k} D) u`, for any `k`.
pub fn low_pass(u: &SpectralField, k: usize, cut: &CutoffProfile) -> SpectralField {
    u.apply_multiplier(|xi| cut.low_pass_symbol(k, xi))
}

#[derive(Debug, Clone)]
pub struct DyadicDecomposition {
    pub source: SpectralField,
    pub blocks: Vec<SpectralField>,
    pub j_max: usize,
}

impl DyadicDecomposition {
    /// Blocks `Delta_0 u, ..., Delta_{J_max} u`.
    pub fn new(u: &SpectralField, cut: &CutoffProfile) -> Result<Self> {
        let jm = j_max(u.grid(), cut).ok_or(Error::Resolution {
            block: 0,
            required: u.grid().points_for_frequency(cut.outer),
            have: u.grid().n(),
        })?;
        let blocks = (0..=jm)
            .map(|j| dyadic_block(u, j, cut))
            .collect::<Result<Vec<_>>>()?;
        Ok(DyadicDecomposition {
            source: u.clone(),
            blocks,
            j_max: jm,
        })
    }

    /// `sum_{j <= k} Delta_j u`.
    pub fn partial_sum(&self, k: usize) -> Result<SpectralField> {
        let mut acc = self.blocks[0].clone();
        for b in self.blocks.iter().take(k + 1).skip(1) {
            acc = acc.add(b)?;
        }
        Ok(acc)
    }

    pub fn block_norms(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.l2_norm()).collect()
    }
}

/// `(sum_j 2^{2js} ||Delta_j u||^2)^{1/2}` over every block the grid carries.
pub fn dyadic_sobolev(u: &SpectralField, s: f64, cut: &CutoffProfile) -> f64 {
    let depth = full_depth(u.grid(), cut);
    let f = u.to_frequency();
    (0..=depth)
        .map(|j| 2f64.powf(2.0 * j as f64 * s) * block_unchecked(&f, j, cut).l2_norm_sq())
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct LipschitzReport {
    /// `sup_j 2^j ||Delta_j a||_inf`
    pub block_sup: f64,
    /// `sup_k ||grad S_k a||_inf`
    pub gradient_sup: f64,
    /// `||a||_inf + ||grad a||_inf`
    pub lip_norm: f64,
    pub block_constant: f64,
    pub gradient_constant: f64,
}

fn gradient_sup(u: &SpectralField) -> f64 {
    let grads: Vec<Vec<f64>> = u
        .gradient()
        .iter()
        .map(|g| g.physical_values().iter().map(|z| z.re).collect())
        .collect();
    (0..u.grid().len())
        .map(|i| grads.iter().map(|g| g[i] * g[i]).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

pub fn lipschitz_block_bounds(a: &SpectralField, cut: &CutoffProfile) -> Result<LipschitzReport> {
    if a.max_imag() > 1e-10 * (1.0 + a.sup_norm()) {
        return Err(Error::Precondition("symbol must be real valued".into()));
    }
    let depth = full_depth(a.grid(), cut);
    let f = a.to_frequency();
    let mut block_sup: f64 = 0.0;
    let mut grad_sup: f64 = 0.0;
    for j in 0..=depth {
        let b = block_unchecked(&f, j, cut);
        block_sup = block_sup.max(2f64.powi(j as i32) * b.sup_norm());
        grad_sup = grad_sup.max(gradient_sup(&low_pass(&f, j, cut)));
    }
    let lip_norm = a.sup_norm() + gradient_sup(&f);
    let (bc, gc) = if lip_norm > 0.0 {
        (block_sup / lip_norm, grad_sup / lip_norm)
    } else {
        (0.0, 0.0)
    };
    Ok(LipschitzReport {
        block_sup,
        gradient_sup: grad_sup,
        lip_norm,
        block_constant: bc,
        gradient_constant: gc,
    })
}

/// `max_j ||d_j v_h|| / ||v_h||` for a block `v_h`.
pub fn bernstein_check(v_h: &SpectralField, h: usize) -> Result<f64> {
    let n = v_h.l2_norm();
    if n == 0.0 {
        return Err(Error::ZeroBlock(h));
    }
    Ok(v_h
        .gradient()
        .iter()
        .map(|d| d.l2_norm() / n)
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::DEFAULT_PERIOD;
    use num_complex::Complex64;

    #[test]
    fn profile_plateaus() {
        let c = CutoffProfile::default();
        assert_eq!(c.psi(0.0), 1.0);
        assert_eq!(c.psi(1.1), 1.0);
        assert_eq!(c.psi(1.9), 0.0);
        assert_eq!(c.psi(5.0), 0.0);
        assert!(c.partition_defect(6, 300.0, 3000) <= 1e-14);
    }

    #[test]
    fn default_grid_depths() {
        let c = CutoffProfile::default();
        let g = TorusGrid::new(1, 1024, DEFAULT_PERIOD).unwrap();
        assert_eq!(j_max(&g, &c), Some(6));
        let g2 = TorusGrid::new(2, 256, DEFAULT_PERIOD).unwrap();
        assert_eq!(j_max(&g2, &c), Some(4));
        let u = SpectralField::zeros(&g);
        assert!(matches!(
            dyadic_block(&u, 7, &c),
            Err(Error::Resolution { required: 2048, .. })
        ));
    }

    #[test]
    fn low_frequency_field_is_its_own_first_block() {
        let c = CutoffProfile::default();
        let g = TorusGrid::new(1, 256, DEFAULT_PERIOD).unwrap();
        let u = SpectralField::from_modes(
            &g,
            &[
                ([4, 0], Complex64::new(1.0, 0.0)),
                ([1, 0], Complex64::new(0.5, 0.5)),
            ],
        )
        .unwrap();
        let d = DyadicDecomposition::new(&u, &c).unwrap();
        assert!(d.blocks[0].rel_distance(&u).unwrap() < 1e-15);
        assert!(d.blocks[1..].iter().all(|b| b.l2_norm() == 0.0));
        assert!(bernstein_check(&d.blocks[0], 0).unwrap() <= 1.9);
        assert!(matches!(
            bernstein_check(&d.blocks[1], 1),
            Err(Error::ZeroBlock(1))
        ));
    }
}
