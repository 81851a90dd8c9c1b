//! Modified Bony paraproduct
//! `T^m_a u = S_{m-1}a S_{m+1}u + sum_{k >= m-1} S_k a Delta_{k+3} u`.
//!
//! On a grid the sum is finite: it stops at the `K` beyond which
//! `Delta_{k+3} u` vanishes identically, so the truncation is exact.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::{member_rng, random_block_field};
use crate::error::{Error, Result};
use crate::littlewood_paley::{block_unchecked, full_depth, low_pass, CutoffProfile};
use crate::spectral::{SpectralField, TorusGrid};

#[derive(Debug, Clone)]
pub struct Paraproduct {
    symbol: SpectralField,
    m: usize,
    cut: CutoffProfile,
    truncation_k: usize,
    /// `S_k a` in physical space, `k = 0..=K`
    low: Vec<Vec<f64>>,
}

fn real_samples(f: &SpectralField) -> Vec<f64> {
    f.physical_values().iter().map(|z| z.re).collect()
}

impl Paraproduct {
    pub fn new(symbol: &SpectralField, m: usize, cut: CutoffProfile) -> Result<Self> {
        if m < 1 {
            return Err(Error::Config("paraproduct order m must be >= 1".into()));
        }
        if symbol.max_imag() > 1e-10 * (1.0 + symbol.sup_norm()) {
            return Err(Error::Precondition(
                "paraproduct symbol must be real valued".into(),
            ));
        }
        let g = symbol.grid();
        // smallest K with 11/10 * 2^{K+3} >= max |xi|, so S_{K+3} = Id
        let k_exact = full_depth(g, &cut).saturating_sub(3);
        let truncation_k = k_exact.max(m - 1);
        let f = symbol.to_frequency();
        let low = (0..=truncation_k)
            .map(|k| real_samples(&low_pass(&f, k, &cut)))
            .collect();
        Ok(Paraproduct {
            symbol: symbol.to_physical(),
            m,
            cut,
            truncation_k,
            low,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn truncation_k(&self) -> usize {
        self.truncation_k
    }

    pub fn symbol(&self) -> &SpectralField {
        &self.symbol
    }

    pub fn cut(&self) -> &CutoffProfile {
        &self.cut
    }

    fn check(&self, u: &SpectralField) -> Result<()> {
        self.symbol.check_grid(u)
    }

    pub fn apply(&self, u: &SpectralField) -> Result<SpectralField> {
        self.check(u)?;
        let f = u.to_frequency();
        let mut acc = low_pass(&f, self.m + 1, &self.cut)
            .to_physical()
            .mul_real(&self.low[self.m - 1])?;
        for k in (self.m - 1)..=self.truncation_k {
            let b = block_unchecked(&f, k + 3, &self.cut);
            if b.raw().iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
                continue;
            }
            acc = acc.add(&b.to_physical().mul_real(&self.low[k])?)?;
        }
        Ok(acc)
    }

    /// `(T^m_a)^* w = S_{m+1}(S_{m-1}a w) + sum_k Delta_{k+3}(S_k a w)` for real `a`.
    pub fn adjoint(&self, w: &SpectralField) -> Result<SpectralField> {
        self.check(w)?;
        let p = w.to_physical();
        let first = p.mul_real(&self.low[self.m - 1])?.to_frequency();
        let mut acc = low_pass(&first, self.m + 1, &self.cut);
        for k in (self.m - 1)..=self.truncation_k {
            let prod = p.mul_real(&self.low[k])?.to_frequency();
            acc = acc.add(&block_unchecked(&prod, k + 3, &self.cut))?;
        }
        Ok(acc)
    }

    /// `a u - T^m_a u`.
    pub fn remainder(&self, u: &SpectralField) -> Result<SpectralField> {
        let au = u.to_physical().mul(&self.symbol)?;
        au.sub(&self.apply(u)?)
    }

    /// `||(T - T^*) d_axis u||`.
    pub fn adjoint_defect(&self, u: &SpectralField, axis: usize) -> Result<f64> {
        let d = u.derivative(axis)?;
        Ok(self.apply(&d)?.sub(&self.adjoint(&d)?)?.l2_norm())
    }

    /// `(sum_h sum_{j,k} ||d_j([Delta_h, T] d_k u)||^2)^{1/2}`.
    pub fn block_commutator_norm(&self, u: &SpectralField) -> Result<f64> {
        self.check(u)?;
        let g = u.grid();
        let depth = full_depth(g, &self.cut);
        let mut total = 0.0;
        for k in 0..g.dim() {
            let f = u.derivative(k)?;
            let tf = self.apply(&f)?.to_frequency();
            let per_h: Vec<f64> = (0..=depth)
                .into_par_iter()
                .map(|h| -> Result<f64> {
                    let left = block_unchecked(&tf, h, &self.cut);
                    let right = self.apply(&block_unchecked(&f, h, &self.cut))?;
                    let comm = left.sub(&right.to_frequency())?;
                    Ok((0..g.dim())
                        .map(|j| comm.derivative(j).expect("axis").l2_norm_sq())
                        .sum())
                })
                .collect::<Result<Vec<_>>>()?;
            total += per_h.iter().sum::<f64>();
        }
        Ok(total.sqrt())
    }
}

/// `||a||_inf + ||grad a||_inf` on the grid.
pub fn lip_norm(a: &SpectralField) -> f64 {
    let grads: Vec<Vec<f64>> = a.gradient().iter().map(real_samples).collect();
    let g = (0..a.grid().len())
        .map(|i| grads.iter().map(|d| d[i] * d[i]).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    a.sup_norm() + g
}

/// Symmetric matrix of real symbols `(a_jk)`, stored row-major.
#[derive(Debug, Clone)]
pub struct SymbolMatrix {
    dim: usize,
    entries: Vec<SpectralField>,
}

impl SymbolMatrix {
    pub fn new(entries: Vec<SpectralField>) -> Result<Self> {
        let dim = match entries.len() {
            1 => 1,
            4 => 2,
            n => {
                return Err(Error::Config(format!(
                    "symbol matrix needs 1 or 4 entries, got {n}"
                )))
            }
        };
        if entries[0].grid().dim() != dim {
            return Err(Error::Config(
                "symbol matrix size must match grid dimension".into(),
            ));
        }
        for e in &entries[1..] {
            entries[0].check_grid(e)?;
        }
        if dim == 2 {
            let d = entries[1].sub(&entries[2])?.sup_norm();
            if d > 1e-12 * (1.0 + entries[1].sup_norm()) {
                return Err(Error::Precondition(
                    "symbol matrix must be symmetric".into(),
                ));
            }
        }
        Ok(SymbolMatrix {
            dim,
            entries: entries.into_iter().map(|e| e.to_physical()).collect(),
        })
    }

    pub fn scalar(a: SpectralField) -> Result<Self> {
        Self::new(vec![a])
    }

    pub fn identity(grid: &TorusGrid) -> Result<Self> {
        let one = SpectralField::from_real_fn(grid, |_| 1.0);
        let zero = SpectralField::zeros(grid);
        if grid.dim() == 1 {
            Self::new(vec![one])
        } else {
            Self::new(vec![one.clone(), zero.clone(), zero, one])
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, j: usize, k: usize) -> &SpectralField {
        &self.entries[j * self.dim + k]
    }

    pub fn grid(&self) -> &TorusGrid {
        self.entries[0].grid()
    }

    /// Pointwise minimum eigenvalue over the grid.
    pub fn min_eigenvalue(&self) -> f64 {
        let vals: Vec<Vec<f64>> = self.entries.iter().map(real_samples).collect();
        (0..self.grid().len())
            .map(|i| {
                if self.dim == 1 {
                    vals[0][i]
                } else {
                    let (a, b, d) = (vals[0][i], vals[1][i], vals[3][i]);
                    0.5 * (a + d) - (0.25 * (a - d) * (a - d) + b * b).sqrt()
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn paraproducts(&self, m: usize, cut: CutoffProfile) -> Result<Vec<Paraproduct>> {
        self.entries
            .iter()
            .map(|e| Paraproduct::new(e, m, cut))
            .collect()
    }
}

/// `Re sum_{j,k} <T_{a_jk} d_k v, d_j v> / ||grad v||^2`.
pub fn positivity_ratio(ops: &[Paraproduct], dim: usize, v: &SpectralField) -> Result<f64> {
    let grad = v.gradient();
    let mut q = 0.0;
    for j in 0..dim {
        for k in 0..dim {
            q += ops[j * dim + k].apply(&grad[k])?.inner(&grad[j])?.re;
        }
    }
    let g2: f64 = grad.iter().map(|d| d.l2_norm_sq()).sum();
    Ok(q / g2)
}

#[derive(Debug, Clone, Serialize)]
pub struct ChooseMReport {
    pub m: usize,
    pub lambda0: f64,
    /// `min_v Re sum <T d_k v, d_j v> / ||grad v||^2` at the chosen `m`
    pub min_ratio: f64,
    /// `min_ratio - lambda0 / 2`
    pub margin: f64,
    /// `(m, min_ratio)` for every order tried
    pub tried: Vec<(usize, f64)>,
}

pub const MAX_M: usize = 12;

/// Smallest `m <= 12` with `Re sum <T^m_{a_jk} d_k v, d_j v> >= lambda0/2 ||grad v||^2`
/// on every member of `ensemble`.
pub fn choose_m(
    symbols: &SymbolMatrix,
    lambda0: f64,
    ensemble: &[SpectralField],
    cut: CutoffProfile,
) -> Result<ChooseMReport> {
    if !(lambda0 > 0.0 && lambda0 <= 1.0) {
        return Err(Error::Config(format!(
            "lambda0 must lie in (0, 1], got {lambda0}"
        )));
    }
    let ev = symbols.min_eigenvalue();
    if ev < lambda0 - 1e-12 {
        return Err(Error::Precondition(format!(
            "symbol ellipticity {ev} is below lambda0 = {lambda0}"
        )));
    }
    let mut tried = Vec::new();
    for m in 1..=MAX_M {
        let ops = symbols.paraproducts(m, cut)?;
        let ratios = ensemble
            .par_iter()
            .map(|v| positivity_ratio(&ops, symbols.dim(), v))
            .collect::<Result<Vec<_>>>()?;
        let min_ratio = ratios.into_iter().fold(f64::INFINITY, f64::min);
        tried.push((m, min_ratio));
        if min_ratio >= lambda0 / 2.0 {
            return Ok(ChooseMReport {
                m,
                lambda0,
                min_ratio,
                margin: min_ratio - lambda0 / 2.0,
                tried,
            });
        }
    }
    Err(Error::Search(format!(
        "no m <= {MAX_M} gives positivity; (m, min ratio) = {tried:?}"
    )))
}

/// Random test ensemble of real fields spread over dyadic blocks `0..=h_max`,
/// normalized to unit `H^s`. Member `i` uses stream `i` of `seed`.
pub fn test_ensemble(
    grid: &TorusGrid,
    seed: u64,
    size: usize,
    h_max: usize,
    s: f64,
) -> Result<Vec<SpectralField>> {
    (0..size)
        .into_par_iter()
        .map(|i| {
            let u = random_block_field(grid, &mut member_rng(seed, i as u64), h_max)?;
            Ok(crate::ensemble::normalize(&u, s))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct ParaproductConstants {
    /// `sup ||T u||_{L2} / (||a||_inf ||u||_{L2})`
    pub cont_t_s0: f64,
    /// `sup ||T u||_{H1} / (||a||_inf ||u||_{H1})`
    pub cont_t_s1: f64,
    /// `sup ||a u - T u||_{H1} / (||a||_Lip ||u||_{L2})`
    pub remainder: f64,
    /// `sup_j ||(T - T^*) d_j u|| / (||a||_Lip ||u||_{L2})`
    pub adjoint: f64,
    /// `sup comm(u) / (||a||_Lip ||u||_{H1})`
    pub commutator: f64,
}

impl ParaproductConstants {
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.cont_t_s0,
            self.cont_t_s1,
            self.remainder,
            self.adjoint,
            self.commutator,
        ]
    }

    pub const NAMES: [&'static str; 5] = [
        "cont_T_s0",
        "cont_T_s1",
        "cont_a_minus_T",
        "adj_a",
        "comm_T",
    ];
}

type Op<'a> = Box<dyn Fn(&SpectralField) -> Result<Vec<SpectralField>> + Send + Sync + 'a>;
type OpAdjoint<'a> = Box<dyn Fn(&[SpectralField]) -> Result<SpectralField> + Send + Sync + 'a>;

fn bessel(u: &SpectralField, s: f64) -> SpectralField {
    u.apply_multiplier(|xi| (1.0 + xi[0] * xi[0] + xi[1] * xi[1]).powf(0.5 * s))
}

fn vec_norm(v: &[SpectralField]) -> f64 {
    v.iter().map(|f| f.l2_norm_sq()).sum::<f64>().sqrt()
}

/// Largest `||A x|| / ||x||` reached by `steps` projected power iterations
/// `x <- P A^* A P x` from `start`, where `P` keeps `|xi| <= band`.
fn power_ratio(
    op: &Op,
    adj: &OpAdjoint,
    start: &SpectralField,
    band: f64,
    steps: usize,
) -> Result<f64> {
    let project = |u: &SpectralField| {
        u.apply_multiplier(|xi| if xi[0].hypot(xi[1]) <= band { 1.0 } else { 0.0 })
    };
    let mut x = project(start);
    let mut best: f64 = 0.0;
    for _ in 0..=steps {
        let nx = x.l2_norm();
        if nx == 0.0 {
            break;
        }
        x = x.scale_real(1.0 / nx);
        let ax = op(&x)?;
        best = best.max(vec_norm(&ax));
        x = project(&adj(&ax)?);
    }
    Ok(best)
}

/// Empirical constants of the continuity, remainder, adjoint and commutator
/// estimates: each is the largest ratio reached by `power_steps` projected
/// power iterations started at every ensemble member, the projection keeping
/// frequencies up to `band`.
pub fn fit_constants(
    p: &Paraproduct,
    ensemble: &[SpectralField],
    band: f64,
    power_steps: usize,
) -> Result<ParaproductConstants> {
    let a_inf = p.symbol().sup_norm();
    let a_lip = lip_norm(p.symbol());
    let dim = p.symbol().grid().dim();
    let depth = full_depth(p.symbol().grid(), &p.cut);
    let cut = p.cut;

    let cont = |s: f64| -> (Op, OpAdjoint) {
        (
            Box::new(move |x| Ok(vec![bessel(&p.apply(&bessel(x, -s))?, s)])),
            Box::new(move |y| Ok(bessel(&p.adjoint(&bessel(&y[0], s))?, -s))),
        )
    };
    let rem: (Op, OpAdjoint) = (
        Box::new(|x| Ok(vec![bessel(&p.remainder(x)?, 1.0)])),
        Box::new(|y| {
            let z = bessel(&y[0], 1.0).to_physical();
            z.mul(p.symbol())?.sub(&p.adjoint(&z)?)
        }),
    );
    let adj_ops: Vec<(Op, OpAdjoint)> = (0..dim)
        .map(|j| -> (Op, OpAdjoint) {
            (
                Box::new(move |x| {
                    let d = x.derivative(j)?;
                    Ok(vec![p.apply(&d)?.sub(&p.adjoint(&d)?)?])
                }),
                Box::new(move |y| {
                    let z = p.apply(&y[0])?.sub(&p.adjoint(&y[0])?)?;
                    z.derivative(j)
                }),
            )
        })
        .collect();
    // components indexed by (h, j, k); the adjoint of d_j [Delta_h, T] d_k is d_k [T^*, Delta_h] d_j
    let comm: (Op, OpAdjoint) = (
        Box::new(move |x| {
            let x = bessel(x, -1.0);
            let mut out = Vec::new();
            for k in 0..dim {
                let f = x.derivative(k)?;
                let tf = p.apply(&f)?.to_frequency();
                for h in 0..=depth {
                    let c = block_unchecked(&tf, h, &cut)
                        .sub(&p.apply(&block_unchecked(&f, h, &cut))?.to_frequency())?;
                    for j in 0..dim {
                        out.push(c.derivative(j)?);
                    }
                }
            }
            Ok(out)
        }),
        Box::new(move |y| {
            let mut acc = SpectralField::zeros(p.symbol().grid()).to_frequency();
            let mut idx = 0;
            for k in 0..dim {
                for h in 0..=depth {
                    for j in 0..dim {
                        let w = y[idx].derivative(j)?;
                        idx += 1;
                        let c = p
                            .adjoint(&block_unchecked(&w.to_frequency(), h, &cut))?
                            .to_frequency()
                            .sub(&block_unchecked(&p.adjoint(&w)?.to_frequency(), h, &cut))?;
                        acc = acc.add(&c.derivative(k)?)?;
                    }
                }
            }
            Ok(bessel(&acc, -1.0))
        }),
    );

    let (c0, c0a) = cont(0.0);
    let (c1, c1a) = cont(1.0);
    let run = |op: &Op, adj: &OpAdjoint| -> Result<f64> {
        let r = ensemble
            .par_iter()
            .map(|u| power_ratio(op, adj, u, band, power_steps))
            .collect::<Result<Vec<_>>>()?;
        Ok(r.into_iter().fold(0.0, f64::max))
    };
    let mut adjoint: f64 = 0.0;
    for (op, ad) in &adj_ops {
        adjoint = adjoint.max(run(op, ad)?);
    }
    Ok(ParaproductConstants {
        cont_t_s0: run(&c0, &c0a)? / a_inf,
        cont_t_s1: run(&c1, &c1a)? / a_inf,
        remainder: run(&rem.0, &rem.1)? / a_lip,
        adjoint: adjoint / a_lip,
        commutator: run(&comm.0, &comm.1)? / a_lip,
    })
}

/// The demonstration symbol `sin x + 0.5 cos 3x + 0.3 sin(7x + 1) + 0.2 cos 13x + 0.1 sin 22x`
/// (in the first coordinate).
pub fn demo_symbol(grid: &TorusGrid) -> SpectralField {
    SpectralField::from_real_fn(grid, |x| {
        let t = x[0];
        t.sin()
            + 0.5 * (3.0 * t).cos()
            + 0.3 * (7.0 * t + 1.0).sin()
            + 0.2 * (13.0 * t).cos()
            + 0.1 * (22.0 * t).sin()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::DEFAULT_PERIOD;

    fn grid() -> TorusGrid {
        TorusGrid::new(1, 256, DEFAULT_PERIOD).unwrap()
    }

    #[test]
    fn constant_symbol_is_multiplication() {
        let g = grid();
        let a = SpectralField::from_real_fn(&g, |_| 2.5);
        let ens = test_ensemble(&g, 1, 4, 4, 0.0).unwrap();
        for m in [1, 2, 5] {
            let p = Paraproduct::new(&a, m, CutoffProfile::default()).unwrap();
            for u in &ens {
                let tu = p.apply(u).unwrap();
                assert!(tu.rel_distance(&u.scale_real(2.5)).unwrap() < 1e-12);
                assert!(p.remainder(u).unwrap().l2_norm() < 1e-12);
                assert!(p.block_commutator_norm(u).unwrap() < 1e-10);
            }
        }
        assert!(Paraproduct::new(&a, 0, CutoffProfile::default()).is_err());
    }

    #[test]
    fn adjoint_matches_inner_product() {
        let g = grid();
        let p = Paraproduct::new(&demo_symbol(&g), 2, CutoffProfile::default()).unwrap();
        let ens = test_ensemble(&g, 9, 6, 4, 0.0).unwrap();
        for pair in ens.chunks(2) {
            let (u, w) = (&pair[0], &pair[1]);
            let lhs = p.apply(u).unwrap().inner(w).unwrap();
            let rhs = u.inner(&p.adjoint(w).unwrap()).unwrap();
            assert!((lhs - rhs).norm() <= 1e-12 * u.l2_norm() * w.l2_norm());
        }
    }

    #[test]
    fn choose_m_identity_and_guard() {
        let g = grid();
        let ens = test_ensemble(&g, 2, 10, 4, 1.0).unwrap();
        let id = SymbolMatrix::identity(&g).unwrap();
        let r = choose_m(&id, 0.5, &ens, CutoffProfile::default()).unwrap();
        assert_eq!(r.m, 1);
        assert!((r.min_ratio - 1.0).abs() < 1e-12);
        let low = SymbolMatrix::scalar(SpectralField::from_real_fn(&g, |x| 1.0 + 0.6 * x[0].sin()))
            .unwrap();
        assert!(matches!(
            choose_m(&low, 0.6, &ens, CutoffProfile::default()),
            Err(Error::Precondition(_))
        ));
    }
}
