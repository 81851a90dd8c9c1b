//! Carleman estimate harness: both sides of the weighted inequality, the
//! per-block energy expansion and its lower bounds, and the fitted constants.
//!
//! Test functions are separable, `u(t, x) = sigma(t) w(x)` with
//! `ln sigma = -1/s - 1/(1-s)`, `s = (t - t0)/(t1 - t0)`. Every time integral
//! is evaluated on a window around the peak `t*` of
//! `l(t) = ln sigma(t) + int_t^{t*} psi`, with all quadratic quantities scaled
//! by the common factor `e^{-2(E(t*) + M)}`, `E(t) = Phi(gamma (T - t))/gamma`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::coefficients::CoefficientField;
use crate::ensemble::{member_rng, normalize, random_block_field, single_block_field};
use crate::error::{Error, Result};
use crate::littlewood_paley::{dyadic_block, j_max, CutoffProfile};
use crate::modulus::ModulusOfContinuity;
use crate::paraproduct::{choose_m, test_ensemble, Paraproduct, SymbolMatrix};
use crate::quadrature::composite_gauss_legendre;
use crate::spectral::{SpaceTimeField, SpectralField, TimeDerivative, TorusGrid};
use crate::weight::CarlemanWeight;

/// `u(t, x) = sigma(t) w(x)`.
#[derive(Debug, Clone)]
pub struct TestFunction {
    profile: SpectralField,
    t0: f64,
    t1: f64,
}

impl TestFunction {
    pub fn new(profile: SpectralField, t0: f64, t1: f64) -> Result<Self> {
        if !(t0 >= 0.0 && t1 > t0) {
            return Err(Error::Config(format!("time support [{t0}, {t1}] is empty")));
        }
        Ok(TestFunction {
            profile: profile.to_frequency(),
            t0,
            t1,
        })
    }

    /// Support `[T/8, 3T/8]`.
    pub fn standard(profile: SpectralField, t_horizon: f64) -> Result<Self> {
        Self::new(profile, 0.125 * t_horizon, 0.375 * t_horizon)
    }

    pub fn profile(&self) -> &SpectralField {
        &self.profile
    }

    pub fn support(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn scaled(&self, c: f64) -> Self {
        TestFunction {
            profile: self.profile.scale_real(c),
            ..self.clone()
        }
    }

    /// `(ln sigma, (ln sigma)')` inside the open support.
    pub fn log_sigma(&self, t: f64) -> Option<(f64, f64)> {
        let l = self.t1 - self.t0;
        let s = (t - self.t0) / l;
        if s <= 0.0 || s >= 1.0 {
            return None;
        }
        let r = 1.0 - s;
        Some((-1.0 / s - 1.0 / r, (1.0 / (s * s) - 1.0 / (r * r)) / l))
    }

    pub fn sigma(&self, t: f64) -> f64 {
        self.log_sigma(t).map_or(0.0, |(v, _)| v.exp())
    }

    pub fn sigma_dt(&self, t: f64) -> f64 {
        self.log_sigma(t).map_or(0.0, |(v, d)| d * v.exp())
    }

    /// The time support must lie in `[0, T/2]`; values outside it are exactly zero.
    pub fn certify_support(&self, t_horizon: f64) -> Result<()> {
        if self.t0 < 0.0 || self.t1 > 0.5 * t_horizon * (1.0 + 1e-12) {
            return Err(Error::Certificate(format!(
                "time support [{}, {}] is not inside [0, T/2] with T = {t_horizon}",
                self.t0, self.t1
            )));
        }
        Ok(())
    }

    pub fn slice(&self, t: f64) -> SpectralField {
        self.profile.scale_real(self.sigma(t))
    }

    pub fn slice_dt(&self, t: f64) -> SpectralField {
        self.profile.scale_real(self.sigma_dt(t))
    }

    pub fn to_space_time(&self, times: Vec<f64>) -> Result<SpaceTimeField> {
        let slices = times.iter().map(|&t| self.slice(t)).collect();
        let me = self.clone();
        let dt: TimeDerivative = Arc::new(move |t| me.slice_dt(t));
        SpaceTimeField::new(times, slices, Some(dt))
    }
}

/// `v = e^{sum_i s_i (E_i(t) - E_i(t_ref)) - M} u`, with `E_i` the weight exponents.
#[derive(Debug, Clone)]
pub struct Conjugated {
    u: TestFunction,
    terms: Vec<(f64, CarlemanWeight)>,
    t_ref: f64,
    shift: f64,
}

impl Conjugated {
    /// No weight: `v = u`.
    pub fn identity(u: &TestFunction) -> Self {
        Conjugated {
            u: u.clone(),
            terms: Vec::new(),
            t_ref: u.t1,
            shift: 0.0,
        }
    }

    pub fn new(u: &TestFunction, weight: &CarlemanWeight, t_ref: f64, shift: f64) -> Result<Self> {
        u.certify_support(weight.t_horizon())?;
        Ok(Conjugated {
            u: u.clone(),
            terms: vec![(1.0, weight.clone())],
            t_ref,
            shift,
        })
    }

    /// Multiply further by `e^{sign (E(t) - E(t_ref))}`.
    pub fn conjugate(&self, weight: &CarlemanWeight, sign: f64) -> Self {
        let mut c = self.clone();
        c.terms.push((sign, weight.clone()));
        c
    }

    pub fn base(&self) -> &TestFunction {
        &self.u
    }

    /// `(ln A, (ln A)')` where `v(t) = A(t) w`; `None` outside the support.
    pub fn log_amplitude(&self, t: f64) -> Result<Option<(f64, f64)>> {
        let Some((ls, dls)) = self.u.log_sigma(t) else {
            return Ok(None);
        };
        let (mut l, mut d) = (ls - self.shift, dls);
        for (sign, w) in &self.terms {
            l += sign * w.exponent_between(t, self.t_ref)?;
            d -= sign * w.psi_at_time(t)?;
        }
        Ok(Some((l, d)))
    }

    /// `(A, A')`.
    pub fn amplitude(&self, t: f64) -> Result<(f64, f64)> {
        Ok(match self.log_amplitude(t)? {
            None => (0.0, 0.0),
            Some((l, d)) => {
                let a = l.exp();
                (a, a * d)
            }
        })
    }

    pub fn slice(&self, t: f64) -> Result<SpectralField> {
        Ok(self.u.profile.scale_real(self.amplitude(t)?.0))
    }

    pub fn slice_dt(&self, t: f64) -> Result<SpectralField> {
        Ok(self.u.profile.scale_real(self.amplitude(t)?.1))
    }
}

/// `sum_{j,k} d_j(a_jk d_k f)` with the entries sampled in physical space.
pub fn divergence_form(entries: &[SpectralField], f: &SpectralField) -> Result<SpectralField> {
    let dim = f.grid().dim();
    let grad = f.gradient();
    let mut acc = SpectralField::zeros(f.grid()).to_frequency();
    for j in 0..dim {
        let mut flux = SpectralField::zeros(f.grid());
        for k in 0..dim {
            flux = flux.add(&grad[k].to_physical().mul(&entries[j * dim + k])?)?;
        }
        acc = acc.add(&flux.derivative(j)?)?;
    }
    Ok(acc)
}

/// `sum_{j,k} d_j(T_{a_jk} d_k f)`.
pub fn paradifferential_form(ops: &[Paraproduct], f: &SpectralField) -> Result<SpectralField> {
    let dim = f.grid().dim();
    let grad = f.gradient();
    let mut acc = SpectralField::zeros(f.grid()).to_frequency();
    for j in 0..dim {
        let mut flux = SpectralField::zeros(f.grid()).to_frequency();
        for k in 0..dim {
            flux = flux.add(&ops[j * dim + k].apply(&grad[k])?.to_frequency())?;
        }
        acc = acc.add(&flux.derivative(j)?)?;
    }
    Ok(acc)
}

/// `d_t v + sum d_j(a_jk(t) d_k v) + Phi'(gamma (T - t)) v` at one time.
pub fn apply_weighted_operator(
    v: &Conjugated,
    a: &CoefficientField,
    weight: &CarlemanWeight,
    t: f64,
) -> Result<SpectralField> {
    if !(t > 0.0 && t <= 0.5 * weight.t_horizon() * (1.0 + 1e-12)) {
        return Err(Error::Domain(format!("t = {t} is outside (0, T/2]")));
    }
    let vt = v.slice(t)?;
    let entries = a.entry_fields(t, vt.grid())?;
    let psi = weight.psi_at_time(t)?;
    v.slice_dt(t)?
        .add(&divergence_form(&entries, &vt)?)?
        .add(&vt.scale_real(psi))
}

/// Quadrature nodes on the window `{l(t) > max l - WINDOW_DEPTH}` with the
/// time-dependent scalars of the conjugated problem precomputed.
#[derive(Debug, Clone, Serialize)]
pub struct TimeWindow {
    pub gamma: f64,
    pub t_peak: f64,
    pub shift: f64,
    pub start: f64,
    pub end: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `ln A(t_i) = ln sigma + int_{t_i}^{t*} psi - M`
    pub log_amp: Vec<f64>,
    /// `(ln sigma)'(t_i)`
    pub dlog_sigma: Vec<f64>,
    pub psi: Vec<f64>,
    /// `gamma Phi''(gamma (T - t_i))`
    pub gamma_phi2: Vec<f64>,
    /// `Phi''(gamma (T - t_i))` from the differential equation
    pub phi2: Vec<f64>,
}

pub const WINDOW_DEPTH: f64 = 40.0;
pub const WINDOW_SAMPLES: usize = 3001;

impl TimeWindow {
    pub fn new(
        weight: &CarlemanWeight,
        u: &TestFunction,
        panels: usize,
        order: usize,
    ) -> Result<Self> {
        u.certify_support(weight.t_horizon())?;
        let (t0, t1) = u.support();
        let step = (t1 - t0) / (WINDOW_SAMPLES - 1) as f64;
        let ts: Vec<f64> = (1..WINDOW_SAMPLES - 1)
            .map(|i| t0 + i as f64 * step)
            .collect();
        let mid = ts[ts.len() / 2];
        let rel = weight.exponents_relative_to(&ts, mid)?;
        let ell: Vec<f64> = ts
            .iter()
            .zip(&rel)
            .map(|(&t, r)| u.log_sigma(t).expect("interior").0 + r)
            .collect();
        let (imax, &lmax) = ell
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite exponent"))
            .expect("samples");
        let t_peak = ts[imax];
        let inside: Vec<usize> = (0..ts.len())
            .filter(|&i| ell[i] > lmax - WINDOW_DEPTH)
            .collect();
        let start = (ts[inside[0]] - step).max(t0);
        let end = (ts[*inside.last().expect("peak is inside")] + step).min(t1);
        let (nodes, weights) = composite_gauss_legendre(start, end, panels, order);
        let rel_nodes = weight.exponents_relative_to(&nodes, t_peak)?;
        let shift = lmax - rel[imax];
        let mut log_amp = Vec::with_capacity(nodes.len());
        let mut dlog_sigma = Vec::with_capacity(nodes.len());
        let mut psi = Vec::with_capacity(nodes.len());
        let mut gamma_phi2 = Vec::with_capacity(nodes.len());
        let mut phi2 = Vec::with_capacity(nodes.len());
        for (i, &t) in nodes.iter().enumerate() {
            let (ls, dls) = u.log_sigma(t).expect("window inside the support");
            log_amp.push(ls + rel_nodes[i] - shift);
            dlog_sigma.push(dls);
            psi.push(weight.psi_at_time(t)?);
            let p2 = weight.phi_second_at_time(t)?;
            phi2.push(p2);
            gamma_phi2.push(weight.gamma() * p2);
        }
        Ok(TimeWindow {
            gamma: weight.gamma(),
            t_peak,
            shift,
            start,
            end,
            nodes,
            weights,
            log_amp,
            dlog_sigma,
            psi,
            gamma_phi2,
            phi2,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Coefficient sampled at every window node, exactly and as paraproducts.
#[derive(Debug, Clone)]
pub struct NodeOperators {
    entries: Vec<Arc<Vec<SpectralField>>>,
    paraproducts: Vec<Arc<Vec<Paraproduct>>>,
}

impl NodeOperators {
    pub fn new(
        a: &CoefficientField,
        grid: &TorusGrid,
        times: &[f64],
        m: usize,
        cut: CutoffProfile,
    ) -> Result<Self> {
        if a.is_time_constant() {
            let e = a.entry_fields(times.first().copied().unwrap_or(0.0), grid)?;
            let p = Arc::new(
                e.iter()
                    .map(|f| Paraproduct::new(f, m, cut))
                    .collect::<Result<Vec<_>>>()?,
            );
            let e = Arc::new(e);
            return Ok(NodeOperators {
                entries: vec![e; times.len()],
                paraproducts: vec![p; times.len()],
            });
        }
        let built = times
            .par_iter()
            .map(
                |&t| -> Result<(Arc<Vec<SpectralField>>, Arc<Vec<Paraproduct>>)> {
                    let e = a.entry_fields(t, grid)?;
                    let p = e
                        .iter()
                        .map(|f| Paraproduct::new(f, m, cut))
                        .collect::<Result<Vec<_>>>()?;
                    Ok((Arc::new(e), Arc::new(p)))
                },
            )
            .collect::<Result<Vec<_>>>()?;
        let (entries, paraproducts) = built.into_iter().unzip();
        Ok(NodeOperators {
            entries,
            paraproducts,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    H0,
    LowPhase,
    HighPhase,
}

/// Four terms of the per-block expansion and the lower-bound bookkeeping.
#[derive(Debug, Clone, Serialize)]
pub struct BlockRow {
    pub h: usize,
    pub case_tag: CaseTag,
    /// `int ||d_t v_h + P v_h + psi v_h||^2`
    pub measured_value: f64,
    /// `int (gamma + gamma^{1/2} 2^{2h}) ||v_h||^2`
    pub lower_bound_value: f64,
    pub final3_ratio: f64,
    /// `[int ||d_t v_h||^2, int ||P v_h + psi v_h||^2, int gamma Phi'' ||v_h||^2, int 2 Re <d_t v_h, P v_h>]`
    pub terms: [f64; 4],
    pub identity_error: f64,
    pub l2: f64,
    pub gradient: f64,
    /// share of `int ||v_h||^2` carried by nodes with `psi <= (lambda0/16) 2^{2h}`
    pub low_phase_fraction: f64,
    /// `min_t Phi'' / (t^{alpha-1} (lambda0/16)^2 2^{4h} mu(2^{-2h}))` over high-phase nodes
    pub high_phase_margin: f64,
    /// `min_t (||P v_h|| - psi ||v_h||) / ((lambda0/16) 2^{2h} ||v_h||)` over low-phase
    /// nodes where `||P v_h|| >= (lambda0/8) 2^{2h} ||v_h||`
    pub low_phase_margin: f64,
    /// nodes where `||P v_h|| >= (lambda0/8) 2^{2h} ||v_h||` fails
    pub ellipticity_failures: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CarlemanReport {
    pub gamma: f64,
    /// left side in the conjugated form
    pub lhs: f64,
    /// left side computed from `u` and the weight
    pub lhs_u_form: f64,
    pub form_disagreement: f64,
    pub rhs_gradient_part: f64,
    pub rhs_l2_part: f64,
    pub ratio: f64,
    pub per_block_table: Vec<BlockRow>,
}

fn rel_err(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlockSettings {
    pub h_max: usize,
    pub lambda0: f64,
    pub alpha: f64,
    pub mu: ModulusOfContinuity,
}

/// Evaluate one test function on a prepared window.
pub fn evaluate(
    win: &TimeWindow,
    ops: &NodeOperators,
    u: &TestFunction,
    settings: &BlockSettings,
    cut: &CutoffProfile,
) -> Result<CarlemanReport> {
    let w = u.profile();
    let norm_w = w.l2_norm_sq();
    let grad_w: f64 = w.gradient().iter().map(|d| d.l2_norm_sq()).sum();
    let blocks = (0..=settings.h_max)
        .map(|h| dyadic_block(w, h, cut))
        .collect::<Result<Vec<_>>>()?;
    let block_l2: Vec<f64> = blocks.iter().map(|b| b.l2_norm_sq()).collect();
    let block_grad: Vec<f64> = blocks
        .iter()
        .map(|b| b.gradient().iter().map(|d| d.l2_norm_sq()).sum())
        .collect();
    let g = win.gamma;
    let sg = g.sqrt();

    let (mut lhs, mut lhs_u, mut rhs_grad, mut rhs_l2) = (0.0, 0.0, 0.0, 0.0);
    let nb = blocks.len();
    let mut lhs_h = vec![0.0; nb];
    let mut terms = vec![[0.0; 4]; nb];
    let mut l2_h = vec![0.0; nb];
    let mut grad_h = vec![0.0; nb];
    let mut low_mass = vec![0.0; nb];
    let mut high_margin = vec![f64::INFINITY; nb];
    let mut low_margin = vec![f64::INFINITY; nb];
    let mut ell_fail = vec![0usize; nb];

    for i in 0..win.len() {
        let wt = win.weights[i];
        let amp = win.log_amp[i].exp();
        if amp == 0.0 {
            continue;
        }
        let a2 = amp * amp;
        let psi = win.psi[i];
        let dls = win.dlog_sigma[i];
        let d = dls - psi;
        let entries = &ops.entries[i];
        let paras = &ops.paraproducts[i];

        // conjugated form: d_t v + div(a grad v) + psi v
        let v = w.scale_real(amp);
        let dv = w.scale_real(amp * d);
        let g2 = dv
            .add(&divergence_form(entries, &v)?)?
            .add(&v.scale_real(psi))?;
        lhs += wt * g2.l2_norm_sq();
        // weighted form: e^{E} (d_t u + div(a grad u)), e^{E} sigma = A
        let g1 = w
            .scale_real(amp * dls)
            .add(&divergence_form(entries, w)?.scale_real(amp))?;
        lhs_u += wt * g1.l2_norm_sq();
        rhs_grad += wt * a2 * grad_w;
        rhs_l2 += wt * a2 * norm_w;

        for h in 0..nb {
            if block_l2[h] == 0.0 {
                continue;
            }
            let b = &blocks[h];
            let pb = paradifferential_form(paras, b)?;
            let vh = b.scale_real(amp);
            let dvh = b.scale_real(amp * d);
            let pvh = pb.scale_real(amp);
            let total = dvh.add(&pvh)?.add(&vh.scale_real(psi))?;
            lhs_h[h] += wt * total.l2_norm_sq();
            terms[h][0] += wt * dvh.l2_norm_sq();
            terms[h][1] += wt * pvh.add(&vh.scale_real(psi))?.l2_norm_sq();
            terms[h][2] += wt * win.gamma_phi2[i] * a2 * block_l2[h];
            terms[h][3] += wt * 2.0 * dvh.inner(&pvh)?.re;
            l2_h[h] += wt * a2 * block_l2[h];
            grad_h[h] += wt * a2 * block_grad[h];

            let scale = 4f64.powi(h as i32);
            let nbh = block_l2[h].sqrt();
            let np = pb.l2_norm();
            let elliptic = np >= settings.lambda0 / 8.0 * scale * nbh;
            if psi <= settings.lambda0 / 16.0 * scale {
                low_mass[h] += wt * a2 * block_l2[h];
                if elliptic {
                    low_margin[h] = low_margin[h]
                        .min((np - psi * nbh) / (settings.lambda0 / 16.0 * scale * nbh));
                }
            } else {
                let t = win.nodes[i];
                let bound = t.powf(settings.alpha - 1.0)
                    * (settings.lambda0 / 16.0).powi(2)
                    * scale
                    * scale
                    * settings.mu.eval(1.0 / scale);
                high_margin[h] = high_margin[h].min(win.phi2[i] / bound);
            }
            if !elliptic {
                ell_fail[h] += 1;
            }
        }
    }

    let mut table = Vec::with_capacity(nb);
    for h in 0..nb {
        if block_l2[h] == 0.0 {
            continue;
        }
        let sum: f64 = terms[h].iter().sum();
        let lower = (g + sg * 4f64.powi(h as i32)) * l2_h[h];
        let low_frac = if l2_h[h] > 0.0 {
            low_mass[h] / l2_h[h]
        } else {
            0.0
        };
        let case_tag = if h == 0 {
            CaseTag::H0
        } else if low_frac >= 0.5 {
            CaseTag::LowPhase
        } else {
            CaseTag::HighPhase
        };
        let pass = if h == 0 {
            lhs_h[h] >= 0.5 * g * l2_h[h]
        } else {
            lhs_h[h] >= 0.5 * (terms[h][1] + terms[h][2])
        };
        table.push(BlockRow {
            h,
            case_tag,
            measured_value: lhs_h[h],
            lower_bound_value: lower,
            final3_ratio: lhs_h[h] / lower,
            terms: terms[h],
            identity_error: rel_err(lhs_h[h], sum),
            l2: l2_h[h],
            gradient: grad_h[h],
            low_phase_fraction: low_frac,
            high_phase_margin: high_margin[h],
            low_phase_margin: low_margin[h],
            ellipticity_failures: ell_fail[h],
            pass,
        });
    }
    let denom = sg * (rhs_grad + sg * rhs_l2);
    Ok(CarlemanReport {
        gamma: g,
        lhs,
        lhs_u_form: lhs_u,
        form_disagreement: rel_err(lhs, lhs_u),
        rhs_gradient_part: rhs_grad,
        rhs_l2_part: rhs_l2,
        ratio: if denom > 0.0 { lhs / denom } else { 0.0 },
        per_block_table: table,
    })
}

/// Harness configuration; `m = None` selects the paraproduct order by positivity search.
#[derive(Debug, Clone, Serialize)]
pub struct HarnessConfig {
    pub t_horizon: f64,
    pub alpha: f64,
    pub mu: ModulusOfContinuity,
    pub gammas: Vec<f64>,
    pub ensemble: usize,
    pub seed: u64,
    pub grid_points: usize,
    pub period: f64,
    pub h_max: usize,
    pub panels: usize,
    pub order: usize,
    pub m: Option<usize>,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            t_horizon: 0.01,
            alpha: 0.5,
            mu: ModulusOfContinuity::linear(),
            gammas: vec![8.0, 16.0, 32.0, 64.0],
            ensemble: 20,
            seed: 0,
            grid_points: 1024,
            period: crate::spectral::DEFAULT_PERIOD,
            h_max: 6,
            panels: 32,
            order: 8,
            m: None,
        }
    }
}

/// Ensemble profiles: random fields over blocks `0..=h_max` followed by one
/// single-block member per `h`, all unit `L^2`.
pub fn harness_ensemble(
    grid: &TorusGrid,
    seed: u64,
    size: usize,
    h_max: usize,
) -> Result<Vec<SpectralField>> {
    let singles = (h_max + 1).min(size);
    let random = size - singles;
    (0..size)
        .map(|i| {
            let mut rng = member_rng(seed, i as u64);
            let f = if i < random {
                random_block_field(grid, &mut rng, h_max)?
            } else {
                single_block_field(grid, &mut rng, i - random)?
            };
            Ok(normalize(&f, 0.0))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct MemberRow {
    pub gamma: f64,
    pub member: usize,
    pub lhs: f64,
    pub rhs_gradient_part: f64,
    pub rhs_l2_part: f64,
    pub ratio: f64,
    pub form_disagreement: f64,
    pub max_identity_error: f64,
    pub final3_pass: bool,
    pub min_final3_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaSummary {
    pub gamma: f64,
    pub extension: bool,
    pub window: [f64; 2],
    pub t_peak: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub max_form_disagreement: f64,
    pub max_identity_error: f64,
    pub final3_pass: bool,
    pub min_final3_ratio: f64,
    pub max_ellipticity_failures: usize,
    pub min_high_phase_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FittedConstants {
    pub gamma0_hat: f64,
    pub c_hat: f64,
    pub c_final3: f64,
    /// `C_hat` after appending `2 gamma_max`
    pub c_hat_extended: f64,
    pub gamma_extended: f64,
    /// `max(0, (C_hat - C_hat_extended) / C_hat)`
    pub c_hat_drift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockEntry {
    pub gamma: f64,
    pub member: usize,
    #[serde(flatten)]
    pub row: BlockRow,
}

#[derive(Debug, Clone, Serialize)]
pub struct HarnessReport {
    pub coefficient: String,
    pub m: usize,
    pub config: HarnessConfig,
    pub gammas: Vec<GammaSummary>,
    pub members: Vec<MemberRow>,
    pub blocks: Vec<BlockEntry>,
    pub fitted: FittedConstants,
}

/// `(C_hat, gamma0_hat, C_final3)` from per-gamma rows, `gammas` ascending.
/// `gamma0_hat` is the smallest tested gamma from which every larger tested
/// gamma passes the per-block check.
pub fn fit_constants(
    gammas: &[f64],
    members: &[MemberRow],
    blocks: &[BlockEntry],
) -> Result<(f64, f64, f64)> {
    if gammas.is_empty() {
        return Err(Error::Config("gamma list is empty".into()));
    }
    let passes = |g: f64| {
        members
            .iter()
            .filter(|r| r.gamma == g)
            .all(|r| r.final3_pass)
    };
    let Some(i0) = (0..gammas.len()).find(|&i| gammas[i..].iter().all(|&g| passes(g))) else {
        let fails: Vec<f64> = gammas.iter().copied().filter(|&g| !passes(g)).collect();
        return Err(Error::FitFailure(format!(
            "per-block check fails at the top gamma; failing gammas {fails:?}"
        )));
    };
    let gamma0 = gammas[i0];
    let c_hat = members
        .iter()
        .filter(|r| r.gamma >= gamma0)
        .map(|r| r.ratio)
        .fold(f64::INFINITY, f64::min);
    let c_final3 = blocks
        .iter()
        .filter(|b| b.gamma >= gamma0)
        .map(|b| b.row.final3_ratio)
        .fold(f64::INFINITY, f64::min);
    Ok((c_hat, gamma0, c_final3))
}

/// Paraproduct order for a time-dependent coefficient: the largest order chosen
/// at `t in {T/8, T/4, 3T/8}`.
pub fn choose_harness_m(
    a: &CoefficientField,
    grid: &TorusGrid,
    seed: u64,
    cut: CutoffProfile,
) -> Result<usize> {
    let h = j_max(grid, &cut).unwrap_or(0).saturating_sub(1);
    let ens = test_ensemble(grid, seed, 200, h, 1.0)?;
    let t = a.t_horizon();
    let mut m = 1;
    for s in [0.125, 0.25, 0.375] {
        let sym = SymbolMatrix::new(a.entry_fields(s * t, grid)?)?;
        m = m.max(choose_m(&sym, a.lambda0(), &ens, cut)?.m);
    }
    Ok(m)
}

pub fn run_harness(cfg: &HarnessConfig, a: &CoefficientField) -> Result<HarnessReport> {
    if cfg.gammas.is_empty() {
        return Err(Error::Config("gamma list is empty".into()));
    }
    if cfg.gammas.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::Config("gammas must be positive".into()));
    }
    if cfg.ensemble == 0 {
        return Err(Error::Config("ensemble size must be positive".into()));
    }
    if (a.t_horizon() - cfg.t_horizon).abs() > 1e-15 * cfg.t_horizon {
        return Err(Error::Config(
            "coefficient horizon differs from the harness T".into(),
        ));
    }
    let mut gammas = cfg.gammas.clone();
    gammas.sort_by(|x, y| x.partial_cmp(y).expect("finite gamma"));
    gammas.dedup();
    let gamma_ext = 2.0 * gammas[gammas.len() - 1];

    let grid = TorusGrid::new(a.dim(), cfg.grid_points, cfg.period)?;
    let cut = CutoffProfile::default();
    let jm = j_max(&grid, &cut)
        .ok_or_else(|| Error::Config("grid too coarse for a dyadic block".into()))?;
    if cfg.h_max > jm {
        return Err(Error::Resolution {
            block: cfg.h_max,
            required: grid.points_for_frequency(1.9 * 2f64.powi(cfg.h_max as i32)),
            have: grid.n(),
        });
    }
    let m = match cfg.m {
        Some(m) => m,
        None => choose_harness_m(a, &grid, cfg.seed, cut)?,
    };
    let profiles = harness_ensemble(&grid, cfg.seed, cfg.ensemble, cfg.h_max)?;
    let settings = BlockSettings {
        h_max: cfg.h_max,
        lambda0: a.lambda0(),
        alpha: cfg.alpha,
        mu: cfg.mu,
    };
    let base = CarlemanWeight::new(cfg.mu, gammas[0], cfg.t_horizon, cfg.alpha)?;

    let mut all_gammas = gammas.clone();
    all_gammas.push(gamma_ext);
    let mut summaries = Vec::new();
    let mut members = Vec::new();
    let mut blocks = Vec::new();
    for (gi, &g) in all_gammas.iter().enumerate() {
        let weight = base.with_gamma(g)?;
        let probe = TestFunction::standard(profiles[0].clone(), cfg.t_horizon)?;
        let win = TimeWindow::new(&weight, &probe, cfg.panels, cfg.order)?;
        let ops = NodeOperators::new(a, &grid, &win.nodes, m, cut)?;
        let reports = profiles
            .par_iter()
            .map(|w| {
                evaluate(
                    &win,
                    &ops,
                    &TestFunction::standard(w.clone(), cfg.t_horizon)?,
                    &settings,
                    &cut,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let mut summary = GammaSummary {
            gamma: g,
            extension: gi == all_gammas.len() - 1,
            window: [win.start, win.end],
            t_peak: win.t_peak,
            min_ratio: f64::INFINITY,
            max_ratio: 0.0,
            max_form_disagreement: 0.0,
            max_identity_error: 0.0,
            final3_pass: true,
            min_final3_ratio: f64::INFINITY,
            max_ellipticity_failures: 0,
            min_high_phase_margin: f64::INFINITY,
        };
        for (k, r) in reports.into_iter().enumerate() {
            let idm = r
                .per_block_table
                .iter()
                .map(|b| b.identity_error)
                .fold(0.0, f64::max);
            let pass = r.per_block_table.iter().all(|b| b.pass);
            let f3 = r
                .per_block_table
                .iter()
                .map(|b| b.final3_ratio)
                .fold(f64::INFINITY, f64::min);
            summary.min_ratio = summary.min_ratio.min(r.ratio);
            summary.max_ratio = summary.max_ratio.max(r.ratio);
            summary.max_form_disagreement = summary.max_form_disagreement.max(r.form_disagreement);
            summary.max_identity_error = summary.max_identity_error.max(idm);
            summary.final3_pass &= pass;
            summary.min_final3_ratio = summary.min_final3_ratio.min(f3);
            for b in &r.per_block_table {
                summary.max_ellipticity_failures =
                    summary.max_ellipticity_failures.max(b.ellipticity_failures);
                summary.min_high_phase_margin =
                    summary.min_high_phase_margin.min(b.high_phase_margin);
            }
            members.push(MemberRow {
                gamma: g,
                member: k,
                lhs: r.lhs,
                rhs_gradient_part: r.rhs_gradient_part,
                rhs_l2_part: r.rhs_l2_part,
                ratio: r.ratio,
                form_disagreement: r.form_disagreement,
                max_identity_error: idm,
                final3_pass: pass,
                min_final3_ratio: f3,
            });
            for row in r.per_block_table {
                blocks.push(BlockEntry {
                    gamma: g,
                    member: k,
                    row,
                });
            }
        }
        summaries.push(summary);
    }

    let base_members: Vec<MemberRow> = members
        .iter()
        .filter(|r| r.gamma != gamma_ext)
        .cloned()
        .collect();
    let base_blocks: Vec<BlockEntry> = blocks
        .iter()
        .filter(|b| b.gamma != gamma_ext)
        .cloned()
        .collect();
    let (c_hat, gamma0_hat, c_final3) = fit_constants(&gammas, &base_members, &base_blocks)?;
    let (c_hat_extended, _, _) = fit_constants(&all_gammas, &members, &blocks)?;
    let c_hat_drift = ((c_hat - c_hat_extended) / c_hat).max(0.0);
    Ok(HarnessReport {
        coefficient: a.name().to_string(),
        m,
        config: cfg.clone(),
        gammas: summaries,
        members,
        blocks,
        fitted: FittedConstants {
            gamma0_hat,
            c_hat,
            c_final3,
            c_hat_extended,
            gamma_extended: gamma_ext,
            c_hat_drift,
        },
    })
}

/// `cos(kappa x_1)` for the grid mode `mode`.
pub fn mode_profile(grid: &TorusGrid, mode: i64) -> Result<SpectralField> {
    if mode == 0 {
        return SpectralField::from_modes(grid, &[([0, 0], Complex64::new(1.0, 0.0))]);
    }
    SpectralField::from_modes(
        grid,
        &[
            ([mode, 0], Complex64::new(0.5, 0.0)),
            ([-mode, 0], Complex64::new(0.5, 0.0)),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::DEFAULT_PERIOD;

    fn setup(gamma: f64) -> (TorusGrid, CarlemanWeight, CoefficientField) {
        let grid = TorusGrid::new(1, 256, DEFAULT_PERIOD).unwrap();
        let w = CarlemanWeight::new(ModulusOfContinuity::linear(), gamma, 0.01, 0.5).unwrap();
        let a = CoefficientField::identity(1, ModulusOfContinuity::linear(), 0.5, 0.01).unwrap();
        (grid, w, a)
    }

    #[test]
    fn single_mode_operator_closed_form() {
        let (grid, w, a) = setup(16.0);
        let prof = mode_profile(&grid, 12).unwrap();
        let u = TestFunction::standard(prof.clone(), 0.01).unwrap();
        let v = Conjugated::new(&u, &w, 0.002, 0.0).unwrap();
        let t = 0.0023;
        let got = apply_weighted_operator(&v, &a, &w, t).unwrap();
        let kappa = 12.0 * grid.frequency_step();
        let (amp, damp) = v.amplitude(t).unwrap();
        let expect = prof.scale_real(damp - kappa * kappa * amp + w.psi_at_time(t).unwrap() * amp);
        assert!(got.rel_distance(&expect).unwrap() < 1e-10);
        let back = v.conjugate(&w, -1.0);
        let (b, _) = back.amplitude(t).unwrap();
        assert!((b - u.sigma(t)).abs() <= 1e-10 * u.sigma(t));
        assert!(apply_weighted_operator(&v, &a, &w, 0.0).is_err());
        let id = Conjugated::identity(&u);
        assert_eq!(id.amplitude(t).unwrap().0, u.sigma(t));
    }

    #[test]
    fn conjugated_derivative_matches_differences() {
        let (grid, w, _) = setup(32.0);
        let u = TestFunction::standard(mode_profile(&grid, 3).unwrap(), 0.01).unwrap();
        let v = Conjugated::new(&u, &w, 0.002, 0.0).unwrap();
        let t = 0.0021;
        let err = |h: f64| {
            let fd = (v.amplitude(t + h).unwrap().0 - v.amplitude(t - h).unwrap().0) / (2.0 * h);
            (fd - v.amplitude(t).unwrap().1).abs()
        };
        let r = err(2e-6) / err(1e-6);
        assert!((r - 4.0).abs() < 0.2, "{r}");
    }

    #[test]
    fn sides_agree_and_identity_holds() {
        let (grid, w, a) = setup(16.0);
        let cut = CutoffProfile::default();
        let profs = harness_ensemble(&grid, 3, 6, 4).unwrap();
        let win = TimeWindow::new(
            &w,
            &TestFunction::standard(profs[0].clone(), 0.01).unwrap(),
            32,
            8,
        )
        .unwrap();
        let ops = NodeOperators::new(&a, &grid, &win.nodes, 1, cut).unwrap();
        let settings = BlockSettings {
            h_max: 4,
            lambda0: 1.0,
            alpha: 0.5,
            mu: ModulusOfContinuity::linear(),
        };
        for p in &profs {
            let u = TestFunction::standard(p.clone(), 0.01).unwrap();
            let r = evaluate(&win, &ops, &u, &settings, &cut).unwrap();
            assert!(r.form_disagreement < 1e-8);
            for b in &r.per_block_table {
                assert!(
                    b.identity_error < 1e-8,
                    "h={} err={}",
                    b.h,
                    b.identity_error
                );
            }
            let r2 = evaluate(&win, &ops, &u.scaled(2.0), &settings, &cut).unwrap();
            assert!((r2.ratio - r.ratio).abs() <= 1e-12 * r.ratio);
        }
        let zero = TestFunction::standard(SpectralField::zeros(&grid), 0.01).unwrap();
        let r = evaluate(&win, &ops, &zero, &settings, &cut).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.per_block_table.is_empty());
    }

    #[test]
    fn support_certificate() {
        let (grid, w, _) = setup(8.0);
        let u = TestFunction::new(mode_profile(&grid, 1).unwrap(), 0.001, 0.008).unwrap();
        assert!(matches!(
            Conjugated::new(&u, &w, 0.002, 0.0),
            Err(Error::Certificate(_))
        ));
    }
}
