//! Verification suites: configuration, dispatch and the checks each suite records.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::carleman::{run_harness, HarnessConfig, HarnessReport};
use crate::coefficients::{
    mollify, synthetic_coefficient, verify_mollifier_estimates, CoefficientField, SampleSpec,
};
use crate::counterexample::{self as cx, CounterexampleData};
use crate::ensemble::{member_rng, random_block_field};
use crate::error::{Error, Result};
use crate::littlewood_paley::{
    bernstein_check, dyadic_sobolev, full_depth, j_max, lipschitz_block_bounds, low_pass,
    CutoffProfile, DyadicDecomposition,
};
use crate::modulus::{check_invariants, is_osgood, ModulusKind, ModulusOfContinuity};
use crate::paraproduct::{
    self as pp, choose_m, demo_symbol, test_ensemble, Paraproduct, SymbolMatrix,
};
use crate::report::{write_csv, Check, CheckKind, Provenance, VerificationReport};
use crate::spectral::{SpectralField, TorusGrid, DEFAULT_PERIOD};
use crate::weight::CarlemanWeight;

use CheckKind::{Bound, Decay, Fit, Identity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteName {
    Weight,
    Lp,
    Paraproduct,
    Coeffs,
    Carleman,
    Counterexample,
    All,
}

impl SuiteName {
    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Weight => "weight",
            SuiteName::Lp => "lp",
            SuiteName::Paraproduct => "paraproduct",
            SuiteName::Coeffs => "coeffs",
            SuiteName::Carleman => "carleman",
            SuiteName::Counterexample => "counterexample",
            SuiteName::All => "all",
        }
    }
}

/// Suite parameters. Keys match the command-line flags; every key is optional
/// and falls back to the default listed in [`PARAMETERS`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub seed: Option<u64>,
    pub mu: Option<String>,
    pub alpha: Option<f64>,
    #[serde(rename = "T")]
    pub t_horizon: Option<f64>,
    pub gamma: Option<f64>,
    pub gammas: Option<Vec<f64>>,
    pub grid_points: Option<usize>,
    pub ensemble: Option<usize>,
    pub s: Option<f64>,
    pub field: Option<PathBuf>,
    pub symbol: Option<PathBuf>,
    pub m: Option<String>,
    pub lambda0: Option<f64>,
    pub family: Option<String>,
    pub delta: Option<f64>,
    pub depth: Option<usize>,
    pub verify: Option<String>,
    pub coeffs: Option<PathBuf>,
    #[serde(rename = "N")]
    pub n_intervals: Option<usize>,
    pub j0: Option<String>,
    pub emit_grid: Option<PathBuf>,
}

/// `(key, default, meaning)` for every parameter.
pub const PARAMETERS: &[(&str, &str, &str)] = &[
    ("seed", "0", "global PRNG seed propagated to every ensemble"),
    (
        "mu",
        "weight: linear and log; coeffs: log; carleman: linear",
        "modulus name: linear, log, sqrt, holder:a",
    ),
    (
        "alpha",
        "weight: 0.3, 0.5, 0.8; otherwise 0.5",
        "Hölder exponent",
    ),
    ("T", "weight, coeffs: 1; carleman: 0.01", "time horizon"),
    ("gamma", "8 and 64", "weight parameter for the weight suite"),
    ("gammas", "8,16,32,64", "Carleman parameters"),
    ("grid_points", "1024", "points per axis of the 1D torus"),
    (
        "ensemble",
        "lp, paraproduct: 100; carleman: 20",
        "ensemble size",
    ),
    (
        "s",
        "1",
        "Sobolev index added to the lp norm-equivalence sweep",
    ),
    ("field", "random ensemble", "lp: JSON field file"),
    (
        "symbol",
        "built-in demo symbol",
        "paraproduct: JSON symbol file",
    ),
    ("m", "auto", "paraproduct order or auto"),
    (
        "lambda0",
        "0.6 (built-in symbol), 0.5 (file symbol)",
        "ellipticity used by choose_m",
    ),
    ("family", "synthetic", "coeffs: synthetic or identity"),
    ("delta", "coeffs: 0.4; carleman: 0.2", "synthetic amplitude"),
    ("depth", "4", "coeffs: mollifier sweep depth"),
    (
        "verify",
        "coeffs: none; counterexample: all",
        "all or none; the coeffs flag --verify sets all",
    ),
    (
        "coeffs",
        "identity and synthetic 0.2",
        "carleman: coefficient file",
    ),
    ("N", "10000", "counterexample: realized intervals"),
    ("j0", "auto", "counterexample: j0 or auto"),
    (
        "emit_grid",
        "none",
        "counterexample: grid output (.json or .csv)",
    ),
];

impl Params {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Usage(e.message().to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Fields set in `over` win.
    pub fn merged(self, over: Params) -> Params {
        Params {
            seed: over.seed.or(self.seed),
            mu: over.mu.or(self.mu),
            alpha: over.alpha.or(self.alpha),
            t_horizon: over.t_horizon.or(self.t_horizon),
            gamma: over.gamma.or(self.gamma),
            gammas: over.gammas.or(self.gammas),
            grid_points: over.grid_points.or(self.grid_points),
            ensemble: over.ensemble.or(self.ensemble),
            s: over.s.or(self.s),
            field: over.field.or(self.field),
            symbol: over.symbol.or(self.symbol),
            m: over.m.or(self.m),
            lambda0: over.lambda0.or(self.lambda0),
            family: over.family.or(self.family),
            delta: over.delta.or(self.delta),
            depth: over.depth.or(self.depth),
            verify: over.verify.or(self.verify),
            coeffs: over.coeffs.or(self.coeffs),
            n_intervals: over.n_intervals.or(self.n_intervals),
            j0: over.j0.or(self.j0),
            emit_grid: over.emit_grid.or(self.emit_grid),
        }
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn grid_points(&self) -> usize {
        self.grid_points.unwrap_or(1024)
    }

    fn verify_all(&self, default: bool) -> Result<bool> {
        match self.verify.as_deref() {
            None => Ok(default),
            Some("all") => Ok(true),
            Some("none") => Ok(false),
            Some(v) => Err(Error::Usage(format!(
                "verify must be all or none, got {v:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub suite: SuiteName,
    pub params: Params,
    pub output_path: Option<PathBuf>,
}

impl SuiteConfig {
    pub fn new(suite: SuiteName) -> Self {
        SuiteConfig {
            suite,
            params: Params::default(),
            output_path: None,
        }
    }
}

/// Runs the suite and writes its JSON report to `output_path` when set.
pub fn run_suite(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let p = &cfg.params;
    let report = match cfg.suite {
        SuiteName::Weight => weight_suite(p)?,
        SuiteName::Lp => lp_suite(p)?,
        SuiteName::Paraproduct => paraproduct_suite(p)?,
        SuiteName::Coeffs => coeffs_suite(p)?,
        SuiteName::Carleman => carleman_suite(p)?,
        SuiteName::Counterexample => counterexample_suite(p)?,
        SuiteName::All => all_suite(p),
    };
    if let Some(path) = &cfg.output_path {
        report.write_json(path)?;
    }
    Ok(report)
}

fn grid_label(g: &TorusGrid) -> String {
    format!("{}d:{}:period={}", g.dim(), g.n(), g.period())
}

fn rel_drift(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (b - a).abs() / a.abs().max(b.abs())
}

fn grid_1d(n: usize) -> Result<TorusGrid> {
    TorusGrid::new(1, n, DEFAULT_PERIOD)
}

/// FFT round trip, Parseval and derivative/multiplier commutation on random fields.
pub fn spectral_suite(seed: u64) -> Result<VerificationReport> {
    let grids = [
        TorusGrid::new(1, 1024, DEFAULT_PERIOD)?,
        TorusGrid::new(2, 64, DEFAULT_PERIOD)?,
    ];
    let cut = CutoffProfile::default();
    let mut checks = Vec::new();
    let mut details = BTreeMap::new();
    for g in &grids {
        let h = j_max(g, &cut).unwrap_or(0);
        let (mut round, mut parseval, mut commute): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for i in 0..100 {
            let u = random_block_field(g, &mut member_rng(seed, i), h)?;
            let phys = u.to_physical();
            let back = phys.to_frequency().to_physical();
            let pv = phys.physical_values();
            let bv = back.physical_values();
            let scale = pv.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let err = pv
                .iter()
                .zip(bv.iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            round = round.max(err / scale);
            let np = phys.l2_norm_sq();
            let nf = phys.to_frequency().l2_norm_sq();
            parseval = parseval.max((np - nf).abs() / nf);
            let mult = |xi: [f64; 2]| cut.block_symbol(2, xi) + 0.5 * cut.block_symbol(4, xi);
            for axis in 0..g.dim() {
                let a = u.apply_multiplier(mult).derivative(axis)?;
                let b = u.derivative(axis)?.apply_multiplier(mult);
                commute = commute.max(
                    a.rel_distance(&b)? * b.l2_norm() / u.derivative(axis)?.l2_norm().max(1e-300),
                );
            }
        }
        let tag = format!("{}d", g.dim());
        checks.push(Check::le(
            format!("{tag}/fft_round_trip"),
            Identity,
            round,
            1e-12,
        ));
        checks.push(Check::le(
            format!("{tag}/parseval"),
            Identity,
            parseval,
            1e-12,
        ));
        checks.push(Check::le(
            format!("{tag}/derivative_multiplier_commutation"),
            Identity,
            commute,
            1e-12,
        ));
        details.insert(tag, json!({"grid": g.spec(), "fields": 100, "round_trip": round, "parseval": parseval, "commutation": commute}));
    }
    // derivative of a pure mode against its closed form
    let g = &grids[0];
    let k = 5.0 * g.frequency_step();
    let u = SpectralField::from_real_fn(g, |x| (k * x[0]).sin());
    let du = u.derivative(0)?.to_physical();
    let err = (0..g.len())
        .map(|i| (du.physical_values()[i].re - k * (k * g.point(i)[0]).cos()).abs())
        .fold(0.0, f64::max);
    checks.push(Check::le(
        "1d/derivative_closed_form",
        Identity,
        err / k,
        1e-12,
    ));
    Ok(VerificationReport::new(
        "spectral",
        checks,
        Provenance::new(seed, "1d:1024,2d:64"),
        json!(details),
    ))
}

fn ode_residual(w: &CarlemanWeight, t: f64) -> Result<f64> {
    let (g, a) = (w.gamma(), w.alpha());
    let h = 1e-3 * t * (1.0 / (g * t.powf(a))).min(1.0);
    let x = |s: f64| w.log_psi_at_time(s);
    let fd = (-x(t + 2.0 * h)? + 8.0 * x(t + h)? - 8.0 * x(t - h)? + x(t - 2.0 * h)?) / (12.0 * h);
    let rhs = -g * t.powf(a - 1.0) * w.mu().ratio_log(x(t)?);
    Ok((fd - rhs).abs() / rhs.abs())
}

#[derive(Debug, Clone, Serialize)]
struct WeightRow {
    mu: String,
    alpha: f64,
    gamma: f64,
    ode_residual: f64,
    closed_form_error: Option<f64>,
    phi_second_log_margin: f64,
    phi_inverse_log_margin: f64,
}

pub fn weight_suite(p: &Params) -> Result<VerificationReport> {
    let mus = match &p.mu {
        Some(m) => vec![ModulusOfContinuity::parse(m)?],
        None => vec![ModulusOfContinuity::linear(), ModulusOfContinuity::log()],
    };
    let alphas = p
        .alpha
        .map(|a| vec![a])
        .unwrap_or_else(|| vec![0.3, 0.5, 0.8]);
    let gammas = p.gamma.map(|g| vec![g]).unwrap_or_else(|| vec![8.0, 64.0]);
    let t_h = p.t_horizon.unwrap_or(1.0);
    let points = 1000;
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for mu in &mus {
        for &alpha in &alphas {
            for &gamma in &gammas {
                let w = CarlemanWeight::new(*mu, gamma, t_h, alpha)?;
                let tag = format!("{}/alpha={alpha}/gamma={gamma}", mu.name());
                let ts: Vec<f64> = (0..points)
                    .map(|i| t_h * 10f64.powf(-3.0 * (i as f64 + 0.5) / points as f64))
                    .collect();
                let mut res: f64 = 0.0;
                for &t in &ts {
                    res = res.max(ode_residual(&w, t)?);
                }
                checks.push(Check::le(
                    format!("{tag}/ode_residual"),
                    Identity,
                    res,
                    1e-6,
                ));
                let closed = if mu.kind() == ModulusKind::Linear {
                    let mut e: f64 = 0.0;
                    for &t in &ts {
                        let exact = gamma * (t_h.powf(alpha) - t.powf(alpha)) / alpha;
                        e = e.max((w.log_psi_at_time(t)? - exact).abs() / exact.max(1.0));
                    }
                    checks.push(Check::le(format!("{tag}/closed_form"), Identity, e, 1e-8));
                    Some(e)
                } else {
                    None
                };
                let bound = (t_h / 2.0).powf(alpha - 1.0);
                let mut margin = f64::INFINITY;
                for i in 0..points {
                    let t = 0.5 * t_h * 10f64.powf(-6.0 * i as f64 / (points - 1) as f64);
                    margin = margin.min(w.log_phi_second_at_time(t)? - bound.ln());
                }
                checks.push(Check::ge(
                    format!("{tag}/phi_second_lower_bound"),
                    Bound,
                    margin,
                    (-1e-9 / bound).ln_1p(),
                ));
                let inv = w
                    .table()
                    .iter()
                    .skip(1)
                    .map(|&(f, x)| x - f.ln_1p())
                    .fold(f64::INFINITY, f64::min);
                checks.push(Check::ge(
                    format!("{tag}/phi_inverse_lower_bound"),
                    Bound,
                    inv,
                    0.0,
                ));
                rows.push(WeightRow {
                    mu: mu.name(),
                    alpha,
                    gamma,
                    ode_residual: res,
                    closed_form_error: closed,
                    phi_second_log_margin: margin,
                    phi_inverse_log_margin: inv,
                });
            }
        }
    }
    let mut registry = Vec::new();
    for mu in ModulusOfContinuity::registry() {
        let expected = matches!(mu.kind(), ModulusKind::Linear | ModulusKind::Log);
        let got = is_osgood(&mu);
        checks.push(Check::holds(
            format!("registry/{}/is_osgood_{expected}", mu.name()),
            Identity,
            got == expected,
        ));
        let inv = check_invariants(&mu, 10_000);
        checks.push(Check::holds(
            format!("registry/{}/invariants", mu.name()),
            Bound,
            inv.holds,
        ));
        registry.push(json!({"modulus": mu.name(), "is_osgood": got, "invariants": inv}));
    }
    let details = json!({"T": t_h, "points": points, "rows": rows, "registry": registry});
    Ok(VerificationReport::new(
        "weight",
        checks,
        Provenance::new(p.seed(), "none"),
        details,
    ))
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
struct FieldStats {
    telescoping: f64,
    orthogonality: f64,
    bernstein: f64,
}

fn field_stats(u: &SpectralField, cut: &CutoffProfile) -> Result<FieldStats> {
    let dec = DyadicDecomposition::new(u, cut)?;
    let norm = u.l2_norm().max(f64::MIN_POSITIVE);
    let mut st = FieldStats::default();
    for k in 0..=dec.j_max {
        let d = dec.partial_sum(k)?.sub(&low_pass(u, k, cut))?.l2_norm() / norm;
        st.telescoping = st.telescoping.max(d);
    }
    for j in 0..=dec.j_max {
        for k in j + 2..=dec.j_max {
            let ip = dec.blocks[j].inner(&dec.blocks[k])?.norm() / (norm * norm);
            st.orthogonality = st.orthogonality.max(ip);
        }
        if dec.blocks[j].l2_norm() > 1e-13 * norm {
            let r = bernstein_check(&dec.blocks[j], j)? / 2f64.powi(j as i32 + 1);
            st.bernstein = st.bernstein.max(r);
        }
    }
    Ok(st)
}

/// `max(sup r, 1 / inf r)` of `r = dyadic_sobolev / sobolev_norm` over the fields.
fn equivalence_constant(fields: &[SpectralField], s: f64, cut: &CutoffProfile) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for u in fields {
        let r = dyadic_sobolev(u, s, cut) / u.sobolev_norm(s);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    hi.max(1.0 / lo)
}

pub fn lp_suite(p: &Params) -> Result<VerificationReport> {
    let cut = CutoffProfile::default();
    let seed = p.seed();
    let fields: Vec<SpectralField> = match &p.field {
        Some(path) => vec![SpectralField::from_json(&std::fs::read_to_string(path)?)?],
        None => {
            let g = grid_1d(p.grid_points())?;
            let h = j_max(&g, &cut)
                .ok_or_else(|| Error::Config("grid too coarse for a dyadic block".into()))?;
            (0..p.ensemble.unwrap_or(100))
                .map(|i| random_block_field(&g, &mut member_rng(seed, i as u64), h))
                .collect::<Result<_>>()?
        }
    };
    let grid = fields[0].grid().clone();
    let fine: Vec<SpectralField> = if p.field.is_some() {
        fields.iter().map(|u| u.refine()).collect::<Result<_>>()?
    } else {
        let g = grid.refined()?;
        let h = j_max(&g, &cut).unwrap_or(0);
        (0..fields.len())
            .map(|i| random_block_field(&g, &mut member_rng(seed, i as u64), h))
            .collect::<Result<_>>()?
    };
    let mut checks = Vec::new();

    let depth = full_depth(&grid, &cut);
    let defect = cut.partition_defect(depth, 2.0 * grid.max_frequency(), 20_000);
    checks.push(Check::le("partition_telescoping", Identity, defect, 1e-14));

    let mut st = FieldStats::default();
    for u in &fields {
        let f = field_stats(u, &cut)?;
        st.telescoping = st.telescoping.max(f.telescoping);
        st.orthogonality = st.orthogonality.max(f.orthogonality);
        st.bernstein = st.bernstein.max(f.bernstein);
    }
    checks.push(Check::le(
        "low_pass_equals_block_sum",
        Identity,
        st.telescoping,
        1e-12,
    ));
    checks.push(Check::le(
        "almost_orthogonality",
        Identity,
        st.orthogonality,
        1e-12,
    ));
    checks.push(Check::le(
        "bernstein_ratio_over_2^(h+1)",
        Bound,
        st.bernstein,
        1.0 + 1e-12,
    ));

    let mut s_list = vec![0.0, 1.0, 2.0];
    if let Some(s) = p.s {
        if !s_list.contains(&s) {
            s_list.push(s);
        }
    }
    let mut sob = Vec::new();
    for &s in &s_list {
        let c = equivalence_constant(&fields, s, &cut);
        let cf = equivalence_constant(&fine, s, &cut);
        checks.push(Check::le(format!("sobolev_equivalence/s={s}"), Fit, c, 4.0));
        checks.push(Check::lt(
            format!("sobolev_equivalence/s={s}/grid_doubling_drift"),
            Fit,
            rel_drift(c, cf),
            0.1,
        ));
        sob.push(json!({"s": s, "constant": c, "constant_doubled": cf}));
    }

    let symbols: Vec<(&str, SpectralField)> = if p.field.is_some() {
        vec![("field", fields[0].to_physical())]
    } else {
        vec![
            ("demo_symbol", demo_symbol(&grid)),
            (
                "smoothed_abs_sin",
                SpectralField::from_real_fn(&grid, |x| (x[0].sin().powi(2) + 1e-2).sqrt()),
            ),
        ]
    };
    let mut lip = Vec::new();
    for (name, a) in &symbols {
        if a.max_imag() > 1e-10 * (1.0 + a.sup_norm()) {
            continue;
        }
        let r = lipschitz_block_bounds(a, &cut)?;
        let rf = lipschitz_block_bounds(&a.refine()?, &cut)?;
        checks.push(Check::lt(
            format!("lipschitz/{name}/block_constant_drift"),
            Fit,
            rel_drift(r.block_constant, rf.block_constant),
            0.1,
        ));
        checks.push(Check::lt(
            format!("lipschitz/{name}/gradient_constant_drift"),
            Fit,
            rel_drift(r.gradient_constant, rf.gradient_constant),
            0.1,
        ));
        lip.push(json!({"symbol": name, "report": r, "report_doubled": rf}));
    }

    let first = DyadicDecomposition::new(&fields[0], &cut)?;
    let s = p.s.unwrap_or(1.0);
    let details = json!({
        "grid": grid.spec(),
        "fields": fields.len(),
        "partition_defect": defect,
        "stats": st,
        "sobolev": sob,
        "lipschitz": lip,
        "first_field": {
            "block_norms": first.block_norms(),
            "s": s,
            "dyadic_sobolev": dyadic_sobolev(&fields[0], s, &cut),
            "sobolev_norm": fields[0].sobolev_norm(s),
        },
    });
    Ok(VerificationReport::new(
        "lp",
        checks,
        Provenance::new(seed, grid_label(&grid)),
        details,
    ))
}

/// The 2x2 symbol `[[1 + 0.3 sin x, 0.2 cos y], [0.2 cos y, 1 + 0.3 cos x]]`, ellipticity `>= 0.5`.
pub fn demo_matrix_symbol(grid: &TorusGrid) -> Result<SymbolMatrix> {
    let a11 = SpectralField::from_real_fn(grid, |x| 1.0 + 0.3 * x[0].sin());
    let a12 = SpectralField::from_real_fn(grid, |x| 0.2 * x[1].cos());
    let a22 = SpectralField::from_real_fn(grid, |x| 1.0 + 0.3 * x[0].cos());
    SymbolMatrix::new(vec![a11, a12.clone(), a12, a22])
}

fn choose_m_stable(
    sym: &SymbolMatrix,
    lambda0: f64,
    seed: u64,
    cut: CutoffProfile,
) -> Result<(pp::ChooseMReport, pp::ChooseMReport)> {
    let g = sym.grid();
    let h = j_max(g, &cut).unwrap_or(1).saturating_sub(1).max(1);
    let a = choose_m(sym, lambda0, &test_ensemble(g, seed, 200, h, 1.0)?, cut)?;
    let b = choose_m(
        sym,
        lambda0,
        &test_ensemble(g, seed.wrapping_add(1), 200, h, 1.0)?,
        cut,
    )?;
    Ok((a, b))
}

pub fn paraproduct_suite(p: &Params) -> Result<VerificationReport> {
    let cut = CutoffProfile::default();
    let seed = p.seed();
    let (symbol, from_file) = match &p.symbol {
        Some(path) => (
            SpectralField::from_json(&std::fs::read_to_string(path)?)?,
            true,
        ),
        None => (demo_symbol(&grid_1d(p.grid_points())?), false),
    };
    let grid = symbol.grid().clone();
    let mut checks = Vec::new();
    let mut details = BTreeMap::new();

    // positivity search
    let lambda0 = p.lambda0.unwrap_or(if from_file { 0.5 } else { 0.6 });
    let elliptic = if from_file {
        symbol.clone()
    } else {
        SpectralField::from_real_fn(&grid, |x| 1.0 + 0.4 * x[0].sin())
    };
    let mut chosen = None;
    let mut searches = vec![("scalar", SymbolMatrix::scalar(elliptic)?, lambda0)];
    if !from_file {
        searches.push((
            "matrix_2d",
            demo_matrix_symbol(&TorusGrid::new(2, 64, DEFAULT_PERIOD)?)?,
            0.5,
        ));
    }
    for (name, sym, l0) in &searches {
        match choose_m_stable(sym, *l0, seed, cut) {
            Ok((a, b)) => {
                checks.push(Check::holds(
                    format!("choose_m/{name}/stable_under_reseeding"),
                    Fit,
                    a.m == b.m,
                ));
                checks.push(Check::gt(
                    format!("choose_m/{name}/margin"),
                    Bound,
                    a.margin.min(b.margin),
                    0.0,
                ));
                checks.push(Check::ge(
                    format!("choose_m/{name}/min_ratio"),
                    Bound,
                    a.min_ratio.min(b.min_ratio),
                    0.5 * l0,
                ));
                if *name == "scalar" {
                    chosen = Some(a.m);
                }
                details.insert(
                    format!("choose_m_{name}"),
                    json!({"lambda0": l0, "report": a, "reseeded": b}),
                );
            }
            Err(e) => {
                checks.push(Check::holds(format!("choose_m/{name}"), Fit, false));
                details.insert(
                    format!("choose_m_{name}"),
                    json!({"lambda0": l0, "error": e.to_string()}),
                );
            }
        }
    }
    let m = match p.m.as_deref() {
        None | Some("auto") => chosen.unwrap_or(2),
        Some(v) => v.parse().map_err(|_| {
            Error::Usage(format!("m must be a positive integer or auto, got {v:?}"))
        })?,
    };

    // exact identities
    let ens = test_ensemble(
        &grid,
        seed,
        10,
        full_depth(&grid, &cut).min(j_max(&grid, &cut).unwrap_or(0)),
        0.0,
    )?;
    let constant = SpectralField::from_real_fn(&grid, |_| 2.5);
    let mut ident: f64 = 0.0;
    for mm in [1, 2, 3] {
        let op = Paraproduct::new(&constant, mm, cut)?;
        for u in &ens {
            ident = ident.max(op.apply(u)?.rel_distance(&u.scale_real(2.5))?);
        }
    }
    checks.push(Check::le(
        "constant_symbol_identity",
        Identity,
        ident,
        1e-12,
    ));
    let op = Paraproduct::new(&symbol, m, cut)?;
    let mut adj: f64 = 0.0;
    for pair in ens.chunks(2) {
        let (u, w) = (&pair[0], &pair[1]);
        let lhs = op.apply(u)?.inner(w)?;
        let rhs = u.inner(&op.adjoint(w)?)?;
        adj = adj.max((lhs - rhs).norm() / (u.l2_norm() * w.l2_norm()));
    }
    checks.push(Check::le("adjoint_inner_product", Identity, adj, 1e-10));

    // fitted constants
    let size = p.ensemble.unwrap_or(100);
    let h = 5.min(j_max(&grid, &cut).unwrap_or(0));
    let band = 1.9 * 2f64.powi(h as i32);
    let steps = 6;
    let base = pp::fit_constants(&op, &test_ensemble(&grid, seed, size, h, 0.0)?, band, steps)?;
    let reseeded = pp::fit_constants(
        &op,
        &test_ensemble(&grid, seed.wrapping_add(1000), size, h, 0.0)?,
        band,
        steps,
    )?;
    let fine_symbol = symbol.refine()?;
    let fine_op = Paraproduct::new(&fine_symbol, m, cut)?;
    let doubled = pp::fit_constants(
        &fine_op,
        &test_ensemble(fine_symbol.grid(), seed, size, h, 0.0)?,
        band,
        steps,
    )?;
    for (i, name) in pp::ParaproductConstants::NAMES.iter().enumerate() {
        let (c, r, d) = (
            base.as_array()[i],
            reseeded.as_array()[i],
            doubled.as_array()[i],
        );
        checks.push(Check::holds(
            format!("constants/{name}/finite"),
            Fit,
            c.is_finite() && c > 0.0,
        ));
        checks.push(Check::lt(
            format!("constants/{name}/reseed_drift"),
            Fit,
            rel_drift(c, r),
            0.1,
        ));
        checks.push(Check::lt(
            format!("constants/{name}/grid_doubling_drift"),
            Fit,
            rel_drift(c, d),
            0.1,
        ));
    }
    details.insert(
        "constants".into(),
        json!({"m": m, "ensemble": size, "band": band, "power_steps": steps, "base": base, "reseeded": reseeded, "doubled": doubled}),
    );
    details.insert("identity_error".into(), json!(ident));
    details.insert("adjoint_error".into(), json!(adj));
    Ok(VerificationReport::new(
        "paraproduct",
        checks,
        Provenance::new(seed, grid_label(&grid)),
        json!(details),
    ))
}

/// Serializable description of a coefficient family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSpec {
    pub family: String,
    pub dim: usize,
    pub alpha: f64,
    pub mu: String,
    pub delta: f64,
    #[serde(rename = "T")]
    pub t_horizon: f64,
}

impl CoefficientSpec {
    pub fn build(&self) -> Result<CoefficientField> {
        let mu = ModulusOfContinuity::parse(&self.mu)?;
        match self.family.as_str() {
            "identity" => CoefficientField::identity(self.dim, mu, self.alpha, self.t_horizon),
            "synthetic" => synthetic_coefficient(
                self.dim,
                self.alpha,
                mu,
                self.delta,
                self.t_horizon,
                &SampleSpec::default(),
            ),
            f => Err(Error::Usage(format!(
                "unknown coefficient family {f:?}; expected synthetic or identity"
            ))),
        }
    }

    /// Reads either a bare spec or a coeffs report carrying one under `details.coefficient`.
    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        let inner = v
            .get("details")
            .and_then(|d| d.get("coefficient"))
            .cloned()
            .unwrap_or(v);
        Ok(serde_json::from_value(inner)?)
    }
}

pub fn coeffs_suite(p: &Params) -> Result<VerificationReport> {
    let spec = CoefficientSpec {
        family: p.family.clone().unwrap_or_else(|| "synthetic".into()),
        dim: 1,
        alpha: p.alpha.unwrap_or(0.5),
        mu: p.mu.clone().unwrap_or_else(|| "log".into()),
        delta: p.delta.unwrap_or(0.4),
        t_horizon: p.t_horizon.unwrap_or(1.0),
    };
    let a = spec.build()?;
    let sample = SampleSpec::default();
    let inv = a.check_invariants(&sample);
    let mut checks = vec![
        Check::ge(
            "ellipticity",
            Bound,
            inv.ellipticity_min,
            a.lambda0() - 1e-12,
        ),
        Check::holds("invariants", Bound, inv.holds),
        Check::holds(
            "holder_quotient_finite",
            Fit,
            inv.holder_quotient.is_finite(),
        ),
        Check::holds(
            "osgood_quotient_finite",
            Fit,
            inv.osgood_quotient.is_finite(),
        ),
    ];
    let mut details = BTreeMap::new();
    if p.verify_all(false)? {
        let depth = p.depth.unwrap_or(4);
        let rep = verify_mollifier_estimates(&a, depth, &sample)?;
        checks.push(Check::holds(
            "mollifier/c1_finite",
            Fit,
            rep.c1_deep.is_finite(),
        ));
        checks.push(Check::holds(
            "mollifier/c2_finite",
            Fit,
            rep.c2_deep.is_finite(),
        ));
        checks.push(Check::lt("mollifier/c1_drift", Fit, rep.c1_drift, 0.1));
        checks.push(Check::lt("mollifier/c2_drift", Fit, rep.c2_drift, 0.1));
        let mut mass: f64 = 0.0;
        let mut ell = f64::INFINITY;
        let times = sample.times(a.t_horizon(), 0.0);
        let xs = sample.points(a.dim());
        for h in 1..=3 {
            let m = mollify(&a, crate::coefficients::epsilon_of_level(a.t_horizon(), h))?;
            mass = mass.max((m.kernel_mass() - 1.0).abs());
            for &t in times.iter().step_by(10) {
                for x in xs.iter().step_by(8) {
                    ell = ell.min(crate::coefficients::min_eigenvalue(&m.eval(t, *x), a.dim()));
                }
            }
        }
        checks.push(Check::le("mollifier/kernel_mass", Identity, mass, 1e-10));
        checks.push(Check::ge(
            "mollifier/ellipticity",
            Bound,
            ell,
            a.lambda0() - 1e-12,
        ));
        details.insert("mollifier".to_string(), json!(rep));
    }
    details.insert("coefficient".into(), json!(spec));
    details.insert("invariants".into(), json!(inv));
    Ok(VerificationReport::new(
        "coeffs",
        checks,
        Provenance::new(p.seed(), "none"),
        json!(details),
    ))
}

fn harness_checks(name: &str, r: &HarnessReport) -> Vec<Check> {
    let base: Vec<_> = r.gammas.iter().filter(|g| !g.extension).collect();
    let form = base
        .iter()
        .map(|g| g.max_form_disagreement)
        .fold(0.0, f64::max);
    let ident = base
        .iter()
        .map(|g| g.max_identity_error)
        .fold(0.0, f64::max);
    let f = &r.fitted;
    let final3 = base
        .iter()
        .filter(|g| g.gamma >= f.gamma0_hat)
        .all(|g| g.final3_pass);
    vec![
        Check::le(format!("{name}/form_agreement"), Identity, form, 1e-8),
        Check::le(format!("{name}/block_identity"), Identity, ident, 1e-8),
        Check::gt(format!("{name}/c_hat"), Fit, f.c_hat, 0.0),
        Check::lt(format!("{name}/c_hat_drift"), Fit, f.c_hat_drift, 0.05),
        Check::holds(format!("{name}/final3_all_blocks"), Bound, final3),
        Check::gt(format!("{name}/c_final3"), Fit, f.c_final3, 0.0),
    ]
}

pub fn carleman_suite(p: &Params) -> Result<VerificationReport> {
    let mut cfg = HarnessConfig {
        seed: p.seed(),
        ..HarnessConfig::default()
    };
    let file_spec = match &p.coeffs {
        Some(path) => Some(CoefficientSpec::from_json(&std::fs::read_to_string(path)?)?),
        None => None,
    };
    if let Some(s) = &file_spec {
        cfg.t_horizon = s.t_horizon;
        cfg.alpha = s.alpha;
        cfg.mu = ModulusOfContinuity::parse(&s.mu)?;
    }
    if let Some(t) = p.t_horizon {
        cfg.t_horizon = t;
    }
    if let Some(a) = p.alpha {
        cfg.alpha = a;
    }
    if let Some(m) = &p.mu {
        cfg.mu = ModulusOfContinuity::parse(m)?;
    }
    if let Some(g) = &p.gammas {
        cfg.gammas = g.clone();
    }
    if let Some(e) = p.ensemble {
        cfg.ensemble = e;
    }
    if let Some(n) = p.grid_points {
        cfg.grid_points = n;
    }
    if let Some(m) = p.m.as_deref() {
        if m != "auto" {
            cfg.m = Some(m.parse().map_err(|_| {
                Error::Usage(format!("m must be a positive integer or auto, got {m:?}"))
            })?);
        }
    }
    let mu = cfg.mu.name();
    let specs = match file_spec {
        Some(s) => vec![CoefficientSpec {
            t_horizon: cfg.t_horizon,
            alpha: cfg.alpha,
            mu: mu.clone(),
            ..s
        }],
        None => vec![
            CoefficientSpec {
                family: "identity".into(),
                dim: 1,
                alpha: cfg.alpha,
                mu: mu.clone(),
                delta: 0.0,
                t_horizon: cfg.t_horizon,
            },
            CoefficientSpec {
                family: "synthetic".into(),
                dim: 1,
                alpha: cfg.alpha,
                mu: mu.clone(),
                delta: p.delta.unwrap_or(0.2),
                t_horizon: cfg.t_horizon,
            },
        ],
    };
    let mut checks = Vec::new();
    let mut details = BTreeMap::new();
    for s in &specs {
        let a = s.build()?;
        let r = run_harness(&cfg, &a)?;
        let name = if s.family == "identity" {
            "identity".to_string()
        } else {
            format!("synthetic_delta={}", s.delta)
        };
        checks.extend(harness_checks(&name, &r));
        details.insert(name, json!({"coefficient": s, "harness": r}));
    }
    let grid = format!("1d:{}:period={}", cfg.grid_points, cfg.period);
    Ok(VerificationReport::new(
        "carleman",
        checks,
        Provenance::new(cfg.seed, grid),
        json!(details),
    ))
}

fn write_grid(data: &CounterexampleData, path: &Path) -> Result<()> {
    let rows = cx::default_grid(data, 4);
    if path.extension().and_then(|e| e.to_str()) == Some("csv") {
        write_csv(path, GRID_COLUMNS, &rows)
    } else {
        std::fs::write(path, serde_json::to_string_pretty(&rows)? + "\n")?;
        Ok(())
    }
}

pub const GRID_COLUMNS: &[&str] = &["t", "x1", "x2", "u", "log_scale", "l", "b1", "b2", "c"];

pub fn counterexample_suite(p: &Params) -> Result<VerificationReport> {
    let n = p.n_intervals.unwrap_or(10_000);
    let auto = matches!(p.j0.as_deref(), None | Some("auto"));
    let j0 = if auto {
        cx::choose_j0(n)?
    } else {
        let v = p.j0.as_deref().unwrap_or_default();
        v.parse().map_err(|_| {
            Error::Usage(format!("j0 must be a positive integer or auto, got {v:?}"))
        })?
    };
    let data = cx::build(Some(j0), n)?;
    let seq = data.sequences();
    let mut checks = vec![Check::gt(
        "seq_p/p_min",
        Bound,
        (1..=n).map(|k| seq.p(k)).fold(f64::INFINITY, f64::min),
        1.0,
    )];
    if auto {
        checks.push(Check::holds(
            "j0/stable_under_N_doubling",
            Fit,
            cx::choose_j0(2 * n)? == j0,
        ));
    }
    let mut details = BTreeMap::new();
    if p.verify_all(true)? {
        let r = cx::verify_conditions(&data)?;
        checks.push(Check::le("cond2/sup", Bound, r.cond2.value, r.cond2_bound));
        checks.push(Check::lt("cond2/drift", Fit, r.cond2.drift, 0.05));
        for c in &r.cond3 {
            checks.push(Check::holds(
                format!("cond3/{}/finite", c.label),
                Fit,
                c.value.is_finite(),
            ));
            checks.push(Check::lt(
                format!("cond3/{}/drift", c.label),
                Fit,
                c.drift,
                0.05,
            ));
        }
        checks.push(Check::holds(
            "cond1_cond4/witness_decay",
            Decay,
            r.witnesses_pass(),
        ));
        let worst = r
            .witnesses
            .iter()
            .map(|w| w.log10_decay)
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push(Check::le(
            "cond1_cond4/worst_log10_decay",
            Decay,
            worst,
            -6.0,
        ));
        checks.push(Check::lt("osc1/drift", Fit, r.osc1.drift, 0.05));
        checks.push(Check::le(
            "osc1/ratio_2N_over_N",
            Fit,
            r.osc1.value_doubled / r.osc1.value,
            1.05,
        ));
        for c in &r.c_eps {
            checks.push(Check::holds(
                format!("osc/{}/finite", c.label),
                Fit,
                c.value.is_finite(),
            ));
        }
        for c in &r.holder {
            checks.push(Check::lt(
                format!("holder/{}/drift", c.label),
                Fit,
                c.drift,
                0.05,
            ));
        }
        checks.push(Check::ge(
            "ellipticity/l_min",
            Bound,
            r.sampled_l.l_min,
            0.5,
        ));
        checks.push(Check::le(
            "ellipticity/l_max",
            Bound,
            r.sampled_l.l_max,
            1.5,
        ));
        checks.push(Check::le(
            "l_prime_bound",
            Bound,
            r.sampled_l.l_prime_bound_ratio,
            1.0 + 1e-6,
        ));
        checks.push(Check::le(
            "pde_residual",
            Identity,
            r.residual.max_residual,
            1e-10,
        ));
        checks.push(Check::le(
            "degenerate_points",
            Bound,
            r.residual.degenerate as f64,
            0.0,
        ));
        let bsup = r
            .residual
            .sup_b1
            .max(r.residual.sup_b2)
            .max(r.residual.sup_c);
        checks.push(Check::holds("lower_order_bounded", Bound, bsup.is_finite()));
        checks.push(Check::le(
            "ratio_slope_deviation",
            Fit,
            (r.growth.ratio_slope + 1.0).abs(),
            0.05,
        ));
        checks.push(Check::ge(
            "q_growth_exponent",
            Fit,
            r.growth.q_exponent,
            1.75 - 0.05,
        ));
        checks.push(Check::gt("q_growth_lambda", Fit, r.growth.lambda_q, 0.0));
        checks.push(Check::holds(
            "vanishing_certificate_t^5",
            Decay,
            r.vanishing.pass,
        ));
        details.insert("conditions".to_string(), json!(r));
    }
    details.insert("j0".into(), json!(j0));
    details.insert("N".into(), json!(n));
    if let Some(path) = &p.emit_grid {
        write_grid(&cx::flip_time(&data), path)?;
    }
    Ok(VerificationReport::new(
        "counterexample",
        checks,
        Provenance::new(p.seed(), "none"),
        json!(details),
    ))
}

/// Every suite with default parameters (plus any given), checks prefixed by suite name.
/// A suite that errors is recorded as a failed `<suite>/completed` check.
pub fn all_suite(p: &Params) -> VerificationReport {
    type Runner = fn(&Params) -> Result<VerificationReport>;
    let runners: [(&str, Runner); 7] = [
        ("spectral", |p| spectral_suite(p.seed())),
        ("weight", weight_suite),
        ("lp", lp_suite),
        ("paraproduct", paraproduct_suite),
        ("coeffs", coeffs_suite),
        ("carleman", carleman_suite),
        ("counterexample", counterexample_suite),
    ];
    let mut checks = Vec::new();
    let mut details = BTreeMap::new();
    for (name, run) in runners {
        match run(p) {
            Ok(r) => {
                checks.extend(r.checks.into_iter().map(|c| c.prefixed(name)));
                details.insert(
                    name.to_string(),
                    json!({"provenance": r.provenance, "details": r.details}),
                );
            }
            Err(e) => {
                checks.push(Check::holds(format!("{name}/completed"), Identity, false));
                details.insert(name.to_string(), json!({"error": e.to_string()}));
            }
        }
    }
    VerificationReport::new(
        "all",
        checks,
        Provenance::new(p.seed(), "per suite"),
        json!(details),
    )
}

/// Plot data for a report: one row per `(gamma, member)` for carleman reports,
/// the check table otherwise.
pub fn emit_plot_data(report: &VerificationReport, path: impl AsRef<Path>) -> Result<()> {
    if report.suite != "carleman" {
        return report.write_checks_csv(path);
    }
    let mut rows = Vec::new();
    if let Value::Object(map) = &report.details {
        for (coef, v) in map {
            for m in v["harness"]["members"].as_array().into_iter().flatten() {
                rows.push(CarlemanCsvRow {
                    coefficient: coef.clone(),
                    gamma: m["gamma"].as_f64().unwrap_or(f64::NAN),
                    member: m["member"].as_u64().unwrap_or(0),
                    ratio: m["ratio"].as_f64().unwrap_or(f64::NAN),
                    lhs: m["lhs"].as_f64().unwrap_or(f64::NAN),
                    rhs_gradient_part: m["rhs_gradient_part"].as_f64().unwrap_or(f64::NAN),
                    rhs_l2_part: m["rhs_l2_part"].as_f64().unwrap_or(f64::NAN),
                    final3_pass: m["final3_pass"].as_bool().unwrap_or(false),
                });
            }
        }
    }
    write_csv(path, CARLEMAN_COLUMNS, &rows)
}

pub const CARLEMAN_COLUMNS: &[&str] = &[
    "coefficient",
    "gamma",
    "member",
    "ratio",
    "lhs",
    "rhs_gradient_part",
    "rhs_l2_part",
    "final3_pass",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlemanCsvRow {
    pub coefficient: String,
    pub gamma: f64,
    pub member: u64,
    pub ratio: f64,
    pub lhs: f64,
    pub rhs_gradient_part: f64,
    pub rhs_l2_part: f64,
    pub final3_pass: bool,
}
