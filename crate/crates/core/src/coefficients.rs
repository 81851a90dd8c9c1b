//! Time-dependent coefficient matrices `a_jk(t, x)`, their time mollification
//! and the measured constants of the mollifier estimates.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modulus::{is_osgood, ModulusOfContinuity};
use crate::quadrature::{gauss_kronrod, gauss_legendre};
use crate::spectral::{SpectralField, TorusGrid};

/// Symmetric matrix; only the leading `dim x dim` corner is meaningful.
pub type Matrix = [[f64; 2]; 2];

pub type Evaluator = Arc<dyn Fn(f64, [f64; 2]) -> Matrix + Send + Sync>;

pub fn min_eigenvalue(m: &Matrix, dim: usize) -> f64 {
    if dim == 1 {
        return m[0][0];
    }
    let (a, b, d) = (m[0][0], m[0][1], m[1][1]);
    0.5 * (a + d) - (0.25 * (a - d) * (a - d) + b * b).sqrt()
}

fn max_entry_diff(p: &Matrix, q: &Matrix, dim: usize) -> f64 {
    let mut d: f64 = 0.0;
    for j in 0..dim {
        for k in 0..dim {
            d = d.max((p[j][k] - q[j][k]).abs());
        }
    }
    d
}

#[derive(Clone)]
pub struct CoefficientField {
    dim: usize,
    lambda0: f64,
    alpha: f64,
    mu: ModulusOfContinuity,
    holder_constant: f64,
    osgood_blowup_constant: f64,
    t_horizon: f64,
    time_constant: bool,
    name: String,
    evaluator: Evaluator,
}

impl std::fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoefficientField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("lambda0", &self.lambda0)
            .field("alpha", &self.alpha)
            .field("mu", &self.mu.name())
            .field("t_horizon", &self.t_horizon)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldParams {
    pub dim: usize,
    pub lambda0: f64,
    pub alpha: f64,
    pub holder_constant: f64,
    pub osgood_blowup_constant: f64,
    pub t_horizon: f64,
}

impl CoefficientField {
    pub fn new(
        name: &str,
        params: FieldParams,
        mu: ModulusOfContinuity,
        time_constant: bool,
        evaluator: Evaluator,
    ) -> Result<Self> {
        let FieldParams {
            dim,
            lambda0,
            alpha,
            holder_constant,
            osgood_blowup_constant,
            t_horizon,
        } = params;
        if !(1..=2).contains(&dim) {
            return Err(Error::Config(format!(
                "coefficient dimension must be 1 or 2, got {dim}"
            )));
        }
        if !(lambda0 > 0.0 && lambda0 <= 1.0) {
            return Err(Error::Config(format!(
                "lambda0 must lie in (0, 1], got {lambda0}"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        if !(t_horizon > 0.0 && t_horizon.is_finite()) {
            return Err(Error::Config(format!(
                "T must be positive, got {t_horizon}"
            )));
        }
        if !is_osgood(&mu) {
            return Err(Error::Precondition(format!(
                "modulus {} is not Osgood",
                mu.name()
            )));
        }
        Ok(CoefficientField {
            dim,
            lambda0,
            alpha,
            mu,
            holder_constant,
            osgood_blowup_constant,
            t_horizon,
            time_constant,
            name: name.to_string(),
            evaluator,
        })
    }

    /// `a = Id`.
    pub fn identity(
        dim: usize,
        mu: ModulusOfContinuity,
        alpha: f64,
        t_horizon: f64,
    ) -> Result<Self> {
        let params = FieldParams {
            dim,
            lambda0: 1.0,
            alpha,
            holder_constant: 0.0,
            osgood_blowup_constant: 0.0,
            t_horizon,
        };
        Self::new(
            "identity",
            params,
            mu,
            true,
            Arc::new(|_, _| [[1.0, 0.0], [0.0, 1.0]]),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mu(&self) -> &ModulusOfContinuity {
        &self.mu
    }

    pub fn holder_constant(&self) -> f64 {
        self.holder_constant
    }

    pub fn osgood_blowup_constant(&self) -> f64 {
        self.osgood_blowup_constant
    }

    pub fn t_horizon(&self) -> f64 {
        self.t_horizon
    }

    pub fn is_time_constant(&self) -> bool {
        self.time_constant
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, t: f64, x: [f64; 2]) -> Matrix {
        (self.evaluator)(t, x)
    }

    /// Entries `a_jk(t, .)` sampled on `grid`, row-major.
    pub fn entry_fields(&self, t: f64, grid: &TorusGrid) -> Result<Vec<SpectralField>> {
        entry_fields_of(|x| self.eval(t, x), self.dim, grid)
    }

    /// Brute-force sweep of the structural hypotheses on a sample set.
    pub fn check_invariants(&self, spec: &SampleSpec) -> InvariantReport {
        let ts = spec.times(self.t_horizon, 0.0);
        let xs = spec.points(self.dim);
        let vals: Vec<Vec<Matrix>> = ts
            .par_iter()
            .map(|&t| xs.iter().map(|&x| self.eval(t, x)).collect())
            .collect();

        let ellipticity_min = vals
            .iter()
            .flatten()
            .map(|m| min_eigenvalue(m, self.dim))
            .fold(f64::INFINITY, f64::min);

        let mut holder: f64 = 0.0;
        for i in 0..ts.len() {
            for j in (i + 1)..ts.len() {
                let dt = (ts[j] - ts[i]).abs();
                for k in 0..xs.len() {
                    holder = holder.max(
                        max_entry_diff(&vals[i][k], &vals[j][k], self.dim) / dt.powf(self.alpha),
                    );
                }
            }
        }

        let table = self.osgood_quotients(&ts, &vals, xs.len());
        let osgood = table.iter().map(|r| r.weighted).fold(0.0, f64::max);

        let mut lip: f64 = 0.0;
        for row in &vals {
            for k in 0..xs.len() {
                for l in (k + 1)..xs.len() {
                    let dx = ((xs[k][0] - xs[l][0]).powi(2) + (xs[k][1] - xs[l][1]).powi(2)).sqrt();
                    lip = lip.max(max_entry_diff(&row[k], &row[l], self.dim) / dx);
                }
            }
        }

        let holds = ellipticity_min >= self.lambda0 - 1e-12
            && holder <= self.holder_constant * (1.0 + 1e-9) + 1e-14
            && osgood <= self.osgood_blowup_constant * (1.0 + 1e-9) + 1e-14;
        InvariantReport {
            ellipticity_min,
            holder_quotient: holder,
            osgood_quotient: osgood,
            x_lipschitz: lip,
            quotient_table: table,
            holds,
        }
    }

    fn osgood_quotients(&self, ts: &[f64], vals: &[Vec<Matrix>], nx: usize) -> Vec<QuotientRow> {
        let n = ts.len();
        // sup over pairs inside [t_i, T], accumulated from the right
        let mut rows = Vec::with_capacity(n);
        let mut running: f64 = 0.0;
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let dt = (ts[j] - ts[i]).abs();
                let m = self.mu.eval(dt.min(1.0));
                for k in 0..nx {
                    running = running.max(max_entry_diff(&vals[i][k], &vals[j][k], self.dim) / m);
                }
            }
            rows.push(QuotientRow {
                t: ts[i],
                sup: running,
                weighted: running * ts[i].powf(1.0 - self.alpha),
            });
        }
        rows.reverse();
        rows
    }
}

fn entry_fields_of<F: Fn([f64; 2]) -> Matrix>(
    f: F,
    dim: usize,
    grid: &TorusGrid,
) -> Result<Vec<SpectralField>> {
    if grid.dim() != dim {
        return Err(Error::Config(format!(
            "coefficient dimension {dim} does not match grid dimension {}",
            grid.dim()
        )));
    }
    let mats: Vec<Matrix> = (0..grid.len()).map(|i| f(grid.point(i))).collect();
    let mut out = Vec::with_capacity(dim * dim);
    for j in 0..dim {
        for k in 0..dim {
            let vals = mats
                .iter()
                .map(|m| num_complex::Complex64::new(m[j][k], 0.0))
                .collect();
            out.push(SpectralField::new(
                grid.clone(),
                vals,
                crate::spectral::Representation::Physical,
            )?);
        }
    }
    Ok(out)
}

/// Sampling used by the brute-force sweeps.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SampleSpec {
    /// log-spaced times in `[t_min_fraction * T, t_max_fraction * T]`
    pub times: usize,
    pub t_min_fraction: f64,
    pub t_max_fraction: f64,
    /// x-points per axis on `[0, 2 pi)`
    pub points: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            times: 100,
            t_min_fraction: 1e-4,
            t_max_fraction: 1.0,
            points: 64,
        }
    }
}

impl SampleSpec {
    pub fn times(&self, t_horizon: f64, _shift: f64) -> Vec<f64> {
        let (a, b) = (
            (self.t_min_fraction * t_horizon).ln(),
            (self.t_max_fraction * t_horizon).ln(),
        );
        let n = self.times.max(2);
        (0..n)
            .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }

    pub fn points(&self, dim: usize) -> Vec<[f64; 2]> {
        let h = std::f64::consts::TAU / self.points as f64;
        if dim == 1 {
            (0..self.points).map(|i| [i as f64 * h, 0.0]).collect()
        } else {
            let m = (self.points as f64).sqrt().ceil() as usize;
            let h2 = std::f64::consts::TAU / m as f64;
            (0..m * m)
                .map(|i| [(i % m) as f64 * h2, (i / m) as f64 * h2])
                .collect()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuotientRow {
    pub t: f64,
    /// `sup_{s1, s2 in [t, T], x} |a(s1) - a(s2)| / mu(|s1 - s2|)`
    pub sup: f64,
    /// `sup * t^{1 - alpha}`
    pub weighted: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub ellipticity_min: f64,
    pub holder_quotient: f64,
    pub osgood_quotient: f64,
    pub x_lipschitz: f64,
    pub quotient_table: Vec<QuotientRow>,
    pub holds: bool,
}

/// `theta(t) = int_{t/T}^1 ds / mu(s)` tabulated in `x = -ln(t/T)` with cubic Hermite pieces.
#[derive(Debug, Clone)]
struct PhaseTable {
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    mu: ModulusOfContinuity,
}

impl PhaseTable {
    const X_MAX: f64 = 60.0;

    fn new(mu: &ModulusOfContinuity) -> Self {
        let step = 1.0 / 64.0;
        let n = (Self::X_MAX / step) as usize + 1;
        let mut values = Vec::with_capacity(n);
        let mut acc = 0.0;
        values.push(0.0);
        for i in 1..n {
            let (a, b) = ((i - 1) as f64 * step, i as f64 * step);
            acc += gauss_kronrod(|x| 1.0 / mu.ratio_log(x), a, b, 1e-14, 0.0).value;
            values.push(acc);
        }
        let slopes = (0..n)
            .map(|i| 1.0 / mu.ratio_log(i as f64 * step))
            .collect();
        PhaseTable {
            step,
            values,
            slopes,
            mu: *mu,
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        let last = self.values.len() - 1;
        if x >= Self::X_MAX {
            return self.values[last] + self.mu.log_integral(Self::X_MAX, x);
        }
        let i = ((x / self.step) as usize).min(last - 1);
        let s = (x - i as f64 * self.step) / self.step;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1
    }
}

/// Synthetic family `a(t, x) = (1 + delta g(t) (4 + sin x_1)/5) Id` with
/// `g(t) = (t/T)^alpha sin(theta(t))`, `theta(t) = int_{t/T}^1 ds / mu(s)`.
/// Its Holder and weighted-Osgood constants are measured by brute force on `spec`.
pub fn synthetic_coefficient(
    dim: usize,
    alpha: f64,
    mu: ModulusOfContinuity,
    delta: f64,
    t_horizon: f64,
    spec: &SampleSpec,
) -> Result<CoefficientField> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Precondition(format!(
            "delta = {delta} breaks ellipticity (need 0 <= delta < 1)"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let phase = Arc::new(PhaseTable::new(&mu));
    let evaluator: Evaluator = Arc::new(move |t: f64, x: [f64; 2]| {
        let r = (t / t_horizon).clamp(0.0, 1.0);
        let g = if r == 0.0 {
            0.0
        } else {
            r.powf(alpha) * phase.eval(-r.ln()).sin()
        };
        let d = 1.0 + delta * g * (4.0 + x[0].sin()) / 5.0;
        [[d, 0.0], [0.0, d]]
    });
    let lambda0 = 1.0 - delta;
    let provisional = FieldParams {
        dim,
        lambda0,
        alpha,
        holder_constant: f64::INFINITY,
        osgood_blowup_constant: f64::INFINITY,
        t_horizon,
    };
    let name = format!("synthetic(delta={delta})");
    let field = CoefficientField::new(&name, provisional, mu, delta == 0.0, evaluator.clone())?;
    let report = field.check_invariants(spec);
    let params = FieldParams {
        holder_constant: report.holder_quotient,
        osgood_blowup_constant: report.osgood_quotient,
        ..provisional
    };
    CoefficientField::new(&name, params, mu, delta == 0.0, evaluator)
}

/// `rho(s) = e^{-1/(1 - s^2)}` on `(-1, 1)`, unnormalized.
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

pub fn bump_derivative(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - s * s;
        bump(s) * (-2.0 * s / (q * q))
    }
}

pub const MOLLIFIER_NODES: usize = 64;

/// `a_eps(t) = int rho_eps(s) a~(t - s) ds` with `a~(t) = a(eps)` for `t < eps`.
#[derive(Debug, Clone)]
pub struct MollifiedCoefficient {
    base: CoefficientField,
    epsilon: f64,
    nodes: Vec<f64>,
    /// `rho(s_i) w_i / mass`
    weights: Vec<f64>,
    /// `rho'(s_i) w_i / mass`
    dweights: Vec<f64>,
}

pub fn mollify(base: &CoefficientField, epsilon: f64) -> Result<MollifiedCoefficient> {
    let t_h = base.t_horizon();
    if !(epsilon > 0.0 && epsilon <= 0.5 * t_h * (1.0 + 1e-12)) {
        return Err(Error::Domain(format!(
            "mollification scale {epsilon} outside (0, T/2] with T = {t_h}"
        )));
    }
    let (nodes, w) = gauss_legendre(MOLLIFIER_NODES);
    let mass: f64 = nodes.iter().zip(&w).map(|(s, wi)| bump(*s) * wi).sum();
    let weights = nodes
        .iter()
        .zip(&w)
        .map(|(s, wi)| bump(*s) * wi / mass)
        .collect();
    let dweights = nodes
        .iter()
        .zip(&w)
        .map(|(s, wi)| bump_derivative(*s) * wi / mass)
        .collect();
    Ok(MollifiedCoefficient {
        base: base.clone(),
        epsilon,
        nodes,
        weights,
        dweights,
    })
}

impl MollifiedCoefficient {
    pub fn base(&self) -> &CoefficientField {
        &self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Discrete mass of the normalized kernel (1 up to rounding).
    pub fn kernel_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn frozen(&self, t: f64, x: [f64; 2]) -> Matrix {
        self.base
            .eval(t.clamp(self.epsilon, self.base.t_horizon()), x)
    }

    fn convolve(&self, t: f64, x: [f64; 2], w: &[f64], scale: f64) -> Matrix {
        if self.base.is_time_constant() && scale != 1.0 {
            return [[0.0; 2]; 2];
        }
        let mut acc = [[0.0; 2]; 2];
        for (s, wi) in self.nodes.iter().zip(w) {
            let m = self.frozen(t - self.epsilon * s, x);
            for j in 0..2 {
                for k in 0..2 {
                    acc[j][k] += wi * m[j][k];
                }
            }
        }
        for row in acc.iter_mut() {
            for v in row.iter_mut() {
                *v *= scale;
            }
        }
        acc
    }

    pub fn eval(&self, t: f64, x: [f64; 2]) -> Matrix {
        if self.base.is_time_constant() {
            return self.base.eval(t, x);
        }
        self.convolve(t, x, &self.weights, 1.0)
    }

    /// `d_t a_eps = int rho_eps'(s) a~(t - s) ds`.
    pub fn eval_dt(&self, t: f64, x: [f64; 2]) -> Matrix {
        self.convolve(t, x, &self.dweights, 1.0 / self.epsilon)
    }

    pub fn entry_fields(&self, t: f64, grid: &TorusGrid) -> Result<Vec<SpectralField>> {
        entry_fields_of(|x| self.eval(t, x), self.base.dim(), grid)
    }

    pub fn entry_dt_fields(&self, t: f64, grid: &TorusGrid) -> Result<Vec<SpectralField>> {
        entry_fields_of(|x| self.eval_dt(t, x), self.base.dim(), grid)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsilonRow {
    pub h: usize,
    pub epsilon: f64,
    /// `sup |a - a_eps| / min(eps^alpha, t^{alpha-1} mu(eps))`
    pub c1: f64,
    /// `sup |d_t a_eps| / min(eps^{alpha-1}, t^{alpha-1} mu(eps)/eps)`
    pub c2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MollifierReport {
    pub depth: usize,
    pub rows: Vec<EpsilonRow>,
    /// sup over `h <= depth`
    pub c1: f64,
    pub c2: f64,
    /// sup over `h <= depth + 2`
    pub c1_deep: f64,
    pub c2_deep: f64,
    pub c1_drift: f64,
    pub c2_drift: f64,
}

/// `eps_h = T 4^{-h}`, clamped to `T/2`.
pub fn epsilon_of_level(t_horizon: f64, h: usize) -> f64 {
    (t_horizon * 0.25f64.powi(h as i32)).min(0.5 * t_horizon)
}

/// Constants of the mollifier estimates over `eps_h`, `h = 1..=depth + 2`, on
/// `t` log-spaced in `[1e-4 T, T/2]`. Drift compares the sup up to `depth`
/// with the sup up to `depth + 2`.
pub fn verify_mollifier_estimates(
    base: &CoefficientField,
    depth: usize,
    spec: &SampleSpec,
) -> Result<MollifierReport> {
    if depth == 0 {
        return Err(Error::Config("mollifier sweep depth must be >= 1".into()));
    }
    let t_h = base.t_horizon();
    let spec = SampleSpec {
        t_max_fraction: spec.t_max_fraction.min(0.5),
        ..*spec
    };
    let ts = spec.times(t_h, 0.0);
    let xs = spec.points(base.dim());
    let alpha = base.alpha();
    let dim = base.dim();
    let rows = (1..=depth + 2)
        .into_par_iter()
        .map(|h| -> Result<EpsilonRow> {
            let eps = epsilon_of_level(t_h, h);
            let m = mollify(base, eps)?;
            let mu_e = base.mu().eval(eps.min(1.0));
            let (mut c1, mut c2): (f64, f64) = (0.0, 0.0);
            for &t in &ts {
                let b1 = eps.powf(alpha).min(t.powf(alpha - 1.0) * mu_e);
                let b2 = eps.powf(alpha - 1.0).min(t.powf(alpha - 1.0) * mu_e / eps);
                for &x in &xs {
                    let d = max_entry_diff(&base.eval(t, x), &m.eval(t, x), dim);
                    let zero = [[0.0; 2]; 2];
                    let dt = max_entry_diff(&m.eval_dt(t, x), &zero, dim);
                    c1 = c1.max(d / b1);
                    c2 = c2.max(dt / b2);
                }
            }
            Ok(EpsilonRow {
                h,
                epsilon: eps,
                c1,
                c2,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sup = |upto: usize, f: fn(&EpsilonRow) -> f64| {
        rows.iter()
            .filter(|r| r.h <= upto)
            .map(f)
            .fold(0.0, f64::max)
    };
    let (c1, c2) = (sup(depth, |r| r.c1), sup(depth, |r| r.c2));
    let (c1_deep, c2_deep) = (sup(depth + 2, |r| r.c1), sup(depth + 2, |r| r.c2));
    let drift = |a: f64, b: f64| {
        if a == 0.0 && b == 0.0 {
            0.0
        } else {
            (b - a).abs() / a.max(b)
        }
    };
    Ok(MollifierReport {
        depth,
        rows,
        c1,
        c2,
        c1_deep,
        c2_deep,
        c1_drift: drift(c1, c1_deep),
        c2_drift: drift(c2, c2_deep),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(f: fn(f64) -> f64, time_constant: bool) -> CoefficientField {
        let params = FieldParams {
            dim: 1,
            lambda0: 0.5,
            alpha: 0.5,
            holder_constant: 10.0,
            osgood_blowup_constant: 10.0,
            t_horizon: 1.0,
        };
        CoefficientField::new(
            "toy",
            params,
            ModulusOfContinuity::linear(),
            time_constant,
            Arc::new(move |t, _| [[f(t), 0.0], [0.0, f(t)]]),
        )
        .unwrap()
    }

    #[test]
    fn polynomial_reproduction() {
        let m = mollify(&scalar(|t| 1.0 + t, false), 0.05).unwrap();
        assert!((m.kernel_mass() - 1.0).abs() < 1e-14);
        for t in [0.1, 0.3, 0.9] {
            assert!((m.eval(t, [0.0; 2])[0][0] - (1.0 + t)).abs() < 1e-10);
            assert!((m.eval_dt(t, [0.0; 2])[0][0] - 1.0).abs() < 1e-8);
        }
        // frozen below eps
        assert!((m.eval(0.0, [0.0; 2])[0][0] - 1.05).abs() < 1e-10);
        assert!(mollify(&scalar(|t| t, false), 0.6).is_err());
    }

    #[test]
    fn derivative_matches_differences() {
        let m = mollify(&scalar(|t| 1.0 + 0.2 * (7.0 * t).sin(), false), 0.1).unwrap();
        let t = 0.4;
        let err = |h: f64| {
            let fd = (m.eval(t + h, [0.0; 2])[0][0] - m.eval(t - h, [0.0; 2])[0][0]) / (2.0 * h);
            (fd - m.eval_dt(t, [0.0; 2])[0][0]).abs()
        };
        let ratio = err(1e-2) / err(5e-3);
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn synthetic_guards_and_ellipticity() {
        let spec = SampleSpec {
            times: 40,
            points: 16,
            ..Default::default()
        };
        assert!(matches!(
            synthetic_coefficient(1, 0.5, ModulusOfContinuity::log(), 1.0, 1.0, &spec),
            Err(Error::Precondition(_))
        ));
        let a =
            synthetic_coefficient(1, 0.5, ModulusOfContinuity::linear(), 0.4, 1.0, &spec).unwrap();
        let rep = a.check_invariants(&spec);
        assert!(rep.holds);
        assert!(rep.ellipticity_min >= 0.6 - 1e-12);
        let sups: Vec<f64> = rep.quotient_table.iter().map(|r| r.sup).collect();
        assert!(sups.windows(2).all(|w| w[0] >= w[1]));
        let z =
            synthetic_coefficient(1, 0.5, ModulusOfContinuity::linear(), 0.0, 1.0, &spec).unwrap();
        let rz = z.check_invariants(&spec);
        assert_eq!(rz.osgood_quotient, 0.0);
    }
}
