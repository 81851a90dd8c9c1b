//! The explicit non-uniqueness example: a coefficient `l(t)` that is Hölder of
//! every order below one but not Osgood at `t = 0`, a nonzero solution `u`
//! vanishing on one side of `t = 0`, and the bounded lower-order terms
//! `b_1, b_2, c` built from it.
//!
//! All values are closed-form. Because `u` decays like `exp(-q_n)` and `q_n`
//! reaches `10^{10}` and beyond, evaluations return jets scaled by
//! `exp(-log_scale)`; the quotients `b_i, c` are scale free.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::smooth::{fall, ramp, Jet};

const PROFILE_SAMPLES: usize = 400_001;
const SAMPLES_PER_INTERVAL: usize = 100;
const J0_LIMIT: u64 = 1_000_000;
const WITNESS_EXPONENTS: [f64; 3] = [1.0, 2.0, 5.0];
pub const COND3_ALPHAS: [f64; 4] = [0.0, 0.25, 0.5, 0.75];
pub const OSC_EPSILONS: [f64; 3] = [0.1, 0.5, 1.0];
pub const HOLDER_ALPHAS: [f64; 3] = [0.25, 0.5, 0.75];

/// Profiles `A, B, C, J` on the unit interval, with sampled sup norms of `J'`, `J''`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BumpProfiles {
    j_prime_sup: f64,
    j_second_sup: f64,
}

impl Default for BumpProfiles {
    fn default() -> Self {
        Self::new()
    }
}

impl BumpProfiles {
    pub fn new() -> Self {
        let mut d1: f64 = 0.0;
        let mut d2: f64 = 0.0;
        for i in 0..PROFILE_SAMPLES {
            let s = i as f64 / (PROFILE_SAMPLES - 1) as f64;
            let j = Self::j(s);
            d1 = d1.max(j.d1.abs());
            d2 = d2.max(j.d2.abs());
        }
        BumpProfiles {
            j_prime_sup: d1,
            j_second_sup: d2,
        }
    }

    pub fn a(s: f64) -> Jet {
        fall(s, 0.2, 0.25)
    }

    pub fn b(s: f64) -> Jet {
        ramp(s, 0.0, 1.0 / 6.0).mul(fall(s, 0.5, 1.0))
    }

    pub fn c(s: f64) -> Jet {
        ramp(s, 0.25, 1.0 / 3.0)
    }

    pub fn j(s: f64) -> Jet {
        Jet::constant(-2.0)
            .add(ramp(s, 1.0 / 6.0, 0.2).scale(4.0))
            .add(ramp(s, 1.0 / 3.0, 0.5).scale(-4.0))
    }

    pub fn j_prime_sup(&self) -> f64 {
        self.j_prime_sup
    }

    pub fn j_second_sup(&self) -> f64 {
        self.j_second_sup
    }
}

/// Sequences `a_n, z_n, r_n, q_n, p_n`. Index `i` holds `n = i + 1`;
/// `a, z, q` run to `n = N + 1`, `r, p` to `n = N`.
#[derive(Debug, Clone)]
pub struct SequenceFamily {
    j0: u64,
    n: usize,
    a: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
    q: Vec<f64>,
    p: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthCertificate {
    /// `min_{n >= 2} q_n / (n + j0)^{7/4}`
    pub lambda_q: f64,
    /// `max_n p_n / (n + j0)^{5/4}`
    pub lambda_p: f64,
    pub q_exponent: f64,
    pub ratio_slope: f64,
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

pub fn a_exact(j0: u64, n: usize) -> f64 {
    -(-((n as f64 + j0 as f64).ln()).sqrt()).exp()
}

pub fn build_sequences(j0: u64, n: usize) -> Result<SequenceFamily> {
    if j0 < 2 {
        return Err(Error::Config(format!("j0 must be >= 2, got {j0}")));
    }
    if n < 2 {
        return Err(Error::Config(format!("N must be >= 2, got {n}")));
    }
    let a: Vec<f64> = (1..=n + 1).map(|k| a_exact(j0, k)).collect();
    let z: Vec<f64> = (1..=n + 1)
        .map(|k| (k as f64 + j0 as f64).powi(3))
        .collect();
    let r: Vec<f64> = (0..n).map(|i| a[i + 1] - a[i]).collect();
    let p: Vec<f64> = (0..n).map(|i| (z[i + 1] - z[i]) * r[i]).collect();
    if let Some(i) = p.iter().position(|&v| v <= 1.0) {
        return Err(Error::InvalidJ0 { j0, n: i + 1 });
    }
    let mut q = vec![0.0; n + 1];
    for i in 1..=n {
        q[i] = q[i - 1] + z[i] * r[i - 1];
    }
    let seq = SequenceFamily {
        j0,
        n,
        a,
        z,
        r,
        q,
        p,
    };
    seq.check_invariants()?;
    Ok(seq)
}

impl SequenceFamily {
    pub fn j0(&self) -> u64 {
        self.j0
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `a_n` for `1 <= n <= N + 1`.
    pub fn a(&self, n: usize) -> f64 {
        self.a[n - 1]
    }

    pub fn z(&self, n: usize) -> f64 {
        self.z[n - 1]
    }

    pub fn q(&self, n: usize) -> f64 {
        self.q[n - 1]
    }

    /// `r_n` for `1 <= n <= N`.
    pub fn r(&self, n: usize) -> f64 {
        self.r[n - 1]
    }

    pub fn p(&self, n: usize) -> f64 {
        self.p[n - 1]
    }

    /// `p_n / (r_n z_n)`
    pub fn ratio(&self, n: usize) -> f64 {
        self.p(n) / (self.r(n) * self.z(n))
    }

    fn check_invariants(&self) -> Result<()> {
        for i in 0..=self.n {
            let a = self.a[i];
            if !(a > -1.0 && a < 0.0) || (i > 0 && a <= self.a[i - 1]) {
                return Err(Error::Certificate(format!(
                    "a_n not increasing in (-1, 0) at n = {}",
                    i + 1
                )));
            }
            if self.z[i] <= 1.0 || (i > 0 && self.z[i] <= self.z[i - 1]) {
                return Err(Error::Certificate(format!(
                    "z_n not increasing above 1 at n = {}",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Interval index `n` with `a_n <= t < a_{n+1}`, if `a_1 <= t < a_{N+1}`.
    pub fn interval(&self, t: f64) -> Option<usize> {
        if t < self.a[0] || t >= self.a[self.n] {
            return None;
        }
        let i = self.a.partition_point(|&a| a <= t);
        Some(i)
    }

    pub fn growth_certificate(&self) -> GrowthCertificate {
        let j0 = self.j0 as f64;
        let lambda_q = (2..=self.n)
            .map(|n| self.q(n) / (n as f64 + j0).powf(1.75))
            .fold(f64::INFINITY, f64::min);
        let lambda_p = (1..=self.n)
            .map(|n| self.p(n) / (n as f64 + j0).powf(1.25))
            .fold(0.0, f64::max);
        let range: Vec<usize> = (self.n / 2..=self.n).collect();
        let xs: Vec<f64> = range.iter().map(|&n| (n as f64 + j0).ln()).collect();
        let ratio: Vec<f64> = range.iter().map(|&n| self.ratio(n).ln()).collect();
        let qs: Vec<f64> = range.iter().map(|&n| self.q(n).ln()).collect();
        GrowthCertificate {
            lambda_q,
            lambda_p,
            q_exponent: slope(&xs, &qs),
            ratio_slope: slope(&xs, &ratio),
        }
    }

    /// Log of the (cond1) witness `exp(-q_n + 2 p_n) z_{n+1}^α p_n^β r_n^{-γ}` or,
    /// with `cond1 = false`, of the (cond4) witness `exp(-p_n) z_{n+1}^α p_n^β r_n^{-γ}`.
    pub fn log_witness(&self, cond1: bool, exps: [f64; 3]) -> Vec<f64> {
        (1..=self.n)
            .map(|n| {
                let head = if cond1 {
                    -self.q(n) + 2.0 * self.p(n)
                } else {
                    -self.p(n)
                };
                head + exps[0] * self.z(n + 1).ln() + exps[1] * self.p(n).ln()
                    - exps[2] * self.r(n).ln()
            })
            .collect()
    }

    pub fn cond2_sup(&self) -> f64 {
        (1..=self.n).map(|n| self.ratio(n)).fold(0.0, f64::max)
    }

    pub fn cond3_sup(&self, alpha: f64) -> f64 {
        (1..=self.n)
            .map(|n| self.p(n) * self.r(n).powf(-1.0 - alpha) / self.z(n))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessRow {
    pub condition: &'static str,
    pub exponents: [f64; 3],
    pub peak_n: usize,
    pub log10_decay: f64,
    pub monotone_after_peak: bool,
    pub pass: bool,
}

pub fn witness_table(seq: &SequenceFamily) -> Vec<WitnessRow> {
    let mut rows = Vec::new();
    for (cond1, name) in [(true, "cond1"), (false, "cond4")] {
        for &al in &WITNESS_EXPONENTS {
            for &be in &WITNESS_EXPONENTS {
                for &ga in &WITNESS_EXPONENTS {
                    let exps = [al, be, ga];
                    let w = seq.log_witness(cond1, exps);
                    let (peak, max) =
                        w.iter()
                            .enumerate()
                            .fold(
                                (0, f64::NEG_INFINITY),
                                |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
                            );
                    let monotone = w[peak..].windows(2).all(|p| p[1] < p[0]);
                    let log10_decay = (w[w.len() - 1] - max) / std::f64::consts::LN_10;
                    rows.push(WitnessRow {
                        condition: name,
                        exponents: exps,
                        peak_n: peak + 1,
                        log10_decay,
                        monotone_after_peak: monotone,
                        pass: monotone && log10_decay <= -6.0,
                    });
                }
            }
        }
    }
    rows
}

/// Smallest `j0 >= 2` for which (seq p), (cond2) and the witness decay hold up to `N`.
pub fn choose_j0(n: usize) -> Result<u64> {
    if n < 100 {
        return Err(Error::Config(format!("choose_j0 needs N >= 100, got {n}")));
    }
    let bound = 0.5 / BumpProfiles::new().j_prime_sup();
    for j0 in 2..=J0_LIMIT {
        // cheap screen on the first interval, where the ratio is largest
        let (a1, a2) = (a_exact(j0, 1), a_exact(j0, 2));
        let (z1, z2) = ((1.0 + j0 as f64).powi(3), (2.0 + j0 as f64).powi(3));
        let p1 = (z2 - z1) * (a2 - a1);
        if p1 <= 1.0 || p1 / ((a2 - a1) * z1) > bound {
            continue;
        }
        let seq = match build_sequences(j0, n) {
            Ok(s) => s,
            Err(Error::InvalidJ0 { .. }) => continue,
            Err(e) => return Err(e),
        };
        if seq.cond2_sup() <= bound && witness_table(&seq).iter().all(|w| w.pass) {
            return Ok(j0);
        }
    }
    Err(Error::Search(format!(
        "no admissible j0 <= {J0_LIMIT} for N = {n}"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `u` vanishes for `t >= 0`.
    Backward,
    /// After `t -> -t`: `u` vanishes for `t <= 0`.
    Forward,
}

#[derive(Debug, Clone)]
pub struct CounterexampleData {
    seq: SequenceFamily,
    bumps: BumpProfiles,
    orientation: Orientation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Zero,
    Initial,
    Interval(usize),
    /// Past `a_{N+1}`: treated as zero, with `ln |u| <=` the stored bound.
    Tail(f64),
}

/// `u` and its derivatives, all scaled by `exp(-log_scale)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolutionJet {
    pub u: f64,
    pub u_t: f64,
    pub u_x1: f64,
    pub u_x2: f64,
    pub u_x1x1: f64,
    pub u_x2x2: f64,
    pub log_scale: f64,
    pub branch: Branch,
    /// `Lu` from the profile derivatives alone (same scaling).
    lu_closed: f64,
    /// `ln sup_x |u|` bound from the triangle inequality.
    log_sup_bound: f64,
}

impl SolutionJet {
    fn zero(branch: Branch) -> Self {
        SolutionJet {
            u: 0.0,
            u_t: 0.0,
            u_x1: 0.0,
            u_x2: 0.0,
            u_x1x1: 0.0,
            u_x2x2: 0.0,
            log_scale: 0.0,
            branch,
            lu_closed: 0.0,
            log_sup_bound: f64::NEG_INFINITY,
        }
    }

    /// Unscaled `(u, u_t, u_x1, u_x2, u_x1x1, u_x2x2)`; underflows to zero deep in the support.
    pub fn values(&self) -> [f64; 6] {
        let e = self.log_scale.exp();
        [
            self.u,
            self.u_t,
            self.u_x1,
            self.u_x2,
            self.u_x1x1,
            self.u_x2x2,
        ]
        .map(|v| v * e)
    }

    pub fn log_sup_bound(&self) -> f64 {
        self.log_sup_bound
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LowerOrder {
    pub b1: f64,
    pub b2: f64,
    pub c: f64,
    /// `|Lu + b.grad u + c u|` relative to `|u_t| + |u_x1x1| + l |u_x2x2|`.
    pub residual: f64,
    /// `u^2 + |grad u|^2 = 0` at an interior point.
    pub degenerate: bool,
}

pub fn build(j0: Option<u64>, n: usize) -> Result<CounterexampleData> {
    let j0 = match j0 {
        Some(j) => j,
        None => choose_j0(n)?,
    };
    Ok(CounterexampleData {
        seq: build_sequences(j0, n)?,
        bumps: BumpProfiles::new(),
        orientation: Orientation::Backward,
    })
}

pub fn flip_time(data: &CounterexampleData) -> CounterexampleData {
    let orientation = match data.orientation {
        Orientation::Backward => Orientation::Forward,
        Orientation::Forward => Orientation::Backward,
    };
    CounterexampleData {
        orientation,
        ..data.clone()
    }
}

impl CounterexampleData {
    pub fn sequences(&self) -> &SequenceFamily {
        &self.seq
    }

    pub fn bumps(&self) -> &BumpProfiles {
        &self.bumps
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    fn native_time(&self, t: f64) -> f64 {
        match self.orientation {
            Orientation::Backward => t,
            Orientation::Forward => -t,
        }
    }

    fn time_sign(&self) -> f64 {
        match self.orientation {
            Orientation::Backward => 1.0,
            Orientation::Forward => -1.0,
        }
    }

    fn native_jet(&self, t: f64, x1: f64, x2: f64) -> SolutionJet {
        let seq = &self.seq;
        if t >= 0.0 {
            return SolutionJet::zero(Branch::Zero);
        }
        if t < seq.a(1) {
            let z = seq.z(1);
            let k = z.sqrt();
            let (sn, cs) = (k * x1).sin_cos();
            let log_scale = -z * (t - seq.a(1));
            return SolutionJet {
                u: cs,
                u_t: -z * cs,
                u_x1: -k * sn,
                u_x2: 0.0,
                u_x1x1: -z * cs,
                u_x2x2: 0.0,
                log_scale,
                branch: Branch::Initial,
                lu_closed: 0.0,
                log_sup_bound: log_scale,
            };
        }
        match seq.interval(t) {
            Some(n) => self.interval_jet(n, t, x1, x2),
            None => {
                let n = seq.len();
                SolutionJet::zero(Branch::Tail(-seq.q(n) + 2.0 * seq.p(n) + 3f64.ln()))
            }
        }
    }

    fn interval_jet(&self, n: usize, t: f64, x1: f64, x2: f64) -> SolutionJet {
        let seq = &self.seq;
        let (an, rn, zn, zn1, pn) = (seq.a(n), seq.r(n), seq.z(n), seq.z(n + 1), seq.p(n));
        let s = ((t - an) / rn).clamp(0.0, 1.0);
        let jp = BumpProfiles::j(s);
        // (profile, exponent relative to -q_n - z_n (t - a_n), exponent rate, z, axis)
        let terms = [
            (BumpProfiles::a(s), 0.0, -zn, zn, 0),
            (
                BumpProfiles::b(s),
                jp.value * pn,
                -zn + jp.d1 * pn / rn,
                zn,
                1,
            ),
            (BumpProfiles::c(s), -pn * s, -zn1, zn1, 0),
        ];
        let active = |p: &Jet| p.value != 0.0 || p.d1 != 0.0;
        let m = terms
            .iter()
            .filter(|t| active(&t.0))
            .map(|t| t.1)
            .fold(f64::NEG_INFINITY, f64::max);
        let base = -seq.q(n) - zn * (t - an);
        let mut jet = SolutionJet::zero(Branch::Interval(n));
        jet.log_scale = base + m;
        let mut sup = 0.0;
        for (prof, e, k, z, axis) in terms {
            if !active(&prof) {
                continue;
            }
            let w = (e - m).exp();
            let root = z.sqrt();
            let (sn, cs) = (root * if axis == 0 { x1 } else { x2 }).sin_cos();
            let pw = prof.value * w;
            jet.u += pw * cs;
            jet.u_t += (prof.d1 / rn + prof.value * k) * w * cs;
            jet.lu_closed += prof.d1 / rn * w * cs;
            if axis == 0 {
                jet.u_x1 += -root * pw * sn;
                jet.u_x1x1 += -z * pw * cs;
            } else {
                jet.u_x2 += -root * pw * sn;
                jet.u_x2x2 += -z * pw * cs;
            }
            sup += pw.abs();
        }
        jet.log_sup_bound = jet.log_scale + sup.ln();
        jet
    }

    fn native_l(&self, t: f64) -> (f64, f64) {
        let seq = &self.seq;
        match seq.interval(t) {
            None => (1.0, 0.0),
            Some(n) => {
                let (an, rn) = (seq.a(n), seq.r(n));
                let j = BumpProfiles::j(((t - an) / rn).clamp(0.0, 1.0));
                let k = seq.p(n) / (rn * seq.z(n));
                (1.0 - j.d1 * k, -j.d2 * k / rn)
            }
        }
    }
}

/// `u` and its first and second derivatives at `(t, x1, x2)` in the data's orientation.
pub fn eval_solution(data: &CounterexampleData, t: f64, x1: f64, x2: f64) -> SolutionJet {
    let mut jet = data.native_jet(data.native_time(t), x1, x2);
    jet.u_t *= data.time_sign();
    jet.lu_closed *= data.time_sign();
    jet
}

/// `(l(t), l'(t))` in the data's orientation.
pub fn eval_l(data: &CounterexampleData, t: f64) -> (f64, f64) {
    let (l, dl) = data.native_l(data.native_time(t));
    (l, data.time_sign() * dl)
}

/// `(b_1, b_2, c)` at `(t, x1, x2)`. In the forward orientation these belong to
/// `d_t + d_1^2 + l d_2^2 + b.grad + c`; in the backward one to `d_t - d_1^2 - l d_2^2 + b.grad + c`.
pub fn eval_lower_order(data: &CounterexampleData, t: f64, x1: f64, x2: f64) -> LowerOrder {
    let tn = data.native_time(t);
    let jet = data.native_jet(tn, x1, x2);
    let (l, _) = data.native_l(tn);
    let d = jet.u * jet.u + jet.u_x1 * jet.u_x1 + jet.u_x2 * jet.u_x2;
    let interior = matches!(jet.branch, Branch::Interval(_) | Branch::Initial);
    if d == 0.0 {
        return LowerOrder {
            b1: 0.0,
            b2: 0.0,
            c: 0.0,
            residual: 0.0,
            degenerate: interior,
        };
    }
    let f = -jet.lu_closed / d;
    let (b1, b2, c) = (f * jet.u_x1, f * jet.u_x2, f * jet.u);
    let lu = jet.u_t - jet.u_x1x1 - l * jet.u_x2x2;
    let scale = jet.u_t.abs() + jet.u_x1x1.abs() + l * jet.u_x2x2.abs();
    let residual = (lu + b1 * jet.u_x1 + b2 * jet.u_x2 + c * jet.u).abs() / scale;
    let sg = data.time_sign();
    LowerOrder {
        b1: sg * b1,
        b2: sg * b2,
        c: sg * c,
        residual,
        degenerate: false,
    }
}

fn drift(a: f64, b: f64) -> f64 {
    (b - a).abs() / a.abs()
}

#[derive(Debug, Clone, Serialize)]
pub struct SupDrift {
    pub label: String,
    pub value: f64,
    pub value_doubled: f64,
    pub drift: f64,
}

impl SupDrift {
    fn new(label: String, value: f64, value_doubled: f64) -> Self {
        SupDrift {
            label,
            value,
            value_doubled,
            drift: drift(value, value_doubled),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SampledL {
    pub l_min: f64,
    pub l_max: f64,
    /// `max |l'| / (||J''|| p_n r_n^{-2} z_n^{-1})`
    pub l_prime_bound_ratio: f64,
    pub osc: f64,
    pub c_eps: [f64; 3],
    pub holder: [f64; 3],
}

fn sample_l(data: &CounterexampleData) -> SampledL {
    let seq = &data.seq;
    let j2 = data.bumps.j_second_sup();
    let per: Vec<SampledL> = (1..=seq.len())
        .into_par_iter()
        .map(|n| {
            let (an, rn) = (seq.a(n), seq.r(n));
            let bound = j2 * seq.p(n) / (rn * rn * seq.z(n));
            let mut out = SampledL {
                l_min: f64::INFINITY,
                l_max: f64::NEG_INFINITY,
                l_prime_bound_ratio: 0.0,
                osc: 0.0,
                c_eps: [0.0; 3],
                holder: [0.0; 3],
            };
            let (mut lo, mut hi) = ((f64::INFINITY, 0.0), (f64::NEG_INFINITY, 0.0));
            for k in 0..SAMPLES_PER_INTERVAL {
                let t = an + rn * k as f64 / (SAMPLES_PER_INTERVAL - 1) as f64;
                let (l, dl) = data.native_l(t.min(seq.a(n + 1) - f64::EPSILON * t.abs()));
                out.l_min = out.l_min.min(l);
                out.l_max = out.l_max.max(l);
                out.l_prime_bound_ratio = out.l_prime_bound_ratio.max(dl.abs() / bound);
                let at = t.abs();
                out.osc = out.osc.max(at / (1.0 + at.ln().abs()) * dl.abs());
                for (c, e) in out.c_eps.iter_mut().zip(OSC_EPSILONS) {
                    *c = f64::max(*c, dl.abs() * at.powf(1.0 + e));
                }
                if l < lo.0 {
                    lo = (l, t);
                }
                if l > hi.0 {
                    hi = (l, t);
                }
            }
            if hi.1 != lo.1 {
                for (h, a) in out.holder.iter_mut().zip(HOLDER_ALPHAS) {
                    *h = (hi.0 - lo.0) / (hi.1 - lo.1).abs().powf(a);
                }
            }
            out
        })
        .collect();
    per.into_iter()
        .reduce(|a, b| SampledL {
            l_min: a.l_min.min(b.l_min),
            l_max: a.l_max.max(b.l_max),
            l_prime_bound_ratio: a.l_prime_bound_ratio.max(b.l_prime_bound_ratio),
            osc: a.osc.max(b.osc),
            c_eps: std::array::from_fn(|i| a.c_eps[i].max(b.c_eps[i])),
            holder: std::array::from_fn(|i| a.holder[i].max(b.holder[i])),
        })
        .expect("N >= 2")
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualSweep {
    pub points: usize,
    pub max_residual: f64,
    pub degenerate: usize,
    pub sup_b1: f64,
    pub sup_b2: f64,
    pub sup_c: f64,
}

/// Residual of the equation at `points` random points spread over the realized intervals.
pub fn residual_sweep(data: &CounterexampleData, points: usize, seed: u64) -> ResidualSweep {
    let seq = &data.seq;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<(f64, f64, f64)> = (0..points)
        .map(|i| {
            let t = if i % 10 == 0 {
                seq.a(1) - rng.random::<f64>() * seq.r(1)
            } else {
                let n = rng.random_range(1..=seq.len());
                seq.a(n) + rng.random::<f64>() * seq.r(n)
            };
            let x1 = rng.random::<f64>() * std::f64::consts::TAU;
            let x2 = rng.random::<f64>() * std::f64::consts::TAU;
            (data.native_time(t), x1, x2)
        })
        .collect();
    let rows: Vec<LowerOrder> = samples
        .par_iter()
        .map(|&(t, x1, x2)| eval_lower_order(data, t, x1, x2))
        .collect();
    ResidualSweep {
        points,
        max_residual: rows.iter().map(|r| r.residual).fold(0.0, f64::max),
        degenerate: rows.iter().filter(|r| r.degenerate).count(),
        sup_b1: rows.iter().map(|r| r.b1.abs()).fold(0.0, f64::max),
        sup_b2: rows.iter().map(|r| r.b2.abs()).fold(0.0, f64::max),
        sup_c: rows.iter().map(|r| r.c.abs()).fold(0.0, f64::max),
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VanishingCertificate {
    pub power: f64,
    /// `|t|` up to which the bound is certified: `|a_{N/2}|`.
    pub t_max: f64,
    /// `min (power ln|t| - ln sup_x |u(t)|)` over sampled `t`.
    pub sampled_margin: f64,
    /// `min_n (power ln|a_{n+1}| - ln(3 e^{-q_n + 2 p_n}))` over `N/2 <= n <= N`.
    pub interval_margin: f64,
    /// The interval margin increases with `n`, so it stays positive past `N`.
    pub margin_increasing: bool,
    pub pass: bool,
}

pub fn vanishing_certificate(data: &CounterexampleData, power: f64) -> VanishingCertificate {
    let seq = &data.seq;
    let start = (seq.len() / 2).max(1);
    let sampled = (start..=seq.len())
        .into_par_iter()
        .map(|n| {
            let mut m = f64::INFINITY;
            for k in 0..SAMPLES_PER_INTERVAL {
                let t = seq.a(n) + seq.r(n) * k as f64 / SAMPLES_PER_INTERVAL as f64;
                let jet = data.interval_jet(n, t, 0.0, 0.0);
                m = m.min(power * t.abs().ln() - jet.log_sup_bound);
            }
            m
        })
        .reduce(|| f64::INFINITY, f64::min);
    let margins: Vec<f64> = (start..=seq.len())
        .map(|n| power * seq.a(n + 1).abs().ln() + seq.q(n) - 2.0 * seq.p(n) - 3f64.ln())
        .collect();
    let interval_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let margin_increasing = margins.windows(2).all(|w| w[1] > w[0]);
    VanishingCertificate {
        power,
        t_max: seq.a(start).abs(),
        sampled_margin: sampled,
        interval_margin,
        margin_increasing,
        pass: sampled >= 0.0 && interval_margin >= 0.0 && margin_increasing,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub j0: u64,
    pub n: usize,
    pub j_prime_sup: f64,
    pub j_second_sup: f64,
    pub growth: GrowthCertificate,
    pub witnesses: Vec<WitnessRow>,
    pub cond2_bound: f64,
    pub cond2: SupDrift,
    pub cond3: Vec<SupDrift>,
    pub osc1: SupDrift,
    pub c_eps: Vec<SupDrift>,
    pub holder: Vec<SupDrift>,
    pub sampled_l: SampledL,
    pub residual: ResidualSweep,
    pub vanishing: VanishingCertificate,
}

impl ConditionReport {
    pub fn witnesses_pass(&self) -> bool {
        self.witnesses.iter().all(|w| w.pass)
    }
}

/// Sequence conditions, sampled `l` bounds, residual sweep and vanishing
/// certificate; suprema are recomputed at `2N` for their drift.
pub fn verify_conditions(data: &CounterexampleData) -> Result<ConditionReport> {
    let seq = &data.seq;
    if seq.len() < 1000 {
        return Err(Error::Precondition(format!(
            "verify_conditions needs N >= 1000, got {}",
            seq.len()
        )));
    }
    let doubled = CounterexampleData {
        seq: build_sequences(seq.j0(), 2 * seq.len())?,
        bumps: data.bumps,
        orientation: Orientation::Backward,
    };
    let native = CounterexampleData {
        orientation: Orientation::Backward,
        ..data.clone()
    };
    let l1 = sample_l(&native);
    let l2 = sample_l(&doubled);
    let cond3 = COND3_ALPHAS
        .iter()
        .map(|&al| {
            SupDrift::new(
                format!("alpha={al}"),
                seq.cond3_sup(al),
                doubled.seq.cond3_sup(al),
            )
        })
        .collect();
    let c_eps = OSC_EPSILONS
        .iter()
        .enumerate()
        .map(|(i, e)| SupDrift::new(format!("eps={e}"), l1.c_eps[i], l2.c_eps[i]))
        .collect();
    let holder = HOLDER_ALPHAS
        .iter()
        .enumerate()
        .map(|(i, a)| SupDrift::new(format!("alpha={a}"), l1.holder[i], l2.holder[i]))
        .collect();
    Ok(ConditionReport {
        j0: seq.j0(),
        n: seq.len(),
        j_prime_sup: data.bumps.j_prime_sup(),
        j_second_sup: data.bumps.j_second_sup(),
        growth: seq.growth_certificate(),
        witnesses: witness_table(seq),
        cond2_bound: 0.5 / data.bumps.j_prime_sup(),
        cond2: SupDrift::new("cond2".into(), seq.cond2_sup(), doubled.seq.cond2_sup()),
        cond3,
        osc1: SupDrift::new("osc1".into(), l1.osc, l2.osc),
        c_eps,
        holder,
        sampled_l: l1,
        residual: residual_sweep(&native, 10_000, seq.j0()),
        vanishing: vanishing_certificate(&native, 5.0),
    })
}

#[derive(Debug, Clone, Copy, Serialize, serde::Deserialize, PartialEq)]
pub struct GridRow {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    /// `u` scaled by `exp(-log_scale)`.
    pub u: f64,
    pub log_scale: f64,
    pub l: f64,
    pub b1: f64,
    pub b2: f64,
    pub c: f64,
}

/// Tensor grid of values in the data's orientation.
pub fn emit_grid(
    data: &CounterexampleData,
    times: &[f64],
    x1s: &[f64],
    x2s: &[f64],
) -> Vec<GridRow> {
    let mut rows = Vec::with_capacity(times.len() * x1s.len() * x2s.len());
    for &t in times {
        let (l, _) = eval_l(data, t);
        for &x1 in x1s {
            for &x2 in x2s {
                let jet = eval_solution(data, t, x1, x2);
                let lo = eval_lower_order(data, t, x1, x2);
                rows.push(GridRow {
                    t,
                    x1,
                    x2,
                    u: jet.u,
                    log_scale: jet.log_scale,
                    l,
                    b1: lo.b1,
                    b2: lo.b2,
                    c: lo.c,
                });
            }
        }
    }
    rows
}

/// Default plotting grid: forward times at `s = k/8` on the first `intervals` intervals.
pub fn default_grid(data: &CounterexampleData, intervals: usize) -> Vec<GridRow> {
    let seq = &data.seq;
    let mut times = Vec::new();
    for n in 1..=intervals.min(seq.len()) {
        for k in 0..8 {
            let t = seq.a(n) + seq.r(n) * k as f64 / 8.0;
            times.push(data.time_sign() * t);
        }
    }
    let xs: Vec<f64> = (0..4).map(|k| k as f64 * 0.4).collect();
    emit_grid(data, &times, &xs, &xs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CounterexampleData {
        build(Some(1440), 2000).unwrap()
    }

    #[test]
    fn profile_plateaus() {
        for s in [-1.0, 0.0, 0.1, 0.2] {
            assert_eq!(BumpProfiles::a(s).value, 1.0);
        }
        assert_eq!(BumpProfiles::a(0.25).value, 0.0);
        for s in [1.0 / 6.0, 0.3, 0.5] {
            assert!((BumpProfiles::b(s).value - 1.0).abs() < 1e-15);
        }
        assert_eq!(BumpProfiles::b(0.0).value, 0.0);
        assert_eq!(BumpProfiles::b(1.0).value, 0.0);
        assert_eq!(BumpProfiles::c(0.25).value, 0.0);
        assert_eq!(BumpProfiles::c(1.0 / 3.0).value, 1.0);
        assert_eq!(BumpProfiles::j(0.1).value, -2.0);
        assert_eq!(BumpProfiles::j(0.25).value, 2.0);
        assert_eq!(BumpProfiles::j(0.6).value, -2.0);
        let b = BumpProfiles::new();
        assert!((b.j_prime_sup() - 240.0).abs() < 1e-6);
    }

    #[test]
    fn sequence_definitions() {
        let seq = build_sequences(1440, 1000).unwrap();
        assert_eq!(seq.q(1), 0.0);
        let direct = (-((1000.0f64 + 1440.0).ln()).sqrt()).exp();
        assert!((seq.a(1000).abs() - direct).abs() / direct < 1e-14);
        assert!(build_sequences(2, 100).unwrap().p(1) > 1.0);
        assert!(build_sequences(1, 100).is_err());
    }

    #[test]
    fn branches() {
        let d = small();
        let seq = d.sequences();
        let j = eval_solution(&d, 0.01, 0.3, 0.2);
        assert_eq!(j.values(), [0.0; 6]);
        let t = seq.a(1) - 1e-7;
        let j = eval_solution(&d, t, 0.3, 0.2);
        let z = seq.z(1);
        let exact = (-z * (t - seq.a(1))).exp() * (z.sqrt() * 0.3).cos();
        assert!((j.values()[0] - exact).abs() <= 1e-14 * exact.abs());
        assert_eq!(eval_l(&d, t), (1.0, 0.0));
        assert_eq!(eval_l(&d, 0.0), (1.0, 0.0));
    }

    #[test]
    fn assembly_from_pieces() {
        let d = small();
        let seq = d.sequences();
        let (x1, x2) = (0.37, 1.21);
        for n in [1, 7, 500, 1999] {
            let t = seq.a(n) + seq.r(n) / 6.0;
            let jet = eval_solution(&d, t, x1, x2);
            // A = B = 1, C = 0 here; pieces relative to exp(-q_n - z_n (t - a_n))
            let base = -seq.q(n) - seq.z(n) * (t - seq.a(n));
            let v = (seq.z(n).sqrt() * x1).cos();
            let w = (-2.0 * seq.p(n)).exp() * (seq.z(n).sqrt() * x2).cos();
            let got = jet.u * (jet.log_scale - base).exp();
            assert!(
                (got - (v + w)).abs() <= 1e-12 * (v.abs() + w.abs()),
                "n = {n}"
            );
        }
    }

    #[test]
    fn junction_continuity() {
        let d = small();
        let seq = d.sequences();
        for n in [2, 50, 1500] {
            let left = d.interval_jet(n - 1, seq.a(n), 0.4, 0.9);
            let right = d.interval_jet(n, seq.a(n), 0.4, 0.9);
            let shift = (left.log_scale - right.log_scale).exp();
            for (a, b) in [
                (left.u, right.u),
                (left.u_t, right.u_t),
                (left.u_x1, right.u_x1),
                (left.u_x2, right.u_x2),
            ] {
                assert!(
                    (a * shift - b).abs() <= 1e-12 * (b.abs() + right.u_t.abs() * 1e-12 + 1e-300),
                    "n = {n}"
                );
            }
        }
    }

    #[test]
    fn flip_is_involution() {
        let d = small();
        let f = flip_time(&d);
        assert_eq!(f.orientation(), Orientation::Forward);
        assert_eq!(flip_time(&f).orientation(), Orientation::Backward);
        let seq = d.sequences();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let n = rng.random_range(1..=seq.len());
            let t = seq.a(n) + rng.random::<f64>() * seq.r(n);
            let a = eval_solution(&d, t, 0.5, 0.25);
            let b = eval_solution(&f, -t, 0.5, 0.25);
            assert_eq!(a.u, b.u);
            assert_eq!(a.u_t, -b.u_t);
            let la = eval_lower_order(&d, t, 0.5, 0.25);
            let lb = eval_lower_order(&f, -t, 0.5, 0.25);
            assert_eq!(la.b1, -lb.b1);
            assert_eq!(la.c, -lb.c);
            assert_eq!(eval_l(&d, t).0, eval_l(&f, -t).0);
        }
        assert_eq!(eval_solution(&f, -0.01, 0.1, 0.1).values(), [0.0; 6]);
    }

    #[test]
    fn residual_and_ellipticity() {
        let d = small();
        let sweep = residual_sweep(&d, 2000, 1);
        assert!(sweep.max_residual <= 1e-10, "{}", sweep.max_residual);
        assert_eq!(sweep.degenerate, 0);
        let l = sample_l(&d);
        assert!(l.l_min >= 0.5 && l.l_max <= 1.5);
        assert!(l.l_prime_bound_ratio <= 1.0 + 1e-6);
    }
}
