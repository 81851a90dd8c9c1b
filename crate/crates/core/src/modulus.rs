//! Moduli of continuity and the Osgood condition.
//!
//! Most quantities are evaluated through `x = -ln s`, where the Osgood
//! integrand becomes `1 / r(x)` with `r(x) = e^x mu(e^{-x}) = sigma mu(1/sigma)`,
//! `sigma = e^x`. This keeps scales like `s = 2^{-2^60}` representable.

use std::f64::consts::{E, LN_2};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_kronrod;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModulusKind {
    /// `mu(s) = s`
    Linear,
    /// `mu(s) = s log(e + 1/s - 1)`
    Log,
    /// `mu(s) = sqrt(s)`
    Sqrt,
    /// `mu(s) = s^a`, `0 < a <= 1`
    Holder(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusOfContinuity {
    kind: ModulusKind,
}

impl fmt::Display for ModulusOfContinuity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl ModulusOfContinuity {
    pub fn new(kind: ModulusKind) -> Result<Self> {
        if let ModulusKind::Holder(a) = kind {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::Config(format!(
                    "holder exponent must lie in (0, 1], got {a}"
                )));
            }
        }
        Ok(ModulusOfContinuity { kind })
    }

    pub fn linear() -> Self {
        ModulusOfContinuity {
            kind: ModulusKind::Linear,
        }
    }

    pub fn log() -> Self {
        ModulusOfContinuity {
            kind: ModulusKind::Log,
        }
    }

    pub fn sqrt() -> Self {
        ModulusOfContinuity {
            kind: ModulusKind::Sqrt,
        }
    }

    /// Parses a registry name: `linear`, `log`, `sqrt` or `holder:a`.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "linear" => Ok(Self::linear()),
            "log" => Ok(Self::log()),
            "sqrt" => Ok(Self::sqrt()),
            other => {
                if let Some(a) = other.strip_prefix("holder:") {
                    let a: f64 = a
                        .parse()
                        .map_err(|_| Error::Config(format!("bad holder exponent in {other:?}")))?;
                    Self::new(ModulusKind::Holder(a))
                } else {
                    Err(Error::Config(format!("unknown modulus {other:?}")))
                }
            }
        }
    }

    /// The four registry members used by the suites.
    pub fn registry() -> Vec<Self> {
        vec![
            Self::linear(),
            Self::log(),
            Self::sqrt(),
            ModulusOfContinuity {
                kind: ModulusKind::Holder(0.5),
            },
        ]
    }

    pub fn kind(&self) -> ModulusKind {
        self.kind
    }

    pub fn name(&self) -> String {
        match self.kind {
            ModulusKind::Linear => "linear".into(),
            ModulusKind::Log => "log".into(),
            ModulusKind::Sqrt => "sqrt".into(),
            ModulusKind::Holder(a) => format!("holder:{a}"),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match self.kind {
            ModulusKind::Linear => s,
            ModulusKind::Log => s * (E + 1.0 / s - 1.0).ln(),
            ModulusKind::Sqrt => s.sqrt(),
            ModulusKind::Holder(a) => s.powf(a),
        }
    }

    /// `r(x) = e^x mu(e^{-x})` for `x >= 0`.
    pub fn ratio_log(&self, x: f64) -> f64 {
        match self.kind {
            ModulusKind::Linear => 1.0,
            ModulusKind::Log => {
                if x > 30.0 {
                    x + ((E - 1.0) * (-x).exp()).ln_1p()
                } else {
                    (E - 1.0 + x.exp()).ln()
                }
            }
            ModulusKind::Sqrt => (0.5 * x).exp(),
            ModulusKind::Holder(a) => ((1.0 - a) * x).exp(),
        }
    }

    /// `sigma mu(1/sigma)` for `sigma >= 1`.
    pub fn sigma_mu(&self, sigma: f64) -> f64 {
        self.ratio_log(sigma.ln())
    }

    /// `int_lower^1 ds / mu(s)` where a closed form exists.
    pub fn closed_form_integral(&self, lower: f64) -> Option<f64> {
        match self.kind {
            ModulusKind::Linear => Some(-lower.ln()),
            ModulusKind::Sqrt => Some(2.0 * (1.0 - lower.sqrt())),
            ModulusKind::Holder(a) if a < 1.0 => Some((1.0 - lower.powf(1.0 - a)) / (1.0 - a)),
            ModulusKind::Holder(_) => Some(-lower.ln()),
            ModulusKind::Log => None,
        }
    }

    /// `int_{x0}^{x1} dx / r(x)`, i.e. `int_{e^{-x1}}^{e^{-x0}} ds / mu(s)`.
    pub fn log_integral(&self, x0: f64, x1: f64) -> f64 {
        if x1 <= x0 {
            return 0.0;
        }
        if x0 > 0.0 && x1 / x0 > 4.0 {
            // geometric panels in x: integrate in y = ln x
            let (y0, y1) = (x0.ln(), x1.ln());
            let f = |y: f64| {
                let x = y.exp();
                x / self.ratio_log(x)
            };
            return gauss_kronrod(f, y0, y1, 1e-13, 0.0).value;
        }
        gauss_kronrod(|x| 1.0 / self.ratio_log(x), x0, x1, 1e-13, 0.0).value
    }
}

/// `int_lower^1 ds / mu(s)` by Gauss-Kronrod on the geometric panels `[2^{-k-1}, 2^{-k}]`.
pub fn osgood_integral(mu: &ModulusOfContinuity, lower: f64) -> Result<f64> {
    if !(lower > 0.0) || lower > 1.0 {
        return Err(Error::Domain(format!(
            "lower limit must lie in (0, 1], got {lower}"
        )));
    }
    let big_x = -lower.ln();
    let panels = (big_x / LN_2).ceil() as usize;
    let mut total = 0.0;
    for k in 0..panels {
        let a = k as f64 * LN_2;
        let b = ((k + 1) as f64 * LN_2).min(big_x);
        total += gauss_kronrod(|x| 1.0 / mu.ratio_log(x), a, b, 1e-13, 0.0).value;
    }
    Ok(total)
}

/// Divergence test for `int_0^1 ds / mu(s)`.
///
/// Uses the increments `D_k = int_{l_k}^{l_{k-1}} ds / mu` over the doubly
/// dyadic scales `l_k = 2^{-2^k}`, `k = 1..60`, and declares divergence when
/// each of the last 10 increments exceeds half of its predecessor.
pub fn is_osgood(mu: &ModulusOfContinuity) -> bool {
    osgood_increment_ratios(mu)
        .iter()
        .rev()
        .take(10)
        .all(|r| *r > 0.5)
}

/// The ratios `D_k / D_{k-1}`, `k = 2..60`, behind [`is_osgood`].
pub fn osgood_increment_ratios(mu: &ModulusOfContinuity) -> Vec<f64> {
    let x = |k: i32| 2f64.powi(k) * LN_2;
    let inc: Vec<f64> = (1..=60).map(|k| mu.log_integral(x(k - 1), x(k))).collect();
    inc.windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
        .collect()
}

/// Worst violations of the modulus invariants on sample grids.
#[derive(Debug, Clone, Serialize)]
pub struct ModulusInvariants {
    pub name: String,
    pub endpoint_error: f64,
    /// `max (s - mu(s))`, should be `<= 0`.
    pub below_identity: f64,
    /// largest increase of `mu(s)/s` between consecutive samples.
    pub ratio_increase: f64,
    /// largest `(mu(s1)+mu(s2))/2 - mu((s1+s2)/2)`.
    pub concavity_defect: f64,
    /// largest decrease of `sigma mu(1/sigma)` on `[1, 1e6]`.
    pub sigma_mu_decrease: f64,
    /// largest increase of `1/(sigma^2 mu(1/sigma))` on `[1, 1e6]`.
    pub phi_prime_increase: f64,
    pub holds: bool,
}

pub fn check_invariants(mu: &ModulusOfContinuity, samples: usize) -> ModulusInvariants {
    let tol = 1e-12;
    let s: Vec<f64> = (0..=samples).map(|i| i as f64 / samples as f64).collect();
    let endpoint_error = mu.eval(0.0).abs().max((mu.eval(1.0) - 1.0).abs());
    let below_identity = s.iter().map(|&x| x - mu.eval(x)).fold(f64::MIN, f64::max);
    let ratio: Vec<f64> = s[1..].iter().map(|&x| mu.eval(x) / x).collect();
    let ratio_increase = ratio
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0])
        .fold(f64::MIN, f64::max);
    let mut concavity_defect = f64::MIN;
    let mut gap = 1;
    while gap < samples {
        for i in (0..=samples - gap).step_by(gap.max(1)) {
            let (a, b) = (s[i], s[i + gap]);
            let d = 0.5 * (mu.eval(a) + mu.eval(b)) - mu.eval(0.5 * (a + b));
            concavity_defect = concavity_defect.max(d);
        }
        gap *= 2;
    }
    let sig: Vec<f64> = (0..=samples)
        .map(|i| 10f64.powf(6.0 * i as f64 / samples as f64))
        .collect();
    let sm: Vec<f64> = sig.iter().map(|&x| mu.sigma_mu(x)).collect();
    let sigma_mu_decrease = sm
        .windows(2)
        .map(|w| (w[0] - w[1]) / w[0])
        .fold(f64::MIN, f64::max);
    let pp: Vec<f64> = sig.iter().zip(&sm).map(|(x, m)| 1.0 / (x * m)).collect();
    let phi_prime_increase = pp
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0])
        .fold(f64::MIN, f64::max);
    let holds = endpoint_error <= tol
        && below_identity <= tol
        && ratio_increase <= tol
        && concavity_defect <= tol
        && sigma_mu_decrease <= tol
        && phi_prime_increase <= tol;
    ModulusInvariants {
        name: mu.name(),
        endpoint_error,
        below_identity,
        ratio_increase,
        concavity_defect,
        sigma_mu_decrease,
        phi_prime_increase,
        holds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_registry_names() {
        for m in ModulusOfContinuity::registry() {
            assert_eq!(ModulusOfContinuity::parse(&m.name()).unwrap(), m);
        }
        assert!(ModulusOfContinuity::parse("holder:1.5").is_err());
        assert!(ModulusOfContinuity::parse("nope").is_err());
    }

    #[test]
    fn ratio_log_matches_definition() {
        for m in ModulusOfContinuity::registry() {
            for x in [0.0f64, 0.3, 2.0, 10.0, 35.0] {
                let direct = x.exp() * m.eval((-x).exp());
                assert!(
                    (m.ratio_log(x) - direct).abs() < 1e-12 * direct,
                    "{m} x={x}"
                );
            }
        }
    }

    #[test]
    fn integral_closed_forms() {
        assert!(
            (osgood_integral(&ModulusOfContinuity::linear(), (-1f64).exp()).unwrap() - 1.0).abs()
                < 1e-12
        );
        assert!((osgood_integral(&ModulusOfContinuity::sqrt(), 0.25).unwrap() - 1.0).abs() < 1e-12);
        for m in ModulusOfContinuity::registry() {
            assert_eq!(osgood_integral(&m, 1.0).unwrap(), 0.0);
            if let Some(cf) = m.closed_form_integral(1e-7) {
                let q = osgood_integral(&m, 1e-7).unwrap();
                assert!((q - cf).abs() < 1e-10 * cf, "{m}");
            }
        }
        assert!(osgood_integral(&ModulusOfContinuity::linear(), 0.0).is_err());
    }

    #[test]
    fn osgood_classification() {
        assert!(is_osgood(&ModulusOfContinuity::linear()));
        assert!(is_osgood(&ModulusOfContinuity::log()));
        assert!(!is_osgood(&ModulusOfContinuity::sqrt()));
        assert!(!is_osgood(
            &ModulusOfContinuity::parse("holder:0.5").unwrap()
        ));
        assert!(!is_osgood(
            &ModulusOfContinuity::parse("holder:0.99").unwrap()
        ));
        assert!(is_osgood(&ModulusOfContinuity::parse("holder:1").unwrap()));
    }

    #[test]
    fn invariants_hold_on_registry() {
        for m in ModulusOfContinuity::registry() {
            let r = check_invariants(&m, 2000);
            assert!(r.holds, "{r:?}");
        }
    }
}
