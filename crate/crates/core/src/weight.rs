//! The Carleman weight built from an Osgood modulus `mu`.
//!
//! * `phi(t) = int_{1/t}^1 ds/mu(s)` for `t >= 1`;
//! * `psi_gamma(tau) = phi^{-1}(gamma (T^alpha - (T - tau/gamma)^alpha) / alpha)`;
//! * `Phi_gamma(tau) = int_0^tau psi_gamma`, with
//!   `Phi'' = (T - tau/gamma)^{alpha-1} psi^2 mu(1/psi)`.
//!
//! `phi` is handled through `F(x) = phi(e^x)`, tabulated on a uniform grid in
//! `y = ln(1 + x)` and inverted by monotone cubic interpolation plus Newton
//! polish. Logarithmic accessors (`log_psi`, ...) stay finite where `psi`
//! itself would overflow.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::modulus::{is_osgood, ModulusOfContinuity};
use crate::quadrature::gauss_kronrod;

const TABLE_DY: f64 = 1.0 / 32.0;
const MAX_Y: f64 = 700.0;

#[derive(Debug, Clone)]
pub struct CarlemanWeight {
    mu: ModulusOfContinuity,
    gamma: f64,
    t_horizon: f64,
    alpha: f64,
    /// knots `y_i = i * TABLE_DY`, `x_i = e^{y_i} - 1`
    table_f: Vec<f64>,
    table_slope: Vec<f64>,
}

/// `(Phi, Phi', Phi'')` at one argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightJet {
    pub value: f64,
    pub first_derivative: f64,
    pub second_derivative: f64,
}

impl CarlemanWeight {
    pub fn new(mu: ModulusOfContinuity, gamma: f64, t_horizon: f64, alpha: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Config(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        if !(t_horizon > 0.0 && t_horizon.is_finite()) {
            return Err(Error::Config(format!(
                "T must be positive, got {t_horizon}"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        if !is_osgood(&mu) {
            return Err(Error::Precondition(format!(
                "modulus {mu} does not satisfy the Osgood condition, phi is not onto"
            )));
        }
        let s_max = gamma * t_horizon.powf(alpha) / alpha;
        let mut table_f = vec![0.0];
        let mut table_slope = vec![mu.ratio_log(0.0)];
        let mut i = 0usize;
        while *table_f.last().expect("non-empty") < s_max || table_f.len() < 4 {
            i += 1;
            let y = i as f64 * TABLE_DY;
            if y > MAX_Y {
                return Err(Error::Range(format!(
                    "phi^-1({s_max}) exceeds exp(exp({MAX_Y})); reduce gamma T^alpha / alpha"
                )));
            }
            let x0 = ((i - 1) as f64 * TABLE_DY).exp_m1();
            let x1 = y.exp_m1();
            let inc = mu.log_integral(x0, x1);
            table_f.push(table_f[i - 1] + inc);
            // dy/dF = (dy/dx)(dx/dF) = r(x) / (1 + x)
            table_slope.push(mu.ratio_log(x1) / (1.0 + x1));
        }
        limit_slopes(&table_f, &mut table_slope);
        Ok(CarlemanWeight {
            mu,
            gamma,
            t_horizon,
            alpha,
            table_f,
            table_slope,
        })
    }

    pub fn mu(&self) -> &ModulusOfContinuity {
        &self.mu
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn t_horizon(&self) -> f64 {
        self.t_horizon
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Same modulus, horizon and exponent with another `gamma`.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.mu, gamma, self.t_horizon, self.alpha)
    }

    /// Largest tabulated argument of `phi^{-1}`, `gamma T^alpha / alpha`.
    pub fn s_max(&self) -> f64 {
        self.gamma * self.t_horizon.powf(self.alpha) / self.alpha
    }

    pub fn table_len(&self) -> usize {
        self.table_f.len()
    }

    /// Tabulated values `(phi(t_i), t_i)`, `t_i = exp(e^{y_i} - 1)`, as `(F_i, x_i = ln t_i)`.
    pub fn table(&self) -> Vec<(f64, f64)> {
        self.table_f
            .iter()
            .enumerate()
            .map(|(i, f)| (*f, (i as f64 * TABLE_DY).exp_m1()))
            .collect()
    }

    /// `F(x) = phi(e^x)`.
    fn big_f(&self, x: f64) -> f64 {
        let y = x.ln_1p();
        let i = ((y / TABLE_DY).floor() as usize).min(self.table_f.len() - 1);
        let xi = (i as f64 * TABLE_DY).exp_m1();
        if x >= xi {
            self.table_f[i] + self.mu.log_integral(xi, x)
        } else {
            self.table_f[i] - self.mu.log_integral(x, xi)
        }
    }

    pub fn phi(&self, t: f64) -> Result<f64> {
        if !(t >= 1.0) {
            return Err(Error::Domain(format!("phi needs t >= 1, got {t}")));
        }
        Ok(self.big_f(t.ln()))
    }

    /// `phi'(t) = 1 / (t^2 mu(1/t))`.
    pub fn phi_prime(&self, t: f64) -> Result<f64> {
        if !(t >= 1.0) {
            return Err(Error::Domain(format!("phi' needs t >= 1, got {t}")));
        }
        Ok(1.0 / (t * self.mu.sigma_mu(t)))
    }

    /// `ln phi^{-1}(s)`.
    pub fn log_phi_inverse(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::Domain(format!("phi^-1 needs s >= 0, got {s}")));
        }
        let last = *self.table_f.last().expect("non-empty");
        if s > last {
            return Err(Error::Range(format!(
                "phi^-1({s}) is beyond the table (max {last}); build the weight with a larger gamma T^alpha / alpha"
            )));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        let i = match self.table_f.binary_search_by(|f| f.total_cmp(&s)) {
            Ok(i) => return Ok((i as f64 * TABLE_DY).exp_m1()),
            Err(i) => i - 1,
        };
        let (f0, f1) = (self.table_f[i], self.table_f[i + 1]);
        let (y0, y1) = (i as f64 * TABLE_DY, (i + 1) as f64 * TABLE_DY);
        let h = f1 - f0;
        let u = (s - f0) / h;
        let (h00, h10, h01, h11) = hermite(u);
        let y =
            h00 * y0 + h10 * h * self.table_slope[i] + h01 * y1 + h11 * h * self.table_slope[i + 1];
        let mut x = y.exp_m1();
        for k in 0..4 {
            let res = self.big_f(x) - s;
            x -= res * self.mu.ratio_log(x);
            if k > 0 && res.abs() <= 1e-14 * s.max(1.0) {
                break;
            }
        }
        Ok(x)
    }

    pub fn phi_inverse(&self, s: f64) -> Result<f64> {
        let x = self.log_phi_inverse(s)?;
        finite(x.exp(), "phi^-1")
    }

    fn check_tau(&self, tau: f64) -> Result<()> {
        if !(tau >= 0.0 && tau < self.gamma * self.t_horizon) {
            return Err(Error::Domain(format!(
                "tau must lie in [0, gamma T) = [0, {}), got {tau}",
                self.gamma * self.t_horizon
            )));
        }
        Ok(())
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t > 0.0 && t <= self.t_horizon) {
            return Err(Error::Domain(format!(
                "time must lie in (0, T] = (0, {}], got {t}",
                self.t_horizon
            )));
        }
        Ok(())
    }

    /// `gamma int_0^{tau/gamma} (T-s)^{alpha-1} ds`, in closed form.
    pub fn inner(&self, tau: f64) -> Result<f64> {
        self.check_tau(tau)?;
        let t = self.t_horizon - tau / self.gamma;
        Ok(self.inner_from_time(t))
    }

    fn inner_from_time(&self, t: f64) -> f64 {
        let a = self.alpha;
        self.gamma * (self.t_horizon.powf(a) - t.powf(a)) / a
    }

    pub fn log_psi(&self, tau: f64) -> Result<f64> {
        self.log_phi_inverse(self.inner(tau)?)
    }

    pub fn psi(&self, tau: f64) -> Result<f64> {
        finite(self.log_psi(tau)?.exp(), "psi")
    }

    /// `ln psi_gamma(gamma (T - t))`, `t` in `(0, T]`.
    pub fn log_psi_at_time(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        self.log_phi_inverse(self.inner_from_time(t))
    }

    pub fn psi_at_time(&self, t: f64) -> Result<f64> {
        finite(self.log_psi_at_time(t)?.exp(), "psi")
    }

    /// `ln Phi''(gamma (T - t)) = (alpha - 1) ln t + ln psi + ln r(ln psi)`.
    pub fn log_phi_second_at_time(&self, t: f64) -> Result<f64> {
        let x = self.log_psi_at_time(t)?;
        Ok((self.alpha - 1.0) * t.ln() + x + self.mu.ratio_log(x).ln())
    }

    pub fn phi_second_at_time(&self, t: f64) -> Result<f64> {
        finite(self.log_phi_second_at_time(t)?.exp(), "Phi''")
    }

    /// `Phi''(tau)` from the differential equation.
    pub fn phi_second(&self, tau: f64) -> Result<f64> {
        self.check_tau(tau)?;
        self.phi_second_at_time(self.t_horizon - tau / self.gamma)
    }

    /// `(Phi(tau), Phi'(tau), Phi''(tau))`; the value by adaptive quadrature.
    #[allow(non_snake_case)]
    pub fn Phi(&self, tau: f64) -> Result<WeightJet> {
        self.check_tau(tau)?;
        let first = self.psi(tau)?;
        let second = self.phi_second(tau)?;
        if tau == 0.0 {
            return Ok(WeightJet {
                value: 0.0,
                first_derivative: first,
                second_derivative: second,
            });
        }
        let v = gauss_kronrod(|s| self.psi(s).unwrap_or(f64::NAN), 0.0, tau, 1e-12, 0.0).value;
        Ok(WeightJet {
            value: finite(v, "Phi")?,
            first_derivative: first,
            second_derivative: second,
        })
    }

    /// `int_{t_a}^{t_b} psi_gamma(gamma (T - r)) dr`; for `t_b = T` this is `Phi(gamma (T - t_a)) / gamma`.
    pub fn exponent_between(&self, t_a: f64, t_b: f64) -> Result<f64> {
        self.check_time(t_a)?;
        self.check_time(t_b)?;
        if t_a == t_b {
            return Ok(0.0);
        }
        let (lo, hi, sign) = if t_a < t_b {
            (t_a, t_b, 1.0)
        } else {
            (t_b, t_a, -1.0)
        };
        let v = gauss_kronrod(
            |r| self.psi_at_time(r).unwrap_or(f64::NAN),
            lo,
            hi,
            1e-13,
            0.0,
        )
        .value;
        Ok(sign * finite(v, "weight exponent")?)
    }

    /// `Phi(gamma (T - t)) / gamma` at time `t`.
    pub fn weight_exponent(&self, t: f64) -> Result<f64> {
        self.exponent_between(t, self.t_horizon)
    }

    /// `int_{t_i}^{t_ref} psi(gamma (T - r)) dr` for sorted `times`, accumulated
    /// panel by panel outward from `t_ref`.
    pub fn exponents_relative_to(&self, times: &[f64], t_ref: f64) -> Result<Vec<f64>> {
        if !times.windows(2).all(|w| w[0] <= w[1]) {
            return Err(Error::Config("times must be sorted".into()));
        }
        let mut out = vec![0.0; times.len()];
        let split = times.partition_point(|&t| t < t_ref);
        let mut acc = 0.0;
        let mut prev = t_ref;
        for i in (0..split).rev() {
            acc += self.exponent_between(times[i], prev)?;
            out[i] = acc;
            prev = times[i];
        }
        acc = 0.0;
        prev = t_ref;
        for i in split..times.len() {
            acc -= self.exponent_between(prev, times[i])?;
            out[i] = acc;
            prev = times[i];
        }
        Ok(out)
    }
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range(format!(
            "{what} overflows f64; use the logarithmic accessors"
        )))
    }
}

fn hermite(u: f64) -> (f64, f64, f64, f64) {
    let u2 = u * u;
    let u3 = u2 * u;
    (
        2.0 * u3 - 3.0 * u2 + 1.0,
        u3 - 2.0 * u2 + u,
        -2.0 * u3 + 3.0 * u2,
        u3 - u2,
    )
}

/// Fritsch-Carlson limiter keeping the Hermite interpolant monotone.
fn limit_slopes(f: &[f64], slope: &mut [f64]) {
    for i in 0..f.len() - 1 {
        let delta = TABLE_DY / (f[i + 1] - f[i]);
        let a = slope[i] / delta;
        let b = slope[i + 1] / delta;
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            slope[i] = tau * a * delta;
            slope[i + 1] = tau * b * delta;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn linear(gamma: f64, t: f64, alpha: f64) -> CarlemanWeight {
        CarlemanWeight::new(ModulusOfContinuity::linear(), gamma, t, alpha).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(CarlemanWeight::new(ModulusOfContinuity::sqrt(), 1.0, 1.0, 0.5).is_err());
        assert!(CarlemanWeight::new(ModulusOfContinuity::linear(), 1.0, 1.0, 1.0).is_err());
        assert!(CarlemanWeight::new(ModulusOfContinuity::linear(), -1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn phi_linear_is_log() {
        let w = linear(1.0, 1.0, 0.5);
        assert_eq!(w.phi(1.0).unwrap(), 0.0);
        assert!((w.phi(E).unwrap() - 1.0).abs() < 1e-12);
        assert!((w.phi_prime(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(w.phi(0.5).is_err());
        assert!((w.phi_inverse(1.0).unwrap() - E).abs() < 1e-12);
        assert_eq!(w.phi_inverse(0.0).unwrap(), 1.0);
    }

    #[test]
    fn psi_closed_form_and_domain() {
        let w = linear(1.0, 1.0, 0.5);
        assert!((w.psi(0.75).unwrap() - E).abs() < 1e-10);
        assert_eq!(w.psi(0.0).unwrap(), 1.0);
        assert!(w.psi(1.0).is_err());
        let j = w.Phi(0.0).unwrap();
        assert_eq!(j.value, 0.0);
        assert_eq!(j.first_derivative, 1.0);
        assert!((j.second_derivative - 1.0).abs() < 1e-15);
    }

    #[test]
    fn log_modulus_inverse_round_trip() {
        let w = CarlemanWeight::new(ModulusOfContinuity::log(), 8.0, 1.0, 0.5).unwrap();
        for s in [0.1, 0.5, 1.0, 3.0, 5.0] {
            let t = w.phi_inverse(s).unwrap();
            assert!(t >= 1.0 + s);
            assert!((w.phi(t).unwrap() - s).abs() <= 1e-12 * s);
        }
        let x = w.log_phi_inverse(15.9).unwrap();
        assert!(x > 1e6 && x.is_finite());
        assert!(w.phi_inverse(15.9).is_err());
        assert!(w.log_phi_inverse(1e6).is_err());
    }

    #[test]
    fn relative_exponents_are_consistent() {
        let w = linear(16.0, 0.01, 0.5);
        let times = [0.002, 0.0025, 0.003, 0.0035];
        let e = w.exponents_relative_to(&times, 0.0028).unwrap();
        let direct = w.exponent_between(0.002, 0.0028).unwrap();
        assert!((e[0] - direct).abs() < 1e-12 * direct.abs());
        let direct = w.exponent_between(0.0028, 0.0035).unwrap();
        assert!((e[3] + direct).abs() < 1e-12 * direct.abs());
        let full = w.weight_exponent(0.003).unwrap() - w.weight_exponent(0.0028).unwrap();
        assert!((e[2] - full).abs() < 1e-9 * full.abs());
    }
}
