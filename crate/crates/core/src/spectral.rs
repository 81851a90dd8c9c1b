//! Periodic grids, spectral fields and space-time fields.
//!
//! A [`TorusGrid`] of `n` points per axis and period `l` carries the frequencies
//! `xi = 2*pi*m/l` for integer modes `m` in `[-n/2, n/2)`. Frequency values are
//! stored as normalized Fourier coefficients, `u(x) = sum_m c_m e^{i xi_m x}`, so
//! `||u||^2 = h^d sum |u_j|^2 = l^d sum |c_m|^2`.

use std::borrow::Cow;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
    period: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .field("period", &self.period)
            .finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, o: &Self) -> bool {
        self.dim == o.dim && self.n == o.n && self.period == o.period
    }
}

/// Serialized form of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    pub period: f64,
}

/// Default period `2*pi*4`: integer modes are spaced by `1/4` in frequency.
pub const DEFAULT_PERIOD: f64 = 8.0 * PI;

impl TorusGrid {
    pub fn new(dim: usize, n: usize, period: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Config(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Config(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::Config(format!(
                "period must be positive, got {period}"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(TorusGrid {
            dim,
            n,
            period,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn from_spec(spec: GridSpec) -> Result<Self> {
        Self::new(spec.dim, spec.n, spec.period)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            dim: self.dim,
            n: self.n,
            period: self.period,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    /// Frequency spacing `2*pi/l`.
    pub fn frequency_step(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn nyquist(&self) -> f64 {
        (self.n / 2) as f64 * self.frequency_step()
    }

    /// Largest `|xi|` present on the grid.
    pub fn max_frequency(&self) -> f64 {
        self.nyquist() * (self.dim as f64).sqrt()
    }

    /// Same period and dimension, twice the points per axis.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.dim, 2 * self.n, self.period)
    }

    /// Smallest power-of-two points per axis whose Nyquist frequency reaches `xi`.
    pub fn points_for_frequency(&self, xi: f64) -> usize {
        let mut n = 8usize;
        while ((n / 2) as f64) * self.frequency_step() < xi {
            n *= 2;
        }
        n
    }

    pub fn mode_of_index(&self, k: usize) -> i64 {
        if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    pub fn index_of_mode(&self, m: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if m < -half || m >= half {
            return None;
        }
        Some(if m >= 0 {
            m as usize
        } else {
            (m + self.n as i64) as usize
        })
    }

    /// Flat index of an integer mode vector (unused components ignored in 1D).
    pub fn flat_index_of_modes(&self, modes: [i64; 2]) -> Option<usize> {
        let i0 = self.index_of_mode(modes[0])?;
        if self.dim == 1 {
            return Some(i0);
        }
        let i1 = self.index_of_mode(modes[1])?;
        Some(i0 + self.n * i1)
    }

    fn split(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat % self.n, flat / self.n]
        }
    }

    pub fn point(&self, flat: usize) -> [f64; 2] {
        let [i0, i1] = self.split(flat);
        let h = self.spacing();
        [i0 as f64 * h, i1 as f64 * h]
    }

    pub fn modes(&self, flat: usize) -> [i64; 2] {
        let [k0, k1] = self.split(flat);
        let m1 = if self.dim == 1 {
            0
        } else {
            self.mode_of_index(k1)
        };
        [self.mode_of_index(k0), m1]
    }

    pub fn frequency(&self, flat: usize) -> [f64; 2] {
        let [m0, m1] = self.modes(flat);
        let s = self.frequency_step();
        [m0 as f64 * s, m1 as f64 * s]
    }

    pub fn frequency_norm(&self, flat: usize) -> f64 {
        let [a, b] = self.frequency(flat);
        (a * a + b * b).sqrt()
    }

    pub fn is_nyquist(&self, flat: usize, axis: usize) -> bool {
        self.split(flat)[axis] == self.n / 2
    }

    /// In-place unnormalized transform over all axes.
    fn fft(&self, data: &mut [Complex64], forward: bool) {
        let plan = if forward {
            &self.forward
        } else {
            &self.inverse
        };
        plan.process(data);
        if self.dim == 2 {
            let n = self.n;
            let mut t = vec![Complex64::new(0.0, 0.0); data.len()];
            for i1 in 0..n {
                for i0 in 0..n {
                    t[i1 + n * i0] = data[i0 + n * i1];
                }
            }
            plan.process(&mut t);
            for i1 in 0..n {
                for i0 in 0..n {
                    data[i0 + n * i1] = t[i1 + n * i0];
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    Physical,
    Frequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// A complex field on a torus grid, held in one of its two representations.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: TorusGrid,
    values: Vec<Complex64>,
    repr: Representation,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl SpectralField {
    pub fn new(grid: TorusGrid, values: Vec<Complex64>, repr: Representation) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(SpectralField { grid, values, repr })
    }

    pub fn zeros(grid: &TorusGrid) -> Self {
        SpectralField {
            values: vec![c(0.0); grid.len()],
            grid: grid.clone(),
            repr: Representation::Physical,
        }
    }

    pub fn from_fn<F: Fn([f64; 2]) -> Complex64>(grid: &TorusGrid, f: F) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        SpectralField {
            grid: grid.clone(),
            values,
            repr: Representation::Physical,
        }
    }

    pub fn from_real_fn<F: Fn([f64; 2]) -> f64>(grid: &TorusGrid, f: F) -> Self {
        Self::from_fn(grid, |x| c(f(x)))
    }

    /// Builds a field from normalized Fourier coefficients of integer modes.
    /// Modes outside the grid are rejected.
    pub fn from_modes(grid: &TorusGrid, modes: &[([i64; 2], Complex64)]) -> Result<Self> {
        let mut values = vec![c(0.0); grid.len()];
        for (m, v) in modes {
            let idx = grid.flat_index_of_modes(*m).ok_or_else(|| {
                Error::Config(format!("mode {m:?} not representable on {:?}", grid.spec()))
            })?;
            values[idx] += *v;
        }
        Ok(SpectralField {
            grid: grid.clone(),
            values,
            repr: Representation::Frequency,
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    /// Values in the current representation.
    pub fn raw(&self) -> &[Complex64] {
        &self.values
    }

    pub fn transform(&self, direction: Direction) -> Result<Self> {
        match (direction, self.repr) {
            (Direction::Forward, Representation::Physical) => Ok(self.to_frequency()),
            (Direction::Inverse, Representation::Frequency) => Ok(self.to_physical()),
            (d, r) => Err(Error::Config(format!(
                "{d:?} transform requested on a field already in {r:?} form"
            ))),
        }
    }

    pub fn to_frequency(&self) -> Self {
        match self.repr {
            Representation::Frequency => self.clone(),
            Representation::Physical => {
                let mut v = self.values.clone();
                self.grid.fft(&mut v, true);
                let s = 1.0 / self.grid.len() as f64;
                v.iter_mut().for_each(|z| *z *= s);
                SpectralField {
                    grid: self.grid.clone(),
                    values: v,
                    repr: Representation::Frequency,
                }
            }
        }
    }

    pub fn to_physical(&self) -> Self {
        match self.repr {
            Representation::Physical => self.clone(),
            Representation::Frequency => {
                let mut v = self.values.clone();
                self.grid.fft(&mut v, false);
                SpectralField {
                    grid: self.grid.clone(),
                    values: v,
                    repr: Representation::Physical,
                }
            }
        }
    }

    pub fn physical_values(&self) -> Cow<'_, [Complex64]> {
        match self.repr {
            Representation::Physical => Cow::Borrowed(&self.values),
            Representation::Frequency => Cow::Owned(self.to_physical().values),
        }
    }

    pub fn frequency_values(&self) -> Cow<'_, [Complex64]> {
        match self.repr {
            Representation::Frequency => Cow::Borrowed(&self.values),
            Representation::Physical => Cow::Owned(self.to_frequency().values),
        }
    }

    pub fn into_physical_values(self) -> Vec<Complex64> {
        self.to_physical().values
    }

    /// Multiplies the frequency coefficients by a real symbol of `xi`.
    pub fn apply_multiplier<F: Fn([f64; 2]) -> f64>(&self, symbol: F) -> Self {
        let mut f = self.to_frequency();
        for (i, z) in f.values.iter_mut().enumerate() {
            *z *= symbol(self.grid.frequency(i));
        }
        f
    }

    /// Spectral derivative along `axis`, with the Nyquist mode of that axis zeroed.
    pub fn derivative(&self, axis: usize) -> Result<Self> {
        if axis >= self.grid.dim {
            return Err(Error::Config(format!(
                "axis {axis} out of range for dimension {}",
                self.grid.dim
            )));
        }
        let mut f = self.to_frequency();
        for (i, z) in f.values.iter_mut().enumerate() {
            if self.grid.is_nyquist(i, axis) {
                *z = c(0.0);
            } else {
                *z *= Complex64::new(0.0, self.grid.frequency(i)[axis]);
            }
        }
        Ok(f)
    }

    /// Spectral gradient, one field per axis.
    pub fn gradient(&self) -> Vec<Self> {
        (0..self.grid.dim)
            .map(|a| self.derivative(a).expect("axis in range"))
            .collect()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        match self.repr {
            Representation::Physical => {
                self.grid.spacing().powi(self.grid.dim as i32)
                    * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
            }
            Representation::Frequency => {
                self.grid.period.powi(self.grid.dim as i32)
                    * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
            }
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `sum_xi (1 + |xi|^2)^s |c_xi|^2`, scaled like the L2 norm.
    pub fn sobolev_norm_sq(&self, s: f64) -> f64 {
        let f = self.frequency_values();
        let mut total = 0.0;
        for (i, z) in f.iter().enumerate() {
            let xi2 = self.grid.frequency_norm(i).powi(2);
            total += (1.0 + xi2).powf(s) * z.norm_sqr();
        }
        total * self.grid.period.powi(self.grid.dim as i32)
    }

    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.sobolev_norm_sq(s).sqrt()
    }

    /// `<self, other> = h^d sum self_j conj(other_j)`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_grid(other)?;
        let a = self.frequency_values();
        let b = other.frequency_values();
        let s: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum();
        Ok(s * self.grid.period.powi(self.grid.dim as i32))
    }

    pub fn sup_norm(&self) -> f64 {
        self.physical_values()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.physical_values()
            .iter()
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }

    pub fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Config(format!(
                "grid mismatch: {:?} vs {:?}",
                self.grid.spec(),
                other.grid.spec()
            )));
        }
        Ok(())
    }

    /// Pointwise product in physical space.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let a = self.physical_values();
        let b = other.physical_values();
        let values = a.iter().zip(b.iter()).map(|(x, y)| x * y).collect();
        Ok(SpectralField {
            grid: self.grid.clone(),
            values,
            repr: Representation::Physical,
        })
    }

    /// Pointwise product with real physical samples.
    pub fn mul_real(&self, samples: &[f64]) -> Result<Self> {
        if samples.len() != self.grid.len() {
            return Err(Error::Config("sample length does not match grid".into()));
        }
        let a = self.physical_values();
        let values = a.iter().zip(samples).map(|(x, y)| x * y).collect();
        Ok(SpectralField {
            grid: self.grid.clone(),
            values,
            repr: Representation::Physical,
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        SpectralField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|z| z * s).collect(),
            repr: self.repr,
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(c(s))
    }

    /// `self + s * other`, in the representation of `self`.
    pub fn axpy(&self, s: Complex64, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let b = match self.repr {
            Representation::Physical => other.physical_values(),
            Representation::Frequency => other.frequency_values(),
        };
        let values = self
            .values
            .iter()
            .zip(b.iter())
            .map(|(x, y)| x + s * y)
            .collect();
        Ok(SpectralField {
            grid: self.grid.clone(),
            values,
            repr: self.repr,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(c(1.0), other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(c(-1.0), other)
    }

    /// Relative L2 distance `||self - other|| / max(||other||, tiny)`.
    pub fn rel_distance(&self, other: &Self) -> Result<f64> {
        let d = self.sub(other)?.l2_norm();
        Ok(d / other.l2_norm().max(f64::MIN_POSITIVE))
    }

    /// The same trigonometric polynomial on the refined grid; a Nyquist
    /// coefficient is split evenly between `+N/2` and `-N/2`.
    pub fn refine(&self) -> Result<Self> {
        let fine = self.grid.refined()?;
        let f = self.frequency_values();
        let half = (self.grid.n / 2) as i64;
        let mut values = vec![c(0.0); fine.len()];
        for (i, z) in f.iter().enumerate() {
            let m = self.grid.modes(i);
            let mut targets: Vec<([i64; 2], f64)> = vec![(m, 1.0)];
            for axis in 0..self.grid.dim {
                if m[axis] == -half {
                    targets = targets
                        .into_iter()
                        .flat_map(|(t, w)| {
                            let mut flip = t;
                            flip[axis] = half;
                            [(t, 0.5 * w), (flip, 0.5 * w)]
                        })
                        .collect();
                }
            }
            for (t, w) in targets {
                let idx = fine
                    .flat_index_of_modes(t)
                    .expect("coarse modes fit the refined grid");
                values[idx] += *z * w;
            }
        }
        Ok(SpectralField {
            grid: fine,
            values,
            repr: Representation::Frequency,
        })
    }

    pub fn to_json_value(&self) -> JsonField {
        JsonField {
            grid: self.grid.spec(),
            values: self
                .physical_values()
                .iter()
                .map(|z| [z.re, z.im])
                .collect(),
        }
    }

    pub fn from_json_value(j: &JsonField) -> Result<Self> {
        let grid = TorusGrid::from_spec(j.grid)?;
        let values = j
            .values
            .iter()
            .map(|v| Complex64::new(v[0], v[1]))
            .collect();
        Self::new(grid, values, Representation::Physical)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_json_value())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_json_value(&serde_json::from_str(s)?)
    }
}

/// JSON container `{grid: {dim, n, period}, values: [[re, im], ...]}` of physical values,
/// ordered with axis 0 fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonField {
    pub grid: GridSpec,
    pub values: Vec<[f64; 2]>,
}

pub type TimeDerivative = Arc<dyn Fn(f64) -> SpectralField + Send + Sync>;

/// Time samples of a field on one grid, with an optional closed-form time derivative.
#[derive(Clone)]
pub struct SpaceTimeField {
    times: Vec<f64>,
    slices: Vec<SpectralField>,
    time_derivative: Option<TimeDerivative>,
}

impl fmt::Debug for SpaceTimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpaceTimeField")
            .field("times", &self.times.len())
            .field("closed_form_dt", &self.time_derivative.is_some())
            .finish()
    }
}

impl SpaceTimeField {
    pub fn new(
        times: Vec<f64>,
        slices: Vec<SpectralField>,
        time_derivative: Option<TimeDerivative>,
    ) -> Result<Self> {
        if times.len() != slices.len() || times.is_empty() {
            return Err(Error::Config(
                "time samples and slices must be non-empty and equal in number".into(),
            ));
        }
        if !times.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config(
                "time samples must be strictly increasing".into(),
            ));
        }
        let g = slices[0].grid();
        if slices.iter().any(|s| s.grid() != g) {
            return Err(Error::Config("all slices must share one grid".into()));
        }
        Ok(SpaceTimeField {
            times,
            slices,
            time_derivative,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slices(&self) -> &[SpectralField] {
        &self.slices
    }

    pub fn grid(&self) -> &TorusGrid {
        self.slices[0].grid()
    }

    pub fn has_closed_form_derivative(&self) -> bool {
        self.time_derivative.is_some()
    }

    /// `d/dt` at sample `i`: the closed form when present, otherwise
    /// second-order differences on the (possibly non-uniform) samples.
    pub fn time_derivative(&self, i: usize) -> Result<SpectralField> {
        if let Some(d) = &self.time_derivative {
            return Ok(d(self.times[i]));
        }
        let n = self.times.len();
        if n < 3 {
            return Err(Error::Config(
                "finite differences need at least three time samples".into(),
            ));
        }
        let (a, b, cc) = if i == 0 {
            (0, 1, 2)
        } else if i == n - 1 {
            (n - 3, n - 2, n - 1)
        } else {
            (i - 1, i, i + 1)
        };
        let (t0, t1, t2) = (self.times[a], self.times[b], self.times[cc]);
        let t = self.times[i];
        // derivative of the quadratic Lagrange interpolant at t
        let w0 = ((t - t1) + (t - t2)) / ((t0 - t1) * (t0 - t2));
        let w1 = ((t - t0) + (t - t2)) / ((t1 - t0) * (t1 - t2));
        let w2 = ((t - t0) + (t - t1)) / ((t2 - t0) * (t2 - t1));
        let s = &self.slices;
        s[a].to_physical()
            .scale_real(w0)
            .axpy(c(w1), &s[b])?
            .axpy(c(w2), &s[cc])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1() -> TorusGrid {
        TorusGrid::new(1, 64, 2.0 * PI).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TorusGrid::new(3, 64, 1.0).is_err());
        assert!(TorusGrid::new(1, 48, 1.0).is_err());
        assert!(TorusGrid::new(1, 4, 1.0).is_err());
        assert!(TorusGrid::new(1, 64, -1.0).is_err());
        let g = grid1();
        assert_eq!(g.mode_of_index(32), -32);
        assert_eq!(g.index_of_mode(-1), Some(63));
        assert_eq!(g.index_of_mode(32), None);
    }

    #[test]
    fn constant_and_single_mode() {
        let g = grid1();
        let one = SpectralField::from_real_fn(&g, |_| 1.0).to_frequency();
        for (i, z) in one.raw().iter().enumerate() {
            let expect = if i == 0 { 1.0 } else { 0.0 };
            assert!((z - c(expect)).norm() < 1e-15);
        }
        let mode =
            SpectralField::from_fn(&g, |x| Complex64::from_polar(1.0, 5.0 * x[0])).to_frequency();
        let idx = g.index_of_mode(5).unwrap();
        for (i, z) in mode.raw().iter().enumerate() {
            let expect = if i == idx { 1.0 } else { 0.0 };
            assert!((z - c(expect)).norm() < 1e-14);
        }
    }

    #[test]
    fn transform_direction_guard() {
        let g = grid1();
        let u = SpectralField::zeros(&g);
        assert!(u.transform(Direction::Inverse).is_err());
        let f = u.transform(Direction::Forward).unwrap();
        assert_eq!(f.representation(), Representation::Frequency);
        assert!(SpectralField::new(g, vec![c(0.0); 3], Representation::Physical).is_err());
    }

    #[test]
    fn derivative_of_sine_and_constant() {
        let g = grid1();
        let u = SpectralField::from_real_fn(&g, |x| (3.0 * x[0]).sin());
        let d = u.derivative(0).unwrap().to_physical();
        for (i, z) in d.raw().iter().enumerate() {
            assert!((z.re - 3.0 * (3.0 * g.point(i)[0]).cos()).abs() < 1e-12);
        }
        let one = SpectralField::from_real_fn(&g, |_| 1.0);
        assert!(one.derivative(0).unwrap().l2_norm() < 1e-15);
        assert!(u.derivative(1).is_err());
    }

    #[test]
    fn two_dimensional_mode() {
        let g = TorusGrid::new(2, 16, 2.0 * PI).unwrap();
        let u = SpectralField::from_fn(&g, |x| Complex64::from_polar(1.0, 2.0 * x[0] - 3.0 * x[1]));
        let f = u.to_frequency();
        let idx = g.flat_index_of_modes([2, -3]).unwrap();
        assert!((f.raw()[idx] - c(1.0)).norm() < 1e-13);
        let d = u.derivative(1).unwrap().to_physical();
        let expect = u.scale(Complex64::new(0.0, -3.0));
        assert!(d.rel_distance(&expect).unwrap() < 1e-13);
        assert!((u.l2_norm() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn sobolev_of_unit_mode() {
        let g = TorusGrid::new(1, 128, DEFAULT_PERIOD).unwrap();
        let k = 12i64;
        let amp = 1.0 / g.period().sqrt();
        let u = SpectralField::from_modes(&g, &[([k, 0], c(amp))]).unwrap();
        assert!((u.l2_norm() - 1.0).abs() < 1e-14);
        let xi = k as f64 * g.frequency_step();
        assert!((u.sobolev_norm(1.0) - (1.0 + xi * xi).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn json_round_trip() {
        let g = grid1();
        let u = SpectralField::from_real_fn(&g, |x| x[0].cos());
        let back = SpectralField::from_json(&u.to_json().unwrap()).unwrap();
        assert_eq!(back.grid(), u.grid());
        assert!(back.rel_distance(&u).unwrap() == 0.0);
    }

    #[test]
    fn space_time_derivative_paths() {
        let g = grid1();
        let w = SpectralField::from_real_fn(&g, |x| x[0].sin());
        let times: Vec<f64> = (0..11).map(|i| 0.1 * i as f64).collect();
        let slices: Vec<_> = times.iter().map(|t| w.scale_real(t * t)).collect();
        let fd = SpaceTimeField::new(times.clone(), slices.clone(), None).unwrap();
        let d = fd.time_derivative(5).unwrap();
        assert!(d.rel_distance(&w.scale_real(1.0)).unwrap() < 1e-12);
        let w2 = w.clone();
        let exact: TimeDerivative = Arc::new(move |t| w2.scale_real(2.0 * t));
        let cf = SpaceTimeField::new(times, slices, Some(exact)).unwrap();
        assert!(cf.has_closed_form_derivative());
        assert!(cf.time_derivative(0).unwrap().l2_norm() == 0.0);
        assert!(SpaceTimeField::new(vec![1.0, 0.5], vec![w.clone(), w], None).is_err());
    }
}
