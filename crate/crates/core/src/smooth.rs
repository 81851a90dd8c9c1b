//! The smooth step `h(x) = 1 / (1 + exp(1/x - 1/(1-x)))` and shifted ramps built on it.
//!
//! `h` is `C^∞`, vanishes for `x <= 0`, equals 1 for `x >= 1`, and is strictly
//! increasing on `(0, 1)` with `h(1/2) = 1/2`, `h'(1/2) = 2`.

/// Value and first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const fn constant(value: f64) -> Self {
        Jet {
            value,
            d1: 0.0,
            d2: 0.0,
        }
    }

    pub fn scale(self, c: f64) -> Self {
        Jet {
            value: c * self.value,
            d1: c * self.d1,
            d2: c * self.d2,
        }
    }

    pub fn add(self, o: Jet) -> Self {
        Jet {
            value: self.value + o.value,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
        }
    }

    pub fn mul(self, o: Jet) -> Self {
        Jet {
            value: self.value * o.value,
            d1: self.d1 * o.value + self.value * o.d1,
            d2: self.d2 * o.value + 2.0 * self.d1 * o.d1 + self.value * o.d2,
        }
    }
}

pub fn step(x: f64) -> Jet {
    if x <= 0.0 {
        return Jet::constant(0.0);
    }
    if x >= 1.0 {
        return Jet::constant(1.0);
    }
    let y = 1.0 - x;
    let g = 1.0 / x - 1.0 / y;
    let g1 = -1.0 / (x * x) - 1.0 / (y * y);
    let g2 = 2.0 / (x * x * x) - 2.0 / (y * y * y);
    // h = 1/(1+e^g); s1 = h(1-h) = e^{-|g|}/(1+e^{-|g|})^2
    let e = (-g.abs()).exp();
    let value = if g > 0.0 {
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + e)
    };
    let s1 = e / ((1.0 + e) * (1.0 + e));
    let d1 = -s1 * g1;
    let d2 = -(1.0 - 2.0 * value) * d1 * g1 - s1 * g2;
    Jet { value, d1, d2 }
}

/// Rises from 0 at `a` to 1 at `b`.
pub fn ramp(x: f64, a: f64, b: f64) -> Jet {
    let w = b - a;
    let j = step((x - a) / w);
    Jet {
        value: j.value,
        d1: j.d1 / w,
        d2: j.d2 / (w * w),
    }
}

/// Falls from 1 at `a` to 0 at `b`.
pub fn fall(x: f64, a: f64, b: f64) -> Jet {
    let r = ramp(x, a, b);
    Jet {
        value: 1.0 - r.value,
        d1: -r.d1,
        d2: -r.d2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_plateaus_and_symmetry() {
        assert_eq!(step(-1.0).value, 0.0);
        assert_eq!(step(1.5).value, 1.0);
        assert!((step(0.5).value - 0.5).abs() < 1e-15);
        assert!((step(0.5).d1 - 2.0).abs() < 1e-14);
        for x in [0.1, 0.3, 0.45] {
            assert!((step(x).value + step(1.0 - x).value - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let h = 1e-5;
        for x in [0.05, 0.2, 0.5, 0.77, 0.95] {
            let fd1 = (step(x + h).value - step(x - h).value) / (2.0 * h);
            let fd2 = (step(x + h).d1 - step(x - h).d1) / (2.0 * h);
            assert!((fd1 - step(x).d1).abs() < 1e-7 * (1.0 + fd1.abs()), "x={x}");
            assert!((fd2 - step(x).d2).abs() < 1e-6 * (1.0 + fd2.abs()), "x={x}");
        }
    }
}
