//! Complex numbers carried as `mantissa * exp(log_scale)`, for kernel
//! entries whose magnitude under- or overflows `f64` at large order.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::lattice::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaled {
    pub mantissa: C64,
    pub log_scale: f64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled {
        mantissa: C64::new(0.0, 0.0),
        log_scale: 0.0,
    };

    pub fn new(mantissa: C64, log_scale: f64) -> Self {
        Self { mantissa, log_scale }.normalized()
    }

    pub fn from_c64(v: C64) -> Self {
        Self::new(v, 0.0)
    }

    /// `exp(log)` for a complex logarithm.
    pub fn exp(log: C64) -> Self {
        Self {
            mantissa: C64::from_polar(1.0, log.im),
            log_scale: log.re,
        }
    }

    /// Move the magnitude of the mantissa into the exponent.
    pub fn normalized(self) -> Self {
        let m = self.mantissa.norm();
        if m == 0.0 || !m.is_finite() {
            return Self {
                mantissa: self.mantissa,
                log_scale: if m == 0.0 { 0.0 } else { self.log_scale },
            };
        }
        Self {
            mantissa: self.mantissa / m,
            log_scale: self.log_scale + m.ln(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.norm() == 0.0
    }

    /// The value as an ordinary complex number (may over- or underflow).
    pub fn to_c64(self) -> C64 {
        self.mantissa * self.log_scale.exp()
    }

    /// `ln |value|`, `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.norm().ln() + self.log_scale
    }

    pub fn abs(&self) -> f64 {
        self.ln_abs().exp()
    }

    pub fn scale_by(self, factor: C64) -> Self {
        Self::new(self.mantissa * factor, self.log_scale)
    }

    /// `self / other` as an ordinary number.
    pub fn ratio(self, other: Scaled) -> C64 {
        self.mantissa / other.mantissa * (self.log_scale - other.log_scale).exp()
    }

    pub fn scale_log(self, log_factor: f64) -> Self {
        Self {
            mantissa: self.mantissa,
            log_scale: self.log_scale + log_factor,
        }
    }
}

impl Add for Scaled {
    type Output = Scaled;
    fn add(self, rhs: Scaled) -> Scaled {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let top = self.log_scale.max(rhs.log_scale);
        let v = self.mantissa * (self.log_scale - top).exp()
            + rhs.mantissa * (rhs.log_scale - top).exp();
        Scaled::new(v, top)
    }
}

impl Neg for Scaled {
    type Output = Scaled;
    fn neg(self) -> Scaled {
        Scaled {
            mantissa: -self.mantissa,
            log_scale: self.log_scale,
        }
    }
}

impl Sub for Scaled {
    type Output = Scaled;
    fn sub(self, rhs: Scaled) -> Scaled {
        self + (-rhs)
    }
}

impl Mul for Scaled {
    type Output = Scaled;
    fn mul(self, rhs: Scaled) -> Scaled {
        Scaled::new(self.mantissa * rhs.mantissa, self.log_scale + rhs.log_scale)
    }
}

impl Mul<C64> for Scaled {
    type Output = Scaled;
    fn mul(self, rhs: C64) -> Scaled {
        self.scale_by(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_beyond_f64_range() {
        let big = Scaled::new(C64::new(1.0, 1.0), 1000.0);
        let small = Scaled::new(C64::new(2.0, 0.0), -1000.0);
        let p = big * small;
        assert!((p.to_c64() - C64::new(2.0, 2.0)).norm() < 1e-12);
        let s = big + big;
        assert!((s.ln_abs() - (1000.0 + (8.0f64).sqrt().ln())).abs() < 1e-12);
        assert!((big - big).is_zero());
    }
}
