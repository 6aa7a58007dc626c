//! The square root `sqrt(w^2 + 2c)` with the argument convention
//! `(-pi/2, 3pi/2]`, the map `G` and the companion `s(w) = w sqrt(w^-2 + 2c)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::C64;

/// Logarithm with argument in `(-pi/2, 3pi/2]`.
pub fn branch_log(z: C64) -> C64 {
    let mut t = z.arg();
    if t <= -PI / 2.0 {
        t += 2.0 * PI;
    }
    C64::new(z.norm().ln(), t)
}

/// True when `w` lies on the segment `i[-sqrt(2c), sqrt(2c)]`.
pub fn on_cut(w: C64, c: f64) -> bool {
    w.re == 0.0 && w.im.abs() <= (2.0 * c).sqrt()
}

/// `sqrt(w^2 + 2c)` without the cut check.
pub fn sqrt_unchecked(w: C64, c: f64) -> C64 {
    let s = C64::new(0.0, (2.0 * c).sqrt());
    (0.5 * branch_log(w + s) + 0.5 * branch_log(w - s)).exp()
}

pub fn branch_sqrt(w: C64, c: f64) -> Result<C64> {
    if on_cut(w, c) {
        return Err(Error::OnCut(format!("{w}")));
    }
    Ok(sqrt_unchecked(w, c))
}

pub fn g_unchecked(w: C64, c: f64) -> C64 {
    (w - sqrt_unchecked(w, c)) / (2.0 * c).sqrt()
}

/// `G(w) = (w - sqrt(w^2 + 2c)) / sqrt(2c)`.
pub fn g_eval(w: C64, c: f64) -> Result<C64> {
    Ok((w - branch_sqrt(w, c)?) / (2.0 * c).sqrt())
}

/// `G(1/w)`, extended by `G(1/0) = 0`.
pub fn g_recip(w: C64, c: f64) -> Result<C64> {
    if w == C64::new(0.0, 0.0) {
        return Ok(w);
    }
    g_eval(w.inv(), c)
}

/// `s(w) = w sqrt(w^-2 + 2c)`.
pub fn s_unchecked(w: C64, c: f64) -> C64 {
    w * sqrt_unchecked(w.inv(), c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_real_branch() {
        let c = 0.3;
        let v = branch_sqrt(C64::new(1.0, 0.0), c).unwrap();
        assert!((v - C64::new((1.0 + 2.0 * c).sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn value_at_i() {
        let v = branch_sqrt(C64::new(0.0, 1.0), 0.18).unwrap();
        assert!((v - C64::new(0.0, 0.8)).norm() < 1e-14);
    }

    #[test]
    fn cut_is_rejected() {
        assert!(branch_sqrt(C64::new(0.0, 0.1), 0.18).is_err());
        assert!(g_eval(C64::new(0.0, -0.5), 0.18).is_err());
        assert_eq!(g_recip(C64::new(0.0, 0.0), 0.2).unwrap(), C64::new(0.0, 0.0));
    }
}
