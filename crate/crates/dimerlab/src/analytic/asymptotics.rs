//! Leading-order saddle-point forms used as convergence targets.

use super::branch::{branch_log, g_unchecked};
use super::kernel::i_pow;
use super::scaled::Scaled;
use crate::lattice::C64;

/// `h1(w) = ln(-sqrt(a/2) / w) - a / (2 w^2)`, the small-`a` form of `ln G(w)`.
pub fn h1(w: C64, a: f64) -> C64 {
    (-(a / 2.0).sqrt() / w).ln() - a / (2.0 * w * w)
}

/// Leading term of `E_{k,l}` in the Gaussian regime `k, l ≈ m`, `a m -> ∞`:
/// `i^(-k-l) exp(l h1(i) + k h1(-i)) exp(-m/(8a) (a'_m - a_m)^2 (1+a)^2) / (sqrt(4 pi) sqrt(2 a m))`
/// with `m a_m = |l| - m` and `m a'_m = |k| - m`.
/// Returned log-scaled: `(a/2)^m` leaves the `f64` range for `m` in the hundreds.
pub fn e_kl_leading(k: i64, l: i64, m: i64, a: f64) -> Scaled {
    let i = C64::new(0.0, 1.0);
    let (mf, kf, lf) = (m as f64, k.abs() as f64, l.abs() as f64);
    let am = (lf - mf) / mf;
    let am_prime = (kf - mf) / mf;
    let gauss = -mf / (8.0 * a) * (am_prime - am).powi(2) * (1.0 + a).powi(2);
    let log = lf * h1(i, a) + kf * h1(-i, a) + gauss;
    let norm = (4.0 * std::f64::consts::PI).sqrt() * (2.0 * a * mf).sqrt();
    Scaled::exp(log).scale_by(i_pow(-k.abs() - l.abs()) / norm)
}

/// `ln H_{x1,x2}(w) = (n/2) ln w + ((n - x1)/2) ln G(w) - ((n - x2)/2) ln G(1/w)`
/// at a single point, with the module's branch of the logarithm.
pub fn log_h_at(n: i64, x1: i64, x2: i64, w: C64, c: f64) -> C64 {
    let half = (n / 2) as f64;
    let e1 = ((n - x1) / 2) as f64;
    let e2 = ((n - x2) / 2) as f64;
    half * branch_log(w) + e1 * branch_log(g_unchecked(w, c)) - e2 * branch_log(g_unchecked(w.inv(), c))
}

/// [`e_kl_leading`] with `h1(±i)` replaced by the exact `ln G(±i)`.
///
/// `h1` drops an `O(a^2)` term of `ln G`; multiplied by `k + l ≈ 2m` it
/// leaves a constant factor `exp(-1/4)` when `a = m^(-1/2)`, which this form
/// does not have.
pub fn e_kl_leading_exact_g(k: i64, l: i64, m: i64, a: f64) -> Scaled {
    let i = C64::new(0.0, 1.0);
    let c = a / (1.0 + a * a);
    let (kf, lf) = (k.abs() as f64, l.abs() as f64);
    let shift = lf * (branch_log(g_unchecked(i, c)) - h1(i, a)) + kf * (branch_log(g_unchecked(-i, c)) - h1(-i, a));
    let lead = e_kl_leading(k, l, m, a);
    Scaled::exp(shift).scale_by(lead.mantissa).scale_log(lead.log_scale)
}
