//! The discrete Bessel kernel reached when `a n -> 4 nu`, and the finite-`n`
//! quantity that converges to it.
//!
//! For even lattice offsets `p`, `q` the limit is
//! `(-1)^((p - q)/2) (2 pi i)^-2 ∬_{|z| > |w|} exp(nu/2 (z - 1/z - w + 1/w)) / (z - w)
//!  z^(-p/2 - 1) w^(q/2) dz dw`,
//! which equals `(-1)^((p - q)/2) Σ_{s >= 1} J_{p/2 + s}(nu) J_{q/2 + s}(nu)`.

use serde::{Deserialize, Serialize};

use crate::analytic::quadrature::{adaptive, ContourSpec, RuleValue};
use crate::analytic::scaled::Scaled;
use crate::analytic::{AnalyticKernel, DimerCoordinates, Integral};
use crate::error::{Error, Result};
use crate::lattice::{Point, C64};

fn check_even(v: i64) -> Result<()> {
    if v % 2 != 0 {
        return Err(Error::InvalidArgument(format!("offset {v} must be even")));
    }
    Ok(())
}

fn gauge_sign(p: i64, q: i64) -> f64 {
    if ((p - q) / 2).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The Bessel kernel by a double trapezoid rule on `|w| = r < |z| = 1/r`.
pub fn bessel_kernel(p: i64, q: i64, nu: f64, spec: &ContourSpec) -> Result<f64> {
    check_even(p)?;
    check_even(q)?;
    let r = spec.radius.unwrap_or(0.8);
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Radius {
            radius: r,
            constraint: "0 < r < 1".into(),
        });
    }
    let (zp, wp) = ((-(p / 2) - 1) as i32, (q / 2) as i32);
    let report = adaptive(spec, 2, |count| {
        let nodes: Vec<C64> = (0..count)
            .map(|j| C64::from_polar(1.0, std::f64::consts::TAU * (j as f64 + 0.5) / count as f64))
            .collect();
        let zs: Vec<(C64, C64)> = nodes
            .iter()
            .map(|&e| {
                let z = e / r;
                (z, (0.5 * nu * (z - 1.0 / z)).exp() * z.powi(zp) * z)
            })
            .collect();
        let ws: Vec<(C64, C64)> = nodes
            .iter()
            .map(|&e| {
                let w = e * r;
                (w, (-0.5 * nu * (w - 1.0 / w)).exp() * w.powi(wp) * w)
            })
            .collect();
        let mut sum = C64::new(0.0, 0.0);
        let mut mass = 0.0;
        for &(z, fz) in &zs {
            for &(w, fw) in &ws {
                let term = fz * fw / (z - w);
                sum += term;
                mass += term.norm();
            }
        }
        let nn = (count * count) as f64;
        Ok(RuleValue {
            value: Scaled::from_c64(sum / nn),
            log_integrand_scale: (mass / nn).ln(),
            exponent_scale: nu / r,
        })
    })?;
    let v = report.value.to_c64();
    if v.im.abs() > 1e-10 * v.re.abs().max(1.0) {
        return Err(Error::ImaginaryResidue(v.im));
    }
    Ok(gauge_sign(p, q) * v.re)
}

/// `J_m(x)` for integer `m` by its power series; accurate for moderate `x`.
pub fn bessel_j(m: i64, x: f64) -> f64 {
    if m < 0 {
        let v = bessel_j(-m, x);
        return if m % 2 == 0 { v } else { -v };
    }
    let half = 0.5 * x;
    let mut term = (0..m).fold(1.0, |acc, k| acc * half / (k + 1) as f64);
    let mut sum = term;
    for k in 1..200 {
        term *= -half * half / (k as f64 * (k as i64 + m) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// The Bessel kernel from the series `Σ_{s >= 1} J_{p/2+s} J_{q/2+s}`.
pub fn bessel_kernel_series(p: i64, q: i64, nu: f64) -> Result<f64> {
    check_even(p)?;
    check_even(q)?;
    let mut sum = 0.0;
    for s in 1..400 {
        let t = bessel_j(p / 2 + s, nu) * bessel_j(q / 2 + s, nu);
        sum += t;
        if s > 20 && t.abs() < 1e-20 {
            break;
        }
    }
    Ok(gauge_sign(p, q) * sum)
}

/// White vertex of class `(0, 0)` at offset `p` from the centre of the
/// order-`n` diagonal.
pub fn white_vertex(n: usize, p: i64) -> Point {
    let base = n as i64 / 2 + 1 + p;
    Point::new(base, base - 1)
}

pub fn black_vertex(n: usize, p: i64) -> Point {
    let base = n as i64 / 2 + 1 + p;
    Point::new(base - 1, base)
}

/// `-a i B` for the class-`(0, 0)` pair at offsets `(p, q)` with `a = 4 nu / n`.
pub fn finite_bessel(kernel: &AnalyticKernel, p: i64, q: i64) -> Result<f64> {
    check_even(p)?;
    check_even(q)?;
    let n = kernel.n();
    let coords = DimerCoordinates::new(white_vertex(n, q), black_vertex(n, p))?;
    let rep = kernel.b_integral(&coords, Integral::Plain)?;
    let v = rep.value.to_c64() * C64::new(0.0, -kernel.a());
    if v.im.abs() > 1e-8 * v.re.abs().max(1.0) {
        return Err(Error::ImaginaryResidue(v.im));
    }
    Ok(v.re)
}

/// One comparison of the finite-`n` value with its limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselPoint {
    pub n: usize,
    pub nu: f64,
    pub p: i64,
    pub q: i64,
    pub finite: f64,
    pub limit: f64,
    pub error: f64,
}

/// Finite-`n` values against the limit over all pairs of `offsets`.
pub fn bessel_limit_check(n: usize, nu: f64, offsets: &[i64]) -> Result<Vec<BesselPoint>> {
    let a = 4.0 * nu / n as f64;
    let kernel = AnalyticKernel::new(n, a)?;
    let spec = ContourSpec::default();
    let mut out = Vec::new();
    for &p in offsets {
        for &q in offsets {
            let finite = finite_bessel(&kernel, p, q)?;
            let limit = bessel_kernel(p, q, nu, &spec)?;
            out.push(BesselPoint {
                n,
                nu,
                p,
                q,
                finite,
                limit,
                error: (finite - limit).abs(),
            });
        }
    }
    Ok(out)
}
