//! The contour-integral representation of the inverse Kasteleyn matrix.
//!
//! An entry is `K11 - B + Bstar`, where `K11` is built from the single
//! integrals `E_{k,l}` on the unit circle and `B`, `Bstar` are double
//! integrals over `|w1| = r`, `|w2| = 1/r`.
//!
//! The double integrals are evaluated with the tensor trapezoid rule on
//! matching angular grids. Because `w1_j / w2_k = rho * omega^(j - k)`, the
//! Cauchy factor `1 / (1 - w1/w2)` is circulant, and the finite geometric
//! series `1/(1 - rho omega^d) = sum_{m<N} rho^m omega^(m d) / (1 - rho^N)`
//! turns each inner sum into one forward and one inverse FFT. With `V`
//! separable (see [`super::polys::SeparableV`]) the whole `N x N` rule costs
//! a dozen transforms.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::circle::{check_radius, CircleNodes};
use super::polys::{SeparableV, SignPattern};
use super::quadrature::{adaptive, ContourSpec, QuadratureReport, RuleValue};
use super::scaled::Scaled;
use crate::error::{Error, Result};
use crate::lattice::{vertex_class, Point, C64};

/// `i^m`.
pub fn i_pow(m: i64) -> C64 {
    match m.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// `c = a / (1 + a^2)` for weights `(a, 1)`.
pub fn coupling(a: f64) -> f64 {
    a / (1.0 + a * a)
}

/// A white/black pair together with the derived indices of the single
/// integrals in the `K11` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimerCoordinates {
    pub white: Point,
    pub black: Point,
    pub eps: (u8, u8),
    pub h: i64,
    pub k1: i64,
    pub l1: i64,
    pub k2: i64,
    pub l2: i64,
}

impl DimerCoordinates {
    pub fn new(white: Point, black: Point) -> Result<Self> {
        if white.x1.rem_euclid(2) != 1 || white.x2.rem_euclid(2) != 0 {
            return Err(Error::InvalidVertex(white.x1, white.x2));
        }
        if black.x1.rem_euclid(2) != 0 || black.x2.rem_euclid(2) != 1 {
            return Err(Error::InvalidVertex(black.x1, black.x2));
        }
        let eps = (vertex_class(white), vertex_class(black));
        let (e1, e2) = (eps.0 as i64, eps.1 as i64);
        let h = e1 * (1 - e2) + e2 * (1 - e1);
        let k1 = (white.x2 - black.x2 - 1) / 2 + h;
        let l1 = (black.x1 - white.x1 - 1) / 2;
        Ok(Self {
            white,
            black,
            eps,
            h,
            k1,
            l1,
            k2: k1 + 1 - 2 * h,
            l2: l1 + 1,
        })
    }
}

/// The four double integrals entering an inverse entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Integral {
    /// `B` itself.
    Plain,
    /// Black vertex reflected, `y1 -> 2n - y1`.
    ReflectBlack,
    /// White vertex reflected, `x2 -> 2n - x2`.
    ReflectWhite,
    /// Both reflected.
    ReflectBoth,
}

impl Integral {
    pub const ALL: [Integral; 4] = [
        Integral::Plain,
        Integral::ReflectBlack,
        Integral::ReflectWhite,
        Integral::ReflectBoth,
    ];

    fn prefactor_exponent(self, c: &DimerCoordinates) -> i64 {
        let (x1, x2, y1, y2) = (c.white.x1, c.white.x2, c.black.x1, c.black.x2);
        match self {
            Integral::Plain => (x2 - x1 + y1 - y2) / 2,
            Integral::ReflectBlack => (x1 - x2 - y1 - y2) / 2,
            Integral::ReflectWhite => (y2 - y1 - x2 - x1) / 2,
            Integral::ReflectBoth => (y2 + y1 + x2 + x1) / 2,
        }
    }

    /// Arguments of the `H` functions in the numerator and denominator.
    fn h_arguments(self, n: i64, c: &DimerCoordinates) -> ((i64, i64), (i64, i64)) {
        let (x1, x2, y1, y2) = (c.white.x1, c.white.x2, c.black.x1, c.black.x2);
        let top_x2 = match self {
            Integral::Plain | Integral::ReflectBlack => x2,
            _ => 2 * n - x2,
        };
        let bottom_y1 = match self {
            Integral::Plain | Integral::ReflectWhite => y1,
            _ => 2 * n - y1,
        };
        ((x1 + 1, top_x2), (bottom_y1, y2 + 1))
    }

    fn pattern(self) -> SignPattern {
        match self {
            Integral::Plain => SignPattern::Plain,
            Integral::ReflectBlack => SignPattern::FlipSecond,
            Integral::ReflectWhite => SignPattern::FlipFirst,
            Integral::ReflectBoth => SignPattern::FlipBoth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelOptions {
    /// Double integrals; the radius is that of the inner circle.
    pub double: ContourSpec,
    /// Single integrals `E_{k,l}`; the radius defaults to 1.
    pub single: ContourSpec,
    /// Doublings performed before the stopping rule may fire.
    pub min_doublings: usize,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            double: ContourSpec::default(),
            single: ContourSpec::default(),
            min_doublings: 2,
        }
    }
}

/// One assembled entry of the inverse and its parts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InverseEntry {
    pub value: Scaled,
    pub k11: Scaled,
    pub b: Scaled,
    pub b_star: Scaled,
    /// Largest node count used by any constituent integral.
    pub nodes: usize,
}

type NodePair = (CircleNodes, CircleNodes);

/// Evaluator for a fixed order `n` and weights `(a, 1)`, `a != 1`.
pub struct AnalyticKernel {
    n: usize,
    a: f64,
    c: f64,
    inner_radius: f64,
    single_radius: f64,
    options: KernelOptions,
    single_nodes: Mutex<HashMap<usize, Arc<CircleNodes>>>,
    double_nodes: Mutex<HashMap<usize, Arc<NodePair>>>,
    planner: Mutex<FftPlanner<f64>>,
    e_cache: Mutex<HashMap<(i64, i64), Arc<QuadratureReport>>>,
}

impl std::fmt::Debug for AnalyticKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnalyticKernel")
            .field("n", &self.n)
            .field("a", &self.a)
            .field("inner_radius", &self.inner_radius)
            .finish()
    }
}

/// `(sqrt(2c) + 1) / 2`, halfway between the inner cut and the unit circle.
pub fn default_radius(c: f64) -> f64 {
    ((2.0 * c).sqrt() + 1.0) / 2.0
}

impl AnalyticKernel {
    pub fn new(n: usize, a: f64) -> Result<Self> {
        Self::with_options(n, a, KernelOptions::default())
    }

    pub fn with_options(n: usize, a: f64, options: KernelOptions) -> Result<Self> {
        if n == 0 || n % 4 != 0 {
            return Err(Error::InvalidOrder(n));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidWeight { a, b: 1.0 });
        }
        let c = coupling(a);
        if (a - 1.0).abs() < 1e-12 {
            return Err(Error::Radius {
                radius: 1.0,
                constraint: "a != 1 (the cuts meet on the unit circle)".into(),
            });
        }
        let inner_radius = options.double.radius.unwrap_or_else(|| default_radius(c));
        if !(inner_radius < 1.0) {
            return Err(Error::Radius {
                radius: inner_radius,
                constraint: "r < 1".into(),
            });
        }
        check_radius(inner_radius, c)?;
        let single_radius = options.single.radius.unwrap_or(1.0);
        check_radius(single_radius, c)?;
        Ok(Self {
            n,
            a,
            c,
            inner_radius,
            single_radius,
            options,
            single_nodes: Mutex::new(HashMap::new()),
            double_nodes: Mutex::new(HashMap::new()),
            planner: Mutex::new(FftPlanner::new()),
            e_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    fn single(&self, count: usize) -> Result<Arc<CircleNodes>> {
        if let Some(t) = self.single_nodes.lock().unwrap().get(&count) {
            return Ok(t.clone());
        }
        let t = Arc::new(CircleNodes::new(self.c, self.single_radius, count)?);
        self.single_nodes.lock().unwrap().insert(count, t.clone());
        Ok(t)
    }

    fn double(&self, count: usize) -> Result<Arc<NodePair>> {
        if let Some(t) = self.double_nodes.lock().unwrap().get(&count) {
            return Ok(t.clone());
        }
        let t = Arc::new((
            CircleNodes::new(self.c, self.inner_radius, count)?,
            CircleNodes::new(self.c, 1.0 / self.inner_radius, count)?,
        ));
        self.double_nodes.lock().unwrap().insert(count, t.clone());
        Ok(t)
    }

    fn e_rule(&self, k: i64, l: i64, count: usize) -> Result<RuleValue> {
        let t = self.single(count)?;
        let logs: Vec<C64> = (0..count)
            .map(|j| l as f64 * t.log_g[j] + k as f64 * t.log_g_recip[j] - t.log_denominator[j])
            .collect();
        let top = logs.iter().fold(f64::NEG_INFINITY, |m, z| m.max(z.re));
        let sum: C64 = logs.iter().map(|z| (z - top).exp()).sum();
        let pre = i_pow(-k - l) / (2.0 * (1.0 + self.a * self.a));
        Ok(RuleValue {
            value: Scaled::new(sum / count as f64 * pre, top),
            log_integrand_scale: top,
            exponent_scale: logs.iter().fold(0.0f64, |m, z| m.max(z.norm())),
        })
    }

    /// `E_{k,l}`, even in both indices.
    pub fn e_kl(&self, k: i64, l: i64) -> Result<Arc<QuadratureReport>> {
        let key = (k.abs(), l.abs());
        if let Some(r) = self.e_cache.lock().unwrap().get(&key) {
            return Ok(r.clone());
        }
        let rep = Arc::new(adaptive(&self.options.single, self.options.min_doublings, |count| {
            self.e_rule(key.0, key.1, count)
        })?);
        self.e_cache.lock().unwrap().insert(key, rep.clone());
        Ok(rep)
    }

    /// The `K11` part of the inverse.
    pub fn k11(&self, coords: &DimerCoordinates) -> Result<Scaled> {
        let e1 = self.e_kl(coords.k1, coords.l1)?.value;
        let e2 = self.e_kl(coords.k2, coords.l2)?.value;
        let eps2 = coords.eps.1 as i32;
        let sum = e1 * C64::new(self.a.powi(eps2), 0.0) + e2 * C64::new(self.a.powi(1 - eps2), 0.0);
        Ok(sum * -i_pow(1 + coords.h))
    }

    /// `log H_{x1,x2}(w)` at every node of `t`.
    fn log_h(&self, t: &CircleNodes, x1: i64, x2: i64) -> Vec<C64> {
        let n = self.n as i64;
        let half = (n / 2) as f64;
        let e1 = ((n - x1) / 2) as f64;
        let e2 = ((n - x2) / 2) as f64;
        (0..t.len())
            .map(|j| half * t.log_w[j] + e1 * t.log_g[j] - e2 * t.log_g_recip[j])
            .collect()
    }

    fn b_rule(&self, coords: &DimerCoordinates, which: Integral, count: usize) -> Result<RuleValue> {
        let pair = self.double(count)?;
        let (inner, outer) = (&pair.0, &pair.1);
        let ((p1, q1), (p2, q2)) = which.h_arguments(self.n as i64, coords);
        let log_h1 = self.log_h(inner, p1, q1);
        let log_h2 = self.log_h(outer, p2, q2);
        let top1 = log_h1.iter().fold(f64::NEG_INFINITY, |m, z| m.max(z.re));
        let top2 = log_h2.iter().fold(f64::NEG_INFINITY, |m, z| m.max(-z.re));
        let sep = SeparableV::new(coords.eps, self.a, which.pattern());

        let rho = inner.radius / outer.radius;
        let damping: Vec<f64> = {
            let tail = 1.0 - rho.powi(count as i32);
            let mut p = 1.0 / tail;
            (0..count)
                .map(|_| {
                    let v = p;
                    p *= rho;
                    v
                })
                .collect()
        };
        let (forward, inverse) = {
            let mut planner = self.planner.lock().unwrap();
            (planner.plan_fft_forward(count), planner.plan_fft_inverse(count))
        };

        // Columns T_{(g2,q)}(j) = sum_k psi_{(g2,q)}(k) / H2(k) / (1 - w1_j / w2_k),
        // and the l1 norm of each column's input for the rounding estimate.
        let mut columns: Vec<Option<Vec<C64>>> = vec![None; 6];
        let mut column_mass = [0.0f64; 6];
        for (col, slot) in columns.iter_mut().enumerate() {
            if sep.coefficient.iter().all(|row| row[col] == 0.0) {
                continue;
            }
            let (g2, q) = (col / 3, col % 3);
            let mut buf: Vec<C64> = (0..count)
                .map(|k| {
                    let mut psi = outer.g_recip[k].powi(sep.v_power[q]) * (-outer.log_denominator[k]).exp();
                    if g2 == 1 {
                        psi *= outer.s_recip[k];
                    }
                    psi * (-log_h2[k] - top2).exp()
                })
                .collect();
            column_mass[col] = buf.iter().map(|z| z.norm()).sum::<f64>() / (1.0 - rho);
            forward.process(&mut buf);
            for (v, d) in buf.iter_mut().zip(&damping) {
                *v *= *d;
            }
            inverse.process(&mut buf);
            *slot = Some(buf);
        }

        let mut total = C64::new(0.0, 0.0);
        let mut mass = 0.0f64;
        for j in 0..count {
            let base = (-inner.log_denominator[j]).exp();
            let mut phi = [C64::new(0.0, 0.0); 6];
            for p in 0..3 {
                phi[p] = inner.g[j].powi(sep.u_power[p]) * base;
                phi[3 + p] = phi[p] * inner.s[j];
            }
            let h1 = (log_h1[j] - top1).exp();
            let mut acc = C64::new(0.0, 0.0);
            for (col, t) in columns.iter().enumerate() {
                if let Some(t) = t {
                    let weight: C64 = (0..6).map(|i| sep.coefficient[i][col] * phi[i]).sum();
                    acc += weight * t[j];
                    mass += (weight * h1).norm() * column_mass[col];
                }
            }
            total += acc * h1;
        }
        let nn = (count * count) as f64;
        let value = Scaled::new(total * i_pow(which.prefactor_exponent(coords)) / nn, top1 + top2);
        Ok(RuleValue {
            value,
            log_integrand_scale: top1 + top2 + (mass / nn).max(f64::MIN_POSITIVE).ln(),
            exponent_scale: log_h1.iter().fold(0.0f64, |m, z| m.max(z.norm()))
                + log_h2.iter().fold(0.0f64, |m, z| m.max(z.norm())),
        })
    }

    /// One of the four double integrals, without any outer sign.
    pub fn b_integral(&self, coords: &DimerCoordinates, which: Integral) -> Result<QuadratureReport> {
        adaptive(&self.options.double, self.options.min_doublings, |count| {
            self.b_rule(coords, which, count)
        })
    }

    /// `K11 - B + Bstar` with
    /// `Bstar = -i (-1)^(eps1+eps2) (I_black + I_white) + I_both`.
    ///
    /// The four double integrals share node tables and are refined together;
    /// the stopping rule is applied to the assembled entry, so a part that is
    /// negligible next to the others does not have to converge on its own.
    pub fn inverse_entry(&self, white: Point, black: Point) -> Result<InverseEntry> {
        self.inverse_entry_report(white, black).map(|(entry, _)| entry)
    }

    /// As [`Self::inverse_entry`], with the doubling history of the total.
    pub fn inverse_entry_report(&self, white: Point, black: Point) -> Result<(InverseEntry, QuadratureReport)> {
        let coords = DimerCoordinates::new(white, black)?;
        let k11 = self.k11(&coords)?;
        let sign = if (coords.eps.0 + coords.eps.1) % 2 == 0 { 1.0 } else { -1.0 };
        let mut last = (Scaled::ZERO, Scaled::ZERO);
        let report = adaptive(&self.options.double, self.options.min_doublings, |count| {
            let mut parts = [Scaled::ZERO; 4];
            let mut top = k11.ln_abs();
            let mut scales = [f64::NEG_INFINITY; 4];
            let mut exponent_scale = 0.0f64;
            for ((slot, scale), which) in parts.iter_mut().zip(scales.iter_mut()).zip(Integral::ALL) {
                let r = self.b_rule(&coords, which, count)?;
                *slot = r.value;
                *scale = r.log_integrand_scale;
                exponent_scale = exponent_scale.max(r.exponent_scale);
                top = top.max(r.log_integrand_scale);
            }
            let mass = (k11.ln_abs() - top).exp() + scales.iter().map(|s| (s - top).exp()).sum::<f64>();
            let b = parts[0];
            let b_star = (parts[1] + parts[2]) * C64::new(0.0, -sign) + parts[3];
            last = (b, b_star);
            Ok(RuleValue {
                value: k11 + b_star - b,
                log_integrand_scale: top + mass.ln(),
                exponent_scale,
            })
        })?;
        let entry = InverseEntry {
            value: report.value,
            k11,
            b: last.0,
            b_star: last.1,
            nodes: report.nodes,
        };
        Ok((entry, report))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_invariants() {
        let c = DimerCoordinates::new(Point::new(3, 4), Point::new(2, 5)).unwrap();
        assert_eq!(c.l2, c.l1 + 1);
        assert_eq!(c.k2, c.k1 + 1 - 2 * c.h);
        assert!(DimerCoordinates::new(Point::new(2, 4), Point::new(2, 5)).is_err());
    }

    #[test]
    fn i_powers() {
        assert_eq!(i_pow(-1), C64::new(0.0, -1.0));
        assert_eq!(i_pow(6), C64::new(-1.0, 0.0));
    }
}
