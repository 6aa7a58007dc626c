//! Coordinates of the edge-scaling window around the rough-smooth boundary
//! and the rescaled kernel whose limit is the extended Airy kernel.

use serde::{Deserialize, Serialize};

use super::kernel::{i_pow, AnalyticKernel};
use super::polys::{v_function, SignPattern};
use super::scaled::Scaled;
use crate::error::{Error, Result};
use crate::lattice::{Point, C64};

fn nearest_even(x: f64) -> i64 {
    2 * (x / 2.0).round() as i64
}

/// Scale parameters for order `n` with `a = n^(gamma - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingWindow {
    pub n: usize,
    pub gamma: f64,
    pub a: f64,
    pub c: f64,
    /// The even integer `n (1 + xi_c)`.
    pub reference: i64,
    /// `-sqrt(1 + 2c) / 2`, the rough-frozen reference.
    pub xi_f: f64,
    /// `(a n)^(1/3)`
    pub p_n: f64,
    /// `(n^2 / a)^(1/3)`
    pub q_n: f64,
    /// Time extent of the box around the reference point.
    pub beta: f64,
    /// `beta * ln n`
    pub alpha: f64,
    /// `sqrt(a/2) exp(a/2)`
    pub g_curly: f64,
}

/// A requested window point and the admissible lattice point it rounds to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowPoint {
    pub requested_alpha: f64,
    pub requested_beta: f64,
    /// Achieved `alpha = shift / p_n`.
    pub alpha: f64,
    /// Achieved `beta = time / q_n`.
    pub beta: f64,
    /// Even integer `alpha p_n`.
    pub shift: i64,
    /// Even integer `beta q_n`.
    pub time: i64,
}

impl ScalingWindow {
    pub fn new(n: usize, gamma: f64, beta: f64) -> Result<Self> {
        if n == 0 || n % 4 != 0 {
            return Err(Error::InvalidOrder(n));
        }
        if !(gamma > 0.0 && gamma < 0.5) {
            return Err(Error::InvalidArgument(format!("gamma = {gamma} outside (0, 1/2)")));
        }
        let nf = n as f64;
        let a = nf.powf(gamma - 1.0);
        Self::with_weight(n, gamma, a, beta)
    }

    /// Window for an explicit weight `a` (the exponent is recorded only).
    pub fn with_weight(n: usize, gamma: f64, a: f64, beta: f64) -> Result<Self> {
        let nf = n as f64;
        let c = a / (1.0 + a * a);
        let lo = nf * (1.0 - 0.5 * (1.0 + 2.0 * c).sqrt());
        let hi = nf * (1.0 - 0.5 * (1.0 - 2.0 * c).sqrt());
        let mut reference = hi.floor() as i64;
        if reference % 2 != 0 {
            reference -= 1;
        }
        if (reference as f64) < lo {
            return Err(Error::InvalidArgument(format!(
                "no even integer in [{lo}, {hi}] for n = {n}, a = {a}"
            )));
        }
        Ok(Self {
            n,
            gamma,
            a,
            c,
            reference,
            xi_f: -0.5 * (1.0 + 2.0 * c).sqrt(),
            p_n: (a * nf).cbrt(),
            q_n: (nf * nf / a).cbrt(),
            beta,
            alpha: beta * nf.ln(),
            g_curly: (a / 2.0).sqrt() * (a / 2.0).exp(),
        })
    }

    /// `xi_c` itself.
    pub fn xi_c(&self) -> f64 {
        self.reference as f64 / self.n as f64 - 1.0
    }

    /// Round `(alpha p_n, beta q_n)` to the nearest even integers.
    pub fn round(&self, alpha: f64, beta: f64) -> WindowPoint {
        let shift = nearest_even(alpha * self.p_n);
        let time = nearest_even(beta * self.q_n);
        WindowPoint {
            requested_alpha: alpha,
            requested_beta: beta,
            alpha: shift as f64 / self.p_n,
            beta: time as f64 / self.q_n,
            shift,
            time,
        }
    }

    fn base(&self, p: &WindowPoint) -> (i64, i64) {
        let f = self.reference + 1 + p.shift;
        (f - p.time, f + p.time)
    }

    /// The white vertex of class `eps1` at a window point.
    pub fn white(&self, p: &WindowPoint, eps1: u8) -> Point {
        let (u, v) = self.base(p);
        Point::new(u, v + 2 * eps1 as i64 - 1)
    }

    /// The black vertex of class `eps2` at a window point.
    pub fn black(&self, p: &WindowPoint, eps2: u8) -> Point {
        let (u, v) = self.base(p);
        Point::new(u + 2 * eps2 as i64 - 1, v)
    }
}

/// `g_{eps} = -2 i V_{eps}(i, i)`.
pub fn g_constant(eps: (u8, u8), a: f64) -> C64 {
    let i = C64::new(0.0, 1.0);
    -2.0 * i * v_function(eps, a, i, i, SignPattern::Plain)
}

/// Small-`a` form `i^(1 + eps1(1-eps2) - eps2(1-eps1)) (a/2)^((eps1+eps2)/2)`.
pub fn g_constant_leading(eps: (u8, u8), a: f64) -> C64 {
    let (e1, e2) = (eps.0 as i64, eps.1 as i64);
    i_pow(1 + e1 * (1 - e2) - e2 * (1 - e1)) * (a / 2.0).powf((e1 + e2) as f64 / 2.0)
}

/// A rescaled kernel value together with the lattice points it used.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RescaledEntry {
    pub value: C64,
    pub white: Point,
    pub black: Point,
    /// Window point of the white vertex (`j`).
    pub point_j: WindowPoint,
    /// Window point of the black vertex (`i`).
    pub point_i: WindowPoint,
    /// Largest quadrature node count used.
    pub nodes: usize,
}

/// `i^(x1-y1-1) G^((2+x1-x2-y1+y2)/2) g^-1 p_n K^-1(x, y)` with `x` the white
/// vertex at `point_j` (class `eps1`) and `y` the black vertex at `point_i`
/// (class `eps2`).
pub fn rescaled_kernel(
    window: &ScalingWindow,
    kernel: &AnalyticKernel,
    point_i: &WindowPoint,
    eps2: u8,
    point_j: &WindowPoint,
    eps1: u8,
) -> Result<RescaledEntry> {
    if kernel.n() != window.n || (kernel.a() - window.a).abs() > 1e-15 * window.a {
        return Err(Error::InvalidArgument("kernel and window disagree on (n, a)".into()));
    }
    let x = window.white(point_j, eps1);
    let y = window.black(point_i, eps2);
    let entry = kernel.inverse_entry(x, y)?;
    let exponent = (2 + x.x1 - x.x2 - y.x1 + y.x2) / 2;
    let factor = Scaled::new(
        i_pow(x.x1 - y.x1 - 1) * window.p_n / g_constant((eps1, eps2), window.a),
        exponent as f64 * window.g_curly.ln(),
    );
    Ok(RescaledEntry {
        value: (entry.value * factor).to_c64(),
        white: x,
        black: y,
        point_j: *point_j,
        point_i: *point_i,
        nodes: entry.nodes,
    })
}
