//! The extended Airy kernel and finite-dimensional distributions of the
//! Airy process.
//!
//! `A(t, x; t', y) = Atilde(t, x; t', y) - Psi(t, x; t', y) [t < t']` where
//! `Atilde` is a double contour integral over two pairs of rays and `Psi` is
//! a Gaussian. After the shifts `z -> z - i t'`, `w -> w - i t` the cubic
//! prefactor of `Atilde` cancels, so the integrand is
//! `exp(i z^3/3 + i z y) / exp(i w^3/3 + i w x) / (z - w - i (t' - t))`
//! with `z` on rays leaving `i h` at angles `pi/6`, `5 pi/6` and `w` on their
//! mirror images leaving `-i h`. The vertices are separated by more than
//! `t' - t`, which keeps the Cauchy factor bounded without crossing its pole.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::C64;
use crate::linalg::dense_det;

const I: C64 = C64::new(0.0, 1.0);

/// Gauss-Legendre nodes and weights mapped to `[0, length]`.
fn gauss_on(length: f64, count: usize) -> Vec<(f64, f64)> {
    let degree = NonZeroUsize::new(count.max(1)).expect("positive degree");
    GaussLegendre::new(degree)
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * length * (x + 1.0), 0.5 * length * w))
        .collect()
}

/// `Ai(x)` and `Ai'(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryValue {
    pub ai: f64,
    pub ai_prime: f64,
}

/// Airy function and derivative from `Ai(x) = (2 pi i)^-1 ∫ exp(t^3/3 - x t) dt`.
///
/// For `x > 0` the contour is a pair of rays at `±pi/3` leaving the saddle
/// `sqrt(x)`, with the saddle value factored out so small results keep their
/// relative accuracy. For `x <= 0` the saddles sit at `±i sqrt(-x)`; the
/// contour runs up the imaginary axis between them, where the integrand has
/// unit modulus, and leaves along rays at `±pi/3`, on which it decays
/// monotonically. Only the upper half is integrated since the integrand is
/// conjugation-symmetric.
pub fn airy(x: f64) -> AiryValue {
    let dir = C64::from_polar(1.0, std::f64::consts::FRAC_PI_3);
    let mut sum = C64::new(0.0, 0.0);
    let mut sum_prime = C64::new(0.0, 0.0);
    let (start, f0) = if x > 0.0 {
        let r = x.sqrt();
        (C64::new(r, 0.0), r.powi(3) / 3.0 - x * r)
    } else {
        let height = (-x).sqrt();
        // Phase (2/3) height^3 along the segment; about 12 nodes per turn.
        let turns = (2.0 / 3.0) * height.powi(3) / std::f64::consts::TAU;
        let count = 24 + (12.0 * turns).ceil() as usize;
        for (y, w) in gauss_on(height, count) {
            let t = C64::new(0.0, y);
            let e = (t * t * t / 3.0 - x * t).exp() * w * I;
            sum += e;
            sum_prime -= t * e;
        }
        (C64::new(0.0, height), 0.0)
    };
    for (s, w) in gauss_on(10.0, 160) {
        let t = start + s * dir;
        let e = (t * t * t / 3.0 - x * t - f0).exp() * w * dir;
        sum += e;
        sum_prime -= t * e;
    }
    let scale = f0.exp() / std::f64::consts::PI;
    AiryValue {
        ai: sum.im * scale,
        ai_prime: sum_prime.im * scale,
    }
}

/// The classical Airy kernel `Atilde(0, x; 0, y)` from Airy function values.
pub fn airy_kernel_classical(x: f64, y: f64) -> f64 {
    let (ax, ay) = (airy(x), airy(y));
    if (x - y).abs() < 1e-9 {
        return ax.ai_prime * ax.ai_prime - x * ax.ai * ax.ai;
    }
    (ax.ai * ay.ai_prime - ax.ai_prime * ay.ai) / (x - y)
}

/// The Gaussian part, defined for `t < t2`.
pub fn psi(t: f64, x: f64, t2: f64, y: f64) -> Result<f64> {
    let d = t2 - t;
    if !(d > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "psi needs t < t', got t = {t}, t' = {t2}"
        )));
    }
    let log = -0.5 * (4.0 * std::f64::consts::PI * d).ln() - (x - y).powi(2) / (4.0 * d)
        - 0.5 * d * (x + y)
        + d.powi(3) / 12.0;
    Ok(log.exp())
}

/// Ray discretisation for the double contour integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryContours {
    /// Length of each ray.
    pub length: f64,
    /// Gauss-Legendre nodes per ray.
    pub nodes: usize,
}

impl Default for AiryContours {
    fn default() -> Self {
        Self {
            length: 12.0,
            nodes: 200,
        }
    }
}

/// Imaginary residue tolerated in a value that must be real.
pub const RESIDUE_TOL: f64 = 1e-8;

/// Nodes and oriented weights of one two-ray contour.
struct Contour {
    points: Vec<C64>,
    weights: Vec<C64>,
}

impl Contour {
    /// Rays `vertex + s e^{i a}` for the two angles, traversed from the
    /// first ray's far end through the vertex to the second ray's far end.
    fn rays(vertex: C64, angles: (f64, f64), spec: &AiryContours) -> Self {
        let rule = gauss_on(spec.length, spec.nodes);
        let mut points = Vec::with_capacity(2 * rule.len());
        let mut weights = Vec::with_capacity(2 * rule.len());
        for (angle, sign) in [(angles.0, -1.0), (angles.1, 1.0)] {
            let dir = C64::from_polar(1.0, angle);
            for &(s, w) in &rule {
                points.push(vertex + s * dir);
                weights.push(sign * w * dir);
            }
        }
        Self { points, weights }
    }
}

/// Vertex height `h` for a time gap `t' - t`: the two vertices `±i h` are
/// then at least one unit further apart than the pole offset.
fn vertex_height(gap: f64) -> f64 {
    (0.5 * (gap + 1.0)).max(0.5)
}

/// One block `Atilde(t, x_k; t2, y_l)` for all `k`, `l`.
fn tilde_block(t: f64, xs: &[f64], t2: f64, ys: &[f64], spec: &AiryContours) -> DMatrix<C64> {
    use std::f64::consts::PI;
    let gap = t2 - t;
    let h = vertex_height(gap);
    let upper = Contour::rays(C64::new(0.0, h), (PI / 6.0, 5.0 * PI / 6.0), spec);
    let lower = Contour::rays(C64::new(0.0, -h), (-PI / 6.0, -5.0 * PI / 6.0), spec);
    let m = upper.points.len();
    // left[k, v] = weight_v exp(-(i v^3/3 + i v x_k)), right[u, l] = weight_u exp(i u^3/3 + i u y_l)
    let left = DMatrix::from_fn(xs.len(), m, |k, j| {
        let v = lower.points[j];
        lower.weights[j] * (-(I * v * v * v / 3.0 + I * v * xs[k])).exp()
    });
    let right = DMatrix::from_fn(m, ys.len(), |j, l| {
        let u = upper.points[j];
        upper.weights[j] * (I * u * u * u / 3.0 + I * u * ys[l]).exp()
    });
    let cauchy = DMatrix::from_fn(m, m, |jv, ju| 1.0 / (upper.points[ju] - lower.points[jv] - I * gap));
    // 1 / (i (2 pi i)^2) = i / (4 pi^2)
    let pre = I / (4.0 * PI * PI);
    (left * cauchy * right) * pre
}

fn real_checked(v: C64) -> Result<f64> {
    if v.im.abs() > RESIDUE_TOL * v.re.abs().max(1.0) {
        return Err(Error::ImaginaryResidue(v.im));
    }
    Ok(v.re)
}

/// The Airy part `Atilde(t, x; t2, y)`.
pub fn airy_tilde(t: f64, x: f64, t2: f64, y: f64, spec: &AiryContours) -> Result<f64> {
    real_checked(tilde_block(t, &[x], t2, &[y], spec)[(0, 0)])
}

/// `Atilde` from its single-integral form
/// `∫_0^∞ exp((t2 - t) s) Ai(x + s) Ai(y + s) ds`, used as a cross-check.
pub fn airy_tilde_single(t: f64, x: f64, t2: f64, y: f64) -> f64 {
    let upper = 16.0;
    let mut sum = 0.0;
    for panel in 0..16 {
        let lo = panel as f64 * upper / 16.0;
        for (s, w) in gauss_on(upper / 16.0, 24) {
            let s = lo + s;
            sum += w * ((t2 - t) * s).exp() * airy(x + s).ai * airy(y + s).ai;
        }
    }
    sum
}

/// Forward time gap beyond which the Fredholm blocks use [`forward_block`]:
/// both `Atilde` and `Psi` grow like `exp((t' - t)^3 / 12)` and their
/// difference loses that many digits.
pub const FORWARD_SWITCH: f64 = 2.0;

/// `A(t, x_k; t2, y_l)` for `t < t2` from
/// `A = -∫_{-∞}^0 exp((t2 - t) s) Ai(x + s) Ai(y + s) ds`, which has no
/// cancellation when the gap is large. The range is cut where the exponential
/// drops below `e^-42`.
pub fn forward_block(t: f64, xs: &[f64], t2: f64, ys: &[f64]) -> Result<DMatrix<f64>> {
    let d = t2 - t;
    if !(d > 0.0) {
        return Err(Error::InvalidArgument(format!("forward block needs t < t', got {t}, {t2}")));
    }
    let length = 42.0 / d;
    let panels = length.ceil() as usize;
    let width = length / panels as f64;
    let rule = gauss_on(width, 24);
    let nodes: Vec<(f64, f64)> = (0..panels)
        .flat_map(|p| {
            let lo = -length + p as f64 * width;
            rule.iter().map(move |&(s, w)| (lo + s, w))
        })
        .collect();
    let side = |points: &[f64]| {
        DMatrix::from_fn(points.len(), nodes.len(), |k, m| {
            let (s, w) = nodes[m];
            airy(points[k] + s).ai * (w * (d * s).exp()).sqrt()
        })
    };
    Ok(-(side(xs) * side(ys).transpose()))
}

/// The extended Airy kernel.
pub fn extended_kernel(t: f64, x: f64, t2: f64, y: f64, spec: &AiryContours) -> Result<f64> {
    let tilde = airy_tilde(t, x, t2, y, spec)?;
    if t < t2 {
        Ok(tilde - psi(t, x, t2, y)?)
    } else {
        Ok(tilde)
    }
}

/// `exp(beta_j alpha_j - beta_i alpha_i + 2/3 (beta_j^3 - beta_i^3))`.
pub fn gauge(alpha_i: f64, beta_i: f64, alpha_j: f64, beta_j: f64) -> f64 {
    (beta_j * alpha_j - beta_i * alpha_i + 2.0 / 3.0 * (beta_j.powi(3) - beta_i.powi(3))).exp()
}

/// The limit of the rescaled inverse Kasteleyn entry:
/// `-gauge * A(-beta_j, alpha_j + beta_j^2; -beta_i, alpha_i + beta_i^2)`.
pub fn window_limit(alpha_i: f64, beta_i: f64, alpha_j: f64, beta_j: f64, spec: &AiryContours) -> Result<f64> {
    let a = extended_kernel(
        -beta_j,
        alpha_j + beta_j * beta_j,
        -beta_i,
        alpha_i + beta_i * beta_i,
        spec,
    )?;
    Ok(-gauge(alpha_i, beta_i, alpha_j, beta_j) * a)
}

/// Times and levels of a gap event `{A(t_1) <= xi_1, ..., A(t_m) <= xi_m}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AiryQuery {
    pub times: Vec<f64>,
    pub levels: Vec<f64>,
    /// Nodes per time at the first evaluation; doubled until converged.
    pub initial_nodes: usize,
    pub max_nodes: usize,
    pub tolerance: f64,
    pub contours: AiryContours,
}

impl AiryQuery {
    pub fn new(times: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        let q = Self {
            times,
            levels,
            initial_nodes: 16,
            max_nodes: 256,
            tolerance: 1e-10,
            contours: AiryContours::default(),
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.is_empty() || self.times.len() != self.levels.len() {
            return Err(Error::InvalidArgument(
                "times and levels must be non-empty and of equal length".into(),
            ));
        }
        if self.times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("times must be strictly increasing".into()));
        }
        if self.times.iter().chain(&self.levels).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("times and levels must be finite".into()));
        }
        Ok(())
    }
}

/// A Fredholm determinant with its convergence history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FddResult {
    pub value: f64,
    pub nodes_used: usize,
    /// Imaginary part of the determinant before it was discarded.
    pub residue: f64,
    /// `|value_{2N} - value_N|` for each doubling.
    pub deltas: Vec<f64>,
}

impl FddResult {
    /// Whether the last doubling shrank the change at least tenfold, or the
    /// change is already at rounding level.
    pub fn contracts(&self) -> bool {
        match self.deltas.as_slice() {
            [.., d1, d2] => *d2 <= 0.1 * d1 || *d2 <= 1e-13,
            _ => false,
        }
    }
}

/// Nodes `x = xi + u / (1 - u)` and weights for `∫_xi^∞` with `count`
/// Gauss-Legendre points in `u`.
fn half_line(xi: f64, count: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_on(1.0, count)
        .into_iter()
        .map(|(u, w)| (xi + u / (1.0 - u), w / (1.0 - u).powi(2)))
        .unzip()
}

fn fredholm(query: &AiryQuery, count: usize) -> Result<C64> {
    let m = query.times.len();
    let grids: Vec<(Vec<f64>, Vec<f64>)> = query.levels.iter().map(|&xi| half_line(xi, count)).collect();
    let blocks: Vec<((usize, usize), DMatrix<C64>)> = (0..m * m)
        .into_par_iter()
        .map(|idx| {
            let (a, b) = (idx / m, idx % m);
            let (ta, tb) = (query.times[a], query.times[b]);
            let (xs, _) = &grids[a];
            let (ys, _) = &grids[b];
            if ta < tb && tb - ta > FORWARD_SWITCH {
                return Ok(((a, b), forward_block(ta, xs, tb, ys)?.map(|v| C64::new(v, 0.0))));
            }
            let mut block = tilde_block(ta, xs, tb, ys, &query.contours);
            if ta < tb {
                for (k, &x) in xs.iter().enumerate() {
                    for (l, &y) in ys.iter().enumerate() {
                        block[(k, l)] -= psi(ta, x, tb, y)?;
                    }
                }
            }
            Ok(((a, b), block))
        })
        .collect::<Result<_>>()?;
    let size = m * count;
    let mut mat = DMatrix::identity(size, size);
    for ((a, b), block) in blocks {
        let (wa, wb) = (&grids[a].1, &grids[b].1);
        for k in 0..count {
            for l in 0..count {
                mat[(a * count + k, b * count + l)] -= (wa[k] * wb[l]).sqrt() * block[(k, l)];
            }
        }
    }
    Ok(dense_det(&mat))
}

/// `P(A(t_1) <= xi_1, ..., A(t_m) <= xi_m) = det(1 - A)` on
/// `L^2(∪_j {t_j} x (xi_j, ∞))`, by Nyström discretisation with doubling.
pub fn airy_process_fdd(query: &AiryQuery) -> Result<FddResult> {
    query.validate()?;
    let mut count = query.initial_nodes.max(2);
    let mut prev = fredholm(query, count)?;
    let mut deltas = Vec::new();
    loop {
        let next = count * 2;
        if next > query.max_nodes {
            return Err(Error::NoConvergence(format!(
                "Fredholm determinant still changing by {:e} at {count} nodes per time",
                deltas.last().copied().unwrap_or(f64::NAN)
            )));
        }
        let cur = fredholm(query, next)?;
        let d = (cur - prev).norm();
        deltas.push(d);
        count = next;
        prev = cur;
        if d <= query.tolerance && deltas.len() >= 2 {
            break;
        }
    }
    let residue = prev.im;
    if residue.abs() > RESIDUE_TOL {
        return Err(Error::ImaginaryResidue(residue));
    }
    let value = prev.re;
    let clipped = if (-1e-6..0.0).contains(&value) {
        0.0
    } else if (1.0..=1.0 + 1e-6).contains(&value) {
        1.0
    } else if (0.0..=1.0).contains(&value) {
        value
    } else {
        return Err(Error::OutOfRange(value));
    };
    Ok(FddResult {
        value: clipped,
        nodes_used: count,
        residue,
        deltas,
    })
}

/// Single-time distribution `det(1 - K_Ai)` on `(s, s + length)` with the
/// classical kernel and a plain Gauss-Legendre rule; an independent check
/// of [`airy_process_fdd`].
pub fn tracy_widom_reference(s: f64, length: f64, nodes: usize) -> f64 {
    let rule: Vec<(f64, f64)> = gauss_on(length, nodes).into_iter().map(|(x, w)| (s + x, w)).collect();
    let values: Vec<AiryValue> = rule.iter().map(|&(x, _)| airy(x)).collect();
    let mat = DMatrix::from_fn(nodes, nodes, |k, l| {
        let (xk, wk) = rule[k];
        let (xl, wl) = rule[l];
        let kernel = if k == l {
            values[k].ai_prime.powi(2) - xk * values[k].ai.powi(2)
        } else {
            (values[k].ai * values[l].ai_prime - values[k].ai_prime * values[l].ai) / (xk - xl)
        };
        let delta = if k == l { 1.0 } else { 0.0 };
        delta - (wk * wl).sqrt() * kernel
    });
    crate::linalg::dense_det_real(&mat)
}
