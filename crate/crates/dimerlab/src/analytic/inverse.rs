//! Inverse entries for arbitrary positive weights `(a, b)`.
//!
//! Scaling every weight by `1/b` scales the inverse by `b`, so only `(a/b, 1)`
//! is ever integrated. The representation degenerates at `a = b` (both cuts
//! reach the unit circle), and converges slowly nearby. There the entry, an
//! analytic function of `t = ln(a/b)`, is recovered by barycentric
//! interpolation from Chebyshev nodes on `0.2 <= |t| <= 1.2`.

use std::f64::consts::PI;

use super::kernel::{AnalyticKernel, InverseEntry, KernelOptions};
use super::scaled::Scaled;
use crate::error::{Error, Result};
use crate::lattice::{Point, C64};

/// `|ln(a/b)|` below which interpolation replaces direct evaluation.
pub const INTERPOLATION_THRESHOLD: f64 = 0.2;
const NODES_PER_SIDE: usize = 14;
const SIDE_LOW: f64 = 0.2;
const SIDE_HIGH: f64 = 1.2;

enum Mode {
    Direct(Box<AnalyticKernel>),
    Interpolated {
        t: f64,
        nodes: Vec<f64>,
        weights: Vec<f64>,
        kernels: Vec<AnalyticKernel>,
    },
}

/// Evaluator of `K^{-1}(white, black)` for weights `(a, b)`.
pub struct InverseEvaluator {
    n: usize,
    a: f64,
    b: f64,
    mode: Mode,
}

fn interpolation_nodes() -> Vec<f64> {
    let mid = 0.5 * (SIDE_LOW + SIDE_HIGH);
    let half = 0.5 * (SIDE_HIGH - SIDE_LOW);
    let side: Vec<f64> = (0..NODES_PER_SIDE)
        .map(|k| mid + half * (PI * (2 * k + 1) as f64 / (2 * NODES_PER_SIDE) as f64).cos())
        .collect();
    side.iter().map(|t| -t).chain(side.iter().copied()).collect()
}

fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|i| {
            let p: f64 = (0..nodes.len())
                .filter(|&j| j != i)
                .map(|j| nodes[i] - nodes[j])
                .product();
            1.0 / p
        })
        .collect()
}

impl InverseEvaluator {
    pub fn new(n: usize, a: f64, b: f64) -> Result<Self> {
        Self::with_options(n, a, b, KernelOptions::default())
    }

    pub fn with_options(n: usize, a: f64, b: f64, options: KernelOptions) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
            return Err(Error::InvalidWeight { a, b });
        }
        let t = (a / b).ln();
        let mode = if t.abs() >= INTERPOLATION_THRESHOLD {
            Mode::Direct(Box::new(AnalyticKernel::with_options(n, a / b, options)?))
        } else {
            let nodes = interpolation_nodes();
            let kernels = nodes
                .iter()
                .map(|&s| AnalyticKernel::with_options(n, s.exp(), options))
                .collect::<Result<Vec<_>>>()?;
            Mode::Interpolated {
                t,
                weights: barycentric_weights(&nodes),
                nodes,
                kernels,
            }
        };
        Ok(Self { n, a, b, mode })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn is_interpolated(&self) -> bool {
        matches!(self.mode, Mode::Interpolated { .. })
    }

    /// The direct evaluator, when the weights allow one.
    pub fn kernel(&self) -> Option<&AnalyticKernel> {
        match &self.mode {
            Mode::Direct(k) => Some(k),
            Mode::Interpolated { .. } => None,
        }
    }

    /// Full decomposition of an entry (direct mode only).
    pub fn decomposed(&self, white: Point, black: Point) -> Result<InverseEntry> {
        match &self.mode {
            Mode::Direct(k) => {
                let mut e = k.inverse_entry(white, black)?;
                let inv_b = C64::new(1.0 / self.b, 0.0);
                e.value = e.value * inv_b;
                e.k11 = e.k11 * inv_b;
                e.b = e.b * inv_b;
                e.b_star = e.b_star * inv_b;
                Ok(e)
            }
            Mode::Interpolated { .. } => Err(Error::InvalidArgument(
                "no decomposition near a = b; the entry is interpolated".into(),
            )),
        }
    }

    /// The entry as a log-scaled number.
    pub fn entry_scaled(&self, white: Point, black: Point) -> Result<Scaled> {
        let unit = match &self.mode {
            Mode::Direct(k) => k.inverse_entry(white, black)?.value,
            Mode::Interpolated {
                t,
                nodes,
                weights,
                kernels,
            } => {
                let mut num = Scaled::ZERO;
                let mut den = 0.0;
                let mut exact = None;
                for ((&s, &w), k) in nodes.iter().zip(weights).zip(kernels) {
                    let f = k.inverse_entry(white, black)?.value;
                    if s == *t {
                        exact = Some(f);
                        break;
                    }
                    num = num + f * C64::new(w / (t - s), 0.0);
                    den += w / (t - s);
                }
                exact.unwrap_or(num * C64::new(1.0 / den, 0.0))
            }
        };
        Ok(unit * C64::new(1.0 / self.b, 0.0))
    }

    pub fn entry(&self, white: Point, black: Point) -> Result<C64> {
        Ok(self.entry_scaled(white, black)?.to_c64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barycentric_reproduces_polynomials() {
        let nodes = interpolation_nodes();
        let w = barycentric_weights(&nodes);
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x.powi(5);
        for t in [0.0, 0.1, -0.13] {
            let mut num = 0.0;
            let mut den = 0.0;
            for (&s, &wi) in nodes.iter().zip(&w) {
                num += wi * f(s) / (t - s);
                den += wi / (t - s);
            }
            assert!((num / den - f(t)).abs() < 1e-10);
        }
    }
}
