//! Adaptive doubling for periodic trapezoid rules on circles.

use serde::{Deserialize, Serialize};

use super::scaled::Scaled;
use crate::error::{Error, Result};

/// Node count and stopping rule for a contour integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    /// Radius of the inner circle; `None` selects the module default.
    pub radius: Option<f64>,
    pub initial_nodes: usize,
    pub max_nodes: usize,
    /// Relative change between successive doublings that counts as converged.
    pub tolerance: f64,
}

impl Default for ContourSpec {
    fn default() -> Self {
        Self {
            radius: None,
            initial_nodes: 256,
            max_nodes: 1 << 16,
            tolerance: 1e-10,
        }
    }
}

/// One trapezoid evaluation: the value and the largest integrand magnitude
/// (as a logarithm), which sets the cancellation floor.
#[derive(Debug, Clone, Copy)]
pub struct RuleValue {
    pub value: Scaled,
    pub log_integrand_scale: f64,
    /// Largest modulus of an exponent passed to `exp`; its rounding error
    /// becomes a relative error of the same size in each term.
    pub exponent_scale: f64,
}

/// Outcome of adaptive doubling.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadratureReport {
    pub value: Scaled,
    pub nodes: usize,
    /// `|v_{2N} - v_N| / |v_{2N}|` for each doubling.
    pub deltas: Vec<f64>,
    /// Rounding level relative to `|v|`: the floor times the integrand
    /// mass, divided by the value.
    pub noise: f64,
    /// `ln` of the integrand mass at the final node count.
    pub log_integrand_scale: f64,
}

/// Rounding floor relative to the integrand mass.
pub const NOISE_FLOOR: f64 = 1e-13;

impl QuadratureReport {
    /// Whether the last doubling contracted the change at least tenfold, or
    /// the change is already at the rounding floor.
    pub fn contracts(&self) -> bool {
        match self.deltas.as_slice() {
            [.., d1, d2] => *d2 <= 0.1 * d1 || *d2 <= self.noise,
            [d] => *d <= self.noise,
            [] => false,
        }
    }

    /// Estimated relative accuracy of `value`.
    pub fn relative_error(&self) -> f64 {
        self.deltas.last().copied().unwrap_or(f64::INFINITY).max(self.noise)
    }
}

fn relative_change(cur: Scaled, prev: Scaled) -> f64 {
    let d = cur - prev;
    if d.is_zero() {
        return 0.0;
    }
    (d.ln_abs() - cur.ln_abs()).exp()
}

/// Evaluate `rule(N)` for `N = initial, 2 initial, ...` until the change
/// between successive values is below `spec.tolerance` relative to the value,
/// or below the rounding floor. At least `min_doublings` doublings are done
/// so the contraction can be inspected.
pub fn adaptive<F>(spec: &ContourSpec, min_doublings: usize, mut rule: F) -> Result<QuadratureReport>
where
    F: FnMut(usize) -> Result<RuleValue>,
{
    let mut nodes = spec.initial_nodes.max(4);
    let mut prev = rule(nodes)?;
    let mut deltas = Vec::new();
    loop {
        let next_nodes = nodes * 2;
        if next_nodes > spec.max_nodes {
            let last = deltas.last().copied().unwrap_or(f64::NAN);
            return Err(Error::NoConvergence(format!(
                "{nodes} nodes reached with relative change {last:e}"
            )));
        }
        let cur = rule(next_nodes)?;
        let d = relative_change(cur.value, prev.value);
        let noise = if cur.value.is_zero() {
            f64::INFINITY
        } else {
            let floor = NOISE_FLOOR + f64::EPSILON * cur.exponent_scale;
            (floor.ln() + cur.log_integrand_scale - cur.value.ln_abs()).exp()
        };
        deltas.push(d);
        nodes = next_nodes;
        prev = cur;
        if d <= spec.tolerance.max(noise) && deltas.len() >= min_doublings {
            return Ok(QuadratureReport {
                value: cur.value,
                nodes,
                deltas,
                noise,
                log_integrand_scale: cur.log_integrand_scale,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::C64;

    #[test]
    fn geometric_series_converges() {
        // mean over the unit circle of 1/(1 - z/2) is 1.
        let spec = ContourSpec {
            initial_nodes: 8,
            ..Default::default()
        };
        let rep = adaptive(&spec, 2, |n| {
            let mut s = C64::new(0.0, 0.0);
            for j in 0..n {
                let th = std::f64::consts::TAU * (j as f64 + 0.5) / n as f64;
                s += 1.0 / (1.0 - C64::from_polar(0.5, th));
            }
            Ok(RuleValue {
                value: Scaled::from_c64(s / n as f64),
                log_integrand_scale: 2.0f64.ln(),
                exponent_scale: 0.0,
            })
        })
        .unwrap();
        assert!((rep.value.to_c64() - 1.0).norm() < 1e-12);
        assert!(rep.contracts());
    }

    #[test]
    fn cap_reports_failure() {
        let spec = ContourSpec {
            radius: None,
            initial_nodes: 8,
            max_nodes: 64,
            tolerance: 1e-14,
        };
        let mut k = 0.0;
        let r = adaptive(&spec, 1, |_| {
            k += 1.0;
            Ok(RuleValue {
                value: Scaled::from_c64(C64::new(k, 0.0)),
                log_integrand_scale: 0.0,
                exponent_scale: 0.0,
            })
        });
        assert!(matches!(r, Err(Error::NoConvergence(_))));
    }
}
