//! Trapezoid nodes on a circle `|w| = r` together with every branch
//! quantity the kernel integrands need at those nodes.

use std::f64::consts::TAU;

use super::branch::{branch_log, g_unchecked, s_unchecked};
use crate::error::{Error, Result};
use crate::lattice::C64;

#[derive(Debug, Clone)]
pub struct CircleNodes {
    pub radius: f64,
    pub w: Vec<C64>,
    pub log_w: Vec<C64>,
    /// `G(w)`
    pub g: Vec<C64>,
    /// `G(1/w)`
    pub g_recip: Vec<C64>,
    pub log_g: Vec<C64>,
    pub log_g_recip: Vec<C64>,
    /// `ln( sqrt(w^2 + 2c) sqrt(w^-2 + 2c) )`
    pub log_denominator: Vec<C64>,
    /// `s(w)`
    pub s: Vec<C64>,
    /// `s(1/w)`
    pub s_recip: Vec<C64>,
}

/// Admissible radii are those strictly between `sqrt(2c)` and `1/sqrt(2c)`:
/// the circle then avoids the cuts of both `G(w)` and `G(1/w)`.
pub fn check_radius(radius: f64, c: f64) -> Result<()> {
    let lo = (2.0 * c).sqrt();
    if !(radius > lo && radius < 1.0 / lo) {
        return Err(Error::Radius {
            radius,
            constraint: format!("{lo} < r < {}", 1.0 / lo),
        });
    }
    Ok(())
}

impl CircleNodes {
    /// Nodes `w_j = r exp(2 pi i (j + 1/2) / N)`.
    pub fn new(c: f64, radius: f64, count: usize) -> Result<Self> {
        check_radius(radius, c)?;
        let root = (2.0 * c).sqrt();
        let mut t = Self {
            radius,
            w: Vec::with_capacity(count),
            log_w: Vec::with_capacity(count),
            g: Vec::with_capacity(count),
            g_recip: Vec::with_capacity(count),
            log_g: Vec::with_capacity(count),
            log_g_recip: Vec::with_capacity(count),
            log_denominator: Vec::with_capacity(count),
            s: Vec::with_capacity(count),
            s_recip: Vec::with_capacity(count),
        };
        let shift = C64::new(0.0, root);
        let half_log_sqrt = |z: C64| 0.5 * branch_log(z + shift) + 0.5 * branch_log(z - shift);
        for j in 0..count {
            let theta = TAU * (j as f64 + 0.5) / count as f64;
            let w = C64::from_polar(radius, theta);
            let wi = w.inv();
            let g = g_unchecked(w, c);
            let gr = g_unchecked(wi, c);
            t.w.push(w);
            t.log_w.push(C64::new(radius.ln(), theta));
            t.g.push(g);
            t.g_recip.push(gr);
            t.log_g.push(g.ln());
            t.log_g_recip.push(gr.ln());
            t.log_denominator.push(half_log_sqrt(w) + half_log_sqrt(wi));
            t.s.push(s_unchecked(w, c));
            t.s_recip.push(s_unchecked(wi, c));
        }
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::branch::{branch_sqrt, g_eval, g_recip};

    #[test]
    fn tables_match_pointwise_functions() {
        let c = 0.3;
        let t = CircleNodes::new(c, 0.9, 16).unwrap();
        for j in 0..16 {
            let w = t.w[j];
            assert!((t.g[j] - g_eval(w, c).unwrap()).norm() < 1e-14);
            assert!((t.g_recip[j] - g_recip(w, c).unwrap()).norm() < 1e-14);
            let d = branch_sqrt(w, c).unwrap() * branch_sqrt(w.inv(), c).unwrap();
            assert!((t.log_denominator[j].exp() - d).norm() < 1e-13);
        }
    }

    #[test]
    fn radius_window() {
        assert!(CircleNodes::new(0.4, 0.5, 8).is_err());
        assert!(CircleNodes::new(0.4, 1.2, 8).is_err());
        assert!(CircleNodes::new(0.5, 1.0, 8).is_err());
    }
}
