//! The polynomial factors of the double-contour integrand and the
//! separable form used by the fast quadrature.
//!
//! `V(w1, w2)` is a sum over `gamma in {0,1}^2` of terms
//! `prefactor * s(w1)^g1 s(1/w2)^g2 * ytilde(G(w1), G(1/w2))`, and every
//! `ytilde` is a polynomial of degree at most two in `u^{±2}` and `v^{±2}`.
//! Hence `V` is a sum of at most 36 products `phi(w1) * psi(w2)`.

use super::branch::{g_unchecked, s_unchecked, sqrt_unchecked};
use crate::lattice::C64;

/// The four base polynomials for class `(0, 0)` in the squared variables
/// `uu = u^2`, `vv = v^2`.
pub fn ytilde_base(gamma: (u8, u8), a: f64, b: f64, uu: C64, vv: C64) -> C64 {
    let (a2, b2) = (a * a, b * b);
    match gamma {
        (0, 0) => {
            let (a4, a6, b4, b6) = (a2 * a2, a2 * a2 * a2, b2 * b2, b2 * b2 * b2);
            let uv = uu * vv;
            let bracket = 2.0 * a6 * uv
                - a4 * b2 * (1.0 + uu * uu + uv - uu * uv + vv * vv - uv * vv)
                - a2 * b4 * (1.0 + 3.0 * uu + 3.0 * vv + 2.0 * uv + uu * uv + uv * vv - uv * uv)
                - b6 * (1.0 + vv + uu + 3.0 * uv);
            bracket * (a / (4.0 * (a2 + b2) * (a2 + b2)))
        }
        (0, 1) => {
            (b2 + a2 * uu) * (2.0 * a2 * vv + b2 * (1.0 + vv - uu + uu * vv)) * (a / (4.0 * (a2 + b2)))
        }
        (1, 0) => {
            (b2 + a2 * vv) * (2.0 * a2 * uu + b2 * (1.0 - vv + uu + uu * vv)) * (a / (4.0 * (a2 + b2)))
        }
        _ => (2.0 * a2 * uu * vv + b2 * (-1.0 + vv + uu + uu * vv)) * (a / 4.0),
    }
}

/// `ytilde^{eps}_{gamma}(a, b, u, v)` through the class substitutions.
pub fn ytilde(gamma: (u8, u8), eps: (u8, u8), a: f64, b: f64, u: C64, v: C64) -> C64 {
    let sq = |z: C64| z * z;
    match eps {
        (0, 0) => ytilde_base(gamma, a, b, sq(u), sq(v)),
        (0, 1) => ytilde_base(gamma, b, a, sq(u), sq(v.inv())),
        (1, 0) => ytilde_base(gamma, b, a, sq(u.inv()), sq(v)),
        _ => ytilde_base(gamma, a, b, sq(u.inv()), sq(v.inv())),
    }
}

fn sign(exponent: u32) -> f64 {
    if exponent % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Extra sign attached to each `gamma` term for the four integrals of the
/// inverse: the plain one and the three reflected ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum SignPattern {
    Plain,
    /// `(-1)^(eps2 + gamma2)`
    FlipSecond,
    /// `(-1)^(eps1 + gamma1)`
    FlipFirst,
    /// `(-1)^(eps1 + gamma1 + eps2 + gamma2)`
    FlipBoth,
}

impl SignPattern {
    pub fn sign(self, eps: (u8, u8), gamma: (u8, u8)) -> f64 {
        let (e1, e2) = (eps.0 as u32, eps.1 as u32);
        let (g1, g2) = (gamma.0 as u32, gamma.1 as u32);
        match self {
            SignPattern::Plain => 1.0,
            SignPattern::FlipSecond => sign(e2 + g2),
            SignPattern::FlipFirst => sign(e1 + g1),
            SignPattern::FlipBoth => sign(e1 + g1 + e2 + g2),
        }
    }
}

/// `Q^{eps}_{gamma}(w1, w2)` for weights `(a, 1)`, evaluated pointwise.
pub fn q_term(gamma: (u8, u8), eps: (u8, u8), a: f64, w1: C64, w2: C64) -> C64 {
    let c = a / (1.0 + a * a);
    let (e1, e2) = (eps.0 as i32, eps.1 as i32);
    let (g1, g2) = (gamma.0 as i32, gamma.1 as i32);
    let u = g_unchecked(w1, c);
    let v = g_unchecked(w2.inv(), c);
    let den = |w: C64| sqrt_unchecked(w, c) * sqrt_unchecked(w.inv(), c);
    let pre = sign((e1 + e2 + e1 * e2) as u32) * u.powi(3 * e1 - 1) * v.powi(3 * e2 - 1)
        / (4.0 * (1.0 + a * a).powi(2) * den(w1) * den(w2));
    pre * sign((g1 * (1 + e2) + g2 * (1 + e1)) as u32)
        * s_unchecked(w1, c).powi(g1)
        * s_unchecked(w2.inv(), c).powi(g2)
        * ytilde(gamma, eps, a, 1.0, u, v)
}

/// `V_{eps}(w1, w2)` with an optional sign pattern on the `gamma` terms.
pub fn v_function(eps: (u8, u8), a: f64, w1: C64, w2: C64, pattern: SignPattern) -> C64 {
    GAMMAS
        .iter()
        .map(|&g| pattern.sign(eps, g) * q_term(g, eps, a, w1, w2))
        .sum()
}

pub const GAMMAS: [(u8, u8); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

/// Coefficients `c[p][q]` of `ytilde_base(gamma, a, b)` as a polynomial in
/// `(uu, vv)`, read off by exact quadratic interpolation at `{-1, 0, 1}`.
pub fn base_coefficients(gamma: (u8, u8), a: f64, b: f64) -> [[f64; 3]; 3] {
    let f = |x: f64, y: f64| ytilde_base(gamma, a, b, C64::new(x, 0.0), C64::new(y, 0.0)).re;
    // Interpolate in the second variable for fixed first variable.
    let in_v = |x: f64| {
        let (m, z, p) = (f(x, -1.0), f(x, 0.0), f(x, 1.0));
        [z, 0.5 * (p - m), 0.5 * (p + m) - z]
    };
    let (rm, rz, rp) = (in_v(-1.0), in_v(0.0), in_v(1.0));
    let mut c = [[0.0; 3]; 3];
    for q in 0..3 {
        c[0][q] = rz[q];
        c[1][q] = 0.5 * (rp[q] - rm[q]);
        c[2][q] = 0.5 * (rp[q] + rm[q]) - rz[q];
    }
    c
}

/// `V` written as `sum coefficient[(g1,p)][(g2,q)] * phi_{g1,p}(w1) * psi_{g2,q}(w2)`
/// where, with `u = G(w1)`, `v = G(1/w2)` and `D(w) = sqrt(w^2+2c) sqrt(w^-2+2c)`,
///
/// `phi_{g1,p}(w1) = u^(u_power(p)) s(w1)^g1 / D(w1)`,
/// `psi_{g2,q}(w2) = v^(v_power(q)) s(1/w2)^g2 / D(w2)`.
///
/// Index `(g, p)` is flattened to `3 g + p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableV {
    pub eps: (u8, u8),
    pub coefficient: [[f64; 6]; 6],
    pub u_power: [i32; 3],
    pub v_power: [i32; 3],
}

impl SeparableV {
    pub fn new(eps: (u8, u8), a: f64, pattern: SignPattern) -> Self {
        let (e1, e2) = (eps.0 as i32, eps.1 as i32);
        let (base_a, base_b) = if e1 == e2 { (a, 1.0) } else { (1.0, a) };
        let sigma1 = if e1 == 1 { -1 } else { 1 };
        let sigma2 = if e2 == 1 { -1 } else { 1 };
        let u_power = [0, 1, 2].map(|p| 3 * e1 - 1 + 2 * p * sigma1);
        let v_power = [0, 1, 2].map(|q| 3 * e2 - 1 + 2 * q * sigma2);
        let outer = sign((e1 + e2 + e1 * e2) as u32) / (4.0 * (1.0 + a * a).powi(2));
        let mut coefficient = [[0.0; 6]; 6];
        for gamma in GAMMAS {
            let (g1, g2) = (gamma.0 as i32, gamma.1 as i32);
            let s = outer
                * sign((g1 * (1 + e2) + g2 * (1 + e1)) as u32)
                * pattern.sign(eps, gamma);
            let c = base_coefficients(gamma, base_a, base_b);
            for p in 0..3 {
                for q in 0..3 {
                    coefficient[3 * g1 as usize + p][3 * g2 as usize + q] = s * c[p][q];
                }
            }
        }
        Self {
            eps,
            coefficient,
            u_power,
            v_power,
        }
    }

    /// Pointwise evaluation from the factors; agrees with [`v_function`].
    pub fn eval(&self, c: f64, w1: C64, w2: C64) -> C64 {
        let (phi, psi) = self.factors(c, w1, w2);
        let mut total = C64::new(0.0, 0.0);
        for (i, row) in self.coefficient.iter().enumerate() {
            for (j, &k) in row.iter().enumerate() {
                total += k * phi[i] * psi[j];
            }
        }
        total
    }

    fn factors(&self, c: f64, w1: C64, w2: C64) -> ([C64; 6], [C64; 6]) {
        let den = |w: C64| sqrt_unchecked(w, c) * sqrt_unchecked(w.inv(), c);
        let u = g_unchecked(w1, c);
        let v = g_unchecked(w2.inv(), c);
        let (s1, s2) = (s_unchecked(w1, c), s_unchecked(w2.inv(), c));
        let (d1, d2) = (den(w1), den(w2));
        let mut phi = [C64::new(0.0, 0.0); 6];
        let mut psi = [C64::new(0.0, 0.0); 6];
        for p in 0..3 {
            phi[p] = u.powi(self.u_power[p]) / d1;
            phi[3 + p] = phi[p] * s1;
            psi[p] = v.powi(self.v_power[p]) / d2;
            psi[3 + p] = psi[p] * s2;
        }
        (phi, psi)
    }
}

/// `f_{a,b}(u, v)`.
pub fn f_ab(a: f64, b: f64, u: C64, v: C64) -> C64 {
    let lhs = 2.0 * (a * a + b * b) * u * v;
    let rhs = a * b * (u * u - 1.0) * (v * v - 1.0);
    (lhs - rhs) * (lhs + rhs)
}

/// The rational functions `y^{eps}_{gamma}(a, b, u, v)`.
pub fn y_rational(gamma: (u8, u8), eps: (u8, u8), a: f64, b: f64, u: C64, v: C64) -> C64 {
    let base = |a: f64, b: f64, u: C64, v: C64| {
        ytilde_base(gamma, a, b, u * u, v * v) / f_ab(a, b, u, v)
    };
    match eps {
        (0, 0) => base(a, b, u, v),
        (0, 1) => base(b, a, u, v.inv()) / (v * v),
        (1, 0) => base(b, a, u.inv(), v) / (u * u),
        _ => base(a, b, u.inv(), v.inv()) / (u * u * v * v),
    }
}

/// The original `Q` of the cited construction, before simplification.
pub fn q_term_original(gamma: (u8, u8), eps: (u8, u8), a: f64, w1: C64, w2: C64) -> C64 {
    let c = a / (1.0 + a * a);
    let (e1, e2) = (eps.0 as i32, eps.1 as i32);
    let (g1, g2) = (gamma.0 as i32, gamma.1 as i32);
    let den = |w: C64| sqrt_unchecked(w, c) * sqrt_unchecked(w.inv(), c);
    let x = |z1: C64, z2: C64| {
        let (gz1, gz2) = (g_unchecked(z1, c), g_unchecked(z2, c));
        gz1 * gz2 * (1.0 - z1 * z1 * z2 * z2) / (den(z1) * den(z2))
            * y_rational(gamma, eps, a, 1.0, gz1, gz2)
    };
    let w2i = w2.inv();
    sign((e1 + e2 + e1 * e2 + g1 * (1 + e2) + g2 * (1 + e1)) as u32)
        * s_unchecked(w1, c).powi(g1)
        * s_unchecked(w2i, c).powi(g2)
        * g_unchecked(w1, c).powi(e1)
        * g_unchecked(w2i, c).powi(e2)
        * x(w1, w2i)
}

/// `V` from the original definition, symmetrised in `w2 -> -w2`.
pub fn v_function_original(eps: (u8, u8), a: f64, w1: C64, w2: C64) -> C64 {
    let z = |w2: C64| -> C64 { GAMMAS.iter().map(|&g| q_term_original(g, eps, a, w1, w2)).sum() };
    let s = if eps.1 == 0 { -1.0 } else { 1.0 };
    0.5 * (z(w2) + s * z(-w2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_reproduce_polynomials() {
        for gamma in GAMMAS {
            let c = base_coefficients(gamma, 0.7, 1.3);
            let (uu, vv) = (C64::new(0.3, -1.1), C64::new(-0.8, 0.4));
            let mut s = C64::new(0.0, 0.0);
            for p in 0..3 {
                for q in 0..3 {
                    s += c[p][q] * uu.powi(p as i32) * vv.powi(q as i32);
                }
            }
            let direct = ytilde_base(gamma, 0.7, 1.3, uu, vv);
            assert!((s - direct).norm() < 1e-13 * (1.0 + direct.norm()));
        }
    }
}
