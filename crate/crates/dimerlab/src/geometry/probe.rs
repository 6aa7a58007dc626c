//! Lines through the scaling window: the Γ(t) statistic, gap events, heights
//! along the diagonal and backtracking dimers.
//!
//! A window line at even time `T` is `x ↦ (r + x - T, r + x + T)` with `r` the
//! even reference coordinate. Even `x` gives an even face `F`; odd `x` gives
//! an a-face. The two a-edges crossing the line at `F` are the forward edge
//! `(F + (1, 0), F + (0, 1))` of class `W0 x B0`, which enters the next a-face,
//! and the backward edge `(F - (1, 0), F - (0, 1))` of class `W1 x B1`, which
//! leaves the previous one. They squish to the same edge.

use serde::{Deserialize, Serialize};

use super::squish::{last_path, SquishedConfiguration};
use crate::analytic::window::ScalingWindow;
use crate::error::Result;
use crate::lattice::{LatticeModel, Point};
use crate::sampler::DimerConfiguration;

/// `2 floor((t q - 1) / 2) + 2`: the even lattice time used for real `t`.
pub fn snap_time(t: f64, q_n: f64) -> i64 {
    2 * ((t * q_n - 1.0) / 2.0).floor() as i64 + 2
}

/// The even face at position `x` of a window line and the a-edges crossing
/// the line there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineCrossing {
    pub x: i64,
    pub face: Point,
    pub forward: Option<usize>,
    pub backward: Option<usize>,
}

/// All crossings of the line at time `time` inside the diamond, by increasing `x`.
pub fn line_crossings(model: &LatticeModel, window: &ScalingWindow, time: i64) -> Vec<LineCrossing> {
    let r = window.reference;
    let top = 2 * model.order();
    let x_start = time.abs() - r;
    let mut out = Vec::new();
    let mut x = x_start;
    loop {
        let face = Point::new(r + x - time, r + x + time);
        if face.x1 > top || face.x2 > top {
            break;
        }
        let forward = model.edge_by_points(face.offset((1, 0)), face.offset((0, 1)));
        let backward = model.edge_by_points(face.offset((-1, 0)), face.offset((0, -1)));
        out.push(LineCrossing {
            x,
            face,
            forward,
            backward,
        });
        x += 2;
    }
    out
}

/// The even shift `α p_n` of the top side of the box `S`.
fn top_shift(window: &ScalingWindow) -> i64 {
    window.round(window.alpha, 0.0).shift
}

/// Height at the a-face `(r + 1 + α p_n) e1 + t' q_n e2` on the top side of
/// the box, summed along the diagonal line from the boundary face, whose
/// height is `2|T| + 1`. The line crosses one more forward edge than
/// backward edges, so the `-1` of each empty crossing nets to `-1`.
pub fn line_height(model: &LatticeModel, config: &DimerConfiguration, window: &ScalingWindow, t: f64) -> i64 {
    let time = snap_time(t, window.q_n);
    let end = top_shift(window);
    let mut h = 2 * time.abs();
    for c in line_crossings(model, window, time).into_iter().filter(|c| c.x <= end) {
        if c.forward.is_some_and(|e| config.contains(e)) {
            h += 4;
        }
        if c.backward.is_some_and(|e| config.contains(e)) {
            h -= 4;
        }
    }
    h
}

/// Γ(t): the largest `x / p_n ≤ α` at which the last path crosses the line,
/// else the largest crossing overall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GammaValue {
    Within(f64),
    Beyond(f64),
    Absent,
}

impl GammaValue {
    pub fn value(self) -> Option<f64> {
        match self {
            GammaValue::Within(v) | GammaValue::Beyond(v) => Some(v),
            GammaValue::Absent => None,
        }
    }
}

pub fn gamma_statistic(
    model: &LatticeModel,
    squished: &SquishedConfiguration,
    t: f64,
    window: &ScalingWindow,
) -> Result<GammaValue> {
    let path = last_path(squished)?;
    let on_path = |e: Option<usize>| e.is_some_and(|e| path.dimers.contains(&e));
    let hits: Vec<i64> = line_crossings(model, window, snap_time(t, window.q_n))
        .into_iter()
        .filter(|c| on_path(c.forward) || on_path(c.backward))
        .map(|c| c.x)
        .collect();
    let limit = window.alpha * window.p_n;
    Ok(match hits.iter().filter(|&&x| x as f64 <= limit).max() {
        Some(&x) => GammaValue::Within(x as f64 / window.p_n),
        None => match hits.iter().max() {
            Some(&x) => GammaValue::Beyond(x as f64 / window.p_n),
            None => GammaValue::Absent,
        },
    })
}

/// The a-edges whose presence breaks the event "no a-dimer above `(t_i, ξ_i)`"
/// inside the box; with `forward_only` only the `W0 x B0` edges count.
pub fn gap_event_edges(model: &LatticeModel, window: &ScalingWindow, points: &[(f64, f64)], forward_only: bool) -> Vec<usize> {
    let limit = window.alpha * window.p_n;
    let mut edges = Vec::new();
    for &(t, xi) in points {
        let lower = xi * window.p_n;
        for c in line_crossings(model, window, snap_time(t, window.q_n)) {
            let x = c.x as f64;
            if x > lower && x <= limit {
                edges.extend(c.forward);
                if !forward_only {
                    edges.extend(c.backward);
                }
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    edges
}

pub fn gap_event_indicator(
    model: &LatticeModel,
    squished: &SquishedConfiguration,
    points: &[(f64, f64)],
    window: &ScalingWindow,
    forward_only: bool,
) -> bool {
    gap_event_edges(model, window, points, forward_only)
        .into_iter()
        .all(|e| squished.a_dimers.binary_search(&e).is_err())
}

/// `⌈ln(n) q_n⌉` rounded up to an even integer.
pub fn central_box_side(n: usize, a: f64) -> i64 {
    let nf = n as f64;
    let q_n = (nf * nf / a).cbrt();
    let side = (nf.ln() * q_n).ceil() as i64;
    side + side.rem_euclid(2)
}

/// Which a-dimers count as backtracking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BacktrackRule {
    /// Side of the central box around `(n, n)`; 0 disables it.
    pub central_side: i64,
}

impl BacktrackRule {
    pub fn for_model(model: &LatticeModel) -> Self {
        Self {
            central_side: central_box_side(model.n, model.a),
        }
    }

    pub fn quadrants_only() -> Self {
        Self { central_side: 0 }
    }
}

/// Quadrant and class table for backtracking a-dimers, plus the central box.
pub fn is_backtracking(model: &LatticeModel, edge: usize, rule: BacktrackRule) -> bool {
    if !model.is_a_edge(edge) {
        return false;
    }
    let n = model.order();
    let (w, b) = model.edge_points(edge);
    let (wc, bc) = model.edge_classes(edge);
    let both = |lo1: i64, hi1: i64, lo2: i64, hi2: i64| {
        [w, b]
            .iter()
            .all(|p| (lo1..=hi1).contains(&p.x1) && (lo2..=hi2).contains(&p.x2))
    };
    let half = rule.central_side / 2;
    if rule.central_side > 0 && both(n - half, n + half, n - half, n + half) {
        return true;
    }
    if both(0, n, 0, n) {
        return (wc, bc) == (1, 1);
    }
    if both(0, n, n, 2 * n) {
        return (wc, bc) == (0, 1);
    }
    if both(n, 2 * n, n, 2 * n) {
        return (wc, bc) == (1, 1);
    }
    if both(n, 2 * n, 0, n) {
        return (wc, bc) == (1, 0);
    }
    false
}
