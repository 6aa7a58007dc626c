//! Exact sampling by generalised domino shuffling.
//!
//! The order-`k` diamond is tiled by `k * k` cells, the `(odd, odd)` faces
//! centred at `(2p + 1, 2q + 1)`. Every edge belongs to exactly one cell, on
//! one of its four sides `LB`, `BR`, `RT`, `TL` (left, bottom, right and top
//! corners of the cell). Urban renewal of every cell maps the order-`k` weights
//! to order-`k - 1` weights; a sample is then grown from the empty order-0
//! diamond by repeated destruction, sliding and creation.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{FaceKind, LatticeModel, Point};

const LB: u8 = 1;
const BR: u8 = 2;
const RT: u8 = 4;
const TL: u8 = 8;

/// A perfect matching stored as sorted edge ids of its model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimerConfiguration {
    pub n: usize,
    pub seed: u64,
    pub stream: u64,
    pub edges: Vec<usize>,
}

impl DimerConfiguration {
    pub fn contains(&self, edge: usize) -> bool {
        self.edges.binary_search(&edge).is_ok()
    }

    /// Indicator vector over all edges of the model.
    pub fn covered(&self, model: &LatticeModel) -> Vec<bool> {
        let mut v = vec![false; model.edges.len()];
        for &e in &self.edges {
            v[e] = true;
        }
        v
    }

    /// One line per dimer: `wx wy bx by weight`.
    pub fn to_text(&self, model: &LatticeModel) -> String {
        let mut s = String::new();
        for &e in &self.edges {
            let (w, b) = model.edge_points(e);
            s.push_str(&format!(
                "{} {} {} {} {}\n",
                w.x1, w.x2, b.x1, b.x2, model.edges[e].weight
            ));
        }
        s
    }

    pub fn from_text(model: &LatticeModel, text: &str, seed: u64) -> Result<Self> {
        let mut edges = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let f: Vec<i64> = line
                .split_whitespace()
                .take(4)
                .map(|t| t.parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidArgument(format!("bad dimer line {line:?}: {e}")))?;
            if f.len() != 4 {
                return Err(Error::InvalidArgument(format!("bad dimer line {line:?}")));
            }
            let e = model
                .edge_by_points(Point::new(f[0], f[1]), Point::new(f[2], f[3]))
                .ok_or_else(|| Error::InvalidArgument(format!("not an edge: {line:?}")))?;
            edges.push(e);
        }
        edges.sort_unstable();
        Ok(Self {
            n: model.n,
            seed,
            stream: 0,
            edges,
        })
    }
}

/// True iff every vertex is covered exactly once by edges of the model.
pub fn validate_matching(model: &LatticeModel, config: &DimerConfiguration) -> bool {
    if config.n != model.n {
        return false;
    }
    let mut white = vec![0u8; model.whites.len()];
    let mut black = vec![0u8; model.blacks.len()];
    for &e in &config.edges {
        let Some(edge) = model.edges.get(e) else {
            return false;
        };
        white[edge.white] += 1;
        black[edge.black] += 1;
    }
    white.iter().all(|&c| c == 1) && black.iter().all(|&c| c == 1)
}

/// Precomputed creation probabilities for every level of the shuffle.
#[derive(Debug, Clone)]
pub struct Shuffler {
    n: usize,
    /// `create[k - 1][q * k + p]`: probability of creating the `{LB, RT}` pair
    /// in cell `(p, q)` of the order-`k` diamond.
    create: Vec<Vec<f64>>,
    /// Edge id for each `(cell, side)` of the order-`n` diamond.
    side_edges: Vec<[usize; 4]>,
}

impl Shuffler {
    pub fn new(model: &LatticeModel) -> Self {
        let n = model.n;
        let mut weights: Vec<[f64; 4]> = (0..n * n)
            .map(|idx| {
                let (p, q) = ((idx % n) as i64, (idx / n) as i64);
                let w = match crate::lattice::face_kind(2 * p + 1, 2 * q + 1) {
                    FaceKind::A => model.a,
                    FaceKind::B => model.b,
                };
                [w; 4]
            })
            .collect();
        let mut create = vec![Vec::new(); n];
        for k in (1..=n).rev() {
            let delta: Vec<f64> = weights.iter().map(|w| w[0] * w[2] + w[1] * w[3]).collect();
            create[k - 1] = weights
                .iter()
                .zip(&delta)
                .map(|(w, d)| w[0] * w[2] / d)
                .collect();
            if k == 1 {
                break;
            }
            let km = k - 1;
            let at = |p: usize, q: usize| q * k + p;
            let mut next = vec![[0.0; 4]; km * km];
            for q in 0..km {
                for p in 0..km {
                    let (i0, i1, i2, i3) = (at(p, q), at(p + 1, q), at(p + 1, q + 1), at(p, q + 1));
                    next[q * km + p] = [
                        weights[i0][0] / delta[i0],
                        weights[i1][1] / delta[i1],
                        weights[i2][2] / delta[i2],
                        weights[i3][3] / delta[i3],
                    ];
                }
            }
            // Rescale to keep magnitudes near one; a common factor per level
            // leaves every creation probability unchanged.
            let scale = next.iter().flat_map(|w| w.iter()).fold(0.0f64, |m, &v| m.max(v));
            for w in &mut next {
                for v in w.iter_mut() {
                    *v /= scale;
                }
            }
            weights = next;
        }
        let side_edges = (0..n * n)
            .map(|idx| {
                let (p, q) = ((idx % n) as i64, (idx / n) as i64);
                let l = Point::new(2 * p, 2 * q + 1);
                let r = Point::new(2 * p + 2, 2 * q + 1);
                let b = Point::new(2 * p + 1, 2 * q);
                let t = Point::new(2 * p + 1, 2 * q + 2);
                let id = |w: Point, bl: Point| model.edge_by_points(w, bl).expect("cell side is an edge");
                [id(b, l), id(b, r), id(t, r), id(t, l)]
            })
            .collect();
        Self {
            n,
            create,
            side_edges,
        }
    }

    /// Draw one configuration from stream `stream` of `seed`.
    pub fn sample(&self, seed: u64, stream: u64) -> DimerConfiguration {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut masks: Vec<u8> = Vec::new();
        for k in 1..=self.n {
            let km = k - 1;
            let probs = &self.create[k - 1];
            let mut next = vec![0u8; k * k];
            for q in 0..k {
                for p in 0..k {
                    let old = |pp: usize, qq: usize, bit: u8| -> bool {
                        pp < km && qq < km && masks[qq * km + pp] & bit != 0
                    };
                    let mut mapped = 0u8;
                    if old(p, q, LB) {
                        mapped |= RT;
                    }
                    if p >= 1 && old(p - 1, q, BR) {
                        mapped |= TL;
                    }
                    if p >= 1 && q >= 1 && old(p - 1, q - 1, RT) {
                        mapped |= LB;
                    }
                    if q >= 1 && old(p, q - 1, TL) {
                        mapped |= BR;
                    }
                    next[q * k + p] = match mapped {
                        0 => {
                            if rng.random::<f64>() < probs[q * k + p] {
                                LB | RT
                            } else {
                                BR | TL
                            }
                        }
                        LB => RT,
                        RT => LB,
                        BR => TL,
                        TL => BR,
                        _ => 0,
                    };
                }
            }
            masks = next;
        }
        let mut edges = Vec::with_capacity(self.n * (self.n + 1));
        for (cell, &mask) in masks.iter().enumerate() {
            for (side, bit) in [LB, BR, RT, TL].into_iter().enumerate() {
                if mask & bit != 0 {
                    edges.push(self.side_edges[cell][side]);
                }
            }
        }
        edges.sort_unstable();
        DimerConfiguration {
            n: self.n,
            seed,
            stream,
            edges,
        }
    }
}

/// One exact sample, deterministic in `(model, seed)`.
pub fn sample(model: &LatticeModel, seed: u64) -> DimerConfiguration {
    Shuffler::new(model).sample(seed, 0)
}

/// `count` independent samples using streams `0..count` of `seed`.
pub fn sample_many(model: &LatticeModel, seed: u64, count: usize) -> Vec<DimerConfiguration> {
    let shuffler = Shuffler::new(model);
    (0..count as u64)
        .into_par_iter()
        .map(|s| shuffler.sample(seed, s))
        .collect()
}

/// Apply `f` to `count` samples in parallel and collect the results in
/// stream order; samples are never stored all at once.
pub fn map_samples<T, F>(model: &LatticeModel, seed: u64, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&DimerConfiguration) -> T + Sync,
{
    let shuffler = Shuffler::new(model);
    (0..count as u64)
        .into_par_iter()
        .map(|s| f(&shuffler.sample(seed, s)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeFrequency {
    pub edge: usize,
    pub frequency: f64,
    pub std_error: f64,
}

/// Empirical inclusion frequency of each edge with its binomial standard error.
pub fn edge_frequencies(
    model: &LatticeModel,
    edges: &[usize],
    num_samples: usize,
    seed: u64,
) -> Result<Vec<EdgeFrequency>> {
    if num_samples == 0 {
        return Err(Error::InvalidArgument("num_samples must be at least 1".into()));
    }
    let hits = map_samples(model, seed, num_samples, |cfg| {
        edges.iter().map(|&e| cfg.contains(e) as u64).collect::<Vec<_>>()
    });
    let mut counts = vec![0u64; edges.len()];
    for h in hits {
        for (c, v) in counts.iter_mut().zip(h) {
            *c += v;
        }
    }
    let ns = num_samples as f64;
    Ok(edges
        .iter()
        .zip(counts)
        .map(|(&edge, c)| {
            let p = c as f64 / ns;
            EdgeFrequency {
                edge,
                frequency: p,
                std_error: (p * (1.0 - p) / ns).sqrt(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_model;

    #[test]
    fn samples_are_perfect_matchings() {
        for &(n, a) in &[(4, 1.0), (8, 0.3), (12, 2.0)] {
            let m = build_model(n, a, 1.0).unwrap();
            let s = Shuffler::new(&m);
            for seed in 0..5 {
                assert!(validate_matching(&m, &s.sample(seed, 3)));
            }
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let m = build_model(8, 0.5, 1.0).unwrap();
        assert_eq!(sample(&m, 11), sample(&m, 11));
    }

    #[test]
    fn broken_matchings_are_rejected() {
        let m = build_model(4, 1.0, 1.0).unwrap();
        let mut cfg = sample(&m, 1);
        let removed = cfg.edges.pop().unwrap();
        assert!(!validate_matching(&m, &cfg));
        cfg.edges.push(removed);
        let e = cfg.edges[0];
        let b = m.edges[e].black;
        let other = m
            .black_incident(b)
            .into_iter()
            .flatten()
            .find(|&x| x != e)
            .unwrap();
        cfg.edges[0] = other;
        assert!(!validate_matching(&m, &cfg));
    }

    #[test]
    fn text_round_trip() {
        let m = build_model(4, 0.5, 1.0).unwrap();
        let cfg = sample(&m, 5);
        let back = DimerConfiguration::from_text(&m, &cfg.to_text(&m), 5).unwrap();
        assert_eq!(back.edges, cfg.edges);
    }
}
