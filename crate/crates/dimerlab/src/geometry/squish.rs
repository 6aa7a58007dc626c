//! Contracting the b-faces: a-dimers become double edges, loops and paths.
//!
//! After squishing, every b-face collapses to a single vertex, so each vertex
//! of the squished graph is a b-face centre `C` with four corners `C ± (1, 0)`
//! (black) and `C ± (0, 1)` (white). An a-dimer leaving one corner continues
//! through the empty b-edge to the adjacent corner whose a-dimer it meets.
//! When all four corners carry such dimers the pairing is fixed by a mirror
//! along the north-west to south-east diagonal: south pairs with west and north
//! with east.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{is_a_face, HeightField};
use crate::error::{Error, Result};
use crate::lattice::{face_kind, FaceKind, LatticeModel, Point};
use crate::sampler::DimerConfiguration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComponentKind {
    DoubleEdge,
    Loop(usize),
    Path(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Clockwise,
    Counterclockwise,
}

/// Side of the square `[0, 2n]^2` on which a path ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Bottom,
    Top,
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimerLoop {
    /// Edge ids in traversal order.
    pub dimers: Vec<usize>,
    /// White and black end of each dimer in turn.
    pub vertices: Vec<Point>,
    pub orientation: Orientation,
}

impl DimerLoop {
    pub fn len(&self) -> usize {
        self.dimers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dimers.is_empty()
    }

    /// Winding number around a point that is not on the loop.
    pub fn winding(&self, p: Point) -> i64 {
        winding_number(&self.vertices, p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimerPath {
    pub dimers: Vec<usize>,
    pub vertices: Vec<Point>,
    pub start: Point,
    pub end: Point,
    pub start_side: Side,
    pub end_side: Side,
    /// The path separates corridor heights `4 level` and `4 level + 4`.
    pub level: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquishedConfiguration {
    pub n: usize,
    /// All a-dimers of the configuration, sorted.
    pub a_dimers: Vec<usize>,
    /// Component of each entry of `a_dimers`.
    pub labels: Vec<ComponentKind>,
    pub double_edges: Vec<(usize, usize)>,
    pub loops: Vec<DimerLoop>,
    pub paths: Vec<DimerPath>,
    /// Corridor height on every a-face, including the ring just outside the
    /// diamond.
    #[serde(skip)]
    corridor: HashMap<Point, i64>,
}

impl SquishedConfiguration {
    pub fn label(&self, edge: usize) -> Option<ComponentKind> {
        self.a_dimers.binary_search(&edge).ok().map(|i| self.labels[i])
    }

    /// `4 i` on the a-faces of corridor `i`.
    pub fn corridor_height(&self, face: Point) -> Option<i64> {
        self.corridor.get(&face).copied()
    }

    /// `4 (#clockwise - #counterclockwise)` over loops surrounding `face`.
    pub fn loop_height(&self, face: Point) -> i64 {
        -4 * self.loops.iter().map(|l| l.winding(face)).sum::<i64>()
    }
}

fn cross(o: Point, a: Point, b: Point) -> i64 {
    (a.x1 - o.x1) * (b.x2 - o.x2) - (a.x2 - o.x2) * (b.x1 - o.x1)
}

fn winding_number(poly: &[Point], p: Point) -> i64 {
    let mut wn = 0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        if a.x2 <= p.x2 {
            if b.x2 > p.x2 && cross(a, b, p) > 0 {
                wn += 1;
            }
        } else if b.x2 <= p.x2 && cross(a, b, p) < 0 {
            wn -= 1;
        }
    }
    wn
}

fn signed_area2(poly: &[Point]) -> i64 {
    (0..poly.len())
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
            a.x1 * b.x2 - b.x1 * a.x2
        })
        .sum()
}

/// The b-face containing a vertex, if it lies inside the diamond.
fn b_cell(model: &LatticeModel, v: Point, white: bool) -> Option<Point> {
    let top = 2 * model.order() - 1;
    let candidates = if white {
        [v.offset((0, 1)), v.offset((0, -1))]
    } else {
        [v.offset((1, 0)), v.offset((-1, 0))]
    };
    candidates.into_iter().find(|c| {
        (1..=top).contains(&c.x1) && (1..=top).contains(&c.x2) && face_kind(c.x1, c.x2) == FaceKind::B
    })
}

/// The opposite a-edge across the even face next to `e`; the two squish to
/// the same edge.
fn double_partner(model: &LatticeModel, e: usize) -> Option<usize> {
    let (w, b) = model.edge_points(e);
    let c = model.edge_cell(e);
    let f = Point::new(w.x1 + b.x1 - c.x1, w.x2 + b.x2 - c.x2);
    model.edge_by_points(
        Point::new(2 * f.x1 - w.x1, 2 * f.x2 - w.x2),
        Point::new(2 * f.x1 - b.x1, 2 * f.x2 - b.x2),
    )
}

fn terminal_side(model: &LatticeModel, v: Point, white: bool) -> Side {
    let top = 2 * model.order();
    match (white, v) {
        (true, p) if p.x2 == 0 => Side::Bottom,
        (true, p) if p.x2 == top => Side::Top,
        (false, p) if p.x1 == 0 => Side::Left,
        (false, p) if p.x1 == top => Side::Right,
        _ => unreachable!("vertex {v:?} has its b-face inside the diamond"),
    }
}

struct Tracer<'a> {
    model: &'a LatticeModel,
    /// Active (non-double) a-dimer at each white / black vertex.
    at_white: Vec<Option<usize>>,
    at_black: Vec<Option<usize>>,
}

impl Tracer<'_> {
    fn dimer_at(&self, p: Point) -> Option<usize> {
        if let Some(w) = self.model.white_index(p) {
            return self.at_white[w];
        }
        self.model.black_index(p).and_then(|b| self.at_black[b])
    }

    /// The corner paired with `v` inside its b-face, or `None` at the boundary.
    fn partner(&self, v: Point, white: bool) -> Result<Option<Point>> {
        let Some(c) = b_cell(self.model, v, white) else {
            return Ok(None);
        };
        let north = c.offset((0, 1));
        let south = c.offset((0, -1));
        let east = c.offset((1, 0));
        let west = c.offset((-1, 0));
        let active: Vec<Point> = [south, west, north, east]
            .into_iter()
            .filter(|&p| self.dimer_at(p).is_some())
            .collect();
        let other = match active.len() {
            2 => active.into_iter().find(|&p| p != v),
            4 => Some(match v {
                p if p == south => west,
                p if p == west => south,
                p if p == north => east,
                _ => north,
            }),
            k => {
                return Err(Error::InvalidArgument(format!(
                    "b-face {c:?} has {k} outgoing a-dimers"
                )))
            }
        };
        Ok(other)
    }
}

/// Classify every a-dimer of a perfect matching.
pub fn squish_and_classify(model: &LatticeModel, config: &DimerConfiguration) -> Result<SquishedConfiguration> {
    let covered = config.covered(model);
    let a_dimers: Vec<usize> = config.edges.iter().copied().filter(|&e| model.is_a_edge(e)).collect();
    let mut labels = vec![None; a_dimers.len()];
    let index_of = |e: usize| a_dimers.binary_search(&e).unwrap();

    let mut double_edges = Vec::new();
    for (i, &e) in a_dimers.iter().enumerate() {
        if let Some(p) = double_partner(model, e).filter(|&p| covered[p]) {
            labels[i] = Some(ComponentKind::DoubleEdge);
            if e < p {
                double_edges.push((e, p));
            }
        }
    }

    let mut tracer = Tracer {
        model,
        at_white: vec![None; model.whites.len()],
        at_black: vec![None; model.blacks.len()],
    };
    for (i, &e) in a_dimers.iter().enumerate() {
        if labels[i].is_none() {
            tracer.at_white[model.edges[e].white] = Some(e);
            tracer.at_black[model.edges[e].black] = Some(e);
        }
    }

    // Successor of each active dimer through its black end.
    let mut next: HashMap<usize, Option<usize>> = HashMap::new();
    let mut has_prev: HashMap<usize, bool> = HashMap::new();
    for (i, &e) in a_dimers.iter().enumerate() {
        if labels[i].is_some() {
            continue;
        }
        let (_, b) = model.edge_points(e);
        let succ = match tracer.partner(b, false)? {
            Some(w) => {
                let d = tracer.dimer_at(w).expect("partner corner carries a dimer");
                if model.edge_points(d).0 != w {
                    return Err(Error::InvalidArgument(format!("orientation clash at {w:?}")));
                }
                has_prev.insert(d, true);
                Some(d)
            }
            None => None,
        };
        next.insert(e, succ);
    }

    let vertices_of = |chain: &[usize]| -> Vec<Point> {
        chain
            .iter()
            .flat_map(|&e| {
                let (w, b) = model.edge_points(e);
                [w, b]
            })
            .collect()
    };

    let mut raw_paths = Vec::new();
    for (i, &e) in a_dimers.iter().enumerate() {
        if labels[i].is_some() || has_prev.contains_key(&e) {
            continue;
        }
        let mut chain = vec![e];
        let mut cur = e;
        while let Some(Some(d)) = next.get(&cur) {
            chain.push(*d);
            cur = *d;
        }
        for &d in &chain {
            labels[index_of(d)] = Some(ComponentKind::Path(raw_paths.len()));
        }
        raw_paths.push(chain);
    }

    let mut loops = Vec::new();
    for i in 0..a_dimers.len() {
        if labels[i].is_some() {
            continue;
        }
        let start = a_dimers[i];
        let mut chain = vec![start];
        let mut cur = start;
        loop {
            match next.get(&cur) {
                Some(Some(d)) if *d == start => break,
                Some(Some(d)) => {
                    chain.push(*d);
                    cur = *d;
                }
                _ => return Err(Error::InvalidArgument(format!("open chain through dimer {start}"))),
            }
        }
        for &d in &chain {
            labels[index_of(d)] = Some(ComponentKind::Loop(loops.len()));
        }
        let vertices = vertices_of(&chain);
        let orientation = if signed_area2(&vertices) > 0 {
            Orientation::Counterclockwise
        } else {
            Orientation::Clockwise
        };
        loops.push(DimerLoop {
            dimers: chain,
            vertices,
            orientation,
        });
    }

    let labels: Vec<ComponentKind> = labels.into_iter().map(|l| l.unwrap()).collect();
    let mut squished = SquishedConfiguration {
        n: model.n,
        a_dimers,
        labels,
        double_edges,
        loops,
        paths: Vec::new(),
        corridor: HashMap::new(),
    };
    squished.corridor = corridor_heights(model, &covered, &squished)?;

    for chain in raw_paths {
        let vertices = vertices_of(&chain);
        let start = vertices[0];
        let end = *vertices.last().unwrap();
        let first = chain[0];
        let (w, b) = model.edge_points(first);
        let c = model.edge_cell(first);
        let f = Point::new(w.x1 + b.x1 - c.x1, w.x2 + b.x2 - c.x2);
        let g = Point::new(2 * f.x1 - c.x1, 2 * f.x2 - c.x2);
        let (hc, hg) = (squished.corridor[&c], squished.corridor[&g]);
        if (hc - hg).abs() != 4 {
            return Err(Error::InvalidArgument(format!("path through {first} does not step the corridor")));
        }
        squished.paths.push(DimerPath {
            level: hc.min(hg) / 4,
            start_side: terminal_side(model, start, true),
            end_side: terminal_side(model, end, false),
            dimers: chain,
            vertices,
            start,
            end,
        });
    }
    Ok(squished)
}

/// Corridor heights by walking the a-face lattice from the outer corner face
/// `(-1, -1)`, where the value is 0, and adding `±4` whenever a path dimer is
/// crossed (`+4` from its left to its right).
fn corridor_heights(
    model: &LatticeModel,
    covered: &[bool],
    squished: &SquishedConfiguration,
) -> Result<HashMap<Point, i64>> {
    let lo = -1;
    let hi = 2 * model.order() + 1;
    let node = |p: Point| {
        (lo..=hi).contains(&p.x1) && (lo..=hi).contains(&p.x2) && p.x1.rem_euclid(2) == 1 && p.x2.rem_euclid(2) == 1
    };
    let step_change = |f: Point, g: Point| -> i64 {
        let mid = Point::new((f.x1 + g.x1) / 2, (f.x2 + g.x2) / 2);
        let mut total = 0;
        for c in [f, g] {
            let corners = [Point::new(mid.x1, c.x2), Point::new(c.x1, mid.x2)];
            let (w, b) = if model.white_index(corners[0]).is_some() {
                (corners[0], corners[1])
            } else {
                (corners[1], corners[0])
            };
            let Some(e) = model.edge_by_points(w, b) else { continue };
            if !covered[e] {
                continue;
            }
            if let Some(ComponentKind::Path(_)) = squished.label(e) {
                total += if cross(w, b, f) > 0 { 4 } else { -4 };
            }
        }
        total
    };
    let start = Point::new(-1, -1);
    let mut heights = HashMap::from([(start, 0i64)]);
    let mut queue = VecDeque::from([start]);
    while let Some(f) = queue.pop_front() {
        let hf = heights[&f];
        for step in [(2, 2), (2, -2), (-2, 2), (-2, -2)] {
            let g = f.offset(step);
            if !node(g) || !(is_a_face(model.n, f) || is_a_face(model.n, g)) {
                continue;
            }
            let expect = hf + step_change(f, g);
            match heights.get(&g) {
                None => {
                    heights.insert(g, expect);
                    queue.push_back(g);
                }
                Some(&h) if h != expect => return Err(Error::HeightInconsistent(g.x1, g.x2)),
                _ => {}
            }
        }
    }
    Ok(heights)
}

/// Heights on one a-face and their split into loop and corridor parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceHeights {
    pub face: Point,
    pub a_height: i64,
    pub loop_height: i64,
    pub corridor_height: i64,
}

/// The decomposition `h^a = h^loop + h^corridor` at every a-face; an error
/// names the first face where it fails.
pub fn decompose_heights(
    model: &LatticeModel,
    squished: &SquishedConfiguration,
    heights: &HeightField,
) -> Result<Vec<FaceHeights>> {
    super::a_faces(model.n)
        .into_iter()
        .map(|face| {
            let a_height = heights.height(face).ok_or(Error::HeightInconsistent(face.x1, face.x2))?;
            let loop_height = squished.loop_height(face);
            let corridor_height = squished
                .corridor_height(face)
                .ok_or(Error::HeightInconsistent(face.x1, face.x2))?;
            if a_height != loop_height + corridor_height {
                return Err(Error::HeightInconsistent(face.x1, face.x2));
            }
            Ok(FaceHeights {
                face,
                a_height,
                loop_height,
                corridor_height,
            })
        })
        .collect()
}

/// The path separating corridor heights `4m - 4` and `4m` that starts on the
/// bottom side, `m = n / 4`.
pub fn last_path(squished: &SquishedConfiguration) -> Result<&DimerPath> {
    let m = squished.n as i64 / 4;
    squished
        .paths
        .iter()
        .find(|p| p.level == m - 1 && p.start_side == Side::Bottom)
        .ok_or_else(|| Error::DegenerateCorridor(format!("no bottom path at level {}", m - 1)))
}
