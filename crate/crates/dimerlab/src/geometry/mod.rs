//! Height functions, the squished graph and the statistics built on it.
//!
//! Faces of the diamond are the points of `[0, 2n]^2` whose coordinates have
//! equal parity. Two faces `f` and `f + (±1, ±1)` are adjacent across the edge
//! joining the other two corners of their unit square. Points on the border of
//! the square with even coordinates are boundary faces; their heights do not
//! depend on the configuration.

mod probe;
mod squish;

pub use probe::{
    central_box_side, gamma_statistic, gap_event_edges, gap_event_indicator, is_backtracking, line_crossings,
    line_height, snap_time, BacktrackRule, GammaValue, LineCrossing,
};
pub use squish::{
    decompose_heights, last_path, squish_and_classify, ComponentKind, DimerLoop, DimerPath, FaceHeights, Orientation,
    Side, SquishedConfiguration,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{face_kind, FaceKind, LatticeModel, Point};
use crate::sampler::DimerConfiguration;

const NO_FACE: i64 = i64::MIN;

/// The height function on every face of one configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeightField {
    pub n: usize,
    side: i64,
    values: Vec<i64>,
}

impl HeightField {
    fn slot(&self, p: Point) -> Option<usize> {
        let in_range = (0..self.side).contains(&p.x1) && (0..self.side).contains(&p.x2);
        (in_range && (p.x1 - p.x2).rem_euclid(2) == 0).then(|| (p.x2 * self.side + p.x1) as usize)
    }

    /// Height at a face, `None` off the face lattice.
    pub fn height(&self, p: Point) -> Option<i64> {
        self.slot(p).map(|s| self.values[s]).filter(|&v| v != NO_FACE)
    }

    /// Height at an a-face, `None` for any other point.
    pub fn a_height(&self, p: Point) -> Option<i64> {
        (is_a_face(self.n, p)).then(|| self.height(p)).flatten()
    }

    /// All a-faces with their heights, in row-major order.
    pub fn a_heights(&self) -> Vec<(Point, i64)> {
        a_faces(self.n).into_iter().map(|p| (p, self.height(p).unwrap())).collect()
    }
}

/// Whether `p` is the centre of an a-face of the order-`n` diamond.
pub fn is_a_face(n: usize, p: Point) -> bool {
    let top = 2 * n as i64 - 1;
    p.x1.rem_euclid(2) == 1
        && p.x2.rem_euclid(2) == 1
        && (1..=top).contains(&p.x1)
        && (1..=top).contains(&p.x2)
        && face_kind(p.x1, p.x2) == FaceKind::A
}

pub fn a_faces(n: usize) -> Vec<Point> {
    let top = 2 * n as i64 - 1;
    let mut out = Vec::new();
    for x2 in (1..=top).step_by(2) {
        for x1 in (1..=top).step_by(2) {
            let p = Point::new(x1, x2);
            if face_kind(x1, x2) == FaceKind::A {
                out.push(p);
            }
        }
    }
    out
}

/// The change of height when walking from face `from` to the adjacent face
/// `from + step`: `±3` across a dimer and `±1` across an empty edge, positive
/// for a dimer with its white end on the right or an empty edge with its white
/// end on the left.
fn height_step(model: &LatticeModel, covered: &[bool], from: Point, step: (i64, i64)) -> Option<i64> {
    let u = Point::new(from.x1 + step.0, from.x2);
    let v = Point::new(from.x1, from.x2 + step.1);
    let (white, black, white_is_u) = match (model.white_index(u), model.black_index(v)) {
        (Some(_), Some(_)) => (u, v, true),
        _ => (v, u, false),
    };
    let e = model.edge_by_points(white, black)?;
    // Sign of the cross product of the step with (white - from).
    let white_left = if white_is_u { -step.0 * step.1 > 0 } else { step.0 * step.1 > 0 };
    Some(match (covered[e], white_left) {
        (true, false) => 3,
        (true, true) => -3,
        (false, true) => 1,
        (false, false) => -1,
    })
}

/// Heights of all faces, anchored at 1 on the corner face `(0, 0)`.
pub fn compute_heights(model: &LatticeModel, config: &DimerConfiguration) -> Result<HeightField> {
    let covered = config.covered(model);
    let side = 2 * model.order() + 1;
    let mut field = HeightField {
        n: model.n,
        side,
        values: vec![NO_FACE; (side * side) as usize],
    };
    let start = Point::new(0, 0);
    let s0 = field.slot(start).unwrap();
    field.values[s0] = 1;
    let mut stack = vec![start];
    while let Some(f) = stack.pop() {
        let hf = field.values[field.slot(f).unwrap()];
        for step in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            let g = f.offset(step);
            let Some(slot) = field.slot(g) else { continue };
            let Some(dh) = height_step(model, &covered, f, step) else { continue };
            let expect = hf + dh;
            match field.values[slot] {
                NO_FACE => {
                    field.values[slot] = expect;
                    stack.push(g);
                }
                h if h != expect => return Err(Error::HeightInconsistent(g.x1, g.x2)),
                _ => {}
            }
        }
    }
    Ok(field)
}

/// Per-face output of a full analysis, used by the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometryReport {
    pub n: usize,
    pub a_faces: Vec<FaceHeights>,
    pub squished: SquishedConfiguration,
    pub last_path: Option<Vec<usize>>,
}

/// Heights, components and their decomposition for one configuration.
pub fn analyze(model: &LatticeModel, config: &DimerConfiguration) -> Result<GeometryReport> {
    let heights = compute_heights(model, config)?;
    let squished = squish_and_classify(model, config)?;
    let a_faces = decompose_heights(model, &squished, &heights)?;
    let last = last_path(&squished).ok().map(|p| p.dimers.clone());
    Ok(GeometryReport {
        n: model.n,
        a_faces,
        squished,
        last_path: last,
    })
}
