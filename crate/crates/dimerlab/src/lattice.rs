//! The two-periodic Aztec diamond graph of order `n = 4m`.
//!
//! Coordinates follow the usual rotated convention: white vertices sit at
//! `(odd, even)` points and black vertices at `(even, odd)` points of the
//! square `[0, 2n]^2`. Faces are the remaining points with both coordinates of
//! equal parity. The `(odd, odd)` faces carry the weights; those with
//! `(i + j) mod 4 == 2` are a-faces and those with `(i + j) mod 4 == 0` are
//! b-faces.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Integer lattice point `(x1, x2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x1: i64,
    pub x2: i64,
}

impl Point {
    pub const fn new(x1: i64, x2: i64) -> Self {
        Self { x1, x2 }
    }

    pub fn offset(self, d: (i64, i64)) -> Self {
        Self::new(self.x1 + d.0, self.x2 + d.1)
    }
}

/// `e1 = (1, 1)`, `e2 = (-1, 1)`.
pub const E1: (i64, i64) = (1, 1);
pub const E2: (i64, i64) = (-1, 1);

/// Offset from the white endpoint to the black endpoint of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    PlusE1,
    PlusE2,
    MinusE1,
    MinusE2,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::PlusE1,
        Direction::PlusE2,
        Direction::MinusE1,
        Direction::MinusE2,
    ];

    /// Black minus white.
    pub fn vector(self) -> (i64, i64) {
        match self {
            Direction::PlusE1 => E1,
            Direction::PlusE2 => E2,
            Direction::MinusE1 => (-E1.0, -E1.1),
            Direction::MinusE2 => (-E2.0, -E2.1),
        }
    }

    pub fn from_vector(v: (i64, i64)) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.vector() == v)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaceKind {
    A,
    B,
}

/// Weight class of the `(odd, odd)` face centred at `(i, j)`.
pub fn face_kind(i: i64, j: i64) -> FaceKind {
    if (i + j).rem_euclid(4) == 2 {
        FaceKind::A
    } else {
        FaceKind::B
    }
}

/// Parity class `ε` of a vertex: `(x1 + x2) mod 4 = 2ε + 1`.
pub fn vertex_class(p: Point) -> u8 {
    if (p.x1 + p.x2).rem_euclid(4) == 1 {
        0
    } else {
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeRef {
    pub white: usize,
    pub black: usize,
    pub weight: f64,
    pub kind: FaceKind,
    /// Black minus white.
    pub direction: Direction,
}

#[derive(Debug, Clone, Serialize)]
pub struct LatticeModel {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub whites: Vec<Point>,
    pub blacks: Vec<Point>,
    pub edges: Vec<EdgeRef>,
    /// Edge id per black vertex and direction (black minus white).
    #[serde(skip)]
    black_edges: Vec<[Option<usize>; 4]>,
}

impl LatticeModel {
    pub fn new(n: usize, a: f64, b: f64) -> Result<Self> {
        if n < 4 || n % 4 != 0 {
            return Err(Error::InvalidOrder(n));
        }
        if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidWeight { a, b });
        }
        let ni = n as i64;
        let mut whites = Vec::with_capacity(n * (n + 1));
        for x2 in (0..=2 * ni).step_by(2) {
            for x1 in (1..2 * ni).step_by(2) {
                whites.push(Point::new(x1, x2));
            }
        }
        let mut blacks = Vec::with_capacity(n * (n + 1));
        for x2 in (1..2 * ni).step_by(2) {
            for x1 in (0..=2 * ni).step_by(2) {
                blacks.push(Point::new(x1, x2));
            }
        }
        let mut model = Self {
            n,
            a,
            b,
            c: a / (1.0 + a * a),
            whites,
            blacks,
            edges: Vec::with_capacity(4 * n * n),
            black_edges: Vec::new(),
        };
        let mut black_edges = vec![[None; 4]; model.blacks.len()];
        for (bi, &bp) in model.blacks.iter().enumerate() {
            for d in Direction::ALL {
                let v = d.vector();
                let wp = bp.offset((-v.0, -v.1));
                if let Some(wi) = model.white_index(wp) {
                    let kind = edge_face_kind(wp, bp);
                    let weight = match kind {
                        FaceKind::A => a,
                        FaceKind::B => b,
                    };
                    black_edges[bi][d.index()] = Some(model.edges.len());
                    model.edges.push(EdgeRef {
                        white: wi,
                        black: bi,
                        weight,
                        kind,
                        direction: d,
                    });
                }
            }
        }
        model.black_edges = black_edges;
        Ok(model)
    }

    pub fn order(&self) -> i64 {
        self.n as i64
    }

    pub fn white_index(&self, p: Point) -> Option<usize> {
        let n = self.order();
        let ok = p.x1.rem_euclid(2) == 1
            && p.x2.rem_euclid(2) == 0
            && (1..2 * n).contains(&p.x1)
            && (0..=2 * n).contains(&p.x2);
        ok.then(|| ((p.x2 / 2) * n + (p.x1 - 1) / 2) as usize)
    }

    pub fn black_index(&self, p: Point) -> Option<usize> {
        let n = self.order();
        let ok = p.x1.rem_euclid(2) == 0
            && p.x2.rem_euclid(2) == 1
            && (0..=2 * n).contains(&p.x1)
            && (1..2 * n).contains(&p.x2);
        ok.then(|| (((p.x2 - 1) / 2) * (n + 1) + p.x1 / 2) as usize)
    }

    pub fn edge_id(&self, white: usize, black: usize) -> Option<usize> {
        let w = self.whites[white];
        let b = self.blacks[black];
        let d = Direction::from_vector((b.x1 - w.x1, b.x2 - w.x2))?;
        self.black_edges[black][d.index()]
    }

    pub fn edge_by_points(&self, white: Point, black: Point) -> Option<usize> {
        self.edge_id(self.white_index(white)?, self.black_index(black)?)
    }

    /// Edges incident to a black vertex, indexed by direction.
    pub fn black_incident(&self, black: usize) -> [Option<usize>; 4] {
        self.black_edges[black]
    }

    pub fn white_incident(&self, white: usize) -> Vec<usize> {
        let w = self.whites[white];
        Direction::ALL
            .iter()
            .filter_map(|d| {
                let v = d.vector();
                self.black_index(w.offset(v))
                    .and_then(|bi| self.black_edges[bi][d.index()])
            })
            .collect()
    }

    pub fn edge_points(&self, e: usize) -> (Point, Point) {
        let edge = &self.edges[e];
        (self.whites[edge.white], self.blacks[edge.black])
    }

    /// The `(odd, odd)` face carrying the weight of edge `e`.
    pub fn edge_cell(&self, e: usize) -> Point {
        let (w, b) = self.edge_points(e);
        Point::new(w.x1, b.x2)
    }

    /// `K(black, white)`: the weight times `1` for `±e1` neighbours and `i` for
    /// `±e2` neighbours, zero for non-adjacent pairs.
    pub fn kasteleyn_entry(&self, black: Point, white: Point) -> C64 {
        let (Some(bi), Some(wi)) = (self.black_index(black), self.white_index(white)) else {
            return C64::new(0.0, 0.0);
        };
        match self.edge_id(wi, bi) {
            Some(e) => self.edge_kasteleyn(e),
            None => C64::new(0.0, 0.0),
        }
    }

    pub fn edge_kasteleyn(&self, e: usize) -> C64 {
        let edge = &self.edges[e];
        match edge.direction {
            Direction::PlusE1 | Direction::MinusE1 => C64::new(edge.weight, 0.0),
            Direction::PlusE2 | Direction::MinusE2 => C64::new(0.0, edge.weight),
        }
    }

    /// Dense `B x W` Kasteleyn matrix in canonical index order.
    pub fn kasteleyn_matrix(&self) -> nalgebra::DMatrix<C64> {
        let m = self.blacks.len();
        let mut k = nalgebra::DMatrix::from_element(m, self.whites.len(), C64::new(0.0, 0.0));
        for (e, edge) in self.edges.iter().enumerate() {
            k[(edge.black, edge.white)] = self.edge_kasteleyn(e);
        }
        k
    }

    /// Row-wise sparse form: for each black vertex the `(white, K)` pairs.
    pub fn kasteleyn_rows(&self) -> Vec<Vec<(usize, C64)>> {
        self.black_edges
            .iter()
            .map(|row| {
                row.iter()
                    .flatten()
                    .map(|&e| (self.edges[e].white, self.edge_kasteleyn(e)))
                    .collect()
            })
            .collect()
    }

    pub fn edge_classes(&self, e: usize) -> (u8, u8) {
        let (w, b) = self.edge_points(e);
        (vertex_class(w), vertex_class(b))
    }

    pub fn is_a_edge(&self, e: usize) -> bool {
        self.edges[e].kind == FaceKind::A
    }

    pub fn dump(&self) -> dump::ModelDump {
        dump::ModelDump::from_model(self)
    }
}

fn edge_face_kind(w: Point, b: Point) -> FaceKind {
    face_kind(w.x1, b.x2)
}

pub fn build_model(n: usize, a: f64, b: f64) -> Result<LatticeModel> {
    LatticeModel::new(n, a, b)
}

/// Serialisable snapshot of a model used by the `lattice dump` command.
pub mod dump {
    use super::*;

    #[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
    pub struct Vertices {
        pub white: Vec<[i64; 2]>,
        pub black: Vec<[i64; 2]>,
    }

    #[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
    pub struct EdgeDump {
        pub white: [i64; 2],
        pub black: [i64; 2],
        pub weight: f64,
        pub face: FaceKind,
        pub direction: Direction,
    }

    #[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
    pub struct ModelDump {
        pub n: usize,
        pub a: f64,
        pub b: f64,
        pub vertices: Vertices,
        pub edges: Vec<EdgeDump>,
    }

    impl ModelDump {
        pub fn from_model(m: &LatticeModel) -> Self {
            Self {
                n: m.n,
                a: m.a,
                b: m.b,
                vertices: Vertices {
                    white: m.whites.iter().map(|p| [p.x1, p.x2]).collect(),
                    black: m.blacks.iter().map(|p| [p.x1, p.x2]).collect(),
                },
                edges: m
                    .edges
                    .iter()
                    .map(|e| {
                        let w = m.whites[e.white];
                        let b = m.blacks[e.black];
                        EdgeDump {
                            white: [w.x1, w.x2],
                            black: [b.x1, b.x2],
                            weight: e.weight,
                            face: e.kind,
                            direction: e.direction,
                        }
                    })
                    .collect(),
            }
        }
    }
}
