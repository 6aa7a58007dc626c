//! Brute-force ground truth: the inverse Kasteleyn matrix, determinantal
//! correlations, exact gap probabilities and exhaustive matching enumeration.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lattice::{LatticeModel, C64};
use crate::linalg::{dense_det, solve_refined, sparse_matvec, BandLu};

pub const DEFAULT_SIZE_CAP: usize = 64;
const IMAG_TOL: f64 = 1e-10;

/// Factorised Kasteleyn matrix from which columns of the inverse are solved
/// on demand.
#[derive(Debug, Clone)]
pub struct KasteleynSolver {
    rows: Vec<Vec<(usize, C64)>>,
    lu: BandLu,
}

impl KasteleynSolver {
    pub fn new(model: &LatticeModel) -> Result<Self> {
        let rows = model.kasteleyn_rows();
        let lu = BandLu::factor(&rows)?;
        Ok(Self { rows, lu })
    }

    /// Column `black` of `K^{-1}`, indexed by white vertex.
    pub fn inverse_column(&self, black: usize) -> Vec<C64> {
        let mut rhs = vec![C64::new(0.0, 0.0); self.rows.len()];
        rhs[black] = C64::new(1.0, 0.0);
        solve_refined(&self.lu, &self.rows, &rhs)
    }

    pub fn det(&self) -> C64 {
        self.lu.det()
    }

    pub fn log_abs_det(&self) -> f64 {
        self.lu.log_det().0
    }

    /// Columns of `K^{-1}` for the requested black vertices.
    pub fn inverse_columns(&self, blacks: impl IntoIterator<Item = usize>) -> KasteleynInverse {
        let cols = blacks
            .into_iter()
            .map(|b| (b, self.inverse_column(b)))
            .collect();
        KasteleynInverse {
            size: self.rows.len(),
            cols,
        }
    }

    /// Max-norm of `K K^{-1} - I` restricted to the stored columns.
    pub fn residual(&self, inv: &KasteleynInverse) -> f64 {
        let mut worst = 0.0f64;
        for (&b, col) in &inv.cols {
            let kc = sparse_matvec(&self.rows, col);
            for (i, v) in kc.iter().enumerate() {
                let target = if i == b { 1.0 } else { 0.0 };
                worst = worst.max((v - target).norm());
            }
        }
        worst
    }
}

/// Entries of `K^{-1}` (white x black), stored column by column.
#[derive(Debug, Clone)]
pub struct KasteleynInverse {
    size: usize,
    cols: BTreeMap<usize, Vec<C64>>,
}

impl KasteleynInverse {
    pub fn entry(&self, white: usize, black: usize) -> Option<C64> {
        self.cols.get(&black).map(|c| c[white])
    }

    /// Entry lookup that panics when the column was not computed.
    pub fn at(&self, white: usize, black: usize) -> C64 {
        self.entry(white, black)
            .unwrap_or_else(|| panic!("column {black} of the inverse was not computed"))
    }

    pub fn has_column(&self, black: usize) -> bool {
        self.cols.contains_key(&black)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn columns(&self) -> impl Iterator<Item = (usize, &Vec<C64>)> {
        self.cols.iter().map(|(&b, c)| (b, c))
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.size, self.size, C64::new(0.0, 0.0));
        for (&b, col) in &self.cols {
            for (w, &v) in col.iter().enumerate() {
                m[(w, b)] = v;
            }
        }
        m
    }
}

impl KasteleynSolver {
    /// Residual relative to `max(1, ||K||_inf ||K^{-1}||_max)`; this is the
    /// level backward-stable rounding reaches when the inverse has huge
    /// entries, which it does for small `a` and larger `n`.
    pub fn relative_residual(&self, inv: &KasteleynInverse) -> f64 {
        let k_norm = self
            .rows
            .iter()
            .map(|r| r.iter().map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0f64, f64::max);
        let inv_max = inv
            .cols
            .values()
            .flat_map(|c| c.iter().map(|v| v.norm()))
            .fold(0.0f64, f64::max);
        self.residual(inv) / (k_norm * inv_max).max(1.0)
    }
}

/// Tolerance of the post-solve check on `K K^{-1} - I`.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Full inverse with the post-solve residual check.
pub fn invert_kasteleyn(model: &LatticeModel, cap: usize) -> Result<KasteleynInverse> {
    if model.n > cap {
        return Err(Error::SizeCapExceeded { n: model.n, cap });
    }
    let solver = KasteleynSolver::new(model)?;
    let inv = solver.inverse_columns(0..model.blacks.len());
    let res = solver.relative_residual(&inv);
    if res > RESIDUAL_TOL {
        return Err(Error::Residual(res));
    }
    Ok(inv)
}

/// The correlation kernel `L(e_i, e_j) = K(b_i, w_i) K^{-1}(w_j, b_i)`.
pub fn kernel_matrix(model: &LatticeModel, inv: &KasteleynInverse, edges: &[usize]) -> DMatrix<C64> {
    DMatrix::from_fn(edges.len(), edges.len(), |i, j| {
        let ei = &model.edges[edges[i]];
        let ej = &model.edges[edges[j]];
        model.edge_kasteleyn(edges[i]) * inv.at(ej.white, ei.black)
    })
}

fn real_part_checked(v: C64, tol: f64) -> Result<f64> {
    let scale = 1.0f64.max(v.re.abs());
    if v.im.abs() > tol * scale {
        return Err(Error::ImaginaryResidue(v.im));
    }
    Ok(v.re)
}

/// `ρ_k(e_1, ..., e_k) = det L(e_i, e_j)`.
pub fn correlation(model: &LatticeModel, inv: &KasteleynInverse, edges: &[usize]) -> Result<f64> {
    let mut sorted = edges.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != edges.len() {
        return Err(Error::InvalidArgument("edges must be distinct".into()));
    }
    let l = kernel_matrix(model, inv, edges);
    real_part_checked(dense_det(&l), IMAG_TOL)
}

/// Inclusion probability of a single edge.
pub fn edge_probability(model: &LatticeModel, inv: &KasteleynInverse, edge: usize) -> Result<f64> {
    correlation(model, inv, &[edge])
}

/// `P(no edge of S is covered) = det(I - L_S)`.
pub fn gap_probability_exact(
    model: &LatticeModel,
    inv: &KasteleynInverse,
    gap_edges: &[usize],
) -> Result<f64> {
    gap_probability_with(model, gap_edges, |white, black| Ok(inv.at(white, black)))
}

/// [`gap_probability_exact`] with the inverse entries `K^{-1}(white, black)`
/// (vertex indices) supplied by any evaluator.
pub fn gap_probability_with<F>(model: &LatticeModel, gap_edges: &[usize], inverse: F) -> Result<f64>
where
    F: Fn(usize, usize) -> Result<C64>,
{
    if gap_edges.len() > 500 {
        return Err(Error::InvalidArgument(format!(
            "gap set of {} edges exceeds 500",
            gap_edges.len()
        )));
    }
    let k = gap_edges.len();
    let mut m = DMatrix::<C64>::identity(k, k);
    for i in 0..k {
        let ei = &model.edges[gap_edges[i]];
        let weight = model.edge_kasteleyn(gap_edges[i]);
        for j in 0..k {
            let ej = &model.edges[gap_edges[j]];
            m[(i, j)] -= weight * inverse(ej.white, ei.black)?;
        }
    }
    let p = real_part_checked(dense_det(&m), 1e-8)?;
    if !(-1e-8..=1.0 + 1e-8).contains(&p) {
        return Err(Error::OutOfRange(p));
    }
    Ok(p)
}

/// Every perfect matching of the model, each as sorted edge ids.
///
/// Depth-first: repeatedly match the lowest-index unmatched black vertex.
/// Intended for order 4 (1024 matchings at most for uniform weights).
pub fn enumerate_matchings(model: &LatticeModel) -> Vec<Vec<usize>> {
    fn recurse(
        model: &LatticeModel,
        black: usize,
        white_used: &mut Vec<bool>,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if black == model.blacks.len() {
            let mut m = current.clone();
            m.sort_unstable();
            out.push(m);
            return;
        }
        for e in model.black_incident(black).into_iter().flatten() {
            let w = model.edges[e].white;
            if !white_used[w] {
                white_used[w] = true;
                current.push(e);
                recurse(model, black + 1, white_used, current, out);
                current.pop();
                white_used[w] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut used = vec![false; model.whites.len()];
    recurse(model, 0, &mut used, &mut Vec::new(), &mut out);
    out
}

pub fn matching_weight(model: &LatticeModel, matching: &[usize]) -> f64 {
    matching.iter().map(|&e| model.edges[e].weight).product()
}

/// Partition function by exhaustive enumeration.
pub fn partition_function_enumerated(model: &LatticeModel) -> f64 {
    enumerate_matchings(model)
        .iter()
        .map(|m| matching_weight(model, m))
        .sum()
}
