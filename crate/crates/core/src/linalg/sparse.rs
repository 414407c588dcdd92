use std::collections::VecDeque;

use nalgebra::DMatrix;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix, CsrMatrix};

use crate::error::{Error, Result};
use crate::scalar::LinalgReal;

/// Reverse Cuthill-McKee ordering of a structurally symmetric matrix.
/// Returns `perm` with `perm[new] = old`.
pub fn rcm_ordering<T>(m: &CsrMatrix<T>) -> Vec<usize> {
    let n = m.nrows();
    let degree: Vec<usize> = (0..n).map(|i| m.row(i).nnz()).collect();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut neighbours = Vec::new();
    while order.len() < n {
        // Start each component from a vertex of minimum degree.
        let start = (0..n).filter(|&i| !seen[i]).min_by_key(|&i| (degree[i], i)).expect("unvisited vertex");
        let start = pseudo_peripheral(m, start, &degree);
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            neighbours.clear();
            neighbours.extend(m.row(v).col_indices().iter().copied().filter(|&j| !seen[j]));
            neighbours.sort_by_key(|&j| (degree[j], j));
            for &j in &neighbours {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

/// Repeated BFS from the farthest, lowest-degree vertex of the last level.
fn pseudo_peripheral<T>(m: &CsrMatrix<T>, start: usize, degree: &[usize]) -> usize {
    let n = m.nrows();
    let mut current = start;
    let mut depth = 0;
    for _ in 0..8 {
        let mut level = vec![usize::MAX; n];
        level[current] = 0;
        let mut queue = VecDeque::from([current]);
        let mut last = current;
        while let Some(v) = queue.pop_front() {
            last = v;
            for &j in m.row(v).col_indices() {
                if level[j] == usize::MAX {
                    level[j] = level[v] + 1;
                    queue.push_back(j);
                }
            }
        }
        let d = level[last];
        let candidate = (0..n).filter(|&i| level[i] == d).min_by_key(|&i| (degree[i], i)).unwrap_or(last);
        if d <= depth {
            break;
        }
        depth = d;
        current = candidate;
    }
    current
}

/// Largest `|i - j|` over the stored entries.
pub fn bandwidth<T>(m: &CsrMatrix<T>) -> usize {
    m.triplet_iter().map(|(i, j, _)| i.abs_diff(j)).max().unwrap_or(0)
}

/// `P M P^T` with `perm[new] = old`.
pub fn permute_symmetric<T: LinalgReal>(m: &CsrMatrix<T>, perm: &[usize]) -> CscMatrix<T> {
    let n = m.nrows();
    let mut inv = vec![0; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let mut coo = CooMatrix::new(n, n);
    for (i, j, &v) in m.triplet_iter() {
        coo.push(inv[i], inv[j], v);
    }
    CscMatrix::from(&coo)
}

/// Sparse Cholesky factorization after a reverse Cuthill-McKee reordering.
#[derive(Debug, Clone)]
pub struct SparseCholesky<T: LinalgReal> {
    perm: Vec<usize>,
    factor: CscCholesky<T>,
}

impl<T: LinalgReal> SparseCholesky<T> {
    pub fn new(m: &CsrMatrix<T>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidInput(format!("factorizing a {}x{} matrix", m.nrows(), m.ncols())));
        }
        let perm = rcm_ordering(m);
        let pm = permute_symmetric(m, &perm);
        let factor = CscCholesky::factor(&pm).map_err(|_| Error::IndefiniteMass)?;
        Ok(Self { perm, factor })
    }

    pub fn dimension(&self) -> usize {
        self.perm.len()
    }

    /// Nonzeros in the factor.
    pub fn fill(&self) -> usize {
        self.factor.l().nnz()
    }

    /// Overwrites the columns of `b` with `M^{-1} b`.
    pub fn solve_mut(&self, b: &mut DMatrix<T>) {
        let mut pb = DMatrix::from_fn(b.nrows(), b.ncols(), |i, j| b[(self.perm[i], j)]);
        self.factor.solve_mut(&mut pb);
        for (i, &old) in self.perm.iter().enumerate() {
            for j in 0..b.ncols() {
                b[(old, j)] = pb[(i, j)];
            }
        }
    }

    pub fn solve(&self, b: &DMatrix<T>) -> DMatrix<T> {
        let mut x = b.clone();
        self.solve_mut(&mut x);
        x
    }
}

/// `A + s B` for matrices with the same shape.
pub fn shifted<T: LinalgReal>(a: &CsrMatrix<T>, b: &CsrMatrix<T>, s: T) -> CsrMatrix<T> {
    let mut coo = CooMatrix::new(a.nrows(), a.ncols());
    for (i, j, &v) in a.triplet_iter() {
        coo.push(i, j, v);
    }
    for (i, j, &v) in b.triplet_iter() {
        coo.push(i, j, v * s);
    }
    CsrMatrix::from(&coo)
}
