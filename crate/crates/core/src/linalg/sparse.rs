use std::collections::{BTreeMap, VecDeque};

use crate::linalg::matrix::Matrix;
use crate::scalar::Scalar;

/// Column-compressed matrix used for transfer matrices, whose dimension is the
/// square of the state space but which are usually very sparse.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<S: Scalar> {
    rows: usize,
    cols: usize,
    ctx: S::Ctx,
    /// `columns[c]` lists `(row, value)` pairs sorted by row, no zeros.
    columns: Vec<Vec<(usize, S)>>,
}

impl<S: Scalar> SparseMatrix<S> {
    /// From a map keyed by `(col, row)`. Exact zeros are dropped.
    pub fn from_col_entries(rows: usize, cols: usize, ctx: S::Ctx, entries: BTreeMap<(usize, usize), S>) -> Self {
        let mut columns = vec![Vec::new(); cols];
        for ((c, r), v) in entries {
            if !v.is_zero() {
                columns[c].push((r, v));
            }
        }
        SparseMatrix { rows, cols, ctx, columns }
    }

    pub fn from_dense(m: &Matrix<S>) -> Self {
        let mut columns = vec![Vec::new(); m.cols()];
        for (c, col) in columns.iter_mut().enumerate() {
            for r in 0..m.rows() {
                if !m[(r, c)].is_zero() {
                    col.push((r, m[(r, c)].clone()));
                }
            }
        }
        SparseMatrix {
            rows: m.rows(),
            cols: m.cols(),
            ctx: m.ctx(),
            columns,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ctx(&self) -> S::Ctx {
        self.ctx
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn column(&self, c: usize) -> &[(usize, S)] {
        &self.columns[c]
    }

    pub fn to_dense(&self) -> Matrix<S> {
        let mut m = Matrix::zeros(self.rows, self.cols, self.ctx);
        for (c, col) in self.columns.iter().enumerate() {
            for (r, v) in col {
                m[(*r, c)] = v.clone();
            }
        }
        m
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: &S, other: &Self, b: &S) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut columns = Vec::with_capacity(self.cols);
        for c in 0..self.cols {
            let mut merged: BTreeMap<usize, S> = BTreeMap::new();
            if !a.is_zero() {
                for (r, v) in &self.columns[c] {
                    merged.insert(*r, a.clone() * v.clone());
                }
            }
            if !b.is_zero() {
                for (r, v) in &other.columns[c] {
                    let cur = merged.remove(r).unwrap_or_else(|| S::zero(self.ctx));
                    merged.insert(*r, cur + b.clone() * v.clone());
                }
            }
            columns.push(merged.into_iter().filter(|(_, v)| !v.is_zero()).collect());
        }
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            ctx: self.ctx,
            columns,
        }
    }

    pub fn matvec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![S::zero(self.ctx); self.rows];
        for (c, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (r, a) in &self.columns[c] {
                let cur = std::mem::replace(&mut out[*r], S::zero(self.ctx));
                out[*r] = cur + a.clone() * x.clone();
            }
        }
        out
    }

    /// `self† · v`.
    pub fn adjoint_matvec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.rows);
        self.columns
            .iter()
            .map(|col| {
                col.iter().fold(S::zero(self.ctx), |acc, (r, a)| {
                    if v[*r].is_zero() {
                        acc
                    } else {
                        acc + a.conj() * v[*r].clone()
                    }
                })
            })
            .collect()
    }

    /// Coordinates reachable from `start` along the sparsity graph (column
    /// `c` feeds every row with a nonzero entry). The span of the returned
    /// coordinates is invariant under the matrix.
    pub fn reachable_from(&self, start: impl IntoIterator<Item = usize>) -> Vec<usize> {
        assert_eq!(self.rows, self.cols);
        let mut seen = vec![false; self.cols];
        let mut queue = VecDeque::new();
        for s in start {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(c) = queue.pop_front() {
            for (r, _) in &self.columns[c] {
                if !seen[*r] {
                    seen[*r] = true;
                    queue.push_back(*r);
                }
            }
        }
        (0..self.cols).filter(|&i| seen[i]).collect()
    }

    /// Dense restriction to the given coordinates (rows and columns).
    pub fn restrict(&self, coords: &[usize]) -> Matrix<S> {
        let mut pos = vec![usize::MAX; self.rows];
        for (k, &c) in coords.iter().enumerate() {
            pos[c] = k;
        }
        let mut m = Matrix::zeros(coords.len(), coords.len(), self.ctx);
        for (k, &c) in coords.iter().enumerate() {
            for (r, v) in &self.columns[c] {
                if pos[*r] != usize::MAX {
                    m[(pos[*r], k)] = v.clone();
                }
            }
        }
        m
    }
}
