use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S: Scalar> {
    rows: usize,
    cols: usize,
    ctx: S::Ctx,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize, ctx: S::Ctx) -> Self {
        Matrix {
            rows,
            cols,
            ctx,
            data: vec![S::zero(ctx); rows * cols],
        }
    }

    pub fn identity(n: usize, ctx: S::Ctx) -> Self {
        let mut m = Self::zeros(n, n, ctx);
        for i in 0..n {
            m[(i, i)] = S::one(ctx);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>, ctx: S::Ctx) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            ctx,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, ctx: S::Ctx, f: impl Fn(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, ctx, data }
    }

    /// Column vector from entries.
    pub fn column(entries: Vec<S>, ctx: S::Ctx) -> Self {
        Matrix {
            rows: entries.len(),
            cols: 1,
            ctx,
            data: entries,
        }
    }

    /// `|i><j|` of size `n`.
    pub fn unit(n: usize, i: usize, j: usize, ctx: S::Ctx) -> Self {
        let mut m = Self::zeros(n, n, ctx);
        m[(i, j)] = S::one(ctx);
        m
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

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            ctx: self.ctx,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, self.ctx, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, self.ctx, |i, j| self[(j, i)].clone())
    }

    pub fn conj(&self) -> Self {
        self.map(S::conj)
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.zip(other, |a, b| a.clone() + b.clone()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.zip(other, |a, b| a.clone() - b.clone()))
    }

    fn zip(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            ctx: self.ctx,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols, self.ctx);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    let cur = std::mem::replace(&mut out[(i, j)], S::zero(self.ctx));
                    out[(i, j)] = cur + a.clone() * b.clone();
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[S]) -> Result<Vec<S>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "matrix has {} columns, vector has {} entries",
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v, self.ctx)).collect())
    }

    /// Kronecker product.
    pub fn kron(&self, other: &Self) -> Self {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        Self::from_fn(r, c, self.ctx, |i, j| {
            let a = &self[(i / other.rows, j / other.cols)];
            if a.is_zero() {
                return S::zero(self.ctx);
            }
            a.clone() * other[(i % other.rows, j % other.cols)].clone()
        })
    }

    pub fn trace(&self) -> S {
        (0..self.rows.min(self.cols)).fold(S::zero(self.ctx), |acc, i| acc + self[(i, i)].clone())
    }

    /// Frobenius norm, as a double.
    pub fn frobenius(&self) -> f64 {
        self.data
            .iter()
            .map(|x| {
                let a = x.abs_f64();
                a * a
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Induced infinity norm (maximum absolute row sum), as a double.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(S::abs_f64).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        // NaN must not vanish into the maximum.
        self.data.iter().map(S::abs_f64).fold(0.0, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (i..self.cols).all(|j| (self[(i, j)].clone() - self[(j, i)].conj()).within(tol))
            })
    }

    /// Submatrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), self.ctx, |i, j| self[(rows[i], cols[j])].clone())
    }

    /// Solves `self · X = rhs` by Gaussian elimination with partial pivoting
    /// (largest magnitude). Exact mode returns the exact solution.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        if !self.is_square() || rhs.rows != self.rows {
            return Err(Error::Dimension(format!(
                "solve needs square system, got {}x{} with rhs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let n = self.rows;
        let m = rhs.cols;
        let mut a = self.clone();
        let mut b = rhs.clone();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let tiny = S::default_tol(self.ctx) * 1e-6 * scale;
        for k in 0..n {
            let (piv, mag) = (k..n)
                .map(|i| (i, a[(i, k)].abs_f64()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if a[(piv, k)].is_zero() || (!S::is_exact() && mag <= tiny) {
                return Err(Error::Precision {
                    message: format!("singular pivot in column {k}"),
                    achieved: mag,
                });
            }
            a.swap_rows(k, piv);
            b.swap_rows(k, piv);
            let inv = S::one(self.ctx) / a[(k, k)].clone();
            for i in k + 1..n {
                if a[(i, k)].is_zero() {
                    continue;
                }
                let f = a[(i, k)].clone() * inv.clone();
                for j in k..n {
                    if !a[(k, j)].is_zero() {
                        let v = a[(i, j)].clone() - f.clone() * a[(k, j)].clone();
                        a[(i, j)] = v;
                    }
                }
                for j in 0..m {
                    if !b[(k, j)].is_zero() {
                        let v = b[(i, j)].clone() - f.clone() * b[(k, j)].clone();
                        b[(i, j)] = v;
                    }
                }
            }
        }
        for k in (0..n).rev() {
            let inv = S::one(self.ctx) / a[(k, k)].clone();
            for j in 0..m {
                let mut acc = b[(k, j)].clone();
                for l in k + 1..n {
                    if !a[(k, l)].is_zero() {
                        acc = acc - a[(k, l)].clone() * b[(l, j)].clone();
                    }
                }
                b[(k, j)] = acc * inv.clone();
            }
        }
        Ok(b)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Self::identity(self.rows, self.ctx))
    }

    /// Basis of the right null space. Entries whose magnitude is at most
    /// `tol` (relative to the largest entry) are treated as zero; `tol = 0`
    /// gives the exact null space.
    pub fn nullspace(&self, tol: f64) -> Vec<Vec<S>> {
        let (r, pivots) = self.rref(tol);
        let n = self.cols;
        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..n).filter(|&j| !is_pivot[j]) {
            let mut v = vec![S::zero(self.ctx); n];
            v[free] = S::one(self.ctx);
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -r[(row, free)].clone();
            }
            basis.push(v);
        }
        basis
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.rref(tol).1.len()
    }

    /// Reduced row echelon form with partial pivoting; returns the reduced
    /// matrix and the pivot columns.
    pub fn rref(&self, tol: f64) -> (Self, Vec<usize>) {
        let mut a = self.clone();
        let thresh = tol * self.max_abs().max(1.0);
        let zeroish = |x: &S| if tol == 0.0 { x.is_zero() } else { x.abs_f64() <= thresh };
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..a.cols {
            if row == a.rows {
                break;
            }
            let (piv, _) = (row..a.rows)
                .map(|i| (i, a[(i, col)].abs_f64()))
                .fold((row, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if zeroish(&a[(piv, col)]) {
                for i in row..a.rows {
                    a[(i, col)] = S::zero(self.ctx);
                }
                continue;
            }
            a.swap_rows(row, piv);
            let inv = S::one(self.ctx) / a[(row, col)].clone();
            for j in col..a.cols {
                let v = a[(row, j)].clone() * inv.clone();
                a[(row, j)] = v;
            }
            for i in 0..a.rows {
                if i == row || a[(i, col)].is_zero() {
                    continue;
                }
                let f = a[(i, col)].clone();
                for j in col..a.cols {
                    if !a[(row, j)].is_zero() {
                        let v = a[(i, j)].clone() - f.clone() * a[(row, j)].clone();
                        a[(i, j)] = v;
                    }
                }
                a[(i, col)] = S::zero(self.ctx);
            }
            pivots.push(col);
            row += 1;
        }
        (a, pivots)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Converts to another numeric mode entry by entry.
    pub fn convert<T: Scalar>(&self, ctx: T::Ctx, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            ctx,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<S: Scalar> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<S: Scalar> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// `Σ a_i b_i` (no conjugation).
pub fn dot<S: Scalar>(a: &[S], b: &[S], ctx: S::Ctx) -> S {
    a.iter().zip(b).fold(S::zero(ctx), |acc, (x, y)| {
        if x.is_zero() || y.is_zero() {
            acc
        } else {
            acc + x.clone() * y.clone()
        }
    })
}

/// `Σ conj(a_i) b_i`.
pub fn inner<S: Scalar>(a: &[S], b: &[S], ctx: S::Ctx) -> S {
    a.iter().zip(b).fold(S::zero(ctx), |acc, (x, y)| {
        if x.is_zero() || y.is_zero() {
            acc
        } else {
            acc + x.conj() * y.clone()
        }
    })
}
