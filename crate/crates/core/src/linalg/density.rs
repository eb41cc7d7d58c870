use crate::error::{Error, Result};
use crate::linalg::matrix::Matrix;
use crate::scalar::Scalar;

/// Hermitian, positive semidefinite, trace-one matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<S: Scalar> {
    m: Matrix<S>,
}

impl<S: Scalar> DensityMatrix<S> {
    /// Validates `m` at tolerance `tol`.
    pub fn new(m: Matrix<S>, tol: f64) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::Dimension(format!(
                "density matrix must be square and nonempty, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if !m.is_hermitian(tol) {
            return Err(Error::Invariant("density matrix is not Hermitian".into()));
        }
        let tr = m.trace() - S::one(m.ctx());
        if !tr.within(tol) {
            return Err(Error::Invariant(format!(
                "density matrix trace differs from 1 by {:e}",
                tr.abs_f64()
            )));
        }
        if !is_psd(&m, tol) {
            return Err(Error::Invariant("density matrix is not positive semidefinite".into()));
        }
        Ok(DensityMatrix { m })
    }

    /// Wraps without checking; callers must guarantee the invariants.
    pub fn new_unchecked(m: Matrix<S>) -> Self {
        DensityMatrix { m }
    }

    /// `|i><i|`.
    pub fn basis(dim: usize, i: usize, ctx: S::Ctx) -> Self {
        DensityMatrix {
            m: Matrix::unit(dim, i, i, ctx),
        }
    }

    /// `ψψ† / (ψ†ψ)`.
    pub fn from_pure(psi: &[S], ctx: S::Ctx) -> Result<Self> {
        let norm = psi.iter().fold(S::zero(ctx), |acc, x| acc + x.norm_sqr());
        if norm.is_zero() {
            return Err(Error::InvalidInput("zero state vector".into()));
        }
        let n = psi.len();
        Ok(DensityMatrix {
            m: Matrix::from_fn(n, n, ctx, |i, j| psi[i].clone() * psi[j].conj() / norm.clone()),
        })
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.m
    }

    pub fn into_matrix(self) -> Matrix<S> {
        self.m
    }

    /// `<i|ρ|i>`.
    pub fn population(&self, i: usize) -> S {
        self.m[(i, i)].clone()
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.m[(i, j)].is_zero()))
    }

    pub fn vectorize(&self) -> Vec<S> {
        vectorize(&self.m)
    }
}

/// Row-major vectorization: `vec(ρ)[i·S + j] = ρ_ij`.
pub fn vectorize<S: Scalar>(m: &Matrix<S>) -> Vec<S> {
    m.data().to_vec()
}

/// Inverse of [`vectorize`] for a square matrix of side `dim`.
pub fn devectorize<S: Scalar>(v: &[S], dim: usize, ctx: S::Ctx) -> Result<Matrix<S>> {
    if v.len() != dim * dim {
        return Err(Error::Dimension(format!(
            "vector of length {} is not {dim}²",
            v.len()
        )));
    }
    Ok(Matrix::from_fn(dim, dim, ctx, |i, j| v[i * dim + j].clone()))
}

/// Positive semidefiniteness by Hermitian Gaussian elimination on diagonal
/// pivots: a negative pivot, or a zero pivot with a nonzero row, rules it out.
pub fn is_psd<S: Scalar>(m: &Matrix<S>, tol: f64) -> bool {
    let n = m.rows();
    let mut a = m.clone();
    let thresh = tol * m.max_abs().max(1.0);
    let small = |x: &S| if tol == 0.0 { x.is_zero() } else { x.abs_f64() <= thresh };
    for k in 0..n {
        let d = a[(k, k)].clone();
        if d.re_f64() < -thresh || (tol == 0.0 && S::is_exact() && is_negative_exact(&d)) {
            return false;
        }
        if small(&d) {
            if (k + 1..n).any(|j| !small(&a[(k, j)])) {
                return false;
            }
            continue;
        }
        for i in k + 1..n {
            if a[(i, k)].is_zero() {
                continue;
            }
            let f = a[(i, k)].clone() / d.clone();
            for j in k + 1..n {
                let v = a[(i, j)].clone() - f.clone() * a[(k, j)].clone();
                a[(i, j)] = v;
            }
        }
    }
    true
}

fn is_negative_exact<S: Scalar>(x: &S) -> bool {
    x.as_rational().is_some_and(|r| r < num_rational::BigRational::default())
}
