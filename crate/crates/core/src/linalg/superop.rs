use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::density::DensityMatrix;
use crate::linalg::matrix::Matrix;
use crate::linalg::sparse::SparseMatrix;
use crate::scalar::Scalar;

/// One Kraus term `√weight · op`. Keeping the weight separate lets channels
/// such as "with probability α do X" stay rational in exact mode.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausOp<S: Scalar> {
    pub weight: S,
    pub op: Matrix<S>,
}

impl<S: Scalar> KrausOp<S> {
    pub fn new(weight: S, op: Matrix<S>) -> Self {
        KrausOp { weight, op }
    }

    pub fn unweighted(op: Matrix<S>) -> Self {
        let ctx = op.ctx();
        KrausOp {
            weight: S::one(ctx),
            op,
        }
    }
}

/// Completely positive map `ρ ↦ Σ_j w_j K_j ρ K_j†`.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator<S: Scalar> {
    dim: usize,
    ops: Vec<KrausOp<S>>,
}

/// Completeness residual `‖Σ w_j K_j†K_j − I‖_F` and the verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausCheck {
    pub residual: f64,
    pub pass: bool,
}

impl<S: Scalar> Superoperator<S> {
    /// Builds a family without checking completeness. Dimensions are checked.
    pub fn new(dim: usize, ops: Vec<KrausOp<S>>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::InvalidInput("empty Kraus family".into()));
        }
        for (j, k) in ops.iter().enumerate() {
            if k.op.rows() != dim || k.op.cols() != dim {
                return Err(Error::Dimension(format!(
                    "Kraus operator {j} is {}x{}, expected {dim}x{dim}",
                    k.op.rows(),
                    k.op.cols()
                )));
            }
        }
        Ok(Superoperator { dim, ops })
    }

    /// Builds a family and rejects it unless it is trace preserving.
    pub fn checked(dim: usize, ops: Vec<KrausOp<S>>, tol: f64) -> Result<Self> {
        let e = Self::new(dim, ops)?;
        let check = e.validate(tol);
        if !check.pass {
            return Err(Error::InvalidKraus {
                residual: check.residual,
                tol,
            });
        }
        Ok(e)
    }

    pub fn identity(dim: usize, ctx: S::Ctx) -> Self {
        Superoperator {
            dim,
            ops: vec![KrausOp::unweighted(Matrix::identity(dim, ctx))],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[KrausOp<S>] {
        &self.ops
    }

    pub fn ctx(&self) -> S::Ctx {
        self.ops[0].op.ctx()
    }

    pub fn validate(&self, tol: f64) -> KrausCheck {
        let ctx = self.ctx();
        let mut sum = Matrix::zeros(self.dim, self.dim, ctx);
        for k in &self.ops {
            let kk = k.op.adjoint().mul(&k.op).expect("square ops");
            sum = sum.add(&kk.scale(&k.weight)).expect("same dims");
        }
        let diff = sum.sub(&Matrix::identity(self.dim, ctx)).expect("same dims");
        let residual = diff.frobenius();
        let pass = if tol == 0.0 {
            diff.data().iter().all(Scalar::is_zero)
        } else {
            residual <= tol
        };
        KrausCheck { residual, pass }
    }

    pub fn apply_matrix(&self, rho: &Matrix<S>) -> Result<Matrix<S>> {
        if rho.rows() != self.dim || rho.cols() != self.dim {
            return Err(Error::Dimension(format!(
                "state is {}x{}, channel acts on dimension {}",
                rho.rows(),
                rho.cols(),
                self.dim
            )));
        }
        let ctx = self.ctx();
        let mut out = Matrix::zeros(self.dim, self.dim, ctx);
        for k in &self.ops {
            let term = k.op.mul(rho)?.mul(&k.op.adjoint())?;
            out = out.add(&term.scale(&k.weight))?;
        }
        Ok(out)
    }

    /// `E(ρ)`; the channel must be trace preserving at the default tolerance.
    pub fn apply(&self, rho: &DensityMatrix<S>) -> Result<DensityMatrix<S>> {
        let tol = S::default_tol(self.ctx());
        let check = self.validate(tol);
        if !check.pass {
            return Err(Error::InvalidKraus {
                residual: check.residual,
                tol,
            });
        }
        Ok(DensityMatrix::new_unchecked(self.apply_matrix(rho.matrix())?))
    }

    /// `mat(E) = Σ w K ⊗ conj(K)`, dense.
    pub fn matrix(&self) -> Matrix<S> {
        self.sparse_matrix().to_dense()
    }

    /// `mat(E)` as a sparse matrix; only products of nonzero Kraus entries
    /// are formed.
    pub fn sparse_matrix(&self) -> SparseMatrix<S> {
        let s = self.dim;
        let ctx = self.ctx();
        let mut acc: BTreeMap<(usize, usize), S> = BTreeMap::new();
        for k in &self.ops {
            let nz: Vec<(usize, usize, &S)> = (0..s)
                .flat_map(|i| (0..s).map(move |j| (i, j)))
                .filter_map(|(i, j)| {
                    let v = &k.op[(i, j)];
                    (!v.is_zero()).then_some((i, j, v))
                })
                .collect();
            for &(i, kk, a) in &nz {
                let wa = k.weight.clone() * a.clone();
                for &(j, l, b) in &nz {
                    let v = wa.clone() * b.conj();
                    let key = (kk * s + l, i * s + j);
                    let cur = acc.remove(&key).unwrap_or_else(|| S::zero(ctx));
                    acc.insert(key, cur + v);
                }
            }
        }
        SparseMatrix::from_col_entries(s * s, s * s, ctx, acc)
    }

    /// Composition `other ∘ self` (apply `self` first).
    pub fn then(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension("composing channels of different dimension".into()));
        }
        let mut ops = Vec::new();
        for b in &other.ops {
            for a in &self.ops {
                let op = b.op.mul(&a.op)?;
                if op.data().iter().all(Scalar::is_zero) {
                    continue;
                }
                ops.push(KrausOp::new(b.weight.clone() * a.weight.clone(), op));
            }
        }
        Self::new(self.dim, ops)
    }

    /// Follows the channel with the projective measurement
    /// `{|acc><acc|, I − |acc><acc|}`.
    pub fn with_accept_measurement(&self, accept: usize) -> Result<Self> {
        let ctx = self.ctx();
        let g = Matrix::unit(self.dim, accept, accept, ctx);
        let rest = Matrix::identity(self.dim, ctx).sub(&g)?;
        let meas = Self::new(self.dim, vec![KrausOp::unweighted(g), KrausOp::unweighted(rest)])?;
        self.then(&meas)
    }

    /// Mixture `Σ c_i E_i` of channels on the same space.
    pub fn mixture(parts: &[(S, &Self)]) -> Result<Self> {
        let dim = parts
            .first()
            .map(|(_, e)| e.dim)
            .ok_or_else(|| Error::InvalidInput("empty mixture".into()))?;
        let mut ops = Vec::new();
        for (c, e) in parts {
            if e.dim != dim {
                return Err(Error::Dimension("mixing channels of different dimension".into()));
            }
            if c.is_zero() {
                continue;
            }
            ops.extend(e.ops.iter().map(|k| KrausOp::new(c.clone() * k.weight.clone(), k.op.clone())));
        }
        Self::new(dim, ops)
    }

    /// Whether every Kraus operator has at most one nonzero entry per column,
    /// so that basis states map to basis states.
    pub fn is_monomial(&self) -> bool {
        self.ops.iter().all(|k| {
            (0..self.dim).all(|j| (0..self.dim).filter(|&i| !k.op[(i, j)].is_zero()).count() <= 1)
        })
    }

    pub fn convert<T: Scalar>(&self, ctx: T::Ctx, f: impl Fn(&S) -> T + Copy) -> Superoperator<T> {
        Superoperator {
            dim: self.dim,
            ops: self
                .ops
                .iter()
                .map(|k| KrausOp::new(f(&k.weight), k.op.convert(ctx, f)))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::density::{devectorize, vectorize};
    use crate::ratio::q;
    use crate::scalar::Exact;
    use num_complex::Complex64;

    fn ex(n: i64, d: i64) -> Exact {
        Exact::from_real(&q(n, d), ())
    }

    fn pauli_x() -> Matrix<Exact> {
        Matrix::from_rows(vec![vec![ex(0, 1), ex(1, 1)], vec![ex(1, 1), ex(0, 1)]], ()).unwrap()
    }

    #[test]
    fn identity_channel_matrix_is_identity() {
        let e = Superoperator::<Exact>::identity(2, ());
        assert_eq!(e.matrix(), Matrix::identity(4, ()));
        assert_eq!(e.validate(0.0), KrausCheck { residual: 0.0, pass: true });
    }

    #[test]
    fn bit_flip_mixture_is_complete() {
        let e = Superoperator::new(
            2,
            vec![
                KrausOp::new(ex(1, 2), Matrix::identity(2, ())),
                KrausOp::new(ex(1, 2), pauli_x()),
            ],
        )
        .unwrap();
        assert!(e.validate(0.0).pass);
    }

    #[test]
    fn scaled_identity_residual() {
        for s in 1..5usize {
            let e = Superoperator::new(
                s,
                vec![KrausOp::unweighted(Matrix::<Exact>::identity(s, ()).scale(&ex(9, 10)))],
            )
            .unwrap();
            let check = e.validate(1e-12);
            assert!(!check.pass);
            assert!((check.residual - 0.19 * (s as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn dephasing_kills_coherence() {
        let e = Superoperator::new(
            2,
            vec![
                KrausOp::unweighted(Matrix::<Exact>::unit(2, 0, 0, ())),
                KrausOp::unweighted(Matrix::unit(2, 1, 1, ())),
            ],
        )
        .unwrap();
        let plus = DensityMatrix::from_pure(&[ex(1, 1), ex(1, 1)], ()).unwrap();
        let out = e.apply(&plus).unwrap();
        assert_eq!(out.matrix(), &Matrix::identity(2, ()).scale(&ex(1, 2)));
    }

    #[test]
    fn unitary_channel_matrix_is_kron_with_conjugate() {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let h = 0.5f64.sqrt();
        let u = Matrix::from_rows(vec![vec![c(h, 0.0), c(0.0, h)], vec![c(0.0, h), c(h, 0.0)]], ()).unwrap();
        let e = Superoperator::new(2, vec![KrausOp::unweighted(u.clone())]).unwrap();
        let m = e.matrix();
        let expected = u.kron(&u.conj());
        assert!(m.sub(&expected).unwrap().max_abs() < 1e-15);
        // Defining identity on every matrix unit.
        for i in 0..2 {
            for j in 0..2 {
                let unit = Matrix::unit(2, i, j, ());
                let lhs = m.matvec(&vectorize(&unit)).unwrap();
                let rhs = vectorize(&e.apply_matrix(&unit).unwrap());
                let diff = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                assert!(diff < 1e-15);
                assert_eq!(devectorize(&rhs, 2, ()).unwrap().rows(), 2);
            }
        }
    }

    #[test]
    fn composition_with_measurement_stays_complete() {
        let flip = Superoperator::new(
            2,
            vec![
                KrausOp::new(ex(1, 3), Matrix::identity(2, ())),
                KrausOp::new(ex(2, 3), pauli_x()),
            ],
        )
        .unwrap();
        let measured = flip.with_accept_measurement(1).unwrap();
        assert!(measured.validate(0.0).pass);
        assert!(measured.is_monomial());
    }
}
