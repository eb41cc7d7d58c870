//! Dead and live subspaces.
//!
//! A state is dead when no number of flips at bias 1/2 gives it any overlap
//! with Accept. Writing `A_t = (E†)^t(|Acc><Acc|)` for the Heisenberg-picture
//! observables, `ρ` is dead iff `tr(A_t ρ) = 0` for all `t`; the `A_t` are
//! positive semidefinite and stop growing in span after `S²` steps, so the
//! dead subspace is the kernel of `G = Σ_{t ≤ S²} A_t`.

use num_rational::BigRational;
use rand::Rng;
use serde::Serialize;

use crate::automaton::{evolve_vec, CoinAutomaton};
use crate::error::Result;
use crate::linalg::{devectorize, inner, vectorize, Matrix};
use crate::ratio::q;
use crate::rng::trial_rng;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceReport<S: Scalar> {
    /// Basis of the dead subspace `D` (vectors in `C^S`).
    pub dead_basis: Vec<Vec<S>>,
    /// Orthogonal projector onto `D`.
    pub dead_projector: Matrix<S>,
    /// `P = I − P_D − |Acc><Acc|`.
    pub live_projector: Matrix<S>,
    pub v_live: Vec<S>,
    pub v_dead: Vec<S>,
}

impl<S: Scalar> SubspaceReport<S> {
    pub fn live_dim(&self) -> usize {
        self.live_projector.rows() - self.dead_basis.len() - 1
    }
}

/// The dead subspace under `B_p` (`p = 1/2` is the canonical choice).
pub fn dead_subspace_at<S: Scalar>(m: &CoinAutomaton<S>, p: &BigRational) -> Result<SubspaceReport<S>> {
    let ctx = m.ctx();
    let dim = m.dim();
    let b = m.transfer(p)?.b;
    let mut a = vec![S::zero(ctx); dim * dim];
    a[m.diag_coord(m.accept())] = S::one(ctx);
    let mut g = a.clone();
    for _ in 0..dim * dim {
        a = b.adjoint_matvec(&a);
        g = g.into_iter().zip(&a).map(|(x, y)| x + y.clone()).collect();
    }
    let gm = devectorize(&g, dim, ctx)?;
    let thresh = 10.0 * S::default_tol(ctx);
    let dead_basis = gm.nullspace(thresh);
    let dead_projector = if dead_basis.is_empty() {
        Matrix::zeros(dim, dim, ctx)
    } else {
        let v = Matrix::from_fn(dim, dead_basis.len(), ctx, |i, j| dead_basis[j][i].clone());
        let gram = v.adjoint().mul(&v)?;
        v.mul(&gram.inverse()?)?.mul(&v.adjoint())?
    };
    let acc = Matrix::unit(dim, m.accept(), m.accept(), ctx);
    let live_projector = Matrix::identity(dim, ctx).sub(&dead_projector)?.sub(&acc)?;
    Ok(SubspaceReport {
        v_live: vectorize(&live_projector),
        v_dead: vectorize(&dead_projector),
        dead_basis,
        dead_projector,
        live_projector,
    })
}

pub fn dead_subspace<S: Scalar>(m: &CoinAutomaton<S>) -> Result<SubspaceReport<S>> {
    dead_subspace_at(m, &q(1, 2))
}

/// `g_t(p) = v_Live† B_p^t v₀`, the mass still alive after `t` flips.
pub fn live_prob<S: Scalar>(m: &CoinAutomaton<S>, report: &SubspaceReport<S>, p: &BigRational, t: u64) -> Result<S> {
    let v = evolve_vec(m, p, t)?;
    Ok(inner(&report.v_live, &v, m.ctx()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LeakyResult {
    /// The live subspace is empty.
    Vacuous,
    /// Minimum over samples of `max_{1≤k≤S²} |(v_Acc + v_Dead)† B_p^k vec ρ|`.
    Value(f64),
}

/// Samples random pure states on the live subspace and measures how much of
/// each leaks into Accept or the dead subspace within `S²` flips.
pub fn leaky_check<S: Scalar>(m: &CoinAutomaton<S>, report: &SubspaceReport<S>, p: &BigRational, n_samples: u64, seed: u64) -> Result<LeakyResult> {
    let ctx = m.ctx();
    let dim = m.dim();
    let tol = S::default_tol(ctx);
    let pl = &report.live_projector;
    if pl.max_abs() <= 10.0 * tol.max(f64::EPSILON) {
        return Ok(LeakyResult::Vacuous);
    }
    let b = m.transfer(p)?.b;
    let mut w = report.v_dead.clone();
    w[m.diag_coord(m.accept())] = w[m.diag_coord(m.accept())].clone() + S::one(ctx);
    let mut best = f64::INFINITY;
    let mut drawn = 0;
    let mut trial = 0;
    while drawn < n_samples {
        let mut rng = trial_rng(seed, trial);
        trial += 1;
        let x: Vec<S> = (0..dim)
            .map(|_| S::from_f64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), ctx))
            .collect();
        let psi = pl.matvec(&x)?;
        let norm = inner(&psi, &psi, ctx);
        if norm.abs_f64() < 1e-6 {
            continue;
        }
        drawn += 1;
        let rho = Matrix::from_fn(dim, dim, ctx, |i, j| psi[i].clone() * psi[j].conj() / norm.clone());
        let mut v = vectorize(&rho);
        let mut peak = 0.0f64;
        for _ in 0..dim * dim {
            v = b.matvec(&v);
            peak = peak.max(inner(&w, &v, ctx).abs_f64());
        }
        best = best.min(peak);
    }
    Ok(LeakyResult::Value(best))
}
