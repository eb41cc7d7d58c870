//! Limiting acceptance `a(p) = v_Acc† Λ_p v₀` and its limit-mode cousin.

use num_rational::BigRational;

use crate::automaton::{observe_curve, CoinAutomaton, Mode};
use crate::error::{Error, Result};
use crate::fixed_point::lambda::{Analyzable, LimitConfig, Provenance};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// `Λ_p v₀` on the full `S²` coordinate space. Only the part of `B_p`
/// reachable from the support of `v₀` is analysed.
pub fn limit_vector<S: Analyzable>(m: &CoinAutomaton<S>, p: &BigRational) -> Result<Vec<S>> {
    limit_vector_with(m, p, &LimitConfig::default())
}

pub fn limit_vector_with<S: Analyzable>(m: &CoinAutomaton<S>, p: &BigRational, cfg: &LimitConfig) -> Result<Vec<S>> {
    Ok(limit_report_with(m, p, cfg)?.vector)
}

/// `Λ_p v₀` with the provenance and ladder diagnostics of the solve.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitReport<S: Scalar> {
    pub vector: Vec<S>,
    pub provenance: Provenance,
    pub spread: f64,
    /// `max |B x − x|` over the analysed coordinates.
    pub residual: f64,
    pub working_precision: Option<u32>,
}

impl<S: Scalar> LimitReport<S> {
    pub fn accept(&self, m: &CoinAutomaton<S>) -> S {
        self.vector[m.diag_coord(m.accept())].clone()
    }
}

pub fn limit_report_with<S: Analyzable>(m: &CoinAutomaton<S>, p: &BigRational, cfg: &LimitConfig) -> Result<LimitReport<S>> {
    let tm = m.transfer(p)?;
    let ctx = m.ctx();
    let v0 = m.v0();
    let coords = tm.b.reachable_from((0..v0.len()).filter(|&i| !v0[i].is_zero()));
    let b = tm.b.restrict(&coords);
    let r = Matrix::column(coords.iter().map(|&c| v0[c].clone()).collect(), ctx);
    let sol = S::limit_apply(&b, &r, cfg)?;
    let x = sol.value.col(0);
    let tol = cfg.tol.unwrap_or_else(|| S::default_tol(ctx));
    let bx = b.matvec(&x)?;
    let mut residual = 0.0f64;
    for (a, c) in bx.iter().zip(&x) {
        let d = a.clone() - c.clone();
        if !d.within(tol * coords.len() as f64) {
            return Err(Error::Invariant("limit vector is not fixed by B".into()));
        }
        residual = residual.max(d.abs_f64());
    }
    let mut vector = vec![S::zero(ctx); v0.len()];
    for (k, &c) in coords.iter().enumerate() {
        vector[c] = x[k].clone();
    }
    Ok(LimitReport {
        vector,
        provenance: sol.provenance,
        spread: sol.spread,
        residual,
        working_precision: sol.working_precision,
    })
}

/// `a(p)` for halting and one-sided machines.
pub fn limiting_accept<S: Analyzable>(m: &CoinAutomaton<S>, p: &BigRational) -> Result<S> {
    limiting_accept_with(m, p, &LimitConfig::default())
}

pub fn limiting_accept_with<S: Analyzable>(m: &CoinAutomaton<S>, p: &BigRational, cfg: &LimitConfig) -> Result<S> {
    if m.mode() == Mode::Limit {
        return Err(Error::InvalidInput("limit-mode machines use cesaro_accept".into()));
    }
    let v = limit_vector_with(m, p, cfg)?;
    Ok(v[m.diag_coord(m.accept())].clone())
}

fn accepting_set<S: Scalar>(m: &CoinAutomaton<S>) -> Result<&[usize]> {
    if m.mode() != Mode::Limit || m.accepting_set().is_empty() {
        return Err(Error::InvalidInput("needs a limit-mode machine with a nonempty accepting set".into()));
    }
    Ok(m.accepting_set())
}

/// `w† Λ_p v₀` with `w = vec(Π_acc)`, the long-run fraction of time spent in
/// the accepting set.
pub fn cesaro_accept<S: Analyzable>(m: &CoinAutomaton<S>, p: &BigRational) -> Result<S> {
    let set = accepting_set(m)?;
    let v = limit_vector(m, p)?;
    Ok(set.iter().fold(S::zero(m.ctx()), |acc, &i| acc + v[m.diag_coord(i)].clone()))
}

/// `(a_1 + … + a_T) / T` where `a_t` is the accepting-set occupancy after
/// `t` flips.
pub fn cesaro_finite_average<S: Scalar>(m: &CoinAutomaton<S>, p: &BigRational, t: u64) -> Result<S> {
    let set = accepting_set(m)?.to_vec();
    let ctx = m.ctx();
    let occ = observe_curve(m, p, t, |v| set.iter().fold(S::zero(ctx), |acc, &i| acc + v[m.diag_coord(i)].clone()))?;
    let total = occ.into_iter().skip(1).fold(S::zero(ctx), |acc, x| acc + x);
    Ok(total / S::from_i64(t.max(1) as i64, ctx))
}
