use std::collections::HashMap;

use num_rational::BigRational;

use crate::automaton::model::{check_bias, CoinAutomaton, CoinMachine, TransferMatrix};
use crate::error::{Error, Result};
use crate::linalg::{devectorize, DensityMatrix, SparseMatrix};
use crate::scalar::Scalar;

/// Steps `vec(ρ)` forward under a machine at bias `p`, caching `B_p` per
/// channel slot.
struct Stepper<'a, S: Scalar, M: CoinMachine<S>> {
    m: &'a M,
    p: BigRational,
    cache: HashMap<usize, SparseMatrix<S>>,
}

impl<'a, S: Scalar, M: CoinMachine<S>> Stepper<'a, S, M> {
    fn new(m: &'a M, p: &BigRational) -> Result<Self> {
        check_bias(p)?;
        Ok(Stepper {
            m,
            p: p.clone(),
            cache: HashMap::new(),
        })
    }

    fn step(&mut self, t: u64, v: &[S]) -> Result<Vec<S>> {
        let slot = self.m.slot_at(t)?;
        if !self.cache.contains_key(&slot) {
            let (b0, b1) = self.m.transfer_pair(t)?;
            let tm = TransferMatrix::from_channels(&self.p, self.m.dim(), b0, b1)?;
            self.cache.insert(slot, tm.b);
        }
        Ok(self.cache[&slot].matvec(v))
    }
}

fn check_horizon<S: Scalar, M: CoinMachine<S>>(m: &M, t: u64) -> Result<()> {
    match m.horizon() {
        Some(h) if t > h => Err(Error::Horizon { step: t, horizon: h }),
        _ => Ok(()),
    }
}

/// `vec(ρ_t)`.
pub fn evolve_vec<S: Scalar, M: CoinMachine<S>>(m: &M, p: &BigRational, t: u64) -> Result<Vec<S>> {
    check_horizon(m, t)?;
    let mut st = Stepper::new(m, p)?;
    let mut v = m.initial().vectorize();
    for k in 0..t {
        v = st.step(k, &v)?;
    }
    Ok(v)
}

/// The state after `t` flips of a coin with bias `p`.
pub fn evolve_distribution<S: Scalar, M: CoinMachine<S>>(m: &M, p: &BigRational, t: u64) -> Result<DensityMatrix<S>> {
    let v = evolve_vec(m, p, t)?;
    Ok(DensityMatrix::new_unchecked(devectorize(&v, m.dim(), m.ctx())?))
}

/// `a_t(p) = v_Acc† B_p^t v0`.
pub fn accept_prob_at<S: Scalar>(m: &CoinAutomaton<S>, p: &BigRational, t: u64) -> Result<S> {
    let v = evolve_vec(m, p, t)?;
    Ok(v[m.diag_coord(m.accept())].clone())
}

/// `[a_0(p), …, a_T(p)]` in one pass.
pub fn accept_curve<S: Scalar, M: CoinMachine<S>>(m: &M, p: &BigRational, t_max: u64) -> Result<Vec<S>> {
    let acc = m.accept() * m.dim() + m.accept();
    observe_curve(m, p, t_max, |v| v[acc].clone())
}

/// Evaluates `f(vec ρ_t)` for `t = 0..=t_max`.
pub fn observe_curve<S: Scalar, M: CoinMachine<S>, T>(
    m: &M,
    p: &BigRational,
    t_max: u64,
    mut f: impl FnMut(&[S]) -> T,
) -> Result<Vec<T>> {
    check_horizon(m, t_max)?;
    let mut st = Stepper::new(m, p)?;
    let mut v = m.initial().vectorize();
    let mut out = Vec::with_capacity(t_max as usize + 1);
    out.push(f(&v));
    for k in 0..t_max {
        v = st.step(k, &v)?;
        out.push(f(&v));
    }
    Ok(out)
}

/// Acceptance probability after feeding a fixed flip string (`true` = heads).
pub fn accept_after_flips<S: Scalar, M: CoinMachine<S>>(m: &M, flips: &[bool]) -> Result<S> {
    check_horizon(m, flips.len() as u64)?;
    let mut v = m.initial().vectorize();
    for (t, &heads) in flips.iter().enumerate() {
        let (b0, b1) = m.transfer_pair(t as u64)?;
        v = if heads { b1.matvec(&v) } else { b0.matvec(&v) };
    }
    Ok(v[m.accept() * m.dim() + m.accept()].clone())
}
