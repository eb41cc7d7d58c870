//! Concrete machines: the quantum rotation distinguisher, the ±K classical
//! walk, the time-dependent run-of-heads machine, the zero-versus-ε machine,
//! a few tiny reference automata, and sequential majority amplification.
//!
//! Classical machines are built from one weighted Kraus operator `|to><from|`
//! per transition, which fully dephases and keeps every channel monomial.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::automaton::{CoinAutomaton, Mode, TimeDependentAutomaton};
use crate::error::{Error, Result};
use crate::fixed_point::{limit_vector, Analyzable};
use crate::linalg::{DensityMatrix, KrausOp, Matrix, Superoperator};
use crate::ratio::{int, q};
use crate::scalar::Scalar;

/// A classical channel from weighted transitions `(from, to, weight)`.
pub fn classical_channel<S: Scalar>(dim: usize, moves: &[(usize, usize, BigRational)], ctx: S::Ctx) -> Result<Superoperator<S>> {
    let ops = moves
        .iter()
        .filter(|(_, _, w)| !w.is_zero())
        .map(|(from, to, w)| KrausOp::new(S::from_real(w, ctx), Matrix::unit(dim, *to, *from, ctx)))
        .collect();
    Superoperator::checked(dim, ops, S::default_tol(ctx))
}

fn stay(states: &[usize]) -> Vec<(usize, usize, BigRational)> {
    states.iter().map(|&s| (s, s, BigRational::one())).collect()
}

/// Accepts on the first heads, never rejects. States: 0 start, 1 Accept.
pub fn first_heads<S: Scalar>(ctx: S::Ctx) -> Result<CoinAutomaton<S>> {
    let e1 = classical_channel(2, &[(0, 1, int(1)), (1, 1, int(1))], ctx)?;
    let e0 = classical_channel(2, &stay(&[0, 1]), ctx)?;
    CoinAutomaton::new(e0, e1, DensityMatrix::basis(2, 0, ctx), 1, None, Mode::OneSided, vec![])
}

/// Heads accepts, tails rejects, after one flip. States: 0 start, 1 Accept,
/// 2 Reject.
pub fn single_flip<S: Scalar>(ctx: S::Ctx) -> Result<CoinAutomaton<S>> {
    let mut m1 = vec![(0, 1, int(1))];
    let mut m0 = vec![(0, 2, int(1))];
    m1.extend(stay(&[1, 2]));
    m0.extend(stay(&[1, 2]));
    CoinAutomaton::new(
        classical_channel(3, &m0, ctx)?,
        classical_channel(3, &m1, ctx)?,
        DensityMatrix::basis(3, 0, ctx),
        1,
        Some(2),
        Mode::Halting,
        vec![],
    )
}

/// Does nothing. States: 0 start (also the accepting set in limit mode),
/// 1 Accept.
pub fn identity_automaton<S: Scalar>(ctx: S::Ctx) -> Result<CoinAutomaton<S>> {
    let e = Superoperator::identity(2, ctx);
    CoinAutomaton::new(e.clone(), e, DensityMatrix::basis(2, 0, ctx), 1, None, Mode::OneSided, vec![0])
}

/// Deterministic swap of states 0 and 1 in limit mode with accepting set
/// `{0}`. State 2 is an unused Accept.
pub fn two_cycle<S: Scalar>(ctx: S::Ctx) -> Result<CoinAutomaton<S>> {
    let e = classical_channel(3, &[(0, 1, int(1)), (1, 0, int(1)), (2, 2, int(1))], ctx)?;
    CoinAutomaton::new(e.clone(), e, DensityMatrix::basis(3, 0, ctx), 2, None, Mode::Limit, vec![0])
}

fn check_gap(p: &BigRational, eps: &BigRational) -> Result<()> {
    if p.is_negative() || eps.is_negative() || p + eps > BigRational::one() {
        return Err(Error::InvalidInput(format!("need 0 <= p <= p+eps <= 1, got p={p}, eps={eps}")));
    }
    Ok(())
}

/// Index of walk position `s ∈ [−K, K]`.
pub fn hc_index(k: usize, s: i64) -> usize {
    (s + k as i64) as usize
}

/// The ±K walk tuned to bias `p`. States `0..=2K` are positions `−K..=K`,
/// `2K+1` is Accept and `2K+2` Reject; the walk starts at position 0.
/// Heads moves up with probability `1−p`, tails moves down with probability
/// `p`; `+K` then moves to Accept and `−K` to Reject.
pub fn hc_walk<S: Scalar>(p: &BigRational, eps: &BigRational, k: usize, ctx: S::Ctx) -> Result<CoinAutomaton<S>> {
    check_gap(p, eps)?;
    if k == 0 {
        return Err(Error::InvalidInput("walk radius K must be at least 1".into()));
    }
    let dim = 2 * k + 3;
    let (acc, rej) = (2 * k + 1, 2 * k + 2);
    let one = BigRational::one();
    let mut m1 = stay(&[acc, rej]);
    let mut m0 = stay(&[acc, rej]);
    for m in [&mut m1, &mut m0] {
        m.push((2 * k, acc, one.clone()));
        m.push((0, rej, one.clone()));
    }
    for i in 1..2 * k {
        m1.push((i, i + 1, &one - p));
        m1.push((i, i, p.clone()));
        m0.push((i, i - 1, p.clone()));
        m0.push((i, i, &one - p));
    }
    CoinAutomaton::new(
        classical_channel(dim, &m0, ctx)?,
        classical_channel(dim, &m1, ctx)?,
        DensityMatrix::basis(dim, k, ctx),
        acc,
        Some(rej),
        Mode::Halting,
        vec![],
    )
}

/// Closed-form walk acceptance `q^K(1−p)^K / (q^K(1−p)^K + (1−q)^K p^K)`.
pub fn hc_walk_accept(p: &BigRational, k: usize, qb: &BigRational) -> BigRational {
    let one = BigRational::one();
    let up = num_traits::pow(qb * (&one - p), k);
    let down = num_traits::pow((&one - qb) * p, k);
    if (&up + &down).is_zero() {
        return BigRational::zero();
    }
    &up / (&up + &down)
}

/// Each step: with probability `ε` halt and reject; otherwise flip, and
/// accept on heads. States: 0 start, 1 Accept, 2 Reject.
pub fn zero_vs_eps<S: Scalar>(eps: &BigRational, ctx: S::Ctx) -> Result<CoinAutomaton<S>> {
    if !eps.is_positive() || *eps >= BigRational::one() {
        return Err(Error::InvalidInput(format!("need 0 < eps < 1, got {eps}")));
    }
    let rest = BigRational::one() - eps;
    let mut m1 = vec![(0, 2, eps.clone()), (0, 1, rest.clone())];
    let mut m0 = vec![(0, 2, eps.clone()), (0, 0, rest)];
    m1.extend(stay(&[1, 2]));
    m0.extend(stay(&[1, 2]));
    CoinAutomaton::new(
        classical_channel(3, &m0, ctx)?,
        classical_channel(3, &m1, ctx)?,
        DensityMatrix::basis(3, 0, ctx),
        1,
        Some(2),
        Mode::Halting,
        vec![],
    )
}

/// `(1−ε)q / (ε + (1−ε)q)`.
pub fn zero_vs_eps_accept(eps: &BigRational, qb: &BigRational) -> BigRational {
    let num = (BigRational::one() - eps) * qb;
    &num / (eps + &num)
}

/// Rotation angle per heads and per tails: `(ε(1−p)/A, −εp/A)`.
pub fn quantum_angles(p: &BigRational, eps: &BigRational, a: u64) -> (BigRational, BigRational) {
    let a = BigRational::from_integer(BigInt::from(a));
    (eps * (BigRational::one() - p) / &a, -(eps * p) / a)
}

/// Halting probability per step, `ε²/B`.
pub fn quantum_alpha(eps: &BigRational, b: u64) -> BigRational {
    eps * eps / BigRational::from_integer(BigInt::from(b))
}

/// Working precision for the quantum distinguisher:
/// `max(128, ceil(3·log2(B/ε²)) + 64)` bits.
pub fn quantum_min_precision(eps: &BigRational, b: u64) -> u32 {
    if eps.is_zero() {
        return 128;
    }
    let ratio = BigRational::from_integer(BigInt::from(b)) / (eps * eps);
    let l = ratio.to_f64().unwrap_or(f64::MAX).log2();
    128u32.max((3.0 * l).ceil() as u32 + 64)
}

/// The rotation machine. States: 0 = |0>, 1 = |1>, 2 Accept, 3 Reject; start
/// in |0>. Each flip rotates the |0>,|1> plane by `ε(1−p)/A` (heads) or
/// `−εp/A` (tails); then with probability `α = ε²/B` the |0> mass moves to
/// Reject and the |1> mass to Accept.
pub fn quantum_distinguisher<S: Scalar>(p: &BigRational, eps: &BigRational, a: u64, b: u64, ctx: S::Ctx) -> Result<CoinAutomaton<S>> {
    check_gap(p, eps)?;
    if a == 0 || b == 0 {
        return Err(Error::InvalidInput("A and B must be positive".into()));
    }
    let (th1, th0) = quantum_angles(p, eps, a);
    let alpha = quantum_alpha(eps, b);
    let channel = |theta: &BigRational| -> Result<Superoperator<S>> {
        let (c, s) = S::cos_sin(theta, ctx).ok_or_else(|| {
            Error::Unsupported(format!("rotation by {theta} is not representable exactly"))
        })?;
        let mut rot = Matrix::identity(4, ctx);
        rot[(0, 0)] = c.clone();
        rot[(0, 1)] = -s.clone();
        rot[(1, 0)] = s;
        rot[(1, 1)] = c;
        let mut counter = Matrix::zeros(4, 4, ctx);
        counter[(0, 0)] = S::one(ctx);
        counter[(1, 1)] = S::one(ctx);
        let mut halted = Matrix::zeros(4, 4, ctx);
        halted[(2, 2)] = S::one(ctx);
        halted[(3, 3)] = S::one(ctx);
        let w = S::from_real(&alpha, ctx);
        let measure = Superoperator::new(
            4,
            vec![
                KrausOp::new(w.clone(), Matrix::unit(4, 3, 0, ctx)),
                KrausOp::new(w, Matrix::unit(4, 2, 1, ctx)),
                KrausOp::new(S::from_real(&(BigRational::one() - &alpha), ctx), counter),
                KrausOp::unweighted(halted),
            ],
        )?;
        let rotate = Superoperator::new(4, vec![KrausOp::unweighted(rot)])?;
        let e = rotate.then(&measure)?;
        let check = e.validate(S::default_tol(ctx));
        if !check.pass {
            return Err(Error::InvalidKraus {
                residual: check.residual,
                tol: S::default_tol(ctx),
            });
        }
        Ok(e)
    };
    CoinAutomaton::new(channel(&th0)?, channel(&th1)?, DensityMatrix::basis(4, 0, ctx), 2, Some(3), Mode::Halting, vec![])
}

/// Looks for a block of `m = 1/ε` consecutive heads among `2^m` disjoint
/// blocks. States: 0 Alive (all heads so far in this block), 1 Failed,
/// 2 Accept, 3 Reject. The step index supplies the position in the block.
pub fn run_of_heads<S: Scalar>(eps: &BigRational, ctx: S::Ctx) -> Result<TimeDependentAutomaton<S>> {
    let inv = eps.recip_checked()?;
    if !inv.is_integer() || !inv.is_positive() {
        return Err(Error::InvalidInput(format!("1/eps must be a positive integer, got {inv}")));
    }
    let m = inv.to_integer().to_u32().filter(|&m| m <= 6).ok_or_else(|| {
        Error::InvalidInput(format!("1/eps = {inv} is beyond desk scale (at most 6)"))
    })?;
    let (alive, failed, acc, rej) = (0, 1, 2, 3);
    let one = int(1);
    let det = |moves: &[(usize, usize)]| -> Result<Superoperator<S>> {
        let mut all: Vec<_> = moves.iter().map(|&(a, b)| (a, b, one.clone())).collect();
        all.extend(stay(&[acc, rej]));
        classical_channel(4, &all, ctx)
    };
    let pairs = vec![
        // Inside a block.
        (det(&[(alive, failed), (failed, failed)])?, det(&[(alive, alive), (failed, failed)])?),
        // Last flip of a block with more blocks to come.
        (det(&[(alive, alive), (failed, alive)])?, det(&[(alive, acc), (failed, alive)])?),
        // Last flip of the last block.
        (det(&[(alive, rej), (failed, rej)])?, det(&[(alive, acc), (failed, rej)])?),
    ];
    let blocks = 1u64 << m;
    let m = u64::from(m);
    let schedule = (0..m * blocks)
        .map(|t| {
            if t % m < m - 1 {
                0
            } else if t / m < blocks - 1 {
                1
            } else {
                2
            }
        })
        .collect();
    TimeDependentAutomaton::new(pairs, schedule, DensityMatrix::basis(4, alive, ctx), acc, Some(rej))
}

/// `1 − (1 − q^m)^(2^m)` with `m = 1/ε`.
pub fn run_of_heads_accept(m: u32, qb: &BigRational) -> BigRational {
    let one = BigRational::one();
    let block = num_traits::pow(qb.clone(), m as usize);
    &one - num_traits::pow(&one - block, 1usize << m)
}

trait RecipChecked {
    fn recip_checked(&self) -> Result<BigRational>;
}

impl RecipChecked for BigRational {
    fn recip_checked(&self) -> Result<BigRational> {
        if self.is_zero() {
            return Err(Error::InvalidInput("eps must be nonzero".into()));
        }
        Ok(self.recip())
    }
}

/// Sequential restart-and-majority amplification of a halting machine with a
/// diagonal initial state. A block `(c, a)` means `c` copies finished with
/// `a` accepts; each block holds a copy of the base machine's non-halting
/// states. When the running copy halts, the tally updates and either a new
/// copy starts from the base initial state or the vote is decided.
pub fn amplified<S: Analyzable>(base: &CoinAutomaton<S>, copies: usize) -> Result<CoinAutomaton<S>> {
    let ctx = base.ctx();
    if copies == 0 || copies % 2 == 0 {
        return Err(Error::InvalidInput(format!("copies must be odd, got {copies}")));
    }
    if base.mode() != Mode::Halting {
        return Err(Error::InvalidInput("amplification needs a halting-mode base".into()));
    }
    let (bacc, brej) = (base.accept(), base.reject().expect("halting mode has reject"));
    if !base.initial().is_diagonal() {
        return Err(Error::InvalidInput("amplification needs a diagonal initial state".into()));
    }
    let tol = S::default_tol(ctx);
    if !base.initial().population(bacc).within(tol) || !base.initial().population(brej).within(tol) {
        return Err(Error::InvalidInput("base machine starts in a halting state".into()));
    }
    // Halting mass at p = 1/2 must be one.
    let lim = limit_vector(base, &q(1, 2))?;
    let halt = lim[base.diag_coord(bacc)].clone() + lim[base.diag_coord(brej)].clone();
    let deficit = S::one(ctx) - halt.clone();
    let halt_tol = if S::is_exact() { 0.0 } else { 1e3 * tol };
    if !deficit.within(halt_tol) {
        return Err(Error::NotHalting { mass: halt.re_f64() });
    }

    let work: Vec<usize> = (0..base.dim()).filter(|&i| i != bacc && i != brej).collect();
    let nw = work.len();
    let maj = copies / 2 + 1;
    let undecided = |c: usize, a: usize| a < maj && c - a < maj;
    let blocks: Vec<(usize, usize)> = (0..copies)
        .flat_map(|c| (0..=c).map(move |a| (c, a)))
        .filter(|&(c, a)| undecided(c, a))
        .collect();
    let block_of = |c: usize, a: usize| blocks.iter().position(|&b| b == (c, a));
    let dim = blocks.len() * nw + 2;
    let (gacc, grej) = (dim - 2, dim - 1);
    let idx = |b: usize, w: usize| b * nw + w;
    let init: Vec<(usize, S)> = work
        .iter()
        .enumerate()
        .map(|(wi, &s)| (wi, base.initial().population(s)))
        .filter(|(_, pi)| !pi.is_zero())
        .collect();

    let lift = |e: &Superoperator<S>| -> Result<Superoperator<S>> {
        let mut ops = Vec::new();
        let mut halted = Matrix::zeros(dim, dim, ctx);
        halted[(gacc, gacc)] = S::one(ctx);
        halted[(grej, grej)] = S::one(ctx);
        ops.push(KrausOp::unweighted(halted));
        for k in e.ops() {
            let mut stay_op = Matrix::zeros(dim, dim, ctx);
            for b in 0..blocks.len() {
                for (ri, &r) in work.iter().enumerate() {
                    for (ci, &c) in work.iter().enumerate() {
                        stay_op[(idx(b, ri), idx(b, ci))] = k.op[(r, c)].clone();
                    }
                }
            }
            if !stay_op.data().iter().all(Scalar::is_zero) {
                ops.push(KrausOp::new(k.weight.clone(), stay_op));
            }
            for (b, &(c, a)) in blocks.iter().enumerate() {
                for (row, accepted) in [(bacc, true), (brej, false)] {
                    if work.iter().all(|&s| k.op[(row, s)].is_zero()) {
                        continue;
                    }
                    let (c2, a2) = (c + 1, a + usize::from(accepted));
                    let targets: Vec<(usize, S)> = if a2 >= maj {
                        vec![(gacc, S::one(ctx))]
                    } else if c2 - a2 >= maj {
                        vec![(grej, S::one(ctx))]
                    } else {
                        let nb = block_of(c2, a2).expect("undecided block exists");
                        init.iter().map(|(wi, pi)| (idx(nb, *wi), pi.clone())).collect()
                    };
                    for (target, weight) in targets {
                        let mut op = Matrix::zeros(dim, dim, ctx);
                        for (ci, &s) in work.iter().enumerate() {
                            op[(target, idx(b, ci))] = k.op[(row, s)].clone();
                        }
                        ops.push(KrausOp::new(k.weight.clone() * weight, op));
                    }
                }
            }
        }
        Superoperator::checked(dim, ops, tol)
    };

    let mut start = Matrix::zeros(dim, dim, ctx);
    for (wi, pi) in &init {
        start[(idx(0, *wi), idx(0, *wi))] = pi.clone();
    }
    CoinAutomaton::new(
        lift(base.e0())?,
        lift(base.e1())?,
        DensityMatrix::new_unchecked(start),
        gacc,
        Some(grej),
        Mode::Halting,
        vec![],
    )
}

/// Probability that the majority of `copies` independent trials accepts.
pub fn majority_accept(a: &BigRational, copies: usize) -> BigRational {
    let one = BigRational::one();
    let mut total = BigRational::zero();
    let mut binom = BigInt::one();
    for k in 0..=copies {
        if k > 0 {
            binom = binom * BigInt::from(copies - k + 1) / BigInt::from(k);
        }
        if 2 * k > copies {
            total += BigRational::from_integer(binom.clone())
                * num_traits::pow(a.clone(), k)
                * num_traits::pow(&one - a, copies - k);
        }
    }
    total
}
