//! Random rational channels shared by the integration suites.
#![allow(dead_code)]

use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use coinlab::automaton::{CoinAutomaton, Mode};
use coinlab::linalg::{DensityMatrix, KrausOp, Matrix, Superoperator};
use coinlab::ratio::q;
use coinlab::Exact;

/// Rational unitary by the Cayley transform of a rational anti-Hermitian K.
pub fn cayley(dim: usize, rng: &mut ChaCha8Rng) -> Matrix<Exact> {
    let mut k = Matrix::<Exact>::zeros(dim, dim, ());
    for i in 0..dim {
        k[(i, i)] = Exact::new(BigRational::zero(), q(rng.random_range(-3..=3), 4));
        for j in i + 1..dim {
            let z = Exact::new(q(rng.random_range(-3..=3), 4), q(rng.random_range(-3..=3), 4));
            k[(i, j)] = z.clone();
            k[(j, i)] = -z.conj();
        }
    }
    let id = Matrix::identity(dim, ());
    let plus = id.add(&k).unwrap();
    let minus = id.sub(&k).unwrap();
    minus.mul(&plus.inverse().unwrap()).unwrap()
}

/// Half a mixture of two rational unitaries, half a random stochastic map.
pub fn random_channel(dim: usize, rng: &mut ChaCha8Rng) -> Superoperator<Exact> {
    let mut ops = Vec::new();
    let w: i64 = rng.random_range(1..4);
    ops.push(KrausOp::new(Exact::new(q(w, 8), BigRational::zero()), cayley(dim, rng)));
    ops.push(KrausOp::new(Exact::new(q(4 - w, 8), BigRational::zero()), cayley(dim, rng)));
    for from in 0..dim {
        let mut ws: Vec<i64> = (0..dim).map(|_| rng.random_range(0..3)).collect();
        if ws.iter().all(|&x| x == 0) {
            ws[rng.random_range(0..dim)] = 1;
        }
        let total: i64 = ws.iter().sum();
        for (to, &wt) in ws.iter().enumerate() {
            if wt > 0 {
                ops.push(KrausOp::new(Exact::new(q(wt, 2 * total), BigRational::zero()), Matrix::unit(dim, to, from, ())));
            }
        }
    }
    Superoperator::checked(dim, ops, 0.0).expect("valid by construction")
}

fn embed(k: &Matrix<Exact>, dim: usize, rows: impl Fn(usize) -> Option<usize>) -> Matrix<Exact> {
    let n = k.rows();
    let mut out = Matrix::zeros(dim, dim, ());
    for i in 0..n {
        if let Some(r) = rows(i) {
            for j in 0..n {
                out[(r, j)] = k[(i, j)].clone();
            }
        }
    }
    out
}

/// A random channel on `n` work states followed by a check that, with
/// probability 1/4, sends `|0>` to Accept and `|1>` to Reject. States `n`
/// and `n+1` are Accept and Reject.
pub fn halting_channel(n: usize, rng: &mut ChaCha8Rng) -> Superoperator<Exact> {
    let dim = n + 2;
    let (acc, rej) = (n, n + 1);
    let base = random_channel(n, rng);
    let mut ops = Vec::new();
    for op in base.ops() {
        let w = op.weight.clone();
        let quarter = Exact::new(q(1, 4), BigRational::zero());
        let rest = Exact::new(q(3, 4), BigRational::zero());
        ops.push(KrausOp::new(w.clone() * rest, embed(&op.op, dim, Some)));
        ops.push(KrausOp::new(w.clone() * quarter.clone(), embed(&op.op, dim, |i| (i == 0).then_some(acc))));
        ops.push(KrausOp::new(w.clone() * quarter.clone(), embed(&op.op, dim, |i| (i == 1).then_some(rej))));
        ops.push(KrausOp::new(w * quarter, embed(&op.op, dim, |i| (i >= 2).then_some(i))));
    }
    let mut halted = Matrix::zeros(dim, dim, ());
    halted[(acc, acc)] = Exact::new(q(1, 1), BigRational::zero());
    halted[(rej, rej)] = Exact::new(q(1, 1), BigRational::zero());
    ops.push(KrausOp::unweighted(halted));
    Superoperator::checked(dim, ops, 0.0).expect("valid by construction")
}

/// Halting automaton on `n ≥ 2` work states, started in `|0>`.
pub fn random_automaton(n: usize, rng: &mut ChaCha8Rng) -> CoinAutomaton<Exact> {
    let e0 = halting_channel(n, rng);
    let e1 = halting_channel(n, rng);
    CoinAutomaton::new(e0, e1, DensityMatrix::basis(n + 2, 0, ()), n, Some(n + 1), Mode::Halting, vec![]).expect("valid automaton")
}
