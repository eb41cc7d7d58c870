//! Monte Carlo runs. Classical machines (monomial Kraus operators, diagonal
//! start) are simulated as Markov chains on basis states; anything else as a
//! density-matrix trajectory with an explicit halting measurement after every
//! flip. All arithmetic here is double precision.

use num_complex::Complex64;
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::automaton::model::{check_bias, CoinMachine};
use crate::error::Result;
use crate::linalg::Matrix;
use crate::ratio::to_f64;
use crate::rng::trial_rng;
use crate::scalar::Scalar;

/// Default Monte Carlo cutoff.
pub const DEFAULT_T_MAX: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Accept,
    Reject,
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunTrace {
    pub seed: u64,
    pub trial: u64,
    /// `true` = heads.
    pub flips: Vec<bool>,
    /// Step at which the run halted (1-based), `None` if unresolved.
    pub halt_step: Option<u64>,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McSummary {
    pub seed: u64,
    pub trials: u64,
    pub t_max: u64,
    pub accept: u64,
    pub reject: u64,
    pub unresolved: u64,
}

impl McSummary {
    pub fn accept_rate(&self) -> f64 {
        self.accept as f64 / self.trials as f64
    }

    /// Standard error of the accept rate, `sqrt(f(1−f)/N)`.
    pub fn std_err(&self) -> f64 {
        let f = self.accept_rate();
        (f * (1.0 - f) / self.trials as f64).sqrt()
    }
}

enum Dynamics {
    /// `next[flip][state]` = cumulative `(target, prob)` list.
    Markov(Vec<[Vec<Vec<(usize, f64)>>; 2]>),
    /// `ops[flip]` = Kraus operators with the weights folded in.
    Quantum(Vec<[Vec<Matrix<Complex64>>; 2]>),
}

/// Precomputed double-precision form of a machine.
pub struct Sampler {
    dim: usize,
    accept: usize,
    reject: Option<usize>,
    /// Slot per step for time-dependent machines.
    schedule: Option<Vec<usize>>,
    dynamics: Dynamics,
    initial: Matrix<Complex64>,
    initial_cum: Option<Vec<(usize, f64)>>,
}

fn cumulative(weights: impl IntoIterator<Item = (usize, f64)>) -> Vec<(usize, f64)> {
    let mut acc = 0.0;
    let mut out = Vec::new();
    for (i, w) in weights {
        if w > 0.0 {
            acc += w;
            out.push((i, acc));
        }
    }
    out
}

fn draw(cum: &[(usize, f64)], rng: &mut ChaCha8Rng) -> usize {
    let total = cum.last().map_or(1.0, |c| c.1);
    let u = rng.random::<f64>() * total;
    cum.iter().find(|c| u < c.1).or(cum.last()).map_or(0, |c| c.0)
}

impl Sampler {
    pub fn new<S: Scalar, M: CoinMachine<S>>(m: &M) -> Result<Self> {
        let dim = m.dim();
        let (schedule, slot_starts): (Option<Vec<usize>>, Vec<u64>) = match m.horizon() {
            None => (None, vec![0]),
            Some(h) => {
                let sched: Vec<usize> = (0..h).map(|t| m.slot_at(t)).collect::<Result<_>>()?;
                let n_slots = sched.iter().max().map_or(0, |x| x + 1);
                let starts = (0..n_slots)
                    .map(|s| sched.iter().position(|&x| x == s).unwrap_or(0) as u64)
                    .collect();
                (Some(sched), starts)
            }
        };
        let chans: Vec<_> = slot_starts
            .iter()
            .map(|&t| m.channels_at(t))
            .collect::<Result<_>>()?;
        let initial = m.initial().matrix().convert((), Scalar::to_c64);
        let diagonal = m.initial().is_diagonal();
        let classical = diagonal && chans.iter().all(|(a, b)| a.is_monomial() && b.is_monomial());
        let dynamics = if classical {
            Dynamics::Markov(
                chans
                    .iter()
                    .map(|(e0, e1)| {
                        [*e0, *e1].map(|e| {
                            (0..dim)
                                .map(|i| {
                                    let mut probs = vec![0.0; dim];
                                    for k in e.ops() {
                                        let w = k.weight.re_f64();
                                        for (r, p) in probs.iter_mut().enumerate() {
                                            let a = k.op[(r, i)].abs_f64();
                                            *p += w * a * a;
                                        }
                                    }
                                    cumulative(probs.into_iter().enumerate())
                                })
                                .collect()
                        })
                    })
                    .collect(),
            )
        } else {
            Dynamics::Quantum(
                chans
                    .iter()
                    .map(|(e0, e1)| {
                        [*e0, *e1].map(|e| {
                            e.ops()
                                .iter()
                                .map(|k| {
                                    let s = k.weight.re_f64().max(0.0).sqrt();
                                    k.op.convert((), |x| x.to_c64() * s)
                                })
                                .collect()
                        })
                    })
                    .collect(),
            )
        };
        let initial_cum = diagonal.then(|| cumulative((0..dim).map(|i| (i, initial[(i, i)].re))));
        Ok(Sampler {
            dim,
            accept: m.accept(),
            reject: m.reject(),
            schedule,
            dynamics,
            initial,
            initial_cum,
        })
    }

    fn slot(&self, t: u64) -> Option<usize> {
        match &self.schedule {
            None => Some(0),
            Some(s) => s.get(t as usize).copied(),
        }
    }

    /// One run; flips are recorded when `record` is set.
    fn run(&self, p: f64, t_max: u64, rng: &mut ChaCha8Rng, mut record: Option<&mut Vec<bool>>) -> (Outcome, Option<u64>) {
        match &self.dynamics {
            Dynamics::Markov(slots) => {
                let mut state = draw(self.initial_cum.as_ref().expect("diagonal start"), rng);
                if state == self.accept {
                    return (Outcome::Accept, Some(0));
                }
                if Some(state) == self.reject {
                    return (Outcome::Reject, Some(0));
                }
                for t in 0..t_max {
                    let Some(slot) = self.slot(t) else { break };
                    let heads = rng.random::<f64>() < p;
                    if let Some(r) = record.as_deref_mut() {
                        r.push(heads);
                    }
                    state = draw(&slots[slot][heads as usize][state], rng);
                    if state == self.accept {
                        return (Outcome::Accept, Some(t + 1));
                    }
                    if Some(state) == self.reject {
                        return (Outcome::Reject, Some(t + 1));
                    }
                }
                (Outcome::Unresolved, None)
            }
            Dynamics::Quantum(slots) => {
                let mut rho = match &self.initial_cum {
                    Some(cum) => {
                        let i = draw(cum, rng);
                        Matrix::unit(self.dim, i, i, ())
                    }
                    None => self.initial.clone(),
                };
                if let Some(o) = self.measure_halt(&mut rho, rng) {
                    return (o, Some(0));
                }
                for t in 0..t_max {
                    let Some(slot) = self.slot(t) else { break };
                    let heads = rng.random::<f64>() < p;
                    if let Some(r) = record.as_deref_mut() {
                        r.push(heads);
                    }
                    let branches: Vec<(Matrix<Complex64>, f64)> = slots[slot][heads as usize]
                        .iter()
                        .map(|k| {
                            let s = k.mul(&rho).and_then(|x| x.mul(&k.adjoint())).expect("square");
                            let w = s.trace().re;
                            (s, w)
                        })
                        .collect();
                    let pick = draw(&cumulative(branches.iter().map(|b| b.1).enumerate()), rng);
                    let (s, w) = &branches[pick];
                    rho = s.scale(&Complex64::new(1.0 / w, 0.0));
                    if let Some(o) = self.measure_halt(&mut rho, rng) {
                        return (o, Some(t + 1));
                    }
                }
                (Outcome::Unresolved, None)
            }
        }
    }

    /// Measures `{Accept, Reject, rest}` and collapses `rho`.
    fn measure_halt(&self, rho: &mut Matrix<Complex64>, rng: &mut ChaCha8Rng) -> Option<Outcome> {
        let pa = rho[(self.accept, self.accept)].re.max(0.0);
        let pr = self.reject.map_or(0.0, |r| rho[(r, r)].re.max(0.0));
        let u = rng.random::<f64>();
        if u < pa {
            return Some(Outcome::Accept);
        }
        if u < pa + pr {
            return Some(Outcome::Reject);
        }
        if pa > 0.0 || pr > 0.0 {
            let keep = 1.0 - pa - pr;
            let halted = |i: usize| i == self.accept || Some(i) == self.reject;
            for i in 0..self.dim {
                for j in 0..self.dim {
                    rho[(i, j)] = if halted(i) || halted(j) {
                        Complex64::new(0.0, 0.0)
                    } else {
                        rho[(i, j)] / keep
                    };
                }
            }
        }
        None
    }
}

/// A single reproducible run with its flip record.
pub fn sample_run<S: Scalar, M: CoinMachine<S>>(m: &M, p: &BigRational, t_max: u64, seed: u64, trial: u64) -> Result<RunTrace> {
    check_bias(p)?;
    let sampler = Sampler::new(m)?;
    let mut rng = trial_rng(seed, trial);
    let mut flips = Vec::new();
    let (outcome, halt_step) = sampler.run(to_f64(p), t_max, &mut rng, Some(&mut flips));
    Ok(RunTrace {
        seed,
        trial,
        flips,
        halt_step,
        outcome,
    })
}

/// Tallies `trials` independent runs keyed by `(seed, trial)`.
pub fn monte_carlo<S: Scalar, M: CoinMachine<S>>(m: &M, p: &BigRational, t_max: u64, seed: u64, trials: u64) -> Result<McSummary> {
    check_bias(p)?;
    let sampler = Sampler::new(m)?;
    let pf = to_f64(p);
    let mut summary = McSummary {
        seed,
        trials,
        t_max,
        accept: 0,
        reject: 0,
        unresolved: 0,
    };
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        match sampler.run(pf, t_max, &mut rng, None).0 {
            Outcome::Accept => summary.accept += 1,
            Outcome::Reject => summary.reject += 1,
            Outcome::Unresolved => summary.unresolved += 1,
        }
    }
    Ok(summary)
}
