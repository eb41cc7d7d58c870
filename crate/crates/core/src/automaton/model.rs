use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, Matrix, SparseMatrix, Superoperator};
use crate::scalar::Scalar;

/// How a run is judged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Accept and Reject are both absorbing halting states.
    Halting,
    /// Accept by halting, reject by running forever.
    OneSided,
    /// Time-averaged occupancy of `accepting_set`.
    Limit,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Halting => "halting",
            Mode::OneSided => "one_sided",
            Mode::Limit => "limit",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "halting" => Ok(Mode::Halting),
            "one_sided" | "one-sided" => Ok(Mode::OneSided),
            "limit" => Ok(Mode::Limit),
            other => Err(Error::InvalidInput(format!("unknown mode {other:?}"))),
        }
    }
}

/// Checks a bias lies in `[0, 1]`.
pub fn check_bias(p: &BigRational) -> Result<()> {
    if *p < BigRational::zero() || *p > BigRational::one() {
        return Err(Error::InvalidInput(format!("bias {p} outside [0, 1]")));
    }
    Ok(())
}

/// `mat(E_p)` for a fixed bias.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix<S: Scalar> {
    pub p: BigRational,
    /// Side of the underlying state space (the matrix is `dim² × dim²`).
    pub dim: usize,
    pub b: SparseMatrix<S>,
}

impl<S: Scalar> TransferMatrix<S> {
    pub fn from_channels(p: &BigRational, dim: usize, b0: &SparseMatrix<S>, b1: &SparseMatrix<S>) -> Result<Self> {
        check_bias(p)?;
        let ctx = b0.ctx();
        let w1 = S::from_real(p, ctx);
        let w0 = S::from_real(&(BigRational::one() - p), ctx);
        Ok(TransferMatrix {
            p: p.clone(),
            dim,
            b: b1.combine(&w1, b0, &w0),
        })
    }

    /// Wraps an arbitrary channel matrix (for analyses not tied to a coin).
    pub fn from_channel(e: &Superoperator<S>) -> Self {
        TransferMatrix {
            p: BigRational::zero(),
            dim: e.dim(),
            b: e.sparse_matrix(),
        }
    }

    pub fn size(&self) -> usize {
        self.dim * self.dim
    }

    pub fn ctx(&self) -> S::Ctx {
        self.b.ctx()
    }
}

/// Anything that evolves under a coin: static or time-dependent.
pub trait CoinMachine<S: Scalar> {
    fn dim(&self) -> usize;
    fn accept(&self) -> usize;
    fn reject(&self) -> Option<usize>;
    fn initial(&self) -> &DensityMatrix<S>;
    /// `(mat E0, mat E1)` in force at step `t` (0-based).
    fn transfer_pair(&self, t: u64) -> Result<(&SparseMatrix<S>, &SparseMatrix<S>)>;
    /// `(E0, E1)` in force at step `t`.
    fn channels_at(&self, t: u64) -> Result<(&Superoperator<S>, &Superoperator<S>)>;
    fn horizon(&self) -> Option<u64>;
    /// Index of the channel pair in force at step `t`; equal indices mean
    /// identical channels.
    fn slot_at(&self, t: u64) -> Result<usize>;

    fn ctx(&self) -> S::Ctx {
        self.initial().matrix().ctx()
    }
}

/// Two channels (tails, heads), an initial state and the accept structure.
#[derive(Clone, Debug)]
pub struct CoinAutomaton<S: Scalar> {
    dim: usize,
    e0: Superoperator<S>,
    e1: Superoperator<S>,
    initial: DensityMatrix<S>,
    accept: usize,
    reject: Option<usize>,
    mode: Mode,
    accepting_set: Vec<usize>,
    b0: SparseMatrix<S>,
    b1: SparseMatrix<S>,
}

fn check_index(name: &str, i: usize, dim: usize) -> Result<()> {
    if i >= dim {
        return Err(Error::InvalidInput(format!("{name} index {i} out of range for dimension {dim}")));
    }
    Ok(())
}

/// Both channels must fix `|i><i|`.
fn check_absorbing<S: Scalar>(name: &str, i: usize, chans: [&Superoperator<S>; 2], tol: f64) -> Result<()> {
    let dim = chans[0].dim();
    let ctx = chans[0].ctx();
    let unit = Matrix::unit(dim, i, i, ctx);
    for (b, e) in chans.iter().enumerate() {
        let out = e.apply_matrix(&unit)?;
        let diff = out.sub(&unit)?;
        let ok = if tol == 0.0 {
            diff.data().iter().all(Scalar::is_zero)
        } else {
            diff.max_abs() <= tol
        };
        if !ok {
            return Err(Error::Invariant(format!("{name} state {i} is not absorbing under E{b}")));
        }
    }
    Ok(())
}

impl<S: Scalar> CoinAutomaton<S> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        e0: Superoperator<S>,
        e1: Superoperator<S>,
        initial: DensityMatrix<S>,
        accept: usize,
        reject: Option<usize>,
        mode: Mode,
        accepting_set: Vec<usize>,
    ) -> Result<Self> {
        let dim = e0.dim();
        if e1.dim() != dim || initial.dim() != dim {
            return Err(Error::Dimension(format!(
                "E0 acts on {dim}, E1 on {}, initial state has {}",
                e1.dim(),
                initial.dim()
            )));
        }
        let tol = S::default_tol(e0.ctx());
        for (b, e) in [&e0, &e1].iter().enumerate() {
            let check = e.validate(tol);
            if !check.pass {
                return Err(Error::Invariant(format!(
                    "E{b} is not trace preserving (residual {:e})",
                    check.residual
                )));
            }
        }
        check_index("accept", accept, dim)?;
        check_absorbing("accept", accept, [&e0, &e1], tol)?;
        if let Some(r) = reject {
            check_index("reject", r, dim)?;
            if r == accept {
                return Err(Error::InvalidInput("accept and reject coincide".into()));
            }
            check_absorbing("reject", r, [&e0, &e1], tol)?;
        }
        for &a in &accepting_set {
            check_index("accepting_set", a, dim)?;
        }
        if mode == Mode::Limit && accepting_set.is_empty() {
            return Err(Error::InvalidInput("limit mode needs a nonempty accepting set".into()));
        }
        if mode == Mode::Halting && reject.is_none() {
            return Err(Error::InvalidInput("halting mode needs a reject state".into()));
        }
        let b0 = e0.sparse_matrix();
        let b1 = e1.sparse_matrix();
        Ok(CoinAutomaton {
            dim,
            e0,
            e1,
            initial,
            accept,
            reject,
            mode,
            accepting_set,
            b0,
            b1,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn e0(&self) -> &Superoperator<S> {
        &self.e0
    }

    pub fn e1(&self) -> &Superoperator<S> {
        &self.e1
    }

    pub fn initial(&self) -> &DensityMatrix<S> {
        &self.initial
    }

    pub fn accept(&self) -> usize {
        self.accept
    }

    pub fn reject(&self) -> Option<usize> {
        self.reject
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn accepting_set(&self) -> &[usize] {
        &self.accepting_set
    }

    pub fn ctx(&self) -> S::Ctx {
        self.e0.ctx()
    }

    pub fn with_initial(&self, initial: DensityMatrix<S>) -> Result<Self> {
        Self::new(
            self.e0.clone(),
            self.e1.clone(),
            initial,
            self.accept,
            self.reject,
            self.mode,
            self.accepting_set.clone(),
        )
    }

    /// Same channels judged under a different acceptance mode.
    pub fn with_mode(&self, mode: Mode, accepting_set: Vec<usize>) -> Result<Self> {
        Self::new(
            self.e0.clone(),
            self.e1.clone(),
            self.initial.clone(),
            self.accept,
            self.reject,
            mode,
            accepting_set,
        )
    }

    /// `E_p = p·E1 + (1−p)·E0` as a Kraus family.
    pub fn coin_superop(&self, p: &BigRational) -> Result<Superoperator<S>> {
        check_bias(p)?;
        let ctx = self.ctx();
        Superoperator::mixture(&[
            (S::from_real(p, ctx), &self.e1),
            (S::from_real(&(BigRational::one() - p), ctx), &self.e0),
        ])
    }

    pub fn transfer(&self, p: &BigRational) -> Result<TransferMatrix<S>> {
        TransferMatrix::from_channels(p, self.dim, &self.b0, &self.b1)
    }

    /// `vec(|i><i|)` as a coordinate index.
    pub fn diag_coord(&self, i: usize) -> usize {
        i * self.dim + i
    }

    pub fn v0(&self) -> Vec<S> {
        self.initial.vectorize()
    }

    /// Every Kraus operator maps basis states to multiples of basis states
    /// and the initial state is diagonal.
    pub fn is_classical(&self) -> bool {
        self.e0.is_monomial() && self.e1.is_monomial() && self.initial.is_diagonal()
    }

    pub fn convert<T: Scalar>(&self, ctx: T::Ctx, f: impl Fn(&S) -> T + Copy) -> Result<CoinAutomaton<T>> {
        CoinAutomaton::new(
            self.e0.convert(ctx, f),
            self.e1.convert(ctx, f),
            DensityMatrix::new_unchecked(self.initial.matrix().convert(ctx, f)),
            self.accept,
            self.reject,
            self.mode,
            self.accepting_set.clone(),
        )
    }
}

impl<S: Scalar> CoinMachine<S> for CoinAutomaton<S> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn accept(&self) -> usize {
        self.accept
    }

    fn reject(&self) -> Option<usize> {
        self.reject
    }

    fn initial(&self) -> &DensityMatrix<S> {
        &self.initial
    }

    fn transfer_pair(&self, _t: u64) -> Result<(&SparseMatrix<S>, &SparseMatrix<S>)> {
        Ok((&self.b0, &self.b1))
    }

    fn channels_at(&self, _t: u64) -> Result<(&Superoperator<S>, &Superoperator<S>)> {
        Ok((&self.e0, &self.e1))
    }

    fn horizon(&self) -> Option<u64> {
        None
    }

    fn slot_at(&self, _t: u64) -> Result<usize> {
        Ok(0)
    }
}

/// A machine whose channels depend on the step index. The schedule maps step
/// `t < horizon` to an index into `pairs`.
#[derive(Clone, Debug)]
pub struct TimeDependentAutomaton<S: Scalar> {
    dim: usize,
    pairs: Vec<(Superoperator<S>, Superoperator<S>)>,
    mats: Vec<(SparseMatrix<S>, SparseMatrix<S>)>,
    schedule: Vec<usize>,
    initial: DensityMatrix<S>,
    accept: usize,
    reject: Option<usize>,
}

impl<S: Scalar> TimeDependentAutomaton<S> {
    pub fn new(
        pairs: Vec<(Superoperator<S>, Superoperator<S>)>,
        schedule: Vec<usize>,
        initial: DensityMatrix<S>,
        accept: usize,
        reject: Option<usize>,
    ) -> Result<Self> {
        let dim = initial.dim();
        if pairs.is_empty() {
            return Err(Error::InvalidInput("empty channel schedule".into()));
        }
        check_index("accept", accept, dim)?;
        if let Some(r) = reject {
            check_index("reject", r, dim)?;
        }
        let tol = S::default_tol(initial.matrix().ctx());
        for (k, (e0, e1)) in pairs.iter().enumerate() {
            if e0.dim() != dim || e1.dim() != dim {
                return Err(Error::Dimension(format!("schedule entry {k} has the wrong dimension")));
            }
            for (b, e) in [e0, e1].iter().enumerate() {
                let check = e.validate(tol);
                if !check.pass {
                    return Err(Error::Invariant(format!(
                        "schedule entry {k}, E{b}: residual {:e}",
                        check.residual
                    )));
                }
            }
            check_absorbing("accept", accept, [e0, e1], tol)?;
            if let Some(r) = reject {
                check_absorbing("reject", r, [e0, e1], tol)?;
            }
        }
        if let Some(bad) = schedule.iter().find(|&&k| k >= pairs.len()) {
            return Err(Error::InvalidInput(format!("schedule refers to missing entry {bad}")));
        }
        let mats = pairs.iter().map(|(a, b)| (a.sparse_matrix(), b.sparse_matrix())).collect();
        Ok(TimeDependentAutomaton {
            dim,
            pairs,
            mats,
            schedule,
            initial,
            accept,
            reject,
        })
    }

    pub fn pairs(&self) -> &[(Superoperator<S>, Superoperator<S>)] {
        &self.pairs
    }

    pub fn schedule(&self) -> &[usize] {
        &self.schedule
    }

    fn slot(&self, t: u64) -> Result<usize> {
        self.schedule.get(t as usize).copied().ok_or(Error::Horizon {
            step: t + 1,
            horizon: self.schedule.len() as u64,
        })
    }
}

impl<S: Scalar> CoinMachine<S> for TimeDependentAutomaton<S> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn accept(&self) -> usize {
        self.accept
    }

    fn reject(&self) -> Option<usize> {
        self.reject
    }

    fn initial(&self) -> &DensityMatrix<S> {
        &self.initial
    }

    fn transfer_pair(&self, t: u64) -> Result<(&SparseMatrix<S>, &SparseMatrix<S>)> {
        let (a, b) = &self.mats[self.slot(t)?];
        Ok((a, b))
    }

    fn channels_at(&self, t: u64) -> Result<(&Superoperator<S>, &Superoperator<S>)> {
        let (a, b) = &self.pairs[self.slot(t)?];
        Ok((a, b))
    }

    fn horizon(&self) -> Option<u64> {
        Some(self.schedule.len() as u64)
    }

    fn slot_at(&self, t: u64) -> Result<usize> {
        self.slot(t)
    }
}
