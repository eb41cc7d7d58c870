//! `Λ_z = z(I − (1−z)B)⁻¹` and its limit `Λ = lim_{z→0} Λ_z`.
//!
//! Exact mode treats every entry of `Λ_z` as a rational function of `z`,
//! obtained by fraction-free elimination over `Z[z]` (or `Z[i][z]`), and takes
//! the limit by comparing lowest-order coefficients. Float modes evaluate
//! `Λ_z` on a decreasing ladder of `z` values. By default each rung is pushed
//! to the spectral projection by repeated squaring: `Λ_z` has eigenvalue 1 on
//! the fixed space of `B` and every other eigenvalue strictly inside the unit
//! disc, so the squares converge to `Λ` itself and the rungs must agree.
//! Polynomial (Richardson) extrapolation over the ladder is also available.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::automaton::TransferMatrix;
use crate::error::{Error, Result};
use crate::fixed_point::zpoly::{bareiss_jordan, Ring, ZPoly};
use crate::linalg::Matrix;
use crate::ratio::q;
use crate::scalar::{Exact, Mp, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ExactLhopital,
    ZExtrapolation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FloatMethod {
    /// Repeated squaring of each rung to the spectral projection.
    SpectralPower,
    /// Neville extrapolation of the rungs to `z = 0`.
    Richardson,
}

/// Knobs for the float-mode limit.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitConfig {
    /// Decreasing `z` values.
    pub ladder: Vec<BigRational>,
    /// Extra bits on top of the `log2(1/z_min)` lost to conditioning.
    pub guard_bits: u32,
    /// How many times the guard is doubled before giving up.
    pub max_escalations: u32,
    pub method: FloatMethod,
    /// Agreement required between rungs; defaults to the mode tolerance.
    pub tol: Option<f64>,
}

impl Default for LimitConfig {
    fn default() -> Self {
        LimitConfig {
            ladder: vec![q(1, 4), q(1, 16), q(1, 64)],
            guard_bits: 32,
            max_escalations: 3,
            method: FloatMethod::SpectralPower,
            tol: None,
        }
    }
}

impl LimitConfig {
    /// Neville extrapolation over `z = 10⁻⁴, 10⁻⁶, 10⁻⁸`.
    pub fn richardson() -> Self {
        LimitConfig {
            ladder: vec![q(1, 10_000), q(1, 1_000_000), q(1, 100_000_000)],
            method: FloatMethod::Richardson,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    /// `‖BΛ − Λ‖_∞`.
    pub residual: f64,
    /// `‖Λ² − Λ‖_∞`.
    pub idempotence: f64,
    pub max_entry: f64,
    /// Largest disagreement between successive ladder estimates (0 in exact
    /// mode).
    pub ladder_spread: f64,
    pub working_precision: Option<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointOperator<S: Scalar> {
    pub lambda: Matrix<S>,
    pub provenance: Provenance,
    pub diagnostics: Diagnostics,
}

/// Output of [`Analyzable::limit_apply`].
#[derive(Clone, Debug, PartialEq)]
pub struct LimitSolution<S: Scalar> {
    /// `Λ·R`.
    pub value: Matrix<S>,
    pub provenance: Provenance,
    pub spread: f64,
    pub working_precision: Option<u32>,
}

/// Scalars for which the `z → 0` limit can be computed.
pub trait Analyzable: Scalar {
    /// `lim_{z→0} z(I − (1−z)B)⁻¹ · R` for a dense square `B`.
    fn limit_apply(b: &Matrix<Self>, r: &Matrix<Self>, cfg: &LimitConfig) -> Result<LimitSolution<Self>>;
}

fn check_z(z: &BigRational) -> Result<()> {
    if !z.is_positive() || *z >= BigRational::one() {
        return Err(Error::InvalidInput(format!("need 0 < z < 1, got {z}")));
    }
    Ok(())
}

fn lambda_z_dense<S: Scalar>(b: &Matrix<S>, z: &BigRational) -> Result<Matrix<S>> {
    let ctx = b.ctx();
    let n = b.rows();
    let w = S::from_real(&(BigRational::one() - z), ctx);
    let m = Matrix::identity(n, ctx).sub(&b.scale(&w))?;
    Ok(m.solve(&Matrix::identity(n, ctx))?.scale(&S::from_real(z, ctx)))
}

/// `Λ_z = z(I − (1−z)B)⁻¹` at the precision of `b`.
pub fn lambda_z<S: Scalar>(b: &TransferMatrix<S>, z: &BigRational) -> Result<Matrix<S>> {
    check_z(z)?;
    lambda_z_dense(&b.b.to_dense(), z)
}

// Exact path.

fn lcm_of_denoms<'a>(xs: impl Iterator<Item = &'a BigRational>) -> BigInt {
    xs.fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

fn scaled(x: &BigRational, l: &BigInt) -> BigInt {
    (x * BigRational::from_integer(l.clone())).to_integer()
}

/// Builds the rows of `[I − B + zB | R]` with denominators cleared per row.
fn integer_system<R: Ring>(b: &Matrix<Exact>, r: &Matrix<Exact>, lift: impl Fn(&Exact, &BigInt) -> R) -> Vec<Vec<ZPoly<R>>> {
    let n = b.rows();
    let one = <Exact as Scalar>::one(());
    (0..n)
        .map(|i| {
            let m0: Vec<Exact> = (0..n)
                .map(|j| if i == j { one.clone() - b[(i, j)].clone() } else { -b[(i, j)].clone() })
                .collect();
            let parts = m0
                .iter()
                .chain(b.row(i))
                .chain(r.row(i))
                .flat_map(|x| [&x.re, &x.im]);
            let l = lcm_of_denoms(parts);
            let mut row: Vec<ZPoly<R>> = (0..n)
                .map(|j| ZPoly::new(vec![lift(&m0[j], &l), lift(&b[(i, j)], &l)]))
                .collect();
            row.extend(r.row(i).iter().map(|x| ZPoly::constant(lift(x, &l))));
            row
        })
        .collect()
}

/// Runs the elimination and returns `(numerator, denominator)` per entry of
/// `Λ·R`, `None` for zero.
fn lhopital<R: Ring>(mut rows: Vec<Vec<ZPoly<R>>>, n: usize, m: usize) -> Result<Vec<Vec<Option<(R, R)>>>> {
    let d = bareiss_jordan(&mut rows).ok_or_else(|| Error::Invariant("I − (1−z)B is singular for all z".into()))?;
    let k = d.low_order().expect("nonzero determinant");
    let mut out = Vec::with_capacity(n);
    for row in rows.iter().take(n) {
        let mut out_row = Vec::with_capacity(m);
        for a in &row[n..n + m] {
            if let Some(lo) = a.low_order() {
                if lo + 1 < k {
                    return Err(Error::Invariant("Abel limit diverges; B is not power-bounded".into()));
                }
            }
            out_row.push(if k == 0 {
                None
            } else {
                let c = a.coeff(k - 1);
                (!c.is_zero()).then(|| (c, d.coeff(k)))
            });
        }
        out.push(out_row);
    }
    Ok(out)
}

fn exact_limit(b: &Matrix<Exact>, r: &Matrix<Exact>) -> Result<Matrix<Exact>> {
    let (n, m) = (b.rows(), r.cols());
    let real = b.data().iter().chain(r.data()).all(|x| x.im.is_zero());
    let mut out = Matrix::zeros(n, m, ());
    if real {
        let rows = integer_system(b, r, |x, l| scaled(&x.re, l));
        for (i, row) in lhopital(rows, n, m)?.into_iter().enumerate() {
            for (j, e) in row.into_iter().enumerate() {
                if let Some((num, den)) = e {
                    out[(i, j)] = Complex::new(BigRational::new(num, den), BigRational::zero());
                }
            }
        }
    } else {
        let rows = integer_system(b, r, |x, l| Complex::new(scaled(&x.re, l), scaled(&x.im, l)));
        for (i, row) in lhopital(rows, n, m)?.into_iter().enumerate() {
            for (j, e) in row.into_iter().enumerate() {
                if let Some((num, den)) = e {
                    let norm = &den.re * &den.re + &den.im * &den.im;
                    let t = num * den.conj();
                    out[(i, j)] = Complex::new(BigRational::new(t.re, norm.clone()), BigRational::new(t.im, norm));
                }
            }
        }
    }
    Ok(out)
}

impl Analyzable for Exact {
    fn limit_apply(b: &Matrix<Exact>, r: &Matrix<Exact>, _cfg: &LimitConfig) -> Result<LimitSolution<Exact>> {
        Ok(LimitSolution {
            value: exact_limit(b, r)?,
            provenance: Provenance::ExactLhopital,
            spread: 0.0,
            working_precision: None,
        })
    }
}

// Float path.

const MAX_SQUARINGS: usize = 256;

fn spectral_power(b: &Matrix<Mp>, z: &BigRational, thresh: f64, floor: f64) -> Result<Matrix<Mp>> {
    // Squaring doubles rounding error once the transients are gone, so stop
    // at the noise floor and keep the best iterate. Eigenvalues of Λ_z near 1
    // make ‖X² − X‖ rise before it falls; growth only counts as noise once
    // the residual has reached `floor`.
    let mut x = lambda_z_dense(b, z)?;
    let mut best: Option<(f64, Matrix<Mp>)> = None;
    for _ in 0..MAX_SQUARINGS {
        let x2 = x.mul(&x)?;
        let d = x2.sub(&x)?.max_abs();
        if d.is_nan() {
            break;
        }
        if d <= thresh {
            return Ok(x2);
        }
        match &best {
            Some((bd, _)) if d > 4.0 * bd && *bd <= floor => break,
            Some((bd, _)) if d >= *bd => {}
            _ => best = Some((d, x2.clone())),
        }
        x = x2;
    }
    match best {
        Some((d, x)) if d < 1e-3 => Ok(x),
        _ => Err(Error::Precision {
            message: format!("spectral projection did not settle at z = {z}"),
            achieved: best.map_or(f64::INFINITY, |b| b.0),
        }),
    }
}

/// Neville's scheme at 0: `P_{i..j} = (z_i P_{i+1..j} − z_j P_{i..j−1}) / (z_i − z_j)`.
/// Returns the extrapolant using the first `k` points for `k = 1..=len`.
fn neville(zs: &[BigRational], xs: &[Matrix<Mp>], wp: u32) -> Result<Vec<Matrix<Mp>>> {
    let mut table: Vec<Matrix<Mp>> = xs.to_vec();
    let mut heads = vec![table[0].clone()];
    for level in 1..xs.len() {
        let mut next = Vec::with_capacity(table.len() - 1);
        for i in 0..table.len() - 1 {
            let (zi, zj) = (&zs[i], &zs[i + level]);
            let a = table[i + 1].scale(&Mp::from_real(zi, wp));
            let c = table[i].scale(&Mp::from_real(zj, wp));
            next.push(a.sub(&c)?.scale(&Mp::from_real(&(BigRational::one() / (zi - zj)), wp)));
        }
        heads.push(next[0].clone());
        table = next;
    }
    Ok(heads)
}

fn bits_for(z: &BigRational) -> u32 {
    // ceil(log2(1/z)) for 0 < z < 1.
    let inv = BigRational::one() / z;
    let c = inv.ceil().to_integer();
    (c - BigInt::one()).bits() as u32
}

fn mp_limit(b: &Matrix<Mp>, r: &Matrix<Mp>, cfg: &LimitConfig) -> Result<LimitSolution<Mp>> {
    let prec = b.ctx();
    if cfg.ladder.is_empty() {
        return Err(Error::InvalidInput("empty z ladder".into()));
    }
    for z in &cfg.ladder {
        check_z(z)?;
    }
    let target = cfg.tol.unwrap_or_else(|| Mp::default_tol(prec));
    let zmin = cfg.ladder.iter().min().expect("nonempty");
    let base_guard = bits_for(zmin) + cfg.guard_bits;
    // Rounding of the input at `prec` bits moves eigenvalue 1 by about 2^-prec.
    let floor = 2f64.powi(-(prec as i32) / 2);
    let mut last_err = None;
    for attempt in 0..=cfg.max_escalations {
        let wp = prec + (base_guard << attempt);
        let bw = b.convert(wp, |x| x.with_prec(wp));
        let run = || -> Result<(Matrix<Mp>, f64)> {
            let estimates: Vec<Matrix<Mp>> = match cfg.method {
                FloatMethod::SpectralPower => cfg
                    .ladder
                    .iter()
                    .map(|z| spectral_power(&bw, z, target / 256.0, floor))
                    .collect::<Result<_>>()?,
                FloatMethod::Richardson => {
                    let raw: Vec<Matrix<Mp>> = cfg.ladder.iter().map(|z| lambda_z_dense(&bw, z)).collect::<Result<_>>()?;
                    neville(&cfg.ladder, &raw, wp)?
                }
            };
            let n = estimates.len();
            let spread = if n < 2 { 0.0 } else { estimates[n - 1].sub(&estimates[n - 2])?.max_abs() };
            Ok((estimates.last().expect("nonempty").clone(), spread))
        };
        match run() {
            Ok((lam, spread)) if spread <= target => {
                let rw = r.convert(wp, |x| x.with_prec(wp));
                let value = lam.mul(&rw)?.convert(prec, |x| x.with_prec(prec));
                return Ok(LimitSolution {
                    value,
                    provenance: Provenance::ZExtrapolation,
                    spread,
                    working_precision: Some(wp),
                });
            }
            Ok((_, spread)) => {
                last_err = Some(Error::Precision {
                    message: format!("z-ladder estimates disagree by {spread:e} at {wp} bits (tolerance {target:e})"),
                    achieved: spread,
                })
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

impl Analyzable for Mp {
    fn limit_apply(b: &Matrix<Mp>, r: &Matrix<Mp>, cfg: &LimitConfig) -> Result<LimitSolution<Mp>> {
        mp_limit(b, r, cfg)
    }
}

impl Analyzable for Complex64 {
    fn limit_apply(b: &Matrix<Complex64>, r: &Matrix<Complex64>, cfg: &LimitConfig) -> Result<LimitSolution<Complex64>> {
        let lift = |x: &Complex64| Mp::from_f64(x.re, x.im, 53);
        let sol = mp_limit(&b.convert(53, lift), &r.convert(53, lift), cfg)?;
        Ok(LimitSolution {
            value: sol.value.convert((), Scalar::to_c64),
            provenance: sol.provenance,
            spread: sol.spread,
            working_precision: sol.working_precision,
        })
    }
}

fn all_within<S: Scalar>(m: &Matrix<S>, tol: f64) -> bool {
    m.data().iter().all(|x| x.within(tol))
}

/// `Λ = lim_{z→0} Λ_z` with default settings.
pub fn lambda_limit<S: Analyzable>(b: &TransferMatrix<S>) -> Result<FixedPointOperator<S>> {
    lambda_limit_with(b, &LimitConfig::default())
}

/// `Λ` on the full `S² × S²` space, with its invariants checked.
pub fn lambda_limit_with<S: Analyzable>(b: &TransferMatrix<S>, cfg: &LimitConfig) -> Result<FixedPointOperator<S>> {
    let ctx = b.ctx();
    let dense = b.b.to_dense();
    let n = dense.rows();
    let sol = S::limit_apply(&dense, &Matrix::identity(n, ctx), cfg)?;
    let lam = sol.value;
    let fixed = dense.mul(&lam)?.sub(&lam)?;
    let idem = lam.mul(&lam)?.sub(&lam)?;
    let tol = cfg.tol.unwrap_or_else(|| S::default_tol(ctx));
    let diagnostics = Diagnostics {
        residual: fixed.norm_inf(),
        idempotence: idem.norm_inf(),
        max_entry: lam.max_abs(),
        ladder_spread: sol.spread,
        working_precision: sol.working_precision,
    };
    let row_tol = tol * n as f64;
    let ok_fixed = if tol == 0.0 { all_within(&fixed, 0.0) } else { diagnostics.residual <= row_tol };
    let ok_idem = if tol == 0.0 { all_within(&idem, 0.0) } else { diagnostics.idempotence <= row_tol };
    if !ok_fixed {
        return Err(Error::Invariant(format!("‖BΛ − Λ‖ = {:e} exceeds tolerance", diagnostics.residual)));
    }
    if !ok_idem {
        return Err(Error::Invariant(format!("‖Λ² − Λ‖ = {:e} exceeds tolerance", diagnostics.idempotence)));
    }
    if diagnostics.max_entry > 1.0 + tol.max(1e-12) {
        return Err(Error::Invariant(format!("Λ has an entry of size {}", diagnostics.max_entry)));
    }
    Ok(FixedPointOperator {
        lambda: lam,
        provenance: sol.provenance,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::CoinAutomaton;
    use crate::constructions::{first_heads, hc_walk, identity_automaton, single_flip, two_cycle};
    use crate::linalg::{KrausOp, SparseMatrix, Superoperator};
    use crate::ratio::to_f64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tm_from_dense<S: Scalar>(m: Matrix<S>) -> TransferMatrix<S> {
        let dim = (m.rows() as f64).sqrt() as usize;
        TransferMatrix {
            p: q(0, 1),
            dim,
            b: SparseMatrix::from_dense(&m),
        }
    }

    fn ex(n: i64, d: i64) -> Exact {
        Exact::from_real(&q(n, d), ())
    }

    /// A random classical channel on `dim` states as a transfer matrix.
    pub(super) fn random_stochastic(dim: usize, rng: &mut ChaCha8Rng) -> Superoperator<Exact> {
        let mut ops = Vec::new();
        for from in 0..dim {
            let mut w: Vec<i64> = (0..dim).map(|_| rng.random_range(0..4)).collect();
            if w.iter().all(|&x| x == 0) {
                w[from] = 1;
            }
            let total: i64 = w.iter().sum();
            for (to, &wt) in w.iter().enumerate() {
                if wt > 0 {
                    ops.push(KrausOp::new(ex(wt, total), Matrix::unit(dim, to, from, ())));
                }
            }
        }
        Superoperator::checked(dim, ops, 0.0).unwrap()
    }

    #[test]
    fn trivial_z_cases() {
        let id = tm_from_dense(Matrix::<Exact>::identity(4, ()));
        assert_eq!(lambda_z(&id, &q(1, 3)).unwrap(), Matrix::identity(4, ()));
        let zero = tm_from_dense(Matrix::<Exact>::zeros(4, 4, ()));
        assert_eq!(lambda_z(&zero, &q(1, 3)).unwrap(), Matrix::identity(4, ()).scale(&ex(1, 3)));
        assert!(lambda_z(&id, &q(0, 1)).is_err());
        assert!(lambda_z(&id, &q(1, 1)).is_err());
    }

    #[test]
    fn lambda_z_matches_truncated_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in 2..=3 {
            let e = random_stochastic(dim, &mut rng).convert((), Scalar::to_c64);
            let b = TransferMatrix::from_channel(&e);
            let z = 1e-3;
            let lam = lambda_z(&b, &q(1, 1000)).unwrap();
            // Series Σ_{t≤T} z(1−z)^t B^t.
            let bd = b.b.to_dense();
            let n = bd.rows();
            let t_max = 20_000;
            let mut term = Matrix::<Complex64>::identity(n, ()).scale(&Complex64::new(z, 0.0));
            let mut sum = term.clone();
            for _ in 0..t_max {
                term = bd.mul(&term).unwrap().scale(&Complex64::new(1.0 - z, 0.0));
                sum = sum.add(&term).unwrap();
            }
            let bound = 2.0 * (1.0 - z).powi(t_max) + 1e-9;
            assert!(lam.sub(&sum).unwrap().max_abs() <= bound);
        }
    }

    #[test]
    fn identity_and_zero_limits() {
        let id = tm_from_dense(Matrix::<Exact>::identity(4, ()));
        let fp = lambda_limit(&id).unwrap();
        assert_eq!(fp.lambda, Matrix::identity(4, ()));
        assert_eq!(fp.provenance, Provenance::ExactLhopital);
        let zero = tm_from_dense(Matrix::<Exact>::zeros(4, 4, ()));
        assert_eq!(lambda_limit(&zero).unwrap().lambda, Matrix::zeros(4, 4, ()));
        let idf = tm_from_dense(Matrix::<Mp>::identity(4, 128));
        let fpf = lambda_limit(&idf).unwrap();
        assert!(fpf.lambda.sub(&Matrix::identity(4, 128)).unwrap().max_abs() < 1e-30);
        assert_eq!(fpf.provenance, Provenance::ZExtrapolation);
    }

    /// Kernel-projection oracle: for a diagonalizable `B` with semisimple
    /// eigenvalue 1, `Λ = V(WᵀV)⁻¹Wᵀ` where the columns of `V` span
    /// `ker(B − I)` and those of `W` span `ker(Bᵀ − I)`.
    fn kernel_projection(b: &Matrix<Exact>) -> Matrix<Exact> {
        let n = b.rows();
        let id = Matrix::identity(n, ());
        let v = b.sub(&id).unwrap().nullspace(0.0);
        let w = b.transpose().sub(&id).unwrap().nullspace(0.0);
        if v.is_empty() {
            return Matrix::zeros(n, n, ());
        }
        let vm = Matrix::from_fn(n, v.len(), (), |i, j| v[j][i].clone());
        let wm = Matrix::from_fn(n, w.len(), (), |i, j| w[j][i].clone());
        let core = wm.transpose().mul(&vm).unwrap().inverse().unwrap();
        vm.mul(&core).unwrap().mul(&wm.transpose()).unwrap()
    }

    #[test]
    fn exact_limit_matches_kernel_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in 2..=3 {
            for _ in 0..4 {
                let e = random_stochastic(dim, &mut rng);
                let b = TransferMatrix::from_channel(&e);
                let fp = lambda_limit(&b).unwrap();
                assert_eq!(fp.lambda, kernel_projection(&b.b.to_dense()));
                assert_eq!(fp.diagnostics.residual, 0.0);
            }
        }
    }

    #[test]
    fn float_limit_agrees_with_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for dim in 2..=3 {
            let e = random_stochastic(dim, &mut rng);
            let exact = lambda_limit(&TransferMatrix::from_channel(&e)).unwrap().lambda;
            let mp = e.convert(128, |x| Mp::from_parts(&x.re, &x.im, 128));
            let float = lambda_limit(&TransferMatrix::from_channel(&mp)).unwrap();
            let diff = exact.convert(128, |x| Mp::from_parts(&x.re, &x.im, 128)).sub(&float.lambda).unwrap();
            assert!(diff.max_abs() < 1e-30, "{}", diff.max_abs());
            assert!(float.diagnostics.idempotence < 1e-30);
            let c = e.convert((), Scalar::to_c64);
            let dbl = lambda_limit(&TransferMatrix::from_channel(&c)).unwrap();
            let diff = exact.convert((), Scalar::to_c64).sub(&dbl.lambda).unwrap();
            assert!(diff.max_abs() < 1e-9);
        }
    }

    #[test]
    fn richardson_option() {
        let e = single_flip::<Mp>(128).unwrap().coin_superop(&q(3, 10)).unwrap();
        let cfg = LimitConfig {
            tol: Some(1e-9),
            ..LimitConfig::richardson()
        };
        let fp = lambda_limit_with(&TransferMatrix::from_channel(&e), &cfg).unwrap();
        let exact = lambda_limit(&TransferMatrix::from_channel(&single_flip::<Exact>(()).unwrap().coin_superop(&q(3, 10)).unwrap()))
            .unwrap()
            .lambda;
        let d = exact.convert(128, |x| Mp::from_parts(&x.re, &x.im, 128)).sub(&fp.lambda).unwrap();
        assert!(d.max_abs() < 1e-9);
    }

    fn accept_of<S: Analyzable>(m: &CoinAutomaton<S>, p: &BigRational) -> S {
        let fp = lambda_limit(&m.transfer(p).unwrap()).unwrap();
        let v = fp.lambda.matvec(&m.v0()).unwrap();
        v[m.diag_coord(m.accept())].clone()
    }

    #[test]
    fn small_machine_limits() {
        let sf = single_flip::<Exact>(()).unwrap();
        assert_eq!(accept_of(&sf, &q(3, 10)).as_rational(), Some(q(3, 10)));
        let fh = first_heads::<Exact>(()).unwrap();
        assert_eq!(accept_of(&fh, &q(3, 10)).as_rational(), Some(q(1, 1)));
        assert_eq!(accept_of(&fh, &q(0, 1)).as_rational(), Some(q(0, 1)));
        let id = identity_automaton::<Exact>(()).unwrap();
        assert_eq!(accept_of(&id, &q(1, 2)).as_rational(), Some(q(0, 1)));
        let tc = two_cycle::<Exact>(()).unwrap();
        let fp = lambda_limit(&tc.transfer(&q(1, 2)).unwrap()).unwrap();
        let v = fp.lambda.matvec(&tc.v0()).unwrap();
        assert_eq!(v[tc.diag_coord(0)].as_rational(), Some(q(1, 2)));
    }

    #[test]
    fn hc_walk_gamblers_ruin() {
        let m = hc_walk::<Exact>(&q(1, 2), &q(1, 10), 2, ()).unwrap();
        assert_eq!(accept_of(&m, &q(3, 5)).as_rational(), Some(q(9, 13)));
        let mf = hc_walk::<Mp>(&q(1, 2), &q(1, 10), 2, 128).unwrap();
        assert!((accept_of(&mf, &q(3, 5)).re_f64() - to_f64(&q(9, 13))).abs() < 1e-15);
    }
}
