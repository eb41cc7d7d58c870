//! Numeric modes.
//!
//! Everything above this module is generic over [`Scalar`], a complex field
//! element. Three implementations are provided:
//!
//! * [`Exact`]: Gaussian rationals (pairs of arbitrary-precision fractions).
//!   Tolerances are zero and every comparison is exact.
//! * [`Mp`]: MPFR-backed complex floats with a per-value precision. Binary
//!   operations run at the larger precision of their operands.
//! * [`Complex64`]: plain double precision, used for Monte Carlo and quick
//!   cross-checks.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rug::integer::Order;

/// Exact complex rational.
pub type Exact = Complex<BigRational>;

/// Default working precision of the float mode, in significand bits.
pub const DEFAULT_PRECISION: u32 = 128;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Construction context: `()` for exact and double, the precision in bits
    /// for [`Mp`].
    type Ctx: Copy + Debug + PartialEq + Send + Sync + 'static;

    fn zero(ctx: Self::Ctx) -> Self;
    fn one(ctx: Self::Ctx) -> Self;
    fn from_parts(re: &BigRational, im: &BigRational, ctx: Self::Ctx) -> Self;
    fn from_f64(re: f64, im: f64, ctx: Self::Ctx) -> Self;
    /// `(cos θ, sin θ)`, or `None` when the mode cannot represent them.
    fn cos_sin(theta: &BigRational, ctx: Self::Ctx) -> Option<(Self, Self)>;

    fn ctx(&self) -> Self::Ctx;
    fn conj(&self) -> Self;
    /// `|x|²` as a scalar with zero imaginary part.
    fn norm_sqr(&self) -> Self;
    /// True zero (not "small").
    fn is_zero(&self) -> bool;
    fn abs_f64(&self) -> f64;
    fn to_c64(&self) -> Complex64;
    /// The exact value of the real part when the imaginary part is zero and
    /// the mode is exact.
    fn as_rational(&self) -> Option<BigRational>;
    /// Human/JSON rendering of the real part: `"num/den"` in exact mode, a
    /// decimal string otherwise.
    fn render_re(&self) -> String;
    /// Same for the imaginary part.
    fn render_im(&self) -> String;

    fn is_exact() -> bool;
    /// Tolerance used by invariant checks: 0 in exact mode,
    /// `2^-(bits - 24)` in float mode.
    fn default_tol(ctx: Self::Ctx) -> f64;

    fn from_real(q: &BigRational, ctx: Self::Ctx) -> Self {
        Self::from_parts(q, &BigRational::zero(), ctx)
    }

    fn from_i64(n: i64, ctx: Self::Ctx) -> Self {
        Self::from_real(&BigRational::from_integer(BigInt::from(n)), ctx)
    }

    fn re_f64(&self) -> f64 {
        self.to_c64().re
    }

    /// `|x| <= tol`, with an exact zero test when `tol == 0`.
    fn within(&self, tol: f64) -> bool {
        if tol == 0.0 {
            self.is_zero()
        } else {
            self.abs_f64() <= tol
        }
    }
}

impl Scalar for Exact {
    type Ctx = ();

    fn zero(_: ()) -> Self {
        Complex::new(BigRational::zero(), BigRational::zero())
    }

    fn one(_: ()) -> Self {
        Complex::new(
            BigRational::from_integer(BigInt::from(1)),
            BigRational::zero(),
        )
    }

    fn from_parts(re: &BigRational, im: &BigRational, _: ()) -> Self {
        Complex::new(re.clone(), im.clone())
    }

    fn from_f64(re: f64, im: f64, _: ()) -> Self {
        let conv = |x: f64| BigRational::from_float(x).expect("finite f64");
        Complex::new(conv(re), conv(im))
    }

    fn cos_sin(theta: &BigRational, _: ()) -> Option<(Self, Self)> {
        theta.is_zero().then(|| (<Self as Scalar>::one(()), <Self as Scalar>::zero(())))
    }

    fn ctx(&self) {}

    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    fn norm_sqr(&self) -> Self {
        Complex::new(
            &self.re * &self.re + &self.im * &self.im,
            BigRational::zero(),
        )
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn abs_f64(&self) -> f64 {
        let c = self.to_c64();
        c.re.hypot(c.im)
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn as_rational(&self) -> Option<BigRational> {
        self.im.is_zero().then(|| self.re.clone())
    }

    fn render_re(&self) -> String {
        self.re.to_string()
    }

    fn render_im(&self) -> String {
        self.im.to_string()
    }

    fn is_exact() -> bool {
        true
    }

    fn default_tol(_: ()) -> f64 {
        0.0
    }
}

impl Scalar for Complex64 {
    type Ctx = ();

    fn zero(_: ()) -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one(_: ()) -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn from_parts(re: &BigRational, im: &BigRational, _: ()) -> Self {
        Complex64::new(
            re.to_f64().unwrap_or(f64::NAN),
            im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn from_f64(re: f64, im: f64, _: ()) -> Self {
        Complex64::new(re, im)
    }

    fn cos_sin(theta: &BigRational, _: ()) -> Option<(Self, Self)> {
        let t = theta.to_f64()?;
        Some((Complex64::new(t.cos(), 0.0), Complex64::new(t.sin(), 0.0)))
    }

    fn ctx(&self) {}

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn norm_sqr(&self) -> Self {
        Complex64::new(Complex::norm_sqr(self), 0.0)
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn abs_f64(&self) -> f64 {
        self.norm()
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn as_rational(&self) -> Option<BigRational> {
        None
    }

    fn render_re(&self) -> String {
        format!("{:e}", self.re)
    }

    fn render_im(&self) -> String {
        format!("{:e}", self.im)
    }

    fn is_exact() -> bool {
        false
    }

    fn default_tol(_: ()) -> f64 {
        (-(53.0 - 24.0f64)).exp2()
    }
}

/// Multi-precision complex number.
#[derive(Clone, Debug, PartialEq)]
pub struct Mp(pub rug::Complex);

impl Mp {
    pub fn prec(&self) -> u32 {
        self.0.prec().0
    }

    pub fn real_part(&self) -> &rug::Float {
        self.0.real()
    }

    /// Re-round to a different precision.
    pub fn with_prec(&self, prec: u32) -> Mp {
        Mp(rug::Complex::with_val(prec, &self.0))
    }
}

pub(crate) fn bigint_to_rug(n: &BigInt) -> rug::Integer {
    let (sign, bytes) = n.to_bytes_le();
    let mag = rug::Integer::from_digits(&bytes, Order::Lsf);
    if sign == Sign::Minus {
        -mag
    } else {
        mag
    }
}

pub(crate) fn rug_to_bigint(n: &rug::Integer) -> BigInt {
    let mut bytes = vec![0u8; n.significant_digits::<u8>()];
    n.write_digits(&mut bytes, Order::Lsf);
    let sign = match n.cmp0() {
        std::cmp::Ordering::Less => Sign::Minus,
        std::cmp::Ordering::Equal => Sign::NoSign,
        std::cmp::Ordering::Greater => Sign::Plus,
    };
    BigInt::from_bytes_le(sign, &bytes)
}

pub(crate) fn rational_to_rug(q: &BigRational) -> rug::Rational {
    rug::Rational::from((bigint_to_rug(q.numer()), bigint_to_rug(q.denom())))
}

/// Exact binary value of an MPFR float (finite values only).
pub fn float_to_rational(x: &rug::Float) -> Option<BigRational> {
    let r = x.to_rational()?;
    Some(BigRational::new(
        rug_to_bigint(r.numer()),
        rug_to_bigint(r.denom()),
    ))
}

fn render_float(x: &rug::Float) -> String {
    // Enough decimal digits to round-trip the binary value.
    let digits = (x.prec() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
    format!("{:.*}", digits, x)
}

impl Add for Mp {
    type Output = Mp;
    fn add(mut self, mut rhs: Mp) -> Mp {
        if self.prec() >= rhs.prec() {
            self.0 += &rhs.0;
            self
        } else {
            rhs.0 += &self.0;
            rhs
        }
    }
}

impl Sub for Mp {
    type Output = Mp;
    fn sub(mut self, rhs: Mp) -> Mp {
        if self.prec() >= rhs.prec() {
            self.0 -= &rhs.0;
            self
        } else {
            Mp(rug::Complex::with_val(rhs.prec(), &self.0 - &rhs.0))
        }
    }
}

impl Mul for Mp {
    type Output = Mp;
    fn mul(mut self, mut rhs: Mp) -> Mp {
        if self.prec() >= rhs.prec() {
            self.0 *= &rhs.0;
            self
        } else {
            rhs.0 *= &self.0;
            rhs
        }
    }
}

impl Div for Mp {
    type Output = Mp;
    fn div(mut self, rhs: Mp) -> Mp {
        if self.prec() >= rhs.prec() {
            self.0 /= &rhs.0;
            self
        } else {
            Mp(rug::Complex::with_val(rhs.prec(), &self.0 / &rhs.0))
        }
    }
}

impl Neg for Mp {
    type Output = Mp;
    fn neg(self) -> Mp {
        Mp(-self.0)
    }
}

impl Scalar for Mp {
    type Ctx = u32;

    fn zero(prec: u32) -> Self {
        Mp(rug::Complex::new(prec))
    }

    fn one(prec: u32) -> Self {
        Mp(rug::Complex::with_val(prec, 1))
    }

    fn from_parts(re: &BigRational, im: &BigRational, prec: u32) -> Self {
        let r = rug::Float::with_val(prec, &rational_to_rug(re));
        let i = rug::Float::with_val(prec, &rational_to_rug(im));
        Mp(rug::Complex::with_val(prec, (r, i)))
    }

    fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        Mp(rug::Complex::with_val(prec, (re, im)))
    }

    fn cos_sin(theta: &BigRational, prec: u32) -> Option<(Self, Self)> {
        let x = rug::Float::with_val(prec + 32, &rational_to_rug(theta));
        let (s, c) = x.sin_cos(rug::Float::new(prec + 32));
        Some((
            Mp(rug::Complex::with_val(prec, (c, 0))),
            Mp(rug::Complex::with_val(prec, (s, 0))),
        ))
    }

    fn ctx(&self) -> u32 {
        self.prec()
    }

    fn conj(&self) -> Self {
        Mp(self.0.clone().conj())
    }

    fn norm_sqr(&self) -> Self {
        let n = rug::Float::with_val(self.prec(), self.0.norm_ref());
        Mp(rug::Complex::with_val(self.prec(), (n, 0)))
    }

    fn is_zero(&self) -> bool {
        self.0.real().is_zero() && self.0.imag().is_zero()
    }

    fn abs_f64(&self) -> f64 {
        rug::Float::with_val(64, self.0.abs_ref()).to_f64()
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.0.real().to_f64(), self.0.imag().to_f64())
    }

    fn as_rational(&self) -> Option<BigRational> {
        None
    }

    fn render_re(&self) -> String {
        render_float(self.0.real())
    }

    fn render_im(&self) -> String {
        render_float(self.0.imag())
    }

    fn is_exact() -> bool {
        false
    }

    fn default_tol(prec: u32) -> f64 {
        (-(f64::from(prec) - 24.0)).exp2()
    }
}
