//! Univariate polynomials in `z` over the integers or Gaussian integers, with
//! the exact division needed by fraction-free elimination.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Coefficient ring: an integral domain with exact division.
pub trait Ring:
    Clone + PartialEq + std::fmt::Debug + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    /// `self / d`, which must be exact.
    fn div_exact(&self, d: &Self) -> Self;
    /// Rough size, used only for pivot preference.
    fn bits(&self) -> u64;
}

impl Ring for BigInt {
    fn div_exact(&self, d: &Self) -> Self {
        let (q, r) = Integer::div_rem(self, d);
        debug_assert!(r.is_zero(), "inexact integer division");
        q
    }

    fn bits(&self) -> u64 {
        self.abs().bits()
    }
}

impl Ring for Complex<BigInt> {
    fn div_exact(&self, d: &Self) -> Self {
        let n = self * d.conj();
        let den = &d.re * &d.re + &d.im * &d.im;
        Complex::new(n.re.div_exact(&den), n.im.div_exact(&den))
    }

    fn bits(&self) -> u64 {
        self.re.abs().bits().max(self.im.abs().bits())
    }
}

/// Coefficients in ascending order, no trailing zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct ZPoly<R: Ring> {
    c: Vec<R>,
}

impl<R: Ring> ZPoly<R> {
    pub fn zero() -> Self {
        ZPoly { c: Vec::new() }
    }

    pub fn new(mut c: Vec<R>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        ZPoly { c }
    }

    pub fn constant(a: R) -> Self {
        Self::new(vec![a])
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn coeff(&self, k: usize) -> R {
        self.c.get(k).cloned().unwrap_or_else(R::zero)
    }

    pub fn coeffs(&self) -> &[R] {
        &self.c
    }

    /// Index of the lowest nonzero coefficient.
    pub fn low_order(&self) -> Option<usize> {
        self.c.iter().position(|x| !x.is_zero())
    }

    pub fn bits(&self) -> u64 {
        self.c.iter().map(Ring::bits).max().unwrap_or(0)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        Self::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        Self::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![R::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let cur = std::mem::replace(&mut out[i + j], R::zero());
                out[i + j] = cur + a.clone() * b.clone();
            }
        }
        Self::new(out)
    }

    /// `self / d`, exact by assumption (checked in debug builds).
    pub fn div_exact(&self, d: &Self) -> Self {
        assert!(!d.is_zero(), "division by the zero polynomial");
        if self.is_zero() {
            return Self::zero();
        }
        if d.c.len() == 1 {
            return Self::new(self.c.iter().map(|x| x.div_exact(&d.c[0])).collect());
        }
        let mut rem = self.c.clone();
        let dl = d.c.len();
        let lead = d.c[dl - 1].clone();
        assert!(rem.len() >= dl, "inexact polynomial division");
        let mut quot = vec![R::zero(); rem.len() - dl + 1];
        for k in (0..quot.len()).rev() {
            let top = rem[k + dl - 1].clone();
            if top.is_zero() {
                continue;
            }
            let qk = top.div_exact(&lead);
            for (j, dj) in d.c.iter().enumerate() {
                if !dj.is_zero() {
                    let cur = std::mem::replace(&mut rem[k + j], R::zero());
                    rem[k + j] = cur - qk.clone() * dj.clone();
                }
            }
            quot[k] = qk;
        }
        debug_assert!(rem.iter().all(Zero::is_zero), "inexact polynomial division");
        Self::new(quot)
    }
}

/// Fraction-free Gauss-Jordan elimination (Bareiss) on an `n × (n + m)`
/// augmented matrix over `R[z]`. On return the left block is `d·I` with
/// `d = ±det` and the right block is `d·A⁻¹·RHS`. Returns `d`, or `None` if
/// the matrix is singular over `R(z)`.
pub fn bareiss_jordan<R: Ring>(a: &mut [Vec<ZPoly<R>>]) -> Option<ZPoly<R>> {
    let n = a.len();
    let width = a.first().map_or(0, Vec::len);
    let mut prev = ZPoly::constant(R::one());
    for k in 0..n {
        // Lowest degree, then smallest coefficients.
        let piv = (k..n)
            .filter(|&i| !a[i][k].is_zero())
            .min_by_key(|&i| (a[i][k].degree(), a[i][k].bits()))?;
        a.swap(k, piv);
        let pk = a[k][k].clone();
        for i in 0..n {
            if i == k {
                continue;
            }
            let f = a[i][k].clone();
            for j in 0..width {
                if j == k {
                    continue;
                }
                let keep = &a[i][j];
                if f.is_zero() && keep.is_zero() {
                    continue;
                }
                let v = if f.is_zero() || a[k][j].is_zero() {
                    pk.mul(keep)
                } else {
                    pk.mul(keep).sub(&f.mul(&a[k][j]))
                };
                a[i][j] = v.div_exact(&prev);
            }
            a[i][k] = ZPoly::zero();
        }
        prev = pk;
    }
    Some(prev)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> ZPoly<BigInt> {
        ZPoly::new(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    #[test]
    fn exact_division() {
        let a = p(&[1, 2, 1]);
        let b = p(&[1, 1]);
        assert_eq!(a.div_exact(&b), b);
        assert_eq!(p(&[0, 0, 6]).div_exact(&p(&[0, 3])), p(&[0, 2]));
    }

    #[test]
    fn bareiss_solves_integer_system() {
        // [[2, 1], [1, 3]] x = [3, 5]  ->  x = [4/5, 7/5], det = 5.
        let mut a = vec![vec![p(&[2]), p(&[1]), p(&[3])], vec![p(&[1]), p(&[3]), p(&[5])]];
        let d = bareiss_jordan(&mut a).unwrap();
        // Row exchanges may flip the sign of the determinant.
        let s = if d == p(&[5]) { 1 } else { -1 };
        assert_eq!(d, p(&[5 * s]));
        assert_eq!(a[0][0], d);
        assert_eq!(a[1][1], d);
        assert_eq!(a[0][2], p(&[4 * s]));
        assert_eq!(a[1][2], p(&[7 * s]));
    }

    #[test]
    fn bareiss_with_polynomials() {
        // M(z) = z·I (2x2): det z², solution of M x = e1 is e1/z.
        let mut a = vec![vec![p(&[0, 1]), p(&[]), p(&[1])], vec![p(&[]), p(&[0, 1]), p(&[])]];
        let d = bareiss_jordan(&mut a).unwrap();
        assert_eq!(d, p(&[0, 0, 1]));
        assert_eq!(a[0][2], p(&[0, 1]));
    }

    #[test]
    fn gaussian_division() {
        let a = Complex::new(BigInt::from(3), BigInt::from(4));
        let b = Complex::new(BigInt::from(1), BigInt::from(2));
        let prod = a.clone() * b.clone();
        assert_eq!(prod.div_exact(&b), a);
    }

    #[test]
    fn singular_system_detected() {
        let mut a = vec![vec![p(&[1]), p(&[2]), p(&[1])], vec![p(&[2]), p(&[4]), p(&[1])]];
        assert!(bareiss_jordan(&mut a).is_none());
    }
}
