//! Helpers for arbitrary-precision rationals: parsing, dyadic rounding and
//! the "simplest rational in an interval" search.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// `n/d` as a reduced big rational.
pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `2^-k`.
pub fn pow2_neg(k: u64) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << k)
}

/// Parses `"3/10"`, `"7"`, `"-0.25"` or `"1e-4"` exactly.
pub fn parse(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::InvalidInput(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{whole}{frac}0").parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32 - 1;
    let ten = BigInt::from(10);
    let mut v = BigRational::from_integer(digits);
    if scale >= 0 {
        v *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        v /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -v } else { v })
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `floor(x·2^h)/2^h`.
pub fn trunc_bits(x: &BigRational, h: u64) -> BigRational {
    let scale = BigInt::one() << h;
    let n = (x * BigRational::from_integer(scale.clone())).floor().to_integer();
    BigRational::new(n, scale)
}

/// `ceil(x·2^h)/2^h`.
pub fn ceil_bits(x: &BigRational, h: u64) -> BigRational {
    let scale = BigInt::one() << h;
    let n = (x * BigRational::from_integer(scale.clone())).ceil().to_integer();
    BigRational::new(n, scale)
}

/// Smallest `b >= 0` with `2^-b <= x`, for `x > 0`.
pub fn bits_below(x: &BigRational) -> u64 {
    assert!(x.is_positive(), "bits_below needs a positive argument");
    // Start from a bit-length estimate and correct by at most a few steps.
    let est = x.denom().bits() as i64 - x.numer().bits() as i64;
    let mut b = est.max(0) as u64;
    while b > 0 && pow2_neg(b - 1) <= *x {
        b -= 1;
    }
    while pow2_neg(b) > *x {
        b += 1;
    }
    b
}

/// Number of fractional binary digits of a dyadic rational, `None` otherwise.
pub fn dyadic_bits(x: &BigRational) -> Option<u64> {
    let d = x.denom();
    if d.is_zero() {
        return None;
    }
    let tz = d.trailing_zeros().unwrap_or(0);
    if (d >> tz) == BigInt::one() {
        Some(tz)
    } else {
        None
    }
}

/// The `i`-th binary digit after the point (1-based) of `x` in `[0, 1)`.
pub fn frac_bit(x: &BigRational, i: u64) -> u8 {
    let scaled = (x * BigRational::from_integer(BigInt::one() << i))
        .floor()
        .to_integer();
    if scaled.is_odd() {
        1
    } else {
        0
    }
}

/// The rational with the smallest denominator in the closed interval
/// `[lo, hi]` (Stern-Brocot descent via continued fractions).
pub fn simplest_between(lo: &BigRational, hi: &BigRational) -> BigRational {
    assert!(lo <= hi);
    if lo.is_negative() && hi.is_positive() || lo.is_zero() || hi.is_zero() {
        return BigRational::zero();
    }
    if hi.is_negative() {
        return -simplest_between(&-hi, &-lo);
    }
    let fl = lo.floor();
    if fl == *lo {
        return fl;
    }
    if fl < hi.floor() || hi.is_integer() {
        return fl + BigRational::one();
    }
    // Both in (n, n+1): recurse on the reciprocals of the fractional parts.
    let a = lo - &fl;
    let b = hi - &fl;
    let inner = simplest_between(&b.recip(), &a.recip());
    fl + inner.recip()
}

/// `floor(sqrt(n))` for `n >= 0`.
pub fn isqrt(n: &BigInt) -> BigInt {
    assert!(n.sign() != Sign::Minus);
    n.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_all_accepted_spellings() {
        assert_eq!(parse("3/10").unwrap(), q(3, 10));
        assert_eq!(parse("0.6").unwrap(), q(3, 5));
        assert_eq!(parse("-0.25").unwrap(), q(-1, 4));
        assert_eq!(parse("1e-4").unwrap(), q(1, 10_000));
        assert_eq!(parse("2.5E1").unwrap(), int(25));
        assert_eq!(parse(" 7 ").unwrap(), int(7));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
        assert!(parse(".").is_err());
    }

    #[test]
    fn dyadic_rounding() {
        assert_eq!(trunc_bits(&q(2, 5), 3), q(3, 8));
        assert_eq!(ceil_bits(&q(2, 5), 3), q(1, 2));
        assert_eq!(dyadic_bits(&q(5, 8)), Some(3));
        assert_eq!(dyadic_bits(&q(1, 3)), None);
        assert_eq!(dyadic_bits(&int(3)), Some(0));
        assert_eq!(frac_bit(&q(5, 8), 1), 1);
        assert_eq!(frac_bit(&q(5, 8), 2), 0);
        assert_eq!(frac_bit(&q(5, 8), 3), 1);
        assert_eq!(frac_bit(&q(5, 8), 4), 0);
    }

    #[test]
    fn bits_below_brackets() {
        assert_eq!(bits_below(&int(1)), 0);
        assert_eq!(bits_below(&q(1, 2)), 1);
        assert_eq!(bits_below(&q(3, 8)), 2);
        assert_eq!(bits_below(&q(1, 1000)), 10);
        assert_eq!(bits_below(&int(5)), 0);
    }

    #[test]
    fn simplest_rationals() {
        assert_eq!(simplest_between(&q(3, 10), &q(9, 20)), q(1, 3));
        assert_eq!(simplest_between(&q(1, 4), &q(1, 4)), q(1, 4));
        assert_eq!(simplest_between(&q(-1, 3), &q(1, 2)), int(0));
        assert_eq!(simplest_between(&q(-9, 20), &q(-3, 10)), q(-1, 3));
        assert_eq!(simplest_between(&q(21, 10), &q(29, 10)), q(5, 2));
    }

    proptest! {
        #[test]
        fn simplest_is_inside_and_minimal(a in 1i64..200, b in 1i64..200, c in 1i64..200, d in 1i64..200) {
            let (x, y) = (q(a, b), q(c, d));
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            let s = simplest_between(&lo, &hi);
            prop_assert!(lo <= s && s <= hi);
            // No rational with a smaller denominator fits.
            let den = s.denom().to_i64().unwrap();
            for e in 1..den {
                let n = (lo.clone() * int(e)).ceil();
                prop_assert!(n > hi.clone() * int(e));
            }
        }

        #[test]
        fn decimal_round_trip(n in -1_000_000i64..1_000_000, k in 0u32..6) {
            let s = format!("{}e-{}", n, k);
            prop_assert_eq!(parse(&s).unwrap(), q(n, 10i64.pow(k)));
        }
    }
}
