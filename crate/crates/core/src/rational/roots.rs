//! Real-root isolation by Sturm sequences and bisection, with root
//! separation bounds.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::poly::Poly;
use crate::ratio::{self, pow2_neg};

/// An open interval `(lo, hi)` holding exactly one real root of a
/// square-free polynomial, neither endpoint a root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RootInterval {
    #[serde(serialize_with = "ser_rational")]
    pub lo: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub hi: BigRational,
    /// The root itself when it is rational.
    #[serde(serialize_with = "ser_opt_rational")]
    pub exact: Option<BigRational>,
    /// Always true: isolation runs on the square-free part.
    pub multiplicity_free: bool,
}

fn ser_rational<Sr: serde::Serializer>(x: &BigRational, s: Sr) -> std::result::Result<Sr::Ok, Sr::Error> {
    s.serialize_str(&x.to_string())
}

fn ser_opt_rational<Sr: serde::Serializer>(x: &Option<BigRational>, s: Sr) -> std::result::Result<Sr::Ok, Sr::Error> {
    match x {
        Some(v) => s.serialize_some(&v.to_string()),
        None => s.serialize_none(),
    }
}

impl RootInterval {
    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / ratio::int(2)
    }

    /// The exact root if known, else the midpoint.
    pub fn approx(&self) -> BigRational {
        self.exact.clone().unwrap_or_else(|| self.midpoint())
    }

    /// Halves the interval once, keeping the root. `p` must be the
    /// square-free polynomial the interval was isolated for.
    pub fn bisect(&mut self, p: &Poly) {
        if self.exact.is_some() {
            // Shrink symmetrically around the known root.
            let r = self.exact.clone().expect("checked");
            // Pull both ends toward the root, avoiding other roots of `p`.
            for k in 2i64.. {
                let pull = |x: &BigRational| &r + (x - &r) / ratio::int(k);
                let (lo, hi) = (pull(&self.lo), pull(&self.hi));
                if !p.eval(&lo).is_zero() && !p.eval(&hi).is_zero() {
                    self.lo = lo;
                    self.hi = hi;
                    return;
                }
            }
        }
        let m = self.midpoint();
        let sm = p.sign_at(&m);
        if sm == Ordering::Equal {
            self.exact = Some(m.clone());
            let quarter = self.width() / ratio::int(4);
            self.lo = &m - &quarter;
            self.hi = &m + &quarter;
            return;
        }
        if sm == p.sign_at(&self.lo) {
            self.lo = m;
        } else {
            self.hi = m;
        }
    }

    /// Bisects until the width is at most `2^-bits`.
    pub fn refine_to(&mut self, p: &Poly, bits: u64) {
        let target = pow2_neg(bits);
        while self.width() > target {
            self.bisect(p);
        }
    }

    /// Bit `i` (1-based, after the binary point) of the root's fractional
    /// part. Refines until the width is at most `2^-(i+2)` and reads the
    /// midpoint, or reads the exact root when known.
    pub fn bit(&mut self, p: &Poly, i: u64) -> u8 {
        if let Some(r) = &self.exact {
            return ratio::frac_bit(r, i);
        }
        self.refine_to(p, i + 2);
        ratio::frac_bit(&self.midpoint(), i)
    }
}

/// Sturm sequence of a square-free polynomial.
pub fn sturm_chain(p: &Poly) -> Vec<Poly> {
    let mut chain = vec![p.clone(), p.derivative()];
    while !chain.last().expect("nonempty").is_zero() {
        let n = chain.len();
        let r = chain[n - 2].div_rem(&chain[n - 1]).1;
        if r.is_zero() {
            break;
        }
        chain.push(r.neg().primitive_signed());
    }
    chain.retain(|x| !x.is_zero());
    chain
}

impl Poly {
    /// Scales to integer coefficients by a positive factor (keeps signs).
    fn primitive_signed(&self) -> Poly {
        let pr = self.primitive();
        if self.lead().is_negative() {
            pr.neg()
        } else {
            pr
        }
    }
}

fn sign_changes(chain: &[Poly], x: &BigRational) -> usize {
    let signs: Vec<Ordering> = chain.iter().map(|p| p.sign_at(x)).filter(|s| *s != Ordering::Equal).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Number of distinct roots in `(a, b]`.
pub fn count_roots(chain: &[Poly], a: &BigRational, b: &BigRational) -> usize {
    sign_changes(chain, a).saturating_sub(sign_changes(chain, b))
}

/// For an interval whose width is below `1/(2·lc²)` with `lc` the leading
/// coefficient of an integer polynomial, the only rational that can be a
/// root inside is the simplest one.
fn rational_candidate(p: &Poly, lo: &BigRational, hi: &BigRational) -> Option<BigRational> {
    let c = ratio::simplest_between(lo, hi);
    p.eval(&c).is_zero().then_some(c)
}

fn exactness_bits(p: &Poly) -> u64 {
    // width < 1/lc² suffices; lc has `bits` bits so 2·bits + 1 is safe.
    2 * p.lead().abs().to_integer().bits() + 1
}

/// Every real root of `p` in the closed interval `[lo, hi]`, sorted, each
/// in an interval of width at most `2^-bits`. Rational roots are detected and
/// reported exactly. Works on the square-free part, so repeated roots are
/// listed once.
pub fn isolate_roots(p: &Poly, lo: &BigRational, hi: &BigRational, bits: u64) -> Result<Vec<RootInterval>> {
    if p.is_zero() {
        return Err(Error::InvalidInput("cannot isolate the roots of the zero polynomial".into()));
    }
    if lo >= hi {
        return Err(Error::InvalidInput(format!("empty interval [{lo}, {hi}]")));
    }
    let sqf = p.square_free();
    let mut exact: Vec<BigRational> = Vec::new();
    let mut rest = sqf.clone();
    let mut found: Vec<(BigRational, BigRational)>;
    // Deflate rational roots hit at endpoints or bisection points until a
    // clean pass succeeds.
    'outer: loop {
        found = Vec::new();
        if rest.degree().unwrap_or(0) == 0 {
            break;
        }
        for e in [lo, hi] {
            if rest.eval(e).is_zero() {
                exact.push(e.clone());
                rest = rest.div_rem(&Poly::linear_root(e)).0;
                continue 'outer;
            }
        }
        let chain = sturm_chain(&rest);
        let mut stack = vec![(lo.clone(), hi.clone())];
        while let Some((a, b)) = stack.pop() {
            let n = count_roots(&chain, &a, &b);
            if n == 0 {
                continue;
            }
            if n == 1 {
                found.push((a, b));
                continue;
            }
            let m = (&a + &b) / ratio::int(2);
            if rest.eval(&m).is_zero() {
                exact.push(m.clone());
                rest = rest.div_rem(&Poly::linear_root(&m)).0;
                continue 'outer;
            }
            stack.push((m.clone(), b));
            stack.push((a, m));
        }
        break;
    }

    let width = pow2_neg(bits);
    let exact_width = pow2_neg(exactness_bits(&sqf));
    let chain = sturm_chain(&sqf);
    let isolates = |iv: &RootInterval| {
        !sqf.eval(&iv.lo).is_zero() && !sqf.eval(&iv.hi).is_zero() && count_roots(&chain, &iv.lo, &iv.hi) == 1
    };
    let mut out = Vec::new();
    for (a, b) in found {
        let mut iv = RootInterval {
            lo: a,
            hi: b,
            exact: None,
            multiplicity_free: true,
        };
        while iv.exact.is_none() && iv.width() >= exact_width {
            iv.bisect(&rest);
        }
        if iv.exact.is_none() {
            iv.exact = rational_candidate(&rest, &iv.lo, &iv.hi);
        }
        iv.refine_to(&rest, bits);
        // A deflated root may share the interval.
        while !isolates(&iv) {
            iv.bisect(&rest);
        }
        out.push(iv);
    }
    // Rational roots found by deflation: shrink a neighbourhood until it
    // isolates.
    for r in exact {
        let mut d = width.clone() / ratio::int(2);
        loop {
            let (a, b) = (&r - &d, &r + &d);
            let iv = RootInterval {
                lo: a,
                hi: b,
                exact: Some(r.clone()),
                multiplicity_free: true,
            };
            if isolates(&iv) {
                out.push(iv);
                break;
            }
            d /= ratio::int(2);
        }
    }
    out.sort_by(|x, y| x.approx().cmp(&y.approx()));
    Ok(out)
}

/// All real roots, at `bits` of precision.
pub fn real_roots(p: &Poly, bits: u64) -> Result<Vec<RootInterval>> {
    let b = p.square_free().root_bound();
    isolate_roots(p, &-b.clone(), &b, bits)
}

/// Observed and guaranteed root separation.
#[derive(Clone, Debug, PartialEq)]
pub struct Separation {
    /// Lower bound on the smallest gap between consecutive real roots
    /// (exact when both roots are rational); `None` with fewer than two.
    pub observed: Option<BigRational>,
    /// `sqrt(3) · d^(−(d+2)/2) · ‖P‖₂^(−(d−1))` for the square-free integer
    /// part, rounded down to a rational; `None` when `d < 2`.
    pub bound: Option<BigRational>,
}

/// Rational lower bound of `sqrt(x)` with about 40 significant bits.
pub fn sqrt_lower(x: &BigRational) -> BigRational {
    if !x.is_positive() {
        return BigRational::zero();
    }
    let ab = x.numer() * x.denom();
    let need = 80i64 - ab.bits() as i64;
    let k = if need > 0 { (need as u64).div_ceil(2) } else { 0 };
    let scaled = ab << (2 * k);
    let root = ratio::isqrt(&scaled);
    BigRational::new(root, x.denom() * (BigInt::one() << k))
}

/// The Mahler-type separation bound for a polynomial, computed on its
/// square-free primitive part.
pub fn mahler_bound(p: &Poly) -> Option<BigRational> {
    let sqf = p.square_free();
    let d = sqf.degree()?;
    if d < 2 {
        return None;
    }
    let dd = BigInt::from(d as u64);
    let n2 = sqf.norm2_sq();
    // sep² ≥ 3 / (d^(d+2) · ‖P‖₂^(2(d−1))).
    let den = BigRational::from_integer(num_traits::pow(dd, d + 2)) * num_traits::pow(n2, d - 1);
    Some(sqrt_lower(&(ratio::int(3) / den)))
}

fn gap(a: &RootInterval, b: &RootInterval) -> BigRational {
    match (&a.exact, &b.exact) {
        (Some(x), Some(y)) => y - x,
        (Some(x), None) => &b.lo - x,
        (None, Some(y)) => y - &a.hi,
        (None, None) => &b.lo - &a.hi,
    }
}

pub fn min_separation(p: &Poly) -> Result<Separation> {
    if p.is_zero() {
        return Err(Error::InvalidInput("zero polynomial".into()));
    }
    let bound = mahler_bound(p);
    let sqf = p.square_free();
    let mut bits = 64;
    loop {
        let roots = real_roots(p, bits)?;
        let observed = roots.windows(2).map(|w| gap(&w[0], &w[1])).min();
        let ok = match (&observed, &bound) {
            (Some(o), Some(b)) => o >= b,
            _ => true,
        };
        if ok {
            return Ok(Separation { observed, bound });
        }
        if bits > 4096 {
            return Err(Error::Invariant(format!(
                "observed separation below the guaranteed bound for {sqf}"
            )));
        }
        bits *= 2;
    }
}
