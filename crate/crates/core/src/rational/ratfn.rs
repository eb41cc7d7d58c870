//! Rational functions `Q/R` and the fit of a limiting acceptance curve.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::automaton::CoinAutomaton;
use crate::error::{Error, Result};
use crate::fixed_point::limiting_accept;
use crate::linalg::Matrix;
use crate::rational::poly::Poly;
use crate::ratio::{self, q};
use crate::scalar::{Exact, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFunction {
    pub num: Poly,
    pub den: Poly,
    pub reduced: bool,
}

impl RationalFunction {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        Ok(RationalFunction { num, den, reduced: false })
    }

    pub fn constant(c: BigRational) -> Self {
        RationalFunction {
            num: Poly::constant(c),
            den: Poly::one(),
            reduced: true,
        }
    }

    /// Cancels the gcd and makes the denominator monic.
    pub fn reduce(&self) -> Self {
        let g = self.num.gcd(&self.den);
        let g = if g.is_zero() { Poly::one() } else { g };
        let mut num = self.num.div_rem(&g).0;
        let mut den = self.den.div_rem(&g).0;
        if num.is_zero() {
            den = Poly::one();
        }
        let lead = den.lead().recip();
        num = num.scale(&lead);
        den = den.scale(&lead);
        RationalFunction { num, den, reduced: true }
    }

    /// `None` at poles.
    pub fn eval(&self, x: &BigRational) -> Option<BigRational> {
        let d = self.den.eval(x);
        (!d.is_zero()).then(|| self.num.eval(x) / d)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.num.eval_f64(x) / self.den.eval_f64(x)
    }

    pub fn degree(&self) -> usize {
        self.num.degree().unwrap_or(0).max(self.den.degree().unwrap_or(0))
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

/// Sample points `i/(2D+4)`, `i = 1..=2D+3`, optionally nudged off the grid.
fn sample_points(max_degree: usize, nudge: &BigRational) -> Vec<BigRational> {
    let n = 2 * max_degree + 3;
    let den = (2 * max_degree + 4) as i64;
    (1..=n as i64).map(|i| q(i, den) + nudge * q(i % 3 - 1, 1)).collect()
}

/// Points used only for validation.
pub fn validation_points() -> Vec<BigRational> {
    (1..=20).map(|k| q(k, 21) + q(1, 997)).collect()
}

/// Lowest-degree `Q/R` with `deg Q, deg R ≤ d` that matches every sample.
fn fit_points(xs: &[BigRational], ys: &[BigRational], max_degree: usize) -> Option<RationalFunction> {
    let pow = |x: &BigRational, k: usize| num_traits::pow(x.clone(), k);
    for d in 0..=max_degree {
        let rows = (2 * d + 1).min(xs.len());
        let m = Matrix::<Exact>::from_fn(rows, 2 * d + 2, (), |i, j| {
            let v = if j <= d { pow(&xs[i], j) } else { -(&ys[i] * pow(&xs[i], j - d - 1)) };
            Exact::from_real(&v, ())
        });
        for v in m.nullspace(0.0) {
            let coef = |range: std::ops::Range<usize>| Poly::new(range.map(|j| v[j].re.clone()).collect());
            let num = coef(0..d + 1);
            let den = coef(d + 1..2 * d + 2);
            if den.is_zero() {
                continue;
            }
            let f = RationalFunction { num, den, reduced: false }.reduce();
            if xs.iter().zip(ys).all(|(x, y)| f.eval(x).as_ref() == Some(y)) {
                return Some(f);
            }
        }
    }
    None
}

/// Fits a rational function of degree at most `max_degree` to `f` on
/// `(0, 1)` and validates it on fresh points.
pub fn fit_values(f: impl Fn(&BigRational) -> Result<BigRational>, max_degree: usize) -> Result<RationalFunction> {
    let nudges = [BigRational::zero(), q(1, 7919 * (2 * max_degree as i64 + 4))];
    let mut last = String::new();
    for nudge in &nudges {
        let xs = sample_points(max_degree, nudge);
        let ys = xs.iter().map(&f).collect::<Result<Vec<_>>>()?;
        let Some(fit) = fit_points(&xs, &ys, max_degree) else {
            last = format!("no rational function of degree ≤ {max_degree} fits {} samples", xs.len());
            continue;
        };
        for x in validation_points() {
            let want = f(&x)?;
            if fit.eval(&x).as_ref() != Some(&want) {
                return Err(Error::Fit(format!("fit {fit} disagrees with the sampled value {want} at p = {x}")));
            }
        }
        return Ok(fit);
    }
    Err(Error::Fit(last))
}

/// `a(p) = Q(p)/R(p)` for an exact automaton. The default degree cap is `S²`.
pub fn fit_rational(m: &CoinAutomaton<Exact>, max_degree: Option<usize>) -> Result<RationalFunction> {
    let d = max_degree.unwrap_or(m.dim() * m.dim());
    fit_values(
        |p| {
            limiting_accept(m, p)?
                .as_rational()
                .ok_or_else(|| Error::Fit("acceptance has an imaginary part".into()))
        },
        d,
    )
}

/// `U = (5Q − 3R)(5Q − 2R)` and `V = 25R²`, each scaled to primitive integer
/// coefficients, so that `U/V ∝ (a − 3/5)(a − 2/5)`.
pub fn threshold_poly(a: &RationalFunction) -> (Poly, Poly) {
    let five = ratio::int(5);
    let u1 = a.num.scale(&five).sub(&a.den.scale(&ratio::int(3)));
    let u2 = a.num.scale(&five).sub(&a.den.scale(&ratio::int(2)));
    let u = u1.mul(&u2).primitive();
    let v = a.den.mul(&a.den).scale(&ratio::int(25)).primitive();
    (u, v)
}

/// Poles of a reduced function in the open unit interval.
pub fn interior_poles(a: &RationalFunction) -> Result<usize> {
    if a.den.degree().unwrap_or(0) == 0 {
        return Ok(0);
    }
    let roots = crate::rational::roots::isolate_roots(&a.den, &BigRational::zero(), &BigRational::one(), 16)?;
    Ok(roots
        .iter()
        .filter(|r| r.exact.as_ref().is_none_or(|x| x.numer() != &num_bigint::BigInt::zero() && !x.is_one()))
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{first_heads, hc_walk, hc_walk_accept, single_flip, zero_vs_eps, zero_vs_eps_accept};
    use crate::rational::roots::isolate_roots;
    use num_traits::Signed;

    #[test]
    fn single_flip_is_identity() {
        let f = fit_rational(&single_flip(()).unwrap(), None).unwrap();
        assert_eq!(f.num, Poly::x());
        assert_eq!(f.den, Poly::one());
        assert!(f.reduced);
    }

    #[test]
    fn first_heads_is_one() {
        let f = fit_rational(&first_heads(()).unwrap(), None).unwrap();
        assert_eq!(f, RationalFunction::constant(q(1, 1)));
    }

    #[test]
    fn hc_walk_matches_gamblers_ruin() {
        let m = hc_walk::<Exact>(&q(1, 2), &q(1, 10), 2, ()).unwrap();
        let f = fit_rational(&m, None).unwrap();
        // q²(1−p)² / (q²(1−p)² + (1−q)²p²) at p = 1/2, denominators cleared:
        // 4·Q·(2q² − 2q + 1)/4 = R·q².
        let want_num = Poly::from_ints(&[0, 0, 1]);
        let want_den = Poly::from_ints(&[1, -2, 2]);
        assert!(f.num.mul(&want_den).sub(&f.den.mul(&want_num)).is_zero());
        assert!(f.degree() <= m.dim() * m.dim());
        for k in 1..10 {
            let x = q(k, 10);
            assert_eq!(f.eval(&x), Some(hc_walk_accept(&q(1, 2), 2, &x)));
        }
        assert_eq!(interior_poles(&f).unwrap(), 0);
    }

    #[test]
    fn zero_vs_eps_fit() {
        let eps = q(1, 10);
        let f = fit_rational(&zero_vs_eps(&eps, ()).unwrap(), None).unwrap();
        for x in validation_points() {
            assert_eq!(f.eval(&x), Some(zero_vs_eps_accept(&eps, &x)));
        }
    }

    #[test]
    fn bad_fit_is_reported() {
        // |p − 1/2| is not rational on (0, 1).
        let e = fit_values(|p| Ok((p - q(1, 2)).abs()), 3).unwrap_err();
        assert!(matches!(e, Error::Fit(_)));
    }

    #[test]
    fn threshold_roots_of_identity() {
        let (u, v) = threshold_poly(&RationalFunction::constant(q(1, 1)).reduce());
        assert!(isolate_roots(&u, &q(0, 1), &q(1, 1), 32).unwrap().is_empty());
        assert_eq!(v, Poly::one());
        let id = RationalFunction::new(Poly::x(), Poly::one()).unwrap().reduce();
        let (u, _) = threshold_poly(&id);
        let r: Vec<_> = isolate_roots(&u, &q(0, 1), &q(1, 1), 32).unwrap().into_iter().map(|x| x.exact.unwrap()).collect();
        assert_eq!(r, vec![q(2, 5), q(3, 5)]);
        assert_eq!(u, Poly::from_ints(&[6, -25, 25]));
    }

    /// Sign-change bisection on `(a − 3/5)(a − 2/5)` straight from the
    /// closed-form walk acceptance.
    #[test]
    fn threshold_roots_match_sign_bisection() {
        let p = q(1, 2);
        let m = hc_walk::<Exact>(&p, &q(1, 10), 2, ()).unwrap();
        let (u, _) = threshold_poly(&fit_rational(&m, None).unwrap());
        let roots = isolate_roots(&u, &q(0, 1), &q(1, 1), 60).unwrap();
        let g = |x: f64| {
            let a = ratio::to_f64(&hc_walk_accept(&p, 2, &BigRational::from_float(x).unwrap()));
            (a - 0.6) * (a - 0.4)
        };
        let mut oracle = Vec::new();
        let n = 10_000;
        for i in 0..n {
            let (mut lo, mut hi) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
            if g(lo) * g(hi) < 0.0 {
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if g(lo) * g(mid) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                oracle.push(0.5 * (lo + hi));
            }
        }
        assert_eq!(roots.len(), oracle.len());
        for (r, o) in roots.iter().zip(&oracle) {
            assert!((ratio::to_f64(&r.approx()) - o).abs() < 1e-12);
        }
    }
}
