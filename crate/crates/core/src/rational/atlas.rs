//! Transition atlases and counting advice.
//!
//! The atlas of a family of automata lists every bias in `[0, 1)` at which
//! some member's limiting acceptance crosses 2/5 or 3/5, plus 0. Given a
//! target bias `p*`, the advice is the count `w` of atlas values `≤ p*`;
//! from `w` alone one recovers a dyadic bias `r` just above the `w`-th value
//! that no member can tell apart from `p*` across the thresholds.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::automaton::CoinAutomaton;
use crate::error::{Error, Result};
use crate::rational::poly::Poly;
use crate::rational::ratfn::{fit_rational, threshold_poly, RationalFunction};
use crate::rational::roots::{isolate_roots, mahler_bound, RootInterval};
use crate::ratio::{self, bits_below, pow2_neg, trunc_bits};
use crate::scalar::Exact;

/// Bits to which atlas values are isolated initially.
const ATLAS_BITS: u64 = 64;

/// A real algebraic number in `[0, 1)`: a root of a square-free integer
/// polynomial inside an isolating interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraicValue {
    pub poly: Poly,
    pub interval: RootInterval,
}

impl AlgebraicValue {
    pub fn rational(r: BigRational) -> Self {
        let d = pow2_neg(ATLAS_BITS + 1);
        AlgebraicValue {
            poly: Poly::linear_root(&r).primitive(),
            interval: RootInterval {
                lo: &r - &d,
                hi: &r + &d,
                exact: Some(r),
                multiplicity_free: true,
            },
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        self.interval.exact.as_ref()
    }

    pub fn refine(&mut self, bits: u64) {
        self.interval.refine_to(&self.poly, bits);
    }

    /// Compares with a rational, refining as needed.
    pub fn cmp_rational(&mut self, x: &BigRational) -> Ordering {
        loop {
            if let Some(r) = self.exact() {
                return r.cmp(x);
            }
            if self.poly.eval(x).is_zero() {
                // `x` is a root of the polynomial; it is ours iff it lies in
                // the isolating interval.
                if self.interval.lo < *x && *x < self.interval.hi {
                    self.interval.exact = Some(x.clone());
                    continue;
                }
            }
            if *x <= self.interval.lo {
                return Ordering::Greater;
            }
            if *x >= self.interval.hi {
                return Ordering::Less;
            }
            self.interval.bisect(&self.poly);
        }
    }

    /// `floor(value · 2^h)`.
    pub fn floor_bits(&mut self, h: u64) -> BigInt {
        let scale = BigRational::from_integer(BigInt::one() << h);
        loop {
            if let Some(r) = self.exact() {
                return (r * &scale).floor().to_integer();
            }
            let lo = (&self.interval.lo * &scale).floor().to_integer();
            let hi = (&self.interval.hi * &scale).floor().to_integer();
            if lo == hi {
                return lo;
            }
            self.interval.bisect(&self.poly);
        }
    }

    fn same_value(&self, other: &Self) -> bool {
        if let (Some(a), Some(b)) = (self.exact(), other.exact()) {
            return a == b;
        }
        let lo = (&self.interval.lo).max(&other.interval.lo).clone();
        let hi = (&self.interval.hi).min(&other.interval.hi).clone();
        if lo >= hi {
            return false;
        }
        let g = self.poly.gcd(&other.poly);
        if g.degree().unwrap_or(0) == 0 {
            return false;
        }
        // Each interval holds exactly one root of its own polynomial, so a
        // common root inside both is that root.
        isolate_roots(&g, &lo, &hi, 8).is_ok_and(|r| !r.is_empty())
    }

    /// Orders two values, refining until their intervals separate.
    pub fn compare(&mut self, other: &mut Self) -> Ordering {
        if let (Some(a), Some(b)) = (self.exact(), other.exact()) {
            return a.cmp(b);
        }
        if let Some(b) = other.exact().cloned() {
            return self.cmp_rational(&b);
        }
        if let Some(a) = self.exact().cloned() {
            return other.cmp_rational(&a).reverse();
        }
        if self.same_value(other) {
            return Ordering::Equal;
        }
        loop {
            if self.interval.hi <= other.interval.lo {
                return Ordering::Less;
            }
            if other.interval.hi <= self.interval.lo {
                return Ordering::Greater;
            }
            self.interval.bisect(&self.poly);
            other.interval.bisect(&other.poly);
        }
    }

    pub fn to_f64(&self) -> f64 {
        ratio::to_f64(&self.interval.approx())
    }

    /// `"num/den"` when rational, else 20 decimal digits (truncated).
    pub fn render(&self) -> String {
        if let Some(r) = self.exact() {
            return r.to_string();
        }
        let mut v = self.clone();
        let digits = 20u32;
        let scale = num_traits::pow(BigInt::from(10), digits as usize);
        // The interval must sit inside one decimal cell at this scale.
        loop {
            let lo = (&v.interval.lo * BigRational::from_integer(scale.clone())).floor().to_integer();
            let hi = (&v.interval.hi * BigRational::from_integer(scale.clone())).floor().to_integer();
            if lo == hi {
                let s = lo.to_string();
                return format!("0.{}{}", "0".repeat(digits as usize - s.len()), s);
            }
            v.interval.bisect(&v.poly);
            if let Some(r) = v.exact() {
                return r.to_string();
            }
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "poly": self.poly.to_strings(),
            "lo": self.interval.lo.to_string(),
            "hi": self.interval.hi.to_string(),
            "exact": self.exact().map(ToString::to_string),
            "approx": self.to_f64(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionAtlas {
    pub family: Vec<(String, RationalFunction)>,
    /// Sorted, distinct, starting with 0.
    pub values: Vec<AlgebraicValue>,
    /// Rigorous lower bound on the smallest gap between consecutive values
    /// and between the last value and 1.
    pub separation: BigRational,
}

fn gap_lower(a: &AlgebraicValue, b: &AlgebraicValue) -> BigRational {
    let left = a.exact().cloned().unwrap_or_else(|| a.interval.hi.clone());
    let right = b.exact().cloned().unwrap_or_else(|| b.interval.lo.clone());
    right - left
}

fn separation_of(values: &[AlgebraicValue]) -> BigRational {
    let last = values.last().expect("0 is always present");
    let to_one = BigRational::one() - last.exact().cloned().unwrap_or_else(|| last.interval.hi.clone());
    values
        .windows(2)
        .map(|w| gap_lower(&w[0], &w[1]))
        .fold(to_one, |acc, g| acc.min(g))
}

/// Builds the atlas from already-fitted acceptance functions.
pub fn atlas_from_functions(family: Vec<(String, RationalFunction)>) -> Result<TransitionAtlas> {
    let mut values = vec![AlgebraicValue::rational(BigRational::zero())];
    let mut product = Poly::from_ints(&[0, 1, -1]);
    for (_, f) in &family {
        let (u, _) = threshold_poly(f);
        if u.degree().unwrap_or(0) == 0 {
            continue;
        }
        product = product.mul(&u);
        let sqf = u.square_free();
        for iv in isolate_roots(&u, &BigRational::zero(), &BigRational::one(), ATLAS_BITS)? {
            // Irrational roots cannot sit on 0 or 1.
            if iv.exact.as_ref().is_some_and(|r| !r.is_positive() || *r >= BigRational::one()) {
                continue;
            }
            let mut cand = AlgebraicValue {
                poly: match &iv.exact {
                    Some(r) => Poly::linear_root(r).primitive(),
                    None => sqf.clone(),
                },
                interval: iv,
            };
            // Insert in order, dropping duplicates.
            let mut pos = values.len();
            let mut dup = false;
            for (k, v) in values.iter_mut().enumerate() {
                match cand.compare(v) {
                    Ordering::Equal => {
                        dup = true;
                        break;
                    }
                    Ordering::Less => {
                        pos = k;
                        break;
                    }
                    Ordering::Greater => {}
                }
            }
            if !dup {
                values.insert(pos, cand);
            }
        }
    }
    let mut separation = separation_of(&values);
    let bound = mahler_bound(&product);
    let mut bits = ATLAS_BITS;
    while !separation.is_positive() || bound.as_ref().is_some_and(|b| separation < *b) {
        if bits > 4096 {
            return Err(Error::Invariant("atlas separation below the guaranteed bound".into()));
        }
        bits *= 2;
        for v in &mut values {
            v.refine(bits);
        }
        separation = separation_of(&values);
    }
    Ok(TransitionAtlas {
        family,
        values,
        separation,
    })
}

/// Fits every member and collects the threshold crossings.
pub fn build_atlas(family: &[(String, CoinAutomaton<Exact>)]) -> Result<TransitionAtlas> {
    let fitted = family
        .iter()
        .map(|(label, m)| {
            fit_rational(m, None)
                .map(|f| (label.clone(), f))
                .map_err(|e| Error::Fit(format!("{label}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    atlas_from_functions(fitted)
}

impl TransitionAtlas {
    pub fn to_json(&self) -> Value {
        json!({
            "family": self.family.iter().map(|(l, f)| json!({
                "label": l,
                "num": f.num.to_strings(),
                "den": f.den.to_strings(),
            })).collect::<Vec<_>>(),
            "potential_values": self.values.iter().map(AlgebraicValue::render).collect::<Vec<_>>(),
            "potential_value_details": self.values.iter().map(AlgebraicValue::to_json).collect::<Vec<_>>(),
            "separation": self.separation.to_string(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdviceRecord {
    pub p_star: BigRational,
    /// Number of atlas values `≤ p*`.
    pub w: usize,
    pub p0: AlgebraicValue,
    /// Dyadic with `h` bits.
    pub r: BigRational,
    pub h: u64,
    /// `r − p₀` when `p₀` is rational; the nominal quarter-separation offset
    /// otherwise.
    pub epsilon_used: BigRational,
}

impl AdviceRecord {
    pub fn to_json(&self) -> Value {
        json!({
            "p_star": self.p_star.to_string(),
            "w": self.w,
            "p0": self.p0.to_json(),
            "r": self.r.to_string(),
            "r_approx": ratio::to_f64(&self.r),
            "h": self.h,
            "epsilon_used": self.epsilon_used.to_string(),
        })
    }
}

/// `(h, eps)`: the expansion length and the truncated quarter separation.
fn advice_offsets(atlas: &TransitionAtlas) -> (u64, BigRational) {
    let h = bits_below(&atlas.separation) + 8;
    let eps = trunc_bits(&(&atlas.separation / ratio::int(4)), h);
    (h, eps)
}

/// `r` from the `w`-th value: truncate it to `h` bits, then add the offset.
/// The offset is at least `63·2^-h`, so `r` lands strictly above the value
/// and at most `eps` past it.
fn advice_bias(atlas: &TransitionAtlas, w: usize) -> Result<(AlgebraicValue, BigRational, u64, BigRational)> {
    if w == 0 || w > atlas.values.len() {
        return Err(Error::InvalidInput(format!("advice count {w} outside 1..={}", atlas.values.len())));
    }
    let (h, eps) = advice_offsets(atlas);
    let mut p0 = atlas.values[w - 1].clone();
    let k = p0.floor_bits(h);
    let r = BigRational::new(k, BigInt::one() << h) + &eps;
    Ok((p0, r, h, eps))
}

/// The advice for target bias `p*`.
pub fn build_advice(atlas: &TransitionAtlas, p_star: &BigRational) -> Result<AdviceRecord> {
    if !p_star.is_positive() || *p_star >= BigRational::one() {
        return Err(Error::InvalidInput(format!("need 0 < p* < 1, got {p_star}")));
    }
    let mut values = atlas.values.clone();
    let mut w = 0;
    for v in &mut values {
        if v.cmp_rational(p_star) == Ordering::Greater {
            break;
        }
        w += 1;
    }
    let (p0, r, h, eps) = advice_bias(atlas, w)?;
    let epsilon_used = match p0.exact() {
        Some(x) => &r - x,
        None => eps,
    };
    let rec = AdviceRecord {
        p_star: p_star.clone(),
        w,
        p0,
        r,
        h,
        epsilon_used,
    };
    check_advice(atlas, &rec)?;
    Ok(rec)
}

/// Recomputes `r` from the count alone.
pub fn replay_advice(atlas: &TransitionAtlas, w: usize) -> Result<BigRational> {
    Ok(advice_bias(atlas, w)?.1)
}

fn check_advice(atlas: &TransitionAtlas, rec: &AdviceRecord) -> Result<()> {
    if !rec.r.is_positive() || rec.r >= BigRational::one() {
        return Err(Error::Invariant(format!("advice bias {} outside (0, 1)", rec.r)));
    }
    if ratio::dyadic_bits(&rec.r).is_none_or(|b| b > rec.h) {
        return Err(Error::Invariant("advice bias is not an h-bit dyadic".into()));
    }
    let mut values = atlas.values.clone();
    let mut p0 = rec.p0.clone();
    if p0.cmp_rational(&rec.r) != Ordering::Less {
        return Err(Error::Invariant("advice bias does not exceed p0".into()));
    }
    if let Some(next) = values.get_mut(rec.w) {
        if next.cmp_rational(&rec.r) != Ordering::Greater {
            return Err(Error::Invariant("an atlas value lies in (p0, r]".into()));
        }
    }
    if replay_advice(atlas, rec.w)? != rec.r {
        return Err(Error::Invariant("replay does not reproduce r".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{first_heads, hc_walk, single_flip};
    use crate::fixed_point::limiting_accept;
    use crate::ratio::q;
    use crate::scalar::Scalar;

    fn exact_values(a: &TransitionAtlas) -> Vec<BigRational> {
        a.values.iter().map(|v| v.exact().cloned().expect("rational value")).collect()
    }

    #[test]
    fn single_flip_atlas() {
        let a = build_atlas(&[("sf".into(), single_flip(()).unwrap())]).unwrap();
        assert_eq!(exact_values(&a), vec![q(0, 1), q(2, 5), q(3, 5)]);
        assert_eq!(a.separation, q(1, 5));
        assert_eq!(a.to_json()["potential_values"], json!(["0", "2/5", "3/5"]));
    }

    #[test]
    fn first_heads_atlas() {
        let a = build_atlas(&[("fh".into(), first_heads(()).unwrap())]).unwrap();
        assert_eq!(exact_values(&a), vec![q(0, 1)]);
        assert_eq!(a.separation, q(1, 1));
    }

    #[test]
    fn duplicates_merge() {
        let sf = single_flip::<Exact>(()).unwrap();
        let a = build_atlas(&[("a".into(), sf.clone()), ("b".into(), sf)]).unwrap();
        assert_eq!(a.values.len(), 3);
    }

    #[test]
    fn two_walks_merge_sorted() {
        let fam = vec![
            ("w1".to_string(), hc_walk::<Exact>(&q(1, 2), &q(1, 10), 2, ()).unwrap()),
            ("w2".to_string(), hc_walk::<Exact>(&q(1, 3), &q(1, 10), 1, ()).unwrap()),
        ];
        let a = build_atlas(&fam).unwrap();
        // Oracle: bisection on each closed form.
        let mut oracle = vec![0.0];
        for (p, k) in [(0.5, 2), (1.0 / 3.0, 1)] {
            let acc = |x: f64| {
                let up = (x * (1.0 - p)).powi(k);
                let down = ((1.0 - x) * p).powi(k);
                up / (up + down)
            };
            for t in [0.4, 0.6] {
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if acc(mid) < t {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                oracle.push(0.5 * (lo + hi));
            }
        }
        oracle.sort_by(f64::total_cmp);
        let got: Vec<f64> = a.values.iter().map(AlgebraicValue::to_f64).collect();
        assert_eq!(got.len(), oracle.len());
        for (g, o) in got.iter().zip(&oracle) {
            assert!((g - o).abs() < 1e-12);
        }
        assert!(a.separation.is_positive());
    }

    #[test]
    fn advice_examples() {
        let a = build_atlas(&[("sf".into(), single_flip(()).unwrap())]).unwrap();
        let rec = build_advice(&a, &q(1, 2)).unwrap();
        assert_eq!(rec.w, 2);
        assert_eq!(rec.p0.exact(), Some(&q(2, 5)));
        assert!(rec.r > q(2, 5) && rec.r < q(1, 2));
        assert_eq!(&q(2, 5) + &rec.epsilon_used, rec.r);
        assert_eq!(replay_advice(&a, rec.w).unwrap(), rec.r);

        let b = build_atlas(&[("fh".into(), first_heads(()).unwrap())]).unwrap();
        let rec = build_advice(&b, &q(7, 10)).unwrap();
        assert_eq!(rec.w, 1);
        assert!(rec.r.is_positive() && rec.r <= q(1, 4));
        assert!(ratio::dyadic_bits(&rec.r).is_some());
    }

    #[test]
    fn tie_counts_as_below() {
        let a = build_atlas(&[("sf".into(), single_flip(()).unwrap())]).unwrap();
        assert_eq!(build_advice(&a, &q(2, 5)).unwrap().w, 2);
        assert_eq!(build_advice(&a, &q(3, 5)).unwrap().w, 3);
        assert!(build_advice(&a, &q(0, 1)).is_err());
    }

    #[test]
    fn irrational_values_and_margins() {
        // Walks tuned to 1/2 accept above p* = 1/2 with a(p*) well away from
        // the thresholds; the rounded bias must keep them on the same side.
        let fam: Vec<(String, CoinAutomaton<Exact>)> = vec![
            ("acc".into(), hc_walk(&q(3, 10), &q(1, 10), 2, ()).unwrap()),
            ("rej".into(), hc_walk(&q(7, 10), &q(1, 10), 2, ()).unwrap()),
        ];
        let a = build_atlas(&fam).unwrap();
        assert!(a.values.iter().any(|v| v.exact().is_none()));
        let p_star = q(1, 2);
        let rec = build_advice(&a, &p_star).unwrap();
        for (_, m) in &fam {
            let at_star = limiting_accept(m, &p_star).unwrap().as_rational().unwrap();
            let at_r = limiting_accept(m, &rec.r).unwrap().as_rational().unwrap();
            if at_star >= q(2, 3) {
                assert!(at_r >= q(3, 5));
            }
            if at_star <= q(1, 3) {
                assert!(at_r <= q(2, 5));
            }
        }
        let json = a.to_json();
        assert_eq!(json["potential_values"].as_array().unwrap().len(), a.values.len());
        for (v, s) in a.values.iter().zip(json["potential_values"].as_array().unwrap()) {
            let shown: f64 = s.as_str().unwrap().parse().unwrap();
            assert!((shown - v.to_f64()).abs() < 1e-15);
        }
    }
}
