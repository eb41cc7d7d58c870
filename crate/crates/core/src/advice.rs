//! Information stored in a coin's bias: bit-string codec, sampling a bit of
//! bias `r` from fair flips and `r`'s binary expansion, and von Neumann's
//! unbiasing trick.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ratio::{self, dyadic_bits, frac_bit};
use crate::rng::trial_rng;

/// Anything that yields coin flips (`true` = heads).
pub trait CoinSource {
    fn flip(&mut self) -> bool;
}

impl<F: FnMut() -> bool> CoinSource for F {
    fn flip(&mut self) -> bool {
        self()
    }
}

/// A coin with exact rational bias driven by a seeded generator.
pub struct ExactCoin {
    p: BigRational,
    fast: Option<(u64, u32)>,
    rng: ChaCha8Rng,
}

impl ExactCoin {
    pub fn new(p: &BigRational, seed: u64, stream: u64) -> Result<Self> {
        if p.is_negative() || *p > BigRational::one() {
            return Err(Error::InvalidInput(format!("bias {p} outside [0, 1]")));
        }
        // Dyadics with at most 64 bits compare against one machine word.
        let fast = dyadic_bits(p).filter(|&b| b <= 64).and_then(|b| {
            let num = (p * BigRational::from_integer(BigInt::one() << b)).to_integer();
            num.to_u64().map(|n| (n, b as u32))
        });
        Ok(ExactCoin {
            p: p.clone(),
            fast,
            rng: trial_rng(seed, stream),
        })
    }
}

impl CoinSource for ExactCoin {
    fn flip(&mut self) -> bool {
        if self.p.is_one() {
            return true;
        }
        if let Some((num, b)) = self.fast {
            if b == 0 {
                return num == 1;
            }
            let draw = if b == 64 { self.rng.next_u64() } else { self.rng.next_u64() >> (64 - b) };
            return draw < num;
        }
        // Lazy comparison of a uniform expansion against p's.
        for j in 1.. {
            let z = self.rng.random::<bool>() as u8;
            let b = frac_bit(&self.p, j);
            if z != b {
                return z < b;
            }
        }
        unreachable!()
    }
}

/// Heads exactly `floor(n·p)` times in the first `n` flips, for every `n`.
pub struct EvenCoin {
    p: BigRational,
    n: u64,
}

impl EvenCoin {
    pub fn new(p: &BigRational) -> Self {
        EvenCoin { p: p.clone(), n: 0 }
    }
}

impl CoinSource for EvenCoin {
    fn flip(&mut self) -> bool {
        let before = (&self.p * ratio::int(self.n as i64)).floor();
        self.n += 1;
        let after = (&self.p * ratio::int(self.n as i64)).floor();
        after > before
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiasEncoding {
    pub bits: Vec<u8>,
    /// `0.b₁b₂…b_s` in binary.
    pub bias: BigRational,
    pub trials: u64,
}

pub fn default_trials(s: usize) -> u64 {
    64u64 << (2 * s)
}

pub fn parse_bits(s: &str) -> Result<Vec<u8>> {
    if s.is_empty() {
        return Err(Error::InvalidInput("empty bit string".into()));
    }
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::InvalidInput(format!("'{c}' is not a bit"))),
        })
        .collect()
}

pub fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect()
}

pub fn encode_bias(bits: &[u8]) -> Result<BiasEncoding> {
    if bits.is_empty() {
        return Err(Error::InvalidInput("empty bit string".into()));
    }
    if bits.len() > 28 {
        return Err(Error::InvalidInput(format!("{} bits need an impractical sampling budget", bits.len())));
    }
    let mut num = BigInt::zero();
    for &b in bits {
        if b > 1 {
            return Err(Error::InvalidInput(format!("{b} is not a bit")));
        }
        num = (num << 1) + BigInt::from(b);
    }
    Ok(BiasEncoding {
        bits: bits.to_vec(),
        bias: BigRational::new(num, BigInt::one() << bits.len()),
        trials: default_trials(bits.len()),
    })
}

/// Grid index for `heads` out of `trials`: the nearest `k/2^s` with ties
/// down, saturated at `(2^s − 1)/2^s`.
pub fn decode_count(heads: u64, trials: u64, s: usize) -> u64 {
    assert!(trials > 0);
    // k = ceil((heads·2^s)/trials − 1/2) = ceil((heads·2^(s+1) − trials) / (2·trials)).
    let n = ((heads as i128) << (s + 1)) - trials as i128;
    let d = 2 * trials as i128;
    let k = if n <= 0 { -((-n) / d) } else { (n + d - 1) / d };
    k.clamp(0, (1i128 << s) - 1) as u64
}

fn index_to_bits(k: u64, s: usize) -> Vec<u8> {
    (0..s).rev().map(|i| ((k >> i) & 1) as u8).collect()
}

pub fn decode_bits(source: &mut impl CoinSource, s: usize, trials: u64) -> Result<Vec<u8>> {
    if trials == 0 {
        return Err(Error::InvalidInput("need at least one trial".into()));
    }
    if s == 0 || s > 28 {
        return Err(Error::InvalidInput(format!("bit length {s} outside 1..=28")));
    }
    let heads = (0..trials).filter(|_| source.flip()).count() as u64;
    Ok(index_to_bits(decode_count(heads, trials, s), s))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundTrip {
    pub encoding: BiasEncoding,
    pub recovered: Vec<u8>,
    pub success: bool,
}

impl RoundTrip {
    pub fn to_json(&self) -> Value {
        json!({
            "bits": bits_to_string(&self.encoding.bits),
            "bias": self.encoding.bias.to_string(),
            "trials": self.encoding.trials,
            "recovered": bits_to_string(&self.recovered),
            "success": self.success,
        })
    }
}

/// Encodes, flips an exact coin of that bias, and decodes.
pub fn roundtrip(bits: &[u8], trials: Option<u64>, seed: u64) -> Result<RoundTrip> {
    let mut encoding = encode_bias(bits)?;
    if let Some(t) = trials {
        encoding.trials = t;
    }
    let mut coin = ExactCoin::new(&encoding.bias, seed, 0)?;
    let recovered = decode_bits(&mut coin, bits.len(), encoding.trials)?;
    Ok(RoundTrip {
        success: recovered == encoding.bits,
        encoding,
        recovered,
    })
}

/// A real in `(0, 1)` given by its binary digits, all zero past `h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionOracle {
    r: BigRational,
    h: u64,
}

impl ExpansionOracle {
    pub fn new(r: &BigRational, h: u64) -> Result<Self> {
        if !r.is_positive() || *r >= BigRational::one() {
            return Err(Error::InvalidInput(format!("{r} outside (0, 1)")));
        }
        match dyadic_bits(r) {
            Some(b) if b <= h => Ok(ExpansionOracle { r: r.clone(), h }),
            _ => Err(Error::InvalidInput(format!("{r} has nonzero bits beyond {h}"))),
        }
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let enc = encode_bias(bits)?;
        Self::new(&enc.bias, bits.len() as u64)
    }

    pub fn value(&self) -> &BigRational {
        &self.r
    }

    pub fn h(&self) -> u64 {
        self.h
    }

    /// `b_j`, 1-based.
    pub fn bit(&self, j: u64) -> u8 {
        if j == 0 || j > self.h {
            0
        } else {
            frac_bit(&self.r, j)
        }
    }
}

/// Compares fair bits `z₁, z₂, …` against the expansion of `r`: 1 as soon as
/// `z_j < b_j`, 0 as soon as `z_j > b_j`, 0 if all `h` bits agree.
pub fn biased_bit_from(oracle: &ExpansionOracle, mut z: impl FnMut() -> u8) -> u8 {
    for j in 1..=oracle.h {
        let (zj, bj) = (z(), oracle.bit(j));
        if zj < bj {
            return 1;
        }
        if zj > bj {
            return 0;
        }
    }
    0
}

pub fn biased_bit(oracle: &ExpansionOracle, seed: u64) -> u8 {
    let mut rng = trial_rng(seed, 0);
    biased_bit_from(oracle, || rng.random::<bool>() as u8)
}

/// Draws pairs until they differ: `(1, 0)` gives 1, `(0, 1)` gives 0.
/// Returns the bit and the number of pairs consumed.
pub fn von_neumann(source: &mut impl CoinSource, max_pairs: u64) -> Result<(u8, u64)> {
    for k in 1..=max_pairs {
        match (source.flip(), source.flip()) {
            (true, false) => return Ok((1, k)),
            (false, true) => return Ok((0, k)),
            _ => {}
        }
    }
    Err(Error::Exhausted { pairs: max_pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::q;
    use statrs::distribution::{Binomial, DiscreteCDF};

    #[test]
    fn encoding_examples() {
        assert_eq!(encode_bias(&[1]).unwrap().bias, q(1, 2));
        assert_eq!(encode_bias(&parse_bits("101").unwrap()).unwrap().bias, q(5, 8));
        let e = encode_bias(&parse_bits("00000001").unwrap()).unwrap();
        assert_eq!(e.bias, q(1, 256));
        assert_eq!(e.trials, 64 << 16);
        assert!(encode_bias(&[]).is_err());
        assert!(parse_bits("10x").is_err());
    }

    #[test]
    fn deterministic_sources_saturate() {
        let mut heads = || true;
        assert_eq!(decode_bits(&mut heads, 3, 100).unwrap(), vec![1, 1, 1]);
        let mut tails = || false;
        assert_eq!(decode_bits(&mut tails, 3, 100).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn rounding_ties_go_down() {
        // 3 heads of 16 at s = 2 is 0.1875, between 0 and 1/4 nearer 1/4;
        // 2 of 16 is exactly halfway.
        assert_eq!(decode_count(3, 16, 2), 1);
        assert_eq!(decode_count(2, 16, 2), 0);
        assert_eq!(decode_count(6, 16, 2), 1);
        assert_eq!(decode_count(14, 16, 2), 3);
    }

    #[test]
    fn even_coin_decodes_exactly() {
        for s in 1..=6 {
            for k in 0..1u64 << s {
                let bits = index_to_bits(k, s);
                let e = encode_bias(&bits).unwrap();
                let mut c = EvenCoin::new(&e.bias);
                assert_eq!(decode_bits(&mut c, s, 1 << (s + 2)).unwrap(), bits);
            }
        }
    }

    /// Smallest `x` with `P(X ≤ x) ≥ u`.
    fn quantile(bin: &Binomial, n: u64, u: f64) -> u64 {
        let (mut lo, mut hi) = (0u64, n);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if bin.cdf(mid) >= u {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }

    /// The 2^-20 and 1 − 2^-20 binomial quantiles of the head count both
    /// decode to the encoded bits.
    #[test]
    fn codec_holds_at_binomial_quantiles() {
        let tail = (-20f64).exp2();
        for s in 1..=10usize {
            let n = default_trials(s);
            let step = ((1u64 << s) / 16).max(1);
            assert_eq!(decode_count(0, n, s), 0);
            for k in (1..1u64 << s).step_by(step as usize).chain([(1 << s) - 1]) {
                let p = k as f64 / (1u64 << s) as f64;
                let bin = Binomial::new(p, n).unwrap();
                for x in [quantile(&bin, n, tail), quantile(&bin, n, 1.0 - tail)] {
                    assert_eq!(decode_count(x, n, s), k, "s={s} k={k} heads={x}");
                }
            }
        }
    }

    #[test]
    fn roundtrip_recovers_small_strings() {
        let bits = parse_bits("101").unwrap();
        let ok = (0..200).filter(|&seed| roundtrip(&bits, None, seed).unwrap().success).count();
        assert!(ok >= 198, "{ok}/200");
        let j = roundtrip(&bits, None, 1).unwrap().to_json();
        assert_eq!(j["bias"], "5/8");
        assert_eq!(j["trials"], 64 * 64);
    }

    #[test]
    fn exact_coin_frequencies() {
        for p in [q(5, 8), q(1, 3)] {
            let mut c = ExactCoin::new(&p, 3, 0).unwrap();
            let n = 100_000;
            let heads = (0..n).filter(|_| c.flip()).count() as f64;
            let pf = ratio::to_f64(&p);
            assert!((heads / n as f64 - pf).abs() <= 3.0 * (pf * (1.0 - pf) / n as f64).sqrt());
        }
        let mut one = ExactCoin::new(&q(1, 1), 0, 0).unwrap();
        assert!((0..10).all(|_| one.flip()));
        let mut zero = ExactCoin::new(&q(0, 1), 0, 0).unwrap();
        assert!((0..10).all(|_| !zero.flip()));
    }

    #[test]
    fn half_needs_one_comparison() {
        let o = ExpansionOracle::new(&q(1, 2), 1).unwrap();
        assert_eq!(biased_bit_from(&o, || 0), 1);
        assert_eq!(biased_bit_from(&o, || 1), 0);
    }

    #[test]
    fn oracle_rejects_long_expansions() {
        assert!(ExpansionOracle::new(&q(1, 3), 12).is_err());
        assert!(ExpansionOracle::new(&q(5, 8), 2).is_err());
        assert!(ExpansionOracle::new(&q(5, 8), 3).is_ok());
    }

    fn enumerate(o: &ExpansionOracle) -> BigRational {
        let h = o.h();
        let ones: u64 = (0..1u64 << h)
            .map(|prefix| {
                let mut j = 0;
                biased_bit_from(o, || {
                    j += 1;
                    ((prefix >> (h - j)) & 1) as u8
                }) as u64
            })
            .sum();
        BigRational::new(BigInt::from(ones), BigInt::one() << h)
    }

    #[test]
    fn biased_bit_is_exact_by_enumeration() {
        for h in 1..=12u64 {
            for num in (1..1u64 << h).step_by(((1u64 << h) / 40).max(1) as usize) {
                let r = BigRational::new(BigInt::from(num), BigInt::one() << h);
                let o = ExpansionOracle::new(&r, h).unwrap();
                assert_eq!(enumerate(&o), r);
            }
        }
    }

    #[test]
    fn biased_bit_frequency() {
        let o = ExpansionOracle::new(&q(5, 8), 3).unwrap();
        let n = 100_000u64;
        let ones = (0..n).map(|s| biased_bit(&o, s) as u64).sum::<u64>() as f64;
        let r: f64 = 0.625;
        assert!((ones / n as f64 - r).abs() <= 3.0 * (r * (1.0 - r) / n as f64).sqrt());
    }

    #[test]
    fn von_neumann_examples() {
        let mut c = ExactCoin::new(&q(9, 10), 11, 0).unwrap();
        let n = 100_000;
        let ones: u64 = (0..n).map(|_| von_neumann(&mut c, 10_000).unwrap().0 as u64).sum();
        assert!((ones as f64 / n as f64 - 0.5).abs() <= 3.0 * (0.25 / n as f64).sqrt());

        let mut heads = || true;
        assert_eq!(von_neumann(&mut heads, 50), Err(Error::Exhausted { pairs: 50 }));

        let mut flag = false;
        let mut alternating = || {
            flag = !flag;
            flag
        };
        assert_eq!(von_neumann(&mut alternating, 5).unwrap(), (1, 1));
    }

    #[test]
    fn von_neumann_is_fair_given_emission() {
        for p in [q(1, 10), q(1, 3), q(9, 10)] {
            let qp = BigRational::one() - &p;
            let weight = |x: bool| if x { p.clone() } else { qp.clone() };
            let mut emitted = [BigRational::zero(), BigRational::zero()];
            for (a, b) in [(true, true), (true, false), (false, true), (false, false)] {
                let mut it = [a, b].into_iter();
                let mut src = || it.next().expect("one pair only");
                if let Ok((bit, 1)) = von_neumann(&mut src, 1) {
                    emitted[bit as usize] += weight(a) * weight(b);
                }
            }
            assert!(emitted[1].is_positive());
            assert_eq!(emitted[0], emitted[1]);
        }
    }
}
