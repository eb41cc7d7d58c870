//! Randomised checks of the library's structural invariants.

use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coinlab::automaton::{accept_after_flips, accept_curve, accept_prob_at, monte_carlo, CoinAutomaton, TransferMatrix};
use coinlab::constructions::{first_heads, hc_walk, quantum_distinguisher, single_flip, zero_vs_eps};
use coinlab::fixed_point::{dead_subspace, lambda_limit, limiting_accept, live_prob};
use coinlab::linalg::{devectorize, is_psd, vectorize, DensityMatrix, Matrix};
use coinlab::ratio::{frac_bit, q, to_f64};
use coinlab::rational::{build_advice, fit_rational, interior_poles, isolate_roots, atlas_from_functions, Poly, RationalFunction};
use coinlab::{Exact, Mp, Scalar};

use common::{random_automaton, random_channel};

mod common;

fn cx(re: BigRational) -> Exact {
    Exact::new(re, BigRational::zero())
}

fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> DensityMatrix<Exact> {
    // Mixture of two rational pure states.
    let mut psi = || -> Vec<Exact> {
        (0..dim)
            .map(|_| Exact::new(q(rng.random_range(-4..=4), 3), q(rng.random_range(-4..=4), 3)))
            .collect()
    };
    let (mut a, b) = (psi(), psi());
    if a.iter().all(Scalar::is_zero) {
        a[0] = cx(q(1, 1));
    }
    let ra = DensityMatrix::from_pure(&a, ()).unwrap();
    match DensityMatrix::from_pure(&b, ()) {
        Ok(rb) => {
            let m = ra.matrix().scale(&cx(q(2, 3))).add(&rb.matrix().scale(&cx(q(1, 3)))).unwrap();
            DensityMatrix::new(m, 0.0).unwrap()
        }
        Err(_) => ra,
    }
}

fn exact_cases() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(exact_cases())]

    #[test]
    fn channels_map_states_to_states(seed in any::<u64>(), dim in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_channel(dim, &mut rng);
        let rho = random_state(dim, &mut rng);
        let out = e.apply_matrix(rho.matrix()).unwrap();
        prop_assert!(out.is_hermitian(0.0));
        prop_assert_eq!(out.trace(), cx(q(1, 1)));
        prop_assert!(is_psd(&out, 0.0));
    }

    #[test]
    fn transfer_matrix_agrees_on_matrix_units(seed in any::<u64>(), dim in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_channel(dim, &mut rng);
        let b = e.matrix();
        for i in 0..dim {
            for j in 0..dim {
                let unit = Matrix::unit(dim, i, j, ());
                let lhs = b.matvec(&vectorize(&unit)).unwrap();
                let rhs = vectorize(&e.apply_matrix(&unit).unwrap());
                prop_assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn vectorize_round_trips(seed in any::<u64>(), dim in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..dim)
            .map(|_| (0..dim).map(|_| Exact::new(q(rng.random_range(-9..9), 7), q(rng.random_range(-9..9), 5))).collect())
            .collect();
        let m = Matrix::<Exact>::from_rows(rows, ()).unwrap();
        prop_assert_eq!(devectorize(&vectorize(&m), dim, ()).unwrap(), m);
    }

    #[test]
    fn acceptance_never_decreases(seed in any::<u64>(), n in 2usize..=4, pn in 0i64..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_automaton(n, &mut rng);
        let curve = accept_curve(&m, &q(pn, 8), 40).unwrap();
        for w in curve.windows(2) {
            prop_assert!(w[0].as_rational().unwrap() <= w[1].as_rational().unwrap());
        }
    }

    #[test]
    fn mixture_equals_flip_string_average(seed in any::<u64>(), t in 0usize..=7, pn in 0i64..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_automaton(2, &mut rng);
        let p = q(pn, 5);
        prop_assert_eq!(flip_average(&m, &p, t), accept_prob_at(&m, &p, t as u64).unwrap().as_rational().unwrap());
    }

    #[test]
    fn fixed_point_invariants_hold(seed in any::<u64>(), n in 2usize..=3, pn in 0i64..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_automaton(n, &mut rng);
        let p = q(pn, 4);
        let fp = lambda_limit(&m.transfer(&p).unwrap()).unwrap();
        prop_assert_eq!(fp.diagnostics.residual, 0.0);
        prop_assert_eq!(fp.diagnostics.idempotence, 0.0);
        prop_assert!(fp.diagnostics.max_entry <= 1.0);
        let mp = m.convert::<Mp>(128, |x| Mp::from_parts(&x.re, &x.im, 128)).unwrap();
        let fl = lambda_limit(&mp.transfer(&p).unwrap()).unwrap();
        let tol = Mp::default_tol(128);
        prop_assert!(fl.diagnostics.residual <= tol && fl.diagnostics.idempotence <= tol);
        prop_assert!(fl.diagnostics.max_entry <= 1.0 + tol);
        let exact = fp.lambda.convert(128, |x| Mp::from_parts(&x.re, &x.im, 128));
        prop_assert!(exact.sub(&fl.lambda).unwrap().max_abs() <= 1e-9);
    }

    #[test]
    fn limit_dominates_and_sandwich_holds(seed in any::<u64>(), n in 2usize..=3, pn in 1i64..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_automaton(n, &mut rng);
        let p = q(pn, 4);
        let a = limiting_accept(&m, &p).unwrap().as_rational().unwrap();
        let report = dead_subspace(&m).unwrap();
        let curve = accept_curve(&m, &p, 30).unwrap();
        for (t, at) in curve.iter().enumerate() {
            let at = at.as_rational().unwrap();
            prop_assert!(at <= a);
            if t % 5 == 0 {
                let gt = live_prob(&m, &report, &p, t as u64).unwrap().as_rational().unwrap();
                prop_assert!(a <= at + gt);
            }
        }
        // Long horizons in float: a_t stays below a.
        let mp = m.convert::<Mp>(128, |x| Mp::from_parts(&x.re, &x.im, 128)).unwrap();
        let long = accept_curve(&mp, &p, 1000).unwrap();
        let af = to_f64(&a);
        prop_assert!(long.iter().all(|x| x.re_f64() <= af + 1e-12));
    }

    #[test]
    fn walk_matches_gamblers_ruin(k in 1usize..=12, pn in 1i64..=9, qn in 0i64..=10) {
        let (p, qb) = (q(pn, 10), q(qn, 10));
        let eps = if pn < 9 { q(1, 10) } else { q(0, 1) };
        let m = hc_walk::<Exact>(&p, &eps, k, ()).unwrap();
        let a = limiting_accept(&m, &qb).unwrap().as_rational().unwrap();
        prop_assert_eq!(a, ruin(&p, &qb, k));
    }

    #[test]
    fn isolated_roots_are_sound_and_complete(c in prop::collection::vec(-6i64..=6, 2..=5)) {
        let p = Poly::from_ints(&c);
        prop_assume!(!p.is_zero() && p.degree().unwrap_or(0) >= 1);
        let roots = isolate_roots(&p, &q(0, 1), &q(1, 1), 20).unwrap();
        let sqf = p.square_free();
        for r in &roots {
            match &r.exact {
                Some(x) => prop_assert!(p.eval(x).is_zero()),
                None => {
                    let (a, b) = (sqf.eval(&r.lo), sqf.eval(&r.hi));
                    prop_assert!(a * b < BigRational::zero());
                }
            }
        }
        // Every sign change on a 10⁻⁴ grid is inside some interval.
        let grid: Vec<BigRational> = (0..=10_000).map(|i| q(i, 10_000)).collect();
        for w in grid.windows(2) {
            let (a, b) = (p.eval(&w[0]), p.eval(&w[1]));
            if a.clone() * b.clone() < BigRational::zero() {
                prop_assert!(roots.iter().any(|r| r.lo < w[1] && r.hi > w[0]), "sign change in [{}, {}] missed", w[0], w[1]);
            }
        }
    }

    #[test]
    fn root_bits_match_the_midpoint(a in 2i64..40, i in 1u64..24) {
        // Roots of x² − 1/a in (0, 1): 1/sqrt(a), irrational unless a is square.
        let p = Poly::from_ints(&[-1, 0, a]);
        let mut roots = isolate_roots(&p, &q(0, 1), &q(1, 1), 8).unwrap();
        prop_assert_eq!(roots.len(), 1);
        let r = &mut roots[0];
        let bit = r.bit(&p, i);
        r.refine_to(&p, i + 2);
        prop_assert_eq!(bit, frac_bit(&r.midpoint(), i));
    }

    #[test]
    fn advice_interval_holds_no_potential_value(num in 1i64..1000) {
        let p_star = q(num, 1000);
        let atlas = sample_atlas();
        let adv = build_advice(&atlas, &p_star).unwrap();
        prop_assert!(adv.r < BigRational::one());
        let mut p0 = adv.p0.clone();
        for v in &atlas.values {
            let mut v = v.clone();
            let below = v.compare(&mut p0) != std::cmp::Ordering::Greater;
            let above = v.cmp_rational(&adv.r) == std::cmp::Ordering::Greater;
            prop_assert!(below || above, "a potential value lies in (p0, r]");
        }
    }
}

fn flip_average(m: &CoinAutomaton<Exact>, p: &BigRational, t: usize) -> BigRational {
    let one = BigRational::one();
    let mut total = BigRational::zero();
    for mask in 0u32..(1 << t) {
        let flips: Vec<bool> = (0..t).map(|i| mask >> i & 1 == 1).collect();
        let w = flips.iter().fold(one.clone(), |acc, &h| acc * if h { p.clone() } else { &one - p });
        total += w * accept_after_flips(m, &flips).unwrap().as_rational().unwrap();
    }
    total
}

/// Hit `+K` before `−K` from 0 with up-step `q(1−p)` and down-step `(1−q)p`.
fn ruin(p: &BigRational, qb: &BigRational, k: usize) -> BigRational {
    let one = BigRational::one();
    let up = qb * (&one - p);
    let down = (&one - qb) * p;
    if up.is_zero() && down.is_zero() {
        return BigRational::zero();
    }
    if up.is_zero() {
        return BigRational::zero();
    }
    let ratio = down / up;
    if ratio.is_one() {
        return q(1, 2);
    }
    // Classic formula on 0..2K from K: (1 − r^K)/(1 − r^{2K}) = 1/(1 + r^K).
    &one / (&one + num_traits::pow(ratio, k))
}

fn sample_atlas() -> coinlab::rational::TransitionAtlas {
    let mut family = Vec::new();
    for (name, m) in [
        ("hc(3/10)", hc_walk::<Exact>(&q(3, 10), &q(1, 10), 2, ()).unwrap()),
        ("hc(7/10)", hc_walk::<Exact>(&q(7, 10), &q(1, 10), 2, ()).unwrap()),
        ("single", single_flip::<Exact>(()).unwrap()),
    ] {
        family.push((name.to_string(), fit_rational(&m, None).unwrap()));
    }
    family.push(("zve".to_string(), fit_rational(&zero_vs_eps::<Exact>(&q(1, 3), ()).unwrap(), None).unwrap()));
    atlas_from_functions(family).unwrap()
}

#[test]
fn mixture_identity_at_twelve_flips() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let m = random_automaton(2, &mut rng);
    let p = q(2, 7);
    assert_eq!(flip_average(&m, &p, 12), accept_prob_at(&m, &p, 12).unwrap().as_rational().unwrap());
}

#[test]
fn monte_carlo_matches_finite_horizon() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let n = 20_000u64;
    for k in 0..4 {
        let m = random_automaton(2 + k % 2, &mut rng);
        let p = q(1 + k as i64, 5);
        let t = 15;
        let a = accept_prob_at(&m, &p, t).unwrap().re_f64();
        let s = monte_carlo(&m, &p, t, k as u64, n).unwrap();
        let bound = 4.0 * (1.0 / (4.0 * n as f64)).sqrt();
        assert!((s.accept_rate() - a).abs() <= bound, "case {k}: {} vs {a}", s.accept_rate());
    }
}

#[test]
fn exact_and_float_limits_agree_on_the_gallery() {
    let gallery: Vec<CoinAutomaton<Exact>> = vec![
        first_heads(()).unwrap(),
        single_flip(()).unwrap(),
        hc_walk(&q(1, 2), &q(1, 10), 3, ()).unwrap(),
        zero_vs_eps(&q(1, 10), ()).unwrap(),
    ];
    for m in &gallery {
        let mp = m.convert::<Mp>(128, |x| Mp::from_parts(&x.re, &x.im, 128)).unwrap();
        for p in [q(0, 1), q(1, 3), q(1, 2), q(4, 5), q(1, 1)] {
            let a = lambda_limit(&m.transfer(&p).unwrap()).unwrap().lambda;
            let b = lambda_limit(&mp.transfer(&p).unwrap()).unwrap().lambda;
            let d = a.convert(128, |x| Mp::from_parts(&x.re, &x.im, 128)).sub(&b).unwrap().max_abs();
            assert!(d <= 1e-9, "{d}");
        }
    }
}

#[test]
fn fitted_functions_match_sampled_limits_and_have_no_poles() {
    let gallery: Vec<(&str, CoinAutomaton<Exact>)> = vec![
        ("single_flip", single_flip(()).unwrap()),
        ("hc_walk", hc_walk(&q(3, 10), &q(1, 10), 2, ()).unwrap()),
        ("zero_vs_eps", zero_vs_eps(&q(1, 10), ()).unwrap()),
    ];
    for (name, m) in &gallery {
        let f: RationalFunction = fit_rational(m, None).unwrap().reduce();
        assert_eq!(interior_poles(&f).unwrap(), 0, "{name}");
        let mp = m.convert::<Mp>(64, |x| Mp::from_parts(&x.re, &x.im, 64)).unwrap();
        for i in (10..=990).step_by(1) {
            let p = q(i, 1000);
            let sampled = limiting_accept(&mp, &p).unwrap().re_f64();
            let fitted = f.eval_f64(i as f64 / 1000.0);
            assert!((sampled - fitted).abs() <= 1e-8, "{name} at {p}: {sampled} vs {fitted}");
        }
    }
}

#[test]
fn distinguisher_drifts_upward() {
    let (p, eps) = (q(1, 2), q(1, 10));
    let m = quantum_distinguisher::<Mp>(&p, &eps, 10_000, 7_500, 192).unwrap();
    let values: Vec<f64> = (0..=10)
        .map(|i| limiting_accept(&m, &q(50 + 2 * i, 100)).unwrap().re_f64())
        .collect();
    for w in values.windows(2) {
        assert!(w[0] <= w[1], "{values:?}");
    }
}

#[test]
fn transfer_matrix_mixes_linearly() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let m = random_automaton(3, &mut rng);
    let p = q(3, 7);
    let bp = m.transfer(&p).unwrap().b.to_dense();
    let one = BigRational::one();
    let b0 = TransferMatrix::from_channel(m.e0()).b.to_dense();
    let b1 = TransferMatrix::from_channel(m.e1()).b.to_dense();
    let mix = b1.scale(&cx(p.clone())).add(&b0.scale(&cx(&one - &p))).unwrap();
    assert_eq!(bp, mix);
}
