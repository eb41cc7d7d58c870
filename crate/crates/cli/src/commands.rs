//! Subcommand bodies. Each returns a JSON result and, optionally, curves.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use coinlab::advice::{
    biased_bit_from, bits_to_string, decode_bits, default_trials, encode_bias, parse_bits, roundtrip, von_neumann, CoinSource, ExactCoin,
    ExpansionOracle,
};
use coinlab::automaton::{accept_curve, machine_to_json, monte_carlo, CoinMachine, Machine, McSummary, Mode};
use coinlab::fixed_point::{cesaro_accept, limit_report_with, Analyzable, LimitConfig};
use coinlab::ratio;
use coinlab::rational::{
    build_advice, build_atlas, fit_rational, interior_poles, isolate_roots, min_separation, replay_advice, threshold_poly, Poly,
};
use coinlab::{Error, Exact, Result, Scalar};

use crate::report::{envelope, svg_plot, write_csv, write_text, Series};
use crate::source::{Numeric, SourceArgs, GALLERY};
use crate::with_scalar;
use crate::{AdviceAction, Cli, Command};

const DEFAULT_TRIALS: u64 = 10_000;

struct Outcome {
    result: Value,
    precision: Option<u32>,
    curves: Vec<Series>,
    axes: (&'static str, &'static str),
}

impl Outcome {
    fn plain(result: Value) -> Self {
        Outcome { result, precision: None, curves: Vec::new(), axes: ("p", "value") }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    let (name, out) = match &cli.command {
        Command::Gap(a) => ("gap", gap(cli, a)?),
        Command::Fit(a) => ("fit", fit(cli, a)?),
        Command::Atlas(a) => ("atlas", atlas(a)?),
        Command::Advice(a) => ("advice", advice(cli, &a.action)?),
        Command::Roots(a) => ("roots", roots(a)?),
        Command::Simulate(a) => ("simulate", simulate(cli, a)?),
        Command::Limit(a) => ("limit", limit(cli, a)?),
        Command::Gallery(a) => ("gallery", gallery(cli, a)?),
    };
    let config = json!({
        "global": {
            "precision_bits": g.precision_bits,
            "exact": g.exact,
            "float": g.float,
            "seed": g.seed,
            "trials": g.trials,
            "t_max": g.t_max,
            "out": g.out,
            "csv": g.csv,
            "svg": g.svg,
        },
        "command": serde_json::to_value(&cli.command).expect("serializable args"),
    });
    let doc = envelope(name, config, g.seed, out.precision.unwrap_or(g.precision_bits), out.result);
    let text = serde_json::to_string_pretty(&doc).expect("serializable result") + "\n";
    match &g.out {
        Some(path) => write_text(path, &text)?,
        None => print!("{text}"),
    }
    if (g.csv.is_some() || g.svg.is_some()) && out.curves.is_empty() {
        return Err(Error::InvalidInput(format!("{name} produces no curve for --csv/--svg")));
    }
    if let Some(path) = &g.csv {
        write_csv(path, out.axes.0, &out.curves)?;
    }
    if let Some(path) = &g.svg {
        write_text(path, &svg_plot(name, out.axes.0, out.axes.1, &out.curves))?;
    }
    Ok(())
}

fn bias(s: &str) -> Result<BigRational> {
    let p = ratio::parse(s)?;
    if outside_unit(&p) {
        return Err(Error::InvalidInput(format!("bias {p} outside [0, 1]")));
    }
    Ok(p)
}

fn outside_unit(p: &BigRational) -> bool {
    *p < BigRational::zero() || *p > BigRational::one()
}

fn numeric_json(num: Numeric) -> Value {
    serde_json::to_value(num).expect("serializable")
}

fn precision_of(num: Numeric) -> Option<u32> {
    match num {
        Numeric::Exact => None,
        Numeric::Float(b) => Some(b),
    }
}

/// `a(p)` for whatever kind of machine this is, with diagnostics.
fn accept_value<S: Analyzable>(m: &Machine<S>, p: &BigRational) -> Result<(S, Value)> {
    match m {
        Machine::Static(a) if a.mode() == Mode::Limit => Ok((cesaro_accept(a, p)?, json!({"method": "cesaro"}))),
        Machine::Static(a) => {
            let rep = limit_report_with(a, p, &LimitConfig::default())?;
            let diag = json!({
                "method": "fixed_point",
                "provenance": rep.provenance,
                "spread": rep.spread,
                "residual": rep.residual,
                "working_precision": rep.working_precision,
            });
            Ok((rep.accept(a), diag))
        }
        Machine::Timed(t) => {
            let horizon = t
                .horizon()
                .ok_or_else(|| Error::Unsupported("time-dependent machine without a horizon".into()))?;
            let curve = accept_curve(t, p, horizon)?;
            let last = curve.last().cloned().unwrap_or_else(|| S::zero(t.ctx()));
            Ok((last, json!({"method": "horizon", "horizon": horizon})))
        }
    }
}

fn simulate_machine<S: Scalar>(m: &Machine<S>, p: &BigRational, t_max: u64, seed: u64, trials: u64) -> Result<McSummary> {
    match m {
        Machine::Static(a) => monte_carlo(a, p, t_max, seed, trials),
        Machine::Timed(t) => monte_carlo(t, p, t_max, seed, trials),
    }
}

fn mc_json(s: &McSummary) -> Value {
    json!({
        "trials": s.trials,
        "accept": s.accept,
        "reject": s.reject,
        "unresolved": s.unresolved,
        "accept_rate": s.accept_rate(),
        "std_err": s.std_err(),
    })
}

fn grid_points(n: u32) -> Vec<BigRational> {
    (0..=n).map(|i| BigRational::new(i.into(), n.max(1).into())).collect()
}

fn limit(cli: &Cli, a: &crate::LimitArgs) -> Result<Outcome> {
    let g = &cli.global;
    let mut ps = a.p.iter().map(|s| bias(s)).collect::<Result<Vec<_>>>()?;
    if let Some(n) = a.grid {
        ps.extend(grid_points(n));
    }
    if ps.is_empty() {
        return Err(Error::InvalidInput("give --p or --grid".into()));
    }
    let num = Numeric::choose(&a.src, g.exact, g.float, g.precision_bits)?;
    let mut points = Vec::new();
    let mut curve = Vec::new();
    with_scalar!(num, |S, ctx| {
        let m = a.src.build::<S>(ctx)?;
        for p in &ps {
            let (v, diag) = accept_value(&m, p)?;
            curve.push((ratio::to_f64(p), v.re_f64()));
            points.push(json!({"p": p.to_string(), "a": v.render_re(), "diagnostics": diag}));
        }
    });
    let mut result = json!({
        "machine": a.src.label(),
        "numeric": numeric_json(num),
        "points": points,
    });
    if ps.len() == 1 {
        result["a"] = result["points"][0]["a"].clone();
    }
    Ok(Outcome {
        result,
        precision: precision_of(num),
        curves: vec![Series { name: a.src.label(), points: curve }],
        axes: ("p", "a(p)"),
    })
}

fn gap(cli: &Cli, a: &crate::GapArgs) -> Result<Outcome> {
    let g = &cli.global;
    let build_p = a.src.build_p.as_deref().map(bias).transpose()?;
    let eps = match (&a.src.eps, a.src.gallery.as_deref()) {
        (Some(e), _) => Some(ratio::parse(e)?),
        (None, Some("hc-walk")) => Some(ratio::q(1, 10)),
        _ => None,
    };
    let p1 = match &a.p1 {
        Some(s) => bias(s)?,
        None => build_p.clone().ok_or_else(|| Error::InvalidInput("give --p1 or --build-p".into()))?,
    };
    let p2 = match (&a.p2, &eps) {
        (Some(s), _) => bias(s)?,
        (None, Some(e)) => {
            let p = &p1 + e;
            if outside_unit(&p) {
                return Err(Error::InvalidInput(format!("p + eps = {p} outside [0, 1]")));
            }
            p
        }
        (None, None) => return Err(Error::InvalidInput("give --p2 or --eps".into())),
    };
    let num = Numeric::choose(&a.src, g.exact, g.float, g.precision_bits)?;
    let trials = g.trials.unwrap_or(DEFAULT_TRIALS);
    let result = with_scalar!(num, |S, ctx| {
        let m = a.src.build::<S>(ctx)?;
        let (a1, d1) = accept_value(&m, &p1)?;
        let (a2, d2) = accept_value(&m, &p2)?;
        let diff = a2.clone() - a1.clone();
        let mut r = json!({
            "machine": a.src.label(),
            "numeric": numeric_json(num),
            "p1": p1.to_string(),
            "p2": p2.to_string(),
            "a1": a1.render_re(),
            "a2": a2.render_re(),
            "gap": diff.render_re(),
            "gap_f64": diff.re_f64(),
            "diagnostics": [d1, d2],
        });
        if trials > 0 {
            let s1 = simulate_machine(&m, &p1, g.t_max, g.seed, trials)?;
            let s2 = simulate_machine(&m, &p2, g.t_max, g.seed, trials)?;
            r["monte_carlo"] = json!({
                "seed": g.seed,
                "t_max": g.t_max,
                "p1": mc_json(&s1),
                "p2": mc_json(&s2),
                "gap": s2.accept_rate() - s1.accept_rate(),
                "std_err": (s1.std_err().powi(2) + s2.std_err().powi(2)).sqrt(),
            });
        }
        r
    });
    Ok(Outcome { result, precision: precision_of(num), curves: Vec::new(), axes: ("p", "a(p)") })
}

fn simulate(cli: &Cli, a: &crate::SimulateArgs) -> Result<Outcome> {
    let g = &cli.global;
    let p = bias(&a.p)?;
    let trials = g.trials.unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(Error::InvalidInput("simulate needs --trials > 0".into()));
    }
    let num = Numeric::choose(&a.src, g.exact, g.float, g.precision_bits)?;
    let mut curves = Vec::new();
    let result = with_scalar!(num, |S, ctx| {
        let m = a.src.build::<S>(ctx)?;
        let s = simulate_machine(&m, &p, g.t_max, g.seed, trials)?;
        let mut r = json!({
            "machine": a.src.label(),
            "p": p.to_string(),
            "seed": g.seed,
            "t_max": g.t_max,
            "summary": mc_json(&s),
        });
        if let Some(t) = a.curve_t {
            let c = match &m {
                Machine::Static(x) => accept_curve(x, &p, t)?,
                Machine::Timed(x) => accept_curve(x, &p, t)?,
            };
            r["curve"] = json!(c.iter().map(|v| v.render_re()).collect::<Vec<_>>());
            curves.push(Series {
                name: format!("a_t({p})"),
                points: c.iter().enumerate().map(|(t, v)| (t as f64, v.re_f64())).collect(),
            });
        }
        r
    });
    Ok(Outcome { result, precision: precision_of(num), curves, axes: ("t", "a_t(p)") })
}

fn exact_only(cli: &Cli, src: &SourceArgs) -> Result<()> {
    if cli.global.float || !src.exact_capable() {
        return Err(Error::Unsupported(format!("{} needs exact arithmetic", src.label())));
    }
    Ok(())
}

fn fit(cli: &Cli, a: &crate::FitArgs) -> Result<Outcome> {
    exact_only(cli, &a.src)?;
    let m = a.src.build_static::<Exact>(())?;
    let f = fit_rational(&m, a.max_degree)?;
    let bound = a.max_degree.unwrap_or(m.dim() * m.dim());
    let n = a.grid.max(1);
    let curve = (0..=n)
        .map(|i| i as f64 / n as f64)
        .map(|x| (x, f.eval_f64(x)))
        .filter(|(_, y)| y.is_finite())
        .collect();
    let result = json!({
        "machine": a.src.label(),
        "numerator": f.num.to_strings(),
        "denominator": f.den.to_strings(),
        "display": f.to_string(),
        "degree": f.degree(),
        "degree_bound": bound,
        "reduced": f.reduced,
        "interior_poles": interior_poles(&f)?,
    });
    Ok(Outcome { result, precision: None, curves: vec![Series { name: "Q/R".into(), points: curve }], axes: ("p", "a(p)") })
}

fn parse_poly(s: &str) -> Result<Poly> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let p = Poly::from_strings(&parts)?;
    if p.is_zero() {
        return Err(Error::InvalidInput("zero polynomial".into()));
    }
    Ok(p)
}

fn roots(a: &crate::RootsArgs) -> Result<Outcome> {
    let (poly, origin) = match &a.poly {
        Some(s) => (parse_poly(s)?, "given".to_string()),
        None => {
            let m = a.src.build_static::<Exact>(())?;
            let (u, _) = threshold_poly(&fit_rational(&m, None)?);
            (u, format!("threshold polynomial of {}", a.src.label()))
        }
    };
    let (lo, hi) = (ratio::parse(&a.lo)?, ratio::parse(&a.hi)?);
    if lo >= hi {
        return Err(Error::InvalidInput(format!("empty interval [{lo}, {hi}]")));
    }
    let found = isolate_roots(&poly, &lo, &hi, a.bits)?;
    let sep = min_separation(&poly)?;
    let roots: Vec<Value> = found
        .iter()
        .map(|r| {
            let mut v = serde_json::to_value(r).expect("serializable");
            v["approx"] = json!(ratio::to_f64(&r.approx()));
            v
        })
        .collect();
    let result = json!({
        "polynomial": poly.to_strings(),
        "origin": origin,
        "interval": [lo.to_string(), hi.to_string()],
        "bits": a.bits,
        "roots": roots,
        "separation": {
            "observed": sep.observed.map(|x| x.to_string()),
            "bound": sep.bound.map(|x| x.to_string()),
        },
    });
    let n = 400;
    let (l, h) = (ratio::to_f64(&lo), ratio::to_f64(&hi));
    let curve = (0..=n).map(|i| l + (h - l) * i as f64 / n as f64).map(|x| (x, poly.eval_f64(x))).collect();
    Ok(Outcome { result, precision: None, curves: vec![Series { name: "P".into(), points: curve }], axes: ("x", "P(x)") })
}

fn atlas(a: &crate::AtlasArgs) -> Result<Outcome> {
    let members = if a.member.is_empty() {
        vec![a.src.clone()]
    } else {
        if a.src.gallery.is_some() || a.src.file.is_some() {
            return Err(Error::InvalidInput("use either --member or a single --gallery/--file".into()));
        }
        a.member.iter().map(|m| SourceArgs::parse_member(m)).collect::<Result<Vec<_>>>()?
    };
    let family = members
        .iter()
        .map(|s| Ok((s.label(), s.build_static::<Exact>(())?)))
        .collect::<Result<Vec<_>>>()?;
    let atlas = build_atlas(&family)?;
    let mut result = atlas.to_json();
    if let Some(ps) = &a.p_star {
        let p_star = ratio::parse(ps)?;
        let rec = build_advice(&atlas, &p_star)?;
        let replay = replay_advice(&atlas, rec.w)?;
        let mut adv = rec.to_json();
        adv["replayed_r"] = json!(replay.to_string());
        result["advice"] = adv;
    }
    Ok(Outcome::plain(result))
}

fn advice(cli: &Cli, action: &AdviceAction) -> Result<Outcome> {
    let g = &cli.global;
    let result = match action {
        AdviceAction::Encode { bits } => {
            let bits = parse_bits(bits)?;
            let enc = encode_bias(&bits)?;
            json!({"bits": bits_to_string(&enc.bits), "bias": enc.bias.to_string(), "trials": g.trials.unwrap_or(enc.trials)})
        }
        AdviceAction::Decode { bias: b, s } => {
            let p = bias(b)?;
            let trials = g.trials.unwrap_or_else(|| default_trials(*s));
            let mut coin = ExactCoin::new(&p, g.seed, 0)?;
            let recovered = decode_bits(&mut coin, *s, trials)?;
            json!({"bias": p.to_string(), "s": s, "trials": trials, "recovered": bits_to_string(&recovered)})
        }
        AdviceAction::Roundtrip { bits, runs } => {
            let bits = parse_bits(bits)?;
            if *runs == 0 {
                return Err(Error::InvalidInput("--runs must be positive".into()));
            }
            let all = (0..*runs)
                .map(|i| roundtrip(&bits, g.trials, g.seed.wrapping_add(i)))
                .collect::<Result<Vec<_>>>()?;
            let first = &all[0];
            json!({
                "bits": bits_to_string(&first.encoding.bits),
                "bias": first.encoding.bias.to_string(),
                "trials": first.encoding.trials,
                "recovered": bits_to_string(&first.recovered),
                "success": all.iter().all(|r| r.success),
                "runs": all.iter().enumerate().map(|(i, r)| json!({
                    "seed": g.seed.wrapping_add(i as u64),
                    "recovered": bits_to_string(&r.recovered),
                    "success": r.success,
                })).collect::<Vec<_>>(),
            })
        }
        AdviceAction::Sample { r, h } => {
            let r = ratio::parse(r)?;
            let h = match h {
                Some(h) => *h,
                None => ratio::dyadic_bits(&r).ok_or_else(|| Error::InvalidInput(format!("{r} is not dyadic; give --h")))?,
            };
            let oracle = ExpansionOracle::new(&r, h)?;
            let draws = g.trials.unwrap_or(DEFAULT_TRIALS);
            let mut fair = ExactCoin::new(&ratio::q(1, 2), g.seed, 0)?;
            let ones: u64 = (0..draws).map(|_| biased_bit_from(&oracle, || fair.flip() as u8) as u64).sum();
            let f = ones as f64 / draws.max(1) as f64;
            json!({
                "r": r.to_string(),
                "h": h,
                "draws": draws,
                "ones": ones,
                "frequency": f,
                "std_err": (f * (1.0 - f) / draws.max(1) as f64).sqrt(),
            })
        }
        AdviceAction::VonNeumann { bias: b, max_pairs } => {
            let p = bias(b)?;
            let draws = g.trials.unwrap_or(DEFAULT_TRIALS);
            let mut coin = ExactCoin::new(&p, g.seed, 0)?;
            let (mut ones, mut pairs) = (0u64, 0u64);
            for _ in 0..draws {
                let (bit, k) = von_neumann(&mut coin, *max_pairs)?;
                ones += bit as u64;
                pairs += k;
            }
            json!({
                "bias": p.to_string(),
                "draws": draws,
                "ones": ones,
                "frequency": ones as f64 / draws.max(1) as f64,
                "mean_pairs": pairs as f64 / draws.max(1) as f64,
            })
        }
    };
    Ok(Outcome::plain(result))
}

fn gallery(cli: &Cli, a: &crate::GalleryArgs) -> Result<Outcome> {
    if a.list {
        let list: Vec<Value> = GALLERY.iter().map(|(n, d)| json!({"name": n, "description": d})).collect();
        return Ok(Outcome::plain(json!({"gallery": list})));
    }
    let g = &cli.global;
    let num = Numeric::choose(&a.src, g.exact, g.float, g.precision_bits)?;
    let text = with_scalar!(num, |S, ctx| machine_to_json(&a.src.build::<S>(ctx)?));
    let machine: Value = serde_json::from_str(&text).map_err(|e| Error::Invariant(format!("machine JSON: {e}")))?;
    Ok(Outcome {
        result: json!({"machine": a.src.label(), "numeric": numeric_json(num), "automaton": machine}),
        precision: precision_of(num),
        curves: Vec::new(),
        axes: ("p", "a(p)"),
    })
}
