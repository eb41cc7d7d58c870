//! JSON exchange format.
//!
//! ```json
//! {"dim": 3, "mode": "halting", "accept": 1, "reject": 2, "accepting_set": [],
//!  "initial": [[["1","0"], ["0","0"], ...], ...],
//!  "e0": {"kraus": [matrix, ...], "weights": ["1/2", ...]},
//!  "e1": {...}}
//! ```
//!
//! Complex entries are `[re, im]` pairs. Each part is either a string holding
//! an exact rational (`"3/10"`, `"0.25"`, `"1e-4"`) or a JSON number. The
//! optional `weights` list scales Kraus operator `j` by `sqrt(weights[j])`.
//! Time-dependent machines add `"schedule": {"pairs": [{"e0":..,"e1":..}],
//! "index": [slot per step]}`; `e0`/`e1` then repeat the first pair.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::automaton::model::{CoinAutomaton, CoinMachine, Mode, TimeDependentAutomaton};
use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, KrausOp, Matrix, Superoperator};
use crate::ratio;
use crate::scalar::Scalar;

type JsonMatrix = Vec<Vec<[Value; 2]>>;

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ChannelFile {
    kraus: Vec<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<Value>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct PairFile {
    e0: ChannelFile,
    e1: ChannelFile,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ScheduleFile {
    pairs: Vec<PairFile>,
    index: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct AutomatonFile {
    dim: usize,
    mode: String,
    accept: usize,
    reject: Option<usize>,
    #[serde(default)]
    accepting_set: Vec<usize>,
    initial: JsonMatrix,
    e0: ChannelFile,
    e1: ChannelFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schedule: Option<ScheduleFile>,
}

/// Either kind of machine, as loaded from a file.
#[derive(Clone, Debug)]
pub enum Machine<S: Scalar> {
    Static(CoinAutomaton<S>),
    Timed(TimeDependentAutomaton<S>),
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn value_to_rational(v: &Value) -> Result<BigRational> {
    match v {
        Value::String(s) => ratio::parse(s),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigRational::from_integer(BigInt::from(i)))
            } else {
                let f = n.as_f64().ok_or_else(|| bad(format!("unusable number {n}")))?;
                BigRational::from_float(f).ok_or_else(|| bad(format!("non-finite number {n}")))
            }
        }
        other => Err(bad(format!("expected a number or rational string, got {other}"))),
    }
}

fn entry<S: Scalar>(pair: &[Value; 2], ctx: S::Ctx) -> Result<S> {
    Ok(S::from_parts(&value_to_rational(&pair[0])?, &value_to_rational(&pair[1])?, ctx))
}

fn matrix_from<S: Scalar>(m: &JsonMatrix, dim: usize, ctx: S::Ctx) -> Result<Matrix<S>> {
    if m.len() != dim || m.iter().any(|r| r.len() != dim) {
        return Err(Error::Dimension(format!("expected a {dim}x{dim} matrix")));
    }
    let rows = m
        .iter()
        .map(|r| r.iter().map(|e| entry::<S>(e, ctx)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(rows, ctx)
}

fn matrix_to<S: Scalar>(m: &Matrix<S>) -> JsonMatrix {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| [Value::String(m[(i, j)].render_re()), Value::String(m[(i, j)].render_im())])
                .collect()
        })
        .collect()
}

fn channel_from<S: Scalar>(c: &ChannelFile, dim: usize, ctx: S::Ctx) -> Result<Superoperator<S>> {
    let weights: Vec<S> = match &c.weights {
        None => vec![S::one(ctx); c.kraus.len()],
        Some(w) if w.len() == c.kraus.len() => w
            .iter()
            .map(|v| value_to_rational(v).map(|r| S::from_real(&r, ctx)))
            .collect::<Result<_>>()?,
        Some(_) => return Err(bad("weights and kraus lists differ in length")),
    };
    let ops = c
        .kraus
        .iter()
        .zip(weights)
        .map(|(m, w)| Ok(KrausOp::new(w, matrix_from(m, dim, ctx)?)))
        .collect::<Result<Vec<_>>>()?;
    Superoperator::new(dim, ops)
}

fn channel_to<S: Scalar>(e: &Superoperator<S>) -> ChannelFile {
    let one = S::one(e.ctx());
    let weighted = e.ops().iter().any(|k| k.weight != one);
    ChannelFile {
        kraus: e.ops().iter().map(|k| matrix_to(&k.op)).collect(),
        weights: weighted.then(|| e.ops().iter().map(|k| Value::String(k.weight.render_re())).collect()),
    }
}

fn initial_from<S: Scalar>(f: &AutomatonFile, ctx: S::Ctx) -> Result<DensityMatrix<S>> {
    DensityMatrix::new(matrix_from(&f.initial, f.dim, ctx)?, S::default_tol(ctx))
}

/// Reads either machine kind.
pub fn machine_from_json<S: Scalar>(text: &str, ctx: S::Ctx) -> Result<Machine<S>> {
    let f: AutomatonFile = serde_json::from_str(text).map_err(|e| bad(format!("automaton JSON: {e}")))?;
    let initial = initial_from(&f, ctx)?;
    match &f.schedule {
        None => {
            let e0 = channel_from(&f.e0, f.dim, ctx)?;
            let e1 = channel_from(&f.e1, f.dim, ctx)?;
            let mode = Mode::parse(&f.mode)?;
            Ok(Machine::Static(CoinAutomaton::new(
                e0,
                e1,
                initial,
                f.accept,
                f.reject,
                mode,
                f.accepting_set.clone(),
            )?))
        }
        Some(s) => {
            let pairs = s
                .pairs
                .iter()
                .map(|p| Ok((channel_from(&p.e0, f.dim, ctx)?, channel_from(&p.e1, f.dim, ctx)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(Machine::Timed(TimeDependentAutomaton::new(
                pairs,
                s.index.clone(),
                initial,
                f.accept,
                f.reject,
            )?))
        }
    }
}

pub fn automaton_from_json<S: Scalar>(text: &str, ctx: S::Ctx) -> Result<CoinAutomaton<S>> {
    match machine_from_json(text, ctx)? {
        Machine::Static(m) => Ok(m),
        Machine::Timed(_) => Err(bad("expected a time-independent automaton")),
    }
}

pub fn automaton_to_json<S: Scalar>(m: &CoinAutomaton<S>) -> String {
    let f = AutomatonFile {
        dim: m.dim(),
        mode: m.mode().as_str().into(),
        accept: m.accept(),
        reject: m.reject(),
        accepting_set: m.accepting_set().to_vec(),
        initial: matrix_to(m.initial().matrix()),
        e0: channel_to(m.e0()),
        e1: channel_to(m.e1()),
        schedule: None,
    };
    serde_json::to_string_pretty(&f).expect("serializable")
}

pub fn timed_to_json<S: Scalar>(m: &TimeDependentAutomaton<S>) -> String {
    let pairs: Vec<PairFile> = m
        .pairs()
        .iter()
        .map(|(a, b)| PairFile {
            e0: channel_to(a),
            e1: channel_to(b),
        })
        .collect();
    let f = AutomatonFile {
        dim: m.dim(),
        mode: if m.reject().is_some() { "halting" } else { "one_sided" }.into(),
        accept: m.accept(),
        reject: m.reject(),
        accepting_set: Vec::new(),
        initial: matrix_to(m.initial().matrix()),
        e0: pairs[0].e0.clone(),
        e1: pairs[0].e1.clone(),
        schedule: Some(ScheduleFile {
            pairs,
            index: m.schedule().to_vec(),
        }),
    };
    serde_json::to_string_pretty(&f).expect("serializable")
}

pub fn machine_to_json<S: Scalar>(m: &Machine<S>) -> String {
    match m {
        Machine::Static(a) => automaton_to_json(a),
        Machine::Timed(t) => timed_to_json(t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{hc_walk, quantum_distinguisher, run_of_heads, single_flip};
    use crate::ratio::q;
    use crate::scalar::{Exact, Mp};

    fn same_automaton<S: Scalar>(a: &CoinAutomaton<S>, b: &CoinAutomaton<S>) {
        assert_eq!(a.e0(), b.e0());
        assert_eq!(a.e1(), b.e1());
        assert_eq!(a.initial(), b.initial());
        assert_eq!((a.accept(), a.reject(), a.mode()), (b.accept(), b.reject(), b.mode()));
        assert_eq!(a.accepting_set(), b.accepting_set());
    }

    #[test]
    fn exact_round_trip_is_bit_exact() {
        for m in [single_flip::<Exact>(()).unwrap(), hc_walk(&q(1, 3), &q(1, 10), 2, ()).unwrap()] {
            let text = automaton_to_json(&m);
            same_automaton(&m, &automaton_from_json::<Exact>(&text, ()).unwrap());
        }
    }

    #[test]
    fn float_round_trip_is_bit_exact() {
        let m = quantum_distinguisher::<Mp>(&q(1, 2), &q(1, 10), 10_000, 7_500, 160).unwrap();
        let text = automaton_to_json(&m);
        same_automaton(&m, &automaton_from_json::<Mp>(&text, 160).unwrap());
    }

    #[test]
    fn schedule_round_trip() {
        let m = run_of_heads::<Exact>(&q(1, 2), ()).unwrap();
        let text = timed_to_json(&m);
        match machine_from_json::<Exact>(&text, ()).unwrap() {
            Machine::Timed(back) => {
                assert_eq!(back.schedule(), m.schedule());
                assert_eq!(back.pairs(), m.pairs());
            }
            Machine::Static(_) => panic!("schedule lost"),
        }
    }

    #[test]
    fn numbers_and_strings_both_parse() {
        let text = r#"{"dim": 2, "mode": "one_sided", "accept": 1, "reject": null,
            "initial": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]],
            "e0": {"kraus": [[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]]},
            "e1": {"kraus": [[[["0", "0"], ["0", "0"]], [["1", "0"], ["0", "0"]]],
                             [[["0", "0"], ["0", "0"]], [["0", "0"], ["1", "0"]]]]}}"#;
        let m = automaton_from_json::<Exact>(text, ()).unwrap();
        assert_eq!(m.dim(), 2);
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(automaton_from_json::<Exact>("{}", ()).is_err());
        let not_tp = r#"{"dim": 1, "mode": "one_sided", "accept": 0, "reject": null,
            "initial": [[[1, 0]]], "e0": {"kraus": [[[["1/2", 0]]]]}, "e1": {"kraus": [[[[1, 0]]]]}}"#;
        assert!(automaton_from_json::<Exact>(not_tp, ()).is_err());
    }
}
