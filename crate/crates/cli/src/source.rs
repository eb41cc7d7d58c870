//! Where a machine comes from: a JSON file or a gallery constructor.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use coinlab::automaton::{machine_from_json, CoinAutomaton, Machine};
use coinlab::constructions as gal;
use coinlab::fixed_point::Analyzable;
use coinlab::ratio;
use coinlab::{Error, Exact, Result};

pub const GALLERY: &[(&str, &str)] = &[
    ("first-heads", "accepts on the first heads"),
    ("single-flip", "accepts iff the first flip is heads"),
    ("identity", "never moves; limit-mode reference"),
    ("two-cycle", "deterministic swap in limit mode"),
    ("hc-walk", "±K walk tuned to p (needs --build-p, --k; --eps optional)"),
    ("zero-vs-eps", "halts and rejects with probability eps each step (needs --eps)"),
    ("quantum", "rotation distinguisher (needs --build-p, --eps, --a, --b)"),
    ("run-of-heads", "time-dependent run detector (needs --eps with 1/eps integer)"),
];

#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct SourceArgs {
    /// Gallery machine name (see `coinlab gallery --list`).
    #[arg(long, conflicts_with = "file")]
    pub gallery: Option<String>,
    /// Machine JSON file.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Bias the construction is tuned to.
    #[arg(long = "build-p")]
    pub build_p: Option<String>,
    #[arg(long)]
    pub eps: Option<String>,
    /// Walk half-width.
    #[arg(long)]
    pub k: Option<usize>,
    /// Rotation divisor A.
    #[arg(long)]
    pub a: Option<u64>,
    /// Halting divisor B.
    #[arg(long)]
    pub b: Option<u64>,
    /// Odd number of sequential copies for majority amplification.
    #[arg(long)]
    pub copies: Option<usize>,
}

impl SourceArgs {
    /// `name:key=value,...`, e.g. `hc-walk:p=3/10,eps=1/10,k=2`.
    pub fn parse_member(spec: &str) -> Result<Self> {
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let mut out = SourceArgs {
            gallery: Some(name.trim().to_string()),
            ..Default::default()
        };
        let mut kv = BTreeMap::new();
        for part in rest.split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("expected key=value in '{part}'")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let int = |v: &str| v.parse::<u64>().map_err(|_| Error::InvalidInput(format!("'{v}' is not a nonnegative integer")));
        for (k, v) in kv {
            match k.as_str() {
                "p" => out.build_p = Some(v),
                "eps" => out.eps = Some(v),
                "k" => out.k = Some(int(&v)? as usize),
                "a" => out.a = Some(int(&v)?),
                "b" => out.b = Some(int(&v)?),
                "copies" => out.copies = Some(int(&v)? as usize),
                _ => return Err(Error::InvalidInput(format!("unknown member parameter '{k}'"))),
            }
        }
        Ok(out)
    }

    pub fn label(&self) -> String {
        if let Some(f) = &self.file {
            return f.display().to_string();
        }
        let mut s = self.gallery.clone().unwrap_or_default();
        let mut parts = Vec::new();
        if let Some(p) = &self.build_p {
            parts.push(format!("p={p}"));
        }
        if let Some(e) = &self.eps {
            parts.push(format!("eps={e}"));
        }
        for (name, v) in [("k", self.k.map(|x| x as u64)), ("a", self.a), ("b", self.b), ("copies", self.copies.map(|x| x as u64))] {
            if let Some(v) = v {
                parts.push(format!("{name}={v}"));
            }
        }
        if !parts.is_empty() {
            s.push(':');
            s.push_str(&parts.join(","));
        }
        s
    }

    fn need_rational(&self, v: &Option<String>, what: &str) -> Result<BigRational> {
        let name = self.gallery.as_deref().unwrap_or("");
        ratio::parse(v.as_deref().ok_or_else(|| Error::InvalidInput(format!("{name} needs --{what}")))?)
    }

    fn need<T: Copy>(&self, v: Option<T>, what: &str) -> Result<T> {
        let name = self.gallery.as_deref().unwrap_or("");
        v.ok_or_else(|| Error::InvalidInput(format!("{name} needs --{what}")))
    }

    /// Precision the construction itself asks for, if any.
    pub fn min_precision(&self) -> Result<Option<u32>> {
        if self.gallery.as_deref() == Some("quantum") {
            let eps = self.need_rational(&self.eps, "eps")?;
            return Ok(Some(gal::quantum_min_precision(&eps, self.need(self.b, "b")?)));
        }
        Ok(None)
    }

    /// Whether exact arithmetic can represent the machine.
    pub fn exact_capable(&self) -> bool {
        match self.gallery.as_deref() {
            Some("quantum") => self.eps.as_deref().and_then(|e| ratio::parse(e).ok()).is_some_and(|e| e.is_zero()),
            Some(_) => true,
            None => self.build::<Exact>(()).is_ok(),
        }
    }

    pub fn build<S: Analyzable>(&self, ctx: S::Ctx) -> Result<Machine<S>> {
        if let Some(path) = &self.file {
            let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
            return machine_from_json(&text, ctx);
        }
        let name = self
            .gallery
            .as_deref()
            .ok_or_else(|| Error::InvalidInput("give --gallery NAME or --file PATH".into()))?;
        let m: Machine<S> = match name {
            "first-heads" => Machine::Static(gal::first_heads(ctx)?),
            "single-flip" => Machine::Static(gal::single_flip(ctx)?),
            "identity" => Machine::Static(gal::identity_automaton(ctx)?),
            "two-cycle" => Machine::Static(gal::two_cycle(ctx)?),
            "hc-walk" => {
                let p = self.need_rational(&self.build_p, "build-p")?;
                let eps = match &self.eps {
                    Some(e) => ratio::parse(e)?,
                    None => ratio::q(1, 10),
                };
                Machine::Static(gal::hc_walk(&p, &eps, self.need(self.k, "k")?, ctx)?)
            }
            "zero-vs-eps" => Machine::Static(gal::zero_vs_eps(&self.need_rational(&self.eps, "eps")?, ctx)?),
            "quantum" => Machine::Static(gal::quantum_distinguisher(
                &self.need_rational(&self.build_p, "build-p")?,
                &self.need_rational(&self.eps, "eps")?,
                self.need(self.a, "a")?,
                self.need(self.b, "b")?,
                ctx,
            )?),
            "run-of-heads" => Machine::Timed(gal::run_of_heads(&self.need_rational(&self.eps, "eps")?, ctx)?),
            other => return Err(Error::InvalidInput(format!("unknown gallery machine '{other}'"))),
        };
        match (self.copies, m) {
            (None | Some(1), m) => Ok(m),
            (Some(c), Machine::Static(base)) => Ok(Machine::Static(gal::amplified(&base, c)?)),
            (Some(_), Machine::Timed(_)) => Err(Error::InvalidInput("time-dependent machines cannot be amplified".into())),
        }
    }

    pub fn build_static<S: Analyzable>(&self, ctx: S::Ctx) -> Result<CoinAutomaton<S>> {
        match self.build(ctx)? {
            Machine::Static(m) => Ok(m),
            Machine::Timed(_) => Err(Error::InvalidInput(format!("{} is time-dependent; this command needs a time-homogeneous machine", self.label()))),
        }
    }
}

/// Numeric mode chosen for a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "bits")]
pub enum Numeric {
    Exact,
    Float(u32),
}

impl Numeric {
    pub fn choose(src: &SourceArgs, exact: bool, float: bool, bits: u32) -> Result<Self> {
        if exact && !src.exact_capable() {
            return Err(Error::Unsupported(format!("{} cannot be represented exactly", src.label())));
        }
        if exact || (!float && src.exact_capable()) {
            return Ok(Numeric::Exact);
        }
        Ok(Numeric::Float(bits.max(src.min_precision()?.unwrap_or(0))))
    }
}

/// Runs `$body` with `$S` bound to the scalar type and `$ctx` to its context.
#[macro_export]
macro_rules! with_scalar {
    ($num:expr, |$S:ident, $ctx:ident| $body:expr) => {
        match $num {
            $crate::source::Numeric::Exact => {
                type $S = coinlab::Exact;
                let $ctx = ();
                $body
            }
            $crate::source::Numeric::Float(bits) => {
                type $S = coinlab::Mp;
                let $ctx: u32 = bits;
                $body
            }
        }
    };
}
