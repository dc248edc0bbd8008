//! Text form of a time scale: segment clauses separated by `;`.
//!
//! | clause | meaning |
//! |---|---|
//! | `interval(a,b)` | the real interval `[a, b]`, ends may be `inf` |
//! | `grid(c,from,to)` | `{from, from + c, ...}` up to `to`; either end may be `inf` |
//! | `qgrid(q,side[,k])` | closure of `{±q^j : j <= k}`, `side` is `+` or `-` |
//! | `qsym(q)` | `{-q^j} ∪ {0} ∪ {q^j}` |
//!
//! Arguments are positional or `name=value` (`a`, `b`, `c`, `from`, `to`,
//! `q`, `side`, `k`). The output of `TimeScale`'s `Display` parses back to
//! the same set.

use thiserror::Error;
use tscalc::{Orientation, Segment, TimeScale};

/// Problems found while reading a clause list.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("clause {clause} `{text}`: {message}")]
    Syntax { clause: usize, text: String, message: String },
    #[error("clause {clause} `{text}`: {source}")]
    Segment { clause: usize, text: String, source: tscalc::Error },
    #[error("{0}")]
    TimeScale(tscalc::Error),
}

impl SpecError {
    /// Syntax problems are parse errors; everything else violates a
    /// time-scale invariant.
    pub fn is_syntax(&self) -> bool {
        matches!(self, SpecError::Syntax { .. })
    }
}

struct Clause<'a> {
    index: usize,
    text: &'a str,
    name: &'a str,
    args: Vec<(Option<&'a str>, &'a str)>,
}

impl<'a> Clause<'a> {
    fn syntax(&self, message: impl Into<String>) -> SpecError {
        SpecError::Syntax { clause: self.index, text: self.text.to_string(), message: message.into() }
    }

    /// Binds arguments to `names`, positional first, then by name.
    fn bind(&self, names: &[&str], required: usize) -> Result<Vec<Option<&'a str>>, SpecError> {
        let mut out: Vec<Option<&str>> = vec![None; names.len()];
        let mut next = 0;
        let mut seen_named = false;
        for (key, value) in &self.args {
            let slot = match key {
                None => {
                    if seen_named {
                        return Err(self.syntax("positional argument after a named one"));
                    }
                    if next >= names.len() {
                        return Err(self.syntax(format!("too many arguments, expected at most {}", names.len())));
                    }
                    next += 1;
                    next - 1
                }
                Some(k) => {
                    seen_named = true;
                    names.iter().position(|n| n == k).ok_or_else(|| {
                        self.syntax(format!("unknown argument `{k}`, expected one of {}", names.join(", ")))
                    })?
                }
            };
            if out[slot].is_some() {
                return Err(self.syntax(format!("argument `{}` given twice", names[slot])));
            }
            out[slot] = Some(value);
        }
        if let Some(missing) = (0..required).find(|&i| out[i].is_none()) {
            return Err(self.syntax(format!("missing argument `{}`", names[missing])));
        }
        Ok(out)
    }

    fn number(&self, name: &str, text: &str) -> Result<f64, SpecError> {
        parse_number(text).ok_or_else(|| self.syntax(format!("argument `{name}`: `{text}` is not a number")))
    }

    fn segment(&self, seg: tscalc::Result<Segment>) -> Result<Segment, SpecError> {
        seg.map_err(|source| SpecError::Segment { clause: self.index, text: self.text.to_string(), source })
    }
}

/// Reads a real number, accepting `inf`, `+inf` and `-inf`.
pub fn parse_number(text: &str) -> Option<f64> {
    match text.trim() {
        "inf" | "+inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        s => s.parse::<f64>().ok().filter(|x| x.is_finite()),
    }
}

fn split_clause(index: usize, raw: &str) -> Result<Clause<'_>, SpecError> {
    let text = raw.trim();
    let err = |message: &str| SpecError::Syntax { clause: index, text: text.to_string(), message: message.into() };
    let open = text.find('(').ok_or_else(|| err("expected `name(arguments)`"))?;
    if !text.ends_with(')') {
        return Err(err("missing closing `)`"));
    }
    let name = text[..open].trim();
    let inner = &text[open + 1..text.len() - 1];
    if inner.contains(['(', ')']) {
        return Err(err("nested parentheses are not allowed"));
    }
    let mut args = Vec::new();
    if !inner.trim().is_empty() {
        for part in inner.split(',') {
            let part = part.trim();
            if part.is_empty() {
                return Err(err("empty argument"));
            }
            match part.split_once('=') {
                Some((k, v)) => args.push((Some(k.trim()), v.trim())),
                None => args.push((None, part)),
            }
        }
    }
    Ok(Clause { index, text, name, args })
}

fn clause_segments(c: &Clause<'_>) -> Result<Vec<Segment>, SpecError> {
    match c.name {
        "interval" => {
            let a = c.bind(&["a", "b"], 2)?;
            let lo = c.number("a", a[0].unwrap())?;
            let hi = c.number("b", a[1].unwrap())?;
            Ok(vec![c.segment(Segment::interval(lo, hi))?])
        }
        "grid" => {
            let a = c.bind(&["c", "from", "to"], 1)?;
            let step = c.number("c", a[0].unwrap())?;
            let from = a[1].map(|s| c.number("from", s)).transpose()?.unwrap_or(f64::NEG_INFINITY);
            let to = a[2].map(|s| c.number("to", s)).transpose()?.unwrap_or(f64::INFINITY);
            if !(step.is_finite() && step > 0.0) {
                return Err(c.syntax(format!("step must be a positive number, got {step}")));
            }
            if from == f64::INFINITY || to == f64::NEG_INFINITY || from >= to {
                return Err(c.syntax(format!("need from < to, got {from} and {to}")));
            }
            let seg = match (from.is_finite(), to.is_finite()) {
                (false, false) => Segment::uniform(step, 0.0, None, None),
                (true, false) => Segment::uniform(step, from, Some(0), None),
                (false, true) => Segment::uniform(step, to, None, Some(0)),
                (true, true) => {
                    let n = (to - from) / step;
                    let k = n.round();
                    if (n - k).abs() > 1e-9 * n.abs().max(1.0) {
                        return Err(c.syntax(format!("to - from = {} is not a multiple of the step {step}", to - from)));
                    }
                    Segment::uniform(step, from, Some(0), Some(k as i64))
                }
            };
            Ok(vec![c.segment(seg)?])
        }
        "qgrid" => {
            let a = c.bind(&["q", "side", "k"], 2)?;
            let q = c.number("q", a[0].unwrap())?;
            let orientation = match a[1].unwrap() {
                "+" => Orientation::Positive,
                "-" => Orientation::Negative,
                other => return Err(c.syntax(format!("side must be `+` or `-`, got `{other}`"))),
            };
            let far = a[2]
                .map(|s| s.parse::<i64>().map_err(|_| c.syntax(format!("k must be an integer, got `{s}`"))))
                .transpose()?;
            Ok(vec![c.segment(Segment::geometric(q, orientation, far))?])
        }
        "qsym" => {
            let a = c.bind(&["q"], 1)?;
            let q = c.number("q", a[0].unwrap())?;
            let negative = c.segment(Segment::geometric(q, Orientation::Negative, None))?;
            let positive = c.segment(Segment::geometric(q, Orientation::Positive, None))?;
            Ok(vec![negative, positive])
        }
        other => Err(c.syntax(format!("unknown clause `{other}`, expected interval, grid, qgrid or qsym"))),
    }
}

/// Parses a `;`-separated clause list into a validated time scale.
pub fn parse_timescale(text: &str) -> Result<TimeScale, SpecError> {
    let mut segments = Vec::new();
    let mut count = 0;
    for raw in text.split(';') {
        if raw.trim().is_empty() {
            continue;
        }
        count += 1;
        let clause = split_clause(count, raw)?;
        segments.extend(clause_segments(&clause)?);
    }
    if count == 0 {
        return Err(SpecError::Syntax { clause: 0, text: text.to_string(), message: "no clauses".into() });
    }
    TimeScale::new(segments).map_err(SpecError::TimeScale)
}
