//! Job specifications: raw `key=value` settings from flags or a spec file,
//! and their validated form.
//!
//! Keys: `cmd`, `ts`, `alpha`, `p`, `f`, `t0`, `y0`, `yrho`, `targets`,
//! `tol`, `out`. Spec files hold one `key=value` per line; `#` starts a
//! comment. Flags override file values.
//!
//! Targets are written as
//! * `a,b,c`: the listed points;
//! * `a..b`: `a, σ(a), σ(σ(a)), ...` up to `b`, all scattered;
//! * `a..b:n`: `n` evenly spaced reals in `[a, b]`, each moved up to the
//!   nearest point of the time scale.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use tscalc::solver::DEFAULT_MAX_FACTORS;
use tscalc::{Alpha, Point, TimeScale};

use crate::expr::{parse_expr, Expr};
use crate::tsspec::{parse_number, parse_timescale};
use crate::CliError;

/// Environment variable overriding the infinite-product factor cap.
pub const MAX_FACTORS_ENV: &str = "TSCALC_MAX_FACTORS";

/// Number of σ-steps taken from `t0` when no targets are given.
pub const DEFAULT_STEPS: usize = 10;

/// Largest number of target points a range may produce.
pub const MAX_TARGETS: usize = 100_000;

/// The operations the front end can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Partition,
    EvalExp,
    Solve,
    Verify,
    RegressCheck,
}

impl Command {
    pub const ALL: [Command; 5] =
        [Command::Partition, Command::EvalExp, Command::Solve, Command::Verify, Command::RegressCheck];

    pub fn name(self) -> &'static str {
        match self {
            Command::Partition => "partition",
            Command::EvalExp => "eval-exp",
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::RegressCheck => "regress-check",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
            CliError::parse("command", format!("unknown command `{s}`, expected one of {}", names.join(", ")))
        })
    }
}

/// Unvalidated settings, as written by the user.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JobSpec {
    pub cmd: Option<String>,
    pub ts: Option<String>,
    pub alpha: Option<String>,
    pub p: Option<String>,
    pub f: Option<String>,
    pub t0: Option<String>,
    pub y0: Option<String>,
    pub yrho: Option<String>,
    pub targets: Option<String>,
    pub tol: Option<String>,
    pub out: Option<String>,
}

impl JobSpec {
    fn slot(&mut self, key: &str) -> Option<&mut Option<String>> {
        Some(match key {
            "cmd" => &mut self.cmd,
            "ts" => &mut self.ts,
            "alpha" => &mut self.alpha,
            "p" => &mut self.p,
            "f" => &mut self.f,
            "t0" => &mut self.t0,
            "y0" => &mut self.y0,
            "yrho" => &mut self.yrho,
            "targets" => &mut self.targets,
            "tol" => &mut self.tol,
            "out" => &mut self.out,
            _ => return None,
        })
    }

    /// Reads the `key=value` spec-file format.
    pub fn parse_file(text: &str) -> Result<JobSpec, CliError> {
        let mut spec = JobSpec::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let what = format!("spec line {}", n + 1);
            let (key, value) =
                line.split_once('=').ok_or_else(|| CliError::parse(&what, format!("expected key=value, got `{line}`")))?;
            let key = key.trim();
            let slot = spec.slot(key).ok_or_else(|| CliError::parse(&what, format!("unknown key `{key}`")))?;
            if slot.is_some() {
                return Err(CliError::parse(&what, format!("key `{key}` given twice")));
            }
            *slot = Some(value.trim().to_string());
        }
        Ok(spec)
    }

    /// `self` with every value set in `over` replaced.
    pub fn overridden_by(mut self, over: &JobSpec) -> JobSpec {
        let keys = ["cmd", "ts", "alpha", "p", "f", "t0", "y0", "yrho", "targets", "tol", "out"];
        let mut over = over.clone();
        for key in keys {
            if let Some(v) = over.slot(key).and_then(|s| s.take()) {
                *self.slot(key).expect("known key") = Some(v);
            }
        }
        self
    }

    /// Validates the settings against the time scale and the command.
    pub fn resolve(&self) -> Result<Job, CliError> {
        let command: Command = self
            .cmd
            .as_deref()
            .ok_or_else(|| CliError::parse("command", "no command given"))?
            .parse()?;
        let ts_text = self.ts.as_deref().ok_or_else(|| CliError::parse("--ts", "no time scale given"))?;
        let ts = parse_timescale(ts_text)?;
        let alpha = self
            .alpha
            .as_deref()
            .map(|s| Alpha::new(number("--alpha", s)?).map_err(CliError::from))
            .transpose()?;
        let p = expression("--p", self.p.as_deref().unwrap_or("0"))?;
        let f = self.f.as_deref().map(|s| expression("--f", s)).transpose()?;
        let t0 = match self.t0.as_deref() {
            Some(s) => ts.point(number("--t0", s)?)?,
            None => default_anchor(&ts)?,
        };
        let y0 = self.y0.as_deref().map(|s| number("--y0", s)).transpose()?.unwrap_or(1.0);
        let y_rho = self.yrho.as_deref().map(|s| number("--yrho", s)).transpose()?;
        let targets = match self.targets.as_deref() {
            Some(s) => parse_targets(&ts, s)?,
            None => sigma_steps(&ts, &t0, DEFAULT_STEPS),
        };
        let tol = self.tol.as_deref().map(|s| number("--tol", s)).transpose()?;
        if let Some(t) = tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Validation(format!("--tol must be positive, got {t}")));
            }
        }
        if command == Command::Solve && alpha.is_none() {
            return Err(CliError::Validation("solve needs --alpha".into()));
        }
        Ok(Job {
            command,
            ts,
            alpha,
            p,
            f,
            t0,
            y0,
            y_rho,
            targets,
            tol,
            out: self.out.as_ref().map(PathBuf::from),
            max_factors: max_factors_from_env()?,
        })
    }
}

/// Validated job.
#[derive(Debug, Clone)]
pub struct Job {
    pub command: Command,
    pub ts: TimeScale,
    pub alpha: Option<Alpha>,
    pub p: Expr,
    pub f: Option<Expr>,
    pub t0: Point,
    pub y0: f64,
    pub y_rho: Option<f64>,
    /// Ascending and free of duplicates.
    pub targets: Vec<Point>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub max_factors: usize,
}

fn number(what: &str, s: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| CliError::parse(what, format!("`{s}` is not a finite number")))
}

fn expression(what: &str, s: &str) -> Result<Expr, CliError> {
    parse_expr(s).map_err(|e| CliError::parse(what, format!("`{s}` {e}")))
}

fn max_factors_from_env() -> Result<usize, CliError> {
    match std::env::var(MAX_FACTORS_ENV) {
        Err(_) => Ok(DEFAULT_MAX_FACTORS),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::parse(MAX_FACTORS_ENV, format!("`{v}` is not a positive integer"))),
    }
}

/// `0` when it belongs to the time scale, otherwise the least point at or
/// above `0`, otherwise the largest point.
fn default_anchor(ts: &TimeScale) -> Result<Point, CliError> {
    ts.point(0.0)
        .ok()
        .or_else(|| ts.ceil(0.0))
        .or_else(|| ts.max_point())
        .ok_or_else(|| CliError::Validation("time scale has no point to anchor at; pass --t0".into()))
}

/// `from` followed by up to `steps` forward jumps, stopping early at a
/// right-dense point.
pub fn sigma_steps(ts: &TimeScale, from: &Point, steps: usize) -> Vec<Point> {
    let mut out = vec![*from];
    for _ in 0..steps {
        let last = *out.last().expect("non-empty");
        let next = ts.sigma(&last);
        if next == last {
            break;
        }
        out.push(next);
    }
    out
}

/// Parses a target list or range; the result is sorted and deduplicated.
pub fn parse_targets(ts: &TimeScale, text: &str) -> Result<Vec<Point>, CliError> {
    let text = text.trim();
    let mut points = match text.split_once("..") {
        None => text
            .split(',')
            .map(|s| {
                let x = parse_number(s).ok_or_else(|| CliError::parse("--targets", format!("`{s}` is not a number")))?;
                ts.point(x).map_err(CliError::from)
            })
            .collect::<Result<Vec<_>, _>>()?,
        Some((a, rest)) => {
            let (b, count) = match rest.split_once(':') {
                Some((b, n)) => {
                    let n = n.trim().parse::<usize>().ok().filter(|&n| (2..=MAX_TARGETS).contains(&n)).ok_or_else(|| {
                        CliError::parse("--targets", format!("sample count `{n}` must be an integer in 2..={MAX_TARGETS}"))
                    })?;
                    (b, Some(n))
                }
                None => (rest, None),
            };
            let lo = number("--targets", a)?;
            let hi = number("--targets", b)?;
            if lo > hi {
                return Err(CliError::Validation(format!("target range {lo}..{hi} is empty")));
            }
            match count {
                Some(n) => sampled_range(ts, lo, hi, n),
                None => sigma_range(ts, lo, hi)?,
            }
        }
    };
    points.sort_by(|a, b| ts.compare(a, b));
    points.dedup();
    Ok(points)
}

fn sampled_range(ts: &TimeScale, lo: f64, hi: f64, n: usize) -> Vec<Point> {
    (0..n)
        .filter_map(|i| {
            let x = if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
            ts.ceil(x).filter(|p| p.value() <= hi)
        })
        .collect()
}

fn sigma_range(ts: &TimeScale, lo: f64, hi: f64) -> Result<Vec<Point>, CliError> {
    let start = ts.point(lo)?;
    let end = ts.point(hi)?;
    let mut out = vec![start];
    let mut t = start;
    while ts.compare(&t, &end).is_lt() {
        let next = ts.sigma(&t);
        if next == t {
            return Err(CliError::Validation(format!(
                "range {lo}..{hi} meets the right-dense point {} before reaching {hi}; use {lo}..{hi}:n to sample it",
                t.value()
            )));
        }
        if out.len() >= MAX_TARGETS {
            return Err(CliError::Validation(format!("range {lo}..{hi} has more than {MAX_TARGETS} points")));
        }
        out.push(next);
        t = next;
    }
    Ok(out)
}
