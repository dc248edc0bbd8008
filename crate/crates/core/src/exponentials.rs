//! Regressivity, cylinder transforms and the delta, nabla and combined
//! exponential functions.
//!
//! Exponentials are evaluated as signed real products over the scattered
//! points of the path, times `exp` of the ordinary integral of `p` over its
//! dense parts. Tails towards accumulation points are truncated once the
//! factors are indistinguishable from 1.

use std::cmp::Ordering;

use crate::calculus::MAX_TAIL_TERMS;
use crate::error::{Error, Result};
use crate::function::{Alpha, TsFunction};
use crate::quadrature::{integrate, QUAD_TOL};
use crate::timescale::{Piece, Point, TimeScale};

/// A factor with magnitude below this is treated as zero.
pub const ZERO_FACTOR_TOL: f64 = 1e-14;
const NEGLIGIBLE: f64 = 1.0 / (1u64 << 60) as f64;

/// `ξ_h(z) = ln(1 + zh) / h`, with `ξ_0(z) = z`.
pub fn cylinder(z: f64, h: f64) -> Result<f64> {
    if h < 0.0 || h.is_nan() {
        return Err(Error::LogDomain { z, h, arg: f64::NAN });
    }
    if h == 0.0 {
        return Ok(z);
    }
    let arg = 1.0 + z * h;
    if arg <= 0.0 {
        return Err(Error::LogDomain { z, h, arg });
    }
    Ok((z * h).ln_1p() / h)
}

/// `ξ̂_h(z) = -ln(1 - zh) / h`, with `ξ̂_0(z) = z`.
pub fn nu_cylinder(z: f64, h: f64) -> Result<f64> {
    if h < 0.0 || h.is_nan() {
        return Err(Error::LogDomain { z, h, arg: f64::NAN });
    }
    if h == 0.0 {
        return Ok(z);
    }
    let arg = 1.0 - z * h;
    if arg <= 0.0 {
        return Err(Error::LogDomain { z, h, arg });
    }
    Ok(-(-z * h).ln_1p() / h)
}

/// Window and sample counts for [`check_regressivity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBudget {
    pub lo: f64,
    pub hi: f64,
    /// Maximum number of scattered points examined.
    pub max_points: usize,
    /// Evenly spaced samples per dense piece.
    pub dense_samples: usize,
}

impl Default for SampleBudget {
    fn default() -> Self {
        SampleBudget { lo: -100.0, hi: 100.0, max_points: 10_000, dense_samples: 64 }
    }
}

/// Findings of [`check_regressivity`]; witnesses are the real values of
/// the offending points.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegressivityReport {
    pub regressive: bool,
    pub nu_regressive: bool,
    pub witnesses: Vec<f64>,
    pub nu_witnesses: Vec<f64>,
    pub points_checked: usize,
}

/// Checks `1 + μp ≠ 0` and `1 - νp ≠ 0` on every scattered point of the
/// window (up to the budget) and on samples of the dense parts.
pub fn check_regressivity(p: &TsFunction, ts: &TimeScale, budget: SampleBudget) -> RegressivityReport {
    let mut report = RegressivityReport::default();
    let lo = ts.ceil(budget.lo.max(ts.inf()));
    let hi = ts.floor(budget.hi.min(ts.sup()));
    let visit = |t: &Point, report: &mut RegressivityReport| {
        report.points_checked += 1;
        let v = p.eval(t);
        if !v.is_finite() || (1.0 + ts.mu(t) * v).abs() <= ZERO_FACTOR_TOL {
            report.witnesses.push(t.value());
        }
        if !v.is_finite() || (1.0 - ts.nu(t) * v).abs() <= ZERO_FACTOR_TOL {
            report.nu_witnesses.push(t.value());
        }
    };
    if let (Some(a), Some(b)) = (lo, hi) {
        for piece in ts.decompose(&a, &b) {
            if report.points_checked >= budget.max_points {
                break;
            }
            match piece {
                Piece::Dense { seg, lo, hi } => {
                    let n = budget.dense_samples.max(1);
                    for i in 1..n {
                        let x = lo + (hi - lo) * i as f64 / n as f64;
                        visit(&ts.dense_point(seg, x), &mut report);
                    }
                }
                Piece::Single(t) => visit(&t, &mut report),
                Piece::Run { seg, first, last } => {
                    for t in ts.run_points(seg, first, last) {
                        if report.points_checked >= budget.max_points {
                            break;
                        }
                        visit(&t, &mut report);
                    }
                }
                Piece::Tail { seg, start } => {
                    for t in ts.tail_points(seg, start) {
                        if report.points_checked >= budget.max_points || ts.mu(&t) == 0.0 {
                            break;
                        }
                        visit(&t, &mut report);
                    }
                }
            }
        }
    }
    report.regressive = report.witnesses.is_empty();
    report.nu_regressive = report.nu_witnesses.is_empty();
    report
}

/// A real exponential value together with the number of negative factors
/// that went into it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpValue {
    pub value: f64,
    pub sign_flips: u32,
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Delta,
    Nabla,
}

struct Accumulator {
    value: f64,
    flips: u32,
}

impl Accumulator {
    fn push(&mut self, factor: f64) {
        if factor < 0.0 {
            self.flips += 1;
        }
        self.value *= factor;
    }
}

/// Product factor at `s`, or `None` when `s` contributes nothing.
fn factor(p: &TsFunction, ts: &TimeScale, s: &Point, kind: Kind) -> Result<Option<f64>> {
    let h = match kind {
        Kind::Delta => ts.mu(s),
        Kind::Nabla => ts.nu(s),
    };
    if h == 0.0 {
        return Ok(None);
    }
    let v = p.checked(s)?;
    let f = match kind {
        Kind::Delta => 1.0 + h * v,
        Kind::Nabla => 1.0 - h * v,
    };
    if f.abs() <= ZERO_FACTOR_TOL {
        let kind = match kind {
            Kind::Delta => "regressive",
            Kind::Nabla => "nu-regressive",
        };
        return Err(Error::NotRegressive { at: s.value(), kind, factor: f });
    }
    Ok(Some(match kind {
        Kind::Delta => f,
        Kind::Nabla => 1.0 / f,
    }))
}

fn exp_forward(p: &TsFunction, ts: &TimeScale, a: &Point, b: &Point, kind: Kind) -> Result<ExpValue> {
    let mut acc = Accumulator { value: 1.0, flips: 0 };
    let mut log_dense = 0.0;
    // Δ collects factors over [a, b), ∇ over (a, b]
    let excluded = match kind {
        Kind::Delta => *b,
        Kind::Nabla => *a,
    };
    for piece in ts.decompose(a, b) {
        match piece {
            Piece::Dense { seg, lo, hi } => {
                log_dense += integrate(|x| p.eval_dense(ts, seg, x), lo, hi, QUAD_TOL)?;
            }
            Piece::Single(s) => {
                if s != excluded {
                    if let Some(f) = factor(p, ts, &s, kind)? {
                        acc.push(f);
                    }
                }
            }
            Piece::Run { seg, first, last } => {
                for s in ts.run_points(seg, first, last) {
                    if s != excluded {
                        if let Some(f) = factor(p, ts, &s, kind)? {
                            acc.push(f);
                        }
                    }
                }
            }
            Piece::Tail { seg, start } => {
                let mut small = 0;
                for (n, s) in ts.tail_points(seg, start).enumerate() {
                    if n >= MAX_TAIL_TERMS {
                        return Err(Error::FactorCap(MAX_TAIL_TERMS));
                    }
                    if s == excluded {
                        continue;
                    }
                    let Some(f) = factor(p, ts, &s, kind)? else { break };
                    acc.push(f);
                    if (f - 1.0).abs() <= NEGLIGIBLE {
                        small += 1;
                        if small >= 3 {
                            break;
                        }
                    } else {
                        small = 0;
                    }
                }
            }
        }
    }
    let value = acc.value * log_dense.exp();
    if !value.is_finite() {
        return Err(Error::NonFinite { at: b.value(), what: "exponential" });
    }
    Ok(ExpValue { value, sign_flips: acc.flips })
}

fn exp_oriented(p: &TsFunction, ts: &TimeScale, t: &Point, t0: &Point, kind: Kind) -> Result<ExpValue> {
    match ts.compare(t0, t) {
        Ordering::Equal => Ok(ExpValue { value: 1.0, sign_flips: 0 }),
        Ordering::Less => exp_forward(p, ts, t0, t, kind),
        Ordering::Greater => {
            let e = exp_forward(p, ts, t, t0, kind)?;
            Ok(ExpValue { value: 1.0 / e.value, sign_flips: e.sign_flips })
        }
    }
}

/// The delta exponential `e_p(t, t0)`.
pub fn delta_exp(p: &TsFunction, ts: &TimeScale, t: &Point, t0: &Point) -> Result<ExpValue> {
    exp_oriented(p, ts, t, t0, Kind::Delta)
}

/// The nabla exponential `ê_p(t, t0)`.
pub fn nabla_exp(p: &TsFunction, ts: &TimeScale, t: &Point, t0: &Point) -> Result<ExpValue> {
    exp_oriented(p, ts, t, t0, Kind::Nabla)
}

/// `t ↦ e_p(t, t0)` as a function on the time scale; failures evaluate to NaN.
pub fn delta_exp_function(p: &TsFunction, ts: &TimeScale, t0: &Point) -> TsFunction {
    let (p, ts, t0) = (p.clone(), ts.clone(), *t0);
    TsFunction::on_points(move |t| delta_exp(&p, &ts, t, &t0).map_or(f64::NAN, |e| e.value))
}

/// `t ↦ ê_p(t, t0)` as a function on the time scale; failures evaluate to NaN.
pub fn nabla_exp_function(p: &TsFunction, ts: &TimeScale, t0: &Point) -> TsFunction {
    let (p, ts, t0) = (p.clone(), ts.clone(), *t0);
    TsFunction::on_points(move |t| nabla_exp(&p, &ts, t, &t0).map_or(f64::NAN, |e| e.value))
}

/// The nabla coefficient `p^ρ / (1 + p^ρ ν)` whose nabla exponential equals `e_p`.
pub fn delta_to_nabla_param(p: &TsFunction, ts: &TimeScale) -> TsFunction {
    let (pc, tsc) = (p.clone(), ts.clone());
    let out = TsFunction::on_points(move |t| {
        let pr = pc.eval(&tsc.rho(t));
        pr / (1.0 + pr * tsc.nu(t))
    });
    carry_derivative(out, p)
}

/// The delta coefficient `q^σ / (1 - q^σ μ)` whose delta exponential equals `ê_q`.
pub fn nabla_to_delta_param(q: &TsFunction, ts: &TimeScale) -> TsFunction {
    let (qc, tsc) = (q.clone(), ts.clone());
    let out = TsFunction::on_points(move |t| {
        let qs = qc.eval(&tsc.sigma(t));
        qs / (1.0 - qs * tsc.mu(t))
    });
    carry_derivative(out, q)
}

// On dense points both conversions are the identity, so the dense values
// and the classical derivative carry over.
fn carry_derivative(mut out: TsFunction, src: &TsFunction) -> TsFunction {
    if src.has_dense_values() {
        let s = src.clone();
        out = out.with_dense_values(move |x| s.dense_value(x).expect("present"));
    }
    if src.has_derivative() {
        let s = src.clone();
        out = out.with_derivative(move |x| s.classical_derivative(x).expect("present"));
    }
    out
}

/// `e_p(ρ(t), t0)` via `e_p(t, t0) / (1 + p(ρ(t)) ν(t))`.
pub fn rho_shift_delta_exp(p: &TsFunction, ts: &TimeScale, t: &Point, t0: &Point) -> Result<f64> {
    let e = delta_exp(p, ts, t, t0)?.value;
    let denom = 1.0 + p.checked(&ts.rho(t))? * ts.nu(t);
    if denom.abs() <= ZERO_FACTOR_TOL {
        return Err(Error::NotRegressive { at: t.value(), kind: "regressive", factor: denom });
    }
    Ok(e / denom)
}

/// `ê_p(ρ(t), t0)` via `(1 - p(t) ν(t)) ê_p(t, t0)`.
pub fn rho_shift_nabla_exp(p: &TsFunction, ts: &TimeScale, t: &Point, t0: &Point) -> Result<f64> {
    let e = nabla_exp(p, ts, t, t0)?.value;
    Ok((1.0 - p.checked(t)? * ts.nu(t)) * e)
}

/// `α e_p(t, t0) + (1 - α) ê_p(t, t0)`.
#[allow(non_snake_case)]
pub fn combined_E(alpha: Alpha, p: &TsFunction, ts: &TimeScale, t: &Point, t0: &Point) -> Result<f64> {
    let a = alpha.value();
    if a == 1.0 {
        return Ok(delta_exp(p, ts, t, t0)?.value);
    }
    if a == 0.0 {
        return Ok(nabla_exp(p, ts, t, t0)?.value);
    }
    Ok(a * delta_exp(p, ts, t, t0)?.value + (1.0 - a) * nabla_exp(p, ts, t, t0)?.value)
}

/// `e_p(t, t0)^α ê_p(t, t0)^(1-α)`; both bases must be positive when
/// `α` is strictly between 0 and 1.
pub fn combined_e(alpha: Alpha, p: &TsFunction, ts: &TimeScale, t: &Point, t0: &Point) -> Result<f64> {
    let a = alpha.value();
    if a == 1.0 {
        return Ok(delta_exp(p, ts, t, t0)?.value);
    }
    if a == 0.0 {
        return Ok(nabla_exp(p, ts, t, t0)?.value);
    }
    let e = delta_exp(p, ts, t, t0)?.value;
    let eh = nabla_exp(p, ts, t, t0)?.value;
    for v in [e, eh] {
        if v <= 0.0 {
            return Err(Error::NegativeBase { at: t.value(), value: v });
        }
    }
    Ok((a * e.ln() + (1.0 - a) * eh.ln()).exp())
}

/// Closed-form diamond-alpha derivative of `e_p(·, t0)` at `t`:
/// `[α p + (1-α) p^ρ / (1 + ν p^ρ)] e_p`.
pub fn diamond_derivative_of_delta_exp(
    p: &TsFunction,
    ts: &TimeScale,
    t: &Point,
    t0: &Point,
    alpha: Alpha,
) -> Result<f64> {
    let a = alpha.value();
    let e = delta_exp(p, ts, t, t0)?.value;
    let mut coeff = a * p.checked(t)?;
    if a < 1.0 {
        let pr = p.checked(&ts.rho(t))?;
        let denom = 1.0 + ts.nu(t) * pr;
        if denom.abs() <= ZERO_FACTOR_TOL {
            return Err(Error::NotRegressive { at: t.value(), kind: "regressive", factor: denom });
        }
        coeff += (1.0 - a) * pr / denom;
    }
    Ok(coeff * e)
}

/// Closed-form diamond-alpha derivative of `ê_p(·, t0)` at `t`:
/// `[(1-α) p + α p^σ / (1 - μ p^σ)] ê_p`.
pub fn diamond_derivative_of_nabla_exp(
    p: &TsFunction,
    ts: &TimeScale,
    t: &Point,
    t0: &Point,
    alpha: Alpha,
) -> Result<f64> {
    let a = alpha.value();
    let e = nabla_exp(p, ts, t, t0)?.value;
    let mut coeff = (1.0 - a) * p.checked(t)?;
    if a > 0.0 {
        let ps = p.checked(&ts.sigma(t))?;
        let denom = 1.0 - ts.mu(t) * ps;
        if denom.abs() <= ZERO_FACTOR_TOL {
            return Err(Error::NotRegressive { at: t.value(), kind: "nu-regressive", factor: denom });
        }
        coeff += a * ps / denom;
    }
    Ok(coeff * e)
}
