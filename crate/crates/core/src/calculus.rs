//! Delta, nabla and diamond-alpha derivatives and integrals.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::function::{Alpha, TsFunction};
use crate::quadrature::{integrate, QUAD_TOL};
use crate::timescale::{Piece, Point, Side, TimeScale};

/// Cap on the number of terms summed along a tail towards an accumulation point.
pub const MAX_TAIL_TERMS: usize = 1_000_000;
/// A tail term this small relative to the running total counts as negligible.
pub(crate) const TAIL_EPS: f64 = 1.0 / (1u64 << 60) as f64;

fn fd_step(t: f64) -> f64 {
    (1e-8 * t.abs()).max(1e-6)
}

/// Derivative at a point with at least one dense side. Uses the supplied
/// classical derivative when present, otherwise a finite difference over
/// whichever sides are dense (three-point formula when both are).
fn dense_derivative(f: &TsFunction, ts: &TimeScale, t: &Point) -> Result<f64> {
    if let Some(d) = f.classical_derivative(t.value()) {
        return finite(d, t, "classical derivative");
    }
    let h = fd_step(t.value());
    let left = ts.dense_neighbor(t, Side::Left, h);
    let right = ts.dense_neighbor(t, Side::Right, h);
    let ft = f.checked(t)?;
    let d = match (left, right) {
        (Some(l), Some(r)) => {
            let (hl, hr) = (t.value() - l.value(), r.value() - t.value());
            let (fl, fr) = (f.checked(&l)?, f.checked(&r)?);
            (hl * hl * (fr - ft) + hr * hr * (ft - fl)) / (hl * hr * (hl + hr))
        }
        (Some(l), None) => (ft - f.checked(&l)?) / (t.value() - l.value()),
        (None, Some(r)) => (f.checked(&r)? - ft) / (r.value() - t.value()),
        (None, None) => return Err(Error::NoNeighborhood(t.value())),
    };
    finite(d, t, "finite-difference derivative")
}

fn finite(v: f64, t: &Point, what: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { at: t.value(), what })
    }
}

/// The delta derivative `f^Δ(t)` for `t` in `T^κ`.
pub fn delta_derivative(f: &TsFunction, ts: &TimeScale, t: &Point) -> Result<f64> {
    if !ts.in_kappa_upper(t) {
        return Err(Error::OutsideKappa { at: t.value(), set: "T^kappa" });
    }
    let mu = ts.mu(t);
    if mu > 0.0 {
        let d = (f.checked(&ts.sigma(t))? - f.checked(t)?) / mu;
        finite(d, t, "delta derivative")
    } else {
        dense_derivative(f, ts, t)
    }
}

/// The nabla derivative `f^∇(t)` for `t` in `T_κ`.
pub fn nabla_derivative(f: &TsFunction, ts: &TimeScale, t: &Point) -> Result<f64> {
    if !ts.in_kappa_lower(t) {
        return Err(Error::OutsideKappa { at: t.value(), set: "T_kappa" });
    }
    let nu = ts.nu(t);
    if nu > 0.0 {
        let d = (f.checked(t)? - f.checked(&ts.rho(t))?) / nu;
        finite(d, t, "nabla derivative")
    } else {
        dense_derivative(f, ts, t)
    }
}

/// The diamond-alpha derivative `α f^Δ(t) + (1-α) f^∇(t)`. At `α = 1` or
/// `α = 0` only the needed one-sided derivative is evaluated.
pub fn diamond_derivative(f: &TsFunction, ts: &TimeScale, t: &Point, alpha: Alpha) -> Result<f64> {
    let a = alpha.value();
    if a == 1.0 {
        return delta_derivative(f, ts, t);
    }
    if a == 0.0 {
        return nabla_derivative(f, ts, t);
    }
    Ok(a * delta_derivative(f, ts, t)? + (1.0 - a) * nabla_derivative(f, ts, t)?)
}

/// Sums `term(p)` along a tail until the terms are negligible.
pub(crate) fn sum_tail(points: impl Iterator<Item = Point>, mut term: impl FnMut(&Point) -> Result<Option<f64>>) -> Result<f64> {
    let mut sum = 0.0;
    let mut small = 0;
    for (n, p) in points.enumerate() {
        if n >= MAX_TAIL_TERMS {
            return Err(Error::FactorCap(MAX_TAIL_TERMS));
        }
        let Some(v) = term(&p)? else { break };
        sum += v;
        if v.abs() <= TAIL_EPS * sum.abs() {
            small += 1;
            if small >= 3 {
                break;
            }
        } else {
            small = 0;
        }
    }
    Ok(sum)
}

fn dense_integral(f: &TsFunction, ts: &TimeScale, seg: usize, lo: f64, hi: f64) -> Result<f64> {
    integrate(|x| f.eval_dense(ts, seg, x), lo, hi, QUAD_TOL)
}

#[derive(Clone, Copy)]
enum Kind {
    Delta,
    Nabla,
}

fn oriented_integral(f: &TsFunction, ts: &TimeScale, a: &Point, b: &Point, kind: Kind) -> Result<f64> {
    match ts.compare(a, b) {
        Ordering::Equal => return Ok(0.0),
        Ordering::Greater => return oriented_integral(f, ts, b, a, kind).map(|v| -v),
        Ordering::Less => {}
    }
    // Δ sums over [a, b), ∇ over (a, b]
    let excluded = match kind {
        Kind::Delta => *b,
        Kind::Nabla => *a,
    };
    let weighted = |p: &Point| -> Result<f64> {
        if *p == excluded {
            return Ok(0.0);
        }
        let w = match kind {
            Kind::Delta => ts.mu(p),
            Kind::Nabla => ts.nu(p),
        };
        if w == 0.0 {
            return Ok(0.0);
        }
        Ok(w * f.checked(p)?)
    };
    let mut total = 0.0;
    for piece in ts.decompose(a, b) {
        total += match piece {
            Piece::Dense { seg, lo, hi } => dense_integral(f, ts, seg, lo, hi)?,
            Piece::Single(p) => weighted(&p)?,
            Piece::Run { seg, first, last } => {
                let mut s = 0.0;
                for p in ts.run_points(seg, first, last) {
                    s += weighted(&p)?;
                }
                s
            }
            Piece::Tail { seg, start } => sum_tail(ts.tail_points(seg, start), |p| {
                let w = match kind {
                    Kind::Delta => ts.mu(p),
                    Kind::Nabla => ts.nu(p),
                };
                if w == 0.0 {
                    Ok(None)
                } else {
                    weighted(p).map(Some)
                }
            })?,
        };
    }
    finite(total, b, "integral")
}

/// The delta integral of `f` from `a` to `b`.
pub fn delta_integral(f: &TsFunction, ts: &TimeScale, a: &Point, b: &Point) -> Result<f64> {
    oriented_integral(f, ts, a, b, Kind::Delta)
}

/// The nabla integral of `f` from `a` to `b`.
pub fn nabla_integral(f: &TsFunction, ts: &TimeScale, a: &Point, b: &Point) -> Result<f64> {
    oriented_integral(f, ts, a, b, Kind::Nabla)
}

/// The diamond-alpha integral `α ∫f Δt + (1-α) ∫f ∇t`.
pub fn diamond_integral(f: &TsFunction, ts: &TimeScale, a: &Point, b: &Point, alpha: Alpha) -> Result<f64> {
    let w = alpha.value();
    if w == 1.0 {
        return delta_integral(f, ts, a, b);
    }
    if w == 0.0 {
        return nabla_integral(f, ts, a, b);
    }
    Ok(w * delta_integral(f, ts, a, b)? + (1.0 - w) * nabla_integral(f, ts, a, b)?)
}
