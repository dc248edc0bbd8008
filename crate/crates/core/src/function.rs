//! Real-valued functions on a time scale and the diamond weight `alpha`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::timescale::{Point, TimeScale};

type ValueFn = dyn Fn(&Point) -> f64 + Send + Sync;
type DerivFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Continuity class a function is declared to have.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Continuity {
    RdContinuous,
    LdContinuous,
    Both,
}

/// A function `T -> R`, optionally carrying its classical derivative for
/// use at dense points. Cloning is cheap; the closures are shared.
///
/// A function may also carry its values on dense parts as a function of the
/// real coordinate. Dense integrals use that form, so that an interval
/// endpoint owned by a neighbouring scattered segment contributes the limit
/// from inside the interval rather than the value at the scattered point.
#[derive(Clone)]
pub struct TsFunction {
    value: Arc<ValueFn>,
    dense: Option<Arc<DerivFn>>,
    derivative: Option<Arc<DerivFn>>,
    continuity: Continuity,
}

impl fmt::Debug for TsFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TsFunction")
            .field("has_derivative", &self.derivative.is_some())
            .field("continuity", &self.continuity)
            .finish()
    }
}

impl TsFunction {
    /// Wraps a function of the real coordinate.
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let f: Arc<DerivFn> = Arc::new(f);
        let g = f.clone();
        let mut out = Self::on_points(move |p: &Point| g(p.value()));
        out.dense = Some(f);
        out
    }

    /// Wraps a function that inspects the full point (segment and index).
    pub fn on_points(f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        TsFunction { value: Arc::new(f), dense: None, derivative: None, continuity: Continuity::Both }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c).with_derivative(|_| 0.0)
    }

    /// Attaches the classical derivative used at dense points.
    pub fn with_derivative(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(d));
        self
    }

    /// Attaches the values on dense parts as a function of the real coordinate.
    pub fn with_dense_values(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.dense = Some(Arc::new(d));
        self
    }

    pub fn has_dense_values(&self) -> bool {
        self.dense.is_some()
    }

    /// The dense-part value at `x`, when the function carries one.
    pub fn dense_value(&self, x: f64) -> Option<f64> {
        self.dense.as_ref().map(|d| d(x))
    }

    /// Integrand value at `x` inside the dense segment `seg`.
    pub(crate) fn eval_dense(&self, ts: &TimeScale, seg: usize, x: f64) -> f64 {
        match &self.dense {
            Some(d) => d(x),
            None => self.eval(&ts.dense_point(seg, x)),
        }
    }

    pub fn with_continuity(mut self, c: Continuity) -> Self {
        self.continuity = c;
        self
    }

    pub fn continuity(&self) -> Continuity {
        self.continuity
    }

    pub fn eval(&self, t: &Point) -> f64 {
        (self.value)(t)
    }

    /// Evaluates and rejects NaN or infinite results.
    pub fn checked(&self, t: &Point) -> Result<f64> {
        let v = self.eval(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { at: t.value(), what: "function value" })
        }
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn classical_derivative(&self, x: f64) -> Option<f64> {
        self.derivative.as_ref().map(|d| d(x))
    }

    /// `sum_i c_i f_i`, carrying the derivative when every term has one.
    pub fn linear_combination(terms: &[(f64, TsFunction)]) -> Self {
        let vals: Vec<(f64, TsFunction)> = terms.to_vec();
        let mut out = Self::on_points(move |p| vals.iter().map(|(c, f)| c * f.eval(p)).sum());
        if terms.iter().all(|(_, f)| f.dense.is_some()) {
            let dense: Vec<(f64, TsFunction)> = terms.to_vec();
            out = out.with_dense_values(move |x| {
                dense.iter().map(|(c, f)| c * f.dense_value(x).expect("checked above")).sum()
            });
        }
        if terms.iter().all(|(_, f)| f.derivative.is_some()) {
            let ders: Vec<(f64, TsFunction)> = terms.to_vec();
            out = out.with_derivative(move |x| {
                ders.iter().map(|(c, f)| c * f.classical_derivative(x).expect("checked above")).sum()
            });
        }
        out
    }
}

/// The diamond weight, validated to lie in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(a: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&a) {
            Ok(Alpha(a))
        } else {
            Err(Error::InvalidAlpha(a))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// True for `alpha` strictly between 0 and 1.
    pub fn is_interior(self) -> bool {
        self.0 > 0.0 && self.0 < 1.0
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
