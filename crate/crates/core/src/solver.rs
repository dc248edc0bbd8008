//! The diamond-alpha operator `L y = y^◇α - p y`, the boundary value
//! problem `L y = f`, `y(t0) = y0`, `y(ρ(t0)) = y_ρ`, and the
//! diamond-alpha exponential built from transition-matrix products.
//!
//! The state at a point `t` is the row `Y(t) = [y(t), y(ρ(t))]`. A
//! scattered step is `Y(σ(t)) = Y(t) A(t)` with `A = [[a, 1], [b, 0]]`.
//! Dense stretches scale the state by `exp(∫p)`, and the state is
//! re-seeded as `[y, y]` wherever the point is left-dense. Accumulation
//! points of geometric grids are crossed with truncated infinite products.

use std::cmp::Ordering;
use std::ops::Mul;

use crate::calculus::diamond_derivative;
use crate::error::{Error, Result};
use crate::exponentials::{delta_exp, nabla_exp};
use crate::function::{Alpha, TsFunction};
use crate::quadrature::{integrate, QUAD_TOL};
use crate::timescale::{Local, Orientation, Point, Segment, TimeScale};

/// Default relative tolerance for truncating infinite products.
pub const DEFAULT_PRODUCT_TOL: f64 = 1e-13;
/// Default cap on the number of factors in one infinite product.
pub const DEFAULT_MAX_FACTORS: usize = 1_000_000;
const CONVERGED_STEPS: usize = 3;
const DIVERGED_STEPS: usize = 64;

/// A real 2×2 matrix acting on row vectors from the right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);
    /// Re-seeding map `[y, y_prev] ↦ [y, y]` used at left-dense points.
    pub const RESEED: Mat2 = Mat2([[1.0, 1.0], [0.0, 0.0]]);

    pub fn scale(self, s: f64) -> Mat2 {
        let m = self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn max_norm(self) -> f64 {
        self.0.iter().flatten().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    fn is_finite(self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    fn sub(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

/// The one-step matrix `[[a, 1], [b, 0]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionMatrix {
    pub a: f64,
    pub b: f64,
}

impl TransitionMatrix {
    pub fn as_mat(self) -> Mat2 {
        Mat2([[self.a, 1.0], [self.b, 0.0]])
    }
}

/// The row `[y(t), y(ρ(t))]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateRow {
    pub y: f64,
    pub y_prev: f64,
}

impl StateRow {
    pub fn new(y: f64, y_prev: f64) -> Self {
        StateRow { y, y_prev }
    }

    pub fn times(self, m: Mat2) -> StateRow {
        let m = m.0;
        StateRow { y: self.y * m[0][0] + self.y_prev * m[1][0], y_prev: self.y * m[0][1] + self.y_prev * m[1][1] }
    }

    pub fn step(self, a: TransitionMatrix) -> StateRow {
        self.times(a.as_mat())
    }
}

/// Truncation settings for infinite products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Relative max-norm change below which a partial product counts as settled.
    pub tol: f64,
    pub max_factors: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: DEFAULT_PRODUCT_TOL, max_factors: DEFAULT_MAX_FACTORS }
    }
}

/// `L y = f` with `y(t0) = y0` and, for `α` strictly inside `(0, 1)`,
/// `y(ρ(t0)) = y_rho` (defaulting to `y0`).
#[derive(Debug, Clone)]
pub struct DiamondBvp {
    pub ts: TimeScale,
    pub alpha: Alpha,
    pub p: TsFunction,
    pub f: Option<TsFunction>,
    pub t0: Point,
    pub y0: f64,
    pub y_rho: Option<f64>,
}

impl DiamondBvp {
    pub fn new(ts: TimeScale, alpha: Alpha, p: TsFunction, t0: Point, y0: f64) -> Self {
        DiamondBvp { ts, alpha, p, f: None, t0, y0, y_rho: None }
    }

    pub fn with_forcing(mut self, f: TsFunction) -> Self {
        self.f = Some(f);
        self
    }

    pub fn with_y_rho(mut self, y_rho: f64) -> Self {
        self.y_rho = Some(y_rho);
        self
    }

    /// The initial state row. The second condition only matters when
    /// `α` is strictly inside `(0, 1)` and `t0` is left-scattered.
    pub fn initial_state(&self) -> StateRow {
        let active = self.alpha.is_interior() && self.ts.nu(&self.t0) > 0.0;
        StateRow::new(self.y0, if active { self.y_rho.unwrap_or(self.y0) } else { self.y0 })
    }
}

/// Value of the solution at one target point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub point: Point,
    pub value: f64,
    /// `y(ρ(t))`.
    pub previous: Option<f64>,
    /// `y(σ(t))`, available at right-scattered targets.
    pub next: Option<f64>,
    /// `L y(t) - f(t)` at two-sided scattered targets.
    pub residual: Option<f64>,
}

/// Solution samples in ascending order plus truncation diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTrace {
    pub samples: Vec<Sample>,
    /// Largest number of factors used by any infinite product.
    pub truncation_depth: usize,
    pub converged: bool,
}

impl SolutionTrace {
    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.value).collect()
    }
}

/// `L y(t) = y^◇α(t) - p(t) y(t)`.
pub fn apply_l(p: &TsFunction, ts: &TimeScale, alpha: Alpha, y: &TsFunction, t: &Point) -> Result<f64> {
    Ok(diamond_derivative(y, ts, t, alpha)? - p.checked(t)? * y.checked(t)?)
}

/// Transition matrix from the symbolic graininess ratio, valid deep
/// inside geometric grids where `μ` underflows.
fn matrix_at(ts: &TimeScale, p: &TsFunction, alpha: f64, t: &Point) -> Result<TransitionMatrix> {
    let ratio = ts.graininess_ratio(t).ok_or(Error::NotScattered(t.value()))?;
    let b = (1.0 - alpha) / alpha * ratio;
    let a = 1.0 + ts.mu(t) * p.checked(t)? / alpha - b;
    Ok(TransitionMatrix { a, b })
}

/// The matrix `A(t)` at a two-sided scattered point, for `α` in `(0, 1)`.
pub fn transition_matrix(ts: &TimeScale, p: &TsFunction, alpha: Alpha, t: &Point) -> Result<TransitionMatrix> {
    if !alpha.is_interior() {
        return Err(Error::DegenerateAlpha("transition matrix"));
    }
    if ts.mu(t) == 0.0 || ts.nu(t) == 0.0 {
        return Err(Error::NotScattered(t.value()));
    }
    matrix_at(ts, p, alpha.value(), t)
}

/// `Y(t) = Y(t0) A(t0) A(σ(t0)) ... A(ρ(t))` over a purely scattered span.
pub fn propagate_forward(
    ts: &TimeScale,
    p: &TsFunction,
    alpha: Alpha,
    y0: StateRow,
    t0: &Point,
    t: &Point,
) -> Result<StateRow> {
    let mut y = y0;
    for s in ts.iterate_scattered(t0, t)? {
        y = y.step(transition_matrix(ts, p, alpha, &s)?);
    }
    Ok(y)
}

/// `Y(t) = Y(t0) exp(∫_{t0}^{t} p)` over a single dense interval.
pub fn propagate_dense(ts: &TimeScale, p: &TsFunction, y0: StateRow, t0: &Point, t: &Point) -> Result<StateRow> {
    let (lo, hi) = (t0.value(), t.value());
    let inside = ts
        .segments()
        .iter()
        .enumerate()
        .find(|(_, s)| s.is_dense() && s.min() <= lo.min(hi) && lo.max(hi) <= s.max());
    let Some((seg, _)) = inside else {
        return Err(Error::Unsupported(format!("[{lo}, {hi}] is not inside one dense interval")));
    };
    let g = integrate(|x| p.eval_dense(ts, seg, x), lo, hi, QUAD_TOL)?.exp();
    Ok(StateRow::new(y0.y * g, y0.y_prev * g))
}

/// Result of a truncated infinite product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccumulationResult {
    /// `None` when the product did not converge.
    pub state: Option<StateRow>,
    pub depth: usize,
    pub converged: bool,
}

struct Product {
    mat: Mat2,
    depth: usize,
    converged: bool,
}

/// Multiplies factors in the given order until the partial product
/// settles, grows without bound or hits the factor cap.
fn infinite_product(
    factors: impl Iterator<Item = Result<Mat2>>,
    prepend: bool,
    cfg: &SolverConfig,
) -> Result<Product> {
    let mut acc = Mat2::IDENTITY;
    let mut settled = 0;
    let mut growing = 0;
    let mut last_increment = f64::INFINITY;
    for (n, factor) in factors.enumerate() {
        if n >= cfg.max_factors {
            return Ok(Product { mat: acc, depth: n, converged: false });
        }
        let factor = factor?;
        let next = if prepend { factor * acc } else { acc * factor };
        if !next.is_finite() {
            return Ok(Product { mat: acc, depth: n + 1, converged: false });
        }
        let increment = next.sub(acc).max_norm();
        let scale = next.max_norm();
        acc = next;
        if increment <= cfg.tol * scale {
            settled += 1;
            if settled >= CONVERGED_STEPS {
                return Ok(Product { mat: acc, depth: n + 1, converged: true });
            }
        } else {
            settled = 0;
        }
        if increment >= last_increment {
            growing += 1;
            if growing >= DIVERGED_STEPS {
                return Ok(Product { mat: acc, depth: n + 1, converged: false });
            }
        } else {
            growing = 0;
        }
        last_increment = increment;
    }
    Ok(Product { mat: acc, depth: 0, converged: true })
}

fn divergence(ts: &TimeScale, seg: usize, alpha: f64) -> Error {
    match ts.segments()[seg] {
        Segment::Geometric { ratio, orientation, .. } => {
            let (r, threshold, label) = match orientation {
                Orientation::Positive => (ratio, ratio / (ratio + 1.0), "q/(q+1)"),
                Orientation::Negative => (1.0 / ratio, 1.0 / (ratio + 1.0), "1/(q+1)"),
            };
            Error::Divergent { at: 0.0, alpha, b: (1.0 - alpha) / alpha * r, threshold, threshold_label: label }
        }
        _ => Error::Unsupported("infinite product outside a geometric grid".into()),
    }
}

/// `Y(t) = Y(t0) ∏ A(ρ^k(t))`, the product running outwards from the
/// right-dense accumulation point `t0` of a geometric grid up to `t`.
pub fn propagate_from_accumulation(
    ts: &TimeScale,
    p: &TsFunction,
    alpha: Alpha,
    y0: StateRow,
    t0: &Point,
    t: &Point,
    cfg: &SolverConfig,
) -> Result<AccumulationResult> {
    if !alpha.is_interior() {
        return Err(Error::DegenerateAlpha("accumulation product"));
    }
    let seg = t.segment();
    let k = match (t.local(), &ts.segments()[seg]) {
        (Local::Index(k), Segment::Geometric { orientation: Orientation::Positive, .. }) => k,
        _ => return Err(Error::Unsupported(format!("target {t} is not on a grid leaving 0"))),
    };
    if t0.value() != 0.0 || ts.sigma(t0) != *t0 {
        return Err(Error::Unsupported(format!("{t0} is not a right-dense accumulation point")));
    }
    let prod = right_product(ts, p, alpha.value(), seg, k, cfg)?;
    Ok(AccumulationResult {
        state: prod.converged.then(|| y0.times(Mat2::RESEED * prod.mat)),
        depth: prod.depth,
        converged: prod.converged,
    })
}

fn right_product(ts: &TimeScale, p: &TsFunction, alpha: f64, seg: usize, k: i64, cfg: &SolverConfig) -> Result<Product> {
    let factors = ts.tail_points(seg, k - 1).map(|s| matrix_at(ts, p, alpha, &s).map(TransitionMatrix::as_mat));
    infinite_product(factors, true, cfg)
}

fn left_product(ts: &TimeScale, p: &TsFunction, alpha: f64, seg: usize, k: i64, cfg: &SolverConfig) -> Result<Product> {
    let factors = ts.tail_points(seg, k).map(|s| matrix_at(ts, p, alpha, &s).map(TransitionMatrix::as_mat));
    infinite_product(factors, false, cfg)
}

/// Sandwich matrices `S(t0, t)` for ascending targets `t >= t0`, so that
/// `Y(t) = Y(t0) S(t0, t)`.
fn walk(
    ts: &TimeScale,
    p: &TsFunction,
    alpha: f64,
    t0: &Point,
    targets: &[Point],
    cfg: &SolverConfig,
) -> Result<(Vec<Mat2>, usize)> {
    let mut out = Vec::with_capacity(targets.len());
    let mut s = Mat2::IDENTITY;
    let mut cur = *t0;
    let mut depth = 0;
    if ts.nu(&cur) == 0.0 {
        s = Mat2::RESEED;
    }
    for target in targets {
        while ts.compare(&cur, target) == Ordering::Less {
            let seg = &ts.segments()[cur.segment()];
            if ts.mu(&cur) > 0.0 {
                if let (Segment::Geometric { orientation: Orientation::Negative, .. }, Local::Index(k)) =
                    (seg, cur.local())
                {
                    let zero = ts.point(0.0)?;
                    if ts.compare(target, &zero) != Ordering::Less {
                        let prod = left_product(ts, p, alpha, cur.segment(), k, cfg)?;
                        depth = depth.max(prod.depth);
                        if !prod.converged {
                            return Err(divergence(ts, cur.segment(), alpha));
                        }
                        s = s * prod.mat * Mat2::RESEED;
                        cur = zero;
                        continue;
                    }
                }
                s = s * matrix_at(ts, p, alpha, &cur)?.as_mat();
                cur = ts.sigma(&cur);
                continue;
            }
            // right-dense: the next stretch is a dense interval or a geometric grid leaving 0
            let j = ts.forward_segment(&cur).ok_or_else(|| Error::Unsupported(format!("no points after {cur}")))?;
            let next_seg = ts.segments().get(j).ok_or_else(|| Error::Unsupported("walk past the end".into()))?;
            let end = if target.segment() == j {
                *target
            } else {
                ts.segment_top(j).ok_or_else(|| Error::Unsupported(format!("segment {j} is unbounded")))?
            };
            match next_seg {
                Segment::Interval { .. } => {
                    let g = integrate(|x| p.eval_dense(ts, j, x), cur.value(), end.value(), QUAD_TOL)?.exp();
                    s = s.scale(g) * Mat2::RESEED;
                }
                Segment::Geometric { orientation: Orientation::Positive, .. } => {
                    let Local::Index(k) = end.local() else {
                        return Err(Error::Unsupported(format!("cannot leave accumulation point towards {end}")));
                    };
                    let prod = right_product(ts, p, alpha, j, k, cfg)?;
                    depth = depth.max(prod.depth);
                    if !prod.converged {
                        return Err(divergence(ts, j, alpha));
                    }
                    s = s * Mat2::RESEED * prod.mat;
                }
                _ => return Err(Error::Unsupported(format!("right-dense point {cur} followed by a uniform grid"))),
            }
            cur = end;
        }
        out.push(s);
    }
    Ok((out, depth))
}

fn sorted_targets(ts: &TimeScale, targets: &[Point]) -> Vec<Point> {
    let mut t = targets.to_vec();
    t.sort_by(|a, b| ts.compare(a, b));
    t.dedup();
    t
}

fn finish_sample(bvp: &DiamondBvp, point: Point, value: f64, previous: Option<f64>, next: Option<f64>) -> Sample {
    let ts = &bvp.ts;
    let (mu, nu) = (ts.mu(&point), ts.nu(&point));
    let residual = match (previous, next) {
        (Some(prev), Some(next)) if mu > 0.0 && nu > 0.0 => {
            let f = bvp.f.as_ref().map_or(0.0, |f| f.eval(&point));
            let a = bvp.alpha.value();
            Some(a * (next - value) / mu + (1.0 - a) * (value - prev) / nu - bvp.p.eval(&point) * value - f)
        }
        _ => None,
    };
    Sample { point, value, previous, next, residual }
}

/// Splits off a target at `ρ(t0)`, which is answered by the second
/// boundary condition, and rejects every other target before `t0`.
fn check_targets(bvp: &DiamondBvp, targets: &[Point]) -> Result<(Option<Point>, Vec<Point>)> {
    let ts = &bvp.ts;
    let mut before = None;
    let mut after = Vec::new();
    for t in sorted_targets(ts, targets) {
        if ts.compare(&t, &bvp.t0) == Ordering::Less {
            let rho = ts.rho(&bvp.t0);
            if bvp.alpha.is_interior() && t == rho {
                before = Some(t);
                continue;
            }
            return Err(Error::Backward { target: t.value(), t0: bvp.t0.value() });
        }
        after.push(t);
    }
    Ok((before, after))
}

/// Solves the boundary value problem at the given targets.
pub fn solve(bvp: &DiamondBvp, targets: &[Point], cfg: &SolverConfig) -> Result<SolutionTrace> {
    bvp.ts.atomic_partition()?;
    if bvp.f.is_some() {
        return solve_nonhomogeneous(bvp, targets);
    }
    let (before, after) = check_targets(bvp, targets)?;
    let ts = &bvp.ts;
    let a = bvp.alpha.value();
    let mut samples = Vec::new();
    if !bvp.alpha.is_interior() {
        let exp = |t: &Point| -> Result<f64> {
            let e = if a == 1.0 { delta_exp(&bvp.p, ts, t, &bvp.t0)? } else { nabla_exp(&bvp.p, ts, t, &bvp.t0)? };
            Ok(bvp.y0 * e.value)
        };
        for t in after {
            let value = exp(&t)?;
            let previous = Some(if ts.nu(&t) > 0.0 { exp(&ts.rho(&t)).ok() } else { Some(value) }).flatten();
            let next = if ts.mu(&t) > 0.0 { exp(&ts.sigma(&t)).ok() } else { None };
            samples.push(finish_sample(bvp, t, value, previous, next));
        }
        return Ok(SolutionTrace { samples, truncation_depth: 0, converged: true });
    }
    let y0 = bvp.initial_state();
    if let Some(t) = before {
        samples.push(Sample { point: t, value: y0.y_prev, previous: None, next: Some(y0.y), residual: None });
    }
    let (mats, depth) = walk(ts, &bvp.p, a, &bvp.t0, &after, cfg)?;
    for (t, s) in after.iter().zip(mats) {
        let state = y0.times(s);
        let next = if ts.mu(t) > 0.0 && ts.nu(t) > 0.0 {
            Some(state.step(matrix_at(ts, &bvp.p, a, t)?).y)
        } else {
            None
        };
        samples.push(finish_sample(bvp, *t, state.y, Some(state.y_prev), next));
    }
    Ok(SolutionTrace { samples, truncation_depth: depth, converged: true })
}

/// One forward step of `L y = f` at the scattered point `t`.
fn forced_step(bvp: &DiamondBvp, f: &TsFunction, t: &Point, state: StateRow) -> Result<f64> {
    let ts = &bvp.ts;
    let a = bvp.alpha.value();
    let mu = ts.mu(t);
    if a == 1.0 {
        return Ok((1.0 + mu * bvp.p.checked(t)?) * state.y + mu * f.checked(t)?);
    }
    if a == 0.0 {
        let s = ts.sigma(t);
        let denom = 1.0 - mu * bvp.p.checked(&s)?;
        if denom.abs() <= crate::exponentials::ZERO_FACTOR_TOL {
            return Err(Error::NotRegressive { at: s.value(), kind: "nu-regressive", factor: denom });
        }
        return Ok((state.y + mu * f.checked(&s)?) / denom);
    }
    let m = matrix_at(ts, &bvp.p, a, t)?;
    Ok(state.step(m).y + mu * f.checked(t)? / a)
}

/// Forward recurrence for `L y = f` on purely scattered spans.
pub fn solve_nonhomogeneous(bvp: &DiamondBvp, targets: &[Point]) -> Result<SolutionTrace> {
    let zero = TsFunction::constant(0.0);
    let f = bvp.f.clone().unwrap_or(zero);
    let (before, after) = check_targets(bvp, targets)?;
    let ts = &bvp.ts;
    let mut state = bvp.initial_state();
    let mut cur = bvp.t0;
    let mut samples = Vec::new();
    if let Some(t) = before {
        samples.push(Sample { point: t, value: state.y_prev, previous: None, next: Some(state.y), residual: None });
    }
    for t in after {
        let chain = ts.iterate_scattered(&cur, &t).map_err(|e| match e {
            Error::DenseSpan(x) | Error::AccumulationInSpan(x) => {
                Error::Unsupported(format!("forcing terms need a purely scattered span; dense behaviour at {x}"))
            }
            other => other,
        })?;
        for s in chain {
            let y = forced_step(bvp, &f, &s, state)?;
            state = StateRow::new(y, state.y);
        }
        cur = t;
        let next = if ts.mu(&t) > 0.0 { Some(forced_step(bvp, &f, &t, state)?) } else { None };
        let previous = (ts.nu(&t) > 0.0 || t == bvp.t0).then_some(state.y_prev);
        samples.push(finish_sample(bvp, t, state.y, previous, next));
    }
    Ok(SolutionTrace { samples, truncation_depth: 0, converged: true })
}

/// `E_{α,p}(t, t0)`: the solution with `y(t0) = y(ρ(t0)) = 1`.
pub fn diamond_exponential(
    alpha: Alpha,
    p: &TsFunction,
    ts: &TimeScale,
    t0: &Point,
    targets: &[Point],
    cfg: &SolverConfig,
) -> Result<SolutionTrace> {
    let bvp = DiamondBvp::new(ts.clone(), alpha, p.clone(), *t0, 1.0).with_y_rho(1.0);
    solve(&bvp, targets, cfg)
}

/// The sandwich matrix `S(t0, t)` with `Y(t) = Y(t0) S(t0, t)`, for `α`
/// strictly inside `(0, 1)` and `t >= t0`.
pub fn transition_product(
    ts: &TimeScale,
    p: &TsFunction,
    alpha: Alpha,
    t0: &Point,
    t: &Point,
    cfg: &SolverConfig,
) -> Result<Mat2> {
    if !alpha.is_interior() {
        return Err(Error::DegenerateAlpha("transition product"));
    }
    if ts.compare(t, t0) == Ordering::Less {
        return Err(Error::Backward { target: t.value(), t0: t0.value() });
    }
    ts.atomic_partition()?;
    let (mats, _) = walk(ts, p, alpha.value(), t0, std::slice::from_ref(t), cfg)?;
    Ok(mats[0])
}

/// `[1 1] S [1 0]^T`, the diamond exponential read off a sandwich matrix.
pub fn sandwich_value(s: &Mat2) -> f64 {
    s.0[0][0] + s.0[1][0]
}

/// Coefficients of the equivalent second-order delta equation
/// `y^ΔΔ + p̃ y^Δ + q̃ y = 0` and its boundary data at `s0 = ρ(t0)`.
#[derive(Debug, Clone)]
pub struct SecondOrderDelta {
    pub p_tilde: TsFunction,
    pub q_tilde: TsFunction,
    pub s0: Point,
    /// `y(s0)`.
    pub y_s0: f64,
    /// `y(σ(s0))`.
    pub y_sigma_s0: f64,
}

impl SecondOrderDelta {
    /// Iterates `y^Δ(σs) = (1 - μp̃) y^Δ(s) - μ q̃ y(s)` and
    /// `y(σσs) = y(σs) + μ(σs) y^Δ(σs)`, returning `steps + 2` values
    /// starting at `s0`.
    pub fn iterate(&self, ts: &TimeScale, steps: usize) -> Result<Vec<(Point, f64)>> {
        let mut s = self.s0;
        let mut s1 = ts.sigma(&s);
        let mut out = vec![(s, self.y_s0), (s1, self.y_sigma_s0)];
        let mu = ts.mu(&s);
        if mu == 0.0 {
            return Err(Error::NotScattered(s.value()));
        }
        let (mut y, mut y1) = (self.y_s0, self.y_sigma_s0);
        let mut yd = (y1 - y) / mu;
        for _ in 0..steps {
            let mu = ts.mu(&s);
            let yd_next = (1.0 - mu * self.p_tilde.checked(&s)?) * yd - mu * self.q_tilde.checked(&s)? * y;
            let s2 = ts.sigma(&s1);
            let y2 = y1 + ts.mu(&s1) * yd_next;
            out.push((s2, y2));
            (s, s1, y, y1, yd) = (s1, s2, y1, y2, yd_next);
        }
        Ok(out)
    }
}

/// Rewrites the homogeneous problem as a second-order delta equation at
/// `s = ρ(t)`. Only scattered regions and `α` in `(0, 1)` are supported.
pub fn to_second_order_delta(bvp: &DiamondBvp) -> Result<SecondOrderDelta> {
    if !bvp.alpha.is_interior() {
        return Err(Error::DegenerateAlpha("second-order form"));
    }
    let ts = &bvp.ts;
    let s0 = ts.rho(&bvp.t0);
    if s0 == bvp.t0 || ts.mu(&s0) == 0.0 {
        return Err(Error::NotScattered(bvp.t0.value()));
    }
    let a = bvp.alpha.value();
    let (p1, ts1) = (bvp.p.clone(), ts.clone());
    let p_tilde = TsFunction::on_points(move |s| {
        let mu = ts1.mu(s);
        (1.0 - p1.eval(&ts1.sigma(s)) * mu) / (a * mu)
    });
    let (p2, ts2) = (bvp.p.clone(), ts.clone());
    let q_tilde = TsFunction::on_points(move |s| -p2.eval(&ts2.sigma(s)) / (a * ts2.mu(s)));
    let state = bvp.initial_state();
    Ok(SecondOrderDelta { p_tilde, q_tilde, s0, y_s0: state.y_prev, y_sigma_s0: state.y })
}
