//! Regular time scales built from a finite ordered list of segments.
//!
//! A [`TimeScale`] is a closed subset of the real line assembled from
//! real intervals, uniform grids `origin + kc` and closures of geometric
//! grids `±q^k ∪ {0}`. Grid points are addressed by integer index so that
//! the jump operators and graininess are computed symbolically and
//! `sigma`/`rho` round-trip exactly.
//!
//! Consecutive segments share exactly one point, the junction. A junction
//! belongs to the lower segment; the copy at the bottom of the upper
//! segment is never materialised as a [`Point`].

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

const LOCATE_TOL: f64 = 1e-9;
const ADJACENCY_TOL: f64 = 1e-12;

/// Which side of zero a geometric grid lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Positive,
    Negative,
}

/// One atomic building block of a time scale.
#[derive(Debug, Clone, PartialEq)]
pub enum Segment {
    /// The real interval `[lo, hi]`; either end may be infinite.
    Interval { lo: f64, hi: f64 },
    /// The grid `{origin + k*step : lo <= k <= hi}`; `None` bounds are unbounded.
    Uniform {
        step: f64,
        origin: f64,
        lo: Option<i64>,
        hi: Option<i64>,
    },
    /// The closure of `{±ratio^k : k <= far}` including the accumulation point 0.
    /// `far = None` leaves the far end unbounded.
    Geometric {
        ratio: f64,
        orientation: Orientation,
        far: Option<i64>,
    },
}

/// Segment-local coordinate of a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Local {
    /// Real coordinate inside an interval segment.
    Real(f64),
    /// Grid index inside a uniform or geometric segment.
    Index(i64),
    /// The accumulation point 0 of a geometric segment.
    Accumulation,
}

/// A point of a time scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    seg: usize,
    local: Local,
    value: f64,
}

impl Point {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn segment(&self) -> usize {
        self.seg
    }

    pub fn local(&self) -> Local {
        self.local
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Left/right density of a point plus extremum flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointClass {
    pub left_dense: bool,
    pub right_dense: bool,
    pub is_min: bool,
    pub is_max: bool,
}

impl PointClass {
    pub fn two_sided_dense(&self) -> bool {
        self.left_dense && self.right_dense
    }

    pub fn two_sided_scattered(&self) -> bool {
        !self.left_dense && !self.right_dense
    }
}

/// Outcome of [`TimeScale::is_regular`].
#[derive(Debug, Clone, PartialEq)]
pub struct Regularity {
    pub regular: bool,
    /// First violating point and the reason, when not regular.
    pub violation: Option<(f64, String)>,
}

/// Unique decomposition of a regular time scale into atomic pieces.
#[derive(Debug, Clone)]
pub struct Partition {
    pub atoms: Vec<TimeScale>,
    pub switching_points: Vec<f64>,
}

/// Piece of `T ∩ [a, b]` produced by [`TimeScale::decompose`].
#[derive(Debug, Clone, PartialEq)]
pub enum Piece {
    /// Dense part `[lo, hi]` of an interval segment, `lo < hi`.
    Dense { seg: usize, lo: f64, hi: f64 },
    /// An isolated canonical point (interval endpoint or accumulation point).
    Single(Point),
    /// Grid indices `first ..= last` of a segment, listed in time order.
    Run { seg: usize, first: i64, last: i64 },
    /// Indices `start, start - 1, ...` of a geometric segment, approaching
    /// its accumulation point; infinitely many points.
    Tail { seg: usize, start: i64 },
}

enum Move {
    Stay,
    To(Local),
    Edge,
}

/// Which side a dense neighbourhood is sampled from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

pub(crate) fn qpow(q: f64, k: i64) -> f64 {
    q.powi(k.clamp(-200_000, 200_000) as i32)
}

fn fmt_num(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

impl Segment {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        let s = Segment::Interval { lo, hi };
        s.validate()?;
        Ok(s)
    }

    pub fn uniform(step: f64, origin: f64, lo: Option<i64>, hi: Option<i64>) -> Result<Self> {
        let s = Segment::Uniform { step, origin, lo, hi };
        s.validate()?;
        Ok(s)
    }

    pub fn geometric(ratio: f64, orientation: Orientation, far: Option<i64>) -> Result<Self> {
        let s = Segment::Geometric { ratio, orientation, far };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Segment::Interval { lo, hi } => {
                if lo.is_nan() || hi.is_nan() || lo >= hi {
                    return Err(Error::InvalidSegment(format!("interval needs lo < hi, got [{lo}, {hi}]")));
                }
            }
            Segment::Uniform { step, origin, lo, hi } => {
                if !(step.is_finite() && step > 0.0) {
                    return Err(Error::InvalidSegment(format!("grid step must be positive, got {step}")));
                }
                if !origin.is_finite() {
                    return Err(Error::InvalidSegment(format!("grid origin must be finite, got {origin}")));
                }
                if let (Some(l), Some(h)) = (lo, hi) {
                    if l >= h {
                        return Err(Error::InvalidSegment(format!("grid index range {l}..{h} is empty or a single point")));
                    }
                }
            }
            Segment::Geometric { ratio, .. } => {
                if !(ratio.is_finite() && ratio > 1.0) {
                    return Err(Error::InvalidSegment(format!("geometric ratio must exceed 1, got {ratio}")));
                }
            }
        }
        Ok(())
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, Segment::Interval { .. })
    }

    pub fn min(&self) -> f64 {
        match *self {
            Segment::Interval { lo, .. } => lo,
            Segment::Uniform { step, origin, lo, .. } => lo.map_or(f64::NEG_INFINITY, |k| origin + k as f64 * step),
            Segment::Geometric { orientation: Orientation::Positive, .. } => 0.0,
            Segment::Geometric { ratio, orientation: Orientation::Negative, far } => {
                far.map_or(f64::NEG_INFINITY, |k| -qpow(ratio, k))
            }
        }
    }

    pub fn max(&self) -> f64 {
        match *self {
            Segment::Interval { hi, .. } => hi,
            Segment::Uniform { step, origin, hi, .. } => hi.map_or(f64::INFINITY, |k| origin + k as f64 * step),
            Segment::Geometric { ratio, orientation: Orientation::Positive, far } => {
                far.map_or(f64::INFINITY, |k| qpow(ratio, k))
            }
            Segment::Geometric { orientation: Orientation::Negative, .. } => 0.0,
        }
    }

    fn bottom(&self) -> Option<Local> {
        match *self {
            Segment::Interval { lo, .. } => lo.is_finite().then_some(Local::Real(lo)),
            Segment::Uniform { lo, .. } => lo.map(Local::Index),
            Segment::Geometric { orientation: Orientation::Positive, .. } => Some(Local::Accumulation),
            Segment::Geometric { orientation: Orientation::Negative, far, .. } => far.map(Local::Index),
        }
    }

    fn top(&self) -> Option<Local> {
        match *self {
            Segment::Interval { hi, .. } => hi.is_finite().then_some(Local::Real(hi)),
            Segment::Uniform { hi, .. } => hi.map(Local::Index),
            Segment::Geometric { orientation: Orientation::Positive, far, .. } => far.map(Local::Index),
            Segment::Geometric { orientation: Orientation::Negative, .. } => Some(Local::Accumulation),
        }
    }

    fn value(&self, l: &Local) -> f64 {
        match (self, *l) {
            (_, Local::Real(x)) => x,
            (_, Local::Accumulation) => 0.0,
            (Segment::Uniform { step, origin, .. }, Local::Index(k)) => origin + k as f64 * step,
            (Segment::Geometric { ratio, orientation, .. }, Local::Index(k)) => {
                let v = qpow(*ratio, k);
                match orientation {
                    Orientation::Positive => v,
                    Orientation::Negative => -v,
                }
            }
            (Segment::Interval { .. }, Local::Index(_)) => unreachable!("index local on an interval"),
        }
    }

    /// +1 when increasing the index moves forward in time, -1 otherwise.
    fn index_dir(&self) -> i64 {
        match self {
            Segment::Geometric { orientation: Orientation::Negative, .. } => -1,
            _ => 1,
        }
    }

    fn up(&self, l: &Local) -> Move {
        match (self, *l) {
            (Segment::Interval { hi, .. }, Local::Real(x)) => {
                if x < *hi {
                    Move::Stay
                } else {
                    Move::Edge
                }
            }
            (Segment::Uniform { hi, .. }, Local::Index(k)) => {
                if Some(k) == *hi {
                    Move::Edge
                } else {
                    Move::To(Local::Index(k + 1))
                }
            }
            (Segment::Geometric { orientation: Orientation::Positive, far, .. }, l) => match l {
                Local::Accumulation => Move::Stay,
                Local::Index(k) if Some(k) == *far => Move::Edge,
                Local::Index(k) => Move::To(Local::Index(k + 1)),
                Local::Real(_) => unreachable!(),
            },
            (Segment::Geometric { orientation: Orientation::Negative, .. }, l) => match l {
                Local::Accumulation => Move::Edge,
                Local::Index(k) => Move::To(Local::Index(k - 1)),
                Local::Real(_) => unreachable!(),
            },
            _ => unreachable!("local does not match segment kind"),
        }
    }

    fn down(&self, l: &Local) -> Move {
        match (self, *l) {
            (Segment::Interval { lo, .. }, Local::Real(x)) => {
                if x > *lo {
                    Move::Stay
                } else {
                    Move::Edge
                }
            }
            (Segment::Uniform { lo, .. }, Local::Index(k)) => {
                if Some(k) == *lo {
                    Move::Edge
                } else {
                    Move::To(Local::Index(k - 1))
                }
            }
            (Segment::Geometric { orientation: Orientation::Positive, .. }, l) => match l {
                Local::Accumulation => Move::Edge,
                Local::Index(k) => Move::To(Local::Index(k - 1)),
                Local::Real(_) => unreachable!(),
            },
            (Segment::Geometric { orientation: Orientation::Negative, far, .. }, l) => match l {
                Local::Accumulation => Move::Stay,
                Local::Index(k) if Some(k) == *far => Move::Edge,
                Local::Index(k) => Move::To(Local::Index(k + 1)),
                Local::Real(_) => unreachable!(),
            },
            _ => unreachable!("local does not match segment kind"),
        }
    }

    /// Forward gap from `l` to its in-segment successor.
    fn gap_up(&self, l: &Local) -> f64 {
        match (self, *l) {
            (Segment::Uniform { step, .. }, _) => *step,
            (Segment::Geometric { ratio, orientation, .. }, Local::Index(k)) => match orientation {
                Orientation::Positive => (ratio - 1.0) * qpow(*ratio, k),
                Orientation::Negative => (ratio - 1.0) * qpow(*ratio, k - 1),
            },
            _ => 0.0,
        }
    }

    /// Backward gap from `l` to its in-segment predecessor.
    fn gap_down(&self, l: &Local) -> f64 {
        match (self, *l) {
            (Segment::Uniform { step, .. }, _) => *step,
            (Segment::Geometric { ratio, orientation, .. }, Local::Index(k)) => match orientation {
                Orientation::Positive => (ratio - 1.0) * qpow(*ratio, k - 1),
                Orientation::Negative => (ratio - 1.0) * qpow(*ratio, k),
            },
            _ => 0.0,
        }
    }

    /// Exact ratio of forward to backward gap at an interior grid point.
    fn interior_ratio(&self) -> f64 {
        match *self {
            Segment::Geometric { ratio, orientation: Orientation::Positive, .. } => ratio,
            Segment::Geometric { ratio, orientation: Orientation::Negative, .. } => 1.0 / ratio,
            _ => 1.0,
        }
    }

    fn index_in_range(&self, k: i64) -> bool {
        match *self {
            Segment::Uniform { lo, hi, .. } => lo.is_none_or(|l| k >= l) && hi.is_none_or(|h| k <= h),
            Segment::Geometric { far, .. } => far.is_none_or(|f| k <= f),
            Segment::Interval { .. } => false,
        }
    }

    fn locate(&self, x: f64) -> Option<Local> {
        if x.is_nan() {
            return None;
        }
        match *self {
            Segment::Interval { lo, hi } => {
                let tol = LOCATE_TOL * x.abs().max(1.0);
                if lo.is_finite() && (x - lo).abs() <= tol {
                    Some(Local::Real(lo))
                } else if hi.is_finite() && (x - hi).abs() <= tol {
                    Some(Local::Real(hi))
                } else if x > lo && x < hi {
                    Some(Local::Real(x))
                } else {
                    None
                }
            }
            Segment::Uniform { step, origin, .. } => {
                if !x.is_finite() {
                    return None;
                }
                let k = ((x - origin) / step).round();
                let err = (origin + k * step - x).abs();
                (err <= LOCATE_TOL * x.abs().max(step)).then_some(())?;
                let k = k as i64;
                self.index_in_range(k).then_some(Local::Index(k))
            }
            Segment::Geometric { ratio, orientation, .. } => {
                if x == 0.0 {
                    return Some(Local::Accumulation);
                }
                let sign_ok = match orientation {
                    Orientation::Positive => x > 0.0,
                    Orientation::Negative => x < 0.0,
                };
                if !sign_ok || !x.is_finite() {
                    return None;
                }
                let k = (x.abs().ln() / ratio.ln()).round() as i64;
                let v = qpow(ratio, k);
                ((v - x.abs()).abs() <= LOCATE_TOL * x.abs() && self.index_in_range(k)).then_some(Local::Index(k))
            }
        }
    }

    /// Smallest local coordinate with value >= x, if any.
    fn ceil(&self, x: f64) -> Option<Local> {
        if x > self.max() {
            return None;
        }
        if x <= self.min() {
            return self.bottom();
        }
        if let Some(l) = self.locate(x) {
            return Some(l);
        }
        match *self {
            Segment::Interval { .. } => Some(Local::Real(x)),
            Segment::Uniform { step, origin, .. } => Some(Local::Index(((x - origin) / step).ceil() as i64)),
            Segment::Geometric { ratio, orientation, .. } => match orientation {
                Orientation::Positive => Some(Local::Index((x.ln() / ratio.ln()).ceil() as i64)),
                Orientation::Negative => Some(Local::Index(((-x).ln() / ratio.ln()).floor() as i64)),
            },
        }
    }

    /// Largest local coordinate with value <= x, if any.
    fn floor(&self, x: f64) -> Option<Local> {
        if x < self.min() {
            return None;
        }
        if x >= self.max() {
            return self.top();
        }
        if let Some(l) = self.locate(x) {
            return Some(l);
        }
        match *self {
            Segment::Interval { .. } => Some(Local::Real(x)),
            Segment::Uniform { step, origin, .. } => Some(Local::Index(((x - origin) / step).floor() as i64)),
            Segment::Geometric { ratio, orientation, .. } => match orientation {
                Orientation::Positive => Some(Local::Index((x.ln() / ratio.ln()).floor() as i64)),
                Orientation::Negative => Some(Local::Index(((-x).ln() / ratio.ln()).ceil() as i64)),
            },
        }
    }

    fn cmp_local(&self, a: &Local, b: &Local) -> Ordering {
        match (*a, *b) {
            (Local::Real(x), Local::Real(y)) => x.total_cmp(&y),
            (Local::Index(i), Local::Index(j)) => (i * self.index_dir()).cmp(&(j * self.index_dir())),
            (Local::Accumulation, Local::Accumulation) => Ordering::Equal,
            (Local::Accumulation, Local::Index(_)) => match self {
                Segment::Geometric { orientation: Orientation::Positive, .. } => Ordering::Less,
                _ => Ordering::Greater,
            },
            (Local::Index(_), Local::Accumulation) => self.cmp_local(b, a).reverse(),
            _ => unreachable!("mixed local kinds within one segment"),
        }
    }

    fn describe(&self) -> String {
        match *self {
            Segment::Interval { lo, hi } => format!("interval({},{})", fmt_num(lo), fmt_num(hi)),
            Segment::Uniform { step, .. } => {
                format!("grid({},{},{})", fmt_num(step), fmt_num(self.min()), fmt_num(self.max()))
            }
            Segment::Geometric { ratio, orientation, far } => {
                let side = match orientation {
                    Orientation::Positive => '+',
                    Orientation::Negative => '-',
                };
                match far {
                    Some(k) => format!("qgrid({},{},{})", fmt_num(ratio), side, k),
                    None => format!("qgrid({},{})", fmt_num(ratio), side),
                }
            }
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// An ordered, adjacency-checked list of segments.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeScale {
    segments: Vec<Segment>,
}

impl fmt::Display for TimeScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.segments.iter().map(Segment::describe).collect();
        f.write_str(&parts.join("; "))
    }
}

impl TimeScale {
    /// Builds a time scale, checking segment parameters, ordering, adjacency
    /// and that no junction joins two dense intervals.
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidTimeScale("no segments".into()));
        }
        for s in &segments {
            s.validate()?;
        }
        for (i, pair) in segments.windows(2).enumerate() {
            let (lower, upper) = (&pair[0], &pair[1]);
            let (m, n) = (lower.max(), upper.min());
            if !m.is_finite() || !n.is_finite() {
                return Err(Error::InvalidTimeScale(format!(
                    "segment {i} ({lower}) is unbounded but followed by {upper}"
                )));
            }
            let tol = ADJACENCY_TOL * m.abs().max(1.0);
            if (m - n).abs() > tol {
                let what = if n > m { "gap" } else { "overlap" };
                return Err(Error::InvalidTimeScale(format!(
                    "{what} between {lower} (max {m}) and {upper} (min {n}); consecutive segments must share exactly one point"
                )));
            }
            if lower.is_dense() && upper.is_dense() {
                return Err(Error::InvalidTimeScale(format!(
                    "junction {m} joins two dense intervals; neither side is scattered"
                )));
            }
        }
        Ok(TimeScale { segments })
    }

    pub fn from_segment(segment: Segment) -> Result<Self> {
        Self::new(vec![segment])
    }

    /// The integers.
    pub fn integers() -> Self {
        Self::uniform(1.0)
    }

    /// The grid `cZ`.
    pub fn uniform(step: f64) -> Self {
        Self::from_segment(Segment::uniform(step, 0.0, None, None).expect("positive step")).expect("single segment")
    }

    /// The real line.
    pub fn reals() -> Self {
        TimeScale {
            segments: vec![Segment::Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY }],
        }
    }

    /// The closed interval `[lo, hi]`.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::from_segment(Segment::interval(lo, hi)?)
    }

    /// The closure of `q^Z`.
    pub fn geometric(q: f64) -> Result<Self> {
        Self::from_segment(Segment::geometric(q, Orientation::Positive, None)?)
    }

    /// `Q_q = {-q^k, 0, q^k}`.
    pub fn q_symmetric(q: f64) -> Result<Self> {
        Self::new(vec![
            Segment::geometric(q, Orientation::Negative, None)?,
            Segment::geometric(q, Orientation::Positive, None)?,
        ])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn inf(&self) -> f64 {
        self.segments[0].min()
    }

    pub fn sup(&self) -> f64 {
        self.segments[self.segments.len() - 1].max()
    }

    fn canon(&self, seg: usize, local: Local) -> Point {
        if seg > 0 && Some(local) == self.segments[seg].bottom() {
            let prev = &self.segments[seg - 1];
            let top = prev.top().expect("junction has a finite top");
            return Point { seg: seg - 1, local: top, value: prev.value(&top) };
        }
        Point { seg, local, value: self.segments[seg].value(&local) }
    }

    /// Locates a real number in the time scale.
    pub fn point(&self, x: f64) -> Result<Point> {
        for (i, s) in self.segments.iter().enumerate() {
            if let Some(l) = s.locate(x) {
                return Ok(self.canon(i, l));
            }
        }
        Err(Error::NotInTimeScale(x))
    }

    /// Grid point with index `k` of segment `seg`.
    pub fn index_point(&self, seg: usize, k: i64) -> Result<Point> {
        let s = self.segments.get(seg).ok_or_else(|| Error::InvalidTimeScale(format!("no segment {seg}")))?;
        if !s.index_in_range(k) {
            return Err(Error::InvalidTimeScale(format!("index {k} outside segment {s}")));
        }
        Ok(self.canon(seg, Local::Index(k)))
    }

    /// Point at real coordinate `x` of a dense segment; used by quadrature.
    pub(crate) fn dense_point(&self, seg: usize, x: f64) -> Point {
        self.canon(seg, Local::Real(x))
    }

    /// Smallest point of the time scale that is `>= x`.
    pub fn ceil(&self, x: f64) -> Option<Point> {
        self.segments.iter().enumerate().find_map(|(i, s)| s.ceil(x).map(|l| self.canon(i, l)))
    }

    /// Largest point of the time scale that is `<= x`.
    pub fn floor(&self, x: f64) -> Option<Point> {
        self.segments.iter().enumerate().rev().find_map(|(i, s)| s.floor(x).map(|l| self.canon(i, l)))
    }

    pub fn min_point(&self) -> Option<Point> {
        self.segments[0].bottom().map(|l| self.canon(0, l))
    }

    pub fn max_point(&self) -> Option<Point> {
        let last = self.segments.len() - 1;
        self.segments[last].top().map(|l| self.canon(last, l))
    }

    /// Time order of two points of this time scale.
    pub fn compare(&self, a: &Point, b: &Point) -> Ordering {
        a.seg.cmp(&b.seg).then_with(|| self.segments[a.seg].cmp_local(&a.local, &b.local))
    }

    /// The segment holding the points just after the right-dense point `t`.
    pub(crate) fn forward_segment(&self, t: &Point) -> Option<usize> {
        match self.segments[t.seg].up(&t.local) {
            Move::Stay => Some(t.seg),
            Move::Edge if t.seg + 1 < self.segments.len() => Some(t.seg + 1),
            _ => None,
        }
    }

    /// Largest point of segment `seg`, if bounded above.
    pub fn segment_top(&self, seg: usize) -> Option<Point> {
        self.segments.get(seg)?.top().map(|l| self.canon(seg, l))
    }

    /// Forward jump operator.
    pub fn sigma(&self, t: &Point) -> Point {
        let seg = &self.segments[t.seg];
        match seg.up(&t.local) {
            Move::Stay => *t,
            Move::To(l) => self.canon(t.seg, l),
            Move::Edge => match self.segments.get(t.seg + 1) {
                Some(next) => {
                    let bottom = next.bottom().expect("junction");
                    match next.up(&bottom) {
                        Move::To(l) => self.canon(t.seg + 1, l),
                        _ => *t,
                    }
                }
                None => *t,
            },
        }
    }

    /// Backward jump operator.
    pub fn rho(&self, t: &Point) -> Point {
        match self.segments[t.seg].down(&t.local) {
            Move::To(l) => self.canon(t.seg, l),
            Move::Stay | Move::Edge => *t,
        }
    }

    /// Forward graininess `sigma(t) - t`.
    pub fn mu(&self, t: &Point) -> f64 {
        let seg = &self.segments[t.seg];
        match seg.up(&t.local) {
            Move::Stay => 0.0,
            Move::To(_) => seg.gap_up(&t.local),
            Move::Edge => match self.segments.get(t.seg + 1) {
                Some(next) => {
                    let bottom = next.bottom().expect("junction");
                    match next.up(&bottom) {
                        Move::To(_) => next.gap_up(&bottom),
                        _ => 0.0,
                    }
                }
                None => 0.0,
            },
        }
    }

    /// Backward graininess `t - rho(t)`.
    pub fn nu(&self, t: &Point) -> f64 {
        let seg = &self.segments[t.seg];
        match seg.down(&t.local) {
            Move::To(_) => seg.gap_down(&t.local),
            Move::Stay | Move::Edge => 0.0,
        }
    }

    /// `mu(t) / nu(t)` at a two-sided scattered point, exact on grid interiors.
    pub fn graininess_ratio(&self, t: &Point) -> Option<f64> {
        let seg = &self.segments[t.seg];
        match (seg.up(&t.local), seg.down(&t.local)) {
            (Move::To(_), Move::To(_)) => Some(seg.interior_ratio()),
            _ => {
                let (mu, nu) = (self.mu(t), self.nu(t));
                (mu > 0.0 && nu > 0.0).then(|| mu / nu)
            }
        }
    }

    pub fn classify(&self, t: &Point) -> PointClass {
        PointClass {
            left_dense: self.rho(t) == *t,
            right_dense: self.sigma(t) == *t,
            is_min: self.min_point().is_some_and(|m| m == *t),
            is_max: self.max_point().is_some_and(|m| m == *t),
        }
    }

    /// Whether `t` lies in `T^κ` (Δ-derivatives are defined there).
    pub fn in_kappa_upper(&self, t: &Point) -> bool {
        match self.max_point() {
            Some(m) if m == *t => self.rho(t) == *t,
            _ => true,
        }
    }

    /// Whether `t` lies in `T_κ` (∇-derivatives are defined there).
    pub fn in_kappa_lower(&self, t: &Point) -> bool {
        match self.min_point() {
            Some(m) if m == *t => self.sigma(t) == *t,
            _ => true,
        }
    }

    /// Points where classification can change: the ends and every junction.
    fn special_points(&self) -> Vec<Point> {
        let mut pts = Vec::new();
        if let Some(m) = self.min_point() {
            pts.push(m);
        }
        for i in 0..self.segments.len() - 1 {
            let top = self.segments[i].top().expect("junction");
            pts.push(self.canon(i, top));
        }
        if let Some(m) = self.max_point() {
            if pts.last() != Some(&m) {
                pts.push(m);
            }
        }
        pts
    }

    /// Regularity test: the infimum is right-dense, the supremum left-dense,
    /// and every other point two-sided dense or two-sided scattered.
    /// Segment interiors are homogeneous, so only junctions and ends are checked.
    pub fn is_regular(&self) -> Regularity {
        for p in self.special_points() {
            let c = self.classify(&p);
            let reason = if c.is_min && !c.right_dense {
                Some("infimum is right-scattered")
            } else if c.is_max && !c.left_dense {
                Some("supremum is left-scattered")
            } else if !c.is_min && !c.is_max && c.left_dense != c.right_dense {
                Some(if c.left_dense {
                    "left-dense but right-scattered"
                } else {
                    "left-scattered but right-dense"
                })
            } else {
                None
            };
            if let Some(r) = reason {
                return Regularity { regular: false, violation: Some((p.value, r.to_string())) };
            }
        }
        Regularity { regular: true, violation: None }
    }

    pub fn require_regular(&self) -> Result<()> {
        match self.is_regular().violation {
            None => Ok(()),
            Some((at, why)) => Err(Error::NotRegular(format!("{why} at t = {at}"))),
        }
    }

    /// Splits a regular time scale into its atoms. Atoms break at every
    /// two-sided dense junction; scattered grids joined at a two-sided
    /// scattered point stay in one atom.
    pub fn atomic_partition(&self) -> Result<Partition> {
        self.require_regular()?;
        let mut atoms = Vec::new();
        let mut switching_points = Vec::new();
        let mut start = 0;
        for i in 0..self.segments.len() - 1 {
            let junction = self.canon(i, self.segments[i].top().expect("junction"));
            if self.classify(&junction).two_sided_dense() {
                atoms.push(TimeScale { segments: self.segments[start..=i].to_vec() });
                switching_points.push(junction.value);
                start = i + 1;
            }
        }
        atoms.push(TimeScale { segments: self.segments[start..].to_vec() });
        Ok(Partition { atoms, switching_points })
    }

    /// Whether the time scale consists of dense points only (a single interval).
    pub fn is_dense_atom(&self) -> bool {
        self.segments.iter().all(Segment::is_dense)
    }

    /// The σ-chain `from, σ(from), ..., ρ(to)`. Fails when the span meets a
    /// right-dense point or reaches an accumulation point from below.
    pub fn iterate_scattered(&self, from: &Point, to: &Point) -> Result<Vec<Point>> {
        if self.compare(from, to) == Ordering::Greater {
            return Err(Error::InvalidTimeScale(format!("iterate_scattered needs from <= to, got {from} > {to}")));
        }
        let mut out = Vec::new();
        let mut cur = *from;
        while cur != *to {
            if let Segment::Geometric { orientation: Orientation::Negative, .. } = self.segments[cur.seg] {
                if cur.local != Local::Accumulation && (to.seg > cur.seg || to.local == Local::Accumulation) {
                    return Err(Error::AccumulationInSpan(0.0));
                }
            }
            let next = self.sigma(&cur);
            if next == cur {
                return Err(Error::DenseSpan(cur.value));
            }
            out.push(cur);
            cur = next;
        }
        Ok(out)
    }

    /// Decomposes `T ∩ [a, b]` into dense intervals, isolated canonical
    /// points, finite grid runs and infinite tails towards accumulation
    /// points. Every point of `T ∩ [a, b]` that is not interior to a dense
    /// piece appears exactly once.
    pub fn decompose(&self, a: &Point, b: &Point) -> Vec<Piece> {
        let mut out = Vec::new();
        if self.compare(a, b) == Ordering::Greater {
            return out;
        }
        for j in a.seg..=b.seg {
            let seg = &self.segments[j];
            let lower = if j == a.seg { a.local } else { seg.bottom().expect("junction") };
            let lower_included = j == a.seg || j == 0;
            let upper = if j == b.seg { b.local } else { seg.top().expect("junction") };
            match seg {
                Segment::Interval { .. } => {
                    let (lo, hi) = (seg.value(&lower), seg.value(&upper));
                    if lower_included {
                        out.push(Piece::Single(self.canon(j, lower)));
                    }
                    if hi > lo {
                        out.push(Piece::Dense { seg: j, lo, hi });
                        out.push(Piece::Single(self.canon(j, upper)));
                    }
                }
                Segment::Uniform { .. } => {
                    let (Local::Index(kl), Local::Index(ku)) = (lower, upper) else {
                        unreachable!("uniform segment carries indices")
                    };
                    let kl = if lower_included { kl } else { kl + 1 };
                    if kl <= ku {
                        out.push(Piece::Run { seg: j, first: kl, last: ku });
                    }
                }
                Segment::Geometric { orientation: Orientation::Positive, .. } => match (lower, upper) {
                    (_, Local::Accumulation) => {
                        if lower_included {
                            out.push(Piece::Single(self.canon(j, Local::Accumulation)));
                        }
                    }
                    (Local::Accumulation, Local::Index(ku)) => {
                        if lower_included {
                            out.push(Piece::Single(self.canon(j, Local::Accumulation)));
                        }
                        out.push(Piece::Tail { seg: j, start: ku });
                    }
                    (Local::Index(kl), Local::Index(ku)) => {
                        if kl <= ku {
                            out.push(Piece::Run { seg: j, first: kl, last: ku });
                        }
                    }
                    _ => unreachable!(),
                },
                Segment::Geometric { orientation: Orientation::Negative, .. } => match (lower, upper) {
                    (Local::Accumulation, _) => {
                        if lower_included {
                            out.push(Piece::Single(self.canon(j, Local::Accumulation)));
                        }
                    }
                    (Local::Index(kl), upper) => {
                        let kl = if lower_included { kl } else { kl - 1 };
                        match upper {
                            Local::Accumulation => {
                                out.push(Piece::Tail { seg: j, start: kl });
                                out.push(Piece::Single(self.canon(j, Local::Accumulation)));
                            }
                            Local::Index(ku) => {
                                if kl >= ku {
                                    out.push(Piece::Run { seg: j, first: kl, last: ku });
                                }
                            }
                            Local::Real(_) => unreachable!(),
                        }
                    }
                    _ => unreachable!(),
                },
            }
        }
        out
    }

    /// Points of a finite run, in time order.
    pub fn run_points(&self, seg: usize, first: i64, last: i64) -> impl Iterator<Item = Point> + '_ {
        let dir = self.segments[seg].index_dir();
        let n = (last - first) * dir;
        (0..=n).map(move |i| self.canon(seg, Local::Index(first + i * dir)))
    }

    /// Points of a tail, moving towards the accumulation point.
    pub fn tail_points(&self, seg: usize, start: i64) -> impl Iterator<Item = Point> + '_ {
        (0..).map(move |i| self.canon(seg, Local::Index(start - i)))
    }

    /// A point of the time scale on the given dense side of `t`, roughly
    /// `h` away. `None` when that side is scattered or absent.
    pub fn dense_neighbor(&self, t: &Point, side: Side, h: f64) -> Option<Point> {
        match side {
            Side::Right => {
                if self.sigma(t) != *t {
                    return None;
                }
                let j = match self.segments[t.seg].up(&t.local) {
                    Move::Stay => t.seg,
                    Move::Edge if t.seg + 1 < self.segments.len() => t.seg + 1,
                    _ => return None,
                };
                match self.segments[j] {
                    Segment::Interval { hi, .. } => {
                        let x = (t.value + h).min(hi);
                        (x > t.value).then(|| self.canon(j, Local::Real(x)))
                    }
                    Segment::Geometric { ratio, orientation: Orientation::Positive, far } => {
                        let mut k = (h.ln() / ratio.ln()).floor() as i64;
                        if let Some(f) = far {
                            k = k.min(f);
                        }
                        Some(self.canon(j, Local::Index(k)))
                    }
                    _ => None,
                }
            }
            Side::Left => {
                if self.rho(t) != *t {
                    return None;
                }
                if !matches!(self.segments[t.seg].down(&t.local), Move::Stay) {
                    return None;
                }
                match self.segments[t.seg] {
                    Segment::Interval { lo, .. } => {
                        let x = (t.value - h).max(lo);
                        (x < t.value).then(|| self.canon(t.seg, Local::Real(x)))
                    }
                    Segment::Geometric { ratio, orientation: Orientation::Negative, far } => {
                        let mut k = (h.ln() / ratio.ln()).floor() as i64;
                        if let Some(f) = far {
                            k = k.min(f);
                        }
                        Some(self.canon(t.seg, Local::Index(k)))
                    }
                    _ => None,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mixed() -> TimeScale {
        TimeScale::new(vec![
            Segment::interval(f64::NEG_INFINITY, 0.0).unwrap(),
            Segment::geometric(2.0, Orientation::Positive, None).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn integer_jumps() {
        let z = TimeScale::integers();
        let t = z.point(3.0).unwrap();
        assert_eq!(z.sigma(&t).value(), 4.0);
        assert_eq!(z.rho(&t).value(), 2.0);
        assert_eq!(z.mu(&t), 1.0);
        assert_eq!(z.nu(&t), 1.0);
    }

    #[test]
    fn interval_jumps_are_trivial() {
        let r = TimeScale::interval(0.0, 1.0).unwrap();
        let t = r.point(0.5).unwrap();
        assert_eq!(r.sigma(&t), t);
        assert_eq!(r.rho(&t), t);
        assert_eq!(r.mu(&t), 0.0);
        assert_eq!(r.nu(&t), 0.0);
    }

    #[test]
    fn geometric_jumps() {
        let g = TimeScale::geometric(2.0).unwrap();
        let t = g.point(8.0).unwrap();
        assert_eq!(g.sigma(&t).value(), 16.0);
        assert_eq!(g.rho(&t).value(), 4.0);
        assert_eq!(g.mu(&t), 8.0);
        assert_eq!(g.nu(&t), 4.0);
        let zero = g.point(0.0).unwrap();
        assert_eq!(g.rho(&zero), zero);
        assert_eq!(g.sigma(&zero), zero);
    }

    #[test]
    fn half_grid_rho() {
        let g = TimeScale::uniform(0.5);
        let t = g.point(1.0).unwrap();
        assert_eq!(g.rho(&t).value(), 0.5);
    }

    #[test]
    fn junction_of_halfline_and_geometric_is_two_sided_dense() {
        let ts = mixed();
        let zero = ts.point(0.0).unwrap();
        assert_eq!(zero.segment(), 0);
        let c = ts.classify(&zero);
        assert!(c.left_dense && c.right_dense);
        assert!(ts.is_regular().regular);
    }

    #[test]
    fn q_symmetric_partition() {
        let qq = TimeScale::q_symmetric(2.0).unwrap();
        assert!(qq.is_regular().regular);
        let p = qq.atomic_partition().unwrap();
        assert_eq!(p.atoms.len(), 2);
        assert_eq!(p.switching_points, vec![0.0]);
        let neg = qq.point(-4.0).unwrap();
        assert_eq!(qq.sigma(&neg).value(), -2.0);
        assert_eq!(qq.mu(&neg), 2.0);
        assert_eq!(qq.nu(&neg), 4.0);
    }

    #[test]
    fn integers_are_one_atom() {
        let p = TimeScale::integers().atomic_partition().unwrap();
        assert_eq!(p.atoms.len(), 1);
        assert!(p.switching_points.is_empty());
    }

    #[test]
    fn halfline_geometric_partition() {
        let p = mixed().atomic_partition().unwrap();
        assert_eq!(p.atoms.len(), 2);
        assert!(p.atoms[0].is_dense_atom());
        assert_eq!(p.switching_points, vec![0.0]);
    }

    #[test]
    fn joined_uniform_grids_form_one_atom() {
        let ts = TimeScale::new(vec![
            Segment::uniform(1.0, 0.0, None, Some(0)).unwrap(),
            Segment::uniform(2.0, 0.0, Some(0), None).unwrap(),
        ])
        .unwrap();
        let zero = ts.point(0.0).unwrap();
        assert_eq!(ts.rho(&zero).value(), -1.0);
        assert_eq!(ts.sigma(&zero).value(), 2.0);
        assert_eq!(ts.atomic_partition().unwrap().atoms.len(), 1);
    }

    #[test]
    fn two_intervals_with_bridge_are_not_regular() {
        // [0,1] ∪ [2,3] needs a two-point grid to be expressed with shared junctions
        let ts = TimeScale::new(vec![
            Segment::interval(0.0, 1.0).unwrap(),
            Segment::uniform(1.0, 1.0, Some(0), Some(1)).unwrap(),
            Segment::interval(2.0, 3.0).unwrap(),
        ])
        .unwrap();
        let r = ts.is_regular();
        assert!(!r.regular);
        assert_eq!(r.violation.unwrap().0, 1.0);
        assert!(ts.atomic_partition().is_err());
    }

    #[test]
    fn gap_and_dense_junction_rejected() {
        let gap = TimeScale::new(vec![Segment::interval(0.0, 1.0).unwrap(), Segment::interval(2.0, 3.0).unwrap()]);
        assert!(matches!(gap, Err(Error::InvalidTimeScale(m)) if m.contains("gap")));
        let dense = TimeScale::new(vec![Segment::interval(0.0, 1.0).unwrap(), Segment::interval(1.0, 3.0).unwrap()]);
        assert!(dense.is_err());
        assert!(Segment::geometric(1.0, Orientation::Positive, None).is_err());
        assert!(Segment::uniform(0.0, 0.0, None, None).is_err());
    }

    #[test]
    fn bounded_grid_is_not_regular() {
        let n = TimeScale::from_segment(Segment::uniform(1.0, 0.0, Some(0), Some(10)).unwrap()).unwrap();
        let r = n.is_regular();
        assert!(!r.regular);
        assert_eq!(r.violation.unwrap().0, 0.0);
    }

    #[test]
    fn iterate_scattered_chains() {
        let z = TimeScale::integers();
        let chain = z.iterate_scattered(&z.point(0.0).unwrap(), &z.point(3.0).unwrap()).unwrap();
        let v: Vec<f64> = chain.iter().map(Point::value).collect();
        assert_eq!(v, vec![0.0, 1.0, 2.0]);

        let g = TimeScale::geometric(2.0).unwrap();
        let chain = g.iterate_scattered(&g.point(1.0).unwrap(), &g.point(8.0).unwrap()).unwrap();
        let v: Vec<f64> = chain.iter().map(Point::value).collect();
        assert_eq!(v, vec![1.0, 2.0, 4.0]);

        let t = z.point(5.0).unwrap();
        assert!(z.iterate_scattered(&t, &t).unwrap().is_empty());

        let ts = mixed();
        let err = ts.iterate_scattered(&ts.point(-1.0).unwrap(), &ts.point(2.0).unwrap());
        assert!(matches!(err, Err(Error::DenseSpan(_))));

        let qq = TimeScale::q_symmetric(2.0).unwrap();
        let err = qq.iterate_scattered(&qq.point(-1.0).unwrap(), &qq.point(1.0).unwrap());
        assert!(matches!(err, Err(Error::AccumulationInSpan(_))));
    }

    #[test]
    fn kappa_sets() {
        let n = TimeScale::from_segment(Segment::uniform(1.0, 0.0, Some(0), Some(10)).unwrap()).unwrap();
        assert!(!n.in_kappa_upper(&n.point(10.0).unwrap()));
        assert!(n.in_kappa_upper(&n.point(9.0).unwrap()));
        assert!(!n.in_kappa_lower(&n.point(0.0).unwrap()));
        let i = TimeScale::interval(0.0, 1.0).unwrap();
        assert!(i.in_kappa_upper(&i.point(1.0).unwrap()));
    }

    #[test]
    fn decompose_mixed_span() {
        let ts = mixed();
        let pieces = ts.decompose(&ts.point(-1.0).unwrap(), &ts.point(4.0).unwrap());
        assert!(pieces.iter().any(|p| matches!(p, Piece::Dense { lo, hi, .. } if *lo == -1.0 && *hi == 0.0)));
        assert!(pieces.iter().any(|p| matches!(p, Piece::Tail { seg: 1, start: 2 })));
        // the junction 0 appears once, owned by the interval
        let zeros = pieces.iter().filter(|p| matches!(p, Piece::Single(q) if q.value() == 0.0)).count();
        assert_eq!(zeros, 1);
    }

    #[test]
    fn ceil_and_floor() {
        let g = TimeScale::geometric(2.0).unwrap();
        assert_eq!(g.ceil(3.0).unwrap().value(), 4.0);
        assert_eq!(g.floor(3.0).unwrap().value(), 2.0);
        assert_eq!(g.ceil(-5.0).unwrap().value(), 0.0);
        let qq = TimeScale::q_symmetric(2.0).unwrap();
        assert_eq!(qq.ceil(-3.0).unwrap().value(), -2.0);
        assert_eq!(qq.floor(-3.0).unwrap().value(), -4.0);
        let z = TimeScale::integers();
        assert_eq!(z.ceil(2.5).unwrap().value(), 3.0);
        assert_eq!(z.floor(-2.5).unwrap().value(), -3.0);
    }

    #[test]
    fn dense_neighbors() {
        let ts = mixed();
        let zero = ts.point(0.0).unwrap();
        let l = ts.dense_neighbor(&zero, Side::Left, 1e-3).unwrap();
        assert!((l.value() + 1e-3).abs() < 1e-15);
        let r = ts.dense_neighbor(&zero, Side::Right, 1e-3).unwrap();
        assert_eq!(r.value(), 2f64.powi(-10));
        let z = TimeScale::integers();
        assert!(z.dense_neighbor(&z.point(0.0).unwrap(), Side::Left, 1e-3).is_none());
    }
}
