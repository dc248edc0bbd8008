#![allow(dead_code)]

use tscalc::{Orientation, Point, Segment, TimeScale};

pub fn rel_err(actual: f64, expected: f64) -> f64 {
    (actual - expected).abs() / expected.abs().max(1.0)
}

pub fn close(actual: f64, expected: f64, tol: f64) -> bool {
    rel_err(actual, expected) <= tol
}

pub fn at(ts: &TimeScale, x: f64) -> Point {
    ts.point(x).unwrap_or_else(|e| panic!("{x}: {e}"))
}

/// `interval(-1, 0); qgrid(2, +)`.
pub fn halfline_geometric() -> TimeScale {
    TimeScale::new(vec![
        Segment::interval(-1.0, 0.0).unwrap(),
        Segment::geometric(2.0, Orientation::Positive, None).unwrap(),
    ])
    .unwrap()
}

/// Uniform grids and geometric grids used by the grid property tests.
pub fn grids() -> Vec<TimeScale> {
    vec![
        TimeScale::integers(),
        TimeScale::uniform(0.5),
        TimeScale::uniform(2.0),
        TimeScale::geometric(2.0).unwrap(),
        TimeScale::geometric(3.0).unwrap(),
        TimeScale::q_symmetric(2.0).unwrap(),
    ]
}

/// An interior point of grid `i` of [`grids`] selected by `k`.
pub fn grid_point(ts: &TimeScale, k: i64) -> Point {
    let seg = ts.segments().len() - 1;
    match ts.segments()[seg] {
        Segment::Uniform { .. } => ts.index_point(seg, k).unwrap(),
        _ => ts.index_point(seg, k.clamp(-6, 3)).unwrap(),
    }
}
