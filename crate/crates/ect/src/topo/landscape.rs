//! Persistence landscapes: the sequence lambda_c of rank-based functions of
//! a diagram, computed directly from tent functions and, independently, by
//! bisection on the rank function (the oracle form of the definition).

use super::filtration::FiltrationValues;
use super::persistence::{compute_persistence, PersistenceDiagram};
use super::Grid;

/// Grid samples of the first `depth` landscape functions; samples[c-1][i] =
/// lambda_c(x_i). Values are +inf only when the diagram has entries that are
/// infinite on both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceLandscape {
    pub depth: usize,
    pub grid: Grid,
    pub samples: Vec<Vec<f64>>,
}

/// Tent value of the interval (b, d) at x: max(0, min(x - b, d - x)), with
/// half-tents max(0, x - b) when d = +inf and max(0, d - x) when b = -inf.
fn tent(b: f64, d: f64, x: f64) -> f64 {
    let rise = if b == f64::NEG_INFINITY { f64::INFINITY } else { x - b };
    let fall = if d == f64::INFINITY { f64::INFINITY } else { d - x };
    rise.min(fall).max(0.0)
}

/// lambda_c sampled on the grid as the c-th largest tent value per point
/// (0 when fewer than c entries are positive there).
pub fn landscape_from_diagram(
    diagram: &PersistenceDiagram,
    grid: &Grid,
    depth: usize,
) -> PersistenceLandscape {
    let mut samples = vec![vec![0.0f64; grid.len()]; depth];
    let mut heights: Vec<f64> = Vec::with_capacity(diagram.len());
    for (i, &x) in grid.points().iter().enumerate() {
        heights.clear();
        heights.extend(diagram.entries.iter().map(|&(b, d)| tent(b, d, x)));
        heights.sort_by(|a, b| b.total_cmp(a));
        for c in 0..depth {
            samples[c][i] = heights.get(c).copied().unwrap_or(0.0);
        }
    }
    PersistenceLandscape { depth, grid: grid.clone(), samples }
}

/// The rank-definition oracle: lambda_c(x) = sup{m >= 0 | beta^{x-m,x+m} >= c}
/// with beta read off the diagram, evaluated by bisection over m.
pub fn landscape_rank_oracle(
    diagram: &PersistenceDiagram,
    grid: &Grid,
    depth: usize,
) -> PersistenceLandscape {
    let mut samples = vec![vec![0.0f64; grid.len()]; depth];
    for (i, &x) in grid.points().iter().enumerate() {
        for c in 1..=depth {
            samples[c - 1][i] = sup_rank_radius(diagram, x, c);
        }
    }
    PersistenceLandscape { depth, grid: grid.clone(), samples }
}

fn sup_rank_radius(diagram: &PersistenceDiagram, x: f64, c: usize) -> f64 {
    let beta = |m: f64| diagram.rank(x - m, x + m) >= c;
    if !beta(0.0) {
        return 0.0;
    }
    // A radius beyond every finite |x - b| and |d - x| can only be exceeded
    // by entries infinite on both sides.
    let mut hi = 1.0f64;
    for &(b, d) in &diagram.entries {
        if b.is_finite() {
            hi = hi.max(2.0 * (x - b).abs() + 1.0);
        }
        if d.is_finite() {
            hi = hi.max(2.0 * (d - x).abs() + 1.0);
        }
    }
    if beta(hi) {
        return f64::INFINITY;
    }
    let mut lo = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if beta(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs() {
            break;
        }
    }
    // The feasible set {m | beta >= c} may be open at its supremum, so the
    // bisection limit (shared by lo and hi) is the sup either way.
    0.5 * (lo + hi)
}

/// Landscape of a filtration in one homology dimension, via the rank oracle.
pub fn landscape_by_rank(
    filtration: &FiltrationValues,
    grid: &Grid,
    depth: usize,
    dim: usize,
) -> PersistenceLandscape {
    let diagrams = compute_persistence(filtration);
    let diagram = diagrams
        .into_iter()
        .find(|d| d.homology_dim == dim)
        .unwrap_or_else(|| PersistenceDiagram::empty(dim));
    landscape_rank_oracle(&diagram, grid, depth)
}
