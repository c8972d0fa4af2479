//! Euler curves of a directional filtration, computed two independent ways:
//! by alternating simplex counts and by reading ranks off persistence
//! diagrams. The two must always agree exactly.

use super::filtration::FiltrationValues;
use super::persistence::PersistenceDiagram;
use super::Grid;

/// Euler characteristic of the sublevel complex, sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerCurve {
    pub grid: Grid,
    pub values: Vec<i32>,
}

/// values[i] = sum_m (-1)^m #{m-simplices with entry value <= x_i}, via one
/// sort and a single sweep over the grid.
pub fn euler_curve_by_counting(filtration: &FiltrationValues, grid: &Grid) -> EulerCurve {
    let mut events: Vec<(f64, i32)> = filtration
        .entries()
        .iter()
        .map(|e| (e.value, if e.dim % 2 == 0 { 1 } else { -1 }))
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut values = Vec::with_capacity(grid.len());
    let mut chi = 0i32;
    let mut next = 0usize;
    for &x in grid.points() {
        while next < events.len() && events[next].0 <= x {
            chi += events[next].1;
            next += 1;
        }
        values.push(chi);
    }
    EulerCurve { grid: grid.clone(), values }
}

/// values[i] = sum_d (-1)^d #{entries of the dimension-d diagram alive at
/// x_i}, using birth <= x < death.
pub fn euler_curve_from_persistence(diagrams: &[PersistenceDiagram], grid: &Grid) -> EulerCurve {
    let mut values = vec![0i32; grid.len()];
    for d in diagrams {
        let sign = if d.homology_dim % 2 == 0 { 1i32 } else { -1 };
        for (slot, &x) in values.iter_mut().zip(grid.points()) {
            *slot += sign * d.alive_at(x) as i32;
        }
    }
    EulerCurve { grid: grid.clone(), values }
}
