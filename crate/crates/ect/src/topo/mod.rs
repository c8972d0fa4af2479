//! Directional filtrations, Euler curves, persistence over Z2, landscapes,
//! and the distances/compactifications between them.

pub mod bottleneck;
pub mod curve;
pub mod field;
pub mod filtration;
pub mod landscape;
pub mod persistence;

pub use bottleneck::bottleneck_distance;
pub use curve::{euler_curve_by_counting, euler_curve_from_persistence, EulerCurve};
pub use field::{ect_field, read_ectf, write_ectf, EctField};
pub use filtration::{height_values, FiltrationValues};
pub use landscape::{
    landscape_by_rank, landscape_from_diagram, landscape_rank_oracle, PersistenceLandscape,
};
pub use persistence::{compactify_diagram, compute_persistence, PersistenceDiagram};

use crate::error::{EctError, Result};

/// Strictly increasing sample points shared by Euler curves and landscapes.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(EctError::Argument("grid may not be empty".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(EctError::Argument("grid must be strictly increasing".into()));
        }
        Ok(Self { points })
    }

    /// Regular grid x_i = -a + 2a * i / t for i = 1..t, partitioning (-a, a).
    pub fn regular(a: f64, t: usize) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(EctError::Argument(format!("range bound a must be positive, got {a}")));
        }
        if t == 0 {
            return Err(EctError::Argument("resolution t must be positive".into()));
        }
        let points = (1..=t).map(|i| -a + 2.0 * a * i as f64 / t as f64).collect();
        Self::new(points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}
