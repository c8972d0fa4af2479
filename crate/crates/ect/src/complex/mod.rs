//! Embedded simplicial complexes: construction, validation, isometries,
//! subdivision and the Euler characteristic.

mod geometry;
mod off;
mod subdivide;
mod validate;

pub use off::{emit_off, parse_obj, parse_off};
pub use subdivide::SubdivisionScheme;
pub use validate::ValidationReport;

use std::collections::{BTreeSet, HashSet};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{EctError, Result};

/// Tolerance for the affine-independence (rank) check of simplex vertices.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Tolerance for orthogonality of isometry rotation matrices.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;

/// Per-dimension simplex counts; `k[m]` is the number of m-simplices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexCounts {
    pub k: Vec<usize>,
}

/// A finite simplicial complex embedded in Euclidean space.
///
/// Vertices carry coordinates; simplices of dimension >= 1 are stored as
/// strictly increasing index tuples, face-closed by construction.
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct EmbeddedComplex {
    ambient_dim: usize,
    vertices: Vec<Vec<f64>>,
    /// `higher[d - 1]` holds the d-simplices as sorted tuples, for d >= 1.
    higher: Vec<Vec<Vec<usize>>>,
    /// Hash sets mirroring `higher` for O(1) membership queries.
    sets: Vec<HashSet<Vec<usize>>>,
}

impl EmbeddedComplex {
    /// Builds a complex from vertex coordinates and a set of simplices
    /// (given as vertex index tuples of any dimension). All proper faces
    /// are generated eagerly, duplicates are merged, and every stored
    /// simplex is checked for affine independence at [`DEGENERACY_TOL`].
    pub fn new<I, S>(ambient_dim: usize, vertices: Vec<Vec<f64>>, simplices: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[usize]>,
    {
        if ambient_dim == 0 {
            return Err(EctError::Argument("ambient dimension must be positive".into()));
        }
        for (i, v) in vertices.iter().enumerate() {
            if v.len() != ambient_dim {
                return Err(EctError::DimensionMismatch(format!(
                    "vertex {i} has {} coordinates, expected {ambient_dim}",
                    v.len()
                )));
            }
        }
        let n = vertices.len();
        let mut by_dim: Vec<BTreeSet<Vec<usize>>> = Vec::new();
        for s in simplices {
            let mut tup = s.as_ref().to_vec();
            tup.sort_unstable();
            if tup.windows(2).any(|w| w[0] == w[1]) {
                return Err(EctError::InvalidComplex(format!(
                    "simplex {tup:?} repeats a vertex index"
                )));
            }
            if let Some(&i) = tup.iter().find(|&&i| i >= n) {
                return Err(EctError::InvalidComplex(format!(
                    "simplex {tup:?} references out-of-range vertex {i}"
                )));
            }
            insert_with_faces(&mut by_dim, tup);
        }
        let higher: Vec<Vec<Vec<usize>>> =
            by_dim.into_iter().map(|set| set.into_iter().collect()).collect();
        let complex = Self::from_raw_parts(ambient_dim, vertices, higher);
        for (dim, simplex) in complex.iter_simplices() {
            if dim >= 1 && !complex.is_affinely_independent(simplex) {
                return Err(EctError::Degenerate(format!(
                    "simplex {simplex:?} is affinely dependent at tolerance {DEGENERACY_TOL}"
                )));
            }
        }
        Ok(complex)
    }

    /// Assembles a complex without closure generation or geometric checks.
    /// `higher[d - 1]` must hold the d-simplices. Intended for tests of the
    /// validator and internal paths that already guarantee the invariants.
    pub fn from_raw_parts(
        ambient_dim: usize,
        vertices: Vec<Vec<f64>>,
        higher: Vec<Vec<Vec<usize>>>,
    ) -> Self {
        let sets = higher
            .iter()
            .map(|level| level.iter().cloned().collect::<HashSet<_>>())
            .collect();
        Self { ambient_dim, vertices, higher, sets }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Simplices of the given dimension (`dim >= 1`), sorted lexicographically.
    pub fn simplices(&self, dim: usize) -> &[Vec<usize>] {
        assert!(dim >= 1, "use vertices() for dimension 0");
        self.higher.get(dim - 1).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Largest dimension with at least one simplex (0 for a point cloud).
    pub fn top_dim(&self) -> usize {
        self.higher.len()
    }

    pub fn contains(&self, simplex: &[usize]) -> bool {
        match simplex.len() {
            0 => false,
            1 => simplex[0] < self.vertices.len(),
            m => self.sets.get(m - 2).is_some_and(|s| s.contains(simplex)),
        }
    }

    pub fn counts(&self) -> ComplexCounts {
        let mut k = vec![self.vertices.len()];
        k.extend(self.higher.iter().map(|level| level.len()));
        ComplexCounts { k }
    }

    /// Alternating sum of simplex counts over all dimensions.
    pub fn euler_characteristic(&self) -> i64 {
        self.counts()
            .k
            .iter()
            .enumerate()
            .map(|(m, &km)| if m % 2 == 0 { km as i64 } else { -(km as i64) })
            .sum()
    }

    /// Iterates over every simplex of dimension >= 1 as `(dimension, vertex tuple)`.
    pub fn iter_simplices(&self) -> impl Iterator<Item = (usize, &[usize])> {
        self.higher
            .iter()
            .enumerate()
            .flat_map(|(i, level)| level.iter().map(move |s| (i + 1, s.as_slice())))
    }

    /// Maps every vertex through `x -> R x + w`. Combinatorics unchanged.
    pub fn apply_isometry(&self, iso: &Isometry) -> Result<Self> {
        if iso.dim() != self.ambient_dim {
            return Err(EctError::DimensionMismatch(format!(
                "isometry dimension {} does not match ambient dimension {}",
                iso.dim(),
                self.ambient_dim
            )));
        }
        let vertices = self
            .vertices
            .iter()
            .map(|v| {
                let x = DVector::from_column_slice(v);
                let y = &iso.rotation * x + &iso.translation;
                y.iter().copied().collect()
            })
            .collect();
        Ok(Self::from_raw_parts(self.ambient_dim, vertices, self.higher.clone()))
    }

    /// Divides all coordinates by the population standard deviation of the
    /// coordinates about the centroid. Coordinates are not recentered. The
    /// deviation is measured from the per-axis means, so the scale factor is
    /// invariant under rotations, reflections and translations of the
    /// complex.
    pub fn normalize_scale(&self) -> Result<Self> {
        if self.vertices.len() < 2 {
            return Err(EctError::Argument("normalize_scale needs at least 2 vertices".into()));
        }
        let std = self.coordinate_std();
        let max_abs = self
            .vertices
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, &c| m.max(c.abs()));
        if std <= 1e-15 * (1.0 + max_abs) {
            return Err(EctError::Degenerate(
                "coordinate standard deviation is zero (all vertices identical)".into(),
            ));
        }
        let vertices = self
            .vertices
            .iter()
            .map(|v| v.iter().map(|&c| c / std).collect())
            .collect();
        Ok(Self::from_raw_parts(self.ambient_dim, vertices, self.higher.clone()))
    }

    /// Population standard deviation of the coordinates about the centroid:
    /// sqrt of the mean squared per-axis deviation. Isometry-invariant.
    pub fn coordinate_std(&self) -> f64 {
        let n = self.vertices.len() as f64;
        let mut centroid = vec![0.0f64; self.ambient_dim];
        for v in &self.vertices {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n;
            }
        }
        let sq_sum: f64 = self
            .vertices
            .iter()
            .map(|v| v.iter().zip(&centroid).map(|(x, c)| (x - c).powi(2)).sum::<f64>())
            .sum();
        (sq_sum / (n * self.ambient_dim as f64)).sqrt()
    }

    fn is_affinely_independent(&self, simplex: &[usize]) -> bool {
        let m = simplex.len() - 1;
        if m == 0 {
            return true;
        }
        let base = &self.vertices[simplex[0]];
        let rows: Vec<f64> = simplex[1..]
            .iter()
            .flat_map(|&i| {
                self.vertices[i].iter().zip(base.iter()).map(|(a, b)| a - b).collect::<Vec<_>>()
            })
            .collect();
        let mat = DMatrix::from_row_slice(m, self.ambient_dim, &rows);
        mat.rank(DEGENERACY_TOL) == m
    }
}

fn insert_with_faces(by_dim: &mut Vec<BTreeSet<Vec<usize>>>, tup: Vec<usize>) {
    let dim = tup.len() - 1;
    if dim == 0 {
        return; // vertices are implicit
    }
    while by_dim.len() < dim {
        by_dim.push(BTreeSet::new());
    }
    if !by_dim[dim - 1].insert(tup.clone()) {
        return; // already present together with all faces
    }
    if dim >= 2 {
        for skip in 0..tup.len() {
            let mut face = tup.clone();
            face.remove(skip);
            insert_with_faces(by_dim, face);
        }
    }
}

/// A rigid motion `x -> R x + w` with `R` orthogonal.
#[derive(Debug, Clone)]
pub struct Isometry {
    rotation: DMatrix<f64>,
    translation: DVector<f64>,
}

impl Isometry {
    pub fn new(rotation: DMatrix<f64>, translation: DVector<f64>) -> Result<Self> {
        let n = rotation.nrows();
        if rotation.ncols() != n || translation.len() != n {
            return Err(EctError::DimensionMismatch(
                "rotation must be square and match the translation length".into(),
            ));
        }
        let gram = rotation.transpose() * &rotation;
        let id = DMatrix::<f64>::identity(n, n);
        let max_dev = (gram - id).iter().fold(0.0f64, |m, &e| m.max(e.abs()));
        if max_dev > ORTHOGONALITY_TOL {
            return Err(EctError::Argument(format!(
                "rotation is not orthogonal: max |R^T R - I| = {max_dev:e}"
            )));
        }
        let det = rotation.determinant();
        if (det.abs() - 1.0).abs() > ORTHOGONALITY_TOL {
            return Err(EctError::Argument(format!("det(R) = {det} is not +-1")));
        }
        Ok(Self { rotation, translation })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            rotation: DMatrix::identity(dim, dim),
            translation: DVector::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.rotation.nrows()
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &DVector<f64> {
        &self.translation
    }

    pub fn determinant(&self) -> f64 {
        self.rotation.determinant()
    }

    /// The isometry applying `self` after `first`: `(R2 R1, R2 w1 + w2)`.
    pub fn compose_after(&self, first: &Isometry) -> Result<Self> {
        if self.dim() != first.dim() {
            return Err(EctError::DimensionMismatch("composition of mixed dimensions".into()));
        }
        Ok(Self {
            rotation: &self.rotation * &first.rotation,
            translation: &self.rotation * &first.translation + &self.translation,
        })
    }
}

/// Draws a Haar-uniform element of O(3) (QR of a standard-Gaussian matrix
/// with R-diagonal signs folded into Q) and a standard-normal translation.
/// Deterministic for a given seed.
pub fn random_isometry(seed: u64) -> Isometry {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let mut entries = [0.0f64; 9];
    for e in entries.iter_mut() {
        *e = normal.sample(&mut rng);
    }
    let g = DMatrix::from_row_slice(3, 3, &entries);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..3 {
        if r[(j, j)] < 0.0 {
            for i in 0..3 {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    let mut w = DVector::zeros(3);
    for i in 0..3 {
        w[i] = normal.sample(&mut rng);
    }
    Isometry { rotation: q, translation: w }
}
