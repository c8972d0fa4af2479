//! Lower-star filtration of an embedded complex along a unit direction.

use crate::complex::EmbeddedComplex;
use crate::error::{EctError, Result};

/// One simplex of a directional filtration: the height at which it enters,
/// its dimension, and its (sorted) vertex tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct FiltrationSimplex {
    pub value: f64,
    pub dim: usize,
    pub verts: Vec<usize>,
}

/// Simplices of a complex ordered by entry height. A simplex enters at the
/// maximum height of its vertices, so faces never enter after cofaces; ties
/// are broken by (value, dimension, lexicographic vertex tuple).
#[derive(Debug, Clone, PartialEq)]
pub struct FiltrationValues {
    entries: Vec<FiltrationSimplex>,
}

impl FiltrationValues {
    pub fn entries(&self) -> &[FiltrationSimplex] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry heights of every simplex, as an unsorted-multiset comparison aid.
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn min_value(&self) -> Option<f64> {
        self.entries.first().map(|e| e.value)
    }

    pub fn max_value(&self) -> Option<f64> {
        self.entries.iter().map(|e| e.value).fold(None, |m, v| match m {
            None => Some(v),
            Some(x) => Some(x.max(v)),
        })
    }
}

/// Filtration of `complex` by the height function x -> x . v.
///
/// Each simplex enters at the maximum height of its vertices (the sublevel
/// complex of the piecewise-linear height function deformation-retracts onto
/// this vertex-induced subcomplex, so Euler characteristics agree).
pub fn height_values(complex: &EmbeddedComplex, v: &[f64]) -> Result<FiltrationValues> {
    if v.len() != complex.ambient_dim() {
        return Err(EctError::DimensionMismatch(format!(
            "direction has {} coordinates, ambient dimension is {}",
            v.len(),
            complex.ambient_dim()
        )));
    }
    let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(EctError::Argument(format!(
            "direction must be a unit vector; norm is {norm}"
        )));
    }
    let height = |u: usize| -> f64 {
        complex.vertices()[u].iter().zip(v).map(|(a, b)| a * b).sum()
    };
    let mut entries: Vec<FiltrationSimplex> = Vec::new();
    for u in 0..complex.num_vertices() {
        entries.push(FiltrationSimplex { value: height(u), dim: 0, verts: vec![u] });
    }
    for (dim, s) in complex.iter_simplices() {
        let value = s.iter().map(|&u| height(u)).fold(f64::NEG_INFINITY, f64::max);
        entries.push(FiltrationSimplex { value, dim, verts: s.to_vec() });
    }
    entries.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.dim.cmp(&b.dim))
            .then(a.verts.cmp(&b.verts))
    });
    Ok(FiltrationValues { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_vertex_has_value_zero() {
        let k = EmbeddedComplex::new(3, vec![vec![0.0, 0.0, 0.0]], Vec::<Vec<usize>>::new())
            .unwrap();
        let f = height_values(&k, &[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.entries()[0].value, 0.0);
    }

    #[test]
    fn filled_triangle_on_basis_vertices() {
        let k = EmbeddedComplex::new(
            3,
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        let f = height_values(&k, &[1.0, 0.0, 0.0]).unwrap();
        let triangle = f.entries().iter().find(|e| e.dim == 2).unwrap();
        assert_eq!(triangle.value, 1.0);
        // Triangle enters exactly last.
        assert_eq!(f.entries().last().unwrap().dim, 2);
    }

    #[test]
    fn faces_enter_no_later_than_cofaces() {
        let k = crate::sphere::icosphere_mesh(1).unwrap();
        let f = height_values(&k, &[0.0, 0.0, 1.0]).unwrap();
        let position: std::collections::HashMap<&[usize], usize> = f
            .entries()
            .iter()
            .enumerate()
            .map(|(i, e)| (e.verts.as_slice(), i))
            .collect();
        for (i, e) in f.entries().iter().enumerate() {
            if e.dim == 0 {
                continue;
            }
            for drop in 0..e.verts.len() {
                let mut face = e.verts.clone();
                face.remove(drop);
                assert!(position[face.as_slice()] < i);
            }
        }
    }

    #[test]
    fn rotating_complex_matches_rotating_direction() {
        use nalgebra::{DMatrix, DVector};
        let k = crate::sphere::icosphere_mesh(1).unwrap();
        let iso = crate::complex::random_isometry(7);
        let r = iso.rotation().clone();
        // K mapped through R^T, height along v == K, height along R v.
        let rt_iso =
            crate::complex::Isometry::new(r.transpose(), DVector::zeros(3)).unwrap();
        let moved = k.apply_isometry(&rt_iso).unwrap();
        let v = [0.3, -0.4, (1.0f64 - 0.25).sqrt()];
        let rv = &r * DMatrix::from_column_slice(3, 1, &v);
        let rv = [rv[(0, 0)], rv[(1, 0)], rv[(2, 0)]];
        let rv_norm: f64 = rv.iter().map(|x| x * x).sum::<f64>().sqrt();
        let rv = [rv[0] / rv_norm, rv[1] / rv_norm, rv[2] / rv_norm];
        let mut a = height_values(&moved, &v).unwrap().values();
        let mut b = height_values(&k, &rv).unwrap().values();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn non_unit_direction_rejected() {
        let k = EmbeddedComplex::new(3, vec![vec![0.0, 0.0, 0.0]], Vec::<Vec<usize>>::new())
            .unwrap();
        assert!(height_values(&k, &[0.0, 2.0, 0.0]).is_err());
        assert!(height_values(&k, &[0.0, 1.0]).is_err());
    }
}
