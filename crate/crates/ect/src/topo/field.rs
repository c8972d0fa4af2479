//! The Euler curve transform of a complex over a direction set, and its
//! binary on-disk format.

use std::io::{Read, Write};

use ndarray::Array2;
use rayon::prelude::*;

use super::curve::euler_curve_by_counting;
use super::filtration::height_values;
use super::Grid;
use crate::complex::EmbeddedComplex;
use crate::error::{EctError, Result};
use crate::sphere::DirectionSet;

pub const ECTF_MAGIC: &[u8; 4] = b"ECTF";
pub const ECTF_VERSION: u32 = 1;

/// One Euler curve per sampled direction, on the regular grid of (-a, a)
/// with resolution t.
#[derive(Debug, Clone, PartialEq)]
pub struct EctField {
    pub directions: Vec<[f64; 3]>,
    pub a: f64,
    pub t: usize,
    /// num_directions x t, values[(i, j)] = chi at grid point j along
    /// direction i.
    pub values: Array2<i32>,
}

impl EctField {
    pub fn num_directions(&self) -> usize {
        self.directions.len()
    }

    pub fn grid(&self) -> Grid {
        Grid::regular(self.a, self.t).expect("stored parameters are valid")
    }
}

/// Euler curve transform of `complex`: the curve of the height filtration
/// along every direction of `directions`, on the regular grid of (-a, a).
///
/// Warns on stderr (does not fail) if vertex heights fall outside (-a, a).
/// Rows are computed in parallel but owned by their direction index, so the
/// output does not depend on scheduling.
pub fn ect_field(
    complex: &EmbeddedComplex,
    directions: &DirectionSet,
    a: f64,
    t: usize,
) -> Result<EctField> {
    let grid = Grid::regular(a, t)?;
    let max_norm = complex
        .vertices()
        .iter()
        .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0f64, f64::max);
    if max_norm >= a {
        eprintln!(
            "warning: vertex norm {max_norm} reaches the curve range bound a = {a}; \
             heights may saturate outside the grid"
        );
    }
    let rows: Vec<Vec<i32>> = directions
        .points()
        .par_iter()
        .map(|v| {
            let f = height_values(complex, v)?;
            Ok(euler_curve_by_counting(&f, &grid).values)
        })
        .collect::<Result<_>>()?;
    let mut values = Array2::zeros((directions.len(), t));
    // Heights above the last grid point (exactly a) are clamped into the
    // final bin, so every curve ends at the Euler characteristic. This is a
    // no-op when all heights lie inside (-a, a).
    let chi = complex.euler_characteristic() as i32;
    for (i, row) in rows.into_iter().enumerate() {
        for (j, x) in row.into_iter().enumerate() {
            values[(i, j)] = x;
        }
        values[(i, t - 1)] = chi;
    }
    Ok(EctField { directions: directions.points().to_vec(), a, t, values })
}

/// Writes the binary field format: "ECTF" magic, then version,
/// num_directions and t as u32 LE, a as f64 LE, the directions as 3 f64 LE
/// each, and the curve values row-major as i32 LE.
pub fn write_ectf<W: Write>(field: &EctField, mut w: W) -> Result<()> {
    w.write_all(ECTF_MAGIC)?;
    w.write_all(&ECTF_VERSION.to_le_bytes())?;
    w.write_all(&(field.num_directions() as u32).to_le_bytes())?;
    w.write_all(&(field.t as u32).to_le_bytes())?;
    w.write_all(&field.a.to_le_bytes())?;
    for d in &field.directions {
        for &c in d {
            w.write_all(&c.to_le_bytes())?;
        }
    }
    for v in field.values.iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_ectf<R: Read>(mut r: R) -> Result<EctField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != ECTF_MAGIC {
        return Err(EctError::Parse { line: 0, msg: format!("bad magic bytes {magic:?}") });
    }
    let mut u32buf = [0u8; 4];
    let mut f64buf = [0u8; 8];
    let mut read_u32 = |r: &mut R| -> Result<u32> {
        r.read_exact(&mut u32buf)?;
        Ok(u32::from_le_bytes(u32buf))
    };
    let version = read_u32(&mut r)?;
    if version != ECTF_VERSION {
        return Err(EctError::Parse {
            line: 0,
            msg: format!("unsupported format version {version}"),
        });
    }
    let num_directions = read_u32(&mut r)? as usize;
    let t = read_u32(&mut r)? as usize;
    r.read_exact(&mut f64buf)?;
    let a = f64::from_le_bytes(f64buf);
    if !(a > 0.0 && a.is_finite()) || t == 0 {
        return Err(EctError::Parse {
            line: 0,
            msg: format!("invalid header fields a = {a}, t = {t}"),
        });
    }
    let mut directions = Vec::with_capacity(num_directions);
    for _ in 0..num_directions {
        let mut d = [0.0f64; 3];
        for c in d.iter_mut() {
            r.read_exact(&mut f64buf)?;
            *c = f64::from_le_bytes(f64buf);
        }
        directions.push(d);
    }
    let mut values = Array2::zeros((num_directions, t));
    let mut i32buf = [0u8; 4];
    for i in 0..num_directions {
        for j in 0..t {
            r.read_exact(&mut i32buf)?;
            values[(i, j)] = i32::from_le_bytes(i32buf);
        }
    }
    Ok(EctField { directions, a, t, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{fibonacci_directions, icosphere, icosphere_mesh};

    #[test]
    fn sphere_curves_end_at_two() {
        let k = icosphere_mesh(1).unwrap();
        let (dirs, _) = icosphere(1).unwrap();
        let f = ect_field(&k, &dirs, 8.0, 64).unwrap();
        assert_eq!(f.values.nrows(), 12);
        for i in 0..f.num_directions() {
            assert_eq!(f.values[(i, 63)], 2);
            assert_eq!(f.values[(i, 0)], 0);
        }
    }

    #[test]
    fn field_matches_subdivided_field() {
        use crate::complex::SubdivisionScheme;
        let k = icosphere_mesh(1).unwrap();
        let s = k.subdivide(SubdivisionScheme::EdgeSplit).unwrap();
        let dirs = fibonacci_directions(20).unwrap();
        let f1 = ect_field(&k, &dirs, 8.0, 128).unwrap();
        let f2 = ect_field(&s, &dirs, 8.0, 128).unwrap();
        assert_eq!(f1.values, f2.values);
    }

    #[test]
    fn ectf_round_trip() {
        let k = icosphere_mesh(1).unwrap();
        let dirs = fibonacci_directions(7).unwrap();
        let f = ect_field(&k, &dirs, 8.0, 32).unwrap();
        let mut buf = Vec::new();
        write_ectf(&f, &mut buf).unwrap();
        let back = read_ectf(buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn ectf_rejects_bad_magic() {
        let err = read_ectf(&b"NOPE\x01\x00\x00\x00"[..]).unwrap_err();
        assert!(matches!(err, EctError::Parse { .. }));
    }
}
