//! Persistent homology over Z2 by boundary-matrix reduction, plus the
//! tanh compactification of diagrams.

use std::collections::HashMap;

use super::filtration::FiltrationValues;
use crate::error::{EctError, Result};

/// Multiset of (birth, death) intervals in one homology dimension.
/// Coordinates may be infinite; zero-persistence pairs are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    pub homology_dim: usize,
    pub entries: Vec<(f64, f64)>,
}

impl PersistenceDiagram {
    pub fn new(homology_dim: usize, mut entries: Vec<(f64, f64)>) -> Result<Self> {
        for &(b, d) in &entries {
            if !(b <= d) {
                return Err(EctError::Argument(format!(
                    "diagram entry ({b}, {d}) has birth > death"
                )));
            }
        }
        entries.retain(|&(b, d)| b < d);
        entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        Ok(Self { homology_dim, entries })
    }

    pub fn empty(homology_dim: usize) -> Self {
        Self { homology_dim, entries: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of entries alive at height `x` (birth <= x < death).
    pub fn alive_at(&self, x: f64) -> usize {
        self.entries.iter().filter(|&&(b, d)| b <= x && x < d).count()
    }

    /// Rank beta^{a,b}: entries born by `a` and still alive strictly past `b`.
    pub fn rank(&self, a: f64, b: f64) -> usize {
        self.entries.iter().filter(|&&(birth, death)| birth <= a && death > b).count()
    }
}

/// Symmetric difference of two sorted index lists (Z2 column addition).
fn add_columns(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Persistence diagrams of a directional filtration, one per homology
/// dimension 0..=2 (higher dimensions appended only if they occur).
///
/// Standard Z2 boundary-matrix reduction in filtration order: a column that
/// reduces to zero creates a class born at its simplex's height; a column
/// with pivot row i kills the class created at i, yielding the interval
/// [value(i), value(j)). Unpaired creators give [value, +inf).
pub fn compute_persistence(filtration: &FiltrationValues) -> Vec<PersistenceDiagram> {
    let entries = filtration.entries();
    let n = entries.len();
    let mut position: HashMap<&[usize], usize> = HashMap::with_capacity(n);
    for (i, e) in entries.iter().enumerate() {
        position.insert(e.verts.as_slice(), i);
    }

    // pivot_owner[low] = reduced column with that pivot row.
    let mut pivot_owner: HashMap<usize, usize> = HashMap::new();
    let mut reduced: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut paired_with: Vec<Option<usize>> = vec![None; n]; // creator -> killer
    let mut is_killer: Vec<bool> = vec![false; n];

    for (j, e) in entries.iter().enumerate() {
        let mut col: Vec<usize> = if e.dim == 0 {
            Vec::new()
        } else {
            let mut facets: Vec<usize> = (0..e.verts.len())
                .map(|drop| {
                    let mut face = e.verts.clone();
                    face.remove(drop);
                    position[face.as_slice()]
                })
                .collect();
            facets.sort_unstable();
            facets
        };
        while let Some(&low) = col.last() {
            match pivot_owner.get(&low) {
                Some(&other) => col = add_columns(&col, &reduced[other]),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            pivot_owner.insert(low, j);
            paired_with[low] = Some(j);
            is_killer[j] = true;
        }
        reduced.push(col);
    }

    let max_dim = entries.iter().map(|e| e.dim).max().unwrap_or(0).max(2);
    let mut per_dim: Vec<Vec<(f64, f64)>> = vec![Vec::new(); max_dim + 1];
    for (i, e) in entries.iter().enumerate() {
        if is_killer[i] {
            continue;
        }
        let death = match paired_with[i] {
            Some(j) => entries[j].value,
            None => f64::INFINITY,
        };
        if e.value < death {
            per_dim[e.dim].push((e.value, death));
        }
    }
    per_dim
        .into_iter()
        .enumerate()
        .map(|(dim, entries)| PersistenceDiagram::new(dim, entries).expect("birth <= death"))
        .collect()
}

/// Maps every diagram coordinate through h(x) = a0 * tanh(a1 * x), sending
/// +-inf to +-a0. Strictly increasing, so interval order is preserved.
pub fn compactify_diagram(
    diagram: &PersistenceDiagram,
    a0: f64,
    a1: f64,
) -> Result<PersistenceDiagram> {
    if !(a0 > 0.0 && a0.is_finite()) || !(a1 > 0.0 && a1.is_finite()) {
        return Err(EctError::Argument(format!(
            "compactification constants must be finite and positive, got a0={a0}, a1={a1}"
        )));
    }
    let h = |x: f64| -> f64 {
        if x == f64::INFINITY {
            a0
        } else if x == f64::NEG_INFINITY {
            -a0
        } else {
            a0 * (a1 * x).tanh()
        }
    };
    let entries = diagram.entries.iter().map(|&(b, d)| (h(b), h(d))).collect();
    PersistenceDiagram::new(diagram.homology_dim, entries)
}

/// CSV rows "dim,birth,death" with "inf"/"-inf" literals for infinite
/// coordinates; finite coordinates at 17 significant digits.
pub fn diagrams_to_csv(diagrams: &[PersistenceDiagram]) -> String {
    let fmt = |x: f64| -> String {
        if x == f64::INFINITY {
            "inf".into()
        } else if x == f64::NEG_INFINITY {
            "-inf".into()
        } else {
            format!("{x:.16e}")
        }
    };
    let mut out = String::from("dim,birth,death\n");
    for d in diagrams {
        for &(b, death) in &d.entries {
            out.push_str(&format!("{},{},{}\n", d.homology_dim, fmt(b), fmt(death)));
        }
    }
    out
}

/// Parses the CSV produced by `diagrams_to_csv`.
pub fn diagrams_from_csv(text: &str) -> Result<Vec<PersistenceDiagram>> {
    let parse = |tok: &str, line: usize| -> Result<f64> {
        match tok {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            _ => tok
                .parse()
                .map_err(|_| EctError::Parse { line, msg: format!("bad number {tok:?}") }),
        }
    };
    let mut per_dim: Vec<Vec<(f64, f64)>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() != 3 {
            return Err(EctError::Parse {
                line: i + 1,
                msg: "expected dim,birth,death".into(),
            });
        }
        let dim: usize = toks[0].parse().map_err(|_| EctError::Parse {
            line: i + 1,
            msg: format!("bad dimension {:?}", toks[0]),
        })?;
        if per_dim.len() <= dim {
            per_dim.resize(dim + 1, Vec::new());
        }
        per_dim[dim].push((parse(toks[1], i + 1)?, parse(toks[2], i + 1)?));
    }
    per_dim
        .into_iter()
        .enumerate()
        .map(|(dim, e)| PersistenceDiagram::new(dim, e))
        .collect()
}
