//! Subdivision schemes. Both produce complexes covering the same point set
//! as the input, so the Euler characteristic is preserved exactly.

use std::collections::HashMap;

use crate::error::{EctError, Result};

use super::EmbeddedComplex;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubdivisionScheme {
    /// Midpoint split: each triangle becomes 4, each edge becomes 2.
    /// Requires top dimension <= 2.
    EdgeSplit,
    /// Barycentric subdivision via flags of the face poset; works for any
    /// complex.
    Barycentric,
}

impl EmbeddedComplex {
    pub fn subdivide(&self, scheme: SubdivisionScheme) -> Result<Self> {
        match scheme {
            SubdivisionScheme::EdgeSplit => self.edge_split(),
            SubdivisionScheme::Barycentric => self.barycentric(),
        }
    }

    fn edge_split(&self) -> Result<Self> {
        if self.top_dim() > 2 {
            return Err(EctError::UnsupportedScheme(
                "edge_split requires a pure triangle mesh (top dimension <= 2)".into(),
            ));
        }
        let mut vertices = self.vertices().to_vec();
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        for edge in self.simplices(1) {
            let (a, b) = (edge[0], edge[1]);
            let mid: Vec<f64> = self.vertices()[a]
                .iter()
                .zip(&self.vertices()[b])
                .map(|(x, y)| 0.5 * (x + y))
                .collect();
            vertices.push(mid);
            midpoint.insert((a, b), vertices.len() - 1);
        }
        let mid = |a: usize, b: usize| midpoint[&(a.min(b), a.max(b))];
        let mut maximal: Vec<Vec<usize>> = Vec::new();
        for f in self.simplices(2) {
            let (a, b, c) = (f[0], f[1], f[2]);
            let (mab, mbc, mac) = (mid(a, b), mid(b, c), mid(a, c));
            maximal.push(vec![a, mab, mac]);
            maximal.push(vec![b, mab, mbc]);
            maximal.push(vec![c, mac, mbc]);
            maximal.push(vec![mab, mbc, mac]);
        }
        for e in self.simplices(1) {
            let m = mid(e[0], e[1]);
            maximal.push(vec![e[0], m]);
            maximal.push(vec![e[1], m]);
        }
        Self::new(self.ambient_dim(), vertices, maximal)
    }

    fn barycentric(&self) -> Result<Self> {
        let mut vertices = self.vertices().to_vec();
        // Barycenter index per simplex; vertices reuse their own index.
        let mut bary: HashMap<Vec<usize>, usize> = HashMap::new();
        for v in 0..self.num_vertices() {
            bary.insert(vec![v], v);
        }
        for (_, s) in self.iter_simplices() {
            let center: Vec<f64> = (0..self.ambient_dim())
                .map(|c| s.iter().map(|&v| self.vertices()[v][c]).sum::<f64>() / s.len() as f64)
                .collect();
            vertices.push(center);
            bary.insert(s.to_vec(), vertices.len() - 1);
        }
        let mut maximal: Vec<Vec<usize>> = Vec::new();
        for s in self.maximal_simplices() {
            push_flags(&s, &bary, &mut maximal);
        }
        Self::new(self.ambient_dim(), vertices, maximal)
    }

    /// Simplices not contained in any higher-dimensional stored simplex.
    pub fn maximal_simplices(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for v in 0..self.num_vertices() {
            let covered = self.simplices(1).iter().any(|e| e.contains(&v));
            if !covered {
                out.push(vec![v]);
            }
        }
        for dim in 1..=self.top_dim() {
            for s in self.simplices(dim) {
                let covered = self
                    .simplices(dim + 1)
                    .iter()
                    .any(|t| s.iter().all(|v| t.contains(v)));
                if !covered {
                    out.push(s.clone());
                }
            }
        }
        out
    }
}

/// Emits one (m)-simplex of the barycentric subdivision per vertex ordering
/// of `simplex`: the chain of barycenters of its leading subsets.
fn push_flags(simplex: &[usize], bary: &HashMap<Vec<usize>, usize>, out: &mut Vec<Vec<usize>>) {
    let mut order: Vec<usize> = simplex.to_vec();
    permute_all(&mut order, 0, &mut |perm| {
        let mut chain = Vec::with_capacity(perm.len());
        for end in 1..=perm.len() {
            let mut prefix = perm[..end].to_vec();
            prefix.sort_unstable();
            chain.push(bary[&prefix]);
        }
        out.push(chain);
    });
}

fn permute_all(items: &mut [usize], start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute_all(items, start + 1, visit);
        items.swap(start, i);
    }
}
