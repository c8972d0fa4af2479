//! Near-uniform direction samples on S^2 and the graph over them used by
//! the equivariant network.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, Vector3};

use crate::complex::EmbeddedComplex;
use crate::error::{EctError, Result};

pub const UNIT_TOL: f64 = 1e-12;
pub const DEDUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Icosphere { level: u32 },
    Fibonacci { n: usize },
    /// Hand-assembled point set (e.g. an orbit of a finite symmetry group).
    Custom,
}

/// Sampled unit vectors on S^2 with a fixed, deterministic ordering.
#[derive(Debug, Clone)]
pub struct DirectionSet {
    points: Vec<[f64; 3]>,
    provenance: Provenance,
}

impl DirectionSet {
    pub fn new(points: Vec<[f64; 3]>, provenance: Provenance) -> Result<Self> {
        if points.is_empty() {
            return Err(EctError::Argument("direction set may not be empty".into()));
        }
        for (i, p) in points.iter().enumerate() {
            let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            if (n - 1.0).abs() > UNIT_TOL {
                return Err(EctError::Argument(format!(
                    "direction {i} has norm {n}, expected 1 within {UNIT_TOL:e}"
                )));
            }
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if dist3(&points[i], &points[j]) < DEDUP_TOL {
                    return Err(EctError::Argument(format!(
                        "directions {i} and {j} coincide within {DEDUP_TOL:e}"
                    )));
                }
            }
        }
        Ok(Self { points, provenance })
    }

    pub fn custom(points: Vec<[f64; 3]>) -> Result<Self> {
        Self::new(points, Provenance::Custom)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Index of the sampled direction closest to `p` (Euclidean).
    pub fn nearest(&self, p: &[f64; 3]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, q) in self.points.iter().enumerate() {
            let d = dist3(p, q);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// The permutation `perm` with `R x_i = x_{perm[i]}` within `tol`, when
    /// the rotation maps this point set to itself.
    pub fn permutation_under(&self, rotation: &Matrix3<f64>, tol: f64) -> Option<Vec<usize>> {
        let mut perm = vec![usize::MAX; self.len()];
        let mut used = vec![false; self.len()];
        for (i, p) in self.points.iter().enumerate() {
            let rp = rotation * Vector3::new(p[0], p[1], p[2]);
            let rp = [rp[0], rp[1], rp[2]];
            let j = self.nearest(&rp);
            if used[j] || dist3(&rp, &self.points[j]) > tol {
                return None;
            }
            used[j] = true;
            perm[i] = j;
        }
        Some(perm)
    }

    /// CSV rows "x,y,z" at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,z\n");
        for p in &self.points {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", p[0], p[1], p[2]));
        }
        out
    }
}

/// Undirected graph over sampled directions.
#[derive(Debug, Clone)]
pub struct SphereGraph {
    pub num_nodes: usize,
    /// Unordered pairs, stored as (i, j) with i < j, sorted.
    pub edges: Vec<(usize, usize)>,
    /// Euclidean distance per edge, aligned with `edges`.
    pub edge_lengths: Vec<f64>,
}

impl SphereGraph {
    fn from_edges(points: &[[f64; 3]], mut edges: Vec<(usize, usize)>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        let edge_lengths = edges.iter().map(|&(i, j)| dist3(&points[i], &points[j])).collect();
        Self { num_nodes: points.len(), edges, edge_lengths }
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.num_nodes];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn is_connected(&self) -> bool {
        if self.num_nodes == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; self.num_nodes];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

fn dist3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// The 12 unit vertices and 20 faces of the canonical icosahedron built from
/// cyclic permutations of (0, +-1, +-phi).
fn icosahedron() -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut verts = Vec::with_capacity(12);
    for &s1 in &[1.0f64, -1.0] {
        for &s2 in &[1.0f64, -1.0] {
            verts.push([0.0, s1, s2 * phi]);
            verts.push([s1, s2 * phi, 0.0]);
            verts.push([s2 * phi, 0.0, s1]);
        }
    }
    let norm = (1.0 + phi * phi).sqrt();
    for v in verts.iter_mut() {
        for c in v.iter_mut() {
            *c /= norm;
        }
    }
    // Edges are the closest pairs; faces are mutually adjacent triples.
    let mut min_d = f64::INFINITY;
    for i in 0..12 {
        for j in (i + 1)..12 {
            min_d = min_d.min(dist3(&verts[i], &verts[j]));
        }
    }
    let adjacent = |i: usize, j: usize| (dist3(&verts[i], &verts[j]) - min_d).abs() < 1e-9;
    let mut faces = Vec::with_capacity(20);
    for i in 0..12 {
        for j in (i + 1)..12 {
            if !adjacent(i, j) {
                continue;
            }
            for k in (j + 1)..12 {
                if adjacent(i, k) && adjacent(j, k) {
                    faces.push([i, j, k]);
                }
            }
        }
    }
    debug_assert_eq!(faces.len(), 20);
    (verts, faces)
}

/// Icosphere point/face construction shared by `icosphere` and
/// `icosphere_mesh`. Level `i` splits every icosahedron edge into `i` edges
/// by a barycentric lattice on each face, with exact lattice-key dedup, then
/// projects radially to the unit sphere.
fn icosphere_points_faces(level: u32) -> Result<(Vec<[f64; 3]>, Vec<[usize; 3]>)> {
    if level == 0 {
        return Err(EctError::Argument("icosphere level must be >= 1".into()));
    }
    let l = level as usize;
    let (base_verts, base_faces) = icosahedron();
    // A lattice point is identified by its nonzero integer barycentric
    // weights over global icosahedron vertex indices, which is exact.
    let mut index_of: BTreeMap<Vec<(usize, usize)>, usize> = BTreeMap::new();
    let mut points: Vec<[f64; 3]> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for f in &base_faces {
        let mut corner = |u: usize, v: usize| -> usize {
            let w = [l - u - v, u, v];
            let mut key: Vec<(usize, usize)> = (0..3)
                .filter(|&c| w[c] > 0)
                .map(|c| (f[c], w[c]))
                .collect();
            key.sort_unstable();
            *index_of.entry(key).or_insert_with(|| {
                let mut p = [0.0f64; 3];
                for c in 0..3 {
                    for (x, pc) in base_verts[f[c]].iter().zip(p.iter_mut()) {
                        *pc += w[c] as f64 * x;
                    }
                }
                let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                points.push([p[0] / n, p[1] / n, p[2] / n]);
                points.len() - 1
            })
        };
        for u in 0..l {
            for v in 0..(l - u) {
                faces.push([corner(u, v), corner(u + 1, v), corner(u, v + 1)]);
                if u + v < l - 1 {
                    faces.push([corner(u + 1, v), corner(u + 1, v + 1), corner(u, v + 1)]);
                }
            }
        }
    }
    debug_assert_eq!(points.len(), 10 * l * l + 2);
    Ok((points, faces))
}

/// Direction samples and triangulation edges of the level-`level` icosphere
/// (10 level^2 + 2 vertices).
pub fn icosphere(level: u32) -> Result<(DirectionSet, SphereGraph)> {
    let (points, faces) = icosphere_points_faces(level)?;
    let mut edges = Vec::with_capacity(faces.len() * 3);
    for f in &faces {
        for (a, b) in [(f[0], f[1]), (f[0], f[2]), (f[1], f[2])] {
            edges.push((a.min(b), a.max(b)));
        }
    }
    let graph = SphereGraph::from_edges(&points, edges);
    let set = DirectionSet::new(points, Provenance::Icosphere { level })?;
    Ok((set, graph))
}

/// The icosphere as an embedded triangle mesh (unit sphere, chi = 2).
pub fn icosphere_mesh(level: u32) -> Result<EmbeddedComplex> {
    let (points, faces) = icosphere_points_faces(level)?;
    let vertices = points.iter().map(|p| p.to_vec()).collect();
    EmbeddedComplex::new(3, vertices, faces.iter().map(|f| f.to_vec()))
}

/// `n` unit vectors from the golden-angle spiral lattice.
pub fn fibonacci_directions(n: usize) -> Result<DirectionSet> {
    if n == 0 {
        return Err(EctError::Argument("fibonacci direction count must be >= 1".into()));
    }
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
        let r = (1.0 - z * z).sqrt();
        let theta = golden_angle * i as f64;
        let p = [r * theta.cos(), r * theta.sin(), z];
        let nn = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        points.push([p[0] / nn, p[1] / nn, p[2] / nn]);
    }
    DirectionSet::new(points, Provenance::Fibonacci { n })
}

/// Graph with an edge {i, j} iff 0 < |x_i - x_j| < r.
pub fn threshold_graph(directions: &DirectionSet, r: f64) -> Result<SphereGraph> {
    if r <= 0.0 {
        return Err(EctError::Argument("threshold must be positive".into()));
    }
    let pts = directions.points();
    let mut edges = Vec::new();
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = dist3(&pts[i], &pts[j]);
            if d > 0.0 && d < r {
                edges.push((i, j));
            }
        }
    }
    Ok(SphereGraph::from_edges(pts, edges))
}

/// The 120 orthogonal matrices of the full icosahedral symmetry group,
/// enumerated over flags (vertex, incident edge, orientation sign).
pub fn icosahedral_symmetries() -> Vec<Matrix3<f64>> {
    let (verts, _) = icosahedron();
    let v: Vec<Vector3<f64>> = verts.iter().map(|p| Vector3::new(p[0], p[1], p[2])).collect();
    let mut min_d = f64::INFINITY;
    for i in 0..12 {
        for j in (i + 1)..12 {
            min_d = min_d.min((v[i] - v[j]).norm());
        }
    }
    let neighbors = |i: usize| -> Vec<usize> {
        (0..12).filter(|&j| j != i && ((v[i] - v[j]).norm() - min_d).abs() < 1e-9).collect()
    };
    let frame = |a: usize, b: usize, sign: f64| -> Matrix3<f64> {
        let x = v[a];
        let u = (v[b] - v[b].dot(&x) * x).normalize();
        let w = sign * x.cross(&u);
        Matrix3::from_columns(&[x, u, w])
    };
    let f0 = frame(0, neighbors(0)[0], 1.0);
    let f0_inv = f0.transpose();
    let maps_vertices = |r: &Matrix3<f64>| -> bool {
        v.iter().all(|p| {
            let rp = r * p;
            v.iter().any(|q| (rp - q).norm() < 1e-9)
        })
    };
    let mut out = Vec::with_capacity(120);
    for a in 0..12 {
        for b in neighbors(a) {
            for sign in [1.0, -1.0] {
                let r = frame(a, b, sign) * f0_inv;
                debug_assert!(maps_vertices(&r));
                out.push(r);
            }
        }
    }
    out
}

/// All 48 signed 3x3 permutation matrices.
pub fn signed_permutation_matrices() -> Vec<Matrix3<f64>> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::with_capacity(48);
    for p in perms {
        for bits in 0..8u32 {
            let mut m = Matrix3::zeros();
            for (row, &col) in p.iter().enumerate() {
                let s = if bits & (1 << row) != 0 { -1.0 } else { 1.0 };
                m[(row, col)] = s;
            }
            out.push(m);
        }
    }
    out
}

/// A 26-point direction set closed under every signed permutation matrix:
/// the normalized axis, edge-midpoint and corner directions of the cube.
pub fn signed_perm_closed_directions() -> DirectionSet {
    let mut points: Vec<[f64; 3]> = Vec::new();
    let mut push_orbit = |seed: [f64; 3]| {
        for m in signed_permutation_matrices() {
            let p = m * Vector3::new(seed[0], seed[1], seed[2]);
            let p = [p[0], p[1], p[2]];
            if !points.iter().any(|q| dist3(q, &p) < 1e-9) {
                points.push(p);
            }
        }
    };
    let s2 = 1.0 / 2.0f64.sqrt();
    let s3 = 1.0 / 3.0f64.sqrt();
    push_orbit([1.0, 0.0, 0.0]);
    push_orbit([s2, s2, 0.0]);
    push_orbit([s3, s3, s3]);
    debug_assert_eq!(points.len(), 26);
    DirectionSet::new(points, Provenance::Custom).expect("orbit points are unit and distinct")
}
