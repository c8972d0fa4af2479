//! Graph layers over the sphere graph: the normalized adjacency, the
//! simplified graph convolution A~^k X W, and the general distance-kernel
//! message-passing layer it specializes.

use ndarray::Array2;

use crate::error::{EctError, Result};
use crate::sphere::{DirectionSet, SphereGraph};

/// A~ = D^{-1/2} A D^{-1/2} with D_{v,v} = |N(v)| and no self-loops, stored
/// as a symmetric sparse adjacency list. Isolated nodes get zero rows.
#[derive(Debug, Clone)]
pub struct NormalizedAdjacency {
    pub n: usize,
    /// neighbors[i] = (j, 1/sqrt(deg_i * deg_j)) for every edge {i, j}.
    neighbors: Vec<Vec<(usize, f64)>>,
}

pub fn normalized_adjacency(graph: &SphereGraph) -> NormalizedAdjacency {
    let n = graph.num_nodes;
    let deg = graph.degrees();
    let mut neighbors = vec![Vec::new(); n];
    for &(i, j) in &graph.edges {
        let w = 1.0 / ((deg[i] * deg[j]) as f64).sqrt();
        neighbors[i].push((j, w));
        neighbors[j].push((i, w));
    }
    for adj in neighbors.iter_mut() {
        adj.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    }
    NormalizedAdjacency { n, neighbors }
}

impl NormalizedAdjacency {
    /// Y = A~ X (sparse-dense product; X is n x c).
    pub fn apply(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.nrows() != self.n {
            return Err(EctError::Shape(format!(
                "feature matrix has {} rows, graph has {} nodes",
                x.nrows(),
                self.n
            )));
        }
        let c = x.ncols();
        let mut y = Array2::zeros((self.n, c));
        for (i, adj) in self.neighbors.iter().enumerate() {
            for &(j, w) in adj {
                for ch in 0..c {
                    y[(i, ch)] += w * x[(j, ch)];
                }
            }
        }
        Ok(y)
    }

    /// A~^k X by repeated sparse products.
    pub fn apply_power(&self, x: &Array2<f64>, k: usize) -> Result<Array2<f64>> {
        let mut y = x.clone();
        for _ in 0..k {
            y = self.apply(&y)?;
        }
        Ok(y)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut m = Array2::zeros((self.n, self.n));
        for (i, adj) in self.neighbors.iter().enumerate() {
            for &(j, w) in adj {
                m[(i, j)] = w;
            }
        }
        m
    }

    /// Largest-magnitude eigenvalue estimate by power iteration.
    pub fn spectral_radius(&self, iterations: usize) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let mut v = Array2::from_elem((self.n, 1), 1.0 / (self.n as f64).sqrt());
        let mut lambda = 0.0;
        for _ in 0..iterations {
            let w = self.apply(&v).expect("shape fixed");
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            lambda = norm;
            v = w / norm;
        }
        lambda
    }
}

/// Simplified graph convolution: A~^k X W (no nonlinearity inside).
pub fn sgconv_layer(
    adj: &NormalizedAdjacency,
    x: &Array2<f64>,
    w: &Array2<f64>,
    k: usize,
) -> Result<Array2<f64>> {
    if x.ncols() != w.nrows() {
        return Err(EctError::Shape(format!(
            "features have {} channels, weight expects {}",
            x.ncols(),
            w.nrows()
        )));
    }
    Ok(adj.apply_power(x, k)?.dot(w))
}

/// Piecewise-constant distance kernel g: the value at distance exactly 0,
/// then one c x c' matrix per half-open interval up to its breakpoint
/// (value for previous_break <= d < break, first interval starting just
/// above 0). Distances past the last breakpoint are a domain error.
#[derive(Debug, Clone)]
pub struct PiecewiseGTable {
    g0: Array2<f64>,
    /// (exclusive upper bound, kernel matrix), ascending.
    segments: Vec<(f64, Array2<f64>)>,
}

impl PiecewiseGTable {
    pub fn new(g0: Array2<f64>, segments: Vec<(f64, Array2<f64>)>) -> Result<Self> {
        let shape = g0.dim();
        let mut prev = 0.0;
        for (upper, m) in &segments {
            if *upper <= prev {
                return Err(EctError::Argument(
                    "g_table breakpoints must be positive and ascending".into(),
                ));
            }
            if m.dim() != shape {
                return Err(EctError::Shape("g_table matrices must share a shape".into()));
            }
            prev = *upper;
        }
        Ok(Self { g0, segments })
    }

    /// The GCN specialization: g(0) = n W0, g(d) = n W1 for 0 < d < r, and
    /// zero for all larger distances.
    pub fn gcn_like(n: usize, w0: &Array2<f64>, w1: &Array2<f64>, r: f64) -> Result<Self> {
        let nf = n as f64;
        Self::new(
            w0 * nf,
            vec![(r, w1 * nf), (f64::INFINITY, Array2::zeros(w0.dim()))],
        )
    }

    pub fn lookup(&self, d: f64) -> Result<&Array2<f64>> {
        if d == 0.0 {
            return Ok(&self.g0);
        }
        if d < 0.0 {
            return Err(EctError::GTableDomain(d));
        }
        for (upper, m) in &self.segments {
            if d < *upper {
                return Ok(m);
            }
        }
        Err(EctError::GTableDomain(d))
    }

    pub fn in_dim(&self) -> usize {
        self.g0.nrows()
    }
}

/// Distance-kernel message passing: T(f)(x_i) = (1/n) sum_j g(|x_i - x_j|)
/// applied to f(x_j), including the j = i term through g(0). Features are
/// rows, so each row is right-multiplied by the kernel matrix.
pub fn mpnn_layer(
    directions: &DirectionSet,
    features: &Array2<f64>,
    g_table: &PiecewiseGTable,
) -> Result<Array2<f64>> {
    let n = directions.len();
    if features.nrows() != n {
        return Err(EctError::Shape(format!(
            "feature matrix has {} rows, direction set has {n} points",
            features.nrows()
        )));
    }
    if features.ncols() != g_table.in_dim() {
        return Err(EctError::Shape(format!(
            "feature matrix has {} channels, g_table expects {}",
            features.ncols(),
            g_table.in_dim()
        )));
    }
    let pts = directions.points();
    let dist = |a: &[f64; 3], b: &[f64; 3]| -> f64 {
        let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    };
    let c_out = g_table.g0.ncols();
    let mut out = Array2::zeros((n, c_out));
    for i in 0..n {
        for j in 0..n {
            let d = if i == j { 0.0 } else { dist(&pts[i], &pts[j]) };
            let g = g_table.lookup(d)?;
            let fj = features.row(j);
            for co in 0..c_out {
                let mut acc = 0.0;
                for ci in 0..g.nrows() {
                    acc += fj[ci] * g[(ci, co)];
                }
                out[(i, co)] += acc;
            }
        }
    }
    out /= n as f64;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{icosphere, DirectionSet};
    use ndarray::arr2;

    fn path_graph() -> SphereGraph {
        SphereGraph { num_nodes: 2, edges: vec![(0, 1)], edge_lengths: vec![1.0] }
    }

    #[test]
    fn two_node_path_adjacency() {
        let adj = normalized_adjacency(&path_graph());
        let m = adj.to_dense();
        assert_eq!(m, arr2(&[[0.0, 1.0], [1.0, 0.0]]));
    }

    #[test]
    fn triangle_adjacency_is_half() {
        let g = SphereGraph {
            num_nodes: 3,
            edges: vec![(0, 1), (0, 2), (1, 2)],
            edge_lengths: vec![1.0; 3],
        };
        let m = normalized_adjacency(&g).to_dense();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 0.0 } else { 0.5 };
                assert!((m[(i, j)] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn icosphere_adjacency_regular_and_contractive() {
        let (_, g) = icosphere(1).unwrap();
        let adj = normalized_adjacency(&g);
        let m = adj.to_dense();
        for i in 0..12 {
            assert_eq!(m[(i, i)], 0.0);
            for j in 0..12 {
                let v = m[(i, j)];
                assert!(v == 0.0 || (v - 0.2).abs() < 1e-15);
            }
        }
        assert!(adj.spectral_radius(200) <= 1.0 + 1e-12);
    }

    #[test]
    fn sgconv_k0_is_dense_linear_map() {
        let adj = normalized_adjacency(&path_graph());
        let x = arr2(&[[1.0, 2.0], [3.0, 4.0]]);
        let w = arr2(&[[1.0, 0.0, 1.0], [0.0, 1.0, -1.0]]);
        let y = sgconv_layer(&adj, &x, &w, 0).unwrap();
        assert_eq!(y, x.dot(&w));
    }

    #[test]
    fn sgconv_k39_preserves_constant_column_on_regular_graph() {
        let (_, g) = icosphere(1).unwrap();
        let adj = normalized_adjacency(&g);
        let x = Array2::from_elem((12, 1), 1.0);
        let w = arr2(&[[1.0]]);
        let y = sgconv_layer(&adj, &x, &w, 39).unwrap();
        for v in y.iter() {
            assert!((v - 1.0).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn sgconv_shape_mismatch_errors() {
        let adj = normalized_adjacency(&path_graph());
        let x = arr2(&[[1.0, 2.0], [3.0, 4.0]]);
        let w = arr2(&[[1.0], [2.0], [3.0]]);
        assert!(sgconv_layer(&adj, &x, &w, 1).is_err());
    }

    #[test]
    fn mpnn_identity_kernel() {
        let d = crate::sphere::fibonacci_directions(6).unwrap();
        let n = d.len();
        let mut g0 = Array2::zeros((2, 2));
        g0[(0, 0)] = n as f64;
        g0[(1, 1)] = n as f64;
        let table =
            PiecewiseGTable::new(g0, vec![(f64::INFINITY, Array2::zeros((2, 2)))]).unwrap();
        let f = Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64);
        let out = mpnn_layer(&d, &f, &table).unwrap();
        for (a, b) in out.iter().zip(f.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mpnn_gcn_like_reproduces_gcn_basic() {
        let (d, g) = icosphere(1).unwrap();
        let n = d.len();
        let w0 = arr2(&[[0.3, -0.1], [0.2, 0.5]]);
        let w1 = arr2(&[[1.0, 0.25], [-0.5, 0.75]]);
        // r strictly between the icosahedron edge length and the next
        // pairwise distance, so "0 < d < r" captures exactly the edges.
        let r = 1.2;
        let table = PiecewiseGTable::gcn_like(n, &w0, &w1, r).unwrap();
        let f = Array2::from_shape_fn((n, 2), |(i, j)| ((i + 1) as f64).ln() + j as f64);
        let out = mpnn_layer(&d, &f, &table).unwrap();
        // Oracle: T(f)(v) = f(v) W0 + sum_{u in N(v)} f(u) W1.
        let mut expect = f.dot(&w0);
        for &(i, j) in &g.edges {
            let add_j = f.row(i).dot(&w1);
            let add_i = f.row(j).dot(&w1);
            for c in 0..2 {
                expect[(j, c)] += add_j[c];
                expect[(i, c)] += add_i[c];
            }
        }
        for (a, b) in out.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn mpnn_equivariant_under_distance_preserving_permutation() {
        let (d, _) = icosphere(1).unwrap();
        let n = d.len();
        let syms = crate::sphere::icosahedral_symmetries();
        let perm = d.permutation_under(&syms[7], 1e-9).unwrap();
        let w0 = arr2(&[[0.4]]);
        let w1 = arr2(&[[-0.3]]);
        let table = PiecewiseGTable::gcn_like(n, &w0, &w1, 1.2).unwrap();
        let f = Array2::from_shape_fn((n, 1), |(i, _)| (i as f64 * 0.7).sin());
        let out = mpnn_layer(&d, &f, &table).unwrap();
        // Permuted input: (pi . f)(x_{perm[i]}) = f(x_i).
        let mut pf = Array2::zeros((n, 1));
        for i in 0..n {
            pf[(perm[i], 0)] = f[(i, 0)];
        }
        let pout = mpnn_layer(&d, &pf, &table).unwrap();
        for i in 0..n {
            assert!((pout[(perm[i], 0)] - out[(i, 0)]).abs() < 1e-12);
        }
    }

    #[test]
    fn g_table_domain_error() {
        let w0 = arr2(&[[1.0]]);
        let w1 = arr2(&[[1.0]]);
        let table = PiecewiseGTable::new(w0, vec![(0.5, w1)]).unwrap();
        assert!(table.lookup(0.0).is_ok());
        assert!(table.lookup(0.4).is_ok());
        assert!(matches!(table.lookup(0.6), Err(EctError::GTableDomain(_))));
        assert!(matches!(table.lookup(-0.1), Err(EctError::GTableDomain(_))));
        let d = DirectionSet::custom(vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]).unwrap();
        let f = Array2::zeros((2, 1));
        assert!(mpnn_layer(&d, &f, &table).is_err());
    }
}
