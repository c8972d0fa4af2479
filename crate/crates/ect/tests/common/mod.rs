//! Shared helpers for integration tests: seeded random small complexes and
//! random unit directions.

use ect::complex::EmbeddedComplex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// A small random embedded complex: a handful of vertices in a ball and up
/// to `max_cells` random simplices of dimension <= 2 (face closure may add
/// more). Degenerate draws are rejected and retried with a fresh seed.
pub fn random_complex(seed: u64) -> EmbeddedComplex {
    let mut attempt = seed;
    loop {
        let mut rng = ChaCha20Rng::seed_from_u64(attempt);
        let n = rng.gen_range(3..=10usize);
        let vertices: Vec<Vec<f64>> =
            (0..n).map(|_| (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect()).collect();
        let cells = rng.gen_range(1..=10usize);
        let mut simplices: Vec<Vec<usize>> = Vec::new();
        for _ in 0..cells {
            let dim = rng.gen_range(1..=2usize.min(n - 1));
            let mut verts: Vec<usize> = Vec::new();
            while verts.len() < dim + 1 {
                let v = rng.gen_range(0..n);
                if !verts.contains(&v) {
                    verts.push(v);
                }
            }
            verts.sort_unstable();
            if !simplices.contains(&verts) {
                simplices.push(verts);
            }
        }
        match EmbeddedComplex::new(3, vertices, simplices) {
            Ok(k) => return k,
            Err(_) => attempt = attempt.wrapping_mul(6364136223846793005).wrapping_add(1),
        }
    }
}

/// A seeded uniform random unit vector.
pub fn random_direction(seed: u64) -> [f64; 3] {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    loop {
        let v: [f64; 3] = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-3 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}
