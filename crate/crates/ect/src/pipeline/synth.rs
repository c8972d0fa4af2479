//! Synthetic mesh classes with distinct topologies: sphere (χ = 2), torus
//! (χ = 0), double torus (χ = −2) and ellipsoid (χ = 2), each instance
//! perturbed by a seeded smooth low-frequency radial deformation.

use std::collections::BTreeSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{DatasetManifest, ManifestEntry, Split};
use crate::complex::{emit_off, EmbeddedComplex};
use crate::error::{EctError, Result};
use crate::sphere::icosphere_mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshClass {
    Sphere,
    Torus,
    DoubleTorus,
    Ellipsoid,
}

impl MeshClass {
    pub const ALL: [MeshClass; 4] =
        [MeshClass::Sphere, MeshClass::Torus, MeshClass::DoubleTorus, MeshClass::Ellipsoid];

    pub fn name(&self) -> &'static str {
        match self {
            MeshClass::Sphere => "sphere",
            MeshClass::Torus => "torus",
            MeshClass::DoubleTorus => "double_torus",
            MeshClass::Ellipsoid => "ellipsoid",
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        match self {
            MeshClass::Sphere | MeshClass::Ellipsoid => 2,
            MeshClass::Torus => 0,
            MeshClass::DoubleTorus => -2,
        }
    }

    pub fn base_mesh(&self) -> Result<EmbeddedComplex> {
        match self {
            MeshClass::Sphere => icosphere_mesh(3),
            MeshClass::Torus => torus_mesh(2.0, 0.8),
            MeshClass::DoubleTorus => double_torus_mesh(),
            MeshClass::Ellipsoid => {
                let sphere = icosphere_mesh(3)?;
                let scale = [1.6, 1.0, 0.55];
                let vertices = sphere
                    .vertices()
                    .iter()
                    .map(|v| v.iter().zip(scale).map(|(x, s)| x * s).collect())
                    .collect();
                let faces: Vec<Vec<usize>> = sphere.simplices(2).to_vec();
                EmbeddedComplex::new(3, vertices, faces)
            }
        }
    }
}

impl std::str::FromStr for MeshClass {
    type Err = EctError;

    fn from_str(s: &str) -> Result<Self> {
        MeshClass::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| EctError::Argument(format!("unknown mesh class {s:?}")))
    }
}

const TORUS_MAJOR_SEGMENTS: usize = 24;
const TORUS_MINOR_SEGMENTS: usize = 12;

fn torus_points_faces(
    major_r: f64,
    minor_r: f64,
) -> (Vec<Vec<f64>>, Vec<[usize; 3]>) {
    let (nu, nv) = (TORUS_MAJOR_SEGMENTS, TORUS_MINOR_SEGMENTS);
    let idx = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut vertices = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = 2.0 * std::f64::consts::PI * i as f64 / nu as f64;
        for j in 0..nv {
            let v = 2.0 * std::f64::consts::PI * j as f64 / nv as f64;
            let ring = major_r + minor_r * v.cos();
            vertices.push(vec![ring * u.cos(), ring * u.sin(), minor_r * v.sin()]);
        }
    }
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    (vertices, faces)
}

/// Torus of revolution triangulated on a 24×12 vertex grid; χ = 0.
pub fn torus_mesh(major_r: f64, minor_r: f64) -> Result<EmbeddedComplex> {
    let (vertices, faces) = torus_points_faces(major_r, minor_r);
    EmbeddedComplex::new(3, vertices, faces.iter().map(|f| f.to_vec()))
}

/// Removes a vertex and its triangle star, remapping indices; returns the
/// punctured mesh data plus the boundary vertices (hexagon) of the hole,
/// ordered cyclically by angle in the plane orthogonal to `axis` around the
/// removed vertex.
fn puncture(
    vertices: &[Vec<f64>],
    faces: &[[usize; 3]],
    removed: usize,
    axis: [f64; 3],
) -> (Vec<Vec<f64>>, Vec<[usize; 3]>, Vec<usize>) {
    let mut ring: BTreeSet<usize> = BTreeSet::new();
    let mut kept_faces = Vec::new();
    for f in faces {
        if f.contains(&removed) {
            ring.extend(f.iter().copied().filter(|&v| v != removed));
        } else {
            kept_faces.push(*f);
        }
    }
    let mut remap = vec![usize::MAX; vertices.len()];
    let mut new_vertices = Vec::with_capacity(vertices.len() - 1);
    for (i, v) in vertices.iter().enumerate() {
        if i != removed {
            remap[i] = new_vertices.len();
            new_vertices.push(v.clone());
        }
    }
    let new_faces: Vec<[usize; 3]> =
        kept_faces.iter().map(|f| [remap[f[0]], remap[f[1]], remap[f[2]]]).collect();
    // Order the hole boundary by angle in a frame orthogonal to the hole axis.
    let center = &vertices[removed];
    let e1 = if axis[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let u = cross(&axis, &e1);
    let u = normalize(&u);
    let w = cross(&axis, &u);
    let mut ordered: Vec<(f64, usize)> = ring
        .iter()
        .map(|&v| {
            let d: Vec<f64> = vertices[v].iter().zip(center).map(|(a, b)| a - b).collect();
            let d = [d[0], d[1], d[2]];
            (dot(&d, &w).atan2(dot(&d, &u)), remap[v])
        })
        .collect();
    ordered.sort_by(|a, b| a.0.total_cmp(&b.0));
    (new_vertices, new_faces, ordered.into_iter().map(|(_, v)| v).collect())
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize(a: &[f64; 3]) -> [f64; 3] {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Genus-2 surface: two tori side by side, each punctured at the vertex
/// facing the other, joined by a triangulated tube between the two hexagonal
/// hole boundaries. χ = (−1) + (−1) − 0 = −2.
pub fn double_torus_mesh() -> Result<EmbeddedComplex> {
    let (major_r, minor_r, gap) = (2.0, 0.8, 1.2);
    let (verts, faces) = torus_points_faces(major_r, minor_r);
    // Left torus loses the vertex at angle (u, v) = (0, 0): the outermost
    // point (major_r + minor_r, 0, 0), whose hole faces +x.
    let hole_a = 0;
    // Right torus is the same mesh shifted along +x; it loses the vertex at
    // u = π, v = 0, whose hole faces −x.
    let hole_b = (TORUS_MAJOR_SEGMENTS / 2) * TORUS_MINOR_SEGMENTS;
    let (va, fa, ring_a) = puncture(&verts, &faces, hole_a, [1.0, 0.0, 0.0]);
    let shift = 2.0 * (major_r + minor_r) + gap;
    let shifted: Vec<Vec<f64>> =
        verts.iter().map(|v| vec![v[0] + shift, v[1], v[2]]).collect();
    let (vb, fb, ring_b) = puncture(&shifted, &faces, hole_b, [1.0, 0.0, 0.0]);

    let offset = va.len();
    let mut vertices = va;
    vertices.extend(vb);
    let mut all_faces: Vec<[usize; 3]> = fa;
    all_faces.extend(fb.iter().map(|f| [f[0] + offset, f[1] + offset, f[2] + offset]));

    // Bridge the two hexagons with a prism of 12 triangles. Both rings are
    // ordered by the same angular frame, so pairing index-to-index (with the
    // rotation that minimizes total edge length) gives an untwisted tube.
    let n = ring_a.len();
    debug_assert_eq!(n, ring_b.len());
    let edge_len = |a: usize, b: usize| -> f64 {
        vertices[a]
            .iter()
            .zip(&vertices[b + offset])
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let best_rot = (0..n)
        .min_by(|&r1, &r2| {
            let cost = |r: usize| -> f64 {
                (0..n).map(|k| edge_len(ring_a[k], ring_b[(k + r) % n])).sum()
            };
            cost(r1).total_cmp(&cost(r2))
        })
        .unwrap_or(0);
    for k in 0..n {
        let a0 = ring_a[k];
        let a1 = ring_a[(k + 1) % n];
        let b0 = ring_b[(k + best_rot) % n] + offset;
        let b1 = ring_b[(k + 1 + best_rot) % n] + offset;
        all_faces.push([a0, a1, b0]);
        all_faces.push([a1, b0, b1]);
    }
    EmbeddedComplex::new(3, vertices, all_faces.iter().map(|f| f.to_vec()))
}

/// Smooth low-frequency radial deformation about the centroid: each vertex
/// p moves to c + (p − c)·(1 + Σ_m amp_m sin(k_m·(p − c) + φ_m)) with three
/// random low-frequency waves. Combinatorics (hence χ) are unchanged.
pub fn deform_mesh(mesh: &EmbeddedComplex, seed: u64) -> Result<EmbeddedComplex> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let n = mesh.num_vertices() as f64;
    let mut centroid = [0.0f64; 3];
    for v in mesh.vertices() {
        for (c, x) in centroid.iter_mut().zip(v) {
            *c += x / n;
        }
    }
    let waves: Vec<([f64; 3], f64, f64)> = (0..3)
        .map(|_| {
            let dir = normalize(&[
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ]);
            let freq = rng.gen_range(0.3..0.9);
            let k = [dir[0] * freq, dir[1] * freq, dir[2] * freq];
            let amp = rng.gen_range(0.02..0.05);
            let phase = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
            (k, amp, phase)
        })
        .collect();
    let vertices: Vec<Vec<f64>> = mesh
        .vertices()
        .iter()
        .map(|v| {
            let d = [v[0] - centroid[0], v[1] - centroid[1], v[2] - centroid[2]];
            let factor: f64 = 1.0
                + waves
                    .iter()
                    .map(|(k, amp, phase)| amp * (dot(k, &d) + phase).sin())
                    .sum::<f64>();
            (0..3).map(|c| centroid[c] + d[c] * factor).collect()
        })
        .collect();
    let simplices: Vec<Vec<usize>> = mesh.iter_simplices().map(|(_, s)| s.to_vec()).collect();
    EmbeddedComplex::new(3, vertices, simplices)
}

/// Generates `per_class + eval_per_class` deformed instances of each class,
/// writes them as OFF files under `out_dir` and returns the manifest (also
/// written to `out_dir/manifest.json`).
pub fn synth_dataset(
    out_dir: &Path,
    classes: &[MeshClass],
    per_class: usize,
    eval_per_class: usize,
    deform_seed: u64,
) -> Result<DatasetManifest> {
    if per_class == 0 {
        return Err(EctError::Argument("per_class must be at least 1".into()));
    }
    std::fs::create_dir_all(out_dir)?;
    let mut entries = Vec::new();
    for (label, class) in classes.iter().enumerate() {
        let base = class.base_mesh()?;
        debug_assert_eq!(base.euler_characteristic(), class.euler_characteristic());
        for k in 0..per_class + eval_per_class {
            let seed = deform_seed
                .wrapping_add(label as u64 * 1_000_003)
                .wrapping_add(k as u64);
            let mesh = deform_mesh(&base, seed)?;
            let (split, tag) = if k < per_class {
                (Split::Train, "train")
            } else {
                (Split::Eval, "eval")
            };
            let name = format!("{}_{}_{k:02}.off", class.name(), tag);
            std::fs::write(out_dir.join(&name), emit_off(&mesh)?)?;
            entries.push(ManifestEntry { path: name, label, split });
        }
    }
    let manifest = DatasetManifest { entries };
    manifest.save(&out_dir.join("manifest.json"))?;
    Ok(manifest)
}
