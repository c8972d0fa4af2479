//! Property tests for the topological invariants: route equivalence of the
//! Euler curve, subdivision invariance, and the behavior of diagrams and
//! landscapes under translations, rotations and direction perturbations.

mod common;

use common::{random_complex, random_direction};
use ect::complex::{Isometry, SubdivisionScheme};
use ect::net::random_rotation;
use ect::sphere::DirectionSet;
use ect::topo::{
    bottleneck_distance, compute_persistence, ect_field, euler_curve_by_counting,
    euler_curve_from_persistence, height_values, landscape_from_diagram, Grid,
    PersistenceDiagram,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn shifted_diagram(d: &PersistenceDiagram, s: f64) -> PersistenceDiagram {
    let entries = d
        .entries
        .iter()
        .map(|&(b, d)| (b + s, if d.is_finite() { d + s } else { d }))
        .collect();
    PersistenceDiagram::new(d.homology_dim, entries).unwrap()
}

/// Max |birth or death difference| between equally sized sorted diagrams.
fn diagram_discrepancy(a: &PersistenceDiagram, b: &PersistenceDiagram) -> f64 {
    assert_eq!(a.len(), b.len(), "diagram sizes differ in dim {}", a.homology_dim);
    a.entries
        .iter()
        .zip(&b.entries)
        .map(|(&(b1, d1), &(b2, d2))| {
            let db = (b1 - b2).abs();
            let dd = if d1.is_finite() && d2.is_finite() {
                (d1 - d2).abs()
            } else if d1.is_finite() == d2.is_finite() {
                0.0
            } else {
                f64::INFINITY
            };
            db.max(dd)
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// The counting sweep and the persistence-diagram route produce the
    /// same integer curve, bin for bin, along several directions.
    #[test]
    fn euler_curve_routes_agree(seed in any::<u64>()) {
        let k = random_complex(seed);
        let grid = Grid::regular(4.0, 50).unwrap();
        for j in 0..10u64 {
            let v = random_direction(seed.wrapping_add(j).wrapping_mul(31));
            let f = height_values(&k, &v).unwrap();
            let by_count = euler_curve_by_counting(&f, &grid);
            let by_pers = euler_curve_from_persistence(&compute_persistence(&f), &grid);
            prop_assert_eq!(&by_count.values, &by_pers.values);
        }
    }

    /// Subdividing a complex never changes its Euler curves: the field is
    /// an identical integer matrix under both subdivision schemes.
    #[test]
    fn ect_field_is_subdivision_invariant(seed in any::<u64>()) {
        let k = random_complex(seed);
        let dirs = DirectionSet::custom(vec![
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            random_direction(seed ^ 0xabcdef),
        ]).unwrap();
        let base = ect_field(&k, &dirs, 4.0, 48).unwrap();
        for scheme in [SubdivisionScheme::EdgeSplit, SubdivisionScheme::Barycentric] {
            let fine = k.subdivide(scheme).unwrap();
            prop_assert_eq!(fine.euler_characteristic(), k.euler_characteristic());
            let refined = ect_field(&fine, &dirs, 4.0, 48).unwrap();
            prop_assert_eq!(&refined.values, &base.values);
        }
    }

    /// Translating the complex by w shifts each directional diagram by v.w
    /// and leaves entry counts unchanged.
    #[test]
    fn translation_shifts_diagrams(seed in any::<u64>(), wx in -2.0..2.0f64, wy in -2.0..2.0f64, wz in -2.0..2.0f64) {
        let k = random_complex(seed);
        let v = random_direction(seed ^ 0x5eed);
        let iso = Isometry::new(DMatrix::identity(3, 3), DVector::from_vec(vec![wx, wy, wz])).unwrap();
        let moved = k.apply_isometry(&iso).unwrap();
        let shift = v[0] * wx + v[1] * wy + v[2] * wz;
        let before = compute_persistence(&height_values(&k, &v).unwrap());
        let after = compute_persistence(&height_values(&moved, &v).unwrap());
        for (a, b) in before.iter().zip(&after) {
            let expected = shifted_diagram(a, shift);
            prop_assert!(diagram_discrepancy(&expected, b) <= 1e-9);
        }
    }

    /// Rotating the complex and the direction together leaves the diagrams
    /// unchanged (up to floating-point height error).
    #[test]
    fn rotation_preserves_diagrams(seed in any::<u64>()) {
        let k = random_complex(seed);
        let v = random_direction(seed ^ 0x707a7e);
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0xf00d);
        let r = random_rotation(&mut rng);
        let dm = DMatrix::from_fn(3, 3, |i, j| r[(i, j)]);
        let iso = Isometry::new(dm, DVector::zeros(3)).unwrap();
        let moved = k.apply_isometry(&iso).unwrap();
        let rv = r * nalgebra::Vector3::new(v[0], v[1], v[2]);
        let rv = [rv[0], rv[1], rv[2]];
        let before = compute_persistence(&height_values(&k, &v).unwrap());
        let after = compute_persistence(&height_values(&moved, &rv).unwrap());
        for (a, b) in before.iter().zip(&after) {
            prop_assert!(diagram_discrepancy(a, b) <= 1e-9);
        }
    }

    /// Changing the direction moves each diagram by at most
    /// R * ||u - v|| in bottleneck distance, R the largest vertex norm.
    #[test]
    fn diagrams_are_lipschitz_in_the_direction(seed in any::<u64>()) {
        let k = random_complex(seed);
        let u = random_direction(seed ^ 0x11);
        let v = random_direction(seed ^ 0x22);
        let radius = k
            .vertices()
            .iter()
            .map(|p| p.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0f64, f64::max);
        let dist = ((u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2) + (u[2] - v[2]).powi(2)).sqrt();
        let du = compute_persistence(&height_values(&k, &u).unwrap());
        let dv = compute_persistence(&height_values(&k, &v).unwrap());
        for (a, b) in du.iter().zip(&dv) {
            let d = bottleneck_distance(a, b);
            prop_assert!(
                d <= radius * dist + 1e-9,
                "bottleneck {} exceeds Lipschitz bound {}", d, radius * dist
            );
        }
    }

    /// Landscapes inherit the diagram shift: the landscape of a shifted
    /// diagram is the original sampled on a shifted grid.
    #[test]
    fn landscapes_shift_with_diagrams(seed in any::<u64>(), shift in -1.0..1.0f64) {
        let k = random_complex(seed);
        let v = random_direction(seed ^ 0x9a9a);
        let diagrams = compute_persistence(&height_values(&k, &v).unwrap());
        let d0 = &diagrams[0];
        let moved = shifted_diagram(d0, shift);
        let grid = Grid::regular(4.0, 40).unwrap();
        let grid_shifted =
            Grid::new(grid.points().iter().map(|x| x + shift).collect()).unwrap();
        let l0 = landscape_from_diagram(d0, &grid, 3);
        let l1 = landscape_from_diagram(&moved, &grid_shifted, 3);
        for (a, b) in l0.samples.iter().flatten().zip(l1.samples.iter().flatten()) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    /// The final Euler-curve bin always equals the Euler characteristic,
    /// whatever the direction, as long as the complex fits in the range.
    #[test]
    fn curves_saturate_at_chi(seed in any::<u64>()) {
        let k = random_complex(seed);
        let field = ect_field(&k, &DirectionSet::custom(vec![random_direction(seed ^ 7)]).unwrap(), 4.0, 32).unwrap();
        prop_assert_eq!(field.values[(0, 31)] as i64, k.euler_characteristic());
    }
}

// Degenerate/small diagrams never break the bottleneck metric axioms.
proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]
    #[test]
    fn bottleneck_is_a_metric_on_random_diagrams(seed in any::<u64>()) {
        let k1 = random_complex(seed);
        let k2 = random_complex(seed ^ 0xa5a5a5);
        let v = random_direction(seed ^ 0x3c3c);
        let d1 = &compute_persistence(&height_values(&k1, &v).unwrap())[0];
        let d2 = &compute_persistence(&height_values(&k2, &v).unwrap())[0];
        let d12 = bottleneck_distance(d1, d2);
        let d21 = bottleneck_distance(d2, d1);
        // Both sides may legitimately be +inf (essential-class count
        // mismatch); equality covers that case.
        prop_assert!(d12 == d21 || (d12 - d21).abs() <= 1e-12);
        prop_assert!(bottleneck_distance(d1, d1) <= 1e-12);
        prop_assert!(d12 >= 0.0);
    }
}
