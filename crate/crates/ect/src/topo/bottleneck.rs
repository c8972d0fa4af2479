//! Exact bottleneck distance between persistence diagrams: binary search
//! over the sorted candidate costs, with matching feasibility decided by an
//! augmenting-path bipartite matching (diagonal projections allowed).

use super::persistence::PersistenceDiagram;

/// Bottleneck distance. Entries with infinite coordinates are matched only
/// to entries with the same infinity pattern and compared by their finite
/// coordinate; a count mismatch between patterns yields +inf.
pub fn bottleneck_distance(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> f64 {
    #[derive(PartialEq, Eq, Hash, Clone, Copy)]
    enum Class {
        Finite,
        InfDeath,
        InfBirth,
        BothInf,
    }
    let classify = |&(b, d): &(f64, f64)| match (b.is_finite(), d.is_finite()) {
        (true, true) => Class::Finite,
        (true, false) => Class::InfDeath,
        (false, true) => Class::InfBirth,
        (false, false) => Class::BothInf,
    };

    let mut cost = 0.0f64;

    // Infinite classes: optimal max-metric matching of points on a line is
    // the sorted pairing.
    for (class, finite_coord) in [
        (Class::InfDeath, 0usize), // compare births
        (Class::InfBirth, 1usize), // compare deaths
    ] {
        let pick = |d: &PersistenceDiagram| -> Vec<f64> {
            let mut v: Vec<f64> = d
                .entries
                .iter()
                .filter(|e| classify(e) == class)
                .map(|e| if finite_coord == 0 { e.0 } else { e.1 })
                .collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let a = pick(d1);
        let b = pick(d2);
        if a.len() != b.len() {
            return f64::INFINITY;
        }
        for (x, y) in a.iter().zip(&b) {
            cost = cost.max((x - y).abs());
        }
    }
    let count_both = |d: &PersistenceDiagram| {
        d.entries.iter().filter(|e| classify(e) == Class::BothInf).count()
    };
    if count_both(d1) != count_both(d2) {
        return f64::INFINITY;
    }

    let a: Vec<(f64, f64)> =
        d1.entries.iter().filter(|e| classify(e) == Class::Finite).copied().collect();
    let b: Vec<(f64, f64)> =
        d2.entries.iter().filter(|e| classify(e) == Class::Finite).copied().collect();
    cost.max(finite_bottleneck(&a, &b))
}

fn finite_bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let diag_cost = |p: &(f64, f64)| (p.1 - p.0) / 2.0;
    let dist = |p: &(f64, f64), q: &(f64, f64)| (p.0 - q.0).abs().max((p.1 - q.1).abs());

    // Candidate costs: every pairwise distance and every diagonal cost.
    let mut candidates: Vec<f64> = vec![0.0];
    for p in a {
        candidates.push(diag_cost(p));
        for q in b {
            candidates.push(dist(p, q));
        }
    }
    for q in b {
        candidates.push(diag_cost(q));
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // Standard reduction: left side = a-points then one diagonal slot per
    // b-point; right side = b-points then one diagonal slot per a-point.
    // Edges at cost <= c: a_i <-> b_j within c, a_i <-> its own diagonal
    // slot when diag_cost(a_i) <= c, b_j's diagonal slot <-> b_j when
    // diag_cost(b_j) <= c, and diagonal <-> diagonal always (cost 0).
    // Cost c is feasible iff a perfect matching exists.
    let n = a.len();
    let m = b.len();
    let total = n + m;
    let feasible = |c: f64| -> bool {
        let edge = |left: usize, right: usize| -> bool {
            match (left < n, right < m) {
                (true, true) => dist(&a[left], &b[right]) <= c,
                (true, false) => right - m == left && diag_cost(&a[left]) <= c,
                (false, true) => left - n == right && diag_cost(&b[right]) <= c,
                (false, false) => true,
            }
        };
        fn augment(
            u: usize,
            total: usize,
            edge: &dyn Fn(usize, usize) -> bool,
            seen: &mut [bool],
            match_right: &mut [Option<usize>],
        ) -> bool {
            for v in 0..total {
                if seen[v] || !edge(u, v) {
                    continue;
                }
                seen[v] = true;
                let free = match match_right[v] {
                    None => true,
                    Some(w) => augment(w, total, edge, seen, match_right),
                };
                if free {
                    match_right[v] = Some(u);
                    return true;
                }
            }
            false
        }
        let mut match_right: Vec<Option<usize>> = vec![None; total];
        for u in 0..total {
            let mut seen = vec![false; total];
            if !augment(u, total, &edge, &mut seen, &mut match_right) {
                return false;
            }
        }
        true
    };

    // Feasibility is monotone in c, so binary search over the candidates.
    let mut lo = 0usize;
    let mut hi = candidates.len() - 1;
    debug_assert!(feasible(candidates[hi]));
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(entries: Vec<(f64, f64)>) -> PersistenceDiagram {
        PersistenceDiagram::new(0, entries).unwrap()
    }

    #[test]
    fn identical_diagrams_have_distance_zero() {
        let d = diag(vec![(0.0, 2.0), (1.0, 5.0)]);
        assert_eq!(bottleneck_distance(&d, &d), 0.0);
    }

    #[test]
    fn single_point_against_empty() {
        let d1 = diag(vec![(0.0, 2.0)]);
        let d2 = diag(vec![]);
        assert_eq!(bottleneck_distance(&d1, &d2), 1.0);
        assert_eq!(bottleneck_distance(&d2, &d1), 1.0);
    }

    #[test]
    fn direct_match_beats_double_diagonal() {
        let d1 = diag(vec![(0.0, 4.0)]);
        let d2 = diag(vec![(1.0, 4.0)]);
        assert_eq!(bottleneck_distance(&d1, &d2), 1.0);
    }

    #[test]
    fn infinite_entries_compared_by_finite_coordinate() {
        let d1 = diag(vec![(0.0, f64::INFINITY)]);
        let d2 = diag(vec![(0.5, f64::INFINITY)]);
        assert_eq!(bottleneck_distance(&d1, &d2), 0.5);
        let d3 = diag(vec![]);
        assert_eq!(bottleneck_distance(&d1, &d3), f64::INFINITY);
    }

    #[test]
    fn symmetric_and_triangle_on_random_diagrams() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(11);
        for _ in 0..40 {
            let mut gen = |n: usize| {
                let entries = (0..n)
                    .map(|_| {
                        let b: f64 = rng.gen_range(-2.0..2.0);
                        let d: f64 = b + rng.gen_range(0.01..3.0);
                        (b, d)
                    })
                    .collect();
                diag(entries)
            };
            let (x, y, z) = (gen(4), gen(3), gen(5));
            let dxy = bottleneck_distance(&x, &y);
            let dyx = bottleneck_distance(&y, &x);
            assert!((dxy - dyx).abs() < 1e-12);
            let dxz = bottleneck_distance(&x, &z);
            let dyz = bottleneck_distance(&y, &z);
            assert!(dxz <= dxy + dyz + 1e-12);
        }
    }
}
