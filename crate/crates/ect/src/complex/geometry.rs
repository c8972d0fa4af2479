//! Geometric primitives used by the pairwise intersection check of the
//! validator. Everything works on 3-vectors with an absolute tolerance.

pub type P3 = [f64; 3];

pub fn sub(a: &P3, b: &P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn dot(a: &P3, b: &P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: &P3, b: &P3) -> P3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: &P3) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &P3, b: &P3) -> f64 {
    norm(&sub(a, b))
}

/// Distance from `p` to segment `[a, b]`.
pub fn point_segment_distance(p: &P3, a: &P3, b: &P3) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(&ab, &ab);
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (dot(&sub(p, a), &ab) / len2).clamp(0.0, 1.0);
    let proj = [a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2]];
    dist(p, &proj)
}

/// Closest distance between segments `[a0, a1]` and `[b0, b1]`.
pub fn segment_segment_distance(a0: &P3, a1: &P3, b0: &P3, b1: &P3) -> f64 {
    let d1 = sub(a1, a0);
    let d2 = sub(b1, b0);
    let r = sub(a0, b0);
    let a = dot(&d1, &d1);
    let e = dot(&d2, &d2);
    let f = dot(&d2, &r);
    let (mut s, mut t);
    if a <= 1e-30 && e <= 1e-30 {
        return dist(a0, b0);
    }
    if a <= 1e-30 {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = dot(&d1, &r);
        if e <= 1e-30 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = dot(&d1, &d2);
            let denom = a * e - b * b;
            s = if denom > 1e-30 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            t = (b * s + f) / e;
            if t < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            }
        }
    }
    let p1 = [a0[0] + s * d1[0], a0[1] + s * d1[1], a0[2] + s * d1[2]];
    let p2 = [b0[0] + t * d2[0], b0[1] + t * d2[1], b0[2] + t * d2[2]];
    dist(&p1, &p2)
}

/// Whether `p` lies within `tol` of the (closed) triangle `t`.
pub fn point_in_triangle(p: &P3, t: &[P3; 3], tol: f64) -> bool {
    let n = cross(&sub(&t[1], &t[0]), &sub(&t[2], &t[0]));
    let nn = norm(&n);
    if nn <= 1e-30 {
        return false;
    }
    let plane_dist = dot(&sub(p, &t[0]), &n) / nn;
    if plane_dist.abs() > tol {
        return false;
    }
    // Barycentric test in the plane.
    let v0 = sub(&t[1], &t[0]);
    let v1 = sub(&t[2], &t[0]);
    let v2 = sub(p, &t[0]);
    let d00 = dot(&v0, &v0);
    let d01 = dot(&v0, &v1);
    let d11 = dot(&v1, &v1);
    let d20 = dot(&v2, &v0);
    let d21 = dot(&v2, &v1);
    let denom = d00 * d11 - d01 * d01;
    if denom.abs() <= 1e-30 {
        return false;
    }
    let b1 = (d11 * d20 - d01 * d21) / denom;
    let b2 = (d00 * d21 - d01 * d20) / denom;
    let scale = d00.max(d11).sqrt().max(1.0);
    let bt = tol / scale;
    b1 >= -bt && b2 >= -bt && b1 + b2 <= 1.0 + bt
}

/// Projects a point to 2D by dropping the dominant axis of `normal`.
fn project2(p: &P3, normal: &P3) -> [f64; 2] {
    let ax = normal
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap();
    match ax {
        0 => [p[1], p[2]],
        1 => [p[0], p[2]],
        _ => [p[0], p[1]],
    }
}

fn shoelace(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        s += poly[i][0] * poly[j][1] - poly[j][0] * poly[i][1];
    }
    0.5 * s
}

/// Area of the intersection of two coplanar triangles (Sutherland-Hodgman
/// clip of `t1` against `t2`). `normal` is a normal of their common plane.
pub fn coplanar_triangle_overlap_area(t1: &[P3; 3], t2: &[P3; 3], normal: &P3) -> f64 {
    let mut subject: Vec<[f64; 2]> = t1.iter().map(|p| project2(p, normal)).collect();
    let mut clip: Vec<[f64; 2]> = t2.iter().map(|p| project2(p, normal)).collect();
    if shoelace(&subject) < 0.0 {
        subject.reverse();
    }
    if shoelace(&clip) < 0.0 {
        clip.reverse();
    }
    let inside = |p: &[f64; 2], a: &[f64; 2], b: &[f64; 2]| {
        (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0.0
    };
    let mut poly = subject;
    for i in 0..clip.len() {
        if poly.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        let mut next: Vec<[f64; 2]> = Vec::with_capacity(poly.len() + 2);
        for j in 0..poly.len() {
            let cur = poly[j];
            let prev = poly[(j + poly.len() - 1) % poly.len()];
            let cur_in = inside(&cur, &a, &b);
            let prev_in = inside(&prev, &a, &b);
            if cur_in != prev_in {
                // edge crossing
                let dx = [cur[0] - prev[0], cur[1] - prev[1]];
                let ex = [b[0] - a[0], b[1] - a[1]];
                let denom = dx[0] * ex[1] - dx[1] * ex[0];
                if denom.abs() > 1e-30 {
                    let t = ((a[0] - prev[0]) * ex[1] - (a[1] - prev[1]) * ex[0]) / denom;
                    next.push([prev[0] + t * dx[0], prev[1] + t * dx[1]]);
                }
            }
            if cur_in {
                next.push(cur);
            }
        }
        poly = next;
    }
    shoelace(&poly).abs()
}

/// Length of the intersection segment of two non-coplanar triangles
/// (Moller interval test). Returns 0 when they do not meet.
pub fn triangle_triangle_intersection_length(t1: &[P3; 3], t2: &[P3; 3], tol: f64) -> f64 {
    let n1 = cross(&sub(&t1[1], &t1[0]), &sub(&t1[2], &t1[0]));
    let n2 = cross(&sub(&t2[1], &t2[0]), &sub(&t2[2], &t2[0]));
    let dv2: Vec<f64> = t2.iter().map(|p| dot(&sub(p, &t1[0]), &n1)).collect();
    let dv1: Vec<f64> = t1.iter().map(|p| dot(&sub(p, &t2[0]), &n2)).collect();
    let scale1 = norm(&n1).max(1e-30);
    let scale2 = norm(&n2).max(1e-30);
    if dv2.iter().all(|&d| d > tol * scale1) || dv2.iter().all(|&d| d < -tol * scale1) {
        return 0.0;
    }
    if dv1.iter().all(|&d| d > tol * scale2) || dv1.iter().all(|&d| d < -tol * scale2) {
        return 0.0;
    }
    let dir = cross(&n1, &n2);
    let dn = norm(&dir);
    if dn <= 1e-30 {
        return 0.0; // coplanar; handled elsewhere
    }
    let dir = [dir[0] / dn, dir[1] / dn, dir[2] / dn];
    let interval = |t: &[P3; 3], dv: &[f64]| -> Option<(f64, f64)> {
        let proj: Vec<f64> = t.iter().map(|p| dot(p, &dir)).collect();
        let mut crossings: Vec<f64> = Vec::new();
        for i in 0..3 {
            let j = (i + 1) % 3;
            if dv[i] == 0.0 {
                crossings.push(proj[i]);
            }
            if (dv[i] > 0.0) != (dv[j] > 0.0) && dv[i] != 0.0 && dv[j] != 0.0 {
                let t_param = dv[i] / (dv[i] - dv[j]);
                crossings.push(proj[i] + t_param * (proj[j] - proj[i]));
            }
        }
        if crossings.is_empty() {
            return None;
        }
        let lo = crossings.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = crossings.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Some((lo, hi))
    };
    let (a_lo, a_hi) = match interval(t1, &dv1) {
        Some(x) => x,
        None => return 0.0,
    };
    let (b_lo, b_hi) = match interval(t2, &dv2) {
        Some(x) => x,
        None => return 0.0,
    };
    (a_hi.min(b_hi) - a_lo.max(b_lo)).max(0.0)
}

/// Axis-aligned bounding box of a point set, inflated by `pad`.
pub fn bbox(points: &[P3], pad: f64) -> ([f64; 3], [f64; 3]) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for c in 0..3 {
            lo[c] = lo[c].min(p[c] - pad);
            hi[c] = hi[c].max(p[c] + pad);
        }
    }
    (lo, hi)
}

pub fn bbox_overlap(a: &([f64; 3], [f64; 3]), b: &([f64; 3], [f64; 3])) -> bool {
    (0..3).all(|c| a.0[c] <= b.1[c] && b.0[c] <= a.1[c])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_area_of_identical_triangles() {
        let t = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let n = [0.0, 0.0, 1.0];
        assert!((coplanar_triangle_overlap_area(&t, &t, &n) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn overlap_area_of_edge_adjacent_triangles_is_zero() {
        let t1 = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let t2 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
        let n = [0.0, 0.0, 1.0];
        assert!(coplanar_triangle_overlap_area(&t1, &t2, &n).abs() < 1e-12);
    }

    #[test]
    fn moller_detects_crossing_triangles() {
        let t1 = [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0]];
        let t2 = [[0.5, 0.5, -1.0], [0.5, 0.5, 1.0], [2.0, 2.0, 0.5]];
        assert!(triangle_triangle_intersection_length(&t1, &t2, 1e-9) > 0.1);
    }

    #[test]
    fn moller_separated_triangles() {
        let t1 = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let t2 = [[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 2.0]];
        assert_eq!(triangle_triangle_intersection_length(&t1, &t2, 1e-9), 0.0);
    }
}
