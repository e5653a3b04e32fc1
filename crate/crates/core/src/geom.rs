//! Small 2D/3D geometric predicates shared by the graph, energy and
//! adjacency modules.

use nalgebra::{Vector2, Vector3};

pub type Vec2 = Vector2<f64>;
pub type Vec3 = Vector3<f64>;

/// Two directions closer than this (in radians, modulo pi) are parallel.
pub const PARALLEL_TOL: f64 = 1e-7;

#[inline]
pub fn cross2(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Signed area of a closed polygon, positive when counter-clockwise.
pub fn signed_area(points: &[Vec2]) -> f64 {
    let n = points.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += cross2(&points[i], &points[(i + 1) % n]);
    }
    0.5 * acc
}

/// Angle between two undirected lines, in `[0, pi/2]`.
pub fn line_angle(a: &Vec2, b: &Vec2) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return f64::INFINITY;
    }
    let s = (cross2(a, b) / (na * nb)).abs().min(1.0);
    let c = (a.dot(b) / (na * nb)).abs();
    s.atan2(c)
}

pub fn is_parallel(a: &Vec2, b: &Vec2) -> bool {
    line_angle(a, b) < PARALLEL_TOL
}

/// Intersection point of the infinite lines `p + t*d` and `q + s*e`.
pub fn line_intersection(p: &Vec2, d: &Vec2, q: &Vec2, e: &Vec2) -> Option<Vec2> {
    let den = cross2(d, e);
    if den.abs() <= f64::EPSILON * d.norm() * e.norm() {
        return None;
    }
    let t = cross2(&(q - p), e) / den;
    Some(p + d * t)
}

/// Distance from `x` to the infinite line through `a` with direction `d`.
pub fn point_line_distance(x: &Vec2, a: &Vec2, d: &Vec2) -> f64 {
    let n = d.norm();
    if n == 0.0 {
        return (x - a).norm();
    }
    (cross2(d, &(x - a)) / n).abs()
}

#[inline]
fn orient(a: &Vec2, b: &Vec2, c: &Vec2) -> f64 {
    cross2(&(b - a), &(c - a))
}

/// Proper crossing of two open segments: the interiors intersect in a single
/// point that is not an endpoint of either segment.
pub fn segments_cross(a0: &Vec2, a1: &Vec2, b0: &Vec2, b1: &Vec2) -> bool {
    let scale = (a1 - a0).norm().max((b1 - b0).norm());
    let eps = 1e-12 * scale * scale;
    let d1 = orient(a0, a1, b0);
    let d2 = orient(a0, a1, b1);
    let d3 = orient(b0, b1, a0);
    let d4 = orient(b0, b1, a1);
    ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps))
        && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
}

/// Closed-segment intersection test, including touching and collinear overlap.
pub fn segments_touch(a0: &Vec2, a1: &Vec2, b0: &Vec2, b1: &Vec2) -> bool {
    let d1 = orient(a0, a1, b0);
    let d2 = orient(a0, a1, b1);
    let d3 = orient(b0, b1, a0);
    let d4 = orient(b0, b1, a1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: &Vec2, q: &Vec2, r: &Vec2| {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    (d1 == 0.0 && on(a0, a1, b0))
        || (d2 == 0.0 && on(a0, a1, b1))
        || (d3 == 0.0 && on(b0, b1, a0))
        || (d4 == 0.0 && on(b0, b1, a1))
}

/// True when no two non-adjacent edges of the closed polygon touch and no
/// vertex repeats.
pub fn is_simple_polygon(points: &[Vec2]) -> bool {
    let n = points.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if points[i] == points[j] {
                return false;
            }
        }
    }
    for i in 0..n {
        let a0 = points[i];
        let a1 = points[(i + 1) % n];
        for j in (i + 1)..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let b0 = points[j];
            let b1 = points[(j + 1) % n];
            if segments_touch(&a0, &a1, &b0, &b1) {
                return false;
            }
        }
    }
    true
}

/// Diagonal of the axis-aligned bounding box.
pub fn bbox_diagonal(points: impl IntoIterator<Item = Vec2>) -> f64 {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(&p);
        hi = hi.sup(&p);
    }
    if !lo.x.is_finite() {
        return 0.0;
    }
    (hi - lo).norm()
}

/// Counter-clockwise angle from `from` to `to`, in `[0, 2*pi)`.
pub fn ccw_angle(from: &Vec2, to: &Vec2) -> f64 {
    let a = cross2(from, to).atan2(from.dot(to));
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_ignores_shared_endpoints() {
        let a = Vec2::new(0.0, 0.0);
        let b = Vec2::new(1.0, 1.0);
        let c = Vec2::new(1.0, 0.0);
        let d = Vec2::new(0.0, 1.0);
        assert!(segments_cross(&a, &b, &c, &d));
        assert!(!segments_cross(&a, &b, &a, &c));
        assert!(!segments_cross(&a, &c, &d, &b));
    }

    #[test]
    fn simple_polygon_detection() {
        let square = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(is_simple_polygon(&square));
        assert!(signed_area(&square) > 0.0);
        let bowtie = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(!is_simple_polygon(&bowtie));
    }

    #[test]
    fn line_angle_is_undirected() {
        let a = Vec2::new(1.0, 0.0);
        assert!(line_angle(&a, &Vec2::new(-3.0, 0.0)) < 1e-15);
        assert!((line_angle(&a, &Vec2::new(0.0, 2.0)) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }
}
