//! Outline clean-up: edges whose directions differ by less than a threshold
//! are made exactly parallel with the smallest vertex displacement.

use nalgebra::{DMatrix, DVector};

use crate::geom::{self, Vec2};
use crate::solver::SolveError;

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessResult {
    pub points: Vec<Vec2>,
    pub max_displacement: f64,
    /// Edge index clusters that were snapped to a common direction.
    pub clusters: Vec<Vec<usize>>,
}

fn undirected_angle(d: &Vec2) -> f64 {
    d.y.atan2(d.x).rem_euclid(std::f64::consts::PI)
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(std::f64::consts::PI - d)
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut c = i;
    while parent[c] != r {
        let next = parent[c];
        parent[c] = r;
        c = next;
    }
    r
}

/// Groups edge directions by single linkage: two edges share a cluster when a
/// chain of pairwise angles below `theta` joins them.
pub fn direction_clusters(points: &[Vec2], theta_rad: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let angles: Vec<f64> = (0..n)
        .map(|i| undirected_angle(&(points[(i + 1) % n] - points[i])))
        .collect();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if angle_gap(angles[i], angles[j]) < theta_rad {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Snaps near-parallel outline edges to their cluster's length-weighted mean
/// direction. Vertices move by the least-squares minimal displacement.
pub fn preprocess_outline(
    outline: &[Vec2],
    theta_deg: f64,
) -> Result<PreprocessResult, SolveError> {
    let n = outline.len();
    if n < 3 || !geom::is_simple_polygon(outline) {
        return Err(SolveError::SelfIntersectingOutline);
    }
    let clusters: Vec<Vec<usize>> = direction_clusters(outline, theta_deg.to_radians())
        .into_iter()
        .filter(|c| c.len() > 1)
        .collect();
    let edge = |i: usize| outline[(i + 1) % n] - outline[i];
    let mut rows: Vec<(usize, Vec2)> = Vec::new();
    let mut snapped = Vec::new();
    // Clusters that are already parallel are still constrained, so snapping
    // another cluster cannot tilt them.
    for c in &clusters {
        let first = edge(c[0]);
        let parallel = c.iter().all(|&i| geom::cross2(&first, &edge(i)) == 0.0);
        if parallel {
            let normal = Vec2::new(-first.y, first.x).normalize();
            for &i in c {
                rows.push((i, normal));
            }
            continue;
        }
        let mut acc = Vec2::zeros();
        for &i in c {
            let d = edge(i);
            let a = 2.0 * undirected_angle(&d);
            acc += Vec2::new(a.cos(), a.sin()) * d.norm();
        }
        let mean = 0.5 * acc.y.atan2(acc.x);
        let normal = Vec2::new(-mean.sin(), mean.cos());
        for &i in c {
            rows.push((i, normal));
        }
        snapped.push(c.clone());
    }
    if snapped.is_empty() {
        return Ok(PreprocessResult {
            points: outline.to_vec(),
            max_displacement: 0.0,
            clusters: snapped,
        });
    }
    // normal . (p_{i+1} - p_i) = 0 for each constrained edge.
    let mut c = DMatrix::<f64>::zeros(rows.len(), 2 * n);
    for (r, (i, nrm)) in rows.iter().enumerate() {
        let j = (i + 1) % n;
        c[(r, 2 * i)] = -nrm.x;
        c[(r, 2 * i + 1)] = -nrm.y;
        c[(r, 2 * j)] = nrm.x;
        c[(r, 2 * j + 1)] = nrm.y;
    }
    let p0 = DVector::from_iterator(2 * n, outline.iter().flat_map(|p| [p.x, p.y]));
    let cct = &c * c.transpose();
    let pinv = cct
        .pseudo_inverse(1e-12)
        .map_err(|_| SolveError::SingularSystem)?;
    let p = &p0 - c.transpose() * (pinv * (&c * &p0));
    let points: Vec<Vec2> = (0..n).map(|i| Vec2::new(p[2 * i], p[2 * i + 1])).collect();
    if !geom::is_simple_polygon(&points) {
        return Err(SolveError::SelfIntersectingOutline);
    }
    let max_displacement = (0..n)
        .map(|i| (points[i] - outline[i]).norm())
        .fold(0.0, f64::max);
    Ok(PreprocessResult {
        points,
        max_displacement,
        clusters: snapped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_is_unchanged() {
        let pts = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(8.0, 0.0),
            Vec2::new(8.0, 4.0),
            Vec2::new(0.0, 4.0),
        ];
        let r = preprocess_outline(&pts, 3.0).unwrap();
        assert_eq!(r.points, pts);
        assert_eq!(r.max_displacement, 0.0);
    }

    #[test]
    fn bowtie_is_rejected() {
        let pts = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        assert_eq!(
            preprocess_outline(&pts, 3.0),
            Err(SolveError::SelfIntersectingOutline)
        );
    }
}
