//! Planarity metrics, the aesthetic regularizer, the 2D validity energy and
//! the height-variance regularizer, each with a gradient.

use nalgebra::Matrix3;
use thiserror::Error;

use crate::eigen;
use crate::geom::{self, Vec2, Vec3};
use crate::graph::{Edge, Embedding2, Embedding3, GraphError, RoofGraph};
use crate::validity::{self, ClassifiedEdge};

/// Central finite-difference step.
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnergyError {
    #[error("metric needs at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("roof edge ({}, {}) has zero length", .0.0, .0.1)]
    DegenerateEdge(Edge),
    #[error("metric {0:?} does not apply to a point set")]
    UnsupportedMetric(MetricKind),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MetricKind {
    #[default]
    SmallestEig,
    Det,
    Proj,
    Diag,
    Validity2d,
}

impl MetricKind {
    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::SmallestEig => "smallest_eig",
            MetricKind::Det => "det",
            MetricKind::Proj => "proj",
            MetricKind::Diag => "diag",
            MetricKind::Validity2d => "validity2d",
        }
    }

    pub fn parse(s: &str) -> Option<MetricKind> {
        Some(match s {
            "smallest_eig" => MetricKind::SmallestEig,
            "det" => MetricKind::Det,
            "proj" => MetricKind::Proj,
            "diag" => MetricKind::Diag,
            "validity2d" => MetricKind::Validity2d,
            _ => return None,
        })
    }
}

/// Energy value with a flat gradient, `dim` entries per vertex (or point).
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyValue {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub dim: usize,
}

impl EnergyValue {
    pub fn zeros(n: usize, dim: usize) -> Self {
        EnergyValue {
            value: 0.0,
            gradient: vec![0.0; n * dim],
            dim,
        }
    }

    pub fn grad(&self, i: usize) -> &[f64] {
        &self.gradient[i * self.dim..(i + 1) * self.dim]
    }

    pub fn grad3(&self, i: usize) -> Vec3 {
        let g = self.grad(i);
        Vec3::new(g[0], g[1], g[2])
    }
}

fn covariance(points: &[Vec3]) -> (Vec3, Matrix3<f64>) {
    let m = points.len() as f64;
    let mu = points.iter().sum::<Vec3>() / m;
    let mut c = Matrix3::zeros();
    for p in points {
        let d = p - mu;
        c += d * d.transpose();
    }
    (mu, c / m)
}

/// Value of a planarity metric on one point set.
pub fn face_planarity_value(points: &[Vec3], kind: MetricKind) -> Result<f64, EnergyError> {
    check_count(points, kind)?;
    Ok(match kind {
        MetricKind::SmallestEig => eigen::smallest_eigenpair(&covariance(points).1).0,
        MetricKind::Det => covariance(points).1.determinant().max(0.0),
        MetricKind::Proj => proj_value(points),
        MetricKind::Diag => diag_value(points),
        MetricKind::Validity2d => return Err(EnergyError::UnsupportedMetric(kind)),
    })
}

fn check_count(points: &[Vec3], kind: MetricKind) -> Result<(), EnergyError> {
    let need = if kind == MetricKind::Diag { 4 } else { 3 };
    if points.len() < need {
        return Err(EnergyError::TooFewPoints {
            need,
            got: points.len(),
        });
    }
    Ok(())
}

/// Planarity metric of one face with its gradient per point. The smallest
/// eigenvalue metric has an analytic gradient; the others use central
/// differences.
pub fn face_planarity(points: &[Vec3], kind: MetricKind) -> Result<EnergyValue, EnergyError> {
    check_count(points, kind)?;
    let m = points.len();
    if kind == MetricKind::SmallestEig {
        let (mu, cov) = covariance(points);
        let (value, v) = eigen::smallest_eigenpair(&cov);
        let mut gradient = Vec::with_capacity(3 * m);
        for p in points {
            let g = v * (2.0 / m as f64 * v.dot(&(p - mu)));
            gradient.extend_from_slice(&[g.x, g.y, g.z]);
        }
        return Ok(EnergyValue {
            value,
            gradient,
            dim: 3,
        });
    }
    let value = face_planarity_value(points, kind)?;
    let mut work = points.to_vec();
    let mut gradient = vec![0.0; 3 * m];
    for i in 0..m {
        for k in 0..3 {
            let orig = work[i][k];
            work[i][k] = orig + FD_STEP;
            let fp = face_planarity_value(&work, kind)?;
            work[i][k] = orig - FD_STEP;
            let fm = face_planarity_value(&work, kind)?;
            work[i][k] = orig;
            gradient[3 * i + k] = (fp - fm) / (2.0 * FD_STEP);
        }
    }
    Ok(EnergyValue {
        value,
        gradient,
        dim: 3,
    })
}

/// Sum of squared distances to the plane through the first, middle and last
/// points, or to the best-fit plane when those are nearly collinear.
fn proj_value(points: &[Vec3]) -> f64 {
    let m = points.len();
    let (a, b, c) = (points[0], points[m / 2], points[m - 1]);
    let mut n = (b - a).cross(&(c - a));
    let mut origin = a;
    let lo = points
        .iter()
        .fold(Vec3::repeat(f64::INFINITY), |acc, p| acc.inf(p));
    let hi = points
        .iter()
        .fold(Vec3::repeat(f64::NEG_INFINITY), |acc, p| acc.sup(p));
    let diag2 = (hi - lo).norm_squared();
    if 0.5 * n.norm() < 1e-12 * diag2 {
        let (mu, cov) = covariance(points);
        n = eigen::smallest_eigenpair(&cov).1;
        origin = mu;
    }
    let n = n.normalize();
    points.iter().map(|p| (p - origin).dot(&n).powi(2)).sum()
}

/// Sum of squared distances between the diagonal lines (j, j+2) and
/// (j+1, j+3); near-parallel pairs are skipped.
fn diag_value(points: &[Vec3]) -> f64 {
    diag_distances(points).iter().map(|d| d * d).sum()
}

/// Distances between consecutive diagonal pairs, each pair counted once.
pub fn diag_distances(points: &[Vec3]) -> Vec<f64> {
    let m = points.len();
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for j in 0..m {
        let d1 = sorted_pair(j, (j + 2) % m);
        let d2 = sorted_pair((j + 1) % m, (j + 3) % m);
        let key = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        if d1 == d2 || !seen.insert(key) {
            continue;
        }
        let (a0, a1) = (points[d1.0], points[d1.1]);
        let (b0, b1) = (points[d2.0], points[d2.1]);
        let (u, w) = (a1 - a0, b1 - b0);
        let cr = u.cross(&w);
        if cr.norm() <= 1e-9 * u.norm() * w.norm() {
            continue;
        }
        out.push((b0 - a0).dot(&cr).abs() / cr.norm());
    }
    out
}

fn sorted_pair(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn face_points(emb: &Embedding3, face: &[usize]) -> Vec<Vec3> {
    face.iter().map(|&v| emb.get(v)).collect()
}

/// Sum of the face metric over faces with at least four vertices.
pub fn roof_planarity(
    graph: &RoofGraph,
    emb: &Embedding3,
    kind: MetricKind,
) -> Result<EnergyValue, EnergyError> {
    emb.check_for(graph)?;
    let mut out = EnergyValue::zeros(graph.n_vertices(), 3);
    for face in graph.faces() {
        if face.len() < 4 {
            continue;
        }
        let e = face_planarity(&face_points(emb, face), kind)?;
        out.value += e.value;
        for (k, &v) in face.iter().enumerate() {
            for c in 0..3 {
                out.gradient[3 * v + c] += e.gradient[3 * k + c];
            }
        }
    }
    Ok(out)
}

/// Value-only form of [`roof_planarity`].
pub fn roof_planarity_value(
    graph: &RoofGraph,
    emb: &Embedding3,
    kind: MetricKind,
) -> Result<f64, EnergyError> {
    emb.check_for(graph)?;
    let mut total = 0.0;
    for face in graph.faces() {
        if face.len() >= 4 {
            total += face_planarity_value(&face_points(emb, face), kind)?;
        }
    }
    Ok(total)
}

/// Vertices that one aesthetic term reads.
fn term_vertices(graph: &RoofGraph, c: &ClassifiedEdge) -> Vec<usize> {
    match c {
        ClassifiedEdge::Ridge { edge, outline } => {
            let (a, b) = graph.outline_edge(outline.0);
            let (p, q) = graph.outline_edge(outline.1);
            vec![edge.0, edge.1, a, b, p, q]
        }
        ClassifiedEdge::Bisector {
            edge,
            incoming,
            outgoing,
            ..
        } => {
            let (a, _) = graph.outline_edge(*incoming);
            let (_, b) = graph.outline_edge(*outgoing);
            vec![edge.0, edge.1, a, b]
        }
        ClassifiedEdge::Other { .. } => vec![],
    }
}

fn xy(emb: &Embedding3, v: usize) -> Vec2 {
    let p = emb.get(v);
    Vec2::new(p.x, p.y)
}

fn aesthetic_term(
    graph: &RoofGraph,
    emb: &Embedding3,
    c: &ClassifiedEdge,
) -> Result<f64, EnergyError> {
    match c {
        ClassifiedEdge::Ridge { edge, outline } => {
            let (p, q) = (xy(emb, edge.0), xy(emb, edge.1));
            if p == q {
                return Err(EnergyError::DegenerateEdge(*edge));
            }
            let mid = (p + q) * 0.5;
            let dist = |i: usize| {
                let (a, b) = graph.outline_edge(i);
                let pa = xy(emb, a);
                geom::point_line_distance(&mid, &pa, &(xy(emb, b) - pa))
            };
            Ok((dist(outline.0) - dist(outline.1)).powi(2))
        }
        ClassifiedEdge::Bisector {
            edge,
            corner,
            incoming,
            outgoing,
        } => {
            let c0 = xy(emb, *corner);
            let e = xy(emb, edge.other(*corner)) - c0;
            if e.norm() == 0.0 {
                return Err(EnergyError::DegenerateEdge(*edge));
            }
            let (prev, _) = graph.outline_edge(*incoming);
            let (_, next) = graph.outline_edge(*outgoing);
            let p1 = (xy(emb, prev) - c0).normalize();
            let p2 = (xy(emb, next) - c0).normalize();
            let e = e.normalize();
            Ok((e.dot(&p1) - e.dot(&p2)).powi(2))
        }
        ClassifiedEdge::Other { .. } => Ok(0.0),
    }
}

/// Aesthetic regularizer on the xy projection: corner edges should bisect
/// their outline angle and ridges should be equidistant from their two
/// outline edges.
pub fn aesthetic_energy(graph: &RoofGraph, emb: &Embedding3) -> Result<EnergyValue, EnergyError> {
    emb.check_for(graph)?;
    let classes = validity::classify_roof_edges_detailed(graph, &emb.project_xy());
    aesthetic_energy_with(graph, emb, &classes)
}

/// As [`aesthetic_energy`] with a precomputed classification.
pub fn aesthetic_energy_with(
    graph: &RoofGraph,
    emb: &Embedding3,
    classes: &[ClassifiedEdge],
) -> Result<EnergyValue, EnergyError> {
    let mut out = EnergyValue::zeros(graph.n_vertices(), 3);
    let mut work = emb.clone();
    for c in classes {
        out.value += aesthetic_term(graph, emb, c)?;
        let mut vs = term_vertices(graph, c);
        vs.sort_unstable();
        vs.dedup();
        for v in vs {
            for k in 0..2 {
                let orig = work.get(v);
                let mut p = orig;
                p[k] += FD_STEP;
                work.set(v, p);
                let fp = aesthetic_term(graph, &work, c)?;
                p[k] = orig[k] - FD_STEP;
                work.set(v, p);
                let fm = aesthetic_term(graph, &work, c)?;
                work.set(v, orig);
                out.gradient[3 * v + k] += (fp - fm) / (2.0 * FD_STEP);
            }
        }
    }
    Ok(out)
}

/// Validity energy plus the edges whose endpoint sits on the outline
/// intersection point (scored 0, reported separately).
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityEnergy {
    pub energy: EnergyValue,
    pub degenerate: Vec<Edge>,
}

fn vad(p: Vec2, q: Vec2, l1: (Vec2, Vec2), l2: (Vec2, Vec2)) -> (f64, bool) {
    let d = q - p;
    if d.norm() == 0.0 {
        return (1.0, true);
    }
    if geom::is_parallel(&l1.1, &l2.1) {
        let c = d.normalize().dot(&l1.1.normalize());
        return ((1.0 - c * c).max(0.0), false);
    }
    let x = geom::line_intersection(&l1.0, &l1.1, &l2.0, &l2.1).unwrap();
    let (a, b) = (p - x, q - x);
    let scale = d.norm();
    if a.norm() <= 1e-12 * scale || b.norm() <= 1e-12 * scale {
        return (0.0, true);
    }
    let c = a.normalize().dot(&b.normalize());
    ((1.0 - c * c).max(0.0), false)
}

/// Sum over roof edges of the validity measure: zero exactly when every edge
/// is parallel to, or aligned with the intersection of, its outline edges.
pub fn validity_energy_2d(
    graph: &RoofGraph,
    emb: &Embedding2,
) -> Result<ValidityEnergy, EnergyError> {
    emb.check_for(graph)?;
    let n = graph.n_vertices();
    let mut energy = EnergyValue::zeros(n, 2);
    let mut degenerate = Vec::new();
    for (e, _, _, a, b) in validity::shared_roof_edges(graph) {
        let term = |em: &Embedding2| {
            vad(
                em.get(e.0),
                em.get(e.1),
                validity::outline_line(graph, em, a),
                validity::outline_line(graph, em, b),
            )
        };
        let (val, flagged) = term(emb);
        energy.value += val;
        if flagged {
            degenerate.push(e);
            continue;
        }
        let mut work = emb.clone();
        for v in [e.0, e.1] {
            if graph.is_outline(v) {
                continue;
            }
            for k in 0..2 {
                let orig = work.get(v);
                let mut p = orig;
                p[k] += FD_STEP;
                work.set(v, p);
                let fp = term(&work).0;
                p[k] = orig[k] - FD_STEP;
                work.set(v, p);
                let fm = term(&work).0;
                work.set(v, orig);
                energy.gradient[2 * v + k] += (fp - fm) / (2.0 * FD_STEP);
            }
        }
    }
    Ok(ValidityEnergy { energy, degenerate })
}

/// Population variance with gradient `2 (z_i - mean) / m`.
pub fn variance_energy(z: &[f64]) -> EnergyValue {
    let m = z.len();
    if m == 0 {
        return EnergyValue::zeros(0, 1);
    }
    let mean = z.iter().sum::<f64>() / m as f64;
    let value = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m as f64;
    let gradient = z.iter().map(|v| 2.0 * (v - mean) / m as f64).collect();
    EnergyValue {
        value,
        gradient,
        dim: 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lifted_square() -> Vec<Vec3> {
        [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
            .iter()
            .map(|&(x, y)| Vec3::new(x, y, x + 2.0 * y))
            .collect()
    }

    #[test]
    fn coplanar_square_is_zero_for_all_metrics() {
        let pts = lifted_square();
        for kind in [
            MetricKind::SmallestEig,
            MetricKind::Det,
            MetricKind::Proj,
            MetricKind::Diag,
        ] {
            assert!(
                face_planarity_value(&pts, kind).unwrap() < 1e-14,
                "{kind:?}"
            );
        }
    }

    #[test]
    fn triangles_are_zero() {
        let pts = vec![
            Vec3::new(0.0, 0.0, 0.3),
            Vec3::new(2.0, 0.1, -1.0),
            Vec3::new(0.5, 3.0, 0.7),
        ];
        assert!(face_planarity_value(&pts, MetricKind::SmallestEig).unwrap() < 1e-15);
        assert!(face_planarity_value(&pts, MetricKind::Det).unwrap().abs() < 1e-15);
        assert!(matches!(
            face_planarity(&pts, MetricKind::Diag),
            Err(EnergyError::TooFewPoints { need: 4, got: 3 })
        ));
    }

    #[test]
    fn variance_examples() {
        assert_eq!(variance_energy(&[3.0, 3.0, 3.0]).value, 0.0);
        let v = variance_energy(&[0.0, 2.0]);
        assert_eq!(v.value, 1.0);
        assert_eq!(v.gradient, vec![-1.0, 1.0]);
    }

    #[test]
    fn diag_distance_of_twisted_quad() {
        // Diagonals (0,0,0)-(1,1,0) and (1,0,t)-(0,1,t) are a distance t apart.
        let t = 0.25;
        let pts = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, t),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, t),
        ];
        let d = diag_distances(&pts);
        assert_eq!(d.len(), 1);
        assert!((d[0] - t).abs() < 1e-15);
    }
}
