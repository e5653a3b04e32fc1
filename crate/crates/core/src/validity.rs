//! The 2D validity test: a roof edge between two faces must be parallel to
//! both of their outline edges, or pass through the point where those outline
//! edges' lines meet. Also the ridge / bisector / other edge classification.

use std::collections::BTreeMap;

use crate::geom::{self, Vec2};
use crate::graph::{Edge, Embedding2, FaceId, GraphError, RoofGraph, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeCase {
    Parallel,
    Concurrent,
    /// The roof edge ends at the outline intersection point.
    Endpoint,
    Violated,
}

impl EdgeCase {
    pub fn name(&self) -> &'static str {
        match self {
            EdgeCase::Parallel => "parallel",
            EdgeCase::Concurrent => "concurrent",
            EdgeCase::Endpoint => "endpoint",
            EdgeCase::Violated => "violated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeValidity {
    pub edge: Edge,
    pub faces: (FaceId, FaceId),
    pub case: EdgeCase,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub entries: Vec<EdgeValidity>,
    pub overall: f64,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.entries.iter().all(|e| e.case != EdgeCase::Violated)
    }

    pub fn violated(&self) -> impl Iterator<Item = &EdgeValidity> {
        self.entries.iter().filter(|e| e.case == EdgeCase::Violated)
    }
}

/// Line of outline edge `i`: start point and direction.
pub(crate) fn outline_line(graph: &RoofGraph, emb: &Embedding2, i: usize) -> (Vec2, Vec2) {
    let (a, b) = graph.outline_edge(i);
    let pa = emb.get(a);
    (pa, emb.get(b) - pa)
}

/// Representative outline edges of the two faces of every interior roof edge.
pub(crate) fn shared_roof_edges(graph: &RoofGraph) -> Vec<(Edge, FaceId, FaceId, usize, usize)> {
    graph
        .roof_edges()
        .into_iter()
        .filter(|(_, fs)| fs.len() == 2)
        .filter_map(|(e, fs)| {
            let a = graph.representative_edge(fs[0])?;
            let b = graph.representative_edge(fs[1])?;
            Some((e, fs[0], fs[1], a, b))
        })
        .collect()
}

pub(crate) fn outline_diagonal(graph: &RoofGraph, emb: &Embedding2) -> f64 {
    geom::bbox_diagonal(graph.outline().iter().map(|&v| emb.get(v)))
}

/// Residual and case of a single roof edge, given the two outline lines.
pub(crate) fn edge_residual(
    p: Vec2,
    q: Vec2,
    line1: (Vec2, Vec2),
    line2: (Vec2, Vec2),
    diag: f64,
    tol: f64,
) -> (EdgeCase, f64) {
    let d = q - p;
    if d.norm() == 0.0 {
        return (EdgeCase::Violated, f64::INFINITY);
    }
    if geom::is_parallel(&line1.1, &line2.1) {
        let r = geom::line_angle(&d, &line1.1);
        return (
            if r <= tol {
                EdgeCase::Parallel
            } else {
                EdgeCase::Violated
            },
            r,
        );
    }
    let x = match geom::line_intersection(&line1.0, &line1.1, &line2.0, &line2.1) {
        Some(x) => x,
        None => return (EdgeCase::Violated, f64::INFINITY),
    };
    let scale = if diag > 0.0 { diag } else { 1.0 };
    let r = geom::point_line_distance(&x, &p, &d) / scale;
    if r > tol {
        return (EdgeCase::Violated, r);
    }
    let touch = (p - x).norm().min((q - x).norm()) / scale;
    if touch <= tol.max(1e-12) {
        (EdgeCase::Endpoint, r)
    } else {
        (EdgeCase::Concurrent, r)
    }
}

/// Checks every roof edge shared by two faces. Residuals are angles in the
/// parallel case and bounding-box-normalized distances otherwise.
pub fn check_validity_2d(
    graph: &RoofGraph,
    emb: &Embedding2,
    tol: f64,
) -> Result<ValidityReport, GraphError> {
    emb.check_for(graph)?;
    let diag = outline_diagonal(graph, emb);
    let mut entries = Vec::new();
    for (e, f, g, a, b) in shared_roof_edges(graph) {
        let (case, residual) = edge_residual(
            emb.get(e.0),
            emb.get(e.1),
            outline_line(graph, emb, a),
            outline_line(graph, emb, b),
            diag,
            tol,
        );
        entries.push(EdgeValidity {
            edge: e,
            faces: (f, g),
            case,
            residual,
        });
    }
    let overall = entries.iter().map(|e| e.residual).fold(0.0, f64::max);
    Ok(ValidityReport { entries, overall })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeClass {
    Ridge,
    Bisector,
    Other,
}

impl EdgeClass {
    pub fn name(&self) -> &'static str {
        match self {
            EdgeClass::Ridge => "ridge",
            EdgeClass::Bisector => "bisector",
            EdgeClass::Other => "other",
        }
    }
}

/// Classification plus the outline edges it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassifiedEdge {
    /// Outline edges of the two faces, both parallel to the ridge ideally.
    Ridge {
        edge: Edge,
        outline: (usize, usize),
    },
    /// `corner` is the outline vertex the edge starts from; `incoming` ends
    /// at it and `outgoing` starts at it.
    Bisector {
        edge: Edge,
        corner: VertexId,
        incoming: usize,
        outgoing: usize,
    },
    Other {
        edge: Edge,
    },
}

impl ClassifiedEdge {
    pub fn edge(&self) -> Edge {
        match self {
            ClassifiedEdge::Ridge { edge, .. }
            | ClassifiedEdge::Bisector { edge, .. }
            | ClassifiedEdge::Other { edge } => *edge,
        }
    }

    pub fn class(&self) -> EdgeClass {
        match self {
            ClassifiedEdge::Ridge { .. } => EdgeClass::Ridge,
            ClassifiedEdge::Bisector { .. } => EdgeClass::Bisector,
            ClassifiedEdge::Other { .. } => EdgeClass::Other,
        }
    }
}

pub fn classify_roof_edges_detailed(graph: &RoofGraph, emb: &Embedding2) -> Vec<ClassifiedEdge> {
    let n = graph.n_outline();
    let mut out = Vec::new();
    for (e, f, g, a, b) in shared_roof_edges(graph) {
        let da = outline_line(graph, emb, a).1;
        let db = outline_line(graph, emb, b).1;
        if geom::is_parallel(&da, &db) {
            out.push(ClassifiedEdge::Ridge {
                edge: e,
                outline: (a, b),
            });
            continue;
        }
        let mut found = None;
        'search: for &i in graph.face_outline_edges(f) {
            for &j in graph.face_outline_edges(g) {
                for (inc, outg) in [(i, j), (j, i)] {
                    if (inc + 1) % n == outg {
                        let corner = graph.outline()[outg];
                        if e.contains(corner) {
                            found = Some((corner, inc, outg));
                            break 'search;
                        }
                    }
                }
            }
        }
        out.push(match found {
            Some((corner, incoming, outgoing)) => ClassifiedEdge::Bisector {
                edge: e,
                corner,
                incoming,
                outgoing,
            },
            None => ClassifiedEdge::Other { edge: e },
        });
    }
    out
}

/// Labels every roof edge shared by two faces as ridge, bisector or other.
pub fn classify_roof_edges(graph: &RoofGraph, emb: &Embedding2) -> BTreeMap<Edge, EdgeClass> {
    classify_roof_edges_detailed(graph, emb)
        .into_iter()
        .map(|c| (c.edge(), c.class()))
        .collect()
}
