//! Edit operations on a roof, detection of the smallest set of roof vertices
//! that must move after a vertex edit, and re-optimization restricted to it.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::geom::{self, Vec2, Vec3};
use crate::graph::{
    Edge, Embedding2, Embedding3, FaceId, GraphError, RoofGraph, VertexId, VertexRecord,
};
use crate::solver::{self, SolveError, SolveResult, SolveSpec};
use crate::validity::{self, EdgeCase};

/// Planarity reached by a successful restricted solve.
pub const REGION_PLANARITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EditError {
    #[error("invalid edit target: {0}")]
    InvalidTarget(String),
    #[error("edit would leave face {face} with fewer than 3 vertices")]
    WouldCreateDegenerateFace { face: FaceId },
    #[error("affected region covers every roof vertex; re-solve the whole roof")]
    RegionIsAllRoofVertices,
    #[error("nothing to undo")]
    NothingToUndo,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

impl EditError {
    pub fn name(&self) -> &'static str {
        match self {
            EditError::InvalidTarget(_) => "InvalidTarget",
            EditError::WouldCreateDegenerateFace { .. } => "WouldCreateDegenerateFace",
            EditError::RegionIsAllRoofVertices => "RegionIsAllRoofVertices",
            EditError::NothingToUndo => "NothingToUndo",
            EditError::Graph(g) => solver::graph_error_name(g),
            EditError::Solve(s) => s.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EditOp {
    MoveVertex {
        vertex: VertexId,
        delta: Vec3,
    },
    MoveEdge {
        edge: (VertexId, VertexId),
        delta: Vec3,
    },
    /// Collapse a roof edge into one vertex.
    SnapEdge {
        edge: (VertexId, VertexId),
    },
    /// Remove the single edge shared by two faces.
    MergeFaces {
        faces: (FaceId, FaceId),
    },
    /// Cut a face along a new edge between two of its non-adjacent vertices.
    SplitFace {
        face: FaceId,
        split: (VertexId, VertexId),
    },
    /// Flip the edge separating two faces so that they become adjacent.
    ForceAdjacent {
        faces: (FaceId, FaceId),
    },
}

impl EditOp {
    /// The vertex whose move seeds region detection, for move edits.
    pub fn seed(&self) -> Option<VertexId> {
        match self {
            EditOp::MoveVertex { vertex, .. } => Some(*vertex),
            EditOp::MoveEdge { edge, .. } => Some(edge.0),
            _ => None,
        }
    }

    pub fn is_move(&self) -> bool {
        matches!(self, EditOp::MoveVertex { .. } | EditOp::MoveEdge { .. })
    }
}

fn target(msg: impl Into<String>) -> EditError {
    EditError::InvalidTarget(msg.into())
}

fn check_vertex(graph: &RoofGraph, v: VertexId) -> Result<(), EditError> {
    if v >= graph.n_vertices() {
        return Err(target(format!("vertex {v} does not exist")));
    }
    Ok(())
}

fn check_face(graph: &RoofGraph, f: FaceId) -> Result<(), EditError> {
    if f >= graph.n_faces() {
        return Err(target(format!("face {f} does not exist")));
    }
    Ok(())
}

fn check_delta(d: &Vec3) -> Result<(), EditError> {
    if !d.iter().all(|c| c.is_finite()) {
        return Err(target("delta must be finite"));
    }
    Ok(())
}

/// Applies one edit, returning the new graph and embedding. The inputs are
/// left untouched.
pub fn apply_edit(
    graph: &RoofGraph,
    emb: &Embedding3,
    op: &EditOp,
) -> Result<(RoofGraph, Embedding3), EditError> {
    emb.check_for(graph)?;
    match op {
        EditOp::MoveVertex { vertex, delta } => {
            check_vertex(graph, *vertex)?;
            check_delta(delta)?;
            let mut e = emb.clone();
            e.set(*vertex, emb.get(*vertex) + delta);
            Ok((graph.clone(), e))
        }
        EditOp::MoveEdge {
            edge: (a, b),
            delta,
        } => {
            check_vertex(graph, *a)?;
            check_vertex(graph, *b)?;
            check_delta(delta)?;
            if graph.edge_faces(Edge::new(*a, *b)).is_none() {
                return Err(target(format!("({a}, {b}) is not an edge")));
            }
            let mut e = emb.clone();
            e.set(*a, emb.get(*a) + delta);
            e.set(*b, emb.get(*b) + delta);
            Ok((graph.clone(), e))
        }
        EditOp::SnapEdge { edge: (a, b) } => snap_edge(graph, emb, *a, *b),
        EditOp::MergeFaces { faces: (f, g) } => merge_faces(graph, emb, *f, *g),
        EditOp::SplitFace {
            face,
            split: (u, v),
        } => split_face(graph, emb, *face, *u, *v),
        EditOp::ForceAdjacent { faces: (f, g) } => force_adjacent(graph, emb, *f, *g),
    }
}

fn rebuild(vertices: Vec<VertexRecord>, faces: Vec<Vec<VertexId>>) -> Result<RoofGraph, EditError> {
    RoofGraph::new(vertices, faces)
        .map_err(|e| target(format!("result is not a valid roof graph: {e}")))
}

fn snap_edge(
    graph: &RoofGraph,
    emb: &Embedding3,
    a: VertexId,
    b: VertexId,
) -> Result<(RoofGraph, Embedding3), EditError> {
    check_vertex(graph, a)?;
    check_vertex(graph, b)?;
    let e = Edge::new(a, b);
    match graph.edge_faces(e) {
        Some(fs) if fs.len() == 2 => {}
        _ => {
            return Err(target(format!(
                "({a}, {b}) is not a roof edge shared by two faces"
            )))
        }
    }
    let (oa, ob) = (graph.is_outline(a), graph.is_outline(b));
    if oa && ob {
        return Err(target("cannot snap an edge between two outline vertices"));
    }
    // The surviving vertex is the outline one if any, else the smaller id.
    let (keep, gone) = if ob || (!oa && b < a) { (b, a) } else { (a, b) };
    let merged_pos = if oa || ob {
        emb.get(keep)
    } else {
        (emb.get(a) + emb.get(b)) * 0.5
    };
    let renum = |v: VertexId| -> VertexId {
        let v = if v == gone { keep } else { v };
        if v > gone {
            v - 1
        } else {
            v
        }
    };
    let mut faces = Vec::with_capacity(graph.n_faces());
    for (fi, face) in graph.faces().iter().enumerate() {
        let mut out: Vec<VertexId> = Vec::with_capacity(face.len());
        for &v in face {
            let r = renum(v);
            if out.last() != Some(&r) {
                out.push(r);
            }
        }
        if out.len() > 1 && out.first() == out.last() {
            out.pop();
        }
        if out.len() < 3 {
            return Err(EditError::WouldCreateDegenerateFace { face: fi });
        }
        faces.push(out);
    }
    let mut vertices = graph.vertices().to_vec();
    vertices.remove(gone);
    let mut coords = emb.coords().to_vec();
    coords[keep] = merged_pos;
    coords.remove(gone);
    Ok((rebuild(vertices, faces)?, Embedding3::new(coords)?))
}

/// Directed occurrence of `a -> b` in a face cycle.
fn has_directed(face: &[VertexId], a: VertexId, b: VertexId) -> bool {
    let n = face.len();
    (0..n).any(|k| face[k] == a && face[(k + 1) % n] == b)
}

fn rotate_to(face: &[VertexId], v: VertexId) -> Vec<VertexId> {
    let k = face.iter().position(|&x| x == v).unwrap();
    let mut out = face.to_vec();
    out.rotate_left(k);
    out
}

fn merge_faces(
    graph: &RoofGraph,
    emb: &Embedding3,
    f: FaceId,
    g: FaceId,
) -> Result<(RoofGraph, Embedding3), EditError> {
    check_face(graph, f)?;
    check_face(graph, g)?;
    if f == g {
        return Err(target("cannot merge a face with itself"));
    }
    let shared: Vec<Edge> = graph
        .edges()
        .filter(|(_, fs)| fs.contains(&f) && fs.contains(&g))
        .map(|(e, _)| *e)
        .collect();
    if shared.len() != 1 {
        return Err(target(format!(
            "faces {f} and {g} share {} edges, need exactly one",
            shared.len()
        )));
    }
    let e = shared[0];
    let (ff, gf) = (&graph.faces()[f], &graph.faces()[g]);
    let (u, v) = if has_directed(ff, e.0, e.1) {
        (e.0, e.1)
    } else {
        (e.1, e.0)
    };
    // f runs u -> v, g runs v -> u.
    let mut merged = rotate_to(ff, v);
    let g_rot = rotate_to(gf, u);
    merged.extend(g_rot.iter().skip(1).take_while(|&&x| x != v));
    let (lo, hi) = (f.min(g), f.max(g));
    let mut faces = graph.faces().to_vec();
    faces[lo] = merged;
    faces.remove(hi);
    Ok((rebuild(graph.vertices().to_vec(), faces)?, emb.clone()))
}

fn split_face(
    graph: &RoofGraph,
    emb: &Embedding3,
    f: FaceId,
    u: VertexId,
    v: VertexId,
) -> Result<(RoofGraph, Embedding3), EditError> {
    check_face(graph, f)?;
    let face = &graph.faces()[f];
    let n = face.len();
    let (Some(iu), Some(iv)) = (
        face.iter().position(|&x| x == u),
        face.iter().position(|&x| x == v),
    ) else {
        return Err(target(format!("split vertices must both lie on face {f}")));
    };
    if iu == iv || (iu + 1) % n == iv || (iv + 1) % n == iu {
        return Err(target("split vertices must be distinct and non-adjacent"));
    }
    let rot = rotate_to(face, u);
    let kv = rot.iter().position(|&x| x == v).unwrap();
    let first: Vec<VertexId> = rot[..=kv].to_vec();
    let mut second: Vec<VertexId> = rot[kv..].to_vec();
    second.push(u);
    let mut faces = graph.faces().to_vec();
    faces[f] = first;
    faces.push(second);
    Ok((rebuild(graph.vertices().to_vec(), faces)?, emb.clone()))
}

fn force_adjacent(
    graph: &RoofGraph,
    emb: &Embedding3,
    fi: FaceId,
    fj: FaceId,
) -> Result<(RoofGraph, Embedding3), EditError> {
    check_face(graph, fi)?;
    check_face(graph, fj)?;
    if fi == fj {
        return Err(target("faces must differ"));
    }
    let faces = graph.faces();
    if graph
        .edges()
        .any(|(_, fs)| fs.contains(&fi) && fs.contains(&fj))
    {
        return Err(target(format!("faces {fi} and {fj} are already adjacent")));
    }
    // An edge p-q with p on fi only and q on fj only, between two other faces.
    let mut found = None;
    for (e, fs) in graph.edges() {
        if fs.len() != 2 || fs.contains(&fi) || fs.contains(&fj) {
            continue;
        }
        for (p, q) in [(e.0, e.1), (e.1, e.0)] {
            let fi_face = &faces[fi];
            let fj_face = &faces[fj];
            if fi_face.contains(&p)
                && !fi_face.contains(&q)
                && fj_face.contains(&q)
                && !fj_face.contains(&p)
            {
                found = Some((p, q, fs[0], fs[1]));
                break;
            }
        }
        if found.is_some() {
            break;
        }
    }
    let Some((p, q, f0, f1)) = found else {
        return Err(target(format!(
            "no single edge separates faces {fi} and {fj}"
        )));
    };
    let (fk, fl) = if has_directed(&faces[f0], p, q) {
        (f0, f1)
    } else {
        (f1, f0)
    };
    let mut out = faces.to_vec();
    out[fk].retain(|&x| x != q);
    out[fl].retain(|&x| x != p);
    for f in [fk, fl] {
        if out[f].len() < 3 {
            return Err(EditError::WouldCreateDegenerateFace { face: f });
        }
    }
    let k = out[fi].iter().position(|&x| x == p).unwrap();
    out[fi].insert(k, q);
    let k = out[fj].iter().position(|&x| x == q).unwrap();
    out[fj].insert(k, p);
    Ok((rebuild(graph.vertices().to_vec(), out)?, emb.clone()))
}

/// Roof vertices that must move, besides the seed, for the roof to become
/// valid again after the seed was moved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffectedRegion {
    pub seed: VertexId,
    pub region: BTreeSet<VertexId>,
}

/// Validity tolerance used while propagating.
const PROPAGATION_TOL: f64 = 1e-9;

/// Line that the free endpoint `w` of roof edge (w, s) must lie on, given a
/// settled `s`; `None` when the edge does not constrain `w`.
fn constraint_line(
    graph: &RoofGraph,
    emb: &Embedding2,
    w: VertexId,
    s: VertexId,
) -> Option<(Vec2, Vec2)> {
    let fs = graph.edge_faces(Edge::new(w, s))?;
    if fs.len() != 2 {
        return None;
    }
    let a = graph.representative_edge(fs[0])?;
    let b = graph.representative_edge(fs[1])?;
    let l1 = validity::outline_line(graph, emb, a);
    let l2 = validity::outline_line(graph, emb, b);
    let ps = emb.get(s);
    if geom::is_parallel(&l1.1, &l2.1) {
        return Some((ps, l1.1));
    }
    let x = geom::line_intersection(&l1.0, &l1.1, &l2.0, &l2.1)?;
    let d = x - ps;
    let diag = validity::outline_diagonal(graph, emb);
    if d.norm() <= 1e-12 * diag.max(1.0) {
        return None;
    }
    Some((ps, d))
}

/// Least-squares point on the given lines, or the projection of `p` when the
/// lines do not pin a point down.
fn settle_point(p: Vec2, lines: &[(Vec2, Vec2)]) -> Vec2 {
    if lines.is_empty() {
        return p;
    }
    let mut m = nalgebra::Matrix2::<f64>::zeros();
    let mut rhs = Vec2::zeros();
    for (a, d) in lines {
        let n = Vec2::new(-d.y, d.x).normalize();
        m += n * n.transpose();
        rhs += n * n.dot(a);
    }
    let independent = lines
        .iter()
        .any(|(_, d)| !geom::is_parallel(d, &lines[0].1));
    if independent {
        if let Some(inv) = m.try_inverse() {
            return inv * rhs;
        }
    }
    let (a, d) = lines[0];
    let u = d.normalize();
    a + u * u.dot(&(p - a))
}

/// Grows the region from the moved seed: a roof neighbour joins when an edge
/// to an already placed vertex fails the validity condition; each joining
/// vertex is then moved onto the lines its placed neighbours impose, and its
/// own edges are checked in turn, until nothing changes.
pub fn smallest_affected_region(
    graph: &RoofGraph,
    emb: &Embedding2,
    seed: VertexId,
) -> Result<AffectedRegion, EditError> {
    emb.check_for(graph)?;
    check_vertex(graph, seed)?;
    if graph.is_outline(seed) {
        return Err(target(format!("seed {seed} is an outline vertex")));
    }
    let diag = validity::outline_diagonal(graph, emb);
    let mut work = emb.clone();
    let mut settled: BTreeSet<VertexId> = graph.outline().iter().copied().collect();
    settled.insert(seed);
    let mut region = BTreeSet::new();
    let mut queue = VecDeque::from([seed]);
    let edge_ok = |em: &Embedding2, u: VertexId, w: VertexId| -> bool {
        let Some(fs) = graph.edge_faces(Edge::new(u, w)) else {
            return true;
        };
        if fs.len() != 2 {
            return true;
        }
        let (Some(a), Some(b)) = (
            graph.representative_edge(fs[0]),
            graph.representative_edge(fs[1]),
        ) else {
            return true;
        };
        let (case, _) = validity::edge_residual(
            em.get(u),
            em.get(w),
            validity::outline_line(graph, em, a),
            validity::outline_line(graph, em, b),
            diag,
            PROPAGATION_TOL,
        );
        case != EdgeCase::Violated
    };
    while let Some(u) = queue.pop_front() {
        let mut joined = Vec::new();
        for w in graph.neighbors(u) {
            if settled.contains(&w) || region.contains(&w) {
                continue;
            }
            if !edge_ok(&work, u, w) {
                region.insert(w);
                joined.push(w);
            }
        }
        for w in joined {
            let lines: Vec<(Vec2, Vec2)> = graph
                .neighbors(w)
                .into_iter()
                .filter(|s| settled.contains(s))
                .filter_map(|s| constraint_line(graph, &work, w, s))
                .collect();
            let p = settle_point(work.get(w), &lines);
            work.set(w, p);
            settled.insert(w);
            queue.push_back(w);
        }
    }
    let n_roof = graph.roof_vertices().len();
    if n_roof > 3 && region.len() + 1 == n_roof {
        return Err(EditError::RegionIsAllRoofVertices);
    }
    Ok(AffectedRegion { seed, region })
}

/// Minimizes planarity over the region's coordinates only; every other
/// coordinate, the seed included, is returned bit-identical.
pub fn reoptimize_region(
    graph: &RoofGraph,
    emb: &Embedding3,
    region: &AffectedRegion,
    spec: &SolveSpec,
) -> Result<SolveResult, EditError> {
    if let Some(&v) = region
        .region
        .iter()
        .find(|&&v| v >= graph.n_vertices() || graph.is_outline(v))
    {
        return Err(target(format!("region vertex {v} is not a roof vertex")));
    }
    let movable: Vec<VertexId> = region.region.iter().copied().collect();
    let result = solver::optimize_subset(graph, emb, &movable, spec)?;
    if result.planarity >= REGION_PLANARITY_TOL {
        return Err(EditError::Solve(SolveError::NotConverged(Box::new(result))));
    }
    Ok(result)
}

/// Roof vertices one edge away from the region or the seed.
pub fn expand_region(graph: &RoofGraph, region: &AffectedRegion) -> AffectedRegion {
    let mut out = region.region.clone();
    let mut core = region.region.clone();
    core.insert(region.seed);
    for &v in &core {
        for u in graph.neighbors(v) {
            if !graph.is_outline(u) && u != region.seed {
                out.insert(u);
            }
        }
    }
    AffectedRegion {
        seed: region.seed,
        region: out,
    }
}

/// Restricted re-optimization that widens the region by one ring on failure
/// and finally frees every roof vertex except the seed.
pub fn reoptimize_with_expansion(
    graph: &RoofGraph,
    emb: &Embedding3,
    region: &AffectedRegion,
    spec: &SolveSpec,
) -> Result<(AffectedRegion, SolveResult), EditError> {
    let all = AffectedRegion {
        seed: region.seed,
        region: graph
            .roof_vertices()
            .into_iter()
            .filter(|&v| v != region.seed)
            .collect(),
    };
    let mut current = region.clone();
    loop {
        match reoptimize_region(graph, emb, &current, spec) {
            Ok(r) => return Ok((current, r)),
            Err(EditError::Solve(SolveError::NotConverged(r))) => {
                if current.region == all.region {
                    return Err(EditError::Solve(SolveError::NotConverged(r)));
                }
                let next = expand_region(graph, &current);
                current = if next.region == current.region {
                    all.clone()
                } else {
                    next
                };
            }
            Err(e) => return Err(e),
        }
    }
}

/// Outcome of a move edit followed by local re-optimization.
#[derive(Debug, Clone)]
pub struct EditOutcome {
    pub region: Option<AffectedRegion>,
    pub planarity: f64,
    pub converged: bool,
}

/// Single-owner editing session with a snapshot-based undo stack.
#[derive(Debug, Clone)]
pub struct EditSession {
    graph: RoofGraph,
    embedding: Embedding3,
    history: Vec<(RoofGraph, Embedding3)>,
    pub spec: SolveSpec,
}

impl EditSession {
    pub fn new(graph: RoofGraph, embedding: Embedding3) -> Result<Self, EditError> {
        embedding.check_for(&graph)?;
        Ok(EditSession {
            graph,
            embedding,
            history: Vec::new(),
            spec: SolveSpec::default(),
        })
    }

    pub fn graph(&self) -> &RoofGraph {
        &self.graph
    }

    pub fn embedding(&self) -> &Embedding3 {
        &self.embedding
    }

    pub fn can_undo(&self) -> bool {
        !self.history.is_empty()
    }

    /// Applies an edit. Move edits of roof vertices are followed by region
    /// detection and restricted re-optimization.
    pub fn apply(&mut self, op: &EditOp) -> Result<EditOutcome, EditError> {
        let (graph, mut emb) = apply_edit(&self.graph, &self.embedding, op)?;
        let mut region = None;
        let mut converged = true;
        if let Some(seed) = op.seed().filter(|&s| op.is_move() && !graph.is_outline(s)) {
            let found = match smallest_affected_region(&graph, &emb.project_xy(), seed) {
                Ok(r) => r,
                Err(EditError::RegionIsAllRoofVertices) => AffectedRegion {
                    seed,
                    region: graph
                        .roof_vertices()
                        .into_iter()
                        .filter(|&v| v != seed)
                        .collect(),
                },
                Err(e) => return Err(e),
            };
            match reoptimize_with_expansion(&graph, &emb, &found, &self.spec) {
                Ok((used, r)) => {
                    emb = r.embedding;
                    region = Some(used);
                }
                Err(EditError::Solve(SolveError::NotConverged(r))) => {
                    emb = r.embedding;
                    converged = false;
                    region = Some(found);
                }
                Err(e) => return Err(e),
            }
        }
        let planarity = solver::normalized_planarity(&graph, &emb).map_err(SolveError::from)?;
        self.history.push((
            std::mem::replace(&mut self.graph, graph),
            std::mem::replace(&mut self.embedding, emb),
        ));
        Ok(EditOutcome {
            region,
            planarity,
            converged,
        })
    }

    /// Replaces the current state (for example after a full solve), keeping
    /// the previous one on the undo stack.
    pub fn replace(&mut self, graph: RoofGraph, embedding: Embedding3) -> Result<(), EditError> {
        embedding.check_for(&graph)?;
        self.history.push((
            std::mem::replace(&mut self.graph, graph),
            std::mem::replace(&mut self.embedding, embedding),
        ));
        Ok(())
    }

    pub fn undo(&mut self) -> Result<(), EditError> {
        let (g, e) = self.history.pop().ok_or(EditError::NothingToUndo)?;
        self.graph = g;
        self.embedding = e;
        Ok(())
    }
}
