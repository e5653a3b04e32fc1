//! Primal roof graph, its embeddings, and the dual (face-adjacency) form.
//!
//! Vertices are addressed by dense 0-based indices. Outline vertices form a
//! single counter-clockwise boundary cycle; every other vertex is a roof
//! vertex. Faces are stored counter-clockwise when viewed from +z.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::geom::{self, Vec2, Vec3};

pub type VertexId = usize;
pub type FaceId = usize;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("graph has no faces")]
    Empty,
    #[error("face {face} has fewer than 3 distinct vertices")]
    FaceTooSmall { face: FaceId },
    #[error("face {face} references unknown vertex {vertex}")]
    UnknownVertex { face: FaceId, vertex: VertexId },
    #[error("edge ({}, {}) is used by {count} faces", edge.0, edge.1)]
    EdgeOverused { edge: Edge, count: usize },
    #[error("edge ({}, {}) is traversed in the same direction by both of its faces", edge.0, edge.1)]
    InconsistentOrientation { edge: Edge },
    #[error("outline is not a single simple cycle: {0}")]
    BrokenOutline(String),
    #[error("face {face} has no outline edge; the dual form cannot represent it")]
    FaceWithoutOutlineEdge { face: FaceId },
    #[error("adjacency is not realizable as a roof: {reason} (pairs {pairs:?})")]
    NonRealizableAdjacency {
        reason: String,
        pairs: Vec<((usize, usize), (usize, usize))>,
    },
    #[error("invalid dual graph: {0}")]
    InvalidDual(String),
    #[error("embedding has {got} coordinates, graph has {expected} vertices")]
    EmbeddingSize { expected: usize, got: usize },
    #[error("embedding coordinate of vertex {0} is not finite")]
    NonFinite(VertexId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexKind {
    Outline,
    Roof,
}

/// Height treatment of an outline vertex in the variable-height solve.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HeightGroup {
    /// Height is a free variable with no regularizer.
    Free,
    /// Height is pinned at zero.
    FixedZero,
    /// Height is a free variable whose spread within the group is penalized.
    Group(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexRecord {
    pub kind: VertexKind,
    pub height_group: Option<HeightGroup>,
}

impl VertexRecord {
    pub fn outline() -> Self {
        VertexRecord {
            kind: VertexKind::Outline,
            height_group: None,
        }
    }

    pub fn roof() -> Self {
        VertexRecord {
            kind: VertexKind::Roof,
            height_group: None,
        }
    }

    /// Effective height group; outline vertices default to fixed-zero.
    pub fn group(&self) -> Option<HeightGroup> {
        match self.kind {
            VertexKind::Roof => None,
            VertexKind::Outline => {
                Some(self.height_group.clone().unwrap_or(HeightGroup::FixedZero))
            }
        }
    }
}

/// Undirected edge with the smaller vertex first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge(pub VertexId, pub VertexId);

impl Edge {
    pub fn new(a: VertexId, b: VertexId) -> Self {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0 == v || self.1 == v
    }

    pub fn other(&self, v: VertexId) -> VertexId {
        if self.0 == v {
            self.1
        } else {
            self.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoofGraph {
    vertices: Vec<VertexRecord>,
    faces: Vec<Vec<VertexId>>,
    outline: Vec<VertexId>,
    edge_faces: BTreeMap<Edge, Vec<FaceId>>,
    face_outline_edges: Vec<Vec<usize>>,
}

impl RoofGraph {
    /// Builds a graph and checks every topological invariant.
    pub fn new(vertices: Vec<VertexRecord>, faces: Vec<Vec<VertexId>>) -> Result<Self, GraphError> {
        if faces.is_empty() {
            return Err(GraphError::Empty);
        }
        let n = vertices.len();
        let mut edge_faces: BTreeMap<Edge, Vec<FaceId>> = BTreeMap::new();
        let mut directed: BTreeMap<(VertexId, VertexId), FaceId> = BTreeMap::new();
        for (fi, face) in faces.iter().enumerate() {
            let distinct: BTreeSet<_> = face.iter().copied().collect();
            if face.len() < 3 || distinct.len() != face.len() {
                return Err(GraphError::FaceTooSmall { face: fi });
            }
            if let Some(&v) = face.iter().find(|&&v| v >= n) {
                return Err(GraphError::UnknownVertex {
                    face: fi,
                    vertex: v,
                });
            }
            for k in 0..face.len() {
                let a = face[k];
                let b = face[(k + 1) % face.len()];
                let e = Edge::new(a, b);
                edge_faces.entry(e).or_default().push(fi);
                if directed.insert((a, b), fi).is_some() {
                    return Err(GraphError::InconsistentOrientation { edge: e });
                }
            }
        }
        for (e, fs) in &edge_faces {
            if fs.len() > 2 {
                return Err(GraphError::EdgeOverused {
                    edge: *e,
                    count: fs.len(),
                });
            }
        }

        // Boundary edges between outline vertices, directed as in their face.
        let is_outline = |v: VertexId| vertices[v].kind == VertexKind::Outline;
        let mut next: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        for &(a, b) in directed.keys() {
            let e = Edge::new(a, b);
            if edge_faces[&e].len() == 1
                && is_outline(a)
                && is_outline(b)
                && next.insert(a, b).is_some()
            {
                return Err(GraphError::BrokenOutline(format!(
                    "outline vertex {a} has two outgoing boundary edges"
                )));
            }
        }
        let outline_ids: Vec<VertexId> = (0..n).filter(|&v| is_outline(v)).collect();
        if outline_ids.len() < 3 {
            return Err(GraphError::BrokenOutline(
                "fewer than 3 outline vertices".into(),
            ));
        }
        let start = outline_ids[0];
        let mut outline = vec![start];
        let mut cur = start;
        loop {
            let nxt = *next.get(&cur).ok_or_else(|| {
                GraphError::BrokenOutline(format!(
                    "outline vertex {cur} has no outgoing boundary edge"
                ))
            })?;
            if nxt == start {
                break;
            }
            if outline.len() > outline_ids.len() {
                return Err(GraphError::BrokenOutline(
                    "boundary walk does not close".into(),
                ));
            }
            outline.push(nxt);
            cur = nxt;
        }
        if outline.len() != outline_ids.len() || next.len() != outline_ids.len() {
            return Err(GraphError::BrokenOutline(format!(
                "boundary cycle visits {} of {} outline vertices",
                outline.len(),
                outline_ids.len()
            )));
        }

        let mut face_outline_edges = vec![Vec::new(); faces.len()];
        for i in 0..outline.len() {
            let e = Edge::new(outline[i], outline[(i + 1) % outline.len()]);
            face_outline_edges[edge_faces[&e][0]].push(i);
        }

        Ok(RoofGraph {
            vertices,
            faces,
            outline,
            edge_faces,
            face_outline_edges,
        })
    }

    pub fn vertices(&self) -> &[VertexRecord] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Vec<VertexId>] {
        &self.faces
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn kind(&self, v: VertexId) -> VertexKind {
        self.vertices[v].kind
    }

    pub fn is_outline(&self, v: VertexId) -> bool {
        self.vertices[v].kind == VertexKind::Outline
    }

    /// Outline vertices in counter-clockwise cycle order, starting at the
    /// smallest outline id. Outline edge `i` joins `outline[i]` and
    /// `outline[i + 1]`.
    pub fn outline(&self) -> &[VertexId] {
        &self.outline
    }

    pub fn n_outline(&self) -> usize {
        self.outline.len()
    }

    pub fn outline_edge(&self, i: usize) -> (VertexId, VertexId) {
        let n = self.outline.len();
        (self.outline[i % n], self.outline[(i + 1) % n])
    }

    pub fn roof_vertices(&self) -> Vec<VertexId> {
        (0..self.vertices.len())
            .filter(|&v| !self.is_outline(v))
            .collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&Edge, &Vec<FaceId>)> {
        self.edge_faces.iter()
    }

    pub fn edge_faces(&self, e: Edge) -> Option<&[FaceId]> {
        self.edge_faces.get(&e).map(|v| v.as_slice())
    }

    pub fn is_outline_edge(&self, e: Edge) -> bool {
        let n = self.outline.len();
        (0..n).any(|i| Edge::new(self.outline[i], self.outline[(i + 1) % n]) == e)
    }

    /// Every edge that is not on the outline cycle.
    pub fn roof_edges(&self) -> Vec<(Edge, Vec<FaceId>)> {
        let outline: BTreeSet<Edge> = (0..self.outline.len())
            .map(|i| {
                let (a, b) = self.outline_edge(i);
                Edge::new(a, b)
            })
            .collect();
        self.edge_faces
            .iter()
            .filter(|(e, _)| !outline.contains(e))
            .map(|(e, f)| (*e, f.clone()))
            .collect()
    }

    /// Outline edge indices contained in face `f`, ascending.
    pub fn face_outline_edges(&self, f: FaceId) -> &[usize] {
        &self.face_outline_edges[f]
    }

    /// The first (lowest-index) outline edge of a face, which stands for the
    /// whole face when a face owns several outline edges.
    pub fn representative_edge(&self, f: FaceId) -> Option<usize> {
        self.face_outline_edges[f].first().copied()
    }

    pub fn face_of_outline_edge(&self, i: usize) -> FaceId {
        let (a, b) = self.outline_edge(i);
        self.edge_faces[&Edge::new(a, b)][0]
    }

    /// Neighbours of `v` along face edges, ascending.
    pub fn neighbors(&self, v: VertexId) -> Vec<VertexId> {
        let mut out: BTreeSet<VertexId> = BTreeSet::new();
        for e in self.edge_faces.keys() {
            if e.contains(v) {
                out.insert(e.other(v));
            }
        }
        out.into_iter().collect()
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.edge_faces.keys().filter(|e| e.contains(v)).count()
    }

    pub fn faces_of_vertex(&self, v: VertexId) -> Vec<FaceId> {
        (0..self.faces.len())
            .filter(|&f| self.faces[f].contains(&v))
            .collect()
    }
}

/// Reverses every face whose signed area in `emb` is negative.
pub fn orient_faces_ccw(faces: &mut [Vec<VertexId>], emb: &Embedding2) {
    for face in faces.iter_mut() {
        let pts: Vec<Vec2> = face.iter().map(|&v| emb.get(v)).collect();
        if geom::signed_area(&pts) < 0.0 {
            face.reverse();
        }
    }
}

/// Per-vertex 2D coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding2 {
    coords: Vec<Vec2>,
}

/// Per-vertex 3D coordinates, z up.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding3 {
    coords: Vec<Vec3>,
}

impl Embedding2 {
    pub fn new(coords: Vec<Vec2>) -> Result<Self, GraphError> {
        if let Some(i) = coords
            .iter()
            .position(|p| !(p.x.is_finite() && p.y.is_finite()))
        {
            return Err(GraphError::NonFinite(i));
        }
        Ok(Embedding2 { coords })
    }

    pub fn from_xy(points: &[[f64; 2]]) -> Result<Self, GraphError> {
        Self::new(points.iter().map(|p| Vec2::new(p[0], p[1])).collect())
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn get(&self, v: VertexId) -> Vec2 {
        self.coords[v]
    }

    pub fn set(&mut self, v: VertexId, p: Vec2) {
        self.coords[v] = p;
    }

    pub fn coords(&self) -> &[Vec2] {
        &self.coords
    }

    pub fn check_for(&self, graph: &RoofGraph) -> Result<(), GraphError> {
        if self.coords.len() != graph.n_vertices() {
            return Err(GraphError::EmbeddingSize {
                expected: graph.n_vertices(),
                got: self.coords.len(),
            });
        }
        Ok(())
    }

    /// Lifts every vertex to height `z`.
    pub fn with_height(&self, z: f64) -> Embedding3 {
        Embedding3 {
            coords: self.coords.iter().map(|p| Vec3::new(p.x, p.y, z)).collect(),
        }
    }
}

impl Embedding3 {
    pub fn new(coords: Vec<Vec3>) -> Result<Self, GraphError> {
        if let Some(i) = coords.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(GraphError::NonFinite(i));
        }
        Ok(Embedding3 { coords })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn get(&self, v: VertexId) -> Vec3 {
        self.coords[v]
    }

    pub fn set(&mut self, v: VertexId, p: Vec3) {
        self.coords[v] = p;
    }

    pub fn coords(&self) -> &[Vec3] {
        &self.coords
    }

    pub fn check_for(&self, graph: &RoofGraph) -> Result<(), GraphError> {
        if self.coords.len() != graph.n_vertices() {
            return Err(GraphError::EmbeddingSize {
                expected: graph.n_vertices(),
                got: self.coords.len(),
            });
        }
        Ok(())
    }

    pub fn project_xy(&self) -> Embedding2 {
        Embedding2 {
            coords: self.coords.iter().map(|p| Vec2::new(p.x, p.y)).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Embedding3 {
        Embedding3 {
            coords: self.coords.iter().map(|p| p * s).collect(),
        }
    }
}

/// Dual roof graph: outline polygon plus the face-adjacency matrix indexed by
/// outline edge.
#[derive(Debug, Clone, PartialEq)]
pub struct DualGraph {
    outline: Vec<Vec2>,
    adjacency: Vec<Vec<bool>>,
    probabilities: Option<Vec<Vec<f64>>>,
    merge_map: Option<Vec<usize>>,
}

impl DualGraph {
    /// `merge_map[i]` is the representative (first) outline edge of the face
    /// that owns edge `i`; rows of non-representative edges must be empty.
    pub fn new(
        outline: Vec<Vec2>,
        adjacency: Vec<Vec<bool>>,
        probabilities: Option<Vec<Vec<f64>>>,
        merge_map: Option<Vec<usize>>,
    ) -> Result<Self, GraphError> {
        let n = outline.len();
        let bad = |m: String| Err(GraphError::InvalidDual(m));
        if n < 3 {
            return bad("outline needs at least 3 points".into());
        }
        if outline
            .iter()
            .any(|p| !(p.x.is_finite() && p.y.is_finite()))
        {
            return bad("outline coordinates must be finite".into());
        }
        if !geom::is_simple_polygon(&outline) {
            return bad("outline is not a simple polygon".into());
        }
        if geom::signed_area(&outline) <= 0.0 {
            return bad("outline must be counter-clockwise".into());
        }
        if adjacency.len() != n || adjacency.iter().any(|r| r.len() != n) {
            return bad(format!("adjacency must be {n}x{n}"));
        }
        for i in 0..n {
            if adjacency[i][i] {
                return bad(format!("adjacency diagonal entry {i} is set"));
            }
            for j in 0..n {
                if adjacency[i][j] != adjacency[j][i] {
                    return bad(format!("adjacency is not symmetric at ({i}, {j})"));
                }
            }
        }
        if let Some(p) = &probabilities {
            if p.len() != n || p.iter().any(|r| r.len() != n) {
                return bad(format!("probabilities must be {n}x{n}"));
            }
            for i in 0..n {
                for j in 0..n {
                    let v = p[i][j];
                    if !(0.0..=1.0).contains(&v) {
                        return bad(format!("probability ({i}, {j}) = {v} outside [0, 1]"));
                    }
                    if v != p[j][i] {
                        return bad(format!("probabilities not symmetric at ({i}, {j})"));
                    }
                    if adjacency[i][j] && v <= 0.0 {
                        return bad(format!("adjacent pair ({i}, {j}) has zero probability"));
                    }
                }
            }
        }
        if let Some(m) = &merge_map {
            if m.len() != n {
                return bad("merge_map must have one entry per outline edge".into());
            }
            for i in 0..n {
                let r = m[i];
                if r >= n || r > i || m[r] != r {
                    return bad(format!(
                        "merge_map entry {i} -> {r} is not a first-edge representative"
                    ));
                }
                if r != i && adjacency[i].iter().any(|&a| a) {
                    return bad(format!("merged edge {i} must have an empty adjacency row"));
                }
            }
        }
        Ok(DualGraph {
            outline,
            adjacency,
            probabilities,
            merge_map,
        })
    }

    /// Builds from an index pair list.
    pub fn from_pairs(
        outline: Vec<Vec2>,
        pairs: &[(usize, usize)],
        merge_map: Option<Vec<usize>>,
    ) -> Result<Self, GraphError> {
        let n = outline.len();
        let mut adj = vec![vec![false; n]; n];
        for &(i, j) in pairs {
            if i >= n || j >= n {
                return Err(GraphError::InvalidDual(format!(
                    "pair ({i}, {j}) out of range"
                )));
            }
            adj[i][j] = true;
            adj[j][i] = true;
        }
        Self::new(outline, adj, None, merge_map)
    }

    pub fn outline(&self) -> &[Vec2] {
        &self.outline
    }

    pub fn n_outline(&self) -> usize {
        self.outline.len()
    }

    pub fn adjacency(&self) -> &[Vec<bool>] {
        &self.adjacency
    }

    pub fn probabilities(&self) -> Option<&[Vec<f64>]> {
        self.probabilities.as_deref()
    }

    pub fn merge_map(&self) -> Option<&[usize]> {
        self.merge_map.as_deref()
    }

    pub fn representative(&self, i: usize) -> usize {
        self.merge_map.as_ref().map_or(i, |m| m[i])
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i][j]
    }

    /// Adjacent pairs with `i < j`, ascending.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.outline.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.adjacency[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn edge_midpoint(&self, i: usize) -> Vec2 {
        let n = self.outline.len();
        (self.outline[i] + self.outline[(i + 1) % n]) * 0.5
    }

    /// Same dual with a different adjacency (probabilities dropped).
    pub fn with_adjacency(&self, adjacency: Vec<Vec<bool>>) -> Result<Self, GraphError> {
        Self::new(
            self.outline.clone(),
            adjacency,
            None,
            self.merge_map.clone(),
        )
    }

    /// Same dual with the pair `(i, j)` removed.
    pub fn without_pair(&self, i: usize, j: usize) -> Result<Self, GraphError> {
        let mut adj = self.adjacency.clone();
        adj[i][j] = false;
        adj[j][i] = false;
        Self::new(
            self.outline.clone(),
            adj,
            self.probabilities.clone(),
            self.merge_map.clone(),
        )
    }
}
