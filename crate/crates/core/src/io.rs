//! JSON file formats, their conversion to core types, and building export as
//! Wavefront OBJ.
//!
//! Vertex and face ids in files are 1-based; outline edge indices in dual
//! files are 0-based, edge `i` running from outline point `i` to `i + 1`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::adjacency::{self, AdjacencyCandidate};
use crate::editing::EditOp;
use crate::energy::MetricKind;
use crate::geom::{self, Vec2, Vec3};
use crate::graph::{
    DualGraph, Embedding2, Embedding3, GraphError, HeightGroup, RoofGraph, VertexKind, VertexRecord,
};
use crate::solver::{self, SolveError, SolveMode, SolveResult, SolveSpec};
use crate::validity::ValidityReport;

pub const ROOF_FORMAT: &str = "roofgraph/1";
pub const DUAL_FORMAT: &str = "roofdual/1";
/// Planarity an exported roof must reach.
pub const EXPORT_PLANARITY_TOL: f64 = 1e-9;
/// Facade height, as a fraction of the roof height, when the outline sits at z = 0.
pub const FACADE_FRACTION: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IoError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema violation ({invariant}): {message}")]
    Schema { invariant: String, message: String },
    #[error("roof is not planar enough to export (planarity {planarity:.3e})")]
    NonPlanarInput { planarity: f64 },
    #[error("io error: {0}")]
    Io(String),
}

impl IoError {
    pub fn name(&self) -> &'static str {
        match self {
            IoError::Parse { .. } => "ParseError",
            IoError::Schema { .. } => "SchemaError",
            IoError::NonPlanarInput { .. } => "NonPlanarInput",
            IoError::Io(_) => "IoError",
        }
    }

    /// The violated invariant for schema errors.
    pub fn invariant(&self) -> Option<&str> {
        match self {
            IoError::Schema { invariant, .. } => Some(invariant),
            _ => None,
        }
    }
}

fn schema(invariant: &str, message: impl Into<String>) -> IoError {
    IoError::Schema {
        invariant: invariant.to_string(),
        message: message.into(),
    }
}

impl From<GraphError> for IoError {
    fn from(e: GraphError) -> Self {
        schema(solver::graph_error_name(&e), e.to_string())
    }
}

impl From<std::io::Error> for IoError {
    fn from(e: std::io::Error) -> Self {
        IoError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        use serde_json::error::Category;
        match e.classify() {
            Category::Data => schema("schema", e.to_string()),
            Category::Io => IoError::Io(e.to_string()),
            Category::Syntax | Category::Eof => IoError::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindTag {
    Outline,
    Roof,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeightGroupTag {
    FixedZero,
    Free,
    Group(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub id: usize,
    pub xy: [f64; 2],
    pub kind: KindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height_group: Option<HeightGroupTag>,
}

/// Background image for the editor: path plus the affine map
/// `[a, b, c, d, e, f]` taking pixel (u, v) to (a u + b v + c, d u + e v + f).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageRef {
    pub path: String,
    pub pixel_to_world: [f64; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoofGraphFile {
    pub format: String,
    pub vertices: Vec<VertexEntry>,
    pub faces: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<ImageRef>,
}

/// A loaded roof: graph, plan view and, when every vertex has one, heights.
#[derive(Debug, Clone, PartialEq)]
pub struct RoofDocument {
    pub graph: RoofGraph,
    pub xy: Embedding2,
    pub z: Option<Vec<f64>>,
    pub image: Option<ImageRef>,
}

impl RoofDocument {
    pub fn from_3d(graph: RoofGraph, emb: &Embedding3) -> Self {
        RoofDocument {
            xy: emb.project_xy(),
            z: Some(emb.coords().iter().map(|p| p.z).collect()),
            graph,
            image: None,
        }
    }

    pub fn embedding3(&self) -> Option<Embedding3> {
        let z = self.z.as_ref()?;
        let coords = self
            .xy
            .coords()
            .iter()
            .zip(z)
            .map(|(p, &z)| Vec3::new(p.x, p.y, z))
            .collect();
        Embedding3::new(coords).ok()
    }

    pub fn to_file(&self) -> RoofGraphFile {
        let vertices = self
            .graph
            .vertices()
            .iter()
            .enumerate()
            .map(|(v, rec)| {
                let p = self.xy.get(v);
                VertexEntry {
                    id: v + 1,
                    xy: [p.x, p.y],
                    kind: match rec.kind {
                        VertexKind::Outline => KindTag::Outline,
                        VertexKind::Roof => KindTag::Roof,
                    },
                    z: self.z.as_ref().map(|z| z[v]),
                    height_group: rec.height_group.as_ref().map(|g| match g {
                        HeightGroup::FixedZero => HeightGroupTag::FixedZero,
                        HeightGroup::Free => HeightGroupTag::Free,
                        HeightGroup::Group(s) => HeightGroupTag::Group(s.clone()),
                    }),
                }
            })
            .collect();
        let faces = self
            .graph
            .faces()
            .iter()
            .map(|f| f.iter().map(|v| v + 1).collect())
            .collect();
        RoofGraphFile {
            format: ROOF_FORMAT.into(),
            vertices,
            faces,
            image: self.image.clone(),
        }
    }
}

impl RoofGraphFile {
    pub fn into_document(self) -> Result<RoofDocument, IoError> {
        if self.format != ROOF_FORMAT {
            return Err(schema(
                "format",
                format!("expected \"{ROOF_FORMAT}\", got \"{}\"", self.format),
            ));
        }
        let n = self.vertices.len();
        let mut slots: Vec<Option<VertexEntry>> = vec![None; n];
        for v in self.vertices {
            if v.id == 0 || v.id > n || slots[v.id - 1].is_some() {
                return Err(schema(
                    "dense vertex ids",
                    format!("vertex id {} is not a unique id in 1..={n}", v.id),
                ));
            }
            let k = v.id - 1;
            slots[k] = Some(v);
        }
        let entries: Vec<VertexEntry> = slots.into_iter().map(|v| v.unwrap()).collect();
        let with_z = entries.iter().filter(|v| v.z.is_some()).count();
        if with_z != 0 && with_z != n {
            return Err(schema(
                "z on all vertices or none",
                format!("{with_z} of {n} vertices have z"),
            ));
        }
        let mut records = Vec::with_capacity(n);
        for v in &entries {
            let kind = match v.kind {
                KindTag::Outline => VertexKind::Outline,
                KindTag::Roof => VertexKind::Roof,
            };
            if kind == VertexKind::Roof && v.height_group.is_some() {
                return Err(schema(
                    "height_group on outline vertices only",
                    format!("roof vertex {} has one", v.id),
                ));
            }
            let height_group = v.height_group.as_ref().map(|g| match g {
                HeightGroupTag::FixedZero => HeightGroup::FixedZero,
                HeightGroupTag::Free => HeightGroup::Free,
                HeightGroupTag::Group(s) => HeightGroup::Group(s.clone()),
            });
            records.push(VertexRecord { kind, height_group });
        }
        let mut faces = Vec::with_capacity(self.faces.len());
        for (fi, f) in self.faces.iter().enumerate() {
            let mut face = Vec::with_capacity(f.len());
            for &id in f {
                if id == 0 || id > n {
                    return Err(schema(
                        "UnknownVertex",
                        format!("face {} references missing vertex id {id}", fi + 1),
                    ));
                }
                face.push(id - 1);
            }
            faces.push(face);
        }
        let graph = RoofGraph::new(records, faces)?;
        let xy = Embedding2::new(
            entries
                .iter()
                .map(|v| Vec2::new(v.xy[0], v.xy[1]))
                .collect(),
        )?;
        let outline: Vec<Vec2> = graph.outline().iter().map(|&v| xy.get(v)).collect();
        if geom::signed_area(&outline) <= 0.0 {
            return Err(schema(
                "counter-clockwise faces",
                "outline is clockwise or degenerate in plan view",
            ));
        }
        let z = if with_z == n {
            let z: Vec<f64> = entries.iter().map(|v| v.z.unwrap()).collect();
            if let Some(k) = z.iter().position(|h| !h.is_finite()) {
                return Err(GraphError::NonFinite(k).into());
            }
            Some(z)
        } else {
            None
        };
        Ok(RoofDocument {
            graph,
            xy,
            z,
            image: self.image,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AdjEntry {
    Pair(usize, usize),
    Triple(usize, usize, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualGraphFile {
    pub format: String,
    pub outline: Vec<[f64; 2]>,
    pub adjacency: Vec<AdjEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merge_map: Option<Vec<usize>>,
}

/// A loaded dual: either a binary adjacency or a probability matrix still to
/// be resolved.
#[derive(Debug, Clone, PartialEq)]
pub enum DualDocument {
    Binary(DualGraph),
    Probabilistic {
        outline: Vec<Vec2>,
        prob: Vec<Vec<f64>>,
        merge_map: Option<Vec<usize>>,
    },
}

impl DualDocument {
    pub fn outline(&self) -> &[Vec2] {
        match self {
            DualDocument::Binary(d) => d.outline(),
            DualDocument::Probabilistic { outline, .. } => outline,
        }
    }

    /// The dual graph, resolving a probability matrix greedily.
    pub fn into_dual(self) -> Result<DualGraph, IoError> {
        match self {
            DualDocument::Binary(d) => Ok(d),
            DualDocument::Probabilistic {
                outline,
                prob,
                merge_map,
            } => {
                let c = adjacency::resolve_greedy(&outline, &prob, adjacency::DEFAULT_THRESHOLD)
                    .map_err(|e| schema(e.name(), e.to_string()))?;
                Ok(DualGraph::new(outline, c.adjacency, None, merge_map)?)
            }
        }
    }

    pub fn to_file(&self) -> DualGraphFile {
        match self {
            DualDocument::Binary(d) => dual_to_file(d),
            DualDocument::Probabilistic {
                outline,
                prob,
                merge_map,
            } => {
                let n = outline.len();
                let mut adjacency = Vec::new();
                for i in 0..n {
                    for j in (i + 1)..n {
                        if prob[i][j] > 0.0 {
                            adjacency.push(AdjEntry::Triple(i, j, prob[i][j]));
                        }
                    }
                }
                DualGraphFile {
                    format: DUAL_FORMAT.into(),
                    outline: outline.iter().map(|p| [p.x, p.y]).collect(),
                    adjacency,
                    merge_map: merge_map.clone(),
                }
            }
        }
    }
}

pub fn dual_to_file(d: &DualGraph) -> DualGraphFile {
    DualGraphFile {
        format: DUAL_FORMAT.into(),
        outline: d.outline().iter().map(|p| [p.x, p.y]).collect(),
        adjacency: d
            .pairs()
            .into_iter()
            .map(|(i, j)| AdjEntry::Pair(i, j))
            .collect(),
        merge_map: d.merge_map().map(|m| m.to_vec()),
    }
}

/// A resolved candidate as a binary dual file.
pub fn candidate_to_file(outline: &[Vec2], c: &AdjacencyCandidate) -> DualGraphFile {
    DualGraphFile {
        format: DUAL_FORMAT.into(),
        outline: outline.iter().map(|p| [p.x, p.y]).collect(),
        adjacency: c
            .pairs()
            .into_iter()
            .map(|(i, j)| AdjEntry::Pair(i, j))
            .collect(),
        merge_map: None,
    }
}

impl DualGraphFile {
    pub fn into_document(self) -> Result<DualDocument, IoError> {
        if self.format != DUAL_FORMAT {
            return Err(schema(
                "format",
                format!("expected \"{DUAL_FORMAT}\", got \"{}\"", self.format),
            ));
        }
        let outline: Vec<Vec2> = self.outline.iter().map(|p| Vec2::new(p[0], p[1])).collect();
        if outline.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(schema(
                "finite coordinates",
                "outline has a non-finite point",
            ));
        }
        let n = outline.len();
        let triples = self
            .adjacency
            .iter()
            .filter(|e| matches!(e, AdjEntry::Triple(..)))
            .count();
        if triples != 0 && triples != self.adjacency.len() {
            return Err(schema(
                "uniform adjacency entries",
                "mix of pairs and probability triples",
            ));
        }
        let mut prob = vec![vec![0.0; n]; n];
        let mut adj = vec![vec![false; n]; n];
        for e in &self.adjacency {
            let (i, j, p) = match *e {
                AdjEntry::Pair(i, j) => (i, j, 1.0),
                AdjEntry::Triple(i, j, p) => (i, j, p),
            };
            if i >= n || j >= n {
                return Err(schema(
                    "indices in range",
                    format!("pair ({i}, {j}) with {n} outline edges"),
                ));
            }
            if i == j {
                return Err(schema("zero diagonal", format!("pair ({i}, {i})")));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(schema(
                    "p in [0, 1]",
                    format!("pair ({i}, {j}) has p = {p}"),
                ));
            }
            if prob[i][j] != 0.0 && prob[i][j] != p {
                return Err(schema(
                    "symmetric",
                    format!("pair ({i}, {j}) given twice with different p"),
                ));
            }
            prob[i][j] = p;
            prob[j][i] = p;
            adj[i][j] = true;
            adj[j][i] = true;
        }
        if let Some(m) = &self.merge_map {
            if m.len() != n || m.iter().any(|&r| r >= n) {
                return Err(schema(
                    "indices in range",
                    "merge_map must map every outline edge to an edge index",
                ));
            }
        }
        if triples > 0 {
            if !geom::is_simple_polygon(&outline) || geom::signed_area(&outline) <= 0.0 {
                return Err(schema(
                    "InvalidDual",
                    "outline must be a simple counter-clockwise polygon",
                ));
            }
            return Ok(DualDocument::Probabilistic {
                outline,
                prob,
                merge_map: self.merge_map,
            });
        }
        Ok(DualDocument::Binary(DualGraph::new(
            outline,
            adj,
            None,
            self.merge_map,
        )?))
    }
}

/// Pretty JSON with shortest round-trip float formatting and a final newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn parse_roof(text: &str) -> Result<RoofDocument, IoError> {
    serde_json::from_str::<RoofGraphFile>(text)?.into_document()
}

pub fn parse_dual(text: &str) -> Result<DualDocument, IoError> {
    serde_json::from_str::<DualGraphFile>(text)?.into_document()
}

pub fn roof_to_json(doc: &RoofDocument) -> String {
    to_json(&doc.to_file())
}

pub fn dual_to_json(doc: &DualDocument) -> String {
    to_json(&doc.to_file())
}

pub fn load_roof(path: &Path) -> Result<RoofDocument, IoError> {
    parse_roof(&std::fs::read_to_string(path)?)
}

pub fn load_dual(path: &Path) -> Result<DualDocument, IoError> {
    parse_dual(&std::fs::read_to_string(path)?)
}

pub fn save_roof(path: &Path, doc: &RoofDocument) -> Result<(), IoError> {
    Ok(std::fs::write(path, roof_to_json(doc))?)
}

pub fn save_dual(path: &Path, doc: &DualDocument) -> Result<(), IoError> {
    Ok(std::fs::write(path, dual_to_json(doc))?)
}

/// Edit operation as written in files and request bodies (1-based ids).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum EditOpJson {
    MoveVertex { vertex: usize, delta: [f64; 3] },
    MoveEdge { edge: [usize; 2], delta: [f64; 3] },
    SnapEdge { edge: [usize; 2] },
    MergeFaces { faces: [usize; 2] },
    SplitFace { face: usize, split: [usize; 2] },
    ForceAdjacent { faces: [usize; 2] },
}

fn zero_based(id: usize) -> Result<usize, IoError> {
    id.checked_sub(1)
        .ok_or_else(|| schema("1-based ids", "id 0 is not valid"))
}

fn pair0(p: [usize; 2]) -> Result<(usize, usize), IoError> {
    Ok((zero_based(p[0])?, zero_based(p[1])?))
}

impl EditOpJson {
    pub fn to_op(&self) -> Result<EditOp, IoError> {
        let v3 = |d: &[f64; 3]| Vec3::new(d[0], d[1], d[2]);
        Ok(match self {
            EditOpJson::MoveVertex { vertex, delta } => EditOp::MoveVertex {
                vertex: zero_based(*vertex)?,
                delta: v3(delta),
            },
            EditOpJson::MoveEdge { edge, delta } => EditOp::MoveEdge {
                edge: pair0(*edge)?,
                delta: v3(delta),
            },
            EditOpJson::SnapEdge { edge } => EditOp::SnapEdge {
                edge: pair0(*edge)?,
            },
            EditOpJson::MergeFaces { faces } => EditOp::MergeFaces {
                faces: pair0(*faces)?,
            },
            EditOpJson::SplitFace { face, split } => EditOp::SplitFace {
                face: zero_based(*face)?,
                split: pair0(*split)?,
            },
            EditOpJson::ForceAdjacent { faces } => EditOp::ForceAdjacent {
                faces: pair0(*faces)?,
            },
        })
    }

    pub fn from_op(op: &EditOp) -> Self {
        let one = |(a, b): (usize, usize)| [a + 1, b + 1];
        let d3 = |d: &Vec3| [d.x, d.y, d.z];
        match op {
            EditOp::MoveVertex { vertex, delta } => EditOpJson::MoveVertex {
                vertex: vertex + 1,
                delta: d3(delta),
            },
            EditOp::MoveEdge { edge, delta } => EditOpJson::MoveEdge {
                edge: one(*edge),
                delta: d3(delta),
            },
            EditOp::SnapEdge { edge } => EditOpJson::SnapEdge { edge: one(*edge) },
            EditOp::MergeFaces { faces } => EditOpJson::MergeFaces { faces: one(*faces) },
            EditOp::SplitFace { face, split } => EditOpJson::SplitFace {
                face: face + 1,
                split: one(*split),
            },
            EditOp::ForceAdjacent { faces } => EditOpJson::ForceAdjacent { faces: one(*faces) },
        }
    }
}

pub fn parse_edit_ops(text: &str) -> Result<Vec<EditOp>, IoError> {
    let ops: Vec<EditOpJson> = serde_json::from_str(text)?;
    ops.iter().map(EditOpJson::to_op).collect()
}

/// Solve settings as JSON; absent fields take the defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSpecJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planarity_kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_grad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_vertex: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polish: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_limit_s: Option<f64>,
}

impl SolveSpecJson {
    pub fn to_spec(&self) -> Result<SolveSpec, SolveError> {
        let bad = |s: &str| SolveError::InvalidSpec {
            invariant: s.to_string(),
        };
        let d = SolveSpec::default();
        let mode = match self.mode.as_deref() {
            None => d.mode,
            Some("primal") => SolveMode::Primal,
            Some("dual") => SolveMode::Dual,
            Some("variable_height") => SolveMode::VariableHeight,
            Some(_) => return Err(bad("mode is primal, dual or variable_height")),
        };
        let planarity_kind = match self.planarity_kind.as_deref() {
            None => d.planarity_kind,
            Some(s) => MetricKind::parse(s)
                .ok_or_else(|| bad("planarity_kind is smallest_eig, det, proj or diag"))?,
        };
        let fixed_vertex = match self.fixed_vertex {
            None => None,
            Some(0) => return Err(bad("fixed_vertex is a 1-based id")),
            Some(v) => Some(v - 1),
        };
        let time_limit = match self.time_limit_s {
            None => None,
            Some(t) if t.is_finite() && t > 0.0 => Some(std::time::Duration::from_secs_f64(t)),
            Some(_) => return Err(bad("time_limit_s > 0")),
        };
        let spec = SolveSpec {
            mode,
            h: self.h.or(d.h),
            lambda: self.lambda.unwrap_or(d.lambda),
            gamma: self.gamma.unwrap_or(d.gamma),
            eta: self.eta.unwrap_or(d.eta),
            theta_deg: self.theta_deg.unwrap_or(d.theta_deg),
            planarity_kind,
            tol_grad: self.tol_grad.unwrap_or(d.tol_grad),
            tol_energy: self.tol_energy.unwrap_or(d.tol_energy),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            fixed_vertex,
            polish: self.polish.unwrap_or(d.polish),
            time_limit,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Summary of a solve: convergence data plus the solved roof as a roof file.
pub fn solve_result_json(r: &SolveResult) -> Value {
    json!({
        "converged": r.converged,
        "iterations": r.iterations,
        "planarity": r.planarity,
        "wall_time_s": r.wall_time.as_secs_f64(),
        "fixed_vertex": r.fixed_vertex.map(|v| v + 1),
        "trace": r.energy_trace.iter().map(|t| json!([t.iteration, t.planarity, t.total])).collect::<Vec<_>>(),
        "roof": RoofDocument::from_3d(r.graph.clone(), &r.embedding).to_file(),
    })
}

pub fn validity_report_json(graph: &RoofGraph, report: &ValidityReport) -> Value {
    let entries: Vec<Value> = report
        .entries
        .iter()
        .map(|e| {
            json!({
                "edge": [e.edge.0 + 1, e.edge.1 + 1],
                "faces": [e.faces.0 + 1, e.faces.1 + 1],
                "case": e.case.name(),
                "residual": e.residual,
            })
        })
        .collect();
    json!({
        "valid": report.is_valid(),
        "overall": report.overall,
        "n_vertices": graph.n_vertices(),
        "edges": entries,
    })
}

/// Roof, facade and base polygons sharing one vertex list, z up.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildingMesh {
    pub vertices: Vec<Vec3>,
    pub roof: Vec<Vec<usize>>,
    pub facade: Vec<Vec<usize>>,
    pub base: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExportOptions {
    pub facades: bool,
}

impl Default for ExportOptions {
    fn default() -> Self {
        ExportOptions { facades: true }
    }
}

/// Closes a solved roof into a building: facade polygons drop from every
/// outline edge to a base polygon at z = 0. A roof whose outline already sits
/// at z = 0 is first raised by a fraction of its height. Facades with no
/// height are left out.
pub fn export_building(
    graph: &RoofGraph,
    emb: &Embedding3,
    opts: ExportOptions,
) -> Result<BuildingMesh, IoError> {
    emb.check_for(graph)?;
    let planarity =
        solver::normalized_planarity(graph, emb).map_err(|e| schema("planarity", e.to_string()))?;
    if !(planarity < EXPORT_PLANARITY_TOL) {
        return Err(IoError::NonPlanarInput { planarity });
    }
    let outline = graph.outline();
    let flat = outline.iter().all(|&v| emb.get(v).z == 0.0);
    let top = emb.coords().iter().fold(0.0f64, |m, p| m.max(p.z));
    let lift = if opts.facades && flat {
        FACADE_FRACTION * top
    } else {
        0.0
    };
    let mut vertices: Vec<Vec3> = emb
        .coords()
        .iter()
        .map(|p| Vec3::new(p.x, p.y, p.z + lift))
        .collect();
    let n = vertices.len();
    vertices.extend(outline.iter().map(|&v| {
        let p = emb.get(v);
        Vec3::new(p.x, p.y, 0.0)
    }));
    let roof: Vec<Vec<usize>> = graph.faces().to_vec();
    let mut facade = Vec::new();
    if opts.facades {
        let m = outline.len();
        for i in 0..m {
            let (a, b) = (outline[i], outline[(i + 1) % m]);
            let (ba, bb) = (n + i, n + (i + 1) % m);
            let mut quad = vec![ba, bb];
            if vertices[b].z != 0.0 {
                quad.push(b);
            }
            if vertices[a].z != 0.0 {
                quad.push(a);
            }
            if quad.len() >= 3 {
                facade.push(quad);
            }
        }
    }
    let base = vec![(n..n + outline.len()).rev().collect()];
    Ok(BuildingMesh {
        vertices,
        roof,
        facade,
        base,
    })
}

fn fmt_num(x: f64) -> String {
    // avoid "-0" in output
    format!("{}", x + 0.0)
}

impl BuildingMesh {
    /// OBJ text with polygonal faces in groups `roof`, `facade` and `base`.
    pub fn to_obj(&self) -> String {
        let mut s = String::from("# roofforge building\n");
        for p in &self.vertices {
            let _ = writeln!(s, "v {} {} {}", fmt_num(p.x), fmt_num(p.y), fmt_num(p.z));
        }
        for (name, faces) in [
            ("roof", &self.roof),
            ("facade", &self.facade),
            ("base", &self.base),
        ] {
            if faces.is_empty() {
                continue;
            }
            let _ = writeln!(s, "g {name}");
            for f in faces {
                let ids: Vec<String> = f.iter().map(|v| (v + 1).to_string()).collect();
                let _ = writeln!(s, "f {}", ids.join(" "));
            }
        }
        s
    }
}
