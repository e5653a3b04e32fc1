//! Embedding solves: primal (user 2D sketch), dual (recovered primal with a
//! spectral start) and variable outline heights.
//!
//! Coordinates are scaled so the outline bounding-box diagonal is 1 while
//! solving. Anything that is not a variable is copied to the output
//! unchanged, so outline coordinates and the fixed height stay bit-exact.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::dual::primal_from_dual;
use crate::energy::{self, EnergyError, MetricKind};
use crate::geom::{self, Vec2, Vec3};
use crate::graph::{
    DualGraph, Embedding2, Embedding3, GraphError, HeightGroup, RoofGraph, VertexId,
};
use crate::lbfgs::{self, LbfgsOptions};
use crate::spectral::spectral_embed_2d;
use crate::validity::{self, ClassifiedEdge};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid solve spec: {invariant}")]
    InvalidSpec { invariant: String },
    #[error("degenerate graph: {0}")]
    DegenerateGraph(String),
    #[error("solve did not converge (planarity {:.3e})", .0.planarity)]
    NotConverged(Box<SolveResult>),
    #[error("every outline height is free; at least one vertex must stay at z = 0")]
    AllHeightsFree,
    #[error("linear system is singular (disconnected interior component)")]
    SingularSystem,
    #[error("outline is not a simple polygon")]
    SelfIntersectingOutline,
    #[error("2D embedding is not valid (residual {residual:.3e})")]
    InvalidInput2D { residual: f64 },
    #[error("plane system is inconsistent (residual {residual:.3e})")]
    InconsistentSystem { residual: f64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

impl SolveError {
    /// Stable name used in machine-readable error reports.
    pub fn name(&self) -> &'static str {
        match self {
            SolveError::InvalidSpec { .. } => "InvalidSpec",
            SolveError::DegenerateGraph(_) => "DegenerateGraph",
            SolveError::NotConverged(_) => "NotConverged",
            SolveError::AllHeightsFree => "AllHeightsFree",
            SolveError::SingularSystem => "SingularSystem",
            SolveError::SelfIntersectingOutline => "SelfIntersectingOutline",
            SolveError::InvalidInput2D { .. } => "InvalidInput2D",
            SolveError::InconsistentSystem { .. } => "InconsistentSystem",
            SolveError::Graph(g) => graph_error_name(g),
            SolveError::Energy(EnergyError::Graph(g)) => graph_error_name(g),
            SolveError::Energy(EnergyError::DegenerateEdge(_)) => "DegenerateEdge",
            SolveError::Energy(EnergyError::TooFewPoints { .. }) => "TooFewPoints",
            SolveError::Energy(EnergyError::UnsupportedMetric(_)) => "UnsupportedMetric",
        }
    }
}

pub fn graph_error_name(g: &GraphError) -> &'static str {
    match g {
        GraphError::Empty => "Empty",
        GraphError::FaceTooSmall { .. } => "FaceTooSmall",
        GraphError::UnknownVertex { .. } => "UnknownVertex",
        GraphError::EdgeOverused { .. } => "EdgeOverused",
        GraphError::InconsistentOrientation { .. } => "InconsistentOrientation",
        GraphError::BrokenOutline(_) => "BrokenOutline",
        GraphError::FaceWithoutOutlineEdge { .. } => "FaceWithoutOutlineEdge",
        GraphError::NonRealizableAdjacency { .. } => "NonRealizableAdjacency",
        GraphError::InvalidDual(_) => "InvalidDual",
        GraphError::EmbeddingSize { .. } => "EmbeddingSize",
        GraphError::NonFinite(_) => "NonFinite",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMode {
    #[default]
    Primal,
    Dual,
    VariableHeight,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveSpec {
    pub mode: SolveMode,
    /// Height of the fixed roof vertex; defaults to half the square root of
    /// the outline area.
    pub h: Option<f64>,
    pub lambda: f64,
    pub gamma: f64,
    pub eta: f64,
    pub theta_deg: f64,
    pub planarity_kind: MetricKind,
    pub tol_grad: f64,
    pub tol_energy: f64,
    pub max_iters: usize,
    pub fixed_vertex: Option<VertexId>,
    /// Finish with a planarity-only pass after the regularized solve.
    pub polish: bool,
    pub time_limit: Option<Duration>,
}

impl Default for SolveSpec {
    fn default() -> Self {
        SolveSpec {
            mode: SolveMode::Primal,
            h: None,
            lambda: 0.1,
            gamma: 0.05,
            eta: 1.0,
            theta_deg: 3.0,
            planarity_kind: MetricKind::SmallestEig,
            tol_grad: 1e-12,
            tol_energy: 1e-16,
            max_iters: 2000,
            fixed_vertex: None,
            polish: true,
            time_limit: None,
        }
    }
}

impl SolveSpec {
    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |s: &str| {
            Err(SolveError::InvalidSpec {
                invariant: s.to_string(),
            })
        };
        if let Some(h) = self.h {
            if !(h.is_finite() && h > 0.0) {
                return bad("h > 0");
            }
        }
        for (name, w) in [
            ("lambda >= 0", self.lambda),
            ("gamma >= 0", self.gamma),
            ("eta >= 0", self.eta),
        ] {
            if !(w.is_finite() && w >= 0.0) {
                return bad(name);
            }
        }
        if !(self.theta_deg.is_finite() && self.theta_deg >= 0.0) {
            return bad("theta_deg >= 0");
        }
        if self.max_iters < 1 {
            return bad("max_iters >= 1");
        }
        if !(self.tol_grad >= 0.0 && self.tol_energy >= 0.0) {
            return bad("tolerances >= 0");
        }
        if self.planarity_kind == MetricKind::Validity2d {
            return bad("planarity_kind is a 3D metric");
        }
        Ok(())
    }

    fn lbfgs_options(&self, start: Instant) -> LbfgsOptions {
        LbfgsOptions {
            tol_grad: self.tol_grad,
            tol_energy: self.tol_energy,
            max_iters: self.max_iters,
            deadline: self.time_limit.map(|t| start + t),
            ..LbfgsOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    /// Planarity of the chosen metric on the normalized problem.
    pub planarity: f64,
    /// Objective being minimized at that iteration.
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub graph: RoofGraph,
    pub embedding: Embedding3,
    pub energy_trace: Vec<TraceEntry>,
    pub converged: bool,
    pub iterations: usize,
    pub wall_time: Duration,
    /// Smallest-eigenvalue planarity of the returned embedding, normalized.
    pub planarity: f64,
    pub fixed_vertex: Option<VertexId>,
}

/// Outline bounding-box diagonal of a 3D embedding, read in xy.
pub fn outline_scale(graph: &RoofGraph, emb: &Embedding3) -> f64 {
    let d = geom::bbox_diagonal(graph.outline().iter().map(|&v| {
        let p = emb.get(v);
        Vec2::new(p.x, p.y)
    }));
    if d > 0.0 {
        d
    } else {
        1.0
    }
}

/// Smallest-eigenvalue roof planarity after scaling the outline diagonal to 1.
pub fn normalized_planarity(graph: &RoofGraph, emb: &Embedding3) -> Result<f64, EnergyError> {
    let s = 1.0 / outline_scale(graph, emb);
    energy::roof_planarity_value(graph, &emb.scaled(s), MetricKind::SmallestEig)
}

/// Roof vertex of highest degree, ties to the smallest id.
pub fn default_fixed_vertex(graph: &RoofGraph) -> Option<VertexId> {
    let mut best: Option<(usize, VertexId)> = None;
    for v in graph.roof_vertices() {
        let d = graph.degree(v);
        if best.is_none_or(|(bd, _)| d > bd) {
            best = Some((d, v));
        }
    }
    best.map(|(_, v)| v)
}

pub fn default_height(outline: &[Vec2]) -> f64 {
    geom::signed_area(outline).abs().sqrt() / 2.0
}

/// Free variables and regularizers for one solve, in original units.
pub(crate) struct Setup {
    pub graph: RoofGraph,
    pub start: Embedding3,
    pub vars: Vec<(VertexId, usize)>,
    pub lambda: f64,
    pub targets: Vec<(VertexId, Vec2)>,
    pub gamma: f64,
    pub eta: f64,
    pub groups: Vec<Vec<VertexId>>,
    pub fixed_vertex: Option<VertexId>,
}

struct Problem<'a> {
    graph: &'a RoofGraph,
    base: Embedding3,
    vars: &'a [(VertexId, usize)],
    kind: MetricKind,
    lambda: f64,
    targets: Vec<(VertexId, Vec2)>,
    gamma: f64,
    classes: Vec<ClassifiedEdge>,
    eta: f64,
    groups: &'a [Vec<VertexId>],
}

impl Problem<'_> {
    fn embed(&self, x: &[f64]) -> Embedding3 {
        let mut e = self.base.clone();
        for (k, &(v, c)) in self.vars.iter().enumerate() {
            let mut p = e.get(v);
            p[c] = x[k];
            e.set(v, p);
        }
        e
    }

    fn x0(&self) -> Vec<f64> {
        self.vars
            .iter()
            .map(|&(v, c)| self.base.get(v)[c])
            .collect()
    }

    fn planarity(&self, x: &[f64]) -> f64 {
        energy::roof_planarity_value(self.graph, &self.embed(x), self.kind).unwrap_or(f64::INFINITY)
    }

    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let emb = self.embed(x);
        let n = self.graph.n_vertices();
        let mut grad = vec![0.0; 3 * n];
        let mut total = match energy::roof_planarity(self.graph, &emb, self.kind) {
            Ok(e) => {
                grad.copy_from_slice(&e.gradient);
                e.value
            }
            Err(_) => return (f64::INFINITY, vec![0.0; x.len()]),
        };
        if self.lambda > 0.0 {
            for &(v, t) in &self.targets {
                let p = emb.get(v);
                let d = Vec2::new(p.x - t.x, p.y - t.y);
                total += self.lambda * d.norm_squared();
                grad[3 * v] += 2.0 * self.lambda * d.x;
                grad[3 * v + 1] += 2.0 * self.lambda * d.y;
            }
        }
        if self.gamma > 0.0 && !self.classes.is_empty() {
            match energy::aesthetic_energy_with(self.graph, &emb, &self.classes) {
                Ok(a) => {
                    total += self.gamma * a.value;
                    for (g, ag) in grad.iter_mut().zip(&a.gradient) {
                        *g += self.gamma * ag;
                    }
                }
                Err(_) => return (f64::INFINITY, vec![0.0; x.len()]),
            }
        }
        if self.eta > 0.0 {
            for group in self.groups {
                let z: Vec<f64> = group.iter().map(|&v| emb.get(v).z).collect();
                let var = energy::variance_energy(&z);
                total += self.eta * var.value;
                for (k, &v) in group.iter().enumerate() {
                    grad[3 * v + 2] += self.eta * var.gradient[k];
                }
            }
        }
        let g: Vec<f64> = self.vars.iter().map(|&(v, c)| grad[3 * v + c]).collect();
        (total, g)
    }
}

/// Runs the regularized solve, then (if requested and any regularizer is on)
/// a planarity-only pass from where it stopped.
pub(crate) fn run(setup: Setup, spec: &SolveSpec) -> Result<SolveResult, SolveError> {
    let t0 = Instant::now();
    let graph = &setup.graph;
    let scale = outline_scale(graph, &setup.start);
    let s = 1.0 / scale;
    let base = setup.start.scaled(s);
    let classes = if setup.gamma > 0.0 {
        validity::classify_roof_edges_detailed(graph, &base.project_xy())
    } else {
        Vec::new()
    };
    let mut problem = Problem {
        graph,
        base,
        vars: &setup.vars,
        kind: spec.planarity_kind,
        lambda: setup.lambda,
        targets: setup.targets.iter().map(|&(v, t)| (v, t * s)).collect(),
        gamma: setup.gamma,
        classes,
        eta: setup.eta,
        groups: &setup.groups,
    };
    let opts = spec.lbfgs_options(t0);
    let mut trace = Vec::new();
    let mut x = problem.x0();
    let mut iterations = 0;
    let mut converged = true;
    let regularized = problem.lambda > 0.0
        || problem.gamma > 0.0
        || (problem.eta > 0.0 && !problem.groups.is_empty());
    let mut phases = vec![true];
    if regularized && spec.polish {
        phases.push(false);
    }
    for (i, keep_regs) in phases.into_iter().enumerate() {
        if !keep_regs {
            problem.lambda = 0.0;
            problem.gamma = 0.0;
            problem.eta = 0.0;
        }
        if x.is_empty() {
            break;
        }
        let offset = iterations;
        let r = lbfgs::minimize(
            |y| problem.eval(y),
            x.clone(),
            &opts,
            |k, y, f| {
                if k == 0 && i > 0 {
                    return;
                }
                trace.push(TraceEntry {
                    iteration: offset + k,
                    planarity: problem.planarity(y),
                    total: f,
                });
            },
        );
        iterations += r.iterations;
        converged = r.converged();
        x = r.x;
    }
    if setup.vars.is_empty() {
        trace.push(TraceEntry {
            iteration: 0,
            planarity: problem.planarity(&x),
            total: problem.planarity(&x),
        });
    }

    let mut coords: Vec<Vec3> = setup.start.coords().to_vec();
    for (k, &(v, c)) in setup.vars.iter().enumerate() {
        coords[v][c] = x[k] * scale;
    }
    let embedding = Embedding3::new(coords)?;
    let planarity = normalized_planarity(graph, &embedding)?;
    Ok(SolveResult {
        graph: setup.graph.clone(),
        embedding,
        energy_trace: trace,
        converged,
        iterations,
        wall_time: t0.elapsed(),
        planarity,
        fixed_vertex: setup.fixed_vertex,
    })
}

fn choose_fixed(graph: &RoofGraph, spec: &SolveSpec) -> Result<VertexId, SolveError> {
    match spec.fixed_vertex {
        Some(v) if v < graph.n_vertices() && !graph.is_outline(v) => Ok(v),
        Some(_) => Err(SolveError::InvalidSpec {
            invariant: "fixed_vertex is a roof vertex".into(),
        }),
        None => default_fixed_vertex(graph)
            .ok_or_else(|| SolveError::DegenerateGraph("graph has no roof vertex".into())),
    }
}

/// Shared set-up for all three modes: roof vertices free in xyz except the
/// fixed vertex's z; outline vertices in a free height group get a z
/// variable.
fn build(
    graph: &RoofGraph,
    init2d: &Embedding2,
    spec: &SolveSpec,
    with_heights: bool,
    lambda: f64,
    gamma: f64,
) -> Result<Setup, SolveError> {
    spec.validate()?;
    init2d.check_for(graph)?;
    let fixed = choose_fixed(graph, spec)?;
    let outline: Vec<Vec2> = graph.outline().iter().map(|&v| init2d.get(v)).collect();
    let h = spec.h.unwrap_or_else(|| default_height(&outline));
    if !(h.is_finite() && h > 0.0) {
        return Err(SolveError::InvalidSpec {
            invariant: "h > 0".into(),
        });
    }
    let mut start = init2d.with_height(0.0);
    let mut vars = Vec::new();
    let mut targets = Vec::new();
    let mut groups: BTreeMap<String, Vec<VertexId>> = BTreeMap::new();
    for v in 0..graph.n_vertices() {
        if graph.is_outline(v) {
            if !with_heights {
                continue;
            }
            match graph.vertices()[v].group() {
                Some(HeightGroup::Free) => vars.push((v, 2)),
                Some(HeightGroup::Group(label)) => {
                    vars.push((v, 2));
                    groups.entry(label).or_default().push(v);
                }
                _ => {}
            }
        } else {
            let p = init2d.get(v);
            start.set(v, Vec3::new(p.x, p.y, h));
            vars.push((v, 0));
            vars.push((v, 1));
            if v != fixed {
                vars.push((v, 2));
            }
            targets.push((v, p));
        }
    }
    vars.sort_unstable();
    Ok(Setup {
        graph: graph.clone(),
        start,
        vars,
        lambda,
        targets,
        gamma,
        eta: if with_heights { spec.eta } else { 0.0 },
        groups: groups.into_values().collect(),
        fixed_vertex: Some(fixed),
    })
}

/// Minimizes planarity plus `lambda` times the squared distance of roof
/// vertices to their sketched xy positions. Outline stays at z = 0.
pub fn optimize_primal(
    graph: &RoofGraph,
    user2d: &Embedding2,
    spec: &SolveSpec,
) -> Result<SolveResult, SolveError> {
    let setup = build(graph, user2d, spec, false, spec.lambda, 0.0)?;
    run(setup, spec)
}

/// Recovers the primal, starts from the spectral embedding and minimizes
/// planarity plus `gamma` times the aesthetic energy.
pub fn optimize_dual(dual: &DualGraph, spec: &SolveSpec) -> Result<SolveResult, SolveError> {
    let graph = primal_from_dual(dual)?;
    let init = dual_initialization(&graph, dual)?;
    let setup = build(&graph, &init, spec, false, 0.0, spec.gamma)?;
    run(setup, spec)
}

/// Spectral 2D placement of the primal recovered from `dual`.
pub fn dual_initialization(graph: &RoofGraph, dual: &DualGraph) -> Result<Embedding2, SolveError> {
    let mut coords = vec![Vec2::zeros(); graph.n_vertices()];
    coords[..dual.n_outline()].copy_from_slice(dual.outline());
    spectral_embed_2d(graph, &Embedding2::new(coords)?)
}

/// Like [`optimize_primal`], but outline vertices labelled free or with a
/// group label get a height variable; each labelled group's height variance
/// is penalized by `eta`. Labels are read from the graph's vertex records.
pub fn optimize_variable_heights(
    graph: &RoofGraph,
    user2d: &Embedding2,
    spec: &SolveSpec,
) -> Result<SolveResult, SolveError> {
    let anchored = graph
        .outline()
        .iter()
        .any(|&v| graph.vertices()[v].group() == Some(HeightGroup::FixedZero));
    if !anchored {
        return Err(SolveError::AllHeightsFree);
    }
    let setup = build(graph, user2d, spec, true, spec.lambda, 0.0)?;
    run(setup, spec)
}

/// Planarity-only solve over the given vertices' coordinates, all other
/// coordinates frozen. Used by region re-optimization.
pub(crate) fn optimize_subset(
    graph: &RoofGraph,
    emb: &Embedding3,
    movable: &[VertexId],
    spec: &SolveSpec,
) -> Result<SolveResult, SolveError> {
    spec.validate()?;
    emb.check_for(graph)?;
    let mut vars: Vec<(VertexId, usize)> = movable
        .iter()
        .flat_map(|&v| [(v, 0), (v, 1), (v, 2)])
        .collect();
    vars.sort_unstable();
    vars.dedup();
    let setup = Setup {
        graph: graph.clone(),
        start: emb.clone(),
        vars,
        lambda: 0.0,
        targets: Vec::new(),
        gamma: 0.0,
        eta: 0.0,
        groups: Vec::new(),
        fixed_vertex: None,
    };
    run(setup, spec)
}

/// Dispatches on `spec.mode` for a primal input.
pub fn optimize_graph(
    graph: &RoofGraph,
    user2d: &Embedding2,
    spec: &SolveSpec,
) -> Result<SolveResult, SolveError> {
    match spec.mode {
        SolveMode::Primal => optimize_primal(graph, user2d, spec),
        SolveMode::VariableHeight => optimize_variable_heights(graph, user2d, spec),
        SolveMode::Dual => {
            let dual = crate::dual::dual_from_primal(graph, user2d)?;
            optimize_dual(&dual, spec)
        }
    }
}
