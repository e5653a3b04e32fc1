//! Local JSON-over-HTTP session service. [`Service::handle`] holds all the
//! logic and knows nothing about sockets; [`router`] and [`serve`] adapt it
//! to axum.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock, TryLockError};
use std::time::Duration;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::adjacency::{self, AdjacencyCandidate, Resolution};
use crate::dual::primal_from_dual;
use crate::editing::{EditError, EditSession};
use crate::graph::{DualGraph, Embedding3, RoofGraph};
use crate::io::{
    self, DualDocument, EditOpJson, ExportOptions, IoError, RoofDocument, SolveSpecJson,
};
use crate::solver::{self, SolveError, SolveMode};

/// Upper bound on a single synchronous solve.
pub const SOLVE_CAP: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq)]
pub struct Response {
    pub status: u16,
    pub content_type: &'static str,
    pub body: String,
}

impl Response {
    fn json(status: u16, v: Value) -> Self {
        Response {
            status,
            content_type: "application/json",
            body: io::to_json(&v),
        }
    }

    fn error(status: u16, name: &str, message: impl std::fmt::Display) -> Self {
        Self::json(
            status,
            json!({ "error": name, "message": message.to_string() }),
        )
    }

    fn not_found(what: &str) -> Self {
        Self::error(404, "NotFound", what)
    }

    /// Parsed JSON body; panics on non-JSON responses.
    pub fn json_body(&self) -> Value {
        serde_json::from_str(&self.body).expect("json response")
    }
}

fn io_error(e: IoError) -> Response {
    let name = e
        .invariant()
        .map(str::to_string)
        .unwrap_or_else(|| e.name().to_string());
    Response::json(
        422,
        json!({ "error": e.name(), "invariant": name, "message": e.to_string() }),
    )
}

fn solve_error(e: SolveError) -> Response {
    match &e {
        SolveError::InvalidSpec { invariant } => Response::json(
            422,
            json!({ "error": e.name(), "invariant": invariant, "message": e.to_string() }),
        ),
        _ => Response::error(422, e.name(), &e),
    }
}

fn edit_error(e: EditError) -> Response {
    match e {
        EditError::Solve(s) => solve_error(s),
        e => Response::error(422, e.name(), &e),
    }
}

/// Current state, replaced wholesale after every mutation.
#[derive(Debug)]
struct Snapshot {
    graph: RoofGraph,
    embedding: Embedding3,
    /// Edited or uploaded since the last solve.
    dirty: bool,
}

#[derive(Debug, Default)]
struct SessionState {
    editor: Option<EditSession>,
    dual: Option<DualGraph>,
    dirty: bool,
}

#[derive(Debug, Default)]
struct Session {
    state: Mutex<SessionState>,
    snapshot: RwLock<Option<Arc<Snapshot>>>,
}

impl Session {
    fn publish(&self, state: &SessionState) {
        let snap = state.editor.as_ref().map(|e| {
            Arc::new(Snapshot {
                graph: e.graph().clone(),
                embedding: e.embedding().clone(),
                dirty: state.dirty,
            })
        });
        *self.snapshot.write().unwrap() = snap;
    }

    fn snapshot(&self) -> Option<Arc<Snapshot>> {
        self.snapshot.read().unwrap().clone()
    }
}

#[derive(Debug, Default)]
pub struct Service {
    sessions: RwLock<HashMap<String, Arc<Session>>>,
    next_id: AtomicU64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResolveRequest {
    dual: io::DualGraphFile,
    #[serde(default)]
    strategy: Option<String>,
    #[serde(default)]
    max: Option<usize>,
    #[serde(default)]
    threshold: Option<f64>,
}

fn roof_json(graph: &RoofGraph, emb: &Embedding3) -> Value {
    serde_json::to_value(RoofDocument::from_3d(graph.clone(), emb).to_file()).unwrap()
}

fn provenance_json(p: &[Resolution]) -> Value {
    p.iter()
        .map(|r| match r {
            Resolution::Exterior { dropped } => json!({ "kind": "exterior", "dropped": [dropped.0, dropped.1] }),
            Resolution::Crossing { kept, dropped } => {
                json!({ "kind": "crossing", "kept": [kept.0, kept.1], "dropped": [dropped.0, dropped.1] })
            }
        })
        .collect()
}

fn candidate_json(outline: &[crate::geom::Vec2], c: &AdjacencyCandidate) -> Value {
    json!({
        "score": c.score,
        "dual": io::candidate_to_file(outline, c),
        "provenance": provenance_json(&c.provenance),
    })
}

impl Service {
    pub fn new() -> Self {
        Self::default()
    }

    /// Routes one request. `path` excludes any query string.
    pub fn handle(&self, method: &str, path: &str, body: &str) -> Response {
        let parts: Vec<&str> = path
            .trim_matches('/')
            .split('/')
            .filter(|s| !s.is_empty())
            .collect();
        match (method, parts.as_slice()) {
            ("POST", ["sessions"]) => self.create(),
            ("POST", ["resolve-adjacency"]) => resolve(body),
            (m, ["sessions", id, rest @ ..]) => {
                let Some(session) = self.sessions.read().unwrap().get(*id).cloned() else {
                    return Response::not_found(&format!("unknown session {id}"));
                };
                match (m, rest) {
                    ("GET", ["graph"]) => get_graph(&session),
                    ("GET", ["mesh.obj"]) => get_mesh(&session),
                    ("PUT", ["graph"]) => mutate(&session, |st| put_graph(st, body)),
                    ("POST", ["optimize"]) => mutate(&session, |st| optimize(st, body)),
                    ("POST", ["edits"]) => mutate(&session, |st| edit(st, body)),
                    ("POST", ["undo"]) => mutate(&session, undo),
                    _ => Response::not_found(path),
                }
            }
            _ => Response::not_found(path),
        }
    }

    fn create(&self) -> Response {
        let n = self.next_id.fetch_add(1, Ordering::Relaxed) + 1;
        let id = format!("s{n:08x}");
        self.sessions
            .write()
            .unwrap()
            .insert(id.clone(), Arc::new(Session::default()));
        Response::json(201, json!({ "id": id }))
    }
}

/// Runs a mutation under the session lock, or answers 409 when another one
/// is in flight. The snapshot is republished only after the mutation ends.
fn mutate(session: &Session, f: impl FnOnce(&mut SessionState) -> Response) -> Response {
    let mut state = match session.state.try_lock() {
        Ok(s) => s,
        Err(TryLockError::WouldBlock) => {
            return Response::error(409, "Conflict", "another mutation is in flight")
        }
        Err(TryLockError::Poisoned(p)) => p.into_inner(),
    };
    let r = f(&mut state);
    session.publish(&state);
    r
}

fn get_graph(session: &Session) -> Response {
    match session.snapshot() {
        Some(s) => Response::json(
            200,
            json!({ "roof": roof_json(&s.graph, &s.embedding), "dirty": s.dirty }),
        ),
        None => Response::error(409, "NoGraph", "no graph uploaded yet"),
    }
}

fn get_mesh(session: &Session) -> Response {
    let Some(s) = session.snapshot() else {
        return Response::error(409, "NoGraph", "no graph uploaded yet");
    };
    match io::export_building(&s.graph, &s.embedding, ExportOptions::default()) {
        Ok(mesh) => Response {
            status: 200,
            content_type: "text/plain",
            body: mesh.to_obj(),
        },
        Err(e) => io_error(e),
    }
}

fn put_graph(state: &mut SessionState, body: &str) -> Response {
    let value: Value = match serde_json::from_str(body) {
        Ok(v) => v,
        Err(e) => return io_error(e.into()),
    };
    let format = value
        .get("format")
        .and_then(Value::as_str)
        .unwrap_or("")
        .to_string();
    let (graph, emb, dual, mode) = if format == io::DUAL_FORMAT {
        let doc = match io::parse_dual(body) {
            Ok(d) => d,
            Err(e) => return io_error(e),
        };
        let dual = match doc.into_dual() {
            Ok(d) => d,
            Err(e) => return io_error(e),
        };
        let graph = match primal_from_dual(&dual) {
            Ok(g) => g,
            Err(e) => return io_error(e.into()),
        };
        let xy = match solver::dual_initialization(&graph, &dual) {
            Ok(xy) => xy,
            Err(e) => return solve_error(e),
        };
        (graph, xy.with_height(0.0), Some(dual), "dual")
    } else {
        let doc = match io::parse_roof(body) {
            Ok(d) => d,
            Err(e) => return io_error(e),
        };
        let emb = doc.embedding3().unwrap_or_else(|| doc.xy.with_height(0.0));
        (doc.graph, emb, None, "primal")
    };
    let editor = match EditSession::new(graph, emb) {
        Ok(e) => e,
        Err(e) => return edit_error(e),
    };
    let roof = roof_json(editor.graph(), editor.embedding());
    state.editor = Some(editor);
    state.dual = dual;
    state.dirty = true;
    Response::json(200, json!({ "mode": mode, "roof": roof }))
}

fn optimize(state: &mut SessionState, body: &str) -> Response {
    let parsed: SolveSpecJson = if body.trim().is_empty() {
        SolveSpecJson::default()
    } else {
        match serde_json::from_str(body) {
            Ok(s) => s,
            Err(e) => return io_error(e.into()),
        }
    };
    let mut spec = match parsed.to_spec() {
        Ok(s) => s,
        Err(e) => return solve_error(e),
    };
    if parsed.mode.is_none() && state.dual.is_some() {
        spec.mode = SolveMode::Dual;
    }
    spec.time_limit = Some(spec.time_limit.map_or(SOLVE_CAP, |t| t.min(SOLVE_CAP)));
    let Some(editor) = state.editor.as_mut() else {
        return Response::error(409, "NoGraph", "no graph uploaded yet");
    };
    let outcome = match (spec.mode, &state.dual) {
        (SolveMode::Dual, Some(dual)) => solver::optimize_dual(dual, &spec),
        _ => {
            let xy = editor.embedding().project_xy();
            solver::optimize_graph(editor.graph(), &xy, &spec)
        }
    };
    let result = match outcome {
        Ok(r) => r,
        Err(SolveError::NotConverged(r)) => *r,
        Err(e) => return solve_error(e),
    };
    if let Err(e) = editor.replace(result.graph.clone(), result.embedding.clone()) {
        return edit_error(e);
    }
    editor.spec = spec;
    state.dirty = false;
    Response::json(200, io::solve_result_json(&result))
}

fn edit(state: &mut SessionState, body: &str) -> Response {
    let op = match serde_json::from_str::<EditOpJson>(body)
        .map_err(IoError::from)
        .and_then(|j| j.to_op())
    {
        Ok(op) => op,
        Err(e) => return io_error(e),
    };
    let Some(editor) = state.editor.as_mut() else {
        return Response::error(409, "NoGraph", "no graph uploaded yet");
    };
    match editor.apply(&op) {
        Ok(out) => {
            state.dirty = true;
            let region = out
                .region
                .map(|r| r.region.iter().map(|v| v + 1).collect::<Vec<_>>());
            let roof = roof_json(editor.graph(), editor.embedding());
            Response::json(
                200,
                json!({ "roof": roof, "region": region, "planarity": out.planarity, "converged": out.converged }),
            )
        }
        Err(e) => edit_error(e),
    }
}

fn undo(state: &mut SessionState) -> Response {
    let Some(editor) = state.editor.as_mut() else {
        return Response::error(409, "NoGraph", "no graph uploaded yet");
    };
    match editor.undo() {
        Ok(()) => Response::json(
            200,
            json!({ "roof": roof_json(editor.graph(), editor.embedding()) }),
        ),
        Err(e) => edit_error(e),
    }
}

fn resolve(body: &str) -> Response {
    let req: ResolveRequest = match serde_json::from_str(body) {
        Ok(r) => r,
        Err(e) => return io_error(e.into()),
    };
    let (outline, prob) = match req.dual.into_document() {
        Ok(DualDocument::Probabilistic { outline, prob, .. }) => (outline, prob),
        Ok(DualDocument::Binary(d)) => {
            let n = d.n_outline();
            let prob = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| if d.is_adjacent(i, j) { 1.0 } else { 0.0 })
                        .collect()
                })
                .collect();
            (d.outline().to_vec(), prob)
        }
        Err(e) => return io_error(e),
    };
    let threshold = req.threshold.unwrap_or(adjacency::DEFAULT_THRESHOLD);
    let result = match req.strategy.as_deref().unwrap_or("greedy") {
        "greedy" => adjacency::resolve_greedy(&outline, &prob, threshold).map(|c| (vec![c], false)),
        "sampling" => {
            adjacency::resolve_sampling(&outline, &prob, threshold, req.max.unwrap_or(16))
                .map(|s| (s.candidates, s.truncated))
        }
        other => return Response::error(422, "InvalidInput", format!("unknown strategy {other}")),
    };
    match result {
        Ok((cands, truncated)) => Response::json(
            200,
            json!({
                "candidates": cands.iter().map(|c| candidate_json(&outline, c)).collect::<Vec<_>>(),
                "truncated": truncated,
            }),
        ),
        Err(e) => Response::error(422, e.name(), &e),
    }
}

async fn dispatch(
    axum::extract::State(service): axum::extract::State<Arc<Service>>,
    method: axum::http::Method,
    uri: axum::http::Uri,
    body: String,
) -> axum::response::Response {
    use axum::response::IntoResponse;
    let path = uri.path().to_string();
    let r = tokio::task::spawn_blocking(move || service.handle(method.as_str(), &path, &body))
        .await
        .unwrap_or_else(|e| Response::error(500, "Internal", e));
    let status = axum::http::StatusCode::from_u16(r.status)
        .unwrap_or(axum::http::StatusCode::INTERNAL_SERVER_ERROR);
    (
        status,
        [(axum::http::header::CONTENT_TYPE, r.content_type)],
        r.body,
    )
        .into_response()
}

pub fn router(service: Arc<Service>) -> axum::Router {
    axum::Router::new().fallback(dispatch).with_state(service)
}

/// Serves until the process is stopped.
pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(Service::new()))).await
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn busy_session_answers_conflict() {
        let svc = Service::new();
        let id = svc.handle("POST", "/sessions", "").json_body()["id"]
            .as_str()
            .unwrap()
            .to_string();
        let session = svc.sessions.read().unwrap().get(&id).cloned().unwrap();
        let _held = session.state.lock().unwrap();
        let r = svc.handle("POST", &format!("/sessions/{id}/undo"), "");
        assert_eq!(r.status, 409);
        assert_eq!(r.json_body()["error"], "Conflict");
        // reads do not wait for the mutation lock
        assert_eq!(
            svc.handle("GET", &format!("/sessions/{id}/graph"), "")
                .json_body()["error"],
            "NoGraph"
        );
    }
}
