use std::sync::Arc;

use roofforge::fixtures;
use roofforge::io::{self, DualDocument, RoofDocument};
use roofforge::service::{router, Service};
use serde_json::{json, Value};
use tokio::io::{AsyncReadExt, AsyncWriteExt};

fn session(svc: &Service) -> String {
    let r = svc.handle("POST", "/sessions", "");
    assert_eq!(r.status, 201);
    r.json_body()["id"].as_str().unwrap().to_string()
}

fn hip_dual_json() -> String {
    io::dual_to_json(&DualDocument::Binary(fixtures::hip().dual()))
}

#[test]
fn dual_upload_optimize_and_export() {
    let svc = Service::new();
    let id = session(&svc);
    let r = svc.handle("PUT", &format!("/sessions/{id}/graph"), &hip_dual_json());
    assert_eq!(r.status, 200, "{}", r.body);
    let v = r.json_body();
    assert_eq!(v["mode"], "dual");
    assert_eq!(v["roof"]["vertices"].as_array().unwrap().len(), 6);

    let r = svc.handle("POST", &format!("/sessions/{id}/optimize"), "{}");
    assert_eq!(r.status, 200, "{}", r.body);
    let v = r.json_body();
    assert!(v["planarity"].as_f64().unwrap() < 1e-9);
    assert_eq!(v["converged"], true);

    let r = svc.handle("GET", &format!("/sessions/{id}/mesh.obj"), "");
    assert_eq!(r.status, 200);
    assert_eq!(r.content_type, "text/plain");
    assert_eq!(r.body.lines().filter(|l| l.starts_with("f ")).count(), 9);
}

#[test]
fn edit_then_undo_restores_snapshot_bit_exact() {
    let svc = Service::new();
    let id = session(&svc);
    let f = fixtures::hip();
    let body = io::roof_to_json(&RoofDocument::from_3d(f.graph.clone(), &f.embedding));
    assert_eq!(
        svc.handle("PUT", &format!("/sessions/{id}/graph"), &body)
            .status,
        200
    );
    let before = svc
        .handle("GET", &format!("/sessions/{id}/graph"), "")
        .json_body()["roof"]
        .clone();

    let r = svc.handle(
        "POST",
        &format!("/sessions/{id}/edits"),
        r#"{"op":"move_vertex","vertex":5,"delta":[0,0.4,0]}"#,
    );
    assert_eq!(r.status, 200, "{}", r.body);
    let v = r.json_body();
    assert_eq!(v["region"], json!([6]));
    assert!(v["planarity"].as_f64().unwrap() < 1e-9);
    assert_ne!(v["roof"], before);

    let r = svc.handle("POST", &format!("/sessions/{id}/undo"), "");
    assert_eq!(r.status, 200);
    assert_eq!(r.json_body()["roof"], before);
    let back = svc
        .handle("GET", &format!("/sessions/{id}/graph"), "")
        .json_body();
    let doc = io::parse_roof(&back["roof"].to_string()).unwrap();
    assert_eq!(doc.embedding3().unwrap(), f.embedding);

    let r = svc.handle("POST", &format!("/sessions/{id}/undo"), "");
    assert_eq!(
        (r.status, r.json_body()["error"].clone()),
        (422, json!("NothingToUndo"))
    );
}

#[test]
fn malformed_spec_names_invariant() {
    let svc = Service::new();
    let id = session(&svc);
    svc.handle("PUT", &format!("/sessions/{id}/graph"), &hip_dual_json());
    let r = svc.handle(
        "POST",
        &format!("/sessions/{id}/optimize"),
        r#"{"h": -1.0}"#,
    );
    assert_eq!(r.status, 422);
    let v = r.json_body();
    assert_eq!(v["error"], "InvalidSpec");
    assert_eq!(v["invariant"], "h > 0");
    let r = svc.handle(
        "POST",
        &format!("/sessions/{id}/optimize"),
        r#"{"height": 1.0}"#,
    );
    assert_eq!(r.status, 422);
}

#[test]
fn unknown_session_and_route() {
    let svc = Service::new();
    assert_eq!(svc.handle("POST", "/sessions/nope/undo", "").status, 404);
    assert_eq!(svc.handle("GET", "/elsewhere", "").status, 404);
    let id = session(&svc);
    assert_eq!(
        svc.handle("DELETE", &format!("/sessions/{id}/graph"), "")
            .status,
        404
    );
}

#[test]
fn schema_violation_in_upload() {
    let svc = Service::new();
    let id = session(&svc);
    let f = fixtures::hip();
    let mut file = RoofDocument::from_3d(f.graph, &f.embedding).to_file();
    file.faces[1][0] = 99;
    let r = svc.handle("PUT", &format!("/sessions/{id}/graph"), &io::to_json(&file));
    assert_eq!(r.status, 422);
    assert_eq!(r.json_body()["invariant"], "UnknownVertex");
}

#[test]
fn stateless_resolution() {
    let svc = Service::new();
    let (outline, prob) = fixtures::type01_square();
    let dual = io::DualDocument::Probabilistic {
        outline,
        prob,
        merge_map: None,
    }
    .to_file();
    let body = json!({ "dual": dual, "strategy": "sampling", "max": 8 }).to_string();
    let r = svc.handle("POST", "/resolve-adjacency", &body);
    assert_eq!(r.status, 200, "{}", r.body);
    let v = r.json_body();
    let c = v["candidates"].as_array().unwrap();
    assert_eq!(c.len(), 2);
    assert!(c[0]["score"].as_f64().unwrap() > c[1]["score"].as_f64().unwrap());
    assert_eq!(c[0]["provenance"][0]["kept"], json!([1, 3]));
}

#[test]
fn responses_are_deterministic() {
    let run = || {
        let svc = Service::new();
        let id = session(&svc);
        svc.handle("PUT", &format!("/sessions/{id}/graph"), &hip_dual_json());
        let mut r = svc
            .handle("POST", &format!("/sessions/{id}/optimize"), "{}")
            .json_body();
        r.as_object_mut().unwrap().remove("wall_time_s");
        (
            r,
            svc.handle("GET", &format!("/sessions/{id}/mesh.obj"), "")
                .body,
        )
    };
    assert_eq!(run(), run());
}

async fn http(addr: std::net::SocketAddr, method: &str, path: &str, body: &str) -> (u16, String) {
    let mut s = tokio::net::TcpStream::connect(addr).await.unwrap();
    let req = format!(
        "{method} {path} HTTP/1.1\r\nHost: localhost\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
    s.write_all(req.as_bytes()).await.unwrap();
    let mut buf = String::new();
    s.read_to_string(&mut buf).await.unwrap();
    let status = buf[9..12].parse().unwrap();
    let body = buf
        .split_once("\r\n\r\n")
        .map(|(_, b)| b.to_string())
        .unwrap_or_default();
    (status, body)
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn http_round_trip() {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move {
        axum::serve(listener, router(Arc::new(Service::new())))
            .await
            .unwrap()
    });
    let (status, body) = http(addr, "POST", "/sessions", "").await;
    assert_eq!(status, 201);
    let id: Value = serde_json::from_str(&body).unwrap();
    let id = id["id"].as_str().unwrap();
    let (status, _) = http(
        addr,
        "PUT",
        &format!("/sessions/{id}/graph"),
        &hip_dual_json(),
    )
    .await;
    assert_eq!(status, 200);
    let (status, body) = http(addr, "POST", &format!("/sessions/{id}/optimize"), "{}").await;
    assert_eq!(status, 200);
    let v: Value = serde_json::from_str(&body).unwrap();
    assert!(v["planarity"].as_f64().unwrap() < 1e-9);
    let (status, obj) = http(addr, "GET", &format!("/sessions/{id}/mesh.obj"), "").await;
    assert_eq!(status, 200);
    assert!(obj.contains("g roof"));
    assert_eq!(http(addr, "GET", "/sessions/zzz/mesh.obj", "").await.0, 404);
}
