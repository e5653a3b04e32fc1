//! Drives the HTTP service handlers in-process: upload a dual graph,
//! optimize, fetch the mesh. `roofforge serve` exposes the same routes.

use roofforge::fixtures;
use roofforge::io::{self, DualDocument};
use roofforge::service::Service;

fn main() {
    let svc = Service::new();
    let id = svc.handle("POST", "/sessions", "").json_body()["id"]
        .as_str()
        .unwrap()
        .to_string();
    let dual = io::dual_to_json(&DualDocument::Binary(fixtures::hip().dual()));
    let up = svc.handle("PUT", &format!("/sessions/{id}/graph"), &dual);
    println!("PUT graph -> {}", up.status);
    let opt = svc.handle("POST", &format!("/sessions/{id}/optimize"), "{}");
    let body = opt.json_body();
    println!(
        "POST optimize -> {} (err {}, converged {})",
        opt.status, body["planarity"], body["converged"]
    );
    let mesh = svc.handle("GET", &format!("/sessions/{id}/mesh.obj"), "");
    println!(
        "GET mesh.obj -> {}, {} faces",
        mesh.status,
        mesh.body.lines().filter(|l| l.starts_with("f ")).count()
    );
}
