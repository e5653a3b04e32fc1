//! Moves a ridge vertex, re-solves only the affected region, then undoes.

use roofforge::editing::{EditOp, EditSession};
use roofforge::fixtures::{self, three_ridge_ids};
use roofforge::geom::Vec3;

fn main() {
    let f = fixtures::three_ridge();
    let mut session = EditSession::new(f.graph.clone(), f.embedding.clone()).unwrap();
    let op = EditOp::MoveVertex {
        vertex: three_ridge_ids::X,
        delta: Vec3::new(0.0, 0.5, 0.0),
    };
    let out = session.apply(&op).unwrap();
    println!(
        "re-optimized region {:?}, err {:.2e}",
        out.region.map(|r| r.region),
        out.planarity
    );
    for v in f.graph.roof_vertices() {
        println!(
            "  vertex {v}: {:?} -> {:?}",
            f.embedding.get(v).as_slice(),
            session.embedding().get(v).as_slice()
        );
    }

    session
        .apply(&EditOp::SnapEdge {
            edge: (three_ridge_ids::X, three_ridge_ids::Y1),
        })
        .unwrap();
    println!(
        "after snap: {} vertices, {} faces",
        session.graph().n_vertices(),
        session.graph().n_faces()
    );
    session.undo().unwrap();
    session.undo().unwrap();
    println!(
        "undone to original: {}",
        session.embedding() == &f.embedding
    );
}
