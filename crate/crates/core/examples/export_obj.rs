//! Writes a closed building (roof, facades, base) as an OBJ file.
//!
//!     cargo run --example export_obj -- out.obj

use roofforge::fixtures;
use roofforge::io::{export_building, ExportOptions};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "u-shape.obj".into());
    let f = fixtures::u_shape();
    let mesh = export_building(&f.graph, &f.embedding, ExportOptions::default()).unwrap();
    std::fs::write(&path, mesh.to_obj()).unwrap();
    println!(
        "{path}: {} vertices, {} roof, {} facade faces",
        mesh.vertices.len(),
        mesh.roof.len(),
        mesh.facade.len()
    );
}
