//! Writes every built-in roof as roof and dual JSON files.
//!
//!     cargo run --example dump_fixtures -- fixtures/

use std::path::PathBuf;

use roofforge::fixtures;
use roofforge::io::{self, DualDocument, RoofDocument};

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir).unwrap();
    for f in fixtures::dual_corpus()
        .into_iter()
        .chain([fixtures::three_ridge()])
    {
        io::save_roof(
            &dir.join(format!("{}.roof.json", f.name)),
            &RoofDocument::from_3d(f.graph.clone(), &f.embedding),
        )
        .unwrap();
        io::save_dual(
            &dir.join(format!("{}.dual.json", f.name)),
            &DualDocument::Binary(f.dual()),
        )
        .unwrap();
    }
    for (name, (graph, xy)) in [
        ("pavilion", fixtures::pavilion()),
        ("two-group", fixtures::two_group()),
    ] {
        io::save_roof(
            &dir.join(format!("{name}.plan.json")),
            &RoofDocument {
                graph,
                xy,
                z: None,
                image: None,
            },
        )
        .unwrap();
    }
    for (name, (outline, prob)) in [
        ("type01", fixtures::type01_square()),
        ("type02", fixtures::type02_l()),
        ("two-conflict", fixtures::two_conflict()),
    ] {
        let doc = DualDocument::Probabilistic {
            outline,
            prob,
            merge_map: None,
        };
        io::save_dual(&dir.join(format!("{name}.prob.json")), &doc).unwrap();
    }
    println!("wrote fixtures to {}", dir.display());
}
