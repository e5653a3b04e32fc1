//! Builds a roof from its dual graph (face adjacency) and prints the OBJ.
//!
//!     cargo run --example reconstruct_dual [fixture-name]

use roofforge::fixtures;
use roofforge::io::{export_building, ExportOptions};
use roofforge::solver::{optimize_dual, SolveSpec};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "l-shape".into());
    let Some(f) = fixtures::dual_corpus().into_iter().find(|f| f.name == name) else {
        eprintln!("unknown fixture {name}; try one of:");
        for f in fixtures::dual_corpus() {
            eprintln!("  {}", f.name);
        }
        std::process::exit(2);
    };
    let r = optimize_dual(&f.dual(), &SolveSpec::default()).expect("solve");
    eprintln!(
        "{}: err {:.3e} after {} iterations ({:?})",
        f.name, r.planarity, r.iterations, r.wall_time
    );
    let mesh =
        export_building(&r.graph, &r.embedding, ExportOptions::default()).expect("planar roof");
    print!("{}", mesh.to_obj());
}
