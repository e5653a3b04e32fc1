//! Places the roof vertices recovered from a dual graph at the harmonic
//! (mean-of-neighbours) positions inside the fixed outline.

use roofforge::dual::primal_from_dual;
use roofforge::fixtures;
use roofforge::solver::dual_initialization;
use roofforge::spectral::harmonic_residual;

fn main() {
    for f in [fixtures::hip(), fixtures::t_shape(), fixtures::zigzag()] {
        let dual = f.dual();
        let graph = primal_from_dual(&dual).unwrap();
        let e = dual_initialization(&graph, &dual).unwrap();
        println!("{}:", f.name);
        for v in graph.roof_vertices() {
            println!("  vertex {v}: ({:.4}, {:.4})", e.get(v).x, e.get(v).y);
        }
        println!("  harmonic residual {:.1e}", harmonic_residual(&graph, &e));
    }
}
