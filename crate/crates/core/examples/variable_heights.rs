//! Pavilion roof whose alternate eave corners share a free height. Compares
//! the spread of those heights with and without the variance term.

use roofforge::fixtures;
use roofforge::solver::{optimize_variable_heights, SolveSpec};

fn main() {
    let (graph, sketch) = fixtures::pavilion();
    for eta in [0.0, 1.0] {
        let r = optimize_variable_heights(
            &graph,
            &sketch,
            &SolveSpec {
                eta,
                ..SolveSpec::default()
            },
        )
        .unwrap();
        let z: Vec<f64> = [1, 3, 5].iter().map(|&v| r.embedding.get(v).z).collect();
        println!("eta {eta}: err {:.2e}, eave heights {:.4?}", r.planarity, z);
    }
}
