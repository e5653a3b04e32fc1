//! Lifts a valid plan view to 3D by solving the face plane equations.

use roofforge::energy::{roof_planarity_value, MetricKind};
use roofforge::fixtures;
use roofforge::lift::lift_2d_to_3d;

fn main() {
    let f = fixtures::l_shape();
    for h in [1.0, 2.5] {
        let e = lift_2d_to_3d(&f.graph, &f.xy(), h, None).unwrap();
        let p = roof_planarity_value(&f.graph, &e, MetricKind::SmallestEig).unwrap();
        let z: Vec<String> = f
            .graph
            .roof_vertices()
            .iter()
            .map(|&v| format!("{:.3}", e.get(v).z))
            .collect();
        println!(
            "h = {h}: roof heights [{}], planarity {p:.1e}",
            z.join(", ")
        );
    }
}
