//! Checks whether a plan view can be lifted to a planar roof, edge by edge.

use roofforge::fixtures;
use roofforge::geom::Vec2;
use roofforge::validity::{check_validity_2d, classify_roof_edges};

fn main() {
    let f = fixtures::hip();
    let mut xy = f.xy();
    for (edge, class) in classify_roof_edges(&f.graph, &xy) {
        println!("edge {:?}: {}", (edge.0, edge.1), class.name());
    }
    for shift in [0.0, 0.25] {
        xy.set(5, f.xy().get(5) + Vec2::new(0.0, shift));
        let report = check_validity_2d(&f.graph, &xy, 1e-9).unwrap();
        println!(
            "ridge end shifted by {shift}: valid {} (residual {:.3e})",
            report.is_valid(),
            report.overall
        );
        for e in report.violated() {
            println!(
                "  violated {:?} between faces {:?}",
                (e.edge.0, e.edge.1),
                e.faces
            );
        }
    }
}
