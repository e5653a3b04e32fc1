//! Primal roof graph to dual adjacency and back, including a face that
//! spans two outline edges.

use roofforge::dual::{dual_from_primal, primal_from_dual};
use roofforge::fixtures;

fn main() {
    for f in [fixtures::hip(), fixtures::t_merged()] {
        let d = dual_from_primal(&f.graph, &f.xy()).unwrap();
        println!("{}: merge map {:?}", f.name, d.merge_map());
        for row in d.adjacency() {
            println!(
                "  {}",
                row.iter()
                    .map(|&a| if a { '1' } else { '.' })
                    .collect::<String>()
            );
        }
        let g = primal_from_dual(&d).unwrap();
        println!(
            "  recovered {} faces, {} vertices",
            g.n_faces(),
            g.n_vertices()
        );
    }
}
