//! Snaps nearly parallel outline edges to exactly parallel ones.

use roofforge::geom::Vec2;
use roofforge::preprocess::preprocess_outline;

fn main() {
    let traced = [
        [0.0, 0.0],
        [10.0, 0.05],
        [10.1, 5.0],
        [0.0, 5.2],
        [0.05, 2.5],
    ];
    let outline: Vec<Vec2> = traced.iter().map(|p| Vec2::new(p[0], p[1])).collect();
    let r = preprocess_outline(&outline, 3.0).unwrap();
    println!(
        "clusters {:?}, max displacement {:.4}",
        r.clusters, r.max_displacement
    );
    for (a, b) in outline.iter().zip(&r.points) {
        println!("({:.3}, {:.3}) -> ({:.6}, {:.6})", a.x, a.y, b.x, b.y);
    }
}
