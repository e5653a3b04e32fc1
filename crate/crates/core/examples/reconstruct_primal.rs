//! Repairs a hand-drawn plan view: the ridge end is off by a few tenths, the
//! solver pulls it back onto a liftable position and assigns heights.

use roofforge::fixtures;
use roofforge::geom::Vec2;
use roofforge::solver::{optimize_primal, SolveSpec};
use roofforge::validity::check_validity_2d;

fn main() {
    let f = fixtures::hip();
    let mut sketch = f.xy();
    sketch.set(5, sketch.get(5) + Vec2::new(0.3, 0.4));
    let before = check_validity_2d(&f.graph, &sketch, 1e-9).unwrap();
    println!(
        "sketch valid: {} (residual {:.3e})",
        before.is_valid(),
        before.overall
    );

    let spec = SolveSpec {
        h: Some(2.0),
        ..SolveSpec::default()
    };
    let r = optimize_primal(&f.graph, &sketch, &spec).unwrap();
    println!(
        "err {:.3e}, {} iterations, converged {}",
        r.planarity, r.iterations, r.converged
    );
    for v in f.graph.roof_vertices() {
        let (s, p) = (sketch.get(v), r.embedding.get(v));
        println!(
            "vertex {v}: sketch ({:.3}, {:.3}) -> ({:.4}, {:.4}, {:.4})",
            s.x, s.y, p.x, p.y, p.z
        );
    }
}
