//! Turns a predicted face-adjacency probability matrix into consistent dual
//! graphs, greedily and by enumerating the conflict choices.

use roofforge::adjacency::{resolve_greedy, resolve_sampling, DEFAULT_THRESHOLD};
use roofforge::fixtures;
use roofforge::solver::{optimize_dual, SolveSpec};

fn main() {
    let (outline, prob) = fixtures::two_conflict();
    let greedy = resolve_greedy(&outline, &prob, DEFAULT_THRESHOLD).unwrap();
    println!("greedy: {:?}", greedy.provenance);
    let s = resolve_sampling(&outline, &prob, DEFAULT_THRESHOLD, 16).unwrap();
    for (k, c) in s.candidates.iter().enumerate() {
        let r = optimize_dual(&c.to_dual(&outline).unwrap(), &SolveSpec::default()).unwrap();
        println!(
            "candidate {k}: score {:.3}, {} faces, err {:.1e}",
            c.score,
            r.graph.n_faces(),
            r.planarity
        );
    }
}
