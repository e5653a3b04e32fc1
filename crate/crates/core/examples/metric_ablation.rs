//! Runs the same dual solve with each planarity metric.

use roofforge::energy::MetricKind;
use roofforge::fixtures;
use roofforge::solver::{optimize_dual, SolveSpec};

fn main() {
    let f = fixtures::u_shape();
    for kind in [
        MetricKind::SmallestEig,
        MetricKind::Det,
        MetricKind::Proj,
        MetricKind::Diag,
    ] {
        let r = optimize_dual(
            &f.dual(),
            &SolveSpec {
                planarity_kind: kind,
                ..SolveSpec::default()
            },
        )
        .unwrap();
        println!(
            "{:13} iterations {:4}  err {:.2e}  {:?}",
            kind.name(),
            r.iterations,
            r.planarity,
            r.wall_time
        );
    }
}
