use roofforge::dual::{dual_from_primal, primal_from_dual};
use roofforge::energy::{roof_planarity_value, MetricKind};
use roofforge::fixtures;
use roofforge::geom::{self, Vec2};
use roofforge::graph::Edge;
use roofforge::validity::{check_validity_2d, classify_roof_edges, EdgeClass};

#[test]
fn corpus_fixtures_are_planar_and_valid() {
    for f in fixtures::dual_corpus() {
        let p = roof_planarity_value(&f.graph, &f.embedding, MetricKind::SmallestEig).unwrap();
        assert!(p < 1e-12, "{}: planarity {p}", f.name);
        let report = check_validity_2d(&f.graph, &f.xy(), 1e-9).unwrap();
        assert!(
            report.is_valid(),
            "{}: {:?}",
            f.name,
            report.violated().collect::<Vec<_>>()
        );
        for face in f.graph.faces() {
            let pts: Vec<Vec2> = face.iter().map(|&v| f.xy().get(v)).collect();
            assert!(geom::is_simple_polygon(&pts), "{}: face {face:?}", f.name);
            assert!(geom::signed_area(&pts) > 0.0, "{}: face {face:?}", f.name);
        }
        assert!(
            f.graph
                .roof_vertices()
                .iter()
                .all(|&v| f.embedding.get(v).z > 0.0),
            "{}",
            f.name
        );
    }
}

#[test]
fn dual_round_trip_on_corpus() {
    for f in fixtures::dual_corpus() {
        let d = f.dual();
        let g = primal_from_dual(&d).unwrap_or_else(|e| panic!("{}: {e}", f.name));
        assert_eq!(g.n_faces(), f.graph.n_faces(), "{}", f.name);
        assert_eq!(g.n_vertices(), f.graph.n_vertices(), "{}", f.name);
        // Any coordinates for roof vertices will do: only the outline is read.
        let mut coords = d.outline().to_vec();
        coords.resize(g.n_vertices(), Vec2::zeros());
        let emb = roofforge::graph::Embedding2::new(coords).unwrap();
        let back = dual_from_primal(&g, &emb).unwrap();
        assert_eq!(back.adjacency(), d.adjacency(), "{}", f.name);
        assert_eq!(back.merge_map(), d.merge_map(), "{}", f.name);
    }
}

#[test]
fn hip_classification() {
    let f = fixtures::hip();
    let c = classify_roof_edges(&f.graph, &f.xy());
    assert_eq!(c[&Edge(4, 5)], EdgeClass::Ridge);
    assert_eq!(c.values().filter(|&&k| k == EdgeClass::Bisector).count(), 4);
}
