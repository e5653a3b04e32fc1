use nalgebra::{Matrix2, Vector2};
use roofforge::energy::{roof_planarity_value, MetricKind};
use roofforge::fixtures::{self, Fixture};
use roofforge::geom::{self, Vec2};
use roofforge::graph::{Embedding2, HeightGroup, RoofGraph, VertexRecord};
use roofforge::lift::lift_2d_to_3d;
use roofforge::preprocess::{direction_clusters, preprocess_outline};
use roofforge::solver::{
    default_height, dual_initialization, normalized_planarity, optimize_dual, optimize_primal,
    optimize_variable_heights, SolveError, SolveResult, SolveSpec,
};
use roofforge::spectral::{harmonic_residual, spectral_embed_2d};
use roofforge::validity::check_validity_2d;

fn assert_outline_untouched(f: &Fixture, r: &SolveResult) {
    for &v in f.graph.outline() {
        assert_eq!(
            r.embedding.get(v),
            f.embedding.get(v),
            "{} outline vertex {v} moved",
            f.name
        );
    }
}

fn assert_monotone(r: &SolveResult) {
    for w in r.energy_trace.windows(2) {
        assert!(w[1].total <= w[0].total + 1e-14, "trace increases: {:?}", w);
    }
}

#[test]
fn dual_corpus_reaches_planarity() {
    let spec = SolveSpec::default();
    for f in fixtures::dual_corpus() {
        let r = optimize_dual(&f.dual(), &spec).unwrap_or_else(|e| panic!("{}: {e}", f.name));
        println!(
            "{:18} err {:.3e} iters {:4} conv {} t {:?}",
            f.name, r.planarity, r.iterations, r.converged, r.wall_time
        );
        assert!(r.planarity < 1e-9, "{}", f.name);
        assert!(r.converged, "{}", f.name);
        assert_outline_untouched(&f, &r);
        assert_monotone(&r);
        let fv = r.fixed_vertex.unwrap();
        assert_eq!(
            r.embedding.get(fv).z,
            default_height(&f.outline()),
            "{}",
            f.name
        );
        // reported planarity is recomputed from the returned embedding
        assert_eq!(
            r.planarity,
            normalized_planarity(&r.graph, &r.embedding).unwrap()
        );
    }
}

#[test]
fn hip_primal_from_exact_sketch() {
    let f = fixtures::hip();
    let spec = SolveSpec {
        lambda: 0.1,
        ..SolveSpec::default()
    };
    let r = optimize_primal(&f.graph, &f.xy(), &spec).unwrap();
    assert!(r.converged);
    assert!(r.planarity < 1e-9);
    for v in f.graph.roof_vertices() {
        let (got, want) = (r.embedding.get(v), f.embedding.get(v));
        assert!(
            (got.x - want.x).abs() < 1e-6 && (got.y - want.y).abs() < 1e-6,
            "vertex {v}"
        );
    }
    let fv = r.fixed_vertex.unwrap();
    assert_eq!(r.embedding.get(fv).z, default_height(&f.outline()));
    assert_outline_untouched(&f, &r);
    assert_monotone(&r);
    assert!(r.energy_trace.last().unwrap().planarity < 1e-9);
}

#[test]
fn explicit_height_and_fixed_vertex_are_exact() {
    let f = fixtures::l_shape();
    let fv = *f.graph.roof_vertices().last().unwrap();
    let spec = SolveSpec {
        h: Some(1.7),
        fixed_vertex: Some(fv),
        ..SolveSpec::default()
    };
    let r = optimize_primal(&f.graph, &f.xy(), &spec).unwrap();
    assert_eq!(r.fixed_vertex, Some(fv));
    assert_eq!(r.embedding.get(fv).z, 1.7);
    assert!(r.planarity < 1e-9);
}

#[test]
fn perturbed_sketch_is_repaired() {
    let f = fixtures::hip();
    let mut xy = f.xy();
    xy.set(5, xy.get(5) + Vec2::new(0.2, 0.35));
    let r = optimize_primal(&f.graph, &xy, &SolveSpec::default()).unwrap();
    assert!(r.planarity < 1e-9, "{:e}", r.planarity);
    assert!(check_validity_2d(&f.graph, &r.embedding.project_xy(), 1e-6)
        .unwrap()
        .is_valid());
    assert_monotone(&r);
}

#[test]
fn hip_dual_ridge_on_midline() {
    let f = fixtures::hip();
    let r = optimize_dual(&f.dual(), &SolveSpec::default()).unwrap();
    assert!(r.planarity < 1e-9);
    for v in r.graph.roof_vertices() {
        assert!(
            (r.embedding.get(v).y - 2.0).abs() < 1e-4,
            "ridge vertex {v} at {}",
            r.embedding.get(v)
        );
    }
}

#[test]
fn square_dual_gives_centred_apex() {
    let f = fixtures::pyramid();
    let r = optimize_dual(&f.dual(), &SolveSpec::default()).unwrap();
    assert!(r.planarity < 1e-9);
    let apex = r.graph.roof_vertices()[0];
    let p = r.embedding.get(apex);
    assert!((p.x - 2.0).abs() < 1e-4 && (p.y - 2.0).abs() < 1e-4, "{p}");
}

#[test]
fn solves_are_deterministic() {
    let f = fixtures::u_shape();
    let a = optimize_dual(&f.dual(), &SolveSpec::default()).unwrap();
    let b = optimize_dual(&f.dual(), &SolveSpec::default()).unwrap();
    assert_eq!(a.embedding, b.embedding);
    assert_eq!(a.energy_trace, b.energy_trace);
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn invalid_specs_are_rejected() {
    let f = fixtures::hip();
    let cases = [
        (
            SolveSpec {
                h: Some(-1.0),
                ..SolveSpec::default()
            },
            "h > 0",
        ),
        (
            SolveSpec {
                lambda: -0.1,
                ..SolveSpec::default()
            },
            "lambda >= 0",
        ),
        (
            SolveSpec {
                max_iters: 0,
                ..SolveSpec::default()
            },
            "max_iters >= 1",
        ),
        (
            SolveSpec {
                fixed_vertex: Some(0),
                ..SolveSpec::default()
            },
            "fixed_vertex is a roof vertex",
        ),
    ];
    for (spec, want) in cases {
        match optimize_primal(&f.graph, &f.xy(), &spec) {
            Err(SolveError::InvalidSpec { invariant }) => assert_eq!(invariant, want),
            other => panic!("{want}: {other:?}"),
        }
    }
}

#[test]
fn iteration_cap_reports_not_converged() {
    let f = fixtures::l_shape();
    let spec = SolveSpec {
        max_iters: 1,
        polish: false,
        ..SolveSpec::default()
    };
    let r = optimize_dual(&f.dual(), &spec).unwrap();
    assert!(!r.converged);
    assert_eq!(r.iterations, 1);
}

fn group_variance(r: &SolveResult, vs: &[usize]) -> f64 {
    let z: Vec<f64> = vs.iter().map(|&v| r.embedding.get(v).z).collect();
    let m = z.iter().sum::<f64>() / z.len() as f64;
    z.iter().map(|x| (x - m).powi(2)).sum::<f64>() / z.len() as f64
}

#[test]
fn pavilion_variance_shrinks_with_eta() {
    let (g, xy) = fixtures::pavilion();
    let with = optimize_variable_heights(
        &g,
        &xy,
        &SolveSpec {
            eta: 1.0,
            ..SolveSpec::default()
        },
    )
    .unwrap();
    let without = optimize_variable_heights(
        &g,
        &xy,
        &SolveSpec {
            eta: 0.0,
            ..SolveSpec::default()
        },
    )
    .unwrap();
    assert!(with.planarity < 1e-9 && without.planarity < 1e-9);
    let eaves = [1, 3, 5];
    let (v1, v0) = (
        group_variance(&with, &eaves),
        group_variance(&without, &eaves),
    );
    println!("variance eta=1 {v1:.3e} eta=0 {v0:.3e}");
    assert!(v1 < v0);
    for v in [0, 2, 4] {
        assert_eq!(with.embedding.get(v), xy.get(v).push(0.0));
    }
    for v in eaves {
        let p = with.embedding.get(v);
        assert_eq!(
            (p.x, p.y),
            (xy.get(v).x, xy.get(v).y),
            "grouped vertex moved in xy"
        );
    }
}

#[test]
fn symmetric_group_ends_level() {
    let (g, xy) = fixtures::two_group();
    let r = optimize_variable_heights(&g, &xy, &SolveSpec::default()).unwrap();
    assert!(r.planarity < 1e-9);
    let (a, b) = (r.embedding.get(2).z, r.embedding.get(5).z);
    assert!((a - b).abs() < 1e-6, "{a} vs {b}");
}

fn relabel(graph: &RoofGraph, group: Option<HeightGroup>) -> RoofGraph {
    let vertices: Vec<VertexRecord> = graph
        .vertices()
        .iter()
        .enumerate()
        .map(|(v, r)| {
            if graph.is_outline(v) {
                VertexRecord {
                    height_group: group.clone(),
                    ..r.clone()
                }
            } else {
                r.clone()
            }
        })
        .collect();
    RoofGraph::new(vertices, graph.faces().to_vec()).unwrap()
}

#[test]
fn all_fixed_zero_matches_primal() {
    let f = fixtures::hip();
    let mut xy = f.xy();
    xy.set(4, xy.get(4) + Vec2::new(0.1, -0.2));
    let g = relabel(&f.graph, Some(HeightGroup::FixedZero));
    let a = optimize_variable_heights(&g, &xy, &SolveSpec::default()).unwrap();
    let b = optimize_primal(&f.graph, &xy, &SolveSpec::default()).unwrap();
    assert_eq!(a.embedding, b.embedding);
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn variable_heights_need_an_anchor() {
    let (g, xy) = fixtures::pavilion();
    let free = relabel(&g, Some(HeightGroup::Free));
    assert_eq!(
        optimize_variable_heights(&free, &xy, &SolveSpec::default()).unwrap_err(),
        SolveError::AllHeightsFree
    );
}

#[test]
fn lift_hip_to_unit_ridge() {
    let f = fixtures::hip();
    let e = lift_2d_to_3d(&f.graph, &f.xy(), 1.0, None).unwrap();
    // the fixture ridge is at z = 2, so the lift is the fixture scaled by 1/2 in z
    for v in 0..f.graph.n_vertices() {
        let want = f.embedding.get(v).z / 2.0;
        assert!((e.get(v).z - want).abs() < 1e-12, "vertex {v}");
    }
    assert!(e.get(4).z == 1.0 || e.get(5).z == 1.0);
    assert!(roof_planarity_value(&f.graph, &e, MetricKind::SmallestEig).unwrap() < 1e-10);
}

#[test]
fn lift_flat_and_pyramid() {
    let f = fixtures::hip();
    let flat = lift_2d_to_3d(&f.graph, &f.xy(), 0.0, None).unwrap();
    assert!(flat.coords().iter().all(|p| p.z.abs() < 1e-15));
    assert_eq!(
        roof_planarity_value(&f.graph, &flat, MetricKind::SmallestEig).unwrap(),
        0.0
    );
    let p = fixtures::pyramid();
    let e = lift_2d_to_3d(&p.graph, &p.xy(), 2.0, None).unwrap();
    assert_eq!(e.get(4).z, 2.0);
    assert!(roof_planarity_value(&p.graph, &e, MetricKind::SmallestEig).unwrap() < 1e-10);
}

#[test]
fn lift_refuses_invalid_embedding() {
    let f = fixtures::hip();
    let mut xy = f.xy();
    xy.set(5, xy.get(5) + Vec2::new(0.0, 0.5));
    assert!(matches!(
        lift_2d_to_3d(&f.graph, &xy, 1.0, None),
        Err(SolveError::InvalidInput2D { .. })
    ));
}

fn outline2d(f: &Fixture) -> Embedding2 {
    let mut coords = f.outline();
    coords.resize(f.graph.n_vertices(), Vec2::zeros());
    Embedding2::new(coords).unwrap()
}

#[test]
fn spectral_unit_square() {
    let mut vertices = vec![VertexRecord::outline(); 4];
    vertices.push(VertexRecord::roof());
    let g = RoofGraph::new(vertices, (0..4).map(|i| vec![i, (i + 1) % 4, 4]).collect()).unwrap();
    let outline =
        Embedding2::from_xy(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [9.0, 9.0]]).unwrap();
    let e = spectral_embed_2d(&g, &outline).unwrap();
    assert_eq!(e.get(4), Vec2::new(0.5, 0.5));
}

#[test]
fn spectral_hip_matches_dense_solve() {
    let f = fixtures::hip();
    let e = spectral_embed_2d(&f.graph, &outline2d(&f)).unwrap();
    let p: Vec<Vec2> = f.outline();
    // 3 x4 - x5 = p0 + p3, -x4 + 3 x5 = p1 + p2
    let a = Matrix2::new(3.0, -1.0, -1.0, 3.0);
    let lu = a.lu();
    for k in 0..2 {
        let b = Vector2::new(p[0][k] + p[3][k], p[1][k] + p[2][k]);
        let x = lu.solve(&b).unwrap();
        assert!((e.get(4)[k] - x[0]).abs() < 1e-12);
        assert!((e.get(5)[k] - x[1]).abs() < 1e-12);
    }
}

fn inside(poly: &[Vec2], q: Vec2) -> bool {
    let mut wn = 0i32;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let side = geom::cross2(&(b - a), &(q - a));
        if a.y <= q.y && b.y > q.y && side > 0.0 {
            wn += 1;
        } else if a.y > q.y && b.y <= q.y && side < 0.0 {
            wn -= 1;
        }
    }
    wn != 0
}

#[test]
fn spectral_corpus_is_harmonic_and_inside() {
    for f in fixtures::dual_corpus() {
        let d = f.dual();
        let g = roofforge::dual::primal_from_dual(&d).unwrap();
        let e = dual_initialization(&g, &d).unwrap();
        let scale = geom::bbox_diagonal(d.outline().iter().copied());
        assert!(harmonic_residual(&g, &e) < 1e-10 * scale, "{}", f.name);
        let outline = d.outline();
        for v in g.roof_vertices() {
            assert!(
                inside(outline, e.get(v)),
                "{}: vertex {v} outside the outline",
                f.name
            );
        }
        for (edge, _) in g.roof_edges() {
            let (a, b) = (e.get(edge.0), e.get(edge.1));
            for i in 0..outline.len() {
                let (c, dd) = (outline[i], outline[(i + 1) % outline.len()]);
                assert!(
                    !geom::segments_cross(&a, &b, &c, &dd),
                    "{}: edge {edge:?} crosses the outline",
                    f.name
                );
            }
        }
    }
}

fn parallel_residual(a: Vec2, b: Vec2) -> f64 {
    geom::cross2(&a.normalize(), &b.normalize()).abs()
}

#[test]
fn preprocess_rectangles() {
    let rect: Vec<Vec2> = [[0.0, 0.0], [10.0, 0.0], [10.0, 5.0], [0.0, 5.0]]
        .map(|p| Vec2::new(p[0], p[1]))
        .to_vec();
    let r = preprocess_outline(&rect, 3.0).unwrap();
    assert_eq!(r.points, rect);
    assert_eq!(r.max_displacement, 0.0);

    let mut tilted = rect.clone();
    tilted[3].y += 10.0 * 1f64.to_radians().tan();
    let r = preprocess_outline(&tilted, 3.0).unwrap();
    let p = &r.points;
    assert!(parallel_residual(p[1] - p[0], p[3] - p[2]) < 1e-10);
    assert!(parallel_residual(p[2] - p[1], p[0] - p[3]) < 1e-10);
    assert!(r.max_displacement > 0.0 && r.max_displacement < 0.2);
    assert!(geom::is_simple_polygon(p));
}

#[test]
fn preprocess_l_shape_two_clusters() {
    let base = [
        [0.0, 0.0],
        [8.0, 0.0],
        [8.0, 4.0],
        [4.0, 4.0],
        [4.0, 8.0],
        [0.0, 8.0],
    ];
    let jitter = [0.5, -0.5, 0.3, -0.4, 0.5, -0.2];
    // rotate each vertex about the centre by a small angle so every edge is off by a fraction of a degree
    let pts: Vec<Vec2> = base
        .iter()
        .zip(jitter)
        .map(|(p, j)| {
            let t = (j * 0.5f64).to_radians();
            let (x, y) = (p[0] - 4.0, p[1] - 4.0);
            Vec2::new(
                4.0 + x * t.cos() - y * t.sin(),
                4.0 + x * t.sin() + y * t.cos(),
            )
        })
        .collect();
    // oracle: even edges are near-horizontal, odd edges near-vertical
    let clusters = direction_clusters(&pts, 3f64.to_radians());
    assert_eq!(clusters, vec![vec![0, 2, 4], vec![1, 3, 5]]);
    let r = preprocess_outline(&pts, 3.0).unwrap();
    let edge = |i: usize| r.points[(i + 1) % 6] - r.points[i];
    for c in &clusters {
        for &i in &c[1..] {
            assert!(
                parallel_residual(edge(c[0]), edge(i)) < 1e-10,
                "edges {} and {i}",
                c[0]
            );
        }
    }
    assert_eq!(direction_clusters(&r.points, 1e-9).len(), 2);
}

#[test]
fn converged_solves_project_and_lift_back() {
    for f in fixtures::dual_corpus() {
        let r = optimize_dual(&f.dual(), &SolveSpec::default()).unwrap();
        let xy = r.embedding.project_xy();
        let report = check_validity_2d(&r.graph, &xy, 1e-6).unwrap();
        assert!(
            report.is_valid(),
            "{}: residual {:e}",
            f.name,
            report.overall
        );
        let fv = r.fixed_vertex.unwrap();
        let lifted = lift_2d_to_3d(&r.graph, &xy, r.embedding.get(fv).z, Some(fv)).unwrap();
        assert_eq!(lifted.project_xy(), xy);
        let p = normalized_planarity(&r.graph, &lifted).unwrap();
        assert!(p < 1e-10, "{}: {p:e}", f.name);
        let dz = lifted
            .coords()
            .iter()
            .zip(r.embedding.coords())
            .map(|(a, b)| (a.z - b.z).abs())
            .fold(0.0, f64::max);
        assert!(dz < 1e-4, "{}: lifted heights differ by {dz:e}", f.name);
    }
}

#[test]
fn planarity_metric_choice_is_respected() {
    let f = fixtures::hip();
    for kind in [MetricKind::Det, MetricKind::Proj, MetricKind::Diag] {
        let spec = SolveSpec {
            planarity_kind: kind,
            ..SolveSpec::default()
        };
        let r = optimize_dual(&f.dual(), &spec).unwrap();
        assert!(r.planarity < 1e-9, "{}: {:e}", kind.name(), r.planarity);
    }
}
