use std::path::PathBuf;

use proptest::prelude::*;
use roofforge::fixtures;
use roofforge::geom::Vec3;
use roofforge::graph::Embedding3;
use roofforge::io::{
    self, export_building, parse_dual, parse_roof, roof_to_json, BuildingMesh, DualDocument,
    ExportOptions, IoError, RoofDocument,
};

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
}

/// Newell normal of a polygon; independent of any plane fit.
fn newell(pts: &[Vec3]) -> Vec3 {
    let mut n = Vec3::zeros();
    for i in 0..pts.len() {
        let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
        n += Vec3::new(
            (a.y - b.y) * (a.z + b.z),
            (a.z - b.z) * (a.x + b.x),
            (a.x - b.x) * (a.y + b.y),
        );
    }
    n
}

fn poly(mesh: &BuildingMesh, f: &[usize]) -> Vec<Vec3> {
    f.iter().map(|&v| mesh.vertices[v]).collect()
}

#[test]
fn pyramid_and_hip_group_sizes() {
    for (f, roof) in [(fixtures::pyramid(), 4), (fixtures::hip(), 4)] {
        let m = export_building(&f.graph, &f.embedding, ExportOptions::default()).unwrap();
        assert_eq!(
            (m.roof.len(), m.facade.len(), m.base.len()),
            (roof, 4, 1),
            "{}",
            f.name
        );
        assert!(m.facade.iter().all(|q| q.len() == 4));
        assert_eq!(m.base[0].len(), 4);
        if f.name == "pyramid" {
            assert!(m.roof.iter().all(|t| t.len() == 3));
        }
    }
}

#[test]
fn faces_wind_outward() {
    for f in fixtures::dual_corpus() {
        let m = export_building(&f.graph, &f.embedding, ExportOptions::default()).unwrap();
        for r in &m.roof {
            assert!(
                newell(&poly(&m, r)).z > 0.0,
                "{} roof face faces down",
                f.name
            );
        }
        assert!(newell(&poly(&m, &m.base[0])).z < 0.0);
        for q in &m.facade {
            let p = poly(&m, q);
            let n = newell(&p);
            assert!(
                n.z.abs() < 1e-9 * n.norm(),
                "{} facade not vertical",
                f.name
            );
            // the first two facade vertices are the base copy of the outline edge
            let d = p[1] - p[0];
            let out = Vec3::new(d.y, -d.x, 0.0);
            assert!(n.dot(&out) > 0.0, "{} facade faces inward", f.name);
        }
    }
}

#[test]
fn no_facades_on_flat_outline() {
    let f = fixtures::hip();
    let m = export_building(&f.graph, &f.embedding, ExportOptions { facades: false }).unwrap();
    assert!(m.facade.is_empty());
    assert!(!m.to_obj().contains("g facade"));
    assert_eq!(m.vertices[4].z, f.embedding.get(4).z);
}

#[test]
fn non_planar_roof_is_refused() {
    let f = fixtures::hip();
    let mut e = f.embedding.clone();
    e.set(4, e.get(4) + Vec3::new(0.0, 0.3, 0.0));
    assert!(matches!(
        export_building(&f.graph, &e, ExportOptions::default()),
        Err(IoError::NonPlanarInput { .. })
    ));
}

#[test]
fn golden_obj_files() {
    let update = std::env::var_os("ROOFFORGE_UPDATE_GOLDEN").is_some();
    for f in fixtures::dual_corpus() {
        let obj = export_building(&f.graph, &f.embedding, ExportOptions::default())
            .unwrap()
            .to_obj();
        let path = golden_dir().join(format!("{}.obj", f.name));
        if update {
            std::fs::create_dir_all(golden_dir()).unwrap();
            std::fs::write(&path, &obj).unwrap();
        }
        let want = std::fs::read_to_string(&path)
            .unwrap_or_else(|_| panic!("missing golden {}", path.display()));
        assert_eq!(obj, want, "{} differs from golden file", f.name);
    }
}

#[test]
fn obj_reimports_with_generic_reader() {
    for f in fixtures::dual_corpus() {
        let mesh = export_building(&f.graph, &f.embedding, ExportOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.obj");
        std::fs::write(&path, mesh.to_obj()).unwrap();
        let opts = tobj::LoadOptions {
            triangulate: false,
            single_index: true,
            ..Default::default()
        };
        let (models, _) = tobj::load_obj(&path, &opts).unwrap();
        // tobj leaves the arity list empty when every face is a triangle
        let arities = |m: &tobj::Model| -> Vec<usize> {
            if m.mesh.face_arities.is_empty() {
                vec![3; m.mesh.indices.len() / 3]
            } else {
                m.mesh.face_arities.iter().map(|&k| k as usize).collect()
            }
        };
        let count = |name: &str| {
            models
                .iter()
                .filter(|m| m.name == name)
                .map(|m| arities(m).len())
                .sum::<usize>()
        };
        assert_eq!(count("roof"), mesh.roof.len(), "{}", f.name);
        assert_eq!(count("facade"), mesh.facade.len());
        assert_eq!(count("base"), 1);
        let roof = models.iter().find(|m| m.name == "roof").unwrap();
        let pos = &roof.mesh.positions;
        let mut start = 0;
        for k in arities(roof) {
            let pts: Vec<Vec3> = roof.mesh.indices[start..start + k]
                .iter()
                .map(|&i| {
                    let i = i as usize * 3;
                    Vec3::new(pos[i] as f64, pos[i + 1] as f64, pos[i + 2] as f64)
                })
                .collect();
            start += k;
            let n = newell(&pts).normalize();
            let d0 = n.dot(&pts[0]);
            let diag = 20.0;
            for p in &pts {
                // tobj stores f32, so planarity survives only to single precision
                assert!(
                    (n.dot(p) - d0).abs() / diag < 1e-5,
                    "{} face not planar after reimport",
                    f.name
                );
            }
        }
    }
}

#[test]
fn file_round_trip_through_disk() {
    let f = fixtures::hip();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hip.json");
    let doc = RoofDocument::from_3d(f.graph.clone(), &f.embedding);
    io::save_roof(&path, &doc).unwrap();
    assert_eq!(io::load_roof(&path).unwrap(), doc);
}

#[test]
fn height_groups_round_trip() {
    let (g, xy) = fixtures::pavilion();
    let doc = RoofDocument {
        graph: g,
        xy,
        z: None,
        image: None,
    };
    let back = parse_roof(&roof_to_json(&doc)).unwrap();
    assert_eq!(back, doc);
    assert!(roof_to_json(&doc).contains("\"group\": \"eaves\""));
}

#[test]
fn missing_vertex_is_schema_error() {
    let f = fixtures::hip();
    let mut file = RoofDocument::from_3d(f.graph, &f.embedding).to_file();
    file.faces[0][2] = 42;
    let e = file.into_document().unwrap_err();
    assert_eq!(e.name(), "SchemaError");
    assert_eq!(e.invariant(), Some("UnknownVertex"));
}

#[test]
fn ids_and_format_tag_are_checked() {
    let f = fixtures::hip();
    let mut file = RoofDocument::from_3d(f.graph.clone(), &f.embedding).to_file();
    file.vertices[1].id = 1;
    assert_eq!(
        file.into_document().unwrap_err().invariant(),
        Some("dense vertex ids")
    );
    let mut file = RoofDocument::from_3d(f.graph, &f.embedding).to_file();
    file.format = "roofgraph/2".into();
    assert_eq!(
        file.into_document().unwrap_err().invariant(),
        Some("format")
    );
}

#[test]
fn probability_out_of_range_is_schema_error() {
    let text = r#"{"format":"roofdual/1","outline":[[0,0],[4,0],[4,4],[0,4]],
        "adjacency":[[0,1,0.9],[1,2,0.9],[2,3,0.9],[3,0,0.9],[0,2,1.5]]}"#;
    let e = parse_dual(text).unwrap_err();
    assert_eq!(e.invariant(), Some("p in [0, 1]"));
    let mixed = r#"{"format":"roofdual/1","outline":[[0,0],[4,0],[4,4],[0,4]],"adjacency":[[0,1],[1,2,0.5]]}"#;
    assert_eq!(
        parse_dual(mixed).unwrap_err().invariant(),
        Some("uniform adjacency entries")
    );
}

#[test]
fn dual_files_round_trip_over_corpus() {
    for f in fixtures::dual_corpus() {
        let doc = DualDocument::Binary(f.dual());
        assert_eq!(
            parse_dual(&io::dual_to_json(&doc)).unwrap(),
            doc,
            "{}",
            f.name
        );
    }
    let (outline, prob) = fixtures::two_conflict();
    let doc = DualDocument::Probabilistic {
        outline,
        prob,
        merge_map: None,
    };
    assert_eq!(parse_dual(&io::dual_to_json(&doc)).unwrap(), doc);
}

proptest! {
    #[test]
    fn perturbed_roofs_round_trip_bit_exact(
        noise in proptest::collection::vec(-1.0f64..1.0, 18),
        scale in 1e-6f64..1e6,
    ) {
        let f = fixtures::hip();
        let coords: Vec<Vec3> = f
            .embedding
            .coords()
            .iter()
            .enumerate()
            .map(|(i, p)| Vec3::new(p.x * scale, p.y * scale, p.z + noise[3 * i] * 1e-3 + noise[3 * i + 2] / 3.0))
            .collect();
        let doc = RoofDocument::from_3d(f.graph.clone(), &Embedding3::new(coords).unwrap());
        let back = parse_roof(&roof_to_json(&doc)).unwrap();
        prop_assert_eq!(back, doc);
    }
}
