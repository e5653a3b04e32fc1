//! Hand-built roofs used by the tests, examples and the acceptance report.
//!
//! Outline vertices are numbered 0..n in counter-clockwise order, so outline
//! edge `i` runs from vertex `i` to `i + 1`. Each face rises from its first
//! outline edge at a fixed slope; every roof vertex is placed at the
//! least-squares intersection of its faces' planes, which makes the roofs
//! exactly planar when the topology matches the slopes.

use nalgebra::{DMatrix, DVector};

use crate::dual::dual_from_primal;
use crate::geom::{Vec2, Vec3};
use crate::graph::{DualGraph, Embedding2, Embedding3, HeightGroup, RoofGraph, VertexRecord};

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub graph: RoofGraph,
    pub embedding: Embedding3,
}

impl Fixture {
    pub fn xy(&self) -> Embedding2 {
        self.embedding.project_xy()
    }

    pub fn dual(&self) -> DualGraph {
        dual_from_primal(&self.graph, &self.xy()).expect("fixture has a dual")
    }

    pub fn outline(&self) -> Vec<Vec2> {
        self.graph
            .outline()
            .iter()
            .map(|&v| self.xy().get(v))
            .collect()
    }
}

fn v2(p: [f64; 2]) -> Vec2 {
    Vec2::new(p[0], p[1])
}

/// Builds a fixture from outline points, faces (outline ids first, then roof
/// ids) and optional per-face slopes.
pub fn from_slopes(
    name: &'static str,
    outline: &[[f64; 2]],
    faces: Vec<Vec<usize>>,
    slopes: Option<&[f64]>,
) -> Fixture {
    let n_o = outline.len();
    let n = faces.iter().flatten().copied().max().unwrap() + 1;
    // Plane of each face: z = s * (p - a) . n_left of its first outline edge.
    let planes: Vec<(Vec2, Vec2, f64)> = faces
        .iter()
        .enumerate()
        .map(|(fi, f)| {
            let k = (0..f.len())
                .find(|&k| {
                    let (a, b) = (f[k], f[(k + 1) % f.len()]);
                    a < n_o && b == (a + 1) % n_o
                })
                .expect("face has an outline edge");
            let a = v2(outline[f[k]]);
            let d = v2(outline[f[(k + 1) % f.len()]]) - a;
            let normal = Vec2::new(-d.y, d.x).normalize();
            (a, normal, slopes.map_or(1.0, |s| s[fi]))
        })
        .collect();
    let mut coords: Vec<Vec3> = outline.iter().map(|p| Vec3::new(p[0], p[1], 0.0)).collect();
    for r in n_o..n {
        let incident: Vec<usize> = (0..faces.len())
            .filter(|&f| faces[f].contains(&r))
            .collect();
        let mut a = DMatrix::<f64>::zeros(incident.len(), 3);
        let mut b = DVector::<f64>::zeros(incident.len());
        for (row, &f) in incident.iter().enumerate() {
            let (p, nl, s) = planes[f];
            a[(row, 0)] = s * nl.x;
            a[(row, 1)] = s * nl.y;
            a[(row, 2)] = -1.0;
            b[row] = s * nl.dot(&p);
        }
        let x = a
            .svd(true, true)
            .solve(&b, 1e-14)
            .expect("roof vertex solve");
        coords.push(Vec3::new(x[0], x[1], x[2]));
    }
    let mut vertices = vec![VertexRecord::outline(); n_o];
    vertices.extend(std::iter::repeat_n(VertexRecord::roof(), n - n_o));
    let graph = RoofGraph::new(vertices, faces).expect("fixture topology");
    Fixture {
        name,
        graph,
        embedding: Embedding3::new(coords).unwrap(),
    }
}

fn regular_polygon(k: usize, radius: f64) -> Vec<[f64; 2]> {
    (0..k)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / k as f64;
            [radius * t.cos(), radius * t.sin()]
        })
        .collect()
}

fn fan(k: usize) -> Vec<Vec<usize>> {
    (0..k).map(|i| vec![i, (i + 1) % k, k]).collect()
}

pub fn pyramid() -> Fixture {
    from_slopes(
        "pyramid",
        &[[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]],
        fan(4),
        None,
    )
}

/// 8 x 4 hip roof; roof vertices 4 = (2, 2) and 5 = (6, 2).
pub fn hip() -> Fixture {
    from_slopes(
        "hip",
        &[[0.0, 0.0], [8.0, 0.0], [8.0, 4.0], [0.0, 4.0]],
        vec![
            vec![0, 1, 5, 4],
            vec![1, 2, 5],
            vec![2, 3, 4, 5],
            vec![3, 0, 4],
        ],
        None,
    )
}

/// 6 x 4 rectangle with steeper end faces, so all four faces meet at a point.
pub fn tent() -> Fixture {
    let s = 2.0 / 3.0;
    from_slopes(
        "tent",
        &[[0.0, 0.0], [6.0, 0.0], [6.0, 4.0], [0.0, 4.0]],
        fan(4),
        Some(&[1.0, s, 1.0, s]),
    )
}

pub fn hexagon_pyramid() -> Fixture {
    from_slopes("hexagon-pyramid", &regular_polygon(6, 4.0), fan(6), None)
}

pub fn octagon_pyramid() -> Fixture {
    from_slopes("octagon-pyramid", &regular_polygon(8, 4.0), fan(8), None)
}

pub fn pentagon_pyramid() -> Fixture {
    from_slopes("pentagon-pyramid", &regular_polygon(5, 4.0), fan(5), None)
}

pub fn long_hip() -> Fixture {
    from_slopes(
        "long-hip",
        &[[0.0, 0.0], [9.0, 0.0], [9.0, 3.0], [0.0, 3.0]],
        vec![
            vec![0, 1, 5, 4],
            vec![1, 2, 5],
            vec![2, 3, 4, 5],
            vec![3, 0, 4],
        ],
        None,
    )
}

pub fn trapezoid_hip() -> Fixture {
    from_slopes(
        "trapezoid-hip",
        &[[0.0, 0.0], [10.0, 0.0], [7.0, 4.0], [3.0, 4.0]],
        vec![
            vec![0, 1, 5, 4],
            vec![1, 2, 5],
            vec![2, 3, 4, 5],
            vec![3, 0, 4],
        ],
        None,
    )
}

/// General quadrilateral: no two outline edges parallel.
pub fn irregular_hip() -> Fixture {
    from_slopes(
        "irregular-hip",
        &[[0.0, 0.0], [7.0, 0.0], [8.0, 5.0], [1.0, 4.0]],
        vec![
            vec![0, 1, 5, 4],
            vec![1, 2, 5],
            vec![2, 3, 4, 5],
            vec![3, 0, 4],
        ],
        None,
    )
}

pub fn l_shape() -> Fixture {
    // 6 = inner corner vertex (2, 2), 7 = (6, 2), 8 = (2, 6)
    from_slopes(
        "l-shape",
        &[
            [0.0, 0.0],
            [8.0, 0.0],
            [8.0, 4.0],
            [4.0, 4.0],
            [4.0, 8.0],
            [0.0, 8.0],
        ],
        vec![
            vec![0, 1, 7, 6],
            vec![1, 2, 7],
            vec![2, 3, 6, 7],
            vec![3, 4, 8, 6],
            vec![4, 5, 8],
            vec![5, 0, 6, 8],
        ],
        None,
    )
}

pub fn t_shape() -> Fixture {
    // 8 = junction (6, 6), 9 = stem end (6, 2), 10 = (2, 6), 11 = (10, 6)
    from_slopes(
        "t-shape",
        &[
            [4.0, 0.0],
            [8.0, 0.0],
            [8.0, 4.0],
            [12.0, 4.0],
            [12.0, 8.0],
            [0.0, 8.0],
            [0.0, 4.0],
            [4.0, 4.0],
        ],
        vec![
            vec![0, 1, 9],
            vec![1, 2, 8, 9],
            vec![2, 3, 11, 8],
            vec![3, 4, 11],
            vec![4, 5, 10, 8, 11],
            vec![5, 6, 10],
            vec![6, 7, 8, 10],
            vec![7, 0, 9, 8],
        ],
        None,
    )
}

/// Narrow-stem T whose two bar-bottom edges (2 and 6) form one face.
pub fn t_merged() -> Fixture {
    // 8 = junction (6, 5), 9 = stem end (6, 1), 10 = (2, 6), 11 = (10, 6)
    from_slopes(
        "t-merged",
        &[
            [5.0, 0.0],
            [7.0, 0.0],
            [7.0, 4.0],
            [12.0, 4.0],
            [12.0, 8.0],
            [0.0, 8.0],
            [0.0, 4.0],
            [5.0, 4.0],
        ],
        vec![
            vec![0, 1, 9],
            vec![1, 2, 8, 9],
            vec![2, 3, 11, 10, 6, 7, 8],
            vec![3, 4, 11],
            vec![4, 5, 10, 11],
            vec![5, 6, 10],
            vec![7, 0, 9, 8],
        ],
        None,
    )
}

/// Hip roof whose bottom side is split into two collinear outline edges.
pub fn split_edge_hip() -> Fixture {
    from_slopes(
        "split-edge-hip",
        &[[0.0, 0.0], [4.0, 0.0], [8.0, 0.0], [8.0, 4.0], [0.0, 4.0]],
        vec![
            vec![0, 1, 2, 6, 5],
            vec![2, 3, 6],
            vec![3, 4, 5, 6],
            vec![4, 0, 5],
        ],
        None,
    )
}

pub fn u_shape() -> Fixture {
    // 8 = (2, 2), 9 = (10, 2), 10 = (2, 6), 11 = (10, 6)
    from_slopes(
        "u-shape",
        &[
            [0.0, 0.0],
            [12.0, 0.0],
            [12.0, 8.0],
            [8.0, 8.0],
            [8.0, 4.0],
            [4.0, 4.0],
            [4.0, 8.0],
            [0.0, 8.0],
        ],
        vec![
            vec![0, 1, 9, 8],
            vec![1, 2, 11, 9],
            vec![2, 3, 11],
            vec![3, 4, 9, 11],
            vec![4, 5, 8, 9],
            vec![5, 6, 10, 8],
            vec![6, 7, 10],
            vec![7, 0, 8, 10],
        ],
        None,
    )
}

pub fn plus_shape() -> Fixture {
    // 12 = centre (6, 6), 13..16 = arm ends bottom, right, top, left
    from_slopes(
        "plus-shape",
        &[
            [4.0, 0.0],
            [8.0, 0.0],
            [8.0, 4.0],
            [12.0, 4.0],
            [12.0, 8.0],
            [8.0, 8.0],
            [8.0, 12.0],
            [4.0, 12.0],
            [4.0, 8.0],
            [0.0, 8.0],
            [0.0, 4.0],
            [4.0, 4.0],
        ],
        vec![
            vec![0, 1, 13],
            vec![1, 2, 12, 13],
            vec![2, 3, 14, 12],
            vec![3, 4, 14],
            vec![4, 5, 12, 14],
            vec![5, 6, 15, 12],
            vec![6, 7, 15],
            vec![7, 8, 12, 15],
            vec![8, 9, 16, 12],
            vec![9, 10, 16],
            vec![10, 11, 12, 16],
            vec![11, 0, 13, 12],
        ],
        None,
    )
}

/// Hexagon with tilted long sides: two short ridges joined by a diagonal
/// roof edge.
pub fn zigzag() -> Fixture {
    // 6 = a, 7 = p, 8 = q, 9 = b
    from_slopes(
        "zigzag",
        &[
            [0.0, 0.0],
            [5.0, -1.0],
            [12.0, 0.0],
            [12.0, 4.0],
            [7.0, 5.0],
            [0.0, 4.0],
        ],
        vec![
            vec![0, 1, 7, 6],
            vec![1, 2, 9, 8, 7],
            vec![2, 3, 9],
            vec![3, 4, 8, 9],
            vec![4, 5, 6, 7, 8],
            vec![5, 0, 6],
        ],
        None,
    )
}

/// The sixteen roofs used for dual reconstruction.
pub fn dual_corpus() -> Vec<Fixture> {
    vec![
        pyramid(),
        hip(),
        tent(),
        hexagon_pyramid(),
        octagon_pyramid(),
        long_hip(),
        trapezoid_hip(),
        irregular_hip(),
        l_shape(),
        t_shape(),
        t_merged(),
        split_edge_hip(),
        u_shape(),
        plus_shape(),
        pentagon_pyramid(),
        zigzag(),
    ]
}

/// Ids in [`three_ridge`].
pub mod three_ridge_ids {
    pub const Y2: usize = 5;
    pub const X: usize = 6;
    pub const Y1: usize = 7;
}

/// Five-sided roof with roof vertices y2 - x - y1 in a chain: y2 and x lie on
/// a ridge, x and y1 on a second ridge, y1 is a hip apex.
pub fn three_ridge() -> Fixture {
    from_slopes(
        "three-ridge",
        &[
            [0.0, 0.0],
            [10.0, 0.0],
            [14.0, 2.0],
            [12.0, 6.0],
            [0.0, 6.0],
        ],
        vec![
            vec![0, 1, 6, 5],
            vec![1, 2, 7, 6],
            vec![2, 3, 7],
            vec![3, 4, 5, 6, 7],
            vec![4, 0, 5],
        ],
        None,
    )
}

/// Hexagonal pavilion: outline alternates fixed-zero vertices and a free
/// height group "eaves"; an inner hexagon of roof vertices carries a flat
/// top face. The returned sketch is deliberately asymmetric.
pub fn pavilion() -> (RoofGraph, Embedding2) {
    let outer = regular_polygon(6, 6.0);
    let inner = regular_polygon(6, 3.0);
    let mut vertices = Vec::new();
    for i in 0..6 {
        let group = if i % 2 == 0 {
            HeightGroup::FixedZero
        } else {
            HeightGroup::Group("eaves".into())
        };
        vertices.push(VertexRecord {
            height_group: Some(group),
            ..VertexRecord::outline()
        });
    }
    vertices.extend(std::iter::repeat_n(VertexRecord::roof(), 6));
    let mut faces: Vec<Vec<usize>> = (0..6)
        .map(|i| vec![i, (i + 1) % 6, 6 + (i + 1) % 6, 6 + i])
        .collect();
    faces.push((6..12).collect());
    let graph = RoofGraph::new(vertices, faces).unwrap();
    let jitter = [
        [0.3, 0.1],
        [-0.2, 0.25],
        [0.15, -0.3],
        [0.0, 0.2],
        [-0.25, -0.1],
        [0.2, 0.0],
    ];
    let mut xy: Vec<[f64; 2]> = outer.clone();
    for i in 0..6 {
        xy.push([inner[i][0] + jitter[i][0], inner[i][1] + jitter[i][1]]);
    }
    (graph, Embedding2::from_xy(&xy).unwrap())
}

/// Hip-like roof with two mid-side outline vertices (2 and 5) in one height
/// group, mirror-symmetric about x = 4.
pub fn two_group() -> (RoofGraph, Embedding2) {
    let mut vertices = vec![
        VertexRecord {
            height_group: Some(HeightGroup::FixedZero),
            ..VertexRecord::outline()
        };
        6
    ];
    vertices[2].height_group = Some(HeightGroup::Group("mid".into()));
    vertices[5].height_group = Some(HeightGroup::Group("mid".into()));
    vertices.extend([VertexRecord::roof(), VertexRecord::roof()]);
    let faces = vec![
        vec![0, 1, 7, 6],
        vec![1, 2, 3, 7],
        vec![3, 4, 6, 7],
        vec![4, 5, 0, 6],
    ];
    let graph = RoofGraph::new(vertices, faces).unwrap();
    let xy = Embedding2::from_xy(&[
        [0.0, 0.0],
        [8.0, 0.0],
        [7.5, 2.0],
        [8.0, 4.0],
        [0.0, 4.0],
        [0.5, 2.0],
        [2.0, 2.0],
        [6.0, 2.0],
    ])
    .unwrap();
    (graph, xy)
}

/// Symmetric probability matrix from `(i, j, p)` triples.
pub fn prob_matrix(n: usize, triples: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut p = vec![vec![0.0; n]; n];
    for &(i, j, v) in triples {
        p[i][j] = v;
        p[j][i] = v;
    }
    p
}

/// Consecutive-edge adjacencies of an `n`-edge outline, all with probability `p`.
pub fn ring(n: usize, p: f64) -> Vec<(usize, usize, f64)> {
    (0..n).map(|i| (i, (i + 1) % n, p)).collect()
}

/// Square whose two diagonal adjacencies cross; (1, 3) is the likelier one.
pub fn type01_square() -> (Vec<Vec2>, Vec<Vec<f64>>) {
    let outline = [[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]]
        .map(v2)
        .to_vec();
    let mut t = ring(4, 0.9);
    t.extend([(0, 2, 0.7), (1, 3, 0.8)]);
    (outline, prob_matrix(4, &t))
}

/// L-shaped outline where the adjacency (1, 3) passes outside the notch.
pub fn type02_l() -> (Vec<Vec2>, Vec<Vec<f64>>) {
    let outline = [
        [0.0, 0.0],
        [6.0, 0.0],
        [6.0, 2.0],
        [2.0, 2.0],
        [2.0, 6.0],
        [0.0, 6.0],
    ]
    .map(v2)
    .to_vec();
    let mut t = ring(6, 0.9);
    t.extend([(0, 2, 0.8), (3, 5, 0.8), (1, 3, 0.7), (2, 5, 0.3)]);
    (outline, prob_matrix(6, &t))
}

/// Eight-edge rectangle with two independent crossing conflicts:
/// (7, 5) x (6, 0) on the left and (1, 3) x (2, 4) on the right.
pub fn two_conflict() -> (Vec<Vec2>, Vec<Vec<f64>>) {
    let outline = [
        [0.0, 0.0],
        [2.0, 0.0],
        [4.0, 0.0],
        [4.0, 1.0],
        [4.0, 2.0],
        [2.0, 2.0],
        [0.0, 2.0],
        [0.0, 1.0],
    ]
    .map(v2)
    .to_vec();
    let mut t = ring(8, 0.95);
    t.extend([
        (0, 5, 0.9),
        (1, 4, 0.9),
        (7, 5, 0.8),
        (6, 0, 0.6),
        (1, 3, 0.7),
        (2, 4, 0.65),
    ]);
    (outline, prob_matrix(8, &t))
}
