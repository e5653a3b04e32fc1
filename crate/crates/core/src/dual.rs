//! Conversions between the primal roof graph and its dual.
//!
//! The dual has one node per face, placed at the midpoint of the face's
//! representative outline edge, plus an outside node joined to every outline
//! edge. Bounded faces of that complete dual are exactly the primal vertices.

use std::collections::BTreeMap;

use crate::geom::{self, Vec2};
use crate::graph::{DualGraph, Edge, Embedding2, GraphError, RoofGraph, VertexRecord};

/// Builds the dual of `graph`. Only the outline coordinates of `emb` are used.
pub fn dual_from_primal(graph: &RoofGraph, emb: &Embedding2) -> Result<DualGraph, GraphError> {
    emb.check_for(graph)?;
    let n = graph.n_outline();
    for f in 0..graph.n_faces() {
        if graph.face_outline_edges(f).is_empty() {
            return Err(GraphError::FaceWithoutOutlineEdge { face: f });
        }
    }
    let rep_of_edge: Vec<usize> = (0..n)
        .map(|i| {
            graph
                .representative_edge(graph.face_of_outline_edge(i))
                .unwrap()
        })
        .collect();

    let mut adj = vec![vec![false; n]; n];
    for (_, faces) in graph.roof_edges() {
        if faces.len() == 2 {
            let a = graph.representative_edge(faces[0]).unwrap();
            let b = graph.representative_edge(faces[1]).unwrap();
            if a != b {
                adj[a][b] = true;
                adj[b][a] = true;
            }
        }
    }
    let merged = rep_of_edge.iter().enumerate().any(|(i, &r)| r != i);
    let outline: Vec<Vec2> = graph.outline().iter().map(|&v| emb.get(v)).collect();
    DualGraph::new(outline, adj, None, merged.then_some(rep_of_edge))
}

/// Dart of the complete dual. `port` is set for darts between a face node and
/// the outside node, naming the outline edge they cross.
#[derive(Debug, Clone, Copy)]
struct Dart {
    from: usize,
    to: usize,
    port: Option<usize>,
}

/// Recovers the primal roof graph from a dual. Outline vertex `k` is the start
/// point of outline edge `k`; roof vertices follow in face-walk order. Faces
/// are listed by ascending representative edge.
pub fn primal_from_dual(dual: &DualGraph) -> Result<RoofGraph, GraphError> {
    let n = dual.n_outline();
    let outline = dual.outline();
    let reps: Vec<usize> = (0..n).filter(|&i| dual.representative(i) == i).collect();
    let mut node_of_rep = vec![usize::MAX; n];
    for (k, &r) in reps.iter().enumerate() {
        node_of_rep[r] = k;
    }
    let node_of_edge: Vec<usize> = (0..n)
        .map(|i| node_of_rep[dual.representative(i)])
        .collect();
    let n_nodes = reps.len();
    let outside = n_nodes;
    let pos: Vec<Vec2> = reps.iter().map(|&r| dual.edge_midpoint(r)).collect();

    let pairs: Vec<(usize, usize)> = dual.pairs();
    check_crossings(dual, &pairs)?;

    let mut darts: Vec<Dart> = Vec::new();
    for &(i, j) in &pairs {
        let (a, b) = (node_of_rep[i], node_of_rep[j]);
        darts.push(Dart {
            from: a,
            to: b,
            port: None,
        });
        darts.push(Dart {
            from: b,
            to: a,
            port: None,
        });
    }
    for k in 0..n {
        darts.push(Dart {
            from: node_of_edge[k],
            to: outside,
            port: Some(k),
        });
        darts.push(Dart {
            from: outside,
            to: node_of_edge[k],
            port: Some(k),
        });
    }
    let twin_of = |d: &Dart| -> usize {
        darts
            .iter()
            .position(|e| e.from == d.to && e.to == d.from && e.port == d.port)
            .unwrap()
    };
    let twins: Vec<usize> = darts.iter().map(twin_of).collect();

    // Counter-clockwise rotation of outgoing darts around every node.
    let mut rotation: Vec<Vec<usize>> = vec![Vec::new(); n_nodes + 1];
    const EPS: f64 = 1e-9;
    for (node, &rep) in reps.iter().enumerate() {
        let p = pos[node];
        let (a, b) = (outline[rep], outline[(rep + 1) % n]);
        let d = b - a;
        let normal = Vec2::new(d.y, -d.x);
        let members: Vec<usize> = (0..n).filter(|&i| node_of_edge[i] == node).collect();
        let mut port_key: BTreeMap<usize, f64> = BTreeMap::new();
        // Chains of consecutive merged edges keep their ports together.
        for &s in &members {
            let prev = (s + n - 1) % n;
            if members.len() > 1 && node_of_edge[prev] == node && prev != s {
                continue;
            }
            let mut chain = vec![s];
            let mut cur = s;
            loop {
                let nxt = (cur + 1) % n;
                if nxt == s || node_of_edge[nxt] != node {
                    break;
                }
                chain.push(nxt);
                cur = nxt;
            }
            if let Some(ir) = chain.iter().position(|&c| c == rep) {
                for (j, &c) in chain.iter().enumerate() {
                    let key = (j as f64 - ir as f64) * EPS;
                    port_key.insert(c, key.rem_euclid(std::f64::consts::TAU));
                }
            } else {
                let base = geom::ccw_angle(&normal, &(outline[s] - p));
                for (j, &c) in chain.iter().enumerate() {
                    port_key.insert(c, base + j as f64 * EPS);
                }
            }
        }
        let mut keyed: Vec<(f64, usize)> = Vec::new();
        for (di, dart) in darts.iter().enumerate() {
            if dart.from != node {
                continue;
            }
            let key = match dart.port {
                Some(k) => port_key[&k],
                None => geom::ccw_angle(&normal, &(pos[dart.to] - p)),
            };
            keyed.push((key, di));
        }
        keyed.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        rotation[node] = keyed.into_iter().map(|(_, d)| d).collect();
    }
    // Around the outside node the ports run clockwise in edge order.
    let mut out_darts: Vec<usize> = (0..darts.len())
        .filter(|&d| darts[d].from == outside)
        .collect();
    out_darts.sort_by_key(|&d| std::cmp::Reverse(darts[d].port.unwrap()));
    rotation[outside] = out_darts;

    let mut rot_index = vec![0usize; darts.len()];
    for list in &rotation {
        for (k, &d) in list.iter().enumerate() {
            rot_index[d] = k;
        }
    }
    // Face on the left of u->v continues with v->w, w the clockwise successor
    // of u around v.
    let next_dart = |d: usize| -> usize {
        let t = twins[d];
        let v = darts[d].to;
        let list = &rotation[v];
        list[(rot_index[t] + list.len() - 1) % list.len()]
    };

    let mut face_of_dart = vec![usize::MAX; darts.len()];
    let mut walks: Vec<Vec<usize>> = Vec::new();
    for list in &rotation {
        for &start in list {
            if face_of_dart[start] != usize::MAX {
                continue;
            }
            let id = walks.len();
            let mut walk = Vec::new();
            let mut d = start;
            loop {
                face_of_dart[d] = id;
                walk.push(d);
                d = next_dart(d);
                if d == start {
                    break;
                }
                if walk.len() > darts.len() {
                    return Err(non_realizable("face walk does not close", vec![]));
                }
            }
            walks.push(walk);
        }
    }

    let v_count = n_nodes + 1;
    let e_count = darts.len() / 2;
    if v_count as i64 - e_count as i64 + walks.len() as i64 != 2 {
        return Err(non_realizable(
            "complete dual is not planar with the given node positions",
            vec![],
        ));
    }

    // Outline vertex k sits between ports k-1 and k.
    let mut vertex_of_walk = vec![usize::MAX; walks.len()];
    for (di, dart) in darts.iter().enumerate() {
        if dart.from == outside {
            let k = dart.port.unwrap();
            let w = face_of_dart[di];
            if vertex_of_walk[w] != usize::MAX {
                return Err(non_realizable(
                    &format!(
                        "faces of outline edges {} and {} are not adjacent",
                        (k + n - 1) % n,
                        k
                    ),
                    vec![],
                ));
            }
            let expected = if node_of_edge[k] == node_of_edge[(k + n - 1) % n] {
                2
            } else {
                3
            };
            if walks[w].len() != expected {
                return Err(non_realizable(
                    &format!(
                        "faces of outline edges {} and {} are not adjacent",
                        (k + n - 1) % n,
                        k
                    ),
                    vec![],
                ));
            }
            vertex_of_walk[w] = k;
        }
    }
    let mut next_id = n;
    for (w, _) in walks.iter().enumerate() {
        if vertex_of_walk[w] == usize::MAX {
            vertex_of_walk[w] = next_id;
            next_id += 1;
        }
    }
    for (w, walk) in walks.iter().enumerate() {
        if vertex_of_walk[w] >= n && walk.len() < 3 {
            return Err(non_realizable("roof vertex of degree below 3", vec![]));
        }
    }

    let mut faces = Vec::with_capacity(n_nodes);
    for (node, &rep) in reps.iter().enumerate() {
        let mut face: Vec<usize> = rotation[node]
            .iter()
            .map(|&d| vertex_of_walk[face_of_dart[d]])
            .collect();
        let start = face.iter().position(|&v| v == rep).ok_or_else(|| {
            non_realizable(
                &format!("face of outline edge {rep} misses its own outline vertex"),
                vec![],
            )
        })?;
        face.rotate_left(start);
        faces.push(face);
    }
    let mut vertices = vec![VertexRecord::outline(); n];
    vertices.extend(std::iter::repeat_n(VertexRecord::roof(), next_id - n));
    let graph = RoofGraph::new(vertices, faces)
        .map_err(|e| non_realizable(&format!("recovered faces are inconsistent: {e}"), vec![]))?;
    for i in 0..n {
        let (a, b) = graph.outline_edge(i);
        if Edge::new(a, b) != Edge::new(i, (i + 1) % n) {
            return Err(non_realizable(
                "recovered outline order differs from the dual outline",
                vec![],
            ));
        }
    }
    Ok(graph)
}

fn non_realizable(reason: &str, pairs: Vec<((usize, usize), (usize, usize))>) -> GraphError {
    GraphError::NonRealizableAdjacency {
        reason: reason.to_string(),
        pairs,
    }
}

/// Dual segments that properly cross each other or the outline.
pub fn crossing_pairs(
    dual: &DualGraph,
    pairs: &[(usize, usize)],
) -> Vec<((usize, usize), (usize, usize))> {
    let seg = |(i, j): (usize, usize)| (dual.edge_midpoint(i), dual.edge_midpoint(j));
    let mut out = Vec::new();
    for a in 0..pairs.len() {
        let (p0, p1) = seg(pairs[a]);
        for b in (a + 1)..pairs.len() {
            let (q0, q1) = seg(pairs[b]);
            if geom::segments_cross(&p0, &p1, &q0, &q1) {
                out.push((pairs[a], pairs[b]));
            }
        }
    }
    out
}

fn check_crossings(dual: &DualGraph, pairs: &[(usize, usize)]) -> Result<(), GraphError> {
    let crossings = crossing_pairs(dual, pairs);
    if !crossings.is_empty() {
        return Err(non_realizable("dual edges cross", crossings));
    }
    Ok(())
}
