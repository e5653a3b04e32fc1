//! Lifting a valid 2D embedding to 3D by solving the per-face plane
//! equations `z = a x + b y + c` in least squares.

use nalgebra::{DMatrix, DVector};

use crate::geom::{self, Vec3};
use crate::graph::{Embedding2, Embedding3, RoofGraph, VertexId};
use crate::solver::{default_fixed_vertex, SolveError};
use crate::validity;

/// Validity tolerance required before lifting.
pub const LIFT_VALIDITY_TOL: f64 = 1e-6;

/// Lifts `emb` with outline vertices at z = 0 and the fixed roof vertex at
/// `h`. The fixed vertex defaults to the highest-degree roof vertex.
pub fn lift_2d_to_3d(
    graph: &RoofGraph,
    emb: &Embedding2,
    h: f64,
    fixed_vertex: Option<VertexId>,
) -> Result<Embedding3, SolveError> {
    emb.check_for(graph)?;
    let report = validity::check_validity_2d(graph, emb, LIFT_VALIDITY_TOL)?;
    if !report.is_valid() {
        return Err(SolveError::InvalidInput2D {
            residual: report.overall,
        });
    }
    let fixed = match fixed_vertex {
        Some(v) => v,
        None => default_fixed_vertex(graph)
            .ok_or_else(|| SolveError::DegenerateGraph("no roof vertex".into()))?,
    };
    if fixed >= graph.n_vertices() || graph.is_outline(fixed) {
        return Err(SolveError::InvalidSpec {
            invariant: "fixed_vertex is a roof vertex".into(),
        });
    }
    let scale = {
        let d = geom::bbox_diagonal(graph.outline().iter().map(|&v| emb.get(v)));
        if d > 0.0 {
            1.0 / d
        } else {
            1.0
        }
    };

    let n = graph.n_vertices();
    let mut zslot = vec![usize::MAX; n];
    let mut nz = 0;
    for v in graph.roof_vertices() {
        if v != fixed {
            zslot[v] = nz;
            nz += 1;
        }
    }
    let nf = graph.n_faces();
    let cols = nz + 3 * nf;
    let rows: usize = graph.faces().iter().map(|f| f.len()).sum();
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut b = DVector::<f64>::zeros(rows);
    let hs = h * scale;
    let mut r = 0;
    for (fi, face) in graph.faces().iter().enumerate() {
        for &v in face {
            let p = emb.get(v) * scale;
            a[(r, nz + 3 * fi)] = p.x;
            a[(r, nz + 3 * fi + 1)] = p.y;
            a[(r, nz + 3 * fi + 2)] = 1.0;
            if zslot[v] != usize::MAX {
                a[(r, zslot[v])] = -1.0;
            } else if v == fixed {
                b[r] = hs;
            }
            r += 1;
        }
    }
    let svd = a.clone().svd(true, true);
    let sol = svd
        .solve(&b, 1e-12)
        .map_err(|_| SolveError::SingularSystem)?;
    let residual = (&a * &sol - &b).norm();
    // rms plane mismatch on the unit-diagonal problem, same scale as the validity tolerance
    let rms = residual / (rows as f64).sqrt();
    if !rms.is_finite() || rms > LIFT_VALIDITY_TOL * hs.abs().max(1.0) {
        return Err(SolveError::InconsistentSystem { residual });
    }
    let mut coords = Vec::with_capacity(n);
    for v in 0..n {
        let p = emb.get(v);
        let z = if zslot[v] != usize::MAX {
            sol[zslot[v]] / scale
        } else if v == fixed {
            h
        } else {
            0.0
        };
        coords.push(Vec3::new(p.x, p.y, z));
    }
    Ok(Embedding3::new(coords)?)
}
