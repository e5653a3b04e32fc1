//! Harmonic (Laplacian) placement of roof vertices with the outline held
//! fixed: every roof vertex lands at the mean of its neighbours.

use nalgebra::DMatrix;

use crate::geom::Vec2;
use crate::graph::{Embedding2, RoofGraph};
use crate::solver::SolveError;

/// Solves `L_RR X_R = A_RO X_O`. Only outline entries of `outline2d` are read.
pub fn spectral_embed_2d(
    graph: &RoofGraph,
    outline2d: &Embedding2,
) -> Result<Embedding2, SolveError> {
    outline2d.check_for(graph)?;
    let roof = graph.roof_vertices();
    let n = graph.n_vertices();
    let mut slot = vec![usize::MAX; n];
    for (k, &v) in roof.iter().enumerate() {
        slot[v] = k;
    }
    check_connected(graph)?;
    let r = roof.len();
    let mut l = DMatrix::<f64>::zeros(r, r);
    let mut rhs = DMatrix::<f64>::zeros(r, 2);
    for (k, &v) in roof.iter().enumerate() {
        for u in graph.neighbors(v) {
            l[(k, k)] += 1.0;
            if graph.is_outline(u) {
                let p = outline2d.get(u);
                rhs[(k, 0)] += p.x;
                rhs[(k, 1)] += p.y;
            } else {
                l[(k, slot[u])] -= 1.0;
            }
        }
    }
    let mut coords: Vec<Vec2> = outline2d.coords().to_vec();
    if r > 0 {
        let lu = l.clone().lu();
        let sol = lu.solve(&rhs).ok_or(SolveError::SingularSystem)?;
        let resid = (&l * &sol - &rhs).norm();
        if !resid.is_finite() || resid > 1e-10 * rhs.norm().max(1.0) {
            return Err(SolveError::SingularSystem);
        }
        for (k, &v) in roof.iter().enumerate() {
            coords[v] = Vec2::new(sol[(k, 0)], sol[(k, 1)]);
        }
    }
    Ok(Embedding2::new(coords)?)
}

/// Every roof vertex must reach the outline through graph edges.
fn check_connected(graph: &RoofGraph) -> Result<(), SolveError> {
    let n = graph.n_vertices();
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = graph.outline().to_vec();
    for &v in &stack {
        seen[v] = true;
    }
    while let Some(v) = stack.pop() {
        for u in graph.neighbors(v) {
            if !seen[u] {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    if seen.iter().all(|&s| s) {
        Ok(())
    } else {
        Err(SolveError::SingularSystem)
    }
}

/// Largest distance between a roof vertex and the mean of its neighbours.
pub fn harmonic_residual(graph: &RoofGraph, emb: &Embedding2) -> f64 {
    graph
        .roof_vertices()
        .into_iter()
        .map(|v| {
            let nb = graph.neighbors(v);
            let mean = nb.iter().map(|&u| emb.get(u)).sum::<Vec2>() / nb.len() as f64;
            (emb.get(v) - mean).norm()
        })
        .fold(0.0, f64::max)
}
