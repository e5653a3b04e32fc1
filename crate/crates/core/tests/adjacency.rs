use std::collections::BTreeSet;

use proptest::prelude::*;
use roofforge::adjacency::{
    exterior_test, is_interior_adjacency, resolve_greedy, resolve_sampling, AdjacencyCandidate,
    Resolution, DEFAULT_THRESHOLD,
};
use roofforge::dual::primal_from_dual;
use roofforge::fixtures::{self, prob_matrix, ring};
use roofforge::geom::{segments_cross, Vec2};

fn mid(outline: &[Vec2], i: usize) -> Vec2 {
    (outline[i] + outline[(i + 1) % outline.len()]) * 0.5
}

fn assert_candidate_ok(outline: &[Vec2], c: &AdjacencyCandidate) {
    let n = outline.len();
    for i in 0..n {
        assert!(!c.adjacency[i][i]);
        for j in 0..n {
            assert_eq!(c.adjacency[i][j], c.adjacency[j][i]);
        }
    }
    assert!(c.score <= 0.0);
    let pairs = c.pairs();
    for (a, &(i, j)) in pairs.iter().enumerate() {
        assert!(
            is_interior_adjacency(outline, i, j),
            "exterior pair ({i}, {j}) kept"
        );
        for &(k, l) in &pairs[a + 1..] {
            assert!(
                !segments_cross(
                    &mid(outline, i),
                    &mid(outline, j),
                    &mid(outline, k),
                    &mid(outline, l)
                ),
                "({i}, {j}) crosses ({k}, {l})"
            );
        }
    }
    let dual = c.to_dual(outline).unwrap();
    primal_from_dual(&dual).unwrap();
}

#[test]
fn type01_keeps_more_probable_diagonal() {
    let (outline, p) = fixtures::type01_square();
    let g = resolve_greedy(&outline, &p, DEFAULT_THRESHOLD).unwrap();
    assert!(g.adjacency[1][3]);
    assert!(!g.adjacency[0][2]);
    assert_eq!(
        g.provenance,
        vec![Resolution::Crossing {
            kept: (1, 3),
            dropped: (0, 2)
        }]
    );
    assert_candidate_ok(&outline, &g);
}

#[test]
fn type01_sampling_gives_both_resolutions() {
    let (outline, p) = fixtures::type01_square();
    let s = resolve_sampling(&outline, &p, DEFAULT_THRESHOLD, 10).unwrap();
    assert!(!s.truncated);
    assert_eq!(s.candidates.len(), 2);
    let ring_score = 4.0 * 0.9f64.ln();
    assert!((s.candidates[0].score - (ring_score + 0.8f64.ln())).abs() < 1e-12);
    assert!((s.candidates[1].score - (ring_score + 0.7f64.ln())).abs() < 1e-12);
    assert!(s.candidates[1].adjacency[0][2]);
    let g = resolve_greedy(&outline, &p, DEFAULT_THRESHOLD).unwrap();
    assert_eq!(s.candidates[0].adjacency, g.adjacency);
}

#[test]
fn l_shape_notch_pair_is_exterior() {
    let (outline, p) = fixtures::type02_l();
    assert!(!exterior_test(&outline, 1, 3));
    assert!(!is_interior_adjacency(&outline, 1, 3));
    for i in 0..6 {
        assert!(exterior_test(&outline, i, (i + 1) % 6));
        assert!(exterior_test(&outline, (i + 1) % 6, i));
    }
    let g = resolve_greedy(&outline, &p, DEFAULT_THRESHOLD).unwrap();
    assert!(!g.adjacency[1][3]);
    assert!(g
        .provenance
        .contains(&Resolution::Exterior { dropped: (1, 3) }));
    assert!(g.adjacency[0][2] && g.adjacency[3][5]);
    assert!(!g.adjacency[2][5], "below threshold");
    assert_candidate_ok(&outline, &g);
}

#[test]
fn conflict_free_ring_passes_through() {
    let outline: Vec<Vec2> = [[0.0, 0.0], [8.0, 0.0], [8.0, 4.0], [0.0, 4.0]]
        .map(|p| Vec2::new(p[0], p[1]))
        .to_vec();
    let mut t = ring(4, 0.9);
    t.push((0, 2, 0.8));
    t.push((1, 3, 0.2));
    let p = prob_matrix(4, &t);
    let g = resolve_greedy(&outline, &p, DEFAULT_THRESHOLD).unwrap();
    let expected: Vec<(usize, usize)> = vec![(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)];
    assert_eq!(g.pairs(), expected);
    assert!(g.provenance.is_empty());
    let s = resolve_sampling(&outline, &p, DEFAULT_THRESHOLD, 8).unwrap();
    assert_eq!(s.candidates.len(), 1);
    assert_eq!(s.candidates[0].adjacency, g.adjacency);
}

#[test]
fn two_conflicts_give_four_candidates() {
    let (outline, p) = fixtures::two_conflict();
    let s = resolve_sampling(&outline, &p, DEFAULT_THRESHOLD, 100).unwrap();
    assert_eq!(s.candidates.len(), 4);
    let g = resolve_greedy(&outline, &p, DEFAULT_THRESHOLD).unwrap();
    assert_eq!(s.candidates[0].adjacency, g.adjacency);
    for c in &s.candidates {
        assert_candidate_ok(&outline, c);
    }
    assert!(s.candidates.windows(2).all(|w| w[0].score >= w[1].score));
    let truncated = resolve_sampling(&outline, &p, DEFAULT_THRESHOLD, 3).unwrap();
    assert_eq!(truncated.candidates.len(), 3);
}

#[test]
fn tie_keeps_smaller_pair() {
    let (outline, _) = fixtures::type01_square();
    let mut t = ring(4, 0.9);
    t.extend([(0, 2, 0.75), (1, 3, 0.75)]);
    let g = resolve_greedy(&outline, &prob_matrix(4, &t), DEFAULT_THRESHOLD).unwrap();
    assert!(g.adjacency[0][2] && !g.adjacency[1][3]);
}

/// Rectangle of `k` cells, each 2 x 2, whose bottom and top sides are split
/// into unit edges; inside each cell the two diagonals between the split
/// edges cross, and no other dual segments do.
fn cells(k: usize) -> (Vec<Vec2>, Vec<(usize, usize)>) {
    let w = 2 * k;
    let mut pts: Vec<Vec2> = (0..=w).map(|x| Vec2::new(x as f64, 0.0)).collect();
    pts.extend((0..=w).rev().map(|x| Vec2::new(x as f64, 2.0)));
    // bottom edges 0..w, right edge w, top edges w+1..2w, left edge 2w+1
    let top = |x_left: usize| w + 1 + (w - x_left - 1);
    let mut diagonals = Vec::new();
    for i in 0..k {
        let (b0, b1) = (2 * i, 2 * i + 1);
        let (t0, t1) = (top(2 * i), top(2 * i + 1));
        diagonals.push((b0.min(t1), b0.max(t1)));
        diagonals.push((b1.min(t0), b1.max(t0)));
    }
    (pts, diagonals)
}

/// Exhaustive oracle: maximal crossing-free subsets of the diagonals.
fn brute_force(outline: &[Vec2], diagonals: &[(usize, usize)]) -> BTreeSet<Vec<(usize, usize)>> {
    let cross = |a: (usize, usize), b: (usize, usize)| {
        segments_cross(
            &mid(outline, a.0),
            &mid(outline, a.1),
            &mid(outline, b.0),
            &mid(outline, b.1),
        )
    };
    let m = diagonals.len();
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << m) {
        let set: Vec<(usize, usize)> = (0..m)
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| diagonals[b])
            .collect();
        let free = set
            .iter()
            .enumerate()
            .all(|(a, &x)| set[a + 1..].iter().all(|&y| !cross(x, y)));
        let maximal = (0..m)
            .filter(|b| mask & (1 << b) == 0)
            .all(|b| set.iter().any(|&x| cross(x, diagonals[b])));
        if free && maximal {
            let mut s = set;
            s.sort();
            out.insert(s);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn independent_conflicts_match_oracle(
        k in 1usize..5,
        probs in proptest::collection::vec(0.5f64..1.0, 8),
    ) {
        let (outline, diagonals) = cells(k);
        let n = outline.len();
        let mut t = ring(n, 0.99);
        for (d, &(i, j)) in diagonals.iter().enumerate() {
            // distinct values
            t.push((i, j, probs[d] - 1e-6 * d as f64));
        }
        let p = prob_matrix(n, &t);
        let s = resolve_sampling(&outline, &p, DEFAULT_THRESHOLD, 1 << 10).unwrap();
        prop_assert_eq!(s.candidates.len(), 1 << k);
        let got: BTreeSet<Vec<(usize, usize)>> = s
            .candidates
            .iter()
            .map(|c| c.pairs().into_iter().filter(|x| diagonals.contains(x)).collect())
            .collect();
        prop_assert_eq!(got, brute_force(&outline, &diagonals));
        let g = resolve_greedy(&outline, &p, DEFAULT_THRESHOLD).unwrap();
        prop_assert_eq!(&s.candidates[0].adjacency, &g.adjacency);
        for c in &s.candidates {
            assert_candidate_ok(&outline, c);
        }
    }
}
