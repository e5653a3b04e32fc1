//! Turning a probabilistic face-adjacency matrix into realizable dual graphs:
//! exterior adjacencies are dropped, then crossing dual segments are resolved
//! either greedily or by branching on every conflict.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use crate::geom::{self, Vec2};
use crate::graph::{DualGraph, GraphError};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
/// Upper bound on explored branches in [`resolve_sampling`].
pub const BRANCH_CAP: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdjacencyError {
    #[error("no adjacency probability reaches the threshold")]
    EmptyAdjacency,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl AdjacencyError {
    pub fn name(&self) -> &'static str {
        match self {
            AdjacencyError::EmptyAdjacency => "EmptyAdjacency",
            AdjacencyError::InvalidInput(_) => "InvalidInput",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    /// The pair's dual segment leaves the outline.
    Exterior { dropped: (usize, usize) },
    /// Two dual segments crossed; one was kept.
    Crossing {
        kept: (usize, usize),
        dropped: (usize, usize),
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyCandidate {
    pub adjacency: Vec<Vec<bool>>,
    /// Sum of log probabilities of the kept pairs.
    pub score: f64,
    pub provenance: Vec<Resolution>,
}

impl AdjacencyCandidate {
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.adjacency.len();
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.adjacency[i][j])
            .collect()
    }

    pub fn to_dual(&self, outline: &[Vec2]) -> Result<DualGraph, GraphError> {
        DualGraph::new(outline.to_vec(), self.adjacency.clone(), None, None)
    }
}

#[derive(Debug, Clone)]
pub struct SamplingResult {
    pub candidates: Vec<AdjacencyCandidate>,
    /// Set when the branch cap was hit; `candidates` is then the best-scoring
    /// prefix of what was explored.
    pub truncated: bool,
}

fn midpoints(outline: &[Vec2]) -> Vec<Vec2> {
    let n = outline.len();
    (0..n)
        .map(|i| (outline[i] + outline[(i + 1) % n]) * 0.5)
        .collect()
}

fn is_ccw(outline: &[Vec2]) -> bool {
    geom::signed_area(outline) > 0.0
}

/// True when the direction from edge `i`'s midpoint to edge `j`'s midpoint
/// lies in the interior wedge at edge `i`, bounded by the directions to the
/// previous and next edge midpoints. Either orientation is accepted.
pub fn exterior_test(outline: &[Vec2], i: usize, j: usize) -> bool {
    let n = outline.len();
    let c = midpoints(outline);
    let (prev, next) = ((i + n - 1) % n, (i + 1) % n);
    if j == prev || j == next {
        return true;
    }
    let (lo, hi) = if is_ccw(outline) {
        (next, prev)
    } else {
        (prev, next)
    };
    let a = c[lo] - c[i];
    let b = c[hi] - c[i];
    let d = c[j] - c[i];
    geom::ccw_angle(&a, &d) <= geom::ccw_angle(&a, &b)
}

/// Interior from both ends.
pub fn is_interior_adjacency(outline: &[Vec2], i: usize, j: usize) -> bool {
    exterior_test(outline, i, j) && exterior_test(outline, j, i)
}

fn validate(outline: &[Vec2], prob: &[Vec<f64>], threshold: f64) -> Result<(), AdjacencyError> {
    let n = outline.len();
    let bad = |m: String| Err(AdjacencyError::InvalidInput(m));
    if n < 3 {
        return bad("outline needs at least 3 points".into());
    }
    if !geom::is_simple_polygon(outline) {
        return bad("outline is not a simple polygon".into());
    }
    if !(0.0..=1.0).contains(&threshold) {
        return bad(format!("threshold {threshold} outside [0, 1]"));
    }
    if prob.len() != n || prob.iter().any(|r| r.len() != n) {
        return bad(format!("probability matrix must be {n} x {n}"));
    }
    for i in 0..n {
        for j in 0..n {
            let p = prob[i][j];
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("probability ({i}, {j}) = {p} outside [0, 1]"));
            }
            if p != prob[j][i] {
                return bad(format!("probability matrix not symmetric at ({i}, {j})"));
            }
        }
    }
    Ok(())
}

struct Problem<'a> {
    n: usize,
    mid: Vec<Vec2>,
    prob: &'a [Vec<f64>],
}

impl Problem<'_> {
    fn p(&self, e: (usize, usize)) -> f64 {
        self.prob[e.0][e.1]
    }

    fn crosses(&self, a: (usize, usize), b: (usize, usize)) -> bool {
        geom::segments_cross(
            &self.mid[a.0],
            &self.mid[a.1],
            &self.mid[b.0],
            &self.mid[b.1],
        )
    }

    /// Kept pair first, dropped second. Higher probability wins; on a tie the
    /// lexicographically smaller pair is kept.
    fn winner(&self, a: (usize, usize), b: (usize, usize)) -> ((usize, usize), (usize, usize)) {
        match self.p(a).partial_cmp(&self.p(b)).unwrap_or(Ordering::Equal) {
            Ordering::Greater => (a, b),
            Ordering::Less => (b, a),
            Ordering::Equal => {
                if a < b {
                    (a, b)
                } else {
                    (b, a)
                }
            }
        }
    }

    /// Crossing pairs of `kept`, ordered by descending larger probability and
    /// then by index.
    fn conflicts(&self, kept: &BTreeSet<(usize, usize)>) -> Vec<((usize, usize), (usize, usize))> {
        let list: Vec<(usize, usize)> = kept.iter().copied().collect();
        let mut out = Vec::new();
        for a in 0..list.len() {
            for b in (a + 1)..list.len() {
                if self.crosses(list[a], list[b]) {
                    out.push((list[a], list[b]));
                }
            }
        }
        out.sort_by(|x, y| {
            let px = self.p(x.0).max(self.p(x.1));
            let py = self.p(y.0).max(self.p(y.1));
            py.partial_cmp(&px)
                .unwrap_or(Ordering::Equal)
                .then(x.cmp(y))
        });
        out
    }

    fn candidate(
        &self,
        kept: &BTreeSet<(usize, usize)>,
        provenance: Vec<Resolution>,
    ) -> AdjacencyCandidate {
        let mut adjacency = vec![vec![false; self.n]; self.n];
        let mut score = 0.0;
        for &(i, j) in kept {
            adjacency[i][j] = true;
            adjacency[j][i] = true;
            score += self.p((i, j)).max(f64::MIN_POSITIVE).ln();
        }
        AdjacencyCandidate {
            adjacency,
            score,
            provenance,
        }
    }
}

/// Thresholds, keeps consecutive outline edges adjacent regardless, and drops
/// exterior pairs.
fn prepare<'a>(
    outline: &[Vec2],
    prob: &'a [Vec<f64>],
    threshold: f64,
) -> Result<(Problem<'a>, BTreeSet<(usize, usize)>, Vec<Resolution>), AdjacencyError> {
    validate(outline, prob, threshold)?;
    let n = outline.len();
    let mut kept = BTreeSet::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if prob[i][j] > 0.0 && prob[i][j] >= threshold {
                kept.insert((i, j));
            }
        }
    }
    if kept.is_empty() {
        return Err(AdjacencyError::EmptyAdjacency);
    }
    for i in 0..n {
        let j = (i + 1) % n;
        kept.insert((i.min(j), i.max(j)));
    }
    let mut provenance = Vec::new();
    kept.retain(|&(i, j)| {
        let inside = is_interior_adjacency(outline, i, j);
        if !inside {
            provenance.push(Resolution::Exterior { dropped: (i, j) });
        }
        inside
    });
    Ok((
        Problem {
            n,
            mid: midpoints(outline),
            prob,
        },
        kept,
        provenance,
    ))
}

/// Single resolution: at each step the first remaining conflict is settled in
/// favour of the more probable pair.
pub fn resolve_greedy(
    outline: &[Vec2],
    prob: &[Vec<f64>],
    threshold: f64,
) -> Result<AdjacencyCandidate, AdjacencyError> {
    let (pb, mut kept, mut provenance) = prepare(outline, prob, threshold)?;
    while let Some(&(a, b)) = pb.conflicts(&kept).first() {
        let (win, lose) = pb.winner(a, b);
        kept.remove(&lose);
        provenance.push(Resolution::Crossing {
            kept: win,
            dropped: lose,
        });
    }
    log::debug!("greedy resolution kept {} pairs", kept.len());
    Ok(pb.candidate(&kept, provenance))
}

/// Every resolution obtained by branching on conflicts (keep either pair),
/// deduplicated, best score first, at most `max_candidates` long.
pub fn resolve_sampling(
    outline: &[Vec2],
    prob: &[Vec<f64>],
    threshold: f64,
    max_candidates: usize,
) -> Result<SamplingResult, AdjacencyError> {
    if max_candidates == 0 {
        return Err(AdjacencyError::InvalidInput(
            "max_candidates must be positive".into(),
        ));
    }
    let (pb, kept, provenance) = prepare(outline, prob, threshold)?;
    let mut seen: HashSet<BTreeSet<(usize, usize)>> = HashSet::new();
    let mut out = Vec::new();
    let mut branches = 0usize;
    let mut truncated = false;
    // Depth-first with the greedy choice explored first, so the greedy
    // result is always reached before the cap can bite.
    let mut stack = vec![(kept, provenance)];
    while let Some((kept, prov)) = stack.pop() {
        branches += 1;
        if branches > BRANCH_CAP {
            truncated = true;
            break;
        }
        match pb.conflicts(&kept).first() {
            None => {
                if seen.insert(kept.clone()) {
                    out.push(pb.candidate(&kept, prov));
                }
            }
            Some(&(a, b)) => {
                let (win, lose) = pb.winner(a, b);
                for (k, d) in [(lose, win), (win, lose)] {
                    let mut next = kept.clone();
                    next.remove(&d);
                    let mut p = prov.clone();
                    p.push(Resolution::Crossing {
                        kept: k,
                        dropped: d,
                    });
                    stack.push((next, p));
                }
            }
        }
    }
    if truncated {
        log::warn!("adjacency sampling hit the branch cap of {BRANCH_CAP}");
    }
    out.sort_by(|x, y| {
        y.score
            .partial_cmp(&x.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| x.pairs().cmp(&y.pairs()))
    });
    out.truncate(max_candidates);
    Ok(SamplingResult {
        candidates: out,
        truncated,
    })
}
