//! Closed-form eigen-decomposition of symmetric 3x3 matrices.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

/// Eigenvalues closer than this are treated as a repeated pair.
pub const MULTIPLICITY_TOL: f64 = 1e-12;

/// Eigenvalues in ascending order, via the trigonometric form of Cardano's
/// formula.
pub fn eigenvalues(a: &Matrix3<f64>) -> [f64; 3] {
    let p1 = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
    if p1 == 0.0 {
        let mut d = [a[(0, 0)], a[(1, 1)], a[(2, 2)]];
        d.sort_by(f64::total_cmp);
        return d;
    }
    let q = a.trace() / 3.0;
    let p2 = (a[(0, 0)] - q).powi(2) + (a[(1, 1)] - q).powi(2) + (a[(2, 2)] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b = (a - Matrix3::identity() * q) / p;
    let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
    let mid = 3.0 * q - hi - lo;
    let mut out = [lo, mid, hi];
    out.sort_by(f64::total_cmp);
    out
}

fn lex_abs_key(v: &Vector3<f64>) -> [f64; 3] {
    [v.x.abs(), v.y.abs(), v.z.abs()]
}

fn lex_greater(a: &Vector3<f64>, b: &Vector3<f64>) -> bool {
    let (ka, kb) = (lex_abs_key(a), lex_abs_key(b));
    for k in 0..3 {
        if ka[k] != kb[k] {
            return ka[k] > kb[k];
        }
    }
    false
}

/// Sign convention: first non-negligible component positive.
fn canonical_sign(v: Vector3<f64>) -> Vector3<f64> {
    for k in 0..3 {
        if v[k].abs() > 1e-300 {
            return if v[k] < 0.0 { -v } else { v };
        }
    }
    v
}

/// Unit null vector of `a - lambda I` from the best-conditioned pair of rows.
fn null_vector(a: &Matrix3<f64>, lambda: f64) -> Option<Vector3<f64>> {
    let m = a - Matrix3::identity() * lambda;
    let r0 = m.row(0).transpose();
    let r1 = m.row(1).transpose();
    let r2 = m.row(2).transpose();
    let cands = [r0.cross(&r1), r0.cross(&r2), r1.cross(&r2)];
    let best = cands
        .iter()
        .max_by(|x, y| x.norm_squared().total_cmp(&y.norm_squared()))?;
    let scale = m.norm().max(f64::MIN_POSITIVE);
    if best.norm() <= 1e-10 * scale * scale {
        return None;
    }
    Some(best.normalize())
}

/// Smallest eigenvalue and a unit eigenvector for it. When the two smallest
/// eigenvalues are repeated, the eigenvector with lexicographically larger
/// absolute components is returned so that results are reproducible.
pub fn smallest_eigenpair(a: &Matrix3<f64>) -> (f64, Vector3<f64>) {
    let ev = eigenvalues(a);
    let scale = ev[2].abs().max(1.0);
    let repeated = ev[1] - ev[0] < MULTIPLICITY_TOL * scale;
    let v = if repeated {
        None
    } else {
        null_vector(a, ev[0])
    };
    let v = match v {
        Some(v) => v,
        None => fallback_vector(a, repeated),
    };
    let v = canonical_sign(v);
    // The Rayleigh quotient is more accurate than the Cardano root near zero.
    let value = (v.transpose() * a * v)[(0, 0)].max(0.0);
    (value, v)
}

fn fallback_vector(a: &Matrix3<f64>, repeated: bool) -> Vector3<f64> {
    let eig = SymmetricEigen::new(*a);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let v0: Vector3<f64> = eig.eigenvectors.column(order[0]).into_owned();
    if !repeated {
        return v0;
    }
    let v1: Vector3<f64> = eig.eigenvectors.column(order[1]).into_owned();
    if lex_greater(&v1, &v0) {
        v1
    } else {
        v0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix() {
        let a = Matrix3::from_diagonal(&Vector3::new(3.0, 1.0, 2.0));
        assert_eq!(eigenvalues(&a), [1.0, 2.0, 3.0]);
        let (l, v) = smallest_eigenpair(&a);
        assert_eq!(l, 1.0);
        assert!((v - Vector3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn matches_nalgebra() {
        let a = Matrix3::new(4.0, 1.0, -2.0, 1.0, 2.0, 0.5, -2.0, 0.5, 3.0);
        let ours = eigenvalues(&a);
        let mut theirs: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        for k in 0..3 {
            assert!((ours[k] - theirs[k]).abs() < 1e-12);
        }
        let (l, v) = smallest_eigenpair(&a);
        assert!((a * v - v * l).norm() < 1e-12);
    }

    #[test]
    fn repeated_smallest_is_deterministic() {
        // Eigenvalues {1, 1, 5}.
        let a = Matrix3::new(1.0, 0.0, 0.0, 0.0, 3.0, 2.0, 0.0, 2.0, 3.0);
        let (l, v) = smallest_eigenpair(&a);
        assert!((l - 1.0).abs() < 1e-12);
        assert!((a * v - v).norm() < 1e-12);
        assert_eq!(smallest_eigenpair(&a).1, v);
    }
}
