//! Small dense linear-algebra helpers shared by the geometry modules.

use nalgebra::{Cholesky, SymmetricEigen, SVD};

use crate::{Matrix, Vector};

pub(crate) fn inner(g: &Matrix, u: &Vector, v: &Vector) -> f64 {
    u.dot(&(g * v))
}

pub(crate) fn norm(g: &Matrix, u: &Vector) -> f64 {
    inner(g, u, u).max(0.0).sqrt()
}

/// Orthogonal projection onto the span of a `g`-orthonormal family.
pub(crate) fn project(g: &Matrix, basis: &[Vector], v: &Vector) -> Vector {
    let gv = g * v;
    let mut out = Vector::zeros(v.len());
    for b in basis {
        out.axpy(b.dot(&gv), b, 1.0);
    }
    out
}

pub(crate) fn reject(g: &Matrix, basis: &[Vector], v: &Vector) -> Vector {
    v - project(g, basis, v)
}

/// Modified Gram-Schmidt in the `g` inner product. Returns `None` when a vector
/// loses more than all but `min_norm` of its length to earlier ones.
pub(crate) fn gram_schmidt(g: &Matrix, vectors: &[Vector], min_norm: f64) -> Option<Vec<Vector>> {
    let mut out: Vec<Vector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let scale = norm(g, v);
        let mut w = v.clone();
        for b in &out {
            let c = inner(g, b, &w);
            w.axpy(-c, b, 1.0);
        }
        let n = norm(g, &w);
        if !(n > min_norm * scale.max(f64::MIN_POSITIVE)) || n == 0.0 {
            return None;
        }
        out.push(w / n);
    }
    Some(out)
}

/// Orthonormal basis of the span of `vectors`, dropping (near) dependent ones.
pub(crate) fn span_basis(g: &Matrix, vectors: &[Vector], drop_tol: f64) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for b in &out {
            let c = inner(g, b, &w);
            w.axpy(-c, b, 1.0);
        }
        let n = norm(g, &w);
        if n > drop_tol {
            out.push(w / n);
        }
    }
    out
}

/// Extends a `g`-orthonormal family by `count` vectors drawn from the coordinate
/// basis, picking at every step the candidate with the largest remainder (lowest
/// index on ties). Deterministic for identical input.
pub(crate) fn complete(g: &Matrix, basis: &[Vector], count: usize) -> Vec<Vector> {
    let dim = g.nrows();
    let candidates: Vec<Vector> = (0..dim)
        .map(|j| {
            let mut e = Vector::zeros(dim);
            e[j] = 1.0;
            e
        })
        .collect();
    complete_from(g, basis, &candidates, count)
}

/// Same as [`complete`] with an explicit candidate list.
pub(crate) fn complete_from(g: &Matrix, basis: &[Vector], candidates: &[Vector], count: usize) -> Vec<Vector> {
    let mut all: Vec<Vector> = basis.to_vec();
    let mut added = Vec::with_capacity(count);
    for _ in 0..count {
        let mut best: Option<(f64, Vector)> = None;
        for c in candidates {
            let mut w = c.clone();
            // two passes keep the remainder orthogonal to working precision
            for _ in 0..2 {
                for b in &all {
                    let c = inner(g, b, &w);
                    w.axpy(-c, b, 1.0);
                }
            }
            let n = norm(g, &w);
            if best.as_ref().is_none_or(|(bn, _)| n > *bn) {
                best = Some((n, w));
            }
        }
        let Some((n, w)) = best.filter(|(n, _)| *n > 0.0) else {
            break;
        };
        let mut v = w / n;
        canonical_sign(&mut v);
        all.push(v.clone());
        added.push(v);
    }
    added
}

/// Flips `v` so that its largest-magnitude component (first one on near ties) is positive.
pub(crate) fn canonical_sign(v: &mut Vector) {
    let max = v.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if max == 0.0 {
        return;
    }
    if let Some(c) = v.iter().find(|c| c.abs() >= max - 1e-12 * max) {
        if *c < 0.0 {
            v.neg_mut();
        }
    }
}

pub(crate) fn smallest_eigenvalue(sym: &Matrix) -> f64 {
    if sym.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(sym.clone())
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, v| m.min(*v))
}

/// `g = L L^T`; returns `L^{-T}`, which maps Euclidean-orthonormal coordinates to
/// `g`-orthonormal vectors.
pub(crate) fn inverse_transpose_factor(g: &Matrix) -> Option<(Matrix, Matrix)> {
    let chol = Cholesky::new(g.clone())?;
    let l = chol.l();
    let l_inv = l.clone().try_inverse()?;
    Some((l, l_inv.transpose()))
}

pub(crate) fn inverse_spd(g: &Matrix) -> Option<Matrix> {
    Cholesky::new(g.clone()).map(|c| c.inverse())
}

/// Singular values (descending) and the full set of right singular vectors
/// (columns, in the same order) of an `n x m` matrix.
pub(crate) fn sorted_svd(a: &Matrix) -> (Vec<f64>, Matrix) {
    let (n, m) = a.shape();
    let mut padded = Matrix::zeros(n.max(m), m);
    padded.view_mut((0, 0), (n, m)).copy_from(a);
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut v = Matrix::zeros(m, m);
    for (col, &i) in order.iter().enumerate() {
        v.set_column(col, &v_t.row(i).transpose());
    }
    (sigma, v)
}

/// Number of singular values above `rel_tol * sigma_max`.
pub(crate) fn rank_from_singular_values(sigma: &[f64], rel_tol: f64) -> usize {
    let max = sigma.iter().fold(0.0_f64, |m, s| m.max(*s));
    if !(max > f64::MIN_POSITIVE) {
        return 0;
    }
    sigma.iter().filter(|s| **s > rel_tol * max).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_schmidt_in_weighted_metric() {
        let g = Matrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let vs = vec![Vector::from_vec(vec![1.0, 0.0]), Vector::from_vec(vec![0.0, 1.0])];
        let basis = gram_schmidt(&g, &vs, 1e-8).unwrap();
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((inner(&g, a, b) - want).abs() < 1e-14);
            }
        }
        let dependent = vec![vs[0].clone(), vs[0].clone() * 3.0];
        assert!(gram_schmidt(&g, &dependent, 1e-8).is_none());
    }

    #[test]
    fn completion_fills_the_orthogonal_complement() {
        let g = Matrix::identity(3, 3);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let basis = vec![Vector::from_vec(vec![s, s, 0.0])];
        let extra = complete(&g, &basis, 2);
        assert_eq!(extra.len(), 2);
        assert!(extra.iter().all(|v| inner(&g, v, &basis[0]).abs() < 1e-15));
        assert!((inner(&g, &extra[0], &extra[1])).abs() < 1e-15);
        assert_eq!(extra[0], Vector::from_vec(vec![0.0, 0.0, 1.0]));
    }

    #[test]
    fn svd_is_sorted_and_complete() {
        let a = Matrix::from_row_slice(1, 3, &[0.0, 2.0, 0.0]);
        let (sigma, v) = sorted_svd(&a);
        assert_eq!(sigma.len(), 3);
        assert!((sigma[0] - 2.0).abs() < 1e-15);
        assert!(sigma[1].abs() < 1e-15 && sigma[2].abs() < 1e-15);
        assert!((v.column(0)[1].abs() - 1.0).abs() < 1e-15);
        assert_eq!(rank_from_singular_values(&sigma[..1], 1e-8), 1);
        assert_eq!(rank_from_singular_values(&[0.0, 0.0], 1e-8), 0);
    }

    #[test]
    fn sign_convention() {
        let mut v = Vector::from_vec(vec![-0.5, 0.5, -0.1]);
        canonical_sign(&mut v);
        assert_eq!(v[0], 0.5);
    }
}
