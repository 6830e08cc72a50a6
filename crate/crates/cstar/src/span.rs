//! Linear-span utilities in matrix space.
//!
//! Matrices are treated as vectors under the Hilbert-Schmidt inner product.
//! Rank decisions go through modified Gram-Schmidt with a reorthogonalization
//! pass, or through hermitian eigenvalues of an accumulated Gram matrix; both
//! judge "zero" against the shared tolerance policy.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::eig;
use crate::error::{Error, Result};
use crate::mat::CMatrix;
use crate::tol::Tolerance;

/// Orthonormalize candidate matrices (HS inner product) by modified
/// Gram-Schmidt with one reorthogonalization pass. A candidate is dependent,
/// and dropped, when its residual norm falls below the effective tolerance
/// for its own norm.
pub(crate) fn orthonormalize_hs(
    candidates: &[CMatrix],
    ambient: usize,
    tol: &Tolerance,
) -> Vec<CMatrix> {
    let mut basis: Vec<CMatrix> = Vec::new();
    for cand in candidates {
        if let Some(next) = extend_basis(&mut basis, cand, ambient, tol) {
            basis.push(next);
        }
    }
    basis
}

/// Project `cand` off `basis`; returns the normalized residual if it is
/// independent. Does not push.
pub(crate) fn extend_basis(
    basis: &mut Vec<CMatrix>,
    cand: &CMatrix,
    ambient: usize,
    tol: &Tolerance,
) -> Option<CMatrix> {
    let thresh = tol.effective(cand.hs_norm(), ambient);
    let mut r = cand.clone();
    for _pass in 0..2 {
        for b in basis.iter() {
            let c = b.hs_inner(&r);
            r = &r - &b.scaled(c);
        }
    }
    let nrm = r.hs_norm();
    if nrm > thresh {
        Some(r.scaled(Complex64::new(1.0 / nrm, 0.0)))
    } else {
        None
    }
}

/// Coordinates of `x` against an HS-orthonormal basis, plus the residual of
/// the reconstruction.
pub(crate) fn coords_in_basis(x: &CMatrix, basis: &[CMatrix]) -> (Vec<Complex64>, f64) {
    let coords: Vec<Complex64> = basis.iter().map(|b| b.hs_inner(x)).collect();
    let mut r = x.clone();
    for (b, c) in basis.iter().zip(&coords) {
        r = &r - &b.scaled(*c);
    }
    (coords, r.hs_norm())
}

/// Orthonormal basis of the joint null space of the PSD Gram matrix
/// `g = sum_k M_k^* M_k` of some family of linear maps.
///
/// The eigenvalue threshold is the effective tolerance scaled by the largest
/// eigenvalue; a multiplicative gap of 10 between kept and dropped
/// eigenvalues is enforced so rank decisions never silently straddle noise.
pub(crate) fn gram_null_basis(
    gram: &CMatrix,
    tol: &Tolerance,
    op: &'static str,
) -> Result<Vec<Vec<Complex64>>> {
    let d = gram.rows();
    let (vals, u) = eig::herm_eigen(gram);
    let lam_max = vals.last().copied().unwrap_or(0.0).max(0.0);
    let thresh = tol.effective(1.0, d) * lam_max.max(1.0);
    let cut = vals.partition_point(|&v| v <= thresh);
    if cut < d && cut > 0 && vals[cut] < 10.0 * vals[cut - 1].max(thresh / 10.0) {
        return Err(Error::RankGap { op, low: vals[cut - 1], high: vals[cut] });
    }
    let mut out = Vec::with_capacity(cut);
    for j in 0..cut {
        out.push((0..d).map(|i| u[(i, j)]).collect());
    }
    Ok(out)
}

/// Rank of a family of coefficient vectors, decided by Gram eigenvalues
/// under the same policy as [`gram_null_basis`].
pub(crate) fn vector_rank(
    vectors: &[Vec<Complex64>],
    tol: &Tolerance,
    op: &'static str,
) -> Result<usize> {
    let k = vectors.len();
    if k == 0 {
        return Ok(0);
    }
    let gram = CMatrix::from_fn(k, k, |i, j| {
        vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a.conj() * b).sum()
    });
    let null = gram_null_basis(&gram, tol, op)?;
    Ok(k - null.len())
}

/// The linear map `T -> aT - Tb` on row-major vectorized matrices, as an
/// `n^2 x n^2` matrix: `a (x) I - I (x) b^T`.
pub(crate) fn sylvester_op(a: &CMatrix, b: &CMatrix) -> DMatrix<Complex64> {
    let n = a.rows();
    let id = CMatrix::identity(n);
    let left = a.kron(&id);
    let bt = CMatrix::from_fn(n, n, |i, j| b[(j, i)]);
    let right = id.kron(&bt);
    left.as_inner() - right.as_inner()
}
