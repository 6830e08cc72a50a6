//! Eigendecomposition backends.
//!
//! Thin wrappers around nalgebra's complex Schur form, hermitian
//! eigendecomposition, SVD and LU, with the orderings and certification
//! residuals the rest of the crate relies on. Eigenvalues are always
//! reported in lexicographic order by (re, im) so outputs are deterministic.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mat::CMatrix;

const SCHUR_EPS: f64 = 1e-14;
const SCHUR_MAX_ITER: usize = 200_000;

pub(crate) fn largest_singular_value(a: &CMatrix) -> f64 {
    a.as_inner().clone().singular_values().max()
}

pub(crate) fn inverse(a: &CMatrix, op: &'static str) -> Result<CMatrix> {
    a.require_square(op)?;
    let lu = a.as_inner().clone().lu();
    match lu.try_inverse() {
        Some(inv) => Ok(CMatrix::from_inner(inv)),
        None => Err(Error::Singular { op, sigma_min: 0.0, tol: 0.0 }),
    }
}

/// Hermitian eigendecomposition with eigenpairs sorted by ascending
/// eigenvalue. The input is symmetrized first; callers are responsible for
/// checking self-adjointness when it matters.
pub(crate) fn herm_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.rows();
    let h = (a.as_inner() + a.as_inner().adjoint()).scale(0.5);
    let se = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut u = DMatrix::<Complex64>::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        u.set_column(col, &se.eigenvectors.column(i));
    }
    (vals, CMatrix::from_inner(u))
}

fn lex_cmp(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap()
        .then(a.im.partial_cmp(&b.im).unwrap())
}

fn is_hermitian_enough(a: &CMatrix) -> bool {
    let defect = (a - &a.adjoint()).hs_norm();
    defect <= 1e-13 * a.hs_norm().max(1.0)
}

/// Complex Schur form `a = Q T Q^*` with `T` upper triangular.
///
/// nalgebra's iteration can reject matrices that are already (近) triangular,
/// such as the zero matrix; a small random unitary similarity fixes that, and
/// the returned factors always refer to the original matrix.
fn schur(a: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = a.rows();
    if n <= 1 {
        return Ok((CMatrix::identity(n), a.clone()));
    }
    if let Some(s) = a.as_inner().clone().try_schur(SCHUR_EPS, SCHUR_MAX_ITER) {
        let (q, t) = s.unpack();
        return Ok((CMatrix::from_inner(q), CMatrix::from_inner(t)));
    }
    // Retry after conjugating by a fixed full unitary.
    let w = fixed_unitary(n);
    let b = w.adjoint().as_inner() * a.as_inner() * w.as_inner();
    if let Some(s) = b.try_schur(SCHUR_EPS, SCHUR_MAX_ITER) {
        let (q, t) = s.unpack();
        let q = w.as_inner() * q;
        return Ok((CMatrix::from_inner(q), CMatrix::from_inner(t)));
    }
    Err(Error::NonConvergence { op: "schur" })
}

/// A deterministic dense unitary (eigenvectors of a fixed hermitian matrix).
fn fixed_unitary(n: usize) -> CMatrix {
    let h = CMatrix::from_fn(n, n, |i, j| {
        let re = ((i * 31 + j * 17 + 3) % 23) as f64 - 11.0;
        let im = (i as f64 - j as f64) * 0.7;
        Complex64::new(re, if i < j { im } else { -im }) / 23.0
    });
    let (_, u) = herm_eigen(&h);
    u
}

/// Eigenvalues of a general square matrix, each with a certification
/// residual: the per-column residual of `aQ - QT` from the Schur form. The
/// values are sorted lexicographically by (re, im).
pub(crate) fn eigenvalues_general(a: &CMatrix) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let n = a.rows();
    if n == 0 {
        return Ok((vec![], vec![]));
    }
    if is_hermitian_enough(a) {
        let (vals, u) = herm_eigen(a);
        let au = a.as_inner() * u.as_inner();
        let mut residuals = Vec::with_capacity(n);
        for j in 0..n {
            let col = au.column(j) - u.as_inner().column(j).scale(vals[j]);
            residuals.push(col.norm());
        }
        let cvals: Vec<Complex64> = vals.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        return Ok((cvals, residuals));
    }
    let (q, t) = schur(a)?;
    let resid = a.as_inner() * q.as_inner() - q.as_inner() * t.as_inner();
    let mut pairs: Vec<(Complex64, f64)> = (0..n)
        .map(|j| (t[(j, j)], resid.column(j).norm()))
        .collect();
    pairs.sort_by(|x, y| lex_cmp(&x.0, &y.0));
    Ok(pairs.into_iter().unzip())
}

/// Group indices of near-equal complex values; two values land in the same
/// cluster when connected by a chain of gaps <= `radius`. Clusters come out
/// sorted by their lexicographically smallest member.
pub(crate) fn cluster_values(vals: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = vals.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (vals[i] - vals[j]).norm() <= radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by(|g, h| lex_cmp(&vals[g[0]], &vals[h[0]]));
    out
}

/// Unitary diagonalization `a = U diag(vals) U^*` of a normal matrix.
///
/// Runs the Schur route: for normal input the triangular factor is
/// numerically diagonal and the Schur basis is the eigenbasis. Eigenvalues
/// within `cluster_radius` of each other are snapped to their cluster mean,
/// and the result is certified by the residual `||aU - U diag||`, which must
/// stay below `max_residual`.
pub(crate) fn diagonalize_normal(
    a: &CMatrix,
    cluster_radius: f64,
    max_residual: f64,
) -> Result<(Vec<Complex64>, CMatrix)> {
    let n = a.rows();
    let (vals, u) = if is_hermitian_enough(a) {
        let (rv, u) = herm_eigen(a);
        (rv.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>(), u)
    } else {
        let (q, t) = schur(a)?;
        let vals: Vec<Complex64> = (0..n).map(|j| t[(j, j)]).collect();
        (vals, q)
    };

    // Snap values within a cluster to the cluster mean, then sort eigenpairs.
    let clusters = cluster_values(&vals, cluster_radius);
    let mut snapped = vals.clone();
    for cl in &clusters {
        let mean = cl.iter().map(|&i| vals[i]).sum::<Complex64>() / cl.len() as f64;
        for &i in cl {
            snapped[i] = mean;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| lex_cmp(&snapped[i], &snapped[j]));
    let sorted_vals: Vec<Complex64> = order.iter().map(|&i| snapped[i]).collect();
    let mut usorted = DMatrix::<Complex64>::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        usorted.set_column(col, &u.as_inner().column(i));
    }
    let u = CMatrix::from_inner(usorted);

    let lam = CMatrix::diag(&sorted_vals);
    let residual = (&(a * &u) - &(&u * &lam)).hs_norm();
    if residual > max_residual {
        return Err(Error::NotNormal {
            op: "diagonalize_normal",
            defect: residual,
            tol: max_residual,
        });
    }
    Ok((sorted_vals, u))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_matrix_has_zero_spectrum() {
        let z = CMatrix::zeros(3, 3);
        let (vals, _) = eigenvalues_general(&z).unwrap();
        assert!(vals.iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn nilpotent_spectrum() {
        let a = CMatrix::from_real(2, 2, &[0., 1., 0., 0.]).unwrap();
        let (vals, res) = eigenvalues_general(&a).unwrap();
        assert!(vals.iter().all(|v| v.norm() < 1e-10));
        assert!(res.iter().all(|&r| r < 1e-10));
    }

    #[test]
    fn hermitian_route_sorted() {
        let a = CMatrix::from_real(2, 2, &[2., 1., 1., 2.]).unwrap();
        let (vals, _) = eigenvalues_general(&a).unwrap();
        assert!((vals[0] - c(1., 0.)).norm() < 1e-12);
        assert!((vals[1] - c(3., 0.)).norm() < 1e-12);
    }

    #[test]
    fn normal_diagonalization_of_unitary() {
        // diag(1, i) conjugated by a rotation is normal but not hermitian.
        let r = CMatrix::from_real(2, 2, &[0.6, -0.8, 0.8, 0.6]).unwrap();
        let d = CMatrix::diag(&[c(1., 0.), c(0., 1.)]);
        let a = &(&r * &d) * &r.adjoint();
        let (vals, u) = diagonalize_normal(&a, 1e-9, 1e-9).unwrap();
        assert!((vals[0] - c(0., 1.)).norm() < 1e-10);
        assert!((vals[1] - c(1., 0.)).norm() < 1e-10);
        let uut = &u * &u.adjoint();
        assert!((&uut - &CMatrix::identity(2)).hs_norm() < 1e-10);
    }

    #[test]
    fn cluster_groups_repeated_values() {
        let vals = vec![c(1., 0.), c(0., 0.), c(1. + 1e-12, 0.), c(2., 0.)];
        let cl = cluster_values(&vals, 1e-9);
        assert_eq!(cl.len(), 3);
        assert_eq!(cl[0], vec![1]);
        assert_eq!(cl[1], vec![0, 2]);
        assert_eq!(cl[2], vec![3]);
    }
}
