//! Spectra and operator classification.

use num_complex::Complex64;
use serde::Serialize;

use crate::eig;
use crate::error::Result;
use crate::mat::CMatrix;
use crate::tol::Tolerance;

/// The spectrum of a square matrix.
///
/// Eigenvalues are listed with multiplicity in lexicographic (re, im) order.
/// Each comes with a certification residual (the per-column residual of the
/// Schur or hermitian eigendecomposition it was read off from). For normal
/// input a unitary diagonalizer is cached so the functional calculus can
/// reuse it.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub residuals: Vec<f64>,
    /// Unitary `U` with `a = U diag(eigenvalues) U^*`, present iff the input
    /// is normal within tolerance.
    pub diagonalizer: Option<CMatrix>,
}

impl Spectrum {
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Eigenvalues with multiplicity; diagonalization cached for normal input.
pub fn spectrum(a: &CMatrix, tol: &Tolerance) -> Result<Spectrum> {
    a.require_square("spectrum")?;
    a.check_finite("spectrum")?;
    let n = a.rows();
    let eff = tol.effective(a.hs_norm(), n);

    let normal_defect = commutator_defect(a);
    if normal_defect <= eff {
        let (vals, u) = eig::diagonalize_normal(a, eff, eff.max(1e-12))?;
        let au = a.as_inner() * u.as_inner();
        let residuals: Vec<f64> = (0..n)
            .map(|j| (au.column(j).into_owned() - u.as_inner().column(j).into_owned() * vals[j]).norm())
            .collect();
        Ok(Spectrum { eigenvalues: vals, residuals, diagonalizer: Some(u) })
    } else {
        let (vals, residuals) = eig::eigenvalues_general(a)?;
        Ok(Spectrum { eigenvalues: vals, residuals, diagonalizer: None })
    }
}

fn commutator_defect(a: &CMatrix) -> f64 {
    let aa = &(a * &a.adjoint()) - &(&a.adjoint() * a);
    aa.hs_norm()
}

/// Flags describing which defining operator identities hold within the
/// effective tolerance. The flags are not exclusive: the identity matrix is
/// simultaneously self-adjoint, normal, unitary, a projection, an isometry
/// and (trivially) a partial isometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassFlags {
    pub selfadjoint: bool,
    pub normal: bool,
    pub unitary: bool,
    pub projection: bool,
    pub isometry: bool,
    pub partial_isometry: bool,
}

/// Classify a square matrix against the standard special-element identities.
pub fn classify(a: &CMatrix, tol: &Tolerance) -> Result<ClassFlags> {
    a.require_square("classify")?;
    a.check_finite("classify")?;
    let n = a.rows();
    let eff = tol.effective(a.hs_norm(), n);
    let id = CMatrix::identity(n);
    let astar = a.adjoint();
    let astar_a = &astar * a;
    let a_astar = a * &astar;

    let selfadjoint = (a - &astar).hs_norm() <= eff;
    let normal = (&astar_a - &a_astar).hs_norm() <= eff;
    let isometry = (&astar_a - &id).hs_norm() <= eff;
    let unitary = isometry && (&a_astar - &id).hs_norm() <= eff;
    let projection = selfadjoint && (&(a * a) - a).hs_norm() <= eff;
    // v is a partial isometry iff v*v is a projection; v*v is always
    // self-adjoint so only the idempotency is at stake.
    let vv = &astar_a;
    let partial_isometry = (&(vv * vv) - vv).hs_norm() <= eff;

    Ok(ClassFlags { selfadjoint, normal, unitary, projection, isometry, partial_isometry })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn projection_spectrum_is_zero_one() {
        let p = CMatrix::diag(&[c(1., 0.), c(1., 0.), c(0., 0.)]);
        let s = spectrum(&p, &tol()).unwrap();
        let vals: Vec<f64> = s.eigenvalues.iter().map(|z| z.re).collect();
        assert_eq!(s.eigenvalues.len(), 3);
        assert!((vals[0] - 0.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        assert!((vals[2] - 1.0).abs() < 1e-12);
        assert!(s.diagonalizer.is_some());
    }

    #[test]
    fn unitary_spectrum_on_circle() {
        let u = CMatrix::diag(&[c(1., 0.), c(0., 1.)]);
        let s = spectrum(&u, &tol()).unwrap();
        for z in &s.eigenvalues {
            assert!((z.norm() - 1.0).abs() < 1e-12);
        }
        assert!(s.eigenvalues.iter().any(|z| (z - c(0., 1.)).norm() < 1e-12));
    }

    #[test]
    fn symmetric_two_by_two_oracle() {
        // char poly of [[2,1],[1,2]] is l^2 - 4l + 3 = (l-1)(l-3).
        let a = CMatrix::from_real(2, 2, &[2., 1., 1., 2.]).unwrap();
        let s = spectrum(&a, &tol()).unwrap();
        assert!((s.eigenvalues[0] - c(1., 0.)).norm() < 1e-10);
        assert!((s.eigenvalues[1] - c(3., 0.)).norm() < 1e-10);
    }

    #[test]
    fn rejects_non_square() {
        let a = CMatrix::zeros(2, 3);
        assert!(spectrum(&a, &tol()).is_err());
    }

    #[test]
    fn classify_identity() {
        let f = classify(&CMatrix::identity(2), &tol()).unwrap();
        assert!(f.selfadjoint && f.normal && f.unitary && f.projection && f.isometry);
        assert!(f.partial_isometry);
    }

    #[test]
    fn classify_matrix_unit() {
        // [[0,1],[0,0]]: v*v = diag(0,1) is a projection, nothing else holds.
        let v = CMatrix::from_real(2, 2, &[0., 1., 0., 0.]).unwrap();
        let f = classify(&v, &tol()).unwrap();
        assert!(f.partial_isometry);
        assert!(!f.selfadjoint && !f.normal && !f.unitary && !f.projection && !f.isometry);
    }

    #[test]
    fn classify_non_projection_idempotent() {
        let e = CMatrix::from_real(2, 2, &[1., 1., 0., 0.]).unwrap();
        let f = classify(&e, &tol()).unwrap();
        assert!(!f.projection && !f.selfadjoint && !f.partial_isometry);
    }
}
