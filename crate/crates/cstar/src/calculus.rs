//! Spectral radius, positivity, square roots and the continuous functional
//! calculus for normal matrices.

use num_complex::Complex64;

use crate::eig;
use crate::error::{Error, Result};
use crate::mat::CMatrix;
use crate::spectral::spectrum;
use crate::tol::Tolerance;

/// How to compute a spectral radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralRadiusMethod {
    /// max |eigenvalue|.
    Eig,
    /// `||a^n||^(1/n)` by repeated squaring; `n` is rounded up to the next
    /// power of two so norm drift never accumulates along odd powers.
    PowerNorm { n_max: u32 },
}

pub fn spectral_radius(a: &CMatrix, method: SpectralRadiusMethod, tol: &Tolerance) -> Result<f64> {
    a.require_square("spectral_radius")?;
    match method {
        SpectralRadiusMethod::Eig => Ok(spectrum(a, tol)?.spectral_radius()),
        SpectralRadiusMethod::PowerNorm { n_max } => {
            if n_max < 1 {
                return Err(Error::InvalidArgument {
                    op: "spectral_radius",
                    detail: "power_norm requires n_max >= 1".into(),
                });
            }
            let n = n_max.next_power_of_two();
            // Invariant: power = a^k / exp(k * acc). Rescaling each squaring
            // step keeps huge or tiny powers from overflowing; the scale is
            // carried in log space.
            let mut power = a.clone();
            let mut k = 1u32;
            let mut acc = 0.0f64;
            while k < n {
                let nrm = power.op_norm();
                if nrm == 0.0 {
                    return Ok(0.0);
                }
                power = power.scaled(Complex64::new(1.0 / nrm, 0.0));
                acc += nrm.ln() / k as f64;
                power = &power * &power;
                k *= 2;
            }
            let final_norm = power.op_norm();
            if final_norm == 0.0 {
                return Ok(0.0);
            }
            Ok((acc + final_norm.ln() / n as f64).exp())
        }
    }
}

/// True iff `a` is self-adjoint within tolerance and its minimal eigenvalue
/// is >= -tolerance.
pub fn is_positive(a: &CMatrix, tol: &Tolerance) -> Result<bool> {
    a.require_square("is_positive")?;
    a.check_finite("is_positive")?;
    let eff = tol.effective(a.hs_norm(), a.rows());
    if (a - &a.adjoint()).hs_norm() > eff {
        return Ok(false);
    }
    let (vals, _) = eig::herm_eigen(a);
    Ok(vals.first().map_or(true, |&lo| lo >= -eff))
}

/// The unique positive square root of a positive matrix.
///
/// Eigenvalues in `[-tol, 0)` are clamped to zero before taking roots, since
/// positivity is only certified up to tolerance.
pub fn sqrt_positive(a: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    a.require_square("sqrt_positive")?;
    if !is_positive(a, tol)? {
        return Err(Error::NotPositive { op: "sqrt_positive" });
    }
    let (vals, u) = eig::herm_eigen(a);
    let roots: Vec<Complex64> = vals
        .iter()
        .map(|&v| Complex64::new(v.max(0.0).sqrt(), 0.0))
        .collect();
    let d = CMatrix::diag(&roots);
    Ok(&(&u * &d) * &u.adjoint())
}

/// A scalar function to feed the functional calculus.
///
/// Evaluation returns `None` where the function is undefined, which
/// `func_calc` reports as an error naming the offending eigenvalue.
pub struct ScalarFunction {
    name: String,
    f: Box<dyn Fn(Complex64) -> Option<Complex64>>,
}

impl ScalarFunction {
    pub fn new(name: impl Into<String>, f: impl Fn(Complex64) -> Option<Complex64> + 'static) -> Self {
        ScalarFunction { name: name.into(), f: Box::new(f) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, z: Complex64) -> Option<Complex64> {
        (self.f)(z)
    }

    /// z -> z.
    pub fn identity() -> Self {
        Self::new("id", Some)
    }

    pub fn constant_one() -> Self {
        Self::new("one", |_| Some(Complex64::new(1.0, 0.0)))
    }

    /// Square root on [0, oo); undefined off the ray. Eigenvalues that are
    /// only negative by rounding are accepted through the tolerance-aware
    /// clamping in `func_calc` (the caller sees them as 0).
    pub fn sqrt() -> Self {
        Self::new("sqrt", |z| {
            if z.im.abs() < SQRT_DOMAIN_SLACK && z.re >= -SQRT_DOMAIN_SLACK {
                Some(Complex64::new(z.re.max(0.0).sqrt(), 0.0))
            } else {
                None
            }
        })
    }

    pub fn exp() -> Self {
        Self::new("exp", |z| Some(z.exp()))
    }

    /// t -> exp(i t), the unitary generator on self-adjoint input.
    pub fn exp_i() -> Self {
        Self::new("exp_i", |z| Some((z * Complex64::i()).exp()))
    }

    /// Principal branch of log on C \ (-oo, 0]; inputs with an eigenvalue on
    /// the cut are rejected.
    pub fn log() -> Self {
        Self::new("log", |z| {
            if z.re <= LOG_CUT_SLACK && z.im.abs() <= LOG_CUT_SLACK {
                None
            } else {
                Some(z.ln())
            }
        })
    }

    pub fn abs() -> Self {
        Self::new("abs", |z| Some(Complex64::new(z.norm(), 0.0)))
    }

    /// Indicator of a finite set of points, matched within `radius`; yields
    /// spectral projections.
    pub fn indicator(points: Vec<Complex64>, radius: f64) -> Self {
        Self::new("indicator", move |z| {
            let inside = points.iter().any(|p| (z - p).norm() <= radius);
            Some(Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0))
        })
    }
}

const SQRT_DOMAIN_SLACK: f64 = 1e-8;
const LOG_CUT_SLACK: f64 = 1e-12;

impl std::fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ScalarFunction({})", self.name)
    }
}

/// Continuous functional calculus `f(a) = U f(diag) U^*` for normal `a`.
///
/// Eigenvalues are clustered at the effective tolerance and `f` is evaluated
/// once per cluster, at the cluster mean, so numerically split multiple
/// eigenvalues cannot be mapped to different values.
pub fn func_calc(a: &CMatrix, f: &ScalarFunction, tol: &Tolerance) -> Result<CMatrix> {
    a.require_square("func_calc")?;
    a.check_finite("func_calc")?;
    let n = a.rows();
    let eff = tol.effective(a.hs_norm(), n);
    let defect = (&(a * &a.adjoint()) - &(&a.adjoint() * a)).hs_norm();
    if defect > eff {
        return Err(Error::NotNormal { op: "func_calc", defect, tol: eff });
    }
    let (vals, u) = eig::diagonalize_normal(a, eff, eff.max(1e-12))?;
    // diagonalize_normal has already snapped cluster members to their mean,
    // so evaluating pointwise is evaluation at cluster representatives.
    let mut fvals = Vec::with_capacity(n);
    for &v in &vals {
        match f.eval(v) {
            Some(w) => fvals.push(w),
            None => {
                return Err(Error::FunctionUndefined {
                    op: "func_calc",
                    name: f.name().to_string(),
                    re: v.re,
                    im: v.im,
                })
            }
        }
    }
    let d = CMatrix::diag(&fvals);
    Ok(&(&u * &d) * &u.adjoint())
}

/// The unitary polar factor `u = a (a^* a)^(-1/2)` of an invertible matrix.
pub fn polar_unitary(a: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    a.require_square("polar_unitary")?;
    a.check_finite("polar_unitary")?;
    let n = a.rows();
    let eff = tol.effective(a.hs_norm(), n);
    let gram = &a.adjoint() * a;
    let (vals, u) = eig::herm_eigen(&gram);
    let sigma_min = vals.first().map_or(0.0, |&v| v.max(0.0).sqrt());
    if sigma_min <= eff {
        return Err(Error::Singular { op: "polar_unitary", sigma_min, tol: eff });
    }
    let inv_roots: Vec<Complex64> = vals
        .iter()
        .map(|&v| Complex64::new(1.0 / v.sqrt(), 0.0))
        .collect();
    let d = CMatrix::diag(&inv_roots);
    let inv_sqrt = &(&u * &d) * &u.adjoint();
    Ok(a * &inv_sqrt)
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
    fn spectral_radius_self_adjoint_matches_norm() {
        let a = CMatrix::from_real(2, 2, &[2., 1., 1., 2.]).unwrap();
        let r_eig = spectral_radius(&a, SpectralRadiusMethod::Eig, &tol()).unwrap();
        let r_pow =
            spectral_radius(&a, SpectralRadiusMethod::PowerNorm { n_max: 32 }, &tol()).unwrap();
        assert!((r_eig - 3.0).abs() < 1e-10);
        assert!((r_pow - 3.0).abs() < 1e-10);
        assert!((r_eig - a.op_norm()).abs() < 1e-10);
    }

    #[test]
    fn spectral_radius_nilpotent_and_diagonal() {
        let nil = CMatrix::from_real(2, 2, &[0., 1., 0., 0.]).unwrap();
        assert!(spectral_radius(&nil, SpectralRadiusMethod::Eig, &tol()).unwrap() < 1e-10);
        let d = CMatrix::diag(&[c(0., 1.), c(0., 2.)]);
        let r = spectral_radius(&d, SpectralRadiusMethod::Eig, &tol()).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn power_norm_rejects_zero_iterations() {
        let a = CMatrix::identity(2);
        assert!(spectral_radius(&a, SpectralRadiusMethod::PowerNorm { n_max: 0 }, &tol()).is_err());
    }

    #[test]
    fn positivity_of_gram_elements() {
        let x = CMatrix::from_real(2, 2, &[1., 2., 3., 4.]).unwrap();
        let g = &x.adjoint() * &x;
        assert!(is_positive(&g, &tol()).unwrap());
        assert!(!is_positive(&(-&CMatrix::identity(2)), &tol()).unwrap());
        // eigenvalues {1,3} by the characteristic-polynomial oracle
        let a = CMatrix::from_real(2, 2, &[2., 1., 1., 2.]).unwrap();
        assert!(is_positive(&a, &tol()).unwrap());
    }

    #[test]
    fn sqrt_positive_examples() {
        let d = CMatrix::diag(&[c(1., 0.), c(4., 0.)]);
        let r = sqrt_positive(&d, &tol()).unwrap();
        assert!((&r - &CMatrix::diag(&[c(1., 0.), c(2., 0.)])).hs_norm() < 1e-10);

        let z = CMatrix::zeros(2, 2);
        assert!(sqrt_positive(&z, &tol()).unwrap().hs_norm() < 1e-12);

        // Oracle: the claimed root squares back to the input.
        let a = CMatrix::from_real(2, 2, &[5., 4., 4., 5.]).unwrap();
        let b = sqrt_positive(&a, &tol()).unwrap();
        let expect = CMatrix::from_real(2, 2, &[2., 1., 1., 2.]).unwrap();
        assert!((&b - &expect).hs_norm() < 1e-9);
        assert!((&(&b * &b) - &a).hs_norm() < 1e-9);
        // root commutes with the input
        assert!((&(&b * &a) - &(&a * &b)).hs_norm() < 1e-9);

        assert!(sqrt_positive(&(-&CMatrix::identity(2)), &tol()).is_err());
    }

    #[test]
    fn func_calc_identity_and_one() {
        let a = CMatrix::from_real(2, 2, &[2., 1., 1., 2.]).unwrap();
        let ida = func_calc(&a, &ScalarFunction::identity(), &tol()).unwrap();
        assert!((&ida - &a).hs_norm() < 1e-10);
        let one = func_calc(&a, &ScalarFunction::constant_one(), &tol()).unwrap();
        assert!((&one - &CMatrix::identity(2)).hs_norm() < 1e-10);
    }

    #[test]
    fn func_calc_exp_i_is_unitary() {
        let a = CMatrix::from_real(2, 2, &[2., 1., 1., 2.]).unwrap();
        let u = func_calc(&a, &ScalarFunction::exp_i(), &tol()).unwrap();
        let id = CMatrix::identity(2);
        assert!((&(&u.adjoint() * &u) - &id).hs_norm() < 1e-10);
        assert!((&(&u * &u.adjoint()) - &id).hs_norm() < 1e-10);
    }

    #[test]
    fn func_calc_spectral_projection() {
        // Indicator of {3} on [[2,1],[1,2]]: projection onto span (1,1)/sqrt2.
        let a = CMatrix::from_real(2, 2, &[2., 1., 1., 2.]).unwrap();
        let f = ScalarFunction::indicator(vec![c(3., 0.)], 1e-6);
        let p = func_calc(&a, &f, &tol()).unwrap();
        let expect = CMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!((&p - &expect).hs_norm() < 1e-10);
    }

    #[test]
    fn func_calc_rejects_non_normal_and_bad_domain() {
        let nil = CMatrix::from_real(2, 2, &[0., 1., 0., 0.]).unwrap();
        assert!(func_calc(&nil, &ScalarFunction::exp(), &tol()).is_err());
        let neg = CMatrix::diag(&[c(-1., 0.), c(1., 0.)]);
        assert!(matches!(
            func_calc(&neg, &ScalarFunction::sqrt(), &tol()),
            Err(Error::FunctionUndefined { .. })
        ));
        assert!(matches!(
            func_calc(&neg, &ScalarFunction::log(), &tol()),
            Err(Error::FunctionUndefined { .. })
        ));
    }

    #[test]
    fn polar_unitary_examples() {
        // Unitary input is returned as-is.
        let u = CMatrix::diag(&[c(0., 1.), c(1., 0.)]);
        let pu = polar_unitary(&u, &tol()).unwrap();
        assert!((&pu - &u).hs_norm() < 1e-10);

        // Sign map on an invertible diagonal.
        let d = CMatrix::diag(&[c(3., 0.), c(-2., 0.)]);
        let pd = polar_unitary(&d, &tol()).unwrap();
        assert!((&pd - &CMatrix::diag(&[c(1., 0.), c(-1., 0.)])).hs_norm() < 1e-10);

        // |a| = diag(1,2) for [[0,2],[1,0]] by direct multiplication.
        let a = CMatrix::from_real(2, 2, &[0., 2., 1., 0.]).unwrap();
        let pa = polar_unitary(&a, &tol()).unwrap();
        let expect = CMatrix::from_real(2, 2, &[0., 1., 1., 0.]).unwrap();
        assert!((&pa - &expect).hs_norm() < 1e-10);

        // Singular input rejected.
        let s = CMatrix::diag(&[c(1., 0.), c(0., 0.)]);
        assert!(polar_unitary(&s, &tol()).is_err());
    }

    #[test]
    fn sigma_of_f_a_equals_f_of_sigma() {
        let a = CMatrix::diag(&[c(1., 0.), c(4., 0.), c(4., 0.)]);
        let fa = func_calc(&a, &ScalarFunction::sqrt(), &tol()).unwrap();
        let s = spectrum(&fa, &tol()).unwrap();
        let mut got: Vec<f64> = s.eigenvalues.iter().map(|z| z.re).collect();
        got.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (g, e) in got.iter().zip(&[1.0, 2.0, 2.0]) {
            assert!((g - e).abs() < 1e-10);
        }
    }
}
