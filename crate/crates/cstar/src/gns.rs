//! States and the GNS construction, irreducibility via Schur's lemma, and
//! decomposition of representations into irreducibles.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{unit_vec, MatrixAlgebra};
use crate::eig;
use crate::error::{Error, Result};
use crate::mat::CMatrix;
use crate::span;
use crate::tol::Tolerance;

/// A state on a matrix algebra: the coefficients `phi(b_i)` of a positive
/// normalized functional against the algebra's orthonormal basis.
///
/// Certification happens in [`make_state`]: the Gram matrix
/// `G_ij = phi(b_i^* b_j)` must be positive semidefinite and, for a unital
/// algebra, `phi(1) = 1`.
#[derive(Debug, Clone)]
pub struct State<'a> {
    algebra: &'a MatrixAlgebra,
    values: Vec<Complex64>,
    gram: CMatrix,
}

impl<'a> State<'a> {
    pub fn algebra(&self) -> &'a MatrixAlgebra {
        self.algebra
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `phi` applied to an element given in coordinates.
    pub fn apply(&self, coords: &[Complex64]) -> Complex64 {
        coords.iter().zip(&self.values).map(|(c, v)| c * v).sum()
    }

    /// The sesquilinear form `phi(x^* y)` on coordinate vectors
    /// (conjugate-linear in `x`).
    pub fn pairing(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for i in 0..x.len() {
            for j in 0..y.len() {
                acc += x[i].conj() * y[j] * self.gram[(i, j)];
            }
        }
        acc
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }
}

/// Result of the GNS construction for a state.
#[derive(Debug, Clone, Serialize)]
pub struct GnsResult {
    pub hilbert_dim: usize,
    /// Images of the algebra's basis elements on the GNS space.
    pub rep: Vec<CMatrix>,
    /// The cyclic vector Omega (the class of the unit).
    pub cyclic_vector: Vec<Complex64>,
    /// The certified Gram matrix `phi(b_i^* b_j)`.
    pub gram: CMatrix,
    /// Worst defect of `phi(b) = <pi(b) Omega | Omega>` over the basis.
    pub reconstruction_residual: f64,
    /// Worst *-homomorphism defect of the representation.
    pub hom_residual: f64,
}

/// Certify a functional as a state: Gram PSD, and `phi(1) = 1` when the
/// algebra is unital.
pub fn make_state(algebra: &MatrixAlgebra, values: Vec<Complex64>) -> Result<State<'_>> {
    let op = "make_state";
    let d = algebra.dim();
    if values.len() != d {
        return Err(Error::ShapeMismatch {
            op,
            detail: format!("{} values for an algebra of dimension {d}", values.len()),
        });
    }
    let tol = *algebra.tolerance();
    let gram = state_gram(algebra, &values);
    let herm_defect = (&gram - &gram.adjoint()).hs_norm();
    if herm_defect > tol.effective(gram.hs_norm(), d) {
        return Err(Error::NotState {
            op,
            detail: format!("Gram matrix is not hermitian (defect {herm_defect:.3e})"),
        });
    }
    let (eigs, _) = eig::herm_eigen(&gram);
    let low = eigs.first().copied().unwrap_or(0.0);
    if low < -tol.effective(gram.hs_norm(), d) {
        return Err(Error::NotState {
            op,
            detail: format!("Gram matrix has negative eigenvalue {low:.3e}"),
        });
    }
    if algebra.is_unital() {
        let one = algebra.coords_of(&CMatrix::identity(algebra.ambient_dim()))?;
        let phi_one: Complex64 = one.iter().zip(&values).map(|(c, v)| c * v).sum();
        if (phi_one - Complex64::new(1.0, 0.0)).norm() > tol.effective(1.0, d) {
            return Err(Error::NotState {
                op,
                detail: format!("phi(1) = {phi_one} instead of 1"),
            });
        }
    }
    Ok(State { algebra, values, gram })
}

fn state_gram(algebra: &MatrixAlgebra, values: &[Complex64]) -> CMatrix {
    let d = algebra.dim();
    CMatrix::from_fn(d, d, |i, j| {
        // coords of b_i^* b_j, paired with the functional
        let star_i = algebra.star_coords(&unit_vec(d, i));
        let prod = algebra.mul_coords(&star_i, &unit_vec(d, j));
        prod.iter().zip(values).map(|(c, v)| c * v).sum()
    })
}

/// The GNS construction for a certified state on a unital algebra.
///
/// The Hilbert space is the range of `gram^(1/2)`: eigenpairs of the Gram
/// matrix above the tolerance survive, which realizes the quotient by the
/// null space of `phi(x^* x)`. The representation is left multiplication
/// pushed through that truncation, and Omega is the class of the unit.
pub fn gns_construct(state: &State<'_>) -> Result<GnsResult> {
    let op = "gns_construct";
    let algebra = state.algebra;
    if !algebra.is_unital() {
        return Err(Error::NotUnital { op });
    }
    let tol = *algebra.tolerance();
    let d = algebra.dim();
    let gram = &state.gram;

    let (eigs, v) = eig::herm_eigen(gram);
    let lam_max = eigs.last().copied().unwrap_or(0.0).max(0.0);
    let thresh = tol.effective(1.0, d) * lam_max.max(1.0);
    let kept: Vec<usize> = (0..d).filter(|&i| eigs[i] > thresh).collect();
    // Rank-gap guard, same policy as the span machinery.
    if let Some(&first) = kept.first() {
        if first > 0 && eigs[first] < 10.0 * eigs[first - 1].max(thresh / 10.0) {
            return Err(Error::RankGap { op, low: eigs[first - 1], high: eigs[first] });
        }
    }
    let r = kept.len();
    if r == 0 {
        return Err(Error::NotState { op, detail: "state is identically zero".into() });
    }

    // T = diag(sqrt(lam)) V^H maps coordinates onto the GNS space C^r;
    // T Tplus = I_r.
    let mut t = DMatrix::<Complex64>::zeros(r, d);
    let mut tplus = DMatrix::<Complex64>::zeros(d, r);
    for (row, &i) in kept.iter().enumerate() {
        let s = eigs[i].sqrt();
        for k in 0..d {
            t[(row, k)] = v[(k, i)].conj() * Complex64::new(s, 0.0);
            tplus[(k, row)] = v[(k, i)] * Complex64::new(1.0 / s, 0.0);
        }
    }

    // pi(b_i) = T L_i T^+ with L_i = left multiplication on coordinates.
    let mul = algebra.mul_tensor();
    let mut rep = Vec::with_capacity(d);
    for i in 0..d {
        let li = DMatrix::<Complex64>::from_fn(d, d, |k, j| mul[i][j][k]);
        rep.push(CMatrix::from_inner(&t * li * &tplus));
    }

    // Omega = image of the unit.
    let one = algebra.coords_of(&CMatrix::identity(algebra.ambient_dim()))?;
    let omega_vec = &t * nalgebra::DVector::from_column_slice(&one);
    let omega: Vec<Complex64> = omega_vec.iter().copied().collect();
    let omega_norm: f64 = omega.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (omega_norm - 1.0).abs() > tol.effective(1.0, d).max(1e-8) {
        return Err(Error::CertificationFailed {
            op,
            detail: format!("cyclic vector has norm {omega_norm}"),
        });
    }

    // Reconstruction: phi(b_i) = <pi(b_i) Omega | Omega>.
    let mut reconstruction_residual = 0.0f64;
    for i in 0..d {
        let pv = rep[i].apply(&omega);
        let inner: Complex64 = pv.iter().zip(&omega).map(|(x, w)| x * w.conj()).sum();
        reconstruction_residual = reconstruction_residual.max((inner - state.values[i]).norm());
    }

    // Certify the *-homomorphism property of the truncated representation.
    let hom_residual = rep_hom_residual(algebra, &rep);
    let homt = tol.effective(1.0, d.max(r)).max(1e-9);
    if hom_residual > homt {
        return Err(Error::NotHomomorphism { op, residual: hom_residual });
    }

    // Cyclicity: the orbit of Omega spans the GNS space.
    let orbit: Vec<Vec<Complex64>> = rep.iter().map(|p| p.apply(&omega)).collect();
    let rank = span::vector_rank(&orbit, &tol, op)?;
    if rank != r {
        return Err(Error::CertificationFailed {
            op,
            detail: format!("cyclic orbit spans {rank} of {r} dimensions"),
        });
    }

    Ok(GnsResult {
        hilbert_dim: r,
        rep,
        cyclic_vector: omega,
        gram: gram.clone(),
        reconstruction_residual,
        hom_residual,
    })
}

/// Worst defect of `pi` being a *-homomorphism against the algebra's
/// structure constants.
fn rep_hom_residual(algebra: &MatrixAlgebra, rep: &[CMatrix]) -> f64 {
    let d = algebra.dim();
    let mul = algebra.mul_tensor();
    let h = rep[0].rows();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let mut expect = CMatrix::zeros(h, h);
            for (k, rk) in rep.iter().enumerate() {
                expect = &expect + &rk.scaled(mul[i][j][k]);
            }
            worst = worst.max((&(&rep[i] * &rep[j]) - &expect).hs_norm());
        }
        let star_i = algebra.star_coords(&unit_vec(d, i));
        let mut expect = CMatrix::zeros(h, h);
        for (k, rk) in rep.iter().enumerate() {
            expect = &expect + &rk.scaled(star_i[k]);
        }
        worst = worst.max((&rep[i].adjoint() - &expect).hs_norm());
    }
    worst
}

/// Certify that basis images define a *-homomorphism of the algebra.
pub fn certify_rep(algebra: &MatrixAlgebra, rep: &[CMatrix], tol: &Tolerance) -> Result<()> {
    let op = "certify_rep";
    if rep.len() != algebra.dim() {
        return Err(Error::ShapeMismatch {
            op,
            detail: format!("{} images for dimension {}", rep.len(), algebra.dim()),
        });
    }
    let h = rep[0].rows();
    for m in rep {
        m.require_square(op)?;
        if m.rows() != h {
            return Err(Error::ShapeMismatch { op, detail: "images differ in size".into() });
        }
    }
    let resid = rep_hom_residual(algebra, rep);
    if resid > tol.effective(1.0, h.max(algebra.dim())).max(1e-9) {
        return Err(Error::NotHomomorphism { op, residual: resid });
    }
    Ok(())
}

/// Schur test: a certified representation is irreducible iff the commutant
/// of its image is the scalars.
pub fn is_irreducible(algebra: &MatrixAlgebra, rep: &[CMatrix], tol: &Tolerance) -> Result<bool> {
    certify_rep(algebra, rep, tol)?;
    let h = rep[0].rows();
    let comm = MatrixAlgebra::commutant(rep, h, *tol)?;
    Ok(comm.dim() == 1)
}

/// Decompose a nondegenerate representation into irreducibles with
/// multiplicities: the block data of the generated image algebra.
///
/// A degenerate representation (one where the image of the algebra's unit is
/// not the identity) is rejected, reporting the rank of the missing corner.
pub fn rep_decompose(
    algebra: &MatrixAlgebra,
    rep: &[CMatrix],
    tol: &Tolerance,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    let op = "rep_decompose";
    certify_rep(algebra, rep, tol)?;
    let h = rep[0].rows();
    let d = algebra.dim();
    let mut unit_image = CMatrix::zeros(h, h);
    for (k, rk) in rep.iter().enumerate() {
        unit_image = &unit_image + &rk.scaled(algebra.unit_coords()[k]);
    }
    let _ = d;
    let corner = &CMatrix::identity(h) - &unit_image;
    let corner_rank = corner.trace().re.round() as usize;
    if corner.hs_norm() > tol.effective(1.0, h) {
        return Err(Error::DegenerateRepresentation { op, corner_rank: corner_rank.max(1) });
    }
    let image_alg = MatrixAlgebra::from_span(h, rep, *tol)?;
    let dec = image_alg.decomposed_seeded(seed)?;
    Ok(dec.blocks.iter().map(|b| (b.size, b.multiplicity)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{group_algebra, FiniteGroup};
    use crate::DEFAULT_SEED;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn full_m2() -> MatrixAlgebra {
        let mut units = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                let mut e = CMatrix::zeros(2, 2);
                e[(i, j)] = c(1., 0.);
                units.push(e);
            }
        }
        MatrixAlgebra::from_span(2, &units, tol()).unwrap()
    }

    /// phi(b_i) values for the normalized trace.
    fn trace_values(alg: &MatrixAlgebra) -> Vec<Complex64> {
        let n = alg.ambient_dim() as f64;
        alg.basis().iter().map(|b| b.trace() / n).collect()
    }

    /// phi(b_i) values for the vector state at basis vector `k`.
    fn vector_state_values(alg: &MatrixAlgebra, k: usize) -> Vec<Complex64> {
        alg.basis().iter().map(|b| b[(k, k)]).collect()
    }

    #[test]
    fn trace_and_vector_states_certify() {
        let alg = full_m2();
        assert!(make_state(&alg, trace_values(&alg)).is_ok());
        assert!(make_state(&alg, vector_state_values(&alg, 0)).is_ok());
        // Negative trace fails positivity (and normalization).
        let neg: Vec<Complex64> = trace_values(&alg).iter().map(|v| -v).collect();
        assert!(make_state(&alg, neg).is_err());
    }

    #[test]
    fn gns_of_tracial_state_on_m2_is_faithful() {
        let alg = full_m2();
        let st = make_state(&alg, trace_values(&alg)).unwrap();
        let gns = gns_construct(&st).unwrap();
        assert_eq!(gns.hilbert_dim, 4);
        assert!(gns.reconstruction_residual < 1e-10);
        assert!(gns.hom_residual < 1e-10);
        // Not irreducible: the commutant contains the right multiplications.
        assert!(!is_irreducible(&alg, &gns.rep, &tol()).unwrap());
    }

    #[test]
    fn gns_of_vector_state_on_m2_is_identity_rep() {
        let alg = full_m2();
        let st = make_state(&alg, vector_state_values(&alg, 0)).unwrap();
        let gns = gns_construct(&st).unwrap();
        assert_eq!(gns.hilbert_dim, 2);
        assert!(gns.reconstruction_residual < 1e-10);
        // Unitarily equivalent to the identity representation: irreducible
        // with a single (2, 1) block.
        assert!(is_irreducible(&alg, &gns.rep, &tol()).unwrap());
        let dec = rep_decompose(&alg, &gns.rep, &tol(), DEFAULT_SEED).unwrap();
        assert_eq!(dec, vec![(2, 1)]);
    }

    #[test]
    fn gns_of_weighted_state_on_diagonal_algebra() {
        // A = C^2 diagonal in M_2 and phi = evaluation at the first point:
        // the second coordinate is null, so the GNS space is 1-dimensional.
        let e1 = CMatrix::diag(&[c(1., 0.), c(0., 0.)]);
        let alg = MatrixAlgebra::generate(2, &[e1], true, tol()).unwrap();
        let values: Vec<Complex64> = alg.basis().iter().map(|b| b[(0, 0)]).collect();
        let st = make_state(&alg, values).unwrap();
        let gns = gns_construct(&st).unwrap();
        assert_eq!(gns.hilbert_dim, 1);
        assert!(gns.reconstruction_residual < 1e-12);
    }

    #[test]
    fn cauchy_schwarz_for_states() {
        let alg = full_m2();
        let st = make_state(&alg, trace_values(&alg)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let x: Vec<Complex64> = (0..4)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let y: Vec<Complex64> = (0..4)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let lhs = st.pairing(&y, &x).norm_sqr();
            let rhs = st.pairing(&x, &x).re * st.pairing(&y, &y).re;
            assert!(lhs <= rhs + 1e-9, "Cauchy-Schwarz violated: {lhs} > {rhs}");
        }
    }

    #[test]
    fn gns_unique_up_to_decomposition_invariants() {
        let alg = full_m2();
        let st = make_state(&alg, trace_values(&alg)).unwrap();
        let g1 = gns_construct(&st).unwrap();
        let g2 = gns_construct(&st).unwrap();
        let d1 = rep_decompose(&alg, &g1.rep, &tol(), 3).unwrap();
        let d2 = rep_decompose(&alg, &g2.rep, &tol(), 777).unwrap();
        assert_eq!(d1, d2);
        assert_eq!(d1, vec![(2, 2)]);
    }

    #[test]
    fn identity_rep_of_m2_is_irreducible_but_doubled_is_not() {
        let alg = full_m2();
        let id_rep: Vec<CMatrix> = alg.basis().to_vec();
        assert!(is_irreducible(&alg, &id_rep, &tol()).unwrap());
        let doubled: Vec<CMatrix> = alg
            .basis()
            .iter()
            .map(|b| {
                CMatrix::from_fn(4, 4, |i, j| {
                    if i / 2 == j / 2 { b[(i % 2, j % 2)] } else { Complex64::ZERO }
                })
            })
            .collect();
        assert!(!is_irreducible(&alg, &doubled, &tol()).unwrap());
        let dec = rep_decompose(&alg, &doubled, &tol(), DEFAULT_SEED).unwrap();
        assert_eq!(dec, vec![(2, 2)]);
    }

    #[test]
    fn regular_rep_of_z3_decomposes_into_characters() {
        let z3 = FiniteGroup::cyclic(3);
        let alg = group_algebra(&z3, tol()).unwrap();
        let id_rep: Vec<CMatrix> = alg.basis().to_vec();
        let dec = rep_decompose(&alg, &id_rep, &tol(), DEFAULT_SEED).unwrap();
        assert_eq!(dec, vec![(1, 1), (1, 1), (1, 1)]);
    }

    #[test]
    fn regular_rep_of_s3_has_multiplicity_equal_dimension() {
        let s3 = FiniteGroup::symmetric(3).unwrap();
        let alg = group_algebra(&s3, tol()).unwrap();
        let id_rep: Vec<CMatrix> = alg.basis().to_vec();
        let dec = rep_decompose(&alg, &id_rep, &tol(), DEFAULT_SEED).unwrap();
        assert_eq!(dec, vec![(1, 1), (1, 1), (2, 2)]);
    }

    #[test]
    fn identity_rep_of_m3() {
        let mut units = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                let mut e = CMatrix::zeros(3, 3);
                e[(i, j)] = c(1., 0.);
                units.push(e);
            }
        }
        let alg = MatrixAlgebra::from_span(3, &units, tol()).unwrap();
        let dec = rep_decompose(&alg, &alg.basis().to_vec(), &tol(), DEFAULT_SEED).unwrap();
        assert_eq!(dec, vec![(3, 1)]);
    }

    #[test]
    fn degenerate_rep_is_rejected() {
        // Send M_2's basis to a 3-space where the unit lands on a rank-2
        // projection: pi(e_ij) = e_ij + 0 corner.
        let alg = full_m2();
        let embedded: Vec<CMatrix> = alg
            .basis()
            .iter()
            .map(|b| {
                CMatrix::from_fn(3, 3, |i, j| {
                    if i < 2 && j < 2 { b[(i, j)] } else { Complex64::ZERO }
                })
            })
            .collect();
        match rep_decompose(&alg, &embedded, &tol(), DEFAULT_SEED) {
            Err(Error::DegenerateRepresentation { corner_rank, .. }) => assert_eq!(corner_rank, 1),
            other => panic!("expected degenerate rejection, got {other:?}"),
        }
    }

    #[test]
    fn schur_dichotomy_on_corpus() {
        // is_irreducible <=> decomposition is a single block of multiplicity 1.
        let alg = full_m2();
        let reps: Vec<Vec<CMatrix>> = vec![alg.basis().to_vec()];
        for rep in reps {
            let irr = is_irreducible(&alg, &rep, &tol()).unwrap();
            let dec = rep_decompose(&alg, &rep, &tol(), DEFAULT_SEED).unwrap();
            assert_eq!(irr, dec.len() == 1 && dec[0].1 == 1);
        }
    }
}
