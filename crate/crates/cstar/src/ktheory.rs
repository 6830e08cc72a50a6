//! Idempotents and projections over a decomposed algebra, Murray-von Neumann
//! equivalence, K0 dimension vectors, K0 of homomorphisms, and the index map.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::DecomposedAlgebra;
use crate::eig;
use crate::error::{Error, Result};
use crate::gns;
use crate::mat::CMatrix;
use crate::span;
use crate::tol::Tolerance;

/// A K0 class as an integer dimension vector (one entry per block; entries
/// may be negative for formal differences).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct K0Class(pub Vec<i64>);

impl K0Class {
    pub fn zero(len: usize) -> Self {
        K0Class(vec![0; len])
    }

    pub fn add(&self, other: &K0Class) -> K0Class {
        K0Class(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &K0Class) -> K0Class {
        K0Class(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> K0Class {
        K0Class(self.0.iter().map(|a| -a).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }
}

impl std::fmt::Display for K0Class {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Turn an idempotent into the projection onto its range:
/// `z = 1 + (e - e^*)(e^* - e)` is invertible and `p = e e^* z^-1`.
///
/// The equivalence witnesses are part of the contract: `e p = p` and
/// `p e = e` (up to tolerance), so `e` and `p` generate the same module.
pub fn idempotent_to_projection(e: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let op = "idempotent_to_projection";
    e.require_square(op)?;
    e.check_finite(op)?;
    let n = e.rows();
    let eff = tol.effective(e.hs_norm(), n);
    let idem_defect = (&(e * e) - e).hs_norm();
    if idem_defect > eff {
        return Err(Error::NotIdempotent { op, defect: idem_defect });
    }
    let es = e.adjoint();
    let z = &CMatrix::identity(n) + &(&(e - &es) * &(&es - e));
    // z >= 1 for a true idempotent; a tiny eigenvalue signals garbage input.
    let (zvals, _) = eig::herm_eigen(&z);
    let zmin = zvals.first().copied().unwrap_or(0.0);
    if zmin < 0.5 {
        return Err(Error::Singular { op, sigma_min: zmin, tol: 0.5 });
    }
    let zinv = eig::inverse(&z, op)?;
    let p = &(e * &es) * &zinv;

    let scaled = tol.effective(p.hs_norm().max(e.hs_norm()), n);
    let proj_defect = (&(&p * &p) - &p).hs_norm().max((&p - &p.adjoint()).hs_norm());
    if proj_defect > scaled.max(10.0 * eff) {
        return Err(Error::NotProjection { op, defect: proj_defect });
    }
    Ok(p)
}

/// The per-block dimension vector of a projection over `M_k(A)`.
///
/// `p` may live in any matrix amplification of the decomposed algebra (its
/// side must be a multiple of the ambient dimension, and each block of `p`
/// must lie in the algebra's span). Entry `i` is
/// `rank((1_k (x) z_i) p) / m_i`, an exact integer; non-integer ranks are a
/// certification failure.
pub fn dimension_vector(p: &CMatrix, da: &DecomposedAlgebra, tol: &Tolerance) -> Result<Vec<i64>> {
    let op = "dimension_vector";
    p.require_square(op)?;
    let n = da.algebra.ambient_dim();
    if p.rows() % n != 0 {
        return Err(Error::ShapeMismatch {
            op,
            detail: format!("side {} is not a multiple of the ambient dimension {n}", p.rows()),
        });
    }
    let k = p.rows() / n;
    let eff = tol.effective(p.hs_norm(), p.rows());
    let proj_defect = (&(p * p) - p).hs_norm().max((p - &p.adjoint()).hs_norm());
    if proj_defect > eff {
        return Err(Error::NotProjection { op, defect: proj_defect });
    }
    // Membership in M_k(A): every n x n block of p expands in the basis.
    for bu in 0..k {
        for bv in 0..k {
            let block = CMatrix::from_fn(n, n, |i, j| p[(bu * n + i, bv * n + j)]);
            let (_, resid) = span::coords_in_basis(&block, da.algebra.basis());
            if resid > tol.effective(block.hs_norm(), n) {
                return Err(Error::NotInAlgebra { op, residual: resid });
            }
        }
    }

    let mut out = Vec::with_capacity(da.blocks.len());
    for b in &da.blocks {
        // (1_k (x) z_i) p (1_k (x) z_i) is a projection commuting with p.
        let zbig = CMatrix::identity(k).kron(&b.projection);
        let zp = &(&zbig * p) * &zbig;
        // Eigenvalues must split cleanly to 0/1 for an exact integer rank.
        let (vals, _) = eig::herm_eigen(&zp);
        let gap = 1e3 * tol.effective(1.0, p.rows());
        for &v in &vals {
            if v.min((v - 1.0).abs()) > gap && (v - 1.0).abs().min(v.abs()) > gap {
                return Err(Error::RankGap { op, low: v, high: 1.0 - v });
            }
        }
        let rank = zp.trace().re;
        let rank_int = rank.round() as i64;
        if (rank - rank_int as f64).abs() > 0.01 {
            return Err(Error::CertificationFailed {
                op,
                detail: format!("block rank {rank} is not near an integer"),
            });
        }
        let m = b.multiplicity as i64;
        if rank_int % m != 0 {
            return Err(Error::CertificationFailed {
                op,
                detail: format!("ambient rank {rank_int} is not divisible by multiplicity {m}"),
            });
        }
        out.push(rank_int / m);
    }
    Ok(out)
}

/// Murray-von Neumann equivalence of projections over a decomposed algebra:
/// equality of dimension vectors. The projections may sit in different
/// amplifications.
pub fn mvn_equivalent(
    p: &CMatrix,
    q: &CMatrix,
    da: &DecomposedAlgebra,
    tol: &Tolerance,
) -> Result<bool> {
    let dp = dimension_vector(p, da, tol)?;
    let dq = dimension_vector(q, da, tol)?;
    Ok(dp == dq)
}

/// The K0 class of a projection over a decomposed algebra.
pub fn k0_class(p: &CMatrix, da: &DecomposedAlgebra, tol: &Tolerance) -> Result<K0Class> {
    Ok(K0Class(dimension_vector(p, da, tol)?))
}

/// A minimal projection of block `i`: the spectral projection onto the top
/// eigenvalue of a generic positive element of `z_i A z_i`. Its ambient rank
/// is the block's multiplicity, so its K0 class is the i-th basis vector.
pub fn minimal_projection(
    da: &DecomposedAlgebra,
    block: usize,
    tol: &Tolerance,
    seed: u64,
) -> Result<CMatrix> {
    let op = "minimal_projection";
    if block >= da.blocks.len() {
        return Err(Error::InvalidArgument {
            op,
            detail: format!("block {block} out of range ({} blocks)", da.blocks.len()),
        });
    }
    let alg = &da.algebra;
    let d = alg.dim();
    let n = alg.ambient_dim();
    let b = &da.blocks[block];
    let m = b.multiplicity;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (block as u64).wrapping_mul(0x9E3779B97F4A7C15));

    'attempt: for _ in 0..8 {
        // Generic self-adjoint element compressed to the block.
        let mut coords = vec![Complex64::ZERO; d];
        for c in coords.iter_mut() {
            *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let x = alg.element(&coords);
        let x = &(&x + &x.adjoint()) * Complex64::new(0.5, 0.0);
        let y = &(&b.projection * &x) * &b.projection;
        // Positive shift on the block keeps the top of the spectrum inside it.
        let y = &y + &b.projection.scaled(Complex64::new(y.op_norm() + 1.0, 0.0));

        let (vals, u) = eig::herm_eigen(&y);
        let top = vals.last().copied().unwrap();
        let margin = 1e-4 * y.hs_norm().max(1.0);
        let in_top: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > top - margin).collect();
        if in_top.len() != m {
            continue 'attempt;
        }
        // The next eigenvalue down must be separated.
        let below: f64 = vals
            .iter()
            .filter(|&&v| v <= top - margin)
            .fold(f64::NEG_INFINITY, |a, &v| a.max(v));
        if top - below < 2.0 * margin {
            continue 'attempt;
        }
        let mut p = CMatrix::zeros(n, n);
        for &col in &in_top {
            let v = CMatrix::from_fn(n, 1, |i, _| u[(i, col)]);
            p = &p + &(&v * &v.adjoint());
        }
        // Clean into the span and certify.
        let Ok(pc) = alg.coords_of(&p) else { continue 'attempt };
        let p = alg.element(&pc);
        let eff = tol.effective(p.hs_norm(), n);
        if (&(&p * &p) - &p).hs_norm() > eff || (&p - &p.adjoint()).hs_norm() > eff {
            continue 'attempt;
        }
        if (p.trace().re - m as f64).abs() > 0.01 {
            continue 'attempt;
        }
        return Ok(p);
    }
    Err(Error::RetryBudgetExhausted { op, budget: 8 })
}

/// K0 of a unital *-homomorphism `phi: A -> B` given by the images of A's
/// basis inside B's ambient algebra: the integer multiplicity matrix whose
/// column `i` is the class of `phi(p_i)` for a minimal projection `p_i` of
/// block `i`. Shape: `blocks(B) x blocks(A)`.
pub fn k0_of_hom(
    a: &DecomposedAlgebra,
    b: &DecomposedAlgebra,
    images: &[CMatrix],
    tol: &Tolerance,
    seed: u64,
) -> Result<Vec<Vec<i64>>> {
    let op = "k0_of_hom";
    // phi must be a *-homomorphism landing inside B and matching units.
    gns::certify_rep(&a.algebra, images, tol)?;
    for im in images {
        if im.rows() != b.algebra.ambient_dim() {
            return Err(Error::ShapeMismatch {
                op,
                detail: format!(
                    "image is {}x{} but B's ambient dimension is {}",
                    im.rows(),
                    im.cols(),
                    b.algebra.ambient_dim()
                ),
            });
        }
        b.algebra.coords_of(im)?;
    }
    let d = a.algebra.dim();
    let apply = |coords: &[Complex64]| -> CMatrix {
        let nb = b.algebra.ambient_dim();
        let mut out = CMatrix::zeros(nb, nb);
        for (c, im) in coords.iter().zip(images) {
            out = &out + &im.scaled(*c);
        }
        out
    };
    // Units must correspond.
    let unit_image = apply(&a.algebra.unit_coords()[..d]);
    let unit_defect = (&unit_image - &b.algebra.unit()).hs_norm();
    if unit_defect > tol.effective(1.0, b.algebra.ambient_dim()) {
        return Err(Error::CertificationFailed {
            op,
            detail: format!("phi does not respect units (defect {unit_defect:.3e})"),
        });
    }

    let mut columns = Vec::with_capacity(a.blocks.len());
    for i in 0..a.blocks.len() {
        let p = minimal_projection(a, i, tol, seed)?;
        let pc = a.algebra.coords_of(&p)?;
        let image = apply(&pc);
        let class = dimension_vector(&image, b, tol)?;
        columns.push(class);
    }
    // Transpose into rows indexed by B's blocks.
    let rows = b.blocks.len();
    let cols = a.blocks.len();
    let mut matrix = vec![vec![0i64; cols]; rows];
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            matrix[i][j] = v;
        }
    }
    Ok(matrix)
}

/// The boundary formula on formal defect data:
/// `index = [1 - v^* v] - [1 - v v^*]` for K0 classes over the same ideal.
pub fn index_map(defect_ker: &K0Class, defect_coker: &K0Class) -> Result<K0Class> {
    if defect_ker.0.len() != defect_coker.0.len() {
        return Err(Error::ShapeMismatch {
            op: "index_map",
            detail: format!(
                "defect classes have lengths {} and {}",
                defect_ker.0.len(),
                defect_coker.0.len()
            ),
        });
    }
    Ok(defect_ker.sub(defect_coker))
}

/// Matrix form of the index map: for a partial isometry `v` over a
/// decomposed algebra whose image in the quotient by the named ideal blocks
/// is unitary, compute `[1 - v^* v] - [1 - v v^*]` as dimension vectors over
/// the ideal.
///
/// In finite dimension the two defects always have equal per-block ranks, so
/// the result is the zero class; the value of the operation is the certified
/// computation, mirroring the boundary formula on genuinely infinite data.
pub fn index_map_matrix(
    v: &CMatrix,
    da: &DecomposedAlgebra,
    ideal_blocks: &[usize],
    tol: &Tolerance,
) -> Result<K0Class> {
    let op = "index_map_matrix";
    v.require_square(op)?;
    let n = da.algebra.ambient_dim();
    if v.rows() != n {
        return Err(Error::ShapeMismatch {
            op,
            detail: format!("element is {}x{}, ambient is {n}", v.rows(), v.cols()),
        });
    }
    for &i in ideal_blocks {
        if i >= da.blocks.len() {
            return Err(Error::InvalidArgument {
                op,
                detail: format!("ideal block {i} out of range"),
            });
        }
    }
    da.algebra.coords_of(v)?;
    let eff = tol.effective(v.hs_norm().max(1.0), n);
    let vv = &v.adjoint() * v;
    let proj_defect = (&(&vv * &vv) - &vv).hs_norm();
    if proj_defect > eff {
        return Err(Error::NotProjection { op, defect: proj_defect });
    }

    // Quotient image must be unitary: on every non-ideal block, both v^*v
    // and vv^* must compress to the block unit.
    let vvs = v * &v.adjoint();
    for (j, b) in da.blocks.iter().enumerate() {
        if ideal_blocks.contains(&j) {
            continue;
        }
        let z = &b.projection;
        let defect = (&(&(z * &vv) * z) - z).hs_norm().max((&(&(z * &vvs) * z) - z).hs_norm());
        if defect > eff {
            return Err(Error::QuotientNotUnitary { op, block: j, defect });
        }
    }

    let one = da.algebra.unit();
    let dker = dimension_vector(&(&one - &vv), da, tol)?;
    let dcoker = dimension_vector(&(&one - &vvs), da, tol)?;
    let ker: Vec<i64> = ideal_blocks.iter().map(|&i| dker[i]).collect();
    let coker: Vec<i64> = ideal_blocks.iter().map(|&i| dcoker[i]).collect();
    index_map(&K0Class(ker), &K0Class(coker))
}

/// Build the block-diagonal direct sum of two square matrices (a convenience
/// for stability and additivity statements).
pub fn direct_sum(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (n, m) = (a.rows(), b.rows());
    CMatrix::from_fn(n + m, n + m, |i, j| {
        if i < n && j < n {
            a[(i, j)]
        } else if i >= n && j >= n {
            b[(i - n, j - n)]
        } else {
            Complex64::ZERO
        }
    })
}
