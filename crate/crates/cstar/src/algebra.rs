//! *-subalgebras of `M_N(C)`: generation from matrices, centers, commutants,
//! and the block decomposition into matrix algebras.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::eig;
use crate::error::{Error, Result};
use crate::mat::CMatrix;
use crate::span;
use crate::tol::Tolerance;

/// Retry budget for generic-element draws in the decomposition.
const GENERIC_RETRIES: usize = 8;

/// A finite-dimensional *-subalgebra of `M_N(C)`.
///
/// The algebra is stored through an orthonormal basis (Hilbert-Schmidt inner
/// product) whose span is certified closed under products and adjoints at
/// construction time. The full structure-constant tensor is kept so that
/// centers, units and products of abstract elements are coefficient-space
/// computations.
#[derive(Clone)]
pub struct MatrixAlgebra {
    ambient: usize,
    basis: Vec<CMatrix>,
    tol: Tolerance,
    /// `mul[i][j]` = coordinates of `basis[i] * basis[j]`.
    mul: Vec<Vec<Vec<Complex64>>>,
    /// `star[i]` = coordinates of `basis[i]^*`.
    star: Vec<Vec<Complex64>>,
    /// Coordinates of the algebra's own unit (its identity element, which
    /// need not be the ambient identity).
    unit_coords: Vec<Complex64>,
    /// Whether the ambient identity belongs to the span.
    unital: bool,
    /// Worst residual seen while certifying closure.
    closure_residual: f64,
}

impl std::fmt::Debug for MatrixAlgebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "MatrixAlgebra(dim={}, ambient={}, unital={})",
            self.dim(),
            self.ambient,
            self.unital
        )
    }
}

/// One block of a decomposed algebra: an `M_n` summand, its multiplicity in
/// the ambient representation, and its minimal central projection.
#[derive(Clone, Serialize)]
pub struct Block {
    pub size: usize,
    pub multiplicity: usize,
    #[serde(skip)]
    pub projection: CMatrix,
}

impl std::fmt::Debug for Block {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Block(n={}, m={})", self.size, self.multiplicity)
    }
}

/// An algebra together with its block decomposition.
#[derive(Clone)]
pub struct DecomposedAlgebra {
    pub algebra: MatrixAlgebra,
    pub blocks: Vec<Block>,
}

impl DecomposedAlgebra {
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.size).collect()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.multiplicity).collect()
    }
}

impl MatrixAlgebra {
    /// The smallest *-closed, product-closed subspace of `M_N(C)` containing
    /// the generators (and the identity when `unital`).
    ///
    /// The closure loop multiplies all basis pairs and stops at the first
    /// round that adds no dimension; growth past `N^2` is reported as a rank
    /// misjudgment.
    pub fn generate(
        ambient: usize,
        generators: &[CMatrix],
        unital: bool,
        tol: Tolerance,
    ) -> Result<Self> {
        let op = "MatrixAlgebra::generate";
        let mut seeds: Vec<CMatrix> = Vec::new();
        if unital {
            seeds.push(CMatrix::identity(ambient));
        }
        for g in generators {
            g.check_finite(op)?;
            if g.rows() != ambient || g.cols() != ambient {
                return Err(Error::ShapeMismatch {
                    op,
                    detail: format!("generator is {}x{}, ambient is {}", g.rows(), g.cols(), ambient),
                });
            }
            seeds.push(g.clone());
            seeds.push(g.adjoint());
        }
        let mut basis = span::orthonormalize_hs(&seeds, ambient, &tol);
        loop {
            let mut grew = false;
            let snapshot = basis.clone();
            for x in &snapshot {
                for y in &snapshot {
                    let p = x * y;
                    if let Some(next) = span::extend_basis(&mut basis, &p, ambient, &tol) {
                        basis.push(next);
                        grew = true;
                        if basis.len() > ambient * ambient {
                            return Err(Error::DimensionGrowth { op, bound: ambient * ambient });
                        }
                    }
                }
            }
            if !grew {
                break;
            }
        }
        Self::from_orthonormal_basis(ambient, basis, tol, op)
    }

    /// Build from matrices whose span is already known to be an algebra;
    /// closure is certified and any escape is an error.
    pub fn from_span(ambient: usize, mats: &[CMatrix], tol: Tolerance) -> Result<Self> {
        let op = "MatrixAlgebra::from_span";
        for m in mats {
            m.check_finite(op)?;
            if m.rows() != ambient || m.cols() != ambient {
                return Err(Error::ShapeMismatch {
                    op,
                    detail: format!("matrix is {}x{}, ambient is {}", m.rows(), m.cols(), ambient),
                });
            }
        }
        let basis = span::orthonormalize_hs(mats, ambient, &tol);
        Self::from_orthonormal_basis(ambient, basis, tol, op)
    }

    /// Finish construction: certify closure of the orthonormal basis and
    /// compute the structure tensors and the unit.
    fn from_orthonormal_basis(
        ambient: usize,
        basis: Vec<CMatrix>,
        tol: Tolerance,
        op: &'static str,
    ) -> Result<Self> {
        let d = basis.len();
        if d == 0 {
            return Err(Error::InvalidArgument { op, detail: "empty algebra".into() });
        }
        let mut worst = 0.0f64;
        let mut mul = vec![vec![Vec::new(); d]; d];
        for i in 0..d {
            for j in 0..d {
                let p = &basis[i] * &basis[j];
                let (coords, resid) = span::coords_in_basis(&p, &basis);
                let thresh = tol.effective(p.hs_norm(), ambient);
                if resid > thresh {
                    return Err(Error::CertificationFailed {
                        op,
                        detail: format!(
                            "span not closed under multiplication: basis pair ({i},{j}) escapes with residual {resid:.3e}"
                        ),
                    });
                }
                worst = worst.max(resid);
                mul[i][j] = coords;
            }
        }
        let mut star = Vec::with_capacity(d);
        for b in &basis {
            let a = b.adjoint();
            let (coords, resid) = span::coords_in_basis(&a, &basis);
            let thresh = tol.effective(1.0, ambient);
            if resid > thresh {
                return Err(Error::CertificationFailed {
                    op,
                    detail: format!("span not closed under adjoints (residual {resid:.3e})"),
                });
            }
            worst = worst.max(resid);
            star.push(coords);
        }
        Self::finish(ambient, basis, tol, mul, star, worst, op)
    }

    /// Assemble an algebra whose structure tensor the caller has already
    /// certified (used by the crossed-product builder, which performs its
    /// own exhaustive relation check on the same products).
    pub(crate) fn from_certified_parts(
        ambient: usize,
        basis: Vec<CMatrix>,
        mul: Vec<Vec<Vec<Complex64>>>,
        star: Vec<Vec<Complex64>>,
        closure_residual: f64,
        tol: Tolerance,
    ) -> Result<Self> {
        let op = "MatrixAlgebra::from_certified_parts";
        let d = basis.len();
        // Orthonormality of the handed-in basis is still our's to check.
        for i in 0..d {
            for j in i..d {
                let ip = basis[i].hs_inner(&basis[j]);
                let expect = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::ZERO };
                if (ip - expect).norm() > tol.effective(1.0, ambient) {
                    return Err(Error::CertificationFailed {
                        op,
                        detail: format!("basis not orthonormal at pair ({i},{j})"),
                    });
                }
            }
        }
        Self::finish(ambient, basis, tol, mul, star, closure_residual, op)
    }

    fn finish(
        ambient: usize,
        basis: Vec<CMatrix>,
        tol: Tolerance,
        mul: Vec<Vec<Vec<Complex64>>>,
        star: Vec<Vec<Complex64>>,
        closure_residual: f64,
        op: &'static str,
    ) -> Result<Self> {
        let d = basis.len();
        let id = CMatrix::identity(ambient);
        let (_, id_resid) = span::coords_in_basis(&id, &basis);
        let unital = id_resid <= tol.effective((ambient as f64).sqrt(), ambient);

        let mut alg = MatrixAlgebra {
            ambient,
            basis,
            tol,
            mul,
            star,
            unit_coords: vec![Complex64::ZERO; d],
            unital,
            closure_residual,
        };
        alg.unit_coords = alg.solve_unit(op)?;
        Ok(alg)
    }

    /// The unit of the algebra itself, as coordinates: the least-squares
    /// solution of `e . b_j = b_j` for all j, certified afterwards. Every
    /// *-closed matrix algebra has one (it is semisimple).
    fn solve_unit(&self, op: &'static str) -> Result<Vec<Complex64>> {
        let d = self.dim();
        if self.unital {
            // The ambient identity is in the span; its coordinates are the unit.
            let (coords, _) = span::coords_in_basis(&CMatrix::identity(self.ambient), &self.basis);
            return Ok(coords);
        }
        // Normal equations for the stacked system over all j.
        let mut gram = DMatrix::<Complex64>::zeros(d, d);
        let mut rhs = nalgebra::DVector::<Complex64>::zeros(d);
        for j in 0..d {
            // column i of the block for j is mul[i][j]
            let mj = DMatrix::<Complex64>::from_fn(d, d, |k, i| self.mul[i][j][k]);
            gram += mj.adjoint() * &mj;
            let ej = nalgebra::DVector::<Complex64>::from_fn(d, |k, _| {
                if k == j { Complex64::new(1.0, 0.0) } else { Complex64::ZERO }
            });
            rhs += mj.adjoint() * ej;
        }
        let sol = gram
            .lu()
            .solve(&rhs)
            .ok_or(Error::CertificationFailed { op, detail: "unit solve is singular".into() })?;
        let e: Vec<Complex64> = sol.iter().copied().collect();
        // Certify: e really is a two-sided unit.
        for j in 0..d {
            let left = self.mul_coords(&e, &unit_vec(d, j));
            let right = self.mul_coords(&unit_vec(d, j), &e);
            let expect = unit_vec(d, j);
            if vec_dist(&left, &expect) > self.tol.effective(1.0, self.ambient)
                || vec_dist(&right, &expect) > self.tol.effective(1.0, self.ambient)
            {
                return Err(Error::CertificationFailed {
                    op,
                    detail: "no two-sided unit found in span".into(),
                });
            }
        }
        Ok(e)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    pub fn tolerance(&self) -> &Tolerance {
        &self.tol
    }

    /// Whether the ambient identity lies in the span.
    pub fn is_unital(&self) -> bool {
        self.unital
    }

    pub fn closure_residual(&self) -> f64 {
        self.closure_residual
    }

    /// The algebra's own unit as a matrix (equals the ambient identity for
    /// unital algebras, a proper projection otherwise).
    pub fn unit(&self) -> CMatrix {
        self.element(&self.unit_coords)
    }

    pub fn unit_coords(&self) -> &[Complex64] {
        &self.unit_coords
    }

    /// The matrix with the given coordinates.
    pub fn element(&self, coords: &[Complex64]) -> CMatrix {
        assert_eq!(coords.len(), self.dim());
        let mut m = CMatrix::zeros(self.ambient, self.ambient);
        for (b, c) in self.basis.iter().zip(coords) {
            m = &m + &b.scaled(*c);
        }
        m
    }

    /// Coordinates of a matrix; errors when it does not lie in the span.
    pub fn coords_of(&self, x: &CMatrix) -> Result<Vec<Complex64>> {
        let (coords, resid) = span::coords_in_basis(x, &self.basis);
        let thresh = self.tol.effective(x.hs_norm(), self.ambient);
        if resid > thresh {
            return Err(Error::NotInAlgebra { op: "MatrixAlgebra::coords_of", residual: resid });
        }
        Ok(coords)
    }

    /// Product in coordinate space via the structure tensor.
    pub fn mul_coords(&self, x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim();
        let mut out = vec![Complex64::ZERO; d];
        for (i, &xi) in x.iter().enumerate() {
            if xi.norm_sqr() == 0.0 {
                continue;
            }
            for (j, &yj) in y.iter().enumerate() {
                let c = xi * yj;
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                for (k, &m) in self.mul[i][j].iter().enumerate() {
                    out[k] += c * m;
                }
            }
        }
        out
    }

    /// Adjoint in coordinate space.
    pub fn star_coords(&self, x: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim();
        let mut out = vec![Complex64::ZERO; d];
        for (i, &xi) in x.iter().enumerate() {
            for (k, &s) in self.star[i].iter().enumerate() {
                out[k] += xi.conj() * s;
            }
        }
        out
    }

    pub(crate) fn mul_tensor(&self) -> &Vec<Vec<Vec<Complex64>>> {
        &self.mul
    }

    /// The center `{x in A : xb = bx for all b}` as a subalgebra.
    pub fn center(&self) -> Result<MatrixAlgebra> {
        let d = self.dim();
        // Commutation with basis element j, as a map on coefficient vectors:
        // column i is coords(b_i b_j - b_j b_i).
        let mut gram = DMatrix::<Complex64>::zeros(d, d);
        for j in 0..d {
            let cj = DMatrix::<Complex64>::from_fn(d, d, |k, i| self.mul[i][j][k] - self.mul[j][i][k]);
            gram += cj.adjoint() * cj;
        }
        let null = span::gram_null_basis(&CMatrix::from_inner(gram), &self.tol, "center")?;
        let mats: Vec<CMatrix> = null.iter().map(|c| self.element(c)).collect();
        MatrixAlgebra::from_span(self.ambient, &mats, self.tol)
    }

    /// Decompose with the default seed.
    pub fn decomposed(&self) -> Result<DecomposedAlgebra> {
        self.decomposed_seeded(crate::DEFAULT_SEED)
    }

    /// Block decomposition: minimal central projections from the spectral
    /// projections of a generic self-adjoint central element, and per block
    /// the matrix size `n_i` and ambient multiplicity `m_i`.
    ///
    /// Blocks are sorted by (size, rank, rounded projection entries) so the
    /// output is stable across runs; the multiset is seed-independent.
    pub fn decomposed_seeded(&self, seed: u64) -> Result<DecomposedAlgebra> {
        let op = "MatrixAlgebra::decompose";
        let center = self.center()?;
        let r = center.dim();
        // A self-adjoint basis of the center.
        let mut sa_cands = Vec::with_capacity(2 * r);
        for z in center.basis() {
            let zs = z.adjoint();
            sa_cands.push(&(z + &zs) * Complex64::new(0.5, 0.0));
            sa_cands.push(&(z - &zs) * Complex64::new(0.0, -0.5));
        }
        let sa_basis = span::orthonormalize_hs(&sa_cands, self.ambient, &self.tol);
        if sa_basis.len() != r {
            return Err(Error::CertificationFailed {
                op,
                detail: format!(
                    "self-adjoint center basis has dimension {} but center has {}",
                    sa_basis.len(),
                    r
                ),
            });
        }

        let unit = self.unit();
        let unit_rank_f = unit.trace().re;
        let unit_rank = unit_rank_f.round() as usize;
        if (unit_rank_f - unit_rank as f64).abs() > 0.01 {
            return Err(Error::CertificationFailed {
                op,
                detail: format!("unit trace {unit_rank_f} is not near an integer"),
            });
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        'attempt: for _ in 0..GENERIC_RETRIES {
            let mut generic = CMatrix::zeros(self.ambient, self.ambient);
            for h in &sa_basis {
                let gamma: f64 = rng.gen_range(-1.0..1.0);
                generic = &generic + &h.scaled(Complex64::new(gamma, 0.0));
            }
            let radius = self.tol.effective(generic.hs_norm(), self.ambient);
            // Eigenvector accuracy degrades like eps/gap, so the block values
            // of the generic element must separate well beyond the cluster
            // radius for the spectral projections to pass certification.
            let margin = (1e-4 * generic.hs_norm().max(1.0)).max(100.0 * radius);
            let (vals, u) = eig::herm_eigen(&generic);

            // Eigenpairs with |value| above the margin belong to the support
            // of the algebra's unit; the rest are either the degenerate
            // corner or an unlucky draw.
            let kept: Vec<usize> = (0..vals.len()).filter(|&i| vals[i].abs() > margin).collect();
            if kept.len() != unit_rank {
                continue 'attempt;
            }
            let kept_vals: Vec<Complex64> =
                kept.iter().map(|&i| Complex64::new(vals[i], 0.0)).collect();
            let clusters = eig::cluster_values(&kept_vals, radius);
            if clusters.len() != r {
                continue 'attempt;
            }
            let means: Vec<f64> = clusters
                .iter()
                .map(|cl| cl.iter().map(|&i| kept_vals[i].re).sum::<f64>() / cl.len() as f64)
                .collect();
            let separated = means.iter().enumerate().all(|(i, a)| {
                means.iter().skip(i + 1).all(|b| (a - b).abs() >= margin)
            });
            if !separated {
                continue 'attempt;
            }

            let mut blocks = Vec::with_capacity(r);
            for cl in &clusters {
                let mut z = CMatrix::zeros(self.ambient, self.ambient);
                for &local in cl {
                    let col = kept[local];
                    let v = CMatrix::from_fn(self.ambient, 1, |i, _| u[(i, col)]);
                    z = &z + &(&v * &v.adjoint());
                }
                // Clean the out-of-span noise before certifying.
                let (zc, _) = span::coords_in_basis(&z, &self.basis);
                let z = self.element(&zc);
                let block = self.certify_block(&z, op)?;
                blocks.push(block);
            }

            // Global certificates: sum of projections is the unit, the sizes
            // account for the dimension, the ranks account for the unit rank.
            let mut zsum = CMatrix::zeros(self.ambient, self.ambient);
            for b in &blocks {
                zsum = &zsum + &b.projection;
            }
            if (&zsum - &unit).hs_norm() > self.tol.effective(unit.hs_norm(), self.ambient) {
                continue 'attempt;
            }
            let dim_sum: usize = blocks.iter().map(|b| b.size * b.size).sum();
            if dim_sum != self.dim() {
                return Err(Error::CertificationFailed {
                    op,
                    detail: format!("sum of n_i^2 = {dim_sum} but dim(A) = {}", self.dim()),
                });
            }
            let rank_sum: usize = blocks.iter().map(|b| b.size * b.multiplicity).sum();
            if rank_sum != unit_rank {
                return Err(Error::CertificationFailed {
                    op,
                    detail: format!("sum of n_i m_i = {rank_sum} but rank of unit = {unit_rank}"),
                });
            }

            blocks.sort_by(|a, b| {
                (a.size, a.multiplicity)
                    .cmp(&(b.size, b.multiplicity))
                    .then_with(|| rounded_entries(&a.projection).cmp(&rounded_entries(&b.projection)))
            });
            return Ok(DecomposedAlgebra { algebra: self.clone(), blocks });
        }
        Err(Error::RetryBudgetExhausted { op, budget: GENERIC_RETRIES })
    }

    /// Certify one candidate minimal central projection and measure its
    /// block: n = sqrt(dim(zA)), m = rank(z)/n.
    fn certify_block(&self, z: &CMatrix, op: &'static str) -> Result<Block> {
        let eff = self.tol.effective(z.hs_norm(), self.ambient);
        let proj_defect = (&(z * z) - z).hs_norm().max((z - &z.adjoint()).hs_norm());
        if proj_defect > eff {
            return Err(Error::CertificationFailed {
                op,
                detail: format!("central candidate is not a projection (defect {proj_defect:.3e})"),
            });
        }
        for b in &self.basis {
            let comm = (&(z * b) - &(b * z)).hs_norm();
            if comm > eff {
                return Err(Error::CertificationFailed {
                    op,
                    detail: format!("candidate projection is not central (defect {comm:.3e})"),
                });
            }
        }
        let zc = self.coords_of(z)?;
        let rank_f = z.trace().re;
        let rank = rank_f.round() as usize;
        if (rank_f - rank as f64).abs() > 0.01 || rank == 0 {
            return Err(Error::CertificationFailed {
                op,
                detail: format!("projection trace {rank_f} is not a positive integer"),
            });
        }
        // dim(zA) in coefficient space.
        let d = self.dim();
        let compressed: Vec<Vec<Complex64>> =
            (0..d).map(|j| self.mul_coords(&zc, &unit_vec(d, j))).collect();
        let dim_za = span::vector_rank(&compressed, &self.tol, op)?;
        let n = (dim_za as f64).sqrt().round() as usize;
        if n * n != dim_za {
            return Err(Error::CertificationFailed {
                op,
                detail: format!("block dimension {dim_za} is not a perfect square"),
            });
        }
        if rank % n != 0 {
            return Err(Error::CertificationFailed {
                op,
                detail: format!("projection rank {rank} is not divisible by block size {n}"),
            });
        }
        Ok(Block { size: n, multiplicity: rank / n, projection: z.clone() })
    }

    /// The commutant of a set of matrices inside `M_N(C)`.
    ///
    /// The result is always product-closed and unital; it is *-closed (and
    /// the construction certifies so) exactly when the input set is.
    pub fn commutant(mats: &[CMatrix], ambient: usize, tol: Tolerance) -> Result<MatrixAlgebra> {
        let op = "MatrixAlgebra::commutant";
        let nn = ambient * ambient;
        let mut gram = DMatrix::<Complex64>::zeros(nn, nn);
        for m in mats {
            m.require_square(op)?;
            if m.rows() != ambient {
                return Err(Error::ShapeMismatch {
                    op,
                    detail: format!("matrix is {}x{}, ambient is {}", m.rows(), m.cols(), ambient),
                });
            }
            let s = span::sylvester_op(m, m);
            gram += s.adjoint() * s;
        }
        let null = span::gram_null_basis(&CMatrix::from_inner(gram), &tol, op)?;
        let mats: Vec<CMatrix> = null
            .iter()
            .map(|v| CMatrix::from_fn(ambient, ambient, |i, j| v[i * ambient + j]))
            .collect();
        MatrixAlgebra::from_span(ambient, &mats, tol)
    }

    /// Von Neumann double-commutant check at finite dimension: true iff
    /// `dim(A'') = dim(A)` and every basis element of `A` lies in `A''`.
    pub fn double_commutant_check(&self) -> Result<bool> {
        let op = "MatrixAlgebra::double_commutant_check";
        if !self.unital {
            return Err(Error::NotUnital { op });
        }
        let comm = MatrixAlgebra::commutant(&self.basis, self.ambient, self.tol)?;
        let bicomm = MatrixAlgebra::commutant(comm.basis(), self.ambient, self.tol)?;
        if bicomm.dim() != self.dim() {
            return Ok(false);
        }
        for b in &self.basis {
            let (_, resid) = span::coords_in_basis(b, bicomm.basis());
            if resid > self.tol.effective(1.0, self.ambient) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Containment residual of `A` inside another algebra's span (used by
    /// tests and the double-commutant reporting).
    pub fn containment_residual(&self, other: &MatrixAlgebra) -> f64 {
        let mut worst = 0.0f64;
        for b in &self.basis {
            let (_, resid) = span::coords_in_basis(b, other.basis());
            worst = worst.max(resid);
        }
        worst
    }
}

pub(crate) fn unit_vec(d: usize, j: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::ZERO; d];
    v[j] = Complex64::new(1.0, 0.0);
    v
}

fn vec_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Entries rounded to 1e-6 for the deterministic block tie-break.
fn rounded_entries(m: &CMatrix) -> Vec<(i64, i64)> {
    m.entries()
        .iter()
        .map(|z| ((z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64))
        .collect()
}
