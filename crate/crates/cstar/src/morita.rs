//! The discrete imprimitivity bimodule between `C(G/H) x| G` and `C*(H)`.
//!
//! For a finite group `G` and subgroup `H`, the module is `E0 = C(G)` with
//! basis `{eps_s}`, carrying
//!
//! ```text
//! (e_(rH) (x) delta_s) . eps_t = 1_(rH)(st) eps_(st)      left action
//! eps_t . v_h = eps_(th)                                   right action
//! <eps_s | eps_t>_B = 1_H(s^-1 t) v_(s^-1 t)               B-valued (linear in 2nd)
//! <eps_s | eps_t>_A = e_(sH) (x) delta_(s t^-1)            A-valued (linear in 1st)
//! ```
//!
//! Both algebras are realized concretely (the crossed product through its
//! regular covariant representation, `C*(H)` through the regular
//! representation of `H`), so every axiom becomes a finite matrix identity.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::MatrixAlgebra;
use crate::crossed::{build_crossed, ActionSpec, CrossedProduct, DynamicalSystem};
use crate::eig;
use crate::error::{Error, Result};
use crate::groups::{group_algebra, FiniteGroup};
use crate::mat::CMatrix;
use crate::tol::Tolerance;

/// The discrete imprimitivity bimodule for a pair `H <= G`.
pub struct Bimodule {
    group: FiniteGroup,
    /// Sorted `G`-indices of the subgroup.
    subgroup: Vec<usize>,
    /// `H` reindexed as a group of its own.
    h_group: FiniteGroup,
    /// `G`-index -> `H`-index (when the element lies in `H`).
    h_index: Vec<Option<usize>>,
    /// Left cosets as sorted index lists; representative = smallest index.
    cosets: Vec<Vec<usize>>,
    coset_of: Vec<usize>,
    /// `A0 = C(G/H) x| G`, concrete.
    left: CrossedProduct,
    /// `B0 = C*(H)` in the regular representation of `H`.
    right: MatrixAlgebra,
    /// Minimal eigenvalues of the two big Gram matrices (certified >= -tol).
    b_gram_min_eig: f64,
    a_gram_min_eig: f64,
}

/// Residual report for the pre-imprimitivity axioms.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    /// (1) + (2): sesquilinearity of both inner products.
    pub sesquilinearity: f64,
    /// Hermitian symmetry `<x|y>^* = <y|x>` for both inner products.
    pub symmetry: f64,
    /// (3): `<a x | y>_B = <x | a^* y>_B`.
    pub left_compat: f64,
    /// (4): `<x b | y>_A = <x | y b^*>_A`.
    pub right_compat: f64,
    /// (5): `<x|y>_A z = x <y|z>_B`.
    pub associativity: f64,
    /// (6): most negative eigenvalue (clamped at 0) of
    /// `||a||^2 <x|x>_B - <ax|ax>_B` and its A-valued mirror, over samples.
    pub contractivity: f64,
    /// (7): the inner products span the full algebras.
    pub fullness_a: bool,
    pub fullness_b: bool,
    /// `|| <x|x>_A || = || <x|x>_B ||` over random x.
    pub norm_compat: f64,
    /// Minimal eigenvalues of the big Gram matrices (from construction).
    pub b_gram_min_eig: f64,
    pub a_gram_min_eig: f64,
}

impl AxiomReport {
    /// Worst residual over all residual-style checks.
    pub fn worst(&self) -> f64 {
        self.sesquilinearity
            .max(self.symmetry)
            .max(self.left_compat)
            .max(self.right_compat)
            .max(self.associativity)
            .max(self.contractivity)
            .max(self.norm_compat)
            .max((-self.b_gram_min_eig).max(0.0))
            .max((-self.a_gram_min_eig).max(0.0))
    }
}

/// Report of the block correspondence across the Morita equivalence.
#[derive(Debug, Clone, Serialize)]
pub struct BlockReport {
    pub blocks_a: usize,
    pub blocks_b: usize,
    pub matched: bool,
    /// For each `B0` block, the rank of the induced submodule of `E0`.
    pub induced_ranks: Vec<usize>,
}

impl Bimodule {
    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn subgroup(&self) -> &[usize] {
        &self.subgroup
    }

    pub fn module_dim(&self) -> usize {
        self.group.order()
    }

    pub fn left_algebra(&self) -> &CrossedProduct {
        &self.left
    }

    pub fn right_algebra(&self) -> &MatrixAlgebra {
        &self.right
    }

    pub fn coset_count(&self) -> usize {
        self.cosets.len()
    }

    pub fn b_gram_min_eig(&self) -> f64 {
        self.b_gram_min_eig
    }

    pub fn a_gram_min_eig(&self) -> f64 {
        self.a_gram_min_eig
    }

    fn g(&self) -> usize {
        self.group.order()
    }

    fn h(&self) -> usize {
        self.subgroup.len()
    }

    /// Tagged index of `e_(coset c) (x) delta_s` in the crossed product.
    fn tag(&self, c: usize, s: usize) -> usize {
        c * self.g() + s
    }

    /// B-valued inner product as `C*(H)` coefficients
    /// (conjugate-linear in `x`, linear in `y`).
    pub fn inner_b(&self, x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::ZERO; self.h()];
        for (hi, &hg) in self.subgroup.iter().enumerate() {
            let mut acc = Complex64::ZERO;
            for s in 0..self.g() {
                acc += x[s].conj() * y[self.group.mul(s, hg)];
            }
            out[hi] = acc;
        }
        out
    }

    /// A-valued inner product as tagged crossed-product coefficients
    /// (linear in `x`, conjugate-linear in `y`).
    pub fn inner_a(&self, x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
        let g = self.g();
        let mut out = vec![Complex64::ZERO; self.cosets.len() * g];
        for s in 0..g {
            let c = self.coset_of[s];
            for u in 0..g {
                let t = self.group.mul(self.group.inv(u), s);
                out[self.tag(c, u)] += x[s] * y[t].conj();
            }
        }
        out
    }

    /// Left action of a tagged `A0` coefficient vector on a module vector.
    pub fn act_left(&self, a: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
        let g = self.g();
        let mut out = vec![Complex64::ZERO; g];
        for (m, slot) in out.iter_mut().enumerate() {
            let c = self.coset_of[m];
            let mut acc = Complex64::ZERO;
            for s in 0..g {
                acc += a[self.tag(c, s)] * x[self.group.mul(self.group.inv(s), m)];
            }
            *slot = acc;
        }
        out
    }

    /// Right action of a `C*(H)` coefficient vector on a module vector.
    pub fn act_right(&self, x: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        let g = self.g();
        let mut out = vec![Complex64::ZERO; g];
        for (m, slot) in out.iter_mut().enumerate() {
            let mut acc = Complex64::ZERO;
            for (hi, &hg) in self.subgroup.iter().enumerate() {
                // (x . v_h)_m = x_(m h^-1)
                acc += b[hi] * x[self.group.mul(m, self.group.inv(hg))];
            }
            *slot = acc;
        }
        out
    }

    /// Adjoint in tagged `A0` coordinates:
    /// `(e_c (x) delta_s)^* = e_(s^-1 c) (x) delta_(s^-1)`.
    pub fn star_a(&self, a: &[Complex64]) -> Vec<Complex64> {
        let g = self.g();
        let mut out = vec![Complex64::ZERO; a.len()];
        for c in 0..self.cosets.len() {
            for s in 0..g {
                let si = self.group.inv(s);
                let moved = self.coset_of[self.group.mul(si, self.cosets[c][0])];
                out[self.tag(moved, si)] += a[self.tag(c, s)].conj();
            }
        }
        out
    }

    /// Adjoint in `C*(H)` coordinates: `v_h^* = v_(h^-1)`.
    pub fn star_b(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::ZERO; b.len()];
        for hi in 0..self.h() {
            out[self.h_group.inv(hi)] += b[hi].conj();
        }
        out
    }

    /// Concrete matrix of a `C*(H)` coefficient vector in the regular
    /// representation of `H`.
    pub fn b_matrix(&self, b: &[Complex64]) -> CMatrix {
        let lambdas = self.h_group.left_translations();
        let mut out = CMatrix::zeros(self.h(), self.h());
        for (c, l) in b.iter().zip(&lambdas) {
            out = &out + &l.scaled(*c);
        }
        out
    }

    /// Concrete matrix of a tagged `A0` coefficient vector.
    pub fn a_matrix(&self, a: &[Complex64]) -> CMatrix {
        self.left.element(a)
    }
}

/// Build the imprimitivity bimodule for `H <= G`; certifies that `H` is a
/// subgroup and that both inner-product Gram forms are positive
/// semidefinite.
pub fn build_bimodule(group: &FiniteGroup, subgroup: &[usize], tol: &Tolerance) -> Result<Bimodule> {
    let op = "build_bimodule";
    let mut sub: Vec<usize> = subgroup.to_vec();
    sub.sort_unstable();
    sub.dedup();
    if !group.is_subgroup(&sub) {
        return Err(Error::NotSubgroup {
            op,
            detail: format!("{sub:?} is not closed in a group of order {}", group.order()),
        });
    }
    let g = group.order();

    // H as a group of its own (index 0 stays the identity because the
    // indices are sorted and 0 is a member).
    let h = sub.len();
    let mut h_index = vec![None; g];
    for (hi, &hg) in sub.iter().enumerate() {
        h_index[hg] = Some(hi);
    }
    let mut h_table = vec![vec![0usize; h]; h];
    for a in 0..h {
        for b in 0..h {
            let prod = group.mul(sub[a], sub[b]);
            h_table[a][b] = h_index[prod].ok_or(Error::NotSubgroup {
                op,
                detail: "subset not closed under products".into(),
            })?;
        }
    }
    let h_group = FiniteGroup::from_table(h_table)?;

    // Left cosets with minimal-index representatives, in representative order.
    let mut coset_of = vec![usize::MAX; g];
    let mut cosets: Vec<Vec<usize>> = Vec::new();
    for s in 0..g {
        if coset_of[s] != usize::MAX {
            continue;
        }
        let mut members: Vec<usize> = sub.iter().map(|&hg| group.mul(s, hg)).collect();
        members.sort_unstable();
        let c = cosets.len();
        for &m in &members {
            coset_of[m] = c;
        }
        cosets.push(members);
    }
    let q = cosets.len();

    // A0 = C(G/H) x| G for the translation action on cosets, implemented by
    // permutation unitaries.
    let diag: Vec<CMatrix> = (0..q)
        .map(|c| {
            CMatrix::from_fn(q, q, |i, j| {
                if i == c && j == c { Complex64::new(1.0, 0.0) } else { Complex64::ZERO }
            })
        })
        .collect();
    let base = MatrixAlgebra::from_span(q, &diag, *tol)?;
    let perms: Vec<CMatrix> = (0..g)
        .map(|s| {
            CMatrix::from_fn(q, q, |i, j| {
                if i == coset_of[group.mul(s, cosets[j][0])] {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::ZERO
                }
            })
        })
        .collect();
    let system = DynamicalSystem::new(base, group.clone(), ActionSpec::Unitaries(perms), tol)?;
    let left = build_crossed(system, tol)?;

    // B0 = C*(H) via the regular representation of H.
    let right = group_algebra(&h_group, *tol)?;

    let mut bm = Bimodule {
        group: group.clone(),
        subgroup: sub,
        h_group,
        h_index,
        cosets,
        coset_of,
        left,
        right,
        b_gram_min_eig: 0.0,
        a_gram_min_eig: 0.0,
    };

    // PSD certification of both Gram forms, represented concretely.
    let module_dim = g;
    let lambdas = bm.h_group.left_translations();
    let mut big_b = CMatrix::zeros(module_dim * h, module_dim * h);
    for s in 0..module_dim {
        for t in 0..module_dim {
            let st = bm.group.mul(bm.group.inv(s), t);
            if let Some(hi) = bm.h_index[st] {
                let block = &lambdas[hi];
                for i in 0..h {
                    for j in 0..h {
                        big_b[(s * h + i, t * h + j)] = block[(i, j)];
                    }
                }
            }
        }
    }
    let (bvals, _) = eig::herm_eigen(&big_b);
    bm.b_gram_min_eig = bvals.first().copied().unwrap_or(0.0);

    let adim = bm.left.algebra().ambient_dim();
    let mut big_a = CMatrix::zeros(module_dim * adim, module_dim * adim);
    for s in 0..module_dim {
        for t in 0..module_dim {
            let u = bm.group.mul(s, bm.group.inv(t));
            let block = bm.left.generator(bm.coset_of[s], u);
            for i in 0..adim {
                for j in 0..adim {
                    big_a[(s * adim + i, t * adim + j)] = block[(i, j)];
                }
            }
        }
    }
    let (avals, _) = eig::herm_eigen(&big_a);
    bm.a_gram_min_eig = avals.first().copied().unwrap_or(0.0);

    let psd_tol = tol.effective(big_b.hs_norm().max(big_a.hs_norm()), module_dim * adim.max(h));
    if bm.b_gram_min_eig < -psd_tol || bm.a_gram_min_eig < -psd_tol {
        return Err(Error::CertificationFailed {
            op,
            detail: format!(
                "a Gram form is not PSD (min eigenvalues {:.3e}, {:.3e})",
                bm.b_gram_min_eig, bm.a_gram_min_eig
            ),
        });
    }
    Ok(bm)
}

/// Verify the pre-imprimitivity axioms exhaustively on basis tuples and on
/// `samples` random combinations; residuals are measured through the
/// concrete realizations of both algebras.
pub fn verify_axioms(bm: &Bimodule, samples: usize, tol: &Tolerance, seed: u64) -> Result<AxiomReport> {
    let g = bm.g();
    let adim_tagged = bm.cosets.len() * g;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rand_vec = |len: usize, rng: &mut ChaCha8Rng| -> Vec<Complex64> {
        (0..len)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    };

    let basis_vec = |s: usize, len: usize| -> Vec<Complex64> {
        let mut v = vec![Complex64::ZERO; len];
        v[s] = Complex64::new(1.0, 0.0);
        v
    };

    // (1), (2): sesquilinearity of both inner products on random data.
    let mut sesquilinearity = 0.0f64;
    for _ in 0..samples.max(4) {
        let x = rand_vec(g, &mut rng);
        let xp = rand_vec(g, &mut rng);
        let y = rand_vec(g, &mut rng);
        let alpha = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        // B-valued: conjugate-linear in the first slot, linear in the second.
        let combo: Vec<Complex64> = x.iter().zip(&xp).map(|(a, b)| alpha * a + b).collect();
        let lhs = bm.inner_b(&combo, &y);
        let t1 = bm.inner_b(&x, &y);
        let t2 = bm.inner_b(&xp, &y);
        let rhs: Vec<Complex64> =
            t1.iter().zip(&t2).map(|(a, b)| alpha.conj() * a + b).collect();
        sesquilinearity = sesquilinearity.max(vdist(&lhs, &rhs));
        // A-valued: linear in the first slot.
        let lhs = bm.inner_a(&combo, &y);
        let t1 = bm.inner_a(&x, &y);
        let t2 = bm.inner_a(&xp, &y);
        let rhs: Vec<Complex64> = t1.iter().zip(&t2).map(|(a, b)| alpha * a + b).collect();
        sesquilinearity = sesquilinearity.max(vdist(&lhs, &rhs));
    }

    // Hermitian symmetry on all basis pairs.
    let mut symmetry = 0.0f64;
    for s in 0..g {
        for t in 0..g {
            let es = basis_vec(s, g);
            let et = basis_vec(t, g);
            let fwd = bm.b_matrix(&bm.inner_b(&es, &et));
            let bwd = bm.b_matrix(&bm.inner_b(&et, &es));
            symmetry = symmetry.max((&fwd.adjoint() - &bwd).hs_norm());
            let fwd = bm.a_matrix(&bm.inner_a(&es, &et));
            let bwd = bm.a_matrix(&bm.inner_a(&et, &es));
            symmetry = symmetry.max((&fwd.adjoint() - &bwd).hs_norm());
        }
    }

    // (3): <a x | y>_B = <x | a^* y>_B, exhaustive on tagged basis elements
    // against module basis pairs, plus random samples.
    let mut left_compat = 0.0f64;
    for a_idx in 0..adim_tagged {
        let a = basis_vec(a_idx, adim_tagged);
        let astar = bm.star_a(&a);
        for s in 0..g {
            let x = basis_vec(s, g);
            let ax = bm.act_left(&a, &x);
            for t in 0..g {
                let y = basis_vec(t, g);
                let lhs = bm.inner_b(&ax, &y);
                let rhs = bm.inner_b(&x, &bm.act_left(&astar, &y));
                left_compat = left_compat.max(vdist(&lhs, &rhs));
            }
        }
    }

    // (4): <x b | y>_A = <x | y b^*>_A, exhaustive on H basis elements.
    let mut right_compat = 0.0f64;
    for hi in 0..bm.h() {
        let b = basis_vec(hi, bm.h());
        let bstar = bm.star_b(&b);
        for s in 0..g {
            let x = basis_vec(s, g);
            let xb = bm.act_right(&x, &b);
            for t in 0..g {
                let y = basis_vec(t, g);
                let lhs = bm.inner_a(&xb, &y);
                let rhs = bm.inner_a(&x, &bm.act_right(&y, &bstar));
                right_compat = right_compat.max(vdist(&lhs, &rhs));
            }
        }
    }

    // (5): <x|y>_A z = x <y|z>_B on all basis triples.
    let mut associativity = 0.0f64;
    for qx in 0..g {
        let x = basis_vec(qx, g);
        for qy in 0..g {
            let y = basis_vec(qy, g);
            let a_inner = bm.inner_a(&x, &y);
            for qz in 0..g {
                let z = basis_vec(qz, g);
                let lhs = bm.act_left(&a_inner, &z);
                let rhs = bm.act_right(&x, &bm.inner_b(&y, &z));
                associativity = associativity.max(vdist(&lhs, &rhs));
            }
        }
    }

    // Random-combination passes of (3)-(5).
    for _ in 0..samples {
        let a = rand_vec(adim_tagged, &mut rng);
        let b = rand_vec(bm.h(), &mut rng);
        let x = rand_vec(g, &mut rng);
        let y = rand_vec(g, &mut rng);
        let z = rand_vec(g, &mut rng);
        let lhs = bm.inner_b(&bm.act_left(&a, &x), &y);
        let rhs = bm.inner_b(&x, &bm.act_left(&bm.star_a(&a), &y));
        left_compat = left_compat.max(vdist(&lhs, &rhs));
        let lhs = bm.inner_a(&bm.act_right(&x, &b), &y);
        let rhs = bm.inner_a(&x, &bm.act_right(&y, &bm.star_b(&b)));
        right_compat = right_compat.max(vdist(&lhs, &rhs));
        let lhs = bm.act_left(&bm.inner_a(&x, &y), &z);
        let rhs = bm.act_right(&x, &bm.inner_b(&y, &z));
        associativity = associativity.max(vdist(&lhs, &rhs));
    }

    // (6): contractivity on random samples, through the concrete algebras.
    let mut contractivity = 0.0f64;
    for _ in 0..samples.max(4) {
        let a = rand_vec(adim_tagged, &mut rng);
        let x = rand_vec(g, &mut rng);
        let a_norm = bm.a_matrix(&a).op_norm();
        let xx = bm.b_matrix(&bm.inner_b(&x, &x));
        let axax = bm.b_matrix(&bm.inner_b(&bm.act_left(&a, &x), &bm.act_left(&a, &x)));
        let diff = &xx.scaled(Complex64::new(a_norm * a_norm, 0.0)) - &axax;
        let (vals, _) = eig::herm_eigen(&diff);
        contractivity = contractivity.max((-vals.first().copied().unwrap_or(0.0)).max(0.0));

        let b = rand_vec(bm.h(), &mut rng);
        let b_norm = bm.b_matrix(&b).op_norm();
        let xxa = bm.a_matrix(&bm.inner_a(&x, &x));
        let xb = bm.act_right(&x, &b);
        let xbxb = bm.a_matrix(&bm.inner_a(&xb, &xb));
        let diff = &xxa.scaled(Complex64::new(b_norm * b_norm, 0.0)) - &xbxb;
        let (vals, _) = eig::herm_eigen(&diff);
        contractivity = contractivity.max((-vals.first().copied().unwrap_or(0.0)).max(0.0));
    }

    // (7): fullness. The basis inner products hit every tagged generator of
    // A0 and every v_h of B0.
    let mut hit_a = vec![false; adim_tagged];
    let mut hit_b = vec![false; bm.h()];
    for s in 0..g {
        for t in 0..g {
            let u = bm.group.mul(s, bm.group.inv(t));
            hit_a[bm.tag(bm.coset_of[s], u)] = true;
            if let Some(hi) = bm.h_index[bm.group.mul(bm.group.inv(s), t)] {
                hit_b[hi] = true;
            }
        }
    }
    let fullness_a = hit_a.iter().all(|&x| x);
    let fullness_b = hit_b.iter().all(|&x| x);

    // Norm compatibility on random x.
    let mut norm_compat = 0.0f64;
    for _ in 0..samples.max(4) {
        let x = rand_vec(g, &mut rng);
        let na = bm.a_matrix(&bm.inner_a(&x, &x)).op_norm();
        let nb = bm.b_matrix(&bm.inner_b(&x, &x)).op_norm();
        norm_compat = norm_compat.max((na - nb).abs());
    }

    let _ = tol;
    Ok(AxiomReport {
        sesquilinearity,
        symmetry,
        left_compat,
        right_compat,
        associativity,
        contractivity,
        fullness_a,
        fullness_b,
        norm_compat,
        b_gram_min_eig: bm.b_gram_min_eig,
        a_gram_min_eig: bm.a_gram_min_eig,
    })
}

/// Decompose both sides and report the finite-dimensional shadow of Morita
/// equivalence: equal block counts, with the rank of the induced module per
/// `B0` block as accompanying data.
pub fn block_correspondence(bm: &Bimodule, tol: &Tolerance, seed: u64) -> Result<BlockReport> {
    let dec_a = bm.left.algebra().decomposed_seeded(seed)?;
    let dec_b = bm.right.decomposed_seeded(seed)?;
    let blocks_a = dec_a.blocks.len();
    let blocks_b = dec_b.blocks.len();

    // Right action of B0's minimal central projections on the module.
    let g = bm.g();
    let mut induced_ranks = Vec::with_capacity(blocks_b);
    for b in &dec_b.blocks {
        // Express the projection in C*(H) coefficients (basis lambda_h /
        // sqrt(|H|) in element order), then act on the module from the right.
        let coords = bm.right.coords_of(&b.projection)?;
        let scale = (bm.h() as f64).sqrt();
        let coeffs: Vec<Complex64> = coords.iter().map(|c| c / scale).collect();
        let mut action = CMatrix::zeros(g, g);
        for (hi, &c) in coeffs.iter().enumerate() {
            let hg = bm.subgroup[hi];
            let r = CMatrix::from_fn(g, g, |i, j| {
                if i == bm.group.mul(j, hg) { Complex64::new(1.0, 0.0) } else { Complex64::ZERO }
            });
            action = &action + &r.scaled(c);
        }
        let eff = tol.effective(action.hs_norm(), g);
        let proj_defect =
            (&(&action * &action) - &action).hs_norm().max((&action - &action.adjoint()).hs_norm());
        if proj_defect > eff {
            return Err(Error::CertificationFailed {
                op: "block_correspondence",
                detail: format!("induced action of a central projection is not a projection (defect {proj_defect:.3e})"),
            });
        }
        induced_ranks.push(action.trace().re.round() as usize);
    }

    Ok(BlockReport { blocks_a, blocks_b, matched: blocks_a == blocks_b, induced_ranks })
}

fn vdist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}
