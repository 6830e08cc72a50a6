//! Discrete C*-dynamical systems and crossed products at finite scale.
//!
//! A crossed product `A x| G` is realized concretely through the regular
//! covariant representation on `C^N (x) l2(G)`: the base algebra acts by
//! `pi(a)(xi (x) eps_t) = alpha_t^-1(a) xi (x) eps_t` and the group by
//! `1 (x) lambda_s`. For finite groups this faithful realization coincides
//! with the full crossed product (finite groups are amenable).

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{unit_vec, MatrixAlgebra};
use crate::error::{Error, Result};
use crate::groups::{dual_group, FiniteGroup};
use crate::mat::CMatrix;
use crate::span;
use crate::tol::Tolerance;

/// How an action is handed in: either unitaries `w_s` implementing
/// `alpha_s = Ad(w_s)`, or explicit linear maps on the algebra's coordinate
/// space. The unitary encoding is canonicalized to the map encoding.
#[derive(Debug, Clone)]
pub enum ActionSpec {
    Unitaries(Vec<CMatrix>),
    Maps(Vec<CMatrix>),
}

/// A certified C*-dynamical system `(A, G, alpha)` with `A` concrete in
/// `M_N(C)` and `G` finite.
#[derive(Debug, Clone)]
pub struct DynamicalSystem {
    algebra: MatrixAlgebra,
    group: FiniteGroup,
    /// Per group element, the action as a `dim x dim` matrix on coordinates.
    maps: Vec<CMatrix>,
}

impl DynamicalSystem {
    /// Certify and build a dynamical system. The action must leave the
    /// algebra invariant, be multiplicative and *-preserving elementwise,
    /// compose along the group (`alpha_s alpha_t = alpha_(st)`), and fix the
    /// identity at `s = e`.
    pub fn new(
        algebra: MatrixAlgebra,
        group: FiniteGroup,
        action: ActionSpec,
        tol: &Tolerance,
    ) -> Result<Self> {
        let op = "DynamicalSystem::new";
        let d = algebra.dim();
        let n = algebra.ambient_dim();
        let g = group.order();

        let maps = match action {
            ActionSpec::Unitaries(ws) => {
                if ws.len() != g {
                    return Err(Error::ShapeMismatch {
                        op,
                        detail: format!("{} unitaries for a group of order {g}", ws.len()),
                    });
                }
                let mut maps = Vec::with_capacity(g);
                for (s, w) in ws.iter().enumerate() {
                    w.require_square(op)?;
                    if w.rows() != n {
                        return Err(Error::ShapeMismatch {
                            op,
                            detail: format!("unitary {s} is {}x{}, ambient is {n}", w.rows(), w.cols()),
                        });
                    }
                    let eff = tol.effective(1.0, n);
                    if (&(&w.adjoint() * w) - &CMatrix::identity(n)).hs_norm() > eff {
                        return Err(Error::CertificationFailed {
                            op,
                            detail: format!("implementing matrix {s} is not unitary"),
                        });
                    }
                    // alpha_s(b_j) = w b_j w^*, expanded back in the basis.
                    let mut cols = Vec::with_capacity(d);
                    for j in 0..d {
                        let moved = &(w * &algebra.basis()[j]) * &w.adjoint();
                        let (coords, resid) = span::coords_in_basis(&moved, algebra.basis());
                        if resid > tol.effective(moved.hs_norm(), n) {
                            return Err(Error::ActionNotInvariant { op, element: s, residual: resid });
                        }
                        cols.push(coords);
                    }
                    maps.push(CMatrix::from_fn(d, d, |k, j| cols[j][k]));
                }
                maps
            }
            ActionSpec::Maps(maps) => {
                if maps.len() != g {
                    return Err(Error::ShapeMismatch {
                        op,
                        detail: format!("{} maps for a group of order {g}", maps.len()),
                    });
                }
                for m in &maps {
                    if m.rows() != d || m.cols() != d {
                        return Err(Error::ShapeMismatch {
                            op,
                            detail: format!("action map is {}x{}, dim(A) = {d}", m.rows(), m.cols()),
                        });
                    }
                }
                maps
            }
        };

        let sys = DynamicalSystem { algebra, group, maps };
        sys.certify(tol, op)?;
        Ok(sys)
    }

    fn certify(&self, tol: &Tolerance, op: &'static str) -> Result<()> {
        let d = self.algebra.dim();
        let g = self.group.order();
        let eff = tol.effective(1.0, d.max(self.algebra.ambient_dim()));

        // alpha_e = id.
        if (&self.maps[0] - &CMatrix::identity(d)).hs_norm() > eff {
            return Err(Error::CertificationFailed { op, detail: "alpha_e is not the identity".into() });
        }
        // Composition law.
        for s in 0..g {
            for t in 0..g {
                let st = self.group.mul(s, t);
                let comp = &self.maps[s] * &self.maps[t];
                if (&comp - &self.maps[st]).hs_norm() > eff {
                    return Err(Error::CertificationFailed {
                        op,
                        detail: format!("alpha_{s} . alpha_{t} differs from alpha_({st})"),
                    });
                }
            }
        }
        // Elementwise *-homomorphism property.
        for (s, m) in self.maps.iter().enumerate() {
            for i in 0..d {
                let ai = self.apply(s, &unit_vec(d, i));
                // star preservation
                let lhs = self.algebra.star_coords(&ai);
                let rhs = self.apply(s, &self.algebra.star_coords(&unit_vec(d, i)));
                if vec_dist(&lhs, &rhs) > eff {
                    return Err(Error::CertificationFailed {
                        op,
                        detail: format!("alpha_{s} does not commute with the involution"),
                    });
                }
                for j in 0..d {
                    let aj = self.apply(s, &unit_vec(d, j));
                    let lhs = self.algebra.mul_coords(&ai, &aj);
                    let prod = self.algebra.mul_coords(&unit_vec(d, i), &unit_vec(d, j));
                    let rhs = self.apply(s, &prod);
                    if vec_dist(&lhs, &rhs) > eff {
                        return Err(Error::CertificationFailed {
                            op,
                            detail: format!("alpha_{s} is not multiplicative at pair ({i},{j})"),
                        });
                    }
                }
            }
            let _ = m;
        }
        Ok(())
    }

    pub fn algebra(&self) -> &MatrixAlgebra {
        &self.algebra
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    /// Apply `alpha_s` to a coordinate vector.
    pub fn apply(&self, s: usize, coords: &[Complex64]) -> Vec<Complex64> {
        self.maps[s].apply(coords)
    }
}

/// A crossed product realized inside `M_(N |G|)(C)`.
///
/// The tagged generators `gens[k * |G| + s]` are the concrete matrices of
/// `b_k (x) delta_s`; all pairwise basis relations
/// `(a (x) delta_s)(b (x) delta_t) = a alpha_s(b) (x) delta_(st)` and the
/// involution formula are certified exhaustively at build time.
pub struct CrossedProduct {
    system: DynamicalSystem,
    algebra: MatrixAlgebra,
    gens: Vec<CMatrix>,
    /// Inverse of the generator-to-orthonormal-basis coordinate transform.
    gen_coords_inv: CMatrix,
    relation_residual: f64,
    star_residual: f64,
}

impl CrossedProduct {
    pub fn system(&self) -> &DynamicalSystem {
        &self.system
    }

    pub fn algebra(&self) -> &MatrixAlgebra {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    /// Concrete matrix of `b_k (x) delta_s`.
    pub fn generator(&self, k: usize, s: usize) -> &CMatrix {
        &self.gens[k * self.system.group.order() + s]
    }

    pub fn gens(&self) -> &[CMatrix] {
        &self.gens
    }

    /// Worst residual of the exhaustive product-relation check.
    pub fn relation_residual(&self) -> f64 {
        self.relation_residual
    }

    /// Worst residual of the exhaustive involution-relation check.
    pub fn star_residual(&self) -> f64 {
        self.star_residual
    }

    /// The matrix of an element given in tagged coordinates.
    pub fn element(&self, tagged: &[Complex64]) -> CMatrix {
        let nn = self.algebra.ambient_dim();
        let mut m = CMatrix::zeros(nn, nn);
        for (c, gm) in tagged.iter().zip(&self.gens) {
            m = &m + &gm.scaled(*c);
        }
        m
    }

    /// Tagged coordinates of a matrix in the crossed product.
    pub fn tagged_coords_of(&self, x: &CMatrix) -> Result<Vec<Complex64>> {
        let ortho = self.algebra.coords_of(x)?;
        Ok(self.gen_coords_inv.apply(&ortho))
    }
}

/// Build the crossed product of a certified system via the regular covariant
/// representation; certifies injectivity (dimension `|G| dim A`) and the full
/// set of basis relations.
pub fn build_crossed(system: DynamicalSystem, tol: &Tolerance) -> Result<CrossedProduct> {
    let op = "build_crossed";
    let d = system.algebra.dim();
    let n = system.algebra.ambient_dim();
    let g = system.group.order();
    let big = n * g;

    // Concrete alpha_t^-1(b_k) blocks, indexed [k][t].
    let mut moved: Vec<Vec<CMatrix>> = Vec::with_capacity(d);
    for k in 0..d {
        let mut per_t = Vec::with_capacity(g);
        for t in 0..g {
            let coords = system.apply(system.group.inv(t), &unit_vec(d, k));
            per_t.push(system.algebra.element(&coords));
        }
        moved.push(per_t);
    }

    // gens[(k,s)] = pi(b_k) lambda_s on C^n (x) C^g, index (i,t) -> i*g + t:
    // entry [(i,t),(j,u)] = [t = s u] alpha_t^-1(b_k)[i,j].
    let mut gens = Vec::with_capacity(d * g);
    for k in 0..d {
        for s in 0..g {
            let blocks = &moved[k];
            let group = &system.group;
            let m = CMatrix::from_fn(big, big, |row, col| {
                let (i, t) = (row / g, row % g);
                let (j, u) = (col / g, col % g);
                if t == group.mul(s, u) { blocks[t][(i, j)] } else { Complex64::ZERO }
            });
            gens.push(m);
        }
    }

    // Fast path: the generators are often exactly orthogonal with common
    // norm sqrt(|G|) (any unitary-implemented or basis-permuting action);
    // then they are the orthonormal basis up to scale and the structure
    // tensor transfers algebraically.
    let scale = (g as f64).sqrt();
    let mut orthogonal = true;
    'ortho: for a in 0..d * g {
        for b in a..d * g {
            let ip = gens[a].hs_inner(&gens[b]);
            let expect = if a == b { Complex64::new(g as f64, 0.0) } else { Complex64::ZERO };
            if (ip - expect).norm() > tol.effective(g as f64, big) {
                orthogonal = false;
                break 'ortho;
            }
        }
    }

    // Predicted product coordinates in tagged indexing:
    // (b_k (x) d_s)(b_l (x) d_t) = b_k alpha_s(b_l) (x) d_(st).
    let predicted = |k: usize, s: usize, l: usize, t: usize| -> (Vec<Complex64>, usize) {
        let y = system.apply(s, &unit_vec(d, l));
        let prod = system.algebra.mul_coords(&unit_vec(d, k), &y);
        (prod, system.group.mul(s, t))
    };

    // Exhaustive relation certification (all pairs).
    let mut relation_residual = 0.0f64;
    for k in 0..d {
        for s in 0..g {
            for l in 0..d {
                for t in 0..g {
                    let numeric = &gens[k * g + s] * &gens[l * g + t];
                    let (coef, st) = predicted(k, s, l, t);
                    let mut expect = CMatrix::zeros(big, big);
                    for (m, &cm) in coef.iter().enumerate() {
                        if cm.norm_sqr() > 0.0 {
                            expect = &expect + &gens[m * g + st].scaled(cm);
                        }
                    }
                    let resid = (&numeric - &expect).hs_norm();
                    relation_residual = relation_residual.max(resid);
                }
            }
        }
    }
    let eff = tol.effective(scale, big);
    if relation_residual > eff {
        return Err(Error::CertificationFailed {
            op,
            detail: format!("basis product relations fail (worst residual {relation_residual:.3e})"),
        });
    }

    // Involution: (b_k (x) d_s)^* = alpha_(s^-1)(b_k^*) (x) d_(s^-1).
    let mut star_residual = 0.0f64;
    for k in 0..d {
        for s in 0..g {
            let adj = gens[k * g + s].adjoint();
            let si = system.group.inv(s);
            let coef = system.apply(si, &system.algebra.star_coords(&unit_vec(d, k)));
            let mut expect = CMatrix::zeros(big, big);
            for (m, &cm) in coef.iter().enumerate() {
                if cm.norm_sqr() > 0.0 {
                    expect = &expect + &gens[m * g + si].scaled(cm);
                }
            }
            star_residual = star_residual.max((&adj - &expect).hs_norm());
        }
    }
    if star_residual > eff {
        return Err(Error::CertificationFailed {
            op,
            detail: format!("involution relations fail (worst residual {star_residual:.3e})"),
        });
    }

    let algebra = if orthogonal {
        // Orthonormal basis = gens / sqrt(|G|); rescale the tagged tensor.
        let basis: Vec<CMatrix> = gens.iter().map(|m| m.scaled(Complex64::new(1.0 / scale, 0.0))).collect();
        let dg = d * g;
        let mut mul = vec![vec![Vec::new(); dg]; dg];
        for k in 0..d {
            for s in 0..g {
                for l in 0..d {
                    for t in 0..g {
                        let (coef, st) = predicted(k, s, l, t);
                        let mut row = vec![Complex64::ZERO; dg];
                        for (m, &cm) in coef.iter().enumerate() {
                            row[m * g + st] = cm * scale;
                        }
                        mul[k * g + s][l * g + t] = row;
                    }
                }
            }
        }
        let mut star = Vec::with_capacity(dg);
        for k in 0..d {
            for s in 0..g {
                let si = system.group.inv(s);
                let coef = system.apply(si, &system.algebra.star_coords(&unit_vec(d, k)));
                let mut row = vec![Complex64::ZERO; dg];
                for (m, &cm) in coef.iter().enumerate() {
                    row[m * g + si] = cm;
                }
                star.push(row);
            }
        }
        MatrixAlgebra::from_certified_parts(
            big,
            basis,
            mul,
            star,
            relation_residual.max(star_residual),
            *tol,
        )?
    } else {
        MatrixAlgebra::from_span(big, &gens, *tol)?
    };

    // Injectivity of the regular form: dimension must be |G| dim(A).
    if algebra.dim() != d * g {
        return Err(Error::CertificationFailed {
            op,
            detail: format!(
                "crossed product has dimension {} instead of |G| dim(A) = {}; the base representation is not faithful",
                algebra.dim(),
                d * g
            ),
        });
    }

    // Transform between tagged generators and the orthonormal basis.
    let dg = d * g;
    let mut gc = CMatrix::zeros(dg, dg);
    for (col, gm) in gens.iter().enumerate() {
        let coords = algebra.coords_of(gm)?;
        for (row, &c) in coords.iter().enumerate() {
            gc[(row, col)] = c;
        }
    }
    let gen_coords_inv = crate::eig::inverse(&gc, op)?;

    Ok(CrossedProduct {
        system,
        algebra,
        gens,
        gen_coords_inv,
        relation_residual,
        star_residual,
    })
}

/// Report of the discrete Stone-von Neumann check for one group.
#[derive(Debug, Clone, Serialize)]
pub struct SvnReport {
    pub is_single_block: bool,
    pub block_size: usize,
    pub multiplicity: usize,
    /// Worst defect of the matrix-unit relations over all index quadruples.
    pub matrix_unit_residual: f64,
}

/// Build `C(G) x| G` for the translation action and verify it is the full
/// matrix algebra on `l2(G)`: the elements `e_(s,t) = chi_s (x) delta_(st^-1)`
/// must satisfy the matrix-unit relations, and the block decomposition must
/// produce a single block of size `|G|`.
pub fn stone_von_neumann_check(group: &FiniteGroup, tol: &Tolerance, seed: u64) -> Result<SvnReport> {
    let g = group.order();
    // C(G) as the diagonal algebra, basis chi_t = E_tt indexed by elements.
    let diag_basis: Vec<CMatrix> = (0..g)
        .map(|t| {
            CMatrix::from_fn(g, g, |i, j| {
                if i == t && j == t { Complex64::new(1.0, 0.0) } else { Complex64::ZERO }
            })
        })
        .collect();
    let base = MatrixAlgebra::from_span(g, &diag_basis, *tol)?;
    // Translation: alpha_s(chi_t) = chi_(st), implemented by lambda_s.
    let system = DynamicalSystem::new(
        base,
        group.clone(),
        ActionSpec::Unitaries(group.left_translations()),
        tol,
    )?;
    let cp = build_crossed(system, tol)?;

    // Matrix units: e_(s,t) = chi_s (x) delta_(s t^-1). The base basis E_tt
    // sits at coordinate t, so e_(s,t) is the tagged generator (s, s t^-1).
    let unit = |s: usize, t: usize| cp.generator(s, group.mul(s, group.inv(t)));
    let mut worst = 0.0f64;
    for q in 0..g {
        for r in 0..g {
            for s in 0..g {
                for t in 0..g {
                    let prod = &(unit(q, r) * unit(s, t));
                    let resid = if r == s {
                        (prod - unit(q, t)).hs_norm()
                    } else {
                        prod.hs_norm()
                    };
                    worst = worst.max(resid);
                }
            }
        }
    }
    for s in 0..g {
        for t in 0..g {
            worst = worst.max((&unit(s, t).adjoint() - unit(t, s)).hs_norm());
        }
    }

    // The multiplication/translation covariant pair (M, lambda) acts on
    // l2(G) itself and integrates to an isomorphism onto M_(|G|): the image
    // algebra must be full (dimension |G|^2, so the map is faithful) and
    // decompose as a single block of size |G| with multiplicity 1.
    let pi: Vec<CMatrix> = cp.system().algebra().basis().to_vec();
    let images = integrate_covariant(cp.system(), &pi, &group.left_translations(), tol)?;
    let image_alg = MatrixAlgebra::from_span(g, &images, *tol)?;
    if image_alg.dim() != cp.dim() {
        return Err(Error::CertificationFailed {
            op: "stone_von_neumann_check",
            detail: format!(
                "integrated representation has dimension {} instead of {}",
                image_alg.dim(),
                cp.dim()
            ),
        });
    }
    let dec = image_alg.decomposed_seeded(seed)?;
    let is_single_block = dec.blocks.len() == 1;
    let (block_size, multiplicity) = if is_single_block {
        (dec.blocks[0].size, dec.blocks[0].multiplicity)
    } else {
        (0, 0)
    };
    Ok(SvnReport { is_single_block, block_size, multiplicity, matrix_unit_residual: worst })
}

/// The conditional expectation onto the base algebra, computed as the
/// average of the dual action over the dual group:
/// `E(x) = (1/|G^|) sum_chi beta_chi(x)` with
/// `beta_chi(a (x) delta_s) = chi(s) (a (x) delta_s)`.
///
/// Input and output are coordinates: `x` in tagged crossed-product
/// coordinates, the result over the base algebra's basis. The off-identity
/// slices of the average are certified to vanish.
pub fn conditional_expectation(cp: &CrossedProduct, tagged: &[Complex64]) -> Result<Vec<Complex64>> {
    let op = "conditional_expectation";
    let group = cp.system.group();
    if !group.is_abelian() {
        return Err(Error::NotAbelian { op });
    }
    let d = cp.system.algebra.dim();
    let g = group.order();
    if tagged.len() != d * g {
        return Err(Error::ShapeMismatch {
            op,
            detail: format!("{} coordinates for dimension {}", tagged.len(), d * g),
        });
    }
    let arc = Arc::new(group.clone());
    let chars = dual_group(&arc, *cp.system.algebra.tolerance(), crate::DEFAULT_SEED)?;
    // Average of chi(s) over the dual group (1 at e, 0 elsewhere by
    // orthogonality; computed, not assumed).
    let mut avg = vec![Complex64::ZERO; g];
    for (s, slot) in avg.iter_mut().enumerate() {
        let sum: Complex64 = chars.iter().map(|ch| ch.value(s)).sum();
        *slot = sum / g as f64;
    }
    let mut out = vec![Complex64::ZERO; d];
    let mut off_identity = 0.0f64;
    for k in 0..d {
        for s in 0..g {
            let averaged = tagged[k * g + s] * avg[s];
            if s == 0 {
                out[k] = averaged;
            } else {
                off_identity = off_identity.max(averaged.norm());
            }
        }
    }
    let scale: f64 = tagged.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if off_identity > cp.system.algebra.tolerance().effective(scale, d * g) {
        return Err(Error::CertificationFailed {
            op,
            detail: format!("dual average leaves mass {off_identity:.3e} off the identity fiber"),
        });
    }
    Ok(out)
}

/// Clock and shift pair for the rational rotation algebra at angle `p/q`:
/// `u = diag(1, w, ..., w^(q-1))` with `w = exp(2 pi i p / q)` and `v` the
/// cyclic shift, so that `u v = w v u`.
#[derive(Debug, Clone)]
pub struct ClockShiftPair {
    pub u: CMatrix,
    pub v: CMatrix,
    /// Whether gcd(p, q) = 1; when false the pair still satisfies the
    /// commutation relation but need not generate all of `M_q`.
    pub coprime: bool,
}

pub fn clock_shift(q: usize, p: i64) -> Result<ClockShiftPair> {
    if q < 2 {
        return Err(Error::InvalidArgument {
            op: "clock_shift",
            detail: format!("q must be at least 2, got {q}"),
        });
    }
    let omega = |k: i64| {
        let angle = std::f64::consts::TAU * (p * k) as f64 / q as f64;
        Complex64::new(angle.cos(), angle.sin())
    };
    let u = CMatrix::diag(&(0..q as i64).map(omega).collect::<Vec<_>>());
    let v = CMatrix::from_fn(q, q, |i, j| {
        if i == (j + 1) % q { Complex64::new(1.0, 0.0) } else { Complex64::ZERO }
    });
    let coprime = gcd(p.rem_euclid(q as i64) as usize, q) == 1;
    Ok(ClockShiftPair { u, v, coprime })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Integrate a covariant pair `(pi, U)` on `C^h` into a representation of
/// the crossed product: images of the tagged basis `(b_k (x) delta_s)` are
/// `pi(b_k) U_s`.
///
/// The covariance identity `U_s pi(a) U_s^* = pi(alpha_s(a))` is certified
/// first (the worst offending group element is reported on failure), along
/// with nondegeneracy of `pi` and the group-representation laws for `U`; the
/// result is certified to satisfy the crossed product's basis relations.
pub fn integrate_covariant(
    system: &DynamicalSystem,
    pi: &[CMatrix],
    u: &[CMatrix],
    tol: &Tolerance,
) -> Result<Vec<CMatrix>> {
    let op = "integrate_covariant";
    let d = system.algebra.dim();
    let g = system.group.order();
    if pi.len() != d || u.len() != g {
        return Err(Error::ShapeMismatch {
            op,
            detail: format!("got {} algebra images and {} unitaries", pi.len(), u.len()),
        });
    }
    let h = pi[0].rows();
    for m in pi.iter().chain(u.iter()) {
        m.require_square(op)?;
        if m.rows() != h {
            return Err(Error::ShapeMismatch { op, detail: "images differ in size".into() });
        }
    }
    let eff = tol.effective(1.0, h.max(d));

    // pi is a *-homomorphism and nondegenerate (pi(1_A) = I).
    crate::gns::certify_rep(&system.algebra, pi, tol)?;
    let mut unit_image = CMatrix::zeros(h, h);
    for (k, pk) in pi.iter().enumerate() {
        unit_image = &unit_image + &pk.scaled(system.algebra.unit_coords()[k]);
    }
    if (&unit_image - &CMatrix::identity(h)).hs_norm() > eff {
        let corner = (&CMatrix::identity(h) - &unit_image).trace().re.round() as usize;
        return Err(Error::DegenerateRepresentation { op, corner_rank: corner.max(1) });
    }

    // U is a unitary representation.
    let id = CMatrix::identity(h);
    if (&u[0] - &id).hs_norm() > eff {
        return Err(Error::CertificationFailed { op, detail: "U_e is not the identity".into() });
    }
    for (s, us) in u.iter().enumerate() {
        if (&(&us.adjoint() * us) - &id).hs_norm() > eff {
            return Err(Error::CertificationFailed {
                op,
                detail: format!("U_{s} is not unitary"),
            });
        }
        for (t, ut) in u.iter().enumerate() {
            if (&(us * ut) - &u[system.group.mul(s, t)]).hs_norm() > eff {
                return Err(Error::CertificationFailed {
                    op,
                    detail: format!("U_{s} U_{t} differs from U_(st)"),
                });
            }
        }
    }

    // Covariance: U_s pi(b_j) U_s^* = pi(alpha_s(b_j)).
    for (s, us) in u.iter().enumerate() {
        let mut worst = 0.0f64;
        for j in 0..d {
            let lhs = &(us * &pi[j]) * &us.adjoint();
            let coords = system.apply(s, &unit_vec(d, j));
            let mut rhs = CMatrix::zeros(h, h);
            for (k, pk) in pi.iter().enumerate() {
                rhs = &rhs + &pk.scaled(coords[k]);
            }
            worst = worst.max((&lhs - &rhs).hs_norm());
        }
        if worst > eff {
            return Err(Error::CovarianceViolation { op, element: s, residual: worst });
        }
    }

    // Images of the tagged basis, with the product relations certified.
    let mut images = Vec::with_capacity(d * g);
    for k in 0..d {
        for s in 0..g {
            images.push(&pi[k] * &u[s]);
        }
    }
    let mut worst = 0.0f64;
    for k in 0..d {
        for s in 0..g {
            for l in 0..d {
                for t in 0..g {
                    let numeric = &images[k * g + s] * &images[l * g + t];
                    let y = system.apply(s, &unit_vec(d, l));
                    let coef = system.algebra.mul_coords(&unit_vec(d, k), &y);
                    let st = system.group.mul(s, t);
                    let mut expect = CMatrix::zeros(h, h);
                    for (m, &cm) in coef.iter().enumerate() {
                        expect = &expect + &images[m * g + st].scaled(cm);
                    }
                    worst = worst.max((&numeric - &expect).hs_norm());
                }
            }
        }
    }
    if worst > eff.max(1e-9) {
        return Err(Error::NotHomomorphism { op, residual: worst });
    }
    Ok(images)
}

fn vec_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_SEED;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn scalars() -> MatrixAlgebra {
        MatrixAlgebra::from_span(1, &[CMatrix::identity(1)], tol()).unwrap()
    }

    fn trivial_system(group: FiniteGroup) -> DynamicalSystem {
        let ws = vec![CMatrix::identity(1); group.order()];
        DynamicalSystem::new(scalars(), group, ActionSpec::Unitaries(ws), &tol()).unwrap()
    }

    #[test]
    fn trivial_action_gives_group_algebra() {
        let g = FiniteGroup::cyclic(3);
        let cp = build_crossed(trivial_system(g), &tol()).unwrap();
        assert_eq!(cp.dim(), 3);
        let dec = cp.algebra().decomposed_seeded(DEFAULT_SEED).unwrap();
        assert_eq!(dec.sizes(), vec![1, 1, 1]);
    }

    #[test]
    fn translation_action_on_functions_z3() {
        // C(Z/3) x| Z/3 has dimension 9 (and is M_3 by Stone-von Neumann).
        let rep = stone_von_neumann_check(&FiniteGroup::cyclic(3), &tol(), DEFAULT_SEED).unwrap();
        assert!(rep.is_single_block);
        assert_eq!(rep.block_size, 3);
        assert_eq!(rep.multiplicity, 1);
        assert!(rep.matrix_unit_residual <= 1e-12, "residual {}", rep.matrix_unit_residual);
    }

    #[test]
    fn crossed_by_trivial_group_is_the_algebra() {
        let e1 = CMatrix::diag(&[c(1., 0.), c(0., 0.)]);
        let alg = MatrixAlgebra::generate(2, &[e1], true, tol()).unwrap();
        let sys = DynamicalSystem::new(
            alg.clone(),
            FiniteGroup::trivial(),
            ActionSpec::Unitaries(vec![CMatrix::identity(2)]),
            &tol(),
        )
        .unwrap();
        let cp = build_crossed(sys, &tol()).unwrap();
        assert_eq!(cp.dim(), alg.dim());
    }

    #[test]
    fn svn_single_block_for_z2_and_s3() {
        let rep = stone_von_neumann_check(&FiniteGroup::cyclic(2), &tol(), DEFAULT_SEED).unwrap();
        assert!(rep.is_single_block && rep.block_size == 2);
        let s3 = FiniteGroup::symmetric(3).unwrap();
        let rep = stone_von_neumann_check(&s3, &tol(), DEFAULT_SEED).unwrap();
        assert!(rep.is_single_block && rep.block_size == 6);
        assert!(rep.matrix_unit_residual <= 1e-12);
    }

    #[test]
    fn conditional_expectation_extracts_identity_coefficient() {
        let g = FiniteGroup::cyclic(4);
        let cp = build_crossed(trivial_system(g), &tol()).unwrap();
        // x = a (x) delta_e maps to a.
        let mut tagged = vec![Complex64::ZERO; 4];
        tagged[0] = c(2.5, -1.0);
        let out = conditional_expectation(&cp, &tagged).unwrap();
        assert!((out[0] - c(2.5, -1.0)).norm() < 1e-12);
        // x = a (x) delta_s for s != e maps to 0.
        let mut tagged = vec![Complex64::ZERO; 4];
        tagged[2] = c(1.0, 3.0);
        let out = conditional_expectation(&cp, &tagged).unwrap();
        assert!(out[0].norm() < 1e-12);
        // Random element: averaging equals coefficient extraction.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let tagged: Vec<Complex64> = (0..4)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let out = conditional_expectation(&cp, &tagged).unwrap();
        assert!((out[0] - tagged[0]).norm() < 1e-12);
    }

    #[test]
    fn conditional_expectation_rejects_nonabelian() {
        let s3 = FiniteGroup::symmetric(3).unwrap();
        let cp = build_crossed(trivial_system(s3), &tol()).unwrap();
        let tagged = vec![Complex64::ZERO; 6];
        assert!(matches!(
            conditional_expectation(&cp, &tagged),
            Err(Error::NotAbelian { .. })
        ));
    }

    #[test]
    fn conditional_expectation_is_positive_and_faithful_on_cg_z3() {
        // On C(G) x| G the form (x, y) -> E(x^* y) has full rank.
        let g = FiniteGroup::cyclic(3);
        let diag: Vec<CMatrix> = (0..3)
            .map(|t| {
                CMatrix::from_fn(3, 3, |i, j| {
                    if i == t && j == t { c(1., 0.) } else { Complex64::ZERO }
                })
            })
            .collect();
        let base = MatrixAlgebra::from_span(3, &diag, tol()).unwrap();
        let sys = DynamicalSystem::new(
            base,
            g.clone(),
            ActionSpec::Unitaries(g.left_translations()),
            &tol(),
        )
        .unwrap();
        let cp = build_crossed(sys, &tol()).unwrap();
        let dim = cp.dim();
        // Gram of the sesquilinear A-valued form, flattened: row p holds
        // the coordinates of E(gens_p^* gens_q) for all q.
        let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
        for p in 0..dim {
            let mut row = Vec::new();
            for q in 0..dim {
                let prod = &cp.gens()[p].adjoint() * &cp.gens()[q];
                let tagged = cp.tagged_coords_of(&prod).unwrap();
                row.extend(conditional_expectation(&cp, &tagged).unwrap());
            }
            rows.push(row);
        }
        let rank = crate::span::vector_rank(&rows, &tol(), "test").unwrap();
        assert_eq!(rank, dim, "conditional expectation is not faithful");
        // Positivity on a few x^* x.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let tagged: Vec<Complex64> = (0..dim)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let x = cp.element(&tagged);
            let xs = &x.adjoint() * &x;
            let exp = conditional_expectation(&cp, &cp.tagged_coords_of(&xs).unwrap()).unwrap();
            let mat = cp.system().algebra().element(&exp);
            assert!(crate::calculus::is_positive(&mat, &tol()).unwrap());
        }
    }

    #[test]
    fn clock_shift_pauli_pair() {
        let pair = clock_shift(2, 1).unwrap();
        assert!(pair.coprime);
        let z = CMatrix::diag(&[c(1., 0.), c(-1., 0.)]);
        let x = CMatrix::from_real(2, 2, &[0., 1., 1., 0.]).unwrap();
        assert!((&pair.u - &z).hs_norm() < 1e-12);
        assert!((&pair.v - &x).hs_norm() < 1e-12);
        // uv = -vu.
        let uv = &pair.u * &pair.v;
        let vu = &pair.v * &pair.u;
        assert!((&uv + &vu).hs_norm() < 1e-12);
    }

    #[test]
    fn clock_shift_commutation_and_fullness() {
        for (q, p) in [(3usize, 1i64), (5, 2), (4, 3)] {
            let pair = clock_shift(q, p).unwrap();
            let omega = Complex64::from_polar(1.0, std::f64::consts::TAU * p as f64 / q as f64);
            let uv = &pair.u * &pair.v;
            let vu_scaled = (&pair.v * &pair.u).scaled(omega);
            assert!((&uv - &vu_scaled).hs_norm() < 1e-12, "uv != w vu for q={q}, p={p}");
            // Unitarity.
            let id = CMatrix::identity(q);
            assert!((&(&pair.u.adjoint() * &pair.u) - &id).hs_norm() < 1e-12);
            assert!((&(&pair.v.adjoint() * &pair.v) - &id).hs_norm() < 1e-12);
            if pair.coprime {
                let alg =
                    MatrixAlgebra::generate(q, &[pair.u.clone(), pair.v.clone()], true, tol())
                        .unwrap();
                assert_eq!(alg.dim(), q * q, "clock/shift q={q} p={p} not full");
                let dec = alg.decomposed_seeded(DEFAULT_SEED).unwrap();
                assert_eq!(dec.sizes(), vec![q]);
            }
        }
    }

    #[test]
    fn clock_shift_non_coprime_flagged() {
        let pair = clock_shift(4, 2).unwrap();
        assert!(!pair.coprime);
        assert!(clock_shift(1, 1).is_err());
    }

    #[test]
    fn integrate_regular_pair_recovers_crossed_product() {
        // For C(G) x| G the multiplication/translation pair (M, lambda) on
        // l2(G) is covariant and integrates to all of M_(|G|).
        let g = FiniteGroup::cyclic(3);
        let diag: Vec<CMatrix> = (0..3)
            .map(|t| {
                CMatrix::from_fn(3, 3, |i, j| {
                    if i == t && j == t { c(1., 0.) } else { Complex64::ZERO }
                })
            })
            .collect();
        let base = MatrixAlgebra::from_span(3, &diag, tol()).unwrap();
        let sys = DynamicalSystem::new(
            base,
            g.clone(),
            ActionSpec::Unitaries(g.left_translations()),
            &tol(),
        )
        .unwrap();
        // pi = multiplication by the basis functions = the diagonal units
        // themselves; U = lambda.
        let pi: Vec<CMatrix> = sys.algebra().basis().to_vec();
        let images = integrate_covariant(&sys, &pi, &g.left_translations(), &tol()).unwrap();
        assert_eq!(images.len(), 9);
        let image_alg = MatrixAlgebra::from_span(3, &images, tol()).unwrap();
        assert_eq!(image_alg.dim(), 9, "M x| lambda does not fill M_3");

        // Trivial group: pi x| U = pi.
        let triv = trivial_system(FiniteGroup::trivial());
        let images =
            integrate_covariant(&triv, &[CMatrix::identity(1)], &[CMatrix::identity(1)], &tol())
                .unwrap();
        assert_eq!(images.len(), 1);
    }

    #[test]
    fn integrate_rejects_noncovariant_pair() {
        // Flip action on C^2 with U == identity is not covariant.
        let e1 = CMatrix::diag(&[c(1., 0.), c(0., 0.)]);
        let alg = MatrixAlgebra::generate(2, &[e1], true, tol()).unwrap();
        let flip = CMatrix::from_real(2, 2, &[0., 1., 1., 0.]).unwrap();
        let sys = DynamicalSystem::new(
            alg.clone(),
            FiniteGroup::cyclic(2),
            ActionSpec::Unitaries(vec![CMatrix::identity(2), flip]),
            &tol(),
        )
        .unwrap();
        let pi: Vec<CMatrix> = sys.algebra().basis().to_vec();
        let ids = vec![CMatrix::identity(2), CMatrix::identity(2)];
        assert!(matches!(
            integrate_covariant(&sys, &pi, &ids, &tol()),
            Err(Error::CovarianceViolation { .. })
        ));
    }

    #[test]
    fn action_certification_rejects_bad_maps() {
        // A map that is not multiplicative: swap coordinates of C^2 but
        // scale one of them.
        let e1 = CMatrix::diag(&[c(1., 0.), c(0., 0.)]);
        let alg = MatrixAlgebra::generate(2, &[e1], true, tol()).unwrap();
        let d = alg.dim();
        let bad = CMatrix::from_fn(d, d, |i, j| {
            if i == j { c(if i == 0 { 2.0 } else { 1.0 }, 0.) } else { Complex64::ZERO }
        });
        let res = DynamicalSystem::new(
            alg,
            FiniteGroup::cyclic(2),
            ActionSpec::Maps(vec![CMatrix::identity(d), bad]),
            &tol(),
        );
        assert!(res.is_err());
    }

    #[test]
    fn crossed_dimension_law_and_z3_translation() {
        // dim(A x| G) = |G| dim(A) on C(G) with translation for G = Z/3.
        let g = FiniteGroup::cyclic(3);
        let diag: Vec<CMatrix> = (0..3)
            .map(|t| {
                CMatrix::from_fn(3, 3, |i, j| {
                    if i == t && j == t { c(1., 0.) } else { Complex64::ZERO }
                })
            })
            .collect();
        let base = MatrixAlgebra::from_span(3, &diag, tol()).unwrap();
        let sys = DynamicalSystem::new(
            base,
            g.clone(),
            ActionSpec::Unitaries(g.left_translations()),
            &tol(),
        )
        .unwrap();
        let cp = build_crossed(sys, &tol()).unwrap();
        assert_eq!(cp.dim(), 9);
        assert!(cp.relation_residual() < 1e-12);
        assert!(cp.star_residual() < 1e-12);
    }
}
