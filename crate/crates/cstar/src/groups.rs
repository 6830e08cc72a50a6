//! Finite groups from multiplication tables, group *-algebras, regular
//! representations, dual groups and the Fourier isomorphism.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::Deserializer;
use serde::{Deserialize, Serialize};

use crate::algebra::{Block, MatrixAlgebra};
use crate::eig;
use crate::error::{Error, Result};
use crate::mat::CMatrix;
use crate::tol::Tolerance;

/// A finite group presented by its multiplication table.
///
/// `table[s][t] = s . t` with 0-based element indices; the identity must sit
/// at index 0. Associativity, the identity law and two-sided inverses are all
/// certified at construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<Vec<usize>>,
    #[serde(skip)]
    inverse: Vec<usize>,
}

impl<'de> Deserialize<'de> for FiniteGroup {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            order: usize,
            table: Vec<Vec<usize>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        if raw.table.len() != raw.order {
            return Err(serde::de::Error::custom(format!(
                "table has {} rows but order is {}",
                raw.table.len(),
                raw.order
            )));
        }
        FiniteGroup::from_table(raw.table).map_err(|e| serde::de::Error::custom(e.to_string()))
    }
}

impl FiniteGroup {
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self> {
        let op = "FiniteGroup::from_table";
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidGroupTable { op, detail: "empty table".into() });
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidGroupTable {
                    op,
                    detail: format!("row {i} has length {} but order is {n}", row.len()),
                });
            }
            if let Some(&bad) = row.iter().find(|&&x| x >= n) {
                return Err(Error::InvalidGroupTable {
                    op,
                    detail: format!("entry {bad} out of range in row {i}"),
                });
            }
        }
        // Identity at index 0.
        for s in 0..n {
            if table[0][s] != s || table[s][0] != s {
                return Err(Error::InvalidGroupTable {
                    op,
                    detail: "index 0 is not a two-sided identity".into(),
                });
            }
        }
        // Associativity.
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidGroupTable {
                            op,
                            detail: format!("associativity fails at ({a},{b},{c})"),
                        });
                    }
                }
            }
        }
        // Two-sided inverses.
        let mut inverse = vec![usize::MAX; n];
        for s in 0..n {
            match (0..n).find(|&t| table[s][t] == 0 && table[t][s] == 0) {
                Some(t) => inverse[s] = t,
                None => {
                    return Err(Error::InvalidGroupTable {
                        op,
                        detail: format!("element {s} has no two-sided inverse"),
                    })
                }
            }
        }
        Ok(FiniteGroup { order: n, table, inverse })
    }

    pub fn trivial() -> Self {
        FiniteGroup::from_table(vec![vec![0]]).unwrap()
    }

    /// The cyclic group Z/n.
    pub fn cyclic(n: usize) -> Self {
        assert!(n >= 1);
        let table = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
        FiniteGroup::from_table(table).unwrap()
    }

    /// Direct product; index of (i, j) is `i * other.order + j`.
    pub fn product(&self, other: &FiniteGroup) -> Self {
        let (m, n) = (self.order, other.order);
        let idx = |i: usize, j: usize| i * n + j;
        let mut table = vec![vec![0usize; m * n]; m * n];
        for i1 in 0..m {
            for j1 in 0..n {
                for i2 in 0..m {
                    for j2 in 0..n {
                        table[idx(i1, j1)][idx(i2, j2)] =
                            idx(self.table[i1][i2], other.table[j1][j2]);
                    }
                }
            }
        }
        FiniteGroup::from_table(table).unwrap()
    }

    /// The symmetric group S_n for n <= 5, with permutations enumerated in
    /// lexicographic order (so the identity is element 0).
    pub fn symmetric(n: usize) -> Result<Self> {
        if n == 0 || n > 5 {
            return Err(Error::InvalidArgument {
                op: "FiniteGroup::symmetric",
                detail: "supported range is 1 <= n <= 5".into(),
            });
        }
        let perms = permutations(n);
        let index = |p: &Vec<usize>| perms.iter().position(|q| q == p).unwrap();
        let order = perms.len();
        let mut table = vec![vec![0usize; order]; order];
        for (i, p) in perms.iter().enumerate() {
            for (j, q) in perms.iter().enumerate() {
                // (p . q)(x) = p(q(x))
                let composed: Vec<usize> = (0..n).map(|x| p[q[x]]).collect();
                table[i][j] = index(&composed);
            }
        }
        FiniteGroup::from_table(table)
    }

    /// The dihedral group of order 2n (symmetries of the n-gon). Element
    /// `k` is the rotation by k, element `n + k` the reflection `x -> k - x`.
    pub fn dihedral(n: usize) -> Self {
        assert!(n >= 1);
        let order = 2 * n;
        let enc = |k: usize, f: usize| k + f * n;
        let mut table = vec![vec![0usize; order]; order];
        for f in 0..2 {
            for k in 0..n {
                for e in 0..2 {
                    for l in 0..n {
                        // (k,f)(l,e): x -> k + (-1)^f (l + (-1)^e x)
                        let k2 = if f == 0 { (k + l) % n } else { (k + n - l) % n };
                        table[enc(k, f)][enc(l, e)] = enc(k2, f ^ e);
                    }
                }
            }
        }
        FiniteGroup::from_table(table).unwrap()
    }

    /// The quaternion group Q8 = {1, -1, i, -i, j, -j, k, -k}; element
    /// `2u + s` is the unit `u` (0:1, 1:i, 2:j, 3:k) with sign bit `s`.
    pub fn quaternion() -> Self {
        // unit_mul[u][v] = (unit, sign) for the quaternion units 1,i,j,k.
        const UNIT_MUL: [[(usize, usize); 4]; 4] = [
            [(0, 0), (1, 0), (2, 0), (3, 0)],
            [(1, 0), (0, 1), (3, 0), (2, 1)],
            [(2, 0), (3, 1), (0, 1), (1, 0)],
            [(3, 0), (2, 0), (1, 1), (0, 1)],
        ];
        let enc = |u: usize, s: usize| 2 * u + s;
        let mut table = vec![vec![0usize; 8]; 8];
        for u in 0..4 {
            for s in 0..2 {
                for v in 0..4 {
                    for t in 0..2 {
                        let (w, sign) = UNIT_MUL[u][v];
                        table[enc(u, s)][enc(v, t)] = enc(w, s ^ t ^ sign);
                    }
                }
            }
        }
        FiniteGroup::from_table(table).unwrap()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn mul(&self, s: usize, t: usize) -> usize {
        self.table[s][t]
    }

    pub fn inv(&self, s: usize) -> usize {
        self.inverse[s]
    }

    pub fn table(&self) -> &Vec<Vec<usize>> {
        &self.table
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|s| (0..self.order).all(|t| self.table[s][t] == self.table[t][s]))
    }

    /// Order of a single element.
    pub fn element_order(&self, s: usize) -> usize {
        let mut x = s;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, s);
            k += 1;
        }
        k
    }

    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.order];
        let mut classes = Vec::new();
        for s in 0..self.order {
            if seen[s] {
                continue;
            }
            let mut class: Vec<usize> = (0..self.order)
                .map(|g| self.mul(self.mul(g, s), self.inv(g)))
                .collect();
            class.sort_unstable();
            class.dedup();
            for &x in &class {
                seen[x] = true;
            }
            classes.push(class);
        }
        classes
    }

    /// Check that a subset of indices is a subgroup (contains the identity,
    /// closed under products and inverses).
    pub fn is_subgroup(&self, subset: &[usize]) -> bool {
        if !subset.contains(&0) {
            return false;
        }
        if subset.iter().any(|&s| s >= self.order) {
            return false;
        }
        subset.iter().all(|&s| {
            subset.contains(&self.inverse[s])
                && subset.iter().all(|&t| subset.contains(&self.table[s][t]))
        })
    }

    /// All subgroups (as sorted index lists), by subset enumeration. Only
    /// sensible for small groups; guarded at order 16.
    pub fn subgroups(&self) -> Result<Vec<Vec<usize>>> {
        if self.order > 16 {
            return Err(Error::InvalidArgument {
                op: "FiniteGroup::subgroups",
                detail: format!("subset enumeration is limited to order <= 16, got {}", self.order),
            });
        }
        let n = self.order;
        let mut out = Vec::new();
        // The identity is always a member, so enumerate over the rest.
        for mask in 0u32..(1 << (n - 1)) {
            let subset: Vec<usize> = std::iter::once(0)
                .chain((1..n).filter(|&s| mask >> (s - 1) & 1 == 1))
                .collect();
            if self.order % subset.len() == 0 && self.is_subgroup(&subset) {
                out.push(subset);
            }
        }
        Ok(out)
    }

    /// A function in the group algebra.
    pub fn function(self: &Arc<Self>, coeffs: Vec<Complex64>) -> Result<GroupFunction> {
        if coeffs.len() != self.order {
            return Err(Error::ShapeMismatch {
                op: "FiniteGroup::function",
                detail: format!("{} coefficients for a group of order {}", coeffs.len(), self.order),
            });
        }
        Ok(GroupFunction { group: Arc::clone(self), coeffs })
    }

    /// The delta function at `s`.
    pub fn delta(self: &Arc<Self>, s: usize) -> GroupFunction {
        let mut coeffs = vec![Complex64::ZERO; self.order];
        coeffs[s] = Complex64::new(1.0, 0.0);
        GroupFunction { group: Arc::clone(self), coeffs }
    }

    /// The left-translation permutation unitaries `lambda_s(eps_t) = eps_(st)`.
    pub fn left_translations(&self) -> Vec<CMatrix> {
        (0..self.order)
            .map(|s| {
                CMatrix::from_fn(self.order, self.order, |u, t| {
                    if u == self.table[s][t] { Complex64::new(1.0, 0.0) } else { Complex64::ZERO }
                })
            })
            .collect()
    }
}

/// An element of the group algebra `C[G]`: finitely supported coefficients
/// indexed by group elements.
#[derive(Debug, Clone)]
pub struct GroupFunction {
    group: Arc<FiniteGroup>,
    coeffs: Vec<Complex64>,
}

impl GroupFunction {
    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Convolution `f*g(s) = sum_t f(st) g(t^-1)`, equivalently
    /// `sum_r f(r) g(r^-1 s)`.
    pub fn convolve(&self, other: &GroupFunction) -> Result<GroupFunction> {
        if self.group.table != other.group.table {
            return Err(Error::GroupMismatch { op: "GroupFunction::convolve" });
        }
        let g = &self.group;
        let n = g.order();
        let mut out = vec![Complex64::ZERO; n];
        for (s, slot) in out.iter_mut().enumerate() {
            let mut acc = Complex64::ZERO;
            for t in 0..n {
                acc += self.coeffs[g.mul(s, t)] * other.coeffs[g.inv(t)];
            }
            *slot = acc;
        }
        Ok(GroupFunction { group: Arc::clone(g), coeffs: out })
    }

    /// The involution `f^*(s) = conj(f(s^-1))`.
    pub fn star(&self) -> GroupFunction {
        let g = &self.group;
        let coeffs = (0..g.order()).map(|s| self.coeffs[g.inv(s)].conj()).collect();
        GroupFunction { group: Arc::clone(g), coeffs }
    }

    pub fn add(&self, other: &GroupFunction) -> Result<GroupFunction> {
        if self.group.table != other.group.table {
            return Err(Error::GroupMismatch { op: "GroupFunction::add" });
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(GroupFunction { group: Arc::clone(&self.group), coeffs })
    }

    pub fn scaled(&self, c: Complex64) -> GroupFunction {
        GroupFunction {
            group: Arc::clone(&self.group),
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// A character of a finite abelian group: a homomorphism into the circle.
#[derive(Debug, Clone)]
pub struct Character {
    group: Arc<FiniteGroup>,
    values: Vec<Complex64>,
}

impl Character {
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, s: usize) -> Complex64 {
        self.values[s]
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }
}

/// The group algebra `C*(G) = C*_red(G)` realized by the left regular
/// representation; its basis is `lambda_s / sqrt(|G|)` in the group's element
/// order (the translations are Hilbert-Schmidt orthogonal).
pub fn group_algebra(group: &FiniteGroup, tol: Tolerance) -> Result<MatrixAlgebra> {
    let lambdas = group.left_translations();
    let alg = MatrixAlgebra::from_span(group.order(), &lambdas, tol)?;
    if alg.dim() != group.order() {
        return Err(Error::CertificationFailed {
            op: "group_algebra",
            detail: format!(
                "left translations span dimension {} instead of |G| = {}",
                alg.dim(),
                group.order()
            ),
        });
    }
    Ok(alg)
}

/// Regular representation: the group algebra together with the translation
/// unitaries themselves.
pub fn regular_representation(
    group: &FiniteGroup,
    tol: Tolerance,
) -> Result<(MatrixAlgebra, Vec<CMatrix>)> {
    let alg = group_algebra(group, tol)?;
    Ok((alg, group.left_translations()))
}

/// Block decomposition of `C*(G)`, cross-checked against the conjugacy-class
/// count and `sum n_i^2 = |G|`.
pub fn decompose_group_algebra(
    group: &FiniteGroup,
    tol: Tolerance,
    seed: u64,
) -> Result<Vec<Block>> {
    let op = "decompose_group_algebra";
    let alg = group_algebra(group, tol)?;
    let dec = alg.decomposed_seeded(seed)?;
    let classes = group.conjugacy_classes().len();
    if dec.blocks.len() != classes {
        return Err(Error::CertificationFailed {
            op,
            detail: format!("{} blocks but {} conjugacy classes", dec.blocks.len(), classes),
        });
    }
    let sum: usize = dec.blocks.iter().map(|b| b.size * b.size).sum();
    if sum != group.order() {
        return Err(Error::CertificationFailed {
            op,
            detail: format!("sum n_i^2 = {sum} differs from |G| = {}", group.order()),
        });
    }
    Ok(dec.blocks)
}

/// The dual group of a finite abelian group: all characters, read off from a
/// simultaneous diagonalization of the translations and snapped to exact
/// roots of unity. Characters are sorted lexicographically by their value
/// tuples, so the output is canonical.
pub fn dual_group(group: &Arc<FiniteGroup>, tol: Tolerance, seed: u64) -> Result<Vec<Character>> {
    let op = "dual_group";
    if !group.is_abelian() {
        return Err(Error::NotAbelian { op });
    }
    let n = group.order();
    let lambdas = group.left_translations();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    'attempt: for _ in 0..8 {
        // Generic self-adjoint combination of the translations.
        let mut generic = CMatrix::zeros(n, n);
        for s in 0..n {
            let c: f64 = rng.gen_range(-1.0..1.0);
            let d: f64 = rng.gen_range(-1.0..1.0);
            let ls = &lambdas[s];
            let lsi = &lambdas[group.inv(s)];
            generic = &generic + &(ls + lsi).scaled(Complex64::new(c, 0.0));
            generic = &generic + &(ls - lsi).scaled(Complex64::new(0.0, d));
        }
        let radius = tol.effective(generic.hs_norm(), n);
        let (vals, u) = eig::herm_eigen(&generic);
        // All n joint eigenvalues must be well separated or the eigenvectors
        // (hence the characters) smear; eps/gap governs their accuracy.
        let margin = (1e-5 * generic.hs_norm().max(1.0)).max(100.0 * radius);
        if vals.windows(2).any(|w| (w[1] - w[0]).abs() < margin) {
            continue 'attempt;
        }

        let mut characters: Vec<Vec<Complex64>> = Vec::with_capacity(n);
        for j in 0..n {
            let v = CMatrix::from_fn(n, 1, |i, _| u[(i, j)]);
            let mut values = Vec::with_capacity(n);
            for (s, lambda) in lambdas.iter().enumerate() {
                let raw = v.hs_inner(&(lambda * &v));
                // chi(s) is a root of unity whose order divides ord(s).
                let ord = group.element_order(s);
                let k = (raw.arg() * ord as f64 / std::f64::consts::TAU).round();
                let angle = std::f64::consts::TAU * k / ord as f64;
                let snapped = Complex64::new(angle.cos(), angle.sin());
                if (snapped - raw).norm() > 100.0 * radius {
                    continue 'attempt;
                }
                values.push(snapped);
            }
            characters.push(values);
        }

        // Certify multiplicativity and pairwise distinctness.
        for values in &characters {
            if (values[0] - Complex64::new(1.0, 0.0)).norm() > 1e-9 {
                continue 'attempt;
            }
            for s in 0..n {
                for t in 0..n {
                    if (values[group.mul(s, t)] - values[s] * values[t]).norm() > 1e-9 {
                        continue 'attempt;
                    }
                }
            }
        }
        characters.sort_by(|a, b| lex_values(a).cmp(&lex_values(b)));
        characters.dedup_by(|a, b| lex_values(a) == lex_values(b));
        if characters.len() != n {
            continue 'attempt;
        }

        // Closure of the dual under pointwise product (group structure).
        let keys: Vec<Vec<(i64, i64)>> = characters.iter().map(|v| lex_values(v)).collect();
        for a in &characters {
            for b in &characters {
                let prod: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
                if !keys.contains(&lex_values(&prod)) {
                    return Err(Error::CertificationFailed {
                        op,
                        detail: "dual set is not closed under pointwise products".into(),
                    });
                }
            }
        }

        return Ok(characters
            .into_iter()
            .map(|values| Character { group: Arc::clone(group), values })
            .collect());
    }
    Err(Error::RetryBudgetExhausted { op, budget: 8 })
}

fn lex_values(values: &[Complex64]) -> Vec<(i64, i64)> {
    values
        .iter()
        .map(|z| ((z.re * 1e9).round() as i64, (z.im * 1e9).round() as i64))
        .collect()
}

/// Residual report of the finite Fourier isomorphism
/// `C[G] -> C(dual G)`, `f -> (sum_s f(s) chi(s))_chi`.
#[derive(Debug, Clone, Serialize)]
pub struct FourierReport {
    /// Worst defect over all checks.
    pub max_residual: f64,
    /// Worst convolution-to-pointwise-product defect.
    pub mult_residual: f64,
    /// Worst involution-compatibility defect.
    pub star_residual: f64,
    /// `|| F F^* / |G| - I ||`: unitarity after scaling, hence bijectivity.
    pub invertibility_defect: f64,
}

/// Verify that the Fourier transform is a *-isomorphism onto functions on
/// the dual group; returns the worst defects.
pub fn fourier_iso_check(
    group: &Arc<FiniteGroup>,
    tol: Tolerance,
    seed: u64,
) -> Result<FourierReport> {
    let chars = dual_group(group, tol, seed)?;
    let n = group.order();
    let f = CMatrix::from_fn(n, n, |chi, s| chars[chi].value(s));

    let transform = |func: &GroupFunction| -> Vec<Complex64> {
        (0..n)
            .map(|chi| (0..n).map(|s| func.coeffs()[s] * chars[chi].value(s)).sum())
            .collect()
    };

    let mut mult_residual = 0.0f64;
    let mut star_residual = 0.0f64;

    // Exhaustive over delta pairs, then a batch of random functions.
    let mut pairs: Vec<(GroupFunction, GroupFunction)> = Vec::new();
    for s in 0..n {
        for t in 0..n {
            pairs.push((group.delta(s), group.delta(t)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xF0F0);
    let rand_fn = |rng: &mut ChaCha8Rng| {
        let coeffs: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        group.function(coeffs).unwrap()
    };
    for _ in 0..16 {
        let a = rand_fn(&mut rng);
        let b = rand_fn(&mut rng);
        pairs.push((a, b));
    }

    for (fa, fb) in &pairs {
        let conv = fa.convolve(fb)?;
        let lhs = transform(&conv);
        let (ta, tb) = (transform(fa), transform(fb));
        for chi in 0..n {
            mult_residual = mult_residual.max((lhs[chi] - ta[chi] * tb[chi]).norm());
        }
        let tstar = transform(&fa.star());
        for chi in 0..n {
            star_residual = star_residual.max((tstar[chi] - ta[chi].conj()).norm());
        }
    }

    let ffh = &f * &f.adjoint();
    let scaled = ffh.scaled(Complex64::new(1.0 / n as f64, 0.0));
    let invertibility_defect = (&scaled - &CMatrix::identity(n)).hs_norm();

    Ok(FourierReport {
        max_residual: mult_residual.max(star_residual).max(invertibility_defect),
        mult_residual,
        star_residual,
        invertibility_defect,
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    // Lexicographic enumeration via next-permutation.
    loop {
        out.push(current.clone());
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_SEED;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn table_validation_catches_bad_tables() {
        // Identity not at 0.
        assert!(FiniteGroup::from_table(vec![vec![1, 0], vec![0, 1]]).is_err());
        // Latin-square-looking but non-associative data on 3 points would be
        // rejected too; here a table with no inverse for element 1.
        let bad = vec![vec![0, 1, 2], vec![1, 1, 1], vec![2, 1, 0]];
        assert!(FiniteGroup::from_table(bad).is_err());
    }

    #[test]
    fn builtin_constructors() {
        assert_eq!(FiniteGroup::cyclic(6).order(), 6);
        assert!(FiniteGroup::cyclic(6).is_abelian());
        let v4 = FiniteGroup::cyclic(2).product(&FiniteGroup::cyclic(2));
        assert_eq!(v4.order(), 4);
        assert!(v4.is_abelian());
        let s3 = FiniteGroup::symmetric(3).unwrap();
        assert_eq!(s3.order(), 6);
        assert!(!s3.is_abelian());
        assert_eq!(s3.conjugacy_classes().len(), 3);
        let d4 = FiniteGroup::dihedral(4);
        assert_eq!(d4.order(), 8);
        assert_eq!(d4.conjugacy_classes().len(), 5);
        let q8 = FiniteGroup::quaternion();
        assert_eq!(q8.order(), 8);
        assert_eq!(q8.conjugacy_classes().len(), 5);
        // Q8 has a unique element of order 2 (namely -1).
        let order2 = (0..8).filter(|&s| s != 0 && q8.mul(s, s) == 0).count();
        assert_eq!(order2, 1);
        assert_eq!(FiniteGroup::symmetric(4).unwrap().order(), 24);
        assert_eq!(FiniteGroup::symmetric(5).unwrap().order(), 120);
    }

    #[test]
    fn convolution_of_deltas() {
        let g = Arc::new(FiniteGroup::symmetric(3).unwrap());
        for s in 0..6 {
            for t in 0..6 {
                let conv = g.delta(s).convolve(&g.delta(t)).unwrap();
                let expect = g.delta(g.mul(s, t));
                let diff: f64 = conv
                    .coeffs()
                    .iter()
                    .zip(expect.coeffs())
                    .map(|(a, b)| (a - b).norm())
                    .sum();
                assert!(diff < 1e-12);
            }
        }
        // delta_e is the unit.
        let f = g.function((0..6).map(|i| c(i as f64, 1.0)).collect()).unwrap();
        let ef = g.delta(0).convolve(&f).unwrap();
        assert!(ef.coeffs().iter().zip(f.coeffs()).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn convolution_zero_divisor_in_z2() {
        let g = Arc::new(FiniteGroup::cyclic(2));
        let plus = g.delta(0).add(&g.delta(1)).unwrap();
        let minus = g.delta(0).add(&g.delta(1).scaled(c(-1., 0.))).unwrap();
        let prod = plus.convolve(&minus).unwrap();
        assert!(prod.norm() < 1e-12);
    }

    #[test]
    fn star_of_delta_and_scalar() {
        let g = Arc::new(FiniteGroup::cyclic(4));
        let st = g.delta(1).star();
        assert!((st.coeffs()[3] - c(1., 0.)).norm() < 1e-12);
        let i_delta = g.delta(1).scaled(c(0., 1.));
        let st = i_delta.star();
        assert!((st.coeffs()[3] - c(0., -1.)).norm() < 1e-12);
    }

    #[test]
    fn star_antimultiplicative_on_random_pairs() {
        let g = Arc::new(FiniteGroup::symmetric(3).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rand_fn_impl = |rng: &mut ChaCha8Rng| {
            let coeffs: Vec<Complex64> = (0..6)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            g.function(coeffs).unwrap()
        };
        let (f1, f2, f3) = (
            rand_fn_impl(&mut rng),
            rand_fn_impl(&mut rng),
            rand_fn_impl(&mut rng),
        );
        let lhs = f1.convolve(&f2).unwrap().star();
        let rhs = f2.star().convolve(&f1.star()).unwrap();
        let diff: f64 =
            lhs.coeffs().iter().zip(rhs.coeffs()).map(|(a, b)| (a - b).norm()).sum();
        assert!(diff < 1e-10);
        // Associativity on the same triple.
        let a = f1.convolve(&f2).unwrap().convolve(&f3).unwrap();
        let b = f1.convolve(&f2.convolve(&f3).unwrap()).unwrap();
        let diff: f64 = a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).norm()).sum();
        assert!(diff < 1e-10);
    }

    #[test]
    fn regular_representation_dimensions() {
        let z2 = FiniteGroup::cyclic(2);
        let (alg, lambdas) = regular_representation(&z2, tol()).unwrap();
        assert_eq!(alg.dim(), 2);
        let flip = CMatrix::from_real(2, 2, &[0., 1., 1., 0.]).unwrap();
        assert!((&lambdas[1] - &flip).hs_norm() < 1e-12);

        let s3 = FiniteGroup::symmetric(3).unwrap();
        let (alg, _) = regular_representation(&s3, tol()).unwrap();
        assert_eq!(alg.dim(), 6);

        let (alg, _) = regular_representation(&FiniteGroup::trivial(), tol()).unwrap();
        assert_eq!(alg.dim(), 1);
    }

    #[test]
    fn group_algebra_blocks_s3() {
        let s3 = FiniteGroup::symmetric(3).unwrap();
        let blocks = decompose_group_algebra(&s3, tol(), DEFAULT_SEED).unwrap();
        let sizes: Vec<usize> = blocks.iter().map(|b| b.size).collect();
        assert_eq!(sizes, vec![1, 1, 2]);
        // In the regular representation every irrep has multiplicity = size.
        for b in &blocks {
            assert_eq!(b.size, b.multiplicity);
        }
    }

    #[test]
    fn group_algebra_blocks_z4_and_q8() {
        let z4 = FiniteGroup::cyclic(4);
        let blocks = decompose_group_algebra(&z4, tol(), DEFAULT_SEED).unwrap();
        assert_eq!(blocks.iter().map(|b| b.size).collect::<Vec<_>>(), vec![1, 1, 1, 1]);

        let q8 = FiniteGroup::quaternion();
        let blocks = decompose_group_algebra(&q8, tol(), DEFAULT_SEED).unwrap();
        assert_eq!(blocks.iter().map(|b| b.size).collect::<Vec<_>>(), vec![1, 1, 1, 1, 2]);
    }

    #[test]
    fn dual_group_of_z2_and_z3() {
        let z2 = Arc::new(FiniteGroup::cyclic(2));
        let chars = dual_group(&z2, tol(), DEFAULT_SEED).unwrap();
        assert_eq!(chars.len(), 2);
        assert!(chars.iter().any(|ch| (ch.value(1) - c(-1., 0.)).norm() < 1e-12));
        assert!(chars.iter().any(|ch| (ch.value(1) - c(1., 0.)).norm() < 1e-12));

        // Z/3: characters are chi_k(j) = omega^(jk) for the cube roots.
        let z3 = Arc::new(FiniteGroup::cyclic(3));
        let chars = dual_group(&z3, tol(), DEFAULT_SEED).unwrap();
        assert_eq!(chars.len(), 3);
        let omega = Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0);
        for k in 0..3u32 {
            let expect: Vec<Complex64> = (0..3u32).map(|j| omega.powu(j * k)).collect();
            assert!(
                chars.iter().any(|ch| ch
                    .values()
                    .iter()
                    .zip(&expect)
                    .all(|(a, b)| (a - b).norm() < 1e-9)),
                "missing character k={k}"
            );
        }
    }

    #[test]
    fn dual_group_of_klein_four_is_real() {
        let v4 = Arc::new(FiniteGroup::cyclic(2).product(&FiniteGroup::cyclic(2)));
        let chars = dual_group(&v4, tol(), DEFAULT_SEED).unwrap();
        assert_eq!(chars.len(), 4);
        // Oracle: every homomorphism into the circle takes values in {1,-1}
        // because all elements square to the identity.
        for ch in &chars {
            for v in ch.values() {
                assert!(v.im.abs() < 1e-12);
                assert!((v.re.abs() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dual_group_rejects_nonabelian() {
        let s3 = Arc::new(FiniteGroup::symmetric(3).unwrap());
        assert!(matches!(dual_group(&s3, tol(), 1), Err(Error::NotAbelian { .. })));
    }

    #[test]
    fn fourier_iso_z2_and_z6() {
        let z2 = Arc::new(FiniteGroup::cyclic(2));
        let rep = fourier_iso_check(&z2, tol(), DEFAULT_SEED).unwrap();
        assert!(rep.max_residual < 1e-12, "residual {}", rep.max_residual);

        let z6 = Arc::new(FiniteGroup::cyclic(6));
        let rep = fourier_iso_check(&z6, tol(), DEFAULT_SEED).unwrap();
        assert!(rep.max_residual < 1e-10, "residual {}", rep.max_residual);
    }

    #[test]
    fn irreps_separate_points() {
        // Finite-scale point separation: for each s != e some block image of
        // lambda_s differs from the block unit.
        let q8 = FiniteGroup::quaternion();
        let lambdas = q8.left_translations();
        let dec = group_algebra(&q8, tol()).unwrap().decomposed().unwrap();
        for (s, lambda) in lambdas.iter().enumerate().skip(1) {
            let separated = dec.blocks.iter().any(|b| {
                (&(&b.projection * lambda) - &b.projection).hs_norm() > 1e-8
            });
            assert!(separated, "element {s} not separated");
        }
    }

    #[test]
    fn subgroups_of_s3() {
        let s3 = FiniteGroup::symmetric(3).unwrap();
        let subs = s3.subgroups().unwrap();
        // 1 trivial + 3 of order 2 + 1 of order 3 + S3 itself.
        assert_eq!(subs.len(), 6);
        assert!(subs.iter().all(|h| s3.is_subgroup(h)));
    }
}
