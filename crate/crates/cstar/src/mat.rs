//! Dense complex matrices and the JSON interchange format.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense complex matrix, the ambient arena for everything in this crate.
///
/// Serialized as `{"rows":N,"cols":M,"data":[[re,im],...]}` with `data`
/// row-major, so fixtures are bit-exact and language-neutral.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    inner: DMatrix<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { inner: DMatrix::zeros(rows, cols) }
    }

    pub fn identity(n: usize) -> Self {
        CMatrix { inner: DMatrix::identity(n, n) }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        CMatrix { inner: DMatrix::from_fn(rows, cols, f) }
    }

    /// Build from row-major complex entries. Errors if the length is wrong
    /// or any entry is not finite.
    pub fn from_rows(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                op: "CMatrix::from_rows",
                detail: format!("{} entries for a {}x{} matrix", entries.len(), rows, cols),
            });
        }
        let m = CMatrix {
            inner: DMatrix::from_fn(rows, cols, |i, j| entries[i * cols + j]),
        };
        m.check_finite("CMatrix::from_rows")?;
        Ok(m)
    }

    /// Build from row-major real entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        let complexes: Vec<Complex64> =
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_rows(rows, cols, &complexes)
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        CMatrix::from_fn(n, n, |i, j| if i == j { entries[i] } else { Complex64::ZERO })
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub(crate) fn check_finite(&self, op: &'static str) -> Result<()> {
        if self.inner.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite { op })
        }
    }

    pub(crate) fn require_square(&self, op: &'static str) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NonSquare { op, rows: self.rows(), cols: self.cols() })
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        CMatrix { inner: self.inner.adjoint() }
    }

    pub fn trace(&self) -> Complex64 {
        self.inner.diagonal().iter().sum()
    }

    /// Frobenius (Hilbert-Schmidt) norm.
    pub fn hs_norm(&self) -> f64 {
        self.inner.norm()
    }

    /// Hilbert-Schmidt inner product `tr(self^* other)`; conjugate-linear in
    /// `self`, linear in `other`.
    pub fn hs_inner(&self, other: &CMatrix) -> Complex64 {
        debug_assert_eq!(self.rows(), other.rows());
        debug_assert_eq!(self.cols(), other.cols());
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Operator norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        if self.rows() == 0 || self.cols() == 0 {
            return 0.0;
        }
        crate::eig::largest_singular_value(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        CMatrix { inner: &self.inner * c }
    }

    /// Kronecker product; index `(i, k)` of `self` tensor `(j, l)` of
    /// `other` maps to `(i * other.rows + j, k * other.cols + l)`.
    pub fn kron(&self, other: &CMatrix) -> Self {
        CMatrix { inner: self.inner.kronecker(&other.inner) }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        CMatrix { inner: self.inner.map(f) }
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols());
        let x = nalgebra::DVector::from_column_slice(v);
        (&self.inner * x).iter().copied().collect()
    }

    pub(crate) fn as_inner(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub(crate) fn from_inner(inner: DMatrix<Complex64>) -> Self {
        CMatrix { inner }
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.inner[idx]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut Complex64 {
        &mut self.inner[idx]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        CMatrix { inner: &self.inner + &rhs.inner }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        CMatrix { inner: &self.inner - &rhs.inner }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        CMatrix { inner: &self.inner * &rhs.inner }
    }
}

impl Mul<Complex64> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: Complex64) -> CMatrix {
        self.scaled(rhs)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix { inner: -&self.inner }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.inner[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("CMatrix", 3)?;
        st.serialize_field("rows", &self.rows())?;
        st.serialize_field("cols", &self.cols())?;
        let data: Vec<[f64; 2]> = self.entries().iter().map(|z| [z.re, z.im]).collect();
        st.serialize_field("data", &data)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            rows: usize,
            cols: usize,
            data: Vec<[f64; 2]>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let entries: Vec<Complex64> =
            raw.data.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        CMatrix::from_rows(raw.rows, raw.cols, &entries)
            .map_err(|e| de::Error::custom(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn adjoint_examples() {
        // (a*)* = a and the matrix-unit examples.
        let i2 = CMatrix::identity(2);
        assert_eq!(i2.adjoint(), i2);

        let e12 = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let e21 = CMatrix::from_real(2, 2, &[0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(e12.adjoint(), e21);

        let a = CMatrix::from_rows(2, 2, &[c(0., 0.), c(0., 1.), c(0., 0.), c(0., 0.)]).unwrap();
        let expect =
            CMatrix::from_rows(2, 2, &[c(0., 0.), c(0., 0.), c(0., -1.), c(0., 0.)]).unwrap();
        assert_eq!(a.adjoint(), expect);
        assert_eq!(a.adjoint().adjoint(), a);
    }

    #[test]
    fn op_norm_examples() {
        assert!((CMatrix::identity(3).op_norm() - 1.0).abs() < 1e-12);
        let d = CMatrix::diag(&[c(3., 0.), c(-1., 0.)]);
        assert!((d.op_norm() - 3.0).abs() < 1e-12);
        // Oracle for [[0,2],[0,0]]: a*a = diag(0,4); char poly x(x-4) has
        // largest root 4, so the norm is 2.
        let a = CMatrix::from_real(2, 2, &[0., 2., 0., 0.]).unwrap();
        assert!((a.op_norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let a = CMatrix::from_rows(2, 3, &[
            c(1., -2.),
            c(0.5, 0.),
            c(0., 3.),
            c(-1., 0.25),
            c(0., 0.),
            c(7., -0.125),
        ])
        .unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert!(s.starts_with("{\"rows\":2,\"cols\":3,\"data\":[[1.0,-2.0],"));
        let b: CMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn json_rejects_bad_lengths_and_nan() {
        let bad: std::result::Result<CMatrix, _> =
            serde_json::from_str("{\"rows\":2,\"cols\":2,\"data\":[[1.0,0.0]]}");
        assert!(bad.is_err());
        let nan: std::result::Result<CMatrix, _> =
            serde_json::from_str("{\"rows\":1,\"cols\":1,\"data\":[[null,0.0]]}");
        assert!(nan.is_err());
    }

    #[test]
    fn kron_shape_and_values() {
        let a = CMatrix::diag(&[c(1., 0.), c(2., 0.)]);
        let b = CMatrix::from_real(2, 2, &[0., 1., 1., 0.]).unwrap();
        let k = a.kron(&b);
        assert_eq!(k.rows(), 4);
        assert_eq!(k[(0, 1)], c(1., 0.));
        assert_eq!(k[(2, 3)], c(2., 0.));
        assert_eq!(k[(0, 2)], c(0., 0.));
    }
}
