//! Exact integer and rational linear algebra.
//!
//! Everything here works over `BigInt`/`BigRational`; there is no floating
//! point anywhere. Determinants and ranks use fraction-free (Bareiss)
//! elimination, the PSD test uses Schur-complement pivoting, and kernels are
//! read off a rational reduced row echelon form.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense row-major integer matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::MalformedMatrix(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::MalformedMatrix(format!(
                "ragged rows: expected length {c}, found {}",
                bad.len()
            )));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.as_ref().iter().map(|&v| BigInt::from(v)).collect())
                .collect(),
        )
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    /// Matrix product. Panics if the inner dimensions disagree.
    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Determinant by Bareiss elimination. Panics on a non-square matrix.
    pub fn det(&self) -> BigInt {
        assert!(self.is_square(), "determinant of a non-square matrix");
        bareiss_det(self.data.clone(), self.rows)
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        fraction_free_rank(self.data.clone(), self.rows, self.cols)
    }

    /// Classical adjugate (transpose of the cofactor matrix); defined for
    /// singular matrices as well.
    pub fn adjugate(&self) -> IntMatrix {
        assert!(self.is_square(), "adjugate of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return IntMatrix::zeros(0, 0);
        }
        if n == 1 {
            return IntMatrix::identity(1);
        }
        let mut adj = IntMatrix::zeros(n, n);
        let mut minor = Vec::with_capacity((n - 1) * (n - 1));
        for i in 0..n {
            for j in 0..n {
                minor.clear();
                for r in (0..n).filter(|&r| r != i) {
                    for c in (0..n).filter(|&c| c != j) {
                        minor.push(self.get(r, c).clone());
                    }
                }
                let mut cof = bareiss_det(minor.clone(), n - 1);
                if (i + j) % 2 == 1 {
                    cof = -cof;
                }
                // adj = transpose of the cofactor matrix
                adj.set(j, i, cof);
            }
        }
        adj
    }

    fn entries(&self) -> &[BigInt] {
        &self.data
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

fn bareiss_det(mut a: Vec<BigInt>, n: usize) -> BigInt {
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k * n + k].is_zero() {
            match (k + 1..n).find(|&i| !a[i * n + k].is_zero()) {
                Some(p) => {
                    for j in 0..n {
                        a.swap(k * n + j, p * n + j);
                    }
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j]) / &prev;
                a[i * n + j] = v;
            }
        }
        prev = a[k * n + k].clone();
    }
    let d = a[n * n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

fn fraction_free_rank(mut a: Vec<BigInt>, rows: usize, cols: usize) -> usize {
    let mut r = 0;
    let mut prev = BigInt::one();
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i * cols + c].is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                a.swap(r * cols + j, p * cols + j);
            }
        }
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = (&a[i * cols + j] * &a[r * cols + c] - &a[i * cols + c] * &a[r * cols + j])
                    / &prev;
                a[i * cols + j] = v;
            }
            a[i * cols + c] = BigInt::zero();
        }
        prev = a[r * cols + c].clone();
        r += 1;
    }
    r
}

/// Symmetric integer matrix, an element of S^n(Z).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymIntMatrix {
    inner: IntMatrix,
}

impl SymIntMatrix {
    /// Validates squareness, symmetry and `n >= 1`.
    pub fn new(matrix: IntMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::MalformedMatrix(format!(
                "{}x{} matrix is not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(Error::MalformedMatrix(
                "dimension must be at least 1".into(),
            ));
        }
        let n = matrix.nrows();
        for i in 0..n {
            for j in i + 1..n {
                if matrix.get(i, j) != matrix.get(j, i) {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { inner: matrix })
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        Self::new(IntMatrix::from_rows(rows)?)
    }

    pub fn from_i64<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::new(IntMatrix::from_i64(rows)?)
    }

    /// The 0x0 matrix; only produced as the full-rank block of a zero matrix.
    pub fn empty() -> Self {
        Self {
            inner: IntMatrix::zeros(0, 0),
        }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            inner: IntMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: IntMatrix::identity(n),
        }
    }

    pub fn diagonal(d: &[BigInt]) -> Self {
        let mut m = IntMatrix::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m.set(i, i, v.clone());
        }
        Self { inner: m }
    }

    /// The rank-1 matrix x xᵀ.
    pub fn outer(x: &[BigInt]) -> Self {
        let n = x.len();
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, &x[i] * &x[j]);
            }
        }
        Self { inner: m }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        self.inner.get(i, j)
    }

    pub fn as_matrix(&self) -> &IntMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> IntMatrix {
        self.inner
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        self.inner.to_rows()
    }

    pub fn trace(&self) -> BigInt {
        (0..self.dim()).map(|i| self.get(i, i).clone()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.inner.entries().iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &SymIntMatrix) -> SymIntMatrix {
        assert_eq!(self.dim(), other.dim());
        let data = self
            .inner
            .entries()
            .iter()
            .zip(other.inner.entries())
            .map(|(a, b)| a + b)
            .collect();
        Self {
            inner: IntMatrix::new(self.dim(), self.dim(), data).expect("same shape"),
        }
    }

    pub fn sub(&self, other: &SymIntMatrix) -> SymIntMatrix {
        assert_eq!(self.dim(), other.dim());
        let data = self
            .inner
            .entries()
            .iter()
            .zip(other.inner.entries())
            .map(|(a, b)| a - b)
            .collect();
        Self {
            inner: IntMatrix::new(self.dim(), self.dim(), data).expect("same shape"),
        }
    }

    pub fn scale(&self, k: &BigInt) -> SymIntMatrix {
        let data = self.inner.entries().iter().map(|a| a * k).collect();
        Self {
            inner: IntMatrix::new(self.dim(), self.dim(), data).expect("same shape"),
        }
    }

    /// xᵀ M x.
    pub fn quad_form(&self, x: &[BigInt]) -> BigInt {
        self.bilinear(x, x)
    }

    /// xᵀ M y.
    pub fn bilinear(&self, x: &[BigInt], y: &[BigInt]) -> BigInt {
        let n = self.dim();
        assert_eq!(x.len(), n);
        assert_eq!(y.len(), n);
        let mut acc = BigInt::zero();
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            let mut row = BigInt::zero();
            for j in 0..n {
                if !y[j].is_zero() {
                    row += self.get(i, j) * &y[j];
                }
            }
            acc += &x[i] * row;
        }
        acc
    }

    /// U M Uᵀ, the group action of GL(n, Z) on S^n(Z).
    pub fn act(&self, u: &IntMatrix) -> SymIntMatrix {
        let m = u.mul(&self.inner).mul(&u.transpose());
        Self { inner: m }
    }

    /// Uᵀ M U.
    pub fn congruence(&self, u: &IntMatrix) -> SymIntMatrix {
        let m = u.transpose().mul(&self.inner).mul(u);
        Self { inner: m }
    }

    /// Principal submatrix on the trailing indices `start..n`.
    pub fn trailing_block(&self, start: usize) -> SymIntMatrix {
        let n = self.dim();
        let k = n - start;
        let mut m = IntMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                m.set(i, j, self.get(start + i, start + j).clone());
            }
        }
        Self { inner: m }
    }
}

impl fmt::Display for SymIntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.inner.fmt(f)
    }
}

/// Square integer matrix with |det| = 1, an element of GL(n, Z).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnimodularMatrix {
    inner: IntMatrix,
}

impl UnimodularMatrix {
    pub fn new(matrix: IntMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::MalformedMatrix(
                "unimodular matrix must be square".into(),
            ));
        }
        let d = matrix.det();
        if !d.abs().is_one() {
            return Err(Error::NotUnimodular(d.abs().to_string()));
        }
        Ok(Self { inner: matrix })
    }

    /// Skips the determinant check; callers must have established |det| = 1.
    pub(crate) fn new_unchecked(matrix: IntMatrix) -> Self {
        debug_assert!(matrix.det().abs().is_one());
        Self { inner: matrix }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: IntMatrix::identity(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &IntMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> IntMatrix {
        self.inner
    }

    pub fn det(&self) -> BigInt {
        self.inner.det()
    }

    /// Exact integer inverse, `det(U) * adj(U)`.
    pub fn inverse(&self) -> UnimodularMatrix {
        let d = self.det();
        let adj = self.inner.adjugate();
        let inv = if d.is_one() {
            adj
        } else {
            let data = adj.entries().iter().map(|v| -v).collect();
            IntMatrix::new(self.dim(), self.dim(), data).expect("same shape")
        };
        Self { inner: inv }
    }

    pub fn mul(&self, other: &UnimodularMatrix) -> UnimodularMatrix {
        Self {
            inner: self.inner.mul(&other.inner),
        }
    }

    pub fn transpose(&self) -> UnimodularMatrix {
        Self {
            inner: self.inner.transpose(),
        }
    }

    /// Block diagonal `diag(I_k, self)`.
    pub fn embed_lower(&self, k: usize) -> UnimodularMatrix {
        let m = self.dim();
        let n = k + m;
        let mut out = IntMatrix::identity(n);
        for i in 0..m {
            for j in 0..m {
                out.set(k + i, k + j, self.inner.get(i, j).clone());
            }
        }
        Self { inner: out }
    }
}

/// Dense matrix of reduced rationals; used for kernels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn from_int(m: &IntMatrix) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m
                .entries()
                .iter()
                .map(|v| BigRational::from_integer(v.clone()))
                .collect(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.cols + j]
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let (rows, cols) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| !self.data[i * cols + c].is_zero()) else {
                continue;
            };
            for j in 0..cols {
                self.data.swap(r * cols + j, p * cols + j);
            }
            let inv = self.data[r * cols + c].recip();
            for j in c..cols {
                self.data[r * cols + j] = &self.data[r * cols + j] * &inv;
            }
            for i in (0..rows).filter(|&i| i != r) {
                let f = self.data[i * cols + c].clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..cols {
                    let v = &self.data[r * cols + j] * &f;
                    self.data[i * cols + j] -= v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }
}

/// gcd of all entries (0 for the zero vector).
pub fn content(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

pub fn is_primitive(v: &[BigInt]) -> bool {
    content(v).is_one()
}

/// Flips the sign of `v` so that its first nonzero entry is positive.
pub fn normalize_sign(v: &mut [BigInt]) {
    if let Some(first) = v.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in v.iter_mut() {
                *x = -&*x;
            }
        }
    }
}

/// Exact determinant.
pub fn det(m: &SymIntMatrix) -> BigInt {
    m.as_matrix().det()
}

/// adj(M), satisfying M adj(M) = det(M) I.
pub fn adjugate(m: &SymIntMatrix) -> SymIntMatrix {
    SymIntMatrix {
        inner: m.as_matrix().adjugate(),
    }
}

/// Exact PSD test by Schur-complement pivoting on the first positive
/// diagonal entry. The complement is kept integral by scaling it with the
/// (positive) pivot, which does not change its inertia.
pub fn is_psd_exact(m: &SymIntMatrix) -> bool {
    let mut n = m.dim();
    let mut a: Vec<BigInt> = m.as_matrix().entries().to_vec();
    loop {
        if n == 0 {
            return true;
        }
        let mut pivot = None;
        for i in 0..n {
            let d = &a[i * n + i];
            if d.is_negative() {
                return false;
            }
            if d.is_zero() {
                if (0..n).any(|j| !a[i * n + j].is_zero()) {
                    return false;
                }
            } else if pivot.is_none() {
                pivot = Some(i);
            }
        }
        let Some(p) = pivot else {
            // every row is zero
            return true;
        };
        let app = a[p * n + p].clone();
        let idx: Vec<usize> = (0..n).filter(|&i| i != p).collect();
        let mut next = Vec::with_capacity((n - 1) * (n - 1));
        for &i in &idx {
            for &j in &idx {
                next.push(&app * &a[i * n + j] - &a[i * n + p] * &a[p * n + j]);
            }
        }
        let g = content(&next);
        if !g.is_zero() && !g.is_one() {
            for v in next.iter_mut() {
                *v /= &g;
            }
        }
        a = next;
        n -= 1;
    }
}

/// Rank over the rationals.
pub fn rank(m: &SymIntMatrix) -> usize {
    m.as_matrix().rank()
}

/// A primitive integer vector z with Mz = 0, first nonzero entry positive,
/// or `None` when M is nonsingular.
pub fn primitive_kernel_vector(m: &SymIntMatrix) -> Option<Vec<BigInt>> {
    int_kernel_vector(m.as_matrix())
}

pub(crate) fn int_kernel_vector(m: &IntMatrix) -> Option<Vec<BigInt>> {
    let cols = m.ncols();
    let mut r = RationalMatrix::from_int(m);
    let pivots = r.rref();
    let free = (0..cols).find(|c| !pivots.contains(c))?;
    let mut v = vec![BigRational::zero(); cols];
    v[free] = BigRational::one();
    for (row, &pc) in pivots.iter().enumerate() {
        v[pc] = -r.get(row, free).clone();
    }
    let lcm = v.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let mut z: Vec<BigInt> = v.iter().map(|q| q.numer() * (&lcm / q.denom())).collect();
    let g = content(&z);
    for x in z.iter_mut() {
        *x /= &g;
    }
    normalize_sign(&mut z);
    Some(z)
}

/// A unimodular U whose first column is the primitive vector z.
pub fn extend_to_unimodular(z: &[BigInt]) -> Result<UnimodularMatrix> {
    let n = z.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty vector".into()));
    }
    let g = content(z);
    if !g.is_one() {
        return Err(Error::NotPrimitive(g.to_string()));
    }
    // Invariant: u * w == z. Each step zeroes w[j] against w[0] with a
    // determinant-one 2x2 transform E and folds E^-1 into u.
    let mut w = z.to_vec();
    let mut u = IntMatrix::identity(n);
    for j in 1..n {
        if w[j].is_zero() {
            continue;
        }
        let a = w[0].clone();
        let b = w[j].clone();
        let eg = a.extended_gcd(&b);
        let (mut g, mut s, mut t) = (eg.gcd, eg.x, eg.y);
        if g.is_negative() {
            g = -g;
            s = -s;
            t = -t;
        }
        debug_assert_eq!(&s * &a + &t * &b, g);
        let ag = &a / &g;
        let bg = &b / &g;
        // E^-1 = [[a/g, -t], [b/g, s]]
        for i in 0..n {
            let c0 = u.get(i, 0).clone();
            let cj = u.get(i, j).clone();
            u.set(i, 0, &c0 * &ag + &cj * &bg);
            u.set(i, j, -&c0 * &t + &cj * &s);
        }
        w[0] = g;
        w[j] = BigInt::zero();
    }
    if w[0].is_negative() {
        for i in 0..n {
            let v = -u.get(i, 0).clone();
            u.set(i, 0, v);
        }
    }
    Ok(UnimodularMatrix::new_unchecked(u))
}

/// Returns (U, X̂) with Uᵀ X U = diag(0_{n-r}, X̂) and X̂ of full rank r.
pub fn reduce_rank(x: &SymIntMatrix) -> Result<(UnimodularMatrix, SymIntMatrix)> {
    if !is_psd_exact(x) {
        return Err(Error::NotPsd);
    }
    Ok(reduce_rank_unchecked(x))
}

pub(crate) fn reduce_rank_unchecked(x: &SymIntMatrix) -> (UnimodularMatrix, SymIntMatrix) {
    let n = x.dim();
    let mut u = UnimodularMatrix::identity(n);
    let mut y = x.clone();
    let mut k = 0;
    while k < n {
        let block = y.trailing_block(k);
        let Some(z) = primitive_kernel_vector(&block) else {
            break;
        };
        let v = extend_to_unimodular(&z)
            .expect("kernel vector is primitive")
            .embed_lower(k);
        y = y.congruence(v.as_matrix());
        u = u.mul(&v);
        k += 1;
    }
    let hat = if k == n {
        SymIntMatrix::empty()
    } else {
        y.trailing_block(k)
    };
    (u, hat)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    pub(crate) fn m6() -> SymIntMatrix {
        crate::psd::m6()
    }

    /// Cofactor expansion along the first row; independent of Bareiss.
    fn cofactor_det(m: &[Vec<i64>]) -> i128 {
        let n = m.len();
        if n == 0 {
            return 1;
        }
        if n == 1 {
            return m[0][0] as i128;
        }
        let mut acc = 0i128;
        for j in 0..n {
            let minor: Vec<Vec<i64>> = m[1..]
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|&(c, _)| c != j)
                        .map(|(_, &v)| v)
                        .collect()
                })
                .collect();
            let sign = if j % 2 == 0 { 1 } else { -1 };
            acc += sign * m[0][j] as i128 * cofactor_det(&minor);
        }
        acc
    }

    #[test]
    fn det_of_m6_is_three() {
        assert_eq!(det(&m6()), BigInt::from(3));
    }

    #[test]
    fn det_identity() {
        for n in 1..6 {
            assert_eq!(det(&SymIntMatrix::identity(n)), BigInt::one());
        }
    }

    #[test]
    fn det_matches_cofactor_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let mut rows = vec![vec![0i64; 4]; 4];
            for i in 0..4 {
                for j in i..4 {
                    let v = rng.gen_range(-5..=5);
                    rows[i][j] = v;
                    rows[j][i] = v;
                }
            }
            let m = SymIntMatrix::from_i64(&rows).unwrap();
            assert_eq!(det(&m), BigInt::from(cofactor_det(&rows)), "{rows:?}");
        }
    }

    #[test]
    fn adjugate_of_m6_matches_printed_matrix() {
        let expected = SymIntMatrix::from_i64(&[
            [4, 3, 1, -2, -2, -2],
            [3, 6, 3, -3, -3, -3],
            [1, 3, 4, -2, -2, -2],
            [-2, -3, -2, 4, 1, 1],
            [-2, -3, -2, 1, 4, 1],
            [-2, -3, -2, 1, 1, 4],
        ])
        .unwrap();
        assert_eq!(adjugate(&m6()), expected);
    }

    #[test]
    fn adjugate_small_cases() {
        assert_eq!(
            adjugate(&SymIntMatrix::identity(4)),
            SymIntMatrix::identity(4)
        );
        let d = SymIntMatrix::from_i64(&[[2, 0], [0, 3]]).unwrap();
        assert_eq!(
            adjugate(&d),
            SymIntMatrix::from_i64(&[[3, 0], [0, 2]]).unwrap()
        );
        // singular input still has cofactors
        let s = SymIntMatrix::from_i64(&[[1, 1], [1, 1]]).unwrap();
        assert_eq!(
            adjugate(&s),
            SymIntMatrix::from_i64(&[[1, -1], [-1, 1]]).unwrap()
        );
    }

    #[test]
    fn psd_examples() {
        assert!(is_psd_exact(&m6()));
        assert!(!is_psd_exact(
            &SymIntMatrix::from_i64(&[[1, 0], [0, -1]]).unwrap()
        ));
        assert!(!is_psd_exact(
            &SymIntMatrix::from_i64(&[[2, 3], [3, 2]]).unwrap()
        ));
        assert!(is_psd_exact(&SymIntMatrix::zero(3)));
        // zero diagonal with nonzero row
        assert!(!is_psd_exact(
            &SymIntMatrix::from_i64(&[[0, 1], [1, 5]]).unwrap()
        ));
    }

    #[test]
    fn rank_examples() {
        let e1 = SymIntMatrix::outer(&big(&[1, 0, 0]));
        assert_eq!(rank(&e1), 1);
        assert_eq!(rank(&m6()), 6);
        let x = big(&[1, 2, 0]);
        let y = big(&[0, 1, 3]);
        assert_eq!(
            rank(&SymIntMatrix::outer(&x).add(&SymIntMatrix::outer(&y))),
            2
        );
        assert_eq!(rank(&SymIntMatrix::zero(3)), 0);
    }

    #[test]
    fn kernel_vectors() {
        let d = SymIntMatrix::from_i64(&[[1, 0], [0, 0]]).unwrap();
        assert_eq!(primitive_kernel_vector(&d), Some(big(&[0, 1])));
        let j = SymIntMatrix::from_i64(&[[1, 1], [1, 1]]).unwrap();
        assert_eq!(primitive_kernel_vector(&j), Some(big(&[1, -1])));
        assert_eq!(primitive_kernel_vector(&m6()), None);
        // denominators must be cleared
        let m = SymIntMatrix::from_i64(&[[2, 3], [3, 4]]).unwrap();
        assert_eq!(primitive_kernel_vector(&m), None);
        let m = SymIntMatrix::from_i64(&[[4, 6], [6, 9]]).unwrap();
        assert_eq!(primitive_kernel_vector(&m), Some(big(&[3, -2])));
    }

    #[test]
    fn extend_examples() {
        let u = extend_to_unimodular(&big(&[1, 0, 0])).unwrap();
        assert_eq!(u, UnimodularMatrix::identity(3));

        let u = extend_to_unimodular(&big(&[2, 3])).unwrap();
        assert_eq!(u.as_matrix().column(0), big(&[2, 3]));
        assert!(u.det().abs().is_one());

        let u = extend_to_unimodular(&big(&[1, 1, 1])).unwrap();
        assert_eq!(u.as_matrix().column(0), big(&[1, 1, 1]));
        assert!(u.det().abs().is_one());

        let u = extend_to_unimodular(&big(&[-1, 0])).unwrap();
        assert_eq!(u.as_matrix().column(0), big(&[-1, 0]));

        assert!(matches!(
            extend_to_unimodular(&big(&[2, 4])),
            Err(Error::NotPrimitive(_))
        ));
    }

    #[test]
    fn reduce_rank_examples() {
        let (u, hat) = reduce_rank(&SymIntMatrix::zero(2)).unwrap();
        assert_eq!(u, UnimodularMatrix::identity(2));
        assert_eq!(hat.dim(), 0);

        let j = SymIntMatrix::from_i64(&[[1, 1], [1, 1]]).unwrap();
        let (u, hat) = reduce_rank(&j).unwrap();
        assert_eq!(hat, SymIntMatrix::from_i64(&[[1]]).unwrap());
        let blk = j.congruence(u.as_matrix());
        assert_eq!(blk, SymIntMatrix::from_i64(&[[0, 0], [0, 1]]).unwrap());

        let (u, hat) = reduce_rank(&m6()).unwrap();
        assert_eq!(u, UnimodularMatrix::identity(6));
        assert_eq!(hat, m6());

        assert_eq!(
            reduce_rank(&SymIntMatrix::from_i64(&[[1, 0], [0, -1]]).unwrap()),
            Err(Error::NotPsd)
        );
    }

    #[test]
    fn rejects_asymmetric_input() {
        assert!(matches!(
            SymIntMatrix::from_i64(&[[1, 2], [3, 4]]),
            Err(Error::NotSymmetric { row: 0, col: 1 })
        ));
        assert!(SymIntMatrix::from_rows(vec![]).is_err());
    }

    #[test]
    fn unimodular_inverse() {
        let u = UnimodularMatrix::new(IntMatrix::from_i64(&[[2, -1], [3, -1]]).unwrap()).unwrap();
        let prod = u.mul(&u.inverse());
        assert_eq!(prod, UnimodularMatrix::identity(2));
        assert!(UnimodularMatrix::new(IntMatrix::from_i64(&[[2, 0], [0, 1]]).unwrap()).is_err());
    }
}
