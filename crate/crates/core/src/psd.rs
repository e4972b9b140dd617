//! Integer rank-1 decompositions of positive semidefinite integer matrices,
//! sporadic detection, and unimodular equivalence.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{
    enumerate_with_values, hermite_constant, kx_unchecked, minimal_vector_count, HermiteConstant,
};
use crate::linalg::{
    det, is_psd_exact, normalize_sign, rank, reduce_rank_unchecked, IntMatrix, SymIntMatrix,
    UnimodularMatrix,
};

/// The 6×6 sporadic matrix of determinant 3.
pub fn m6() -> SymIntMatrix {
    SymIntMatrix::from_i64(&[
        [2, 0, 1, 1, 1, 1],
        [0, 2, 0, 1, 1, 1],
        [1, 0, 2, 1, 1, 1],
        [1, 1, 1, 2, 1, 1],
        [1, 1, 1, 1, 2, 1],
        [1, 1, 1, 1, 1, 2],
    ])
    .expect("constant is symmetric")
}

/// Canonical sporadic representatives known for dimension `n`. Empty for
/// n ≤ 5 (there are none) and for n ≥ 7 (not classified here).
pub fn sporadic_catalog(n: usize) -> Vec<(&'static str, SymIntMatrix)> {
    match n {
        6 => vec![("M6", m6())],
        _ => Vec::new(),
    }
}

/// Whether the sporadic remainder of a decomposition matched a catalog entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RemainderClass {
    Catalog(String),
    Unclassified,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rank1Term {
    pub vector: Vec<BigInt>,
    pub multiplicity: BigInt,
}

/// X = Σ λᵢ xᵢxᵢᵀ + remainder, with an optional witness U such that
/// U·C·Uᵀ = remainder for the catalog matrix C named in `remainder_class`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rank1Certificate {
    pub n: usize,
    pub vectors: Vec<Rank1Term>,
    pub remainder: Option<SymIntMatrix>,
    pub witness: Option<UnimodularMatrix>,
    pub remainder_class: Option<RemainderClass>,
    pub steps: usize,
}

impl Rank1Certificate {
    pub fn reconstruct(&self) -> SymIntMatrix {
        let mut acc = self
            .remainder
            .clone()
            .unwrap_or_else(|| SymIntMatrix::zero(self.n));
        for t in &self.vectors {
            acc = acc.add(&SymIntMatrix::outer(&t.vector).scale(&t.multiplicity));
        }
        acc
    }

    /// Full re-check against `x`: reconstruction, term shapes, sporadic
    /// remainder and the witness identity.
    pub fn verify(&self, x: &SymIntMatrix) -> Result<()> {
        if x.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: x.dim(),
                found: self.n,
            });
        }
        for t in &self.vectors {
            if t.vector.len() != self.n || t.vector.iter().all(Zero::is_zero) {
                return Err(Error::InvalidInput("bad rank-1 term".into()));
            }
            if !t.multiplicity.is_positive() {
                return Err(Error::InvalidInput("multiplicity must be positive".into()));
            }
        }
        if self.reconstruct() != *x {
            return Err(Error::InvalidInput(
                "certificate does not reconstruct X".into(),
            ));
        }
        if let Some(r) = &self.remainder {
            if r.dim() != self.n || !is_sporadic(r)? {
                return Err(Error::InvalidInput("remainder is not sporadic".into()));
            }
        }
        if let Some(u) = &self.witness {
            let (Some(r), Some(RemainderClass::Catalog(name))) =
                (&self.remainder, &self.remainder_class)
            else {
                return Err(Error::InvalidInput(
                    "witness without catalog remainder".into(),
                ));
            };
            let base = sporadic_catalog(self.n)
                .into_iter()
                .find(|(k, _)| k == name)
                .map(|(_, m)| m)
                .ok_or_else(|| Error::InvalidInput(format!("unknown catalog entry {name}")))?;
            if base.act(u.as_matrix()) != *r {
                return Err(Error::InvalidInput(
                    "witness does not map catalog entry".into(),
                ));
            }
        }
        Ok(())
    }
}

/// First x (in enumeration order) with X - xxᵀ ⪰ 0, or `None` for a sporadic X.
pub fn rank1_step(x: &SymIntMatrix) -> Result<Option<Vec<BigInt>>> {
    if !is_psd_exact(x) {
        return Err(Error::NotPsd);
    }
    if x.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    Ok(kx_unchecked(x))
}

pub fn decompose(x: &SymIntMatrix) -> Result<Rank1Certificate> {
    if !is_psd_exact(x) {
        return Err(Error::NotPsd);
    }
    let n = x.dim();
    let limit = x.trace();
    let mut residual = x.clone();
    let mut vectors: Vec<Rank1Term> = Vec::new();
    let mut steps = 0usize;
    while !residual.is_zero() {
        let Some(v) = kx_unchecked(&residual) else {
            break;
        };
        residual = residual.sub(&SymIntMatrix::outer(&v));
        steps += 1;
        if BigInt::from(steps) > limit {
            return Err(Error::Internal("decomposition exceeded tr(X) steps".into()));
        }
        match vectors.iter_mut().find(|t| t.vector == v) {
            Some(t) => t.multiplicity += 1,
            None => vectors.push(Rank1Term {
                vector: v,
                multiplicity: BigInt::one(),
            }),
        }
    }
    let (remainder, witness, remainder_class) = if residual.is_zero() {
        (None, None, None)
    } else {
        sporadic_det_check(&residual);
        let mut found = None;
        for (name, base) in sporadic_catalog(n) {
            if let Some(u) = unimodular_witness(&base, &residual)? {
                found = Some((u, name));
                break;
            }
        }
        match found {
            Some((u, name)) => (
                Some(residual),
                Some(u),
                Some(RemainderClass::Catalog(name.to_string())),
            ),
            None => (Some(residual), None, Some(RemainderClass::Unclassified)),
        }
    };
    Ok(Rank1Certificate {
        n,
        vectors,
        remainder,
        witness,
        remainder_class,
        steps,
    })
}

/// True iff no nonzero integer x has X - xxᵀ ⪰ 0. The zero matrix is not
/// sporadic.
pub fn is_sporadic(x: &SymIntMatrix) -> Result<bool> {
    if !is_psd_exact(x) {
        return Err(Error::NotPsd);
    }
    Ok(is_sporadic_unchecked(x))
}

fn is_sporadic_unchecked(x: &SymIntMatrix) -> bool {
    if x.is_zero() {
        return false;
    }
    let s = kx_unchecked(x).is_none();
    if s {
        sporadic_det_check(x);
    }
    s
}

/// Sporadic matrices have det < γ_n; enforced in debug builds.
fn sporadic_det_check(x: &SymIntMatrix) {
    if cfg!(debug_assertions) {
        let g = hermite_constant(x.dim()).value;
        let d = det(x);
        assert!(
            &d * g.denom() < *g.numer(),
            "sporadic matrix with det {d} violates the Hermite bound"
        );
    }
}

pub fn sporadic_det_bound(n: usize) -> HermiteConstant {
    hermite_constant(n)
}

fn squarefree_part(m: &BigInt) -> BigInt {
    let mut m = m.abs();
    let mut out = BigInt::one();
    let mut p = BigInt::from(2);
    while &p * &p <= m {
        let mut odd = false;
        while (&m % &p).is_zero() {
            m /= &p;
            odd = !odd;
        }
        if odd {
            out *= &p;
        }
        p += 1;
    }
    out * m
}

/// X = λxxᵀ with λ squarefree and x normalized.
pub fn rank1_factor(x: &SymIntMatrix) -> Result<(BigInt, Vec<BigInt>)> {
    if !is_psd_exact(x) {
        return Err(Error::NotPsd);
    }
    let r = rank(x);
    if r != 1 {
        return Err(Error::RankNotOne(r));
    }
    let n = x.dim();
    let k = (0..n)
        .find(|&i| !x.get(i, i).is_zero())
        .expect("rank one has a nonzero diagonal");
    let lambda = squarefree_part(x.get(k, k));
    let mut v = Vec::with_capacity(n);
    for i in 0..n {
        let q = x.get(i, i) / &lambda;
        let root = q.sqrt();
        if &root * &root != q {
            return Err(Error::Internal("diagonal is not λ times a square".into()));
        }
        v.push(if x.get(k, i).is_negative() {
            -root
        } else {
            root
        });
    }
    normalize_sign(&mut v);
    if SymIntMatrix::outer(&v).scale(&lambda) != *x {
        return Err(Error::Internal("rank-1 factor does not reconstruct".into()));
    }
    Ok((lambda, v))
}

/// Some U ∈ GL(n, Z) with U X Uᵀ = Y, or `None` if X and Y are inequivalent.
pub fn unimodular_witness(x: &SymIntMatrix, y: &SymIntMatrix) -> Result<Option<UnimodularMatrix>> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    if !is_psd_exact(x) || !is_psd_exact(y) {
        return Err(Error::NotPsd);
    }
    let w = witness_psd(x, y);
    if let Some(u) = &w {
        debug_assert!(x.act(u.as_matrix()) == *y);
    }
    Ok(w)
}

fn witness_psd(x: &SymIntMatrix, y: &SymIntMatrix) -> Option<UnimodularMatrix> {
    let n = x.dim();
    if x == y {
        return Some(UnimodularMatrix::identity(n));
    }
    let r = rank(x);
    if r != rank(y) {
        return None;
    }
    if r == n {
        return witness_definite(x, y);
    }
    if r == 0 {
        return Some(UnimodularMatrix::identity(n));
    }
    // Uᵀ X U = diag(0, X̂); lift V X̂ Vᵀ = Ŷ to U_Y^{-T} diag(I, V) U_Xᵀ.
    let (ux, xh) = reduce_rank_unchecked(x);
    let (uy, yh) = reduce_rank_unchecked(y);
    let v = witness_definite(&xh, &yh)?;
    let w = uy
        .inverse()
        .transpose()
        .mul(&v.embed_lower(n - r))
        .mul(&ux.transpose());
    Some(w)
}

fn witness_definite(x: &SymIntMatrix, y: &SymIntMatrix) -> Option<UnimodularMatrix> {
    let n = x.dim();
    if x == y {
        return Some(UnimodularMatrix::identity(n));
    }
    if det(x) != det(y) {
        return None;
    }
    if minimal_vector_count(x) != minimal_vector_count(y) {
        return None;
    }
    let mut sorted_x: Vec<BigInt> = (0..n).map(|i| x.get(i, i).clone()).collect();
    let mut sorted_y: Vec<BigInt> = (0..n).map(|i| y.get(i, i).clone()).collect();
    sorted_x.sort();
    sorted_y.sort();

    // Row i of U must satisfy uᵢᵀ X uᵢ = Y_ii; collect both signs.
    let top = sorted_y.last().expect("n ≥ 1").clone();
    let pool = enumerate_with_values(x, &top);
    let candidates: Vec<Vec<Vec<BigInt>>> = (0..n)
        .map(|i| {
            let target = y.get(i, i);
            let mut c = Vec::new();
            for (v, val) in &pool {
                if val == target {
                    c.push(v.clone());
                    c.push(v.iter().map(|t| -t).collect());
                }
            }
            c
        })
        .collect();
    if candidates.iter().any(Vec::is_empty) {
        return None;
    }
    // Precompute X·v for the inner products.
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    let mut images: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    if search_rows(x, y, &candidates, &mut rows, &mut images) {
        let u = IntMatrix::from_rows(rows).expect("square");
        UnimodularMatrix::new(u).ok()
    } else {
        None
    }
}

fn search_rows(
    x: &SymIntMatrix,
    y: &SymIntMatrix,
    candidates: &[Vec<Vec<BigInt>>],
    rows: &mut Vec<Vec<BigInt>>,
    images: &mut Vec<Vec<BigInt>>,
) -> bool {
    let i = rows.len();
    let n = candidates.len();
    if i == n {
        return true;
    }
    for v in &candidates[i] {
        let ok = (0..i).all(|j| {
            let dot: BigInt = v.iter().zip(&images[j]).map(|(a, b)| a * b).sum();
            dot == *y.get(i, j)
        });
        if !ok {
            continue;
        }
        let xv = x.as_matrix().mul_vec(v);
        rows.push(v.clone());
        images.push(xv);
        if search_rows(x, y, candidates, rows, images) {
            return true;
        }
        rows.pop();
        images.pop();
    }
    false
}

/// Determinant of the leading k×k block of a row-major n×n array, by
/// Bareiss elimination in i128; `None` on overflow or a zero pivot.
fn leading_det_i128(a: &[i64], n: usize, k: usize) -> Option<i128> {
    let mut m: Vec<i128> = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            m.push(a[i * n + j] as i128);
        }
    }
    let mut prev: i128 = 1;
    for p in 0..k {
        let piv = m[p * k + p];
        if piv == 0 {
            return None;
        }
        for i in p + 1..k {
            for j in p + 1..k {
                let t = m[i * k + j]
                    .checked_mul(piv)?
                    .checked_sub(m[i * k + p].checked_mul(m[p * k + j])?)?;
                m[i * k + j] = t / prev;
            }
        }
        prev = piv;
    }
    Some(m[(k - 1) * k + k - 1])
}

fn leading_det(a: &[i64], n: usize, k: usize) -> BigInt {
    if let Some(d) = leading_det_i128(a, n, k) {
        return BigInt::from(d);
    }
    let rows: Vec<Vec<i64>> = (0..k).map(|i| a[i * n..i * n + k].to_vec()).collect();
    IntMatrix::from_i64(&rows).expect("square").det()
}

/// Determinant of a k×k i128 matrix by Bareiss elimination with row
/// pivoting; `None` on overflow.
fn det_i128(mut m: Vec<i128>, k: usize) -> Option<i128> {
    let mut sign = 1i128;
    let mut prev = 1i128;
    for p in 0..k {
        if m[p * k + p] == 0 {
            let Some(r) = (p + 1..k).find(|&r| m[r * k + p] != 0) else {
                return Some(0);
            };
            for c in 0..k {
                m.swap(p * k + c, r * k + c);
            }
            sign = -sign;
        }
        let piv = m[p * k + p];
        for i in p + 1..k {
            for j in p + 1..k {
                let t = m[i * k + j]
                    .checked_mul(piv)?
                    .checked_sub(m[i * k + p].checked_mul(m[p * k + j])?)?;
                m[i * k + j] = t / prev;
            }
        }
        prev = piv;
    }
    Some(sign * m[k * k - 1])
}

/// Cheap certificate of non-sporadicity: some x ∈ {-1, 0, 1}ⁿ with
/// xᵀ adj(X) x ≤ det(X). Returns false when unsure (including overflow).
fn has_small_kx_point(a: &[i64], n: usize) -> bool {
    let full: Vec<i128> = a.iter().map(|&v| v as i128).collect();
    let Some(d) = det_i128(full, n) else {
        return false;
    };
    let mut adj = vec![0i128; n * n];
    for i in 0..n {
        for j in i..n {
            // cofactor C_ji = (-1)^{i+j} det(minor without row j, column i)
            let mut minor = Vec::with_capacity((n - 1) * (n - 1));
            for r in (0..n).filter(|&r| r != j) {
                for c in (0..n).filter(|&c| c != i) {
                    minor.push(a[r * n + c] as i128);
                }
            }
            let Some(v) = (if n == 1 {
                Some(1)
            } else {
                det_i128(minor, n - 1)
            }) else {
                return false;
            };
            let v = if (i + j) % 2 == 0 { v } else { -v };
            adj[i * n + j] = v;
            adj[j * n + i] = v;
        }
    }
    let mut x = vec![0i128; n];
    let total = 3usize.pow(n as u32);
    for code in 1..total {
        let mut c = code;
        for xi in x.iter_mut() {
            *xi = (c % 3) as i128 - 1;
            c /= 3;
        }
        if x.iter().all(|&v| v == 0) {
            continue;
        }
        let mut q = 0i128;
        for i in 0..n {
            if x[i] == 0 {
                continue;
            }
            for j in 0..n {
                q += x[i] * adj[i * n + j] * x[j];
            }
        }
        if q <= d {
            return true;
        }
    }
    false
}

fn nondecreasing_tuples(n: usize, bound: i64) -> Vec<Vec<i64>> {
    fn rec(n: usize, lo: i64, bound: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in lo..=bound {
            cur.push(v);
            rec(n, v, bound, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, 1, bound, &mut Vec::new(), &mut out);
    out
}

struct Scan<'a> {
    n: usize,
    a: Vec<i64>,
    gamma_num: &'a BigInt,
    gamma_den: &'a BigInt,
    out: Vec<Vec<i64>>,
}

impl Scan<'_> {
    /// Fill entry (i, j), i < j, column by column. Within each column the
    /// first nonzero entry is kept positive: conjugating by a diagonal ±1
    /// matrix reaches this form without changing the diagonal.
    fn fill(&mut self, i: usize, j: usize, signed: bool) {
        let n = self.n;
        if j == n {
            let d = leading_det(&self.a, n, n);
            if &d * self.gamma_den < *self.gamma_num {
                self.out.push(self.a.clone());
            }
            return;
        }
        if i == j {
            // column complete: leading minor must stay positive
            if j > 0 && !leading_det(&self.a, n, j + 1).is_positive() {
                return;
            }
            self.fill(0, j + 1, false);
            return;
        }
        let p = self.a[i * n + i] * self.a[j * n + j];
        let r = (p - 1).sqrt();
        let lo = if signed { -r } else { 0 };
        for v in lo..=r {
            self.a[i * n + j] = v;
            self.a[j * n + i] = v;
            self.fill(i + 1, j, signed || v != 0);
        }
        self.a[i * n + j] = 0;
        self.a[j * n + i] = 0;
    }
}

/// Positive definite sporadic X with 1 ≤ X₁₁ ≤ … ≤ X_nn ≤ `diag_bound`,
/// one representative per unimodular class (the lexicographically first).
pub fn search_sporadic(n: usize, diag_bound: i64) -> Result<Vec<SymIntMatrix>> {
    if n < 2 {
        return Err(Error::InvalidInput("search_sporadic needs n ≥ 2".into()));
    }
    if diag_bound < 1 {
        return Err(Error::InvalidInput("diag_bound must be at least 1".into()));
    }
    let gamma = hermite_constant(n).value;
    let (num, den) = (gamma.numer().clone(), gamma.denom().clone());
    let tuples = nondecreasing_tuples(n, diag_bound);
    let mut found: Vec<Vec<i64>> = tuples
        .par_iter()
        .flat_map_iter(|diag| {
            let mut a = vec![0i64; n * n];
            for (i, d) in diag.iter().enumerate() {
                a[i * n + i] = *d;
            }
            let mut scan = Scan {
                n,
                a,
                gamma_num: &num,
                gamma_den: &den,
                out: Vec::new(),
            };
            scan.fill(0, 1, false);
            scan.out
                .into_iter()
                .filter(|m| !has_small_kx_point(m, n))
                .filter(|m| {
                    let rows: Vec<&[i64]> = m.chunks(n).collect();
                    let x = SymIntMatrix::from_i64(&rows).expect("symmetric by construction");
                    is_sporadic_unchecked(&x)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    found.sort();
    let mut reps: Vec<SymIntMatrix> = Vec::new();
    for m in found {
        let rows: Vec<&[i64]> = m.chunks(n).collect();
        let x = SymIntMatrix::from_i64(&rows).expect("symmetric");
        if !reps.iter().any(|r| witness_psd(r, &x).is_some()) {
            reps.push(x);
        }
    }
    Ok(reps)
}

/// The three generators of GL(n, Z) used for random words, plus the inverse
/// of the elementary addition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GlGenerator {
    Shift,
    Add,
    AddInv,
    Swap,
}

impl GlGenerator {
    pub const ALL: [GlGenerator; 4] = [Self::Shift, Self::Add, Self::AddInv, Self::Swap];

    pub fn label(&self) -> &'static str {
        match self {
            Self::Shift => "C",
            Self::Add => "E",
            Self::AddInv => "Einv",
            Self::Swap => "S",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.label() == s)
    }

    pub fn matrix(&self, n: usize) -> UnimodularMatrix {
        let mut m = IntMatrix::zeros(n, n);
        match self {
            Self::Shift => {
                for i in 0..n {
                    m.set(i, (i + 1) % n, BigInt::one());
                }
            }
            Self::Add | Self::AddInv => {
                for i in 0..n {
                    m.set(i, i, BigInt::one());
                }
                if n >= 2 {
                    let v = if *self == Self::Add { 1 } else { -1 };
                    m.set(1, 0, BigInt::from(v));
                }
            }
            Self::Swap => {
                for i in 0..n {
                    m.set(i, i, BigInt::one());
                }
                if n >= 2 {
                    m.set(0, 0, BigInt::zero());
                    m.set(1, 1, BigInt::zero());
                    m.set(0, 1, BigInt::one());
                    m.set(1, 0, BigInt::one());
                }
            }
        }
        UnimodularMatrix::new(m).expect("generator is unimodular")
    }
}

impl fmt::Display for GlGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Product of `len` generators drawn uniformly from the three GL(n, Z)
/// generators.
pub fn random_gl_word<R: Rng>(n: usize, len: usize, rng: &mut R) -> UnimodularMatrix {
    let gens = [GlGenerator::Shift, GlGenerator::Add, GlGenerator::Swap];
    let mut u = UnimodularMatrix::identity(n);
    for _ in 0..len {
        let g = gens[rng.gen_range(0..gens.len())];
        u = g.matrix(n).mul(&u);
    }
    u
}

/// Random PSD matrix Σ xᵢxᵢᵀ over `terms` vectors with entries in [-r, r].
pub fn random_psd<R: Rng>(n: usize, terms: usize, r: i64, rng: &mut R) -> SymIntMatrix {
    let mut acc = SymIntMatrix::zero(n);
    for _ in 0..terms {
        let v: Vec<BigInt> = (0..n)
            .map(|_| BigInt::from(rng.gen_range(-r..=r)))
            .collect();
        acc = acc.add(&SymIntMatrix::outer(&v));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn sym(rows: &[&[i64]]) -> SymIntMatrix {
        SymIntMatrix::from_i64(rows).unwrap()
    }

    #[test]
    fn rank1_step_examples() {
        assert_eq!(
            rank1_step(&SymIntMatrix::identity(2)).unwrap(),
            Some(big(&[1, 0]))
        );
        assert_eq!(rank1_step(&m6()).unwrap(), None);
        assert_eq!(
            rank1_step(&sym(&[&[2, 1], &[1, 1]])).unwrap(),
            Some(big(&[1, 1]))
        );
        assert_eq!(rank1_step(&SymIntMatrix::zero(2)), Err(Error::ZeroMatrix));
        assert_eq!(rank1_step(&sym(&[&[1, 0], &[0, -1]])), Err(Error::NotPsd));
    }

    #[test]
    fn decompose_examples() {
        let c = decompose(&SymIntMatrix::identity(3)).unwrap();
        assert_eq!(c.vectors.len(), 3);
        for (i, t) in c.vectors.iter().enumerate() {
            let mut e = vec![BigInt::zero(); 3];
            e[i] = BigInt::one();
            assert_eq!(t.vector, e);
            assert_eq!(t.multiplicity, BigInt::one());
        }
        assert!(c.remainder.is_none());

        let c = decompose(&m6()).unwrap();
        assert!(c.vectors.is_empty());
        assert_eq!(c.remainder, Some(m6()));
        assert_eq!(c.witness, Some(UnimodularMatrix::identity(6)));
        assert_eq!(
            c.remainder_class,
            Some(RemainderClass::Catalog("M6".into()))
        );
        c.verify(&m6()).unwrap();

        let x = sym(&[&[2, 1], &[1, 1]]);
        let c = decompose(&x).unwrap();
        let got: Vec<_> = c
            .vectors
            .iter()
            .map(|t| (t.vector.clone(), t.multiplicity.clone()))
            .collect();
        assert_eq!(
            got,
            vec![(big(&[1, 1]), BigInt::one()), (big(&[1, 0]), BigInt::one())]
        );
        assert_eq!(c.reconstruct(), x);
    }

    #[test]
    fn multiplicities_aggregate() {
        let x = SymIntMatrix::outer(&big(&[1, 2])).scale(&BigInt::from(3));
        let c = decompose(&x).unwrap();
        assert_eq!(c.vectors.len(), 1);
        assert_eq!(c.vectors[0].multiplicity, BigInt::from(3));
        assert_eq!(c.steps, 3);
    }

    #[test]
    fn m6_plus_rank_one_peels_back_to_m6() {
        let x = m6().add(&SymIntMatrix::outer(&big(&[1, 0, 0, 0, 0, 0])));
        let c = decompose(&x).unwrap();
        c.verify(&x).unwrap();
        assert!(c.remainder.is_some());
        assert!(c.witness.is_some());
    }

    #[test]
    fn is_sporadic_examples() {
        assert!(is_sporadic(&m6()).unwrap());
        assert!(!is_sporadic(&SymIntMatrix::outer(&big(&[1, 0, 0]))).unwrap());
        assert!(!is_sporadic(&m6().scale(&BigInt::from(2))).unwrap());
        assert!(!is_sporadic(&SymIntMatrix::zero(4)).unwrap());
    }

    #[test]
    fn twice_m6_has_unit_vector_by_box_scan() {
        // oracle: some x in [-1,1]⁶ leaves 2M₆ - xxᵀ PSD
        let x2 = m6().scale(&BigInt::from(2));
        let mut hit = false;
        for code in 0..3i64.pow(6) {
            let mut c = code;
            let v: Vec<BigInt> = (0..6)
                .map(|_| {
                    let d = c % 3 - 1;
                    c /= 3;
                    BigInt::from(d)
                })
                .collect();
            if v.iter().any(|t| !t.is_zero()) && is_psd_exact(&x2.sub(&SymIntMatrix::outer(&v))) {
                hit = true;
                break;
            }
        }
        assert!(hit);
    }

    #[test]
    fn det_bound_table() {
        use num_rational::BigRational;
        let r = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
        assert_eq!(sporadic_det_bound(5).value, r(8, 1));
        assert_eq!(sporadic_det_bound(6).value, r(64, 3));
        assert_eq!(sporadic_det_bound(2).value, r(4, 3));
    }

    #[test]
    fn rank1_factor_examples() {
        assert_eq!(
            rank1_factor(&sym(&[&[4, 6], &[6, 9]])).unwrap(),
            (BigInt::from(1), big(&[2, 3]))
        );
        assert_eq!(
            rank1_factor(&sym(&[&[2, 2], &[2, 2]])).unwrap(),
            (BigInt::from(2), big(&[1, 1]))
        );
        assert_eq!(
            rank1_factor(&SymIntMatrix::outer(&big(&[1, 0, 0]))).unwrap(),
            (BigInt::from(1), big(&[1, 0, 0]))
        );
        assert_eq!(
            rank1_factor(&SymIntMatrix::identity(2)),
            Err(Error::RankNotOne(2))
        );
        // 12 = 3·2², x = (2, -1)·... : 3·(2,-2)(2,-2)ᵀ has content 12
        let x = SymIntMatrix::outer(&big(&[2, -2])).scale(&BigInt::from(3));
        assert_eq!(rank1_factor(&x).unwrap(), (BigInt::from(3), big(&[2, -2])));
    }

    #[test]
    fn squarefree() {
        assert_eq!(squarefree_part(&BigInt::from(12)), BigInt::from(3));
        assert_eq!(squarefree_part(&BigInt::from(49)), BigInt::from(1));
        assert_eq!(squarefree_part(&BigInt::from(30)), BigInt::from(30));
    }

    #[test]
    fn witness_examples() {
        let u = unimodular_witness(&m6(), &m6()).unwrap().unwrap();
        assert_eq!(u, UnimodularMatrix::identity(6));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = random_gl_word(6, 5, &mut rng);
        let y = m6().act(w.as_matrix());
        let u = unimodular_witness(&m6(), &y).unwrap().unwrap();
        assert_eq!(m6().act(u.as_matrix()), y);
        assert_eq!(u.det().abs(), BigInt::one());

        assert_eq!(
            unimodular_witness(&SymIntMatrix::identity(2), &sym(&[&[1, 0], &[0, 2]])).unwrap(),
            None
        );
        assert!(
            unimodular_witness(&SymIntMatrix::identity(2), &SymIntMatrix::identity(3)).is_err()
        );
    }

    #[test]
    fn witness_singular() {
        let x = SymIntMatrix::outer(&big(&[1, 1, 0])).add(&SymIntMatrix::outer(&big(&[0, 1, 1])));
        let u0 = random_gl_word(3, 4, &mut ChaCha8Rng::seed_from_u64(9));
        let y = x.act(u0.as_matrix());
        let u = unimodular_witness(&x, &y).unwrap().unwrap();
        assert_eq!(x.act(u.as_matrix()), y);
    }

    #[test]
    fn witness_rejects_same_det_inequivalent() {
        // both det 4: I₂·(diag 1,4) vs diag(2,2); minimum differs
        let a = sym(&[&[1, 0], &[0, 4]]);
        let b = sym(&[&[2, 0], &[0, 2]]);
        assert_eq!(unimodular_witness(&a, &b).unwrap(), None);
    }

    #[test]
    fn search_small_dimensions() {
        assert!(search_sporadic(2, 3).unwrap().is_empty());
        assert!(search_sporadic(3, 2).unwrap().is_empty());
    }

    #[test]
    fn small_kx_prefilter() {
        let m: Vec<i64> = m6()
            .to_rows()
            .iter()
            .flatten()
            .map(|v| i64::try_from(v).unwrap())
            .collect();
        let full: Vec<i128> = m.iter().map(|&v| v as i128).collect();
        assert_eq!(det_i128(full, 6), Some(3));
        let minor: Vec<i128> = (1..6)
            .flat_map(|r| (1..6).map(move |c| (r, c)))
            .map(|(r, c)| m[r * 6 + c] as i128)
            .collect();
        assert_eq!(det_i128(minor, 5), Some(4));
        assert!(!has_small_kx_point(&m, 6));
        assert!(has_small_kx_point(&[2, 1, 1, 1], 2));
        assert_eq!(det_i128(vec![0, 1, 1, 0], 2), Some(-1));
        assert_eq!(det_i128(vec![0, 1, 0, 1], 2), Some(0));
    }

    #[test]
    fn leading_det_matches_bigint() {
        let a = [2i64, 1, 0, 1, 3, 1, 0, 1, 4];
        assert_eq!(leading_det(&a, 3, 3), BigInt::from(18));
        assert_eq!(leading_det(&a, 3, 2), BigInt::from(5));
    }

    #[test]
    fn generators_are_unimodular() {
        for g in GlGenerator::ALL {
            for n in 2..6 {
                assert_eq!(g.matrix(n).det().abs(), BigInt::one());
            }
        }
        let e = GlGenerator::Add
            .matrix(3)
            .mul(&GlGenerator::AddInv.matrix(3));
        assert_eq!(e, UnimodularMatrix::identity(3));
    }

    #[test]
    fn sporadic_invariant_under_gl() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let len = rng.gen_range(0..=5);
            let u = random_gl_word(6, len, &mut rng);
            assert!(is_sporadic(&m6().act(u.as_matrix())).unwrap());
        }
        for _ in 0..30 {
            let n = rng.gen_range(2..=4);
            let x = random_psd(n, n, 3, &mut rng);
            let u = random_gl_word(n, rng.gen_range(0..=5), &mut rng);
            assert_eq!(
                is_sporadic(&x).unwrap(),
                is_sporadic(&x.act(u.as_matrix())).unwrap()
            );
        }
    }
}
