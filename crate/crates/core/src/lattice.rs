//! Enumeration of integer points of bounded value under a positive definite
//! quadratic form, and the K(X) membership search built on it.
//!
//! The enumeration is a Fincke-Pohst recursion over an exact rational
//! LDLᵀ factorization. Coordinate x₀ is the outermost loop, every coordinate
//! runs in increasing order, and of each pair ±x only the member met first
//! (the one whose first nonzero entry is negative) is visited; it is reported
//! negated, so every emitted vector has a positive first nonzero entry.

use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{
    adjugate, det, is_psd_exact, normalize_sign, rank, reduce_rank_unchecked, IntMatrix,
    SymIntMatrix, UnimodularMatrix,
};

/// A positive definite Gram matrix together with a bound t ≥ 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadFormQuery {
    gram: SymIntMatrix,
    bound: BigInt,
}

impl QuadFormQuery {
    pub fn new(gram: SymIntMatrix, bound: BigInt) -> Result<Self> {
        if bound.is_negative() {
            return Err(Error::InvalidInput("bound must be nonnegative".into()));
        }
        if !is_positive_definite(&gram) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self { gram, bound })
    }

    pub fn gram(&self) -> &SymIntMatrix {
        &self.gram
    }

    pub fn bound(&self) -> &BigInt {
        &self.bound
    }
}

/// Sylvester's criterion: every leading principal minor is positive. The
/// minors are exactly the pivots of Bareiss elimination without row swaps.
pub fn is_positive_definite(m: &SymIntMatrix) -> bool {
    let n = m.dim();
    let mut a: Vec<BigInt> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| m.get(i, j).clone())
        .collect();
    let mut prev = BigInt::one();
    for k in 0..n {
        if !a[k * n + k].is_positive() {
            return false;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j]) / &prev;
                a[i * n + j] = v;
            }
        }
        prev = a[k * n + k].clone();
    }
    true
}

/// γ_n with a flag telling whether the value is exact or only an upper bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermiteConstant {
    pub value: BigRational,
    pub exact: bool,
}

/// Hermite constant γ_n in the normalization λ₁(A)ⁿ ≤ γ_n det(A).
///
/// Known exactly for n ≤ 8 and n = 24; elsewhere Hermite's bound
/// (4/3)^{n(n-1)/2} is returned with `exact = false`.
pub fn hermite_constant(n: usize) -> HermiteConstant {
    let r = |num: u64, den: u64| BigRational::new(BigInt::from(num), BigInt::from(den));
    let exact = match n {
        1 => Some(r(1, 1)),
        2 => Some(r(4, 3)),
        3 => Some(r(2, 1)),
        4 => Some(r(2, 1)),
        5 => Some(r(8, 1)),
        6 => Some(r(64, 3)),
        7 => Some(r(64, 1)),
        8 => Some(r(256, 1)),
        24 => Some(BigRational::from_integer(BigInt::from(4).pow(24u32))),
        _ => None,
    };
    match exact {
        Some(value) => HermiteConstant { value, exact: true },
        None => {
            let e = (n * n.saturating_sub(1) / 2) as u32;
            let value = BigRational::new(BigInt::from(4).pow(e), BigInt::from(3).pow(e));
            HermiteConstant {
                value,
                exact: false,
            }
        }
    }
}

/// Rational LDLᵀ data of the coordinate-reversed Gram matrix.
struct Ellipsoid {
    n: usize,
    /// d[k] of the reversed form.
    diag: Vec<BigRational>,
    /// mu[j][k] for j > k: coefficient of y_j in the center of level k.
    mu: Vec<Vec<BigRational>>,
}

impl Ellipsoid {
    fn new(a: &SymIntMatrix) -> Self {
        let n = a.dim();
        // B = P A P with P the reversal permutation.
        let b = |i: usize, j: usize| BigRational::from_integer(a.get(n - 1 - i, n - 1 - j).clone());
        let mut diag: Vec<BigRational> = Vec::with_capacity(n);
        let mut l = vec![vec![BigRational::zero(); n]; n];
        for k in 0..n {
            let mut dk = b(k, k);
            for m in 0..k {
                dk -= &l[k][m] * &l[k][m] * &diag[m];
            }
            for i in k + 1..n {
                let mut v = b(i, k);
                for m in 0..k {
                    v -= &l[i][m] * &l[k][m] * &diag[m];
                }
                l[i][k] = v / &dk;
            }
            diag.push(dk);
        }
        Self { n, diag, mu: l }
    }
}

/// Integers y with (y - c)² ≤ s, as an inclusive range.
fn integer_window(c: &BigRational, s: &BigRational) -> Option<(BigInt, BigInt)> {
    if s.is_negative() {
        return None;
    }
    let r = s.floor().to_integer().sqrt();
    let fits = |y: &BigInt| {
        let d = BigRational::from_integer(y.clone()) - c;
        &d * &d <= *s
    };
    let lo0 = c.ceil().to_integer() - &r - 1;
    let mut hi = c.floor().to_integer() + &r + 1;
    while hi >= lo0 && !fits(&hi) {
        hi -= 1;
    }
    let mut lo = lo0;
    while lo <= hi && !fits(&lo) {
        lo += 1;
    }
    (lo <= hi).then_some((lo, hi))
}

struct Walker<'a, F> {
    ell: &'a Ellipsoid,
    bound: BigRational,
    y: Vec<BigInt>,
    visit: F,
}

impl<F> Walker<'_, F>
where
    F: FnMut(&[BigInt], &BigInt) -> ControlFlow<()>,
{
    /// Level k of the reversed coordinates; `used` is the form value spent on
    /// levels above k; `all_zero` tracks whether those levels are all zero.
    fn level(&mut self, k: usize, used: &BigRational, all_zero: bool) -> ControlFlow<()> {
        let n = self.ell.n;
        let mut center = BigRational::zero();
        for j in k + 1..n {
            if !self.y[j].is_zero() {
                center -= &self.ell.mu[j][k] * BigRational::from_integer(self.y[j].clone());
            }
        }
        let dk = &self.ell.diag[k];
        let rem = &self.bound - used;
        let Some((lo, mut hi)) = integer_window(&center, &(rem / dk)) else {
            return ControlFlow::Continue(());
        };
        if all_zero && hi.is_positive() {
            hi = BigInt::zero();
        }
        let mut v = lo;
        while v <= hi {
            let off = BigRational::from_integer(v.clone()) - &center;
            let spent = used + dk * &off * &off;
            self.y[k] = v.clone();
            let zero_here = all_zero && v.is_zero();
            if k == 0 {
                if !zero_here {
                    // x_i = -y_{n-1-i}
                    let x: Vec<BigInt> = self.y.iter().rev().map(|t| -t).collect();
                    let value = spent.to_integer();
                    (self.visit)(&x, &value)?;
                }
            } else {
                self.level(k - 1, &spent, zero_here)?;
            }
            v += 1;
        }
        self.y[k] = BigInt::zero();
        ControlFlow::Continue(())
    }
}

/// Visits every x ≠ 0 (one per ± pair) with xᵀAx ≤ t in the deterministic
/// order described in the module docs, passing the form value along.
pub fn for_each_below<F>(q: &QuadFormQuery, visit: F) -> ControlFlow<()>
where
    F: FnMut(&[BigInt], &BigInt) -> ControlFlow<()>,
{
    walk(&q.gram, &q.bound, visit)
}

fn walk<F>(gram: &SymIntMatrix, bound: &BigInt, visit: F) -> ControlFlow<()>
where
    F: FnMut(&[BigInt], &BigInt) -> ControlFlow<()>,
{
    let n = gram.dim();
    if n == 0 || bound.is_negative() {
        return ControlFlow::Continue(());
    }
    let ell = Ellipsoid::new(gram);
    let mut w = Walker {
        ell: &ell,
        bound: BigRational::from_integer(bound.clone()),
        y: vec![BigInt::zero(); n],
        visit,
    };
    w.level(n - 1, &BigRational::zero(), true)
}

/// All nonzero x with xᵀAx ≤ t, one representative per ± pair.
pub fn enumerate_below(q: &QuadFormQuery) -> Vec<Vec<BigInt>> {
    let mut out = Vec::new();
    let _ = for_each_below(q, |x, _| {
        out.push(x.to_vec());
        ControlFlow::Continue(())
    });
    out
}

/// Vectors paired with their form values; same order as `enumerate_below`.
pub(crate) fn enumerate_with_values(
    gram: &SymIntMatrix,
    bound: &BigInt,
) -> Vec<(Vec<BigInt>, BigInt)> {
    let mut out = Vec::new();
    let _ = walk(gram, bound, |x, v| {
        out.push((x.to_vec(), v.clone()));
        ControlFlow::Continue(())
    });
    out
}

/// λ₁(A) together with the first minimizer in enumeration order.
pub fn shortest_nonzero(a: &SymIntMatrix) -> Result<(BigInt, Vec<BigInt>)> {
    if !is_positive_definite(a) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(shortest_unchecked(a))
}

pub(crate) fn shortest_unchecked(a: &SymIntMatrix) -> (BigInt, Vec<BigInt>) {
    // Some unit vector attains the smallest diagonal entry.
    let bound = (0..a.dim())
        .map(|i| a.get(i, i).clone())
        .min()
        .expect("dimension at least 1");
    let mut best: Option<(BigInt, Vec<BigInt>)> = None;
    let _ = walk(a, &bound, |x, v| {
        if best.as_ref().is_none_or(|(b, _)| v < b) {
            best = Some((v.clone(), x.to_vec()));
        }
        ControlFlow::Continue(())
    });
    best.expect("a unit vector is always within the bound")
}

/// Number of vectors (counting ± pairs once) attaining λ₁(A).
pub(crate) fn minimal_vector_count(a: &SymIntMatrix) -> (BigInt, usize) {
    let (lambda, _) = shortest_unchecked(a);
    let mut count = 0;
    let _ = walk(a, &lambda, |_, v| {
        if *v == lambda {
            count += 1;
        }
        ControlFlow::Continue(())
    });
    (lambda, count)
}

fn first_below(gram: &SymIntMatrix, bound: &BigInt) -> Option<Vec<BigInt>> {
    let mut hit = None;
    let _ = walk(gram, bound, |x, _| {
        hit = Some(x.to_vec());
        ControlFlow::Break(())
    });
    hit
}

/// Gram-Schmidt data of a positive definite Gram matrix: μ (strictly lower
/// part) and the squared lengths |b*_i|².
fn gram_schmidt(g: &[Vec<BigInt>]) -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
    let r = g.len();
    let mut mu = vec![vec![BigRational::zero(); r]; r];
    let mut b: Vec<BigRational> = Vec::with_capacity(r);
    for i in 0..r {
        for j in 0..i {
            let mut v = BigRational::from_integer(g[i][j].clone());
            for k in 0..j {
                v -= &mu[j][k] * &mu[i][k] * &b[k];
            }
            mu[i][j] = v / &b[j];
        }
        let mut bi = BigRational::from_integer(g[i][i].clone());
        for k in 0..i {
            bi -= &mu[i][k] * &mu[i][k] * &b[k];
        }
        b.push(bi);
    }
    (mu, b)
}

/// LLL reduction (δ = 3/4) of a positive definite Gram matrix G. Returns V
/// unimodular and V G Vᵀ.
pub fn lll_gram(g: &SymIntMatrix) -> (UnimodularMatrix, SymIntMatrix) {
    let r = g.dim();
    let mut v: Vec<Vec<BigInt>> = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect();
    let gram_of = |v: &[Vec<BigInt>]| -> Vec<Vec<BigInt>> {
        let gv: Vec<Vec<BigInt>> = v.iter().map(|row| g.as_matrix().mul_vec(row)).collect();
        (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| v[i].iter().zip(&gv[j]).map(|(a, b)| a * b).sum())
                    .collect()
            })
            .collect()
    };
    let mut cur = gram_of(&v);
    let delta = BigRational::new(BigInt::from(3), BigInt::from(4));
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut k = 1;
    while k < r {
        for j in (0..k).rev() {
            let (mu, _) = gram_schmidt(&cur[..=k]);
            let q = (&mu[k][j] + &half).floor().to_integer();
            if !q.is_zero() {
                let vj = v[j].clone();
                for (a, b) in v[k].iter_mut().zip(&vj) {
                    *a -= &q * b;
                }
                cur = gram_of(&v);
            }
        }
        let (mu, b) = gram_schmidt(&cur[..=k]);
        let m = &mu[k][k - 1];
        if b[k] >= (&delta - m * m) * &b[k - 1] {
            k += 1;
        } else {
            v.swap(k, k - 1);
            cur = gram_of(&v);
            k = k.max(2) - 1;
        }
    }
    let vm = UnimodularMatrix::new(IntMatrix::from_rows(v).expect("square"))
        .expect("LLL transforms are unimodular");
    let reduced = SymIntMatrix::from_rows(cur).expect("Gram matrix is symmetric");
    (vm, reduced)
}

/// Some nonzero x ∈ Zⁿ with X - xxᵀ ⪰ 0, or `None` when X is sporadic (or
/// zero). Rank-deficient inputs are first brought to block form
/// diag(0, X̂) and the search runs on the full-rank block X̂.
pub fn kx_nonzero_point(x: &SymIntMatrix) -> Result<Option<Vec<BigInt>>> {
    if !is_psd_exact(x) {
        return Err(Error::NotPsd);
    }
    Ok(kx_unchecked(x))
}

pub(crate) fn kx_unchecked(x: &SymIntMatrix) -> Option<Vec<BigInt>> {
    let n = x.dim();
    let r = rank(x);
    let found = if r == 0 {
        None
    } else if r == n {
        first_below(&adjugate(x), &det(x))
    } else {
        // y ∈ K(X̂) ⟺ Vy ∈ K(V X̂ Vᵀ); search the LLL-reduced block.
        let (u, hat) = reduce_rank_unchecked(x);
        let (v, red) = lll_gram(&hat);
        first_below(&adjugate(&red), &det(&red)).map(|y| {
            let mut w = vec![BigInt::zero(); n - r];
            w.extend(v.inverse().as_matrix().mul_vec(&y));
            let mut v = u.inverse().transpose().as_matrix().mul_vec(&w);
            normalize_sign(&mut v);
            v
        })
    };
    if let Some(v) = &found {
        debug_assert!(
            is_psd_exact(&x.sub(&SymIntMatrix::outer(v))),
            "K(X) point leaves a non-PSD remainder"
        );
    }
    found
}
