//! Integer points of the second-order cone: Lorentz form, the generator
//! group, Pythagorean orbits, sporadic points and height descent.
//!
//! Coordinates are `i64` with `i128` intermediates; heights handled here are
//! small enough that overflow is reported as an error rather than expected.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{IntMatrix, UnimodularMatrix};

pub const MIN_DIM: usize = 3;
pub const MAX_DIM: usize = 10;

/// An integer vector s ∈ Zⁿ read as a candidate point of T_n; the last
/// coordinate is the height.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConePoint {
    coords: Vec<i64>,
}

impl ConePoint {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidInput("cone points need n ≥ 2".into()));
        }
        Ok(Self { coords })
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<i64> {
        self.coords
    }

    pub fn height(&self) -> i64 {
        *self.coords.last().expect("n ≥ 2")
    }

    /// ⟨s, s⟩.
    pub fn form(&self) -> i128 {
        form_sq(&self.coords)
    }

    pub fn in_cone(&self) -> bool {
        in_cone(&self.coords)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn gcd(&self) -> i64 {
        self.coords.iter().fold(0i64, |g, &c| g.gcd(&c))
    }

    pub fn is_primitive(&self) -> bool {
        self.gcd() == 1
    }

    pub fn is_pythagorean(&self) -> bool {
        is_pythagorean(self)
    }
}

impl fmt::Display for ConePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

fn form_sq(s: &[i64]) -> i128 {
    let (h, rest) = s.split_last().expect("nonempty");
    rest.iter().map(|&c| c as i128 * c as i128).sum::<i128>() - *h as i128 * *h as i128
}

fn in_cone(s: &[i64]) -> bool {
    *s.last().expect("nonempty") >= 0 && form_sq(s) <= 0
}

fn narrow(v: i128) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::OutOfRange("coordinate overflows i64".into()))
}

/// ⟨a, b⟩ = a₁b₁ + … + a_{n-1}b_{n-1} - a_n b_n.
pub fn lorentz_form(a: &[i64], b: &[i64]) -> Result<i128> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.is_empty() {
        return Ok(0);
    }
    let k = a.len() - 1;
    let head: i128 = (0..k).map(|i| a[i] as i128 * b[i] as i128).sum();
    Ok(head - a[k] as i128 * b[k] as i128)
}

pub fn is_pythagorean(s: &ConePoint) -> bool {
    s.in_cone() && s.form() == 0
}

/// One generator of the group acting on T_n. Indices are 1-based:
/// `P(j)` swaps coordinates 1 and j, `Q(k)` negates coordinate k.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GeneratorLabel {
    Aplus,
    AplusInv,
    P(usize),
    Q(usize),
}

impl GeneratorLabel {
    pub fn check(&self, n: usize) -> Result<()> {
        let ok = match *self {
            Self::Aplus | Self::AplusInv => (MIN_DIM..=MAX_DIM).contains(&n),
            Self::P(j) => n >= 3 && (2..n).contains(&j),
            Self::Q(k) => n >= 2 && (1..n).contains(&k),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::OutOfRange(format!("generator {self} for n = {n}")))
        }
    }

    pub fn inverse(&self) -> Self {
        match *self {
            Self::Aplus => Self::AplusInv,
            Self::AplusInv => Self::Aplus,
            other => other,
        }
    }

    /// Every generator for dimension n: A⁺, its inverse, the P's and the Q's.
    pub fn all(n: usize) -> Vec<Self> {
        let mut v = vec![Self::Aplus, Self::AplusInv];
        v.extend((2..n).map(Self::P));
        v.extend((1..n).map(Self::Q));
        v
    }

    pub fn apply(&self, s: &[i64]) -> Result<Vec<i64>> {
        let n = s.len();
        self.check(n)?;
        match *self {
            Self::P(j) => {
                let mut out = s.to_vec();
                out.swap(0, j - 1);
                Ok(out)
            }
            Self::Q(k) => {
                let mut out = s.to_vec();
                out[k - 1] = -out[k - 1];
                Ok(out)
            }
            Self::Aplus => {
                let mut out = reflect(s)?;
                for c in out.iter_mut().take(n - 1) {
                    *c = -*c;
                }
                Ok(out)
            }
            Self::AplusInv => {
                let mut t = s.to_vec();
                for c in t.iter_mut().take(n - 1) {
                    *c = -*c;
                }
                reflect(&t)
            }
        }
    }

    pub fn matrix(&self, n: usize) -> Result<UnimodularMatrix> {
        self.check(n)?;
        columns_matrix(n, |e| self.apply(e))
    }
}

/// The reflection A_n; an involution.
fn reflect(s: &[i64]) -> Result<Vec<i64>> {
    let n = s.len();
    let w: Vec<i128> = s.iter().map(|&c| c as i128).collect();
    let out: Vec<i128> = if n == 3 {
        vec![
            -w[0] - 2 * w[1] + 2 * w[2],
            -2 * w[0] - w[1] + 2 * w[2],
            -2 * w[0] - 2 * w[1] + 3 * w[2],
        ]
    } else {
        let h = w[n - 1];
        let mut o = w.clone();
        o[0] = -w[1] - w[2] + h;
        o[1] = -w[0] - w[2] + h;
        o[2] = -w[0] - w[1] + h;
        o[n - 1] = -w[0] - w[1] - w[2] + 2 * h;
        o
    };
    out.into_iter().map(narrow).collect()
}

fn columns_matrix<F>(n: usize, f: F) -> Result<UnimodularMatrix>
where
    F: Fn(&[i64]) -> Result<Vec<i64>>,
{
    let mut m = IntMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0i64; n];
        e[j] = 1;
        let col = f(&e)?;
        for (i, v) in col.into_iter().enumerate() {
            m.set(i, j, BigInt::from(v));
        }
    }
    UnimodularMatrix::new(m)
}

impl fmt::Display for GeneratorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Aplus => f.write_str("Aplus"),
            Self::AplusInv => f.write_str("AplusInv"),
            Self::P(j) => write!(f, "P1{j}"),
            Self::Q(k) => write!(f, "Q{k}"),
        }
    }
}

impl FromStr for GeneratorLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("unknown generator label {s:?}"));
        match s {
            "Aplus" => Ok(Self::Aplus),
            "AplusInv" => Ok(Self::AplusInv),
            _ => {
                if let Some(rest) = s.strip_prefix("P1") {
                    rest.parse().map(Self::P).map_err(|_| bad())
                } else if let Some(rest) = s.strip_prefix('Q') {
                    rest.parse().map(Self::Q).map_err(|_| bad())
                } else {
                    Err(bad())
                }
            }
        }
    }
}

pub fn generator_matrix(label: GeneratorLabel, n: usize) -> Result<UnimodularMatrix> {
    label.matrix(n)
}

/// A product of generators. The labels multiply left to right, so the
/// rightmost label acts first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupWord {
    n: usize,
    labels: Vec<GeneratorLabel>,
}

impl GroupWord {
    pub fn new(n: usize, labels: Vec<GeneratorLabel>) -> Result<Self> {
        for l in &labels {
            l.check(n)?;
        }
        Ok(Self { n, labels })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            labels: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[GeneratorLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// g · self, i.e. `g` acts after the existing word.
    pub fn then(&mut self, g: GeneratorLabel) {
        self.labels.insert(0, g);
    }

    /// `other` acts after `self`.
    pub fn followed_by(&self, other: &GroupWord) -> GroupWord {
        let mut labels = other.labels.clone();
        labels.extend_from_slice(&self.labels);
        GroupWord { n: self.n, labels }
    }

    pub fn inverse(&self) -> GroupWord {
        GroupWord {
            n: self.n,
            labels: self
                .labels
                .iter()
                .rev()
                .map(GeneratorLabel::inverse)
                .collect(),
        }
    }

    pub fn apply(&self, s: &[i64]) -> Result<Vec<i64>> {
        if s.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: s.len(),
            });
        }
        let mut cur = s.to_vec();
        for g in self.labels.iter().rev() {
            cur = g.apply(&cur)?;
        }
        Ok(cur)
    }

    pub fn matrix(&self) -> Result<UnimodularMatrix> {
        let mut m = UnimodularMatrix::identity(self.n);
        for g in &self.labels {
            m = m.mul(&g.matrix(self.n)?);
        }
        Ok(m)
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.labels.iter().map(ToString::to_string).collect()
    }

    pub fn parse<S: AsRef<str>>(n: usize, labels: &[S]) -> Result<Self> {
        let labels = labels
            .iter()
            .map(|s| s.as_ref().parse())
            .collect::<Result<Vec<GeneratorLabel>>>()?;
        Self::new(n, labels)
    }
}

/// ⟨w·s, w·s⟩ == ⟨s, s⟩.
pub fn form_invariance_check(w: &GroupWord, s: &ConePoint) -> Result<bool> {
    let t = w.apply(s.coords())?;
    Ok(lorentz_form(&t, &t)? == s.form())
}

fn require_cone(s: &ConePoint) -> Result<()> {
    if s.in_cone() {
        Ok(())
    } else {
        Err(Error::NotInCone)
    }
}

fn require_range(n: usize) -> Result<()> {
    if (MIN_DIM..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!(
            "n = {n} outside {MIN_DIM}..={MAX_DIM}"
        )))
    }
}

/// Signs cleared and the first n-1 coordinates sorted non-increasingly,
/// together with the word taking s to the result.
pub fn normalize(s: &ConePoint) -> Result<(ConePoint, GroupWord)> {
    require_cone(s)?;
    Ok(normalize_any(s))
}

fn normalize_any(s: &ConePoint) -> (ConePoint, GroupWord) {
    let n = s.n();
    let mut c = s.coords().to_vec();
    let mut word = GroupWord::identity(n);
    for k in 0..n - 1 {
        if c[k] < 0 {
            c[k] = -c[k];
            word.then(GeneratorLabel::Q(k + 1));
        }
    }
    for i in 0..n.saturating_sub(2) {
        let mut m = i;
        for j in i + 1..n - 1 {
            if c[j] > c[m] {
                m = j;
            }
        }
        if m != i {
            c.swap(i, m);
            if i == 0 {
                word.then(GeneratorLabel::P(m + 1));
            } else {
                // (i m) = (1 i)(1 m)(1 i)
                word.then(GeneratorLabel::P(i + 1));
                word.then(GeneratorLabel::P(m + 1));
                word.then(GeneratorLabel::P(i + 1));
            }
        }
    }
    (ConePoint { coords: c }, word)
}

#[cfg(test)]
fn is_normalized(c: &[i64]) -> bool {
    let k = c.len() - 1;
    c[..k].iter().all(|&v| v >= 0) && c[..k].windows(2).all(|w| w[0] >= w[1])
}

fn tuple(head: &[i64], n: usize) -> ConePoint {
    let mut c = vec![0i64; n];
    c[..head.len() - 1].copy_from_slice(&head[..head.len() - 1]);
    c[n - 1] = *head.last().expect("nonempty");
    ConePoint { coords: c }
}

fn ones(k: usize, tail_zeros: usize, h: i64, n: usize) -> ConePoint {
    let mut c = vec![1i64; k];
    c.extend(std::iter::repeat_n(0, tail_zeros));
    c.push(h);
    debug_assert_eq!(c.len(), n);
    ConePoint { coords: c }
}

fn twos(k: usize, zeros: usize, n: usize) -> ConePoint {
    let mut c = vec![2i64; k];
    c.push(1);
    c.extend(std::iter::repeat_n(0, zeros));
    c.push(6);
    debug_assert_eq!(c.len(), n);
    ConePoint { coords: c }
}

/// The root set R for 3 ≤ n ≤ 10, in the order the classification lists it.
pub fn roots(n: usize) -> Result<Vec<ConePoint>> {
    require_range(n)?;
    let e = tuple(&[1, 1], n);
    let z = tuple(&[1], n);
    Ok(match n {
        3..=6 => vec![e, z],
        7 => vec![e, z, ones(6, 0, 3, 7)],
        8 => vec![e, z, ones(7, 0, 3, 8), ones(6, 1, 3, 8)],
        9 => vec![
            e,
            z,
            ones(8, 0, 3, 9),
            ones(7, 1, 3, 9),
            ones(6, 2, 3, 9),
            twos(7, 0, 9),
        ],
        _ => vec![
            e,
            ones(9, 0, 3, 10),
            z,
            ones(8, 1, 3, 10),
            ones(7, 2, 3, 10),
            ones(6, 3, 3, 10),
            twos(8, 0, 10),
            twos(7, 1, 10),
        ],
    })
}

/// Roots without the (2,…,2,1,…,6)-type entries, which split into two
/// smaller roots.
pub fn minimal_roots(n: usize) -> Result<Vec<ConePoint>> {
    Ok(roots(n)?.into_iter().filter(|r| r.height() != 6).collect())
}

/// For a (2,…,2,1,0…,6)-type root, two roots of height 3 summing to it.
pub fn split_root(r: &ConePoint) -> Option<(ConePoint, ConePoint)> {
    let c = r.coords();
    let n = c.len();
    if r.height() != 6 {
        return None;
    }
    let k = c.iter().take(n - 1).filter(|&&v| v == 2).count();
    // (2^k, 1, 0^z, 6) = (1^{k+1}, 0^z, 3) + (1^k, 0^{z+1}, 3)
    let z = n - 2 - k;
    Some((ones(k + 1, z, 3, n), ones(k, z + 1, 3, n)))
}

/// The tuples whose height is unchanged by one descent step, as listed by
/// the stable-height classification for n = 7..10.
pub fn stable_height_tuples(n: usize) -> Vec<ConePoint> {
    match n {
        7 => vec![ones(6, 0, 3, 7)],
        8 => vec![ones(7, 0, 3, 8), ones(6, 1, 3, 8)],
        9 => vec![
            ones(8, 0, 3, 9),
            ones(7, 1, 3, 9),
            ones(6, 2, 3, 9),
            twos(7, 0, 9),
        ],
        10 => vec![
            ones(8, 1, 3, 10),
            ones(7, 2, 3, 10),
            ones(6, 3, 3, 10),
            twos(8, 0, 10),
            twos(7, 1, 10),
        ],
        _ => Vec::new(),
    }
}

struct PeelSearch<'a> {
    s: &'a [i64],
    /// suffix sums of s_i² over the first n-1 coordinates
    tail_sq: Vec<i128>,
}

/// Largest-height primitive Pythagorean p, sorted like the normalized s,
/// with s - p ∈ T_n. Among equal heights the lexicographically largest wins.
fn best_peel(s: &[i64], min_height: i64) -> Option<Vec<i64>> {
    let n = s.len();
    let h = s[n - 1];
    let head = &s[..n - 1];
    let f = -form_sq(s);
    let mut tail_sq = vec![0i128; n];
    for i in (0..n - 1).rev() {
        tail_sq[i] = tail_sq[i + 1] + head[i] as i128 * head[i] as i128;
    }
    let search = PeelSearch { s: head, tail_sq };
    for ph in (min_height.max(1)..=h).rev() {
        // s - p ∈ T_n  ⟺  2(s·p) ≥ 2·h·p_n - f
        let target = 2 * h as i128 * ph as i128 - f;
        let mut cur = vec![0i64; n - 1];
        let mut found = None;
        visit_all(
            &search,
            0,
            ph as i128 * ph as i128,
            ph,
            0,
            target,
            &mut cur,
            &mut |p| {
                if p.iter().fold(ph, |g, &v| g.gcd(&v)) == 1 {
                    let mut out = p.to_vec();
                    out.push(ph);
                    found = Some(out);
                    true
                } else {
                    false
                }
            },
        );
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Sorted p ≥ 0 filling positions i.. with Σ p² = `budget`, entries at most
/// `cap` and 2·s·p ≥ `target`, larger entries first; stops once `hit` accepts.
#[allow(clippy::too_many_arguments)]
fn visit_all(
    search: &PeelSearch<'_>,
    i: usize,
    budget: i128,
    cap: i64,
    dot: i128,
    target: i128,
    cur: &mut Vec<i64>,
    hit: &mut dyn FnMut(&[i64]) -> bool,
) -> bool {
    let m = cur.len();
    if budget == 0 {
        for v in &mut cur[i..] {
            *v = 0;
        }
        return 2 * dot >= target && hit(cur);
    }
    if i == m {
        return false;
    }
    let need = target - 2 * dot;
    if need > 0 && need * need > 4 * search.tail_sq[i] * budget {
        return false;
    }
    let left = (m - i) as i128;
    let mut v = (cap as i128).min(budget.sqrt());
    while v >= 0 && left * v * v >= budget {
        cur[i] = v as i64;
        if visit_all(
            search,
            i + 1,
            budget - v * v,
            v as i64,
            dot + v * search.s[i] as i128,
            target,
            cur,
            hit,
        ) {
            return true;
        }
        v -= 1;
    }
    false
}

/// True iff no nonzero Pythagorean p has s - p ∈ T_n.
///
/// Only sorted nonnegative p are tried against the normalized s: aligning
/// signs and order maximizes s·p, which is all that membership of s - p
/// depends on once |p| is fixed.
pub fn is_sporadic_soc(s: &ConePoint) -> Result<bool> {
    require_cone(s)?;
    Ok(sporadic_unchecked(s))
}

fn sporadic_unchecked(s: &ConePoint) -> bool {
    if s.is_zero() {
        return false;
    }
    if s.form() == -1 {
        return true;
    }
    let (t, _) = normalize_any(s);
    best_peel(t.coords(), 1).is_none()
}

fn roots_contain(roots: &[ConePoint], c: &[i64]) -> bool {
    roots.iter().any(|r| r.coords() == c)
}

/// Walks a primitive Pythagorean or sporadic s down to a root; returns the
/// root and a word w with w·root = s.
pub fn descend(s: &ConePoint) -> Result<(ConePoint, GroupWord)> {
    let n = s.n();
    require_range(n)?;
    require_cone(s)?;
    if !s.is_primitive() {
        return Err(Error::NotPrimitive(s.gcd().to_string()));
    }
    if s.form() != 0 && !sporadic_unchecked(s) {
        return Err(Error::NotDescendable);
    }
    descend_unchecked(s)
}

fn descend_unchecked(s: &ConePoint) -> Result<(ConePoint, GroupWord)> {
    let n = s.n();
    let rs = roots(n)?;
    // `path` maps s to the current point.
    let mut path = GroupWord::identity(n);
    let mut cur = s.clone();
    loop {
        let (t, w) = normalize_any(&cur);
        path = path.followed_by(&w);
        if roots_contain(&rs, t.coords()) {
            let cert = path.inverse();
            debug_assert_eq!(cert.apply(t.coords()).ok().as_deref(), Some(s.coords()));
            return Ok((t, cert));
        }
        let next = GeneratorLabel::Aplus.apply(t.coords())?;
        if next[n - 1] >= t.height() {
            return Err(Error::Internal(format!(
                "descent stalled at {t}, which is not a root"
            )));
        }
        if !in_cone(&next) {
            return Err(Error::Internal(format!("descent left the cone at {t}")));
        }
        path.then(GeneratorLabel::Aplus);
        cur = ConePoint { coords: next };
    }
}

/// One term λ·(w·r) of a decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SocTerm {
    pub lambda: i64,
    pub word: GroupWord,
    pub root: ConePoint,
}

impl SocTerm {
    pub fn point(&self) -> Result<Vec<i64>> {
        self.word.apply(self.root.coords())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SocCertificate {
    pub n: usize,
    pub terms: Vec<SocTerm>,
}

impl SocCertificate {
    pub fn reconstruct(&self) -> Result<Vec<i64>> {
        let mut acc = vec![0i128; self.n];
        for t in &self.terms {
            let p = t.point()?;
            for (a, v) in acc.iter_mut().zip(p) {
                *a += t.lambda as i128 * v as i128;
            }
        }
        acc.into_iter().map(narrow).collect()
    }

    /// Roots drawn from R, positive multiplicities, every term in T_n and
    /// exact reconstruction of s.
    pub fn verify(&self, s: &ConePoint) -> Result<()> {
        if s.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: s.n(),
                found: self.n,
            });
        }
        let rs = roots(self.n)?;
        for t in &self.terms {
            if t.lambda < 1 {
                return Err(Error::InvalidInput("multiplicity must be positive".into()));
            }
            if t.word.n() != self.n || !roots_contain(&rs, t.root.coords()) {
                return Err(Error::InvalidInput(format!("{} is not a root", t.root)));
            }
            if !in_cone(&t.point()?) {
                return Err(Error::InvalidInput("term outside the cone".into()));
            }
        }
        if self.reconstruct()? != s.coords() {
            return Err(Error::InvalidInput(
                "certificate does not reconstruct s".into(),
            ));
        }
        Ok(())
    }
}

/// s = Σ λᵢ (wᵢ·rᵢ). Pythagorean tuples are peeled greedily (largest height
/// first, maximal multiple); a sporadic residual g·s₀ is descended as s₀.
/// With `minimal` set, composite roots are split into two terms.
pub fn decompose_soc(s: &ConePoint, minimal: bool) -> Result<SocCertificate> {
    let n = s.n();
    require_range(n)?;
    require_cone(s)?;
    let mut terms: Vec<SocTerm> = Vec::new();
    let mut residual = s.coords().to_vec();
    let push = |terms: &mut Vec<SocTerm>, lambda: i64, p: &ConePoint| -> Result<()> {
        let (root, word) = descend_unchecked(p)?;
        match split_root(&root).filter(|_| minimal) {
            Some((a, b)) => {
                terms.push(SocTerm {
                    lambda,
                    word: word.clone(),
                    root: a,
                });
                terms.push(SocTerm {
                    lambda,
                    word,
                    root: b,
                });
            }
            None => terms.push(SocTerm { lambda, word, root }),
        }
        Ok(())
    };
    while residual.iter().any(|&c| c != 0) {
        let cur = ConePoint {
            coords: residual.clone(),
        };
        let (t, w) = normalize_any(&cur);
        let peel = if cur.form() == -1 {
            None
        } else {
            best_peel(t.coords(), 1)
        };
        match peel {
            Some(p_norm) => {
                let p = w.inverse().apply(&p_norm)?;
                let mut lambda = 1i64;
                let mut next: Vec<i64> = residual.iter().zip(&p).map(|(a, b)| a - b).collect();
                loop {
                    let trial: Vec<i64> = next.iter().zip(&p).map(|(a, b)| a - b).collect();
                    if !in_cone(&trial) {
                        break;
                    }
                    next = trial;
                    lambda += 1;
                }
                push(&mut terms, lambda, &ConePoint { coords: p })?;
                residual = next;
            }
            None => {
                let g = cur.gcd();
                let s0 = ConePoint {
                    coords: residual.iter().map(|c| c / g).collect(),
                };
                push(&mut terms, g, &s0)?;
                break;
            }
        }
    }
    let cert = SocCertificate { n, terms };
    debug_assert!(cert.reconstruct().ok().as_deref() == Some(s.coords()));
    Ok(cert)
}

/// Every primitive Pythagorean tuple of height ≤ `max_height`, by orbit
/// expansion from the Pythagorean roots, sorted by (height, coordinates).
pub fn pythagorean_orbit(n: usize, max_height: i64) -> Result<Vec<ConePoint>> {
    let seeds: Vec<ConePoint> = roots(n)?.into_iter().filter(|r| r.form() == 0).collect();
    orbit(n, &seeds, max_height)
}

/// The orbit of `seeds` under all generators, truncated at `max_height`.
pub fn orbit(n: usize, seeds: &[ConePoint], max_height: i64) -> Result<Vec<ConePoint>> {
    require_range(n)?;
    let gens = GeneratorLabel::all(n);
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut queue: VecDeque<Vec<i64>> = VecDeque::new();
    for r in seeds {
        if r.height() <= max_height && seen.insert(r.coords().to_vec()) {
            queue.push_back(r.coords().to_vec());
        }
    }
    while let Some(c) = queue.pop_front() {
        for g in &gens {
            let d = g.apply(&c)?;
            if d[n - 1] <= max_height && !seen.contains(&d) {
                seen.insert(d.clone());
                queue.push_back(d);
            }
        }
    }
    let mut out: Vec<ConePoint> = seen
        .into_iter()
        .map(|coords| ConePoint { coords })
        .collect();
    out.sort_by(|a, b| (a.height(), a.coords()).cmp(&(b.height(), b.coords())));
    Ok(out)
}

/// Calls `f` on every normalized point of T_n with 0 ≤ height ≤ `max_height`.
pub fn for_each_normalized<F: FnMut(&ConePoint)>(n: usize, max_height: i64, mut f: F) {
    fn rec<F: FnMut(&ConePoint)>(c: &mut Vec<i64>, i: usize, cap: i64, budget: i64, f: &mut F) {
        let n = c.len();
        if i == n - 1 {
            f(&ConePoint { coords: c.clone() });
            return;
        }
        let hi = cap.min(budget.sqrt());
        for v in 0..=hi {
            c[i] = v;
            rec(c, i + 1, v, budget - v * v, f);
        }
        c[i] = 0;
    }
    for h in 0..=max_height {
        let mut c = vec![0i64; n];
        c[n - 1] = h;
        rec(&mut c, 0, h, h * h, &mut f);
    }
}

/// Calls `f` on every point of T_n (all signs) with height ≤ `max_height`.
pub fn for_each_point<F: FnMut(&ConePoint)>(n: usize, max_height: i64, mut f: F) {
    fn rec<F: FnMut(&ConePoint)>(c: &mut Vec<i64>, i: usize, budget: i64, f: &mut F) {
        let n = c.len();
        if i == n - 1 {
            f(&ConePoint { coords: c.clone() });
            return;
        }
        let r = budget.sqrt();
        for v in -r..=r {
            c[i] = v;
            rec(c, i + 1, budget - v * v, f);
        }
        c[i] = 0;
    }
    for h in 0..=max_height {
        let mut c = vec![0i64; n];
        c[n - 1] = h;
        rec(&mut c, 0, h * h, &mut f);
    }
}

/// Normalized primitive sporadic s with s₁ + s₂ + s₃ = s_n and
/// 1 < s_n ≤ `max_height`: the points a descent step cannot lower.
pub fn stable_height_scan(n: usize, max_height: i64) -> Result<Vec<ConePoint>> {
    require_range(n)?;
    let mut out = Vec::new();
    for_each_normalized(n, max_height, |s| {
        let c = s.coords();
        if s.height() > 1
            && c[0] + c[1] + c[2] == s.height()
            && s.is_primitive()
            && sporadic_unchecked(s)
        {
            out.push(s.clone());
        }
    });
    Ok(out)
}

/// A uniformly drawn height in 0..=max_height and coordinates by rejection.
pub fn random_cone_point<R: Rng>(n: usize, max_height: i64, rng: &mut R) -> ConePoint {
    let h = rng.gen_range(0..=max_height);
    loop {
        let mut c: Vec<i64> = (0..n - 1).map(|_| rng.gen_range(-h..=h)).collect();
        c.push(h);
        if in_cone(&c) {
            return ConePoint { coords: c };
        }
    }
}

#[cfg(test)]
pub(crate) fn is_normalized_point(s: &ConePoint) -> bool {
    is_normalized(s.coords())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt(c: &[i64]) -> ConePoint {
        ConePoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn form_examples() {
        assert_eq!(lorentz_form(&[3, 4, 5], &[3, 4, 5]).unwrap(), 0);
        assert_eq!(lorentz_form(&[0, 0, 1], &[0, 0, 1]).unwrap(), -1);
        let s = [1, 1, 1, 1, 1, 1, 3];
        assert_eq!(lorentz_form(&s, &s).unwrap(), 6 - 9);
        assert!(lorentz_form(&[1, 2], &[1, 2, 3]).is_err());
    }

    #[test]
    fn generator_examples() {
        let a3 = IntMatrix::from_i64(&[[-1, -2, 2], [-2, -1, 2], [-2, -2, 3]]).unwrap();
        let q1 = GeneratorLabel::Q(1).matrix(3).unwrap();
        let q2 = GeneratorLabel::Q(2).matrix(3).unwrap();
        let want = q1.as_matrix().mul(q2.as_matrix()).mul(&a3);
        assert_eq!(GeneratorLabel::Aplus.matrix(3).unwrap().as_matrix(), &want);
        assert_eq!(
            q1.as_matrix(),
            &IntMatrix::from_i64(&[[-1, 0, 0], [0, 1, 0], [0, 0, 1]]).unwrap()
        );
        assert_eq!(
            GeneratorLabel::P(2).apply(&[3, 4, 5]).unwrap(),
            vec![4, 3, 5]
        );
    }

    #[test]
    fn aplus_inverse_is_exact() {
        for n in MIN_DIM..=MAX_DIM {
            let a = GeneratorLabel::Aplus.matrix(n).unwrap();
            let b = GeneratorLabel::AplusInv.matrix(n).unwrap();
            assert_eq!(a.mul(&b), UnimodularMatrix::identity(n));
        }
    }

    #[test]
    fn label_round_trip() {
        for n in [3, 7, 10] {
            for g in GeneratorLabel::all(n) {
                assert_eq!(g.to_string().parse::<GeneratorLabel>().unwrap(), g);
            }
        }
        assert!(GeneratorLabel::P(3).check(3).is_err());
        assert!(GeneratorLabel::Aplus.check(11).is_err());
    }

    #[test]
    fn pythagorean_examples() {
        assert!(is_pythagorean(&pt(&[3, 4, 5])));
        assert!(!is_pythagorean(&pt(&[1, 1, 1, 3])));
        assert!(is_pythagorean(&pt(&[1, 0, 0, 0, 1])));
    }

    #[test]
    fn sporadic_examples() {
        assert!(is_sporadic_soc(&pt(&[0, 0, 1])).unwrap());
        assert!(!is_sporadic_soc(&pt(&[1, 1, 2])).unwrap());
        assert!(is_sporadic_soc(&pt(&[1, 1, 1, 1, 1, 1, 3])).unwrap());
        assert_eq!(is_sporadic_soc(&pt(&[2, 0, 1])), Err(Error::NotInCone));
    }

    /// Plain scan over every Pythagorean p with 0 < p_n ≤ s_n.
    fn sporadic_oracle(s: &[i64]) -> bool {
        let n = s.len();
        let h = s[n - 1];
        let mut p = vec![0i64; n];
        fn rec(p: &mut Vec<i64>, i: usize, budget: i64, s: &[i64]) -> bool {
            let n = p.len();
            if i == n - 1 {
                if budget != 0 {
                    return false;
                }
                let d: Vec<i64> = s.iter().zip(p.iter()).map(|(a, b)| a - b).collect();
                return in_cone(&d);
            }
            let r = budget.sqrt();
            for v in -r..=r {
                p[i] = v;
                if rec(p, i + 1, budget - v * v, s) {
                    return true;
                }
            }
            p[i] = 0;
            false
        }
        for ph in 1..=h {
            p[n - 1] = ph;
            if rec(&mut p, 0, ph * ph, s) {
                return false;
            }
        }
        true
    }

    #[test]
    fn sporadic_matches_plain_scan() {
        for n in 3..=5 {
            for_each_point(n, if n == 3 { 12 } else { 6 }, |s| {
                if !s.is_zero() {
                    assert_eq!(sporadic_unchecked(s), sporadic_oracle(s.coords()), "{s}");
                }
            });
        }
    }

    #[test]
    fn normalize_examples() {
        let (t, w) = normalize(&pt(&[-4, 3, 5])).unwrap();
        assert_eq!(t, pt(&[4, 3, 5]));
        assert_eq!(w.labels(), &[GeneratorLabel::Q(1)]);
        let (t, w) = normalize(&pt(&[3, 4, 5])).unwrap();
        assert_eq!(t, pt(&[4, 3, 5]));
        assert_eq!(w.labels(), &[GeneratorLabel::P(2)]);
        let s = pt(&[0, -1, 1, 2]);
        let (t, w) = normalize(&s).unwrap();
        assert_eq!(t, pt(&[1, 1, 0, 2]));
        assert!(w.labels().contains(&GeneratorLabel::Q(2)));
        assert_eq!(w.apply(s.coords()).unwrap(), t.coords());
        assert_eq!(
            w.matrix()
                .unwrap()
                .as_matrix()
                .mul_vec(&[0, -1, 1, 2].map(BigInt::from)),
            [1, 1, 0, 2].map(BigInt::from).to_vec()
        );
    }

    #[test]
    fn descend_examples() {
        let r = pt(&[1, 0, 0, 0, 1]);
        let (root, w) = descend(&r).unwrap();
        assert_eq!(root, r);
        assert!(w.is_empty());

        let s = pt(&[3, 4, 5]);
        let (root, w) = descend(&s).unwrap();
        assert_eq!(root, pt(&[1, 0, 1]));
        assert_eq!(w.apply(root.coords()).unwrap(), s.coords());

        let s = pt(&[2, 2, 2, 2, 2, 2, 2, 1, 6]);
        let (root, w) = descend(&s).unwrap();
        assert_eq!(root, s);
        assert!(w.is_empty());

        assert!(matches!(
            descend(&pt(&[6, 8, 10])),
            Err(Error::NotPrimitive(_))
        ));
        assert_eq!(descend(&pt(&[1, 1, 2])), Err(Error::NotDescendable));
    }

    #[test]
    fn root_lists() {
        assert_eq!(
            roots(4).unwrap(),
            vec![pt(&[1, 0, 0, 1]), pt(&[0, 0, 0, 1])]
        );
        assert_eq!(roots(8).unwrap().len(), 4);
        assert_eq!(roots(10).unwrap().len(), 8);
        assert!(roots(2).is_err());
        assert!(roots(11).is_err());
    }

    #[test]
    fn split_roots_sum() {
        for n in [9, 10] {
            for r in roots(n).unwrap() {
                if let Some((a, b)) = split_root(&r) {
                    let sum: Vec<i64> = a
                        .coords()
                        .iter()
                        .zip(b.coords())
                        .map(|(x, y)| x + y)
                        .collect();
                    assert_eq!(sum, r.coords());
                    assert!(roots(n).unwrap().contains(&a));
                    assert!(roots(n).unwrap().contains(&b));
                }
            }
        }
    }

    #[test]
    fn decompose_examples() {
        let s = pt(&[0, 0, 2]);
        let c = decompose_soc(&s, false).unwrap();
        c.verify(&s).unwrap();

        let s = pt(&[3, 4, 5]);
        let c = decompose_soc(&s, false).unwrap();
        assert_eq!(c.terms.len(), 1);
        assert_eq!(c.terms[0].lambda, 1);
        assert_eq!(c.terms[0].root, pt(&[1, 0, 1]));
        c.verify(&s).unwrap();

        let s = pt(&[0, 0, 0, 0, 1]);
        let c = decompose_soc(&s, false).unwrap();
        assert_eq!(c.terms.len(), 1);
        assert_eq!(c.terms[0].root, s);
        assert!(c.terms[0].word.is_empty());
    }

    #[test]
    fn minimal_split_in_nine() {
        let s = pt(&[2, 2, 2, 2, 2, 2, 2, 1, 6]);
        let c = decompose_soc(&s, true).unwrap();
        assert_eq!(c.terms.len(), 2);
        c.verify(&s).unwrap();
        let c = decompose_soc(&s, false).unwrap();
        assert_eq!(c.terms.len(), 1);
    }

    #[test]
    fn orbit_small() {
        let got = pythagorean_orbit(3, 1).unwrap();
        let want = vec![
            pt(&[-1, 0, 1]),
            pt(&[0, -1, 1]),
            pt(&[0, 1, 1]),
            pt(&[1, 0, 1]),
        ];
        assert_eq!(got, want);
        let got = pythagorean_orbit(3, 5).unwrap();
        for c in [[3, 4, 5], [4, 3, 5], [-3, 4, 5], [0, 1, 1]] {
            assert!(got.contains(&pt(&c)));
        }
    }

    #[test]
    fn form_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = GroupWord::new(3, vec![GeneratorLabel::Aplus]).unwrap();
        assert!(form_invariance_check(&w, &pt(&[0, 0, 1])).unwrap());
        for _ in 0..200 {
            let n = rng.gen_range(3..=10);
            let gens = GeneratorLabel::all(n);
            let len = rng.gen_range(0..=6);
            let labels = (0..len)
                .map(|_| gens[rng.gen_range(0..gens.len())])
                .collect();
            let w = GroupWord::new(n, labels).unwrap();
            let s = random_cone_point(n, 20, &mut rng);
            assert!(form_invariance_check(&w, &s).unwrap());
            assert_eq!(
                w.matrix().unwrap().det().magnitude(),
                &num_bigint::BigUint::from(1u8)
            );
        }
    }

    #[test]
    fn normalized_scan_counts() {
        let mut count = 0;
        for_each_normalized(3, 1, |s| {
            assert!(is_normalized_point(s));
            count += 1;
        });
        // (0,0,0), (0,0,1), (1,0,1)
        assert_eq!(count, 3);
    }
}
