//! Chvátal-Gomory cuts from cone generators, and a small exact search for
//! the fewest generators summing to a given cone point.
//!
//! Both cones handled here are self-dual, so the generators g·r of the
//! semigroup double as dual elements. The pairing is the trace inner
//! product for PSD matrices and the dot product for SOC vectors.

use std::collections::{HashSet, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::{enumerate_below, QuadFormQuery};
use crate::linalg::{is_primitive, is_psd_exact, SymIntMatrix, UnimodularMatrix};
use crate::psd::{sporadic_catalog, GlGenerator};
use crate::soc::{self, GeneratorLabel, GroupWord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cone {
    Psd(usize),
    Soc(usize),
}

impl Cone {
    /// Dimension N of the ambient space.
    pub fn ambient_dim(&self) -> usize {
        match *self {
            Cone::Psd(n) => n * (n + 1) / 2,
            Cone::Soc(n) => n,
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            Cone::Psd(n) | Cone::Soc(n) => n,
        }
    }

    /// The bound 2N - 2 on the integer Carathéodory rank.
    pub fn icr_bound(&self) -> usize {
        2 * self.ambient_dim() - 2
    }

    pub fn default_roots(&self) -> Result<Vec<ConeElement>> {
        match *self {
            Cone::Psd(n) => {
                let mut e = vec![BigInt::zero(); n];
                e[0] = BigInt::from(1);
                let mut out = vec![ConeElement::Psd(SymIntMatrix::outer(&e))];
                out.extend(
                    sporadic_catalog(n)
                        .into_iter()
                        .map(|(_, m)| ConeElement::Psd(m)),
                );
                Ok(out)
            }
            Cone::Soc(n) => Ok(soc::roots(n)?
                .into_iter()
                .map(|p| ConeElement::Soc(p.coords().iter().map(|&c| BigInt::from(c)).collect()))
                .collect()),
        }
    }
}

/// A point of S^n(Z) or Zⁿ tagged with the cone it is read in.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ConeElement {
    Psd(SymIntMatrix),
    Soc(Vec<BigInt>),
}

impl ConeElement {
    pub fn cone(&self) -> Cone {
        match self {
            ConeElement::Psd(m) => Cone::Psd(m.dim()),
            ConeElement::Soc(v) => Cone::Soc(v.len()),
        }
    }

    pub fn zero(cone: Cone) -> Self {
        match cone {
            Cone::Psd(n) => ConeElement::Psd(SymIntMatrix::zero(n)),
            Cone::Soc(n) => ConeElement::Soc(vec![BigInt::zero(); n]),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ConeElement::Psd(m) => m.is_zero(),
            ConeElement::Soc(v) => v.iter().all(Zero::is_zero),
        }
    }

    pub fn in_cone(&self) -> bool {
        match self {
            ConeElement::Psd(m) => is_psd_exact(m),
            ConeElement::Soc(v) => {
                let (h, rest) = v.split_last().expect("n ≥ 1");
                !h.is_negative() && rest.iter().map(|c| c * c).sum::<BigInt>() <= h * h
            }
        }
    }

    /// Height for SOC, trace for PSD: a linear functional positive on every
    /// nonzero cone element.
    pub fn size(&self) -> BigInt {
        match self {
            ConeElement::Psd(m) => m.trace(),
            ConeElement::Soc(v) => v.last().expect("n ≥ 1").clone(),
        }
    }

    fn same_shape(&self, other: &ConeElement) -> Result<()> {
        if self.cone() == other.cone() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.cone().ambient_dim(),
                found: other.cone().ambient_dim(),
            })
        }
    }

    pub fn pairing(&self, other: &ConeElement) -> Result<BigInt> {
        self.same_shape(other)?;
        Ok(match (self, other) {
            (ConeElement::Psd(a), ConeElement::Psd(b)) => {
                let n = a.dim();
                let mut acc = BigInt::zero();
                for i in 0..n {
                    for j in 0..n {
                        acc += a.get(i, j) * b.get(i, j);
                    }
                }
                acc
            }
            (ConeElement::Soc(a), ConeElement::Soc(b)) => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            _ => unreachable!("shapes checked"),
        })
    }

    pub fn add(&self, other: &ConeElement) -> Result<ConeElement> {
        self.same_shape(other)?;
        Ok(match (self, other) {
            (ConeElement::Psd(a), ConeElement::Psd(b)) => ConeElement::Psd(a.add(b)),
            (ConeElement::Soc(a), ConeElement::Soc(b)) => {
                ConeElement::Soc(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            _ => unreachable!("shapes checked"),
        })
    }

    pub fn sub(&self, other: &ConeElement) -> Result<ConeElement> {
        self.same_shape(other)?;
        Ok(match (self, other) {
            (ConeElement::Psd(a), ConeElement::Psd(b)) => ConeElement::Psd(a.sub(b)),
            (ConeElement::Soc(a), ConeElement::Soc(b)) => {
                ConeElement::Soc(a.iter().zip(b).map(|(x, y)| x - y).collect())
            }
            _ => unreachable!("shapes checked"),
        })
    }

    pub fn scale(&self, k: &BigInt) -> ConeElement {
        match self {
            ConeElement::Psd(a) => ConeElement::Psd(a.scale(k)),
            ConeElement::Soc(a) => ConeElement::Soc(a.iter().map(|x| x * k).collect()),
        }
    }
}

/// {x ∈ Rᵐ : c - Σ xᵢAᵢ ∈ C} with integral c and Aᵢ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LciSystem {
    pub cone: Cone,
    pub c: ConeElement,
    pub a: Vec<ConeElement>,
}

impl LciSystem {
    pub fn new(c: ConeElement, a: Vec<ConeElement>) -> Result<Self> {
        let cone = c.cone();
        for ai in &a {
            c.same_shape(ai)?;
        }
        Ok(Self { cone, c, a })
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    /// 𝒜(x) = Σ xᵢAᵢ.
    pub fn apply(&self, x: &[BigInt]) -> Result<ConeElement> {
        if x.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: self.m(),
                found: x.len(),
            });
        }
        let mut acc = ConeElement::zero(self.cone);
        for (xi, ai) in x.iter().zip(&self.a) {
            if !xi.is_zero() {
                acc = acc.add(&ai.scale(xi))?;
            }
        }
        Ok(acc)
    }

    /// c - 𝒜(x) ∈ C.
    pub fn is_feasible(&self, x: &[BigInt]) -> Result<bool> {
        Ok(self.c.sub(&self.apply(x)?)?.in_cone())
    }

    /// 𝒜*(y) = (⟨y, Aᵢ⟩)ᵢ.
    pub fn adjoint(&self, y: &ConeElement) -> Result<Vec<BigInt>> {
        self.a.iter().map(|ai| y.pairing(ai)).collect()
    }
}

/// A word in the group acting on the cone; rightmost letter acts first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ConeWord {
    Psd(Vec<GlGenerator>),
    Soc(GroupWord),
}

impl ConeWord {
    pub fn identity(cone: Cone) -> Self {
        match cone {
            Cone::Psd(_) => ConeWord::Psd(Vec::new()),
            Cone::Soc(n) => ConeWord::Soc(GroupWord::identity(n)),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ConeWord::Psd(w) => w.len(),
            ConeWord::Soc(w) => w.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn labels(&self) -> Vec<String> {
        match self {
            ConeWord::Psd(w) => w.iter().map(|g| g.label().to_string()).collect(),
            ConeWord::Soc(w) => w.to_strings(),
        }
    }

    pub fn parse<S: AsRef<str>>(cone: Cone, labels: &[S]) -> Result<Self> {
        match cone {
            Cone::Psd(_) => labels
                .iter()
                .map(|s| {
                    GlGenerator::parse(s.as_ref()).ok_or_else(|| {
                        Error::InvalidInput(format!("unknown generator {:?}", s.as_ref()))
                    })
                })
                .collect::<Result<Vec<_>>>()
                .map(ConeWord::Psd),
            Cone::Soc(n) => GroupWord::parse(n, labels).map(ConeWord::Soc),
        }
    }

    /// w·r.
    pub fn act(&self, r: &ConeElement) -> Result<ConeElement> {
        match (self, r) {
            (ConeWord::Psd(w), ConeElement::Psd(m)) => {
                let n = m.dim();
                let mut u = UnimodularMatrix::identity(n);
                for g in w {
                    u = u.mul(&g.matrix(n));
                }
                Ok(ConeElement::Psd(m.act(u.as_matrix())))
            }
            (ConeWord::Soc(w), ConeElement::Soc(v)) => {
                let small = to_i64_vec(v)?;
                let out = w.apply(&small)?;
                Ok(ConeElement::Soc(
                    out.into_iter().map(BigInt::from).collect(),
                ))
            }
            _ => Err(Error::InvalidInput(
                "word and element belong to different cones".into(),
            )),
        }
    }
}

fn to_i64_vec(v: &[BigInt]) -> Result<Vec<i64>> {
    v.iter()
        .map(|c| {
            c.to_i64()
                .ok_or_else(|| Error::OutOfRange("coordinate exceeds i64".into()))
        })
        .collect()
}

/// One element y = w·r of the generator stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub element: ConeElement,
    pub root: ConeElement,
    pub word: ConeWord,
}

/// Breadth-first enumeration of distinct g·r over words of length at most
/// `word_cap`, optionally dropping (and not expanding) elements whose
/// height or trace exceeds `size_cap`.
pub struct GeneratorStream {
    cone: Cone,
    word_cap: usize,
    size_cap: Option<BigInt>,
    seen: HashSet<ConeElement>,
    queue: VecDeque<Generator>,
}

impl GeneratorStream {
    pub fn new(cone: Cone, word_cap: usize, size_cap: Option<BigInt>) -> Result<Self> {
        let roots = cone.default_roots()?;
        Self::with_roots(cone, roots, word_cap, size_cap)
    }

    pub fn with_roots(
        cone: Cone,
        roots: Vec<ConeElement>,
        word_cap: usize,
        size_cap: Option<BigInt>,
    ) -> Result<Self> {
        if let Cone::Soc(n) = cone {
            if !(soc::MIN_DIM..=soc::MAX_DIM).contains(&n) {
                return Err(Error::OutOfRange(format!("SOC dimension {n}")));
            }
        }
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        for r in roots {
            if r.cone() != cone {
                return Err(Error::DimensionMismatch {
                    expected: cone.ambient_dim(),
                    found: r.cone().ambient_dim(),
                });
            }
            if r.is_zero() {
                return Err(Error::InvalidInput("roots must be nonzero".into()));
            }
            if !r.in_cone() {
                return Err(Error::NotInCone);
            }
            if size_cap.as_ref().is_some_and(|cap| &r.size() > cap) {
                continue;
            }
            if seen.insert(r.clone()) {
                queue.push_back(Generator {
                    element: r.clone(),
                    root: r,
                    word: ConeWord::identity(cone),
                });
            }
        }
        Ok(Self {
            cone,
            word_cap,
            size_cap,
            seen,
            queue,
        })
    }

    pub fn cone(&self) -> Cone {
        self.cone
    }

    pub fn word_cap(&self) -> usize {
        self.word_cap
    }

    fn expand(&mut self, g: &Generator) {
        if g.word.len() >= self.word_cap {
            return;
        }
        let children: Vec<(ConeElement, ConeWord)> = match (&g.word, &g.element) {
            (ConeWord::Psd(w), ConeElement::Psd(m)) => GlGenerator::ALL
                .iter()
                .map(|gen| {
                    let mut w2 = vec![*gen];
                    w2.extend_from_slice(w);
                    (
                        ConeElement::Psd(m.act(gen.matrix(m.dim()).as_matrix())),
                        ConeWord::Psd(w2),
                    )
                })
                .collect(),
            (ConeWord::Soc(w), ConeElement::Soc(v)) => {
                let Ok(small) = to_i64_vec(v) else {
                    return;
                };
                GeneratorLabel::all(v.len())
                    .into_iter()
                    .filter_map(|label| {
                        let out = label.apply(&small).ok()?;
                        let mut w2 = w.clone();
                        w2.then(label);
                        Some((
                            ConeElement::Soc(out.into_iter().map(BigInt::from).collect()),
                            ConeWord::Soc(w2),
                        ))
                    })
                    .collect()
            }
            _ => return,
        };
        for (element, word) in children {
            if self
                .size_cap
                .as_ref()
                .is_some_and(|cap| &element.size() > cap)
            {
                continue;
            }
            if self.seen.insert(element.clone()) {
                self.queue.push_back(Generator {
                    element,
                    root: g.root.clone(),
                    word,
                });
            }
        }
    }
}

impl Iterator for GeneratorStream {
    type Item = Generator;

    fn next(&mut self) -> Option<Generator> {
        let g = self.queue.pop_front()?;
        self.expand(&g);
        Some(g)
    }
}

/// u·x ≤ rhs, derived from the generator recorded in `provenance`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CgCut {
    pub u: Vec<BigInt>,
    pub rhs: BigInt,
    pub provenance: Generator,
}

impl CgCut {
    /// Recomputes the cut from its provenance and compares bit for bit.
    pub fn replay(&self, sys: &LciSystem) -> Result<bool> {
        let y = self.provenance.word.act(&self.provenance.root)?;
        if y != self.provenance.element {
            return Ok(false);
        }
        let (u, rhs) = cut_from(sys, &y)?;
        Ok(u == self.u && rhs == self.rhs)
    }
}

/// (𝒜*(y), ⌊⟨y, c⟩⌋). The data are integral, so the floor is exact.
fn cut_from(sys: &LciSystem, y: &ConeElement) -> Result<(Vec<BigInt>, BigInt)> {
    Ok((sys.adjoint(y)?, y.pairing(&sys.c)?))
}

/// The cuts from one pass over a generator stream. Because G is infinite,
/// the set is only complete up to words of length `truncated_at`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutSet {
    pub cuts: Vec<CgCut>,
    pub truncated_at: usize,
}

/// Cuts from every generator of the stream, in stream order. Cuts that
/// coincide after dividing by gcd(u) are merged when gcd(u) divides rhs.
///
/// Every cut is valid for the integer points of the system; equality with
/// the CG closure additionally needs the system to be TDI, which is not
/// checked.
pub fn cg_cuts(sys: &LciSystem, gen: GeneratorStream) -> Result<CutSet> {
    if gen.cone() != sys.cone {
        return Err(Error::DimensionMismatch {
            expected: sys.cone.ambient_dim(),
            found: gen.cone().ambient_dim(),
        });
    }
    let truncated_at = gen.word_cap();
    let mut seen: HashSet<(Vec<BigInt>, BigInt)> = HashSet::new();
    let mut out = Vec::new();
    for g in gen {
        let (u, rhs) = cut_from(sys, &g.element)?;
        let d = u.iter().fold(BigInt::zero(), |a, b| a.gcd(b));
        let key = if !d.is_zero() && rhs.is_multiple_of(&d) {
            (u.iter().map(|x| x / &d).collect(), &rhs / &d)
        } else {
            (u.clone(), rhs.clone())
        };
        if seen.insert(key) {
            out.push(CgCut {
                u,
                rhs,
                provenance: g,
            });
        }
    }
    Ok(CutSet {
        cuts: out,
        truncated_at,
    })
}

/// False iff some sample is feasible for `sys` yet violates the cut.
pub fn validate_cut(sys: &LciSystem, cut: &CgCut, samples: &[Vec<BigInt>]) -> Result<bool> {
    for x in samples {
        if x.len() != cut.u.len() {
            return Err(Error::DimensionMismatch {
                expected: cut.u.len(),
                found: x.len(),
            });
        }
        if sys.is_feasible(x)? {
            let lhs: BigInt = cut.u.iter().zip(x).map(|(a, b)| a * b).sum();
            if lhs > cut.rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Every integer x with |xᵢ| ≤ radius that is feasible for `sys`.
pub fn feasible_box(sys: &LciSystem, radius: i64) -> Result<Vec<Vec<BigInt>>> {
    let m = sys.m();
    let mut out = Vec::new();
    let mut x = vec![-radius; m];
    loop {
        let xb: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
        if sys.is_feasible(&xb)? {
            out.push(xb);
        }
        let mut i = 0;
        loop {
            if i == m {
                return Ok(out);
            }
            if x[i] < radius {
                x[i] += 1;
                break;
            }
            x[i] = -radius;
            i += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IcrOutcome {
    /// s = Σ λᵢ gens[iᵢ] with the fewest distinct generators; `terms`
    /// holds the pairs (iᵢ, λᵢ), each λᵢ ≥ 1.
    Rank {
        rank: usize,
        terms: Vec<(usize, BigInt)>,
    },
    /// A decomposition exists but needs more than `cap` generators.
    Exceeded,
    /// s is not a nonnegative integer combination of the candidates.
    Infeasible,
}

impl IcrOutcome {
    pub fn rank(&self) -> Option<usize> {
        match self {
            IcrOutcome::Rank { rank, .. } => Some(*rank),
            _ => None,
        }
    }
}

struct IcrSearch<'a> {
    gens: &'a [ConeElement],
    sizes: Vec<BigInt>,
    failed: HashSet<(ConeElement, usize, usize)>,
    terms: Vec<(usize, BigInt)>,
}

impl IcrSearch<'_> {
    /// Is `r` a combination of exactly `k` distinct generators with index
    /// ≥ `start`, all coefficients positive?
    fn exact(&mut self, r: &ConeElement, k: usize, start: usize) -> bool {
        if k == 0 {
            return r.is_zero();
        }
        if r.is_zero() || self.gens.len() - start < k {
            return false;
        }
        let key = (r.clone(), k, start);
        if self.failed.contains(&key) {
            return false;
        }
        let size = r.size();
        let gens = self.gens;
        for i in start..gens.len() {
            let mut rest = r.clone();
            let mut lambda = BigInt::zero();
            // r - λg stays in the cone for an initial run of λ only
            loop {
                lambda += 1;
                if &lambda * &self.sizes[i] > size {
                    break;
                }
                let Ok(next) = rest.sub(&gens[i]) else {
                    break;
                };
                if !next.in_cone() {
                    break;
                }
                rest = next;
                self.terms.push((i, lambda.clone()));
                if self.exact(&rest, k - 1, i + 1) {
                    return true;
                }
                self.terms.pop();
            }
        }
        self.failed.insert(key);
        false
    }
}

/// Fewest distinct generators, with positive integer coefficients, summing
/// to s. Iterative deepening over the number of generators, up to `cap`.
pub fn icr_search(s: &ConeElement, gens: &[ConeElement], cap: usize) -> Result<IcrOutcome> {
    if !s.in_cone() {
        return Err(Error::NotInCone);
    }
    for g in gens {
        s.same_shape(g)?;
        if g.is_zero() || !g.in_cone() {
            return Err(Error::InvalidInput(
                "generators must be nonzero cone elements".into(),
            ));
        }
    }
    if s.is_zero() {
        return Ok(IcrOutcome::Rank {
            rank: 0,
            terms: Vec::new(),
        });
    }
    // each generator has size ≥ 1, so no combination uses more than size(s)
    let limit = s.size().to_usize().unwrap_or(usize::MAX).min(gens.len());
    let mut search = IcrSearch {
        gens,
        sizes: gens.iter().map(ConeElement::size).collect(),
        failed: HashSet::new(),
        terms: Vec::new(),
    };
    for k in 1..=limit {
        if search.exact(s, k, 0) {
            return Ok(if k <= cap {
                IcrOutcome::Rank {
                    rank: k,
                    terms: search.terms,
                }
            } else {
                IcrOutcome::Exceeded
            });
        }
    }
    Ok(IcrOutcome::Infeasible)
}

/// Candidate generators for `icr_search` on s: the orbit elements whose
/// height (SOC) or trace (PSD) is at most that of s.
///
/// SOC heights rise monotonically along the path from a root, so the capped
/// breadth-first stream is complete. GL(n, Z) paths can pass through larger
/// traces, so rank-1 candidates xxᵀ are enumerated directly from |x|² ≤ tr(s);
/// translates of catalog sporadics come from the capped stream and are
/// complete only up to `word_cap`.
pub fn icr_candidates(s: &ConeElement, word_cap: usize) -> Result<Vec<ConeElement>> {
    let cap = s.size();
    match s.cone() {
        Cone::Soc(_) => Ok(GeneratorStream::new(s.cone(), word_cap, Some(cap))?
            .map(|g| g.element)
            .collect()),
        Cone::Psd(n) => {
            let mut out: Vec<ConeElement> = Vec::new();
            if cap.is_positive() {
                let q = QuadFormQuery::new(SymIntMatrix::identity(n), cap.clone())?;
                for x in enumerate_below(&q) {
                    if is_primitive(&x) {
                        out.push(ConeElement::Psd(SymIntMatrix::outer(&x)));
                    }
                }
            }
            let sporadics = sporadic_catalog(n)
                .into_iter()
                .map(|(_, m)| ConeElement::Psd(m))
                .collect();
            out.extend(
                GeneratorStream::with_roots(s.cone(), sporadics, word_cap, Some(cap))?
                    .map(|g| g.element),
            );
            Ok(out)
        }
    }
}
