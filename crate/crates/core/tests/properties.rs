use intcone::cuts::{cg_cuts, feasible_box, validate_cut, ConeElement, GeneratorStream, LciSystem};
use intcone::lattice::{enumerate_below, kx_nonzero_point, QuadFormQuery};
use intcone::linalg::{adjugate, det, is_psd_exact, rank, reduce_rank, SymIntMatrix};
use intcone::psd::{decompose, is_sporadic, random_gl_word};
use intcone::soc::{
    decompose_soc, descend, form_invariance_check, lorentz_form, ConePoint, GeneratorLabel,
    GroupWord,
};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn sym_strategy(n: usize, r: i64) -> impl Strategy<Value = SymIntMatrix> {
    prop::collection::vec(-r..=r, n * (n + 1) / 2).prop_map(move |upper| {
        let mut rows = vec![vec![0i64; n]; n];
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                rows[i][j] = upper[k];
                rows[j][i] = upper[k];
                k += 1;
            }
        }
        SymIntMatrix::from_i64(&rows).unwrap()
    })
}

/// Σ vᵢvᵢᵀ over 1..=terms random vectors with entries in [-r, r].
fn psd_strategy(n: usize, terms: usize, r: i64) -> impl Strategy<Value = SymIntMatrix> {
    prop::collection::vec(prop::collection::vec(-r..=r, n), 1..=terms).prop_map(move |vs| {
        vs.iter().fold(SymIntMatrix::zero(n), |acc, v| {
            acc.add(&SymIntMatrix::outer(&big(v)))
        })
    })
}

fn cone_point(n: usize, max_h: i64) -> impl Strategy<Value = ConePoint> {
    (0..=max_h, prop::collection::vec(-max_h..=max_h, n - 1)).prop_filter_map(
        "outside the cone",
        |(h, mut c)| {
            c.push(h);
            ConePoint::new(c).ok().filter(ConePoint::in_cone)
        },
    )
}

fn word(n: usize, len: usize) -> impl Strategy<Value = GroupWord> {
    let gens = GeneratorLabel::all(n);
    prop::collection::vec(prop::sample::select(gens), 0..=len)
        .prop_map(move |ls| GroupWord::new(n, ls).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjugate_identity(m in sym_strategy(4, 6)) {
        let a = adjugate(&m);
        let prod = a.as_matrix().mul(m.as_matrix());
        let d = det(&m);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { d.clone() } else { BigInt::zero() };
                prop_assert_eq!(prod.get(i, j), &want);
            }
        }
    }

    #[test]
    fn unimodular_congruence_preserves_det_and_psd(x in psd_strategy(4, 4, 3), seed in any::<u64>()) {
        let u = random_gl_word(4, 12, &mut ChaCha8Rng::seed_from_u64(seed));
        let y = x.act(u.as_matrix());
        prop_assert_eq!(det(&y), det(&x));
        prop_assert!(is_psd_exact(&y));
        prop_assert_eq!(is_sporadic(&y).unwrap(), is_sporadic(&x).unwrap());
    }

    #[test]
    fn reduce_rank_block_form(x in psd_strategy(5, 3, 3)) {
        let (u, xr) = reduce_rank(&x).unwrap();
        let r = rank(&x);
        prop_assert_eq!(xr.dim(), r);
        prop_assert!(r == 0 || !det(&xr).is_zero());
        let full = x.congruence(u.as_matrix());
        let k = 5 - r;
        for i in 0..5 {
            for j in 0..5 {
                let want = if i >= k && j >= k { xr.get(i - k, j - k).clone() } else { BigInt::zero() };
                prop_assert_eq!(full.get(i, j), &want);
            }
        }
    }

    #[test]
    fn kx_point_fits(x in psd_strategy(4, 4, 3)) {
        if let Some(v) = kx_nonzero_point(&x).unwrap() {
            prop_assert!(v.iter().any(|c| !c.is_zero()));
            prop_assert!(is_psd_exact(&x.sub(&SymIntMatrix::outer(&v))));
        } else {
            prop_assert!(x.is_zero() || is_sporadic(&x).unwrap());
        }
    }

    #[test]
    fn enumeration_matches_box(m in psd_strategy(3, 5, 2), t in 0i64..12) {
        prop_assume!(!det(&m).is_zero());
        let q = QuadFormQuery::new(m.clone(), BigInt::from(t)).unwrap();
        let mut got: Vec<Vec<BigInt>> = enumerate_below(&q);
        for v in got.iter_mut() {
            if v.iter().find(|c| !c.is_zero()).is_some_and(|c| *c < BigInt::zero()) {
                for c in v.iter_mut() {
                    *c = -c.clone();
                }
            }
        }
        got.sort();
        // xᵀMx ≤ t forces x_i² ≤ t·adj(M)_ii / det(M)
        let a = adjugate(&m);
        let d = det(&m);
        let radius: Vec<i64> = (0..3)
            .map(|i| {
                let bound = BigInt::from(t) * a.get(i, i) / &d;
                let b: i64 = bound.try_into().unwrap();
                (b as f64).sqrt().ceil() as i64 + 1
            })
            .collect();
        let mut want = Vec::new();
        for x0 in -radius[0]..=radius[0] {
            for x1 in -radius[1]..=radius[1] {
                for x2 in -radius[2]..=radius[2] {
                    let v = big(&[x0, x1, x2]);
                    let first = [x0, x1, x2].into_iter().find(|&c| c != 0);
                    if first.is_some_and(|c| c > 0) && m.quad_form(&v) <= BigInt::from(t) {
                        want.push(v);
                    }
                }
            }
        }
        want.sort();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn psd_decomposition_reconstructs(x in psd_strategy(5, 5, 4)) {
        let cert = decompose(&x).unwrap();
        prop_assert_eq!(cert.reconstruct(), x.clone());
        prop_assert!(cert.remainder.is_none());
        cert.verify(&x).unwrap();
    }

    #[test]
    fn form_invariance(w in word(6, 12), a in cone_point(6, 12), b in cone_point(6, 12)) {
        prop_assert!(form_invariance_check(&w, &a).unwrap());
        let wa = w.apply(a.coords()).unwrap();
        let wb = w.apply(b.coords()).unwrap();
        prop_assert_eq!(lorentz_form(&wa, &wb).unwrap(), lorentz_form(a.coords(), b.coords()).unwrap());
        prop_assert_eq!(w.inverse().apply(&wa).unwrap(), a.coords().to_vec());
        let det = w.matrix().unwrap().det();
        prop_assert!(det == BigInt::one() || det == -BigInt::one());
    }

    #[test]
    fn cone_closure(w in word(5, 10), s in cone_point(5, 15)) {
        let image = ConePoint::new(w.apply(s.coords()).unwrap()).unwrap();
        prop_assert!(image.in_cone());
        prop_assert_eq!(image.gcd(), s.gcd());
    }

    #[test]
    fn soc_decomposition_reconstructs(s in cone_point(8, 40), minimal in any::<bool>()) {
        let cert = decompose_soc(&s, minimal).unwrap();
        cert.verify(&s).unwrap();
        prop_assert_eq!(cert.reconstruct().unwrap(), s.coords().to_vec());
    }

    #[test]
    fn descent_replays(w in word(4, 8), root_is_sporadic in any::<bool>()) {
        let r = if root_is_sporadic { vec![0, 0, 0, 1] } else { vec![1, 0, 0, 1] };
        let s = ConePoint::new(w.apply(&r).unwrap()).unwrap();
        let (root, cert) = descend(&s).unwrap();
        prop_assert_eq!(root.coords(), r.as_slice());
        prop_assert_eq!(cert.apply(root.coords()).unwrap(), s.coords().to_vec());
    }

    #[test]
    fn cuts_are_valid(
        c in cone_point(3, 5),
        a in prop::collection::vec(prop::collection::vec(-2i64..=2, 3), 1..=2),
    ) {
        let sys = LciSystem::new(
            ConeElement::Soc(big(c.coords())),
            a.iter().map(|v| ConeElement::Soc(big(v))).collect(),
        ).unwrap();
        let samples = feasible_box(&sys, 4).unwrap();
        let set = cg_cuts(&sys, GeneratorStream::new(sys.cone, 2, None).unwrap()).unwrap();
        for cut in &set.cuts {
            prop_assert!(cut.provenance.element.in_cone());
            prop_assert!(validate_cut(&sys, cut, &samples).unwrap());
            prop_assert!(cut.replay(&sys).unwrap());
        }
    }
}
