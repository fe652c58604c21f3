use std::path::PathBuf;

use num_traits::Zero;
use proptest::prelude::*;
use trih_core::coeffs::{allowed_subspace, AdaptedBasis};
use trih_core::commands::FanCycleFile;
use trih_core::compactified::{canonical_compactification, CompactifiedCellComplex};
use trih_core::ihomology::DimensionTable;
use trih_core::qlinalg::{content, primitive_vector, q, QMat, QuotientSpace, Rational, Subspace};

fn rat() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(a, b)| Rational::new(a.into(), b.into()))
}

fn qmat(max_r: usize, max_c: usize) -> impl Strategy<Value = QMat> {
    (0..=max_r, 0..=max_c).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(rat(), c), r).prop_map(move |rows| QMat::from_rows(c, rows)))
}

fn rows(max_r: usize, c: usize) -> impl Strategy<Value = QMat> {
    prop::collection::vec(prop::collection::vec(rat(), c), 0..=max_r).prop_map(move |rows| QMat::from_rows(c, rows))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn rref_is_idempotent(m in qmat(5, 7)) {
        let (e, piv) = m.rref();
        prop_assert_eq!(e.rref().0, e.clone());
        prop_assert!(piv.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(piv.len(), m.rank());
    }

    #[test]
    fn rank_nullity(m in qmat(5, 7)) {
        let k = m.right_kernel();
        prop_assert_eq!(m.rank() + k.rows(), m.cols());
        if k.rows() > 0 {
            prop_assert!(m.mul(&k.transpose()).is_zero());
        }
        prop_assert_eq!(m.transpose().rank(), m.rank());
    }

    #[test]
    fn quotient_round_trip(gens in qmat(4, 5), keep in 0usize..=4, coeffs in prop::collection::vec(-5i64..=5, 5)) {
        let amb = Subspace::row_span(&gens);
        let keep = keep.min(amb.dim());
        let killed = Subspace::row_span(&QMat::from_rows(amb.ambient_dim(), amb.basis().row_vecs().into_iter().take(keep).collect()));
        let qs = QuotientSpace::new(amb.clone(), killed.clone()).unwrap();
        let c: Vec<Rational> = coeffs.iter().take(qs.dim()).map(|&x| q(x)).collect();
        prop_assume!(c.len() == qs.dim());
        let v = qs.lift(&c);
        prop_assert!(amb.contains(&v));
        prop_assert_eq!(qs.project(&v).unwrap(), c);
        let w = amb.basis().vec_mul(&coeffs.iter().take(amb.dim()).map(|&x| q(x)).chain(std::iter::repeat(q(0))).take(amb.dim()).collect::<Vec<_>>());
        let back = qs.lift(&qs.project(&w).unwrap());
        let diff: Vec<Rational> = w.iter().zip(&back).map(|(a, b)| a - b).collect();
        prop_assert!(killed.contains(&diff));
    }

    #[test]
    fn primitive_has_content_one(v in prop::collection::vec(-50i64..=50, 1..6)) {
        match primitive_vector(&v) {
            Ok(p) => {
                prop_assert_eq!(content(&p), 1);
                let g = content(&v);
                prop_assert!(v.iter().zip(&p).all(|(a, b)| *a == g * b));
            }
            Err(_) => prop_assert!(v.iter().all(|&x| x == 0)),
        }
    }

    #[test]
    fn sum_and_intersection_dimensions((a, b) in (0usize..=5).prop_flat_map(|c| (rows(3, c), rows(3, c)))) {
        let (sa, sb) = (Subspace::row_span(&a), Subspace::row_span(&b));
        let s = sa.sum(&sb).unwrap();
        let i = sa.intersect(&sb).unwrap();
        prop_assert_eq!(s.dim() + i.dim(), sa.dim() + sb.dim());
        prop_assert!(s.contains_subspace(&sa) && sa.contains_subspace(&i) && sb.contains_subspace(&i));
    }

    #[test]
    fn degrees_do_not_depend_on_the_adapted_basis(
        mix in prop::collection::vec(-3i64..=3, 9),
        alpha in prop::collection::vec(-3i64..=3, 3),
    ) {
        // Tan P = Q³ with W = span e1, U = span(e1, e2).
        let alpha: Vec<Rational> = alpha.iter().map(|&x| q(x)).collect();
        prop_assume!(alpha.iter().any(|x| !x.is_zero()));
        let coord = AdaptedBasis::coordinate(3, &[0], &[0, 1]).unwrap();
        let w = vec![q(mix[0].abs() + 1), q(0), q(0)];
        let u = vec![q(mix[1]), q(mix[2].abs() + 1), q(0)];
        let w2 = vec![q(mix[3].abs() + 1), q(mix[4]), q(0)];
        let other = AdaptedBasis::extend(3, &[w.clone()], &[w2, u, w]).unwrap();
        prop_assert_eq!(coord.degrees(1, &alpha).unwrap(), other.degrees(1, &alpha).unwrap());
        let two: Vec<Rational> = vec![alpha[0].clone(), alpha[1].clone(), alpha[2].clone()];
        prop_assert_eq!(coord.degrees(2, &two).unwrap(), other.degrees(2, &two).unwrap());
    }

    #[test]
    fn convolution_is_commutative(a in prop::collection::vec(0usize..4, 1..4), b in prop::collection::vec(0usize..4, 1..4)) {
        let (ta, tb) = (DimensionTable::diagonal(&a), DimensionTable::diagonal(&b));
        prop_assert_eq!(ta.convolve(&tb), tb.convolve(&ta));
    }
}

fn shipped(name: &str) -> CompactifiedCellComplex {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", &format!("{name}.json")].iter().collect();
    canonical_compactification(&FanCycleFile::read(&path).unwrap().0.to_cycle().unwrap())
}

#[test]
fn allowed_subspace_is_monotone() {
    for name in ["p1", "tropical_line", "p2", "p1xp1", "two_planes"] {
        let x = shipped(name);
        let d = x.d();
        for s in (0..x.len()).filter(|&s| !x.is_smooth(s)) {
            for top in x.tops_over(s) {
                for p in 0..=d {
                    for k in 0..=x.cell_dim(s) {
                        for qd in k..d {
                            let a = allowed_subspace(&x, top, s, p, qd, k).unwrap();
                            let b = allowed_subspace(&x, top, s, p, qd + 1, k).unwrap();
                            assert!(b.contains_subspace(&a), "{name}: q {qd}->{} at cell {s}, p={p}, k={k}", qd + 1);
                        }
                        for qd in k + 1..=d {
                            let a = allowed_subspace(&x, top, s, p, qd, k + 1).unwrap();
                            let b = allowed_subspace(&x, top, s, p, qd, k).unwrap();
                            if k < x.cell_dim(s) {
                                assert!(b.contains_subspace(&a), "{name}: k {}->{k} at cell {s}, p={p}, q={qd}", k + 1);
                            }
                        }
                    }
                }
            }
        }
    }
}
