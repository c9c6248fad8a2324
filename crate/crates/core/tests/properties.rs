use proptest::prelude::*;

use core_entropy::circle::{binary_expansions, from_binary, orbit2, to_binary};
use core_entropy::entropy::core_entropy;
use core_entropy::hubbard::{build_tree, check_betweenness, tree_entropy};
use core_entropy::itinerary::{identification_class, identification_class_by_scan};
use core_entropy::lamination::{arc_contains, characteristic_arc, root_pair, rotation_number, CircArc};
use core_entropy::survivor::{biaccessible_hole, survivor_entropy, HoleKind};
use core_entropy::tuning::{tune_angle, tuning_words};
use core_entropy::entropy::SpectralConfig;
use core_entropy::Angle;

fn a(n: u64, d: u64) -> Angle {
    Angle::from_u64(n, d)
}

fn small_angle(max_den: u64) -> impl Strategy<Value = Angle> {
    (2..=max_den).prop_flat_map(|q| (0..q).prop_map(move |p| Angle::from_u64(p, q)))
}

#[test]
fn classes_agree_with_exhaustive_scan() {
    for q in 2..=26u64 {
        for p in 1..q {
            let theta = a(p, q);
            if orbit2(&theta).preperiod + orbit2(&theta).period > 14 {
                continue;
            }
            assert_eq!(
                identification_class(&theta, &theta),
                identification_class_by_scan(&theta, &theta).unwrap(),
                "class of {theta}"
            );
        }
    }
}

#[test]
fn rotation_roots_have_zero_entropy() {
    for p in 2..=9u32 {
        let d = (1u64 << p) - 1;
        for k in 1..d {
            let theta = a(k, d);
            let r = root_pair(&theta).unwrap();
            if r.minus == theta && r.satellite && rotation_number(&r).is_some() {
                assert!(core_entropy(&theta).unwrap().h.abs() < 1e-9, "{theta}");
            }
        }
    }
}

#[test]
fn tree_leaves_are_marked_and_betweenness_holds() {
    for theta in [a(1, 4), a(1, 6), a(3, 7), a(7, 12), a(9, 20), a(13, 31), a(5, 24)] {
        let t = build_tree(&theta).unwrap();
        for v in t.leaves() {
            assert!(t.vertices[v].is_marked(), "{theta}: leaf {v} is a Steiner point");
        }
        assert_eq!(t.edges.len() + 1, t.vertices.len());
        assert!(check_betweenness(&t).unwrap(), "{theta}");
    }
}

#[test]
fn biaccessible_hole_avoids_tree_angles() {
    for theta in [a(3, 7), a(7, 12), a(1, 6), a(9, 56)] {
        let hole = biaccessible_hole(&theta).unwrap();
        let t = build_tree(&theta).unwrap();
        for v in &t.vertices {
            for x in &v.angles {
                for arc in &hole.arcs {
                    assert!(!CircArc::new(arc.lo.clone(), arc.hi.clone()).interior_contains(x), "{theta}: {x}");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn binary_round_trip(theta in small_angle(200)) {
        prop_assert_eq!(from_binary(&to_binary(&theta)), theta.clone());
        for w in binary_expansions(&theta) {
            prop_assert_eq!(from_binary(&w), theta.clone());
        }
    }

    #[test]
    fn entropy_is_bounded_and_symmetric(theta in small_angle(64)) {
        let h = core_entropy(&theta).unwrap().h;
        prop_assert!((-1e-12..=std::f64::consts::LN_2 + 1e-9).contains(&h));
        let hc = core_entropy(&theta.conjugate()).unwrap().h;
        prop_assert!((h - hc).abs() < 1e-9);
    }

    #[test]
    fn tree_matches_pairs(theta in small_angle(48)) {
        let d = tree_entropy(&theta).unwrap().h - core_entropy(&theta).unwrap().h;
        prop_assert!(d.abs() < 1e-6);
    }

    #[test]
    fn survivor_transfer_matches_entropy(theta in small_angle(48)) {
        let s = survivor_entropy(&theta, HoleKind::Biaccessible, &SpectralConfig::default()).unwrap().h;
        prop_assert!((s - core_entropy(&theta).unwrap().h).abs() < 1e-6);
    }

    #[test]
    fn tuning_commutes_with_doubling(root in 0usize..4, theta in small_angle(30)) {
        prop_assume!(!theta.is_dyadic());
        let r = root_pair(&[a(1, 3), a(3, 7), a(1, 7), a(2, 5)][root]).unwrap();
        let w = tuning_words(&r);
        let lhs = tune_angle(&w, &theta.double());
        let rhs: Vec<Angle> = tune_angle(&w, &theta)
            .iter()
            .map(|t| (0..r.period).fold(t.clone(), |x, _| x.double()))
            .collect();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn tuned_angles_lie_in_the_wake(root in 0usize..4, theta in small_angle(30)) {
        let r = root_pair(&[a(1, 3), a(3, 7), a(1, 7), a(2, 5)][root]).unwrap();
        let wake = CircArc::new(r.minus.clone(), r.plus.clone());
        for t in tune_angle(&tuning_words(&r), &theta) {
            prop_assert!(wake.contains_point(&t));
            let arc = characteristic_arc(&t).unwrap();
            prop_assert!(arc_contains(&wake, &arc));
        }
    }

    #[test]
    fn primitive_tuning_keeps_entropy(theta in small_angle(20)) {
        let r = root_pair(&a(3, 7)).unwrap();
        for t in tune_angle(&tuning_words(&r), &theta) {
            prop_assert!((core_entropy(&t).unwrap().h - core_entropy(&a(3, 7)).unwrap().h).abs() < 1e-6);
        }
    }
}
