//! Property tests for the structural invariants that hold across the whole
//! input space, not just the shipped scenarios.

use bifurcade::bifurcation::hausdorff_semidistance;
use bifurcade::conley::{suspend, wedge, ConleyIndex};
use bifurcade::model::{
    build_cahn_hilliard_1d, build_custom, jacobian, vector_field, CubicEntry, CustomModelSpec,
    LinearPart, QuadEntry,
};
use bifurcade::spectrum::{crossing_data, detect_bifurcation_values};
use proptest::prelude::*;

fn arb_custom_model() -> impl Strategy<Value = bifurcade::model::SpectralModel> {
    (
        proptest::collection::vec(0.1f64..10.0, 1..4),
        -2.0f64..2.0,
        -2.0f64..2.0,
        -2.0f64..2.0,
    )
        .prop_map(|(mut mu, c0, q, c)| {
            mu.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = mu.len();
            let linear = LinearPart::Affine {
                c0: mu.iter().map(|m| m * m + c0).collect(),
                c1: mu.clone(),
            };
            let quadratic = if q != 0.0 {
                vec![QuadEntry {
                    k: 1,
                    i: 1,
                    j: n.min(2),
                    value: q,
                }]
            } else {
                vec![]
            };
            let cubic = if c != 0.0 {
                vec![CubicEntry {
                    k: n,
                    i: 1,
                    j: 1,
                    l: n,
                    value: c,
                }]
            } else {
                vec![]
            };
            build_custom(CustomModelSpec {
                label: "arb".into(),
                mu,
                linear,
                quadratic,
                cubic,
                gradient_info: None,
            })
            .unwrap()
        })
}

fn arb_index() -> impl Strategy<Value = ConleyIndex> {
    proptest::collection::btree_map(0u32..5, 0usize..4, 0..4).prop_map(ConleyIndex::from_betti)
}

proptest! {
    #[test]
    fn trivial_branch_is_always_an_equilibrium(model in arb_custom_model(), lambda in -10.0f64..10.0) {
        let zero = vec![0.0; model.dim()];
        let f = vector_field(&model, lambda, &zero).unwrap();
        prop_assert!(f.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn jacobian_matches_finite_differences(
        model in arb_custom_model(),
        lambda in -3.0f64..3.0,
        raw in proptest::collection::vec(-1.0f64..1.0, 3),
    ) {
        let n = model.dim();
        let mut a: Vec<f64> = raw.into_iter().take(n).collect();
        a.resize(n, 0.1);
        let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1.0 {
            for x in &mut a { *x /= norm; }
        }
        let jac = jacobian(&model, lambda, &a).unwrap();
        let scale = jac.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        let h = 1e-5;
        for c in 0..n {
            let mut ap = a.clone();
            let mut am = a.clone();
            ap[c] += h;
            am[c] -= h;
            let fp = vector_field(&model, lambda, &ap).unwrap();
            let fm = vector_field(&model, lambda, &am).unwrap();
            for r in 0..n {
                let fd = (fp[r] - fm[r]) / (2.0 * h);
                prop_assert!((jac[r][c] - fd).abs() / scale <= 1e-6);
            }
        }
    }

    #[test]
    fn tensor_queries_are_permutation_invariant(b2 in 0.1f64..2.0, b3 in 0.1f64..2.0) {
        let m = build_cahn_hilliard_1d(std::f64::consts::PI, b2, b3, 5).unwrap();
        for k in 1..=5usize {
            for i in 1..=5usize {
                for j in 1..=5usize {
                    prop_assert_eq!(m.q_entry(k, i, j), m.q_entry(k, j, i));
                    for l in 1..=5usize {
                        let base = m.c_entry(k, i, j, l);
                        prop_assert_eq!(base, m.c_entry(k, j, i, l));
                        prop_assert_eq!(base, m.c_entry(k, l, j, i));
                        prop_assert_eq!(base, m.c_entry(k, i, l, j));
                    }
                }
            }
        }
    }

    #[test]
    fn spectral_partition_sums_to_dim(b2 in 0.0f64..2.0, b3 in 0.1f64..2.0) {
        let m = build_cahn_hilliard_1d(std::f64::consts::PI, b2, b3, 6).unwrap();
        for c in detect_bifurcation_values(&m, 0.0, 30.0, 1e-9).unwrap() {
            let stable = (1..=m.dim())
                .filter(|&k| m.beta(k, c.lambda0) > 1e-9)
                .count();
            prop_assert_eq!(c.n + c.m + stable, m.dim());
            // orientation consistency with transversality signs
            for (_, d) in &c.transversality {
                prop_assert_eq!(d.signum() as i8, c.h4_orientation);
            }
        }
    }

    #[test]
    fn suspension_distributes_over_wedge(a in arb_index(), b in arb_index(), m in 0u32..4) {
        prop_assert_eq!(
            suspend(&wedge(&a, &b), m),
            wedge(&suspend(&a, m), &suspend(&b, m))
        );
    }

    #[test]
    fn wedge_unit_and_suspension_identity(a in arb_index()) {
        prop_assert_eq!(wedge(&a, &ConleyIndex::trivial_index()), a.clone());
        prop_assert_eq!(suspend(&a, 0), a);
    }

    #[test]
    fn hausdorff_semidistance_properties(
        pts_a in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..6),
        pts_b in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..6),
    ) {
        let a: Vec<Vec<f64>> = pts_a.iter().map(|&(x, y)| vec![x, y]).collect();
        let b: Vec<Vec<f64>> = pts_b.iter().map(|&(x, y)| vec![x, y]).collect();
        prop_assert_eq!(hausdorff_semidistance(&a, &a), 0.0);
        prop_assert_eq!(hausdorff_semidistance(&[], &b), 0.0);
        // growing B can only shrink the semidistance
        let mut b_bigger = b.clone();
        b_bigger.extend(a.clone());
        prop_assert!(hausdorff_semidistance(&a, &b_bigger) <= hausdorff_semidistance(&a, &b));
        prop_assert_eq!(hausdorff_semidistance(&a, &b_bigger), 0.0);
    }

    #[test]
    fn order_two_and_three_reductions_agree(b2 in 0.1f64..1.5, b3 in 0.5f64..1.5) {
        let m = build_cahn_hilliard_1d(std::f64::consts::PI, b2, b3, 5).unwrap();
        let c = crossing_data(&m, 1.0, 1e-9).unwrap();
        let r2 = bifurcade::center_manifold::reduce(&m, &c, 2).unwrap();
        let r3 = bifurcade::center_manifold::reduce(&m, &c, 3).unwrap();
        for (p2, p3) in r2.nonlinear.iter().zip(&r3.nonlinear) {
            for (mono, &coeff) in &p2.terms {
                prop_assert_eq!(p3.terms.get(mono).copied().unwrap_or(0.0), coeff);
            }
        }
        for ((s2, xi2), (s3, xi3)) in r2.slaves.iter().zip(&r3.slaves) {
            prop_assert_eq!(s2, s3);
            for (mono, &coeff) in &xi2.terms {
                prop_assert_eq!(xi3.terms.get(mono).copied().unwrap_or(0.0), coeff);
            }
        }
    }
}
