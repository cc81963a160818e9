//! Randomized invariants over the state/operator layer, the conditional
//! probability rule, and scenario documents.

use num_complex::Complex64;
use proptest::prelude::*;

use tsvf_core::hilbert::{
    inner_product, lift_to_subsystem, tensor_kets, Ket, SubsystemLayout, DEFAULT_EPS,
};
use tsvf_core::measurement::{born_distribution, collapse, Observable, PauliAxis};
use tsvf_core::scenarios::{load_scenario_str, semantically_equal};
use tsvf_core::tsvf::{abl_distribution, TwoStateVector};
use tsvf_core::weak::weak_value;

fn raw_ket(layout: SubsystemLayout, parts: &[(f64, f64)]) -> Ket {
    let amps = parts.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
    Ket::new(layout, amps).expect("amplitude count matches layout")
}

fn amps(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
}

fn axis() -> impl Strategy<Value = PauliAxis> {
    prop_oneof![Just(PauliAxis::X), Just(PauliAxis::Y), Just(PauliAxis::Z)]
}

proptest!(
    #[test]
    fn tensor_norm_is_multiplicative(a in amps(2), b in amps(3)) {
        let left = raw_ket(SubsystemLayout::single(2).unwrap(), &a);
        let right = raw_ket(SubsystemLayout::single(3).unwrap(), &b);
        let product = tensor_kets(&left, &right).unwrap();
        prop_assert_eq!(product.layout().dims(), &[2, 3]);
        let want = left.norm_sqr() * right.norm_sqr();
        prop_assert!((product.norm_sqr() - want).abs() <= 1e-12 * (1.0 + want));
    }

    #[test]
    fn inner_product_is_conjugate_symmetric(a in amps(4), b in amps(4)) {
        let layout = SubsystemLayout::qubits(2).unwrap();
        let left = raw_ket(layout.clone(), &a);
        let right = raw_ket(layout, &b);
        let forward = inner_product(&left, &right).unwrap();
        let backward = inner_product(&right, &left).unwrap();
        prop_assert!((forward - backward.conj()).norm() <= 1e-12);
    }

    #[test]
    fn born_probabilities_form_a_distribution(
        a in amps(4),
        axis in axis(),
        target in 0usize..2,
    ) {
        let layout = SubsystemLayout::qubits(2).unwrap();
        let ket = raw_ket(layout.clone(), &a);
        prop_assume!(ket.norm_sqr() > 1e-3);
        let state = ket.normalize().unwrap();
        let obs = Observable::pauli(axis, target, &layout).unwrap();
        let dist = born_distribution(&state, &obs).unwrap();
        for (_, p) in dist.entries() {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(p));
        }
        prop_assert!((dist.total() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn collapse_normalizes_and_repeats(
        a in amps(4),
        axis in axis(),
        target in 0usize..2,
    ) {
        let layout = SubsystemLayout::qubits(2).unwrap();
        let ket = raw_ket(layout.clone(), &a);
        prop_assume!(ket.norm_sqr() > 1e-3);
        let state = ket.normalize().unwrap();
        let obs = Observable::pauli(axis, target, &layout).unwrap();
        let dist = born_distribution(&state, &obs).unwrap();
        let (outcome, p) = dist.entries().iter().max_by(|x, y| x.1.total_cmp(&y.1)).unwrap();
        prop_assert!(*p >= 0.5 - 1e-12); // two outcomes, so the max carries at least half
        let collapsed = collapse(&state, &obs, outcome, DEFAULT_EPS).unwrap();
        prop_assert!(collapsed.is_normalized(1e-12));
        let again = collapse(&collapsed, &obs, outcome, DEFAULT_EPS).unwrap();
        prop_assert!(again.componentwise_distance_up_to_phase(&collapsed).unwrap() <= 1e-9);
    }

    #[test]
    fn conditional_probabilities_are_swap_symmetric(
        a in amps(4),
        b in amps(4),
        axis in axis(),
        target in 0usize..2,
    ) {
        let layout = SubsystemLayout::qubits(2).unwrap();
        let (pre, post) = (raw_ket(layout.clone(), &a), raw_ket(layout.clone(), &b));
        prop_assume!(pre.norm_sqr() > 1e-3 && post.norm_sqr() > 1e-3);
        let pre = pre.normalize().unwrap();
        let post = post.normalize().unwrap();
        let obs = Observable::pauli(axis, target, &layout).unwrap();

        let forward = TwoStateVector::new(pre.clone(), post.clone(), DEFAULT_EPS).unwrap();
        let backward = TwoStateVector::new(post, pre, DEFAULT_EPS).unwrap();
        let df = abl_distribution(&forward, &obs, DEFAULT_EPS);
        let db = abl_distribution(&backward, &obs, DEFAULT_EPS);
        match (df, db) {
            (Ok(df), Ok(db)) => {
                prop_assert!((df.probability("+1").unwrap() - db.probability("+1").unwrap()).abs() <= 1e-12);
                prop_assert!((df.probability("-1").unwrap() - db.probability("-1").unwrap()).abs() <= 1e-12);
                // Either way the two outcomes exhaust the conditional statistics.
                prop_assert!((df.probability("+1").unwrap() + df.probability("-1").unwrap() - 1.0).abs() <= 1e-12);
            }
            // Unreachable in one direction must mean unreachable in both.
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "reachability differed between directions"),
        }
    }

    #[test]
    fn weak_value_of_identity_is_one(a in amps(4), b in amps(4)) {
        let layout = SubsystemLayout::qubits(2).unwrap();
        let (pre, post) = (raw_ket(layout.clone(), &a), raw_ket(layout.clone(), &b));
        prop_assume!(pre.norm_sqr() > 1e-3 && post.norm_sqr() > 1e-3);
        let pre = pre.normalize().unwrap();
        let post = post.normalize().unwrap();
        prop_assume!(inner_product(&post, &pre).unwrap().norm() > 1e-2);
        let tsv = TwoStateVector::new(pre, post, DEFAULT_EPS).unwrap();
        let id = tsvf_core::hilbert::Operator::identity(layout);
        let wv = weak_value(&tsv, &id, DEFAULT_EPS).unwrap();
        prop_assert!((wv - Complex64::new(1.0, 0.0)).norm() <= 1e-10);
    }

    #[test]
    fn lifted_operators_on_distinct_subsystems_commute(
        ax1 in axis(),
        ax2 in axis(),
        extra in 2usize..4,
    ) {
        let layout = SubsystemLayout::new(vec![2, 2, extra]).unwrap();
        let a = Observable::pauli(ax1, 0, &layout).unwrap().to_operator();
        let b = Observable::pauli(ax2, 1, &layout).unwrap().to_operator();
        prop_assert!(a.commutator_max_abs(&b).unwrap() <= 1e-12);

        let local = Observable::pauli(ax1, 0, &SubsystemLayout::qubits(1).unwrap())
            .unwrap()
            .to_operator();
        let relift = lift_to_subsystem(&local, 0, &layout).unwrap();
        prop_assert!(relift.sub(&a).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn scenario_documents_round_trip(
        a in amps(2),
        axis_name in prop_oneof![Just("sigma_x"), Just("sigma_y"), Just("sigma_z")],
        outcome in prop_oneof![Just("+1"), Just("-1")],
    ) {
        let ket = raw_ket(SubsystemLayout::single(2).unwrap(), &a);
        prop_assume!(ket.norm_sqr() > 1e-3);
        let doc = serde_json::json!({
            "name": "round-trip",
            "dims": [2],
            "initial": [[a[0].0, a[0].1], [a[1].0, a[1].1]],
            "normalize": true,
            "events": [
                {"id": "E", "target": 0, "observable": axis_name, "forced_outcome": outcome}
            ],
            "analyses": [{"kind": "abl", "observable": "z1"}]
        });
        let loaded = load_scenario_str(&doc.to_string(), DEFAULT_EPS).unwrap();
        let reloaded = load_scenario_str(&loaded.to_json(), DEFAULT_EPS).unwrap();
        prop_assert!(semantically_equal(&loaded, &reloaded, DEFAULT_EPS));
        prop_assert!(loaded.initial().is_normalized(1e-12));
    }
);
