mod common;

use proptest::prelude::*;
use tvbn_core::inference::{infer, InferenceEngine, QueryCount, QuerySets};
use tvbn_core::model::{moralize, BayesNet};
use tvbn_core::oracle::exact_infer;
use tvbn_core::treedecomp::decompose;
use tvbn_core::{Exact, Scalar};

/// Net with a random query: each set is a random nonempty-or-empty subset.
fn instance(max_n: usize, max_l: usize) -> impl Strategy<Value = (BayesNet<Exact>, QuerySets)> {
    common::net(max_n, max_l).prop_flat_map(|p| {
        let (n, l) = (p.len(), p.alphabet());
        proptest::collection::vec(proptest::collection::vec(any::<bool>(), l), n).prop_map(
            move |masks| {
                let mut q = QuerySets::full(n, l);
                for (i, m) in masks.iter().enumerate() {
                    q.set(i, (0..l).filter(|&b| m[b]));
                }
                (p.clone(), q)
            },
        )
    })
}

fn query<S: Scalar>(net: &BayesNet<S>, q: &QuerySets) -> S {
    infer(net, q, &decompose(&moralize(net))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn exact_engine_matches_oracle((p, q) in instance(7, 3)) {
        prop_assert_eq!(query(&p, &q), exact_infer(&p, &q).unwrap());
    }

    #[test]
    fn float_engine_matches_oracle((p, q) in instance(8, 3)) {
        let exact = exact_infer(&p, &q).unwrap().as_f64();
        prop_assert!((query(&p.to_float(), &q) - exact).abs() < 1e-9);
    }

    #[test]
    fn every_order_gives_the_same_answer(
        (p, q) in instance(7, 3),
        orders in proptest::collection::vec(Just(()).prop_perturb(|_, mut rng| rng.next_u64()), 3),
    ) {
        let reference = query(&p, &q);
        for seed in orders {
            let mut order: Vec<usize> = (0..p.len()).collect();
            let mut s = seed;
            for i in (1..order.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                order.swap(i, (s >> 33) as usize % (i + 1));
            }
            let engine = InferenceEngine::with_order(&p, order).unwrap();
            prop_assert_eq!(engine.query(&q, &mut QueryCount::default()).unwrap(), reference.clone());
        }
    }

    #[test]
    fn widening_a_set_never_lowers_probability((p, q) in instance(6, 3), var in 0..6usize, sym in 0..3usize) {
        let var = var % p.len();
        let sym = sym % p.alphabet();
        let mut wider = q.clone();
        let mut symbols: Vec<usize> = (0..p.alphabet()).filter(|&b| q.contains(var, b)).collect();
        symbols.push(sym);
        wider.set(var, symbols);
        prop_assert!(query(&p, &wider) >= query(&p, &q));
    }

    #[test]
    fn unconstrained_query_is_one(p in common::net(10, 3)) {
        let full = QuerySets::full(p.len(), p.alphabet());
        prop_assert_eq!(query(&p, &full), Exact::from_integer(1.into()));
    }
}

#[test]
fn rejects_foreign_decomposition_and_bad_shapes() {
    let p = tvbn_core::model::gen_random_net(4, 2, tvbn_core::model::Structure::Path, 1).unwrap();
    let td = tvbn_core::treedecomp::TreeDecomposition {
        bags: vec![vec![0], vec![1], vec![2], vec![3]],
        tree_edges: vec![(0, 1), (1, 2), (2, 3)],
    };
    assert!(infer(&p, &QuerySets::full(4, 2), &td).is_err());
    let good = decompose(&moralize(&p));
    assert!(infer(&p, &QuerySets::full(3, 2), &good).is_err());
    assert!(infer(&p, &QuerySets::full(4, 3), &good).is_err());
    assert!(InferenceEngine::with_order(&p, vec![0, 1, 1, 2]).is_err());
}
