mod common;

use common::assignments;
use num_traits::One;
use proptest::prelude::*;
use tvbn_core::model::{
    gen_random_net, moralize, BayesNet, Dag, ModelError, RawNet, Structure, Violation,
};
use tvbn_core::Exact;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mass_sums_to_one(p in common::net(6, 3)) {
        let total = assignments(p.len(), p.alphabet())
            .iter()
            .fold(Exact::from_integer(0.into()), |acc, w| acc + p.mass(w).unwrap());
        prop_assert!(total.is_one());
    }

    #[test]
    fn generator_is_deterministic(n in 1..12usize, l in 2..4usize, kind in 0..3usize, seed: u64) {
        let s = common::structure(kind);
        prop_assert_eq!(gen_random_net(n, l, s, seed).unwrap(), gen_random_net(n, l, s, seed).unwrap());
    }

    #[test]
    fn generated_structure_respected(n in 1..15usize, kind in 0..3usize, seed: u64) {
        let s = common::structure(kind);
        let p = gen_random_net(n, 2, s, seed).unwrap();
        let max_parents = match s {
            Structure::Path | Structure::Tree => 1,
            Structure::RandomDag { max_in_degree } => max_in_degree,
        };
        prop_assert!(p.dag().max_in_degree() <= max_parents);
        if !matches!(s, Structure::RandomDag { .. }) {
            prop_assert_eq!(p.dag().edge_count(), n - 1);
        }
    }

    #[test]
    fn raw_round_trip(p in common::net(6, 3)) {
        prop_assert_eq!(p.to_raw().into_net().unwrap(), p);
    }

    #[test]
    fn moral_graph_marries_parents(p in common::net(8, 2)) {
        let g = moralize(&p);
        for node in 0..p.len() {
            let parents = p.dag().parents(node);
            for (i, &a) in parents.iter().enumerate() {
                prop_assert!(g.has_edge(a, node));
                for &b in &parents[i + 1..] {
                    prop_assert!(g.has_edge(a, b));
                }
            }
        }
        let expected: usize = (0..p.len())
            .flat_map(|v| (v + 1..p.len()).map(move |u| (v, u)))
            .filter(|&(v, u)| {
                p.dag().parents(v).contains(&u)
                    || p.dag().parents(u).contains(&v)
                    || (0..p.len()).any(|c| p.dag().parents(c).contains(&u) && p.dag().parents(c).contains(&v))
            })
            .count();
        prop_assert_eq!(g.edge_count(), expected);
    }
}

#[test]
fn validation_reports_every_defect() {
    let raw = RawNet {
        alphabet: 2,
        parents: vec![vec![1], vec![0], vec![2]],
        cpt: vec![
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            vec![vec![0.5, 0.5], vec![0.9, 0.0]],
            vec![vec![-0.5, 1.5]],
        ],
    };
    let report = raw.validate();
    let v = &report.violations;
    assert!(v.iter().any(|x| matches!(x, Violation::Cycle { .. })));
    assert!(v
        .iter()
        .any(|x| matches!(x, Violation::SelfLoop { node: 2 })));
    assert!(v.iter().any(|x| matches!(
        x,
        Violation::RowSum {
            node: 1,
            row: 1,
            ..
        }
    )));
    assert!(v
        .iter()
        .any(|x| matches!(x, Violation::NegativeEntry { node: 2, .. })));
    assert!(matches!(raw.into_net(), Err(ModelError::Invalid(_))));
}

#[test]
fn tolerance_on_row_sums() {
    let ok = RawNet {
        alphabet: 2,
        parents: vec![vec![]],
        cpt: vec![vec![vec![0.3, 0.7 + 1e-12]]],
    };
    assert!(ok.validate().is_ok());
    let bad = RawNet {
        alphabet: 2,
        parents: vec![vec![]],
        cpt: vec![vec![vec![0.3, 0.7 + 1e-6]]],
    };
    assert!(!bad.validate().is_ok());
}

#[test]
fn conditional_lookup_and_errors() {
    let p: BayesNet<f64> = RawNet {
        alphabet: 2,
        parents: vec![vec![], vec![0]],
        cpt: vec![vec![vec![0.6, 0.4]], vec![vec![0.9, 0.1], vec![0.5, 0.5]]],
    }
    .into_net()
    .unwrap();
    assert_eq!(p.conditional(1, 1, &[0]).unwrap(), 0.1);
    assert!((p.mass(&[0, 0]).unwrap() - 0.54).abs() < 1e-15);
    assert!(p.mass(&[0, 2]).is_err());
    assert!(p.mass(&[0]).is_err());
    assert!(p.conditional(2, 0, &[]).is_err());
    let q = BayesNet::<f64>::uniform(Dag::empty(2), 2);
    assert!(matches!(
        p.check_same_structure(&q),
        Err(ModelError::StructureMismatch(_))
    ));
}
