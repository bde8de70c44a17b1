mod common;

use common::assignments;
use proptest::prelude::*;
use tvbn_core::estimator::{f_value, g_value, EstimateParams, EstimatorError, TvEstimator};
use tvbn_core::inference::QueryCount;
use tvbn_core::model::{gen_random_net, BayesNet, Structure};
use tvbn_core::oracle::{exact_identity_check, exact_prefix_z, exact_z, Oracle};
use tvbn_core::{rng, Exact, Scalar};

/// Prefix in topological order of a node-indexed assignment.
fn topo_prefix(p: &BayesNet<Exact>, w: &[usize], k: usize) -> Vec<usize> {
    p.dag().topo_order()[..k].iter().map(|&v| w[v]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normalizer_matches_oracle((p, q) in common::net_pair(5, 3)) {
        let est = TvEstimator::new(&p, &q).unwrap();
        let z = est.compute_z(&mut QueryCount::default()).unwrap();
        prop_assert_eq!(z.clone(), exact_z(&p, &q).unwrap());
        let float = TvEstimator::new(&p.to_float(), &q.to_float()).unwrap();
        prop_assert!((float.compute_z(&mut QueryCount::default()).unwrap() - z.as_f64()).abs() < 1e-9);
    }

    #[test]
    fn prefix_normalizers_match_oracle((p, q) in common::net_pair(4, 3), pick in any::<prop::sample::Index>(), k in 0..5usize) {
        let all = assignments(p.len(), p.alphabet());
        let w = pick.get(&all);
        let k = k.min(p.len());
        let prefix = topo_prefix(&p, w, k);
        let est = TvEstimator::new(&p, &q).unwrap();
        let mut count = QueryCount::default();
        let z = est.compute_z_prefix(&prefix, &mut count).unwrap();
        prop_assert_eq!(count, QueryCount(2));
        prop_assert_eq!(z.clone(), exact_prefix_z(&p, &q, &prefix).unwrap());
        if k == p.len() {
            prop_assert_eq!(z, g_value(&p, &q, w).unwrap());
        }
    }

    #[test]
    fn g_and_f_bounds((p, q) in common::net_pair(5, 3)) {
        let zero = common::r(0, 1);
        let one = common::r(1, 1);
        for w in assignments(p.len(), p.alphabet()) {
            let g = g_value(&p, &q, &w).unwrap();
            let diff = p.mass(&w).unwrap() - q.mass(&w).unwrap();
            prop_assert!(g >= zero);
            prop_assert!(g >= diff);
            match f_value(&p, &q, &w) {
                Ok(f) => {
                    prop_assert!(g > zero);
                    prop_assert!(f >= zero && f <= one);
                    let excess = if diff > zero { diff } else { zero.clone() };
                    prop_assert_eq!(f * g, excess);
                }
                Err(EstimatorError::ContractViolation(_)) => prop_assert_eq!(g, zero.clone()),
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }

    #[test]
    fn identities_hold((p, q) in common::net_pair(4, 3)) {
        let report = exact_identity_check(&p, &q).unwrap();
        prop_assert!(report.all_passed(), "{:?}", report);
    }

    #[test]
    fn samples_lie_in_support_and_respect_query_budget((p, q) in common::net_pair(6, 3), seed: u64) {
        let (pf, qf) = (p.to_float(), q.to_float());
        let est = TvEstimator::new(&pf, &qf).unwrap();
        let z = est.compute_z(&mut QueryCount::default()).unwrap();
        prop_assume!(z > 1e-12);
        let bound = 2 * p.alphabet() as u64 * p.len() as u64;
        for i in 0..20 {
            let mut count = QueryCount::default();
            let w = est.sample_pi(&z, &mut rng::stream(seed, i), &mut count, None).unwrap();
            prop_assert!(count.0 <= bound);
            prop_assert!(g_value(&p, &q, &w).unwrap() > common::r(0, 1));
        }
    }

    #[test]
    fn runs_are_reproducible_and_bounded((p, q) in common::net_pair(6, 2), seed: u64, m in 1..600u64) {
        let params = EstimateParams::new(0.2, 0.2, seed).unwrap().with_samples(m);
        let est = TvEstimator::new(&p.to_float(), &q.to_float()).unwrap();
        let a = est.run(&params).unwrap();
        let b = est.run(&params).unwrap();
        let c = est.run(&params.clone().with_memo(true)).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&a, &c);
        let bound = 2 * p.alphabet() as u64 * p.len() as u64 * a.m + 1;
        prop_assert!(a.queries <= bound);
        prop_assert!((0.0..=1.0).contains(&a.alpha_hat));
        prop_assert!((a.estimate - a.z * a.alpha_hat).abs() < 1e-12);
    }
}

#[test]
fn pi_law_on_a_random_net() {
    let p = gen_random_net(3, 2, Structure::Path, 5).unwrap();
    let q = common::reweight(&p, 9);
    let est = TvEstimator::new(&p.to_float(), &q.to_float()).unwrap();
    let z = est.compute_z(&mut QueryCount::default()).unwrap();
    let exact_z = exact_z(&p, &q).unwrap();
    let draws = 40_000;
    let mut counts = vec![0u32; 8];
    for i in 0..draws {
        let w = est
            .sample_pi(&z, &mut rng::stream(1, i), &mut QueryCount::default(), None)
            .unwrap();
        counts[w[0] * 4 + w[1] * 2 + w[2]] += 1;
    }
    let tv: f64 = assignments(3, 2)
        .iter()
        .zip(&counts)
        .map(|(w, &c)| {
            let pi = (g_value(&p, &q, w).unwrap() / exact_z.clone()).as_f64();
            (f64::from(c) / draws as f64 - pi).abs()
        })
        .sum::<f64>()
        / 2.0;
    assert!(tv < 0.02, "empirical TV {tv}");
}

#[test]
fn zero_normalizer_is_rejected_by_sampler() {
    let p = gen_random_net(3, 2, Structure::Tree, 1).unwrap().to_float();
    let est = TvEstimator::new(&p, &p).unwrap();
    let err = est.sample_pi(
        &0.0,
        &mut rng::stream(0, 0),
        &mut QueryCount::default(),
        None,
    );
    assert_eq!(err, Err(EstimatorError::ZeroNormalizer));
}

#[test]
fn different_dags_are_rejected() {
    let p = gen_random_net(4, 2, Structure::Path, 1).unwrap();
    let q = gen_random_net(4, 2, Structure::RandomDag { max_in_degree: 2 }, 2).unwrap();
    if p.dag() != q.dag() {
        assert!(TvEstimator::new(&p, &q).is_err());
    }
}

#[test]
fn oracle_refuses_instead_of_truncating() {
    let p = gen_random_net(12, 3, Structure::Path, 1).unwrap();
    assert!(Oracle::default().z(&p, &p).is_err());
}
