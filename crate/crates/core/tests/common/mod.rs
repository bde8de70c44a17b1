#![allow(dead_code)]

use num_bigint::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tvbn_core::model::{gen_random_net, BayesNet, Dag, Structure};
use tvbn_core::Exact;

pub fn r(a: i64, b: i64) -> Exact {
    Exact::new(BigInt::from(a), BigInt::from(b))
}

fn bernoulli_pair(first: Exact) -> BayesNet<Exact> {
    let row = vec![first.clone(), r(1, 1) - first];
    BayesNet::new(Dag::empty(2), 2, vec![vec![row.clone()], vec![row]]).unwrap()
}

/// `P = Ber(2/3)⊗Ber(2/3)` and `Q = Ber(1/3)⊗Ber(1/3)`, where `Ber(p)` puts
/// mass `p` on symbol 0.
pub fn two_bits() -> (BayesNet<Exact>, BayesNet<Exact>) {
    (bernoulli_pair(r(2, 3)), bernoulli_pair(r(1, 3)))
}

pub fn structure(kind: usize) -> Structure {
    match kind % 3 {
        0 => Structure::Path,
        1 => Structure::Tree,
        _ => Structure::RandomDag { max_in_degree: 2 },
    }
}

/// Same DAG as `net`, fresh rows of integer weights in `0..=8` (at least one
/// positive per row), so zero entries show up.
pub fn reweight(net: &BayesNet<Exact>, seed: u64) -> BayesNet<Exact> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = net.alphabet();
    let cpt = (0..net.len())
        .map(|node| {
            (0..net.cpt(node).row_count())
                .map(|_| {
                    let mut w: Vec<i64> = (0..l).map(|_| rng.gen_range(0..=8)).collect();
                    if w.iter().all(|&v| v == 0) {
                        w[rng.gen_range(0..l)] = 1;
                    }
                    let total: i64 = w.iter().sum();
                    w.into_iter().map(|v| r(v, total)).collect()
                })
                .collect()
        })
        .collect();
    BayesNet::new(net.dag().clone(), l, cpt).unwrap()
}

/// Random exact net with `n` in `1..=max_n` and alphabet in `2..=max_l`.
pub fn net(max_n: usize, max_l: usize) -> impl Strategy<Value = BayesNet<Exact>> {
    (1..=max_n, 2..=max_l, 0..3usize, any::<u64>())
        .prop_map(|(n, l, kind, seed)| gen_random_net(n, l, structure(kind), seed).unwrap())
}

/// Two random exact nets over one DAG; `Q` may contain zero entries.
pub fn net_pair(
    max_n: usize,
    max_l: usize,
) -> impl Strategy<Value = (BayesNet<Exact>, BayesNet<Exact>)> {
    (net(max_n, max_l), any::<u64>()).prop_map(|(p, seed)| {
        let q = reweight(&p, seed);
        (p, q)
    })
}

/// All assignments of `[l]^n`, first node most significant.
pub fn assignments(n: usize, l: usize) -> Vec<Vec<usize>> {
    let total = l.pow(n as u32);
    (0..total)
        .map(|mut k| {
            let mut w = vec![0; n];
            for slot in w.iter_mut().rev() {
                *slot = k % l;
                k /= l;
            }
            w
        })
        .collect()
}
