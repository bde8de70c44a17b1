use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BayesNet, Dag, ModelError};
use crate::scalar::Exact;

/// Largest integer weight drawn for a CPT entry before normalization.
const MAX_WEIGHT: u64 = 64;

/// DAG shape requested from [`gen_random_net`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    /// `0 -> 1 -> ... -> n-1`.
    Path,
    /// Every node but the root has exactly one parent; labels are shuffled.
    Tree,
    /// Up to `max_in_degree` parents per node; labels are shuffled.
    RandomDag { max_in_degree: usize },
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Structure::Path => f.write_str("path"),
            Structure::Tree => f.write_str("tree"),
            Structure::RandomDag { max_in_degree } => write!(f, "random-dag:{max_in_degree}"),
        }
    }
}

impl FromStr for Structure {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "path" => Ok(Structure::Path),
            "tree" => Ok(Structure::Tree),
            other => other
                .strip_prefix("random-dag:")
                .or_else(|| other.strip_prefix("random-dag(")?.strip_suffix(')'))
                .and_then(|k| k.parse().ok())
                .map(|max_in_degree| Structure::RandomDag { max_in_degree })
                .ok_or_else(|| {
                    ModelError::Generator(alloc::format!(
                        "unknown structure {other:?} (expected path, tree, or random-dag:K)"
                    ))
                }),
        }
    }
}

/// Random net with exactly normalized rational CPTs. Every row is a vector of
/// integer weights in `1..=64` divided by its sum, so all entries are positive.
/// The output depends only on the arguments.
pub fn gen_random_net(
    n: usize,
    alphabet: usize,
    structure: Structure,
    seed: u64,
) -> Result<BayesNet<Exact>, ModelError> {
    if n == 0 {
        return Err(ModelError::Generator("n must be at least 1".to_string()));
    }
    if alphabet < 2 {
        return Err(ModelError::Generator(
            "alphabet must be at least 2".to_string(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parents = random_parents(n, structure, &mut rng);
    let dag = Dag::new(parents)?;
    let cpt = (0..n)
        .map(|node| {
            let rows = alphabet.pow(dag.parents(node).len() as u32);
            (0..rows).map(|_| random_row(alphabet, &mut rng)).collect()
        })
        .collect();
    BayesNet::new(dag, alphabet, cpt)
}

fn random_parents(n: usize, structure: Structure, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    // parents by position in a hidden topological order
    let by_position: Vec<Vec<usize>> = match structure {
        Structure::Path => {
            return (0..n)
                .map(|i| {
                    if i == 0 {
                        Vec::new()
                    } else {
                        alloc::vec![i - 1]
                    }
                })
                .collect()
        }
        Structure::Tree => (0..n)
            .map(|i| {
                if i == 0 {
                    Vec::new()
                } else {
                    alloc::vec![rng.gen_range(0..i)]
                }
            })
            .collect(),
        Structure::RandomDag { max_in_degree } => (0..n)
            .map(|i| {
                let k = rng.gen_range(0..=max_in_degree.min(i));
                let mut chosen: Vec<usize> = rand::seq::index::sample(rng, i.max(1), k)
                    .into_iter()
                    .collect();
                chosen.sort_unstable();
                chosen
            })
            .collect(),
    };
    let mut label: Vec<usize> = (0..n).collect();
    label.shuffle(rng);
    let mut parents = alloc::vec![Vec::new(); n];
    for (pos, ps) in by_position.into_iter().enumerate() {
        let mut mapped: Vec<usize> = ps.into_iter().map(|p| label[p]).collect();
        mapped.sort_unstable();
        parents[label[pos]] = mapped;
    }
    parents
}

fn random_row(alphabet: usize, rng: &mut ChaCha8Rng) -> Vec<Exact> {
    let weights: Vec<u64> = (0..alphabet)
        .map(|_| rng.gen_range(1..=MAX_WEIGHT))
        .collect();
    let total: u64 = weights.iter().sum();
    weights
        .into_iter()
        .map(|w| Exact::new(BigInt::from(w), BigInt::from(total)))
        .collect()
}
