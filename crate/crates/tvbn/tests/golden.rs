use std::path::PathBuf;

use proptest::prelude::*;
use tvbn::format::{canonicalize, parse_net, serialize_net};
use tvbn_core::model::{gen_random_net, Structure};

fn data(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", name]
        .iter()
        .collect();
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn two_bits_file_canonicalizes_to_golden() {
    assert_eq!(
        canonicalize(&data("bits_p.json")).unwrap(),
        data("bits_p.canonical.json")
    );
}

#[test]
fn canonical_form_is_a_fixed_point() {
    let golden = data("bits_p.canonical.json");
    assert_eq!(canonicalize(&golden).unwrap(), golden);
}

#[test]
fn decimals_canonicalize_to_fractions() {
    let text = canonicalize(&data("chain.json")).unwrap();
    assert_eq!(
        text.trim_end(),
        r#"{"n":2,"alphabet":2,"parents":[[],[0]],"cpt":[[["3/5","2/5"]],[["9/10","1/10"],["1/2","1/2"]]]}"#
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_nets_round_trip(n in 1..9usize, l in 2..4usize, kind in 0..3usize, seed: u64) {
        let s = [Structure::Path, Structure::Tree, Structure::RandomDag { max_in_degree: 2 }][kind];
        let net = gen_random_net(n, l, s, seed).unwrap();
        let text = serialize_net(&net);
        prop_assert_eq!(&parse_net(&text).unwrap(), &net);
        prop_assert_eq!(canonicalize(&text).unwrap(), text);
    }
}
