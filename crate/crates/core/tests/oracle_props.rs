mod common;

use common::{arb_kernel, PRESETS};
use polarlab::oracle::{
    exact_block_entropy, exact_profile, exact_profile_with, OracleOptions, PairAnalysis,
};
use polarlab::par::Exec;
use polarlab::process::parse_preset;
use proptest::prelude::*;

fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn profile_sums_to_block_entropy(k in arb_kernel(3, 2), e in 1u32..=3) {
        let n = 1usize << e;
        let p = exact_profile(&k, n, None).unwrap();
        let total: f64 = p.h.iter().sum();
        prop_assert!((total - exact_block_entropy(&k, n).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn bhattacharyya_brackets_entropy(k in arb_kernel(3, 2), e in 1u32..=3) {
        let p = exact_profile(&k, 1usize << e, None).unwrap();
        for (&h, &z) in p.h.iter().zip(&p.z) {
            prop_assert!(z * z <= h + 1e-9, "Z^2 = {} > H = {h}", z * z);
            prop_assert!(h <= (1.0 + z).log2() + 1e-9, "H = {h} > log(1+Z), Z = {z}");
        }
    }

    #[test]
    fn symmetry_reduction_changes_nothing(k in arb_kernel(2, 3), e in 1u32..=2) {
        let n = 1usize << e;
        let on = OracleOptions { use_symmetry: true, ..Default::default() };
        let off = OracleOptions { use_symmetry: false, ..Default::default() };
        let a = exact_profile_with(&k, n, None, &on).unwrap();
        let b = exact_profile_with(&k, n, None, &off).unwrap();
        for i in 0..n {
            prop_assert!((a.h[i] - b.h[i]).abs() < 1e-12);
            prop_assert!((a.z[i] - b.z[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_children_respect_the_chain_rule(k in arb_kernel(2, 2)) {
        let a = PairAnalysis::compute(&k, 2).unwrap();
        let sm = a.supermartingale();
        for i in 0..2 {
            prop_assert!(sm.chain_error[i] < 1e-9);
            prop_assert!(sm.slack[i] >= -1e-9);
        }
    }
}

#[test]
fn memoryless_profile_matches_the_closed_form_at_two() {
    // one BSC step: U_1 = X_1 ^ X_2 then U_2 = X_2
    let p: f64 = 0.11;
    let k = parse_preset("iid:0.11").unwrap();
    let prof = exact_profile(&k, 2, None).unwrap();
    let q = 2.0 * p * (1.0 - p);
    assert!((prof.h[0] - h2(q)).abs() < 1e-12);
    assert!((prof.h[0] + prof.h[1] - 2.0 * h2(p)).abs() < 1e-12);
}

#[test]
fn sequential_and_parallel_are_bit_identical() {
    for name in PRESETS {
        let k = parse_preset(name).unwrap();
        let seq = OracleOptions {
            exec: Exec::Sequential,
            ..Default::default()
        };
        let par = OracleOptions {
            exec: Exec::Parallel,
            ..Default::default()
        };
        assert_eq!(
            exact_profile_with(&k, 8, None, &seq).unwrap(),
            exact_profile_with(&k, 8, None, &par).unwrap(),
            "{name}"
        );
        let seq =
            polarlab::sctrellis::genie_profile_mc_with(&k, 64, 300, 4, Exec::Sequential).unwrap();
        let par =
            polarlab::sctrellis::genie_profile_mc_with(&k, 64, 300, 4, Exec::Parallel).unwrap();
        assert_eq!(seq, par, "{name}");
    }
}
