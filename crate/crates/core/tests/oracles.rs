mod common;

use common::*;
use latticeforge::definite::short_vectors;
use latticeforge::named;
use num_bigint::BigInt;

#[test]
fn box_oracle_matches_enumeration() {
    for (name, roots) in [("A2", 6), ("A3", 12), ("D4", 24), ("D5", 40), ("E6", 72)] {
        let l = named(name).unwrap();
        let report = short_vectors(&l, &BigInt::from(2)).unwrap();
        assert_eq!(report.count(2), roots, "{name}");
        assert_eq!(box_count(&l, 2), roots, "{name} box");
    }
}

#[test]
fn box_oracle_norm_four() {
    for name in ["A2", "D4", "A1(2)", "D4(2)"] {
        let l = latticeforge::build(name).unwrap();
        let report = short_vectors(&l, &BigInt::from(4)).unwrap();
        assert_eq!(report.count(4), box_count(&l, 4), "{name}");
    }
}

#[test]
fn e8_model_counts() {
    assert_eq!(e8_model_roots(&[]), 240);
    assert_eq!(e8_model_roots(&[MODEL_R1]), 126);
    assert_eq!(e8_model_roots(&[MODEL_R1, MODEL_R2]), 72);
}

#[test]
fn hassett_against_trial_division() {
    for d in (2..400u64).filter(|d| d % 6 == 0 || d % 6 == 2) {
        let expected = d % 4 == 0 || d % 9 == 0 || naive_odd_primes(d).iter().any(|p| p % 3 == 2);
        assert_eq!(latticeforge::nikulin::hassett_rho1(d).unwrap(), expected, "d = {d}");
    }
}
