use mcount_core::eliminate::eliminate_higher_arity;
use mcount_core::engine::{compile, count_models, CompileLimits, CountOptions};
use mcount_core::lab::{
    build_phi_m, build_phi_mp, count_sequences, encode_canonical, enumerate_sequences,
    oracle_iterated_matchings, trim_pipeline, PrimeError,
};
use mcount_core::text::{parse_class_spec, print_class_spec};
use num_bigint::BigUint;

#[test]
fn ternary_counts_follow_the_oracle() {
    let phi = build_phi_mp(3).unwrap();
    let opts = CountOptions::default();
    for (n, want) in [(0usize, 1u32), (1, 0), (2, 1), (3, 0)] {
        let got = count_models(&phi, n, &opts).unwrap().count;
        assert_eq!(got, BigUint::from(want), "universe {}", n + 1);
        assert_eq!(
            oracle_iterated_matchings(n as u64 + 1, 3),
            BigUint::from(want)
        );
    }
}

#[test]
fn sharded_enumeration_matches_the_oracle() {
    for p in [2, 3, 5] {
        for n in 1..=9 {
            let want = oracle_iterated_matchings(n, p);
            for w in [1, 3] {
                assert_eq!(
                    BigUint::from(count_sequences(n as usize, p as usize, w)),
                    want,
                    "n = {n}, p = {p}"
                );
            }
        }
    }
}

#[test]
fn primes_only() {
    assert_eq!(build_phi_mp(4).unwrap_err(), PrimeError::NotPrime(4));
    assert!(matches!(build_phi_mp(7), Err(PrimeError::TooLarge(7))));
}

#[test]
fn encodings_of_every_four_element_sequence_are_models() {
    let phi = build_phi_m();
    let sentence = compile(phi.sentence(), phi.vocab(), 4, CompileLimits::default()).unwrap();
    let seqs = enumerate_sequences(4, 2);
    assert_eq!(seqs.len(), 3);
    for s in &seqs {
        s.validate().unwrap();
        assert!(sentence.satisfied_by(&encode_canonical(s, true).unwrap()));
    }
}

#[test]
fn trimmed_classes_round_trip_through_text() {
    let stages = trim_pipeline(&eliminate_higher_arity(&build_phi_m()).unwrap()).unwrap();
    for stage in &stages {
        let text = print_class_spec(&stage.spec);
        assert_eq!(
            parse_class_spec(&text).unwrap(),
            stage.spec,
            "stage {}",
            stage.stage
        );
    }
    let last = &stages.last().unwrap().spec;
    assert_eq!(last.vocab().num_constants, 0);
    assert_eq!(last.vocab().max_arity(), 3);
}
