mod common;

use mcount_core::builtins::builtin_class;
use mcount_core::eliminate::{
    eliminate_all, eliminate_many_one, eliminate_one_sum, eliminators, simulate_nullary, ElimError,
    Mode,
};
use mcount_core::engine::{count_models, CountOptions};
use mcount_core::text::parse_class_spec;
use mcount_core::{ClassSpec, Formula};
use num_bigint::BigUint;

fn count(spec: &ClassSpec, n: usize) -> BigUint {
    count_models(spec, n, &CountOptions::default())
        .unwrap()
        .count
}

fn arities(spec: &ClassSpec) -> Vec<usize> {
    spec.vocab().relations.iter().map(|r| r.arity).collect()
}

#[test]
fn output_vocabularies_have_the_expected_shape() {
    for (name, spec) in common::elimination_corpus() {
        let k = spec.vocab().num_constants;
        let ar = arities(&spec);
        let family: usize = ar.iter().map(|&a| 1 << a).sum();
        for e in eliminators().iter() {
            let res = e.eliminate(&spec).unwrap();
            for out in &res.outputs {
                assert_eq!(out.vocab().num_constants, k - 1, "{name} {}", e.name());
                assert!(out.vocab().is_valid());
            }
            let rels = |i: usize| res.outputs[i].vocab().relations.len();
            match res.mode {
                Mode::HigherArity | Mode::ManyOne => {
                    assert_eq!(res.outputs.len(), 1);
                    assert_eq!(rels(0), family, "{name} {}", e.name());
                }
                Mode::Sum => {
                    let labels = ar.iter().filter(|&&a| a == 1 || a == 2).count();
                    assert_eq!(res.outputs.len(), 1 << labels, "{name}");
                    assert_eq!(res.labels.len(), res.outputs.len());
                    let per_class: usize = ar.iter().map(|&a| if a == 2 { 3 } else { 1 }).sum();
                    for i in 0..res.outputs.len() {
                        assert_eq!(rels(i), per_class, "{name}");
                    }
                }
            }
            if res.mode != Mode::HigherArity {
                assert!(res.outputs.iter().all(|o| o.vocab().max_arity() <= 2));
            }
        }
    }
}

#[test]
fn outputs_stay_in_the_input_logic() {
    for (name, spec) in common::elimination_corpus() {
        let logic = spec.sentence().logic_profile();
        for e in eliminators().iter() {
            for out in e.eliminate(&spec).unwrap().outputs {
                let got = out.sentence().logic_profile();
                assert!(
                    got.within(&logic),
                    "{name} {}: {} outside {}",
                    e.name(),
                    got.name(),
                    logic.name()
                );
            }
        }
    }
}

#[test]
fn arity_limits_are_enforced() {
    let ternary = parse_class_spec("(vocab (rel T 3) (consts 1)) (sentence (T a1 a1 a1))").unwrap();
    for mode in ["many-one", "sum"] {
        let err = eliminators()
            .get(mode)
            .unwrap()
            .eliminate(&ternary)
            .unwrap_err();
        assert!(matches!(err, ElimError::Unsupported(_)), "{mode}: {err}");
    }
    let res = eliminators()
        .get("higher-arity")
        .unwrap()
        .eliminate(&ternary)
        .unwrap();
    for n in 0..=2 {
        assert_eq!(count(&res.outputs[0], n), count(&ternary, n));
    }
}

#[test]
fn classes_without_constants() {
    let spec = builtin_class("equivalence").unwrap();
    for e in eliminators().iter() {
        match e.mode() {
            Mode::Sum => assert_eq!(e.eliminate(&spec).unwrap_err(), ElimError::NoConstant),
            _ => assert_eq!(e.eliminate(&spec).unwrap().outputs, vec![spec.clone()]),
        }
    }
    assert_eq!(eliminate_many_one(&spec).unwrap(), spec);
    assert_eq!(eliminate_one_sum(&spec).unwrap_err(), ElimError::NoConstant);
}

#[test]
fn sum_outputs_partition_the_label_space() {
    // With a true sentence each label class holds every structure that
    // agrees with its label, so all label classes count the same.
    let spec =
        parse_class_spec("(vocab (rel U 1) (rel V 1) (rel E 2) (consts 1)) (sentence (true))")
            .unwrap();
    let outs = eliminate_one_sum(&spec).unwrap();
    assert_eq!(outs.len(), 8);
    for n in 0..=2 {
        let each: Vec<BigUint> = outs.iter().map(|o| count(o, n)).collect();
        assert!(each.iter().all(|c| *c == each[0]));
        assert_eq!(each.iter().sum::<BigUint>(), count(&spec, n));
    }
}

#[test]
fn false_stays_empty() {
    let spec = ClassSpec::new(common::mixed_vocab(), Formula::False).unwrap();
    for e in eliminators().iter() {
        for out in e.eliminate(&spec).unwrap().outputs {
            for n in 0..=2 {
                assert_eq!(count(&out, n), BigUint::from(0u8));
            }
        }
    }
}

#[test]
fn repeated_elimination_reaches_a_constant_free_class() {
    let spec = builtin_class("restrictedBell:2").unwrap();
    for mode in [Mode::Sum, Mode::ManyOne, Mode::HigherArity] {
        let outs = eliminate_all(&spec, mode).unwrap();
        assert!(outs.iter().all(|o| o.vocab().num_constants == 0));
        for n in 0..=2 {
            let total: BigUint = outs.iter().map(|o| count(o, n)).sum();
            assert_eq!(total, count(&spec, n), "{mode:?} at n = {n}");
        }
    }
}

#[test]
fn nullary_simulation_keeps_counts() {
    for (name, spec) in common::elimination_corpus() {
        let sim = simulate_nullary(&spec);
        assert!(sim.vocab().relations.iter().all(|r| r.arity > 0), "{name}");
        for n in 0..=2 {
            assert_eq!(count(&sim, n), count(&spec, n), "{name} at n = {n}");
        }
    }
}

#[test]
fn correspondence_sends_the_constant_facts_to_the_label() {
    let spec = builtin_class("restrictedBell:1").unwrap();
    let res = eliminators().get("sum").unwrap().eliminate(&spec).unwrap();
    for m in mcount_core::engine::Structure::all(spec.vocab(), 3).unwrap() {
        let (i, image) = res.correspond(&m);
        assert_eq!(image.universe(), 2);
        let loop_at_a = m.holds("E", &[3, 3]).unwrap();
        assert_eq!(res.labels[i].binary.contains(&"E".to_string()), loop_at_a);
    }
}
