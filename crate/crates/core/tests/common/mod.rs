//! Shared fixtures: a seeded random sentence generator, the elimination
//! corpus and independent combinatorial oracles.
#![allow(dead_code)]

use mcount_core::builtins::builtin_class;
use mcount_core::text::parse_class_spec;
use mcount_core::{ClassSpec, Formula, Term, Vocabulary};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// One nullary, one unary and one binary relation plus one constant.
pub fn mixed_vocab() -> Vocabulary {
    Vocabulary::from_pairs(&[("Z", 0), ("U", 1), ("E", 2)], 1)
}

fn term(rng: &mut StdRng, scope: &[String], consts: usize) -> Term {
    let pick_const = scope.is_empty() || (consts > 0 && rng.gen_bool(0.25));
    if pick_const {
        Term::Const(rng.gen_range(1..=consts.max(1)))
    } else {
        Term::var(scope[rng.gen_range(0..scope.len())].clone())
    }
}

fn leaf(rng: &mut StdRng, vocab: &Vocabulary, scope: &[String]) -> Formula {
    let consts = vocab.num_constants;
    match rng.gen_range(0..20) {
        0 => Formula::True,
        1 => Formula::False,
        2..=5 => Formula::eq(term(rng, scope, consts), term(rng, scope, consts)),
        _ => {
            let r = &vocab.relations[rng.gen_range(0..vocab.relations.len())];
            let args = (0..r.arity).map(|_| term(rng, scope, consts)).collect();
            Formula::atom_terms(r.name.clone(), args)
        }
    }
}

/// A closed sentence of quantifier and connective depth at most `depth`.
/// Variable names are drawn from a small pool so that shadowing occurs.
/// With `counting`, modular counting quantifiers are also produced.
pub fn random_sentence(
    rng: &mut StdRng,
    vocab: &Vocabulary,
    depth: usize,
    counting: bool,
) -> Formula {
    fn go(
        rng: &mut StdRng,
        vocab: &Vocabulary,
        depth: usize,
        counting: bool,
        scope: &mut Vec<String>,
    ) -> Formula {
        let usable = !scope.is_empty() || vocab.num_constants > 0;
        if usable && (depth == 0 || rng.gen_bool(0.2)) {
            return leaf(rng, vocab, scope);
        }
        let kinds = if counting { 8 } else { 7 };
        let must_bind = !usable;
        let kind = if must_bind {
            5 + rng.gen_range(0..2)
        } else {
            rng.gen_range(0..kinds)
        };
        let d = depth.saturating_sub(1);
        match kind {
            0 => Formula::not(go(rng, vocab, d, counting, scope)),
            1..=4 => {
                let l = go(rng, vocab, d, counting, scope);
                let r = go(rng, vocab, d, counting, scope);
                match kind {
                    1 => Formula::and(l, r),
                    2 => Formula::or(l, r),
                    3 => Formula::implies(l, r),
                    _ => Formula::iff(l, r),
                }
            }
            _ => {
                let var = ["x", "y", "z"][rng.gen_range(0..3)].to_string();
                scope.push(var.clone());
                let body = go(rng, vocab, d, counting, scope);
                scope.pop();
                match kind {
                    5 => Formula::exists(var, body),
                    6 => Formula::forall(var, body),
                    _ => {
                        let m = rng.gen_range(2..=3);
                        Formula::count(rng.gen_range(0..m), m, var, body)
                    }
                }
            }
        }
    }
    // Depth 0 with no constants still needs a binder to have terms.
    go(rng, vocab, depth.max(1), counting, &mut Vec::new())
}

pub fn random_spec(seed: u64, vocab: &Vocabulary, depth: usize, counting: bool) -> ClassSpec {
    let mut rng = StdRng::seed_from_u64(seed);
    let f = random_sentence(&mut rng, vocab, depth, counting);
    ClassSpec::new(vocab.clone(), f).expect("generated sentences are closed and well-typed")
}

fn parsed(text: &str) -> ClassSpec {
    parse_class_spec(text).unwrap_or_else(|e| panic!("fixture does not parse: {e}\n{text}"))
}

/// Named classes with at least one constant: builtins, hand-written
/// second-order and counting sentences, and seeded random sentences.
pub fn elimination_corpus() -> Vec<(String, ClassSpec)> {
    let mut out: Vec<(String, ClassSpec)> = vec![
        (
            "restrictedBell:1".into(),
            builtin_class("restrictedBell:1").unwrap(),
        ),
        (
            "restrictedBell:2".into(),
            builtin_class("restrictedBell:2").unwrap(),
        ),
        (
            "count-degree".into(),
            parsed(
                "(vocab (rel E 2) (consts 1))
                 (sentence (forall x (count 0 2 y (or (E x y) (E y a1)))))",
            ),
        ),
        (
            "count-unary".into(),
            parsed(
                "(vocab (rel U 1) (consts 1))
                 (sentence (and (count 1 2 x (U x)) (U a1)))",
            ),
        ),
        (
            "mso-closure".into(),
            parsed(
                "(vocab (rel E 2) (consts 1))
                 (sentence (existsrel S 1 (and (S a1) (and
                    (forall x (forall y (implies (and (S x) (E x y)) (S y))))
                    (exists x (not (S x)))))))",
            ),
        ),
        (
            "guarded".into(),
            parsed(
                "(vocab (rel U 1) (rel E 2) (consts 1))
                 (sentence (and (forall x (forall y (implies (E x y) (or (= x a1) (= y a1)))))
                           (and (existsrel-sub T E (forall x (iff (U x) (exists y (T x y)))))
                                (forallrel-sub V U (or (V a1) (not (U a1)))))))",
            ),
        ),
        (
            "nullary".into(),
            parsed(
                "(vocab (rel Z 0) (rel E 2) (consts 1))
                 (sentence (and (iff (Z) (E a1 a1)) (forall x (implies (E x a1) (E a1 x)))))",
            ),
        ),
    ];
    let v = mixed_vocab();
    for seed in 0..16 {
        out.push((
            format!("random-fol-{seed}"),
            random_spec(seed, &v, 4, false),
        ));
    }
    out
}

/// Set partitions of `n` labelled elements, by restricted growth strings.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, n: usize, max: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for b in 0..=max + 1 {
            prefix.push(b);
            go(prefix, n, max.max(b), out);
            prefix.pop();
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut prefix = vec![0];
    go(&mut prefix, n, 0, &mut out);
    out
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}
