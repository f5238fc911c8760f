use std::fmt;

use super::{is_constant_token, Formula, Term, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FormulaViolation {
    UnknownRelation(String),
    ArityMismatch {
        rel: String,
        expected: usize,
        found: usize,
    },
    ConstantOutOfRange {
        index: usize,
        num_constants: usize,
    },
    BadModulus(u32),
    ResidueOutOfRange {
        residue: u32,
        modulus: u32,
    },
    ReservedVariable(String),
    FreeVariable(String),
}

impl fmt::Display for FormulaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormulaViolation::UnknownRelation(r) => write!(f, "unknown relation {r}"),
            FormulaViolation::ArityMismatch {
                rel,
                expected,
                found,
            } => write!(
                f,
                "arity mismatch for {rel}: declared {expected}, applied to {found} arguments"
            ),
            FormulaViolation::ConstantOutOfRange {
                index,
                num_constants,
            } => write!(
                f,
                "constant index a{index} out of range (vocabulary has {num_constants} constants)"
            ),
            FormulaViolation::BadModulus(m) => write!(f, "counting modulus {m} is below 2"),
            FormulaViolation::ResidueOutOfRange { residue, modulus } => {
                write!(f, "counting residue {residue} not below modulus {modulus}")
            }
            FormulaViolation::ReservedVariable(v) => {
                write!(f, "variable name {v} is reserved for constants")
            }
            FormulaViolation::FreeVariable(v) => write!(f, "free variable {v} in sentence"),
        }
    }
}

/// Checks arity agreement, constant ranges, counting parameters and
/// relation scoping. Free variables are allowed here; see
/// [`validate_sentence`].
pub fn validate_formula(f: &Formula, vocab: &Vocabulary) -> Vec<FormulaViolation> {
    let mut out = Vec::new();
    let mut scope: Vec<(&str, usize)> = Vec::new();
    walk(f, vocab, &mut scope, &mut out);
    out
}

/// [`validate_formula`] plus closedness.
pub fn validate_sentence(f: &Formula, vocab: &Vocabulary) -> Vec<FormulaViolation> {
    let mut out = validate_formula(f, vocab);
    out.extend(
        f.free_variables()
            .into_iter()
            .map(FormulaViolation::FreeVariable),
    );
    out
}

fn lookup_arity(name: &str, vocab: &Vocabulary, scope: &[(&str, usize)]) -> Option<usize> {
    scope
        .iter()
        .rev()
        .find(|(n, _)| *n == name)
        .map(|(_, a)| *a)
        .or_else(|| vocab.relation(name).map(|r| r.arity))
}

fn check_term(t: &Term, vocab: &Vocabulary, out: &mut Vec<FormulaViolation>) {
    match t {
        Term::Const(i) => {
            if *i == 0 || *i > vocab.num_constants {
                out.push(FormulaViolation::ConstantOutOfRange {
                    index: *i,
                    num_constants: vocab.num_constants,
                });
            }
        }
        Term::Var(v) => check_var_name(v, out),
    }
}

fn check_var_name(v: &str, out: &mut Vec<FormulaViolation>) {
    if is_constant_token(v) || super::is_reserved_word(v) {
        out.push(FormulaViolation::ReservedVariable(v.to_string()));
    }
}

fn walk<'a>(
    f: &'a Formula,
    vocab: &Vocabulary,
    scope: &mut Vec<(&'a str, usize)>,
    out: &mut Vec<FormulaViolation>,
) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Atom { rel, args } => {
            match lookup_arity(rel, vocab, scope) {
                None => out.push(FormulaViolation::UnknownRelation(rel.clone())),
                Some(a) if a != args.len() => out.push(FormulaViolation::ArityMismatch {
                    rel: rel.clone(),
                    expected: a,
                    found: args.len(),
                }),
                Some(_) => {}
            }
            for t in args {
                check_term(t, vocab, out);
            }
        }
        Formula::Eq(a, b) => {
            check_term(a, vocab, out);
            check_term(b, vocab, out);
        }
        Formula::Not(g) => walk(g, vocab, scope, out),
        Formula::Binary { lhs, rhs, .. } => {
            walk(lhs, vocab, scope, out);
            walk(rhs, vocab, scope, out);
        }
        Formula::Quant { var, body, .. } => {
            check_var_name(var, out);
            walk(body, vocab, scope, out);
        }
        Formula::Count {
            residue,
            modulus,
            var,
            body,
        } => {
            if *modulus < 2 {
                out.push(FormulaViolation::BadModulus(*modulus));
            } else if residue >= modulus {
                out.push(FormulaViolation::ResidueOutOfRange {
                    residue: *residue,
                    modulus: *modulus,
                });
            }
            check_var_name(var, out);
            walk(body, vocab, scope, out);
        }
        Formula::RelQuant {
            rel, arity, body, ..
        } => {
            scope.push((rel, *arity));
            walk(body, vocab, scope, out);
            scope.pop();
        }
        Formula::GuardedQuant {
            rel, guard, body, ..
        } => {
            let arity = match lookup_arity(guard, vocab, scope) {
                Some(a) => a,
                None => {
                    out.push(FormulaViolation::UnknownRelation(guard.clone()));
                    0
                }
            };
            scope.push((rel, arity));
            walk(body, vocab, scope, out);
            scope.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_r() -> Vocabulary {
        Vocabulary::from_pairs(&[("R", 2)], 0)
    }

    #[test]
    fn matching_arity_is_valid() {
        assert!(validate_formula(&Formula::atom("R", ["x", "y"]), &binary_r()).is_empty());
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let v = validate_formula(&Formula::atom("R", ["x"]), &binary_r());
        assert_eq!(
            v,
            vec![FormulaViolation::ArityMismatch {
                rel: "R".into(),
                expected: 2,
                found: 1
            }]
        );
    }

    #[test]
    fn constant_out_of_range() {
        let vocab = Vocabulary::from_pairs(&[("U", 1)], 1);
        let f = Formula::atom_terms("U", vec![Term::Const(2)]);
        assert_eq!(
            validate_formula(&f, &vocab),
            vec![FormulaViolation::ConstantOutOfRange {
                index: 2,
                num_constants: 1
            }]
        );
    }

    #[test]
    fn bound_relation_is_in_scope() {
        let f = Formula::rel_quant(
            super::super::Quantifier::Exists,
            "S",
            1,
            Formula::forall("x", Formula::atom("S", ["x"])),
        );
        assert!(validate_sentence(&f, &Vocabulary::default()).is_empty());
        // Out of scope use is unknown.
        let g = Formula::and(f, Formula::forall("y", Formula::atom("S", ["y"])));
        assert_eq!(
            validate_sentence(&g, &Vocabulary::default()),
            vec![FormulaViolation::UnknownRelation("S".into())]
        );
    }

    #[test]
    fn guarded_binder_takes_guard_arity() {
        let f = Formula::guarded_quant(
            super::super::Quantifier::Forall,
            "S",
            "R",
            Formula::forall_all(&["x", "y"], Formula::atom("S", ["x", "y"])),
        );
        assert!(validate_sentence(&f, &binary_r()).is_empty());
    }

    #[test]
    fn counting_parameters() {
        let f = Formula::count(2, 2, "x", Formula::True);
        assert_eq!(
            validate_sentence(&f, &Vocabulary::default()),
            vec![FormulaViolation::ResidueOutOfRange {
                residue: 2,
                modulus: 2
            }]
        );
        let g = Formula::count(0, 1, "x", Formula::True);
        assert_eq!(
            validate_sentence(&g, &Vocabulary::default()),
            vec![FormulaViolation::BadModulus(1)]
        );
    }

    #[test]
    fn closedness() {
        let f = Formula::exists("x", Formula::atom("R", ["x", "y"]));
        assert_eq!(
            validate_sentence(&f, &binary_r()),
            vec![FormulaViolation::FreeVariable("y".into())]
        );
    }
}
