use crate::logic::{ClassSpec, Connective, Formula, Quantifier, Term, Vocabulary};

const WIDTH: usize = 80;

/// Intermediate s-expression with its single-line width cached.
enum Doc {
    Leaf(String),
    List { items: Vec<Doc>, flat: usize },
}

impl Doc {
    fn list(items: Vec<Doc>) -> Doc {
        let flat =
            2 + items.iter().map(Doc::flat_width).sum::<usize>() + items.len().saturating_sub(1);
        Doc::List { items, flat }
    }

    fn flat_width(&self) -> usize {
        match self {
            Doc::Leaf(s) => s.len(),
            Doc::List { flat, .. } => *flat,
        }
    }

    fn write_flat(&self, out: &mut String) {
        match self {
            Doc::Leaf(s) => out.push_str(s),
            Doc::List { items, .. } => {
                out.push('(');
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    it.write_flat(out);
                }
                out.push(')');
            }
        }
    }

    fn write(&self, indent: usize, out: &mut String) {
        match self {
            Doc::List { items, flat } if indent + flat > WIDTH => {
                out.push('(');
                // Leading leaves (keyword, variable, numbers) stay on the head line.
                let head = items
                    .iter()
                    .take_while(|d| matches!(d, Doc::Leaf(_)))
                    .count();
                for (i, it) in items[..head].iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    it.write_flat(out);
                }
                for it in &items[head..] {
                    out.push('\n');
                    for _ in 0..indent + 2 {
                        out.push(' ');
                    }
                    it.write(indent + 2, out);
                }
                out.push(')');
            }
            _ => self.write_flat(out),
        }
    }
}

fn leaf(s: impl Into<String>) -> Doc {
    Doc::Leaf(s.into())
}

fn term(t: &Term) -> Doc {
    leaf(t.to_string())
}

fn formula_doc(f: &Formula) -> Doc {
    match f {
        Formula::True => Doc::list(vec![leaf("true")]),
        Formula::False => Doc::list(vec![leaf("false")]),
        Formula::Atom { rel, args } => {
            let mut items = vec![leaf(rel.clone())];
            items.extend(args.iter().map(term));
            Doc::list(items)
        }
        Formula::Eq(a, b) => Doc::list(vec![leaf("="), term(a), term(b)]),
        Formula::Not(g) => Doc::list(vec![leaf("not"), formula_doc(g)]),
        Formula::Binary { op, lhs, rhs } => {
            let kw = match op {
                Connective::And => "and",
                Connective::Or => "or",
                Connective::Implies => "implies",
                Connective::Iff => "iff",
            };
            Doc::list(vec![leaf(kw), formula_doc(lhs), formula_doc(rhs)])
        }
        Formula::Quant { q, var, body } => {
            let kw = match q {
                Quantifier::Exists => "exists",
                Quantifier::Forall => "forall",
            };
            Doc::list(vec![leaf(kw), leaf(var.clone()), formula_doc(body)])
        }
        Formula::Count {
            residue,
            modulus,
            var,
            body,
        } => Doc::list(vec![
            leaf("count"),
            leaf(residue.to_string()),
            leaf(modulus.to_string()),
            leaf(var.clone()),
            formula_doc(body),
        ]),
        Formula::RelQuant {
            q,
            rel,
            arity,
            body,
        } => {
            let kw = match q {
                Quantifier::Exists => "existsrel",
                Quantifier::Forall => "forallrel",
            };
            Doc::list(vec![
                leaf(kw),
                leaf(rel.clone()),
                leaf(arity.to_string()),
                formula_doc(body),
            ])
        }
        Formula::GuardedQuant {
            q,
            rel,
            guard,
            body,
        } => {
            let kw = match q {
                Quantifier::Exists => "existsrel-sub",
                Quantifier::Forall => "forallrel-sub",
            };
            Doc::list(vec![
                leaf(kw),
                leaf(rel.clone()),
                leaf(guard.clone()),
                formula_doc(body),
            ])
        }
    }
}

fn vocab_doc(v: &Vocabulary) -> Doc {
    let mut items = vec![leaf("vocab")];
    for r in &v.relations {
        items.push(Doc::list(vec![
            leaf("rel"),
            leaf(r.name.clone()),
            leaf(r.arity.to_string()),
        ]));
    }
    items.push(Doc::list(vec![
        leaf("consts"),
        leaf(v.num_constants.to_string()),
    ]));
    Doc::list(items)
}

/// Canonical layout: a form goes on one line when it fits in 80 columns,
/// otherwise its sub-forms are placed on separate lines indented by two.
pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    formula_doc(f).write(0, &mut out);
    out
}

pub fn print_vocabulary(v: &Vocabulary) -> String {
    let mut out = String::new();
    vocab_doc(v).write(0, &mut out);
    out
}

/// Canonical text of a class specification, newline-terminated.
pub fn print_class_spec(spec: &ClassSpec) -> String {
    let mut out = print_vocabulary(spec.vocab());
    out.push('\n');
    Doc::list(vec![leaf("sentence"), formula_doc(spec.sentence())]).write(0, &mut out);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_spec_prints_on_two_lines() {
        let spec = ClassSpec::new(
            Vocabulary::from_pairs(&[("E", 2)], 0),
            Formula::forall("x", Formula::atom("E", ["x", "x"])),
        )
        .unwrap();
        assert_eq!(
            print_class_spec(&spec),
            "(vocab (rel E 2) (consts 0))\n(sentence (forall x (E x x)))\n"
        );
    }

    #[test]
    fn constants_and_nullary_atoms() {
        let f = Formula::and(
            Formula::atom("Z", Vec::<String>::new()),
            Formula::atom_terms("U", vec![Term::Const(1)]),
        );
        assert_eq!(print_formula(&f), "(and (Z) (U a1))");
    }

    #[test]
    fn long_forms_break_after_leading_leaves() {
        let body = Formula::and_all(
            (0..6).map(|i| Formula::atom("Relation", [format!("x{i}"), "y".into()])),
        );
        let f = Formula::forall("y", body);
        let s = print_formula(&f);
        assert!(s.starts_with("(forall y\n  (and\n"));
        assert!(s.lines().all(|l| l.len() <= WIDTH));
    }
}
