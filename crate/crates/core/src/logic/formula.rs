use std::collections::BTreeSet;
use std::fmt;

/// An argument position of an atom: a bound or free variable, or a
/// hard-wired constant referenced by its 1-based index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(usize),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(i) => write!(f, "a{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn dual(self) -> Self {
        match self {
            Quantifier::Exists => Quantifier::Forall,
            Quantifier::Forall => Quantifier::Exists,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Connective {
    And,
    Or,
    Implies,
    Iff,
}

impl Connective {
    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            Connective::And => a && b,
            Connective::Or => a || b,
            Connective::Implies => !a || b,
            Connective::Iff => a == b,
        }
    }
}

/// Sentence and formula trees over a [`Vocabulary`](super::Vocabulary).
///
/// `Count` holds iff the number of witnesses is congruent to `residue`
/// modulo `modulus`. `RelQuant` ranges over every interpretation of a fresh
/// relation of the given arity; `GuardedQuant` ranges over subsets of the
/// guard relation's interpretation (the bound relation takes the guard's
/// arity).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom {
        rel: String,
        args: Vec<Term>,
    },
    Eq(Term, Term),
    Not(Box<Formula>),
    Binary {
        op: Connective,
        lhs: Box<Formula>,
        rhs: Box<Formula>,
    },
    Quant {
        q: Quantifier,
        var: String,
        body: Box<Formula>,
    },
    Count {
        residue: u32,
        modulus: u32,
        var: String,
        body: Box<Formula>,
    },
    RelQuant {
        q: Quantifier,
        rel: String,
        arity: usize,
        body: Box<Formula>,
    },
    GuardedQuant {
        q: Quantifier,
        rel: String,
        guard: String,
        body: Box<Formula>,
    },
}

// Construction helpers. These keep the sentence builders and the
// transformations readable.
impl Formula {
    pub fn atom<S: Into<String>>(
        rel: impl Into<String>,
        vars: impl IntoIterator<Item = S>,
    ) -> Self {
        Formula::Atom {
            rel: rel.into(),
            args: vars.into_iter().map(|v| Term::Var(v.into())).collect(),
        }
    }

    pub fn atom_terms(rel: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Atom {
            rel: rel.into(),
            args,
        }
    }

    pub fn eq(a: Term, b: Term) -> Self {
        Formula::Eq(a, b)
    }

    pub fn eq_vars(a: &str, b: &str) -> Self {
        Formula::Eq(Term::var(a), Term::var(b))
    }

    pub fn neq(a: Term, b: Term) -> Self {
        Formula::not(Formula::Eq(a, b))
    }

    pub fn neq_vars(a: &str, b: &str) -> Self {
        Formula::neq(Term::var(a), Term::var(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn binary(op: Connective, lhs: Formula, rhs: Formula) -> Self {
        Formula::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn and(lhs: Formula, rhs: Formula) -> Self {
        Formula::binary(Connective::And, lhs, rhs)
    }

    pub fn or(lhs: Formula, rhs: Formula) -> Self {
        Formula::binary(Connective::Or, lhs, rhs)
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Self {
        Formula::binary(Connective::Implies, lhs, rhs)
    }

    pub fn iff(lhs: Formula, rhs: Formula) -> Self {
        Formula::binary(Connective::Iff, lhs, rhs)
    }

    /// Left-nested conjunction; `True` for an empty iterator.
    pub fn and_all(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `False` for an empty iterator.
    pub fn or_all(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::False)
    }

    pub fn quant(q: Quantifier, var: impl Into<String>, body: Formula) -> Self {
        Formula::Quant {
            q,
            var: var.into(),
            body: Box::new(body),
        }
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Self {
        Formula::quant(Quantifier::Exists, var, body)
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Self {
        Formula::quant(Quantifier::Forall, var, body)
    }

    /// `∀v1 ∀v2 ... body`, outermost first.
    pub fn forall_all<S: AsRef<str>>(vars: &[S], body: Formula) -> Self {
        vars.iter()
            .rev()
            .fold(body, |acc, v| Formula::forall(v.as_ref(), acc))
    }

    pub fn exists_all<S: AsRef<str>>(vars: &[S], body: Formula) -> Self {
        vars.iter()
            .rev()
            .fold(body, |acc, v| Formula::exists(v.as_ref(), acc))
    }

    pub fn count(residue: u32, modulus: u32, var: impl Into<String>, body: Formula) -> Self {
        Formula::Count {
            residue,
            modulus,
            var: var.into(),
            body: Box::new(body),
        }
    }

    pub fn rel_quant(q: Quantifier, rel: impl Into<String>, arity: usize, body: Formula) -> Self {
        Formula::RelQuant {
            q,
            rel: rel.into(),
            arity,
            body: Box::new(body),
        }
    }

    pub fn guarded_quant(
        q: Quantifier,
        rel: impl Into<String>,
        guard: impl Into<String>,
        body: Formula,
    ) -> Self {
        Formula::GuardedQuant {
            q,
            rel: rel.into(),
            guard: guard.into(),
            body: Box::new(body),
        }
    }
}

impl Formula {
    /// Direct sub-formulas, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::True | Formula::False | Formula::Atom { .. } | Formula::Eq(..) => vec![],
            Formula::Not(f) => vec![f],
            Formula::Binary { lhs, rhs, .. } => vec![lhs, rhs],
            Formula::Quant { body, .. }
            | Formula::Count { body, .. }
            | Formula::RelQuant { body, .. }
            | Formula::GuardedQuant { body, .. } => vec![body],
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .children()
            .iter()
            .map(|c| c.node_count())
            .sum::<usize>()
    }

    /// Maximum nesting depth of first-order and counting quantifiers.
    pub fn quantifier_depth(&self) -> usize {
        let inner = self
            .children()
            .iter()
            .map(|c| c.quantifier_depth())
            .max()
            .unwrap_or(0);
        match self {
            Formula::Quant { .. } | Formula::Count { .. } => inner + 1,
            _ => inner,
        }
    }

    /// Variables occurring outside the scope of any binder for them.
    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free_vars(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free_vars<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
        let mut term = |t: &Term, bound: &Vec<&str>| {
            if let Term::Var(v) = t {
                if !bound.contains(&v.as_str()) {
                    out.insert(v.clone());
                }
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom { args, .. } => args.iter().for_each(|t| term(t, bound)),
            Formula::Eq(a, b) => {
                term(a, bound);
                term(b, bound);
            }
            Formula::Not(f) => f.collect_free_vars(bound, out),
            Formula::Binary { lhs, rhs, .. } => {
                lhs.collect_free_vars(bound, out);
                rhs.collect_free_vars(bound, out);
            }
            Formula::Quant { var, body, .. } | Formula::Count { var, body, .. } => {
                bound.push(var);
                body.collect_free_vars(bound, out);
                bound.pop();
            }
            Formula::RelQuant { body, .. } | Formula::GuardedQuant { body, .. } => {
                body.collect_free_vars(bound, out)
            }
        }
    }

    /// Relation symbols used outside the scope of a second-order binder
    /// for them (guards included).
    pub fn free_relations(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free_rels(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free_rels<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom { rel, .. } => {
                if !bound.contains(&rel.as_str()) {
                    out.insert(rel.clone());
                }
            }
            Formula::RelQuant { rel, body, .. } => {
                bound.push(rel);
                body.collect_free_rels(bound, out);
                bound.pop();
            }
            Formula::GuardedQuant {
                rel, guard, body, ..
            } => {
                if !bound.contains(&guard.as_str()) {
                    out.insert(guard.clone());
                }
                bound.push(rel);
                body.collect_free_rels(bound, out);
                bound.pop();
            }
            _ => {
                for c in self.children() {
                    c.collect_free_rels(bound, out);
                }
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_variable_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Atom { args, .. } => {
                for a in args {
                    if let Term::Var(v) = a {
                        out.insert(v.clone());
                    }
                }
            }
            Formula::Eq(a, b) => {
                for t in [a, b] {
                    if let Term::Var(v) = t {
                        out.insert(v.clone());
                    }
                }
            }
            Formula::Quant { var, .. } | Formula::Count { var, .. } => {
                out.insert(var.clone());
            }
            _ => {}
        });
        out
    }

    /// Every relation name occurring anywhere (atoms, binders, guards).
    pub fn all_relation_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Atom { rel, .. } => {
                out.insert(rel.clone());
            }
            Formula::RelQuant { rel, .. } => {
                out.insert(rel.clone());
            }
            Formula::GuardedQuant { rel, guard, .. } => {
                out.insert(rel.clone());
                out.insert(guard.clone());
            }
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Rebuilds the tree bottom-up, replacing every atom by `f(rel, args)`.
    /// Atoms whose relation is bound inside the formula are passed through
    /// `f` as well; callers decide by name.
    pub fn map_atoms(&self, f: &mut impl FnMut(&str, &[Term]) -> Option<Formula>) -> Formula {
        match self {
            Formula::Atom { rel, args } => f(rel, args).unwrap_or_else(|| self.clone()),
            Formula::True | Formula::False | Formula::Eq(..) => self.clone(),
            Formula::Not(g) => Formula::not(g.map_atoms(f)),
            Formula::Binary { op, lhs, rhs } => {
                Formula::binary(*op, lhs.map_atoms(f), rhs.map_atoms(f))
            }
            Formula::Quant { q, var, body } => Formula::quant(*q, var.clone(), body.map_atoms(f)),
            Formula::Count {
                residue,
                modulus,
                var,
                body,
            } => Formula::count(*residue, *modulus, var.clone(), body.map_atoms(f)),
            Formula::RelQuant {
                q,
                rel,
                arity,
                body,
            } => Formula::rel_quant(*q, rel.clone(), *arity, body.map_atoms(f)),
            Formula::GuardedQuant {
                q,
                rel,
                guard,
                body,
            } => Formula::guarded_quant(*q, rel.clone(), guard.clone(), body.map_atoms(f)),
        }
    }

    /// Top-level conjuncts, flattening nested `And` nodes left to right.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn go<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::Binary {
                    op: Connective::And,
                    lhs,
                    rhs,
                } => {
                    go(lhs, out);
                    go(rhs, out);
                }
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }

    /// Which logic the formula syntactically belongs to.
    pub fn logic_profile(&self) -> LogicProfile {
        let mut p = LogicProfile::default();
        self.visit(&mut |f| match f {
            Formula::Count { .. } => p.counting = true,
            Formula::RelQuant { arity, .. } => {
                p.max_so_arity = Some(p.max_so_arity.map_or(*arity, |a| a.max(*arity)))
            }
            Formula::GuardedQuant { .. } => p.guarded = true,
            _ => {}
        });
        p
    }
}

/// Syntactic features that decide between FOL, MSOL, CMSOL, GSOL and SOL.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LogicProfile {
    pub counting: bool,
    pub guarded: bool,
    /// Largest arity of an unguarded second-order quantifier, if any.
    pub max_so_arity: Option<usize>,
}

impl LogicProfile {
    pub fn name(&self) -> &'static str {
        match (self.max_so_arity, self.counting, self.guarded) {
            (Some(a), _, _) if a > 1 => "SOL",
            (_, _, true) => "GSOL",
            (None, false, false) => "FOL",
            (_, true, _) => "CMSOL",
            (Some(_), false, false) => "MSOL",
        }
    }

    /// True if every feature used here is also available in `other`.
    /// Nullary and unary second-order quantification both count as monadic.
    pub fn within(&self, other: &LogicProfile) -> bool {
        let so_ok = match (self.max_so_arity, other.max_so_arity) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a <= b.max(1),
        };
        so_ok && (!self.counting || other.counting) && (!self.guarded || other.guarded)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_variables_of_atom() {
        let f = Formula::atom("R", ["x", "y"]);
        let expect: BTreeSet<String> = ["x", "y"].iter().map(|s| s.to_string()).collect();
        assert_eq!(f.free_variables(), expect);
    }

    #[test]
    fn free_variables_under_binder() {
        let f = Formula::exists("x", Formula::atom("R", ["x", "y"]));
        let expect: BTreeSet<String> = ["y".to_string()].into_iter().collect();
        assert_eq!(f.free_variables(), expect);
    }

    #[test]
    fn shadowed_variable_free_outside() {
        let f = Formula::and(
            Formula::atom("U", ["x"]),
            Formula::exists("x", Formula::atom("U", ["x"])),
        );
        assert_eq!(f.free_variables().len(), 1);
    }

    #[test]
    fn free_relations_respect_binders() {
        let f = Formula::rel_quant(
            Quantifier::Exists,
            "S",
            1,
            Formula::forall(
                "x",
                Formula::implies(Formula::atom("S", ["x"]), Formula::atom("U", ["x"])),
            ),
        );
        let rels = f.free_relations();
        assert!(rels.contains("U"));
        assert!(!rels.contains("S"));
    }

    #[test]
    fn conjunct_flattening() {
        let f = Formula::and_all([
            Formula::True,
            Formula::False,
            Formula::atom("Z", Vec::<String>::new()),
        ]);
        assert_eq!(f.conjuncts().len(), 3);
    }

    #[test]
    fn logic_profiles() {
        let fo = Formula::forall("x", Formula::atom("U", ["x"]));
        assert_eq!(fo.logic_profile().name(), "FOL");
        let cm = Formula::count(0, 2, "x", Formula::atom("U", ["x"]));
        assert_eq!(cm.logic_profile().name(), "CMSOL");
        let so = Formula::rel_quant(Quantifier::Exists, "F", 2, Formula::True);
        assert_eq!(so.logic_profile().name(), "SOL");
        assert!(fo.logic_profile().within(&cm.logic_profile()));
        assert!(!cm.logic_profile().within(&fo.logic_profile()));
    }
}
