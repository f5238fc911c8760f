use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::logic::{Connective, Formula, Quantifier, Term, Vocabulary};

use super::ElimError;

/// Which of the three constructions to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Mode {
    /// Split on the unary and binary facts about the removed constant,
    /// producing one class per combination.
    Sum,
    /// Record those facts in nullary relations; one output class.
    ManyOne,
    /// Replace each relation by the family indexed by the argument
    /// positions holding the removed constant.
    HigherArity,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Sum => "sum",
            Mode::ManyOne => "many-one",
            Mode::HigherArity => "higher-arity",
        }
    }
}

/// The correspondence context of one transformation step.
///
/// `x` holds the free variables that stand for the removed constant.
/// `unary` and `binary` name the relations `U` with `U(a)` and `R` with
/// `R(a, a)`; they are only read in [`Mode::Sum`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Context {
    pub x: BTreeSet<String>,
    pub unary: BTreeSet<String>,
    pub binary: BTreeSet<String>,
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_x(mut self, v: &str) -> Self {
        self.x.insert(v.to_string());
        self
    }

    pub fn with_unary(mut self, u: &str) -> Self {
        self.unary.insert(u.to_string());
        self
    }

    pub fn with_binary(mut self, r: &str) -> Self {
        self.binary.insert(r.to_string());
        self
    }
}

/// Role of a generated relation relative to its source relation `R`
/// and the removed constant `a`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "role", rename_all = "camelCase")]
pub enum Role {
    /// `I(x) <-> R(x, a)`.
    In,
    /// `O(x) <-> R(a, x)`.
    Out,
    /// `S() <-> U(a)`.
    SelfLoop,
    /// `D() <-> R(a, a)`.
    Diagonal,
    /// `R_A(y) <-> R(y with a at the listed 1-based positions)`.
    Positions { positions: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub source: String,
    #[serde(flatten)]
    pub role: Role,
}

/// Generated names for one relation symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Derived {
    Keep,
    Unary {
        s: Option<String>,
    },
    Binary {
        i: String,
        o: String,
        d: Option<String>,
    },
    /// Nonempty position sets, in output order, with their names.
    Family(Vec<(Vec<usize>, String)>),
}

/// Nonempty subsets of `1..=arity`, smallest first, then lexicographic.
pub(crate) fn position_sets(arity: usize) -> Vec<Vec<usize>> {
    let mut sets: Vec<Vec<usize>> = (1u32..(1 << arity))
        .map(|m| (1..=arity).filter(|i| m >> (i - 1) & 1 == 1).collect())
        .collect();
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    sets
}

/// Conventional name of the family member of `base` for position set `a`.
pub fn family_name(base: &str, positions: &[usize]) -> String {
    let parts: Vec<String> = positions.iter().map(|p| p.to_string()).collect();
    format!("{base}#{}", parts.join("."))
}

/// Names for every relation symbol of a formula and its vocabulary.
#[derive(Debug, Clone)]
pub(crate) struct Plan {
    pub mode: Mode,
    /// Index of the constant being removed.
    pub k: usize,
    pub arity: HashMap<String, usize>,
    pub derived: HashMap<String, Derived>,
    pub provenance: BTreeMap<String, Provenance>,
}

struct Names {
    used: BTreeSet<String>,
}

impl Names {
    fn fresh(&mut self, wanted: String) -> String {
        let mut name = wanted;
        while self.used.contains(&name) {
            name.push('\'');
        }
        self.used.insert(name.clone());
        name
    }
}

impl Plan {
    pub fn new(mode: Mode, vocab: &Vocabulary, f: &Formula) -> Result<Self, ElimError> {
        let mut used: BTreeSet<String> = vocab.relations.iter().map(|r| r.name.clone()).collect();
        used.extend(f.all_relation_names());
        let mut plan = Plan {
            mode,
            k: vocab.num_constants,
            arity: HashMap::new(),
            derived: HashMap::new(),
            provenance: BTreeMap::new(),
        };
        let mut names = Names { used };
        for r in &vocab.relations {
            plan.add(&mut names, &r.name, r.arity, true)?;
        }
        // Pre-order visit: a guard is always planned before the binders
        // it guards.
        let mut bound: Vec<(String, Result<usize, String>)> = Vec::new();
        f.visit(&mut |g| match g {
            Formula::RelQuant { rel, arity, .. } => bound.push((rel.clone(), Ok(*arity))),
            Formula::GuardedQuant { rel, guard, .. } => {
                bound.push((rel.clone(), Err(guard.clone())))
            }
            _ => {}
        });
        for (rel, kind) in bound {
            let arity = match kind {
                Ok(a) => a,
                Err(guard) => *plan
                    .arity
                    .get(&guard)
                    .ok_or_else(|| ElimError::Unsupported(format!("unknown guard {guard}")))?,
            };
            if !plan.arity.contains_key(&rel) {
                plan.add(&mut names, &rel, arity, false)?;
            }
        }
        Ok(plan)
    }

    fn add(
        &mut self,
        names: &mut Names,
        rel: &str,
        arity: usize,
        record: bool,
    ) -> Result<(), ElimError> {
        self.arity.insert(rel.to_string(), arity);
        let mut prov = |name: &String, role: Role| {
            if record {
                self.provenance.insert(
                    name.clone(),
                    Provenance {
                        source: rel.to_string(),
                        role,
                    },
                );
            }
        };
        let d = match (self.mode, arity) {
            (_, 0) => Derived::Keep,
            (Mode::Sum, 1) => Derived::Unary { s: None },
            (Mode::ManyOne, 1) => {
                let s = names.fresh(format!("{rel}#S"));
                prov(&s, Role::SelfLoop);
                Derived::Unary { s: Some(s) }
            }
            (Mode::Sum | Mode::ManyOne, 2) => {
                let i = names.fresh(format!("{rel}#I"));
                let o = names.fresh(format!("{rel}#O"));
                prov(&i, Role::In);
                prov(&o, Role::Out);
                let d = (self.mode == Mode::ManyOne).then(|| {
                    let d = names.fresh(format!("{rel}#D"));
                    prov(&d, Role::Diagonal);
                    d
                });
                Derived::Binary { i, o, d }
            }
            (Mode::Sum | Mode::ManyOne, a) => {
                return Err(ElimError::Unsupported(format!(
                    "relation {rel} has arity {a}; {} elimination handles arity at most 2",
                    self.mode.name()
                )))
            }
            (Mode::HigherArity, a) => Derived::Family(
                position_sets(a)
                    .into_iter()
                    .map(|ps| {
                        let name = names.fresh(family_name(rel, &ps));
                        prov(
                            &name,
                            Role::Positions {
                                positions: ps.clone(),
                            },
                        );
                        (ps, name)
                    })
                    .collect(),
            ),
        };
        self.derived.insert(rel.to_string(), d);
        Ok(())
    }

    /// Output vocabulary for the relation symbols of `vocab`.
    pub fn output_vocab(&self, vocab: &Vocabulary) -> Vocabulary {
        let mut out = Vocabulary::new(Vec::new(), vocab.num_constants - 1);
        let push = |out: &mut Vocabulary, n: &str, a: usize| {
            out.relations.push(crate::logic::RelationSymbol::new(n, a))
        };
        match self.mode {
            Mode::HigherArity => {
                for r in &vocab.relations {
                    push(&mut out, &r.name, r.arity);
                    if let Some(Derived::Family(fam)) = self.derived.get(&r.name) {
                        for (ps, n) in fam {
                            push(&mut out, n, r.arity - ps.len());
                        }
                    }
                }
            }
            Mode::Sum | Mode::ManyOne => {
                out.relations = vocab.relations.clone();
                for r in &vocab.relations {
                    if let Some(Derived::Unary { s: Some(s) }) = self.derived.get(&r.name) {
                        push(&mut out, s, 0);
                    }
                }
                for r in &vocab.relations {
                    if let Some(Derived::Binary { i, o, d }) = self.derived.get(&r.name) {
                        push(&mut out, i, 1);
                        push(&mut out, o, 1);
                        if let Some(d) = d {
                            push(&mut out, d, 0);
                        }
                    }
                }
            }
        }
        out
    }
}

fn and(a: Formula, b: Formula) -> Formula {
    match (a, b) {
        (Formula::False, _) | (_, Formula::False) => Formula::False,
        (Formula::True, g) | (g, Formula::True) => g,
        (a, b) => Formula::and(a, b),
    }
}

fn or(a: Formula, b: Formula) -> Formula {
    match (a, b) {
        (Formula::True, _) | (_, Formula::True) => Formula::True,
        (Formula::False, g) | (g, Formula::False) => g,
        (a, b) => Formula::or(a, b),
    }
}

fn not(a: Formula) -> Formula {
    match a {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        g => Formula::not(g),
    }
}

fn connect(op: Connective, a: Formula, b: Formula) -> Formula {
    match op {
        Connective::And => and(a, b),
        Connective::Or => or(a, b),
        Connective::Implies => match (a, b) {
            (Formula::False, _) | (_, Formula::True) => Formula::True,
            (Formula::True, g) => g,
            (g, Formula::False) => not(g),
            (a, b) => Formula::implies(a, b),
        },
        Connective::Iff => match (a, b) {
            (Formula::True, g) | (g, Formula::True) => g,
            (Formula::False, g) | (g, Formula::False) => not(g),
            (a, b) => Formula::iff(a, b),
        },
    }
}

fn join(q: Quantifier, a: Formula, b: Formula) -> Formula {
    match q {
        Quantifier::Exists => or(a, b),
        Quantifier::Forall => and(a, b),
    }
}

/// Second-order binders over a body that no longer depends on them.
fn so_bind(binders: &[(Quantifier, String, Result<usize, String>)], body: Formula) -> Formula {
    if matches!(body, Formula::True | Formula::False) {
        return body;
    }
    binders
        .iter()
        .rev()
        .fold(body, |acc, (q, rel, kind)| match kind {
            Ok(arity) => Formula::rel_quant(*q, rel.clone(), *arity, acc),
            Err(guard) => Formula::guarded_quant(*q, rel.clone(), guard.clone(), acc),
        })
}

type Key = (usize, Vec<String>, Vec<String>, Vec<String>);

pub(crate) struct Transformer<'a> {
    plan: &'a Plan,
    memo: HashMap<Key, Formula>,
    free: HashMap<usize, BTreeSet<String>>,
}

impl<'a> Transformer<'a> {
    pub fn new(plan: &'a Plan) -> Self {
        Self {
            plan,
            memo: HashMap::new(),
            free: HashMap::new(),
        }
    }

    fn free_vars(&mut self, f: &Formula) -> &BTreeSet<String> {
        let key = f as *const Formula as usize;
        self.free.entry(key).or_insert_with(|| f.free_variables())
    }

    fn is_a(&self, t: &Term, ctx: &Context) -> bool {
        match t {
            Term::Const(i) => *i == self.plan.k,
            Term::Var(v) => ctx.x.contains(v),
        }
    }

    pub fn run(&mut self, f: &Formula, ctx: &Context) -> Result<Formula, ElimError> {
        let free = self.free_vars(f).clone();
        let key: Key = (
            f as *const Formula as usize,
            ctx.x.intersection(&free).cloned().collect(),
            ctx.unary.iter().cloned().collect(),
            ctx.binary.iter().cloned().collect(),
        );
        if let Some(done) = self.memo.get(&key) {
            return Ok(done.clone());
        }
        let out = self.step(f, ctx)?;
        self.memo.insert(key, out.clone());
        Ok(out)
    }

    fn atom(&self, rel: &str, args: &[Term], ctx: &Context) -> Result<Formula, ElimError> {
        let hits: Vec<bool> = args.iter().map(|t| self.is_a(t, ctx)).collect();
        if !hits.contains(&true) {
            return Ok(Formula::atom_terms(rel, args.to_vec()));
        }
        let derived = self
            .plan
            .derived
            .get(rel)
            .ok_or_else(|| ElimError::Unsupported(format!("unknown relation {rel}")))?;
        let bool_of = |b: bool| if b { Formula::True } else { Formula::False };
        Ok(match derived {
            Derived::Keep => Formula::atom_terms(rel, args.to_vec()),
            Derived::Unary { s: None } => bool_of(ctx.unary.contains(rel)),
            Derived::Unary { s: Some(s) } => Formula::atom_terms(s, vec![]),
            Derived::Binary { i, o, d } => match (hits[0], hits[1]) {
                (true, true) => match d {
                    Some(d) => Formula::atom_terms(d, vec![]),
                    None => bool_of(ctx.binary.contains(rel)),
                },
                (true, false) => Formula::atom_terms(o, vec![args[1].clone()]),
                (false, true) => Formula::atom_terms(i, vec![args[0].clone()]),
                (false, false) => unreachable!(),
            },
            Derived::Family(fam) => {
                let ps: Vec<usize> = (1..=args.len()).filter(|p| hits[p - 1]).collect();
                let name = &fam
                    .iter()
                    .find(|(q, _)| *q == ps)
                    .expect("all subsets named")
                    .1;
                let rest = args
                    .iter()
                    .zip(&hits)
                    .filter(|(_, h)| !**h)
                    .map(|(t, _)| t.clone())
                    .collect();
                Formula::atom_terms(name, rest)
            }
        })
    }

    fn step(&mut self, f: &Formula, ctx: &Context) -> Result<Formula, ElimError> {
        Ok(match f {
            Formula::True | Formula::False => f.clone(),
            Formula::Atom { rel, args } => self.atom(rel, args, ctx)?,
            Formula::Eq(s, t) => match (s, t) {
                (Term::Const(i), Term::Const(j)) => {
                    if i == j {
                        Formula::True
                    } else {
                        Formula::False
                    }
                }
                _ => match (self.is_a(s, ctx), self.is_a(t, ctx)) {
                    (true, true) => Formula::True,
                    (false, false) => f.clone(),
                    _ => Formula::False,
                },
            },
            Formula::Not(g) => not(self.run(g, ctx)?),
            Formula::Binary { op, lhs, rhs } => {
                let l = self.run(lhs, ctx)?;
                let r = self.run(rhs, ctx)?;
                connect(*op, l, r)
            }
            Formula::Quant { q, var, body } => {
                let inside = self.run(body, ctx)?;
                let at_a = self.run(body, &ctx.clone().with_x(var))?;
                join(*q, Formula::quant(*q, var.clone(), inside), at_a)
            }
            Formula::Count {
                residue,
                modulus,
                var,
                body,
            } => {
                let inside = self.run(body, ctx)?;
                let at_a = self.run(body, &ctx.clone().with_x(var))?;
                let m = *modulus;
                let r = residue % m;
                let shifted = Formula::count((r + m - 1) % m, m, var.clone(), inside.clone());
                let plain = Formula::count(r, m, var.clone(), inside);
                or(and(shifted, at_a.clone()), and(plain, not(at_a)))
            }
            Formula::RelQuant {
                q,
                rel,
                arity,
                body,
            } => self.so_quant(*q, rel, Ok(*arity), body, ctx)?,
            Formula::GuardedQuant {
                q,
                rel,
                guard,
                body,
            } => self.so_quant(*q, rel, Err(guard.clone()), body, ctx)?,
        })
    }

    /// `kind` is the arity of an unguarded binder or the guard's name.
    fn so_quant(
        &mut self,
        q: Quantifier,
        rel: &str,
        kind: Result<usize, String>,
        body: &Formula,
        ctx: &Context,
    ) -> Result<Formula, ElimError> {
        let derived = self.plan.derived.get(rel).cloned().expect("binder planned");
        let guard_derived = kind
            .as_ref()
            .err()
            .map(|g| self.plan.derived.get(g).cloned().expect("guard planned"));
        let arity = self.plan.arity[rel];
        // Companion binders: (generated name, its guard if any, arity).
        let mut binders: Vec<(Quantifier, String, Result<usize, String>)> =
            vec![(q, rel.to_string(), kind.clone())];
        let mut companion = |name: &str, guard_of: Option<&str>, a: usize| {
            let k = match guard_of {
                Some(g) => Err(g.to_string()),
                None => Ok(a),
            };
            binders.push((q, name.to_string(), k));
        };
        let mut split = false;
        match (&derived, &guard_derived) {
            (Derived::Keep, _) => {}
            (Derived::Unary { s: None }, g) => {
                split = match (g, &kind) {
                    (None, _) => true,
                    (Some(_), Err(gname)) => ctx.unary.contains(gname),
                    _ => unreachable!(),
                };
            }
            (Derived::Unary { s: Some(s) }, g) => {
                let gs = match g {
                    Some(Derived::Unary { s: Some(gs) }) => Some(gs.as_str()),
                    _ => None,
                };
                companion(s, gs, 0);
            }
            (Derived::Binary { i, o, d }, g) => {
                let (gi, go, gd) = match g {
                    Some(Derived::Binary { i, o, d }) => {
                        (Some(i.as_str()), Some(o.as_str()), d.as_deref())
                    }
                    _ => (None, None, None),
                };
                companion(i, gi, 1);
                companion(o, go, 1);
                match d {
                    Some(d) => companion(d, gd, 0),
                    None => {
                        split = match (g, &kind) {
                            (None, _) => true,
                            (Some(_), Err(gname)) => ctx.binary.contains(gname),
                            _ => unreachable!(),
                        }
                    }
                }
            }
            (Derived::Family(fam), g) => {
                for (ps, name) in fam {
                    let gname = match g {
                        Some(Derived::Family(gf)) => Some(
                            gf.iter()
                                .find(|(q, _)| q == ps)
                                .expect("same arity")
                                .1
                                .as_str(),
                        ),
                        _ => None,
                    };
                    companion(name, gname, arity - ps.len());
                }
            }
        }
        let without = self.run(body, ctx)?;
        let body_out = if split {
            let mut with = ctx.clone();
            if arity == 1 {
                with.unary.insert(rel.to_string());
            } else {
                with.binary.insert(rel.to_string());
            }
            let at_a = self.run(body, &with)?;
            // The binder is repeated in both branches and renamed apart
            // by the hygiene pass that follows the transformation.
            return Ok(join(q, so_bind(&binders, without), so_bind(&binders, at_a)));
        } else {
            without
        };
        Ok(so_bind(&binders, body_out))
    }
}
