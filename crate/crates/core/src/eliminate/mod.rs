//! Removal of hard-wired constants with exact preservation of model counts.
//!
//! Removing the last constant `a` from a class over the universe
//! `{1, ..., N}` yields classes over `{1, ..., N - 1}` whose models are in
//! bijection with the original models. Atoms mentioning `a` are rewritten
//! into auxiliary relations (or truth values), and every quantifier gets
//! an extra branch for the value `a`.
//!
//! Three constructions share one transformer:
//!
//! * [`Mode::Sum`] splits the class by which unary relations contain `a`
//!   and which binary relations contain `(a, a)`.
//! * [`Mode::ManyOne`] stores those facts in nullary relations instead.
//! * [`Mode::HigherArity`] handles any arity by replacing each relation
//!   with a family indexed by the argument positions that hold `a`.

mod transform;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Serialize;

use crate::engine::Structure;
use crate::logic::{normalize_hygiene_with, ClassSpec, SpecError, Vocabulary};
use crate::registry::{Named, Registry};

pub(crate) use transform::position_sets;
pub use transform::{family_name, Context, Mode, Provenance, Role};

use transform::{Derived, Plan, Transformer};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ElimError {
    #[error("the class has no hard-wired constant to remove")]
    NoConstant,
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("transformation produced an invalid class: {0}")]
    Invalid(SpecError),
}

/// Outcome of removing one constant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EliminationResult {
    pub mode: Mode,
    #[serde(skip)]
    pub input: ClassSpec,
    /// One class per label in [`Mode::Sum`], otherwise a single class.
    #[serde(skip)]
    pub outputs: Vec<ClassSpec>,
    /// For each output of [`Mode::Sum`], the unary relations containing
    /// the constant and the binary relations containing it twice.
    pub labels: Vec<SumLabel>,
    pub provenance: BTreeMap<String, Provenance>,
    #[serde(skip)]
    derived: Vec<(String, Derived)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SumLabel {
    pub unary: Vec<String>,
    pub binary: Vec<String>,
}

impl EliminationResult {
    fn identity(mode: Mode, spec: &ClassSpec) -> Self {
        Self {
            mode,
            input: spec.clone(),
            outputs: vec![spec.clone()],
            labels: Vec::new(),
            provenance: BTreeMap::new(),
            derived: Vec::new(),
        }
    }

    /// The structure-level correspondence: maps a structure over the input
    /// vocabulary (universe size at least 1) to the index of the output
    /// class and the corresponding structure over one element fewer.
    pub fn correspond(&self, m: &Structure) -> (usize, Structure) {
        assert_eq!(
            m.vocab(),
            self.input.vocab(),
            "structure over the input vocabulary"
        );
        if self.derived.is_empty() && self.input.vocab().num_constants == 0 {
            return (0, m.clone());
        }
        let n = m.universe();
        assert!(n >= 1);
        let a = n;
        let mut index = 0usize;
        if self.mode == Mode::Sum {
            let (un, bin) = sum_relations(self.input.vocab());
            for (bit, u) in un.iter().enumerate() {
                if m.holds(u, &[a]).expect("unary relation") {
                    index |= 1 << bit;
                }
            }
            for (bit, r) in bin.iter().enumerate() {
                if m.holds(r, &[a, a]).expect("binary relation") {
                    index |= 1 << (un.len() + bit);
                }
            }
        }
        let out_vocab = self.outputs[index].vocab();
        let mut out = Structure::empty(out_vocab, n - 1).expect("room for remaining constants");
        let holds = |rel: &str, t: &[usize]| m.holds(rel, t).expect("tuple in range");
        for r in &self.input.vocab().relations {
            // The source relation restricted to the smaller universe.
            for t in tuples(n - 1, r.arity) {
                if holds(&r.name, &t) {
                    out.set(&r.name, &t, true).expect("kept relation");
                }
            }
            let derived = &self
                .derived
                .iter()
                .find(|(s, _)| *s == r.name)
                .expect("planned")
                .1;
            match derived {
                Derived::Keep | Derived::Unary { s: None } => {}
                Derived::Unary { s: Some(s) } => {
                    out.set(s, &[], holds(&r.name, &[a])).unwrap();
                }
                Derived::Binary { i, o, d } => {
                    for x in 1..n {
                        out.set(i, &[x], holds(&r.name, &[x, a])).unwrap();
                        out.set(o, &[x], holds(&r.name, &[a, x])).unwrap();
                    }
                    if let Some(d) = d {
                        out.set(d, &[], holds(&r.name, &[a, a])).unwrap();
                    }
                }
                Derived::Family(fam) => {
                    for (ps, name) in fam {
                        for t in tuples(n - 1, r.arity - ps.len()) {
                            let mut full = Vec::with_capacity(r.arity);
                            let mut rest = t.iter();
                            for p in 1..=r.arity {
                                if ps.contains(&p) {
                                    full.push(a);
                                } else {
                                    full.push(*rest.next().unwrap());
                                }
                            }
                            if holds(&r.name, &full) {
                                out.set(name, &t, true).unwrap();
                            }
                        }
                    }
                }
            }
        }
        (index, out)
    }
}

/// All tuples over `{1, ..., n}` of the given length, lexicographic.
fn tuples(n: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t: Vec<usize>| {
                (1..=n).map(move |e| {
                    let mut t = t.clone();
                    t.push(e);
                    t
                })
            })
            .collect();
    }
    out
}

fn sum_relations(v: &Vocabulary) -> (Vec<String>, Vec<String>) {
    let pick = |a| {
        v.relations
            .iter()
            .filter(|r| r.arity == a)
            .map(|r| r.name.clone())
            .collect()
    };
    (pick(1), pick(2))
}

/// Rewrites a single formula under an explicit context. `vocab` supplies
/// the constant being removed (its highest index) and the relation
/// symbols; the formula should be hygienic.
pub fn transform_formula(
    f: &crate::Formula,
    vocab: &Vocabulary,
    ctx: &Context,
    mode: Mode,
) -> Result<crate::Formula, ElimError> {
    if vocab.num_constants == 0 {
        return Err(ElimError::NoConstant);
    }
    let plan = Plan::new(mode, vocab, f)?;
    Transformer::new(&plan).run(f, ctx)
}

fn eliminate(spec: &ClassSpec, mode: Mode) -> Result<EliminationResult, ElimError> {
    let vocab = spec.vocab();
    if vocab.num_constants == 0 {
        return Err(ElimError::NoConstant);
    }
    let spec = spec.hygienic();
    let plan = Plan::new(mode, vocab, spec.sentence())?;
    let out_vocab = plan.output_vocab(vocab);
    let reserved = out_vocab.relations.iter().map(|r| r.name.clone()).collect();
    let mut tx = Transformer::new(&plan);
    let mut contexts = vec![(Context::new(), SumLabel::default())];
    if mode == Mode::Sum {
        let (un, bin) = sum_relations(vocab);
        let width = un.len() + bin.len();
        if width > 16 {
            return Err(ElimError::Unsupported(format!(
                "{width} unary and binary relations give too many sum-mode outputs"
            )));
        }
        contexts = (0..1usize << width)
            .map(|mask| {
                let mut ctx = Context::new();
                let mut label = SumLabel::default();
                for (bit, u) in un.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        ctx.unary.insert(u.clone());
                        label.unary.push(u.clone());
                    }
                }
                for (bit, r) in bin.iter().enumerate() {
                    if mask >> (un.len() + bit) & 1 == 1 {
                        ctx.binary.insert(r.clone());
                        label.binary.push(r.clone());
                    }
                }
                (ctx, label)
            })
            .collect();
    }
    let mut outputs = Vec::with_capacity(contexts.len());
    let mut labels = Vec::new();
    for (ctx, label) in contexts {
        let f = tx.run(spec.sentence(), &ctx)?;
        let f = normalize_hygiene_with(&f, &reserved);
        outputs.push(ClassSpec::new(out_vocab.clone(), f).map_err(ElimError::Invalid)?);
        if mode == Mode::Sum {
            labels.push(label);
        }
    }
    let derived = vocab
        .relations
        .iter()
        .map(|r| (r.name.clone(), plan.derived[&r.name].clone()))
        .collect();
    Ok(EliminationResult {
        mode,
        input: spec,
        outputs,
        labels,
        provenance: plan.provenance,
        derived,
    })
}

/// Removes the last constant by splitting into `2^(#unary + #binary)`
/// classes whose counts add up to the input's.
///
/// Arity is limited to 2; nullary relations are carried over unchanged.
pub fn eliminate_one_sum(spec: &ClassSpec) -> Result<Vec<ClassSpec>, ElimError> {
    eliminate(spec, Mode::Sum).map(|r| r.outputs)
}

/// Removes the last constant, producing one class with the same count
/// function. A class without constants is returned unchanged.
pub fn eliminate_many_one(spec: &ClassSpec) -> Result<ClassSpec, ElimError> {
    if spec.vocab().num_constants == 0 {
        return Ok(spec.clone());
    }
    eliminate(spec, Mode::ManyOne).map(|mut r| r.outputs.remove(0))
}

/// Removes the last constant for vocabularies of any arity. A class
/// without constants is returned unchanged.
pub fn eliminate_higher_arity(spec: &ClassSpec) -> Result<ClassSpec, ElimError> {
    if spec.vocab().num_constants == 0 {
        return Ok(spec.clone());
    }
    eliminate(spec, Mode::HigherArity).map(|mut r| r.outputs.remove(0))
}

/// Removes every constant, one at a time from the highest index down.
/// Sum mode multiplies the number of classes at each step.
pub fn eliminate_all(spec: &ClassSpec, mode: Mode) -> Result<Vec<ClassSpec>, ElimError> {
    let mut current = vec![spec.clone()];
    while current[0].vocab().num_constants > 0 {
        let mut next = Vec::new();
        for s in &current {
            next.extend(eliminate(s, mode)?.outputs);
        }
        current = next;
    }
    Ok(current)
}

/// Replaces each nullary relation `Z` by a fresh unary relation that is
/// constrained to be empty or full, reading `Z()` as "some element is in
/// it". Counts agree on every nonempty universe.
pub fn simulate_nullary(spec: &ClassSpec) -> ClassSpec {
    use crate::logic::{Formula, RelationSymbol};
    let vocab = spec.vocab();
    if vocab.relations.iter().all(|r| r.arity > 0) {
        return spec.clone();
    }
    let mut used: std::collections::BTreeSet<String> =
        vocab.relations.iter().map(|r| r.name.clone()).collect();
    used.extend(spec.sentence().all_relation_names());
    let mut renamed = BTreeMap::new();
    let mut relations = Vec::new();
    for r in &vocab.relations {
        if r.arity == 0 {
            let mut name = format!("{}#U", r.name);
            while used.contains(&name) {
                name.push('\'');
            }
            used.insert(name.clone());
            renamed.insert(r.name.clone(), name.clone());
            relations.push(RelationSymbol::new(name, 1));
        } else {
            relations.push(r.clone());
        }
    }
    let vars = spec.sentence().all_variable_names();
    let fresh = |base: &str| {
        let mut v = base.to_string();
        while vars.contains(&v) {
            v.push('_');
        }
        v
    };
    let (x, y) = (fresh("x"), fresh("y"));
    let body = spec.sentence().map_atoms(&mut |rel, args| {
        renamed
            .get(rel)
            .filter(|_| args.is_empty())
            .map(|u| Formula::exists(x.clone(), Formula::atom(u.clone(), [x.clone()])))
    });
    let constancy = renamed.values().map(|u| {
        Formula::forall_all(
            &[x.as_str(), y.as_str()],
            Formula::iff(
                Formula::atom(u.clone(), [x.clone()]),
                Formula::atom(u.clone(), [y.clone()]),
            ),
        )
    });
    let sentence = Formula::and_all(std::iter::once(body).chain(constancy));
    ClassSpec::new(Vocabulary::new(relations, vocab.num_constants), sentence)
        .expect("simulation keeps the class well-formed")
}

/// A constant-elimination construction.
pub trait Eliminator: Named + Send + Sync {
    fn mode(&self) -> Mode;

    /// Removes the highest-indexed constant of `spec`.
    fn eliminate(&self, spec: &ClassSpec) -> Result<EliminationResult, ElimError>;
}

macro_rules! eliminator {
    ($ty:ident, $mode:expr, $name:literal, $summary:literal) => {
        pub struct $ty;

        impl Named for $ty {
            fn name(&self) -> &'static str {
                $name
            }

            fn summary(&self) -> &'static str {
                $summary
            }
        }

        impl Eliminator for $ty {
            fn mode(&self) -> Mode {
                $mode
            }

            fn eliminate(&self, spec: &ClassSpec) -> Result<EliminationResult, ElimError> {
                if spec.vocab().num_constants == 0 && $mode != Mode::Sum {
                    return Ok(EliminationResult::identity($mode, spec));
                }
                eliminate(spec, $mode)
            }
        }
    };
}

eliminator!(
    SumElimination,
    Mode::Sum,
    "sum",
    "one class per unary/binary fact about the constant"
);
eliminator!(
    ManyOneElimination,
    Mode::ManyOne,
    "many-one",
    "facts about the constant kept in nullary relations"
);
eliminator!(
    HigherArityElimination,
    Mode::HigherArity,
    "higher-arity",
    "each relation replaced by its family over constant positions"
);

pub fn eliminators() -> &'static Registry<dyn Eliminator> {
    static REG: OnceLock<Registry<dyn Eliminator>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn Eliminator> = Registry::new();
        r.register(Box::new(SumElimination))
            .register(Box::new(ManyOneElimination))
            .register(Box::new(HigherArityElimination));
        r
    })
}
