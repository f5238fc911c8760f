//! Named class specifications, selectable as `name` or `name:p1,p2`.

use std::sync::OnceLock;

use crate::lab;
use crate::logic::{ClassSpec, Formula, Quantifier, Term, Vocabulary};
use crate::registry::{parse_keyed, Named, Registry};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuiltinError {
    #[error("unknown builtin class {0}")]
    Unknown(String),
    #[error("builtin {name} takes {expected} parameter(s), got {found}")]
    ParamCount {
        name: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("bad parameter for {name}: {reason}")]
    BadParam { name: &'static str, reason: String },
}

/// A parameterized family of class specifications.
pub trait BuiltinClass: Named + Send + Sync {
    fn param_count(&self) -> usize {
        0
    }

    /// `params.len()` has already been checked against [`Self::param_count`].
    fn build(&self, params: &[u64]) -> Result<ClassSpec, BuiltinError>;
}

fn e(x: &str, y: &str) -> Formula {
    Formula::atom("E", [x, y])
}

fn reflexive() -> Formula {
    Formula::forall("x", e("x", "x"))
}

fn irreflexive() -> Formula {
    Formula::forall("x", Formula::not(e("x", "x")))
}

fn symmetric() -> Formula {
    Formula::forall_all(&["x", "y"], Formula::implies(e("x", "y"), e("y", "x")))
}

fn antisymmetric() -> Formula {
    Formula::forall_all(
        &["x", "y"],
        Formula::implies(
            Formula::and(e("x", "y"), e("y", "x")),
            Formula::eq_vars("x", "y"),
        ),
    )
}

fn transitive() -> Formula {
    Formula::forall_all(
        &["x", "y", "z"],
        Formula::implies(Formula::and(e("x", "y"), e("y", "z")), e("x", "z")),
    )
}

fn equivalence() -> Formula {
    Formula::and_all([reflexive(), symmetric(), transitive()])
}

fn binary(consts: usize) -> Vocabulary {
    Vocabulary::from_pairs(&[("E", 2)], consts)
}

fn spec(vocab: Vocabulary, f: Formula) -> ClassSpec {
    ClassSpec::new(vocab, f).expect("builtin sentences are well-formed")
}

macro_rules! simple_builtin {
    ($ty:ident, $name:literal, $summary:literal, $body:expr) => {
        pub struct $ty;

        impl Named for $ty {
            fn name(&self) -> &'static str {
                $name
            }

            fn summary(&self) -> &'static str {
                $summary
            }
        }

        impl BuiltinClass for $ty {
            fn build(&self, _params: &[u64]) -> Result<ClassSpec, BuiltinError> {
                Ok($body)
            }
        }
    };
}

simple_builtin!(
    Equivalence,
    "equivalence",
    "equivalence relations (Bell numbers)",
    spec(binary(0), equivalence())
);
simple_builtin!(
    PartialOrder,
    "partialOrder",
    "reflexive antisymmetric transitive relations",
    spec(
        binary(0),
        Formula::and_all([reflexive(), antisymmetric(), transitive()])
    )
);
simple_builtin!(
    QuasiOrder,
    "quasiOrder",
    "reflexive transitive relations",
    spec(binary(0), Formula::and(reflexive(), transitive()))
);
simple_builtin!(
    Transitive,
    "transitive",
    "transitive relations",
    spec(binary(0), transitive())
);
simple_builtin!(
    EvenDegreeGraph,
    "evenDegreeGraph",
    "simple graphs in which every vertex has even degree",
    spec(
        binary(0),
        Formula::and_all([
            irreflexive(),
            symmetric(),
            Formula::forall("x", Formula::count(0, 2, "y", e("x", "y"))),
        ])
    )
);
simple_builtin!(
    EqualTwoClasses,
    "equalTwoClasses",
    "equivalence relations with exactly two classes of equal size",
    spec(binary(0), equal_two_classes())
);
simple_builtin!(
    PhiM,
    "phiM",
    "ternary relations encoding full iterated matchings",
    lab::build_phi_m()
);

fn equal_two_classes() -> Formula {
    let f = |x: &str, y: &str| Formula::atom("F", [x, y]);
    let at_least_two = Formula::exists_all(&["x", "y"], Formula::not(e("x", "y")));
    let at_most_two = Formula::forall_all(
        &["x", "y", "z"],
        Formula::or_all([e("x", "y"), e("y", "z"), e("x", "z")]),
    );
    // F is an injective total function mapping every element across the
    // partition, which forces the two classes to have equal size.
    let bijection = Formula::and_all([
        Formula::forall("x", Formula::exists("y", f("x", "y"))),
        Formula::forall_all(
            &["x", "y", "z"],
            Formula::implies(
                Formula::and(f("x", "y"), f("x", "z")),
                Formula::eq_vars("y", "z"),
            ),
        ),
        Formula::forall_all(
            &["x", "y", "z"],
            Formula::implies(
                Formula::and(f("x", "z"), f("y", "z")),
                Formula::eq_vars("x", "y"),
            ),
        ),
        Formula::forall_all(
            &["x", "y"],
            Formula::implies(f("x", "y"), Formula::not(e("x", "y"))),
        ),
    ]);
    Formula::and_all([
        equivalence(),
        at_least_two,
        at_most_two,
        Formula::rel_quant(Quantifier::Exists, "F", 2, bijection),
    ])
}

/// Equivalence relations in which the `r` constants lie in pairwise
/// distinct classes.
pub struct RestrictedBell;

impl Named for RestrictedBell {
    fn name(&self) -> &'static str {
        "restrictedBell"
    }

    fn summary(&self) -> &'static str {
        "equivalence relations separating r hard-wired constants"
    }
}

impl BuiltinClass for RestrictedBell {
    fn param_count(&self) -> usize {
        1
    }

    fn build(&self, params: &[u64]) -> Result<ClassSpec, BuiltinError> {
        let r = params[0] as usize;
        if r == 0 || r > 8 {
            return Err(BuiltinError::BadParam {
                name: "restrictedBell",
                reason: format!("r must be in 1..=8, got {r}"),
            });
        }
        let mut parts = vec![equivalence()];
        for i in 1..=r {
            for j in i + 1..=r {
                parts.push(Formula::not(Formula::atom_terms(
                    "E",
                    vec![Term::Const(i), Term::Const(j)],
                )));
            }
        }
        Ok(spec(binary(r), Formula::and_all(parts)))
    }
}

/// The mod-`p` variant of `phiM`.
pub struct PhiMp;

impl Named for PhiMp {
    fn name(&self) -> &'static str {
        "phiMp"
    }

    fn summary(&self) -> &'static str {
        "ternary relations encoding full iterated p-matchings"
    }
}

impl BuiltinClass for PhiMp {
    fn param_count(&self) -> usize {
        1
    }

    fn build(&self, params: &[u64]) -> Result<ClassSpec, BuiltinError> {
        lab::build_phi_mp(params[0]).map_err(|e| BuiltinError::BadParam {
            name: "phiMp",
            reason: e.to_string(),
        })
    }
}

pub fn builtins() -> &'static Registry<dyn BuiltinClass> {
    static REG: OnceLock<Registry<dyn BuiltinClass>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn BuiltinClass> = Registry::new();
        r.register(Box::new(Equivalence))
            .register(Box::new(PartialOrder))
            .register(Box::new(QuasiOrder))
            .register(Box::new(Transitive))
            .register(Box::new(RestrictedBell))
            .register(Box::new(EvenDegreeGraph))
            .register(Box::new(EqualTwoClasses))
            .register(Box::new(PhiM))
            .register(Box::new(PhiMp));
        r
    })
}

/// Looks up `name` or `name:params` in [`builtins`].
pub fn builtin_class(text: &str) -> Result<ClassSpec, BuiltinError> {
    let (key, params) = parse_keyed(text).map_err(BuiltinError::Unknown)?;
    let b = builtins()
        .get(key)
        .ok_or_else(|| BuiltinError::Unknown(key.to_string()))?;
    if params.len() != b.param_count() {
        return Err(BuiltinError::ParamCount {
            name: b.name(),
            expected: b.param_count(),
            found: params.len(),
        });
    }
    b.build(&params)
}
