//! Structures, formula evaluation and model counting.
//!
//! Counting uses the hard-wired constant convention: a class with `k`
//! constants is counted over the universe `{1, ..., n + k}` with constant
//! `i` fixed to `n + i`. Only the relation symbols are varied.

mod count;
mod eval;
mod sink;
mod strategy;
mod structure;

pub use count::{
    count_models, count_models_mod, enumerate_models, CountMethod, CountOptions, CountResult,
};
pub use eval::{
    compile, evaluate, evaluate_with, CompileLimits, Compiled, Env, FullInterp, Interp,
    PartialInterp, Truth,
};
pub use sink::{CollectSink, ExactSink, ModSink, ModelSink};
pub use strategy::{
    strategies, Budget, Control, CountStrategy, Exhaustive, Pruned, SearchProblem, Shard,
};
pub use structure::{Assignment, Bits, Layout, Structure, StructureError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("relation {0} used with the wrong number of arguments")]
    ArityMismatch(String),
    #[error("constant a{0} is not declared")]
    ConstantOutOfRange(usize),
    #[error("counting modulus {0} is below 2")]
    BadModulus(u32),
    #[error(
        "second-order quantifier of arity {arity} over a universe of size {universe} \
         exceeds the limit of {limit} tuple cells"
    )]
    SecondOrderBudget {
        arity: usize,
        universe: usize,
        limit: u64,
    },
    #[error("universe of size {universe} cannot hold {constants} constants")]
    UniverseTooSmall { universe: usize, constants: usize },
    #[error("variable {name} is assigned element {element}, outside the universe")]
    ElementOutOfRange { name: String, element: usize },
    #[error("assigned relation {0} has a malformed tuple")]
    BadTuple(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("unknown counting strategy {0}")]
    UnknownStrategy(String),
    #[error("modulus must be at least 2")]
    BadModulus,
}

impl EngineError {
    /// True for resource-limit failures, as opposed to malformed input.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            EngineError::Budget(_) | EngineError::Eval(EvalError::SecondOrderBudget { .. })
        )
    }
}
