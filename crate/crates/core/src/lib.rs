//! Counting finite relational models of first-order and monadic
//! second-order sentences, eliminating hard-wired constants from such
//! sentences without changing their model counts, and analysing the
//! resulting count sequences modulo `m`.
//!
//! ```
//! use mcount_core::{builtins, engine};
//!
//! let eq = builtins::builtin_class("equivalence").unwrap();
//! let r = engine::count_models(&eq, 4, &Default::default()).unwrap();
//! assert_eq!(r.count, 15u32.into());
//! ```

pub mod builtins;
pub mod eliminate;
pub mod engine;
pub mod lab;
pub mod logic;
pub mod oracles;
pub mod recurrence;
pub mod registry;
pub mod text;

pub use logic::{ClassSpec, Formula, Term, Vocabulary};
