//! The s-expression text format shared by the CLI, tests and fixtures.
//!
//! ```text
//! (vocab (rel E 2) (consts 0))
//! (sentence (forall x (E x x)))
//! ```

mod parse;
mod print;

pub use parse::{parse_class_spec, parse_formula, parse_vocabulary, Pos, TextError};
pub use print::{print_class_spec, print_formula, print_vocabulary};
