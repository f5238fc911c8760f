//! Vocabularies, formula trees, validation and binder hygiene.

mod formula;
mod hygiene;
mod validate;
mod vocab;

use std::collections::BTreeSet;
use std::fmt;

pub use formula::{Connective, Formula, LogicProfile, Quantifier, Term};
pub use hygiene::{is_hygienic, normalize_hygiene, normalize_hygiene_with};
pub use validate::{validate_formula, validate_sentence, FormulaViolation};
pub use vocab::{RelationSymbol, VocabViolation, Vocabulary};

/// Words with a fixed meaning in the text format.
pub const RESERVED_WORDS: &[&str] = &[
    "true",
    "false",
    "not",
    "and",
    "or",
    "implies",
    "iff",
    "exists",
    "forall",
    "count",
    "existsrel",
    "forallrel",
    "existsrel-sub",
    "forallrel-sub",
    "vocab",
    "rel",
    "consts",
    "sentence",
    "=",
];

pub fn is_reserved_word(s: &str) -> bool {
    RESERVED_WORDS.contains(&s)
}

/// `a1`, `a2`, ... denote constants and cannot name anything else.
pub fn is_constant_token(s: &str) -> bool {
    s.len() > 1 && s.starts_with('a') && s[1..].bytes().all(|b| b.is_ascii_digit())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecError {
    Vocabulary(Vec<VocabViolation>),
    Sentence(Vec<FormulaViolation>),
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = match self {
            SpecError::Vocabulary(v) => v.iter().map(|x| x.to_string()).collect(),
            SpecError::Sentence(v) => v.iter().map(|x| x.to_string()).collect(),
        };
        write!(f, "{}", items.join("; "))
    }
}

impl std::error::Error for SpecError {}

/// A vocabulary paired with a closed sentence over it: the unit that the
/// counter consumes and the eliminators transform.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassSpec {
    vocab: Vocabulary,
    sentence: Formula,
}

impl ClassSpec {
    /// Validates both parts. The sentence must be closed.
    pub fn new(vocab: Vocabulary, sentence: Formula) -> Result<Self, SpecError> {
        let vv = vocab.validate();
        if !vv.is_empty() {
            return Err(SpecError::Vocabulary(vv));
        }
        let fv = validate_sentence(&sentence, &vocab);
        if !fv.is_empty() {
            return Err(SpecError::Sentence(fv));
        }
        Ok(Self { vocab, sentence })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn sentence(&self) -> &Formula {
        &self.sentence
    }

    pub fn into_parts(self) -> (Vocabulary, Formula) {
        (self.vocab, self.sentence)
    }

    /// The same class with binder names made unique (and distinct from the
    /// vocabulary). Models and counts are unchanged.
    pub fn hygienic(&self) -> ClassSpec {
        let reserved: BTreeSet<String> = self
            .vocab
            .relations
            .iter()
            .map(|r| r.name.clone())
            .collect();
        ClassSpec {
            vocab: self.vocab.clone(),
            sentence: normalize_hygiene_with(&self.sentence, &reserved),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_tokens() {
        assert!(is_constant_token("a1"));
        assert!(is_constant_token("a12"));
        assert!(!is_constant_token("a"));
        assert!(!is_constant_token("ab"));
        assert!(!is_constant_token("x1"));
    }

    #[test]
    fn spec_rejects_open_sentence() {
        let v = Vocabulary::from_pairs(&[("E", 2)], 0);
        let err = ClassSpec::new(v, Formula::atom("E", ["x", "x"])).unwrap_err();
        assert!(matches!(err, SpecError::Sentence(_)));
    }
}
