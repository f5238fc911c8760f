use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A relation symbol together with its arity. Arity zero is a nullary
/// relation, interpreted as a single truth value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationSymbol {
    pub name: String,
    pub arity: usize,
}

impl RelationSymbol {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Self {
            name: name.into(),
            arity,
        }
    }
}

/// Relation symbols plus a number of hard-wired constants.
///
/// With `num_constants = k` and a universe of size `N`, constant `i`
/// (1-based) always denotes element `N - k + i`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vocabulary {
    pub relations: Vec<RelationSymbol>,
    pub num_constants: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum VocabViolation {
    DuplicateName(String),
    ReservedName(String),
}

impl fmt::Display for VocabViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VocabViolation::DuplicateName(n) => write!(f, "duplicate relation name {n}"),
            VocabViolation::ReservedName(n) => {
                write!(
                    f,
                    "relation name {n} collides with a keyword or constant token"
                )
            }
        }
    }
}

impl Vocabulary {
    pub fn new(relations: Vec<RelationSymbol>, num_constants: usize) -> Self {
        Self {
            relations,
            num_constants,
        }
    }

    /// Convenience constructor from `(name, arity)` pairs.
    pub fn from_pairs<S: AsRef<str>>(pairs: &[(S, usize)], num_constants: usize) -> Self {
        Self {
            relations: pairs
                .iter()
                .map(|(n, a)| RelationSymbol::new(n.as_ref(), *a))
                .collect(),
            num_constants,
        }
    }

    pub fn relation(&self, name: &str) -> Option<&RelationSymbol> {
        self.relations.iter().find(|r| r.name == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn max_arity(&self) -> usize {
        self.relations.iter().map(|r| r.arity).max().unwrap_or(0)
    }

    /// Number of tuple slots over a universe of `universe` elements, i.e.
    /// the base-2 logarithm of the number of interpretations.
    pub fn interpretation_bits(&self, universe: usize) -> Option<u64> {
        let mut total: u64 = 0;
        for r in &self.relations {
            let cells = (universe as u64).checked_pow(r.arity as u32)?;
            total = total.checked_add(cells)?;
        }
        Some(total)
    }

    /// Every duplicate or reserved relation name. Arities are unsigned, so
    /// negative arities cannot be represented at all.
    pub fn validate(&self) -> Vec<VocabViolation> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for r in &self.relations {
            if !seen.insert(r.name.as_str()) {
                out.push(VocabViolation::DuplicateName(r.name.clone()));
            }
            if super::is_reserved_word(&r.name) || super::is_constant_token(&r.name) {
                out.push(VocabViolation::ReservedName(r.name.clone()));
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed_vocab_has_no_violations() {
        let v = Vocabulary::from_pairs(&[("R", 2)], 1);
        assert!(v.validate().is_empty());
    }

    #[test]
    fn duplicate_name_reported() {
        let v = Vocabulary::from_pairs(&[("R", 2), ("R", 3)], 0);
        assert_eq!(
            v.validate(),
            vec![VocabViolation::DuplicateName("R".into())]
        );
    }

    #[test]
    fn mixed_arities_including_nullary_accepted() {
        let v = Vocabulary::from_pairs(&[("Z", 0), ("U", 1), ("R", 3)], 1);
        assert!(v.validate().is_empty());
    }

    #[test]
    fn keywords_are_rejected_as_names() {
        let v = Vocabulary::from_pairs(&[("not", 1), ("a3", 1)], 0);
        assert_eq!(v.validate().len(), 2);
    }

    #[test]
    fn interpretation_bits() {
        let v = Vocabulary::from_pairs(&[("Z", 0), ("U", 1), ("R", 3)], 1);
        assert_eq!(v.interpretation_bits(2), Some(1 + 2 + 8));
        assert_eq!(v.interpretation_bits(0), Some(1));
    }
}
