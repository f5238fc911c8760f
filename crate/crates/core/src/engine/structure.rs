use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::logic::Vocabulary;

/// Bit positions of every relation's tuple table inside one flat bit
/// vector, over a fixed universe size. Tuples are laid out in
/// lexicographic order, relations in vocabulary order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub universe: usize,
    pub arities: Vec<usize>,
    pub base: Vec<usize>,
    pub total: usize,
}

impl Layout {
    pub fn new(vocab: &Vocabulary, universe: usize) -> Option<Self> {
        let mut base = Vec::with_capacity(vocab.relations.len());
        let mut total = 0usize;
        for r in &vocab.relations {
            base.push(total);
            let cells = universe.checked_pow(r.arity as u32)?;
            total = total.checked_add(cells)?;
        }
        Some(Self {
            universe,
            arities: vocab.relations.iter().map(|r| r.arity).collect(),
            base,
            total,
        })
    }

    pub fn cells(&self, rel: usize) -> usize {
        self.universe.pow(self.arities[rel] as u32)
    }

    /// Index of a 0-based tuple within its relation's table.
    pub fn tuple_index(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |acc, &e| acc * self.universe + e)
    }

    /// Inverse of [`Layout::tuple_index`].
    pub fn tuple_of(&self, arity: usize, mut idx: usize) -> Vec<usize> {
        let mut t = vec![0; arity];
        for slot in t.iter_mut().rev() {
            *slot = idx % self.universe;
            idx /= self.universe;
        }
        t
    }

    /// `(relation, tuple index)` owning a flat bit position.
    pub fn locate(&self, bit: usize) -> (usize, usize) {
        let rel = match self.base.binary_search(&bit) {
            Ok(mut i) => {
                // Skip relations with empty tables sharing the same base.
                while i + 1 < self.base.len() && self.base[i + 1] == bit {
                    i += 1;
                }
                i
            }
            Err(i) => i - 1,
        };
        (rel, bit - self.base[rel])
    }
}

/// Growable fixed-length bit vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64).max(1)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        let w = &mut self.words[i >> 6];
        if v {
            *w |= 1 << (i & 63);
        } else {
            *w &= !(1 << (i & 63));
        }
    }

    pub fn flip(&mut self, i: usize) {
        self.words[i >> 6] ^= 1 << (i & 63);
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// A finite interpretation of a vocabulary over the universe
/// `{1, ..., N}`. Constant `i` of `k` denotes element `N - k + i`.
///
/// Elements are 1-based in the public API.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Structure {
    vocab: Vocabulary,
    universe: usize,
    bits: Bits,
}

impl fmt::Debug for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("Structure");
        d.field("universe", &self.universe);
        for r in &self.vocab.relations {
            d.field(&r.name, &self.tuples(&r.name).unwrap_or_default());
        }
        d.finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("tuple {tuple:?} does not fit relation {rel} over universe of size {universe}")]
    BadTuple {
        rel: String,
        tuple: Vec<usize>,
        universe: usize,
    },
    #[error("universe of size {universe} cannot hold {constants} hard-wired constants")]
    TooFewElements { universe: usize, constants: usize },
    #[error("interpretation space too large")]
    TooLarge,
}

impl Structure {
    /// All relations empty (nullary relations false).
    pub fn empty(vocab: &Vocabulary, universe: usize) -> Result<Self, StructureError> {
        if universe < vocab.num_constants {
            return Err(StructureError::TooFewElements {
                universe,
                constants: vocab.num_constants,
            });
        }
        let layout = Layout::new(vocab, universe).ok_or(StructureError::TooLarge)?;
        Ok(Self {
            vocab: vocab.clone(),
            universe,
            bits: Bits::zeros(layout.total),
        })
    }

    pub(crate) fn from_bits(vocab: &Vocabulary, universe: usize, bits: Bits) -> Self {
        Self {
            vocab: vocab.clone(),
            universe,
            bits,
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    /// Flat table, relations in vocabulary order, tuples lexicographic.
    pub fn bits(&self) -> &Bits {
        &self.bits
    }

    pub fn layout(&self) -> Layout {
        Layout::new(&self.vocab, self.universe).expect("layout fits by construction")
    }

    /// 1-based element denoted by constant `i` (1-based).
    pub fn constant(&self, i: usize) -> usize {
        self.universe - self.vocab.num_constants + i
    }

    fn position(&self, rel: &str, tuple: &[usize]) -> Result<usize, StructureError> {
        let ri = self
            .vocab
            .index_of(rel)
            .ok_or_else(|| StructureError::UnknownRelation(rel.to_string()))?;
        let arity = self.vocab.relations[ri].arity;
        if tuple.len() != arity || tuple.iter().any(|&e| e == 0 || e > self.universe) {
            return Err(StructureError::BadTuple {
                rel: rel.to_string(),
                tuple: tuple.to_vec(),
                universe: self.universe,
            });
        }
        let layout = self.layout();
        let zero: Vec<usize> = tuple.iter().map(|e| e - 1).collect();
        Ok(layout.base[ri] + layout.tuple_index(&zero))
    }

    pub fn holds(&self, rel: &str, tuple: &[usize]) -> Result<bool, StructureError> {
        Ok(self.bits.get(self.position(rel, tuple)?))
    }

    pub fn set(&mut self, rel: &str, tuple: &[usize], value: bool) -> Result<(), StructureError> {
        let p = self.position(rel, tuple)?;
        self.bits.set(p, value);
        Ok(())
    }

    /// Sorted 1-based tuples in the interpretation of `rel`.
    pub fn tuples(&self, rel: &str) -> Result<Vec<Vec<usize>>, StructureError> {
        let ri = self
            .vocab
            .index_of(rel)
            .ok_or_else(|| StructureError::UnknownRelation(rel.to_string()))?;
        let layout = self.layout();
        let arity = layout.arities[ri];
        Ok((0..layout.cells(ri))
            .filter(|&i| self.bits.get(layout.base[ri] + i))
            .map(|i| {
                layout
                    .tuple_of(arity, i)
                    .into_iter()
                    .map(|e| e + 1)
                    .collect()
            })
            .collect())
    }

    /// Every structure over the vocabulary and universe, in counter order.
    /// Intended for small spaces only.
    pub fn all(vocab: &Vocabulary, universe: usize) -> Result<Vec<Structure>, StructureError> {
        let empty = Structure::empty(vocab, universe)?;
        let total = empty.bits.len();
        if total > 24 {
            return Err(StructureError::TooLarge);
        }
        Ok((0u64..(1u64 << total))
            .map(|mask| {
                let mut bits = Bits::zeros(total);
                for i in 0..total {
                    bits.set(i, (mask >> i) & 1 == 1);
                }
                Structure::from_bits(vocab, universe, bits)
            })
            .collect())
    }
}

/// Values for free variables (1-based elements) and for relation symbols
/// bound outside the formula being evaluated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    pub vars: BTreeMap<String, usize>,
    pub relations: BTreeMap<String, (usize, BTreeSet<Vec<usize>>)>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_var(mut self, name: impl Into<String>, element: usize) -> Self {
        self.vars.insert(name.into(), element);
        self
    }

    pub fn with_relation(
        mut self,
        name: impl Into<String>,
        arity: usize,
        tuples: impl IntoIterator<Item = Vec<usize>>,
    ) -> Self {
        self.relations
            .insert(name.into(), (arity, tuples.into_iter().collect()));
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_locates_bits() {
        let v = Vocabulary::from_pairs(&[("Z", 0), ("U", 1), ("R", 2)], 0);
        let l = Layout::new(&v, 3).unwrap();
        assert_eq!(l.base, vec![0, 1, 4]);
        assert_eq!(l.total, 13);
        assert_eq!(l.locate(0), (0, 0));
        assert_eq!(l.locate(3), (1, 2));
        assert_eq!(l.locate(12), (2, 8));
        assert_eq!(l.tuple_of(2, 5), vec![1, 2]);
        assert_eq!(l.tuple_index(&[1, 2]), 5);
    }

    #[test]
    fn empty_universe_keeps_nullary_cells() {
        let v = Vocabulary::from_pairs(&[("Z", 0), ("U", 1)], 0);
        let l = Layout::new(&v, 0).unwrap();
        assert_eq!(l.total, 1);
        assert_eq!(l.locate(0), (0, 0));
    }

    #[test]
    fn set_and_read_tuples() {
        let v = Vocabulary::from_pairs(&[("E", 2)], 1);
        let mut s = Structure::empty(&v, 3).unwrap();
        s.set("E", &[1, 3], true).unwrap();
        assert!(s.holds("E", &[1, 3]).unwrap());
        assert!(!s.holds("E", &[3, 1]).unwrap());
        assert_eq!(s.tuples("E").unwrap(), vec![vec![1, 3]]);
        assert_eq!(s.constant(1), 3);
        assert!(s.set("E", &[0, 1], true).is_err());
    }
}
