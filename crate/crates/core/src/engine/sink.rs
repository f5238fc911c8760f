use num_bigint::BigUint;
use num_traits::One;

use super::structure::{Bits, Structure};
use crate::logic::Vocabulary;

/// Receives the models found by a search.
///
/// A call stands for `2^free.len()` models: the decided cells are read from
/// `bits`, and every cell listed in `free` may take either value.
pub trait ModelSink: Send {
    fn accept(&mut self, bits: &[u64], free: &[usize]);
}

/// Exact count. Stays in `u128` until it would overflow.
#[derive(Debug, Default, Clone)]
pub struct ExactSink {
    small: u128,
    big: Option<BigUint>,
}

impl ExactSink {
    pub fn new() -> Self {
        Self::default()
    }

    fn add_pow2(&mut self, k: usize) {
        if let Some(b) = &mut self.big {
            *b += BigUint::one() << k;
            return;
        }
        if k < 127 {
            if let Some(s) = self.small.checked_add(1u128 << k) {
                self.small = s;
                return;
            }
        }
        self.big = Some(BigUint::from(self.small) + (BigUint::one() << k));
    }

    pub fn merge(&mut self, other: ExactSink) {
        match other.big {
            Some(b) => {
                let total = self.total() + b;
                self.big = Some(total);
            }
            None => match (&mut self.big, self.small.checked_add(other.small)) {
                (Some(b), _) => *b += other.small,
                (None, Some(s)) => self.small = s,
                (None, None) => {
                    self.big = Some(BigUint::from(self.small) + BigUint::from(other.small))
                }
            },
        }
    }

    pub fn total(&self) -> BigUint {
        match &self.big {
            Some(b) => b.clone(),
            None => BigUint::from(self.small),
        }
    }
}

impl ModelSink for ExactSink {
    fn accept(&mut self, _bits: &[u64], free: &[usize]) {
        self.add_pow2(free.len());
    }
}

/// Count modulo `m`, without retaining a big integer.
#[derive(Debug, Clone)]
pub struct ModSink {
    modulus: u64,
    residue: u64,
    pow2: Vec<u64>,
}

impl ModSink {
    /// `max_free` bounds the number of free cells in any accepted call.
    pub fn new(modulus: u64, max_free: usize) -> Self {
        assert!(modulus >= 2);
        let mut pow2 = Vec::with_capacity(max_free + 1);
        let mut p = 1 % modulus;
        for _ in 0..=max_free {
            pow2.push(p);
            p = ((p as u128 * 2) % modulus as u128) as u64;
        }
        Self {
            modulus,
            residue: 0,
            pow2,
        }
    }

    pub fn merge(&mut self, other: ModSink) {
        self.residue =
            ((self.residue as u128 + other.residue as u128) % self.modulus as u128) as u64;
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }
}

impl ModelSink for ModSink {
    fn accept(&mut self, _bits: &[u64], free: &[usize]) {
        let add = self.pow2[free.len()];
        self.residue = ((self.residue as u128 + add as u128) % self.modulus as u128) as u64;
    }
}

/// Materializes every model. Intended for small spaces.
#[derive(Debug, Clone)]
pub struct CollectSink {
    vocab: Vocabulary,
    universe: usize,
    len: usize,
    limit: usize,
    models: Vec<Structure>,
    overflow: bool,
}

impl CollectSink {
    pub fn new(vocab: &Vocabulary, universe: usize, len: usize, limit: usize) -> Self {
        Self {
            vocab: vocab.clone(),
            universe,
            len,
            limit,
            models: Vec::new(),
            overflow: false,
        }
    }

    pub fn merge(&mut self, other: CollectSink) {
        self.overflow |= other.overflow;
        self.models.extend(other.models);
        if self.models.len() > self.limit {
            self.overflow = true;
            self.models.truncate(self.limit);
        }
    }

    pub fn overflowed(&self) -> bool {
        self.overflow
    }

    /// Models sorted by their flat bit tables.
    pub fn into_models(mut self) -> Vec<Structure> {
        self.models.sort_by(|a, b| {
            a.bits()
                .words()
                .iter()
                .rev()
                .cmp(b.bits().words().iter().rev())
        });
        self.models
    }
}

impl ModelSink for CollectSink {
    fn accept(&mut self, bits: &[u64], free: &[usize]) {
        if free.len() >= 32 || self.models.len() + (1usize << free.len()) > self.limit {
            self.overflow = true;
            return;
        }
        let mut base = Bits::zeros(self.len);
        for i in 0..self.len {
            base.set(i, (bits[i >> 6] >> (i & 63)) & 1 == 1);
        }
        for mask in 0u64..(1u64 << free.len()) {
            let mut b = base.clone();
            for (j, &pos) in free.iter().enumerate() {
                b.set(pos, (mask >> j) & 1 == 1);
            }
            self.models
                .push(Structure::from_bits(&self.vocab, self.universe, b));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_spills_to_bigint() {
        let mut s = ExactSink::new();
        s.accept(&[], &[0; 127]);
        s.accept(&[], &[0; 127]);
        assert_eq!(s.total(), BigUint::one() << 128usize);
        let mut t = ExactSink::new();
        t.accept(&[], &[]);
        t.merge(s);
        assert_eq!(t.total(), (BigUint::one() << 128usize) + 1u32);
    }

    #[test]
    fn modular_accumulation() {
        let mut s = ModSink::new(10, 8);
        s.accept(&[], &[0; 4]);
        s.accept(&[], &[0; 3]);
        assert_eq!(s.residue(), 4);
        let mut t = ModSink::new(10, 8);
        t.accept(&[], &[0; 0]);
        s.merge(t);
        assert_eq!(s.residue(), 5);
    }
}
