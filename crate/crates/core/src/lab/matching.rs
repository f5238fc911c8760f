use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::engine::Structure;
use crate::logic::Vocabulary;

/// A tower of edge sets over `{1, ..., n}` in which level `i` joins the
/// connected components of the lower levels `p` at a time into complete
/// `p`-partite graphs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IteratedMatchingSequence {
    pub n: usize,
    pub p: usize,
    /// Edges `(x, y)` with `x < y`, 1-based, sorted.
    pub levels: Vec<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SequenceError {
    #[error("level {level} is not a perfect {p}-grouping of the lower components")]
    BadLevel { level: usize, p: usize },
    #[error("the sequence does not connect all {0} vertices")]
    NotFull(usize),
}

fn components(n: usize, edges: &[(usize, usize)]) -> Vec<BTreeSet<usize>> {
    let mut parent: Vec<usize> = (0..=n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    for &(x, y) in edges {
        let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
        parent[rx] = ry;
    }
    let mut by_root: HashMap<usize, BTreeSet<usize>> = HashMap::new();
    for v in 1..=n {
        let r = find(&mut parent, v);
        by_root.entry(r).or_default().insert(v);
    }
    let mut out: Vec<_> = by_root.into_values().collect();
    out.sort();
    out
}

impl IteratedMatchingSequence {
    /// Checks every level against the definition and that the top
    /// level leaves a single component.
    pub fn validate(&self) -> Result<(), SequenceError> {
        let mut union: Vec<(usize, usize)> = Vec::new();
        for (i, level) in self.levels.iter().enumerate() {
            let below = components(self.n, &union);
            let bad = SequenceError::BadLevel {
                level: i + 1,
                p: self.p,
            };
            let comp_of = |v: usize| below.iter().position(|c| c.contains(&v)).unwrap();
            // Group lower components joined by this level.
            let mut joined: Vec<BTreeSet<usize>> = below.iter().map(|_| BTreeSet::new()).collect();
            let edges: BTreeSet<(usize, usize)> = level.iter().copied().collect();
            for &(x, y) in level {
                let (cx, cy) = (comp_of(x), comp_of(y));
                if cx == cy {
                    return Err(bad);
                }
                joined[cx].insert(cy);
                joined[cy].insert(cx);
            }
            for (c, partners) in joined.iter().enumerate() {
                if partners.len() != self.p - 1 {
                    return Err(bad.clone());
                }
                // Classes of one group must be pairwise fully connected.
                for &d in partners {
                    if joined[d].iter().chain([&d]).collect::<BTreeSet<_>>()
                        != partners.iter().chain([&c]).collect::<BTreeSet<_>>()
                    {
                        return Err(bad.clone());
                    }
                    for &x in &below[c] {
                        for &y in &below[d] {
                            if !edges.contains(&(x.min(y), x.max(y))) {
                                return Err(bad.clone());
                            }
                        }
                    }
                }
            }
            union.extend(level.iter().copied());
        }
        if components(self.n, &union).len() != 1.min(self.n) {
            return Err(SequenceError::NotFull(self.n));
        }
        Ok(())
    }

    pub fn is_full(&self) -> bool {
        self.validate().is_ok()
    }

    /// Index (1-based) of the level containing edge `{x, y}`.
    fn level_of(&self, x: usize, y: usize) -> Option<usize> {
        let e = (x.min(y), x.max(y));
        self.levels
            .iter()
            .position(|l| l.binary_search(&e).is_ok())
            .map(|i| i + 1)
    }
}

/// Ways to split `k` labelled items into blocks of size `p`:
/// the block of the first item picks `p - 1` of the others.
fn perfect_groupings(k: u64, p: u64, memo: &mut HashMap<u64, BigUint>) -> BigUint {
    if k == 0 {
        return BigUint::one();
    }
    if !k.is_multiple_of(p) {
        return BigUint::zero();
    }
    if let Some(v) = memo.get(&k) {
        return v.clone();
    }
    let mut choose = BigUint::one();
    for i in 0..p - 1 {
        choose = choose * (k - 1 - i) / (i + 1);
    }
    let v = choose * perfect_groupings(k - p, p, memo);
    memo.insert(k, v.clone());
    v
}

/// Number of full iterated `p`-matching sequences over `{1, ..., n}`.
///
/// Every level is a perfect `p`-grouping of the current components, so
/// the count over `k` components is the number of such groupings times
/// the count over `k / p` components, with a single component counting
/// once (the empty sequence).
pub fn oracle_iterated_matchings(n: u64, p: u64) -> BigUint {
    assert!(p >= 2, "p must be at least 2");
    let mut memo = HashMap::new();
    let mut k = n;
    let mut total = BigUint::one();
    if n == 0 {
        return BigUint::zero();
    }
    while k > 1 {
        if !k.is_multiple_of(p) {
            return BigUint::zero();
        }
        total *= perfect_groupings(k, p, &mut memo);
        k /= p;
    }
    total
}

/// Every full iterated `p`-matching sequence over `{1, ..., n}`, built
/// level by level over the current components.
pub fn enumerate_sequences(n: usize, p: usize) -> Vec<IteratedMatchingSequence> {
    let start: Vec<Vec<usize>> = (1..=n).map(|v| vec![v]).collect();
    let mut out = Vec::new();
    let mut levels = Vec::new();
    extend(&start, p, &mut levels, &mut out, n);
    out.sort();
    out
}

fn extend(
    comps: &[Vec<usize>],
    p: usize,
    levels: &mut Vec<Vec<(usize, usize)>>,
    out: &mut Vec<IteratedMatchingSequence>,
    n: usize,
) {
    if comps.len() <= 1 {
        if n > 0 {
            out.push(IteratedMatchingSequence {
                n,
                p,
                levels: levels.clone(),
            });
        }
        return;
    }
    if !comps.len().is_multiple_of(p) {
        return;
    }
    for grouping in groupings(comps.len(), p) {
        let mut edges = Vec::new();
        let mut merged = Vec::new();
        for group in &grouping {
            let mut verts = Vec::new();
            for (gi, &c) in group.iter().enumerate() {
                for &d in &group[gi + 1..] {
                    for &x in &comps[c] {
                        for &y in &comps[d] {
                            edges.push((x.min(y), x.max(y)));
                        }
                    }
                }
                verts.extend(comps[c].iter().copied());
            }
            verts.sort();
            merged.push(verts);
        }
        edges.sort();
        merged.sort();
        levels.push(edges);
        extend(&merged, p, levels, out, n);
        levels.pop();
    }
}

/// Counts full sequences by exhaustive enumeration, dealing the
/// first-level groupings round-robin to `workers` threads.
pub fn count_sequences(n: usize, p: usize, workers: usize) -> u64 {
    if n <= 1 {
        return u64::from(n == 1);
    }
    if !n.is_multiple_of(p) {
        return 0;
    }
    let start: Vec<Vec<usize>> = (1..=n).map(|v| vec![v]).collect();
    let first = groupings(n, p);
    let workers = workers.max(1);
    let count_slice = |index: usize| -> u64 {
        let mut total = 0;
        for grouping in first.iter().skip(index).step_by(workers) {
            let mut merged: Vec<Vec<usize>> = grouping
                .iter()
                .map(|g| {
                    let mut verts: Vec<usize> = g.iter().flat_map(|&c| start[c].clone()).collect();
                    verts.sort();
                    verts
                })
                .collect();
            merged.sort();
            let mut out = Vec::new();
            extend(&merged, p, &mut vec![Vec::new()], &mut out, n);
            total += out.len() as u64;
        }
        total
    };
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|i| scope.spawn(move || count_slice(i)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .sum()
    })
}

/// All partitions of `0..k` into blocks of size `p`, blocks listed by
/// their smallest element.
fn groupings(k: usize, p: usize) -> Vec<Vec<Vec<usize>>> {
    fn go(rest: Vec<usize>, p: usize, acc: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        let Some((&first, others)) = rest.split_first() else {
            out.push(acc.clone());
            return;
        };
        for pick in subsets(others, p - 1) {
            let mut block = vec![first];
            block.extend(pick.iter().copied());
            let remaining: Vec<usize> = others
                .iter()
                .copied()
                .filter(|x| !pick.contains(x))
                .collect();
            acc.push(block);
            go(remaining, p, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    go((0..k).collect(), p, &mut Vec::new(), &mut out);
    out
}

fn subsets(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    if size == 0 {
        return vec![vec![]];
    }
    if items.len() < size {
        return vec![];
    }
    let mut out: Vec<Vec<usize>> = subsets(&items[1..], size - 1)
        .into_iter()
        .map(|mut s| {
            s.insert(0, items[0]);
            s
        })
        .collect();
    out.extend(subsets(&items[1..], size));
    out
}

/// Encodes a full sequence as a ternary relation over `{1, ..., n}` with
/// the anchor `a = n`: `(x, y, z)` holds iff `{x, y}` lies in level `i`
/// and `z` is in the component of `a` below level `i`.
///
/// With `with_constant` the structure is over the vocabulary with one
/// hard-wired constant; otherwise over the bare ternary vocabulary.
pub fn encode_canonical(
    seq: &IteratedMatchingSequence,
    with_constant: bool,
) -> Result<Structure, SequenceError> {
    seq.validate()?;
    let n = seq.n;
    let vocab = Vocabulary::from_pairs(&[("R", 3)], usize::from(with_constant));
    let mut s = Structure::empty(&vocab, n).expect("n >= 1");
    let mut union: Vec<(usize, usize)> = Vec::new();
    let mut anchor_below = Vec::with_capacity(seq.levels.len());
    for level in &seq.levels {
        let comps = components(n, &union);
        anchor_below.push(comps.into_iter().find(|c| c.contains(&n)).unwrap());
        union.extend(level.iter().copied());
    }
    for x in 1..=n {
        for y in 1..=n {
            if let Some(i) = seq.level_of(x, y) {
                for &z in &anchor_below[i - 1] {
                    s.set("R", &[x, y, z], true).expect("in range");
                }
            }
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_small_values() {
        let got: Vec<u64> = (1..=8)
            .map(|n| u64::try_from(oracle_iterated_matchings(n, 2)).unwrap())
            .collect();
        assert_eq!(got, vec![1, 1, 0, 3, 0, 0, 0, 315]);
        assert_eq!(
            oracle_iterated_matchings(16, 2),
            BigUint::from(638_512_875u64)
        );
        assert_eq!(oracle_iterated_matchings(9, 3), BigUint::from(280u32));
    }

    #[test]
    fn enumeration_matches_oracle() {
        for p in [2, 3] {
            for n in 1..=9 {
                let seqs = enumerate_sequences(n, p);
                assert_eq!(
                    BigUint::from(seqs.len()),
                    oracle_iterated_matchings(n as u64, p as u64),
                    "n={n} p={p}"
                );
                assert!(seqs.iter().all(|s| s.is_full()));
                assert_eq!(count_sequences(n, p, 3), seqs.len() as u64);
            }
        }
    }

    #[test]
    fn two_vertex_encoding() {
        let seq = &enumerate_sequences(2, 2)[0];
        let s = encode_canonical(seq, true).unwrap();
        assert_eq!(s.tuples("R").unwrap(), vec![vec![1, 2, 2], vec![2, 1, 2]]);
    }

    #[test]
    fn rejects_broken_sequences() {
        let seq = IteratedMatchingSequence {
            n: 4,
            p: 2,
            levels: vec![vec![(1, 2), (3, 4)]],
        };
        assert_eq!(seq.validate(), Err(SequenceError::NotFull(4)));
        let seq = IteratedMatchingSequence {
            n: 4,
            p: 2,
            levels: vec![vec![(1, 2), (3, 4)], vec![(1, 3), (2, 4)]],
        };
        assert!(matches!(
            seq.validate(),
            Err(SequenceError::BadLevel { level: 2, .. })
        ));
    }
}
