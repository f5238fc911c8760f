//! Residue sequences of counting functions and empirical detection of
//! ultimate periodicity and linear recurrences modulo `m`.
//!
//! A finite prefix can confirm a period but never refute one, so the
//! detectors answer `inconclusive` unless the caller supplies a bound on
//! the preperiod and period that the prefix can rule out.

use std::io;
use std::ops::RangeInclusive;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::engine::{count_models_mod, CountOptions, EngineError};
use crate::lab::is_prime;
use crate::oracles::{oracle_values, OracleError};
use crate::ClassSpec;

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("sequence too short: need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("modulus must be at least 2, got {0}")]
    BadModulus(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("residue {value} at n = {n} is not below the modulus {modulus}")]
    OutOfRange { n: u64, value: u64, modulus: u64 },
    #[error("n values must be contiguous: expected {expected}, found {found}")]
    Gap { expected: u64, found: u64 },
    #[error("malformed sequence CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Why a residue series stops early.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Truncation {
    /// First `n` that could not be computed.
    pub at_n: u64,
    pub reason: String,
}

/// Residues `s(start), s(start + 1), ...` modulo `modulus`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResidueSequence {
    pub values: Vec<u64>,
    pub modulus: u64,
    pub start_index: u64,
    /// Builtin or oracle name, or a file path.
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncated: Option<Truncation>,
}

impl ResidueSequence {
    pub fn new(values: Vec<u64>, modulus: u64, start_index: u64) -> Result<Self, AnalysisError> {
        if modulus < 2 {
            return Err(AnalysisError::BadModulus(modulus));
        }
        if let Some((i, &v)) = values.iter().enumerate().find(|(_, &v)| v >= modulus) {
            return Err(AnalysisError::OutOfRange {
                n: start_index + i as u64,
                value: v,
                modulus,
            });
        }
        Ok(Self {
            values,
            modulus,
            start_index,
            source: String::new(),
            truncated: None,
        })
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    /// Reduces exact values modulo `m`.
    pub fn from_values(
        values: &[BigUint],
        m: u64,
        start_index: u64,
    ) -> Result<Self, AnalysisError> {
        let modulus = BigUint::from(m);
        if m < 2 {
            return Err(AnalysisError::BadModulus(m));
        }
        let residues = values
            .iter()
            .map(|v| u64::try_from(v % &modulus).expect("below a u64 modulus"))
            .collect();
        Self::new(residues, m, start_index)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The same sequence modulo a divisor of the modulus.
    pub fn reduce(&self, q: u64) -> Result<Self, AnalysisError> {
        if q < 2 || !self.modulus.is_multiple_of(q) {
            return Err(AnalysisError::BadModulus(q));
        }
        let mut out = Self::new(
            self.values.iter().map(|v| v % q).collect(),
            q,
            self.start_index,
        )?;
        out.source = self.source.clone();
        out.truncated = self.truncated.clone();
        Ok(out)
    }

    /// Writes `n,residue` rows with a header.
    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<(), AnalysisError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "residue"])?;
        for (i, v) in self.values.iter().enumerate() {
            out.write_record([(self.start_index + i as u64).to_string(), v.to_string()])?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Reads `n,residue` rows. Without a modulus the smallest one that
    /// fits the values (at least 2) is used.
    pub fn read_csv<R: io::Read>(r: R, modulus: Option<u64>) -> Result<Self, AnalysisError> {
        #[derive(Deserialize)]
        struct Row {
            n: u64,
            residue: u64,
        }
        let mut rows = Vec::new();
        for row in csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(r)
            .deserialize()
        {
            let row: Row = row?;
            rows.push(row);
        }
        let start = rows.first().map_or(0, |r| r.n);
        for (i, row) in rows.iter().enumerate() {
            let expected = start + i as u64;
            if row.n != expected {
                return Err(AnalysisError::Gap {
                    expected,
                    found: row.n,
                });
            }
        }
        let values: Vec<u64> = rows.iter().map(|r| r.residue).collect();
        let m = modulus.unwrap_or_else(|| values.iter().max().map_or(2, |&v| (v + 1).max(2)));
        Self::new(values, m, start)
    }
}

/// Residues of the model counts of `spec` for `n` in `range`. Stops at
/// the first `n` that exceeds the budget and records it.
pub fn residue_series(
    spec: &ClassSpec,
    range: RangeInclusive<usize>,
    m: u64,
    opts: &CountOptions,
) -> Result<ResidueSequence, AnalysisError> {
    let start = *range.start() as u64;
    let mut seq = ResidueSequence::new(Vec::new(), m, start)?;
    for n in range {
        match count_models_mod(spec, n, m, opts) {
            Ok(r) => seq.values.push(r),
            Err(e) if e.is_budget() => {
                seq.truncated = Some(Truncation {
                    at_n: n as u64,
                    reason: e.to_string(),
                });
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(seq)
}

/// Residues of a named oracle (see [`crate::oracles`]).
pub fn oracle_residue_series(
    oracle: &str,
    range: RangeInclusive<u64>,
    m: u64,
) -> Result<ResidueSequence, AnalysisError> {
    let start = *range.start();
    let values = oracle_values(oracle, range)?;
    Ok(ResidueSequence::from_values(&values, m, start)?.with_source(oracle))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum VerdictKind {
    Periodic,
    AperiodicWitness,
    Inconclusive,
}

/// Outcome of [`detect_ultimate_periodicity`]. Preperiod and period are
/// indices into the sequence, not values of `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PeriodicityVerdict {
    pub kind: VerdictKind,
    pub preperiod: Option<usize>,
    pub period: Option<usize>,
    /// Full periods observed after the preperiod.
    pub witness_repeats: usize,
}

/// Largest preperiod and period the sequence is known to respect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodBound {
    pub max_preperiod: usize,
    pub max_period: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodicityOptions {
    pub witness_threshold: usize,
    pub bound: Option<PeriodBound>,
}

impl Default for PeriodicityOptions {
    fn default() -> Self {
        Self {
            witness_threshold: 2,
            bound: None,
        }
    }
}

pub const MIN_PERIODICITY_LEN: usize = 4;

/// Least `r` with `v[i] == v[i + p]` for all `r <= i < len - p`.
fn least_preperiod(v: &[u64], p: usize) -> usize {
    (0..v.len().saturating_sub(p))
        .rev()
        .find(|&i| v[i] != v[i + p])
        .map_or(0, |i| i + 1)
}

/// Finds the least preperiod, and for it the least period, that fits
/// the prefix with the period observed at least `witness_threshold` full
/// times. Ordering by preperiod first keeps a short run of equal values
/// at the end of the prefix from passing as a period.
pub fn detect_ultimate_periodicity(
    seq: &ResidueSequence,
    opts: &PeriodicityOptions,
) -> Result<PeriodicityVerdict, AnalysisError> {
    let v = &seq.values;
    if v.len() < MIN_PERIODICITY_LEN {
        return Err(AnalysisError::TooShort {
            needed: MIN_PERIODICITY_LEN,
            got: v.len(),
        });
    }
    let threshold = opts.witness_threshold.max(1);
    let best = (1..=v.len() / threshold)
        .map(|p| (least_preperiod(v, p), p))
        .filter(|&(r, p)| (v.len() - r) / p >= threshold)
        .min();
    if let Some((r, p)) = best {
        return Ok(PeriodicityVerdict {
            kind: VerdictKind::Periodic,
            preperiod: Some(r),
            period: Some(p),
            witness_repeats: (v.len() - r) / p,
        });
    }
    if let Some(b) = opts.bound {
        // Every admissible pair must already hold on the prefix, and it
        // can only be checked where the prefix reaches past it.
        let refuted = (1..=b.max_period)
            .all(|p| b.max_preperiod + p < v.len() && least_preperiod(v, p) > b.max_preperiod);
        if refuted {
            return Ok(PeriodicityVerdict {
                kind: VerdictKind::AperiodicWitness,
                preperiod: None,
                period: None,
                witness_repeats: 0,
            });
        }
    }
    Ok(PeriodicityVerdict {
        kind: VerdictKind::Inconclusive,
        preperiod: None,
        period: None,
        witness_repeats: 0,
    })
}

/// A homogeneous recurrence `s(n+k) = c_1 s(n+k-1) + ... + c_k s(n)`
/// over the integers modulo a prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recurrence {
    pub modulus: u64,
    /// `c_1, ..., c_k`.
    pub coefficients: Vec<u64>,
}

impl Recurrence {
    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    /// The next value after `window`, whose last `order` entries are used.
    pub fn next(&self, window: &[u64]) -> u64 {
        let p = self.modulus as u128;
        let k = self.order();
        let tail = &window[window.len() - k..];
        let s: u128 = self
            .coefficients
            .iter()
            .zip(tail.iter().rev())
            .map(|(&c, &x)| c as u128 * x as u128 % p)
            .sum();
        (s % p) as u64
    }

    pub fn fits(&self, values: &[u64]) -> bool {
        let k = self.order();
        (k..values.len()).all(|i| self.next(&values[..i]) == values[i])
    }
}

/// Extra equations required beyond `2 * max_order` before a fit counts.
pub const RECURRENCE_SLACK: usize = 2;

fn pow_mod(b: u64, mut e: u64, p: u64) -> u64 {
    let p = p as u128;
    let (mut r, mut b) = (1u128 % p, b as u128 % p);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r as u64
}

/// Solves `a x = b` over GF(p); free variables are set to zero.
fn solve_mod_prime(mut a: Vec<Vec<u64>>, mut b: Vec<u64>, p: u64) -> Option<Vec<u64>> {
    let cols = a.first().map_or(0, Vec::len);
    let mul = |x: u64, y: u64| (x as u128 * y as u128 % p as u128) as u64;
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(pr) = (row..a.len()).find(|&i| a[i][col] != 0) else {
            continue;
        };
        a.swap(row, pr);
        b.swap(row, pr);
        let inv = pow_mod(a[row][col], p - 2, p);
        for x in &mut a[row][col..] {
            *x = mul(*x, inv);
        }
        b[row] = mul(b[row], inv);
        let (pivot, b_pivot) = (a[row].clone(), b[row]);
        for (i, r) in a.iter_mut().enumerate() {
            if i != row && r[col] != 0 {
                let f = r[col];
                for (x, &y) in r[col..].iter_mut().zip(&pivot[col..]) {
                    *x = (*x + p - mul(f, y)) % p;
                }
                b[i] = (b[i] + p - mul(f, b_pivot)) % p;
            }
        }
        pivots.push(col);
        row += 1;
    }
    if b[row..].iter().any(|&x| x != 0) {
        return None;
    }
    let mut x = vec![0; cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = b[r];
    }
    Some(x)
}

/// The least-order recurrence modulo the prime `p` that holds on the
/// whole prefix, trying orders `1..=max_order` in turn.
pub fn find_linear_recurrence_mod_prime(
    seq: &ResidueSequence,
    p: u64,
    max_order: usize,
) -> Result<Option<Recurrence>, AnalysisError> {
    if !is_prime(p) {
        return Err(AnalysisError::NotPrime(p));
    }
    let seq = if seq.modulus == p {
        seq.clone()
    } else {
        seq.reduce(p)?
    };
    let v = &seq.values;
    let needed = 2 * max_order + RECURRENCE_SLACK;
    if v.len() < needed {
        return Err(AnalysisError::TooShort {
            needed,
            got: v.len(),
        });
    }
    for k in 1..=max_order {
        let rows: Vec<Vec<u64>> = (k..v.len())
            .map(|i| (1..=k).map(|j| v[i - j]).collect())
            .collect();
        let rhs: Vec<u64> = v[k..].to_vec();
        if let Some(c) = solve_mod_prime(rows, rhs, p) {
            let rec = Recurrence {
                modulus: p,
                coefficients: c,
            };
            debug_assert!(rec.fits(v));
            return Ok(Some(rec));
        }
    }
    Ok(None)
}

/// The maximal prime-power divisors of `m`, by increasing prime.
pub fn decompose_modulus(m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut rest = m;
    let mut d = 2;
    while d * d <= rest {
        if rest.is_multiple_of(d) {
            let mut q = 1;
            while rest.is_multiple_of(d) {
                rest /= d;
                q *= d;
            }
            out.push(q);
        }
        d += 1;
    }
    if rest > 1 {
        out.push(rest);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fib_mod(m: u64, len: usize) -> ResidueSequence {
        let mut v = vec![0, 1 % m];
        while v.len() < len {
            let n = v.len();
            v.push((v[n - 1] + v[n - 2]) % m);
        }
        v.truncate(len);
        ResidueSequence::new(v, m, 0).unwrap()
    }

    #[test]
    fn pisano_periods() {
        let d = PeriodicityOptions::default();
        let v = detect_ultimate_periodicity(&fib_mod(2, 12), &d).unwrap();
        assert_eq!(
            (v.kind, v.preperiod, v.period),
            (VerdictKind::Periodic, Some(0), Some(3))
        );
        let v = detect_ultimate_periodicity(&fib_mod(3, 24), &d).unwrap();
        assert_eq!(v.period, Some(8));
    }

    #[test]
    fn preperiod_is_found() {
        let seq = ResidueSequence::new(vec![1, 0, 0, 2, 1, 2, 1, 2, 1], 3, 0).unwrap();
        let v = detect_ultimate_periodicity(&seq, &Default::default()).unwrap();
        assert_eq!((v.preperiod, v.period), (Some(3), Some(2)));
    }

    #[test]
    fn too_short() {
        let seq = ResidueSequence::new(vec![1, 0, 1], 2, 0).unwrap();
        assert!(matches!(
            detect_ultimate_periodicity(&seq, &Default::default()),
            Err(AnalysisError::TooShort { .. })
        ));
    }

    #[test]
    fn bound_gives_aperiodic_witness() {
        let seq = ResidueSequence::new(vec![0, 0, 0, 0, 0, 0, 0, 1], 2, 0).unwrap();
        let opts = PeriodicityOptions {
            witness_threshold: 2,
            bound: Some(PeriodBound {
                max_preperiod: 2,
                max_period: 2,
            }),
        };
        let v = detect_ultimate_periodicity(&seq, &opts).unwrap();
        assert_eq!(v.kind, VerdictKind::AperiodicWitness);
        let v = detect_ultimate_periodicity(&seq, &Default::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::Inconclusive);
    }

    #[test]
    fn recurrences() {
        let pow2 = ResidueSequence::new((0..10).map(|n| pow_mod(2, n, 3)).collect(), 3, 0).unwrap();
        let r = find_linear_recurrence_mod_prime(&pow2, 3, 3)
            .unwrap()
            .unwrap();
        assert_eq!(r.coefficients, vec![2]);
        let r = find_linear_recurrence_mod_prime(&fib_mod(5, 20), 5, 4)
            .unwrap()
            .unwrap();
        assert_eq!(r.coefficients, vec![1, 1]);
        assert!(matches!(
            find_linear_recurrence_mod_prime(&fib_mod(4, 20), 4, 2),
            Err(AnalysisError::NotPrime(4))
        ));
    }

    #[test]
    fn moduli() {
        assert_eq!(decompose_modulus(12), vec![4, 3]);
        assert_eq!(decompose_modulus(7), vec![7]);
        assert_eq!(decompose_modulus(360), vec![8, 9, 5]);
    }

    #[test]
    fn csv_round_trip() {
        let seq = fib_mod(3, 10);
        let mut buf = Vec::new();
        seq.write_csv(&mut buf).unwrap();
        let back = ResidueSequence::read_csv(buf.as_slice(), Some(3)).unwrap();
        assert_eq!(back.values, seq.values);
        assert!(matches!(
            ResidueSequence::read_csv("n,residue\n0,1\n2,1\n".as_bytes(), None),
            Err(AnalysisError::Gap { .. })
        ));
        assert!(ResidueSequence::read_csv("n,residue\n0,x\n".as_bytes(), None).is_err());
    }
}
