//! Closed-form or combinatorial sequences, selectable as `name` or
//! `name:params` like the builtin classes.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::lab;
use crate::registry::{parse_keyed, Named, Registry};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("unknown oracle {0}")]
    Unknown(String),
    #[error("oracle {name} takes {expected} parameter(s), got {found}")]
    ParamCount {
        name: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("bad parameter for {name}: {reason}")]
    BadParam { name: &'static str, reason: String },
}

pub trait SequenceOracle: Named + Send + Sync {
    fn param_count(&self) -> usize {
        0
    }

    /// Checks `params` before any values are requested.
    fn check(&self, _params: &[u64]) -> Result<(), OracleError> {
        Ok(())
    }

    /// Values at `n` for every `n` in `range`, in order.
    fn values(&self, params: &[u64], range: std::ops::RangeInclusive<u64>) -> Vec<BigUint>;
}

pub struct IteratedMatchings;

impl Named for IteratedMatchings {
    fn name(&self) -> &'static str {
        "iteratedMatchings"
    }

    fn summary(&self) -> &'static str {
        "full iterated p-matching sequences over n vertices"
    }
}

impl SequenceOracle for IteratedMatchings {
    fn param_count(&self) -> usize {
        1
    }

    fn check(&self, params: &[u64]) -> Result<(), OracleError> {
        if lab::is_prime(params[0]) {
            Ok(())
        } else {
            Err(OracleError::BadParam {
                name: "iteratedMatchings",
                reason: format!("{} is not prime", params[0]),
            })
        }
    }

    fn values(&self, params: &[u64], range: std::ops::RangeInclusive<u64>) -> Vec<BigUint> {
        range
            .map(|n| lab::oracle_iterated_matchings(n, params[0]))
            .collect()
    }
}

pub struct Bell;

impl Named for Bell {
    fn name(&self) -> &'static str {
        "bell"
    }

    fn summary(&self) -> &'static str {
        "set partitions of n elements"
    }
}

impl SequenceOracle for Bell {
    fn values(&self, _params: &[u64], range: std::ops::RangeInclusive<u64>) -> Vec<BigUint> {
        // Bell triangle: each row starts with the last entry of the previous one.
        let end = *range.end();
        let mut bell = vec![BigUint::one()];
        let mut row = vec![BigUint::one()];
        for _ in 0..end {
            let mut next = vec![row.last().unwrap().clone()];
            for x in &row {
                let v = next.last().unwrap() + x;
                next.push(v);
            }
            bell.push(next[0].clone());
            row = next;
        }
        range.map(|n| bell[n as usize].clone()).collect()
    }
}

pub struct Fibonacci;

impl Named for Fibonacci {
    fn name(&self) -> &'static str {
        "fibonacci"
    }

    fn summary(&self) -> &'static str {
        "F(0) = 0, F(1) = 1, F(n+2) = F(n+1) + F(n)"
    }
}

impl SequenceOracle for Fibonacci {
    fn values(&self, _params: &[u64], range: std::ops::RangeInclusive<u64>) -> Vec<BigUint> {
        let (mut a, mut b) = (BigUint::zero(), BigUint::one());
        let mut out = Vec::new();
        for n in 0..=*range.end() {
            if range.contains(&n) {
                out.push(a.clone());
            }
            let c = &a + &b;
            a = std::mem::replace(&mut b, c);
        }
        out
    }
}

pub fn oracles() -> &'static Registry<dyn SequenceOracle> {
    static REG: OnceLock<Registry<dyn SequenceOracle>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn SequenceOracle> = Registry::new();
        r.register(Box::new(IteratedMatchings))
            .register(Box::new(Bell))
            .register(Box::new(Fibonacci));
        r
    })
}

/// Values of the oracle named by `text` (`name` or `name:params`).
pub fn oracle_values(
    text: &str,
    range: std::ops::RangeInclusive<u64>,
) -> Result<Vec<BigUint>, OracleError> {
    let (key, params) = parse_keyed(text).map_err(OracleError::Unknown)?;
    let o = oracles()
        .get(key)
        .ok_or_else(|| OracleError::Unknown(key.to_string()))?;
    if params.len() != o.param_count() {
        return Err(OracleError::ParamCount {
            name: o.name(),
            expected: o.param_count(),
            found: params.len(),
        });
    }
    o.check(&params)?;
    Ok(o.values(&params, range))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(text: &str, range: std::ops::RangeInclusive<u64>) -> Vec<u64> {
        oracle_values(text, range)
            .unwrap()
            .into_iter()
            .map(|v| u64::try_from(v).unwrap())
            .collect()
    }

    #[test]
    fn known_prefixes() {
        assert_eq!(small("bell", 0..=6), vec![1, 1, 2, 5, 15, 52, 203]);
        assert_eq!(
            small("fibonacci", 0..=9),
            vec![0, 1, 1, 2, 3, 5, 8, 13, 21, 34]
        );
        assert_eq!(small("fibonacci", 5..=6), vec![5, 8]);
        assert_eq!(
            small("iteratedMatchings:2", 1..=8),
            vec![1, 1, 0, 3, 0, 0, 0, 315]
        );
    }

    #[test]
    fn parameter_errors() {
        assert!(matches!(
            oracle_values("iteratedMatchings:4", 1..=2),
            Err(OracleError::BadParam { .. })
        ));
        assert!(matches!(
            oracle_values("bell:2", 1..=2),
            Err(OracleError::ParamCount { .. })
        ));
        assert!(matches!(
            oracle_values("catalan", 1..=2),
            Err(OracleError::Unknown(_))
        ));
    }
}
