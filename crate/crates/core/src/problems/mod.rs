//! Decidable decision problems over bit strings, each with an exact
//! membership oracle.
//!
//! Oracles are the analyst's unbounded view of a problem. They refuse
//! instances longer than [`DecisionProblem::feasible_length_bound`] instead
//! of silently running for hours.

pub mod pi;
pub mod prefix;
pub mod primes;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::instance::Instance;

pub use pi::{gap_width, machin_digits, pi_gap_nonzero, PiDigitStore};
pub use prefix::{universal_prefix, Goldbach, IndexedPredicate, PiGapPredicate};

pub trait DecisionProblem: Send + Sync + fmt::Debug {
    /// Stable CLI identifier.
    fn name(&self) -> &'static str;

    /// Longest instance the exact oracle accepts.
    fn feasible_length_bound(&self) -> usize;

    /// Exact truth value of `x`; the instance is decoded first.
    fn decide(&self, x: &Instance) -> Result<bool>;

    /// Rejects instances longer than the feasible bound.
    fn check_length(&self, x: &Instance) -> Result<()> {
        let bound = self.feasible_length_bound();
        if x.len() > bound {
            return Err(Error::guard(
                format!("{} instance length", self.name()),
                x.len() as u64,
                bound as u64,
            ));
        }
        Ok(())
    }
}

/// Integers (canonical encoding) that are prime.
#[derive(Debug, Clone, Copy, Default)]
pub struct Primality;

impl Primality {
    pub const MAX_BITS: usize = 62;
}

impl DecisionProblem for Primality {
    fn name(&self) -> &'static str {
        "primality"
    }

    fn feasible_length_bound(&self) -> usize {
        Self::MAX_BITS
    }

    fn decide(&self, x: &Instance) -> Result<bool> {
        self.check_length(x)?;
        let m = x.to_integer("primality")?;
        Ok(primes::is_prime(m))
    }
}

/// Bit strings with an odd number of ones. The empty string is accepted
/// (and is not in the language).
#[derive(Debug, Clone, Copy, Default)]
pub struct Parity;

impl DecisionProblem for Parity {
    fn name(&self) -> &'static str {
        "parity"
    }

    fn feasible_length_bound(&self) -> usize {
        1 << 20
    }

    fn decide(&self, x: &Instance) -> Result<bool> {
        self.check_length(x)?;
        Ok(x.count_ones() % 2 == 1)
    }
}

/// Instances encode an index `n`; true iff some π digit at positions
/// `n..=n^2` is nonzero.
#[derive(Debug, Clone)]
pub struct PiGap {
    store: Arc<PiDigitStore>,
}

impl PiGap {
    pub fn new(store: Arc<PiDigitStore>) -> Self {
        Self { store }
    }

    pub fn store(&self) -> &Arc<PiDigitStore> {
        &self.store
    }
}

impl DecisionProblem for PiGap {
    fn name(&self) -> &'static str {
        "pi-gap"
    }

    fn feasible_length_bound(&self) -> usize {
        let max = self.store.max_gap_index().max(1);
        64 - max.leading_zeros() as usize
    }

    fn decide(&self, x: &Instance) -> Result<bool> {
        self.check_length(x)?;
        let n = x.to_integer("pi-gap")?;
        pi_gap_nonzero(n, &self.store)
    }
}

/// Instances encode a bound `M`; true iff every even `4 <= m <= M` is a sum
/// of two primes.
#[derive(Debug, Clone, Copy, Default)]
pub struct GoldbachPrefix;

impl DecisionProblem for GoldbachPrefix {
    fn name(&self) -> &'static str {
        "goldbach-prefix"
    }

    fn feasible_length_bound(&self) -> usize {
        22
    }

    fn decide(&self, x: &Instance) -> Result<bool> {
        self.check_length(x)?;
        let limit = x.to_integer("goldbach-prefix")?;
        universal_prefix(&Goldbach::up_to(limit)?, limit)
    }
}

/// Looks up one of the shipped problems by its CLI identifier.
pub fn problem_by_name(name: &str, store: Arc<PiDigitStore>) -> Result<Arc<dyn DecisionProblem>> {
    match name {
        "primality" => Ok(Arc::new(Primality)),
        "parity" => Ok(Arc::new(Parity)),
        "pi-gap" => Ok(Arc::new(PiGap::new(store))),
        "goldbach-prefix" => Ok(Arc::new(GoldbachPrefix)),
        other => Err(Error::Unknown {
            kind: "problem",
            name: other.to_string(),
        }),
    }
}

pub const PROBLEM_NAMES: [&str; 4] = ["primality", "parity", "pi-gap", "goldbach-prefix"];

#[cfg(test)]
mod tests {
    use super::*;

    fn int(m: u64) -> Instance {
        Instance::from_integer(m)
    }

    #[test]
    fn decide_examples() {
        assert!(Primality.decide(&int(7)).unwrap());
        assert!(!Primality.decide(&int(561)).unwrap());
        assert!(Parity
            .decide(&Instance::from_bit_str("1011").unwrap())
            .unwrap());
        assert!(!Parity.decide(&Instance::default()).unwrap());
    }

    #[test]
    fn malformed_names_decoder() {
        let err = Primality.decide(&Instance::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::Malformed {
                decoder: "primality",
                ..
            }
        ));
        let err = GoldbachPrefix
            .decide(&Instance::from_bit_str("011").unwrap())
            .unwrap_err();
        assert!(matches!(
            err,
            Error::Malformed {
                decoder: "goldbach-prefix",
                ..
            }
        ));
    }

    #[test]
    fn length_guard() {
        let long = Instance::new(vec![true; 63]);
        assert!(Primality.decide(&long).unwrap_err().is_resource_guard());
        let long = Instance::new(vec![true; 23]);
        assert!(GoldbachPrefix
            .decide(&long)
            .unwrap_err()
            .is_resource_guard());
    }

    #[test]
    fn decide_is_pure() {
        let x = int(1_000_003);
        assert_eq!(Primality.decide(&x), Primality.decide(&x));
    }

    #[test]
    fn pi_gap_problem() {
        let p = PiGap::new(PiDigitStore::bundled());
        assert_eq!(p.feasible_length_bound(), 9); // max index 316
        assert!(p.decide(&int(30)).unwrap());
        // 9-bit index above 316 passes the length guard but lacks digits
        let err = p.decide(&int(400)).unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientDigits {
                needed: 160_000,
                ..
            }
        ));
    }

    #[test]
    fn goldbach_problem() {
        assert!(GoldbachPrefix.decide(&int(100)).unwrap());
        assert!(GoldbachPrefix.decide(&int(4)).unwrap());
    }

    #[test]
    fn unknown_problem() {
        let err = problem_by_name("sat", PiDigitStore::bundled()).unwrap_err();
        assert!(err.is_unknown_identifier());
    }
}
