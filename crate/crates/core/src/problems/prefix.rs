//! Universal statements checked one index at a time (enumerative
//! induction over a decidable per-index predicate).

use std::sync::Arc;

use super::pi::{pi_gap_nonzero, PiDigitStore};
use super::primes::sieve;
use crate::error::{Error, Result};

pub trait IndexedPredicate: Send + Sync {
    fn name(&self) -> &'static str;
    fn first_index(&self) -> u64;
    /// Largest index the predicate can be decided for at desk scale.
    fn max_index(&self) -> u64;
    fn holds(&self, m: u64) -> Result<bool>;
}

/// True iff the predicate holds for every index from the first up to `limit`.
pub fn universal_prefix(predicate: &dyn IndexedPredicate, limit: u64) -> Result<bool> {
    if limit > predicate.max_index() {
        return Err(Error::guard(
            format!("{} prefix bound", predicate.name()),
            limit,
            predicate.max_index(),
        ));
    }
    for m in predicate.first_index()..=limit {
        if !predicate.holds(m)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// "Every even m >= 4 is a sum of two primes", per index. Odd and small
/// indices hold vacuously.
pub struct Goldbach {
    is_prime: Vec<bool>,
}

impl Goldbach {
    /// Largest bound accepted by [`Goldbach::up_to`].
    pub const MAX_INDEX: u64 = 1 << 22;

    pub fn up_to(limit: u64) -> Result<Self> {
        if limit > Self::MAX_INDEX {
            return Err(Error::guard("goldbach sieve bound", limit, Self::MAX_INDEX));
        }
        Ok(Self {
            is_prime: sieve(limit as usize),
        })
    }

    /// Smallest prime p with m - p prime, if any.
    pub fn decomposition(&self, m: u64) -> Option<(u64, u64)> {
        let m = m as usize;
        (2..=m / 2)
            .find(|&p| self.is_prime[p] && self.is_prime[m - p])
            .map(|p| (p as u64, (m - p) as u64))
    }
}

impl IndexedPredicate for Goldbach {
    fn name(&self) -> &'static str {
        "goldbach"
    }

    fn first_index(&self) -> u64 {
        1
    }

    fn max_index(&self) -> u64 {
        (self.is_prime.len() - 1) as u64
    }

    fn holds(&self, m: u64) -> Result<bool> {
        if m > self.max_index() {
            return Err(Error::guard("goldbach index", m, self.max_index()));
        }
        if m < 4 || m % 2 == 1 {
            return Ok(true);
        }
        Ok(self.decomposition(m).is_some())
    }
}

/// The π digit-gap statement as an indexed predicate.
pub struct PiGapPredicate {
    store: Arc<PiDigitStore>,
}

impl PiGapPredicate {
    pub fn new(store: Arc<PiDigitStore>) -> Self {
        Self { store }
    }
}

impl IndexedPredicate for PiGapPredicate {
    fn name(&self) -> &'static str {
        "pi-gap"
    }

    fn first_index(&self) -> u64 {
        1
    }

    fn max_index(&self) -> u64 {
        self.store.max_gap_index()
    }

    fn holds(&self, m: u64) -> Result<bool> {
        pi_gap_nonzero(m, &self.store)
    }
}
