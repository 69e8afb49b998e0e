//! Decimal digits of π and the digit-gap statements built on them.
//!
//! The store is loaded from a plain text file of post-decimal-point digits.
//! A copy of the first 100 000 digits ships with the crate; it is checked
//! in tests against [`machin_digits`], which computes digits from scratch.

use std::path::Path;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};

static BUNDLED_TEXT: &str = include_str!("../../data/pi_digits.txt");

/// Immutable run of π digits after the decimal point, indexed from 1.
#[derive(Clone, PartialEq, Eq)]
pub struct PiDigitStore {
    digits: Vec<u8>,
}

impl std::fmt::Debug for PiDigitStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PiDigitStore")
            .field("count", &self.digits.len())
            .finish()
    }
}

impl PiDigitStore {
    /// The digits shipped with the crate (100 000 of them).
    pub fn bundled() -> Arc<Self> {
        static STORE: OnceLock<Arc<PiDigitStore>> = OnceLock::new();
        STORE
            .get_or_init(|| Arc::new(Self::parse(BUNDLED_TEXT).expect("bundled pi digits")))
            .clone()
    }

    /// Parses one contiguous run of decimal digits with an optional trailing
    /// newline.
    pub fn parse(text: &str) -> Result<Self> {
        let body = text
            .strip_suffix("\r\n")
            .or_else(|| text.strip_suffix('\n'))
            .unwrap_or(text);
        let digits = body
            .bytes()
            .enumerate()
            .map(|(i, b)| {
                if b.is_ascii_digit() {
                    Ok(b - b'0')
                } else {
                    Err(Error::InvalidParameter(format!(
                        "pi digit file: non-digit byte {b:#04x} at offset {i}"
                    )))
                }
            })
            .collect::<Result<Vec<u8>>>()?;
        if digits.is_empty() {
            return Err(Error::InvalidParameter("pi digit file is empty".into()));
        }
        Ok(Self { digits })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn from_digits(digits: Vec<u8>) -> Self {
        assert!(digits.iter().all(|&d| d < 10));
        Self { digits }
    }

    pub fn count(&self) -> usize {
        self.digits.len()
    }

    /// Digit at 1-indexed `position`.
    pub fn digit(&self, position: usize) -> Option<u8> {
        position
            .checked_sub(1)
            .and_then(|i| self.digits.get(i))
            .copied()
    }

    /// Digits at positions `lo..=hi` (1-indexed).
    pub fn range(&self, lo: usize, hi: usize) -> &[u8] {
        &self.digits[lo - 1..hi]
    }

    /// Truncated copy holding only the first `count` digits.
    pub fn prefix(&self, count: usize) -> Self {
        Self {
            digits: self.digits[..count.min(self.digits.len())].to_vec(),
        }
    }

    /// Largest `n` whose digit-gap statement this store can decide.
    pub fn max_gap_index(&self) -> u64 {
        (self.digits.len() as f64).sqrt().floor() as u64
    }
}

/// Number of digit positions inspected by the n-th gap statement:
/// `n^2 - n + 1`, the size of the inclusive range `[n, n^2]`.
pub fn gap_width(n: u64) -> u64 {
    n * n - n + 1
}

/// True iff some digit at positions `n..=n^2` is nonzero.
pub fn pi_gap_nonzero(n: u64, store: &PiDigitStore) -> Result<bool> {
    if n == 0 {
        return Err(Error::Domain("gap statement index starts at 1".into()));
    }
    let needed = n
        .checked_mul(n)
        .ok_or_else(|| Error::guard("n^2", u64::MAX, u64::MAX))?;
    if needed > store.count() as u64 {
        return Err(Error::InsufficientDigits {
            n,
            needed,
            available: store.count() as u64,
        });
    }
    Ok(store
        .range(n as usize, needed as usize)
        .iter()
        .any(|&d| d != 0))
}

/// First `count` decimal digits of π after the point, computed with
/// Machin's formula `π = 16 atan(1/5) - 4 atan(1/239)` in fixed point.
pub fn machin_digits(count: usize) -> Vec<u8> {
    const GUARD: usize = 12;
    let unity = BigUint::from(10u32).pow((count + GUARD) as u32);
    let pi = (arctan_inverse(5, &unity) * 16u32) - (arctan_inverse(239, &unity) * 4u32);
    let text = pi.to_str_radix(10);
    // text = "3" followed by count + GUARD digits
    text.bytes().skip(1).take(count).map(|b| b - b'0').collect()
}

fn arctan_inverse(x: u32, unity: &BigUint) -> BigUint {
    let x2 = BigUint::from(x) * x;
    let mut power = unity / x;
    let mut positive = BigUint::zero();
    let mut negative = BigUint::zero();
    let mut k = 0u32;
    while !power.is_zero() {
        let term = &power / (2 * k + 1);
        if k.is_multiple_of(2) {
            positive += term;
        } else {
            negative += term;
        }
        power /= &x2;
        k += 1;
    }
    positive - negative
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_known_prefix() {
        let s = PiDigitStore::bundled();
        let first: Vec<u8> = (1..=10).map(|i| s.digit(i).unwrap()).collect();
        assert_eq!(first, [1, 4, 1, 5, 9, 2, 6, 5, 3, 5]);
        assert_eq!(s.count(), 100_000);
        assert_eq!(s.digit(0), None);
    }

    #[test]
    fn machin_generator_matches_known_digits() {
        assert_eq!(machin_digits(10), [1, 4, 1, 5, 9, 2, 6, 5, 3, 5]);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(PiDigitStore::parse("1415x").is_err());
        assert!(PiDigitStore::parse("").is_err());
        assert_eq!(PiDigitStore::parse("1415\n").unwrap().count(), 4);
    }

    #[test]
    fn gap_small_cases() {
        let s = PiDigitStore::bundled();
        assert!(pi_gap_nonzero(1, &s).unwrap());
        assert!(pi_gap_nonzero(2, &s).unwrap());
        assert_eq!(gap_width(11), 111);
    }

    #[test]
    fn gap_demands_enough_digits() {
        let s = PiDigitStore::bundled().prefix(99);
        assert_eq!(
            pi_gap_nonzero(10, &s),
            Err(Error::InsufficientDigits {
                n: 10,
                needed: 100,
                available: 99
            })
        );
    }

    #[test]
    fn all_zero_window_is_false() {
        // synthetic store: positions 2..4 are zero
        let s = PiDigitStore::from_digits(vec![1, 0, 0, 0, 7]);
        assert!(!pi_gap_nonzero(2, &s).unwrap());
        assert!(pi_gap_nonzero(1, &s).unwrap());
    }
}
