use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite bit string, the encoded form of a statement.
///
/// Integers use the canonical big-endian encoding without leading zeros, so
/// an integer instance of length `n` lies in `[2^(n-1), 2^n)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Instance {
    bits: Vec<bool>,
}

impl Instance {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Parses a string of `0`/`1` characters.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidParameter(format!(
                    "bit string contains `{other}`"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    /// Canonical encoding of a positive integer.
    pub fn from_integer(value: u64) -> Self {
        assert!(value > 0, "canonical integer encoding needs value >= 1");
        let len = 64 - value.leading_zeros() as usize;
        Self::from_value(value, len)
    }

    /// Fixed-width big-endian encoding, leading zeros kept.
    pub fn from_value(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        let bits = (0..len).rev().map(|i| (value >> i) & 1 == 1).collect();
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Big-endian value of the raw bits, if they fit in 64 bits.
    pub fn raw_value(&self) -> Option<u64> {
        (self.bits.len() <= 64).then(|| {
            self.bits
                .iter()
                .fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
        })
    }

    /// Decodes a canonical positive integer; `decoder` names the caller in
    /// the rejection error.
    pub fn to_integer(&self, decoder: &'static str) -> Result<u64> {
        let malformed = |reason: &str| Error::Malformed {
            decoder,
            reason: reason.to_string(),
        };
        match self.bits.first() {
            None => Err(malformed("empty string")),
            Some(false) => Err(malformed("leading zero in integer encoding")),
            Some(true) if self.bits.len() > 64 => Err(malformed("integer wider than 64 bits")),
            Some(true) => Ok(self.raw_value().expect("length checked")),
        }
    }

    /// Injective 64-bit key used to derive per-instance random substreams.
    pub fn fingerprint(&self) -> u64 {
        if self.bits.len() < 64 {
            // sentinel bit keeps different lengths apart
            return self.raw_value().expect("short") | (1u64 << self.bits.len());
        }
        self.bits.chunks(64).fold(
            crate::stream::splitmix64(self.bits.len() as u64),
            |acc, chunk| {
                let word = chunk.iter().fold(0u64, |w, &b| (w << 1) | u64::from(b));
                crate::stream::splitmix64(acc ^ word)
            },
        )
    }

    /// Hex key used by override tables: `<len>:<hex>` where the hex digits
    /// hold the big-endian value.
    pub fn to_hex_key(&self) -> String {
        let mut hex = String::new();
        let pad = (4 - self.bits.len() % 4) % 4;
        let padded: Vec<bool> = std::iter::repeat_n(false, pad)
            .chain(self.bits.iter().copied())
            .collect();
        for nibble in padded.chunks(4) {
            let v = nibble.iter().fold(0u8, |a, &b| (a << 1) | u8::from(b));
            hex.push(char::from_digit(u32::from(v), 16).expect("nibble"));
        }
        format!("{}:{}", self.bits.len(), hex)
    }

    /// Inverse of [`Instance::to_hex_key`]. A bare hex string without a
    /// length prefix is read as a canonical integer.
    pub fn from_hex_key(key: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidParameter(format!("hex key `{key}`: {why}"));
        let (len, hex) = match key.split_once(':') {
            Some((l, h)) => (Some(l.parse::<usize>().map_err(|_| bad("bad length"))?), h),
            None => (None, key),
        };
        let hex = hex.trim_start_matches("0x");
        if hex.is_empty() {
            return Err(bad("no hex digits"));
        }
        let mut bits = Vec::with_capacity(hex.len() * 4);
        for c in hex.chars() {
            let v = c.to_digit(16).ok_or_else(|| bad("non-hex digit"))?;
            bits.extend((0..4).rev().map(|i| (v >> i) & 1 == 1));
        }
        match len {
            Some(len) => {
                if len > bits.len() {
                    let mut full = vec![false; len - bits.len()];
                    full.extend(bits);
                    bits = full;
                }
                let excess = bits.len() - len;
                if bits[..excess].iter().any(|&b| b) {
                    return Err(bad("value wider than declared length"));
                }
                Ok(Self::new(bits[excess..].to_vec()))
            }
            None => {
                let first_one = bits.iter().position(|&b| b).ok_or_else(|| bad("zero"))?;
                Ok(Self::new(bits[first_one..].to_vec()))
            }
        }
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Instance({self})")
    }
}

impl Serialize for Instance {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Instance {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Instance::from_bit_str(&s).map_err(serde::de::Error::custom)
    }
}
