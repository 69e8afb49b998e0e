//! Input distributions `D_n`, one per length.
//!
//! Every ensemble supports seeded sampling and, up to its enumerable bound,
//! exact enumeration of the support with probabilities.

use std::fmt;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::stream::RandomStream;

pub trait Ensemble: Send + Sync + fmt::Debug {
    /// Identifier including parameters, e.g. `index-range:lo=2,hi=50`.
    fn name(&self) -> String;

    /// Human description of the per-length support.
    fn support_kind(&self) -> &'static str;

    /// Largest length `enumerate` accepts.
    fn enumerable_bound(&self) -> usize;

    fn sample_with(&self, n: usize, rng: &mut dyn RngCore) -> Result<Instance>;

    fn enumerate(&self, n: usize) -> Result<Vec<(Instance, f64)>>;

    fn sample(&self, n: usize, stream: &RandomStream) -> Result<Instance> {
        self.sample_with(n, &mut stream.rng())
    }

    fn check_enumerable(&self, n: usize) -> Result<()> {
        if n > self.enumerable_bound() {
            return Err(Error::guard(
                format!("{} enumeration length (use monte-carlo mode)", self.name()),
                n as u64,
                self.enumerable_bound() as u64,
            ));
        }
        Ok(())
    }
}

/// Uniform over `{0,1}^n`.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformBits;

impl UniformBits {
    pub const MAX_LEN: usize = 1 << 20;
}

impl Ensemble for UniformBits {
    fn name(&self) -> String {
        "uniform-bits".into()
    }

    fn support_kind(&self) -> &'static str {
        "all bit strings of length n"
    }

    fn enumerable_bound(&self) -> usize {
        20
    }

    fn sample_with(&self, n: usize, rng: &mut dyn RngCore) -> Result<Instance> {
        if n == 0 || n > Self::MAX_LEN {
            return Err(Error::UnsupportedLength {
                ensemble: self.name(),
                n,
                reason: format!("length must be in 1..={}", Self::MAX_LEN),
            });
        }
        Ok(Instance::new((0..n).map(|_| rng.gen::<bool>()).collect()))
    }

    fn enumerate(&self, n: usize) -> Result<Vec<(Instance, f64)>> {
        self.check_enumerable(n)?;
        if n == 0 {
            return Err(Error::UnsupportedLength {
                ensemble: self.name(),
                n,
                reason: "length must be at least 1".into(),
            });
        }
        let count = 1u64 << n;
        let p = 1.0 / count as f64;
        Ok((0..count)
            .map(|v| (Instance::from_value(v, n), p))
            .collect())
    }
}

/// Uniform over odd `n`-bit integers with the top bit set.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformOdd;

impl UniformOdd {
    pub const MAX_LEN: usize = 62;

    fn check(&self, n: usize) -> Result<()> {
        if !(2..=Self::MAX_LEN).contains(&n) {
            return Err(Error::UnsupportedLength {
                ensemble: self.name(),
                n,
                reason: format!("odd n-bit integers need 2 <= n <= {}", Self::MAX_LEN),
            });
        }
        Ok(())
    }
}

impl Ensemble for UniformOdd {
    fn name(&self) -> String {
        "uniform-odd".into()
    }

    fn support_kind(&self) -> &'static str {
        "odd integers in [2^(n-1), 2^n)"
    }

    fn enumerable_bound(&self) -> usize {
        24
    }

    fn sample_with(&self, n: usize, rng: &mut dyn RngCore) -> Result<Instance> {
        self.check(n)?;
        // 2^(n-1) + 2j + 1 for j uniform in [0, 2^(n-2))
        let j = rng.gen_range(0..(1u64 << (n - 2)));
        Ok(Instance::from_integer((1u64 << (n - 1)) + 2 * j + 1))
    }

    fn enumerate(&self, n: usize) -> Result<Vec<(Instance, f64)>> {
        self.check_enumerable(n)?;
        self.check(n)?;
        let count = 1u64 << (n - 2);
        let p = 1.0 / count as f64;
        Ok((0..count)
            .map(|j| (Instance::from_integer((1u64 << (n - 1)) + 2 * j + 1), p))
            .collect())
    }
}

/// Uniform over the integer indices `lo..=hi`, canonically encoded.
///
/// This is a single distribution over an index family (such as the π gap
/// statements), so the requested length is ignored and instances carry
/// whatever length their index needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexRange {
    lo: u64,
    hi: u64,
}

impl IndexRange {
    pub const MAX_SIZE: u64 = 1 << 22;

    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        if lo == 0 || lo > hi {
            return Err(Error::InvalidParameter(format!(
                "index-range needs 1 <= lo <= hi, got lo={lo}, hi={hi}"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }
}

impl Ensemble for IndexRange {
    fn name(&self) -> String {
        format!("index-range:lo={},hi={}", self.lo, self.hi)
    }

    fn support_kind(&self) -> &'static str {
        "integer indices lo..=hi, independent of n"
    }

    fn enumerable_bound(&self) -> usize {
        usize::MAX
    }

    fn sample_with(&self, _n: usize, rng: &mut dyn RngCore) -> Result<Instance> {
        Ok(Instance::from_integer(rng.gen_range(self.lo..=self.hi)))
    }

    fn enumerate(&self, _n: usize) -> Result<Vec<(Instance, f64)>> {
        let size = self.hi - self.lo + 1;
        if size > Self::MAX_SIZE {
            return Err(Error::guard(
                "index-range support size",
                size,
                Self::MAX_SIZE,
            ));
        }
        let p = 1.0 / size as f64;
        Ok((self.lo..=self.hi)
            .map(|m| (Instance::from_integer(m), p))
            .collect())
    }
}

pub const ENSEMBLE_NAMES: [&str; 3] = ["uniform-bits", "uniform-odd", "index-range"];
