//! Enumerative induction on the π digit-gap statements.
//!
//! Heuristic model: digits are IID uniform, so the n-th gap statement fails
//! with probability `10^-L(n)` where `L(n) = n^2 - n + 1` is the width of the
//! inclusive window `[n, n^2]`. Having verified indices `1..=N`, the
//! plausibility that the rest hold is the tail product
//! `prod_{m > N} (1 - 10^-L(m))`, computed here in exact fixed point.

use std::cmp::Ordering;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::RngCore;

use super::{clamp_forecast, BudgetClass, PlausibilityFunction, ResourceBudget, Usage};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::problems::{gap_width, pi_gap_nonzero, PiDigitStore};

/// Working precision floor, in decimal digits.
pub const MIN_PRECISION: u64 = 400;
/// Working precision ceiling; beyond it the tail is reported only through
/// its leading exponent.
pub const MAX_PRECISION: u64 = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Horizon {
    Finite(u64),
    Infinite,
}

/// A value in `[0, 1]` held as `scaled / 10^precision`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailProduct {
    scaled: BigUint,
    precision: u64,
    /// `L(m)` of the first factor left out of the product, if any.
    first_omitted_width: Option<u64>,
}

impl TailProduct {
    fn one(precision: u64) -> BigUint {
        BigUint::from(10u32).pow(precision as u32)
    }

    pub fn zero() -> Self {
        Self {
            scaled: BigUint::zero(),
            precision: MIN_PRECISION,
            first_omitted_width: None,
        }
    }

    pub fn precision(&self) -> u64 {
        self.precision
    }

    pub fn is_zero(&self) -> bool {
        self.scaled.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.scaled == Self::one(self.precision)
    }

    /// Decimal expansion `0.ddd...` (or `1.000...`) with `digits` places,
    /// truncated.
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.is_one() {
            return format!("1.{}", "0".repeat(digits));
        }
        let raw = self.scaled.to_str_radix(10);
        let padded = format!("{raw:0>width$}", width = self.precision as usize);
        let frac: String = padded
            .chars()
            .chain(std::iter::repeat('0'))
            .take(digits)
            .collect();
        format!("0.{frac}")
    }

    pub fn to_f64(&self) -> f64 {
        self.to_decimal(40).parse().expect("decimal literal")
    }

    /// `1 - value` as an exact fixed-point integer at the same precision.
    pub fn shortfall_scaled(&self) -> BigUint {
        Self::one(self.precision) - &self.scaled
    }

    /// `1 - value` as `f64`; underflows to 0 below about 1e-308.
    pub fn shortfall(&self) -> f64 {
        let raw = self.shortfall_scaled().to_str_radix(10);
        let padded = format!("{raw:0>width$}", width = self.precision as usize);
        if padded.len() > self.precision as usize {
            return 1.0;
        }
        format!("0.{padded}").parse().expect("decimal literal")
    }

    /// `log10(1 - value)`. When the shortfall is below working precision the
    /// first omitted factor dominates and its exponent is returned.
    pub fn shortfall_log10(&self) -> f64 {
        let s = self.shortfall_scaled();
        if s.is_zero() {
            return match self.first_omitted_width {
                Some(w) => -(w as f64),
                None => f64::NEG_INFINITY,
            };
        }
        let raw = s.to_str_radix(10);
        let lead: f64 = format!("0.{}", &raw[..raw.len().min(17)])
            .parse()
            .expect("lead");
        lead.log10() + raw.len() as f64 - self.precision as f64
    }

    /// Strict comparison against a decimal threshold such as `"0.999"`.
    pub fn exceeds(&self, threshold: &str) -> Result<bool> {
        let t = parse_unit_decimal(threshold, self.precision)?;
        Ok(self.scaled.cmp(&t) == Ordering::Greater)
    }
}

/// Parses a decimal in `[0, 1]` to `value * 10^precision`, truncating.
fn parse_unit_decimal(s: &str, precision: u64) -> Result<BigUint> {
    let bad = || Error::InvalidParameter(format!("`{s}` is not a decimal in [0, 1]"));
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let int: u32 = if int.is_empty() {
        0
    } else {
        int.parse().map_err(|_| bad())?
    };
    let mut digits: String = frac.chars().take(precision as usize).collect();
    while (digits.len() as u64) < precision {
        digits.push('0');
    }
    let frac_val = if digits.is_empty() {
        BigUint::zero()
    } else {
        digits.parse::<BigUint>().map_err(|_| bad())?
    };
    let value = BigUint::from(int) * TailProduct::one(precision) + frac_val;
    if value > TailProduct::one(precision) {
        return Err(bad());
    }
    Ok(value)
}

/// `prod_{m = verified+1}^{horizon} (1 - 10^-L(m))`.
///
/// Factors narrower than the working precision are multiplied exactly
/// (up to one unit in the last place each); the infinite tail is cut once
/// `L(m)` exceeds the precision, where the remaining mass is below
/// `2 * 10^-(precision + 2)`.
pub fn tail_product(verified: u64, horizon: Horizon) -> TailProduct {
    let first = verified + 1;
    if let Horizon::Finite(m) = horizon {
        if m < first {
            let precision = MIN_PRECISION;
            return TailProduct {
                scaled: TailProduct::one(precision),
                precision,
                first_omitted_width: None,
            };
        }
    }
    let lead = gap_width(first);
    let precision = (lead + 60).clamp(MIN_PRECISION, MAX_PRECISION);
    let mut value = TailProduct::one(precision);
    let mut omitted = None;
    let mut m = first;
    loop {
        if let Horizon::Finite(limit) = horizon {
            if m > limit {
                break;
            }
        }
        let width = gap_width(m);
        if width > precision + 2 {
            omitted = Some(width);
            break;
        }
        let step = &value / BigUint::from(10u32).pow(width as u32);
        value -= step;
        m += 1;
    }
    TailProduct {
        scaled: value,
        precision,
        first_omitted_width: omitted,
    }
}

/// Verifies the gap statements `1..=verified` against the digit store and
/// returns the tail product, or exact zero if one of them is false.
///
/// Each verification is charged to `usage` as digit reads.
pub fn induction_product(
    store: &PiDigitStore,
    verified: u64,
    horizon: Horizon,
    budget: &ResourceBudget,
    usage: &mut Usage,
) -> Result<TailProduct> {
    if verified == 0 {
        return Err(Error::Domain("at least one index must be verified".into()));
    }
    for m in 1..=verified {
        usage.charge_digit_reads(gap_width(m), budget)?;
        if !pi_gap_nonzero(m, store)? {
            return Ok(TailProduct::zero());
        }
    }
    Ok(tail_product(verified, horizon))
}

/// Smallest `N >= 1` whose infinite tail product exceeds `threshold`.
pub fn min_verified_for_threshold(threshold: f64) -> Result<u64> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let text = format!("{threshold}");
    for n in 1u64.. {
        let tail = tail_product(n, Horizon::Infinite);
        if tail.exceeds(&text)? || tail.is_one() {
            return Ok(n);
        }
    }
    unreachable!("tail product reaches one at finite precision")
}

/// Plausibility of the gap statements with a digit-read budget: indices up
/// to `verify_upto` are settled by reading digits, larger ones get the
/// IID-digit estimate `1 - 10^-L(n)`.
#[derive(Debug, Clone)]
pub struct InductionForecaster {
    store: Arc<PiDigitStore>,
    verify_upto: u64,
    threshold: Option<f64>,
    budget: ResourceBudget,
}

impl InductionForecaster {
    /// Verifies up to the smallest index whose tail plausibility clears
    /// `threshold`.
    pub fn with_threshold(store: Arc<PiDigitStore>, threshold: f64) -> Result<Self> {
        let n = min_verified_for_threshold(threshold)?;
        let mut f = Self::with_verified(store, n)?;
        f.threshold = Some(threshold);
        Ok(f)
    }

    /// Verifies every index whose window fits in `digits` digits.
    pub fn with_digits(store: Arc<PiDigitStore>, digits: u64) -> Result<Self> {
        let n = (digits as f64).sqrt().floor() as u64;
        Self::with_verified(store, n)
    }

    fn with_verified(store: Arc<PiDigitStore>, verify_upto: u64) -> Result<Self> {
        let needed = verify_upto * verify_upto;
        if needed > store.count() as u64 {
            return Err(Error::InsufficientDigits {
                n: verify_upto,
                needed,
                available: store.count() as u64,
            });
        }
        Ok(Self {
            store,
            verify_upto,
            threshold: None,
            budget: ResourceBudget::new(BudgetClass::Poly).with_digit_reads(needed),
        })
    }

    pub fn verify_upto(&self) -> u64 {
        self.verify_upto
    }
}

impl PlausibilityFunction for InductionForecaster {
    fn name(&self) -> String {
        match self.threshold {
            Some(t) => format!("induction:threshold={t}"),
            None => format!("induction:digits={}", self.verify_upto * self.verify_upto),
        }
    }

    fn budget(&self) -> &ResourceBudget {
        &self.budget
    }

    fn evaluate_with(
        &self,
        x: &Instance,
        _rng: &mut dyn RngCore,
        usage: &mut Usage,
    ) -> Result<f64> {
        let n = x.to_integer("induction")?;
        if n <= self.verify_upto {
            usage.charge_digit_reads(gap_width(n), &self.budget)?;
            let holds = pi_gap_nonzero(n, &self.store)?;
            return Ok(if holds { 1.0 } else { 0.0 });
        }
        let failure = 10f64.powf(-(gap_width(n) as f64));
        Ok(clamp_forecast(1.0 - failure))
    }
}
