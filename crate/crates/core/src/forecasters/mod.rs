//! Plausibility functions `p: {0,1}* -> [0,1]`, each tagged with the
//! computational budget it runs under.

pub mod induction;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::problems::primes::{pow_mod, primes_up_to};
use crate::problems::DecisionProblem;
use crate::scoring::{clamp_forecast, EPSILON};
use crate::stream::RandomStream;

pub use induction::{
    induction_product, min_verified_for_threshold, tail_product, Horizon, InductionForecaster,
    TailProduct,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BudgetClass {
    Constant,
    PolyLog,
    Poly,
    Unbounded,
}

impl fmt::Display for BudgetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BudgetClass::Constant => "constant",
            BudgetClass::PolyLog => "poly-log",
            BudgetClass::Poly => "poly",
            BudgetClass::Unbounded => "unbounded",
        })
    }
}

/// The resources a forecaster may spend on one evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceBudget {
    pub class: BudgetClass,
    pub max_oracle_calls: Option<u64>,
    pub max_modexps: Option<u64>,
    pub max_digit_reads: Option<u64>,
}

impl ResourceBudget {
    pub fn new(class: BudgetClass) -> Self {
        Self {
            class,
            max_oracle_calls: None,
            max_modexps: None,
            max_digit_reads: None,
        }
    }

    pub fn with_oracle_calls(mut self, cap: u64) -> Self {
        self.max_oracle_calls = Some(cap);
        self
    }

    pub fn with_modexps(mut self, cap: u64) -> Self {
        self.max_modexps = Some(cap);
        self
    }

    pub fn with_digit_reads(mut self, cap: u64) -> Self {
        self.max_digit_reads = Some(cap);
        self
    }
}

/// Resources actually spent, charged against a [`ResourceBudget`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub oracle_calls: u64,
    pub modexps: u64,
    pub digit_reads: u64,
}

fn charge(counter: &mut u64, amount: u64, cap: Option<u64>, resource: &'static str) -> Result<()> {
    let next = *counter + amount;
    if let Some(cap) = cap {
        if next > cap {
            return Err(Error::BudgetExceeded { resource, cap });
        }
    }
    *counter = next;
    Ok(())
}

impl Usage {
    pub fn charge_oracle_call(&mut self, budget: &ResourceBudget) -> Result<()> {
        charge(
            &mut self.oracle_calls,
            1,
            budget.max_oracle_calls,
            "oracle calls",
        )
    }

    pub fn charge_modexp(&mut self, budget: &ResourceBudget) -> Result<()> {
        charge(
            &mut self.modexps,
            1,
            budget.max_modexps,
            "modular exponentiations",
        )
    }

    pub fn charge_digit_reads(&mut self, amount: u64, budget: &ResourceBudget) -> Result<()> {
        charge(
            &mut self.digit_reads,
            amount,
            budget.max_digit_reads,
            "digit reads",
        )
    }
}

pub trait PlausibilityFunction: Send + Sync + fmt::Debug {
    /// Identifier in the CLI grammar, parameters included.
    fn name(&self) -> String;

    fn budget(&self) -> &ResourceBudget;

    /// Whether outputs depend on the random stream.
    fn is_randomized(&self) -> bool {
        false
    }

    /// Core evaluation. Randomness comes from `rng` only, and every unit of
    /// work is charged to `usage`.
    fn evaluate_with(&self, x: &Instance, rng: &mut dyn RngCore, usage: &mut Usage) -> Result<f64>;

    fn evaluate_metered(
        &self,
        x: &Instance,
        stream: &RandomStream,
        usage: &mut Usage,
    ) -> Result<f64> {
        self.evaluate_with(x, &mut stream.rng(), usage)
    }

    fn evaluate(&self, x: &Instance, stream: &RandomStream) -> Result<f64> {
        self.evaluate_metered(x, stream, &mut Usage::default())
    }
}

/// `p(x) = v` for every input.
#[derive(Debug, Clone)]
pub struct Constant {
    value: f64,
    budget: ResourceBudget,
}

impl Constant {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidParameter(format!(
                "constant forecast must lie in [0, 1], got {value}"
            )));
        }
        Ok(Self {
            value,
            budget: ResourceBudget::new(BudgetClass::Constant),
        })
    }
}

/// The worst-case optimal forecaster.
pub fn constant_half() -> Constant {
    Constant::new(0.5).expect("0.5 is a valid forecast")
}

impl PlausibilityFunction for Constant {
    fn name(&self) -> String {
        format!("constant:v={}", self.value)
    }

    fn budget(&self) -> &ResourceBudget {
        &self.budget
    }

    fn evaluate_with(
        &self,
        _x: &Instance,
        _rng: &mut dyn RngCore,
        _usage: &mut Usage,
    ) -> Result<f64> {
        Ok(clamp_forecast(self.value))
    }
}

/// Prime-number-theorem density with trial division by the primes up to a
/// sieve bound `B`:
///
/// - `ε` if a prime `p <= B` divides `m` and `m != p`;
/// - otherwise `(1 / ln m) * prod_{p <= B} (1 - 1/p)^-1`, clamped.
#[derive(Debug, Clone)]
pub struct Density {
    sieve_bound: u64,
    primes: Vec<u64>,
    survivor_boost: f64,
    budget: ResourceBudget,
}

impl Density {
    pub const MAX_SIEVE_BOUND: u64 = 1 << 20;

    pub fn new(sieve_bound: u64) -> Result<Self> {
        if sieve_bound > Self::MAX_SIEVE_BOUND {
            return Err(Error::guard(
                "density sieve bound",
                sieve_bound,
                Self::MAX_SIEVE_BOUND,
            ));
        }
        let primes = primes_up_to(sieve_bound);
        let survivor_boost = primes
            .iter()
            .map(|&p| 1.0 / (1.0 - 1.0 / p as f64))
            .product();
        Ok(Self {
            sieve_bound,
            primes,
            survivor_boost,
            budget: ResourceBudget::new(BudgetClass::PolyLog),
        })
    }

    pub fn sieve_bound(&self) -> u64 {
        self.sieve_bound
    }

    /// The density estimate for the integer `m >= 3`.
    pub fn density(&self, m: u64) -> Result<f64> {
        if m <= 2 {
            return Err(Error::Domain(format!("density needs m >= 3, got {m}")));
        }
        if self.primes.iter().any(|&p| m.is_multiple_of(p) && m != p) {
            return Ok(EPSILON);
        }
        Ok(clamp_forecast(self.survivor_boost / (m as f64).ln()))
    }
}

/// Free-function form of [`Density::density`].
pub fn density_pnt(m: u64, sieve_bound: u64) -> Result<f64> {
    Density::new(sieve_bound)?.density(m)
}

impl PlausibilityFunction for Density {
    fn name(&self) -> String {
        format!("density:B={}", self.sieve_bound)
    }

    fn budget(&self) -> &ResourceBudget {
        &self.budget
    }

    fn evaluate_with(
        &self,
        x: &Instance,
        _rng: &mut dyn RngCore,
        _usage: &mut Usage,
    ) -> Result<f64> {
        self.density(x.to_integer("density")?)
    }
}

/// Bayes update of `prior` on `rounds` Fermat tests with random bases.
///
/// A base with `a^(m-1) != 1 (mod m)` certifies compositeness and yields
/// exact 0. Otherwise composites are assumed to pass each round with
/// probability 1/2, giving `prior / (prior + (1 - prior) 2^-rounds)`.
/// Carmichael numbers break that assumption.
pub fn fermat_bayes(
    m: u64,
    rounds: u32,
    prior: f64,
    rng: &mut dyn RngCore,
    budget: &ResourceBudget,
    usage: &mut Usage,
) -> Result<f64> {
    if m < 3 || m.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "fermat test needs odd m >= 3, got {m}"
        )));
    }
    if !(0.0..=1.0).contains(&prior) {
        return Err(Error::Domain(format!("prior {prior} outside [0, 1]")));
    }
    for _ in 0..rounds {
        let base = if m == 3 { 2 } else { rng.gen_range(2..=m - 2) };
        usage.charge_modexp(budget)?;
        if pow_mod(base, m - 1, m) != 1 {
            return Ok(0.0);
        }
    }
    let pass_odds = 0.5f64.powi(rounds as i32);
    Ok(clamp_forecast(prior / (prior + (1.0 - prior) * pass_odds)))
}

/// Density prior refined by `k` Fermat rounds. Even inputs skip the Fermat
/// stage and get the density value.
#[derive(Debug, Clone)]
pub struct FermatBayes {
    rounds: u32,
    prior: Density,
    budget: ResourceBudget,
}

impl FermatBayes {
    pub fn new(rounds: u32, sieve_bound: u64) -> Result<Self> {
        Ok(Self {
            rounds,
            prior: Density::new(sieve_bound)?,
            budget: ResourceBudget::new(BudgetClass::Poly).with_modexps(u64::from(rounds)),
        })
    }

    pub fn rounds(&self) -> u32 {
        self.rounds
    }

    /// Estimate for the integer `m`, drawing bases from `rng`.
    pub fn estimate(&self, m: u64, rng: &mut dyn RngCore, usage: &mut Usage) -> Result<f64> {
        let prior = self.prior.density(m)?;
        if m.is_multiple_of(2) {
            return Ok(prior);
        }
        fermat_bayes(m, self.rounds, prior, rng, &self.budget, usage)
    }
}

impl PlausibilityFunction for FermatBayes {
    fn name(&self) -> String {
        format!("fermat:k={},B={}", self.rounds, self.prior.sieve_bound)
    }

    fn budget(&self) -> &ResourceBudget {
        &self.budget
    }

    fn is_randomized(&self) -> bool {
        self.rounds > 0
    }

    fn evaluate_with(&self, x: &Instance, rng: &mut dyn RngCore, usage: &mut Usage) -> Result<f64> {
        self.estimate(x.to_integer("fermat")?, rng, usage)
    }
}

/// A base forecaster with some answers written in by hand.
#[derive(Debug, Clone)]
pub struct HardCodedOverride {
    base: Arc<dyn PlausibilityFunction>,
    table: HashMap<Instance, f64>,
    label: Option<String>,
}

impl HardCodedOverride {
    pub fn new(base: Arc<dyn PlausibilityFunction>, table: HashMap<Instance, f64>) -> Result<Self> {
        if let Some((x, v)) = table.iter().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!(
                "override value {v} for {x} outside [0, 1]"
            )));
        }
        Ok(Self {
            base,
            table,
            label: None,
        })
    }

    /// Records where the table came from, for report metadata.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Reads a JSON object mapping hex instance keys to values.
    pub fn parse_table(json: &str) -> Result<HashMap<Instance, f64>> {
        let raw: HashMap<String, f64> = serde_json::from_str(json)
            .map_err(|e| Error::InvalidParameter(format!("override table: {e}")))?;
        raw.into_iter()
            .map(|(k, v)| Ok((Instance::from_hex_key(&k)?, v)))
            .collect()
    }
}

pub fn hardcoded_override(
    base: Arc<dyn PlausibilityFunction>,
    table: HashMap<Instance, f64>,
) -> Result<HardCodedOverride> {
    HardCodedOverride::new(base, table)
}

impl PlausibilityFunction for HardCodedOverride {
    fn name(&self) -> String {
        match &self.label {
            Some(file) => format!("override:base={},file={file}", self.base.name()),
            None => format!(
                "override:base={},entries={}",
                self.base.name(),
                self.table.len()
            ),
        }
    }

    fn budget(&self) -> &ResourceBudget {
        self.base.budget()
    }

    fn is_randomized(&self) -> bool {
        self.base.is_randomized()
    }

    fn evaluate_with(&self, x: &Instance, rng: &mut dyn RngCore, usage: &mut Usage) -> Result<f64> {
        match self.table.get(x) {
            Some(&v) => Ok(v),
            None => self.base.evaluate_with(x, rng, usage),
        }
    }
}

/// `p = 1_Π`, computed by the problem's exact oracle. Outputs are unclamped.
#[derive(Debug, Clone)]
pub struct ExactOracle {
    problem: Arc<dyn DecisionProblem>,
    budget: ResourceBudget,
}

impl ExactOracle {
    pub fn new(problem: Arc<dyn DecisionProblem>) -> Self {
        Self {
            problem,
            budget: ResourceBudget::new(BudgetClass::Unbounded),
        }
    }
}

pub fn exact_oracle(problem: Arc<dyn DecisionProblem>) -> ExactOracle {
    ExactOracle::new(problem)
}

impl PlausibilityFunction for ExactOracle {
    fn name(&self) -> String {
        "oracle".into()
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
        usage.charge_oracle_call(&self.budget)?;
        Ok(if self.problem.decide(x)? { 1.0 } else { 0.0 })
    }
}
