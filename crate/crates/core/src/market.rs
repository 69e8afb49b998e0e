//! Two-period asset market with computationally constrained buyers.
//!
//! Each instance `x` is an asset paying `F(x)` (here `1_Π(x)`), offered by a
//! seller at price `f(x)`. A buyer holding `g(x)` units gains
//! `b_n(g) = sum_x (F(x) - f(x)) g(x)` over the length-`n` assets it trades.
//! Short positions (`g(x) < 0`) are allowed.
//!
//! "Infinitely often" has no finite-horizon meaning, so verdicts use a
//! frequency proxy over the tested lengths beyond a burn-in and are labeled
//! as such.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::Ensemble;
use crate::error::{Error, Result};
use crate::forecasters::{FermatBayes, PlausibilityFunction, ResourceBudget, Usage};
use crate::numeric::{compensated_sum, mean_and_stderr};
use crate::problems::DecisionProblem;
use crate::stream::{experiment, RandomStream};
use crate::{Instance, SCHEMA_VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PayoffKind {
    /// One settlement per length.
    Deterministic,
    /// Gains are expectations over the buyer's randomized asset generation,
    /// realized by averaging `reps` independent settlements.
    Expectation { reps: usize },
}

impl PayoffKind {
    pub fn reps(&self) -> usize {
        match self {
            PayoffKind::Deterministic => 1,
            PayoffKind::Expectation { reps } => *reps,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MarketConfig {
    pub problem: Arc<dyn DecisionProblem>,
    pub ensemble: Arc<dyn Ensemble>,
    pub seller: Arc<dyn PlausibilityFunction>,
    pub n_lo: usize,
    pub n_hi: usize,
    pub payoff: PayoffKind,
    pub seed: u64,
}

impl MarketConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_lo > self.n_hi {
            return Err(Error::InvalidParameter(format!(
                "empty length range {}..{}",
                self.n_lo, self.n_hi
            )));
        }
        if self.n_hi > self.problem.feasible_length_bound() {
            return Err(Error::guard(
                format!("{} market length", self.problem.name()),
                self.n_hi as u64,
                self.problem.feasible_length_bound() as u64,
            ));
        }
        if self.payoff.reps() == 0 {
            return Err(Error::InvalidParameter(
                "expectation payoff needs reps > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn view(&self) -> MarketView<'_> {
        MarketView {
            seller: self.seller.as_ref(),
            ensemble: self.ensemble.as_ref(),
            seed: self.seed,
        }
    }

    /// Payoff `F(x)`.
    pub fn payoff(&self, x: &Instance) -> Result<f64> {
        Ok(if self.problem.decide(x)? { 1.0 } else { 0.0 })
    }
}

/// What a buyer can see: the seller's prices and the asset sampler.
#[derive(Clone, Copy)]
pub struct MarketView<'a> {
    pub seller: &'a dyn PlausibilityFunction,
    pub ensemble: &'a dyn Ensemble,
    pub seed: u64,
}

impl MarketView<'_> {
    /// Price `f(x)`; a randomized seller is keyed by the asset, so quotes
    /// are stable.
    pub fn price(&self, x: &Instance) -> Result<f64> {
        let stream = RandomStream::for_instance(self.seed, experiment::PRICE, x);
        self.seller.evaluate(x, &stream)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub instance: Instance,
    pub quantity: f64,
}

/// Trading limits for one length: support size, per-asset magnitude and
/// gross notional `sum |g(x)| f(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraints {
    pub max_support: usize,
    pub max_quantity: f64,
    pub max_notional: f64,
}

impl Constraints {
    /// Checks `positions` at length `n` against every cap.
    pub fn check(&self, n: usize, positions: &[Position], prices: &[f64]) -> Result<()> {
        if positions.len() > self.max_support {
            return Err(Error::ConstraintViolated {
                cap: "max_support",
                detail: format!("{} positions, cap {}", positions.len(), self.max_support),
            });
        }
        let mut seen = HashSet::new();
        for p in positions {
            if p.instance.len() != n && !is_length_free(n) {
                return Err(Error::ConstraintViolated {
                    cap: "asset_length",
                    detail: format!(
                        "asset {} has length {}, market length {n}",
                        p.instance,
                        p.instance.len()
                    ),
                });
            }
            if !seen.insert(&p.instance) {
                return Err(Error::ConstraintViolated {
                    cap: "max_support",
                    detail: format!("asset {} listed twice", p.instance),
                });
            }
            if !p.quantity.is_finite() || p.quantity.abs() > self.max_quantity {
                return Err(Error::ConstraintViolated {
                    cap: "max_quantity",
                    detail: format!(
                        "quantity {} on {}, cap {}",
                        p.quantity, p.instance, self.max_quantity
                    ),
                });
            }
        }
        let notional = compensated_sum(
            positions
                .iter()
                .zip(prices)
                .map(|(p, f)| p.quantity.abs() * f),
        );
        if notional > self.max_notional * (1.0 + 1e-12) {
            return Err(Error::ConstraintViolated {
                cap: "max_notional",
                detail: format!("gross notional {notional}, cap {}", self.max_notional),
            });
        }
        Ok(())
    }
}

// Length-agnostic ensembles (index ranges) settle at length 0.
fn is_length_free(n: usize) -> bool {
    n == 0
}

pub trait BuyerStrategy: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn budget(&self) -> &ResourceBudget;

    fn constraints(&self, n: usize) -> Constraints;

    fn select(
        &self,
        n: usize,
        view: &MarketView<'_>,
        stream: &RandomStream,
    ) -> Result<Vec<Position>>;
}

/// `sum (F(x) - f(x)) g(x)` after checking every cap.
pub fn settle_positions(
    config: &MarketConfig,
    constraints: &Constraints,
    n: usize,
    positions: &[Position],
) -> Result<f64> {
    let view = config.view();
    let prices = positions
        .iter()
        .map(|p| view.price(&p.instance))
        .collect::<Result<Vec<_>>>()?;
    constraints.check(n, positions, &prices)?;
    let terms = positions
        .iter()
        .zip(&prices)
        .map(|(p, f)| Ok((config.payoff(&p.instance)? - f) * p.quantity))
        .collect::<Result<Vec<_>>>()?;
    Ok(compensated_sum(terms))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainStat {
    pub n: usize,
    pub mean_gain: f64,
    pub stderr: f64,
    pub reps: usize,
}

/// Gain at length `n`: one settlement for deterministic payoffs, or the
/// mean over `reps` independent repetitions.
pub fn settle(config: &MarketConfig, buyer: &dyn BuyerStrategy, n: usize) -> Result<GainStat> {
    config.validate()?;
    if n > config.problem.feasible_length_bound() {
        return Err(Error::guard(
            "market length",
            n as u64,
            config.problem.feasible_length_bound() as u64,
        ));
    }
    let reps = config.payoff.reps();
    let constraints = buyer.constraints(n);
    let view = config.view();
    let gains: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let stream = RandomStream::new(config.seed, experiment::BUYER, n as u64, rep);
            let positions = buyer.select(n, &view, &stream)?;
            settle_positions(config, &constraints, n, &positions)
        })
        .collect::<Result<_>>()?;
    let (mean_gain, stderr) = mean_and_stderr(&gains);
    Ok(GainStat {
        n,
        mean_gain,
        stderr,
        reps,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainSeries {
    pub gains: Vec<GainStat>,
}

impl GainSeries {
    pub fn from_means(start: usize, means: &[f64]) -> Self {
        Self {
            gains: means
                .iter()
                .enumerate()
                .map(|(i, &m)| GainStat {
                    n: start + i,
                    mean_gain: m,
                    stderr: 0.0,
                    reps: 1,
                })
                .collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,mean_gain,stderr\n");
        for g in &self.gains {
            out.push_str(&format!("{},{},{}\n", g.n, g.mean_gain, g.stderr));
        }
        out
    }
}

pub fn gain_series(config: &MarketConfig, buyer: &dyn BuyerStrategy) -> Result<GainSeries> {
    config.validate()?;
    let gains = (config.n_lo..=config.n_hi)
        .map(|n| settle(config, buyer, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(GainSeries { gains })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictParams {
    /// Absolute floor a gain must reach to count as non-negligible.
    pub delta: f64,
    /// Fraction of tested lengths standing in for "infinitely often".
    pub rho: f64,
    /// Only lengths strictly above the burn-in are tested.
    pub burn_in: usize,
}

impl VerdictParams {
    pub const MIN_TESTED: usize = 8;

    /// Defaults: `delta = 0.05`, `rho = 0.5`, burn-in two past the first
    /// length.
    pub fn defaults_for(n_lo: usize) -> Self {
        Self {
            delta: 0.05,
            rho: 0.5,
            burn_in: n_lo + 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegligibilityReport {
    pub tested_lengths: usize,
    pub positive_fraction: f64,
    pub negative_fraction: f64,
    /// `b_n >= delta` for at least `rho` of tested lengths.
    pub positive_non_negligible: bool,
    /// Same test on `-b_n`.
    pub negative_non_negligible: bool,
    /// Slope of `-ln b_n` against `ln n` over positive gains, for
    /// diagnostics only.
    pub fitted_exponent: Option<f64>,
}

fn tested(series: &GainSeries, params: &VerdictParams) -> Result<Vec<GainStat>> {
    let beyond: Vec<GainStat> = series
        .gains
        .iter()
        .filter(|g| g.n > params.burn_in)
        .cloned()
        .collect();
    if beyond.len() < VerdictParams::MIN_TESTED {
        return Err(Error::SeriesTooShort {
            have: beyond.len(),
            need: VerdictParams::MIN_TESTED,
        });
    }
    Ok(beyond)
}

pub fn classify_negligibility(
    series: &GainSeries,
    params: &VerdictParams,
) -> Result<NegligibilityReport> {
    let t = tested(series, params)?;
    let frac = |pred: &dyn Fn(f64) -> bool| {
        t.iter().filter(|g| pred(g.mean_gain)).count() as f64 / t.len() as f64
    };
    let positive_fraction = frac(&|b| b >= params.delta);
    let negative_fraction = frac(&|b| -b >= params.delta);

    let pts: Vec<(f64, f64)> = t
        .iter()
        .filter(|g| g.mean_gain > 0.0 && g.n > 0)
        .map(|g| ((g.n as f64).ln(), -g.mean_gain.ln()))
        .collect();
    let fitted_exponent = (pts.len() >= 2).then(|| {
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        sxy / sxx
    });

    Ok(NegligibilityReport {
        tested_lengths: t.len(),
        positive_fraction,
        negative_fraction,
        positive_non_negligible: positive_fraction >= params.rho,
        negative_non_negligible: negative_fraction >= params.rho,
        fitted_exponent,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArbitrageVerdict {
    /// Every tested gain is nonnegative and a `rho` fraction beyond burn-in
    /// is strictly positive.
    pub strict: bool,
    /// Positive gains non-negligible often, negative gains not.
    pub relaxed: bool,
    pub params: VerdictParams,
    pub negligibility: NegligibilityReport,
    pub min_gain: f64,
    pub strictly_positive_fraction: f64,
    pub label: String,
}

pub fn arbitrage_verdict(series: &GainSeries, params: &VerdictParams) -> Result<ArbitrageVerdict> {
    let negligibility = classify_negligibility(series, params)?;
    let t = tested(series, params)?;
    let min_gain = series
        .gains
        .iter()
        .map(|g| g.mean_gain)
        .fold(f64::INFINITY, f64::min);
    let strictly_positive_fraction =
        t.iter().filter(|g| g.mean_gain > 0.0).count() as f64 / t.len() as f64;
    let strict = min_gain >= 0.0 && strictly_positive_fraction >= params.rho;
    let relaxed = negligibility.positive_non_negligible && !negligibility.negative_non_negligible;
    Ok(ArbitrageVerdict {
        strict,
        relaxed,
        params: *params,
        negligibility,
        min_gain,
        strictly_positive_fraction,
        label: "finite-horizon proxy".into(),
    })
}

/// Samples candidate assets, estimates their payoff with a Fermat-Bayes
/// forecaster and trades wherever the estimate and the price differ by
/// more than `margin`, largest edges first, until a cap binds.
#[derive(Clone, Debug)]
pub struct FermatGreedyBuyer {
    estimator: FermatBayes,
    pub support: usize,
    pub margin: f64,
    pub candidates: usize,
    /// Units per unit of edge; quantities are `edge * unit`, capped.
    pub unit: f64,
    pub max_quantity: f64,
    pub max_notional: f64,
}

impl FermatGreedyBuyer {
    pub fn new(rounds: u32, sieve_bound: u64, support: usize, margin: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&margin) {
            return Err(Error::InvalidParameter(format!(
                "margin {margin} outside [0, 1)"
            )));
        }
        Ok(Self {
            estimator: FermatBayes::new(rounds, sieve_bound)?,
            support,
            margin,
            candidates: 4 * support,
            unit: 1.0,
            max_quantity: 1.0,
            max_notional: support as f64,
        })
    }

    pub fn with_candidates(mut self, candidates: usize) -> Self {
        self.candidates = candidates;
        self
    }

    pub fn with_notional(mut self, cap: f64) -> Self {
        self.max_notional = cap;
        self
    }
}

impl BuyerStrategy for FermatGreedyBuyer {
    fn name(&self) -> String {
        format!(
            "fermat-greedy:k={},support={},margin={}",
            self.estimator.rounds(),
            self.support,
            self.margin
        )
    }

    fn budget(&self) -> &ResourceBudget {
        self.estimator.budget()
    }

    fn constraints(&self, _n: usize) -> Constraints {
        Constraints {
            max_support: self.support,
            max_quantity: self.max_quantity,
            max_notional: self.max_notional,
        }
    }

    fn select(
        &self,
        n: usize,
        view: &MarketView<'_>,
        stream: &RandomStream,
    ) -> Result<Vec<Position>> {
        let mut rng = stream.rng();
        let mut seen = HashSet::new();
        let mut scored = Vec::new();
        for i in 0..self.candidates as u64 {
            let x = view.ensemble.sample_with(n, &mut rng)?;
            if !seen.insert(x.clone()) {
                continue;
            }
            let price = view.price(&x)?;
            let m = x.to_integer("fermat-greedy")?;
            let mut est_rng = stream.child(experiment::FORECAST, i).rng();
            let estimate = self
                .estimator
                .estimate(m, &mut est_rng, &mut Usage::default())?;
            let edge = estimate - price;
            if edge.abs() > self.margin {
                scored.push((x, edge, price));
            }
        }
        scored.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
        let mut positions = Vec::new();
        let mut notional = 0.0;
        for (x, edge, price) in scored {
            if positions.len() == self.support {
                break;
            }
            let quantity = (edge * self.unit).clamp(-self.max_quantity, self.max_quantity);
            let cost = quantity.abs() * price;
            if notional + cost > self.max_notional {
                break;
            }
            notional += cost;
            positions.push(Position {
                instance: x,
                quantity,
            });
        }
        Ok(positions)
    }
}

/// Serialized market run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarketReport {
    pub schema_version: u32,
    pub config: serde_json::Value,
    pub gains: GainSeries,
    pub verdict: ArbitrageVerdict,
}

impl MarketReport {
    pub fn new(config: serde_json::Value, gains: GainSeries, verdict: ArbitrageVerdict) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config,
            gains,
            verdict,
        }
    }

    /// Recomputes the verdict from the stored series and parameters.
    pub fn reverdict(&self) -> Result<ArbitrageVerdict> {
        arbitrage_verdict(&self.gains, &self.verdict.params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::UniformOdd;
    use crate::forecasters::{constant_half, exact_oracle};
    use crate::problems::Primality;

    fn config(seller: Arc<dyn PlausibilityFunction>) -> MarketConfig {
        MarketConfig {
            problem: Arc::new(Primality),
            ensemble: Arc::new(UniformOdd),
            seller,
            n_lo: 8,
            n_hi: 18,
            payoff: PayoffKind::Expectation { reps: 10 },
            seed: 7,
        }
    }

    fn loose() -> Constraints {
        Constraints {
            max_support: 64,
            max_quantity: 10.0,
            max_notional: 1e9,
        }
    }

    #[test]
    fn single_long_on_true_asset() {
        let c = config(Arc::new(constant_half()));
        let pos = vec![Position {
            instance: Instance::from_integer(131),
            quantity: 1.0,
        }];
        assert_eq!(settle_positions(&c, &loose(), 8, &pos).unwrap(), 0.5);
    }

    #[test]
    fn caps_are_enforced() {
        let c = config(Arc::new(constant_half()));
        let x = Instance::from_integer(131);
        let too_big = vec![Position {
            instance: x.clone(),
            quantity: 11.0,
        }];
        let err = settle_positions(&c, &loose(), 8, &too_big).unwrap_err();
        assert!(matches!(
            err,
            Error::ConstraintViolated {
                cap: "max_quantity",
                ..
            }
        ));

        let dup = vec![
            Position {
                instance: x.clone(),
                quantity: 1.0,
            },
            Position {
                instance: x.clone(),
                quantity: 1.0,
            },
        ];
        assert!(settle_positions(&c, &loose(), 8, &dup).is_err());

        let tight = Constraints {
            max_notional: 0.4,
            ..loose()
        };
        let one = vec![Position {
            instance: x,
            quantity: 1.0,
        }];
        let err = settle_positions(&c, &tight, 8, &one).unwrap_err();
        assert!(matches!(
            err,
            Error::ConstraintViolated {
                cap: "max_notional",
                ..
            }
        ));

        let support = Constraints {
            max_support: 0,
            ..loose()
        };
        let err = settle_positions(
            &c,
            &support,
            8,
            &[Position {
                instance: Instance::from_integer(133),
                quantity: 1.0,
            }],
        );
        assert!(matches!(
            err,
            Err(Error::ConstraintViolated {
                cap: "max_support",
                ..
            })
        ));
    }

    #[test]
    fn wrong_length_asset_rejected() {
        let c = config(Arc::new(constant_half()));
        let pos = vec![Position {
            instance: Instance::from_integer(13),
            quantity: 1.0,
        }];
        assert!(settle_positions(&c, &loose(), 8, &pos).is_err());
    }

    #[test]
    fn greedy_buyer_finds_nothing_against_oracle_prices() {
        let c = config(Arc::new(exact_oracle(Arc::new(Primality))));
        let buyer = FermatGreedyBuyer::new(10, 100, 32, 0.1).unwrap();
        for n in 8..=12 {
            let s = RandomStream::new(7, experiment::BUYER, n as u64, 0);
            assert!(buyer.select(n, &c.view(), &s).unwrap().is_empty());
            assert_eq!(settle(&c, &buyer, n).unwrap().mean_gain, 0.0);
        }
    }

    #[test]
    fn infeasible_length_guarded() {
        let mut c = config(Arc::new(constant_half()));
        c.n_hi = 70;
        assert!(c.validate().unwrap_err().is_resource_guard());
    }

    #[test]
    fn negligibility_examples() {
        let p = VerdictParams {
            delta: 0.05,
            rho: 0.5,
            burn_in: 2,
        };
        let constant = GainSeries::from_means(1, &[0.3; 12]);
        let r = classify_negligibility(&constant, &p).unwrap();
        assert!(r.positive_non_negligible && !r.negative_non_negligible);

        let zero = GainSeries::from_means(1, &[0.0; 12]);
        let r = classify_negligibility(&zero, &p).unwrap();
        assert!(!r.positive_non_negligible && !r.negative_non_negligible);
        assert_eq!(r.fitted_exponent, None);

        let cubic: Vec<f64> = (1..=12).map(|n| (n as f64).powi(-3)).collect();
        let r = classify_negligibility(&GainSeries::from_means(1, &cubic), &p).unwrap();
        assert!((r.fitted_exponent.unwrap() - 3.0).abs() < 1e-9);
        assert!(!r.positive_non_negligible);
        assert_eq!(r.positive_fraction, 0.0);
    }

    #[test]
    fn short_series_rejected() {
        let p = VerdictParams::defaults_for(8);
        let s = GainSeries::from_means(8, &[0.3; 9]);
        assert!(matches!(
            classify_negligibility(&s, &p),
            Err(Error::SeriesTooShort { have: 6, need: 8 })
        ));
    }

    #[test]
    fn verdict_examples() {
        let p = VerdictParams {
            delta: 0.05,
            rho: 0.5,
            burn_in: 2,
        };
        let v = arbitrage_verdict(&GainSeries::from_means(1, &[0.0; 12]), &p).unwrap();
        assert!(!v.strict && !v.relaxed);
        let v = arbitrage_verdict(&GainSeries::from_means(1, &[0.3; 12]), &p).unwrap();
        assert!(v.strict && v.relaxed);
        let alt: Vec<f64> = (0..12)
            .map(|i| if i % 2 == 0 { 0.3 } else { -0.3 })
            .collect();
        let v = arbitrage_verdict(&GainSeries::from_means(1, &alt), &p).unwrap();
        assert!(!v.strict && !v.relaxed);
        assert_eq!(v.label, "finite-horizon proxy");
    }
}
