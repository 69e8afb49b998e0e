//! Proper scoring rules and everything evaluated with them.
//!
//! Scores are losses: lower is better.

pub mod compare;
pub mod dominance;
pub mod expected;
pub mod propriety;
pub mod worst_case;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use compare::{compare, compare_reports, Aggregate, CompareReport, LengthVerdict, Verdict};
pub use dominance::{dominance_check, grid_dominator, DominanceResult, WorldSet};
pub use expected::{expected_score, score_report, Mode, ScoreEntry, ScoreReport, ScoreTask};
pub use propriety::{check_propriety, ProprietyReport};
pub use worst_case::{worst_case_report, WorstCaseEntry};

/// Global forecast clamp.
pub const EPSILON: f64 = 1e-9;

pub fn clamp_forecast(x: f64) -> f64 {
    x.clamp(EPSILON, 1.0 - EPSILON)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoringRule {
    Brier,
    Log,
    /// `|o - x|`: not proper, shipped to show what a propriety failure
    /// looks like.
    Absolute,
}

impl ScoringRule {
    pub fn score(self, outcome: bool, forecast: f64) -> Result<f64> {
        match self {
            ScoringRule::Brier => brier(outcome, forecast),
            ScoringRule::Log => log_score(outcome, forecast),
            ScoringRule::Absolute => absolute(outcome, forecast),
        }
    }

    /// Expected score under a Bernoulli(`belief`) outcome, with `0 * inf = 0`.
    pub fn expected(self, belief: f64, forecast: f64) -> f64 {
        let part = |weight: f64, outcome: bool| {
            if weight == 0.0 {
                0.0
            } else {
                weight * self.score(outcome, forecast).unwrap_or(f64::INFINITY)
            }
        };
        part(belief, true) + part(1.0 - belief, false)
    }

    pub fn is_proper(self) -> bool {
        !matches!(self, ScoringRule::Absolute)
    }
}

impl fmt::Display for ScoringRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoringRule::Brier => "brier",
            ScoringRule::Log => "log",
            ScoringRule::Absolute => "absolute",
        })
    }
}

impl FromStr for ScoringRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brier" => Ok(ScoringRule::Brier),
            "log" => Ok(ScoringRule::Log),
            "absolute" => Ok(ScoringRule::Absolute),
            other => Err(Error::Unknown {
                kind: "rule",
                name: other.to_string(),
            }),
        }
    }
}

fn check_forecast(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("forecast {x} outside [0, 1]")));
    }
    Ok(())
}

fn indicator(o: bool) -> f64 {
    if o {
        1.0
    } else {
        0.0
    }
}

/// `(o - x)^2`.
pub fn brier(outcome: bool, forecast: f64) -> Result<f64> {
    check_forecast(forecast)?;
    let d = indicator(outcome) - forecast;
    Ok(d * d)
}

/// `-ln x` on a true outcome, `-ln(1 - x)` on a false one. A certain
/// forecast on the wrong side is an error rather than `inf`.
pub fn log_score(outcome: bool, forecast: f64) -> Result<f64> {
    check_forecast(forecast)?;
    let p = if outcome { forecast } else { 1.0 - forecast };
    if p == 0.0 {
        return Err(Error::InfiniteScore {
            outcome: u8::from(outcome),
            forecast,
        });
    }
    Ok(-p.ln())
}

pub fn absolute(outcome: bool, forecast: f64) -> Result<f64> {
    check_forecast(forecast)?;
    Ok((indicator(outcome) - forecast).abs())
}
