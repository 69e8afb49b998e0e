//! Expected score of a forecaster on a distributional problem, per length.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ScoringRule;
use crate::ensembles::Ensemble;
use crate::error::{Error, Result};
use crate::forecasters::PlausibilityFunction;
use crate::numeric::{compensated_sum, mean_and_stderr};
use crate::problems::DecisionProblem;
use crate::stream::{experiment, RandomStream};
use crate::{Instance, SCHEMA_VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum Mode {
    Exact,
    MonteCarlo { samples: usize },
}

impl Mode {
    pub fn label(&self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::MonteCarlo { .. } => "monte-carlo",
        }
    }
}

/// Everything needed to score one forecaster.
#[derive(Clone, Copy)]
pub struct ScoreTask<'a> {
    pub forecaster: &'a dyn PlausibilityFunction,
    pub problem: &'a dyn DecisionProblem,
    pub ensemble: &'a dyn Ensemble,
    pub rule: ScoringRule,
    pub seed: u64,
}

impl ScoreTask<'_> {
    /// Score of the forecast on one instance. The forecaster's randomness is
    /// keyed by the instance, so `p` is a fixed function for a given seed.
    pub fn instance_score(&self, x: &Instance) -> Result<f64> {
        let stream = RandomStream::for_instance(self.seed, experiment::FORECAST, x);
        let forecast = self.forecaster.evaluate(x, &stream)?;
        let truth = self.problem.decide(x)?;
        self.rule.score(truth, forecast)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub n: usize,
    pub mode: String,
    pub mean: f64,
    /// Sample standard deviation over √samples; 0 in exact mode.
    pub stderr: f64,
    /// Draws in Monte Carlo mode, support size in exact mode.
    pub samples: usize,
}

/// Expected score at length `n`.
///
/// Exact mode sums `D_n(x) * B(1_Π(x), p(x))` over the enumerated support.
/// Monte Carlo mode averages over draws from per-sample substreams. Both
/// evaluate in parallel and accumulate in index order, so the result does
/// not depend on the worker count.
pub fn expected_score(task: &ScoreTask<'_>, n: usize, mode: Mode) -> Result<ScoreEntry> {
    match mode {
        Mode::Exact => {
            let support = task.ensemble.enumerate(n)?;
            let terms: Vec<f64> = support
                .par_iter()
                .map(|(x, p)| Ok(p * task.instance_score(x)?))
                .collect::<Result<_>>()?;
            Ok(ScoreEntry {
                n,
                mode: mode.label().into(),
                mean: compensated_sum(terms),
                stderr: 0.0,
                samples: support.len(),
            })
        }
        Mode::MonteCarlo { samples } => {
            if samples == 0 {
                return Err(Error::InvalidParameter(
                    "monte-carlo mode needs samples > 0".into(),
                ));
            }
            let scores: Vec<f64> = (0..samples as u64)
                .into_par_iter()
                .map(|i| {
                    let s = RandomStream::new(task.seed, experiment::SAMPLE, n as u64, i);
                    let x = task.ensemble.sample(n, &s)?;
                    task.instance_score(&x)
                })
                .collect::<Result<_>>()?;
            let (mean, stderr) = mean_and_stderr(&scores);
            Ok(ScoreEntry {
                n,
                mode: mode.label().into(),
                mean,
                stderr,
                samples,
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub schema_version: u32,
    pub problem: String,
    pub ensemble: String,
    pub forecaster: String,
    pub rule: ScoringRule,
    pub seed: u64,
    pub mode: Mode,
    pub entries: Vec<ScoreEntry>,
}

pub fn score_report(
    task: &ScoreTask<'_>,
    lengths: impl IntoIterator<Item = usize>,
    mode: Mode,
) -> Result<ScoreReport> {
    let entries = lengths
        .into_iter()
        .map(|n| expected_score(task, n, mode))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScoreReport {
        schema_version: SCHEMA_VERSION,
        problem: task.problem.name().into(),
        ensemble: task.ensemble.name(),
        forecaster: task.forecaster.name(),
        rule: task.rule,
        seed: task.seed,
        mode,
        entries,
    })
}

impl ScoreReport {
    pub const CSV_HEADER: &'static str = "n,mode,mean,stderr,samples";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for e in &self.entries {
            writeln!(
                out,
                "{},{},{},{},{}",
                e.n, e.mode, e.mean, e.stderr, e.samples
            )
            .expect("write to string");
        }
        out
    }

    pub fn entry(&self, n: usize) -> Option<&ScoreEntry> {
        self.entries.iter().find(|e| e.n == n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{UniformBits, UniformOdd};
    use crate::forecasters::{constant_half, exact_oracle, Constant};
    use crate::problems::{Parity, Primality};
    use std::sync::Arc;

    #[test]
    fn constant_half_scores_a_quarter() {
        let c = constant_half();
        let task = ScoreTask {
            forecaster: &c,
            problem: &Parity,
            ensemble: &UniformBits,
            rule: ScoringRule::Brier,
            seed: 0,
        };
        for n in 1..=8 {
            assert_eq!(expected_score(&task, n, Mode::Exact).unwrap().mean, 0.25);
        }
        let log = ScoreTask {
            rule: ScoringRule::Log,
            ..task
        };
        let e = expected_score(&log, 5, Mode::Exact).unwrap();
        assert!((e.mean - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn oracle_scores_zero() {
        let o = exact_oracle(Arc::new(Primality));
        let task = ScoreTask {
            forecaster: &o,
            problem: &Primality,
            ensemble: &UniformOdd,
            rule: ScoringRule::Brier,
            seed: 0,
        };
        assert_eq!(expected_score(&task, 10, Mode::Exact).unwrap().mean, 0.0);
    }

    #[test]
    fn point_nine_on_parity_length_three() {
        // 4 of 8 strings are odd: .5 * .01 + .5 * .81
        let c = Constant::new(0.9).unwrap();
        let task = ScoreTask {
            forecaster: &c,
            problem: &Parity,
            ensemble: &UniformBits,
            rule: ScoringRule::Brier,
            seed: 0,
        };
        let e = expected_score(&task, 3, Mode::Exact).unwrap();
        assert!((e.mean - 0.41).abs() < 1e-15);
        assert_eq!(e.samples, 8);
    }

    #[test]
    fn zero_samples_rejected() {
        let c = constant_half();
        let task = ScoreTask {
            forecaster: &c,
            problem: &Parity,
            ensemble: &UniformBits,
            rule: ScoringRule::Brier,
            seed: 0,
        };
        assert!(expected_score(&task, 3, Mode::MonteCarlo { samples: 0 }).is_err());
        assert!(expected_score(&task, 30, Mode::Exact)
            .unwrap_err()
            .is_resource_guard());
    }

    #[test]
    fn csv_layout() {
        let c = constant_half();
        let task = ScoreTask {
            forecaster: &c,
            problem: &Parity,
            ensemble: &UniformBits,
            rule: ScoringRule::Brier,
            seed: 0,
        };
        let r = score_report(&task, 2..=3, Mode::Exact).unwrap();
        assert_eq!(
            r.to_csv(),
            "n,mode,mean,stderr,samples\n2,exact,0.25,0,4\n3,exact,0.25,0,8\n"
        );
    }
}
