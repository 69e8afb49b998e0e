//! The improvement relation between two forecasters, judged per length.
//!
//! The relation is a partial order. Per length, exact mode compares means
//! directly and Monte Carlo mode calls a tie whenever the 99% confidence
//! intervals overlap. The aggregate over the tested lengths is
//! finite-horizon evidence only and never claims the asymptotic relation.

use serde::{Deserialize, Serialize};

use super::expected::{score_report, Mode, ScoreReport, ScoreTask};
use super::ScoringRule;
use crate::ensembles::Ensemble;
use crate::error::{Error, Result};
use crate::forecasters::PlausibilityFunction;
use crate::numeric::Z_99;
use crate::problems::DecisionProblem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    PBetter,
    QBetter,
    Tie,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregate {
    /// `p` weakly better at every tested length, strictly at one or more.
    PImproves,
    QImproves,
    IncomparableOnEvidence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthVerdict {
    pub n: usize,
    pub p_mean: f64,
    pub p_stderr: f64,
    pub q_mean: f64,
    pub q_stderr: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub p: String,
    pub q: String,
    pub mode: String,
    pub lengths: Vec<LengthVerdict>,
    pub aggregate: Aggregate,
    pub horizon: String,
}

impl CompareReport {
    pub const CSV_HEADER: &'static str = "n,p_mean,p_stderr,q_mean,q_stderr,verdict";

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for l in &self.lengths {
            let v = match l.verdict {
                Verdict::PBetter => "p-better",
                Verdict::QBetter => "q-better",
                Verdict::Tie => "tie",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                l.n, l.p_mean, l.p_stderr, l.q_mean, l.q_stderr, v
            ));
        }
        out
    }
}

fn judge(exact: bool, pm: f64, pse: f64, qm: f64, qse: f64) -> Verdict {
    if exact {
        return match pm.partial_cmp(&qm) {
            Some(std::cmp::Ordering::Less) => Verdict::PBetter,
            Some(std::cmp::Ordering::Greater) => Verdict::QBetter,
            _ => Verdict::Tie,
        };
    }
    let (p_lo, p_hi) = (pm - Z_99 * pse, pm + Z_99 * pse);
    let (q_lo, q_hi) = (qm - Z_99 * qse, qm + Z_99 * qse);
    if p_hi < q_lo {
        Verdict::PBetter
    } else if q_hi < p_lo {
        Verdict::QBetter
    } else {
        Verdict::Tie
    }
}

/// Compares two score reports over the same lengths and mode.
pub fn compare_reports(p: &ScoreReport, q: &ScoreReport) -> Result<CompareReport> {
    if p.mode != q.mode {
        return Err(Error::ModeMismatch(format!(
            "{} vs {}",
            p.mode.label(),
            q.mode.label()
        )));
    }
    let exact = matches!(p.mode, Mode::Exact);
    let lengths = p
        .entries
        .iter()
        .map(|pe| {
            let qe = q.entry(pe.n).ok_or_else(|| {
                Error::InvalidParameter(format!("length {} missing from second report", pe.n))
            })?;
            Ok(LengthVerdict {
                n: pe.n,
                p_mean: pe.mean,
                p_stderr: pe.stderr,
                q_mean: qe.mean,
                q_stderr: qe.stderr,
                verdict: judge(exact, pe.mean, pe.stderr, qe.mean, qe.stderr),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if lengths.len() != q.entries.len() {
        return Err(Error::InvalidParameter(
            "reports cover different lengths".into(),
        ));
    }
    let any = |v: Verdict| lengths.iter().any(|l| l.verdict == v);
    let aggregate = match (any(Verdict::PBetter), any(Verdict::QBetter)) {
        (true, false) => Aggregate::PImproves,
        (false, true) => Aggregate::QImproves,
        _ => Aggregate::IncomparableOnEvidence,
    };
    let horizon = match (lengths.first(), lengths.last()) {
        (Some(a), Some(b)) => format!("finite-horizon evidence over n = {}..{}", a.n, b.n),
        _ => "no lengths tested".into(),
    };
    Ok(CompareReport {
        p: p.forecaster.clone(),
        q: q.forecaster.clone(),
        mode: p.mode.label().into(),
        lengths,
        aggregate,
        horizon,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn compare(
    p: &dyn PlausibilityFunction,
    q: &dyn PlausibilityFunction,
    problem: &dyn DecisionProblem,
    ensemble: &dyn Ensemble,
    rule: ScoringRule,
    lengths: impl IntoIterator<Item = usize> + Clone,
    mode: Mode,
    seed: u64,
) -> Result<CompareReport> {
    let task = |f| ScoreTask {
        forecaster: f,
        problem,
        ensemble,
        rule,
        seed,
    };
    let pr = score_report(&task(p), lengths.clone(), mode)?;
    let qr = score_report(&task(q), lengths, mode)?;
    compare_reports(&pr, &qr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{UniformBits, UniformOdd};
    use crate::forecasters::{constant_half, exact_oracle, Density};
    use crate::problems::{Parity, Primality};
    use std::sync::Arc;

    #[test]
    fn oracle_beats_half() {
        let o = exact_oracle(Arc::new(Parity));
        let h = constant_half();
        let r = compare(
            &o,
            &h,
            &Parity,
            &UniformBits,
            ScoringRule::Brier,
            1..=6,
            Mode::Exact,
            0,
        )
        .unwrap();
        assert!(r.lengths.iter().all(|l| l.verdict == Verdict::PBetter));
        assert_eq!(r.aggregate, Aggregate::PImproves);
    }

    #[test]
    fn reflexive_ties() {
        let d = Density::new(10).unwrap();
        for mode in [Mode::Exact, Mode::MonteCarlo { samples: 2000 }] {
            let r = compare(
                &d,
                &d,
                &Primality,
                &UniformOdd,
                ScoringRule::Brier,
                6..=9,
                mode,
                3,
            )
            .unwrap();
            assert!(r.lengths.iter().all(|l| l.verdict == Verdict::Tie));
            assert_eq!(r.aggregate, Aggregate::IncomparableOnEvidence);
        }
    }

    #[test]
    fn density_beats_half_on_primality() {
        let d = Density::new(100).unwrap();
        let h = constant_half();
        let r = compare(
            &d,
            &h,
            &Primality,
            &UniformOdd,
            ScoringRule::Brier,
            8..=16,
            Mode::Exact,
            0,
        )
        .unwrap();
        assert!(r.lengths.iter().all(|l| l.verdict == Verdict::PBetter));
    }

    #[test]
    fn strict_verdicts_are_antisymmetric() {
        let d = Density::new(100).unwrap();
        let h = constant_half();
        let a = compare(
            &d,
            &h,
            &Primality,
            &UniformOdd,
            ScoringRule::Brier,
            4..=9,
            Mode::Exact,
            0,
        )
        .unwrap();
        let b = compare(
            &h,
            &d,
            &Primality,
            &UniformOdd,
            ScoringRule::Brier,
            4..=9,
            Mode::Exact,
            0,
        )
        .unwrap();
        assert!(!(a.aggregate == Aggregate::PImproves && b.aggregate == Aggregate::PImproves));
        for (x, y) in a.lengths.iter().zip(&b.lengths) {
            match x.verdict {
                Verdict::PBetter => assert_eq!(y.verdict, Verdict::QBetter),
                Verdict::QBetter => assert_eq!(y.verdict, Verdict::PBetter),
                Verdict::Tie => assert_eq!(y.verdict, Verdict::Tie),
            }
        }
    }

    #[test]
    fn mismatched_modes_rejected() {
        let h = constant_half();
        let task = ScoreTask {
            forecaster: &h,
            problem: &Parity,
            ensemble: &UniformBits,
            rule: ScoringRule::Brier,
            seed: 0,
        };
        let a = score_report(&task, 3..=4, Mode::Exact).unwrap();
        let b = score_report(&task, 3..=4, Mode::MonteCarlo { samples: 10 }).unwrap();
        assert!(matches!(
            compare_reports(&a, &b),
            Err(Error::ModeMismatch(_))
        ));
    }
}
