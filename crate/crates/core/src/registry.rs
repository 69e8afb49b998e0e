//! Parsing of textual identifiers: `name[:key=value,...]`.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::path::Path;
use std::sync::Arc;

use crate::ensembles::{Ensemble, IndexRange, UniformBits, UniformOdd};
use crate::error::{Error, Result};
use crate::forecasters::{
    Constant, Density, ExactOracle, FermatBayes, HardCodedOverride, InductionForecaster,
    PlausibilityFunction,
};
use crate::market::FermatGreedyBuyer;
use crate::problems::{problem_by_name, DecisionProblem, PiDigitStore};

/// A name with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Spec {
    pub name: String,
    pub params: BTreeMap<String, String>,
}

impl Spec {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, rest) = match text.split_once(':') {
            Some((n, r)) => (n, Some(r)),
            None => (text, None),
        };
        if name.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "empty identifier in {text:?}"
            )));
        }
        let mut params = BTreeMap::new();
        if let Some(rest) = rest {
            for pair in rest.split(',').filter(|p| !p.is_empty()) {
                let (k, v) = pair.split_once('=').ok_or_else(|| {
                    Error::InvalidParameter(format!("expected key=value, got {pair:?} in {text:?}"))
                })?;
                if params
                    .insert(k.trim().to_string(), v.trim().to_string())
                    .is_some()
                {
                    return Err(Error::InvalidParameter(format!(
                        "repeated key {k:?} in {text:?}"
                    )));
                }
            }
        }
        Ok(Self {
            name: name.to_string(),
            params,
        })
    }

    fn take<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.params.remove(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| {
                Error::InvalidParameter(format!("{}: bad value {v:?} for {key}", self.name))
            }),
        }
    }

    fn require<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        self.take(key)?.ok_or_else(|| {
            Error::InvalidParameter(format!("{}: missing parameter {key}", self.name))
        })
    }

    fn finish(self) -> Result<()> {
        match self.params.keys().next() {
            None => Ok(()),
            Some(k) => Err(Error::InvalidParameter(format!(
                "{}: unexpected parameter {k}",
                self.name
            ))),
        }
    }
}

pub fn problem(name: &str, store: Arc<PiDigitStore>) -> Result<Arc<dyn DecisionProblem>> {
    problem_by_name(name.trim(), store)
}

pub fn ensemble(text: &str) -> Result<Arc<dyn Ensemble>> {
    let mut spec = Spec::parse(text)?;
    let e: Arc<dyn Ensemble> = match spec.name.as_str() {
        "uniform-bits" => Arc::new(UniformBits),
        "uniform-odd" => Arc::new(UniformOdd),
        "index-range" => {
            let lo = spec.require("lo")?;
            let hi = spec.require("hi")?;
            Arc::new(IndexRange::new(lo, hi)?)
        }
        _ => {
            return Err(Error::Unknown {
                kind: "ensemble",
                name: spec.name,
            })
        }
    };
    spec.finish()?;
    Ok(e)
}

/// Builds a forecaster. `problem` backs the exact oracle; `store` backs the
/// induction forecaster.
pub fn forecaster(
    text: &str,
    problem: &Arc<dyn DecisionProblem>,
    store: &Arc<PiDigitStore>,
) -> Result<Arc<dyn PlausibilityFunction>> {
    let text = text.trim();
    // The base of an override may itself carry parameters, so the file is
    // split off first.
    if let Some(body) = text.strip_prefix("override:") {
        let (base, file) = body.rsplit_once(",file=").ok_or_else(|| {
            Error::InvalidParameter("override: expected base=...,file=...".into())
        })?;
        let base = base
            .strip_prefix("base=")
            .ok_or_else(|| Error::InvalidParameter("override: missing parameter base".into()))?;
        let base = forecaster(base, problem, store)?;
        let json = std::fs::read_to_string(Path::new(file))?;
        let table = HardCodedOverride::parse_table(&json)?;
        return Ok(Arc::new(
            HardCodedOverride::new(base, table)?.with_label(file),
        ));
    }
    let mut spec = Spec::parse(text)?;
    let f: Arc<dyn PlausibilityFunction> = match spec.name.as_str() {
        "constant" => Arc::new(Constant::new(spec.require("v")?)?),
        "density" => Arc::new(Density::new(spec.take("B")?.unwrap_or(100))?),
        "fermat" => {
            let k = spec.require("k")?;
            Arc::new(FermatBayes::new(k, spec.take("B")?.unwrap_or(100))?)
        }
        "oracle" => Arc::new(ExactOracle::new(problem.clone())),
        "induction" => {
            let threshold: Option<f64> = spec.take("threshold")?;
            let digits: Option<u64> = spec.take("digits")?;
            match (threshold, digits) {
                (Some(t), None) => Arc::new(InductionForecaster::with_threshold(store.clone(), t)?),
                (None, Some(d)) => Arc::new(InductionForecaster::with_digits(store.clone(), d)?),
                _ => {
                    return Err(Error::InvalidParameter(
                        "induction: give exactly one of threshold, digits".into(),
                    ))
                }
            }
        }
        _ => {
            return Err(Error::Unknown {
                kind: "forecaster",
                name: spec.name,
            })
        }
    };
    spec.finish()?;
    Ok(f)
}

pub fn buyer(text: &str) -> Result<FermatGreedyBuyer> {
    let mut spec = Spec::parse(text)?;
    if spec.name != "fermat-greedy" {
        return Err(Error::Unknown {
            kind: "buyer",
            name: spec.name,
        });
    }
    let k = spec.take("k")?.unwrap_or(10);
    let support = spec.take("support")?.unwrap_or(32);
    let margin = spec.take("margin")?.unwrap_or(0.1);
    let sieve = spec.take("B")?.unwrap_or(100);
    let mut b = FermatGreedyBuyer::new(k, sieve, support, margin)?;
    if let Some(c) = spec.take("candidates")? {
        b = b.with_candidates(c);
    }
    if let Some(cap) = spec.take("notional")? {
        b = b.with_notional(cap);
    }
    spec.finish()?;
    Ok(b)
}

/// `"8..18"` (inclusive) or a single length `"12"`.
pub fn lengths(text: &str) -> Result<RangeInclusive<usize>> {
    let bad = || Error::InvalidParameter(format!("bad length range {text:?}"));
    let text = text.trim();
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (
            a.parse().map_err(|_| bad())?,
            b.trim_start_matches('=').parse().map_err(|_| bad())?,
        ),
        None => {
            let n = text.parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    if lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}
