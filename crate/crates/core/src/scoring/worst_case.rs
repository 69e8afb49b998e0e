//! Worst-case scoring, shipped only to show why it is uninformative: the
//! constant 1/2 forecaster is optimal unless a forecaster is exact.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::expected::ScoreTask;
use crate::error::Result;
use crate::Instance;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseEntry {
    pub n: usize,
    pub worst_score: f64,
    pub worst_instance: Instance,
}

/// Largest score over the support of `D_n` (instances with positive mass).
/// Ties keep the first instance in enumeration order.
pub fn worst_case_report(task: &ScoreTask<'_>, n: usize) -> Result<WorstCaseEntry> {
    let support = task.ensemble.enumerate(n)?;
    let scores: Vec<f64> = support
        .par_iter()
        .map(|(x, _)| task.instance_score(x))
        .collect::<Result<_>>()?;
    let (i, &worst) = support
        .iter()
        .zip(&scores)
        .enumerate()
        .filter(|(_, ((_, p), _))| *p > 0.0)
        .map(|(i, (_, s))| (i, s))
        .fold(None, |best: Option<(usize, &f64)>, cur| match best {
            Some(b) if *b.1 >= *cur.1 => Some(b),
            _ => Some(cur),
        })
        .expect("ensembles have nonempty support");
    Ok(WorstCaseEntry {
        n,
        worst_score: worst,
        worst_instance: support[i].0.clone(),
    })
}
