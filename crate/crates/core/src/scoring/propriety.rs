use serde::{Deserialize, Serialize};

use super::ScoringRule;
use crate::error::{Error, Result};

/// Grid check of `argmin_x y B(1, x) + (1 - y) B(0, x) = y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProprietyReport {
    pub rule: ScoringRule,
    pub grid_step: f64,
    /// `(y, x*(y))` for every grid belief, endpoints included.
    pub minimizers: Vec<(f64, f64)>,
    pub max_deviation: f64,
    pub passes: bool,
}

impl ProprietyReport {
    /// Minimizer at the grid belief nearest `y`.
    pub fn minimizer_at(&self, y: f64) -> f64 {
        self.minimizers
            .iter()
            .min_by(|a, b| (a.0 - y).abs().total_cmp(&(b.0 - y).abs()))
            .map(|&(_, x)| x)
            .expect("grid is never empty")
    }
}

fn grid(step: f64) -> Vec<f64> {
    let steps = (1.0 / step).floor() as usize;
    let mut g: Vec<f64> = (0..=steps).map(|i| i as f64 * step).collect();
    if 1.0 - g[g.len() - 1] > step * 1e-9 {
        g.push(1.0);
    } else {
        let last = g.len() - 1;
        g[last] = 1.0;
    }
    g
}

/// For every grid belief `y`, minimizes expected score over grid forecasts
/// and reports `sup_y |x*(y) - y|`. Ties go to the smallest forecast. The
/// rule passes iff the deviation is within one grid step.
pub fn check_propriety(rule: ScoringRule, grid_step: f64) -> Result<ProprietyReport> {
    if !(grid_step > 0.0 && grid_step <= 0.01) {
        return Err(Error::InvalidParameter(format!(
            "grid step must lie in (0, 0.01], got {grid_step}"
        )));
    }
    let points = grid(grid_step);
    let minimizers: Vec<(f64, f64)> = points
        .iter()
        .map(|&y| {
            let mut best = (f64::INFINITY, points[0]);
            for &x in &points {
                let s = rule.expected(y, x);
                if s < best.0 {
                    best = (s, x);
                }
            }
            (y, best.1)
        })
        .collect();
    let max_deviation = minimizers
        .iter()
        .map(|&(y, x)| (x - y).abs())
        .fold(0.0, f64::max);
    if !max_deviation.is_finite() {
        return Err(Error::Domain("propriety deviation overflowed".into()));
    }
    Ok(ProprietyReport {
        rule,
        grid_step,
        minimizers,
        max_deviation,
        passes: max_deviation <= grid_step * (1.0 + 1e-9),
    })
}
