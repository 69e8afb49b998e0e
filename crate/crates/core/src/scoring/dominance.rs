//! Dutch-book dominance for vectors of forecasts.
//!
//! A forecast vector over `k` related statements is dominated when another
//! vector scores no worse in every admissible world and strictly better in
//! at least one. Under the Brier rule this happens exactly when the forecast
//! lies outside the convex hull of the worlds; the Euclidean projection onto
//! the hull is then a witness that improves the score in every world.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ScoringRule;
use crate::error::{Error, Result};

/// Largest number of statements handled.
pub const MAX_STATEMENTS: usize = 12;

/// Squared distance below which a forecast counts as inside the hull.
const HULL_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldSet {
    k: usize,
    worlds: Vec<Vec<bool>>,
}

impl WorldSet {
    pub fn new(k: usize, worlds: impl IntoIterator<Item = Vec<bool>>) -> Result<Self> {
        let unique: BTreeSet<Vec<bool>> = worlds.into_iter().collect();
        if unique.is_empty() {
            return Err(Error::EmptyWorldSet);
        }
        if let Some(w) = unique.iter().find(|w| w.len() != k) {
            return Err(Error::InvalidParameter(format!(
                "world of length {} in a set of {k} statements",
                w.len()
            )));
        }
        if k == 0 || k > MAX_STATEMENTS {
            return Err(Error::guard(
                "dominance statement count",
                k as u64,
                MAX_STATEMENTS as u64,
            ));
        }
        Ok(Self {
            k,
            worlds: unique.into_iter().collect(),
        })
    }

    /// Parses `[[1,0],[0,1]]`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Vec<Vec<u8>> = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("worlds: {e}")))?;
        let k = raw.first().map_or(0, Vec::len);
        let worlds = raw
            .into_iter()
            .map(|w| {
                w.into_iter()
                    .map(|b| match b {
                        0 => Ok(false),
                        1 => Ok(true),
                        other => Err(Error::InvalidParameter(format!("world entry {other}"))),
                    })
                    .collect::<Result<Vec<bool>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if worlds.is_empty() {
            return Err(Error::EmptyWorldSet);
        }
        Self::new(k, worlds)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn worlds(&self) -> &[Vec<bool>] {
        &self.worlds
    }

    fn points(&self) -> Vec<Vec<f64>> {
        self.worlds
            .iter()
            .map(|w| w.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
            .collect()
    }
}

/// Total score of a forecast vector in one world.
pub fn vector_score(rule: ScoringRule, world: &[bool], forecast: &[f64]) -> Result<f64> {
    world
        .iter()
        .zip(forecast)
        .map(|(&o, &x)| rule.score(o, x))
        .sum()
}

/// True iff `candidate` scores no worse than `forecast` in every world and
/// strictly better (by more than `tol`) in at least one.
pub fn dominates(
    rule: ScoringRule,
    worlds: &WorldSet,
    candidate: &[f64],
    forecast: &[f64],
    tol: f64,
) -> Result<bool> {
    let mut strict = false;
    for w in worlds.worlds() {
        let c = vector_score(rule, w, candidate)?;
        let f = vector_score(rule, w, forecast)?;
        if c > f + tol {
            return Ok(false);
        }
        if c < f - tol {
            strict = true;
        }
    }
    Ok(strict)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominanceResult {
    pub dominated: bool,
    /// Euclidean projection of the forecast onto the hull of the worlds.
    pub witness: Option<Vec<f64>>,
    pub distance: f64,
    pub forecast_scores: Vec<f64>,
    pub witness_scores: Option<Vec<f64>>,
}

/// Checks a forecast vector for Dutch-book dominance under `rule`.
///
/// Only the Brier rule is accepted: the projection witness is a Brier
/// construction, and the log rule is unbounded at the cube's faces.
pub fn dominance_check(
    forecast: &[f64],
    worlds: &WorldSet,
    rule: ScoringRule,
) -> Result<DominanceResult> {
    if rule != ScoringRule::Brier {
        return Err(Error::InvalidParameter(format!(
            "dominance check needs a bounded continuous proper rule (brier), got {rule}"
        )));
    }
    if forecast.len() != worlds.k() {
        return Err(Error::InvalidParameter(format!(
            "forecast has {} entries, worlds have {}",
            forecast.len(),
            worlds.k()
        )));
    }
    if let Some(x) = forecast.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::Domain(format!("forecast {x} outside [0, 1]")));
    }
    let projection = project_onto_hull(forecast, &worlds.points());
    let dist2: f64 = projection
        .iter()
        .zip(forecast)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let scores = |v: &[f64]| -> Result<Vec<f64>> {
        worlds
            .worlds()
            .iter()
            .map(|w| vector_score(rule, w, v))
            .collect()
    };
    let forecast_scores = scores(forecast)?;
    if dist2 <= HULL_TOLERANCE {
        return Ok(DominanceResult {
            dominated: false,
            witness: None,
            distance: dist2.sqrt(),
            forecast_scores,
            witness_scores: None,
        });
    }
    let witness_scores = scores(&projection)?;
    debug_assert!(dominates(rule, worlds, &projection, forecast, 0.0)?);
    Ok(DominanceResult {
        dominated: true,
        witness: Some(projection),
        distance: dist2.sqrt(),
        forecast_scores,
        witness_scores: Some(witness_scores),
    })
}

/// Exhaustive search of the grid `{0, r, 2r, ..., 1}^k` for a point that
/// dominates `forecast`. Small `k` only.
pub fn grid_dominator(
    forecast: &[f64],
    worlds: &WorldSet,
    rule: ScoringRule,
    resolution: f64,
) -> Result<Option<Vec<f64>>> {
    let steps = (1.0 / resolution).round() as usize;
    let k = worlds.k();
    let total = (steps as u64 + 1).checked_pow(k as u32).unwrap_or(u64::MAX);
    const MAX_GRID: u64 = 20_000_000;
    if total > MAX_GRID {
        return Err(Error::guard("dominance grid size", total, MAX_GRID));
    }
    let mut idx = vec![0usize; k];
    let mut point = vec![0.0; k];
    loop {
        for (p, &i) in point.iter_mut().zip(&idx) {
            *p = i as f64 / steps as f64;
        }
        if dominates(rule, worlds, &point, forecast, 1e-12)? {
            return Ok(Some(point));
        }
        let mut d = 0;
        loop {
            if d == k {
                return Ok(None);
            }
            idx[d] += 1;
            if idx[d] <= steps {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Nearest point to `target` in the convex hull of `points` (Wolfe's
/// minimum-norm-point algorithm on the translated points).
fn project_onto_hull(target: &[f64], points: &[Vec<f64>]) -> Vec<f64> {
    let shifted: Vec<DVector<f64>> = points
        .iter()
        .map(|p| DVector::from_iterator(p.len(), p.iter().zip(target).map(|(a, b)| a - b)))
        .collect();
    let x = min_norm_point(&shifted);
    x.iter()
        .zip(target)
        .map(|(d, t)| (d + t).clamp(0.0, 1.0))
        .collect()
}

fn min_norm_point(points: &[DVector<f64>]) -> DVector<f64> {
    const TOL: f64 = 1e-12;
    let scale = points
        .iter()
        .map(|p| p.norm_squared())
        .fold(0.0, f64::max)
        .max(1.0);
    let first = (0..points.len())
        .min_by(|&a, &b| {
            points[a]
                .norm_squared()
                .total_cmp(&points[b].norm_squared())
        })
        .expect("nonempty");
    let mut corral: Vec<usize> = vec![first];
    let mut weights: Vec<f64> = vec![1.0];
    let mut x = points[first].clone();

    for _major in 0..10_000 {
        let (j, best) = (0..points.len())
            .map(|j| (j, x.dot(&points[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if x.norm_squared() - best <= TOL * scale || corral.contains(&j) {
            break;
        }
        corral.push(j);
        weights.push(0.0);

        loop {
            let alpha = affine_minimizer(points, &corral);
            if alpha.iter().all(|&a| a > TOL) {
                weights = alpha;
                break;
            }
            // step from weights toward alpha until a weight hits zero
            let theta = weights
                .iter()
                .zip(&alpha)
                .filter(|(_, &a)| a <= TOL)
                .map(|(&w, &a)| if w - a > 0.0 { w / (w - a) } else { 0.0 })
                .fold(1.0, f64::min);
            for (w, a) in weights.iter_mut().zip(&alpha) {
                *w = theta * a + (1.0 - theta) * *w;
            }
            let keep: Vec<bool> = weights.iter().map(|&w| w > TOL).collect();
            corral = corral
                .iter()
                .zip(&keep)
                .filter(|(_, &k)| k)
                .map(|(&c, _)| c)
                .collect();
            weights = weights
                .iter()
                .zip(&keep)
                .filter(|(_, &k)| k)
                .map(|(&w, _)| w)
                .collect();
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            if corral.len() <= 1 {
                break;
            }
        }
        x = corral
            .iter()
            .zip(&weights)
            .fold(DVector::zeros(x.len()), |acc, (&c, &w)| {
                acc + &points[c] * w
            });
    }
    x
}

/// Affine combination weights (summing to one) of the corral points with
/// minimum norm.
fn affine_minimizer(points: &[DVector<f64>], corral: &[usize]) -> Vec<f64> {
    let m = corral.len();
    let mut a = DMatrix::<f64>::zeros(m + 1, m + 1);
    let mut b = DVector::<f64>::zeros(m + 1);
    for (r, &i) in corral.iter().enumerate() {
        for (c, &j) in corral.iter().enumerate() {
            a[(r, c)] = points[i].dot(&points[j]);
        }
        a[(r, m)] = 1.0;
        a[(m, r)] = 1.0;
    }
    b[m] = 1.0;
    let solution = a
        .clone()
        .lu()
        .solve(&b)
        .unwrap_or_else(|| a.svd(true, true).solve(&b, 1e-12).expect("svd solve"));
    solution.iter().take(m).copied().collect()
}
