// Copyright 2026 The Veracity Bond Authors
// SPDX-License-Identifier: Apache-2.0

use std::cmp::Ordering;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::collusion::{Colluders, CollusionQuery, PoolSize};
use crate::error::AnalysisError;
use crate::ids::ContentId;
use crate::money::Money;
use crate::protocol::LOG_SCALE_REFERENCE;

/// Wilson score interval for `successes / trials` at `z` standard errors.
/// Zero trials give the uninformative interval `[0, 1]`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalRate {
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    pub z: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl EmpiricalRate {
    pub fn contains(&self, p: f64) -> bool {
        (self.wilson_low..=self.wilson_high).contains(&p)
    }
}

/// Draws `trials` panels and counts those where colluders hold a majority.
/// Finite pools sample without replacement; the infinite pool seats each
/// juror independently.
pub fn empirical_collusion_rate<R: Rng + ?Sized>(
    query: &CollusionQuery,
    trials: u64,
    rng: &mut R,
) -> Result<EmpiricalRate, AnalysisError> {
    // validates the query
    crate::collusion::exact_collusion_probability(query)?;
    let n = query.panel as usize;
    let t = query.threshold() as usize;
    let mut successes = 0u64;
    match (query.pool, query.colluders) {
        (PoolSize::Finite(pool), _) => {
            let k = (query.ratio() * pool as f64).round() as usize;
            for _ in 0..trials {
                let seated = sample(rng, pool as usize, n).into_iter().filter(|&i| i < k).count();
                successes += u64::from(seated >= t);
            }
        }
        (PoolSize::Infinite, Colluders::Ratio(p)) => {
            for _ in 0..trials {
                let seated = (0..n).filter(|_| rng.random_bool(p)).count();
                successes += u64::from(seated >= t);
            }
        }
        (PoolSize::Infinite, Colluders::Count(_)) => unreachable!("rejected above"),
    }
    let z = 3.0;
    let (wilson_low, wilson_high) = wilson_interval(successes, trials, z);
    Ok(EmpiricalRate {
        trials,
        successes,
        rate: if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        },
        z,
        wilson_low,
        wilson_high,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankItem {
    pub content_id: ContentId,
    pub beta: Money,
    pub base_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedContent {
    pub content_id: ContentId,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VisibilityWeighting {
    pub weight: f64,
    pub reference: Money,
}

impl Default for VisibilityWeighting {
    fn default() -> Self {
        VisibilityWeighting {
            weight: 0.5,
            reference: LOG_SCALE_REFERENCE,
        }
    }
}

impl VisibilityWeighting {
    /// `base · (1 + w·ln(1 + β/β₀))`
    pub fn score(&self, beta: Money, base_score: f64) -> f64 {
        let ratio = beta.minor_units() as f64 / self.reference.minor_units().max(1) as f64;
        base_score * (1.0 + self.weight * ratio.ln_1p())
    }
}

/// Orders content by bond-weighted score, highest first, ties by id.
pub fn visibility_rank(items: &[RankItem], weighting: &VisibilityWeighting) -> Vec<RankedContent> {
    let mut ranked: Vec<RankedContent> = items
        .iter()
        .map(|i| RankedContent {
            content_id: i.content_id.clone(),
            score: weighting.score(i.beta, i.base_score),
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.content_id.cmp(&b.content_id))
    });
    ranked
}
