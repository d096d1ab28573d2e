// Copyright 2026 The Veracity Bond Authors
// SPDX-License-Identifier: Apache-2.0

//! Jury selection, juror evaluation and reputation.
//!
//! Reputation follows `R = x · (γ_a·E[v_a] − γ_y·E[v_y])`: visibility times
//! the gap between perceived prosocial and perceived monetary motivation.
//! The two expectations are tracked as exponential moving averages, `E[v_a]`
//! over peer ratings and `E[v_y]` over accepted juror fees.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::JuryError;
use crate::ids::{ContentId, ParticipantId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JuryConfig {
    pub pool_size: usize,
    pub panel_size: usize,
    #[serde(default = "default_bench")]
    pub bench_size: usize,
}

fn default_bench() -> usize {
    5
}

impl JuryConfig {
    pub fn new(pool_size: usize, panel_size: usize) -> Result<Self, JuryError> {
        let config = JuryConfig {
            pool_size,
            panel_size,
            bench_size: default_bench(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), JuryError> {
        if self.panel_size == 0 || self.panel_size.is_multiple_of(2) {
            return Err(JuryError::InvalidPanelSize(self.panel_size));
        }
        if self.panel_size > self.pool_size {
            return Err(JuryError::PanelExceedsPool {
                panel: self.panel_size,
                pool: self.pool_size,
            });
        }
        Ok(())
    }

    /// Majority threshold `t = (n + 1) / 2`.
    pub fn majority(&self) -> usize {
        majority(self.panel_size)
    }
}

pub fn majority(panel_size: usize) -> usize {
    panel_size / 2 + 1
}

/// Three-point peer evaluation of a juror.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatingValue {
    No = 0,
    Neutral = 1,
    Yes = 2,
}

impl RatingValue {
    pub fn score(self) -> u64 {
        self as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rating {
    pub value: RatingValue,
    pub evaluator_id: ParticipantId,
    pub contest_id: ContentId,
}

/// Exact mean of a set of ratings, kept as `sum / count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RatingAverage {
    pub sum: u64,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatingVerdict {
    BelowNeutral,
    AtOrAboveNeutral,
}

impl RatingAverage {
    pub fn of(values: impl IntoIterator<Item = RatingValue>) -> Result<Self, JuryError> {
        let (sum, count) = values.into_iter().fold((0, 0), |(s, c), v| (s + v.score(), c + 1));
        if count == 0 {
            return Err(JuryError::NoRatings);
        }
        Ok(RatingAverage { sum, count })
    }

    pub fn mean(&self) -> f64 {
        self.sum as f64 / self.count as f64
    }

    pub fn at_or_above_neutral(&self) -> bool {
        self.sum >= self.count * RatingValue::Neutral.score()
    }

    pub fn verdict(&self) -> RatingVerdict {
        if self.at_or_above_neutral() {
            RatingVerdict::AtOrAboveNeutral
        } else {
            RatingVerdict::BelowNeutral
        }
    }
}

impl From<RatingValue> for RatingAverage {
    fn from(v: RatingValue) -> Self {
        RatingAverage {
            sum: v.score(),
            count: 1,
        }
    }
}

pub fn aggregate_rating(ratings: &[Rating]) -> Result<RatingAverage, JuryError> {
    RatingAverage::of(ratings.iter().map(|r| r.value))
}

/// Tunables for reputation tracking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReputationParams {
    /// EMA step size.
    pub alpha: f64,
    /// Subtracted from `E[v_a]` when a seated juror fails to vote.
    pub inactivity_penalty: f64,
    /// Minimum `R` to be eligible for selection.
    pub threshold: f64,
    /// Fee (in minor units) that counts as a full monetary observation.
    pub y_scale: f64,
}

impl Default for ReputationParams {
    fn default() -> Self {
        ReputationParams {
            alpha: 0.2,
            inactivity_penalty: 0.1,
            threshold: 0.0,
            y_scale: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JurorProfile {
    pub juror_id: ParticipantId,
    /// Visibility `x`.
    pub visibility: f64,
    pub weight_prosocial: f64,
    pub weight_monetary: f64,
    pub est_va: f64,
    pub est_vy: f64,
    /// Participation intensity in `[0, 1]`.
    pub participation: f64,
    /// `c` in the effort cost `c·a²/2`.
    pub cost_coefficient: f64,
    pub reputation: f64,
    #[serde(default)]
    pub rating_history: Vec<RatingValue>,
}

impl JurorProfile {
    pub fn new(juror_id: impl Into<ParticipantId>) -> Self {
        let mut p = JurorProfile {
            juror_id: juror_id.into(),
            visibility: 1.0,
            weight_prosocial: 1.0,
            weight_monetary: 1.0,
            est_va: 0.5,
            est_vy: 0.0,
            participation: 1.0,
            cost_coefficient: 1.0,
            reputation: 0.0,
            rating_history: Vec::new(),
        };
        p.reputation = reputation_score(&p);
        p
    }
}

/// `(E[v_a] + E[v_y]·y)·a − c·a²/2`.
pub fn juror_benefit(profile: &JurorProfile, y: f64) -> f64 {
    benefit_at(profile, y, profile.participation)
}

pub fn benefit_at(profile: &JurorProfile, y: f64, a: f64) -> f64 {
    (profile.est_va + profile.est_vy * y) * a - profile.cost_coefficient * a * a / 2.0
}

/// Participation maximizing [`benefit_at`] over `[0, 1]`.
pub fn optimal_participation(profile: &JurorProfile, y: f64) -> f64 {
    ((profile.est_va + profile.est_vy * y) / profile.cost_coefficient).clamp(0.0, 1.0)
}

pub fn reputation_score(profile: &JurorProfile) -> f64 {
    profile.visibility * (profile.weight_prosocial * profile.est_va - profile.weight_monetary * profile.est_vy)
}

/// What a finalized contest tells us about one juror.
#[derive(Debug, Clone, PartialEq)]
pub struct JurorOutcome {
    pub ratings: Vec<RatingValue>,
    pub voted: bool,
    /// Monetary incentive received (minor units).
    pub fee: f64,
}

pub fn update_reputation(profile: &JurorProfile, outcome: &JurorOutcome, params: &ReputationParams) -> JurorProfile {
    let mut next = profile.clone();
    let alpha = params.alpha;
    if outcome.voted {
        if let Ok(avg) = RatingAverage::of(outcome.ratings.iter().copied()) {
            next.est_va = (1.0 - alpha) * next.est_va + alpha * avg.mean() / 2.0;
        }
        let y = if params.y_scale > 0.0 {
            (outcome.fee / params.y_scale).clamp(0.0, 1.0)
        } else {
            0.0
        };
        next.est_vy = (1.0 - alpha) * next.est_vy + alpha * y;
    } else {
        next.est_va -= params.inactivity_penalty;
    }
    next.rating_history.extend(outcome.ratings.iter().copied());
    next.reputation = reputation_score(&next);
    next
}

fn by_reputation_desc(a: &JurorProfile, b: &JurorProfile) -> Ordering {
    b.reputation
        .total_cmp(&a.reputation)
        .then_with(|| a.juror_id.cmp(&b.juror_id))
}

/// Profiles with `R ≥ threshold`, best first, ties by id.
pub fn rank_jurors(profiles: &[JurorProfile], threshold: f64) -> Vec<&JurorProfile> {
    let mut ranked: Vec<_> = profiles.iter().filter(|p| p.reputation >= threshold).collect();
    ranked.sort_by(|a, b| by_reputation_desc(a, b));
    ranked
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vote {
    ForCreator,
    ForChallenger,
    NotYetVoted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    pub juror_id: ParticipantId,
    pub reputation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Substitution {
    pub replaced: ParticipantId,
    pub substitute: ParticipantId,
    pub tick: u64,
}

/// The seated jury for one challenge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JuryPanel {
    pub members: Vec<ParticipantId>,
    pub votes: BTreeMap<ParticipantId, Vote>,
    pub assessments: BTreeMap<ParticipantId, String>,
    pub substitutions: Vec<Substitution>,
    pub bench: Vec<BenchEntry>,
}

impl JuryPanel {
    pub fn seat(members: Vec<ParticipantId>, bench: Vec<BenchEntry>) -> Self {
        let votes = members.iter().map(|m| (m.clone(), Vote::NotYetVoted)).collect();
        JuryPanel {
            members,
            votes,
            assessments: BTreeMap::new(),
            substitutions: Vec::new(),
            bench,
        }
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn majority(&self) -> usize {
        majority(self.size())
    }

    pub fn contains(&self, id: &ParticipantId) -> bool {
        self.members.contains(id)
    }

    pub fn has_voted(&self, id: &ParticipantId) -> bool {
        matches!(self.votes.get(id), Some(Vote::ForCreator | Vote::ForChallenger))
    }

    pub fn missing_votes(&self) -> usize {
        self.members.iter().filter(|m| !self.has_voted(m)).count()
    }

    pub fn tally(&self) -> (usize, usize) {
        self.votes.values().fold((0, 0), |(c, ch), v| match v {
            Vote::ForCreator => (c + 1, ch),
            Vote::ForChallenger => (c, ch + 1),
            Vote::NotYetVoted => (c, ch),
        })
    }

    /// Index into `bench` of the best remaining alternate; `None` when empty.
    /// Equal reputations are broken uniformly at random.
    pub fn pick_alternate<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        let best = self.bench.iter().map(|b| b.reputation).max_by(|a, b| a.total_cmp(b))?;
        let tied: Vec<usize> = (0..self.bench.len())
            .filter(|&i| self.bench[i].reputation.total_cmp(&best) == Ordering::Equal)
            .collect();
        Some(tied[rng.random_range(0..tied.len())])
    }
}

/// Draws `n` jurors uniformly without replacement from the eligible pool,
/// plus up to `bench_size` alternates.
pub fn select_jury<R: Rng + ?Sized>(
    pool: &[JurorProfile],
    config: &JuryConfig,
    exclusions: &BTreeSet<ParticipantId>,
    threshold: f64,
    rng: &mut R,
) -> Result<JuryPanel, JuryError> {
    if config.panel_size == 0 || config.panel_size.is_multiple_of(2) {
        return Err(JuryError::InvalidPanelSize(config.panel_size));
    }
    // eligibility is decided on a canonical order so the draw is independent
    // of how the caller happened to order the pool
    let mut eligible: Vec<&JurorProfile> = pool
        .iter()
        .filter(|p| p.reputation >= threshold && !exclusions.contains(&p.juror_id))
        .collect();
    eligible.sort_by(|a, b| a.juror_id.cmp(&b.juror_id));
    eligible.dedup_by(|a, b| a.juror_id == b.juror_id);

    let n = config.panel_size;
    if eligible.len() < n {
        return Err(JuryError::InsufficientPool {
            eligible: eligible.len(),
            needed: n,
        });
    }
    let take = (n + config.bench_size).min(eligible.len());
    let drawn = sample(rng, eligible.len(), take).into_vec();
    let members = drawn[..n].iter().map(|&i| eligible[i].juror_id.clone()).collect();
    let bench = drawn[n..]
        .iter()
        .map(|&i| BenchEntry {
            juror_id: eligible[i].juror_id.clone(),
            reputation: eligible[i].reputation,
        })
        .collect();
    Ok(JuryPanel::seat(members, bench))
}

/// Picks `count` conflict-free viewers to rate the jurors of a contest.
pub fn assign_evaluators<R: Rng + ?Sized>(
    viewers: &[ParticipantId],
    conflicted: &BTreeSet<ParticipantId>,
    count: usize,
    rng: &mut R,
) -> Result<Vec<ParticipantId>, JuryError> {
    let mut eligible: Vec<&ParticipantId> = viewers.iter().filter(|v| !conflicted.contains(v)).collect();
    eligible.sort();
    eligible.dedup();
    if eligible.len() < count {
        return Err(JuryError::InsufficientViewers {
            eligible: eligible.len(),
            needed: count,
        });
    }
    Ok(sample(rng, eligible.len(), count)
        .into_iter()
        .map(|i| eligible[i].clone())
        .collect())
}
