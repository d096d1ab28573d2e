// Copyright 2026 The Veracity Bond Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use super::{Contest, ContestConfig};
use crate::error::ContestError;
use crate::ids::{ContentId, ParticipantId};
use crate::money::Money;

pub const DEFAULT_CHALLENGE_CAP: usize = 3;

/// All contests on a platform, keyed by content.
#[derive(Debug, Clone)]
pub struct ContestRegistry {
    contests: BTreeMap<ContentId, Contest>,
    challenge_cap: usize,
}

impl Default for ContestRegistry {
    fn default() -> Self {
        ContestRegistry::new(DEFAULT_CHALLENGE_CAP)
    }
}

impl ContestRegistry {
    pub fn new(challenge_cap: usize) -> Self {
        ContestRegistry {
            contests: BTreeMap::new(),
            challenge_cap,
        }
    }

    pub fn challenge_cap(&self) -> usize {
        self.challenge_cap
    }

    #[allow(clippy::too_many_arguments)]
    pub fn open(
        &mut self,
        content_id: ContentId,
        creator_id: ParticipantId,
        veracity_bond: Money,
        creator_verified: bool,
        config: ContestConfig,
        seed: u64,
        now: u64,
    ) -> Result<&mut Contest, ContestError> {
        if self.contests.contains_key(&content_id) {
            return Err(ContestError::DuplicateContent(content_id.to_string()));
        }
        let contest = Contest::open(
            content_id.clone(),
            creator_id,
            veracity_bond,
            creator_verified,
            config,
            seed,
            now,
        )?;
        Ok(self.contests.entry(content_id).or_insert(contest))
    }

    pub fn get(&self, content_id: &ContentId) -> Result<&Contest, ContestError> {
        self.contests
            .get(content_id)
            .ok_or_else(|| ContestError::UnknownContent(content_id.to_string()))
    }

    pub fn get_mut(&mut self, content_id: &ContentId) -> Result<&mut Contest, ContestError> {
        self.contests
            .get_mut(content_id)
            .ok_or_else(|| ContestError::UnknownContent(content_id.to_string()))
    }

    pub fn contests(&self) -> impl Iterator<Item = &Contest> {
        self.contests.values()
    }

    pub fn len(&self) -> usize {
        self.contests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contests.is_empty()
    }

    /// Queued or active challenges held by `participant` across all contests.
    pub fn active_challenges(&self, participant: &ParticipantId) -> usize {
        self.contests
            .values()
            .flat_map(|c| c.challenge_queue.iter().chain(c.active_challenge.iter()))
            .filter(|ch| &ch.challenger_id == participant)
            .count()
    }

    /// Submits a challenge after checking the per-party cap.
    pub fn submit_challenge(
        &mut self,
        content_id: &ContentId,
        challenger_id: ParticipantId,
        bond: Money,
        evidence_ref: impl Into<String>,
    ) -> Result<(), ContestError> {
        let count = self.active_challenges(&challenger_id);
        let cap = self.challenge_cap;
        let contest = self.get_mut(content_id)?;
        if count >= cap {
            return Err(ContestError::ChallengeCapExceeded {
                participant: challenger_id.to_string(),
                count,
                cap,
            });
        }
        contest.submit_challenge(challenger_id, bond, evidence_ref)
    }

    /// Sum of every contest's conservation residual.
    pub fn total_residual(&self) -> i128 {
        self.contests.values().map(|c| c.escrow.residual()).sum()
    }
}
