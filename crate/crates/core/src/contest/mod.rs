// Copyright 2026 The Veracity Bond Authors
// SPDX-License-Identifier: Apache-2.0

//! The contest state machine.
//!
//! A contest starts when a creator escrows a veracity bond `β`. Until the
//! challenge deadline anyone else may post an equal counter bond and join
//! the challenge queue. Challenges are judged one at a time in random
//! order by an odd jury; the first successful challenge takes the creator's
//! bond and dismisses the rest of the queue, while each failed challenge
//! forfeits that challenger's bond to the creator. When the deadline has
//! passed and nothing is pending, the creator's bond comes back in full.
//!
//! Every mutation goes through [`Contest::apply`], driven either by a
//! command method or by [`Contest::replay`]. Commands make their random
//! choices first and record the outcome in the event, so replay never
//! needs the juror pool.

mod event;
mod registry;

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use event::{AuditEntry, Event, EventLog, LogEntry, ParsedPrefix};
pub use registry::{ContestRegistry, DEFAULT_CHALLENGE_CAP};

use crate::error::{ContestError, JuryError, ProtocolError};
use crate::ids::{ContentId, ParticipantId};
use crate::jury::{
    select_jury, BenchEntry, JurorProfile, JuryConfig, JuryPanel, RatingAverage, RatingValue, Substitution, Vote,
};
use crate::money::Money;
use crate::protocol::{
    distribute_forfeited_bond, juror_bond_amount, settle_juror_bond, BondStatus, JurorBond, Payout, PayoutPolicy,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContestConfig {
    pub challenge_period: u64,
    pub deliberation_period: u64,
    pub panel_size: usize,
    pub bench_size: usize,
    pub policy: PayoutPolicy,
    pub reputation_threshold: f64,
}

impl Default for ContestConfig {
    fn default() -> Self {
        ContestConfig {
            challenge_period: 100,
            deliberation_period: 50,
            panel_size: 21,
            bench_size: 5,
            policy: PayoutPolicy::default(),
            reputation_threshold: 0.0,
        }
    }
}

impl ContestConfig {
    pub fn validate(&self) -> Result<(), ContestError> {
        self.policy.validate()?;
        if self.panel_size == 0 || self.panel_size.is_multiple_of(2) {
            return Err(JuryError::InvalidPanelSize(self.panel_size).into());
        }
        Ok(())
    }

    fn jury(&self) -> JuryConfig {
        JuryConfig {
            pool_size: usize::MAX,
            panel_size: self.panel_size,
            bench_size: self.bench_size,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContestState {
    Open,
    Challenged,
    Deliberating,
    ResolvedForCreator,
    ResolvedForChallenger,
    ExpiredUnchallenged,
}

impl ContestState {
    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            ContestState::ResolvedForCreator | ContestState::ResolvedForChallenger | ContestState::ExpiredUnchallenged
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChallengeOutcome {
    Queued,
    Active,
    Won,
    Lost,
    Dismissed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Challenge {
    pub challenger_id: ParticipantId,
    pub counter_bond: Money,
    pub evidence_ref: String,
    pub outcome: ChallengeOutcome,
    pub submitted_at: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ForCreator,
    ForChallenger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubstitutionReason {
    /// Seated juror did not vote before the deliberation deadline.
    MissedDeadline,
    /// Seated juror would not post the juror bond.
    DeclinedBond,
}

/// Money held and paid out by one contest.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Escrow {
    pub veracity_bond: Money,
    pub counter_bonds: Money,
    pub juror_bonds: Money,
    pub deposits: BTreeMap<ParticipantId, Money>,
    pub credits: BTreeMap<ParticipantId, Money>,
    pub platform: Money,
    pub reserve: Money,
}

impl Escrow {
    pub fn injected(&self) -> u128 {
        self.deposits.values().map(|m| m.minor_units() as u128).sum()
    }

    pub fn held(&self) -> u128 {
        [self.veracity_bond, self.counter_bonds, self.juror_bonds]
            .iter()
            .map(|m| m.minor_units() as u128)
            .sum()
    }

    pub fn paid_out(&self) -> u128 {
        self.credits.values().map(|m| m.minor_units() as u128).sum::<u128>()
            + self.platform.minor_units() as u128
            + self.reserve.minor_units() as u128
    }

    /// `injected − held − paid out`; zero whenever the books balance.
    pub fn residual(&self) -> i128 {
        self.injected() as i128 - self.held() as i128 - self.paid_out() as i128
    }

    pub fn credited(&self, party: &ParticipantId) -> Money {
        self.credits.get(party).copied().unwrap_or_default()
    }

    pub fn deposited(&self, party: &ParticipantId) -> Money {
        self.deposits.get(party).copied().unwrap_or_default()
    }

    fn deposit(&mut self, party: &ParticipantId, amount: Money) -> Result<(), ProtocolError> {
        let entry = self.deposits.entry(party.clone()).or_default();
        *entry = entry.checked_add(amount)?;
        Ok(())
    }

    fn credit(&mut self, party: &ParticipantId, amount: Money) -> Result<(), ProtocolError> {
        let entry = self.credits.entry(party.clone()).or_default();
        *entry = entry.checked_add(amount)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Finalization {
    verdict: Verdict,
    payout: Payout,
    settlements: Vec<JurorBond>,
    dismissed: Vec<ParticipantId>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Contest {
    pub(crate) content_id: ContentId,
    pub(crate) creator_id: ParticipantId,
    pub(crate) veracity_bond: Money,
    pub(crate) config: ContestConfig,
    pub(crate) seed: u64,
    pub(crate) state: ContestState,
    pub(crate) challenge_queue: Vec<Challenge>,
    pub(crate) active_challenge: Option<Challenge>,
    pub(crate) resolved_challenges: Vec<Challenge>,
    pub(crate) jury: Option<JuryPanel>,
    pub(crate) juror_bonds: BTreeMap<ParticipantId, JurorBond>,
    /// Ratings of the seated jurors; evaluator ids are sealed in the log.
    pub(crate) ratings: BTreeMap<ParticipantId, Vec<RatingValue>>,
    pub(crate) past_jurors: BTreeSet<ParticipantId>,
    pub(crate) inactive_jurors: Vec<ParticipantId>,
    pub(crate) clock: u64,
    pub(crate) challenge_deadline: u64,
    /// Latest of the seat deadlines.
    pub(crate) deliberation_deadline: Option<u64>,
    /// Per-juror voting deadline; a substitute gets a fresh period.
    pub(crate) seat_deadlines: BTreeMap<ParticipantId, u64>,
    pub(crate) adjudicated: u32,
    pub(crate) escrow: Escrow,
    pub(crate) rng_word_pos: u64,
    #[serde(skip)]
    rng: ChaCha8Rng,
    #[serde(skip)]
    log: EventLog,
}

impl Contest {
    /// Opens a contest at tick `now` with the creator's bond escrowed.
    pub fn open(
        content_id: ContentId,
        creator_id: ParticipantId,
        veracity_bond: Money,
        creator_verified: bool,
        config: ContestConfig,
        seed: u64,
        now: u64,
    ) -> Result<Contest, ContestError> {
        if !creator_verified {
            return Err(ContestError::UnverifiedCreator);
        }
        let event = Event::Opened {
            content_id,
            creator_id,
            veracity_bond,
            seed,
            config,
        };
        let mut contest = Contest::genesis(&event, now)?;
        contest.commit_genesis(event, now);
        Ok(contest)
    }

    fn genesis(event: &Event, tick: u64) -> Result<Contest, ContestError> {
        let Event::Opened {
            content_id,
            creator_id,
            veracity_bond,
            seed,
            config,
        } = event
        else {
            return Err(ContestError::MissingGenesis);
        };
        if veracity_bond.is_zero() {
            return Err(ProtocolError::ZeroBond.into());
        }
        config.validate()?;
        let mut escrow = Escrow::default();
        escrow.deposit(creator_id, *veracity_bond)?;
        escrow.veracity_bond = *veracity_bond;
        let rng = ChaCha8Rng::seed_from_u64(*seed);
        Ok(Contest {
            content_id: content_id.clone(),
            creator_id: creator_id.clone(),
            veracity_bond: *veracity_bond,
            config: *config,
            seed: *seed,
            state: ContestState::Open,
            challenge_queue: Vec::new(),
            active_challenge: None,
            resolved_challenges: Vec::new(),
            jury: None,
            juror_bonds: BTreeMap::new(),
            ratings: BTreeMap::new(),
            past_jurors: BTreeSet::new(),
            inactive_jurors: Vec::new(),
            clock: tick,
            challenge_deadline: tick.saturating_add(config.challenge_period),
            deliberation_deadline: None,
            seat_deadlines: BTreeMap::new(),
            adjudicated: 0,
            escrow,
            rng_word_pos: 0,
            rng,
            log: EventLog::new(),
        })
    }

    fn commit_genesis(&mut self, event: Event, tick: u64) {
        self.rng_word_pos = self.rng.get_word_pos() as u64;
        self.log.push(LogEntry {
            seq: 0,
            tick,
            event,
            seed_state: self.rng_word_pos,
        });
    }

    fn commit(&mut self, event: Event) -> Result<(), ContestError> {
        let tick = match event {
            Event::ClockAdvanced { to } => to,
            _ => self.clock,
        };
        self.apply(&event, tick)?;
        self.rng_word_pos = self.rng.get_word_pos() as u64;
        self.log.push(LogEntry {
            seq: self.log.next_seq(),
            tick,
            event,
            seed_state: self.rng_word_pos,
        });
        Ok(())
    }

    // read accessors; all mutation goes through `apply`
    pub fn content_id(&self) -> &ContentId {
        &self.content_id
    }

    pub fn creator_id(&self) -> &ParticipantId {
        &self.creator_id
    }

    pub fn veracity_bond(&self) -> Money {
        self.veracity_bond
    }

    pub fn config(&self) -> ContestConfig {
        self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn state(&self) -> ContestState {
        self.state
    }

    pub fn challenge_queue(&self) -> &[Challenge] {
        &self.challenge_queue
    }

    pub fn active_challenge(&self) -> Option<&Challenge> {
        self.active_challenge.as_ref()
    }

    pub fn resolved_challenges(&self) -> &[Challenge] {
        &self.resolved_challenges
    }

    pub fn jury(&self) -> Option<&JuryPanel> {
        self.jury.as_ref()
    }

    pub fn juror_bonds(&self) -> &BTreeMap<ParticipantId, JurorBond> {
        &self.juror_bonds
    }

    pub fn ratings(&self) -> &BTreeMap<ParticipantId, Vec<RatingValue>> {
        &self.ratings
    }

    pub fn past_jurors(&self) -> &BTreeSet<ParticipantId> {
        &self.past_jurors
    }

    pub fn inactive_jurors(&self) -> &[ParticipantId] {
        &self.inactive_jurors
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn challenge_deadline(&self) -> u64 {
        self.challenge_deadline
    }

    pub fn deliberation_deadline(&self) -> Option<u64> {
        self.deliberation_deadline
    }

    pub fn seat_deadline(&self, juror: &ParticipantId) -> Option<u64> {
        self.seat_deadlines.get(juror).copied()
    }

    pub fn adjudicated(&self) -> u32 {
        self.adjudicated
    }

    pub fn escrow(&self) -> &Escrow {
        &self.escrow
    }

    pub fn rng_word_pos(&self) -> u64 {
        self.rng_word_pos
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    /// SHA-256 over the canonical JSON of the contest state.
    pub fn state_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("contest state serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Everyone holding a role: creator, challengers, seated and past jurors.
    pub fn participants(&self) -> BTreeSet<ParticipantId> {
        let mut set = self.challengers();
        set.insert(self.creator_id.clone());
        set.extend(self.past_jurors.iter().cloned());
        if let Some(panel) = &self.jury {
            set.extend(panel.members.iter().cloned());
        }
        set
    }

    pub fn challengers(&self) -> BTreeSet<ParticipantId> {
        self.challenge_queue
            .iter()
            .chain(self.active_challenge.iter())
            .chain(self.resolved_challenges.iter())
            .map(|c| c.challenger_id.clone())
            .collect()
    }

    pub fn advance_clock(&mut self, to: u64) -> Result<(), ContestError> {
        if to == self.clock {
            return Ok(());
        }
        self.commit(Event::ClockAdvanced { to })
    }

    pub fn submit_challenge(
        &mut self,
        challenger_id: ParticipantId,
        bond: Money,
        evidence_ref: impl Into<String>,
    ) -> Result<(), ContestError> {
        self.commit(Event::ChallengeSubmitted {
            challenger_id,
            counter_bond: bond,
            evidence_ref: evidence_ref.into(),
        })
    }

    /// Picks a queued challenge uniformly at random, seats its jury and
    /// escrows the juror bonds.
    pub fn activate_next_challenge(&mut self, pool: &[JurorProfile]) -> Result<(), ContestError> {
        self.check_can_activate()?;
        let pick = self.rng.random_range(0..self.challenge_queue.len());
        let challenger_id = self.challenge_queue[pick].challenger_id.clone();
        let mut exclusions = self.challengers();
        exclusions.insert(self.creator_id.clone());
        let panel = select_jury(
            pool,
            &self.config.jury(),
            &exclusions,
            self.config.reputation_threshold,
            &mut self.rng,
        )?;
        let juror_bond = juror_bond_amount(self.veracity_bond, self.config.policy.gamma)?;
        self.commit(Event::ChallengeActivated {
            challenger_id,
            panel: panel.members,
            bench: panel.bench,
            juror_bond,
            deliberation_deadline: self.clock + self.config.deliberation_period,
        })
    }

    pub fn record_vote(
        &mut self,
        juror_id: ParticipantId,
        vote: Vote,
        assessment: impl Into<String>,
    ) -> Result<(), ContestError> {
        self.commit(Event::VoteRecorded {
            juror_id,
            vote,
            assessment: assessment.into(),
        })
    }

    /// Records a peer rating of a seated juror from a conflict-free evaluator.
    pub fn rate_juror(
        &mut self,
        evaluator_id: ParticipantId,
        juror_id: ParticipantId,
        value: RatingValue,
    ) -> Result<(), ContestError> {
        if self.participants().contains(&evaluator_id) {
            return Err(ContestError::ConflictedEvaluator(evaluator_id.to_string()));
        }
        let seq = self.log.next_seq();
        self.commit(Event::JurorRated {
            juror_id: juror_id.clone(),
            value,
        })?;
        self.log.seal(AuditEntry {
            seq,
            evaluator_id,
            juror_id,
        });
        Ok(())
    }

    /// Replaces a seated juror with the best alternate on the bench.
    pub fn substitute_inactive_juror(
        &mut self,
        juror_id: ParticipantId,
        reason: SubstitutionReason,
    ) -> Result<(), ContestError> {
        self.check_substitution(&juror_id, reason)?;
        let panel = self.jury.as_ref().expect("checked");
        let idx = panel.pick_alternate(&mut self.rng).ok_or(ContestError::EmptyBench)?;
        let substitute = panel.bench[idx].juror_id.clone();
        let seat_deadline = self.substitute_deadline(&juror_id, reason);
        self.commit(Event::JurorSubstituted {
            replaced: juror_id,
            substitute,
            reason,
            juror_bond: juror_bond_amount(self.veracity_bond, self.config.policy.gamma)?,
            seat_deadline,
        })
    }

    /// Draws up to `bench_size` fresh alternates from `pool` once the bench
    /// has run dry. Anyone already holding a role in the contest is skipped.
    pub fn refill_bench(&mut self, pool: &[JurorProfile]) -> Result<(), ContestError> {
        self.check_refill()?;
        let exclusions = self.participants();
        let bench_size = self.config.bench_size.max(1);
        let config = JuryConfig {
            pool_size: usize::MAX,
            panel_size: 1,
            bench_size: bench_size - 1,
        };
        let drawn = select_jury(
            pool,
            &config,
            &exclusions,
            self.config.reputation_threshold,
            &mut self.rng,
        )?;
        let bench = drawn
            .members
            .iter()
            .map(|id| {
                let reputation = pool.iter().find(|p| &p.juror_id == id).map_or(0.0, |p| p.reputation);
                BenchEntry {
                    juror_id: id.clone(),
                    reputation,
                }
            })
            .chain(drawn.bench)
            .collect();
        self.commit(Event::BenchRefilled { bench })
    }

    pub fn finalize_active_challenge(&mut self) -> Result<Verdict, ContestError> {
        let f = self.compute_finalization()?;
        let verdict = f.verdict;
        self.commit(Event::ChallengeFinalized {
            verdict: f.verdict,
            payout: f.payout,
            settlements: f.settlements,
            dismissed: f.dismissed,
        })?;
        Ok(verdict)
    }

    /// Closes the challenge period and refunds `β` in full.
    pub fn expire_challenge_period(&mut self) -> Result<ContestState, ContestError> {
        let (outcome, refund) = self.compute_closure()?;
        self.commit(Event::ChallengePeriodClosed { outcome, refund })?;
        Ok(outcome)
    }

    fn check_can_activate(&self) -> Result<(), ContestError> {
        if self.active_challenge.is_some() {
            return Err(ContestError::ActiveChallengePresent);
        }
        if self.challenge_queue.is_empty() {
            return Err(ContestError::EmptyQueue);
        }
        if self.state != ContestState::Challenged {
            return Err(ContestError::InvalidState(self.state));
        }
        Ok(())
    }

    fn deliberating_panel(&self) -> Result<&JuryPanel, ContestError> {
        if self.state != ContestState::Deliberating {
            return Err(ContestError::InvalidState(self.state));
        }
        self.jury.as_ref().ok_or(ContestError::NoActiveChallenge)
    }

    fn check_substitution(&self, juror_id: &ParticipantId, reason: SubstitutionReason) -> Result<(), ContestError> {
        let panel = self.deliberating_panel()?;
        if !panel.contains(juror_id) {
            return Err(ContestError::NotAJuror(juror_id.to_string()));
        }
        if panel.has_voted(juror_id) {
            return Err(ContestError::AlreadyVoted(juror_id.to_string()));
        }
        let deadline = self.seat_deadlines.get(juror_id).copied().unwrap_or(u64::MAX);
        if reason == SubstitutionReason::MissedDeadline && self.clock <= deadline {
            return Err(ContestError::SubstitutionNotDue(juror_id.to_string()));
        }
        if panel.bench.is_empty() {
            return Err(ContestError::EmptyBench);
        }
        Ok(())
    }

    fn check_refill(&self) -> Result<(), ContestError> {
        let panel = self.deliberating_panel()?;
        if !panel.bench.is_empty() {
            return Err(ContestError::InvalidState(self.state));
        }
        Ok(())
    }

    /// Missed deadlines earn the substitute a fresh period; a declined bond
    /// hands over the remaining time of the seat.
    fn substitute_deadline(&self, replaced: &ParticipantId, reason: SubstitutionReason) -> u64 {
        match reason {
            SubstitutionReason::MissedDeadline => self.clock + self.config.deliberation_period,
            SubstitutionReason::DeclinedBond => self.seat_deadlines.get(replaced).copied().unwrap_or(self.clock),
        }
    }

    fn compute_finalization(&self) -> Result<Finalization, ContestError> {
        let panel = self.deliberating_panel()?;
        let missing = panel.missing_votes();
        if missing > 0 {
            return Err(ContestError::MissingVotes { missing });
        }
        let (_, for_challenger) = panel.tally();
        let verdict = if for_challenger >= panel.majority() {
            Verdict::ForChallenger
        } else {
            Verdict::ForCreator
        };
        let payout = distribute_forfeited_bond(self.veracity_bond, &self.config.policy, &panel.members)?;
        let settlements = panel
            .members
            .iter()
            .map(|m| {
                let bond = self.juror_bonds.get(m).expect("seated jurors hold bonds");
                let avg = self
                    .ratings
                    .get(m)
                    .and_then(|r| RatingAverage::of(r.iter().copied()).ok())
                    .unwrap_or(RatingValue::Neutral.into());
                let assessed = panel.assessments.get(m).is_some_and(|a| !a.trim().is_empty());
                settle_juror_bond(bond, panel.has_voted(m), assessed, avg)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let dismissed = match verdict {
            Verdict::ForChallenger => self.challenge_queue.iter().map(|c| c.challenger_id.clone()).collect(),
            Verdict::ForCreator => Vec::new(),
        };
        Ok(Finalization {
            verdict,
            payout,
            settlements,
            dismissed,
        })
    }

    fn compute_closure(&self) -> Result<(ContestState, Money), ContestError> {
        match self.state {
            ContestState::Open => {}
            ContestState::Challenged | ContestState::Deliberating => return Err(ContestError::PendingChallenges),
            s => return Err(ContestError::InvalidState(s)),
        }
        if !self.challenge_queue.is_empty() || self.active_challenge.is_some() {
            return Err(ContestError::PendingChallenges);
        }
        if self.clock < self.challenge_deadline {
            return Err(ContestError::PeriodNotOver(self.challenge_deadline));
        }
        let outcome = if self.adjudicated > 0 {
            ContestState::ResolvedForCreator
        } else {
            ContestState::ExpiredUnchallenged
        };
        Ok((outcome, self.escrow.veracity_bond))
    }

    /// Validates `event` against the current state and applies it.
    /// Nothing is mutated when an error is returned.
    fn apply(&mut self, event: &Event, tick: u64) -> Result<(), ContestError> {
        match event {
            Event::ClockAdvanced { to } => {
                if *to < self.clock {
                    return Err(ContestError::ClockBackwards {
                        now: self.clock,
                        to: *to,
                    });
                }
                self.clock = *to;
                return Ok(());
            }
            Event::Opened { .. } => return Err(ContestError::InvalidState(self.state)),
            _ => {}
        }
        if tick != self.clock {
            return Err(ContestError::OutOfOrder {
                index: self.log.len(),
                reason: format!("entry tick {tick} but clock is {}", self.clock),
            });
        }
        match event {
            Event::ChallengeSubmitted {
                challenger_id,
                counter_bond,
                evidence_ref,
            } => self.apply_submission(challenger_id, *counter_bond, evidence_ref),
            Event::ChallengeActivated {
                challenger_id,
                panel,
                bench,
                juror_bond,
                deliberation_deadline,
            } => self.apply_activation(challenger_id, panel, bench, *juror_bond, *deliberation_deadline),
            Event::JurorSubstituted {
                replaced,
                substitute,
                reason,
                juror_bond,
                seat_deadline,
            } => self.apply_substitution(replaced, substitute, *reason, *juror_bond, *seat_deadline),
            Event::BenchRefilled { bench } => {
                self.check_refill()?;
                let taken = self.participants();
                let distinct: BTreeSet<_> = bench.iter().map(|b| &b.juror_id).collect();
                if bench.is_empty()
                    || bench.len() > self.config.bench_size.max(1)
                    || distinct.len() != bench.len()
                    || distinct.iter().any(|id| taken.contains(*id))
                {
                    return Err(ContestError::ReplayDivergence);
                }
                self.jury.as_mut().expect("checked").bench = bench.clone();
                Ok(())
            }
            Event::VoteRecorded {
                juror_id,
                vote,
                assessment,
            } => self.apply_vote(juror_id, *vote, assessment),
            Event::JurorRated { juror_id, value } => {
                let panel = self.deliberating_panel()?;
                if !panel.contains(juror_id) {
                    return Err(ContestError::NotAJuror(juror_id.to_string()));
                }
                self.ratings.entry(juror_id.clone()).or_default().push(*value);
                Ok(())
            }
            Event::ChallengeFinalized {
                verdict,
                payout,
                settlements,
                dismissed,
            } => {
                let expected = self.compute_finalization()?;
                let recorded = Finalization {
                    verdict: *verdict,
                    payout: payout.clone(),
                    settlements: settlements.clone(),
                    dismissed: dismissed.clone(),
                };
                if expected != recorded {
                    return Err(ContestError::ReplayDivergence);
                }
                self.apply_finalization(expected)
            }
            Event::ChallengePeriodClosed { outcome, refund } => {
                let expected = self.compute_closure()?;
                if expected != (*outcome, *refund) {
                    return Err(ContestError::ReplayDivergence);
                }
                self.escrow.veracity_bond = self.escrow.veracity_bond.checked_sub(*refund)?;
                let creator = self.creator_id.clone();
                self.escrow.credit(&creator, *refund)?;
                self.state = *outcome;
                Ok(())
            }
            Event::ClockAdvanced { .. } | Event::Opened { .. } => unreachable!("handled above"),
        }
    }

    fn apply_submission(
        &mut self,
        challenger_id: &ParticipantId,
        counter_bond: Money,
        evidence_ref: &str,
    ) -> Result<(), ContestError> {
        if !matches!(
            self.state,
            ContestState::Open | ContestState::Challenged | ContestState::Deliberating
        ) {
            return Err(ContestError::InvalidState(self.state));
        }
        if self.clock >= self.challenge_deadline {
            return Err(ContestError::DeadlinePassed {
                deadline: self.challenge_deadline,
                now: self.clock,
            });
        }
        if counter_bond != self.veracity_bond {
            return Err(ContestError::BondMismatch {
                expected: self.veracity_bond.minor_units(),
                got: counter_bond.minor_units(),
            });
        }
        if *challenger_id == self.creator_id {
            return Err(ContestError::CreatorConflict);
        }
        if self.challengers().contains(challenger_id) {
            return Err(ContestError::DuplicateChallenger(challenger_id.to_string()));
        }
        if let Some(panel) = &self.jury {
            if panel.contains(challenger_id) || panel.bench.iter().any(|b| &b.juror_id == challenger_id) {
                return Err(ContestError::RoleConflict(challenger_id.to_string()));
            }
        }
        if self.past_jurors.contains(challenger_id) {
            return Err(ContestError::RoleConflict(challenger_id.to_string()));
        }
        self.escrow.deposit(challenger_id, counter_bond)?;
        self.escrow.counter_bonds = self.escrow.counter_bonds.checked_add(counter_bond)?;
        self.challenge_queue.push(Challenge {
            challenger_id: challenger_id.clone(),
            counter_bond,
            evidence_ref: evidence_ref.to_string(),
            outcome: ChallengeOutcome::Queued,
            submitted_at: self.clock,
        });
        if self.state == ContestState::Open {
            self.state = ContestState::Challenged;
        }
        Ok(())
    }

    fn apply_activation(
        &mut self,
        challenger_id: &ParticipantId,
        panel: &[ParticipantId],
        bench: &[BenchEntry],
        juror_bond: Money,
        deliberation_deadline: u64,
    ) -> Result<(), ContestError> {
        self.check_can_activate()?;
        let pos = self
            .challenge_queue
            .iter()
            .position(|c| &c.challenger_id == challenger_id)
            .ok_or(ContestError::EmptyQueue)?;
        if panel.len() != self.config.panel_size {
            return Err(JuryError::InvalidPanelSize(panel.len()).into());
        }
        let seated: BTreeSet<_> = panel.iter().chain(bench.iter().map(|b| &b.juror_id)).collect();
        if seated.len() != panel.len() + bench.len() {
            return Err(ContestError::RoleConflict("duplicate juror".into()));
        }
        let challengers = self.challengers();
        if let Some(c) = seated
            .iter()
            .find(|j| ***j == self.creator_id || challengers.contains(**j))
        {
            return Err(if **c == self.creator_id {
                ContestError::CreatorConflict
            } else {
                ContestError::RoleConflict(c.to_string())
            });
        }
        if juror_bond != juror_bond_amount(self.veracity_bond, self.config.policy.gamma)? {
            return Err(ContestError::ReplayDivergence);
        }
        if deliberation_deadline != self.clock + self.config.deliberation_period {
            return Err(ContestError::ReplayDivergence);
        }

        let mut challenge = self.challenge_queue.remove(pos);
        challenge.outcome = ChallengeOutcome::Active;
        self.active_challenge = Some(challenge);
        for j in panel {
            self.post_juror_bond(j, juror_bond)?;
        }
        self.jury = Some(JuryPanel::seat(panel.to_vec(), bench.to_vec()));
        self.seat_deadlines = panel.iter().map(|j| (j.clone(), deliberation_deadline)).collect();
        self.deliberation_deadline = Some(deliberation_deadline);
        self.state = ContestState::Deliberating;
        Ok(())
    }

    fn post_juror_bond(&mut self, juror: &ParticipantId, amount: Money) -> Result<(), ContestError> {
        self.escrow.deposit(juror, amount)?;
        self.escrow.juror_bonds = self.escrow.juror_bonds.checked_add(amount)?;
        self.juror_bonds.insert(
            juror.clone(),
            JurorBond {
                juror_id: juror.clone(),
                amount,
                status: BondStatus::Held,
            },
        );
        Ok(())
    }

    fn apply_substitution(
        &mut self,
        replaced: &ParticipantId,
        substitute: &ParticipantId,
        reason: SubstitutionReason,
        juror_bond: Money,
        seat_deadline: u64,
    ) -> Result<(), ContestError> {
        self.check_substitution(replaced, reason)?;
        let panel = self.jury.as_ref().expect("checked");
        let bench_idx = panel
            .bench
            .iter()
            .position(|b| &b.juror_id == substitute)
            .ok_or(ContestError::EmptyBench)?;
        if self.challengers().contains(substitute) || *substitute == self.creator_id {
            return Err(ContestError::RoleConflict(substitute.to_string()));
        }
        if seat_deadline != self.substitute_deadline(replaced, reason)
            || juror_bond != juror_bond_amount(self.veracity_bond, self.config.policy.gamma)?
        {
            return Err(ContestError::ReplayDivergence);
        }

        let old = self.juror_bonds.remove(replaced).expect("seated jurors hold bonds");
        self.escrow.juror_bonds = self.escrow.juror_bonds.checked_sub(old.amount)?;
        match reason {
            SubstitutionReason::MissedDeadline => {
                self.escrow.reserve = self.escrow.reserve.checked_add(old.amount)?;
                self.inactive_jurors.push(replaced.clone());
            }
            SubstitutionReason::DeclinedBond => self.escrow.credit(replaced, old.amount)?,
        }
        self.post_juror_bond(substitute, juror_bond)?;

        let tick = self.clock;
        let panel = self.jury.as_mut().expect("checked");
        panel.bench.remove(bench_idx);
        for m in panel.members.iter_mut() {
            if m == replaced {
                *m = substitute.clone();
            }
        }
        panel.votes.remove(replaced);
        panel.votes.insert(substitute.clone(), Vote::NotYetVoted);
        panel.assessments.remove(replaced);
        panel.substitutions.push(Substitution {
            replaced: replaced.clone(),
            substitute: substitute.clone(),
            tick,
        });
        self.ratings.remove(replaced);
        self.past_jurors.insert(replaced.clone());
        self.seat_deadlines.remove(replaced);
        self.seat_deadlines.insert(substitute.clone(), seat_deadline);
        self.deliberation_deadline = self.seat_deadlines.values().max().copied();
        Ok(())
    }

    fn apply_vote(&mut self, juror_id: &ParticipantId, vote: Vote, assessment: &str) -> Result<(), ContestError> {
        let panel = self.deliberating_panel()?;
        if !panel.contains(juror_id) {
            return Err(ContestError::NotAJuror(juror_id.to_string()));
        }
        if panel.has_voted(juror_id) {
            return Err(ContestError::AlreadyVoted(juror_id.to_string()));
        }
        let deadline = self.seat_deadlines.get(juror_id).copied().unwrap_or(u64::MAX);
        if self.clock > deadline {
            return Err(ContestError::DeliberationClosed {
                deadline,
                now: self.clock,
            });
        }
        if assessment.trim().is_empty() {
            return Err(ContestError::EmptyAssessment);
        }
        if vote == Vote::NotYetVoted {
            return Err(ContestError::InvalidState(self.state));
        }
        let panel = self.jury.as_mut().expect("checked");
        panel.votes.insert(juror_id.clone(), vote);
        panel.assessments.insert(juror_id.clone(), assessment.to_string());
        Ok(())
    }

    fn apply_finalization(&mut self, f: Finalization) -> Result<(), ContestError> {
        let beta = self.veracity_bond;
        let mut active = self
            .active_challenge
            .take()
            .expect("deliberating has an active challenge");
        self.escrow.counter_bonds = self.escrow.counter_bonds.checked_sub(active.counter_bond)?;
        match f.verdict {
            Verdict::ForChallenger => {
                self.escrow.veracity_bond = self.escrow.veracity_bond.checked_sub(beta)?;
                let challenger = active.challenger_id.clone();
                self.escrow.credit(&challenger, active.counter_bond)?;
                self.escrow.credit(&challenger, f.payout.winner_share)?;
                active.outcome = ChallengeOutcome::Won;
            }
            Verdict::ForCreator => {
                let creator = self.creator_id.clone();
                self.escrow.credit(&creator, f.payout.winner_share)?;
                active.outcome = ChallengeOutcome::Lost;
            }
        }
        for (juror, share) in &f.payout.juror_shares {
            self.escrow.credit(juror, *share)?;
        }
        self.escrow.platform = self.escrow.platform.checked_add(f.payout.platform_share)?;
        for bond in &f.settlements {
            self.escrow.juror_bonds = self.escrow.juror_bonds.checked_sub(bond.amount)?;
            match bond.status {
                BondStatus::Refunded => self.escrow.credit(&bond.juror_id, bond.amount)?,
                BondStatus::ForfeitedToReserve => self.escrow.reserve = self.escrow.reserve.checked_add(bond.amount)?,
                BondStatus::Held => unreachable!("settlement never leaves a bond held"),
            }
        }
        self.resolved_challenges.push(active);
        if f.verdict == Verdict::ForChallenger {
            for mut c in std::mem::take(&mut self.challenge_queue) {
                self.escrow.counter_bonds = self.escrow.counter_bonds.checked_sub(c.counter_bond)?;
                self.escrow.credit(&c.challenger_id, c.counter_bond)?;
                c.outcome = ChallengeOutcome::Dismissed;
                self.resolved_challenges.push(c);
            }
        }
        if let Some(panel) = self.jury.take() {
            self.past_jurors.extend(panel.members);
        }
        self.juror_bonds.clear();
        self.ratings.clear();
        self.deliberation_deadline = None;
        self.seat_deadlines.clear();
        self.adjudicated += 1;
        self.state = match f.verdict {
            Verdict::ForChallenger => ContestState::ResolvedForChallenger,
            Verdict::ForCreator if !self.challenge_queue.is_empty() => ContestState::Challenged,
            Verdict::ForCreator => ContestState::Open,
        };
        Ok(())
    }

    /// Rebuilds a contest from its log. Entries must be in sequence order
    /// with non-decreasing ticks and start with the open event.
    pub fn replay(log: &EventLog) -> Result<Contest, ContestError> {
        let entries = log.entries();
        let first = entries.first().ok_or(ContestError::EmptyLog)?;
        if first.seq != 0 || !matches!(first.event, Event::Opened { .. }) {
            return Err(ContestError::MissingGenesis);
        }
        let mut contest = Contest::genesis(&first.event, first.tick)?;
        contest.rng_word_pos = first.seed_state;
        contest.log.push(first.clone());
        let mut prev_tick = first.tick;
        for (index, entry) in entries.iter().enumerate().skip(1) {
            if entry.seq != index as u64 {
                return Err(ContestError::OutOfOrder {
                    index,
                    reason: format!("expected seq {index}, found {}", entry.seq),
                });
            }
            if entry.tick < prev_tick {
                return Err(ContestError::OutOfOrder {
                    index,
                    reason: format!("tick {} precedes {prev_tick}", entry.tick),
                });
            }
            contest.apply(&entry.event, entry.tick)?;
            contest.rng_word_pos = entry.seed_state;
            contest.log.push(entry.clone());
            prev_tick = entry.tick;
        }
        contest.rng.set_word_pos(contest.rng_word_pos as u128);
        for a in log.sealed_audit() {
            contest.log.seal(a.clone());
        }
        Ok(contest)
    }

    /// Replays the longest valid prefix of `log`; returns the contest and
    /// how many entries were applied.
    pub fn replay_prefix(log: &EventLog) -> Result<(Contest, usize), ContestError> {
        let mut len = log.len();
        loop {
            match Contest::replay(&log.prefix(len)) {
                Ok(c) => return Ok((c, len)),
                Err(e) if len <= 1 => return Err(e),
                Err(_) => len -= 1,
            }
        }
    }

    /// Replays this contest's own log and checks the state hashes agree.
    pub fn verify_replay(&self) -> Result<(), ContestError> {
        let replayed = Contest::replay(&self.log)?;
        if replayed.state_hash() == self.state_hash() {
            Ok(())
        } else {
            Err(ContestError::ReplayDivergence)
        }
    }
}
