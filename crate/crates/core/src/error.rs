// Copyright 2026 The Veracity Bond Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::contest::ContestState;

/// Errors from money arithmetic and payout policy validation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("money overflow")]
    Overflow,
    #[error("money underflow: {have} < {need}")]
    Underflow { have: u64, need: u64 },
    #[error("bond must be positive")]
    ZeroBond,
    #[error("juror list is empty")]
    NoJurors,
    #[error("juror list must be odd-sized, got {0}")]
    EvenJury(usize),
    #[error("platform and jury fractions sum to {0}, must be < 1")]
    FractionsTooLarge(String),
    #[error("fraction {0} outside the allowed range")]
    FractionOutOfRange(String),
    #[error("malformed fraction {0:?}, expected \"p/q\"")]
    MalformedFraction(String),
    #[error("juror bond already settled")]
    AlreadySettled,
}

/// Errors raised by the contest state machine and its event log.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContestError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Jury(#[from] JuryError),
    #[error("creator is not verified")]
    UnverifiedCreator,
    #[error("content {0} already has a contest")]
    DuplicateContent(String),
    #[error("unknown content {0}")]
    UnknownContent(String),
    #[error("operation not allowed in state {0:?}")]
    InvalidState(ContestState),
    #[error("counter bond {got} does not match veracity bond {expected}")]
    BondMismatch { expected: u64, got: u64 },
    #[error("participant {0} already challenged this content")]
    DuplicateChallenger(String),
    #[error("creator cannot challenge or judge their own content")]
    CreatorConflict,
    #[error("participant {0} already holds another role in this contest")]
    RoleConflict(String),
    #[error("challenge period ended at tick {deadline}, now {now}")]
    DeadlinePassed { deadline: u64, now: u64 },
    #[error("deliberation period ended at tick {deadline}, now {now}")]
    DeliberationClosed { deadline: u64, now: u64 },
    #[error("participant {participant} already has {count} active challenges (cap {cap})")]
    ChallengeCapExceeded {
        participant: String,
        count: usize,
        cap: usize,
    },
    #[error("an active challenge is already being judged")]
    ActiveChallengePresent,
    #[error("no queued challenges")]
    EmptyQueue,
    #[error("no active challenge")]
    NoActiveChallenge,
    #[error("{0} is not a juror on the active panel")]
    NotAJuror(String),
    #[error("juror {0} already voted")]
    AlreadyVoted(String),
    #[error("assessment text must not be empty")]
    EmptyAssessment,
    #[error("juror {0} is not eligible for substitution yet")]
    SubstitutionNotDue(String),
    #[error("bench of alternates is empty")]
    EmptyBench,
    #[error("{missing} votes missing and no substitutions made")]
    MissingVotes { missing: usize },
    #[error("challenges still pending")]
    PendingChallenges,
    #[error("challenge period still running until tick {0}")]
    PeriodNotOver(u64),
    #[error("clock cannot move backwards from {now} to {to}")]
    ClockBackwards { now: u64, to: u64 },
    #[error("evaluator {0} has a role in this contest")]
    ConflictedEvaluator(String),
    #[error("event log is empty")]
    EmptyLog,
    #[error("event log must start with an open event")]
    MissingGenesis,
    #[error("event {index} out of order: {reason}")]
    OutOfOrder { index: usize, reason: String },
    #[error("corrupt event log line {line}: {reason}")]
    CorruptLog { line: usize, reason: String },
    #[error("replayed state diverges from the live contest")]
    ReplayDivergence,
}

/// Errors from jury selection, evaluation and reputation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JuryError {
    #[error("panel size must be odd and positive, got {0}")]
    InvalidPanelSize(usize),
    #[error("panel size {panel} exceeds pool size {pool}")]
    PanelExceedsPool { panel: usize, pool: usize },
    #[error("only {eligible} eligible jurors, need {needed}")]
    InsufficientPool { eligible: usize, needed: usize },
    #[error("only {eligible} conflict-free viewers, need {needed}")]
    InsufficientViewers { eligible: usize, needed: usize },
    #[error("no ratings to aggregate")]
    NoRatings,
}

/// Errors from the collusion and capacity analyses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("colluders {colluders} exceed pool {pool}")]
    ColludersExceedPool { colluders: u64, pool: u64 },
    #[error("panel {panel} exceeds pool {pool}")]
    PanelExceedsPool { panel: u64, pool: u64 },
    #[error("panel size must be odd and positive, got {0}")]
    EvenPanel(u64),
    #[error("colluder ratio {0} must lie in [0, 1/2)")]
    RatioOutOfRange(f64),
    #[error("probability {0} must lie in (0, 1]")]
    InvalidEpsilon(f64),
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("challenge ratio {0} must lie in [0, 1]")]
    InvalidChallengeRatio(f64),
}

/// Errors from scenario configuration and execution.
#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Contest(#[from] ContestError),
    #[error(transparent)]
    Jury(#[from] JuryError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
