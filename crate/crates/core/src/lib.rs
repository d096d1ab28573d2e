// Copyright 2026 The Veracity Bond Authors
// SPDX-License-Identifier: Apache-2.0

//! Veracity bonds: bonded content claims, juried challenges, and the
//! analyses used to size juries and juror pools.

pub mod capacity;
pub mod collusion;
pub mod contest;
pub mod error;
pub mod ids;
pub mod jury;
pub mod money;
pub mod protocol;
pub mod queue;
pub mod simulation;

pub use contest::{
    Challenge, ChallengeOutcome, Contest, ContestConfig, ContestRegistry, ContestState, Escrow, Event, EventLog,
    LogEntry, SubstitutionReason, Verdict,
};
pub use error::{AnalysisError, ContestError, JuryError, ProtocolError, SimulationError};
pub use ids::{ContentId, ParticipantId};
pub use jury::{JurorProfile, JuryConfig, JuryPanel, Rating, RatingValue, Vote};
pub use money::{Fraction, Money};
pub use protocol::{JurorBond, JurorFeeCurve, Payout, PayoutPolicy};
