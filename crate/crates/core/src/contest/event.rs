// Copyright 2026 The Veracity Bond Authors
// SPDX-License-Identifier: Apache-2.0

//! Append-only contest event log and its JSON-lines encoding.
//!
//! One line per entry with the fields `seq`, `tick`, `kind`, `payload` and
//! `seed_state`. Evaluator identities never appear in entries; they live in
//! the sealed audit section, which is written to its own file.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ContestConfig, ContestState, SubstitutionReason, Verdict};
use crate::error::ContestError;
use crate::ids::{ContentId, ParticipantId};
use crate::jury::{BenchEntry, RatingValue, Vote};
use crate::money::Money;
use crate::protocol::{JurorBond, Payout};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case", deny_unknown_fields)]
pub enum Event {
    Opened {
        content_id: ContentId,
        creator_id: ParticipantId,
        veracity_bond: Money,
        seed: u64,
        config: ContestConfig,
    },
    ClockAdvanced {
        to: u64,
    },
    ChallengeSubmitted {
        challenger_id: ParticipantId,
        counter_bond: Money,
        evidence_ref: String,
    },
    ChallengeActivated {
        challenger_id: ParticipantId,
        panel: Vec<ParticipantId>,
        bench: Vec<BenchEntry>,
        juror_bond: Money,
        deliberation_deadline: u64,
    },
    JurorSubstituted {
        replaced: ParticipantId,
        substitute: ParticipantId,
        reason: SubstitutionReason,
        juror_bond: Money,
        /// Voting deadline of the substitute's seat.
        seat_deadline: u64,
    },
    BenchRefilled {
        bench: Vec<BenchEntry>,
    },
    VoteRecorded {
        juror_id: ParticipantId,
        vote: Vote,
        assessment: String,
    },
    JurorRated {
        juror_id: ParticipantId,
        value: RatingValue,
    },
    ChallengeFinalized {
        verdict: Verdict,
        payout: Payout,
        settlements: Vec<JurorBond>,
        dismissed: Vec<ParticipantId>,
    },
    ChallengePeriodClosed {
        outcome: ContestState,
        refund: Money,
    },
}

impl Event {
    pub fn kind(&self) -> &'static str {
        match self {
            Event::Opened { .. } => "opened",
            Event::ClockAdvanced { .. } => "clock_advanced",
            Event::ChallengeSubmitted { .. } => "challenge_submitted",
            Event::ChallengeActivated { .. } => "challenge_activated",
            Event::JurorSubstituted { .. } => "juror_substituted",
            Event::BenchRefilled { .. } => "bench_refilled",
            Event::VoteRecorded { .. } => "vote_recorded",
            Event::JurorRated { .. } => "juror_rated",
            Event::ChallengeFinalized { .. } => "challenge_finalized",
            Event::ChallengePeriodClosed { .. } => "challenge_period_closed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogEntry {
    pub seq: u64,
    pub tick: u64,
    pub event: Event,
    /// Position of the contest's random stream after this entry.
    pub seed_state: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    seq: u64,
    tick: u64,
    kind: String,
    payload: Value,
    seed_state: u64,
}

impl Serialize for LogEntry {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let tagged = serde_json::to_value(&self.event).map_err(serde::ser::Error::custom)?;
        let payload = tagged.get("payload").cloned().unwrap_or(Value::Null);
        RawEntry {
            seq: self.seq,
            tick: self.tick,
            kind: self.event.kind().to_string(),
            payload,
            seed_state: self.seed_state,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LogEntry {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawEntry::deserialize(deserializer)?;
        let tagged = serde_json::json!({ "kind": raw.kind, "payload": raw.payload });
        let event = serde_json::from_value(tagged).map_err(serde::de::Error::custom)?;
        Ok(LogEntry {
            seq: raw.seq,
            tick: raw.tick,
            event,
            seed_state: raw.seed_state,
        })
    }
}

/// Who rated whom; kept out of every contest-visible output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditEntry {
    pub seq: u64,
    pub evaluator_id: ParticipantId,
    pub juror_id: ParticipantId,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    entries: Vec<LogEntry>,
    sealed_audit: Vec<AuditEntry>,
}

/// Result of lenient parsing: every well-formed leading line, plus where
/// parsing stopped.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedPrefix {
    pub log: EventLog,
    pub truncated_at: Option<usize>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn sealed_audit(&self) -> &[AuditEntry] {
        &self.sealed_audit
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn next_seq(&self) -> u64 {
        self.entries.len() as u64
    }

    pub(crate) fn push(&mut self, entry: LogEntry) {
        debug_assert_eq!(entry.seq, self.next_seq());
        self.entries.push(entry);
    }

    pub(crate) fn seal(&mut self, audit: AuditEntry) {
        self.sealed_audit.push(audit);
    }

    /// First `len` entries (and the audit records that belong to them).
    pub fn prefix(&self, len: usize) -> EventLog {
        let entries: Vec<_> = self.entries.iter().take(len).cloned().collect();
        let sealed_audit = self
            .sealed_audit
            .iter()
            .filter(|a| (a.seq as usize) < entries.len())
            .cloned()
            .collect();
        EventLog { entries, sealed_audit }
    }

    pub fn from_entries(entries: Vec<LogEntry>) -> Self {
        EventLog {
            entries,
            sealed_audit: Vec::new(),
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("log entries serialize"));
            out.push('\n');
        }
        out
    }

    pub fn audit_to_jsonl(&self) -> String {
        let mut out = String::new();
        for a in &self.sealed_audit {
            out.push_str(&serde_json::to_string(a).expect("audit entries serialize"));
            out.push('\n');
        }
        out
    }

    /// Strict parse: any malformed line is an error.
    pub fn from_jsonl(text: &str) -> Result<Self, ContestError> {
        let parsed = Self::from_jsonl_lenient(text);
        match parsed.truncated_at {
            None => Ok(parsed.log),
            Some(line) => {
                let reason = text
                    .lines()
                    .nth(line - 1)
                    .and_then(|l| serde_json::from_str::<LogEntry>(l).err())
                    .map(|e| e.to_string())
                    .unwrap_or_else(|| "unparseable".into());
                Err(ContestError::CorruptLog { line, reason })
            }
        }
    }

    /// Parses lines until the first malformed one (e.g. a torn final write).
    pub fn from_jsonl_lenient(text: &str) -> ParsedPrefix {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<LogEntry>(line) {
                Ok(e) => entries.push(e),
                Err(_) => {
                    return ParsedPrefix {
                        log: EventLog::from_entries(entries),
                        truncated_at: Some(i + 1),
                    }
                }
            }
        }
        ParsedPrefix {
            log: EventLog::from_entries(entries),
            truncated_at: None,
        }
    }

    pub fn with_audit_jsonl(mut self, text: &str) -> Result<Self, ContestError> {
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let a = serde_json::from_str(line).map_err(|e| ContestError::CorruptLog {
                line: i + 1,
                reason: e.to_string(),
            })?;
            self.sealed_audit.push(a);
        }
        Ok(self)
    }
}
