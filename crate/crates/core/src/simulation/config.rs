// Copyright 2026 The Veracity Bond Authors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::contest::{ContestConfig, Verdict};
use crate::error::SimulationError;
use crate::jury::ReputationParams;
use crate::money::Money;

/// Behaviour of one simulated agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AgentStrategy {
    /// Publishes true content with probability `accuracy`.
    HonestCreator {
        accuracy: f64,
    },
    MisinfoCreator {
        accuracy: f64,
    },
    /// Challenges false content with probability `detection_skill`; never
    /// challenges true content.
    DiligentChallenger {
        detection_skill: f64,
    },
    /// Challenges any content with probability `challenge_rate`.
    FrivolousChallenger {
        challenge_rate: f64,
    },
    /// Votes against the ground truth with probability `error_rate`.
    DiligentJuror {
        error_rate: f64,
    },
    /// Lets the deliberation deadline pass with probability `abstain_prob`,
    /// otherwise votes with the ground truth.
    LazyJuror {
        abstain_prob: f64,
    },
    ColludingJuror {
        bloc: u32,
        target: Verdict,
    },
}

impl AgentStrategy {
    pub fn label(&self) -> &'static str {
        match self {
            AgentStrategy::HonestCreator { .. } => "honest_creator",
            AgentStrategy::MisinfoCreator { .. } => "misinfo_creator",
            AgentStrategy::DiligentChallenger { .. } => "diligent_challenger",
            AgentStrategy::FrivolousChallenger { .. } => "frivolous_challenger",
            AgentStrategy::DiligentJuror { .. } => "diligent_juror",
            AgentStrategy::LazyJuror { .. } => "lazy_juror",
            AgentStrategy::ColludingJuror { .. } => "colluding_juror",
        }
    }

    pub fn role(&self) -> Role {
        match self {
            AgentStrategy::HonestCreator { .. } | AgentStrategy::MisinfoCreator { .. } => Role::Creator,
            AgentStrategy::DiligentChallenger { .. } | AgentStrategy::FrivolousChallenger { .. } => Role::Challenger,
            _ => Role::Juror,
        }
    }

    fn probability(&self) -> Option<(&'static str, f64)> {
        match *self {
            AgentStrategy::HonestCreator { accuracy } | AgentStrategy::MisinfoCreator { accuracy } => {
                Some(("accuracy", accuracy))
            }
            AgentStrategy::DiligentChallenger { detection_skill } => Some(("detection_skill", detection_skill)),
            AgentStrategy::FrivolousChallenger { challenge_rate } => Some(("challenge_rate", challenge_rate)),
            AgentStrategy::DiligentJuror { error_rate } => Some(("error_rate", error_rate)),
            AgentStrategy::LazyJuror { abstain_prob } => Some(("abstain_prob", abstain_prob)),
            AgentStrategy::ColludingJuror { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Creator,
    Challenger,
    Juror,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentGroup {
    pub count: u32,
    pub strategy: AgentStrategy,
}

fn default_bond() -> Money {
    Money::new(1000)
}

fn default_wave() -> u32 {
    10
}

fn default_evaluators() -> u32 {
    3
}

fn default_rating_noise() -> f64 {
    0.1
}

fn default_cap() -> usize {
    crate::contest::DEFAULT_CHALLENGE_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    pub contests: u32,
    /// Contests opened together; the challenge cap binds across a wave.
    #[serde(default = "default_wave")]
    pub wave_size: u32,
    #[serde(default = "default_bond")]
    pub bond: Money,
    /// When set, every content is true with this probability regardless of
    /// who wrote it; otherwise the creator's accuracy decides.
    #[serde(default)]
    pub truth_prior: Option<f64>,
    pub creators: Vec<AgentGroup>,
    #[serde(default)]
    pub challengers: Vec<AgentGroup>,
    pub jurors: Vec<AgentGroup>,
    #[serde(default)]
    pub contest: ContestConfig,
    #[serde(default = "default_cap")]
    pub challenge_cap: usize,
    #[serde(default = "default_evaluators")]
    pub evaluators_per_juror: u32,
    /// Chance that an evaluator's rating is uniform noise.
    #[serde(default = "default_rating_noise")]
    pub rating_noise: f64,
    #[serde(default)]
    pub reputation: ReputationParams,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, SimulationError> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        let bad = |msg: String| Err(SimulationError::InvalidConfig(msg));
        if self.contests == 0 {
            return bad("contests must be positive".into());
        }
        if self.wave_size == 0 {
            return bad("wave_size must be positive".into());
        }
        if self.bond.is_zero() {
            return bad("bond must be positive".into());
        }
        if let Some(q) = self.truth_prior {
            if !(0.0..=1.0).contains(&q) {
                return bad(format!("truth_prior {q} outside [0, 1]"));
            }
        }
        for (name, unit) in [("rating_noise", self.rating_noise)] {
            if !(0.0..=1.0).contains(&unit) {
                return bad(format!("{name} {unit} outside [0, 1]"));
            }
        }
        let groups = [
            ("creators", &self.creators, Role::Creator),
            ("challengers", &self.challengers, Role::Challenger),
            ("jurors", &self.jurors, Role::Juror),
        ];
        for (name, list, role) in groups {
            for g in list {
                if g.strategy.role() != role {
                    return bad(format!("{} listed under {name}", g.strategy.label()));
                }
                if let Some((field, p)) = g.strategy.probability() {
                    if !(0.0..=1.0).contains(&p) {
                        return bad(format!("{field} {p} outside [0, 1]"));
                    }
                }
                if let AgentStrategy::LazyJuror { abstain_prob } = g.strategy {
                    if abstain_prob >= 1.0 {
                        return bad("abstain_prob must be below 1 so deliberation can finish".into());
                    }
                }
            }
        }
        if self.creators.iter().map(|g| g.count).sum::<u32>() == 0 {
            return bad("at least one creator is required".into());
        }
        let jurors: u32 = self.jurors.iter().map(|g| g.count).sum();
        if (jurors as usize) < self.contest.panel_size {
            return bad(format!(
                "{jurors} jurors cannot seat a panel of {}",
                self.contest.panel_size
            ));
        }
        self.contest.validate()?;
        Ok(())
    }
}
