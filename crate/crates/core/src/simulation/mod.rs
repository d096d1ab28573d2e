// Copyright 2026 The Veracity Bond Authors
// SPDX-License-Identifier: Apache-2.0

//! Agent-based scenarios driven through the contest engine.

mod config;
mod stats;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use config::{AgentGroup, AgentStrategy, Role, ScenarioConfig};
pub use stats::{
    empirical_collusion_rate, visibility_rank, wilson_interval, EmpiricalRate, RankItem, RankedContent,
    VisibilityWeighting,
};

use crate::collusion::{exact_collusion_probability, CollusionQuery};
use crate::contest::{ChallengeOutcome, Contest, ContestRegistry, ContestState, EventLog, SubstitutionReason, Verdict};
use crate::error::{ContestError, SimulationError};
use crate::ids::{ContentId, ParticipantId};
use crate::jury::{update_reputation, JurorOutcome, JurorProfile, RatingValue, Vote};

/// Money in and out for a set of participants, in minor units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ledger {
    pub deposited: u64,
    pub credited: u64,
    pub net: i64,
}

impl Ledger {
    fn add(&mut self, deposited: u64, credited: u64) {
        self.deposited += deposited;
        self.credited += credited;
        self.net += credited as i64 - deposited as i64;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub expired_unchallenged: u32,
    pub resolved_for_creator: u32,
    pub resolved_for_challenger: u32,
}

/// Seated colluding blocs compared with the analytic tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollusionComparison {
    pub pool: u64,
    /// Size of the largest bloc.
    pub colluders: u64,
    pub panel: u64,
    pub panels: u64,
    pub bloc_majorities: u64,
    /// Panels where a bloc majority also got its target verdict.
    pub captured_verdicts: u64,
    pub empirical_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub exact: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReputationPoint {
    pub wave: u32,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMetrics {
    pub name: String,
    pub seed: u64,
    pub contests: u32,
    pub true_contents: u32,
    pub false_contents: u32,
    pub challenged_contents: u32,
    pub outcomes: OutcomeCounts,
    pub misinformation_survived: u32,
    pub misinformation_survival_rate: f64,
    pub challenges_against_true: u32,
    pub false_challenge_wins: u32,
    pub false_challenge_success_rate: f64,
    pub capped_submissions: u32,
    pub panels: u64,
    pub substitutions: u64,
    pub bench_refills: u64,
    pub collusion: Option<CollusionComparison>,
    pub by_role: BTreeMap<Role, Ledger>,
    pub by_strategy: BTreeMap<String, Ledger>,
    pub platform: u64,
    pub reserve: u64,
    pub reputation_trajectory: Vec<ReputationPoint>,
    pub escrow_residual: i64,
}

/// One finished contest: its log and the hash of its terminal state.
#[derive(Debug, Clone, PartialEq)]
pub struct ContestRecord {
    pub content_id: ContentId,
    pub state_hash: String,
    pub log: EventLog,
}

impl ContestRecord {
    pub fn verify_replay(&self) -> Result<(), ContestError> {
        let replayed = Contest::replay(&self.log)?;
        if replayed.state_hash() == self.state_hash {
            Ok(())
        } else {
            Err(ContestError::ReplayDivergence)
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub metrics: ScenarioMetrics,
    pub records: Vec<ContestRecord>,
    pub final_jurors: Vec<JurorProfile>,
}

struct Agent {
    id: ParticipantId,
    strategy: AgentStrategy,
}

fn agents(role: &str, groups: &[AgentGroup]) -> Vec<Agent> {
    let mut out = Vec::new();
    for (g, group) in groups.iter().enumerate() {
        for i in 0..group.count {
            out.push(Agent {
                id: ParticipantId::new(format!("{role}-{g}-{i:04}")),
                strategy: group.strategy,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
enum Decision {
    Cast(Vote),
    Abstain,
}

fn truthful(truth: bool) -> Vote {
    if truth {
        Vote::ForCreator
    } else {
        Vote::ForChallenger
    }
}

fn flip(v: Vote) -> Vote {
    match v {
        Vote::ForCreator => Vote::ForChallenger,
        _ => Vote::ForCreator,
    }
}

struct World<'a> {
    cfg: &'a ScenarioConfig,
    rng: ChaCha8Rng,
    pool: Vec<JurorProfile>,
    juror_strategy: BTreeMap<ParticipantId, AgentStrategy>,
    strategy_of: BTreeMap<ParticipantId, AgentStrategy>,
    viewers: u64,
    panels: u64,
    substitutions: u64,
    bench_refills: u64,
    bloc_majorities: u64,
    captured: u64,
}

impl World<'_> {
    fn decide(&mut self, juror: &ParticipantId, truth: bool) -> Decision {
        match self.juror_strategy[juror] {
            AgentStrategy::DiligentJuror { error_rate } => {
                let v = truthful(truth);
                Decision::Cast(if self.rng.random_bool(error_rate) { flip(v) } else { v })
            }
            AgentStrategy::LazyJuror { abstain_prob } => {
                if self.rng.random_bool(abstain_prob) {
                    Decision::Abstain
                } else {
                    Decision::Cast(truthful(truth))
                }
            }
            AgentStrategy::ColludingJuror { target, .. } => Decision::Cast(match target {
                Verdict::ForCreator => Vote::ForCreator,
                Verdict::ForChallenger => Vote::ForChallenger,
            }),
            other => unreachable!("{} is not a juror strategy", other.label()),
        }
    }

    fn rating_for(&mut self, vote: Vote, truth: bool) -> RatingValue {
        if self.rng.random_bool(self.cfg.rating_noise) {
            return [RatingValue::No, RatingValue::Neutral, RatingValue::Yes][self.rng.random_range(0..3)];
        }
        if vote == truthful(truth) {
            RatingValue::Yes
        } else {
            RatingValue::No
        }
    }

    /// Largest single-bloc presence on a panel, with that bloc's target.
    fn largest_bloc(&self, members: &[ParticipantId]) -> Option<(usize, Verdict)> {
        let mut blocs: BTreeMap<u32, (usize, Verdict)> = BTreeMap::new();
        for m in members {
            if let AgentStrategy::ColludingJuror { bloc, target } = self.juror_strategy[m] {
                blocs.entry(bloc).or_insert((0, target)).0 += 1;
            }
        }
        blocs.into_values().max_by_key(|(n, _)| *n)
    }

    /// Hears one challenge from activation to verdict.
    fn hear_challenge(&mut self, c: &mut Contest, truth: bool) -> Result<(), SimulationError> {
        c.activate_next_challenge(&self.pool)?;
        self.panels += 1;
        let seated = c.jury().expect("just activated").members.clone();
        let bloc = self.largest_bloc(&seated);
        let majority = seated.len() / 2 + 1;

        let mut inactive: Vec<ParticipantId> = Vec::new();
        let mut pending = seated;
        let mut rounds = 0;
        loop {
            let mut missed = Vec::new();
            for j in pending {
                match self.decide(&j, truth) {
                    Decision::Cast(v) => c.record_vote(j, v, "assessment on file")?,
                    Decision::Abstain => missed.push(j),
                }
            }
            if missed.is_empty() {
                break;
            }
            rounds += 1;
            if rounds > 1000 {
                return Err(SimulationError::InvalidConfig("deliberation never completes".into()));
            }
            let deadline = c.deliberation_deadline().expect("deliberating");
            c.advance_clock(deadline + 1)?;
            pending = Vec::new();
            for j in missed {
                let outcome = match c.substitute_inactive_juror(j.clone(), SubstitutionReason::MissedDeadline) {
                    Err(ContestError::EmptyBench) => {
                        c.refill_bench(&self.pool)?;
                        self.bench_refills += 1;
                        c.substitute_inactive_juror(j.clone(), SubstitutionReason::MissedDeadline)
                    }
                    r => r,
                };
                outcome?;
                self.substitutions += 1;
                let sub = c.jury().unwrap().substitutions.last().unwrap().substitute.clone();
                pending.push(sub);
                inactive.push(j);
            }
        }

        let members = c.jury().expect("deliberating").members.clone();
        let mut ratings: BTreeMap<ParticipantId, Vec<RatingValue>> = BTreeMap::new();
        for m in &members {
            let vote = c.jury().unwrap().votes[m];
            for _ in 0..self.cfg.evaluators_per_juror {
                self.viewers += 1;
                let value = self.rating_for(vote, truth);
                c.rate_juror(ParticipantId::new(format!("viewer-{}", self.viewers)), m.clone(), value)?;
                ratings.entry(m.clone()).or_default().push(value);
            }
        }
        let verdict = c.finalize_active_challenge()?;
        if let Some((size, target)) = bloc {
            if size >= majority {
                self.bloc_majorities += 1;
                if target == verdict {
                    self.captured += 1;
                }
            }
        }

        let fees: BTreeMap<ParticipantId, u64> = match c.log().entries().last().map(|e| &e.event) {
            Some(crate::contest::Event::ChallengeFinalized { payout, .. }) => payout
                .juror_shares
                .iter()
                .map(|(j, m)| (j.clone(), m.minor_units()))
                .collect(),
            _ => BTreeMap::new(),
        };
        let params = self.cfg.reputation;
        for profile in self.pool.iter_mut() {
            let id = &profile.juror_id;
            let outcome = if members.contains(id) {
                JurorOutcome {
                    ratings: ratings.remove(id).unwrap_or_default(),
                    voted: true,
                    fee: fees.get(id).copied().unwrap_or(0) as f64,
                }
            } else if inactive.contains(id) {
                JurorOutcome {
                    ratings: Vec::new(),
                    voted: false,
                    fee: 0.0,
                }
            } else {
                continue;
            };
            *profile = update_reputation(profile, &outcome, &params);
        }
        Ok(())
    }

    /// Runs one contest from its current state to a terminal state.
    fn settle(&mut self, c: &mut Contest, truth: bool) -> Result<(), SimulationError> {
        loop {
            match c.state() {
                ContestState::Challenged => self.hear_challenge(c, truth)?,
                ContestState::Open => {
                    let deadline = c.challenge_deadline().max(c.clock());
                    c.advance_clock(deadline)?;
                    c.expire_challenge_period()?;
                }
                ContestState::Deliberating => unreachable!("hear_challenge always finalizes"),
                _ => return Ok(()),
            }
        }
    }

    fn reputation_point(&self, wave: u32) -> ReputationPoint {
        let rs: Vec<f64> = self.pool.iter().map(|p| p.reputation).collect();
        ReputationPoint {
            wave,
            mean: rs.iter().sum::<f64>() / rs.len() as f64,
            min: rs.iter().copied().fold(f64::INFINITY, f64::min),
            max: rs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

fn rate(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Runs every contest of the scenario through the engine.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioRun, SimulationError> {
    cfg.validate()?;
    let creators = agents("creator", &cfg.creators);
    let challengers = agents("challenger", &cfg.challengers);
    let jurors = agents("juror", &cfg.jurors);

    let mut strategy_of = BTreeMap::new();
    for a in creators.iter().chain(&challengers).chain(&jurors) {
        strategy_of.insert(a.id.clone(), a.strategy);
    }
    let mut world = World {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        pool: jurors.iter().map(|a| JurorProfile::new(a.id.clone())).collect(),
        juror_strategy: jurors.iter().map(|a| (a.id.clone(), a.strategy)).collect(),
        strategy_of,
        viewers: 0,
        panels: 0,
        substitutions: 0,
        bench_refills: 0,
        bloc_majorities: 0,
        captured: 0,
    };
    let mut registry = ContestRegistry::new(cfg.challenge_cap);
    let mut truths: BTreeMap<ContentId, bool> = BTreeMap::new();
    let mut capped = 0u32;
    let mut trajectory = Vec::new();
    let mut tick = 0u64;
    let mut opened = 0u32;
    let mut wave = 0u32;

    while opened < cfg.contests {
        let this_wave = cfg.wave_size.min(cfg.contests - opened);
        let mut ids = Vec::with_capacity(this_wave as usize);
        for _ in 0..this_wave {
            let content = ContentId::new(format!("content-{opened:06}"));
            opened += 1;
            let creator = &creators[world.rng.random_range(0..creators.len())];
            let accuracy = match creator.strategy {
                AgentStrategy::HonestCreator { accuracy } | AgentStrategy::MisinfoCreator { accuracy } => accuracy,
                _ => unreachable!("validated"),
            };
            let truth = world.rng.random_bool(cfg.truth_prior.unwrap_or(accuracy));
            let seed = world.rng.random();
            registry.open(
                content.clone(),
                creator.id.clone(),
                cfg.bond,
                true,
                cfg.contest,
                seed,
                tick,
            )?;
            truths.insert(content.clone(), truth);
            ids.push(content);
        }
        for ch in &challengers {
            let mut order = ids.clone();
            order.shuffle(&mut world.rng);
            for content in &order {
                let truth = truths[content];
                let p = match ch.strategy {
                    AgentStrategy::DiligentChallenger { detection_skill } => {
                        if truth {
                            0.0
                        } else {
                            detection_skill
                        }
                    }
                    AgentStrategy::FrivolousChallenger { challenge_rate } => challenge_rate,
                    _ => unreachable!("validated"),
                };
                if !world.rng.random_bool(p) {
                    continue;
                }
                match registry.submit_challenge(content, ch.id.clone(), cfg.bond, format!("evidence-{}", ch.id)) {
                    Ok(()) => {}
                    Err(ContestError::ChallengeCapExceeded { .. }) => capped += 1,
                    Err(e) => return Err(e.into()),
                }
            }
        }
        let mut last = tick;
        for content in &ids {
            let truth = truths[content];
            let contest = registry.get_mut(content)?;
            world.settle(contest, truth)?;
            last = last.max(contest.clock());
        }
        trajectory.push(world.reputation_point(wave));
        wave += 1;
        tick = last + 1;
    }

    let mut metrics = ScenarioMetrics {
        name: cfg.name.clone(),
        seed: cfg.seed,
        contests: cfg.contests,
        true_contents: 0,
        false_contents: 0,
        challenged_contents: 0,
        outcomes: OutcomeCounts::default(),
        misinformation_survived: 0,
        misinformation_survival_rate: 0.0,
        challenges_against_true: 0,
        false_challenge_wins: 0,
        false_challenge_success_rate: 0.0,
        capped_submissions: capped,
        panels: world.panels,
        substitutions: world.substitutions,
        bench_refills: world.bench_refills,
        collusion: None,
        by_role: BTreeMap::new(),
        by_strategy: BTreeMap::new(),
        platform: 0,
        reserve: 0,
        reputation_trajectory: trajectory,
        escrow_residual: 0,
    };
    let mut records = Vec::with_capacity(registry.len());
    for c in registry.contests() {
        let truth = truths[c.content_id()];
        if truth {
            metrics.true_contents += 1;
        } else {
            metrics.false_contents += 1;
        }
        if !c.resolved_challenges().is_empty() {
            metrics.challenged_contents += 1;
        }
        match c.state() {
            ContestState::ExpiredUnchallenged => metrics.outcomes.expired_unchallenged += 1,
            ContestState::ResolvedForCreator => metrics.outcomes.resolved_for_creator += 1,
            ContestState::ResolvedForChallenger => metrics.outcomes.resolved_for_challenger += 1,
            s => unreachable!("contest left in {s:?}"),
        }
        if !truth && c.state() != ContestState::ResolvedForChallenger {
            metrics.misinformation_survived += 1;
        }
        if truth {
            for ch in c.resolved_challenges() {
                match ch.outcome {
                    ChallengeOutcome::Won => {
                        metrics.challenges_against_true += 1;
                        metrics.false_challenge_wins += 1;
                    }
                    ChallengeOutcome::Lost => metrics.challenges_against_true += 1,
                    _ => {}
                }
            }
        }
        let e = c.escrow();
        let parties: std::collections::BTreeSet<_> = e.deposits.keys().chain(e.credits.keys()).collect();
        for p in parties {
            let (d, cr) = (e.deposited(p).minor_units(), e.credited(p).minor_units());
            let strategy = world.strategy_of.get(p).copied();
            let role = strategy.map_or(Role::Juror, |s| s.role());
            metrics.by_role.entry(role).or_default().add(d, cr);
            if let Some(s) = strategy {
                metrics.by_strategy.entry(s.label().to_string()).or_default().add(d, cr);
            }
        }
        metrics.platform += e.platform.minor_units();
        metrics.reserve += e.reserve.minor_units();
        metrics.escrow_residual += e.residual() as i64;
        records.push(ContestRecord {
            content_id: c.content_id().clone(),
            state_hash: c.state_hash(),
            log: c.log().clone(),
        });
    }
    metrics.misinformation_survival_rate = rate(metrics.misinformation_survived as u64, metrics.false_contents as u64);
    metrics.false_challenge_success_rate = rate(
        metrics.false_challenge_wins as u64,
        metrics.challenges_against_true as u64,
    );
    metrics.collusion = collusion_comparison(cfg, &world)?;

    Ok(ScenarioRun {
        metrics,
        records,
        final_jurors: world.pool,
    })
}

fn collusion_comparison(cfg: &ScenarioConfig, world: &World) -> Result<Option<CollusionComparison>, SimulationError> {
    let mut blocs: BTreeMap<u32, u64> = BTreeMap::new();
    for s in world.juror_strategy.values() {
        if let AgentStrategy::ColludingJuror { bloc, .. } = s {
            *blocs.entry(*bloc).or_default() += 1;
        }
    }
    let Some(&colluders) = blocs.values().max() else {
        return Ok(None);
    };
    let pool = world.pool.len() as u64;
    let panel = cfg.contest.panel_size as u64;
    let exact = exact_collusion_probability(&CollusionQuery::finite(pool, colluders, panel))?.exact_tail;
    let (wilson_low, wilson_high) = wilson_interval(world.bloc_majorities, world.panels, 3.0);
    Ok(Some(CollusionComparison {
        pool,
        colluders,
        panel,
        panels: world.panels,
        bloc_majorities: world.bloc_majorities,
        captured_verdicts: world.captured,
        empirical_rate: rate(world.bloc_majorities, world.panels),
        wilson_low,
        wilson_high,
        exact,
    }))
}
