// Copyright 2026 The Veracity Bond Authors
// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use veracity_core::collusion::{exact_collusion_probability, CollusionQuery, PoolSize};
use veracity_core::contest::{Contest, ContestConfig, Verdict};
use veracity_core::simulation::{
    empirical_collusion_rate, run_scenario, visibility_rank, wilson_interval, AgentGroup, AgentStrategy, RankItem,
    Role, ScenarioConfig, VisibilityWeighting,
};
use veracity_core::{ContentId, Money, SimulationError};

const ALL_HONEST: &str = include_str!("../../../scenarios/all-honest.json");
const COLLUSION_SWEEP: &str = include_str!("../../../scenarios/collusion-sweep.json");

fn group(count: u32, strategy: AgentStrategy) -> AgentGroup {
    AgentGroup { count, strategy }
}

fn base(seed: u64, contests: u32) -> ScenarioConfig {
    ScenarioConfig {
        name: "test".into(),
        seed,
        contests,
        wave_size: 5,
        bond: Money::new(1000),
        truth_prior: None,
        creators: vec![
            group(10, AgentStrategy::HonestCreator { accuracy: 0.9 }),
            group(10, AgentStrategy::MisinfoCreator { accuracy: 0.1 }),
        ],
        challengers: vec![group(10, AgentStrategy::DiligentChallenger { detection_skill: 0.8 })],
        jurors: vec![group(60, AgentStrategy::DiligentJuror { error_rate: 0.1 })],
        contest: ContestConfig {
            panel_size: 5,
            bench_size: 3,
            reputation_threshold: -1000.0,
            ..ContestConfig::default()
        },
        challenge_cap: 50,
        evaluators_per_juror: 2,
        rating_noise: 0.1,
        reputation: Default::default(),
    }
}

#[test]
fn all_honest_scenario_stops_all_misinformation() {
    let cfg = ScenarioConfig::from_json(ALL_HONEST).unwrap();
    let run = run_scenario(&cfg).unwrap();
    let m = &run.metrics;
    assert!(m.false_contents > 0);
    assert_eq!(m.misinformation_survived, 0);
    assert_eq!(m.misinformation_survival_rate, 0.0);
    assert_eq!(m.false_challenge_wins, 0);
    assert_eq!(m.escrow_residual, 0);
    assert_eq!(m.outcomes.resolved_for_challenger, m.false_contents);
}

#[test]
fn no_challengers_means_every_bond_comes_back() {
    let mut cfg = base(1, 60);
    cfg.challengers.clear();
    let run = run_scenario(&cfg).unwrap();
    let m = &run.metrics;
    assert_eq!(m.outcomes.expired_unchallenged, 60);
    assert_eq!(m.panels, 0);
    let creators = m.by_role[&Role::Creator];
    assert_eq!(creators.deposited, 60 * 1000);
    assert_eq!(creators.credited, 60 * 1000);
    assert_eq!(creators.net, 0);
    assert_eq!(m.platform, 0);
    assert_eq!(m.escrow_residual, 0);
}

#[test]
fn rare_collusion_matches_exact_tail() {
    let mut cfg = base(2, 10_000);
    cfg.wave_size = 50;
    cfg.creators = vec![group(50, AgentStrategy::HonestCreator { accuracy: 0.5 })];
    cfg.challengers = vec![group(200, AgentStrategy::FrivolousChallenger { challenge_rate: 0.005 })];
    cfg.jurors = vec![
        group(900, AgentStrategy::DiligentJuror { error_rate: 0.05 }),
        group(
            100,
            AgentStrategy::ColludingJuror {
                bloc: 7,
                target: Verdict::ForChallenger,
            },
        ),
    ];
    cfg.contest.panel_size = 21;
    cfg.contest.bench_size = 2;
    cfg.evaluators_per_juror = 1;
    let run = run_scenario(&cfg).unwrap();
    let c = run.metrics.collusion.unwrap();
    assert!(c.panels > 5_000, "{} panels", c.panels);
    assert_eq!((c.pool, c.colluders, c.panel), (1000, 100, 21));
    // the analytic rate is ~1e-6, so a few thousand panels should see none
    assert!(c.exact > 5e-7 && c.exact < 2e-6, "{}", c.exact);
    assert!(c.wilson_low <= c.exact && c.exact <= c.wilson_high);
    assert_eq!(c.bloc_majorities, 0);
    assert_eq!(run.metrics.escrow_residual, 0);
}

#[test]
fn collusion_sweep_agrees_with_exact_tail() {
    let cfg = ScenarioConfig::from_json(COLLUSION_SWEEP).unwrap();
    let run = run_scenario(&cfg).unwrap();
    let c = run.metrics.collusion.unwrap();
    assert!(c.panels > 100);
    assert!(
        c.wilson_low <= c.exact && c.exact <= c.wilson_high,
        "exact {} outside [{}, {}]",
        c.exact,
        c.wilson_low,
        c.wilson_high
    );
    assert!(c.captured_verdicts <= c.bloc_majorities);
}

#[test]
fn platform_takes_its_share_of_every_forfeit() {
    let run = run_scenario(&base(3, 200)).unwrap();
    let m = &run.metrics;
    assert!(m.panels > 0);
    // 1/10 of a 1000-unit bond on every heard challenge
    assert_eq!(m.platform, 100 * m.panels);
    let jurors = m.by_role[&Role::Juror];
    assert!(jurors.net >= 0 || m.reserve > 0);
    let total_net: i64 = m.by_role.values().map(|l| l.net).sum();
    assert_eq!(total_net + m.platform as i64 + m.reserve as i64, 0);
}

#[test]
fn same_seed_same_everything() {
    let cfg = base(4, 150);
    let a = run_scenario(&cfg).unwrap();
    let b = run_scenario(&cfg).unwrap();
    assert_eq!(
        serde_json::to_string(&a.metrics).unwrap(),
        serde_json::to_string(&b.metrics).unwrap()
    );
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.log.to_jsonl(), y.log.to_jsonl());
        assert_eq!(x.state_hash, y.state_hash);
    }
    let other = run_scenario(&base(5, 150)).unwrap();
    assert_ne!(a.metrics, other.metrics);
}

#[test]
fn every_log_replays_to_its_terminal_hash() {
    let run = run_scenario(&base(6, 120)).unwrap();
    for r in &run.records {
        r.verify_replay().unwrap();
        let reread = veracity_core::EventLog::from_jsonl(&r.log.to_jsonl()).unwrap();
        assert_eq!(Contest::replay(&reread).unwrap().state_hash(), r.state_hash);
    }
}

#[test]
fn lazy_jurors_are_substituted_and_penalized() {
    let mut cfg = base(7, 80);
    cfg.jurors = vec![
        group(40, AgentStrategy::DiligentJuror { error_rate: 0.0 }),
        group(40, AgentStrategy::LazyJuror { abstain_prob: 0.7 }),
    ];
    cfg.contest.bench_size = 1;
    let run = run_scenario(&cfg).unwrap();
    assert!(run.metrics.substitutions > 0);
    assert!(run.metrics.bench_refills > 0);
    assert!(run.metrics.reserve > 0);
    assert_eq!(run.metrics.escrow_residual, 0);
    let mean = |prefix: &str| {
        let rs: Vec<f64> = run
            .final_jurors
            .iter()
            .filter(|p| p.juror_id.as_str().starts_with(prefix))
            .map(|p| p.reputation)
            .collect();
        rs.iter().sum::<f64>() / rs.len() as f64
    };
    assert!(mean("juror-1-") < mean("juror-0-"));
}

#[test]
fn challenge_cap_binds_across_a_wave() {
    let mut cfg = base(8, 40);
    cfg.wave_size = 20;
    cfg.challenge_cap = 3;
    cfg.challengers = vec![group(2, AgentStrategy::FrivolousChallenger { challenge_rate: 1.0 })];
    let run = run_scenario(&cfg).unwrap();
    // two challengers, three slots each, twenty contests per wave
    assert_eq!(run.metrics.capped_submissions, 2 * (20 - 3) * 2);
}

fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mean) * (b - mean)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mean).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - mean).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[test]
fn juror_error_raises_misinformation_survival() {
    let errors = [0.0, 0.1, 0.2, 0.3, 0.4];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for seed in 0..3 {
        for &e in &errors {
            let mut cfg = base(100 + seed, 150);
            cfg.challengers = vec![group(1, AgentStrategy::DiligentChallenger { detection_skill: 1.0 })];
            cfg.jurors = vec![group(60, AgentStrategy::DiligentJuror { error_rate: e })];
            xs.push(e);
            ys.push(run_scenario(&cfg).unwrap().metrics.misinformation_survival_rate);
        }
    }
    let rho = spearman(&xs, &ys);
    assert!(rho > 0.0, "rho = {rho}, survival {ys:?}");
}

#[test]
fn detection_skill_lowers_misinformation_survival() {
    let skills = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for seed in 0..3 {
        for &s in &skills {
            let mut cfg = base(200 + seed, 150);
            cfg.challengers = vec![group(1, AgentStrategy::DiligentChallenger { detection_skill: s })];
            xs.push(s);
            ys.push(run_scenario(&cfg).unwrap().metrics.misinformation_survival_rate);
        }
    }
    let rho = spearman(&xs, &ys);
    assert!(rho < 0.0, "rho = {rho}, survival {ys:?}");
}

#[test]
fn config_validation() {
    let mut unknown: serde_json::Value = serde_json::from_str(ALL_HONEST).unwrap();
    unknown["surprise"] = 1.into();
    assert!(matches!(
        ScenarioConfig::from_json(&unknown.to_string()),
        Err(SimulationError::Json(_))
    ));
    let mut nested: serde_json::Value = serde_json::from_str(ALL_HONEST).unwrap();
    nested["jurors"][0]["strategy"]["mood"] = "grumpy".into();
    assert!(ScenarioConfig::from_json(&nested.to_string()).is_err());

    let invalid = |f: &dyn Fn(&mut ScenarioConfig)| {
        let mut cfg = base(0, 10);
        f(&mut cfg);
        matches!(
            run_scenario(&cfg),
            Err(SimulationError::InvalidConfig(_) | SimulationError::Contest(_))
        )
    };
    assert!(invalid(&|c| c.contests = 0));
    assert!(invalid(&|c| c.creators.clear()));
    assert!(invalid(&|c| c.jurors[0].count = 3));
    assert!(invalid(&|c| c.truth_prior = Some(1.5)));
    assert!(invalid(
        &|c| c.jurors[0].strategy = AgentStrategy::DiligentJuror { error_rate: -0.1 }
    ));
    assert!(invalid(
        &|c| c.jurors[0].strategy = AgentStrategy::LazyJuror { abstain_prob: 1.0 }
    ));
    assert!(invalid(
        &|c| c.challengers[0].strategy = AgentStrategy::HonestCreator { accuracy: 0.5 }
    ));
    assert!(invalid(&|c| c.contest.panel_size = 4));
}

/// Probability that at least `t` of `n` independent seats go to colluders.
fn binomial_tail_dp(n: usize, p: f64, t: usize) -> f64 {
    let mut dist = vec![1.0];
    for _ in 0..n {
        let mut next = vec![0.0; dist.len() + 1];
        for (k, &w) in dist.iter().enumerate() {
            next[k] += w * (1.0 - p);
            next[k + 1] += w * p;
        }
        dist = next;
    }
    dist[t..].iter().sum()
}

#[test]
fn empirical_rate_edge_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let none = empirical_collusion_rate(&CollusionQuery::finite(10_000, 0, 11), 10_000, &mut rng).unwrap();
    assert_eq!(none.successes, 0);
    assert_eq!(none.rate, 0.0);

    let half = binomial_tail_dp(11, 0.5, 6);
    assert!((half - 0.5).abs() < 1e-15);
    for pool in [PoolSize::Finite(10_000), PoolSize::Infinite] {
        let q = CollusionQuery::with_ratio(pool, 0.5, 11);
        let r = empirical_collusion_rate(&q, 20_000, &mut rng).unwrap();
        assert!(r.contains(half), "{r:?}");
    }
    let q = CollusionQuery::binomial(0.3, 11);
    let r = empirical_collusion_rate(&q, 50_000, &mut rng).unwrap();
    assert!(r.contains(binomial_tail_dp(11, 0.3, 6)), "{r:?}");
}

#[test]
fn empirical_rate_matches_reference_cell() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let q = CollusionQuery::with_ratio(PoolSize::Finite(10_000), 0.30, 11);
    let r = empirical_collusion_rate(&q, 100_000, &mut rng).unwrap();
    assert!(r.contains(7.81e-2), "{r:?}");
    let exact = exact_collusion_probability(&q).unwrap().exact_tail;
    assert!(r.contains(exact));
}

#[test]
fn wilson_interval_basics() {
    assert_eq!(wilson_interval(0, 0, 3.0), (0.0, 1.0));
    let (lo, hi) = wilson_interval(0, 1000, 3.0);
    assert_eq!(lo, 0.0);
    assert!(hi > 0.0 && hi < 0.01);
    let (lo, hi) = wilson_interval(500, 1000, 1.96);
    assert!((lo - 0.469).abs() < 1e-3 && (hi - 0.531).abs() < 1e-3);
}

fn item(id: &str, beta: u64, score: f64) -> RankItem {
    RankItem {
        content_id: ContentId::from(id),
        beta: Money::new(beta),
        base_score: score,
    }
}

fn order(items: &[RankItem], w: &VisibilityWeighting) -> Vec<String> {
    visibility_rank(items, w)
        .into_iter()
        .map(|r| r.content_id.to_string())
        .collect()
}

#[test]
fn bonded_content_ranks_first() {
    let w = VisibilityWeighting::default();
    assert_eq!(order(&[item("a", 0, 1.0), item("b", 1000, 1.0)], &w), ["b", "a"]);
    // ties fall back to id order
    assert_eq!(order(&[item("b", 5, 1.0), item("a", 5, 1.0)], &w), ["a", "b"]);
}

#[test]
fn zero_weight_keeps_base_order() {
    let w = VisibilityWeighting {
        weight: 0.0,
        ..Default::default()
    };
    let items = [item("a", 0, 3.0), item("b", 10_000, 1.0), item("c", 500, 2.0)];
    assert_eq!(order(&items, &w), ["a", "c", "b"]);
}

proptest! {
    #[test]
    fn doubling_bonds_preserves_order_at_equal_base(
        bonds in proptest::collection::vec(0u64..1_000_000, 1..20),
        base_score in 0.1f64..100.0,
        weight in 0.0f64..5.0,
    ) {
        let w = VisibilityWeighting { weight, ..Default::default() };
        let items: Vec<_> = bonds.iter().enumerate().map(|(i, &b)| item(&format!("c{i:02}"), b, base_score)).collect();
        let doubled: Vec<_> = items.iter().map(|i| RankItem { beta: Money::new(i.beta.minor_units() * 2), ..i.clone() }).collect();
        prop_assert_eq!(order(&items, &w), order(&doubled, &w));
    }

    #[test]
    fn score_is_monotone_in_bond(b1 in 0u64..1_000_000, b2 in 0u64..1_000_000, base_score in 0.0f64..100.0) {
        let w = VisibilityWeighting::default();
        let (lo, hi) = (b1.min(b2), b1.max(b2));
        prop_assert!(w.score(Money::new(lo), base_score) <= w.score(Money::new(hi), base_score));
    }
}

#[test]
fn randomized_scenarios_conserve_money() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..100 {
        let mut cfg = base(rng.random(), rng.random_range(5..25));
        cfg.bond = Money::new(rng.random_range(1..100_000));
        cfg.contest.panel_size = [1, 3, 5, 7][rng.random_range(0..4)];
        cfg.contest.bench_size = rng.random_range(0..4);
        cfg.jurors = vec![
            group(
                30,
                AgentStrategy::DiligentJuror {
                    error_rate: rng.random_range(0.0..0.5),
                },
            ),
            group(
                10,
                AgentStrategy::LazyJuror {
                    abstain_prob: rng.random_range(0.0..0.9),
                },
            ),
            group(
                5,
                AgentStrategy::ColludingJuror {
                    bloc: 1,
                    target: Verdict::ForChallenger,
                },
            ),
        ];
        cfg.challengers.push(group(
            5,
            AgentStrategy::FrivolousChallenger {
                challenge_rate: rng.random_range(0.0..1.0),
            },
        ));
        let num = rng.random_range(0..5u64);
        let den = 10;
        cfg.contest.policy = veracity_core::PayoutPolicy::new(
            veracity_core::Fraction::new(num, den).unwrap(),
            veracity_core::Fraction::new(rng.random_range(0..=(9 - num)), den).unwrap(),
            veracity_core::JurorFeeCurve::Flat,
        )
        .unwrap();
        let run = run_scenario(&cfg).unwrap_or_else(|e| panic!("scenario {i}: {e}"));
        assert_eq!(run.metrics.escrow_residual, 0, "scenario {i}");
    }
}
