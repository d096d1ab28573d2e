// Copyright 2026 The Veracity Bond Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use veracity_core::jury::{
    assign_evaluators, benefit_at, optimal_participation, reputation_score, select_jury, update_reputation,
    JurorOutcome, ReputationParams,
};
use veracity_core::{JurorProfile, JuryConfig, ParticipantId, RatingValue};

fn pool(n: usize) -> Vec<JurorProfile> {
    (0..n).map(|i| JurorProfile::new(format!("j{i:03}").as_str())).collect()
}

fn random_profile(rng: &mut impl Rng, i: usize) -> JurorProfile {
    let mut p = JurorProfile::new(format!("p{i}").as_str());
    p.visibility = rng.random_range(0.0..10.0);
    p.weight_prosocial = rng.random_range(0.0..5.0);
    p.weight_monetary = rng.random_range(0.0..5.0);
    p.est_va = rng.random_range(-1.0..1.0);
    p.est_vy = rng.random_range(-1.0..1.0);
    p.cost_coefficient = rng.random_range(0.05..5.0);
    p.reputation = reputation_score(&p);
    p
}

#[test]
fn every_eligible_juror_is_equally_likely() {
    let jurors = pool(100);
    let config = JuryConfig::new(100, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let draws = 50_000;
    let mut hits = vec![0u64; jurors.len()];
    for _ in 0..draws {
        let panel = select_jury(&jurors, &config, &BTreeSet::new(), f64::NEG_INFINITY, &mut rng).unwrap();
        for m in &panel.members {
            hits[m.as_str()[1..].parse::<usize>().unwrap()] += 1;
        }
    }
    let expected = draws as f64 * 3.0 / 100.0;
    let chi2: f64 = hits.iter().map(|&h| (h as f64 - expected).powi(2) / expected).sum();
    let critical = ChiSquared::new(99.0).unwrap().inverse_cdf(0.999);
    assert!(chi2 < critical, "chi2 {chi2} >= {critical}");
}

proptest! {
    #[test]
    fn roles_never_overlap(seed: u64, pool_size in 15usize..80, conflicted in 0usize..10, viewers in 5usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let jurors = pool(pool_size);
        let mut excluded = BTreeSet::new();
        for _ in 0..conflicted {
            excluded.insert(jurors[rng.random_range(0..pool_size)].juror_id.clone());
        }
        let config = JuryConfig { bench_size: 2, ..JuryConfig::new(pool_size, 5).unwrap() };
        let panel = match select_jury(&jurors, &config, &excluded, f64::NEG_INFINITY, &mut rng) {
            Ok(p) => p,
            Err(_) => return Ok(()),
        };
        for m in panel.members.iter().chain(panel.bench.iter().map(|b| &b.juror_id)) {
            prop_assert!(!excluded.contains(m));
        }
        let seated: BTreeSet<_> = panel.members.iter().cloned().collect();
        prop_assert_eq!(seated.len(), panel.members.len());

        // viewers overlap the pool on purpose
        let audience: Vec<ParticipantId> = (0..viewers)
            .map(|i| ParticipantId::new(format!("j{:03}", i * 2)))
            .collect();
        let conflicted: BTreeSet<_> = excluded.union(&seated).cloned().collect();
        if let Ok(evaluators) = assign_evaluators(&audience, &conflicted, 3, &mut rng) {
            prop_assert!(evaluators.iter().all(|e| !conflicted.contains(e)));
            let distinct: BTreeSet<_> = evaluators.iter().collect();
            prop_assert_eq!(distinct.len(), evaluators.len());
        }
    }
}

#[test]
fn reputation_is_linear_with_the_right_signs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let d = 0.25;
    for i in 0..1000 {
        let p = random_profile(&mut rng, i);
        let r = reputation_score(&p);
        let bumped = |f: &dyn Fn(&mut JurorProfile)| {
            let mut q = p.clone();
            f(&mut q);
            reputation_score(&q) - r
        };
        let dx = bumped(&|q| q.visibility += d);
        let dva = bumped(&|q| q.est_va += d);
        let dvy = bumped(&|q| q.est_vy += d);
        let tol = 1e-9 * (1.0 + r.abs());
        assert!((dx - d * (p.weight_prosocial * p.est_va - p.weight_monetary * p.est_vy)).abs() < tol);
        assert!((dva - d * p.visibility * p.weight_prosocial).abs() < tol);
        assert!((dvy + d * p.visibility * p.weight_monetary).abs() < tol);
        assert!(dva >= 0.0 && dvy <= 0.0);
        // second differences vanish
        let dva2 = bumped(&|q| q.est_va += 2.0 * d);
        assert!((dva2 - 2.0 * dva).abs() < tol);
    }
}

#[test]
fn optimizer_matches_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..1000 {
        let p = random_profile(&mut rng, i);
        let y = rng.random_range(0.0..2.0);
        let best = (0..=1000)
            .map(|k| k as f64 / 1000.0)
            .max_by(|a, b| benefit_at(&p, y, *a).total_cmp(&benefit_at(&p, y, *b)))
            .unwrap();
        let star = optimal_participation(&p, y);
        assert!((star - best).abs() <= 1e-3 + 1e-12, "a*={star} grid={best}");
        assert!(benefit_at(&p, y, star) >= benefit_at(&p, y, best) - 1e-12);
    }
}

#[test]
fn same_history_same_reputation() {
    let params = ReputationParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let history: Vec<JurorOutcome> = (0..200)
        .map(|_| JurorOutcome {
            ratings: (0..3)
                .map(|_| [RatingValue::No, RatingValue::Neutral, RatingValue::Yes][rng.random_range(0..3)])
                .collect(),
            voted: rng.random_bool(0.9),
            fee: rng.random_range(0.0..2000.0),
        })
        .collect();
    let run = || {
        history
            .iter()
            .fold(JurorProfile::new("a"), |p, o| update_reputation(&p, o, &params))
    };
    let (a, b) = (run(), run());
    assert_eq!(a.reputation.to_bits(), b.reputation.to_bits());
    assert_eq!(a.rating_history, b.rating_history);
}
